//! Footprint validation, ear-clipping triangulation and prism extrusion.

use crate::error::{Error, Result};
use crate::geometry::{Tri, Vec3};

pub fn signed_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        * 0.5
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross2(q1, q2, p1);
    let d2 = cross2(q1, q2, p2);
    let d3 = cross2(p1, p2, q1);
    let d4 = cross2(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: [f64; 2], b: [f64; 2], p: [f64; 2], d: f64| {
        d == 0.0
            && p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Checks the footprint is a simple polygon with at least three distinct vertices.
pub fn validate_polygon(poly: &[[f64; 2]]) -> Result<()> {
    let n = poly.len();
    if n < 3 {
        return Err(Error::Validation(format!(
            "footprint has {n} vertices, need at least 3"
        )));
    }
    if poly.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::Validation(
            "footprint has non-finite coordinates".into(),
        ));
    }
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a == b {
            return Err(Error::Validation(format!("footprint repeats vertex {i}")));
        }
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            // adjacent edges share an endpoint by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Err(Error::Validation(format!(
                    "footprint is self-intersecting (edges {i} and {j})"
                )));
            }
        }
    }
    if signed_area(poly).abs() <= 1e-9 {
        return Err(Error::Validation("footprint has zero area".into()));
    }
    Ok(())
}

/// Returns the polygon in counter-clockwise order.
pub fn ccw(poly: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = poly.to_vec();
    if signed_area(&p) < 0.0 {
        p.reverse();
    }
    p
}

pub fn is_convex(poly_ccw: &[[f64; 2]]) -> bool {
    let n = poly_ccw.len();
    (0..n).all(|i| cross2(poly_ccw[i], poly_ccw[(i + 1) % n], poly_ccw[(i + 2) % n]) >= 0.0)
}

fn point_in_tri(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    cross2(a, b, p) >= 0.0 && cross2(b, c, p) >= 0.0 && cross2(c, a, p) >= 0.0
}

/// Ear clipping of a simple CCW polygon into `n - 2` index triangles.
pub fn ear_clip(poly_ccw: &[[f64; 2]]) -> Vec<[usize; 3]> {
    let mut idx: Vec<usize> = (0..poly_ccw.len()).collect();
    let mut out = Vec::with_capacity(poly_ccw.len().saturating_sub(2));
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ip, ic, inx) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (poly_ccw[ip], poly_ccw[ic], poly_ccw[inx]);
            if cross2(a, b, c) <= 0.0 {
                continue;
            }
            let blocked = idx
                .iter()
                .filter(|&&k| k != ip && k != ic && k != inx)
                .any(|&k| {
                    let p = poly_ccw[k];
                    p != a && p != b && p != c && point_in_tri(p, a, b, c)
                });
            if blocked {
                continue;
            }
            out.push([ip, ic, inx]);
            idx.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            // only collinear runs remain; fan out whatever is left
            let first = idx[0];
            for w in idx[1..].windows(2) {
                out.push([first, w[0], w[1]]);
            }
            return out;
        }
    }
    out.push([idx[0], idx[1], idx[2]]);
    out
}

/// Walls (two triangles per edge) followed by the roof triangulation.
/// Normals point out of the solid.
pub fn extrude(poly_ccw: &[[f64; 2]], height: f64) -> Vec<Tri> {
    let n = poly_ccw.len();
    let mut tris = Vec::with_capacity(2 * n + n - 2);
    for i in 0..n {
        let a = poly_ccw[i];
        let b = poly_ccw[(i + 1) % n];
        let a0 = Vec3::new(a[0], a[1], 0.0);
        let b0 = Vec3::new(b[0], b[1], 0.0);
        let ah = Vec3::new(a[0], a[1], height);
        let bh = Vec3::new(b[0], b[1], height);
        tris.push(Tri::new(a0, b0, bh));
        tris.push(Tri::new(a0, bh, ah));
    }
    for [i, j, k] in ear_clip(poly_ccw) {
        let v = |q: usize| Vec3::new(poly_ccw[q][0], poly_ccw[q][1], height);
        tris.push(Tri::new(v(i), v(j), v(k)));
    }
    tris
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bowtie_is_rejected() {
        let bowtie = [[0.0, 0.0], [10.0, 10.0], [10.0, 0.0], [0.0, 10.0]];
        assert!(validate_polygon(&bowtie).is_err());
    }

    #[test]
    fn concave_l_shape_triangulates_fully() {
        let l = ccw(&[
            [0.0, 0.0],
            [20.0, 0.0],
            [20.0, 5.0],
            [5.0, 5.0],
            [5.0, 20.0],
            [0.0, 20.0],
        ]);
        validate_polygon(&l).unwrap();
        assert!(!is_convex(&l));
        let tris = ear_clip(&l);
        assert_eq!(tris.len(), 4);
        let area: f64 = tris
            .iter()
            .map(|t| 0.5 * cross2(l[t[0]], l[t[1]], l[t[2]]).abs())
            .sum();
        assert!((area - signed_area(&l)).abs() < 1e-9);
    }

    #[test]
    fn square_prism_has_ten_triangles_with_outward_normals() {
        let sq = ccw(&[[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]]);
        let tris = extrude(&sq, 20.0);
        assert_eq!(tris.len(), 10);
        let center = Vec3::new(5.0, 5.0, 10.0);
        for t in &tris {
            assert!(t.normal().dot(t.centroid() - center) > 0.0);
        }
    }
}
