//! Bounding volume hierarchy over scene triangles, built with binned SAH.

use crate::geometry::{Aabb, Tri, Vec3};

const LEAF_SIZE: usize = 4;
const BINS: usize = 12;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: first primitive index in `order`. Interior: index of the right child
    /// (the left child immediately follows its parent).
    start_or_right: u32,
    count: u32,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

struct BuildItem {
    bounds: Aabb,
    centroid: Vec3,
}

impl Bvh {
    pub fn build(tris: &[Tri]) -> Bvh {
        let items: Vec<BuildItem> = tris
            .iter()
            .map(|t| {
                let b = t.bounds();
                BuildItem {
                    bounds: b,
                    centroid: b.centroid(),
                }
            })
            .collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * tris.len().max(1));
        if !tris.is_empty() {
            build_rec(&items, &mut order, 0, tris.len(), &mut nodes);
        }
        Bvh { nodes, order }
    }

    /// Visits every primitive whose leaf box is crossed by the ray on `[t0, t1]`.
    /// The visitor may shrink `t1` by returning a new bound, or stop with `None`.
    #[inline]
    pub fn traverse<F>(&self, origin: Vec3, dir: Vec3, t0: f64, mut t1: f64, mut visit: F)
    where
        F: FnMut(u32, f64) -> Option<f64>,
    {
        if self.nodes.is_empty() {
            return;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack: [u32; 64] = [0; 64];
        let mut sp = 1usize;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if node.bounds.ray_interval(origin, inv, t0, t1).is_none() {
                continue;
            }
            if node.count > 0 {
                let s = node.start_or_right as usize;
                for &prim in &self.order[s..s + node.count as usize] {
                    match visit(prim, t1) {
                        Some(nt) => t1 = nt,
                        None => return,
                    }
                }
            } else {
                let left = stack[sp] + 1;
                let right = node.start_or_right;
                // near child last so it is popped first
                let axis_dir = {
                    let l = &self.nodes[left as usize].bounds;
                    let r = &self.nodes[right as usize].bounds;
                    let cl = l.centroid();
                    let cr = r.centroid();
                    (cr - cl).dot(dir) >= 0.0
                };
                if sp + 2 > stack.len() {
                    // degenerate depth; fall back to visiting everything below
                    for &prim in self.subtree_prims(stack[sp]) {
                        match visit(prim, t1) {
                            Some(nt) => t1 = nt,
                            None => return,
                        }
                    }
                    continue;
                }
                if axis_dir {
                    stack[sp] = right;
                    stack[sp + 1] = left;
                } else {
                    stack[sp] = left;
                    stack[sp + 1] = right;
                }
                sp += 2;
            }
        }
    }

    fn subtree_prims(&self, node: u32) -> &[u32] {
        // contiguous because children partition their parent's range
        let mut first = node as usize;
        while self.nodes[first].count == 0 {
            first += 1;
        }
        let start = self.nodes[first].start_or_right as usize;
        let mut last = node as usize;
        while self.nodes[last].count == 0 {
            last = self.nodes[last].start_or_right as usize;
        }
        let end = self.nodes[last].start_or_right as usize + self.nodes[last].count as usize;
        &self.order[start..end]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

fn build_rec(
    items: &[BuildItem],
    order: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let idx = nodes.len() as u32;
    let bounds = order[start..end]
        .iter()
        .fold(Aabb::EMPTY, |b, &i| b.union(items[i as usize].bounds));
    nodes.push(Node {
        bounds,
        start_or_right: start as u32,
        count: (end - start) as u32,
    });
    let n = end - start;
    if n <= LEAF_SIZE {
        return idx;
    }
    let cbounds = order[start..end]
        .iter()
        .fold(Aabb::EMPTY, |b, &i| b.grow(items[i as usize].centroid));
    let extent = cbounds.max - cbounds.min;

    let mut best: Option<(f64, usize, f64)> = None;
    for axis in 0..3 {
        if extent[axis] <= 0.0 {
            continue;
        }
        let mut bin_bounds = [Aabb::EMPTY; BINS];
        let mut bin_count = [0usize; BINS];
        let scale = BINS as f64 / extent[axis];
        for &i in &order[start..end] {
            let it = &items[i as usize];
            let b = (((it.centroid[axis] - cbounds.min[axis]) * scale) as usize).min(BINS - 1);
            bin_count[b] += 1;
            bin_bounds[b] = bin_bounds[b].union(it.bounds);
        }
        for split in 1..BINS {
            let (mut lb, mut lc, mut rb, mut rc) = (Aabb::EMPTY, 0, Aabb::EMPTY, 0);
            for b in 0..split {
                lb = lb.union(bin_bounds[b]);
                lc += bin_count[b];
            }
            for b in split..BINS {
                rb = rb.union(bin_bounds[b]);
                rc += bin_count[b];
            }
            if lc == 0 || rc == 0 {
                continue;
            }
            let cost = lb.surface_area() * lc as f64 + rb.surface_area() * rc as f64;
            let pos = cbounds.min[axis] + extent[axis] * split as f64 / BINS as f64;
            if best.map_or(true, |(c, _, _)| cost < c) {
                best = Some((cost, axis, pos));
            }
        }
    }

    let mid = match best {
        Some((_, axis, pos)) => {
            let slice = &mut order[start..end];
            let mut i = 0;
            for j in 0..slice.len() {
                if items[slice[j] as usize].centroid[axis] < pos {
                    slice.swap(i, j);
                    i += 1;
                }
            }
            start + i
        }
        None => start + n / 2,
    };
    let mid = if mid == start || mid == end {
        start + n / 2
    } else {
        mid
    };

    nodes[idx as usize].count = 0;
    build_rec(items, order, start, mid, nodes);
    let right = build_rec(items, order, mid, end, nodes);
    nodes[idx as usize].start_or_right = right;
    idx
}
