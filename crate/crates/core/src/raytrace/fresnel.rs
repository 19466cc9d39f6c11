//! Fresnel integrals and the knife-edge diffraction coefficient.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 200;
const SERIES_LIMIT: f64 = 1.5;

/// `(C(x), S(x))` with `C(x) = ∫₀ˣ cos(πt²/2) dt`, `S(x) = ∫₀ˣ sin(πt²/2) dt`.
/// Power series for small arguments, a continued fraction otherwise.
pub fn fresnel_integrals(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (c, s) = if ax < 1e-150 {
        (ax, 0.0)
    } else if ax <= SERIES_LIMIT {
        series(ax)
    } else {
        continued_fraction(ax)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

fn series(x: f64) -> (f64, f64) {
    // C = Σ (−1)^k (π/2)^{2k} x^{4k+1} / ((2k)! (4k+1)),
    // S = Σ (−1)^k (π/2)^{2k+1} x^{4k+3} / ((2k+1)! (4k+3))
    let fact = FRAC_PI_2 * x * x;
    let mut term = x;
    let (mut c, mut s) = (x, 0.0);
    let mut sign_c = 1.0;
    let mut sign_s = 1.0;
    for k in 1..MAX_ITER {
        term *= fact / k as f64;
        let n = (2 * k + 1) as f64;
        if k % 2 == 1 {
            s += sign_s * term / n;
            sign_s = -sign_s;
        } else {
            sign_c = -sign_c;
            c += sign_c * term / n;
        }
        if term < EPS * c.abs().max(s.abs()) {
            break;
        }
    }
    (c, s)
}

fn continued_fraction(x: f64) -> (f64, f64) {
    // Lentz evaluation of the complementary error function representation
    let pix2 = PI * x * x;
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1e300, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut n = -1.0;
    for _ in 2..MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += Complex64::new(4.0, 0.0);
        d = 1.0 / (d * a + b);
        cc = b + a / cc;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    let cs = Complex64::new(0.5, 0.5)
        * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 0.5 * pix2) * h);
    (cs.re, cs.im)
}

/// Complex field ratio behind a knife edge, `F(ν) = (1+j)/2 ∫_ν^∞ e^{−jπt²/2} dt`.
pub fn knife_edge_coefficient(nu: f64) -> Complex64 {
    let (c, s) = fresnel_integrals(nu);
    Complex64::new(0.5, 0.5) * Complex64::new(0.5 - c, -(0.5 - s))
}

/// Additional loss in dB (positive) for Fresnel–Kirchhoff parameter `ν`.
pub fn knife_edge_loss_db(nu: f64) -> f64 {
    -10.0 * knife_edge_coefficient(nu).norm_sqr().log10()
}

/// `ν` for a path whose length exceeds the direct ray by `excess_m`
/// (`Δ = ν²λ/4` to second order).
pub fn nu_from_excess(excess_m: f64, wavelength_m: f64) -> f64 {
    2.0 * (excess_m.max(0.0) / wavelength_m).sqrt()
}
