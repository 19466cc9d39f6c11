//! dB-domain link budget: thermal noise, SNR/INR and Shannon rate.
//! `f64::NEG_INFINITY` dBm stands for "no signal".

use crate::error::{Error, Result};

pub const THERMAL_DENSITY_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
}

impl LinkParams {
    pub fn new(bandwidth_hz: f64, noise_figure_db: f64) -> Result<Self> {
        if !(bandwidth_hz > 0.0) || !bandwidth_hz.is_finite() {
            return Err(Error::Domain(format!(
                "bandwidth must be > 0 (got {bandwidth_hz})"
            )));
        }
        if !(noise_figure_db >= 0.0) || !noise_figure_db.is_finite() {
            return Err(Error::Domain(format!(
                "noise figure must be >= 0 (got {noise_figure_db})"
            )));
        }
        Ok(LinkParams {
            bandwidth_hz,
            noise_figure_db,
        })
    }
}

pub fn noise_power_dbm(p: &LinkParams) -> f64 {
    THERMAL_DENSITY_DBM_HZ + 10.0 * p.bandwidth_hz.log10() + p.noise_figure_db
}

pub fn snr_db(rx_dbm: f64, noise_dbm: f64) -> f64 {
    if rx_dbm == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    rx_dbm - noise_dbm
}

pub fn inr_db(interference_dbm: f64, noise_dbm: f64) -> f64 {
    snr_db(interference_dbm, noise_dbm)
}

pub fn shannon_rate_bps(bandwidth_hz: f64, snr_db: f64) -> f64 {
    if snr_db == f64::NEG_INFINITY {
        return 0.0;
    }
    bandwidth_hz * (10f64.powf(snr_db / 10.0)).ln_1p() / std::f64::consts::LN_2
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10·log10(x)`, with `0 → −∞`.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Power sum of dB quantities; an empty sum is `−∞`.
pub fn power_sum_db<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut it = values
        .into_iter()
        .filter(|v| *v > f64::NEG_INFINITY)
        .peekable();
    if it.peek().is_none() {
        return f64::NEG_INFINITY;
    }
    // factor out the largest term to avoid underflow
    let vals: Vec<f64> = it.collect();
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + linear_to_db(vals.iter().map(|v| db_to_linear(v - m)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn noise_floors() {
        assert!((noise_power_dbm(&LinkParams::new(100e6, 9.0).unwrap()) - -85.0).abs() < 1e-9);
        assert!(
            (noise_power_dbm(&LinkParams::new(400e6, 9.0).unwrap()) - -78.979_400_086_720_37).abs()
                < 1e-9
        );
        assert_eq!(noise_power_dbm(&LinkParams::new(1.0, 0.0).unwrap()), -174.0);
        assert!(LinkParams::new(0.0, 9.0).is_err());
        assert!(LinkParams::new(1e6, -1.0).is_err());
    }

    #[test]
    fn ratios() {
        assert_eq!(snr_db(-80.0, -80.0), 0.0);
        assert!((inr_db(-88.98, -78.98) - -10.0).abs() < 1e-9);
        assert_eq!(snr_db(f64::NEG_INFINITY, -80.0), f64::NEG_INFINITY);
    }

    #[test]
    fn rates() {
        assert!((shannon_rate_bps(100e6, 0.0) - 1e8).abs() < 1e-3);
        let want = 400e6 * (1.0 + 10f64.powf(1.5)).log2();
        assert!((shannon_rate_bps(400e6, 15.0) - want).abs() < 1e-3);
        assert!((shannon_rate_bps(400e6, 15.0) / 2.011e9 - 1.0).abs() < 1e-3);
        assert_eq!(shannon_rate_bps(400e6, f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn power_sums() {
        assert!((power_sum_db([-70.0, -70.0]) - -66.989_700_043_360_19).abs() < 1e-9);
        assert_eq!(power_sum_db([]), f64::NEG_INFINITY);
        assert_eq!(power_sum_db([f64::NEG_INFINITY, -50.0]), -50.0);
    }

    proptest! {
        #[test]
        fn rate_scales_with_bandwidth(b in 1e3f64..1e10, b2 in 1e3f64..1e10, snr in -30.0f64..40.0) {
            let r = shannon_rate_bps(b, snr);
            let r2 = shannon_rate_bps(b2, snr);
            prop_assert!((r - b / b2 * r2).abs() <= 1e-9 * r.max(1.0));
        }

        #[test]
        fn rate_increasing(b in 1e3f64..1e10, s in -30.0f64..40.0, ds in 0.01f64..5.0) {
            prop_assert!(shannon_rate_bps(b, s + ds) > shannon_rate_bps(b, s));
            prop_assert!(shannon_rate_bps(b * 1.5, s) > shannon_rate_bps(b, s));
        }

        #[test]
        fn noise_increasing(b in 1.0f64..1e10, nf in 0.0f64..20.0) {
            let base = noise_power_dbm(&LinkParams::new(b, nf).unwrap());
            prop_assert!(noise_power_dbm(&LinkParams::new(b * 1.01, nf).unwrap()) > base);
            prop_assert!(noise_power_dbm(&LinkParams::new(b, nf + 0.01).unwrap()) > base);
        }

        #[test]
        fn inr_round_trip(x in -200.0f64..50.0, n in -180.0f64..-50.0) {
            let back = inr_db(x, n) + n;
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }
}
