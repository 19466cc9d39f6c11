//! Aperture-limited uniform planar arrays at the gNB and the omnidirectional
//! receive antenna.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn wavelength(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

/// Largest square element count whose half-wavelength span fits the aperture side.
pub fn elements_for_aperture(aperture_side_m: f64, carrier_hz: f64) -> Result<(usize, usize)> {
    if !(aperture_side_m > 0.0)
        || !(carrier_hz > 0.0)
        || !aperture_side_m.is_finite()
        || !carrier_hz.is_finite()
    {
        return Err(Error::Domain(format!(
            "aperture side and carrier must be positive (got {aperture_side_m} m, {carrier_hz} Hz)"
        )));
    }
    let half = wavelength(carrier_hz) / 2.0;
    let mut n = (aperture_side_m / half).floor() as usize + 1;
    // guard against the ratio landing a hair above an integer
    while n > 1 && (n - 1) as f64 * half > aperture_side_m {
        n -= 1;
    }
    Ok((n.max(1), n.max(1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringDirection {
    pub azimuth: f64,
    pub elevation: f64,
}

impl SteeringDirection {
    /// Wraps the azimuth into `[−π, π)`; the elevation must lie in `[−π/2, π/2]`.
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        if !azimuth.is_finite() || !(elevation.abs() <= PI / 2.0) {
            return Err(Error::Domain(format!(
                "invalid steering direction ({azimuth}, {elevation})"
            )));
        }
        Ok(SteeringDirection {
            azimuth: wrap_azimuth(azimuth),
            elevation,
        })
    }

    pub fn unit(&self) -> Vec3 {
        Vec3::from_angles(self.azimuth, self.elevation)
    }
}

pub fn wrap_azimuth(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementPattern {
    #[default]
    Isotropic,
    /// 65° half-power beamwidth, 30 dB front-to-back, 8 dBi peak.
    Tr38901,
}

impl ElementPattern {
    pub fn peak_gain_dbi(self) -> f64 {
        match self {
            ElementPattern::Isotropic => 0.0,
            ElementPattern::Tr38901 => 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpaArray {
    pub n_rows: usize,
    pub n_cols: usize,
    pub spacing: f64,
    pub carrier_hz: f64,
    pub boresight: Vec3,
    pub element_gain_dbi: f64,
    pattern: ElementPattern,
    /// Unit vector along which rows are stacked (panel "up").
    row_axis: Vec3,
    /// Horizontal unit vector along each row.
    col_axis: Vec3,
}

impl UpaArray {
    /// Array filling a square aperture, mechanically pointed at
    /// `boresight_azimuth` (rad) and tilted by `downtilt_deg` (negative = down).
    pub fn for_aperture(
        aperture_side_m: f64,
        carrier_hz: f64,
        boresight_azimuth: f64,
        downtilt_deg: f64,
        pattern: ElementPattern,
    ) -> Result<Self> {
        let (r, c) = elements_for_aperture(aperture_side_m, carrier_hz)?;
        Self::with_elements(r, c, carrier_hz, boresight_azimuth, downtilt_deg, pattern)
    }

    pub fn with_elements(
        n_rows: usize,
        n_cols: usize,
        carrier_hz: f64,
        boresight_azimuth: f64,
        downtilt_deg: f64,
        pattern: ElementPattern,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Domain("array needs at least one element".into()));
        }
        if !(carrier_hz > 0.0) || !boresight_azimuth.is_finite() || !(downtilt_deg.abs() <= 90.0) {
            return Err(Error::Domain("invalid array orientation or carrier".into()));
        }
        let boresight = Vec3::from_angles(boresight_azimuth, downtilt_deg.to_radians());
        let col_axis = Vec3::new(-boresight_azimuth.sin(), boresight_azimuth.cos(), 0.0);
        let row_axis = boresight.cross(col_axis);
        Ok(UpaArray {
            n_rows,
            n_cols,
            spacing: wavelength(carrier_hz) / 2.0,
            carrier_hz,
            boresight,
            element_gain_dbi: pattern.peak_gain_dbi(),
            pattern,
            row_axis,
            col_axis,
        })
    }

    pub fn element_count(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / wavelength(self.carrier_hz)
    }

    /// Element position relative to the array centre, row-major index `m·n_cols + n`.
    pub fn element_position(&self, m: usize, n: usize) -> Vec3 {
        let rm = m as f64 - (self.n_rows as f64 - 1.0) / 2.0;
        let cn = n as f64 - (self.n_cols as f64 - 1.0) / 2.0;
        (self.row_axis * rm + self.col_axis * cn) * self.spacing
    }

    /// Element gain in dBi toward unit vector `u`.
    pub fn element_gain_db(&self, u: Vec3) -> f64 {
        match self.pattern {
            ElementPattern::Isotropic => 0.0,
            ElementPattern::Tr38901 => {
                let theta = u.dot(self.row_axis).clamp(-1.0, 1.0).acos().to_degrees();
                let phi = u
                    .dot(self.col_axis)
                    .atan2(u.dot(self.boresight))
                    .to_degrees();
                let a_v = -(12.0 * ((theta - 90.0) / 65.0).powi(2)).min(30.0);
                let a_h = -(12.0 * (phi / 65.0).powi(2)).min(30.0);
                8.0 - (-(a_v + a_h)).min(30.0)
            }
        }
    }

    /// Linear array-factor power gain `|a_s^H a_o|² / N`, evaluated in closed form.
    pub fn array_factor(&self, steer: Vec3, observe: Vec3) -> f64 {
        let delta = steer - observe;
        let kd = self.wavenumber() * self.spacing;
        let dm = dirichlet(self.n_rows, kd * self.row_axis.dot(delta));
        let dn = dirichlet(self.n_cols, kd * self.col_axis.dot(delta));
        dm * dm * dn * dn / self.element_count() as f64
    }

    /// Directional gain in dB: element pattern plus array factor.
    pub fn gain_db_towards(&self, steer: Vec3, observe: Vec3) -> f64 {
        self.element_gain_db(observe) + 10.0 * self.array_factor(steer, observe).log10()
    }
}

/// `|Σ_{m} e^{j(m − (M−1)/2)ψ}| = |sin(Mψ/2) / sin(ψ/2)|`.
fn dirichlet(m: usize, psi: f64) -> f64 {
    if m == 1 {
        return 1.0;
    }
    let s = (psi / 2.0).sin();
    if s.abs() < 1e-12 {
        return m as f64;
    }
    ((m as f64 * psi / 2.0).sin() / s).abs()
}

/// Unit-magnitude entries with phase `−k·(p_mn · u)`.
pub fn steering_vector(array: &UpaArray, dir: SteeringDirection) -> Vec<Complex64> {
    steering_vector_unit(array, dir.unit())
}

pub fn steering_vector_unit(array: &UpaArray, u: Vec3) -> Vec<Complex64> {
    let k = array.wavenumber();
    let mut v = Vec::with_capacity(array.element_count());
    for m in 0..array.n_rows {
        for n in 0..array.n_cols {
            v.push(Complex64::from_polar(
                1.0,
                -k * array.element_position(m, n).dot(u),
            ));
        }
    }
    v
}

/// Gain in dB toward `observe` when the array is steered to `steer`.
pub fn array_gain_db(array: &UpaArray, steer: SteeringDirection, observe: Vec3) -> f64 {
    array.gain_db_towards(steer.unit(), observe)
}

/// Same quantity as [`array_gain_db`] computed from explicit steering vectors.
pub fn array_gain_db_explicit(array: &UpaArray, steer: SteeringDirection, observe: Vec3) -> f64 {
    let a = steering_vector(array, steer);
    let b = steering_vector_unit(array, observe);
    let inner: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
    array.element_gain_db(observe) + 20.0 * inner.norm().log10()
        - 10.0 * (array.element_count() as f64).log10()
}

/// Receive side: a single omnidirectional element.
pub const RX_GAIN_DBI: f64 = 0.0;

/// `n_azimuth` global azimuths `−π + 2πk/n` at one elevation.
pub fn steering_grid(n_azimuth: usize, elevation: f64) -> Vec<SteeringDirection> {
    (0..n_azimuth)
        .map(|k| SteeringDirection {
            azimuth: wrap_azimuth(-PI + 2.0 * PI * k as f64 / n_azimuth as f64),
            elevation,
        })
        .collect()
}

/// Azimuth uniform in `[−π, π)`, elevation uniform in `[el_min, el_max]` (rad).
pub fn random_steering<R: Rng + ?Sized>(
    rng: &mut R,
    el_min: f64,
    el_max: f64,
) -> SteeringDirection {
    let azimuth = rng.gen_range(-PI..PI);
    let elevation = if el_max > el_min {
        rng.gen_range(el_min..=el_max)
    } else {
        el_min
    };
    SteeringDirection { azimuth, elevation }
}
