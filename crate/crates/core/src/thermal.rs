//! Temperature dependence of the model: cavity and exciton energies, the
//! sigmoidal phonon-assisted feeding rate, and the coupling-regime bands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalModel {
    /// Cavity energy at 0 K (meV).
    pub omega_c0: f64,
    /// Refractive-index coefficient (1/K).
    pub a_idx: f64,
    /// Band gap at 0 K (meV).
    pub e_g0: f64,
    /// Varshni α (meV/K).
    pub alpha_v: f64,
    /// Varshni β (K).
    pub beta_v: f64,
    /// Saturation value of the phonon rate (meV).
    pub p_tilde: f64,
    pub a: f64,
    /// Sigmoid steepness (1/K).
    pub b: f64,
    /// Sigmoid midpoint offset (K).
    pub t_prime: f64,
}

impl Default for ThermalModel {
    fn default() -> Self {
        Self {
            omega_c0: 1043.27,
            a_idx: 0.852e-5,
            e_g0: 1044.5,
            alpha_v: 0.7,
            beta_v: 590.0,
            p_tilde: 0.45,
            a: 0.5,
            b: 0.2,
            t_prime: 30.0,
        }
    }
}

impl ThermalModel {
    pub fn validate(&self) -> Result<()> {
        let positive = [("a", self.a), ("b", self.b), ("beta_v", self.beta_v)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {v}") });
            }
        }
        if !(self.p_tilde.is_finite() && self.p_tilde >= 0.0) {
            return Err(Error::InvalidParameter { name: "p_tilde", reason: format!("must be >= 0, got {}", self.p_tilde) });
        }
        for (name, v) in [
            ("omega_c0", self.omega_c0),
            ("a_idx", self.a_idx),
            ("e_g0", self.e_g0),
            ("alpha_v", self.alpha_v),
            ("t_prime", self.t_prime),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "must be finite".into() });
            }
        }
        Ok(())
    }

    /// `ω_c(T) = ω_c(0) / (1 + a T)`.
    pub fn cavity_energy(&self, t: f64) -> f64 {
        self.omega_c0 / (1.0 + self.a_idx * t)
    }

    /// Varshni law `E_g(0) − α T² / (T + β)`.
    pub fn exciton_energy(&self, t: f64) -> f64 {
        self.e_g0 - self.alpha_v * t * t / (t + self.beta_v)
    }

    pub fn detuning(&self, t: f64) -> f64 {
        self.exciton_energy(t) - self.cavity_energy(t)
    }

    /// `P̃ / (1 + A e^{−B (T − T′)})`.
    pub fn phonon_rate(&self, t: f64) -> f64 {
        self.p_tilde / (1.0 + self.a * (-self.b * (t - self.t_prime)).exp())
    }

    pub fn classify(&self, p_theta: f64) -> Region {
        classify_region(p_theta, self)
    }

    pub fn region_at(&self, t: f64) -> Region {
        self.classify(self.phonon_rate(t))
    }
}

pub fn cavity_energy(t: f64, m: &ThermalModel) -> f64 {
    m.cavity_energy(t)
}

pub fn exciton_energy(t: f64, m: &ThermalModel) -> f64 {
    m.exciton_energy(t)
}

pub fn phonon_rate(t: f64, m: &ThermalModel) -> f64 {
    m.phonon_rate(t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonancePoint {
    /// Crossover temperature (K).
    pub t0: f64,
    /// Common energy at the crossover (meV).
    pub omega0: f64,
}

pub const SEARCH_LO: f64 = 0.0;
pub const SEARCH_HI: f64 = 300.0;
const SCAN_POINTS: usize = 3000;
const ROOT_TOL: f64 = 1e-9;

/// Temperature where the cavity and exciton energies meet, searched on
/// `[0, 300] K` by a coarse sign-change scan and bisection.
pub fn resonance_temperature(m: &ThermalModel) -> Result<ResonancePoint> {
    resonance_temperature_in(m, SEARCH_LO, SEARCH_HI)
}

pub fn resonance_temperature_in(m: &ThermalModel, lo: f64, hi: f64) -> Result<ResonancePoint> {
    let f = |t: f64| m.detuning(t);
    let no_crossing = Error::NoCrossing { lo, hi };
    let step = (hi - lo) / SCAN_POINTS as f64;
    let mut a = lo;
    let mut fa = f(a);
    let mut bracket = None;
    for k in 1..=SCAN_POINTS {
        let b = lo + step * k as f64;
        let fb = f(b);
        if fa == 0.0 && fb == 0.0 {
            // identically coincident curves have no isolated root
            return Err(no_crossing);
        }
        if fa == 0.0 {
            return Ok(ResonancePoint { t0: a, omega0: m.cavity_energy(a) });
        }
        if fa.signum() != fb.signum() {
            bracket = Some((a, b, fa));
            break;
        }
        a = b;
        fa = fb;
    }
    let (mut a, mut b, mut fa) = bracket.ok_or(no_crossing)?;
    // Bisect to the limit of double precision, then confirm the residual.
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let t0 = if f(a).abs() <= f(b).abs() { a } else { b };
    if f(t0).abs() >= ROOT_TOL {
        return Err(Error::NoCrossing { lo, hi });
    }
    Ok(ResonancePoint { t0, omega0: 0.5 * (m.cavity_energy(t0) + m.exciton_energy(t0)) })
}

/// Coupling regime by phonon-rate ratio `P_θ / P̃`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    /// Ratio below 0.1: plain Jaynes–Cummings behaviour.
    I,
    /// Ratio in [0.1, 0.8): selective broadening.
    II,
    /// Ratio at or above 0.8: resonance-state regime.
    III,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
        }
    }
}

pub const REGION_II_RATIO: f64 = 0.1;
pub const REGION_III_RATIO: f64 = 0.8;

/// Boundary ratios belong to the higher region.
pub fn classify_region(p_theta: f64, m: &ThermalModel) -> Region {
    let ratio = if m.p_tilde > 0.0 { p_theta / m.p_tilde } else { 0.0 };
    if ratio >= REGION_III_RATIO {
        Region::III
    } else if ratio >= REGION_II_RATIO {
        Region::II
    } else {
        Region::I
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_temperature_values() {
        let m = ThermalModel::default();
        assert_eq!(m.cavity_energy(0.0), 1043.27);
        assert_eq!(m.exciton_energy(0.0), 1044.5);
    }

    #[test]
    fn curves_meet_near_reported_crossover() {
        let m = ThermalModel::default();
        assert!((m.cavity_energy(37.43) - 1042.94).abs() < 0.01);
        assert!((m.exciton_energy(37.43) - 1042.94).abs() < 0.01);
    }

    #[test]
    fn degenerate_coefficients_freeze_curves() {
        let m = ThermalModel { a_idx: 0.0, alpha_v: 0.0, ..Default::default() };
        for t in [0.0, 10.0, 100.0] {
            assert_eq!(m.cavity_energy(t), m.omega_c0);
            assert_eq!(m.exciton_energy(t), m.e_g0);
        }
    }

    #[test]
    fn phonon_rate_limits() {
        let m = ThermalModel::default();
        assert!((m.phonon_rate(30.0) - 0.30).abs() < 1e-15);
        assert!((m.phonon_rate(1e4) - m.p_tilde).abs() < 1e-15);
        let r15 = m.phonon_rate(15.0) / m.p_tilde;
        let r33 = m.phonon_rate(33.0) / m.p_tilde;
        // 1/(1+0.5 e^3) and 1/(1+0.5 e^-0.6)
        assert!((r15 - 1.0 / (1.0 + 0.5 * 3f64.exp())).abs() < 1e-15);
        assert!((r15 - 0.0906).abs() < 5e-4);
        assert!((r33 - 0.7847).abs() < 5e-4);
    }

    #[test]
    fn crossover_root() {
        let m = ThermalModel::default();
        let r = resonance_temperature(&m).unwrap();
        assert!((r.t0 - 37.43).abs() < 0.05, "{}", r.t0);
        assert!((r.omega0 - 1042.94).abs() < 0.01);
        assert!(m.detuning(r.t0).abs() < 1e-9);
    }

    #[test]
    fn crossover_moves_with_gap() {
        let m = ThermalModel::default();
        let shifted = ThermalModel { e_g0: m.e_g0 + 1.0, ..m };
        assert!(resonance_temperature(&shifted).unwrap().t0 > resonance_temperature(&m).unwrap().t0);
    }

    #[test]
    fn identical_constant_curves_have_no_root() {
        let m = ThermalModel { a_idx: 0.0, alpha_v: 0.0, e_g0: 1043.27, ..Default::default() };
        assert!(matches!(resonance_temperature(&m), Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn regions() {
        let m = ThermalModel::default();
        assert_eq!(classify_region(0.05 * m.p_tilde, &m), Region::I);
        assert_eq!(classify_region(0.5 * m.p_tilde, &m), Region::II);
        assert_eq!(classify_region(0.9 * m.p_tilde, &m), Region::III);
        assert_eq!(classify_region(0.1 * m.p_tilde, &m), Region::II);
        assert_eq!(classify_region(0.8 * m.p_tilde, &m), Region::III);
    }

    #[test]
    fn validation() {
        assert!(ThermalModel { a: 0.0, ..Default::default() }.validate().is_err());
        assert!(ThermalModel { beta_v: -1.0, ..Default::default() }.validate().is_err());
        ThermalModel::default().validate().unwrap();
    }
}
