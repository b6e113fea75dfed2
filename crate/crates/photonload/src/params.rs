//! Device parameters and derived quantities.
//!
//! All rates are stored internally as angular rates (rad/s). Constructors
//! accept either angular rates or cyclic frequencies (the values quoted as
//! f/2pi); mixing the two conventions is the most common source of factor-2pi
//! bugs, so the unit choice is explicit at the call site.

use crate::{Error, Result, HBAR};
use std::f64::consts::TAU;

/// Two-level emitter parameters: relaxation, pure dephasing, transition
/// frequency, field coupling, and line impedance.
#[derive(Clone, Debug)]
pub struct QubitParams {
    gamma_r: f64,
    gamma_phi: f64,
    omega_10: f64,
    k_coupling: f64,
    z0: f64,
    label: String,
}

impl QubitParams {
    /// Build from angular rates (rad/s). `k_coupling` in (rad/s)/sqrt(W);
    /// pass `None` to use the ideal-calibration value `2 sqrt(Gamma / (hbar omega_10))`.
    pub fn from_angular(
        gamma_r: f64,
        gamma_phi: f64,
        omega_10: f64,
        k_coupling: Option<f64>,
        z0: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(gamma_r > 0.0) {
            return Err(Error::InvalidParams(format!(
                "relaxation rate must be positive, got {gamma_r}"
            )));
        }
        if !(gamma_phi >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "pure dephasing rate must be nonnegative, got {gamma_phi}"
            )));
        }
        if !(omega_10 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "transition frequency must be positive, got {omega_10}"
            )));
        }
        if !(z0 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "line impedance must be positive, got {z0}"
            )));
        }
        let k = k_coupling.unwrap_or_else(|| 2.0 * (gamma_r / (HBAR * omega_10)).sqrt());
        if !(k > 0.0) {
            return Err(Error::InvalidParams(format!(
                "coupling constant must be positive, got {k}"
            )));
        }
        Ok(Self {
            gamma_r,
            gamma_phi,
            omega_10,
            k_coupling: k,
            z0,
            label: label.into(),
        })
    }

    /// Build from cyclic frequencies in Hz (Gamma/2pi, Gamma_phi/2pi, omega_10/2pi).
    pub fn from_cyclic_hz(
        gamma_r_hz: f64,
        gamma_phi_hz: f64,
        f_10_hz: f64,
        k_coupling: Option<f64>,
        z0: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        Self::from_angular(
            TAU * gamma_r_hz,
            TAU * gamma_phi_hz,
            TAU * f_10_hz,
            k_coupling,
            z0,
            label,
        )
    }

    /// Bundled preset for the first measured device.
    pub fn sample1() -> Self {
        Self::from_cyclic_hz(1.686e6, 0.113e6, 4.8514e9, None, 50.0, "Sample 1").unwrap()
    }

    /// Bundled preset for the second measured device.
    pub fn sample2() -> Self {
        Self::from_cyclic_hz(2.046e6, 0.031e6, 4.8187e9, None, 50.0, "Sample 2").unwrap()
    }

    /// Relaxation rate Gamma, rad/s.
    pub fn gamma_r(&self) -> f64 {
        self.gamma_r
    }

    /// Pure dephasing rate Gamma_phi, rad/s.
    pub fn gamma_phi(&self) -> f64 {
        self.gamma_phi
    }

    /// Transition frequency omega_10, rad/s.
    pub fn omega_10(&self) -> f64 {
        self.omega_10
    }

    /// Atom-field coupling constant k in Omega = k sqrt(P_in), (rad/s)/sqrt(W).
    pub fn k_coupling(&self) -> f64 {
        self.k_coupling
    }

    /// Line impedance Z0, ohms.
    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Decoherence rate gamma = Gamma/2 + Gamma_phi, rad/s.
pub fn decoherence_rate(p: &QubitParams) -> f64 {
    0.5 * p.gamma_r() + p.gamma_phi()
}

/// Coherence times (T1, T2) in seconds: T1 = 1/Gamma, T2 = 1/gamma.
pub fn coherence_times(p: &QubitParams) -> (f64, f64) {
    (1.0 / p.gamma_r(), 1.0 / decoherence_rate(p))
}

/// Transmon charging and Josephson energies, given as frequencies (E/h, Hz).
#[derive(Clone, Copy, Debug)]
pub struct TransmonEnergies {
    e_c: f64,
    e_j: f64,
}

impl TransmonEnergies {
    pub fn new(e_c_hz: f64, e_j_hz: f64) -> Result<Self> {
        if !(e_c_hz > 0.0) || !(e_j_hz > 0.0) {
            return Err(Error::InvalidParams(
                "transmon energies must be positive".into(),
            ));
        }
        if e_j_hz / e_c_hz <= 1.0 {
            return Err(Error::InvalidParams(format!(
                "E_J/E_C = {:.3} is outside the transmon regime",
                e_j_hz / e_c_hz
            )));
        }
        Ok(Self {
            e_c: e_c_hz,
            e_j: e_j_hz,
        })
    }

    pub fn e_c_hz(&self) -> f64 {
        self.e_c
    }

    pub fn e_j_hz(&self) -> f64 {
        self.e_j
    }
}

/// Transition frequency sqrt(8 E_J E_C) - E_C, in Hz.
pub fn transmon_frequency(e: &TransmonEnergies) -> f64 {
    (8.0 * e.e_j * e.e_c).sqrt() - e.e_c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoherence_rate_samples() {
        // gamma/2pi = 0.956 MHz and 1.054 MHz to three significant figures.
        let g1 = decoherence_rate(&QubitParams::sample1()) / TAU;
        assert!((g1 - 0.956e6).abs() < 0.5e3, "got {g1}");
        let g2 = decoherence_rate(&QubitParams::sample2()) / TAU;
        assert!((g2 - 1.054e6).abs() < 0.5e3, "got {g2}");
    }

    #[test]
    fn decoherence_rate_zero_dephasing() {
        let p = QubitParams::from_cyclic_hz(2e6, 0.0, 5e9, None, 50.0, "test").unwrap();
        assert!((decoherence_rate(&p) / TAU - 1e6).abs() < 1e-6);
    }

    #[test]
    fn coherence_times_samples() {
        let (t1, t2) = coherence_times(&QubitParams::sample1());
        assert!((t1 - 94.4e-9).abs() < 0.5e-9, "T1 = {t1}");
        assert!((t2 - 166e-9).abs() < 0.5e-9, "T2 = {t2}");
        let (t1, t2) = coherence_times(&QubitParams::sample2());
        assert!((t1 - 77.8e-9).abs() < 0.5e-9, "T1 = {t1}");
        assert!((t2 - 151e-9).abs() < 0.5e-9, "T2 = {t2}");
    }

    #[test]
    fn coherence_time_unit_case() {
        let p = QubitParams::from_cyclic_hz(1.0 / TAU, 0.0, 5e9, None, 50.0, "unit").unwrap();
        let (t1, _) = coherence_times(&p);
        assert!((t1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transmon_frequency_samples() {
        let e1 = TransmonEnergies::new(385e6, 8.9e9).unwrap();
        assert!((transmon_frequency(&e1) - 4.85e9).abs() < 0.01e9);
        let e2 = TransmonEnergies::new(200e6, 15.7e9).unwrap();
        assert!((transmon_frequency(&e2) - 4.81e9).abs() < 0.01e9);
    }

    #[test]
    fn transmon_frequency_symmetric_case() {
        // E_J = E_C = E is below the regime guard, so evaluate the formula directly.
        let e = TransmonEnergies::new(1e9, 1.0001e9).unwrap();
        let expect = (8.0f64 * 1e9 * 1.0001e9).sqrt() - 1e9;
        assert!((transmon_frequency(&e) - expect).abs() < 1.0);
    }

    #[test]
    fn dephasing_ratios_match_reported() {
        let p1 = QubitParams::sample1();
        let r1 = p1.gamma_phi() / p1.gamma_r();
        assert!((r1 - 0.067).abs() / 0.067 < 0.01, "ratio {r1}");
        let p2 = QubitParams::sample2();
        let r2 = p2.gamma_phi() / p2.gamma_r();
        assert!((r2 - 0.0152).abs() / 0.0152 < 0.01, "ratio {r2}");
    }

    #[test]
    fn validation_is_eager() {
        assert!(QubitParams::from_angular(-1.0, 0.0, 1.0, None, 50.0, "x").is_err());
        assert!(QubitParams::from_angular(1.0, -1.0, 1.0, None, 50.0, "x").is_err());
        assert!(QubitParams::from_angular(1.0, 0.0, 0.0, None, 50.0, "x").is_err());
        assert!(QubitParams::from_angular(1.0, 0.0, 1.0, None, 0.0, "x").is_err());
        assert!(TransmonEnergies::new(2e9, 1e9).is_err());
    }

    #[test]
    fn default_coupling_matches_calibration() {
        let p = QubitParams::sample1();
        let expect = 2.0 * (p.gamma_r() / (HBAR * p.omega_10())).sqrt();
        assert!((p.k_coupling() - expect).abs() / expect < 1e-15);
    }
}
