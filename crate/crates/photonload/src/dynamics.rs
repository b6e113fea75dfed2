//! Time evolution of a driven two-level emitter.
//!
//! The equations of motion for the lowering-operator expectation value and
//! the inversion, with a complex drive and detuning Delta, are
//!
//! ```text
//! d<s->/dt = -(gamma + i Delta) <s-> + (Omega(t)/2) <sz>
//! d<sz>/dt = -Gamma (1 + <sz>) - 2 Re(Omega*(t) <s->)
//! ```
//!
//! For a real drive these reduce to the usual Bloch equations. The complex
//! generalization is fixed by requiring that reduction, a real-valued <sz>,
//! and covariance under a global drive phase.

use crate::grid::TimeGrid;
use crate::params::{decoherence_rate, QubitParams};
use crate::waveform::DriveTrace;
use crate::{Error, Result};
use num_complex::Complex64;

/// Time series of the atomic expectation values.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub s_minus: Vec<Complex64>,
    pub s_z: Vec<f64>,
    pub p_e: Vec<f64>,
}

#[derive(Clone, Copy)]
struct State {
    s: Complex64,
    z: f64,
}

#[inline]
fn deriv(state: State, omega: Complex64, gamma: f64, gamma_r: f64, delta: f64) -> State {
    State {
        s: -(Complex64::new(gamma, delta)) * state.s + 0.5 * omega * state.z,
        z: -gamma_r * (1.0 + state.z) - 2.0 * (omega.conj() * state.s).re,
    }
}

/// Integrate the Bloch equations over the drive grid with fixed-step
/// classical RK4; the drive is linearly interpolated at half-steps.
/// `initial` is `(s_minus, s_z)`; the ground state is `(0, -1)`.
pub fn evolve(
    drive: &DriveTrace,
    p: &QubitParams,
    detuning: f64,
    initial: (Complex64, f64),
) -> Result<Trajectory> {
    if drive.omega.len() != drive.grid.len() {
        return Err(Error::GridNonuniform);
    }
    if let Some(mid) = &drive.omega_mid {
        if mid.len() + 1 != drive.grid.len() {
            return Err(Error::GridNonuniform);
        }
    }
    let gamma = decoherence_rate(p);
    let gamma_r = p.gamma_r();
    let dt = drive.grid.dt();
    let n = drive.grid.len();

    let mut s_minus = Vec::with_capacity(n);
    let mut s_z = Vec::with_capacity(n);
    let mut state = State {
        s: initial.0,
        z: initial.1,
    };
    s_minus.push(state.s);
    s_z.push(state.z);

    for i in 0..n - 1 {
        let o0 = drive.omega[i];
        let o1 = drive.omega[i + 1];
        let oh = match &drive.omega_mid {
            Some(mid) => mid[i],
            None => 0.5 * (o0 + o1),
        };

        let k1 = deriv(state, o0, gamma, gamma_r, detuning);
        let mid1 = State {
            s: state.s + 0.5 * dt * k1.s,
            z: state.z + 0.5 * dt * k1.z,
        };
        let k2 = deriv(mid1, oh, gamma, gamma_r, detuning);
        let mid2 = State {
            s: state.s + 0.5 * dt * k2.s,
            z: state.z + 0.5 * dt * k2.z,
        };
        let k3 = deriv(mid2, oh, gamma, gamma_r, detuning);
        let end = State {
            s: state.s + dt * k3.s,
            z: state.z + dt * k3.z,
        };
        let k4 = deriv(end, o1, gamma, gamma_r, detuning);

        state = State {
            s: state.s + dt / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s),
            z: state.z + dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
        };
        if !state.s.is_finite() || !state.z.is_finite() {
            return Err(Error::IntegrationDiverged {
                t: drive.grid.at(i + 1),
            });
        }
        s_minus.push(state.s);
        s_z.push(state.z);
    }

    let p_e = s_z.iter().map(|z| 0.5 * (1.0 + z)).collect();
    Ok(Trajectory {
        grid: drive.grid.clone(),
        s_minus,
        s_z,
        p_e,
    })
}

/// Integrate over contiguous drive segments (as produced by
/// `waveform::drive_segments`), restarting the stepper at each boundary so
/// drive discontinuities never fall inside an RK4 step. Adjacent segments
/// must share their boundary node and step size.
pub fn evolve_piecewise(
    segments: &[DriveTrace],
    p: &QubitParams,
    detuning: f64,
    initial: (Complex64, f64),
) -> Result<Trajectory> {
    let Some(first) = segments.first() else {
        return Err(Error::GridNonuniform);
    };
    let dt = first.grid.dt();
    let mut s_minus: Vec<Complex64> = Vec::new();
    let mut s_z: Vec<f64> = Vec::new();
    let mut state = initial;
    let mut t_expect = first.grid.start();
    for seg in segments {
        if (seg.grid.dt() - dt).abs() > 1e-9 * dt
            || (seg.grid.start() - t_expect).abs() > 1e-6 * dt
        {
            return Err(Error::GridNonuniform);
        }
        let traj = evolve(seg, p, detuning, state)?;
        let skip = usize::from(!s_minus.is_empty());
        s_minus.extend_from_slice(&traj.s_minus[skip..]);
        s_z.extend_from_slice(&traj.s_z[skip..]);
        state = (*traj.s_minus.last().unwrap(), *traj.s_z.last().unwrap());
        t_expect = seg.grid.end();
    }
    let grid = TimeGrid::new(first.grid.start(), dt, s_minus.len())?;
    let p_e = s_z.iter().map(|z| 0.5 * (1.0 + z)).collect();
    Ok(Trajectory {
        grid,
        s_minus,
        s_z,
        p_e,
    })
}

/// Analytic weak-drive value of <s-> at the turn-off of an exponentially
/// rising drive with peak Rabi frequency `omega_peak`: the linearized
/// equations (<sz> ~= -1) give -Omega_0 / (2 (gamma + 1/tau)). Serves as an
/// independent oracle for `evolve`.
pub fn weak_drive_closed_form(tau: f64, omega_peak: f64, p: &QubitParams) -> Complex64 {
    let gamma = decoherence_rate(p);
    Complex64::new(-omega_peak / (2.0 * (gamma + 1.0 / tau)), 0.0)
}
