//! Input pulse envelopes, photon-number normalization, and phase schedules.

use crate::grid::{trapezoid, TimeGrid};
use crate::params::{coherence_times, QubitParams};
use crate::{Error, Result, HBAR};
use num_complex::Complex64;

/// Pulse envelope shapes. For `Gaussian`, `tau` is the full width at half
/// maximum; for the others it is the rise/decay constant or square width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseShape {
    ExpRising,
    ExpDecaying,
    Square,
    Gaussian,
}

/// Pulse amplitude, either a peak voltage at the sample plane or a target
/// average photon number to normalize to.
#[derive(Clone, Copy, Debug)]
pub enum Amplitude {
    PeakVolts(f64),
    TargetN(f64),
}

/// Phase-shaping schedule: the pulse-on window is split into `m` equal
/// segments; the drive phase is 0 on the first half of each segment and
/// `theta` on the second half.
#[derive(Clone, Copy, Debug)]
pub struct PhaseSegments {
    pub m: u32,
    pub theta: f64,
}

/// Declarative waveform description.
#[derive(Clone, Debug)]
pub struct PulseSpec {
    pub shape: PulseShape,
    pub tau: f64,
    pub t_start: f64,
    pub t_off: f64,
    pub amplitude: Amplitude,
    pub phase_segments: Option<PhaseSegments>,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(self.t_off > self.t_start) {
            return Err(Error::InvalidParams(
                "t_off must be greater than t_start".into(),
            ));
        }
        match self.amplitude {
            Amplitude::PeakVolts(v) if v < 0.0 => {
                return Err(Error::InvalidParams("peak voltage must be >= 0".into()))
            }
            Amplitude::TargetN(n) if n < 0.0 => {
                return Err(Error::InvalidParams("target photon number must be >= 0".into()))
            }
            _ => {}
        }
        if let Some(ps) = self.phase_segments {
            if ps.m < 1 {
                return Err(Error::InvalidParams("phase segment count m must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// Support of the nonzero envelope, `[lo, hi)`.
    pub fn support(&self) -> (f64, f64) {
        match self.shape {
            PulseShape::ExpRising | PulseShape::ExpDecaying => (self.t_start, self.t_off),
            PulseShape::Square => (self.t_off - self.tau, self.t_off),
            PulseShape::Gaussian => {
                // Truncated at +-3.5 FWHM around the center t_c = t_off - tau.
                let tc = self.t_off - self.tau;
                (tc - 3.5 * self.tau, tc + 3.5 * self.tau)
            }
        }
    }

    /// Envelope value at time `t` for peak voltage `v`. The support is closed
    /// at the turn-off: the sample exactly at `t_off` carries the left limit,
    /// which keeps trapezoid integrals over the pulse-on window second-order
    /// accurate. A small slack absorbs float error in grid-node positions.
    fn envelope_at(&self, t: f64, v: f64) -> f64 {
        let eps = 1e-9 * self.tau;
        match self.shape {
            PulseShape::ExpRising => {
                if t >= self.t_start - eps && t <= self.t_off + eps {
                    v * ((t - self.t_off) / self.tau).exp()
                } else {
                    0.0
                }
            }
            PulseShape::ExpDecaying => {
                if t >= self.t_start - eps && t <= self.t_off + eps {
                    v * (-(t - self.t_start) / self.tau).exp()
                } else {
                    0.0
                }
            }
            PulseShape::Square => {
                if t >= self.t_off - self.tau - eps && t <= self.t_off + eps {
                    v
                } else {
                    0.0
                }
            }
            PulseShape::Gaussian => {
                let tc = self.t_off - self.tau;
                if (t - tc).abs() <= 3.5 * self.tau {
                    v * (-4.0 * std::f64::consts::LN_2 * (t - tc).powi(2) / self.tau.powi(2)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Closed-form integral of the squared envelope for unit peak voltage,
    /// over the pulse support. Used for photon-number normalization.
    fn squared_envelope_integral(&self) -> f64 {
        let span = self.t_off - self.t_start;
        match self.shape {
            PulseShape::ExpRising | PulseShape::ExpDecaying => {
                0.5 * self.tau * (1.0 - (-2.0 * span / self.tau).exp())
            }
            PulseShape::Square => self.tau.min(span),
            PulseShape::Gaussian => {
                // integral of exp(-8 ln2 x^2 / tau^2); the +-3.5 FWHM truncation
                // removes < 1e-7 of the energy.
                self.tau * (std::f64::consts::PI / (8.0 * std::f64::consts::LN_2)).sqrt()
            }
        }
    }

    /// Peak voltage, computing it from the target photon number if needed.
    pub fn peak_volts(&self, p: &QubitParams) -> f64 {
        match self.amplitude {
            Amplitude::PeakVolts(v) => v,
            Amplitude::TargetN(n) => {
                let energy_per_v2 = self.squared_envelope_integral() / (2.0 * p.z0());
                (n * HBAR * p.omega_10() / energy_per_v2).sqrt()
            }
        }
    }

    /// Default simulation grid: covers the pulse support plus `post_window`
    /// seconds after turn-off, with step min(tau, T2)/1000 capped at 0.5 ns.
    pub fn default_grid(&self, p: &QubitParams, post_window: f64) -> Result<TimeGrid> {
        let (_, t2) = coherence_times(p);
        let dt = (self.tau.min(t2) / 1000.0).min(0.5e-9);
        self.grid_with_dt(dt, post_window)
    }

    /// Grid starting at the support edge with step at most `dt_req`, snapped
    /// so the support boundaries (and any phase-segment boundaries) land
    /// exactly on grid nodes. That alignment is what lets the piecewise
    /// integration and the windowed integrals converge at full order in dt.
    pub fn grid_with_dt(&self, dt_req: f64, post_window: f64) -> Result<TimeGrid> {
        if !(dt_req > 0.0) {
            return Err(Error::GridNonuniform);
        }
        let (lo, hi) = self.support();
        let span = hi - lo;
        let q = match self.phase_segments {
            Some(ps) => 2 * ps.m as usize,
            None => 1,
        };
        let cells = ((span / (q as f64 * dt_req)).ceil() as usize).max(1) * q;
        let dt = span / cells as f64;
        let n_post = (post_window / dt).ceil() as usize;
        TimeGrid::new(lo, dt, cells + n_post + 1)
    }
}

/// Voltage envelope sampled on `grid`.
pub fn envelope(spec: &PulseSpec, p: &QubitParams, grid: &TimeGrid) -> Result<Vec<f64>> {
    spec.validate()?;
    let (lo, hi) = spec.support();
    if !grid.covers(lo, hi) {
        return Err(Error::GridTooShort {
            grid_start: grid.start(),
            grid_end: grid.end(),
            need_start: lo,
            need_end: hi,
        });
    }
    let v = spec.peak_volts(p);
    Ok(grid.times().map(|t| spec.envelope_at(t, v)).collect())
}

/// Average photon number N = integral of V^2/(2 Z0) dt / (hbar omega_10),
/// trapezoid rule over the pulse-on window.
pub fn photon_number(spec: &PulseSpec, p: &QubitParams, grid: &TimeGrid) -> Result<f64> {
    let env = envelope(spec, p, grid)?;
    let power: Vec<f64> = env.iter().map(|v| v * v / (2.0 * p.z0())).collect();
    let (lo, hi) = spec.support();
    let i_lo = grid.index_nearest(lo);
    let i_hi = grid.index_nearest(hi);
    Ok(trapezoid(grid, &power, i_lo, i_hi) / (HBAR * p.omega_10()))
}

/// Closed-form photon number for an exponentially rising pulse; cross-check
/// for the numerical route.
pub fn photon_number_exp_rising(
    v_peak: f64,
    tau: f64,
    span: f64,
    p: &QubitParams,
) -> f64 {
    v_peak * v_peak * tau / (4.0 * p.z0() * HBAR * p.omega_10())
        * (1.0 - (-2.0 * span / tau).exp())
}

/// Amplitude matching across rise times: the peak voltage that keeps the
/// photon number of an exponentially rising pulse equal to that of the
/// reference `(v_ref, tau_ref)` when the rise constant changes to `tau_i`.
/// `t0` is the pulse-on duration.
pub fn match_amplitude(v_ref: f64, tau_ref: f64, tau_i: f64, t0: f64) -> f64 {
    v_ref
        * (tau_ref / tau_i).sqrt()
        * ((1.0 - (-2.0 * t0 / tau_ref).exp()) / (1.0 - (-2.0 * t0 / tau_i).exp())).sqrt()
}

/// Phase schedule f(theta, t): the window `[t_start, t0)` is split into `m`
/// equal segments of length t_M; the phase is 0 on the first half of each
/// segment and theta on the second half, and 0 outside the window. Segment
/// boundaries are floored to the grid.
pub fn phase_schedule(
    m: u32,
    theta: f64,
    t_start: f64,
    t0: f64,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::InvalidParams("phase segment count m must be >= 1".into()));
    }
    if !(t0 > t_start) {
        return Err(Error::InvalidParams("t0 must be greater than t_start".into()));
    }
    let t_m = (t0 - t_start) / m as f64;
    Ok(grid
        .times()
        .map(|t| {
            if t < t_start || t >= t0 {
                return 0.0;
            }
            let frac = (t - t_start) / t_m;
            let in_segment = frac - frac.floor();
            if in_segment >= 0.5 {
                theta
            } else {
                0.0
            }
        })
        .collect())
}

/// Uniform time grid with complex Rabi-frequency samples.
#[derive(Clone, Debug)]
pub struct DriveTrace {
    pub grid: TimeGrid,
    pub omega: Vec<Complex64>,
    /// Exact samples at step midpoints (length `grid.len() - 1`). When
    /// absent, the integrator interpolates the node samples linearly, which
    /// caps its accuracy at second order in the step size.
    pub omega_mid: Option<Vec<Complex64>>,
}

/// Complex Rabi drive Omega(t) = k sqrt(V^2/(2 Z0)) e^{i f(theta, t)}.
pub fn drive_trace(spec: &PulseSpec, p: &QubitParams, grid: &TimeGrid) -> Result<DriveTrace> {
    let env = envelope(spec, p, grid)?;
    let phases = match spec.phase_segments {
        Some(ps) => Some(phase_schedule(ps.m, ps.theta, spec.t_start, spec.t_off, grid)?),
        None => None,
    };
    let omega: Vec<Complex64> = env
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mag = p.k_coupling() * (v * v / (2.0 * p.z0())).sqrt();
            match &phases {
                Some(f) => Complex64::from_polar(mag, f[i]),
                None => Complex64::new(mag, 0.0),
            }
        })
        .collect();
    Ok(DriveTrace {
        grid: grid.clone(),
        omega,
        omega_mid: None,
    })
}

/// Nearest grid index to `t`; errors when `t` does not sit on a node, since
/// a mid-cell discontinuity would degrade the integrators to first order.
fn aligned_index(grid: &TimeGrid, t: f64) -> Result<usize> {
    let i = grid.index_nearest(t);
    if (grid.at(i) - t).abs() > 1e-6 * grid.dt() {
        return Err(Error::InvalidParams(format!(
            "grid is not aligned with a pulse boundary at t = {t:.3e} s"
        )));
    }
    Ok(i)
}

/// Split the drive into maximal smooth pieces: an off-segment before the
/// support, one on-segment per constant-phase interval, and an off-segment
/// after turn-off. Adjacent pieces share a boundary node, each carrying its
/// own one-sided limit, so piecewise RK4 integration sees no discontinuity.
pub fn drive_segments(spec: &PulseSpec, p: &QubitParams, grid: &TimeGrid) -> Result<Vec<DriveTrace>> {
    spec.validate()?;
    let (lo, hi) = spec.support();
    if !grid.covers(lo, hi) {
        return Err(Error::GridTooShort {
            grid_start: grid.start(),
            grid_end: grid.end(),
            need_start: lo,
            need_end: hi,
        });
    }
    let v = spec.peak_volts(p);
    let dt = grid.dt();
    let n = grid.len();
    // On-branch formula without the support window applied.
    let branch = |t: f64| -> f64 {
        match spec.shape {
            PulseShape::ExpRising => v * ((t - spec.t_off) / spec.tau).exp(),
            PulseShape::ExpDecaying => v * (-(t - spec.t_start) / spec.tau).exp(),
            PulseShape::Square => v,
            PulseShape::Gaussian => {
                let tc = spec.t_off - spec.tau;
                v * (-4.0 * std::f64::consts::LN_2 * (t - tc).powi(2) / spec.tau.powi(2)).exp()
            }
        }
    };
    let magnitude =
        |t: f64| p.k_coupling() * (branch(t) * branch(t) / (2.0 * p.z0())).sqrt();

    let i_lo = if lo <= grid.start() + 0.5 * dt {
        0
    } else {
        aligned_index(grid, lo)?
    };
    let i_hi = if hi >= grid.end() - 0.5 * dt {
        n - 1
    } else {
        aligned_index(grid, hi)?
    };

    // Constant-phase intervals inside the support, as (start index, end
    // index, phase) with the phase-shaping pattern 0 on the first half of
    // each of the m segments and theta on the second half.
    let mut on_pieces: Vec<(usize, usize, f64)> = Vec::new();
    match spec.phase_segments {
        None => on_pieces.push((i_lo, i_hi, 0.0)),
        Some(ps) => {
            let half = (spec.t_off - spec.t_start) / (2.0 * ps.m as f64);
            let mut a = i_lo;
            for j in 1..=(2 * ps.m as usize) {
                let t_b = spec.t_start + half * j as f64;
                let b = if j == 2 * ps.m as usize {
                    i_hi
                } else {
                    aligned_index(grid, t_b)?
                };
                if b > a {
                    let phase = if j % 2 == 0 { ps.theta } else { 0.0 };
                    on_pieces.push((a, b.min(i_hi), phase));
                    a = b;
                }
                if a >= i_hi {
                    break;
                }
            }
        }
    }

    let mut segments = Vec::new();
    let zeros = |a: usize, b: usize| -> Result<DriveTrace> {
        Ok(DriveTrace {
            grid: TimeGrid::new(grid.at(a), dt, b - a + 1)?,
            omega: vec![Complex64::new(0.0, 0.0); b - a + 1],
            omega_mid: None,
        })
    };
    if i_lo > 0 {
        segments.push(zeros(0, i_lo)?);
    }
    for (a, b, phase) in on_pieces {
        if b <= a {
            continue;
        }
        let omega = (a..=b)
            .map(|i| Complex64::from_polar(magnitude(grid.at(i)), phase))
            .collect();
        let omega_mid = (a..b)
            .map(|i| Complex64::from_polar(magnitude(grid.at(i) + 0.5 * dt), phase))
            .collect();
        segments.push(DriveTrace {
            grid: TimeGrid::new(grid.at(a), dt, b - a + 1)?,
            omega,
            omega_mid: Some(omega_mid),
        });
    }
    if i_hi < n - 1 {
        segments.push(zeros(i_hi, n - 1)?);
    }
    Ok(segments)
}
