//! Loading efficiency: windowed-energy and flux definitions, analytic
//! formulas, the end-to-end simulation pipeline, and parameter sweeps.

use crate::dynamics::{evolve_piecewise, Trajectory};
use crate::field::{output_field, FieldTrace, NoiseModel};
use crate::grid::{trapezoid, TimeGrid};
use crate::params::{coherence_times, decoherence_rate, QubitParams};
use crate::waveform::{
    drive_segments, drive_trace, match_amplitude, Amplitude, DriveTrace, PhaseSegments,
    PulseShape, PulseSpec,
};
use crate::{Error, Result};
use num_complex::Complex64;

/// How an efficiency number was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaMethod {
    WindowedVoltage,
    CoherentFlux,
    AnalyticCoherent,
    AnalyticFock,
}

impl EtaMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            EtaMethod::WindowedVoltage => "windowed-voltage",
            EtaMethod::CoherentFlux => "flux",
            EtaMethod::AnalyticCoherent => "analytic-coherent",
            EtaMethod::AnalyticFock => "analytic-fock",
        }
    }
}

/// Integration windows: input energy over `[t_i, t0]`, emitted energy over
/// `[t0, t_f]`.
#[derive(Clone, Copy, Debug)]
pub struct Windows {
    pub t_i: f64,
    pub t0: f64,
    pub t_f: f64,
}

/// Loading efficiency with the energies and windows that produced it.
#[derive(Clone, Debug)]
pub struct EfficiencyResult {
    pub eta: f64,
    pub e_on: f64,
    pub e_off: f64,
    pub windows: Windows,
    pub method: EtaMethod,
}

/// Windowed-energy efficiency from voltage traces, with noise-floor
/// subtraction: negative integrand values are kept so the noise statistics
/// stay unbiased.
pub fn eta_windowed(
    grid: &TimeGrid,
    v_on: &[Complex64],
    v_off: &[Complex64],
    noise: &NoiseModel,
    windows: Windows,
) -> Result<EfficiencyResult> {
    if v_on.len() != grid.len() || v_off.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    if !(windows.t_i < windows.t0 && windows.t0 < windows.t_f) {
        return Err(Error::InvalidParams(
            "windows must satisfy t_i < t0 < t_f".into(),
        ));
    }
    let n2 = noise.v_n * noise.v_n;
    // Per-quadrature std v_n means mean |noise|^2 = 2 v_n^2.
    let floor = 2.0 * n2;
    let p_off: Vec<f64> = v_off.iter().map(|v| v.norm_sqr() - floor).collect();
    let mut p_on: Vec<f64> = v_on.iter().map(|v| v.norm_sqr() - floor).collect();
    let i_i = grid.index_nearest(windows.t_i);
    let i_0 = grid.index_nearest(windows.t0);
    let i_f = grid.index_nearest(windows.t_f);
    // The t0 sample of v_on carries the input's left limit; the emitted
    // energy wants the right limit, with the input gone, which is the atomic
    // part v_on - v_off. Two independent noise draws combine there.
    p_on[i_0] = (v_on[i_0] - v_off[i_0]).norm_sqr() - 2.0 * floor;
    let e_off = trapezoid(grid, &p_off, i_i, i_0);
    let e_on = trapezoid(grid, &p_on, i_0, i_f);
    if e_off <= 0.0 {
        return Err(Error::ReferenceEnergyNonpositive { e_off });
    }
    Ok(EfficiencyResult {
        eta: e_on / e_off,
        e_on,
        e_off,
        windows,
        method: EtaMethod::WindowedVoltage,
    })
}

/// Flux-based efficiency: coherent output energy after `t0` over coherent
/// input energy before `t0`.
pub fn eta_flux(ft: &FieldTrace, windows: Windows) -> Result<EfficiencyResult> {
    if !(windows.t_i < windows.t0 && windows.t0 < windows.t_f) {
        return Err(Error::InvalidParams(
            "windows must satisfy t_i < t0 < t_f".into(),
        ));
    }
    let i_i = ft.grid.index_nearest(windows.t_i);
    let i_0 = ft.grid.index_nearest(windows.t0);
    let i_f = ft.grid.index_nearest(windows.t_f);
    let e_off = trapezoid(&ft.grid, &ft.f_in, i_i, i_0);
    // f_out at t0 holds the left limit (input still present); the emission
    // window wants the right limit, the atomic field alone.
    let mut emitted = ft.f_out.clone();
    emitted[i_0] = (ft.alpha_out[i_0] - ft.alpha_in[i_0]).norm_sqr();
    let e_on = trapezoid(&ft.grid, &emitted, i_0, i_f);
    if e_off <= 0.0 {
        return Err(Error::ReferenceEnergyNonpositive { e_off });
    }
    Ok(EfficiencyResult {
        eta: e_on / e_off,
        e_on,
        e_off,
        windows,
        method: EtaMethod::CoherentFlux,
    })
}

/// Weak-drive analytic efficiency for the exponentially rising pulse:
/// `eta = Gamma^2 / (gamma tau (gamma + 1/tau)^2)`.
pub fn eta_analytic_coherent(tau: f64, p: &QubitParams) -> f64 {
    let gamma = decoherence_rate(p);
    p.gamma_r().powi(2) / (gamma * tau * (gamma + 1.0 / tau).powi(2))
}

/// Optimal rise constant for weak coherent loading: `1/gamma` (= T2).
pub fn coherent_tau_opt(p: &QubitParams) -> f64 {
    1.0 / decoherence_rate(p)
}

/// Numerically locate the optimal rise constant by golden-section search on
/// an efficiency function, scanning `[0.05, 20]/gamma`.
pub fn tau_opt_numeric<F: FnMut(f64) -> f64>(f: F, p: &QubitParams) -> (f64, f64) {
    let gamma = decoherence_rate(p);
    crate::optimize::golden_section_max(f, 0.05 / gamma, 20.0 / gamma, 1e-6)
}

/// Simulation controls for the end-to-end pipeline.
#[derive(Clone, Copy, Debug)]
pub struct SimOptions {
    /// Grid step; `None` uses the pulse default (min(tau, T2)/1000, <= 0.5 ns).
    pub dt: Option<f64>,
    /// Trace length after turn-off; `None` uses 10 T2.
    pub post_window: Option<f64>,
    pub detuning: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt: None,
            post_window: None,
            detuning: 0.0,
        }
    }
}

/// One full simulate-and-measure run.
#[derive(Clone, Debug)]
pub struct LoadingRun {
    pub drive: DriveTrace,
    pub traj: Trajectory,
    pub field: FieldTrace,
    pub windows: Windows,
}

/// Drive the full pipeline: envelope -> Rabi drive -> Bloch evolution ->
/// input-output field.
pub fn run_loading(spec: &PulseSpec, p: &QubitParams, sim: &SimOptions) -> Result<LoadingRun> {
    spec.validate()?;
    let (_, t2) = coherence_times(p);
    let post = sim.post_window.unwrap_or(10.0 * t2);
    let grid = match sim.dt {
        Some(dt) => spec.grid_with_dt(dt, post)?,
        None => spec.default_grid(p, post)?,
    };
    let drive = drive_trace(spec, p, &grid)?;
    let segments = drive_segments(spec, p, &grid)?;
    let traj = evolve_piecewise(&segments, p, sim.detuning, (Complex64::new(0.0, 0.0), -1.0))?;
    let field = output_field(&drive, &traj, p)?;
    let windows = Windows {
        t_i: grid.start(),
        t0: spec.t_off,
        t_f: grid.end(),
    };
    Ok(LoadingRun {
        drive,
        traj,
        field,
        windows,
    })
}

/// Pipeline efficiency via the coherent-flux route. Rejects pulse shapes
/// without a clean absorption/emission time separation.
pub fn eta_pipeline(spec: &PulseSpec, p: &QubitParams, sim: &SimOptions) -> Result<EfficiencyResult> {
    match spec.shape {
        PulseShape::ExpRising | PulseShape::Square => {}
        PulseShape::ExpDecaying | PulseShape::Gaussian => return Err(Error::NoTimeSeparation),
    }
    let run = run_loading(spec, p, sim)?;
    eta_flux(&run.field, run.windows)
}

/// Efficiency versus rise constant at fixed photon number. Amplitudes are
/// matched across tau via the closed-form voltage rescaling so N stays
/// constant through the sweep.
pub fn sweep_tau(
    p: &QubitParams,
    template: &PulseSpec,
    taus: &[f64],
    n_target: f64,
    sim: &SimOptions,
) -> Result<Vec<(f64, EfficiencyResult)>> {
    if taus.is_empty() {
        return Err(Error::InvalidParams("tau sweep list is empty".into()));
    }
    if template.shape != PulseShape::ExpRising {
        return Err(Error::NoTimeSeparation);
    }
    let reference = PulseSpec {
        amplitude: Amplitude::TargetN(n_target),
        ..template.clone()
    };
    let v_ref = reference.peak_volts(p);
    let span = template.t_off - template.t_start;
    taus.iter()
        .map(|&tau| {
            let v_i = match_amplitude(v_ref, template.tau, tau, span);
            let spec = PulseSpec {
                tau,
                amplitude: Amplitude::PeakVolts(v_i),
                ..template.clone()
            };
            eta_pipeline(&spec, p, sim).map(|r| (tau, r))
        })
        .collect()
}

/// Efficiency versus average photon number at fixed rise constant.
pub fn sweep_photon_number(
    p: &QubitParams,
    template: &PulseSpec,
    ns: &[f64],
    sim: &SimOptions,
) -> Result<Vec<(f64, EfficiencyResult)>> {
    if ns.is_empty() {
        return Err(Error::InvalidParams("photon-number sweep list is empty".into()));
    }
    ns.iter()
        .map(|&n| {
            let spec = PulseSpec {
                amplitude: Amplitude::TargetN(n),
                ..template.clone()
            };
            eta_pipeline(&spec, p, sim).map(|r| (n, r))
        })
        .collect()
}

/// Phase-shaping sweep mode: vary the segment count at fixed theta, or vary
/// theta at a fixed segment count.
#[derive(Clone, Debug)]
pub enum PhaseSweep {
    VaryM { theta: f64, ms: Vec<u32> },
    VaryTheta { m: u32, thetas: Vec<f64> },
}

/// Efficiency under phase shaping. `m = 0` means no modulation.
pub fn sweep_phase(
    p: &QubitParams,
    template: &PulseSpec,
    n_target: f64,
    mode: &PhaseSweep,
    sim: &SimOptions,
) -> Result<Vec<(f64, EfficiencyResult)>> {
    let points: Vec<(f64, Option<PhaseSegments>)> = match mode {
        PhaseSweep::VaryM { theta, ms } => {
            if ms.is_empty() {
                return Err(Error::InvalidParams("segment sweep list is empty".into()));
            }
            ms.iter()
                .map(|&m| {
                    let seg = (m >= 1).then_some(PhaseSegments { m, theta: *theta });
                    (m as f64, seg)
                })
                .collect()
        }
        PhaseSweep::VaryTheta { m, thetas } => {
            if thetas.is_empty() {
                return Err(Error::InvalidParams("theta sweep list is empty".into()));
            }
            if *m < 1 {
                return Err(Error::InvalidParams("phase segment count m must be >= 1".into()));
            }
            thetas
                .iter()
                .map(|&theta| (theta, Some(PhaseSegments { m: *m, theta })))
                .collect()
        }
    };
    points
        .into_iter()
        .map(|(x, seg)| {
            let spec = PulseSpec {
                amplitude: Amplitude::TargetN(n_target),
                phase_segments: seg,
                ..template.clone()
            };
            eta_pipeline(&spec, p, sim).map(|r| (x, r))
        })
        .collect()
}

/// Write a sweep table as CSV, one row per sweep point.
pub fn write_sweep_csv<W: std::io::Write>(
    mut w: W,
    param_name: &str,
    rows: &[(f64, EfficiencyResult)],
    comment: &str,
) -> std::io::Result<()> {
    writeln!(w, "# {comment}")?;
    writeln!(
        w,
        "sweep_param_name,sweep_value,eta,e_on,e_off,t_i_us,t0_us,t_f_us,method"
    )?;
    for (x, r) in rows {
        writeln!(
            w,
            "{param_name},{x:e},{:e},{:e},{:e},{:.6},{:.6},{:.6},{}",
            r.eta,
            r.e_on,
            r.e_off,
            r.windows.t_i * 1e6,
            r.windows.t0 * 1e6,
            r.windows.t_f * 1e6,
            r.method.as_str()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::synthesize_voltages;
    use std::f64::consts::PI;

    fn exp_rising_template(tau: f64, t_off: f64) -> PulseSpec {
        PulseSpec {
            shape: PulseShape::ExpRising,
            tau,
            t_start: 0.0,
            t_off,
            amplitude: Amplitude::TargetN(1e-4),
            phase_segments: None,
        }
    }

    #[test]
    fn analytic_matched_tau_is_dephasing_formula() {
        // tau = 1/gamma: eta = Gamma^2/(4 gamma^2) = (1 + 2 Gamma_phi/Gamma)^-2.
        let p = QubitParams::sample1();
        let gamma = decoherence_rate(&p);
        let eta = eta_analytic_coherent(1.0 / gamma, &p);
        let expect = (1.0 + 2.0 * p.gamma_phi() / p.gamma_r()).powi(-2);
        assert!((eta - expect).abs() < 1e-12);
        assert!((eta - 0.777).abs() < 0.002, "eta = {eta}");
    }

    #[test]
    fn analytic_at_145ns() {
        let p = QubitParams::sample1();
        let eta = eta_analytic_coherent(145e-9, &p);
        assert!((eta - 0.774).abs() < 0.002, "eta = {eta}");
    }

    #[test]
    fn analytic_limits_vanish() {
        let p = QubitParams::sample1();
        assert!(eta_analytic_coherent(1e-12, &p) < 1e-3);
        assert!(eta_analytic_coherent(1.0, &p) < 1e-3);
    }

    #[test]
    fn coherent_tau_opt_values() {
        let p1 = QubitParams::sample1();
        assert!((coherent_tau_opt(&p1) - 166e-9).abs() < 1e-9);
        let p2 = QubitParams::sample2();
        assert!((coherent_tau_opt(&p2) - 151e-9).abs() < 1e-9);
        let p0 = QubitParams::from_cyclic_hz(2e6, 0.0, 5e9, None, 50.0, "ideal").unwrap();
        assert!((coherent_tau_opt(&p0) - 2.0 / p0.gamma_r()).abs() < 1e-18);
    }

    #[test]
    fn golden_section_recovers_analytic_optimum() {
        let p = QubitParams::sample1();
        let (tau, _) = tau_opt_numeric(|t| eta_analytic_coherent(t, &p), &p);
        assert!((tau - coherent_tau_opt(&p)).abs() / tau < 1e-4);
        let (tau_f, _) = tau_opt_numeric(|t| crate::fock::fock_efficiency(t, &p), &p);
        assert!((tau_f - crate::fock::fock_tau_opt(&p)).abs() / tau_f < 1e-4);
    }

    #[test]
    fn pipeline_matches_analytic_at_weak_drive() {
        let p = QubitParams::sample1();
        let spec = exp_rising_template(166e-9, 2.635e-6);
        let r = eta_pipeline(&spec, &p, &SimOptions::default()).unwrap();
        let expect = eta_analytic_coherent(166e-9, &p);
        assert!(
            (r.eta - expect).abs() / expect < 5e-3,
            "pipeline {} vs analytic {expect}",
            r.eta
        );
    }

    #[test]
    fn windowed_equals_flux_for_noiseless_run() {
        let p = QubitParams::sample2();
        let spec = PulseSpec {
            amplitude: Amplitude::TargetN(0.05),
            ..exp_rising_template(151e-9, 0.825e-6)
        };
        let run = run_loading(&spec, &p, &SimOptions::default()).unwrap();
        let flux = eta_flux(&run.field, run.windows).unwrap();
        let noise = NoiseModel::noiseless();
        let ft = synthesize_voltages(&run.field, &p, &noise).unwrap();
        let win = eta_windowed(
            &ft.grid,
            ft.v_on.as_ref().unwrap(),
            ft.v_off.as_ref().unwrap(),
            &noise,
            run.windows,
        )
        .unwrap();
        assert!(
            (win.eta - flux.eta).abs() < 1e-6,
            "windowed {} vs flux {}",
            win.eta,
            flux.eta
        );
    }

    #[test]
    fn windowed_identity_on_shifted_copy() {
        // v_on a pure time shift of v_off with full windows: eta = 1.
        let grid = TimeGrid::spanning(0.0, 10e-6, 1e-9).unwrap();
        let t0 = 5e-6;
        let pulse = |t: f64| (-(t - 2e-6).powi(2) / (0.3e-6f64).powi(2)).exp();
        let v_off: Vec<Complex64> = grid.times().map(|t| Complex64::new(pulse(t), 0.0)).collect();
        let v_on: Vec<Complex64> = grid
            .times()
            .map(|t| Complex64::new(pulse(t - 4e-6), 0.0))
            .collect();
        let r = eta_windowed(
            &grid,
            &v_on,
            &v_off,
            &NoiseModel::noiseless(),
            Windows {
                t_i: 0.0,
                t0,
                t_f: 10e-6,
            },
        )
        .unwrap();
        assert!((r.eta - 1.0).abs() < 1e-9, "eta = {}", r.eta);
    }

    #[test]
    fn windowed_rejects_noise_swallowed_reference() {
        let grid = TimeGrid::spanning(0.0, 1e-6, 1e-9).unwrap();
        let zeros = vec![Complex64::new(0.0, 0.0); grid.len()];
        let noise = NoiseModel {
            v_n: 1e-9,
            seed: 1,
            bin: None,
            gain_db: 0.0,
        };
        let err = eta_windowed(
            &grid,
            &zeros,
            &zeros,
            &noise,
            Windows {
                t_i: 0.0,
                t0: 0.5e-6,
                t_f: 1e-6,
            },
        );
        assert!(matches!(err, Err(Error::ReferenceEnergyNonpositive { .. })));
    }

    #[test]
    fn matched_tau_table_values() {
        // Noiseless weak-drive pipeline reproduces the matched-tau values.
        let p1 = QubitParams::sample1();
        let spec1 = exp_rising_template(166e-9, 2.635e-6);
        let eta1 = eta_pipeline(&spec1, &p1, &SimOptions::default()).unwrap().eta;
        assert!((eta1 - 0.777).abs() < 0.005, "eta1 = {eta1}");

        let p2 = QubitParams::sample2();
        let spec2 = exp_rising_template(151e-9, 0.825e-6);
        let eta2 = eta_pipeline(&spec2, &p2, &SimOptions::default()).unwrap().eta;
        assert!((eta2 - 0.942).abs() < 0.005, "eta2 = {eta2}");
    }

    #[test]
    fn shape_guard_rejects_undefined_shapes() {
        let p = QubitParams::sample1();
        for shape in [PulseShape::ExpDecaying, PulseShape::Gaussian] {
            let spec = PulseSpec {
                shape,
                ..exp_rising_template(145e-9, 1e-6)
            };
            assert!(matches!(
                eta_pipeline(&spec, &p, &SimOptions::default()),
                Err(Error::NoTimeSeparation)
            ));
        }
    }

    #[test]
    fn single_element_sweep_equals_direct_pipeline() {
        let p = QubitParams::sample1();
        let template = exp_rising_template(145e-9, 2.635e-6);
        let rows = sweep_tau(&p, &template, &[145e-9], 1e-4, &SimOptions::default()).unwrap();
        let direct = eta_pipeline(
            &PulseSpec {
                amplitude: Amplitude::TargetN(1e-4),
                ..template
            },
            &p,
            &SimOptions::default(),
        )
        .unwrap();
        assert!((rows[0].1.eta - direct.eta).abs() < 1e-9);
    }

    #[test]
    fn weak_sweep_peaks_near_t2() {
        let p = QubitParams::sample1();
        let template = exp_rising_template(145e-9, 2.635e-6);
        let taus: Vec<f64> = (0..30).map(|i| (60.0 + i as f64 * 10.0) * 1e-9).collect();
        let rows = sweep_tau(&p, &template, &taus, 1e-4, &SimOptions::default()).unwrap();
        let best = rows
            .iter()
            .max_by(|a, b| a.1.eta.total_cmp(&b.1.eta))
            .unwrap();
        let gamma = decoherence_rate(&p);
        assert!(
            best.0 >= 0.9 / gamma && best.0 <= 1.1 / gamma,
            "argmax tau = {}",
            best.0
        );
    }

    #[test]
    fn empty_sweep_is_error() {
        let p = QubitParams::sample1();
        let template = exp_rising_template(145e-9, 2.635e-6);
        assert!(sweep_tau(&p, &template, &[], 1e-4, &SimOptions::default()).is_err());
        assert!(sweep_photon_number(&p, &template, &[], &SimOptions::default()).is_err());
    }

    #[test]
    fn phase_sweep_m0_equals_unmodulated() {
        let p = QubitParams::sample1();
        let template = exp_rising_template(145e-9, 2.635e-6);
        let rows = sweep_phase(
            &p,
            &template,
            0.015,
            &PhaseSweep::VaryM {
                theta: PI,
                ms: vec![0],
            },
            &SimOptions::default(),
        )
        .unwrap();
        let direct = eta_pipeline(
            &PulseSpec {
                amplitude: Amplitude::TargetN(0.015),
                ..template
            },
            &p,
            &SimOptions::default(),
        )
        .unwrap();
        assert!((rows[0].1.eta - direct.eta).abs() < 1e-12);
    }

    #[test]
    fn theta_wraps_at_two_pi() {
        let p = QubitParams::sample1();
        let template = exp_rising_template(145e-9, 2.635e-6);
        let rows = sweep_phase(
            &p,
            &template,
            0.015,
            &PhaseSweep::VaryTheta {
                m: 50,
                thetas: vec![0.0, 2.0 * PI],
            },
            &SimOptions::default(),
        )
        .unwrap();
        assert!(
            (rows[0].1.eta - rows[1].1.eta).abs() < 1e-12,
            "{} vs {}",
            rows[0].1.eta,
            rows[1].1.eta
        );
    }
}
