//! Voltage / power / Rabi-frequency / coherent-amplitude conversions, the
//! input-output relation, and synthetic digitizer traces.
//!
//! Phase convention: the emitted field adds as `+sqrt(Gamma) <s->` to the
//! input, so the weak-drive reflection dip is real and negative. This is the
//! input-output relation up to a global rotation of the atomic phase;
//! magnitudes, fluxes, and efficiencies are convention-independent.

use crate::dynamics::Trajectory;
use crate::grid::TimeGrid;
use crate::params::QubitParams;
use crate::waveform::DriveTrace;
use crate::{Error, Result, HBAR};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Coherent field amplitudes and fluxes, with optional synthetic voltage
/// traces for the resonant (`v_on`) and detuned-reference (`v_off`) runs.
#[derive(Clone, Debug)]
pub struct FieldTrace {
    pub grid: TimeGrid,
    pub alpha_in: Vec<Complex64>,
    pub alpha_out: Vec<Complex64>,
    pub f_in: Vec<f64>,
    pub f_out: Vec<f64>,
    pub v_on: Option<Vec<Complex64>>,
    pub v_off: Option<Vec<Complex64>>,
}

/// Measurement-chain model: additive complex Gaussian noise with
/// per-quadrature standard deviation `v_n`, scalar gain, and optional
/// digitizer time-bin averaging.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    pub v_n: f64,
    pub seed: u64,
    pub bin: Option<f64>,
    pub gain_db: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            v_n: 0.0,
            seed: 0,
            bin: None,
            gain_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_n >= 0.0) {
            return Err(Error::InvalidParams("noise amplitude must be >= 0".into()));
        }
        if let Some(b) = self.bin {
            if !(b > 0.0) {
                return Err(Error::InvalidParams("bin width must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Rabi frequency from input power: `Omega = k sqrt(P_in)`.
pub fn rabi_from_power(p_in: f64, k: f64) -> f64 {
    k * p_in.sqrt()
}

/// Inverse of [`rabi_from_power`].
pub fn power_from_rabi(omega: f64, k: f64) -> f64 {
    (omega / k).powi(2)
}

/// Apply the input-output relation to a drive and the resulting trajectory:
/// `alpha_in = Omega / (2 sqrt(Gamma))`, `alpha_out = alpha_in + sqrt(Gamma) <s->`.
pub fn output_field(drive: &DriveTrace, traj: &Trajectory, p: &QubitParams) -> Result<FieldTrace> {
    if drive.grid != traj.grid || drive.omega.len() != traj.s_minus.len() {
        return Err(Error::GridMismatch);
    }
    let root_g = p.gamma_r().sqrt();
    let alpha_in: Vec<Complex64> = drive.omega.iter().map(|o| o / (2.0 * root_g)).collect();
    let alpha_out: Vec<Complex64> = alpha_in
        .iter()
        .zip(&traj.s_minus)
        .map(|(ai, sm)| ai + root_g * sm)
        .collect();
    let f_in = alpha_in.iter().map(|a| a.norm_sqr()).collect();
    let f_out = alpha_out.iter().map(|a| a.norm_sqr()).collect();
    Ok(FieldTrace {
        grid: drive.grid.clone(),
        alpha_in,
        alpha_out,
        f_in,
        f_out,
        v_on: None,
        v_off: None,
    })
}

fn amplitude_to_volts(alpha: Complex64, p: &QubitParams, gain: f64) -> Complex64 {
    (2.0 * p.z0() * HBAR * p.omega_10()).sqrt() * alpha * gain
}

fn boxcar(grid: &TimeGrid, v: &[Complex64], bin: f64) -> Vec<Complex64> {
    let per_bin = (bin / grid.dt()).round().max(1.0) as usize;
    let mut out = Vec::with_capacity(v.len());
    let mut i = 0;
    while i < v.len() {
        let hi = (i + per_bin).min(v.len());
        let mean = v[i..hi].iter().sum::<Complex64>() / (hi - i) as f64;
        for _ in i..hi {
            out.push(mean);
        }
        i = hi;
    }
    out
}

/// Synthesize digitizer-like voltage traces from the field amplitudes:
/// `v = sqrt(2 Z0 hbar omega_10) alpha * 10^(gain_db/20)` plus complex
/// Gaussian noise. The detuned reference (`v_off`) bypasses the atom, so it
/// carries the input field only. Noise draws are deterministic in the seed.
pub fn synthesize_voltages(ft: &FieldTrace, p: &QubitParams, noise: &NoiseModel) -> Result<FieldTrace> {
    noise.validate()?;
    let gain = 10f64.powf(noise.gain_db / 20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    // Box-Muller; two independent quadratures per sample.
    let mut gauss = move |std: f64| -> Complex64 {
        if std == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = (-2.0 * u1.ln()).sqrt();
        Complex64::new(std * r * u2.cos(), std * r * u2.sin())
    };
    let mut v_on: Vec<Complex64> = ft
        .alpha_out
        .iter()
        .map(|&a| amplitude_to_volts(a, p, gain) + gauss(noise.v_n))
        .collect();
    let mut v_off: Vec<Complex64> = ft
        .alpha_in
        .iter()
        .map(|&a| amplitude_to_volts(a, p, gain) + gauss(noise.v_n))
        .collect();
    if let Some(bin) = noise.bin {
        v_on = boxcar(&ft.grid, &v_on, bin);
        v_off = boxcar(&ft.grid, &v_off, bin);
    }
    let mut out = ft.clone();
    out.v_on = Some(v_on);
    out.v_off = Some(v_off);
    Ok(out)
}

/// CSV header for trace files written by the CLI.
pub fn trace_csv_header(with_voltages: bool) -> String {
    let base = "t_ns,re_alpha_in,im_alpha_in,re_alpha_out,im_alpha_out,f_in,f_out,s_z,re_s_minus,im_s_minus";
    if with_voltages {
        format!("{base},re_v_on,im_v_on,re_v_off,im_v_off")
    } else {
        base.to_string()
    }
}

/// Write one trace row per grid point.
pub fn write_trace_csv<W: std::io::Write>(
    mut w: W,
    ft: &FieldTrace,
    traj: &Trajectory,
    comment: &str,
) -> std::io::Result<()> {
    writeln!(w, "# {comment}")?;
    let with_v = ft.v_on.is_some() && ft.v_off.is_some();
    writeln!(w, "{}", trace_csv_header(with_v))?;
    for i in 0..ft.grid.len() {
        write!(
            w,
            "{:.6},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            ft.grid.at(i) * 1e9,
            ft.alpha_in[i].re,
            ft.alpha_in[i].im,
            ft.alpha_out[i].re,
            ft.alpha_out[i].im,
            ft.f_in[i],
            ft.f_out[i],
            traj.s_z[i],
            traj.s_minus[i].re,
            traj.s_minus[i].im,
        )?;
        if with_v {
            let von = &ft.v_on.as_ref().unwrap()[i];
            let voff = &ft.v_off.as_ref().unwrap()[i];
            write!(w, ",{:e},{:e},{:e},{:e}", von.re, von.im, voff.re, voff.im)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;
    use crate::grid::trapezoid;
    use crate::params::decoherence_rate;
    use crate::waveform::{drive_trace, Amplitude, PulseShape, PulseSpec};

    fn weak_run(tau: f64, n: f64) -> (DriveTrace, Trajectory, FieldTrace, QubitParams) {
        let p = QubitParams::sample1();
        let spec = PulseSpec {
            shape: PulseShape::ExpRising,
            tau,
            t_start: 0.0,
            t_off: 2.635e-6,
            amplitude: Amplitude::TargetN(n),
            phase_segments: None,
        };
        let grid = spec.default_grid(&p, 1.7e-6).unwrap();
        let d = drive_trace(&spec, &p, &grid).unwrap();
        let traj = evolve(&d, &p, 0.0, (Complex64::new(0.0, 0.0), -1.0)).unwrap();
        let ft = output_field(&d, &traj, &p).unwrap();
        (d, traj, ft, p)
    }

    #[test]
    fn rabi_power_round_trip() {
        assert_eq!(rabi_from_power(0.0, 1e12), 0.0);
        let k = 7.3e11;
        let omega = rabi_from_power(2.5e-18, k);
        assert!((power_from_rabi(omega, k) - 2.5e-18).abs() / 2.5e-18 < 1e-12);
    }

    #[test]
    fn critical_power_gives_gamma_over_sqrt2() {
        // P = hbar omega_10 Gamma / 8 with the ideal calibration k.
        let p = QubitParams::from_cyclic_hz(1.686e6, 0.0, 4.8514e9, None, 50.0, "ideal").unwrap();
        let p_crit = HBAR * p.omega_10() * p.gamma_r() / 8.0;
        let omega = rabi_from_power(p_crit, p.k_coupling());
        let expect = p.gamma_r() / 2f64.sqrt();
        assert!((omega - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn ground_state_zero_drive_gives_zero_output() {
        let grid = TimeGrid::spanning(0.0, 1e-6, 0.5e-9).unwrap();
        let p = QubitParams::sample1();
        let d = DriveTrace {
            grid: grid.clone(),
            omega: vec![Complex64::new(0.0, 0.0); grid.len()],
            omega_mid: None,
        };
        let traj = evolve(&d, &p, 0.0, (Complex64::new(0.0, 0.0), -1.0)).unwrap();
        let ft = output_field(&d, &traj, &p).unwrap();
        assert!(ft.alpha_out.iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn weak_cw_reflection_dip() {
        // Steady-state alpha_out/alpha_in = 1 - Gamma/gamma = -0.764 for Sample 1.
        let p = QubitParams::sample1();
        let gamma = decoherence_rate(&p);
        let omega = gamma / 1e3;
        let grid = TimeGrid::spanning(0.0, 30.0 / gamma, 0.5e-9).unwrap();
        let d = DriveTrace {
            grid: grid.clone(),
            omega: vec![Complex64::new(omega, 0.0); grid.len()],
            omega_mid: None,
        };
        let traj = evolve(&d, &p, 0.0, (Complex64::new(0.0, 0.0), -1.0)).unwrap();
        let ft = output_field(&d, &traj, &p).unwrap();
        let r = ft.alpha_out.last().unwrap() / ft.alpha_in.last().unwrap();
        assert!((r.re - (1.0 - p.gamma_r() / gamma)).abs() < 1e-3);
        assert!((r.re + 0.764).abs() < 1e-3, "r = {r}");
    }

    #[test]
    fn near_perfect_interference_at_matched_tau() {
        let (_, _, ft, _) = weak_run(230e-9, 1e-4);
        let peak_in = ft
            .alpha_in
            .iter()
            .map(|a| a.norm())
            .fold(0.0f64, f64::max);
        // During the late pulse-on stage the output is strongly suppressed.
        let i = ft.grid.index_at(2.6e-6);
        assert!(ft.alpha_out[i].norm() < 0.05 * peak_in);
    }

    #[test]
    fn energy_inequality_from_ground_state() {
        for (tau, n) in [(40e-9, 1e-4), (145e-9, 0.09), (230e-9, 1.5), (600e-9, 4.12)] {
            let (_, _, ft, _) = weak_run(tau, n);
            let e_in = trapezoid(&ft.grid, &ft.f_in, 0, ft.grid.len() - 1);
            let e_out = trapezoid(&ft.grid, &ft.f_out, 0, ft.grid.len() - 1);
            assert!(e_out <= e_in * (1.0 + 1e-9), "tau={tau}, N={n}");
        }
    }

    #[test]
    fn output_field_linear_at_weak_drive() {
        // Doubling the input amplitude doubles the output amplitude.
        let (_, _, ft1, _) = weak_run(145e-9, 1e-8);
        let (_, _, ft2, _) = weak_run(145e-9, 4e-8);
        let i = ft1.grid.index_at(2.0e-6);
        let ratio = ft2.alpha_out[i].norm() / ft1.alpha_out[i].norm();
        assert!((ratio - 2.0).abs() < 1e-4, "ratio = {ratio}");
    }

    #[test]
    fn synthesized_voltages_deterministic() {
        let (_, _, ft, p) = weak_run(145e-9, 0.09);
        let noise = NoiseModel {
            v_n: 0.6e-9,
            seed: 42,
            bin: None,
            gain_db: 68.0,
        };
        let a = synthesize_voltages(&ft, &p, &noise).unwrap();
        let b = synthesize_voltages(&ft, &p, &noise).unwrap();
        assert_eq!(a.v_on.as_ref().unwrap(), b.v_on.as_ref().unwrap());
        assert_eq!(a.v_off.as_ref().unwrap(), b.v_off.as_ref().unwrap());
    }

    #[test]
    fn noiseless_voltage_power_matches_flux() {
        let (_, _, ft, p) = weak_run(145e-9, 0.09);
        let ft = synthesize_voltages(&ft, &p, &NoiseModel::noiseless()).unwrap();
        let v_off = ft.v_off.as_ref().unwrap();
        for i in (0..ft.grid.len()).step_by(500) {
            let power = v_off[i].norm_sqr() / (2.0 * p.z0());
            let expect = ft.f_in[i] * HBAR * p.omega_10();
            assert!((power - expect).abs() <= 1e-9 * expect.max(1e-300));
        }
    }

    #[test]
    fn boxcar_averages_bins() {
        let grid = TimeGrid::new(0.0, 1e-9, 6).unwrap();
        let v: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let out = boxcar(&grid, &v, 2e-9);
        assert_eq!(out[0], Complex64::new(0.5, 0.0));
        assert_eq!(out[1], Complex64::new(0.5, 0.0));
        assert_eq!(out[4], Complex64::new(4.5, 0.0));
    }

    #[test]
    fn grid_mismatch_detected() {
        let p = QubitParams::sample1();
        let g1 = TimeGrid::spanning(0.0, 1e-6, 0.5e-9).unwrap();
        let g2 = TimeGrid::spanning(0.0, 2e-6, 0.5e-9).unwrap();
        let d = DriveTrace {
            grid: g1.clone(),
            omega: vec![Complex64::new(0.0, 0.0); g1.len()],
            omega_mid: None,
        };
        let d2 = DriveTrace {
            grid: g2.clone(),
            omega: vec![Complex64::new(0.0, 0.0); g2.len()],
            omega_mid: None,
        };
        let traj = evolve(&d2, &p, 0.0, (Complex64::new(0.0, 0.0), -1.0)).unwrap();
        assert!(matches!(
            output_field(&d, &traj, &p),
            Err(Error::GridMismatch)
        ));
    }
}
