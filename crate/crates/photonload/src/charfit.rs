//! Steady-state reflection models and least-squares parameter extraction.
//!
//! The fits use a small damped (Levenberg-Marquardt) least-squares solver
//! with a forward-difference Jacobian; standard errors come from the
//! Gauss-Newton covariance at the optimum.

use crate::params::QubitParams;
use crate::{Error, Result, HBAR};
use num_complex::Complex64;

/// One point of a reflection measurement.
#[derive(Clone, Copy, Debug)]
pub struct ReflectionSample {
    /// Probe frequency, rad/s.
    pub omega_p: f64,
    /// Complex reflection coefficient.
    pub r: Complex64,
}

/// One point of a resonant power scan.
#[derive(Clone, Copy, Debug)]
pub struct PowerSample {
    /// Input power, watts.
    pub p_in: f64,
    /// Reflection magnitude.
    pub abs_r: f64,
}

/// Extracted parameters with standard errors.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub gamma_r: f64,
    pub gamma: f64,
    pub omega_10: f64,
    pub stderr_gamma_r: f64,
    pub stderr_gamma: f64,
    pub stderr_omega_10: f64,
    pub residual_norm: f64,
    /// Set when the optimum has gamma < Gamma/2, i.e. negative pure dephasing.
    pub nonphysical_dephasing: bool,
    /// Set when the declared probe strength violates the weak-probe regime.
    pub strong_probe_warning: bool,
}

/// Weak-probe reflection coefficient `r = 1 - Gamma/(gamma + i delta)` with
/// `delta = omega_10 - omega_p`.
pub fn r_weak_probe(delta: f64, gamma_r: f64, gamma: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) - gamma_r / Complex64::new(gamma, delta)
}

/// Resonant power-dependent reflection `r = 1 - Gamma^2/(Gamma gamma + Omega_p^2)`
/// with `Omega_p = k sqrt(p_in)`.
pub fn r_power(p_in: f64, gamma_r: f64, gamma: f64, k: f64) -> f64 {
    let omega_p2 = k * k * p_in;
    1.0 - gamma_r * gamma_r / (gamma_r * gamma + omega_p2)
}

/// Input power at which the resonant reflection vanishes (requires
/// gamma < Gamma); with gamma = Gamma/2 this is `hbar omega_10 Gamma / 8`
/// for the ideal calibration `k = 2 sqrt(Gamma/(hbar omega_10))`.
pub fn critical_power(gamma_r: f64, gamma: f64, k: f64) -> Option<f64> {
    (gamma < gamma_r).then(|| gamma_r * (gamma_r - gamma) / (k * k))
}

// ---------------------------------------------------------------------------
// Damped least squares
// ---------------------------------------------------------------------------

/// Solve the symmetric positive system `a x = b` (n <= 4) by Gaussian
/// elimination with partial pivoting. Returns `None` when singular.
fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

struct LmOutcome {
    x: Vec<f64>,
    residual_norm: f64,
    /// Diagonal of (J^T J)^-1 scaled by the residual variance.
    variances: Vec<f64>,
    converged: bool,
    iterations: usize,
}

/// Minimize `|residuals(x)|^2` starting from `x0`.
fn levenberg_marquardt<F>(residuals: F, x0: &[f64], max_iter: usize) -> LmOutcome
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = residuals(&x);
    let mut cost = r.iter().map(|v| v * v).sum::<f64>();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    let jacobian = |x: &[f64], r0: &[f64]| -> Vec<Vec<f64>> {
        let m = r0.len();
        let mut jt = vec![vec![0.0; m]; n];
        for j in 0..n {
            let h = 1e-7 * x[j].abs().max(1e-12);
            let mut xp = x.to_vec();
            xp[j] += h;
            let rp = residuals(&xp);
            for i in 0..m {
                jt[j][i] = (rp[i] - r0[i]) / h;
            }
        }
        jt
    };

    for iter in 0..max_iter {
        iterations = iter + 1;
        let jt = jacobian(&x, &r);
        // Gradient of 0.5 |r|^2 is J^T r.
        let grad: Vec<f64> = jt
            .iter()
            .map(|col| col.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        // Scale-aware stopping: compare against the residual and parameter scale.
        let scale = (cost.sqrt() + 1e-300)
            * x.iter()
                .zip(jt.iter())
                .map(|(_, col)| col.iter().map(|v| v * v).sum::<f64>().sqrt())
                .fold(0.0f64, f64::max)
            + 1e-300;
        if grad_norm < 1e-10 * scale.max(1.0) || grad_norm < 1e-300 {
            converged = true;
            break;
        }

        let mut jtj = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in 0..n {
                jtj[a][b] = jt[a].iter().zip(&jt[b]).map(|(u, v)| u * v).sum();
            }
        }

        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj.clone();
            for d in 0..n {
                damped[d][d] += lambda * jtj[d][d].max(1e-300);
            }
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let Some(step) = solve_dense(&damped, &rhs) else {
                lambda *= 10.0;
                continue;
            };
            let x_new: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + s).collect();
            let r_new = residuals(&x_new);
            let cost_new = r_new.iter().map(|v| v * v).sum::<f64>();
            if cost_new < cost {
                let step_rel = step
                    .iter()
                    .zip(&x)
                    .map(|(s, xv)| (s / xv.abs().max(1e-12)).abs())
                    .fold(0.0f64, f64::max);
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if step_rel < 1e-12 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !improved {
            // Damping escalation drove the step below float resolution
            // without finding a downhill direction: this is a (local)
            // minimum of the cost surface.
            converged = true;
            break;
        }
    }

    // Covariance at the optimum: sigma^2 (J^T J)^-1 with
    // sigma^2 = |r|^2 / (m - n).
    let jt = jacobian(&x, &r);
    let m = r.len();
    let mut jtj = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            jtj[a][b] = jt[a].iter().zip(&jt[b]).map(|(u, v)| u * v).sum();
        }
    }
    let dof = (m.saturating_sub(n)).max(1) as f64;
    let sigma2 = cost / dof;
    let mut variances = vec![f64::NAN; n];
    for d in 0..n {
        let mut e = vec![0.0; n];
        e[d] = 1.0;
        if let Some(col) = solve_dense(&jtj, &e) {
            variances[d] = sigma2 * col[d];
        }
    }

    LmOutcome {
        x,
        residual_norm: cost.sqrt(),
        variances,
        converged,
        iterations,
    }
}

// ---------------------------------------------------------------------------
// Fits
// ---------------------------------------------------------------------------

/// Data-driven initial guesses: omega_10 at the |r| minimum, gamma from the
/// dip half-width, Gamma from the dip depth.
fn spectrum_initial_guess(samples: &[ReflectionSample]) -> (f64, f64, f64) {
    let (i_min, dip) = samples
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.r.norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let omega_10 = samples[i_min].omega_p;
    // Half-width at |r| midway between the dip and unity.
    let half_level = 0.5 * (dip + 1.0);
    let mut width = f64::NAN;
    for s in samples.iter().skip(i_min) {
        if s.r.norm() > half_level {
            width = (s.omega_p - omega_10).abs();
            break;
        }
    }
    if !width.is_finite() || width == 0.0 {
        let span = samples.last().unwrap().omega_p - samples[0].omega_p;
        width = span.abs() / 4.0;
    }
    let gamma = width.max(1e-3);
    // Dip depth: |r(0)| = |1 - Gamma/gamma| => Gamma = gamma (1 + dip) for an
    // overcoupled dip (r < 0 at resonance).
    let gamma_r = gamma * (1.0 + dip);
    (gamma_r, gamma, omega_10)
}

/// Fit the weak-probe reflection model to complex spectrum data, jointly
/// over (Gamma, gamma, omega_10).
///
/// `probe_rabi`, when declared by the caller, triggers a warning flag if it
/// exceeds gamma/10 at the optimum (weak-probe model validity).
pub fn fit_spectrum(
    samples: &[ReflectionSample],
    init: Option<(f64, f64, f64)>,
    probe_rabi: Option<f64>,
) -> Result<FitResult> {
    if samples.len() < 8 {
        return Err(Error::InvalidParams(format!(
            "need at least 8 spectrum points, got {}",
            samples.len()
        )));
    }
    let (g0, gam0, w0) = init.unwrap_or_else(|| spectrum_initial_guess(samples));
    // Scale frequencies so all three parameters are O(1) for the solver.
    let scale = gam0.max(1e-3);
    let x0 = [g0 / scale, gam0 / scale, w0 / scale];
    let residuals = |x: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * samples.len());
        for s in samples {
            let delta = x[2] * scale - s.omega_p;
            let model = r_weak_probe(delta, x[0] * scale, x[1] * scale);
            out.push(model.re - s.r.re);
            out.push(model.im - s.r.im);
        }
        out
    };
    let out = levenberg_marquardt(residuals, &x0, 200);
    let gamma_r = out.x[0] * scale;
    let gamma = out.x[1] * scale;
    let omega_10 = out.x[2] * scale;
    if !out.converged || !gamma_r.is_finite() || gamma_r <= 0.0 || gamma <= 0.0 {
        return Err(Error::FitDiverged {
            iterations: out.iterations,
            residual_norm: out.residual_norm,
        });
    }
    Ok(FitResult {
        gamma_r,
        gamma,
        omega_10,
        stderr_gamma_r: out.variances[0].max(0.0).sqrt() * scale,
        stderr_gamma: out.variances[1].max(0.0).sqrt() * scale,
        stderr_omega_10: out.variances[2].max(0.0).sqrt() * scale,
        residual_norm: out.residual_norm,
        nonphysical_dephasing: gamma < 0.5 * gamma_r,
        strong_probe_warning: probe_rabi.is_some_and(|o| o > gamma / 10.0),
    })
}

/// Fit the coupling constant k from a resonant power scan with known rates.
/// Returns `(k, stderr)`.
pub fn fit_power_scan(samples: &[PowerSample], gamma_r: f64, gamma: f64) -> Result<(f64, f64)> {
    if samples.len() < 4 {
        return Err(Error::PowerRangeInsufficient);
    }
    // The scan must bracket the |r| minimum: the smallest |r| is interior.
    let i_min = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs_r.total_cmp(&b.1.abs_r))
        .map(|(i, _)| i)
        .unwrap();
    if i_min == 0 || i_min == samples.len() - 1 {
        return Err(Error::PowerRangeInsufficient);
    }
    // Initial guess from the minimum location: |r| = 0 at Omega^2 = Gamma(Gamma - gamma).
    let k0 = if gamma < gamma_r {
        (gamma_r * (gamma_r - gamma) / samples[i_min].p_in).sqrt()
    } else {
        (gamma_r * gamma / samples[i_min].p_in).sqrt()
    };
    let residuals = |x: &[f64]| -> Vec<f64> {
        samples
            .iter()
            .map(|s| r_power(s.p_in, gamma_r, gamma, x[0] * k0).abs() - s.abs_r)
            .collect()
    };
    let out = levenberg_marquardt(residuals, &[1.0], 200);
    let k = out.x[0] * k0;
    if !out.converged || !k.is_finite() || k <= 0.0 {
        return Err(Error::FitDiverged {
            iterations: out.iterations,
            residual_norm: out.residual_norm,
        });
    }
    Ok((k, out.variances[0].max(0.0).sqrt() * k0))
}

/// Convenience: ideal-calibration coupling constant for given parameters,
/// `k = 2 sqrt(Gamma / (hbar omega_10))`.
pub fn ideal_coupling(p: &QubitParams) -> f64 {
    2.0 * (p.gamma_r() / (HBAR * p.omega_10())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::decoherence_rate;
    use rand::Rng;
    use rand::SeedableRng;
    use std::f64::consts::TAU;

    fn sample1_spectrum(n: usize, span: f64) -> Vec<ReflectionSample> {
        let p = QubitParams::sample1();
        let gamma = decoherence_rate(&p);
        (0..n)
            .map(|i| {
                let delta = -span * gamma + 2.0 * span * gamma * i as f64 / (n - 1) as f64;
                ReflectionSample {
                    omega_p: p.omega_10() - delta,
                    r: r_weak_probe(delta, p.gamma_r(), gamma),
                }
            })
            .collect()
    }

    #[test]
    fn weak_probe_resonant_dip() {
        let p = QubitParams::sample1();
        let gamma = decoherence_rate(&p);
        let r = r_weak_probe(0.0, p.gamma_r(), gamma);
        assert!((r.re + 0.764).abs() < 1e-3, "r = {r}");
        assert!(r.im.abs() < 1e-12);
    }

    #[test]
    fn weak_probe_limits() {
        let r = r_weak_probe(1e12, 1e6, 0.6e6);
        assert!((r - Complex64::new(1.0, 0.0)).norm() < 1e-5);
        // No dephasing: full pi phase flip at resonance.
        let r = r_weak_probe(0.0, 2e6, 1e6);
        assert!((r.re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_reflection_limits_and_zero() {
        let (gamma_r, gamma) = (2e6, 1e6);
        let k = 1e12;
        assert!((r_power(0.0, gamma_r, gamma, k) - (1.0 - gamma_r / gamma)).abs() < 1e-12);
        assert!((r_power(1e6, gamma_r, gamma, k) - 1.0).abs() < 1e-4);
        let p_crit = critical_power(gamma_r, gamma, k).unwrap();
        assert!(r_power(p_crit, gamma_r, gamma, k).abs() < 1e-12);
    }

    #[test]
    fn critical_power_matches_ideal_formula() {
        // gamma = Gamma/2 and ideal k: P = hbar omega_10 Gamma / 8.
        let p = QubitParams::from_cyclic_hz(1.686e6, 0.0, 4.8514e9, None, 50.0, "ideal").unwrap();
        let k = ideal_coupling(&p);
        let p_crit = critical_power(p.gamma_r(), 0.5 * p.gamma_r(), k).unwrap();
        let expect = HBAR * p.omega_10() * p.gamma_r() / 8.0;
        assert!((p_crit - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn reflection_traces_a_circle() {
        // Mobius image of the real line: all samples lie on the circle fixed
        // by delta in {-gamma, 0, +gamma}.
        let p = QubitParams::sample1();
        let gamma = decoherence_rate(&p);
        let pts: Vec<Complex64> = [-gamma, 0.0, gamma]
            .iter()
            .map(|&d| r_weak_probe(d, p.gamma_r(), gamma))
            .collect();
        // Circle through three points via perpendicular bisector intersection.
        let (a, b, c) = (pts[0], pts[1], pts[2]);
        let d = 2.0 * (a.re * (b.im - c.im) + b.re * (c.im - a.im) + c.re * (a.im - b.im));
        let ux = (a.norm_sqr() * (b.im - c.im)
            + b.norm_sqr() * (c.im - a.im)
            + c.norm_sqr() * (a.im - b.im))
            / d;
        let uy = (a.norm_sqr() * (c.re - b.re)
            + b.norm_sqr() * (a.re - c.re)
            + c.norm_sqr() * (b.re - a.re))
            / d;
        let center = Complex64::new(ux, uy);
        let radius = (a - center).norm();
        for i in 0..200 {
            let delta = -8.0 * gamma + 16.0 * gamma * i as f64 / 199.0;
            let r = r_weak_probe(delta, p.gamma_r(), gamma);
            assert!(((r - center).norm() - radius).abs() < 1e-9);
        }
    }

    #[test]
    fn power_minimum_is_unique_when_undercoupled() {
        let (gamma_r, gamma) = (2e6, 1.2e6);
        let k = 3e11;
        let p_crit = critical_power(gamma_r, gamma, k).unwrap();
        let mut mags = Vec::new();
        for i in 0..400 {
            let p_in = p_crit * 10f64.powf(-3.0 + 6.0 * i as f64 / 399.0);
            mags.push(r_power(p_in, gamma_r, gamma, k).abs());
        }
        let minima = mags
            .windows(3)
            .filter(|w| w[1] < w[0] && w[1] < w[2])
            .count();
        assert_eq!(minima, 1);
    }

    #[test]
    fn spectrum_round_trip_noiseless() {
        let p = QubitParams::sample1();
        let gamma = decoherence_rate(&p);
        let samples = sample1_spectrum(41, 6.0);
        let fit = fit_spectrum(&samples, None, None).unwrap();
        assert!((fit.gamma_r - p.gamma_r()).abs() / p.gamma_r() < 1e-6);
        assert!((fit.gamma - gamma).abs() / gamma < 1e-6);
        assert!((fit.omega_10 - p.omega_10()).abs() / p.omega_10() < 1e-9);
        assert!(!fit.nonphysical_dephasing);
    }

    #[test]
    fn spectrum_noisy_recovery_and_coverage() {
        let p = QubitParams::sample1();
        let gamma = decoherence_rate(&p);
        let clean = sample1_spectrum(41, 6.0);
        let sigma = 0.01;
        let mut covered = 0usize;
        let mut total = 0usize;
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut gauss = || {
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..TAU);
                (-2.0 * u1.ln()).sqrt() * u2.cos()
            };
            let noisy: Vec<ReflectionSample> = clean
                .iter()
                .map(|s| ReflectionSample {
                    omega_p: s.omega_p,
                    r: s.r + Complex64::new(sigma * gauss(), sigma * gauss()),
                })
                .collect();
            let fit = fit_spectrum(&noisy, None, None).unwrap();
            assert!((fit.gamma_r - p.gamma_r()).abs() / p.gamma_r() < 0.05);
            for (est, err, truth) in [
                (fit.gamma_r, fit.stderr_gamma_r, p.gamma_r()),
                (fit.gamma, fit.stderr_gamma, gamma),
                (fit.omega_10, fit.stderr_omega_10, p.omega_10()),
            ] {
                total += 1;
                if (est - truth).abs() <= 2.0 * err {
                    covered += 1;
                }
            }
        }
        let coverage = covered as f64 / total as f64;
        assert!(coverage >= 0.9, "2-sigma coverage = {coverage}");
    }

    #[test]
    fn atom_absent_data_flagged() {
        let samples: Vec<ReflectionSample> = (0..20)
            .map(|i| ReflectionSample {
                omega_p: 1e9 + i as f64 * 1e6,
                r: Complex64::new(1.0, 0.0),
            })
            .collect();
        match fit_spectrum(&samples, None, None) {
            Err(Error::FitDiverged { .. }) => {}
            Ok(fit) => assert!(fit.gamma_r.abs() < 1e-3 * fit.gamma),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn weak_probe_warning() {
        let samples = sample1_spectrum(41, 6.0);
        let p = QubitParams::sample1();
        let gamma = decoherence_rate(&p);
        let fit = fit_spectrum(&samples, None, Some(gamma)).unwrap();
        assert!(fit.strong_probe_warning);
        let fit = fit_spectrum(&samples, None, Some(gamma / 100.0)).unwrap();
        assert!(!fit.strong_probe_warning);
    }

    #[test]
    fn power_scan_round_trip() {
        let p = QubitParams::sample1();
        let gamma = decoherence_rate(&p);
        let k_true = ideal_coupling(&p);
        let p_crit = critical_power(p.gamma_r(), gamma, k_true).unwrap();
        let samples: Vec<PowerSample> = (0..30)
            .map(|i| {
                let p_in = p_crit * 10f64.powf(-2.0 + 4.0 * i as f64 / 29.0);
                PowerSample {
                    p_in,
                    abs_r: r_power(p_in, p.gamma_r(), gamma, k_true).abs(),
                }
            })
            .collect();
        let (k, stderr) = fit_power_scan(&samples, p.gamma_r(), gamma).unwrap();
        assert!((k - k_true).abs() / k_true < 1e-8, "k = {k} vs {k_true}");
        assert!(stderr.is_finite());
    }

    #[test]
    fn power_scan_needs_bracketing() {
        let p = QubitParams::sample1();
        let gamma = decoherence_rate(&p);
        let k_true = ideal_coupling(&p);
        // Three points only.
        let samples: Vec<PowerSample> = (0..3)
            .map(|i| PowerSample {
                p_in: 1e-18 * (i + 1) as f64,
                abs_r: r_power(1e-18 * (i + 1) as f64, p.gamma_r(), gamma, k_true).abs(),
            })
            .collect();
        assert!(matches!(
            fit_power_scan(&samples, p.gamma_r(), gamma),
            Err(Error::PowerRangeInsufficient)
        ));
        // Monotone scan far below the minimum.
        let samples: Vec<PowerSample> = (0..10)
            .map(|i| {
                let p_in = 1e-22 * (i + 1) as f64;
                PowerSample {
                    p_in,
                    abs_r: r_power(p_in, p.gamma_r(), gamma, k_true).abs(),
                }
            })
            .collect();
        assert!(matches!(
            fit_power_scan(&samples, p.gamma_r(), gamma),
            Err(Error::PowerRangeInsufficient)
        ));
    }

    #[test]
    fn steady_state_cross_module_fit() {
        // Generate "spectrum" data by driving the Bloch equations to steady
        // state at scanned detuning; the fit must recover the input rates.
        use crate::dynamics::evolve;
        use crate::grid::TimeGrid;
        use crate::waveform::DriveTrace;

        let p = QubitParams::sample1();
        let gamma = decoherence_rate(&p);
        let omega = 1e-4 * (gamma * p.gamma_r()).sqrt();
        let grid = TimeGrid::spanning(0.0, 25.0 / gamma, 0.5e-9).unwrap();
        let drive = DriveTrace {
            grid: grid.clone(),
            omega: vec![Complex64::new(omega, 0.0); grid.len()],
            omega_mid: None,
        };
        let samples: Vec<ReflectionSample> = (0..21)
            .map(|i| {
                let delta = -5.0 * gamma + 10.0 * gamma * i as f64 / 20.0;
                let traj = evolve(&drive, &p, delta, (Complex64::new(0.0, 0.0), -1.0)).unwrap();
                let sm = traj.s_minus.last().unwrap();
                // r = alpha_out/alpha_in = 1 + sqrt(Gamma) s- / alpha_in,
                // with alpha_in = Omega / (2 sqrt(Gamma)).
                let r = Complex64::new(1.0, 0.0)
                    + p.gamma_r().sqrt() * sm / (omega / (2.0 * p.gamma_r().sqrt()));
                ReflectionSample {
                    omega_p: p.omega_10() - delta,
                    r,
                }
            })
            .collect();
        let fit = fit_spectrum(&samples, None, None).unwrap();
        assert!((fit.gamma_r - p.gamma_r()).abs() / p.gamma_r() < 1e-3);
        assert!((fit.gamma - gamma).abs() / gamma < 1e-3);
    }
}
