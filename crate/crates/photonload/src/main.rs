use clap::{Parser, Subcommand};
use photonload::charfit::{
    fit_power_scan, fit_spectrum, PowerSample, ReflectionSample,
};
use photonload::config::{ExperimentConfig, SweepParam};
use photonload::efficiency::{
    coherent_tau_opt, eta_analytic_coherent, eta_flux, eta_windowed, sweep_phase,
    sweep_photon_number, sweep_tau, run_loading, write_sweep_csv, PhaseSweep,
};
use photonload::field::synthesize_voltages;
use photonload::fock::{
    default_fock_grid, fock_efficiency, fock_efficiency_numeric, fock_loading, fock_output_flux,
    fock_tau_opt,
};
use photonload::params::{coherence_times, decoherence_rate};
use photonload::field::write_trace_csv;
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Pulsed-loading simulator for a two-level emitter at the end of a
/// transmission line: time-domain traces, loading-efficiency sweeps, and
/// reflection-spectrum fits.
#[derive(Parser)]
#[command(name = "photonload", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config file (INI sections: qubit, pulse, simulation, noise, sweep)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path for CSV/report (defaults to stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the noise seed from the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress the summary printed to stderr
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coherent-pulse pipeline and write the field/trajectory trace
    Simulate,
    /// Run single-photon wavepacket loading and write the flux trace
    Fock,
    /// Sweep tau, photon number, or phase shaping and write an efficiency table
    Sweep,
    /// Fit reflection data (spectrum or power scan) from a CSV file
    Fit {
        /// Data CSV: either omega_ghz,re_r,im_r or p_dbm,abs_r
        data: PathBuf,
    },
    /// Print closed-form derived quantities for the configured device
    Analytic,
}

enum Failure {
    Config(String),
    Numeric(String),
}

impl From<photonload::Error> for Failure {
    fn from(e: photonload::Error) -> Self {
        match e {
            photonload::Error::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(format!("io: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|e| Failure::Config(e.to_string()))
}

fn open_out(cli: &Cli) -> Result<Box<dyn Write>, Failure> {
    match &cli.out {
        Some(path) => {
            let f = std::fs::File::create(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn provenance(cfg: &ExperimentConfig, seed: Option<u64>) -> String {
    let seed = seed
        .or_else(|| cfg.noise.as_ref().map(|n| n.seed))
        .unwrap_or(0);
    format!("config_sha256={} seed={}", cfg.hash_hex(), seed)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate => run_simulate(cli),
        Command::Fock => run_fock(cli),
        Command::Sweep => run_sweep(cli),
        Command::Fit { data } => run_fit(cli, data),
        Command::Analytic => run_analytic(cli),
    }
}

fn run_simulate(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let p = cfg.qubit_params()?;
    let spec = cfg.pulse_spec()?;
    let sim = cfg.sim_options();
    let run = run_loading(&spec, &p, &sim)?;
    let noise = cfg.noise_model(cli.seed);
    let field = match &noise {
        Some(n) => synthesize_voltages(&run.field, &p, n)?,
        None => run.field.clone(),
    };
    let mut out = open_out(cli)?;
    write_trace_csv(&mut out, &field, &run.traj, &provenance(&cfg, cli.seed))?;
    out.flush()?;
    if !cli.quiet {
        use photonload::waveform::PulseShape;
        if matches!(spec.shape, PulseShape::ExpRising | PulseShape::Square) {
            let eta = eta_flux(&run.field, run.windows)?;
            eprintln!("eta_flux = {:.6}", eta.eta);
            if let Some(n) = &noise {
                let w = eta_windowed(
                    &field.grid,
                    field.v_on.as_ref().unwrap(),
                    field.v_off.as_ref().unwrap(),
                    n,
                    run.windows,
                )?;
                eprintln!("eta_windowed = {:.6}", w.eta);
            }
        }
    }
    Ok(())
}

fn run_fock(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let p = cfg.qubit_params()?;
    let pulse = cfg
        .pulse
        .as_ref()
        .ok_or_else(|| Failure::Config("missing required section [pulse]".into()))?;
    let tau = pulse.tau_ns * 1e-9;
    let grid = default_fock_grid(tau, &p)?;
    let traj = fock_loading(tau, &grid, &p)?;
    let f_out = fock_output_flux(&traj, &p);
    let mut out = open_out(cli)?;
    writeln!(out, "# {}", provenance(&cfg, cli.seed))?;
    writeln!(out, "t_ns,f_in,f_out,s_z,re_c,im_c")?;
    for i in 0..grid.len() {
        writeln!(
            out,
            "{:.6},{:e},{:e},{:e},{:e},{:e}",
            grid.at(i) * 1e9,
            traj.xi[i].norm_sqr(),
            f_out[i],
            traj.s_z[i],
            traj.c[i].re,
            traj.c[i].im,
        )?;
    }
    out.flush()?;
    if !cli.quiet {
        eprintln!("eta_closed_form = {:.6}", fock_efficiency(tau, &p));
        eprintln!("eta_numeric = {:.6}", fock_efficiency_numeric(tau, &p)?);
    }
    Ok(())
}

fn run_sweep(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let p = cfg.qubit_params()?;
    let template = cfg.pulse_spec()?;
    let sim = cfg.sim_options();
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Failure::Config("missing required section [sweep]".into()))?;
    let n_target = match cfg.pulse.as_ref().and_then(|s| s.target_n) {
        Some(n) => n,
        None => {
            return Err(Failure::Config(
                "[pulse] target_n is required for sweeps".into(),
            ))
        }
    };
    let (name, rows) = match sweep.parameter {
        SweepParam::Tau => {
            let taus: Vec<f64> = sweep.values.iter().map(|v| v * 1e-9).collect();
            ("tau_ns", rescale(sweep_tau(&p, &template, &taus, n_target, &sim)?, 1e9))
        }
        SweepParam::N => (
            "n",
            sweep_photon_number(&p, &template, &sweep.values, &sim)?,
        ),
        SweepParam::M => {
            let theta_deg = cfg
                .pulse
                .as_ref()
                .and_then(|s| s.phase_theta_deg)
                .ok_or_else(|| {
                    Failure::Config("[pulse] phase_theta_deg is required for an m sweep".into())
                })?;
            let ms: Vec<u32> = sweep.values.iter().map(|&v| v as u32).collect();
            let mode = PhaseSweep::VaryM {
                theta: theta_deg.to_radians(),
                ms,
            };
            ("m", sweep_phase(&p, &template, n_target, &mode, &sim)?)
        }
        SweepParam::Theta => {
            let m = cfg.pulse.as_ref().and_then(|s| s.phase_m).ok_or_else(|| {
                Failure::Config("[pulse] phase_m is required for a theta sweep".into())
            })?;
            let thetas: Vec<f64> = sweep.values.iter().map(|v| v.to_radians()).collect();
            let mode = PhaseSweep::VaryTheta { m, thetas };
            (
                "theta_deg",
                rescale(sweep_phase(&p, &template, n_target, &mode, &sim)?, 360.0 / TAU),
            )
        }
    };
    let mut out = open_out(cli)?;
    write_sweep_csv(&mut out, name, &rows, &provenance(&cfg, cli.seed))?;
    out.flush()?;
    if !cli.quiet {
        if let Some((x, r)) = rows
            .iter()
            .max_by(|a, b| a.1.eta.total_cmp(&b.1.eta))
        {
            eprintln!("best: {name} = {x:.6}, eta = {:.6}", r.eta);
        }
    }
    Ok(())
}

fn rescale(
    rows: Vec<(f64, photonload::efficiency::EfficiencyResult)>,
    factor: f64,
) -> Vec<(f64, photonload::efficiency::EfficiencyResult)> {
    rows.into_iter().map(|(x, r)| (x * factor, r)).collect()
}

fn run_fit(cli: &Cli, data: &PathBuf) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let p = cfg.qubit_params()?;
    let text = std::fs::read_to_string(data)
        .map_err(|e| Failure::Config(format!("{}: {e}", data.display())))?;
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Failure::Config("fit data file is empty".into()))?;
    let mut out = open_out(cli)?;
    writeln!(out, "# {}", provenance(&cfg, cli.seed))?;
    match header {
        "omega_ghz,re_r,im_r" => {
            let samples = lines
                .map(|l| {
                    let f = parse_row(l, 3)?;
                    Ok(ReflectionSample {
                        omega_p: f[0] * 1e9 * TAU,
                        r: Complex64::new(f[1], f[2]),
                    })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let fit = fit_spectrum(&samples, None, None)?;
            writeln!(out, "gamma_r_mhz = {:.6} +- {:.6}", fit.gamma_r / TAU / 1e6, fit.stderr_gamma_r / TAU / 1e6)?;
            writeln!(out, "gamma_mhz = {:.6} +- {:.6}", fit.gamma / TAU / 1e6, fit.stderr_gamma / TAU / 1e6)?;
            writeln!(out, "omega_10_ghz = {:.6} +- {:.6}", fit.omega_10 / TAU / 1e9, fit.stderr_omega_10 / TAU / 1e9)?;
            writeln!(out, "gamma_phi_mhz = {:.6}", (fit.gamma - fit.gamma_r / 2.0) / TAU / 1e6)?;
            writeln!(out, "residual_norm = {:e}", fit.residual_norm)?;
            writeln!(out, "nonphysical_dephasing = {}", fit.nonphysical_dephasing)?;
        }
        "p_dbm,abs_r" => {
            let samples = lines
                .map(|l| {
                    let f = parse_row(l, 2)?;
                    Ok(PowerSample {
                        p_in: 1e-3 * 10f64.powf(f[0] / 10.0),
                        abs_r: f[1],
                    })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let gamma = decoherence_rate(&p);
            let (k, stderr) = fit_power_scan(&samples, p.gamma_r(), gamma)?;
            writeln!(out, "k_coupling = {k:e} +- {stderr:e}")?;
        }
        other => {
            return Err(Failure::Config(format!(
                "unrecognized fit data header {other:?} (expected omega_ghz,re_r,im_r or p_dbm,abs_r)"
            )))
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_row(line: &str, n: usize) -> Result<Vec<f64>, Failure> {
    let fields: Vec<f64> = line
        .split(',')
        .map(|f| f.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Config(format!("bad data row: {line:?}")))?;
    if fields.len() != n {
        return Err(Failure::Config(format!(
            "expected {n} columns, got {} in row {line:?}",
            fields.len()
        )));
    }
    Ok(fields)
}

fn run_analytic(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let p = cfg.qubit_params()?;
    let gamma = decoherence_rate(&p);
    let (t1, t2) = coherence_times(&p);
    let tau_c = coherent_tau_opt(&p);
    let tau_f = fock_tau_opt(&p);
    let mut out = open_out(cli)?;
    writeln!(out, "# {}", provenance(&cfg, cli.seed))?;
    writeln!(out, "label = {}", p.label())?;
    writeln!(out, "gamma_mhz = {:.6}", gamma / TAU / 1e6)?;
    writeln!(out, "t1_ns = {:.3}", t1 * 1e9)?;
    writeln!(out, "t2_ns = {:.3}", t2 * 1e9)?;
    writeln!(out, "dephasing_ratio = {:.6}", p.gamma_phi() / p.gamma_r())?;
    writeln!(out, "coherent_tau_opt_ns = {:.3}", tau_c * 1e9)?;
    writeln!(out, "coherent_eta_opt = {:.6}", eta_analytic_coherent(tau_c, &p))?;
    writeln!(out, "fock_tau_opt_ns = {:.3}", tau_f * 1e9)?;
    writeln!(out, "fock_eta_opt = {:.6}", fock_efficiency(tau_f, &p))?;
    if let Some(e) = cfg.transmon_energies()? {
        use photonload::params::transmon_frequency;
        writeln!(out, "transmon_f10_ghz = {:.4}", transmon_frequency(&e) / 1e9)?;
    }
    out.flush()?;
    Ok(())
}
