//! Experiment configuration: INI-style sections with unit-suffixed keys.
//!
//! Sections: `[qubit]`, `[pulse]`, `[simulation]`, `[noise]`, `[sweep]`.
//! Unknown sections and keys are rejected, and parse errors carry line
//! numbers.

use crate::efficiency::SimOptions;
use crate::field::NoiseModel;
use crate::params::{QubitParams, TransmonEnergies};
use crate::waveform::{Amplitude, PhaseSegments, PulseShape, PulseSpec};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

#[derive(Clone, Debug, PartialEq)]
pub struct QubitSection {
    pub label: Option<String>,
    pub gamma_r_mhz: f64,
    pub gamma_phi_mhz: f64,
    pub omega_10_ghz: f64,
    pub k_coupling: Option<f64>,
    pub z0_ohm: f64,
    pub e_c_mhz: Option<f64>,
    pub e_j_ghz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSection {
    pub shape: PulseShape,
    pub tau_ns: f64,
    pub t_start_us: f64,
    pub t_off_us: f64,
    pub peak_dbm: Option<f64>,
    pub target_n: Option<f64>,
    pub phase_m: Option<u32>,
    pub phase_theta_deg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SimulationSection {
    pub dt_ns: Option<f64>,
    pub post_window_us: Option<f64>,
    pub detuning_mhz: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSection {
    pub v_n_volts: f64,
    pub seed: u64,
    pub bin_ns: Option<f64>,
    pub gain_db: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Tau,
    N,
    M,
    Theta,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Tau => "tau",
            SweepParam::N => "n",
            SweepParam::M => "m",
            SweepParam::Theta => "theta",
        }
    }
}

/// Sweep values are stored in config units: ns for tau, degrees for theta,
/// dimensionless for n and m.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSection {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub qubit: QubitSection,
    pub pulse: Option<PulseSection>,
    pub simulation: SimulationSection,
    pub noise: Option<NoiseSection>,
    pub sweep: Option<SweepSection>,
}

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

type Section = BTreeMap<String, (usize, String)>;

fn parse_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw
            .split_once(['#', ';'])
            .map(|(l, _)| l)
            .unwrap_or(raw)
            .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(line_no, "unterminated section header"))?
                .trim()
                .to_string();
            if sections.contains_key(&name) {
                return Err(cfg_err(line_no, format!("duplicate section [{name}]")));
            }
            current = Some(name.clone());
            sections.insert(name, Section::new());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(cfg_err(line_no, format!("expected key = value, got {line:?}")));
        };
        let section = current
            .as_ref()
            .ok_or_else(|| cfg_err(line_no, "key outside any [section]"))?;
        let key = key.trim().to_string();
        let table = sections.get_mut(section).unwrap();
        if table.contains_key(&key) {
            return Err(cfg_err(line_no, format!("duplicate key {key}")));
        }
        table.insert(key, (line_no, value.trim().to_string()));
    }
    Ok(sections)
}

struct SectionReader {
    name: String,
    table: Section,
}

impl SectionReader {
    fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| cfg_err(line, format!("{key}: expected a number, got {v:?}"))),
        }
    }

    fn need_f64(&mut self, key: &str, line_hint: usize) -> Result<f64> {
        self.take_f64(key)?.ok_or_else(|| {
            cfg_err(
                line_hint,
                format!("[{}] is missing required key {key}", self.name),
            )
        })
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        match self.table.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| cfg_err(line, format!("{key}: expected an integer, got {v:?}"))),
        }
    }

    fn take_string(&mut self, key: &str) -> Option<String> {
        self.table.remove(key).map(|(_, v)| v)
    }

    fn finish(self) -> Result<()> {
        if let Some((key, (line, _))) = self.table.into_iter().next() {
            return Err(cfg_err(
                line,
                format!("unknown key {key} in section [{}]", self.name),
            ));
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = parse_sections(text)?;
        let known = ["qubit", "pulse", "simulation", "noise", "sweep"];
        for name in sections.keys() {
            if !known.contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown section [{name}]")));
            }
        }

        let qubit_table = sections
            .remove("qubit")
            .ok_or_else(|| Error::Config("missing required section [qubit]".into()))?;
        let mut q = SectionReader {
            name: "qubit".into(),
            table: qubit_table,
        };
        let qubit = QubitSection {
            label: q.take_string("label"),
            gamma_r_mhz: q.need_f64("gamma_r_mhz", 0)?,
            gamma_phi_mhz: q.need_f64("gamma_phi_mhz", 0)?,
            omega_10_ghz: q.need_f64("omega_10_ghz", 0)?,
            k_coupling: q.take_f64("k_coupling")?,
            z0_ohm: q.take_f64("z0_ohm")?.unwrap_or(50.0),
            e_c_mhz: q.take_f64("e_c_mhz")?,
            e_j_ghz: q.take_f64("e_j_ghz")?,
        };
        q.finish()?;

        let pulse = match sections.remove("pulse") {
            None => None,
            Some(table) => {
                let mut s = SectionReader {
                    name: "pulse".into(),
                    table,
                };
                let shape = match s
                    .take_string("shape")
                    .ok_or_else(|| Error::Config("[pulse] is missing required key shape".into()))?
                    .as_str()
                {
                    "exp_rising" => PulseShape::ExpRising,
                    "exp_decaying" => PulseShape::ExpDecaying,
                    "square" => PulseShape::Square,
                    "gaussian" => PulseShape::Gaussian,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown pulse shape {other:?} (expected exp_rising, exp_decaying, square, gaussian)"
                        )))
                    }
                };
                let sec = PulseSection {
                    shape,
                    tau_ns: s.need_f64("tau_ns", 0)?,
                    t_start_us: s.need_f64("t_start_us", 0)?,
                    t_off_us: s.need_f64("t_off_us", 0)?,
                    peak_dbm: s.take_f64("peak_dbm")?,
                    target_n: s.take_f64("target_n")?,
                    phase_m: s.take_u64("phase_m")?.map(|m| m as u32),
                    phase_theta_deg: s.take_f64("phase_theta_deg")?,
                };
                s.finish()?;
                if sec.peak_dbm.is_some() == sec.target_n.is_some() {
                    return Err(Error::Config(
                        "[pulse] must set exactly one of peak_dbm, target_n".into(),
                    ));
                }
                Some(sec)
            }
        };

        let simulation = match sections.remove("simulation") {
            None => SimulationSection::default(),
            Some(table) => {
                let mut s = SectionReader {
                    name: "simulation".into(),
                    table,
                };
                let sec = SimulationSection {
                    dt_ns: s.take_f64("dt_ns")?,
                    post_window_us: s.take_f64("post_window_us")?,
                    detuning_mhz: s.take_f64("detuning_mhz")?.unwrap_or(0.0),
                };
                s.finish()?;
                sec
            }
        };

        let noise = match sections.remove("noise") {
            None => None,
            Some(table) => {
                let mut s = SectionReader {
                    name: "noise".into(),
                    table,
                };
                let sec = NoiseSection {
                    v_n_volts: s.need_f64("v_n_volts", 0)?,
                    seed: s.take_u64("seed")?.unwrap_or(0),
                    bin_ns: s.take_f64("bin_ns")?,
                    gain_db: s.take_f64("gain_db")?.unwrap_or(0.0),
                };
                s.finish()?;
                Some(sec)
            }
        };

        let sweep = match sections.remove("sweep") {
            None => None,
            Some(table) => {
                let mut s = SectionReader {
                    name: "sweep".into(),
                    table,
                };
                let parameter = match s
                    .take_string("parameter")
                    .ok_or_else(|| {
                        Error::Config("[sweep] is missing required key parameter".into())
                    })?
                    .as_str()
                {
                    "tau" => SweepParam::Tau,
                    "n" => SweepParam::N,
                    "m" => SweepParam::M,
                    "theta" => SweepParam::Theta,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown sweep parameter {other:?} (expected tau, n, m, theta)"
                        )))
                    }
                };
                let values = if let Some(list) = s.take_string("values") {
                    list.split(',')
                        .map(|v| {
                            v.trim().parse::<f64>().map_err(|_| {
                                Error::Config(format!("sweep values: bad number {v:?}"))
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?
                } else {
                    let start = s.need_f64("start", 0)?;
                    let stop = s.need_f64("stop", 0)?;
                    let count = s.take_u64("count")?.ok_or_else(|| {
                        Error::Config("[sweep] needs values or start/stop/count".into())
                    })? as usize;
                    let spacing = s.take_string("spacing").unwrap_or_else(|| "linear".into());
                    if count < 2 {
                        return Err(Error::Config("sweep count must be >= 2".into()));
                    }
                    (0..count)
                        .map(|i| {
                            let f = i as f64 / (count - 1) as f64;
                            match spacing.as_str() {
                                "linear" => Ok(start + (stop - start) * f),
                                "log" => {
                                    if start <= 0.0 || stop <= 0.0 {
                                        return Err(Error::Config(
                                            "log spacing needs positive start/stop".into(),
                                        ));
                                    }
                                    Ok(start * (stop / start).powf(f))
                                }
                                other => Err(Error::Config(format!(
                                    "unknown spacing {other:?} (expected linear or log)"
                                ))),
                            }
                        })
                        .collect::<Result<Vec<f64>>>()?
                };
                s.finish()?;
                if values.is_empty() {
                    return Err(Error::Config("sweep value list is empty".into()));
                }
                Some(SweepSection { parameter, values })
            }
        };

        Ok(Self {
            qubit,
            pulse,
            simulation,
            noise,
            sweep,
        })
    }

    /// Canonical INI serialization; reparsing yields an identical structure.
    pub fn to_ini_string(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let q = &self.qubit;
        out.push_str("[qubit]\n");
        if let Some(label) = &q.label {
            let _ = writeln!(out, "label = {label}");
        }
        let _ = writeln!(out, "gamma_r_mhz = {}", q.gamma_r_mhz);
        let _ = writeln!(out, "gamma_phi_mhz = {}", q.gamma_phi_mhz);
        let _ = writeln!(out, "omega_10_ghz = {}", q.omega_10_ghz);
        if let Some(k) = q.k_coupling {
            let _ = writeln!(out, "k_coupling = {k}");
        }
        let _ = writeln!(out, "z0_ohm = {}", q.z0_ohm);
        if let Some(v) = q.e_c_mhz {
            let _ = writeln!(out, "e_c_mhz = {v}");
        }
        if let Some(v) = q.e_j_ghz {
            let _ = writeln!(out, "e_j_ghz = {v}");
        }
        if let Some(p) = &self.pulse {
            out.push_str("\n[pulse]\n");
            let shape = match p.shape {
                PulseShape::ExpRising => "exp_rising",
                PulseShape::ExpDecaying => "exp_decaying",
                PulseShape::Square => "square",
                PulseShape::Gaussian => "gaussian",
            };
            let _ = writeln!(out, "shape = {shape}");
            let _ = writeln!(out, "tau_ns = {}", p.tau_ns);
            let _ = writeln!(out, "t_start_us = {}", p.t_start_us);
            let _ = writeln!(out, "t_off_us = {}", p.t_off_us);
            if let Some(v) = p.peak_dbm {
                let _ = writeln!(out, "peak_dbm = {v}");
            }
            if let Some(v) = p.target_n {
                let _ = writeln!(out, "target_n = {v}");
            }
            if let Some(v) = p.phase_m {
                let _ = writeln!(out, "phase_m = {v}");
            }
            if let Some(v) = p.phase_theta_deg {
                let _ = writeln!(out, "phase_theta_deg = {v}");
            }
        }
        let s = &self.simulation;
        if s != &SimulationSection::default() {
            out.push_str("\n[simulation]\n");
            if let Some(v) = s.dt_ns {
                let _ = writeln!(out, "dt_ns = {v}");
            }
            if let Some(v) = s.post_window_us {
                let _ = writeln!(out, "post_window_us = {v}");
            }
            if s.detuning_mhz != 0.0 {
                let _ = writeln!(out, "detuning_mhz = {}", s.detuning_mhz);
            }
        }
        if let Some(n) = &self.noise {
            out.push_str("\n[noise]\n");
            let _ = writeln!(out, "v_n_volts = {}", n.v_n_volts);
            let _ = writeln!(out, "seed = {}", n.seed);
            if let Some(v) = n.bin_ns {
                let _ = writeln!(out, "bin_ns = {v}");
            }
            let _ = writeln!(out, "gain_db = {}", n.gain_db);
        }
        if let Some(sw) = &self.sweep {
            out.push_str("\n[sweep]\n");
            let _ = writeln!(out, "parameter = {}", sw.parameter.as_str());
            let values = sw
                .values
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "values = {values}");
        }
        out
    }

    /// SHA-256 of the canonical serialization, for trace provenance headers.
    pub fn hash_hex(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.to_ini_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn qubit_params(&self) -> Result<QubitParams> {
        let q = &self.qubit;
        QubitParams::from_cyclic_hz(
            q.gamma_r_mhz * 1e6,
            q.gamma_phi_mhz * 1e6,
            q.omega_10_ghz * 1e9,
            q.k_coupling,
            q.z0_ohm,
            q.label.clone().unwrap_or_default(),
        )
    }

    pub fn transmon_energies(&self) -> Result<Option<TransmonEnergies>> {
        match (self.qubit.e_c_mhz, self.qubit.e_j_ghz) {
            (Some(ec), Some(ej)) => TransmonEnergies::new(ec * 1e6, ej * 1e9).map(Some),
            (None, None) => Ok(None),
            _ => Err(Error::Config(
                "[qubit] must set both e_c_mhz and e_j_ghz or neither".into(),
            )),
        }
    }

    pub fn pulse_spec(&self) -> Result<PulseSpec> {
        let p = self
            .pulse
            .as_ref()
            .ok_or_else(|| Error::Config("missing required section [pulse]".into()))?;
        let amplitude = match (p.peak_dbm, p.target_n) {
            (Some(dbm), None) => {
                let power = 1e-3 * 10f64.powf(dbm / 10.0);
                Amplitude::PeakVolts((2.0 * self.qubit.z0_ohm * power).sqrt())
            }
            (None, Some(n)) => Amplitude::TargetN(n),
            _ => {
                return Err(Error::Config(
                    "[pulse] must set exactly one of peak_dbm, target_n".into(),
                ))
            }
        };
        let phase_segments = match (p.phase_m, p.phase_theta_deg) {
            (Some(0), _) | (None, None) => None,
            (Some(m), Some(deg)) => Some(PhaseSegments {
                m,
                theta: deg.to_radians(),
            }),
            (Some(_), None) | (None, Some(_)) => {
                return Err(Error::Config(
                    "[pulse] phase shaping needs both phase_m and phase_theta_deg".into(),
                ))
            }
        };
        Ok(PulseSpec {
            shape: p.shape,
            tau: p.tau_ns * 1e-9,
            t_start: p.t_start_us * 1e-6,
            t_off: p.t_off_us * 1e-6,
            amplitude,
            phase_segments,
        })
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            dt: self.simulation.dt_ns.map(|v| v * 1e-9),
            post_window: self.simulation.post_window_us.map(|v| v * 1e-6),
            detuning: self.simulation.detuning_mhz * 1e6 * TAU,
        }
    }

    pub fn noise_model(&self, seed_override: Option<u64>) -> Option<NoiseModel> {
        self.noise.as_ref().map(|n| NoiseModel {
            v_n: n.v_n_volts,
            seed: seed_override.unwrap_or(n.seed),
            bin: n.bin_ns.map(|v| v * 1e-9),
            gain_db: n.gain_db,
        })
    }
}
