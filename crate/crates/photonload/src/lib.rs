//! Simulation and analysis toolkit for deterministic loading of shaped
//! microwave pulses onto a single two-level emitter terminating a
//! semi-infinite 1D waveguide.
//!
//! The crate covers the full pipeline: device parameters and derived
//! quantities ([`params`]), pulse envelopes and phase schedules
//! ([`waveform`]), Bloch-equation time evolution ([`dynamics`]),
//! single-photon Fock-state loading ([`fock`]), input-output field
//! conversion and synthetic digitizer traces ([`field`]), loading
//! efficiencies and parameter sweeps ([`efficiency`]), and steady-state
//! reflection fits for parameter extraction ([`charfit`]).

pub mod charfit;
pub mod config;
pub mod dynamics;
pub mod efficiency;
pub mod field;
pub mod fock;
pub mod grid;
pub mod optimize;
pub mod params;
pub mod waveform;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Crate-wide error type. Variant names follow the short error tags used
/// in the module contracts.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid-too-short: grid [{grid_start:.3e}, {grid_end:.3e}] s does not cover pulse support [{need_start:.3e}, {need_end:.3e}] s")]
    GridTooShort {
        grid_start: f64,
        grid_end: f64,
        need_start: f64,
        need_end: f64,
    },
    #[error("grid-nonuniform: time grid must have a constant positive step")]
    GridNonuniform,
    #[error("grid-mismatch: traces are defined on different time grids")]
    GridMismatch,
    #[error("integration-diverged: non-finite state at t = {t:.3e} s")]
    IntegrationDiverged { t: f64 },
    #[error("reference-energy-nonpositive: E_off = {e_off:.3e} (windows swallowed by noise)")]
    ReferenceEnergyNonpositive { e_off: f64 },
    #[error("no-time-separation: loading efficiency is not defined for this pulse shape")]
    NoTimeSeparation,
    #[error("fit-diverged: no convergence after {iterations} iterations (residual norm {residual_norm:.3e})")]
    FitDiverged {
        iterations: usize,
        residual_norm: f64,
    },
    #[error("power-range-insufficient: power scan does not bracket the |r| minimum")]
    PowerRangeInsufficient,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
