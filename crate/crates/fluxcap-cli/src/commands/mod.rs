//! Shared plumbing for the subcommands: config loading, solver setup,
//! thread pools, and the run context every command executes in.

pub mod cluster;
pub mod coupling;
pub mod errors;
pub mod spectrum;

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::Args;
use fluxcap::config::{parse_device_config, DeviceConfig, Topology};
use fluxcap::eigen::EigenOptions;
use fluxcap::spectrum::QubitSolver;
use fluxcap::FluxQubitSpec;

use crate::store::FsStore;
use crate::CliError;

/// Gate capacitance of the coupled-array parameter set, also the default
/// coupler capacitance.
pub const COUPLED_CG_FF: f64 = 0.077;

/// Charge cutoff certified for the default junction parameters.
pub const DEFAULT_NC: u32 = 7;

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Device config JSON; omitted uses the built-in default device.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Directory for emitted datasets and the run manifest.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,

    /// Sweep parallelism; defaults to the available cores. Results do not
    /// depend on this.
    #[arg(long, value_name = "K")]
    pub threads: Option<usize>,

    /// Directory for the persistent spectrum cache; speeds up reruns
    /// without changing any output byte.
    #[arg(long, value_name = "DIR")]
    pub cache: Option<PathBuf>,

    /// Charge cutoff per node phase (basis dimension (2nc+1)^3).
    #[arg(long, value_name = "NC", default_value_t = DEFAULT_NC)]
    pub nc: u32,
}

/// Everything a command needs to run.
pub struct Ctx {
    pub cfg: DeviceConfig,
    pub out_dir: PathBuf,
    pub solver: QubitSolver,
    pub pool: rayon::ThreadPool,
    pub started: Instant,
}

/// The built-in device: a six-site chain of default qubits. Commands that
/// model the coupled array lower the island gate capacitance to the
/// coupled parameter set; single-qubit spectroscopy keeps the bare spec.
pub fn default_config(coupled: bool) -> DeviceConfig {
    let mut qubit = FluxQubitSpec::default();
    if coupled {
        qubit.cg_ff = COUPLED_CG_FF;
    }
    DeviceConfig {
        topology: Topology::Chain { n: 6 },
        qubit,
        qubit_overrides: Vec::new(),
        cc_ff: COUPLED_CG_FF,
        coupler_overrides: Vec::new(),
        noise: Default::default(),
    }
}

pub fn build_ctx(common: &CommonArgs, coupled: bool) -> Result<Ctx, CliError> {
    let cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
            parse_device_config(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => default_config(coupled),
    };
    if common.nc < 3 {
        return Err(CliError::Config(format!(
            "charge cutoff must be at least 3, got {}",
            common.nc
        )));
    }
    fs::create_dir_all(&common.out)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", common.out.display())))?;

    let mut solver = QubitSolver::new(common.nc).with_eigen_options(EigenOptions::default());
    if let Some(dir) = &common.cache {
        let store = FsStore::new(dir.clone())
            .map_err(|e| CliError::Io(format!("creating cache {}: {e}", dir.display())))?;
        solver.set_store(Arc::new(store));
    }
    let threads = common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(Ctx {
        cfg,
        out_dir: common.out.clone(),
        solver,
        pool,
        started: Instant::now(),
    })
}

impl Ctx {
    /// Order-preserving parallel map over a parameter grid.
    pub fn par_map<T, U, F>(&self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        use rayon::prelude::*;
        self.pool.install(|| items.par_iter().map(f).collect())
    }

    pub fn elapsed_ms(&self) -> u64 {
        self.started.elapsed().as_millis() as u64
    }
}

/// The qubit spec at its operating drive. A configured nonzero gate
/// voltage wins; otherwise the islands sit at the charge-degeneracy
/// plateau, where the coupling is strongest and flattest. Undriven
/// islands produce no measurable coupling at all.
pub fn driven_qubit(cfg: &DeviceConfig) -> Result<FluxQubitSpec, CliError> {
    if cfg.qubit.ve_uv != 0.0 {
        return Ok(cfg.qubit.clone());
    }
    let ve = cfg
        .qubit
        .voltage_for_offset_charge(0.5)
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg.qubit.with_voltage(ve))
}

/// Inclusive linear grid; the endpoints land exactly on `lo` and `hi`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| {
                if i + 1 == points {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}
