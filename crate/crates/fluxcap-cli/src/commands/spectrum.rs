//! `spectrum`: single-qubit transition energies along a control axis.

use clap::{Args, ValueEnum};
use fluxcap::spectrum::{sweep_point, SweepAxis};

use crate::commands::{build_ctx, linspace, CommonArgs};
use crate::output::{hash_inputs, manifest_entry, sanitize, sig, sig_opt, write_json, write_text, RunManifest, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Axis {
    Alpha,
    Flux,
    Voltage,
}

impl Axis {
    fn to_sweep(self) -> SweepAxis {
        match self {
            Axis::Alpha => SweepAxis::Alpha,
            Axis::Flux => SweepAxis::Flux,
            Axis::Voltage => SweepAxis::Voltage,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Axis::Alpha => "alpha",
            Axis::Flux => "flux",
            Axis::Voltage => "voltage",
        }
    }

    /// Default grid bounds per axis: the small-junction range, a narrow
    /// band around half flux, and the full gate-voltage period.
    fn default_grid(self) -> (f64, f64, usize) {
        match self {
            Axis::Alpha => (0.1, 0.5, 9),
            Axis::Flux => (0.496, 0.504, 17),
            Axis::Voltage => (0.0, 2200.0, 12),
        }
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Control parameter to sweep.
    #[arg(long, value_enum, default_value_t = Axis::Flux)]
    pub axis: Axis,

    /// Grid start; defaults depend on the axis.
    #[arg(long)]
    pub from: Option<f64>,

    /// Grid end; defaults depend on the axis.
    #[arg(long)]
    pub to: Option<f64>,

    /// Number of grid points.
    #[arg(long)]
    pub points: Option<usize>,
}

pub fn run(args: &SpectrumArgs) -> Result<bool, CliError> {
    let ctx = build_ctx(&args.common, false)?;
    let (d_from, d_to, d_points) = args.axis.default_grid();
    let from = args.from.unwrap_or(d_from);
    let to = args.to.unwrap_or(d_to);
    let points = args.points.unwrap_or(d_points);
    if points == 0 {
        return Err(CliError::Config("empty grid: --points must be at least 1".into()));
    }
    if !from.is_finite() || !to.is_finite() {
        return Err(CliError::Config("grid bounds must be finite".into()));
    }
    let grid = linspace(from, to, points);
    let axis = args.axis.to_sweep();
    let template = ctx.cfg.qubit.clone();

    let rows = ctx.par_map(&grid, |&v| sweep_point(&ctx.solver, &template, axis, v));

    let mut table = Table::new(vec![
        args.axis.name().to_string(),
        "E01_GHz".into(),
        "E12_GHz".into(),
        "Delta_GHz".into(),
        "epsilon_GHz".into(),
        "status".into(),
    ]);
    let mut status = Vec::with_capacity(rows.len());
    let mut partial = false;
    for (&v, row) in grid.iter().zip(&rows) {
        match row {
            Ok(p) => {
                table.push(vec![
                    sig(v),
                    sig(p.e01_ghz),
                    sig(p.e12_ghz),
                    sig_opt(p.delta_ghz),
                    sig_opt(p.epsilon_ghz),
                    "ok".into(),
                ]);
                status.push("ok".to_string());
            }
            Err(e) => {
                partial = true;
                let msg = sanitize(&e.to_string());
                table.push(vec![sig(v), String::new(), String::new(), String::new(), String::new(), format!("error: {msg}")]);
                status.push(format!("error: {msg}"));
            }
        }
    }

    let csv_name = format!("spectrum_{}.csv", args.axis.name());
    let csv_path = write_text(&ctx.out_dir, &csv_name, &table.to_csv())?;
    let manifest = RunManifest {
        command: format!("spectrum --axis {}", args.axis.name()),
        config_sha256: hash_inputs(&ctx.cfg),
        grid,
        outputs: vec![manifest_entry(&ctx.out_dir, &csv_path)],
        per_point_status: status,
        wall_clock_ms: ctx.elapsed_ms(),
    };
    write_json(&ctx.out_dir, &format!("spectrum_{}_manifest.json", args.axis.name()), &manifest)?;
    Ok(partial)
}
