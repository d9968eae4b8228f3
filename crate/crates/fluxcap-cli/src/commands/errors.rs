//! `errors`: local (dephasing + timing) and correlated (unrefocused-pair)
//! error budgets.

use clap::Args;
use fluxcap::budget::{
    correlated_error_tail, local_error_curve, CurveEntry, NoiseParams, CORRELATED_ERROR_THRESHOLD,
    LOCAL_ERROR_THRESHOLD,
};
use fluxcap::ising::chain_couplings;
use serde::Serialize;

use crate::commands::{build_ctx, CommonArgs, Ctx};
use crate::output::{hash_inputs, manifest_entry, sanitize, sig, sig_opt, write_json, write_text, RunManifest, Table};
use crate::CliError;

#[derive(Debug, Args)]
pub struct ErrorsArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Local error eps_loc = eps_d + eps_tim versus drive voltage.
    #[arg(long, conflicts_with = "correlated")]
    pub local: bool,

    /// Correlated error from pairs at separation >= p versus coupler
    /// capacitance.
    #[arg(long)]
    pub correlated: bool,

    /// Coupler capacitance grid in fF. Local mode takes one value (default
    /// from the config); correlated mode accepts a repeatable grid.
    #[arg(long, value_name = "FF")]
    pub cc: Vec<f64>,

    /// Drive voltage grid point in uV (local mode, repeatable).
    #[arg(long = "ve", value_name = "UV")]
    pub ve_uv: Vec<f64>,

    /// RMS gate-voltage noise in uV; overrides the config.
    #[arg(long = "dv", value_name = "UV")]
    pub delta_v_uv: Option<f64>,

    /// RMS pulse-timing jitter in ns; overrides the config.
    #[arg(long = "dt", value_name = "NS")]
    pub delta_t_ns: Option<f64>,

    /// Acceptance threshold; defaults per mode.
    #[arg(long)]
    pub threshold: Option<f64>,

    /// Minimum unrefocused separation p (correlated mode, repeatable).
    #[arg(long = "p", value_name = "P")]
    pub separations: Vec<usize>,

    /// Chain length used to measure the decay ratio (correlated mode).
    #[arg(long, default_value_t = 6)]
    pub n: usize,
}

pub fn run(args: &ErrorsArgs) -> Result<bool, CliError> {
    if args.local == args.correlated {
        return Err(CliError::Config(
            "pass exactly one of --local or --correlated".into(),
        ));
    }
    let ctx = build_ctx(&args.common, true)?;
    if args.local {
        run_local(args, &ctx)
    } else {
        run_correlated(args, &ctx)
    }
}

#[derive(Serialize)]
struct LocalSummary {
    cc_ff: f64,
    threshold: f64,
    minimum_ve_uv: Option<f64>,
    minimum_eps_loc: Option<f64>,
    minimum_interior: bool,
    below_threshold: bool,
    threshold_factor: Option<f64>,
}

fn run_local(args: &ErrorsArgs, ctx: &Ctx) -> Result<bool, CliError> {
    let cc = match args.cc.as_slice() {
        [] => ctx.cfg.cc_ff,
        [one] => *one,
        more => {
            return Err(CliError::Config(format!(
                "local mode takes one --cc value, got {}",
                more.len()
            )))
        }
    };
    let grid: Vec<f64> = if args.ve_uv.is_empty() {
        (1..=41).map(|i| i as f64 * 50.0).collect()
    } else {
        args.ve_uv.clone()
    };
    let noise = NoiseParams {
        delta_v_uv: args.delta_v_uv.unwrap_or(ctx.cfg.noise.delta_v_uv),
        delta_t_ns: args.delta_t_ns.unwrap_or(ctx.cfg.noise.delta_t_ns),
    };
    let threshold = args.threshold.unwrap_or(LOCAL_ERROR_THRESHOLD);

    // The curve is scanned as one unit so the minimum and its threshold
    // verdict come from the same pass that filled the table.
    let curve = local_error_curve(&ctx.solver, &ctx.cfg.qubit, cc, &grid, &noise, threshold)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut table = Table::new(vec![
        "Ve_uV".into(),
        "g_GHz".into(),
        "E01_GHz".into(),
        "dE01_dVe_GHz_per_uV".into(),
        "t_cp_ns".into(),
        "T2_ns".into(),
        "eps_d".into(),
        "eps_tim".into(),
        "eps_loc".into(),
        "status".into(),
    ]);
    let mut status = Vec::with_capacity(curve.entries.len());
    let mut partial = false;
    for entry in &curve.entries {
        match entry {
            CurveEntry::Point(p) => {
                table.push(vec![
                    sig(p.ve_uv),
                    sig(p.g_ghz),
                    sig(p.e01_ghz),
                    sig(p.slope_ghz_per_uv),
                    sig(p.t_cp_ns),
                    sig_opt(p.t2_ns),
                    sig(p.eps_d),
                    sig(p.eps_tim),
                    sig(p.eps_loc),
                    "ok".into(),
                ]);
                status.push("ok".to_string());
            }
            CurveEntry::Failed { ve_uv, message } => {
                partial = true;
                let msg = sanitize(message);
                let mut cells = vec![sig(*ve_uv)];
                cells.resize(9, String::new());
                cells.push(format!("error: {msg}"));
                table.push(cells);
                status.push(format!("error: {msg}"));
            }
        }
    }

    let csv_path = write_text(&ctx.out_dir, "errors_local.csv", &table.to_csv())?;
    let summary = LocalSummary {
        cc_ff: curve.cc_ff,
        threshold: curve.threshold,
        minimum_ve_uv: curve.minimum.as_ref().map(|p| p.ve_uv),
        minimum_eps_loc: curve.minimum.as_ref().map(|p| p.eps_loc),
        minimum_interior: curve.minimum_interior,
        below_threshold: curve.below_threshold,
        threshold_factor: curve.threshold_factor,
    };
    let summary_path = write_json(&ctx.out_dir, "errors_local_summary.json", &summary)?;
    match (&summary.minimum_ve_uv, &summary.minimum_eps_loc) {
        (Some(ve), Some(eps)) => println!(
            "local error floor: eps_loc = {} at Ve = {} uV ({} threshold {})",
            sig(*eps),
            sig(*ve),
            if curve.below_threshold { "meets" } else { "misses" },
            sig(curve.threshold),
        ),
        _ => println!("local error floor: no grid point evaluated"),
    }

    let manifest = RunManifest {
        command: format!("errors --local --cc {cc}"),
        config_sha256: hash_inputs(&ctx.cfg),
        grid,
        outputs: vec![manifest_entry(&ctx.out_dir, &csv_path), manifest_entry(&ctx.out_dir, &summary_path)],
        per_point_status: status,
        wall_clock_ms: ctx.elapsed_ms(),
    };
    write_json(&ctx.out_dir, "errors_local_manifest.json", &manifest)?;
    Ok(partial)
}

#[derive(Serialize)]
struct CorrelatedSummary {
    threshold: f64,
    separations: Vec<usize>,
    /// Per separation, the first grid capacitance whose tail error meets
    /// the threshold, scanning upward.
    max_cc_below_threshold: Vec<Option<f64>>,
}

fn run_correlated(args: &ErrorsArgs, ctx: &Ctx) -> Result<bool, CliError> {
    let seps: Vec<usize> = if args.separations.is_empty() {
        vec![2, 3, 4, 5]
    } else {
        args.separations.clone()
    };
    if let Some(&bad) = seps.iter().find(|&&p| p < 2) {
        return Err(CliError::Config(format!(
            "--p must be at least 2 (nearest unrefocused separation), got {bad}"
        )));
    }
    let grid: Vec<f64> = if args.cc.is_empty() {
        vec![0.02, 0.05, 0.077, 0.10, 0.125, 0.15, 0.175, 0.20, 0.25, 0.30, 0.35]
    } else {
        args.cc.clone()
    };
    let threshold = args.threshold.unwrap_or(CORRELATED_ERROR_THRESHOLD);
    let n = args.n;
    let base = crate::commands::driven_qubit(&ctx.cfg)?;

    let rows = ctx.par_map(&grid, |&cc| {
        let chain = chain_couplings(&ctx.solver, n, &base, cc)?;
        let r = chain.ratio.abs();
        let mut eps = Vec::with_capacity(seps.len());
        for &p in &seps {
            eps.push(correlated_error_tail(r, p)?);
        }
        Ok::<(f64, Vec<f64>), fluxcap::Error>((chain.ratio, eps))
    });

    let mut header = vec!["Cc_fF".to_string(), "R".to_string()];
    for &p in &seps {
        header.push(format!("eps_non_p{p}"));
    }
    header.push("status".into());
    let width = header.len();
    let mut table = Table::new(header);
    let mut status = Vec::with_capacity(rows.len());
    let mut partial = false;
    let mut crossings: Vec<Option<f64>> = vec![None; seps.len()];
    for (&cc, row) in grid.iter().zip(&rows) {
        match row {
            Ok((ratio, eps)) => {
                let mut cells = vec![sig(cc), sig(*ratio)];
                cells.extend(eps.iter().map(|&e| sig(e)));
                cells.push("ok".into());
                table.push(cells);
                status.push("ok".to_string());
                for (slot, &e) in crossings.iter_mut().zip(eps) {
                    if e <= threshold {
                        *slot = Some(slot.map_or(cc, |prev: f64| prev.max(cc)));
                    }
                }
            }
            Err(e) => {
                partial = true;
                let msg = sanitize(&e.to_string());
                let mut cells = vec![sig(cc)];
                cells.resize(width - 1, String::new());
                cells.push(format!("error: {msg}"));
                table.push(cells);
                status.push(format!("error: {msg}"));
            }
        }
    }

    let csv_path = write_text(&ctx.out_dir, "errors_correlated.csv", &table.to_csv())?;
    let summary = CorrelatedSummary {
        threshold,
        separations: seps,
        max_cc_below_threshold: crossings,
    };
    let summary_path = write_json(&ctx.out_dir, "errors_correlated_summary.json", &summary)?;

    let manifest = RunManifest {
        command: format!("errors --correlated --n {n}"),
        config_sha256: hash_inputs(&ctx.cfg),
        grid,
        outputs: vec![manifest_entry(&ctx.out_dir, &csv_path), manifest_entry(&ctx.out_dir, &summary_path)],
        per_point_status: status,
        wall_clock_ms: ctx.elapsed_ms(),
    };
    write_json(&ctx.out_dir, "errors_correlated_manifest.json", &manifest)?;
    Ok(partial)
}
