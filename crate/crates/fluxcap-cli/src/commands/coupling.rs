//! `coupling`: voltage-controlled ZZ interaction of a capacitively coupled
//! pair, and the distance decay of a chain.

use clap::{Args, ValueEnum};
use fluxcap::ising::{chain_couplings, pair_coupling, PairCouplingOptions};

use crate::commands::{build_ctx, CommonArgs};
use crate::output::{hash_inputs, manifest_entry, sanitize, sig, sig_opt, write_json, write_text, RunManifest, Table};
use crate::CliError;

/// Dressed states kept per qubit by the joint-diagonalization cross-check.
const ORACLE_STATES: usize = 8;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Pair,
    Chain,
}

#[derive(Debug, Args)]
pub struct CouplingArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// `pair` sweeps g against gate voltage; `chain` tabulates g(d) and
    /// the decay ratio R against coupler capacitance.
    #[arg(long, value_enum, default_value_t = Mode::Pair)]
    pub mode: Mode,

    /// Coupler capacitance in fF. Pair mode takes one value (default from
    /// the config); chain mode accepts a repeatable grid.
    #[arg(long, value_name = "FF")]
    pub cc: Vec<f64>,

    /// Gate voltage in uV. Pair mode sweeps a repeatable grid; chain mode
    /// takes at most one value overriding the drive voltage, which
    /// otherwise defaults to the island degeneracy point.
    #[arg(long = "ve", value_name = "UV")]
    pub ve_uv: Vec<f64>,

    /// Chain length (chain mode).
    #[arg(long, default_value_t = 6)]
    pub n: usize,
}

pub fn run(args: &CouplingArgs) -> Result<bool, CliError> {
    let ctx = build_ctx(&args.common, true)?;
    match args.mode {
        Mode::Pair => run_pair(args, &ctx),
        Mode::Chain => run_chain(args, &ctx),
    }
}

fn run_pair(args: &CouplingArgs, ctx: &crate::commands::Ctx) -> Result<bool, CliError> {
    let cc = match args.cc.as_slice() {
        [] => ctx.cfg.cc_ff,
        [one] => *one,
        more => {
            return Err(CliError::Config(format!(
                "pair mode takes one --cc value, got {}",
                more.len()
            )))
        }
    };
    let grid: Vec<f64> = if args.ve_uv.is_empty() {
        (0..=11).map(|i| i as f64 * 200.0).collect()
    } else {
        args.ve_uv.clone()
    };
    let base = ctx.cfg.qubit.clone();
    let opts = PairCouplingOptions {
        oracle_states: Some(ORACLE_STATES),
    };

    let rows = ctx.par_map(&grid, |&ve| {
        let spec = base.with_voltage(ve);
        pair_coupling(&ctx.solver, &spec, &spec, cc, &opts).map(|pc| (spec.offset_charge(), pc))
    });

    let mut table = Table::new(vec![
        "Ve_uV".into(),
        "ng".into(),
        "g_GHz".into(),
        "g_island_GHz".into(),
        "g_oracle_GHz".into(),
        "E01_dressed_GHz".into(),
        "status".into(),
    ]);
    let mut status = Vec::with_capacity(rows.len());
    let mut partial = false;
    for (&ve, row) in grid.iter().zip(&rows) {
        match row {
            Ok((ng, pc)) => {
                table.push(vec![
                    sig(ve),
                    sig(*ng),
                    sig(pc.g_ghz),
                    sig(pc.g_island_ghz),
                    sig_opt(pc.g_oracle_ghz),
                    sig(pc.dressed_e01_ghz[0]),
                    "ok".into(),
                ]);
                status.push("ok".to_string());
            }
            Err(e) => {
                partial = true;
                let msg = sanitize(&e.to_string());
                table.push(vec![
                    sig(ve),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("error: {msg}"),
                ]);
                status.push(format!("error: {msg}"));
            }
        }
    }

    let csv_path = write_text(&ctx.out_dir, "coupling_pair.csv", &table.to_csv())?;
    let manifest = RunManifest {
        command: format!("coupling --mode pair --cc {cc}"),
        config_sha256: hash_inputs(&ctx.cfg),
        grid,
        outputs: vec![manifest_entry(&ctx.out_dir, &csv_path)],
        per_point_status: status,
        wall_clock_ms: ctx.elapsed_ms(),
    };
    write_json(&ctx.out_dir, "coupling_pair_manifest.json", &manifest)?;
    Ok(partial)
}

fn run_chain(args: &CouplingArgs, ctx: &crate::commands::Ctx) -> Result<bool, CliError> {
    if args.n < 3 {
        return Err(CliError::Config(format!(
            "--n must be at least 3 for chain mode, got {}",
            args.n
        )));
    }
    let grid: Vec<f64> = if args.cc.is_empty() {
        vec![0.02, 0.05, 0.077, 0.10, 0.15]
    } else {
        args.cc.clone()
    };
    let base = match args.ve_uv.as_slice() {
        [] => crate::commands::driven_qubit(&ctx.cfg)?,
        [one] => ctx.cfg.qubit.with_voltage(*one),
        more => {
            return Err(CliError::Config(format!(
                "chain mode takes at most one --ve value, got {}",
                more.len()
            )))
        }
    };
    let n = args.n;

    let rows = ctx.par_map(&grid, |&cc| chain_couplings(&ctx.solver, n, &base, cc));

    let mut header = vec!["Cc_fF".to_string()];
    for d in 1..n {
        header.push(format!("g{d}_GHz"));
    }
    header.push("R".into());
    header.push("status".into());
    let width = header.len();
    let mut table = Table::new(header);
    let mut status = Vec::with_capacity(rows.len());
    let mut partial = false;
    for (&cc, row) in grid.iter().zip(&rows) {
        match row {
            Ok(ch) => {
                let mut cells = vec![sig(cc)];
                cells.extend(ch.g_ghz.iter().map(|&g| sig(g)));
                cells.push(sig(ch.ratio));
                cells.push("ok".into());
                table.push(cells);
                status.push("ok".to_string());
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

    let csv_path = write_text(&ctx.out_dir, "coupling_chain.csv", &table.to_csv())?;
    let manifest = RunManifest {
        command: format!("coupling --mode chain --n {n}"),
        config_sha256: hash_inputs(&ctx.cfg),
        grid,
        outputs: vec![manifest_entry(&ctx.out_dir, &csv_path)],
        per_point_status: status,
        wall_clock_ms: ctx.elapsed_ms(),
    };
    write_json(&ctx.out_dir, "coupling_chain_manifest.json", &manifest)?;
    Ok(partial)
}
