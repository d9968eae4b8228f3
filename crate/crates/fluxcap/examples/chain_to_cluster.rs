//! From measured chain couplings to a verified 1D cluster state.
//!
//! Measures the ZZ coupling decay of a driven six-site chain, builds the
//! three-step echo schedule for nine qubits, simulates it with every
//! long-range coupling switched on, and scores the result against the
//! ideal cluster state.
//!
//!     cargo run --release --example chain_to_cluster

use fluxcap::budget::echo_residual_chain;
use fluxcap::config::Topology;
use fluxcap::graph_state::{cluster_fidelity, GraphStateTarget};
use fluxcap::ising::{chain_couplings, EffectiveIsingModel};
use fluxcap::schedule::{build_1d_schedule, ScheduleParams};
use fluxcap::sim::simulate;
use fluxcap::spectrum::QubitSolver;
use fluxcap::FluxQubitSpec;

fn main() -> fluxcap::Result<()> {
    let base = FluxQubitSpec {
        cg_ff: 0.077,
        ..FluxQubitSpec::default()
    };
    let drive = base.voltage_for_offset_charge(0.5)?;
    let driven = base.with_voltage(drive);
    println!("islands driven to ng = 1/2 at Ve = {drive:.3} uV");

    let solver = QubitSolver::new(7);
    let chain = chain_couplings(&solver, 6, &driven, 0.077)?;
    println!("\ncoupling vs distance (Cc = 0.077 fF):");
    for (d, g) in chain.g_ghz.iter().enumerate() {
        println!("  g({}) = {:>12.5e} GHz", d + 1, g);
    }
    println!("decay ratio R = {:.5}", chain.ratio);

    let n = 9;
    let g1 = chain.g_ghz[0];
    let sched = build_1d_schedule(n, &ScheduleParams::new(1.0 / (8.0 * g1.abs())))?;
    println!(
        "\n{} steps of {:.3} ns gate {} edges on {n} sites",
        sched.steps.len(),
        sched.steps[0].duration_ns,
        sched.target_edges().len()
    );

    let model = EffectiveIsingModel::from_ratio(Topology::Chain { n }, 0.0, g1, chain.ratio)?;
    let outcome = simulate(&model, &sched, true)?;
    let target = GraphStateTarget::from_schedule(&sched)?;
    let report = cluster_fidelity(&target, &outcome.state)?;

    let bound = echo_residual_chain(chain.ratio.abs())?;
    println!("\ncluster fidelity (long-range couplings on):");
    println!("  raw               = {:.12}", report.raw);
    println!("  frame-corrected   = {:.12}", report.corrected);
    println!("  per-qubit error   = {:.3e}", report.per_qubit_infidelity);
    println!("  analytic bound    = {bound:.3e} per qubit");
    Ok(())
}
