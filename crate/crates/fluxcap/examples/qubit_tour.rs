//! Walk one qubit from circuit spec to two-level parameters.
//!
//! Certifies a charge cutoff for the default device, prints the level
//! structure at the flux sweet spot, then tabulates the effective
//! two-level (epsilon, Delta) reduction across a narrow flux window.
//!
//!     cargo run --release --example qubit_tour

use fluxcap::eigen::{converge_cutoff, EigenOptions};
use fluxcap::spectrum::{two_level_params, QubitSolver};
use fluxcap::FluxQubitSpec;

fn main() -> fluxcap::Result<()> {
    let spec = FluxQubitSpec::default();
    println!(
        "device: Ej1 = {} GHz, alpha = {}, Ej/Ec = {}, Cg = {} fF",
        spec.ej1_ghz, spec.alpha, spec.r, spec.cg_ff
    );

    let cert = converge_cutoff(&spec, 3, 1e-3, &EigenOptions::default())?;
    println!("\ncharge cutoff search (tolerance 1e-3 GHz):");
    for step in &cert.steps {
        println!(
            "  nc = {:2}  max level shift = {:9.3e} GHz  {}",
            step.nc,
            step.max_shift_ghz,
            if step.accepted { "ok" } else { "too coarse" }
        );
    }
    println!("certified nc = {}", cert.nc);

    let solver = QubitSolver::new(cert.nc);
    let s = solver.solve(&spec, 3)?;
    println!(
        "\nat f = 0.5: E01 = {:.4} GHz, E12 = {:.4} GHz, E01/E12 = {:.3}",
        s.e01(),
        s.e12(),
        s.e01() / s.e12()
    );

    println!("\ntwo-level reduction near the sweet spot:");
    println!("  {:>8}  {:>12}  {:>12}  {:>12}", "f", "eps (GHz)", "Delta (GHz)", "E01 (GHz)");
    for k in -4i32..=4 {
        let f = 0.5 + f64::from(k) * 5e-4;
        let p = two_level_params(&solver, &spec.with_flux(f))?;
        println!(
            "  {f:>8.4}  {:>12.5e}  {:>12.6}  {:>12.6}",
            p.epsilon_ghz, p.delta_ghz, p.e01_ghz
        );
    }
    Ok(())
}
