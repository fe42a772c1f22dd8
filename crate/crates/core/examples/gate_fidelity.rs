//! Quantum-trajectory simulation of the C_nNOT gate: decay-free truth table
//! and the Monte Carlo average fidelity against the analytic decay estimate.
//!
//! cargo run --release --example gate_fidelity -- [trajectories]

use rydberg_toffoli::dynamics::{decay_error_analytic, GateModel, SimConfig, Simulator};
use rydberg_toffoli::geometry::antipodal_pair;
use rydberg_toffoli::physparams::lookup_species;

fn main() -> rydberg_toffoli::Result<()> {
    let traj = std::env::args()
        .nth(1)
        .map_or(500, |a| a.parse().expect("trajectories"));
    let sp = lookup_species(60)?;
    let model = GateModel::from_geometry(&antipodal_pair(5.0), &sp)?;

    let ideal = Simulator::new(model.clone().without_decay(), SimConfig::default())?.run()?;
    println!("decay-free: input -> population in the ideal output");
    for r in &ideal.per_input {
        println!("  {}  {:.6}", r.label, r.fidelity);
    }

    let cfg = SimConfig {
        trajectories: traj,
        seed: 1,
        ..Default::default()
    };
    let rep = Simulator::new(model.clone(), cfg)?.run()?;
    let e = decay_error_analytic(model.n, &model.drive, model.gamma_s, model.gamma_p);
    println!(
        "MC fidelity  {:.5} ± {:.5} ({traj} trajectories/input)",
        rep.fidelity, rep.stderr
    );
    println!("1 - E        {:.5}", 1.0 - e);
    println!("gate time    {:.1} ns", model.drive.t_det * 1e3);
    Ok(())
}
