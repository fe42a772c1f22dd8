//! Search control placements on the sphere for the largest asymmetry factor.
//!
//! cargo run --release --example optimize_geometry -- [n] [restarts]

use rydberg_toffoli::interactions::PairInteractions;
use rydberg_toffoli::optimizer::{optimize_ensemble, OptimizerConfig};
use rydberg_toffoli::physparams::{lookup_species, units};

fn main() -> rydberg_toffoli::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(6);
    let runs = args.next().unwrap_or(40);
    let sp = lookup_species(60)?;
    let cfg = OptimizerConfig {
        ensemble_runs: runs,
        ..Default::default()
    };
    let ens = optimize_ensemble(n, 5.0, &sp, &cfg)?;

    let pairs = PairInteractions::from_geometry(&ens.best.geometry(), &sp)?;
    println!("n = {n}, R = 5 um, m = 60, {runs} restarts");
    println!(
        "best chi = {:.4} ({} restarts reached it)",
        ens.best.chi, ens.converged_runs
    );
    println!(
        "min |U_ct|/2pi = {:.4} MHz, max |U_cc|/2pi = {:.5} MHz",
        units::to_mhz(pairs.min_abs_ct()),
        units::to_mhz(pairs.max_abs_cc())
    );
    println!("atom   theta    phi      spread");
    for (j, (p, s)) in ens.angle_means.iter().zip(&ens.angle_spread).enumerate() {
        println!("{j:>4}  {:.4}  {:.4}  {s:.1e}", p.theta, p.phi);
    }
    Ok(())
}
