//! Largest register whose optimized placement keeps χ above a threshold,
//! with the decay-limited fidelity of every size on the way.
//!
//! cargo run --release --example nmax_search -- [radius_um] [m]

use rydberg_toffoli::dynamics::decay_error_analytic;
use rydberg_toffoli::interactions::PairInteractions;
use rydberg_toffoli::optimizer::{find_n_max, OptimizerConfig};
use rydberg_toffoli::physparams::{derive_drive, lookup_species};

fn main() -> rydberg_toffoli::Result<()> {
    let mut args = std::env::args().skip(1);
    let radius: f64 = args.next().map_or(5.0, |a| a.parse().expect("radius"));
    let m: u32 = args.next().map_or(60, |a| a.parse().expect("m"));
    let sp = lookup_species(m)?;
    let cfg = OptimizerConfig {
        ensemble_runs: 30,
        ..Default::default()
    };
    let res = find_n_max(radius, &sp, 100.0, &cfg)?;

    println!(" n       chi     1-E");
    for best in &res.per_n {
        let pairs = PairInteractions::from_geometry(&best.geometry(), &sp)?;
        let d = derive_drive(pairs.min_abs_ct())?;
        let e = decay_error_analytic(best.n, &d, sp.gamma_s, sp.gamma_p);
        println!("{:>2}  {:>9.3}  {:.4}", best.n, best.chi, 1.0 - e);
    }
    println!("n_max = {} at R = {radius} um, m = {m}", res.n_max);
    Ok(())
}
