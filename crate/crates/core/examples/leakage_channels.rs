//! Off-resonant pair-state channels: single-pair errors per channel and the
//! gate fidelity with the strongest channels included.

use rydberg_toffoli::dynamics::SimConfig;
use rydberg_toffoli::errormodels::{
    cc_channel, ct_channel, gate_fidelity_with_leakage, leakage_cc_error,
    leakage_ct_rotation_error, C3_SP0_GHZ,
};
use rydberg_toffoli::geometry::antipodal_pair;
use rydberg_toffoli::physparams::{derive_drive, lookup_species, units};

fn main() -> rydberg_toffoli::Result<()> {
    let r: f64 = 5.0;
    let drive = derive_drive((units::ghz(C3_SP0_GHZ) / r.powi(3)).abs())?;
    println!("kappa  control-target channel          1-P");
    for k in 1..=4 {
        println!(
            "{k:>5}  {:<32}  {:.3e}",
            ct_channel(k)?.pair_label,
            leakage_ct_rotation_error(k, r, &drive)?
        );
    }
    println!("kappa  control-control channel          eps(2R)    eps(R)");
    for k in 1..=4 {
        println!(
            "{k:>5}  {:<32}  {:.3e}  {:.3e}",
            cc_channel(k)?.pair_label,
            leakage_cc_error(k, 2.0 * r, &drive)?,
            leakage_cc_error(k, r, &drive)?
        );
    }

    let sp = lookup_species(60)?;
    let cfg = SimConfig {
        trajectories: 300,
        seed: 5,
        ..Default::default()
    };
    let rep = gate_fidelity_with_leakage(&antipodal_pair(r), &sp, &drive, &cfg)?;
    println!(
        "n=2 gate with leakage: {:.5} ± {:.5}",
        rep.fidelity, rep.stderr
    );
    Ok(())
}
