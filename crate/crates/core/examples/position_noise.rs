//! Infidelity increase under thermal scatter of the atom positions, for the
//! optimized 3D register against a planar honeycomb.

use rydberg_toffoli::errormodels::{position_error_scan, Axis, ScanConfig};
use rydberg_toffoli::geometry::{honeycomb_comparison, octahedron};
use rydberg_toffoli::physparams::lookup_species;

fn main() -> rydberg_toffoli::Result<()> {
    let sp = lookup_species(60)?;
    let sigmas = [0.5, 1.0, 1.5];
    let cfg = ScanConfig {
        samples: 30,
        seed: 3,
        ..Default::default()
    };
    for (name, g) in [
        ("3D octahedron", octahedron(5.0)),
        ("honeycomb", honeycomb_comparison(5.0)?),
    ] {
        println!("{name} (sigma_x scanned, sigma_y = sigma_z = 0.27 um)");
        for p in position_error_scan(&g, &sp, Axis::X, &sigmas, 0.27, &cfg)? {
            println!(
                "  sigma_x = {:.1} um  increase {:.2e} ± {:.1e}",
                p.x, p.increase, p.stderr
            );
        }
    }
    Ok(())
}
