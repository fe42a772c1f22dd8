//! Collective interaction energies of small registers and the orientation
//! dependence of a rigid tetrahedron of controls.

use std::f64::consts::PI;

use rydberg_toffoli::interactions::{
    collective_matrix, eigen_n2, eigen_n4, sorted_eigenvalues, tetrahedron_scan,
};
use rydberg_toffoli::physparams::lookup_species;

fn main() -> rydberg_toffoli::Result<()> {
    let (d, b) = (30.0, 2.0);
    println!("n=2 closed form {:?}", eigen_n2(d, b));
    println!(
        "n=2 dense       {:?}",
        sorted_eigenvalues(collective_matrix(2, d, b)?)
    );
    println!("n=4 closed form {:?}", eigen_n4(d, b));
    println!(
        "n=4 dense       {:?}",
        sorted_eigenvalues(collective_matrix(4, d, b)?)
    );

    let sp = lookup_species(60)?;
    println!("\ntheta    best chi   |E2-| (rad/us)");
    for i in 0..=12 {
        let theta = i as f64 * PI / 24.0;
        let best = (0..360)
            .map(|k| tetrahedron_scan(theta, k as f64 * PI / 180.0, 5.0, &sp))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .max_by(|a, b| a.chi_min.total_cmp(&b.chi_min))
            .expect("non-empty scan");
        println!(
            "{theta:.4}  {:>9.2}  {:.2}",
            best.chi_min,
            best.e2_minus.abs()
        );
    }
    Ok(())
}
