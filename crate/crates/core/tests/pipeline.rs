use rydberg_toffoli::dynamics::{
    decay_error_analytic, ideal_output, GateModel, SimConfig, Simulator,
};
use rydberg_toffoli::errormodels::{self, ScanConfig};
use rydberg_toffoli::geometry::Geometry;
use rydberg_toffoli::interactions::PairInteractions;
use rydberg_toffoli::optimizer::{optimize_ensemble, OptimizerConfig};
use rydberg_toffoli::physparams::lookup_species;

fn quick() -> OptimizerConfig {
    OptimizerConfig {
        ensemble_runs: 6,
        min_iterations: 5_000,
        max_iterations: 20_000,
        refine_iterations: 20_000,
        ..Default::default()
    }
}

#[test]
fn optimized_geometry_round_trips_into_a_working_gate() {
    let sp = lookup_species(60).unwrap();
    let best = optimize_ensemble(3, 5.0, &sp, &quick()).unwrap().best;
    let g = Geometry::from_json(&best.geometry().to_json().unwrap()).unwrap();
    let pairs = PairInteractions::from_geometry(&g, &sp).unwrap();
    assert!((pairs.chi_min() - best.chi).abs() < 1e-9 * best.chi);

    let model = GateModel::from_geometry(&g, &sp).unwrap();
    let ideal = Simulator::new(model.clone().without_decay(), SimConfig::default())
        .unwrap()
        .run()
        .unwrap();
    // Blocked inputs keep an off-resonant residue of order (Ω_t/U)² = 1/400.
    for r in &ideal.per_input {
        assert!(
            r.fidelity > 1.0 - 1.0 / 200.0,
            "{} -> {}: {}",
            r.label,
            ideal_output(r.input, 3).unwrap(),
            r.fidelity
        );
    }

    let cfg = SimConfig {
        trajectories: 400,
        seed: 2,
        ..Default::default()
    };
    let mc = Simulator::new(model.clone(), cfg).unwrap().run().unwrap();
    let e = decay_error_analytic(3, &model.drive, model.gamma_s, model.gamma_p);
    assert!(
        (mc.fidelity - (1.0 - e)).abs() < 4.0 * mc.stderr + 1e-3,
        "{} vs {}",
        mc.fidelity,
        1.0 - e
    );
}

#[test]
fn noise_families_share_one_baseline() {
    let sp = lookup_species(60).unwrap();
    let g = rydberg_toffoli::geometry::antipodal_pair(5.0);
    let base = GateModel::from_geometry(&g, &sp).unwrap();
    let cfg = ScanConfig {
        samples: 5,
        seed: 1,
        ..Default::default()
    };
    let amp = errormodels::amplitude_noise_scan(&base, &[0.05], &cfg).unwrap()[0];
    let dop = errormodels::doppler_scan(&base, &[20.0], &cfg).unwrap()[0];
    // Each curve reports its increase over the same unperturbed gate.
    let b1 = amp.infidelity - amp.increase;
    let b2 = dop.infidelity - dop.increase;
    assert!((b1 - b2).abs() < 1e-12, "{b1} vs {b2}");
    assert!(amp.increase > 0.0 && dop.increase >= 0.0);
}
