//! Static laser-amplitude, laser-phase and Doppler noise on the n = 6 gate.

use rydberg_toffoli::dynamics::GateModel;
use rydberg_toffoli::errormodels::{
    amplitude_noise_scan, doppler_scan, phase_noise_scan, ScanConfig, ScanMetric, TechnicalNoise,
};
use rydberg_toffoli::geometry::octahedron;
use rydberg_toffoli::physparams::lookup_species;

fn main() -> rydberg_toffoli::Result<()> {
    let sp = lookup_species(60)?;
    let base = GateModel::from_geometry(&octahedron(5.0), &sp)?;
    let cfg = ScanConfig {
        samples: 40,
        seed: 4,
        ..Default::default()
    };

    let show = |label: &str, pts: Vec<rydberg_toffoli::errormodels::CurvePoint>| {
        println!("{label}");
        for p in pts {
            println!(
                "  {:>6.3}  infidelity {:.3e} ± {:.1e}",
                p.x, p.infidelity, p.stderr
            );
        }
    };
    show(
        "amplitude bound delta",
        amplitude_noise_scan(&base, &[0.02, 0.05, 0.1], &cfg)?,
    );
    show(
        "phase sigma (rad)",
        phase_noise_scan(&base, &[0.1, 0.5], &cfg)?,
    );
    show(
        "temperature (uK)",
        doppler_scan(&base, &[10.0, 50.0], &cfg)?,
    );
    // Populations barely notice detunings; the phase-sensitive score does.
    let process = ScanConfig {
        metric: ScanMetric::Process,
        ..cfg.clone()
    };
    show(
        "temperature (uK), process metric",
        doppler_scan(&base, &[10.0, 50.0], &process)?,
    );

    let (st, sc) = TechnicalNoise {
        temperature: 50.0,
        ..Default::default()
    }
    .doppler_sigmas();
    println!("Doppler widths at 50 uK: target {st:.3}, control {sc:.3} (1/us)");
    Ok(())
}
