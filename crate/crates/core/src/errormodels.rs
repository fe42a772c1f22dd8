//! Error budgets on top of the gate engine: atom-position scatter,
//! off-resonant pair-state leakage and static technical noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::basis::{BasisState, G1, P};
use crate::dynamics::hamiltonian::evolve_sequence;
use crate::dynamics::model::C64;
use crate::dynamics::{
    process_fidelity, CcLeakage, CtLeakage, DriveNoise, FidelityReport, GateModel, PulseStage,
    SimConfig, Simulator, Stage,
};
use crate::error::{Error, Result};
use crate::geometry::{sample_displaced, Geometry, PositionNoise};
use crate::interactions::{angular_factor, pair_index, PairInteractions};
use crate::physparams::{units, DriveParams, SpeciesParams};
use crate::seeding::rng_for;

/// One off-resonant pair-state channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageChannel {
    pub kappa: usize,
    pub pair_label: &'static str,
    /// Dispersion coefficient, rad/µs·µm³ (θ = 0 value for control-target
    /// channels).
    pub c3_eff: f64,
    /// Förster defect, rad/µs.
    pub delta: f64,
}

impl LeakageChannel {
    /// Coupling at distance `r`.
    pub fn coupling(&self, r: f64) -> f64 {
        self.c3_eff / (r * r * r)
    }
}

/// Resonant |p s⟩ ↔ |s p⟩ coefficient at θ = 0, /2π in GHz·µm³.
pub const C3_SP0_GHZ: f64 = -8.388;

const CT_TABLE: [(&str, f64, f64); 4] = [
    ("60S1/2,1/2 ; 61P3/2,3/2", -9.134, 0.8771),
    ("59D5/2,5/2 ; 60P1/2,-1/2", -9.254, 7.8032),
    ("58D5/2,5/2 ; 61P3/2,-1/2", -3.926, 8.6142),
    ("59S1/2,1/2 ; 62P3/2,3/2", -0.14, 5.3452),
];

const CC_TABLE: [(&str, f64, f64); 4] = [
    ("60S1/2,1/2 ; 61S1/2,1/2", 4.301, 0.2784),
    ("60S1/2,1/2 ; 59D5/2,5/2", 5.919, 7.0614),
    ("58D5/2,5/2 ; 61S1/2,1/2", 3.203, 7.4587),
    ("58D5/2,5/2 ; 59D5/2,5/2", 4.408, 14.8012),
];

fn channel(table: &[(&'static str, f64, f64); 4], kappa: usize) -> Result<LeakageChannel> {
    if !(1..=4).contains(&kappa) {
        return Err(Error::InvalidParameter(format!(
            "leakage channel index must be 1..4, got {kappa}"
        )));
    }
    let (label, c3, d) = table[kappa - 1];
    Ok(LeakageChannel {
        kappa,
        pair_label: label,
        c3_eff: units::ghz(c3),
        delta: units::ghz(d),
    })
}

/// Channel κ ∈ 1..4 coupled to |p_j s_t⟩ / |s_j p_t⟩ (m = 60).
pub fn ct_channel(kappa: usize) -> Result<LeakageChannel> {
    channel(&CT_TABLE, kappa)
}

/// Channel κ ∈ 1..4 coupled to |p_1 p_2⟩ (m = 60).
pub fn cc_channel(kappa: usize) -> Result<LeakageChannel> {
    channel(&CC_TABLE, kappa)
}

fn two_level_model(n: usize, u_ct: Vec<f64>, drive: DriveParams) -> GateModel {
    GateModel {
        n,
        u_ct,
        u_cc: vec![0.0; n * (n - 1) / 2],
        drive,
        gamma_s: 0.0,
        gamma_p: 0.0,
        decay: Default::default(),
        noise: DriveNoise::default(),
        leakage: Default::default(),
    }
}

/// 1 − P(|p_j 1_t⟩) after the target π pulses |1⟩↔|s⟩ then |0⟩↔|s⟩, with
/// the control pre-excited, exchange B₀ at θ = 0 and channel `ch` open.
pub fn leakage_ct_rotation_error_with(
    ch: Option<&LeakageChannel>,
    r_ct: f64,
    drive: &DriveParams,
) -> Result<f64> {
    if !(r_ct > 0.0) {
        return Err(Error::ZeroDistance);
    }
    let b0 = units::ghz(C3_SP0_GHZ) / r_ct.powi(3);
    let mut m = two_level_model(1, vec![b0], *drive);
    if let Some(ch) = ch {
        m.leakage.ct.push(CtLeakage {
            coupling: vec![ch.coupling(r_ct)],
            delta: ch.delta,
        });
    }
    let amp = drive.omega_t.into();
    let tt = PI / drive.omega_t;
    let seq = [
        PulseStage {
            stage: Stage::S2,
            duration: tt,
            amplitude: amp,
        },
        PulseStage {
            stage: Stage::S3,
            duration: tt,
            amplitude: amp,
        },
    ];
    let start = BasisState(0).with(0, P).with(1, G1);
    let (sub, psi) = evolve_sequence(&m, &seq, start)?;
    Ok(1.0 - psi[sub.index[&start]].norm_sqr())
}

pub fn leakage_ct_rotation_error(kappa: usize, r_ct: f64, drive: &DriveParams) -> Result<f64> {
    leakage_ct_rotation_error_with(Some(&ct_channel(kappa)?), r_ct, drive)
}

/// 1 − P(|0_1 0_2⟩) after the control π pulse, the 3π/Ω_t target window
/// and the returning control pulse, with |p_1 p_2⟩ coupled only to channel
/// `ch`.
pub fn leakage_cc_error_with(ch: &LeakageChannel, d_cc: f64, drive: &DriveParams) -> Result<f64> {
    pair_leakage(ch, d_cc, drive, drive.target_time())
}

/// As [`leakage_cc_error_with`] with an explicit wait `gap` (µs) between the
/// two control pulses.
pub fn pair_leakage(ch: &LeakageChannel, d_cc: f64, drive: &DriveParams, gap: f64) -> Result<f64> {
    if !(gap >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gap must be >= 0, got {gap}"
        )));
    }
    if !(d_cc > 0.0) {
        return Err(Error::ZeroDistance);
    }
    let mut m = two_level_model(2, vec![0.0, 0.0], *drive);
    m.leakage.cc = Some(CcLeakage {
        coupling: vec![ch.coupling(d_cc)],
        delta: ch.delta,
    });
    let amp: crate::dynamics::model::C64 = drive.omega_c.into();
    let tc = PI / drive.omega_c;
    let seq = [
        PulseStage {
            stage: Stage::S1,
            duration: tc,
            amplitude: amp,
        },
        PulseStage {
            stage: Stage::S1,
            duration: gap,
            amplitude: 0.0.into(),
        },
        PulseStage {
            stage: Stage::S5,
            duration: tc,
            amplitude: -amp,
        },
    ];
    let start = BasisState(0);
    let (sub, psi) = evolve_sequence(&m, &seq, start)?;
    Ok(1.0 - psi[sub.index[&start]].norm_sqr())
}

pub fn leakage_cc_error(kappa: usize, d_cc: f64, drive: &DriveParams) -> Result<f64> {
    leakage_cc_error_with(&cc_channel(kappa)?, d_cc, drive)
}

/// Leakage terms for a geometry: control-target channels scaled by
/// (1−3cos²θ)/(−2) and 1/r³ per control, and one control-control channel
/// at 1/d³.
pub fn leakage_terms(
    g: &Geometry,
    ct: &[usize],
    cc: Option<usize>,
) -> Result<crate::dynamics::LeakageTerms> {
    let pairs = PairInteractions::from_geometry(g, &crate::physparams::lookup_species(60)?)?;
    let n = g.n();
    let mut terms = crate::dynamics::LeakageTerms::default();
    for &k in ct {
        let ch = ct_channel(k)?;
        let coupling = (0..n)
            .map(|j| {
                ch.coupling(g.control_target_distance(j)) * angular_factor(pairs.theta_ct[j]) / -2.0
            })
            .collect();
        terms.ct.push(CtLeakage {
            coupling,
            delta: ch.delta,
        });
    }
    if let Some(k) = cc {
        let ch = cc_channel(k)?;
        let mut coupling = vec![0.0; n * (n - 1) / 2];
        for j in 0..n {
            for l in (j + 1)..n {
                coupling[pair_index(j, l, n)] = ch.coupling(g.control_distance(j, l));
            }
        }
        terms.cc = Some(CcLeakage {
            coupling,
            delta: ch.delta,
        });
    }
    Ok(terms)
}

/// Full trajectory fidelity with control-target channels κ = 1, 2 and the
/// control-control channel κ = 1 in the basis.
pub fn gate_fidelity_with_leakage(
    g: &Geometry,
    sp: &SpeciesParams,
    drive: &DriveParams,
    cfg: &SimConfig,
) -> Result<FidelityReport> {
    let pairs = PairInteractions::from_geometry(g, sp)?;
    let mut m = GateModel::new(&pairs, sp, *drive)?;
    m.leakage = leakage_terms(g, &[1, 2], Some(1))?;
    Simulator::new(m, cfg.clone())?.run()
}

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380649e-23;
/// ⁸⁷Rb mass, kg.
pub const RB87_MASS: f64 = 86.909_180_527 * 1.660_539_066_60e-27;
/// Effective two-photon wave numbers of the target and control drives, 1/m.
pub const K_EFF_T: f64 = 5.0e6;
pub const K_EFF_C: f64 = 2.0e7;

/// Static per-shot technical imperfections.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TechnicalNoise {
    /// Relative amplitude bound δ_Ω; draws are uniform in [−δ_Ω, δ_Ω].
    pub delta_omega: f64,
    /// Phase standard deviation, rad.
    pub sigma_phi: f64,
    /// Atomic temperature, µK.
    pub temperature: f64,
}

impl TechnicalNoise {
    pub fn validate(&self) -> Result<()> {
        if [self.delta_omega, self.sigma_phi, self.temperature]
            .iter()
            .all(|x| *x >= 0.0 && x.is_finite())
        {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "noise parameters must be finite and >= 0".into(),
            ))
        }
    }

    /// Doppler standard deviations (target, control) in 1/µs: k_eff·v_rms.
    pub fn doppler_sigmas(&self) -> (f64, f64) {
        let v = (K_B * self.temperature * 1e-6 / RB87_MASS).sqrt();
        (K_EFF_T * v * 1e-6, K_EFF_C * v * 1e-6)
    }

    /// One realization for `n` controls: independent draws per laser for
    /// amplitude and phase, per atom for Doppler.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DriveNoise {
        let (st, sc) = self.doppler_sigmas();
        let amp_c = self.delta_omega * rng.random_range(-1.0..=1.0);
        let amp_t = self.delta_omega * rng.random_range(-1.0..=1.0);
        let phase_c = self.sigma_phi * rng.sample::<f64, _>(StandardNormal);
        let phase_t = self.sigma_phi * rng.sample::<f64, _>(StandardNormal);
        let detuning_c = (0..n)
            .map(|_| sc * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let detuning_t = st * rng.sample::<f64, _>(StandardNormal);
        DriveNoise {
            amp_c,
            amp_t,
            phase_c,
            phase_t,
            detuning_c,
            detuning_t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseFamily {
    Position,
    Amplitude,
    Phase,
    Doppler,
}

impl NoiseFamily {
    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// How a perturbed gate is scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanMetric {
    /// Mean output population |⟨ideal(i)|ψ_i⟩|² over basis inputs. Blind to
    /// phases on the outputs.
    #[default]
    Population,
    /// Phase-sensitive average gate fidelity against the unperturbed
    /// decay-free gate (see [`process_fidelity`]). Decay-free only.
    Process,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub samples: usize,
    pub seed: u64,
    /// Run each sample as a decaying trajectory ensemble instead of the
    /// deterministic decay-free gate.
    pub include_decay: bool,
    #[serde(default)]
    pub metric: ScanMetric,
    pub sim: SimConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            samples: 500,
            seed: 0,
            include_decay: false,
            metric: ScanMetric::Population,
            sim: SimConfig {
                trajectories: 20,
                ..Default::default()
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    /// Mean 1 − F̄ over samples.
    pub infidelity: f64,
    /// Standard error of the mean over samples.
    pub stderr: f64,
    /// Infidelity minus that of the unperturbed gate.
    pub increase: f64,
}

fn gate_infidelity(
    m: GateModel,
    cfg: &ScanConfig,
    sample: usize,
    reference: Option<&[C64]>,
) -> Result<f64> {
    let m = if cfg.include_decay {
        m
    } else {
        m.without_decay()
    };
    let sim = SimConfig {
        seed: crate::seeding::derive_seed(cfg.seed, &[sample as u64]),
        ..cfg.sim.clone()
    };
    let sim = Simulator::new(m, sim)?;
    match reference {
        Some(r) => Ok(1.0 - process_fidelity(&sim.output_amplitudes()?, r)?),
        None => Ok(sim.run()?.infidelity()),
    }
}

/// Shared driver: for every x, `samples` models from `make(x, rng)` with
/// one rng stream per sample index (common random numbers across x).
fn scan<F>(
    xs: &[f64],
    base: &GateModel,
    family: NoiseFamily,
    cfg: &ScanConfig,
    make: F,
) -> Result<Vec<CurvePoint>>
where
    F: Fn(f64, &mut crate::seeding::WorkRng) -> Result<GateModel> + Sync,
{
    if xs.is_empty() {
        return Err(Error::InvalidParameter("empty scan grid".into()));
    }
    if cfg.samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let reference = match cfg.metric {
        ScanMetric::Population => None,
        ScanMetric::Process if cfg.include_decay => {
            return Err(Error::InvalidParameter(
                "the process metric needs decay-free scans".into(),
            ));
        }
        ScanMetric::Process => Some(
            Simulator::new(base.clone().without_decay(), cfg.sim.clone())?.output_amplitudes()?,
        ),
    };
    let reference = reference.as_deref();
    let baseline = gate_infidelity(base.clone(), cfg, usize::MAX, reference)?;
    xs.iter()
        .map(|&x| {
            let vals: Vec<f64> = (0..cfg.samples)
                .into_par_iter()
                .map(|s| {
                    let mut rng = rng_for(cfg.seed, &[family.tag(), s as u64]);
                    gate_infidelity(make(x, &mut rng)?, cfg, s, reference)
                })
                .collect::<Result<_>>()?;
            let k = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / k;
            let var = if vals.len() > 1 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            Ok(CurvePoint {
                x,
                infidelity: mean,
                stderr: (var / k).sqrt(),
                increase: mean - baseline,
            })
        })
        .collect()
}

fn noise_on_axis(axis: Axis, sigma: f64, fixed: f64) -> Result<PositionNoise> {
    match axis {
        Axis::X => PositionNoise::new(sigma, fixed, fixed),
        Axis::Y => PositionNoise::new(fixed, sigma, fixed),
        Axis::Z => PositionNoise::new(fixed, fixed, sigma),
    }
}

/// Infidelity against position scatter along `axis` (σ on that axis,
/// `fixed_sigma` on the others); the drive stays that of `g0`.
pub fn position_error_scan(
    g0: &Geometry,
    sp: &SpeciesParams,
    axis: Axis,
    sigmas: &[f64],
    fixed_sigma: f64,
    cfg: &ScanConfig,
) -> Result<Vec<CurvePoint>> {
    let base = GateModel::from_geometry(g0, sp)?;
    position_error_scan_with(g0, sp, &base, axis, sigmas, fixed_sigma, cfg)
}

/// As [`position_error_scan`], keeping every setting of `base` (drive,
/// decay, noise, leakage) and replacing only the interaction strengths.
pub fn position_error_scan_with(
    g0: &Geometry,
    sp: &SpeciesParams,
    base: &GateModel,
    axis: Axis,
    sigmas: &[f64],
    fixed_sigma: f64,
    cfg: &ScanConfig,
) -> Result<Vec<CurvePoint>> {
    if g0.n() != base.n {
        return Err(Error::InvalidParameter(
            "geometry and model disagree on n".into(),
        ));
    }
    for &s in sigmas {
        noise_on_axis(axis, s, fixed_sigma)?;
    }
    // The unperturbed reference has no scatter at all, so σ = 0 everywhere
    // reproduces it exactly.
    scan(sigmas, base, NoiseFamily::Position, cfg, |s, rng| {
        let noise = noise_on_axis(axis, s, fixed_sigma)?;
        let g = sample_displaced(g0, &noise, rng);
        let pairs = PairInteractions::from_geometry(&g, sp)?;
        let mut m = base.clone();
        m.u_ct = pairs.u_ct;
        m.u_cc = pairs.u_cc;
        Ok(m)
    })
}

fn technical_scan(
    base: &GateModel,
    xs: &[f64],
    family: NoiseFamily,
    cfg: &ScanConfig,
    noise_at: impl Fn(f64) -> TechnicalNoise + Sync,
) -> Result<Vec<CurvePoint>> {
    for &x in xs {
        noise_at(x).validate()?;
    }
    scan(xs, base, family, cfg, |x, rng| {
        let mut m = base.clone();
        m.noise = noise_at(x).sample(m.n, rng);
        Ok(m)
    })
}

/// Infidelity against the relative amplitude bound δ_Ω.
pub fn amplitude_noise_scan(
    base: &GateModel,
    deltas: &[f64],
    cfg: &ScanConfig,
) -> Result<Vec<CurvePoint>> {
    technical_scan(base, deltas, NoiseFamily::Amplitude, cfg, |d| {
        TechnicalNoise {
            delta_omega: d,
            ..Default::default()
        }
    })
}

/// Infidelity against the phase standard deviation σ_φ.
pub fn phase_noise_scan(
    base: &GateModel,
    sigmas: &[f64],
    cfg: &ScanConfig,
) -> Result<Vec<CurvePoint>> {
    technical_scan(base, sigmas, NoiseFamily::Phase, cfg, |s| TechnicalNoise {
        sigma_phi: s,
        ..Default::default()
    })
}

/// Infidelity against atomic temperature (µK).
pub fn doppler_scan(
    base: &GateModel,
    temperatures: &[f64],
    cfg: &ScanConfig,
) -> Result<Vec<CurvePoint>> {
    technical_scan(base, temperatures, NoiseFamily::Doppler, cfg, |t| {
        TechnicalNoise {
            temperature: t,
            ..Default::default()
        }
    })
}
