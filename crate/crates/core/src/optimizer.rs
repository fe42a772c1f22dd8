//! Perturb-and-accept search for control placements that maximize the
//! minimum asymmetry factor, plus ensemble statistics and the n_max search.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{to_cartesian, Geometry, SphericalPoint};
use crate::interactions::chi_min_on_sphere;
use crate::physparams::{SpeciesParams, TWO_PI};
use crate::seeding::rng_for;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Half-width of each perturbation as a fraction of the current angle.
    pub perturb_fraction: f64,
    /// Floor on the half-width, radians; keeps angles at 0 from freezing.
    pub min_half_width: f64,
    pub min_iterations: usize,
    /// Hard stop, whatever the convergence state.
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub ensemble_runs: usize,
    pub seed: u64,
    /// Keep the per-iteration χ trace in the result.
    pub record_trace: bool,
    /// Iterations of the adaptive-width polishing phase run after the
    /// multiplicative chain; 0 disables it.
    pub refine_iterations: usize,
    /// Starting absolute half-width of the polishing phase, radians.
    pub refine_initial_width: f64,
    /// Restarts whose χ is within this relative distance of the best one
    /// count as converged to the same optimum in ensemble statistics.
    pub basin_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            perturb_fraction: 0.1,
            min_half_width: 0.01,
            min_iterations: 100_000,
            max_iterations: 1_000_000,
            convergence_tol: 1e-5,
            ensemble_runs: 100,
            seed: 0,
            record_trace: false,
            refine_iterations: 100_000,
            refine_initial_width: 0.3,
            basin_tolerance: 1e-3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.perturb_fraction >= 0.0) || !(self.min_half_width >= 0.0) {
            return bad("perturbation widths must be >= 0");
        }
        if self.perturb_fraction == 0.0 && self.min_half_width == 0.0 {
            return bad("perturbation widths cannot both be zero");
        }
        if self.max_iterations < self.min_iterations {
            return bad("max_iterations must be >= min_iterations");
        }
        if self.refine_iterations > 0 && !(self.refine_initial_width > 0.0) {
            return bad("refine_initial_width must be positive");
        }
        if self.ensemble_runs == 0 {
            return bad("ensemble_runs must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerResult {
    pub n: usize,
    pub radius: f64,
    pub chi: f64,
    pub angles: Vec<SphericalPoint>,
    pub iterations: usize,
    pub accepted: usize,
    /// χ_p after every iteration p (empty unless requested).
    pub trace: Vec<f64>,
}

impl OptimizerResult {
    pub fn geometry(&self) -> Geometry {
        Geometry::from_spherical(self.radius, &self.angles)
            .expect("optimizer keeps controls distinct")
    }
}

fn perturb<R: Rng + ?Sized>(x: f64, cfg: &OptimizerConfig, rng: &mut R) -> f64 {
    let w = (cfg.perturb_fraction * x.abs()).max(cfg.min_half_width);
    x + rng.random_range(-w..=w)
}

fn tangent_move<R: Rng + ?Sized>(p: &SphericalPoint, w: f64, rng: &mut R) -> SphericalPoint {
    let dtheta = rng.random_range(-w..=w);
    let dphi = rng.random_range(-w..=w) / p.theta.sin().max(0.05);
    SphericalPoint::new(p.theta + dtheta, p.phi + dphi)
}

/// Single chain from the given starting angles: the multiplicative
/// perturb-and-accept walk (each angle moves by up to `perturb_fraction` of
/// its value, floored at `min_half_width`) until converged, then the
/// adaptive polishing phase. Only strict improvements are accepted.
pub fn optimize_from<R: Rng + ?Sized>(
    start: &[SphericalPoint],
    radius: f64,
    sp: &SpeciesParams,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> OptimizerResult {
    let n = start.len();
    let mut best: Vec<SphericalPoint> = start.to_vec();
    let mut chi = chi_min_on_sphere(&best, radius, sp);
    if !chi.is_finite() && n >= 2 {
        // Coincident starting points give χ = 0 rather than NaN; anything
        // else is a caller error we can only survive by treating χ as 0.
        chi = 0.0;
    }
    let mut cand = best.clone();
    let mut trace = Vec::new();
    let mut prev = chi;
    let mut accepted = 0;
    let mut p = 0;
    while p < cfg.max_iterations {
        for (c, b) in cand.iter_mut().zip(&best) {
            *c = SphericalPoint::new(perturb(b.theta, cfg, rng), perturb(b.phi, cfg, rng));
        }
        let c = chi_min_on_sphere(&cand, radius, sp);
        if c > chi {
            chi = c;
            best.copy_from_slice(&cand);
            accepted += 1;
        }
        p += 1;
        if cfg.record_trace {
            trace.push(chi);
        }
        if p >= cfg.min_iterations && (chi - prev).abs() < cfg.convergence_tol {
            break;
        }
        prev = chi;
    }
    cand.copy_from_slice(&best);
    // Polishing alternates two move types, each with its own half-width that
    // grows on success and shrinks on failure so the step tracks the basin:
    // a tangent-plane move of one atom, and a joint move of all atoms. Near
    // the optimum several pair constraints bind at once and only the joint
    // move can lift them together.
    let mut widths = [cfg.refine_initial_width; 2];
    for step in 0..cfg.refine_iterations {
        let joint = step % 2 == 1;
        let w = widths[joint as usize];
        if joint {
            for (c, b) in cand.iter_mut().zip(&best) {
                *c = tangent_move(b, w, rng);
            }
        } else {
            let k = rng.random_range(0..n);
            cand[k] = tangent_move(&best[k], w, rng);
        }
        let c = chi_min_on_sphere(&cand, radius, sp);
        let slot = &mut widths[joint as usize];
        if c > chi {
            chi = c;
            best.copy_from_slice(&cand);
            accepted += 1;
            *slot = (*slot * 1.5).min(1.0);
        } else {
            cand.copy_from_slice(&best);
            *slot *= 0.995;
            if *slot < 1e-9 {
                *slot = 0.01;
            }
        }
        p += 1;
        if cfg.record_trace {
            trace.push(chi);
        }
    }
    OptimizerResult {
        n,
        radius,
        chi,
        angles: best,
        iterations: p,
        accepted,
        trace,
    }
}

/// Single chain from uniformly random angles.
pub fn optimize_run<R: Rng + ?Sized>(
    n: usize,
    radius: f64,
    sp: &SpeciesParams,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<OptimizerResult> {
    if n < 2 {
        return Err(Error::SingleControl);
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    cfg.validate()?;
    let start: Vec<_> = (0..n)
        .map(|_| SphericalPoint::new(rng.random_range(0.0..=PI), rng.random_range(0.0..TWO_PI)))
        .collect();
    Ok(optimize_from(&start, radius, sp, cfg, rng))
}

// ---------------------------------------------------------------------------
// Alignment

/// Minimum-cost perfect matching on a square cost matrix (Hungarian
/// algorithm, O(n³)). Returns `assign[row] = col`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // Potentials and matching use 1-based indices with a virtual column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Great-circle angle between two directions.
pub fn angular_distance(a: &SphericalPoint, b: &SphericalPoint) -> f64 {
    let va = to_cartesian(*a, 1.0);
    let vb = to_cartesian(*b, 1.0);
    va.cross(&vb).norm().atan2(va.dot(&vb))
}

/// Result of mapping one placement onto a reference up to the symmetries
/// of χ (rotation about ẑ, reflection z → −z, mirror φ → −φ) and a
/// relabelling of the atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// Input placement transformed and reordered to match the reference.
    pub aligned: Vec<SphericalPoint>,
    /// Largest per-atom great-circle deviation from the reference.
    pub max_deviation: f64,
    pub rotation: f64,
    pub z_reflected: bool,
    pub mirrored: bool,
}

fn transform(p: &SphericalPoint, rot: f64, zref: bool, mirror: bool) -> SphericalPoint {
    let theta = if zref { PI - p.theta } else { p.theta };
    let phi = if mirror { -p.phi } else { p.phi };
    SphericalPoint::new(theta, phi + rot)
}

/// Aligns `points` to `reference` (same length). Candidate rotations bring
/// each off-axis input atom onto each off-axis reference meridian; the
/// assignment at each candidate is a minimum-cost matching on squared
/// great-circle distance.
pub fn align_to_reference(points: &[SphericalPoint], reference: &[SphericalPoint]) -> Alignment {
    assert_eq!(points.len(), reference.len());
    let n = points.len();
    let off_axis = |p: &SphericalPoint| p.theta.sin() > 1e-3;
    let mut best: Option<(f64, Alignment)> = None;
    for &zref in &[false, true] {
        for &mirror in &[false, true] {
            let base: Vec<_> = points
                .iter()
                .map(|p| transform(p, 0.0, zref, mirror))
                .collect();
            let mut rotations = vec![0.0];
            for a in base.iter().filter(|p| off_axis(p)) {
                for r in reference.iter().filter(|p| off_axis(p)) {
                    rotations.push(r.phi - a.phi);
                }
            }
            for rot in rotations {
                let moved: Vec<_> = base
                    .iter()
                    .map(|p| SphericalPoint::new(p.theta, p.phi + rot))
                    .collect();
                let cost: Vec<Vec<f64>> = reference
                    .iter()
                    .map(|r| {
                        moved
                            .iter()
                            .map(|m| angular_distance(r, m).powi(2))
                            .collect()
                    })
                    .collect();
                let assign = hungarian(&cost);
                let total: f64 = (0..n).map(|i| cost[i][assign[i]]).sum();
                if best.as_ref().is_none_or(|(t, _)| total < *t) {
                    let aligned: Vec<_> = assign.iter().map(|&j| moved[j]).collect();
                    let max_deviation = aligned
                        .iter()
                        .zip(reference)
                        .map(|(a, r)| angular_distance(a, r))
                        .fold(0.0, f64::max);
                    best = Some((
                        total,
                        Alignment {
                            aligned,
                            max_deviation,
                            rotation: rot,
                            z_reflected: zref,
                            mirrored: mirror,
                        },
                    ));
                }
            }
        }
    }
    best.expect("at least one candidate").1
}

/// Rotates the placement about ẑ so the most equatorial atom sits on φ = 0.
pub fn canonical_frame(points: &[SphericalPoint]) -> Vec<SphericalPoint> {
    let pivot = points
        .iter()
        .max_by(|a, b| a.theta.sin().total_cmp(&b.theta.sin()))
        .map(|p| p.phi)
        .unwrap_or(0.0);
    points
        .iter()
        .map(|p| SphericalPoint::new(p.theta, p.phi - pivot))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub best: OptimizerResult,
    /// Per-atom mean direction of the aligned ensemble.
    pub angle_means: Vec<SphericalPoint>,
    /// Per-atom RMS great-circle spread about the mean direction, radians.
    pub angle_spread: Vec<f64>,
    /// Number of restarts that reached the best basin and enter the means.
    pub converged_runs: usize,
    /// χ of every restart, in run order.
    pub chis: Vec<f64>,
}

fn mean_directions(runs: &[Vec<SphericalPoint>]) -> (Vec<SphericalPoint>, Vec<f64>) {
    let n = runs[0].len();
    let mut means = Vec::with_capacity(n);
    let mut spread = Vec::with_capacity(n);
    for j in 0..n {
        let sum: Vector3<f64> = runs.iter().map(|r| to_cartesian(r[j], 1.0)).sum();
        let m = SphericalPoint::from_cartesian(&sum);
        let ms = runs
            .iter()
            .map(|r| angular_distance(&r[j], &m).powi(2))
            .sum::<f64>()
            / runs.len() as f64;
        means.push(m);
        spread.push(ms.sqrt());
    }
    (means, spread)
}

/// Independent restarts (run `i` seeded from `hash(cfg.seed, i)`), run in
/// parallel. Restarts that reached the best basin are aligned to the best
/// placement, itself put in [`canonical_frame`], before averaging.
pub fn optimize_ensemble(
    n: usize,
    radius: f64,
    sp: &SpeciesParams,
    cfg: &OptimizerConfig,
) -> Result<EnsembleResult> {
    cfg.validate()?;
    let runs: Vec<OptimizerResult> = (0..cfg.ensemble_runs)
        .into_par_iter()
        .map(|i| optimize_run(n, radius, sp, cfg, &mut rng_for(cfg.seed, &[i as u64])))
        .collect::<Result<_>>()?;
    Ok(summarize(runs, cfg.basin_tolerance))
}

/// Restarts from explicit initial placements (run `i` uses `starts[i]`).
pub fn optimize_ensemble_from(
    starts: &[Vec<SphericalPoint>],
    radius: f64,
    sp: &SpeciesParams,
    cfg: &OptimizerConfig,
) -> Result<EnsembleResult> {
    cfg.validate()?;
    if starts.is_empty() {
        return Err(Error::InvalidParameter("no starting placements".into()));
    }
    let runs: Vec<OptimizerResult> = starts
        .par_iter()
        .enumerate()
        .map(|(i, s)| optimize_from(s, radius, sp, cfg, &mut rng_for(cfg.seed, &[i as u64])))
        .collect();
    Ok(summarize(runs, cfg.basin_tolerance))
}

fn summarize(runs: Vec<OptimizerResult>, basin_tolerance: f64) -> EnsembleResult {
    let chis: Vec<f64> = runs.iter().map(|r| r.chi).collect();
    let best_idx = (0..runs.len())
        .max_by(|&a, &b| chis[a].total_cmp(&chis[b]).then(b.cmp(&a)))
        .expect("non-empty ensemble");
    let reference = canonical_frame(&runs[best_idx].angles);
    let floor = chis[best_idx] * (1.0 - basin_tolerance);
    let aligned: Vec<Vec<SphericalPoint>> = runs
        .iter()
        .filter(|r| r.chi >= floor)
        .map(|r| align_to_reference(&r.angles, &reference).aligned)
        .collect();
    let converged_runs = aligned.len();
    let (angle_means, angle_spread) = mean_directions(&aligned);
    let mut best = runs[best_idx].clone();
    best.angles = reference;
    EnsembleResult {
        best,
        angle_means,
        angle_spread,
        converged_runs,
        chis,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NMaxResult {
    pub n_max: usize,
    /// (n, best χ) for every register size tried.
    pub chis: Vec<(usize, f64)>,
    /// Best placement at n_max.
    pub best: Option<OptimizerResult>,
    /// Best placement for every n tried, in order.
    pub per_n: Vec<OptimizerResult>,
}

/// Largest n whose optimized χ exceeds `threshold`, searching upward from
/// n = 2 until the first failure. The result never drops below 2: a
/// threshold that even n = 2 misses still reports 2, with the χ list showing
/// the failure.
pub fn find_n_max(
    radius: f64,
    sp: &SpeciesParams,
    threshold: f64,
    cfg: &OptimizerConfig,
) -> Result<NMaxResult> {
    let mut chis = Vec::new();
    let mut best = None;
    let mut per_n = Vec::new();
    let mut n = 2;
    loop {
        let ens = optimize_ensemble(n, radius, sp, cfg)?;
        chis.push((n, ens.best.chi));
        per_n.push(ens.best.clone());
        if ens.best.chi <= threshold {
            break;
        }
        best = Some(ens.best);
        n += 1;
        if n > 64 {
            break;
        }
    }
    let n_max = best.as_ref().map_or(2, |b| b.n);
    Ok(NMaxResult {
        n_max,
        chis,
        best,
        per_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physparams::lookup_species;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            min_iterations: 20_000,
            max_iterations: 200_000,
            ensemble_runs: 8,
            ..Default::default()
        }
    }

    #[test]
    fn hungarian_finds_permutation() {
        let cost = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let a = hungarian(&cost);
        let total: f64 = (0..3).map(|i| cost[i][a[i]]).sum();
        assert_eq!(total, 5.0);
        let mut seen = a.clone();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2]);
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = 5;
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
                .collect();
            let a = hungarian(&cost);
            let got: f64 = (0..n).map(|i| cost[i][a[i]]).sum();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut best = f64::INFINITY;
            permute(&mut perm, 0, &mut |p| {
                best = best.min((0..n).map(|i| cost[i][p[i]]).sum());
            });
            assert!((got - best).abs() < 1e-12);
        }
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn trace_is_monotone() {
        let sp = lookup_species(60).unwrap();
        let cfg = OptimizerConfig {
            record_trace: true,
            ..quick()
        };
        let r = optimize_run(5, 5.0, &sp, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(r.trace.len(), r.iterations);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*r.trace.last().unwrap(), r.chi);
    }

    #[test]
    fn runs_are_reproducible() {
        let sp = lookup_species(60).unwrap();
        let a = optimize_run(4, 5.0, &sp, &quick(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = optimize_run(4, 5.0, &sp, &quick(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_controls_go_to_the_poles() {
        let sp = lookup_species(60).unwrap();
        // A lone chain can stall on the far side of the magic-angle zero;
        // the best of a few restarts cannot.
        let r = optimize_ensemble(2, 5.0, &sp, &quick()).unwrap().best;
        let mut th: Vec<f64> = r.angles.iter().map(|p| p.theta).collect();
        th.sort_by(f64::total_cmp);
        assert!(th[0] < 0.01 && (PI - th[1]) < 0.01, "{th:?}");
    }

    #[test]
    fn reported_chi_is_recomputable() {
        let sp = lookup_species(60).unwrap();
        let r = optimize_run(5, 5.0, &sp, &quick(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let again = crate::interactions::chi_min(&r.geometry(), &sp).unwrap();
        assert!(
            (again - r.chi).abs() <= 1e-9 * r.chi,
            "{again} vs {}",
            r.chi
        );
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(8))]
        #[test]
        fn optimum_ignores_common_coefficient_scale(seed in 0u64..1000, k in 0.1f64..10.0) {
            let sp = lookup_species(60).unwrap();
            let cfg = OptimizerConfig { min_iterations: 2_000, max_iterations: 4_000, refine_iterations: 2_000, ..quick() };
            let a = optimize_run(4, 5.0, &sp, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = optimize_run(4, 5.0, &sp.with_scaled_coefficients(k), &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for (p, q) in a.angles.iter().zip(&b.angles) {
                proptest::prop_assert!(angular_distance(p, q) < 1e-6);
            }
            proptest::prop_assert!((a.chi - b.chi).abs() < 1e-9 * a.chi);
        }
    }

    #[test]
    fn single_ensemble_run_equals_single_run() {
        let sp = lookup_species(60).unwrap();
        let cfg = OptimizerConfig {
            ensemble_runs: 1,
            ..quick()
        };
        let ens = optimize_ensemble(3, 5.0, &sp, &cfg).unwrap();
        let run = optimize_run(3, 5.0, &sp, &cfg, &mut rng_for(cfg.seed, &[0])).unwrap();
        assert_eq!(ens.best.chi, run.chi);
        assert_eq!(ens.chis, vec![run.chi]);
    }

    #[test]
    fn alignment_recovers_rotated_relabelled_copy() {
        let pts = vec![
            SphericalPoint::new(0.4, 0.3),
            SphericalPoint::new(1.7, 2.1),
            SphericalPoint::new(2.2, 4.0),
            SphericalPoint::new(1.1, 5.5),
        ];
        let moved: Vec<_> = pts
            .iter()
            .rev()
            .map(|p| SphericalPoint::new(PI - p.theta, -p.phi + 1.3))
            .collect();
        let a = align_to_reference(&moved, &pts);
        assert!(a.max_deviation < 1e-9, "{}", a.max_deviation);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sp = lookup_species(60).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(optimize_run(1, 5.0, &sp, &quick(), &mut rng).is_err());
        assert!(optimize_run(3, 0.0, &sp, &quick(), &mut rng).is_err());
        let bad = OptimizerConfig {
            ensemble_runs: 0,
            ..quick()
        };
        assert!(optimize_run(3, 5.0, &sp, &bad, &mut rng).is_err());
    }

    #[test]
    fn infinite_threshold_reports_floor() {
        let sp = lookup_species(60).unwrap();
        let cfg = OptimizerConfig {
            min_iterations: 2_000,
            max_iterations: 2_000,
            ensemble_runs: 2,
            ..Default::default()
        };
        let r = find_n_max(5.0, &sp, f64::INFINITY, &cfg).unwrap();
        assert_eq!(r.n_max, 2);
        assert_eq!(r.chis.len(), 1);
        assert!(r.best.is_none());
    }
}
