//! Interaction kernels and the collective-potential structures of small
//! control registers.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polarizing_angle, tetrahedron, Geometry, SphericalPoint};
use crate::physparams::SpeciesParams;

/// Angular part of the resonant exchange, 1 − 3cos²θ.
#[inline]
pub fn angular_factor(theta: f64) -> f64 {
    let c = theta.cos();
    1.0 - 3.0 * c * c
}

/// Resonant exchange |p s⟩ ↔ |s p⟩ between a control and the target.
pub fn u_ct(theta: f64, r: f64, c3: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::ZeroDistance);
    }
    Ok(c3 * angular_factor(theta) / (r * r * r))
}

/// vdW shift of |p p⟩ between two controls.
pub fn u_cc(distance: f64, c6: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::ZeroDistance);
    }
    Ok(c6 / distance.powi(6))
}

/// Signed pair strengths of one geometry. `u_cc` holds the upper triangle
/// in row-major order: (0,1), (0,2), …, (1,2), ….
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairInteractions {
    pub u_ct: Vec<f64>,
    pub u_cc: Vec<f64>,
    /// Polarizing angle of each control-target axis.
    pub theta_ct: Vec<f64>,
}

/// Position of pair (j, k), j < k, in the upper-triangle ordering.
pub fn pair_index(j: usize, k: usize, n: usize) -> usize {
    debug_assert!(j < k && k < n);
    j * (2 * n - j - 1) / 2 + (k - j - 1)
}

impl PairInteractions {
    pub fn from_geometry(g: &Geometry, sp: &SpeciesParams) -> Result<Self> {
        let n = g.n();
        let mut u_ct_v = Vec::with_capacity(n);
        let mut theta_ct = Vec::with_capacity(n);
        for c in &g.controls {
            let theta = polarizing_angle(c, &g.target)?;
            theta_ct.push(theta);
            u_ct_v.push(u_ct(theta, (c - g.target).norm(), sp.c3)?);
        }
        let mut u_cc_v = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for j in 0..n {
            for k in j + 1..n {
                u_cc_v.push(u_cc(g.control_distance(j, k), sp.c6)?);
            }
        }
        Ok(Self {
            u_ct: u_ct_v,
            u_cc: u_cc_v,
            theta_ct,
        })
    }

    pub fn n(&self) -> usize {
        self.u_ct.len()
    }

    pub fn cc(&self, j: usize, k: usize) -> f64 {
        let (a, b) = if j < k { (j, k) } else { (k, j) };
        self.u_cc[pair_index(a, b, self.n())]
    }

    /// Weakest control-target coupling magnitude.
    pub fn min_abs_ct(&self) -> f64 {
        self.u_ct.iter().fold(f64::INFINITY, |m, u| m.min(u.abs()))
    }

    /// Strongest control-control coupling magnitude (0 for n = 1).
    pub fn max_abs_cc(&self) -> f64 {
        self.u_cc.iter().fold(0.0, |m, u| m.max(u.abs()))
    }

    /// Per-pair asymmetry: for every control pair the weaker of the two
    /// control-target magnitudes over the pair's vdW magnitude; minimum over
    /// pairs. +∞ for a single control.
    pub fn chi_min(&self) -> f64 {
        let n = self.n();
        let mut chi = f64::INFINITY;
        for j in 0..n {
            for k in j + 1..n {
                let num = self.u_ct[j].abs().min(self.u_ct[k].abs());
                chi = chi.min(num / self.cc(j, k).abs());
            }
        }
        chi
    }

    /// D_n = Σ_j U_ct,j.
    pub fn d_sum(&self) -> f64 {
        self.u_ct.iter().sum()
    }

    /// B_n = Σ_{j>j′} U_cc.
    pub fn b_sum(&self) -> f64 {
        self.u_cc.iter().sum()
    }
}

/// Minimum pairwise asymmetry factor of a geometry. A lone control has no
/// control-control partner, so χ is undefined and `SingleControl` is
/// returned; [`PairInteractions::chi_min`] reports +∞ in that case instead.
pub fn chi_min(g: &Geometry, sp: &SpeciesParams) -> Result<f64> {
    if g.n() < 2 {
        return Err(Error::SingleControl);
    }
    Ok(PairInteractions::from_geometry(g, sp)?.chi_min())
}

/// Allocation-free χ for controls on a sphere around the origin; used in
/// the optimizer's inner loop.
pub fn chi_min_on_sphere(points: &[SphericalPoint], radius: f64, sp: &SpeciesParams) -> f64 {
    let n = points.len();
    let mut chi = f64::INFINITY;
    let ct_scale = (sp.c3 / radius.powi(3)).abs();
    let mut unit = [[0.0f64; 3]; 64];
    let mut uct = [0.0f64; 64];
    assert!(n <= 64, "at most 64 controls supported");
    for (i, p) in points.iter().enumerate() {
        let (st, ct) = p.theta.sin_cos();
        let (sphi, cphi) = p.phi.sin_cos();
        unit[i] = [st * cphi, st * sphi, ct];
        uct[i] = ct_scale * (1.0 - 3.0 * ct * ct).abs();
    }
    let c6 = sp.c6.abs();
    for j in 0..n {
        for k in j + 1..n {
            let d2 = radius
                * radius
                * ((unit[j][0] - unit[k][0]).powi(2)
                    + (unit[j][1] - unit[k][1]).powi(2)
                    + (unit[j][2] - unit[k][2]).powi(2));
            let ucc = c6 / (d2 * d2 * d2);
            chi = chi.min(uct[j].min(uct[k]) / ucc);
        }
    }
    chi
}

/// Collective interaction Hamiltonian of the n = 2 or n = 4 register in its
/// symmetric-state basis.
pub fn collective_matrix(n: usize, d: f64, b: f64) -> Result<DMatrix<f64>> {
    match n {
        2 => {
            let o = d / 2f64.sqrt();
            Ok(DMatrix::from_row_slice(2, 2, &[0.0, o, o, b]))
        }
        4 => {
            let o = 3f64.sqrt() / (2.0 * 2f64.sqrt()) * d;
            #[rustfmt::skip]
            let m = DMatrix::from_row_slice(4, 4, &[
                0.0, o,       0.0,     0.0,
                o,   b / 6.0, 0.0,     0.0,
                0.0, 0.0,     b / 2.0, d / 2.0,
                0.0, 0.0,     d / 2.0, b,
            ]);
            Ok(m)
        }
        other => Err(Error::UnsupportedN(other)),
    }
}

/// (E₋, E₊) for n = 2.
pub fn eigen_n2(d: f64, b: f64) -> (f64, f64) {
    let r = (b * b + 2.0 * d * d).sqrt();
    ((b - r) / 2.0, (b + r) / 2.0)
}

/// Closed-form n = 4 eigenenergies: ((E₁₋, E₁₊), (E₂₋, E₂₊)).
///
/// The (π₁, π₂) block has off-diagonal √6·D/4, giving a discriminant of
/// B² + 54D²; see [`eigen_n4_e2_alt`] for the 216D² variant.
pub fn eigen_n4(d: f64, b: f64) -> ((f64, f64), (f64, f64)) {
    let r1 = (b * b + 4.0 * d * d).sqrt();
    let r2 = (b * b + 54.0 * d * d).sqrt();
    (
        ((3.0 * b - r1) / 4.0, (3.0 * b + r1) / 4.0),
        ((b - r2) / 12.0, (b + r2) / 12.0),
    )
}

/// E₂,± with a 216D² discriminant. This corresponds to an off-diagonal
/// √(3/2)·D and does not diagonalize [`collective_matrix`]; kept for
/// comparison only.
pub fn eigen_n4_e2_alt(d: f64, b: f64) -> (f64, f64) {
    let r = (b * b + 216.0 * d * d).sqrt();
    ((b - r) / 12.0, (b + r) / 12.0)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// One point of the rigid-tetrahedron orientation scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TetraPoint {
    pub theta: f64,
    pub phi_prime: f64,
    /// E₂,₋ evaluated with D = Σ|U_ct| (the signed sum vanishes identically
    /// for every regular tetrahedron).
    pub e2_minus: f64,
    pub chi_min: f64,
}

/// Regular tetrahedron with one vertex at polar angle `theta` and the
/// opposite face rotated by `phi_prime`.
pub fn tetrahedron_scan(
    theta: f64,
    phi_prime: f64,
    radius: f64,
    sp: &SpeciesParams,
) -> Result<TetraPoint> {
    let g = tetrahedron(radius, theta, phi_prime);
    let pi = PairInteractions::from_geometry(&g, sp)?;
    let d: f64 = pi.u_ct.iter().map(|u| u.abs()).sum();
    let (_, (e2m, _)) = eigen_n4(d, pi.b_sum());
    Ok(TetraPoint {
        theta,
        phi_prime,
        e2_minus: e2m,
        chi_min: pi.chi_min(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{antipodal_pair, honeycomb_comparison, octahedron};
    use crate::physparams::{lookup_species, units, TWO_PI};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn ct_kernel_values() {
        let c3 = units::ghz(4.194);
        assert!(rel(u_ct(FRAC_PI_2, 5.0, c3).unwrap(), units::mhz(33.552)) < 1e-12);
        assert!(rel(u_ct(0.0, 5.0, c3).unwrap(), units::mhz(-67.104)) < 1e-12);
        let magic = (1.0 / 3f64.sqrt()).acos();
        assert!(u_ct(magic, 5.0, c3).unwrap().abs() < 1e-9);
        assert!(u_ct(0.0, 0.0, c3).is_err());
    }

    #[test]
    fn cc_kernel_values() {
        let c6 = units::ghz(-12.0);
        assert!(
            rel(
                u_cc(5.0 * 2f64.sqrt(), c6).unwrap().abs(),
                units::mhz(0.096)
            ) < 1e-12
        );
        assert!(rel(u_cc(10.0, c6).unwrap(), units::mhz(-0.012)) < 1e-12);
        let ratio = u_cc(3.0, c6).unwrap() / u_cc(6.0, c6).unwrap();
        assert!((ratio - 64.0).abs() < 1e-9);
        assert!(u_cc(0.0, c6).is_err());
    }

    #[test]
    fn antipodal_chi() {
        let sp = lookup_species(60).unwrap();
        let chi = chi_min(&antipodal_pair(5.0), &sp).unwrap();
        assert!(rel(chi, 67.104 / 0.012) < 1e-9);
    }

    #[test]
    fn octahedron_numbers() {
        let sp = lookup_species(60).unwrap();
        let pi = PairInteractions::from_geometry(&octahedron(5.0), &sp).unwrap();
        assert!(rel(units::to_mhz(pi.min_abs_ct()), 33.552) < 1e-9);
        assert!(rel(units::to_mhz(pi.max_abs_cc()), 0.096) < 1e-9);
        assert!((pi.chi_min() - 33.552 / 0.096).abs() < 1e-6);
    }

    #[test]
    fn honeycomb_is_inferior() {
        let sp = lookup_species(60).unwrap();
        let pi = PairInteractions::from_geometry(&honeycomb_comparison(5.0).unwrap(), &sp).unwrap();
        for u in &pi.u_ct {
            assert!(rel(units::to_mhz(*u), 33.552) < 1e-9);
        }
        assert!(rel(units::to_mhz(pi.max_abs_cc()), 0.768) < 1e-9);
        assert!((pi.chi_min() - 33.552 / 0.768).abs() < 1e-6);
        assert!(pi.chi_min() < 100.0);
    }

    #[test]
    fn single_control_chi() {
        let sp = lookup_species(60).unwrap();
        let g = Geometry::from_spherical(5.0, &[SphericalPoint::new(0.0, 0.0)]).unwrap();
        assert!(matches!(chi_min(&g, &sp), Err(Error::SingleControl)));
        assert_eq!(
            PairInteractions::from_geometry(&g, &sp).unwrap().chi_min(),
            f64::INFINITY
        );
    }

    #[test]
    fn sphere_shortcut_matches_geometry_path() {
        let sp = lookup_species(60).unwrap();
        let pts = [
            SphericalPoint::new(0.3, 0.1),
            SphericalPoint::new(1.9, 2.0),
            SphericalPoint::new(1.2, 4.4),
            SphericalPoint::new(2.8, 5.9),
        ];
        let a = chi_min_on_sphere(&pts, 5.0, &sp);
        let b = chi_min(&Geometry::from_spherical(5.0, &pts).unwrap(), &sp).unwrap();
        assert!(rel(a, b) < 1e-10);
    }

    #[test]
    fn pair_index_is_dense() {
        let n = 7;
        let mut seen = vec![false; n * (n - 1) / 2];
        for j in 0..n {
            for k in j + 1..n {
                seen[pair_index(j, k, n)] = true;
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn collective_small_cases() {
        let ev = sorted_eigenvalues(collective_matrix(2, 0.0, 3.0).unwrap());
        assert_eq!(ev, vec![0.0, 3.0]);
        assert!(collective_matrix(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn printed_216_form_does_not_diagonalize() {
        let (d, b) = (1.0, 0.3);
        let ev = sorted_eigenvalues(collective_matrix(4, d, b).unwrap());
        let (lo, _) = eigen_n4_e2_alt(d, b);
        assert!(ev.iter().all(|e| (e - lo).abs() > 1e-3));
    }

    #[test]
    fn tetrahedron_orientations() {
        let sp = lookup_species(60).unwrap();
        let th1 = (2f64 / 3.0).sqrt().acos();
        let th2 = (1f64 / 3.0).acos();
        let best = |theta: f64| {
            (0..720)
                .map(|k| {
                    tetrahedron_scan(theta, k as f64 * TWO_PI / 720.0, 5.0, &sp)
                        .unwrap()
                        .chi_min
                })
                .fold(0.0, f64::max)
        };
        assert!((best(th1) - 828.44).abs() < 0.5, "{}", best(th1));
        assert!((best(th2) - 552.30).abs() < 0.5, "{}", best(th2));
        let _ = PI;
    }

    proptest::proptest! {
        #[test]
        fn closed_forms_match_diagonalization(d in -1e3f64..1e3, b in -1e3f64..1e3) {
            let ev2 = sorted_eigenvalues(collective_matrix(2, d, b).unwrap());
            let (em, ep) = eigen_n2(d, b);
            let scale = d.abs().max(b.abs()).max(1.0);
            proptest::prop_assert!((ev2[0] - em).abs() / scale < 1e-12);
            proptest::prop_assert!((ev2[1] - ep).abs() / scale < 1e-12);
            let ev4 = sorted_eigenvalues(collective_matrix(4, d, b).unwrap());
            let ((a, bb), (c, e)) = eigen_n4(d, b);
            let mut cf = vec![a, bb, c, e];
            cf.sort_by(|x, y| x.total_cmp(y));
            for (x, y) in ev4.iter().zip(&cf) {
                proptest::prop_assert!((x - y).abs() / scale < 1e-12);
            }
        }

        #[test]
        fn chi_is_invariant_under_z_rotation(
            angles in proptest::collection::vec((0.0f64..PI, 0.0f64..TWO_PI), 2..8),
            rot in 0.0f64..TWO_PI,
        ) {
            let sp = lookup_species(60).unwrap();
            let pts: Vec<_> = angles.iter().map(|(t, p)| SphericalPoint::new(*t, *p)).collect();
            let g = match Geometry::from_spherical(5.0, &pts) { Ok(g) => g, Err(_) => return Ok(()) };
            let a = chi_min(&g, &sp).unwrap();
            let b = chi_min(&g.rotated_about_z(rot), &sp).unwrap();
            proptest::prop_assert!(rel(b, a) < 1e-8 || (a.is_infinite() && b.is_infinite()));
        }
    }
}
