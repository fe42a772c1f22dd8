//! Atom placement: spherical control positions around a central target.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use nalgebra::{Rotation3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physparams::TWO_PI;

pub type Cartesian = Vector3<f64>;

/// Direction on the unit sphere, polar axis along ẑ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    /// Clamps θ into [0, π] and reduces φ into [0, 2π).
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut phi = phi.rem_euclid(TWO_PI);
        if phi >= TWO_PI {
            phi = 0.0;
        }
        Self {
            theta: theta.clamp(0.0, PI),
            phi,
        }
    }

    pub fn from_cartesian(v: &Cartesian) -> Self {
        let r = v.norm();
        let theta = if r > 0.0 {
            (v.z / r).clamp(-1.0, 1.0).acos()
        } else {
            0.0
        };
        Self::new(theta, v.y.atan2(v.x))
    }
}

pub fn to_cartesian(p: SphericalPoint, radius: f64) -> Cartesian {
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    Vector3::new(radius * st * cp, radius * st * sp, radius * ct)
}

/// Angle in [0, π] between the axis `a - b` and ẑ.
pub fn polarizing_angle(a: &Cartesian, b: &Cartesian) -> Result<f64> {
    let d = a - b;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::CoincidentAtoms);
    }
    Ok((d.z / r).clamp(-1.0, 1.0).acos())
}

/// Target plus `n` control atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    /// Nominal control-target distance R_ct, µm.
    pub radius: f64,
    pub controls: Vec<Cartesian>,
    pub target: Cartesian,
}

#[derive(Serialize, Deserialize)]
struct GeometryDoc {
    radius_um: f64,
    controls: Vec<[f64; 3]>,
    target: [f64; 3],
}

impl Geometry {
    pub fn new(radius: f64, controls: Vec<Cartesian>, target: Cartesian) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        if controls.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one control atom required".into(),
            ));
        }
        for (i, a) in controls.iter().enumerate() {
            if controls[..i].iter().any(|b| a == b) || *a == target {
                return Err(Error::CoincidentAtoms);
            }
        }
        Ok(Self {
            radius,
            controls,
            target,
        })
    }

    /// Controls on the sphere of `radius` around a target at the origin.
    pub fn from_spherical(radius: f64, points: &[SphericalPoint]) -> Result<Self> {
        let controls = points.iter().map(|p| to_cartesian(*p, radius)).collect();
        Self::new(radius, controls, Vector3::zeros())
    }

    pub fn n(&self) -> usize {
        self.controls.len()
    }

    /// Control directions as seen from the target.
    pub fn spherical_angles(&self) -> Vec<SphericalPoint> {
        self.controls
            .iter()
            .map(|c| SphericalPoint::from_cartesian(&(c - self.target)))
            .collect()
    }

    pub fn control_target_distance(&self, j: usize) -> f64 {
        (self.controls[j] - self.target).norm()
    }

    pub fn control_distance(&self, j: usize, k: usize) -> f64 {
        (self.controls[j] - self.controls[k]).norm()
    }

    /// Rigid rotation about ẑ through the target.
    pub fn rotated_about_z(&self, angle: f64) -> Self {
        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), angle);
        Self {
            radius: self.radius,
            controls: self
                .controls
                .iter()
                .map(|c| self.target + rot * (c - self.target))
                .collect(),
            target: self.target,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = GeometryDoc {
            radius_um: self.radius,
            controls: self.controls.iter().map(|c| [c.x, c.y, c.z]).collect(),
            target: [self.target.x, self.target.y, self.target.z],
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GeometryDoc = serde_json::from_str(text)?;
        Self::new(
            doc.radius_um,
            doc.controls.iter().map(|c| Vector3::from(*c)).collect(),
            Vector3::from(doc.target),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Planar (6+1) comparison lattice: six controls on a regular hexagon of
/// circumradius `radius` in the x-y plane, target at the centre.
pub fn honeycomb_comparison(radius: f64) -> Result<Geometry> {
    let points: Vec<_> = (0..6)
        .map(|k| SphericalPoint::new(FRAC_PI_2, k as f64 * PI / 3.0))
        .collect();
    Geometry::from_spherical(radius, &points)
}

/// Two antipodal controls on the polar axis.
pub fn antipodal_pair(radius: f64) -> Geometry {
    Geometry::from_spherical(
        radius,
        &[SphericalPoint::new(0.0, 0.0), SphericalPoint::new(PI, 0.0)],
    )
    .expect("valid pair")
}

/// Regular octahedron with vertices on the poles and on the equator at
/// φ = 0, π/2, π, 3π/2.
pub fn octahedron(radius: f64) -> Geometry {
    let mut pts: Vec<_> = (0..4)
        .map(|k| SphericalPoint::new(FRAC_PI_2, k as f64 * FRAC_PI_2))
        .collect();
    pts.push(SphericalPoint::new(0.0, 0.0));
    pts.push(SphericalPoint::new(PI, 0.0));
    Geometry::from_spherical(radius, &pts).expect("valid octahedron")
}

/// Regular tetrahedron inscribed in the sphere with one vertex at polar
/// angle `theta` (azimuth 0) and the opposite face rotated by `phi_prime`
/// about that vertex's axis.
pub fn tetrahedron(radius: f64, theta: f64, phi_prime: f64) -> Geometry {
    let apex = to_cartesian(SphericalPoint::new(theta, 0.0), 1.0);
    // e1 lies in the plane spanned by apex and ẑ, e2 = apex × e1.
    let e1 = Vector3::new(theta.cos(), 0.0, -theta.sin());
    let e2 = apex.cross(&e1);
    let (cb, sb) = (-1.0 / 3.0, (8.0f64 / 9.0).sqrt());
    let mut controls = vec![apex * radius];
    for k in 0..3 {
        let ang = phi_prime + k as f64 * TWO_PI / 3.0;
        let v = apex * cb + (e1 * ang.cos() + e2 * ang.sin()) * sb;
        controls.push(v * radius);
    }
    Geometry::new(radius, controls, Vector3::zeros()).expect("valid tetrahedron")
}

/// Gaussian position spread per axis, µm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionNoise {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_z: f64,
}

impl PositionNoise {
    pub fn new(sigma_x: f64, sigma_y: f64, sigma_z: f64) -> Result<Self> {
        if [sigma_x, sigma_y, sigma_z].iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidParameter(
                "position widths must be >= 0".into(),
            ));
        }
        Ok(Self {
            sigma_x,
            sigma_y,
            sigma_z,
        })
    }

    pub fn isotropic(sigma: f64) -> Result<Self> {
        Self::new(sigma, sigma, sigma)
    }

    fn scale(&self, z: [f64; 3]) -> Cartesian {
        Vector3::new(
            self.sigma_x * z[0],
            self.sigma_y * z[1],
            self.sigma_z * z[2],
        )
    }
}

/// Displaces every atom (controls, then the target) by independent Gaussian
/// draws per axis. Three standard normals are consumed per atom whatever the
/// widths, so scans over σ share their random stream.
pub fn sample_displaced<R: Rng + ?Sized>(
    g: &Geometry,
    noise: &PositionNoise,
    rng: &mut R,
) -> Geometry {
    let draw = |rng: &mut R| -> [f64; 3] {
        [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ]
    };
    let controls = g
        .controls
        .iter()
        .map(|c| c + noise.scale(draw(rng)))
        .collect();
    let target = g.target + noise.scale(draw(rng));
    Geometry {
        radius: g.radius,
        controls,
        target,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &Cartesian, b: &Cartesian) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn cartesian_poles_and_equator() {
        assert!(close(
            &to_cartesian(SphericalPoint::new(0.0, 1.234), 5.0),
            &Vector3::new(0.0, 0.0, 5.0)
        ));
        assert!(close(
            &to_cartesian(SphericalPoint::new(FRAC_PI_2, 0.0), 5.0),
            &Vector3::new(5.0, 0.0, 0.0)
        ));
        assert!(close(
            &to_cartesian(SphericalPoint::new(FRAC_PI_2, FRAC_PI_2), 5.0),
            &Vector3::new(0.0, 5.0, 0.0)
        ));
    }

    #[test]
    fn spherical_point_normalizes() {
        let p = SphericalPoint::new(4.0, -FRAC_PI_2);
        assert_eq!(p.theta, PI);
        assert!((p.phi - 1.5 * PI).abs() < 1e-15);
        assert!(SphericalPoint::new(0.1, TWO_PI).phi < TWO_PI);
    }

    #[test]
    fn polarizing_angle_examples() {
        let o = Vector3::zeros();
        assert_eq!(
            polarizing_angle(&Vector3::new(0.0, 0.0, 5.0), &o).unwrap(),
            0.0
        );
        assert!(
            (polarizing_angle(&Vector3::new(5.0, 0.0, 0.0), &o).unwrap() - FRAC_PI_2).abs() < 1e-15
        );
        let a = polarizing_angle(&Vector3::new(3.0, 0.0, 4.0), &o).unwrap();
        assert!((a - (0.8f64).acos()).abs() < 1e-15);
        assert!(matches!(
            polarizing_angle(&o, &o),
            Err(Error::CoincidentAtoms)
        ));
    }

    #[test]
    fn honeycomb_layout() {
        let g = honeycomb_comparison(5.0).unwrap();
        assert_eq!(g.n(), 6);
        let mut nearest = f64::INFINITY;
        for j in 0..6 {
            assert!((g.control_target_distance(j) - 5.0).abs() < 1e-9);
            assert!(
                (polarizing_angle(&g.controls[j], &g.target).unwrap() - FRAC_PI_2).abs() < 1e-12
            );
            for k in j + 1..6 {
                nearest = nearest.min(g.control_distance(j, k));
            }
        }
        assert!((nearest - 5.0).abs() < 1e-12);
    }

    #[test]
    fn spherical_geometry_keeps_radius() {
        let g = tetrahedron(5.0, 0.3, 1.1);
        for j in 0..4 {
            assert!((g.control_target_distance(j) - 5.0).abs() < 1e-9);
            for k in j + 1..4 {
                assert!((g.control_distance(j, k) - 5.0 * (8.0f64 / 3.0).sqrt()).abs() < 1e-9);
            }
        }
        let o = octahedron(5.0);
        for j in 0..6 {
            assert!((o.control_target_distance(j) - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn geometry_rejects_duplicates() {
        let p = Vector3::new(1.0, 0.0, 0.0);
        assert!(Geometry::new(1.0, vec![p, p], Vector3::zeros()).is_err());
        assert!(Geometry::new(1.0, vec![], Vector3::zeros()).is_err());
        assert!(Geometry::new(0.0, vec![p], Vector3::zeros()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = octahedron(5.0);
        let back = Geometry::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(g, back);
        let text = r#"{"radius_um": 5.0, "controls": [[0,0,5],[0,0,-5]], "target": [0,0,0]}"#;
        let parsed = Geometry::from_json(text).unwrap();
        let pair = antipodal_pair(5.0);
        assert!(parsed
            .controls
            .iter()
            .zip(&pair.controls)
            .all(|(a, b)| close(a, b)));
    }

    #[test]
    fn zero_width_noise_is_identity() {
        let g = octahedron(5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = sample_displaced(&g, &PositionNoise::isotropic(0.0).unwrap(), &mut rng);
        assert_eq!(d, g);
    }

    #[test]
    fn sampler_width_matches() {
        let g = antipodal_pair(5.0);
        let noise = PositionNoise::new(2.0, 0.27, 0.27).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 10_000;
        let mut acc = [[0.0f64; 2]; 3];
        for _ in 0..n {
            let d = sample_displaced(&g, &noise, &mut rng);
            let dt = d.target - g.target;
            for ax in 0..3 {
                acc[ax][0] += dt[ax];
                acc[ax][1] += dt[ax] * dt[ax];
            }
        }
        let want = [2.0, 0.27, 0.27];
        for ax in 0..3 {
            let mean = acc[ax][0] / n as f64;
            let std = (acc[ax][1] / n as f64 - mean * mean).sqrt();
            assert!(
                ((std - want[ax]) / want[ax]).abs() < 0.05,
                "axis {ax}: {std}"
            );
        }
    }

    #[test]
    fn sampler_is_seed_deterministic() {
        let g = octahedron(5.0);
        let noise = PositionNoise::isotropic(0.27).unwrap();
        let a = sample_displaced(&g, &noise, &mut ChaCha8Rng::seed_from_u64(3));
        let b = sample_displaced(&g, &noise, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    proptest::proptest! {
        #[test]
        fn polarizing_angles_are_supplementary(
            ax in -10.0f64..10.0, ay in -10.0f64..10.0, az in -10.0f64..10.0,
            bx in -10.0f64..10.0, by in -10.0f64..10.0, bz in -10.0f64..10.0,
        ) {
            let a = Vector3::new(ax, ay, az);
            let b = Vector3::new(bx, by, bz);
            proptest::prop_assume!((a - b).norm() > 1e-6);
            let s = polarizing_angle(&a, &b).unwrap() + polarizing_angle(&b, &a).unwrap();
            proptest::prop_assert!((s - PI).abs() < 1e-9);
        }
    }
}
