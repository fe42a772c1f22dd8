//! Gate model: couplings, drive program, decay and per-shot perturbations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::interactions::PairInteractions;
use crate::physparams::{DriveParams, SpeciesParams};

use super::basis::{BasisState, MAX_CONTROLS};

pub type C64 = num_complex::Complex64;

/// How a tabulated Γ maps onto the jump operators |0⟩⟨k| and |1⟩⟨k|.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayConvention {
    /// Γ is the total rate out of the level; each branch carries Γ/2.
    #[default]
    TotalRate,
    /// Each branch carries Γ, so the level empties at 2Γ.
    BranchSum,
}

impl DecayConvention {
    /// Total leave rate per tabulated Γ.
    pub fn total_factor(self) -> f64 {
        match self {
            DecayConvention::TotalRate => 1.0,
            DecayConvention::BranchSum => 2.0,
        }
    }
}

/// One static realization of technical noise, held over the whole gate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriveNoise {
    /// Relative amplitude error of the control laser.
    pub amp_c: f64,
    /// Relative amplitude error of the target laser.
    pub amp_t: f64,
    /// Phase of the control laser, radians.
    pub phase_c: f64,
    /// Phase of the target laser, radians.
    pub phase_t: f64,
    /// Doppler detuning of each control's transition, rad/µs (empty = 0).
    pub detuning_c: Vec<f64>,
    /// Doppler detuning of the target transition, rad/µs.
    pub detuning_t: f64,
}

impl DriveNoise {
    pub fn is_zero(&self) -> bool {
        self.amp_c == 0.0
            && self.amp_t == 0.0
            && self.phase_c == 0.0
            && self.phase_t == 0.0
            && self.detuning_t == 0.0
            && self.detuning_c.iter().all(|d| *d == 0.0)
    }

    pub fn detuning_c(&self, j: usize) -> f64 {
        self.detuning_c.get(j).copied().unwrap_or(0.0)
    }
}

/// Off-resonant exchange from |p_j s_t⟩ / |s_j p_t⟩ into one pair-state
/// channel, with per-control coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtLeakage {
    pub coupling: Vec<f64>,
    pub delta: f64,
}

/// Off-resonant coupling of |p_j p_j′⟩ to |Pr⟩; replaces the vdW shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcLeakage {
    /// Per control pair, upper-triangle order.
    pub coupling: Vec<f64>,
    pub delta: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LeakageTerms {
    /// At most four channels.
    pub ct: Vec<CtLeakage>,
    pub cc: Option<CcLeakage>,
}

impl LeakageTerms {
    pub fn is_empty(&self) -> bool {
        self.ct.is_empty() && self.cc.is_none()
    }
}

/// Everything the trajectory engine needs about one gate instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateModel {
    pub n: usize,
    /// Signed control-target exchange strengths.
    pub u_ct: Vec<f64>,
    /// Signed control-control vdW shifts, upper-triangle order.
    pub u_cc: Vec<f64>,
    pub drive: DriveParams,
    pub gamma_s: f64,
    pub gamma_p: f64,
    pub decay: DecayConvention,
    pub noise: DriveNoise,
    pub leakage: LeakageTerms,
}

impl GateModel {
    pub fn new(pairs: &PairInteractions, sp: &SpeciesParams, drive: DriveParams) -> Result<Self> {
        let n = pairs.n();
        if n == 0 || n > MAX_CONTROLS {
            return Err(Error::UnsupportedN(n));
        }
        Ok(Self {
            n,
            u_ct: pairs.u_ct.clone(),
            u_cc: pairs.u_cc.clone(),
            drive,
            gamma_s: sp.gamma_s,
            gamma_p: sp.gamma_p,
            decay: DecayConvention::default(),
            noise: DriveNoise::default(),
            leakage: LeakageTerms::default(),
        })
    }

    /// Couplings from `g`, drive derived from its weakest control-target
    /// coupling.
    pub fn from_geometry(g: &Geometry, sp: &SpeciesParams) -> Result<Self> {
        let pairs = PairInteractions::from_geometry(g, sp)?;
        let drive = crate::physparams::derive_drive(pairs.min_abs_ct())?;
        Self::new(&pairs, sp, drive)
    }

    pub fn with_drive(mut self, drive: DriveParams) -> Self {
        self.drive = drive;
        self
    }

    pub fn without_decay(mut self) -> Self {
        self.gamma_s = 0.0;
        self.gamma_p = 0.0;
        self
    }

    pub fn cc(&self, j: usize, k: usize) -> f64 {
        let (a, b) = if j < k { (j, k) } else { (k, j) };
        self.u_cc[crate::interactions::pair_index(a, b, self.n)]
    }

    /// Total leave rate of level code `l` (0 for ground and leakage codes).
    pub fn rate(&self, l: u8) -> f64 {
        let f = self.decay.total_factor();
        match l {
            super::basis::P => f * self.gamma_p,
            super::basis::S => f * self.gamma_s,
            _ => 0.0,
        }
    }

    pub fn decay_free(&self) -> bool {
        self.gamma_p == 0.0 && self.gamma_s == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.u_ct.len() != self.n || self.u_cc.len() != self.n * (self.n - 1) / 2 {
            return Err(Error::InvalidParameter(
                "coupling lists do not match n".into(),
            ));
        }
        if self.leakage.ct.len() > 4 {
            return Err(Error::InvalidParameter(
                "at most four control-target leakage channels".into(),
            ));
        }
        if self.leakage.ct.iter().any(|c| c.coupling.len() != self.n) {
            return Err(Error::InvalidParameter(
                "leakage coupling list does not match n".into(),
            ));
        }
        if let Some(cc) = &self.leakage.cc {
            if cc.coupling.len() != self.u_cc.len() {
                return Err(Error::InvalidParameter(
                    "pair leakage list does not match n".into(),
                ));
            }
        }
        if !(self.drive.omega_t > 0.0 && self.drive.omega_c > 0.0) {
            return Err(Error::InvalidParameter(
                "Rabi frequencies must be positive".into(),
            ));
        }
        if !(self.gamma_s >= 0.0 && self.gamma_p >= 0.0) {
            return Err(Error::InvalidParameter("decay rates must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    S1,
    S2,
    S3,
    S4,
    S5,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::S1, Stage::S2, Stage::S3, Stage::S4, Stage::S5];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn drives_controls(self) -> bool {
        matches!(self, Stage::S1 | Stage::S5)
    }

    /// Lower level of the target transition driven in this stage.
    pub fn target_source(self) -> Option<u8> {
        match self {
            Stage::S2 | Stage::S4 => Some(super::basis::G1),
            Stage::S3 => Some(super::basis::G0),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseStage {
    pub stage: Stage,
    pub duration: f64,
    /// Complex Rabi amplitude; the coupling term is (Ω/2)|e⟩⟨g| + h.c.
    pub amplitude: C64,
}

/// The five sequential π pulses: controls |0⟩→|p⟩, target |1⟩→|s⟩,
/// |0⟩→|s⟩, |1⟩→|s⟩, controls back with the opposite sign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub stages: [PulseStage; 5],
}

impl PulseSchedule {
    /// Nominal durations π/Ω; amplitude and phase errors change only the
    /// amplitudes.
    pub fn new(drive: &DriveParams, noise: &DriveNoise) -> Self {
        let ctrl = C64::from_polar(drive.omega_c * (1.0 + noise.amp_c), noise.phase_c);
        let targ = C64::from_polar(drive.omega_t * (1.0 + noise.amp_t), noise.phase_t);
        let tc = PI / drive.omega_c;
        let tt = PI / drive.omega_t;
        let st = |stage, duration, amplitude| PulseStage {
            stage,
            duration,
            amplitude,
        };
        Self {
            stages: [
                st(Stage::S1, tc, ctrl),
                st(Stage::S2, tt, targ),
                st(Stage::S3, tt, targ),
                st(Stage::S4, tt, targ),
                st(Stage::S5, tc, -ctrl),
            ],
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.stages.iter().map(|s| s.duration).sum()
    }

    /// Start time of each stage.
    pub fn boundaries(&self) -> [f64; 6] {
        let mut b = [0.0; 6];
        for i in 0..5 {
            b[i + 1] = b[i] + self.stages[i].duration;
        }
        b
    }
}

/// C_nNOT truth table: the target flips iff every control is |1⟩.
pub fn ideal_output(input: usize, n: usize) -> Result<usize> {
    if n == 0 || n > MAX_CONTROLS {
        return Err(Error::UnsupportedN(n));
    }
    if input >= 1 << (n + 1) {
        return Err(Error::InvalidParameter(format!(
            "input {input} out of range for n={n}"
        )));
    }
    let controls_all_one = (input >> 1) == (1 << n) - 1;
    Ok(if controls_all_one { input ^ 1 } else { input })
}

pub(crate) fn ideal_state(input: usize, n: usize) -> Result<BasisState> {
    Ok(BasisState::computational(ideal_output(input, n)?, n))
}

/// Closed-form decay error of the pulse program:
/// (1/2ⁿ)πΓ_s/Ω_t + n·3πΓ_p/(2Ω_t) + n·πΓ_p/(2Ω_c).
pub fn decay_error_analytic(n: usize, drive: &DriveParams, gamma_s: f64, gamma_p: f64) -> f64 {
    let nf = n as f64;
    PI * gamma_s / (2f64.powi(n as i32) * drive.omega_t)
        + nf * 3.0 * PI * gamma_p / (2.0 * drive.omega_t)
        + nf * PI * gamma_p / (2.0 * drive.omega_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physparams::{derive_drive, lookup_species, units};

    #[test]
    fn truth_table() {
        assert_eq!(ideal_output(0b111, 2).unwrap(), 0b110);
        assert_eq!(ideal_output(0b110, 2).unwrap(), 0b111);
        assert_eq!(ideal_output(0b101, 2).unwrap(), 0b101);
        assert!(ideal_output(8, 2).is_err());
        for n in 1..6 {
            let mut seen = vec![false; 1 << (n + 1)];
            for i in 0..(1 << (n + 1)) {
                seen[ideal_output(i, n).unwrap()] = true;
            }
            assert!(seen.iter().all(|s| *s), "not a permutation for n={n}");
        }
    }

    #[test]
    fn schedule_matches_gate_time() {
        let d = derive_drive(units::mhz(33.552)).unwrap();
        let s = PulseSchedule::new(&d, &DriveNoise::default());
        assert!((s.total_duration() - d.t_det).abs() < 1e-15);
        assert_eq!(s.stages[4].amplitude, -s.stages[0].amplitude);
        let b = s.boundaries();
        assert!(b.windows(2).all(|w| w[1] > w[0]));
    }

    proptest::proptest! {
        #[test]
        fn schedule_spans_the_gate_time(u in 1.0f64..1e4, amp in -0.2f64..0.2, ph in -3.0f64..3.0) {
            let d = derive_drive(u).unwrap();
            let noise = DriveNoise { amp_c: amp, amp_t: -amp, phase_c: ph, phase_t: ph / 2.0, ..Default::default() };
            let s = PulseSchedule::new(&d, &noise);
            proptest::prop_assert!((s.total_duration() - d.t_det).abs() <= 1e-12 * d.t_det);
            proptest::prop_assert!(s.boundaries().windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn analytic_decay_error() {
        let sp = lookup_species(60).unwrap();
        let d = derive_drive(units::mhz(33.552)).unwrap();
        let e = decay_error_analytic(6, &d, sp.gamma_s, sp.gamma_p);
        assert!((e - 9.2e-3).abs() < 1e-4, "{e}");
        assert_eq!(decay_error_analytic(6, &d, 0.0, 0.0), 0.0);
        // Hand evaluation of the three terms for n = 2 and the pole pair.
        let d2 = derive_drive(units::mhz(67.104)).unwrap();
        let hand = PI * 0.005 / (4.0 * d2.omega_t)
            + 2.0 * 3.0 * PI * 0.0034 / (2.0 * d2.omega_t)
            + 2.0 * PI * 0.0034 / (2.0 * d2.omega_c);
        assert!((decay_error_analytic(2, &d2, sp.gamma_s, sp.gamma_p) - hand).abs() < 1e-15);
    }

    #[test]
    fn conventions() {
        assert_eq!(DecayConvention::TotalRate.total_factor(), 1.0);
        assert_eq!(DecayConvention::BranchSum.total_factor(), 2.0);
        assert_eq!(DecayConvention::default(), DecayConvention::TotalRate);
    }
}
