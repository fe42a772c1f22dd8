//! Physical constants and drive parameters.
//!
//! Internal units: lengths in µm, times in µs, ħ = 1. Coherent couplings and
//! Rabi frequencies are angular frequencies in rad/µs; decay rates are plain
//! rates in 1/µs. Tabulated values arrive as `X/2π` in MHz/GHz (couplings)
//! and kHz (decay rates) and are converted once, here.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Unit conversions between tabulated and internal quantities.
pub mod units {
    use super::TWO_PI;

    /// `x/2π` in MHz -> rad/µs.
    pub fn mhz(x: f64) -> f64 {
        TWO_PI * x
    }

    /// `x/2π` in GHz -> rad/µs (also used for GHz·µm^k coefficients).
    pub fn ghz(x: f64) -> f64 {
        TWO_PI * 1.0e3 * x
    }

    /// rad/µs -> `x/2π` in MHz.
    pub fn to_mhz(x: f64) -> f64 {
        x / TWO_PI
    }

    /// rad/µs -> `x/2π` in GHz.
    pub fn to_ghz(x: f64) -> f64 {
        x / (TWO_PI * 1.0e3)
    }

    /// Decay rate in kHz (10³ s⁻¹) -> 1/µs.
    pub fn khz_rate(x: f64) -> f64 {
        x * 1.0e-3
    }

    /// 1/µs -> kHz.
    pub fn to_khz_rate(x: f64) -> f64 {
        x * 1.0e3
    }
}

/// Per-principal-quantum-number constants of the Rydberg pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesParams {
    /// Principal quantum number of the p level.
    pub m: u32,
    /// vdW coefficient of |pp⟩, rad/µs·µm⁶ (signed).
    pub c6: f64,
    /// Resonant exchange coefficient, rad/µs·µm³.
    pub c3: f64,
    /// Decay rate of |s⟩, 1/µs.
    pub gamma_s: f64,
    /// Decay rate of |p⟩, 1/µs.
    pub gamma_p: f64,
}

impl SpeciesParams {
    /// Same species with both interaction coefficients multiplied by `factor`.
    pub fn with_scaled_coefficients(&self, factor: f64) -> Self {
        Self {
            c6: self.c6 * factor,
            c3: self.c3 * factor,
            ..*self
        }
    }

    /// Same species with Rydberg decay switched off.
    pub fn without_decay(&self) -> Self {
        Self {
            gamma_s: 0.0,
            gamma_p: 0.0,
            ..*self
        }
    }
}

/// The species table, keyed by `m`.
#[derive(Clone, Debug)]
pub struct SpeciesTable {
    rows: BTreeMap<u32, SpeciesParams>,
}

const BUILTIN_TABLE: &str = include_str!("../data/species.txt");

impl SpeciesTable {
    /// The bundled 77 K table (m = 45, 50, ..., 80).
    pub fn builtin() -> &'static SpeciesTable {
        static TABLE: OnceLock<SpeciesTable> = OnceLock::new();
        TABLE.get_or_init(|| SpeciesTable::parse(BUILTIN_TABLE).expect("bundled species table"))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses the key-value format: one row per line, `#` starts a comment,
    /// each row holds `m=`, `c6=`, `c3=`, `gamma_s=`, `gamma_p=` in tabulated
    /// units (GHz·µm⁶, GHz·µm³, kHz).
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::SpeciesTable {
                line: lineno + 1,
                msg,
            };
            let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
            for tok in line.split_whitespace() {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected key=value, got `{tok}`")))?;
                fields.insert(k, v);
            }
            let num = |key: &str| -> Result<f64> {
                let v = fields
                    .get(key)
                    .ok_or_else(|| err(format!("missing `{key}`")))?;
                v.parse::<f64>()
                    .map_err(|e| err(format!("bad value for `{key}`: {e}")))
            };
            let m: u32 = fields
                .get("m")
                .ok_or_else(|| err("missing `m`".into()))?
                .parse()
                .map_err(|e| err(format!("bad m: {e}")))?;
            let row = SpeciesParams {
                m,
                c6: units::ghz(num("c6")?),
                c3: units::ghz(num("c3")?),
                gamma_s: units::khz_rate(num("gamma_s")?),
                gamma_p: units::khz_rate(num("gamma_p")?),
            };
            if rows.insert(m, row).is_some() {
                return Err(err(format!("duplicate row for m={m}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn lookup(&self, m: u32) -> Result<SpeciesParams> {
        self.rows.get(&m).copied().ok_or(Error::UnknownSpecies(m))
    }

    pub fn principal_numbers(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SpeciesParams> {
        self.rows.values()
    }
}

/// Looks `m` up in the bundled table.
pub fn lookup_species(m: u32) -> Result<SpeciesParams> {
    SpeciesTable::builtin().lookup(m)
}

/// Rabi frequencies and gate duration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Target Rabi frequency Ω_t, rad/µs.
    pub omega_t: f64,
    /// Control Rabi frequency Ω_c, rad/µs.
    pub omega_c: f64,
    /// Gate duration 2π/Ω_c + 3π/Ω_t, µs.
    pub t_det: f64,
}

impl DriveParams {
    pub fn new(omega_t: f64, omega_c: f64) -> Self {
        Self {
            omega_t,
            omega_c,
            t_det: 2.0 * PI / omega_c + 3.0 * PI / omega_t,
        }
    }

    /// The dominant target-pulse part of the gate time, 3π/Ω_t.
    pub fn target_time(&self) -> f64 {
        3.0 * PI / self.omega_t
    }
}

/// Ω_t = u/20 and Ω_c = 5u for the weakest control-target coupling `u`.
pub fn derive_drive(u_ct_min: f64) -> Result<DriveParams> {
    if !(u_ct_min > 0.0) || !u_ct_min.is_finite() {
        return Err(Error::NonPositiveInteraction(u_ct_min));
    }
    Ok(DriveParams::new(u_ct_min / 20.0, 5.0 * u_ct_min))
}
