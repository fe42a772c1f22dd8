//! Command-line front end: argument schema, config files and the command
//! implementations behind the `rydberg-toffoli` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dynamics::{decay_error_analytic, DecayConvention, GateModel, SimConfig, Simulator};
use crate::error::{Error, Result};
use crate::errormodels::{self, Axis, CurvePoint, ScanConfig, ScanMetric};
use crate::geometry::{self, Geometry};
use crate::interactions::PairInteractions;
use crate::optimizer::{find_n_max, optimize_ensemble, OptimizerConfig};
use crate::physparams::{derive_drive, lookup_species, units, DriveParams, SpeciesParams};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "RYDBERG_TOFFOLI_WORKERS";

#[derive(Parser, Debug, Clone, Serialize)]
#[command(
    name = "rydberg-toffoli",
    version,
    args_override_self = true,
    about = "Multiqubit Rydberg Toffoli gates: geometry, dynamics, error budgets"
)]
pub struct RunConfig {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = WORKERS_ENV, default_value_t = 0)]
    pub workers: usize,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
pub enum Command {
    /// Optimize control placements on the sphere.
    Optimize(OptimizeArgs),
    /// Sweep (radius, m) and report n_max and decay-limited fidelities.
    NmaxGrid(NmaxGridArgs),
    /// Trajectory simulation of the gate.
    Simulate(SimulateArgs),
    /// Infidelity curve under one noise family.
    NoiseScan(NoiseScanArgs),
    /// Pair-state leakage errors.
    Leakage(LeakageArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OptimizerArgs {
    /// Independent restarts.
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Chain iterations before the convergence test applies.
    #[arg(long, default_value_t = 100_000)]
    pub min_iterations: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iterations: usize,
    /// Polishing iterations after the chain.
    #[arg(long, default_value_t = 100_000)]
    pub refine_iterations: usize,
}

impl OptimizerArgs {
    fn config(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            ensemble_runs: self.runs,
            min_iterations: self.min_iterations,
            max_iterations: self.max_iterations,
            refine_iterations: self.refine_iterations,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OptimizeArgs {
    /// Number of control atoms.
    #[arg(long)]
    pub n: usize,
    /// Sphere radius R_ct, µm.
    #[arg(long, default_value_t = 5.0)]
    pub radius: f64,
    /// Principal quantum number.
    #[arg(long, default_value_t = 60)]
    pub m: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub opt: OptimizerArgs,
    /// Also write the best geometry as JSON here.
    #[arg(long)]
    pub geometry_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NmaxGridArgs {
    /// Radii, µm (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub radii: Vec<f64>,
    /// Principal quantum numbers (comma separated).
    #[arg(long = "ms", value_delimiter = ',', required = true)]
    pub ms: Vec<u32>,
    #[arg(long, default_value_t = 100.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub opt: OptimizerArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Preset {
    /// Two controls at the poles.
    Poles,
    /// Regular tetrahedron at θ = arccos√(2/3).
    Tetrahedron,
    /// Octahedron.
    Octahedron,
    /// Planar honeycomb around the target.
    Honeycomb,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GeometryArgs {
    /// Geometry JSON file.
    #[arg(long, conflicts_with = "preset")]
    pub geometry: Option<PathBuf>,
    /// Built-in geometry.
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Sphere radius for presets, µm.
    #[arg(long, default_value_t = 5.0)]
    pub radius: f64,
    /// Principal quantum number.
    #[arg(long, default_value_t = 60)]
    pub m: u32,
}

impl GeometryArgs {
    fn load(&self) -> Result<Geometry> {
        match (&self.geometry, self.preset) {
            (Some(p), _) => Geometry::load(p),
            (None, Some(Preset::Poles)) => Ok(geometry::antipodal_pair(self.radius)),
            (None, Some(Preset::Tetrahedron)) => Ok(geometry::tetrahedron(
                self.radius,
                (2.0f64 / 3.0).sqrt().acos(),
                0.0,
            )),
            (None, Some(Preset::Octahedron)) => Ok(geometry::octahedron(self.radius)),
            (None, Some(Preset::Honeycomb)) => geometry::honeycomb_comparison(self.radius),
            (None, None) => Err(Error::InvalidParameter(
                "give --geometry FILE or --preset NAME".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Convention {
    TotalRate,
    BranchSum,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DriveArgs {
    /// Override Ω_t/2π, MHz (default: min|U_ct|/20).
    #[arg(long)]
    pub omega_t_mhz: Option<f64>,
    /// Override Ω_c/2π, MHz (default: 5·min|U_ct|).
    #[arg(long)]
    pub omega_c_mhz: Option<f64>,
    /// Switch off Rydberg decay.
    #[arg(long)]
    pub no_decay: bool,
    #[arg(long, value_enum, default_value_t = Convention::TotalRate)]
    pub decay_convention: Convention,
}

impl DriveArgs {
    fn model(&self, g: &Geometry, sp: &SpeciesParams) -> Result<GateModel> {
        let pairs = PairInteractions::from_geometry(g, sp)?;
        let mut drive = derive_drive(pairs.min_abs_ct())?;
        if self.omega_t_mhz.is_some() || self.omega_c_mhz.is_some() {
            drive = DriveParams::new(
                self.omega_t_mhz.map_or(drive.omega_t, units::mhz),
                self.omega_c_mhz.map_or(drive.omega_c, units::mhz),
            );
        }
        let mut m = GateModel::new(&pairs, sp, drive)?;
        m.decay = match self.decay_convention {
            Convention::TotalRate => DecayConvention::TotalRate,
            Convention::BranchSum => DecayConvention::BranchSum,
        };
        Ok(if self.no_decay { m.without_decay() } else { m })
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub drive: DriveArgs,
    /// Trajectories per input.
    #[arg(long, default_value_t = 500)]
    pub traj: usize,
    /// Step cap, µs (default (2π/Ω_c)/200).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include the off-resonant pair-state channels.
    #[arg(long)]
    pub leakage: bool,
    /// Write every trajectory's outcome to this CSV.
    #[arg(long)]
    pub trajectories_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Family {
    Position,
    Amplitude,
    Phase,
    Doppler,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum AxisArg {
    X,
    Y,
    Z,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NoiseScanArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub drive: DriveArgs,
    /// Scan grid: σ (µm), δ_Ω, σ_φ (rad) or T (µK) by family.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    /// Single temperature, µK (Doppler shorthand for --values).
    #[arg(long)]
    pub temp: Option<f64>,
    /// Scattered axis for the position family.
    #[arg(long, value_enum, default_value_t = AxisArg::X)]
    pub axis: AxisArg,
    /// σ on the other two axes, µm.
    #[arg(long, default_value_t = 0.27)]
    pub fixed_sigma: f64,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Trajectories per sample when decay is included.
    #[arg(long, default_value_t = 20)]
    pub traj: usize,
    /// Run each sample with decay (trajectories) instead of coherently.
    #[arg(long)]
    pub include_decay: bool,
    /// Score: output populations, or phase-sensitive process fidelity
    /// against the unperturbed gate (coherent scans only).
    #[arg(long, value_enum, default_value_t = MetricArg::Population)]
    pub metric: MetricArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum MetricArg {
    Population,
    Process,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum LeakageMode {
    /// Control-target channel, population missing from |p 1⟩.
    Ct,
    /// Control-control channel, population missing from |0 0⟩.
    Cc,
    /// Full gate fidelity with channels.
    Gate,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LeakageArgs {
    #[arg(long, value_enum)]
    pub mode: LeakageMode,
    /// Channel index 1..4.
    #[arg(long, default_value_t = 1)]
    pub kappa: usize,
    /// Control-control distance, µm (cc mode).
    #[arg(long, default_value_t = 10.0)]
    pub dist: f64,
    /// Geometry (gate mode); `--radius` is also the ct distance.
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, default_value_t = 500)]
    pub traj: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Exit status of a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) | Error::StepTooLarge { .. } => 3,
        Error::Io(_) | Error::Csv(_) => 1,
        _ => 2,
    }
}

/// Machine-readable error kind.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::UnknownSpecies(_) => "unknown_species",
        Error::SpeciesTable { .. } => "species_table",
        Error::NonPositiveInteraction(_) => "non_positive_interaction",
        Error::CoincidentAtoms => "coincident_atoms",
        Error::ZeroDistance => "zero_distance",
        Error::SingleControl => "single_control",
        Error::UnsupportedN(_) => "unsupported_n",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::StepTooLarge { .. } => "step_too_large",
        Error::Numerical(_) => "numerical",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Csv(_) => "csv",
    }
}

/// Expand `--config FILE` into flags. The file holds `key = value` lines
/// (`#` comments) using the long flag names; `true` marks a bare switch,
/// `false` omits it. Flags given on the command line come later and win.
pub fn expand_config_file(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .ok_or_else(|| Error::InvalidParameter("--config needs a file".into()))?;
    let text = std::fs::read_to_string(path)?;
    let mut from_file = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("config line {}: expected key = value", i + 1))
        })?;
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        match v {
            "true" => from_file.push(format!("--{k}").into()),
            "false" => {}
            _ => {
                from_file.push(format!("--{k}").into());
                from_file.push(v.into());
            }
        }
    }
    let mut rest: Vec<OsString> = args[..pos].to_vec();
    let tail = &args[pos + 2..];
    // File values go right after the subcommand so that they parse as its
    // flags; explicit flags follow and override.
    let sub = tail
        .iter()
        .position(|a| !a.to_string_lossy().starts_with('-'));
    match sub {
        Some(s) => {
            rest.extend_from_slice(&tail[..=s]);
            rest.extend(from_file);
            rest.extend_from_slice(&tail[s + 1..]);
        }
        None => {
            rest.extend_from_slice(tail);
            rest.extend(from_file);
        }
    }
    Ok(rest)
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    result: T,
}

fn emit_json<T: Serialize>(cfg: &RunConfig, result: T) -> Result<()> {
    let text = serde_json::to_string_pretty(&Envelope {
        config: cfg,
        result,
    })?;
    write_out(cfg.out.as_deref(), &(text + "\n"))
}

/// CSV with the producing configuration as a leading `#` comment.
fn emit_csv<R: Serialize>(cfg: &RunConfig, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let text = format!("# config: {}\n{body}", serde_json::to_string(cfg)?);
    write_out(cfg.out.as_deref(), &text)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct OptimizeOutput {
    n: usize,
    radius_um: f64,
    m: u32,
    chi: f64,
    min_u_ct_mhz: f64,
    max_u_cc_mhz: f64,
    /// (θ, φ) per control, canonical frame.
    angles: Vec<(f64, f64)>,
    angle_means: Vec<(f64, f64)>,
    angle_spread: Vec<f64>,
    converged_runs: usize,
    runs: usize,
}

pub fn cmd_optimize(cfg: &RunConfig, a: &OptimizeArgs) -> Result<()> {
    let sp = lookup_species(a.m)?;
    let ens = optimize_ensemble(a.n, a.radius, &sp, &a.opt.config(a.seed))?;
    let g = ens.best.geometry();
    let pairs = PairInteractions::from_geometry(&g, &sp)?;
    if let Some(p) = &a.geometry_out {
        g.save(p)?;
    }
    emit_json(
        cfg,
        OptimizeOutput {
            n: a.n,
            radius_um: a.radius,
            m: a.m,
            chi: ens.best.chi,
            min_u_ct_mhz: units::to_mhz(pairs.min_abs_ct()),
            max_u_cc_mhz: units::to_mhz(pairs.max_abs_cc()),
            angles: ens.best.angles.iter().map(|p| (p.theta, p.phi)).collect(),
            angle_means: ens.angle_means.iter().map(|p| (p.theta, p.phi)).collect(),
            angle_spread: ens.angle_spread.clone(),
            converged_runs: ens.converged_runs,
            runs: ens.chis.len(),
        },
    )
}

#[derive(Serialize)]
struct GridRow {
    radius_um: f64,
    m: u32,
    n: usize,
    chi: f64,
    min_u_ct_mhz: f64,
    decay_error: f64,
    fidelity_estimate: f64,
    n_max: usize,
}

pub fn cmd_nmax_grid(cfg: &RunConfig, a: &NmaxGridArgs) -> Result<()> {
    if a.radii.is_empty() || a.ms.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let mut rows = Vec::new();
    for &r in &a.radii {
        for &m in &a.ms {
            let sp = lookup_species(m)?;
            let res = find_n_max(r, &sp, a.threshold, &a.opt.config(a.seed))?;
            for best in &res.per_n {
                let pairs = PairInteractions::from_geometry(&best.geometry(), &sp)?;
                let drive = derive_drive(pairs.min_abs_ct())?;
                let e = decay_error_analytic(best.n, &drive, sp.gamma_s, sp.gamma_p);
                rows.push(GridRow {
                    radius_um: r,
                    m,
                    n: best.n,
                    chi: best.chi,
                    min_u_ct_mhz: units::to_mhz(pairs.min_abs_ct()),
                    decay_error: e,
                    fidelity_estimate: 1.0 - e,
                    n_max: res.n_max,
                });
            }
        }
    }
    emit_csv(cfg, &rows)
}

#[derive(Serialize)]
struct TrajectoryRow {
    input: usize,
    trajectory: usize,
    fidelity: f64,
    jumps: usize,
    first_jump_time_us: Option<f64>,
}

#[derive(Serialize)]
struct SimulateOutput {
    n: usize,
    omega_t_mhz: f64,
    omega_c_mhz: f64,
    gate_time_us: f64,
    target_time_us: f64,
    decay_error_estimate: f64,
    report: crate::dynamics::FidelityReport,
    jump_trajectories: usize,
}

pub fn cmd_simulate(cfg: &RunConfig, a: &SimulateArgs) -> Result<()> {
    let sp = lookup_species(a.geometry.m)?;
    let g = a.geometry.load()?;
    let mut model = a.drive.model(&g, &sp)?;
    if a.leakage {
        model.leakage = errormodels::leakage_terms(&g, &[1, 2], Some(1))?;
    }
    let sim = Simulator::new(
        model.clone(),
        SimConfig {
            trajectories: a.traj,
            dt: a.dt,
            seed: a.seed,
            ..Default::default()
        },
    )?;
    let report = sim.run()?;
    if let Some(path) = &a.trajectories_csv {
        let mut w = csv::Writer::from_path(path)?;
        for input in 0..(1usize << (model.n + 1)) {
            for o in sim.run_input_trajectories(input)? {
                w.serialize(TrajectoryRow {
                    input: o.input,
                    trajectory: o.trajectory,
                    fidelity: o.fidelity,
                    jumps: o.jumps.len(),
                    first_jump_time_us: o.jumps.first().map(|j| j.time),
                })?;
            }
        }
        w.flush()?;
    }
    let d = model.drive;
    emit_json(
        cfg,
        SimulateOutput {
            n: model.n,
            omega_t_mhz: units::to_mhz(d.omega_t),
            omega_c_mhz: units::to_mhz(d.omega_c),
            gate_time_us: d.t_det,
            target_time_us: d.target_time(),
            decay_error_estimate: decay_error_analytic(model.n, &d, model.gamma_s, model.gamma_p),
            jump_trajectories: report.per_input.iter().map(|r| r.jump_trajectories).sum(),
            report,
        },
    )
}

pub fn cmd_noise_scan(cfg: &RunConfig, a: &NoiseScanArgs) -> Result<()> {
    let sp = lookup_species(a.geometry.m)?;
    let g = a.geometry.load()?;
    let mut values = a.values.clone();
    if let Some(t) = a.temp {
        values.push(t);
    }
    let scan = ScanConfig {
        samples: a.samples,
        seed: a.seed,
        include_decay: a.include_decay,
        metric: match a.metric {
            MetricArg::Population => ScanMetric::Population,
            MetricArg::Process => ScanMetric::Process,
        },
        sim: SimConfig {
            trajectories: a.traj,
            ..Default::default()
        },
    };
    let base = a.drive.model(&g, &sp)?;
    let curve: Vec<CurvePoint> = match a.family {
        Family::Position => {
            let axis = match a.axis {
                AxisArg::X => Axis::X,
                AxisArg::Y => Axis::Y,
                AxisArg::Z => Axis::Z,
            };
            errormodels::position_error_scan_with(
                &g,
                &sp,
                &base,
                axis,
                &values,
                a.fixed_sigma,
                &scan,
            )?
        }
        Family::Amplitude => errormodels::amplitude_noise_scan(&base, &values, &scan)?,
        Family::Phase => errormodels::phase_noise_scan(&base, &values, &scan)?,
        Family::Doppler => errormodels::doppler_scan(&base, &values, &scan)?,
    };
    emit_csv(cfg, &curve)
}

#[derive(Serialize)]
struct LeakageOutput {
    mode: LeakageMode,
    kappa: usize,
    pair_label: Option<&'static str>,
    distance_um: Option<f64>,
    error: Option<f64>,
    gate: Option<crate::dynamics::FidelityReport>,
}

pub fn cmd_leakage(cfg: &RunConfig, a: &LeakageArgs) -> Result<()> {
    let out = match a.mode {
        LeakageMode::Ct | LeakageMode::Cc => {
            // Drive of the polar pair at this radius, as for the gate.
            let r = a.geometry.radius;
            let b0 = (units::ghz(errormodels::C3_SP0_GHZ) / r.powi(3)).abs();
            let drive = derive_drive(b0)?;
            let (ch, d, err) = if a.mode == LeakageMode::Ct {
                let ch = errormodels::ct_channel(a.kappa)?;
                (
                    ch,
                    r,
                    errormodels::leakage_ct_rotation_error_with(Some(&ch), r, &drive)?,
                )
            } else {
                let ch = errormodels::cc_channel(a.kappa)?;
                (
                    ch,
                    a.dist,
                    errormodels::leakage_cc_error_with(&ch, a.dist, &drive)?,
                )
            };
            LeakageOutput {
                mode: a.mode,
                kappa: a.kappa,
                pair_label: Some(ch.pair_label),
                distance_um: Some(d),
                error: Some(err),
                gate: None,
            }
        }
        LeakageMode::Gate => {
            let ga = &a.geometry;
            let sp = lookup_species(ga.m)?;
            let g = ga.load()?;
            let drive = derive_drive(PairInteractions::from_geometry(&g, &sp)?.min_abs_ct())?;
            let sim = SimConfig {
                trajectories: a.traj,
                seed: a.seed,
                ..Default::default()
            };
            LeakageOutput {
                mode: a.mode,
                kappa: a.kappa,
                pair_label: None,
                distance_um: None,
                error: None,
                gate: Some(errormodels::gate_fidelity_with_leakage(
                    &g, &sp, &drive, &sim,
                )?),
            }
        }
    };
    emit_json(cfg, out)
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    if cfg.workers > 0 {
        // Fails only if a pool already exists, which then stays in use.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global();
    }
    match &cfg.command {
        Command::Optimize(a) => cmd_optimize(cfg, a),
        Command::NmaxGrid(a) => cmd_nmax_grid(cfg, a),
        Command::Simulate(a) => cmd_simulate(cfg, a),
        Command::NoiseScan(a) => cmd_noise_scan(cfg, a),
        Command::Leakage(a) => cmd_leakage(cfg, a),
    }
}

/// Parse, run, and map the outcome to an exit status (0 ok, 2 usage,
/// 3 numerical failure).
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let report = |e: &Error| {
        let msg = serde_json::json!({ "error": error_kind(e), "message": e.to_string() });
        eprintln!("{msg}");
        exit_code(e)
    };
    let args = match expand_config_file(args) {
        Ok(a) => a,
        Err(e) => return report(&e),
    };
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cfg) {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<OsString> {
        s.split_whitespace().map(OsString::from).collect()
    }

    #[test]
    fn missing_n_is_a_usage_error() {
        assert_eq!(
            main_with_args(args("rydberg-toffoli optimize --radius 5")),
            2
        );
        assert_eq!(main_with_args(args("rydberg-toffoli frobnicate")), 2);
    }

    #[test]
    fn config_file_values_are_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "# optimizer\nn = 4\nradius = 6\nseed = 3\n").unwrap();
        let a = expand_config_file(args(&format!(
            "prog --config {} optimize --seed 9",
            p.display()
        )))
        .unwrap();
        let cfg = RunConfig::try_parse_from(a).unwrap();
        let Command::Optimize(o) = cfg.command else {
            panic!()
        };
        assert_eq!((o.n, o.radius, o.seed), (4, 6.0, 9));
    }

    #[test]
    fn switches_in_config_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.cfg");
        std::fs::write(&p, "preset = poles\nno_decay = true\nleakage = false\n").unwrap();
        let a =
            expand_config_file(args(&format!("prog --config {} simulate", p.display()))).unwrap();
        let Command::Simulate(s) = RunConfig::try_parse_from(a).unwrap().command else {
            panic!()
        };
        assert!(s.drive.no_decay && !s.leakage);
        assert_eq!(s.geometry.preset, Some(Preset::Poles));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let cfg = RunConfig::try_parse_from(args("prog nmax-grid --radii 5 --ms 60")).unwrap();
        let Command::NmaxGrid(mut g) = cfg.command.clone() else {
            panic!()
        };
        g.radii.clear();
        assert!(matches!(
            cmd_nmax_grid(&cfg, &g),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Numerical("x".into())), 3);
        assert_eq!(exit_code(&Error::StepTooLarge { prob: 0.2, dt: 1.0 }), 3);
        assert_eq!(exit_code(&Error::InvalidParameter("x".into())), 2);
    }

    #[test]
    fn leakage_cc_writes_json() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("l.json");
        let code = main_with_args(args(&format!(
            "prog leakage --mode cc --kappa 1 --dist 5 --out {}",
            out.display()
        )));
        assert_eq!(code, 0);
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
        let e = v["result"]["error"].as_f64().unwrap();
        assert!(e > 0.01 && e < 0.1, "{e}");
        assert_eq!(v["config"]["command"]["Leakage"]["dist"], 5.0);
    }
}
