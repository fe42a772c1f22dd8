use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no tabulated species for principal quantum number m={0}")]
    UnknownSpecies(u32),
    #[error("species table parse error on line {line}: {msg}")]
    SpeciesTable { line: usize, msg: String },
    #[error("interaction strength must be positive, got {0}")]
    NonPositiveInteraction(f64),
    #[error("atoms coincide; internuclear axis undefined")]
    CoincidentAtoms,
    #[error("zero interatomic distance")]
    ZeroDistance,
    #[error("asymmetry factor needs at least two control atoms")]
    SingleControl,
    #[error("collective potential matrix only defined for n=2 or n=4, got n={0}")]
    UnsupportedN(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("jump probability {prob:.3e} per step exceeds 0.1; reduce dt (currently {dt:.3e} us)")]
    StepTooLarge { prob: f64, dt: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
