use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model file: {0}")]
    Schema(String),
    #[error("cannot parse {context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: hjfield_expr::ParseError,
    },
    #[error("lagrangian references undeclared symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate symbol `{0}`")]
    Duplicate(String),
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
    #[error("stratified Hessian: numeric rank varies across samples ({ranks:?})")]
    StratifiedHessian { ranks: Vec<usize> },
    #[error("momentum relation is not affine in the velocities: {expression}")]
    NonAffine { expression: String },
    #[error("regular sector is singular: {0}")]
    SingularSector(String),
    #[error("velocity Hessian is not invertible for {0}")]
    NotInvertible(String),
    #[error("hamiltonian {name} keeps velocity dependence: {expression}")]
    InconsistentDegeneracy { name: String, expression: String },
    #[error("model has no degenerate coordinates to promote")]
    NothingToPromote,
    #[error("base model is singular (rank {rank} of {n})")]
    SingularBase { rank: usize, n: usize },
    #[error("construction check failed: {0}")]
    Check(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Coarse failure classes, mapped to process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Unsupported,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Schema(_)
            | Error::Parse { .. }
            | Error::UnknownSymbol(_)
            | Error::Duplicate(_)
            | Error::InvalidName(_)
            | Error::Invalid(_) => ErrorClass::Validation,
            Error::StratifiedHessian { .. }
            | Error::NonAffine { .. }
            | Error::SingularSector(_)
            | Error::NotInvertible(_)
            | Error::InconsistentDegeneracy { .. }
            | Error::NothingToPromote
            | Error::SingularBase { .. } => ErrorClass::Unsupported,
            Error::Check(_) | Error::Numerical(_) => ErrorClass::Numerical,
        }
    }
}
