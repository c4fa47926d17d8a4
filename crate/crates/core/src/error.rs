use thiserror::Error;

use crate::lattice::SectorId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sector {0} is not part of the network")]
    UnknownSector(SectorId),

    #[error(
        "parameter t = {t} does not fit a lattice of radius {radius} (need radius >= {needed})"
    )]
    LatticeTooSmall { t: u32, radius: u32, needed: u32 },

    #[error("no interior cluster at radius {radius} for t = {t}")]
    NoInteriorCluster { t: u32, radius: u32 },

    #[error("cluster plan carries no message assignment")]
    AssignmentMissing,

    #[error("cluster has no message-carrying sectors")]
    EmptyCluster,

    #[error("constraint system is rank deficient (rank {rank} < {rows} rows)")]
    RankDeficient { rank: usize, rows: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operation expects a {expected} partition")]
    WrongPartition { expected: &'static str },

    #[error("empty point set")]
    EmptyInput,

    #[error("no perfect fast/slow packing exists for t = {t}")]
    NoPacking { t: u32 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
