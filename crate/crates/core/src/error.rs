use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("momentum grid needs at least one point")]
    EmptyGrid,

    #[error("finite chain needs an even, positive number of sites, got {0}")]
    OddSiteCount(usize),

    #[error("exact diagonalization supports even N in 2..=12, got {0}")]
    SiteCountOutOfRange(usize),

    #[error("threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),

    #[error("step must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("scan range is empty")]
    EmptyScan,

    #[error("sample times must be finite and strictly increasing")]
    BadTimes,

    #[error("protocol has no second quench")]
    NotCyclic,

    #[error("dwell time must be finite and non-negative, got {0}")]
    NegativeDwell(f64),

    #[error("time {t} precedes the second quench at T = {dwell}")]
    BeforeSecondQuench { t: f64, dwell: f64 },

    #[error("averaging window is invalid: {0}")]
    InvalidWindow(&'static str),

    #[error("occupation profile is not normalized: Σ C(N,n) p_n = {0}")]
    BadNormalization(f64),

    #[error("state dimension {found} does not match Hilbert space dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}
