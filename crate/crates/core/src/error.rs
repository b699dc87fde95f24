use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("equilibrium is not Lorenz-like: {0}")]
    NotLorenzLike(&'static str),
    #[error("step size underflow at t = {t}")]
    Stiffness { t: f64 },
    #[error("degenerate tangent splitting (transversality {transversality:e})")]
    Splitting { transversality: f64 },
    #[error("orbit hit the singular leaf x = 0")]
    SingularLeaf,
    #[error("value {value} outside the image of the requested branch")]
    Range { value: f64 },
    #[error("inducing scheme covers only {covered} of the base interval")]
    Coverage { covered: f64 },
    #[error("transfer operator is reducible")]
    NotMixing,
    #[error("argument outside domain: {0}")]
    Domain(&'static str),
    #[error("marked points do not share an unstable leaf")]
    NotSameLeaf,
    #[error("backward history is inconsistent with the base point at depth {depth}")]
    HistoryMismatch { depth: usize },
    #[error("backward history exhausted after {depth} steps before reaching tolerance")]
    HistoryExhausted { depth: usize },
    #[error("points lie in different product components")]
    NotSameComponent,
    #[error("insufficient sample: {0}")]
    InsufficientSample(&'static str),
    #[error("fewer than {needed} distinct values (found {found})")]
    InsufficientRange { needed: usize, found: usize },
    #[error("{empty} of {interior} interior bins are empty")]
    SparseData { empty: usize, interior: usize },
    #[error("iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("max lag {max_lag} exceeds a tenth of the series length {len}")]
    LagTooLarge { max_lag: usize, len: usize },
    #[error("Green-Kubo variance is degenerate but block sums are not")]
    Inconsistency,
    #[error("variance is zero")]
    DegenerateVariance,
    #[error("coboundary terms do not contract (ratio {ratio})")]
    NoContraction { ratio: f64 },
    #[error("orbit escaped the trapping region at t = {t}")]
    Escape { t: f64 },
}

impl Error {
    /// True for errors caused by too little or too sparse data rather than
    /// by a numerical breakdown.
    pub fn is_insufficient_data(&self) -> bool {
        matches!(
            self,
            Error::InsufficientSample(_)
                | Error::InsufficientRange { .. }
                | Error::SparseData { .. }
                | Error::LagTooLarge { .. }
                | Error::HistoryExhausted { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
