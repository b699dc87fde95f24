//! Time series along the flow and the statistics built on them: correlation
//! curves, Green–Kubo variance, block CLT, iterated-logarithm curves,
//! periodic-orbit obstructions and the coboundary series.

mod clt;
mod coboundary;
mod correlation;
mod green_kubo;
mod lil;
mod observables;
mod obstruction;
mod series;

pub use clt::{
    clt_from_series, clt_harness, gapped_block_sums, kolmogorov_survival, ks_p_value, ks_statistic,
    normal_cdf, CltReport, CLT_GAP, CLT_MAX_LAG, DEGENERATE_FRACTION, MIN_BLOCKS,
};
pub use coboundary::{
    coboundary_series, suspension_grid, time_one, v_hat_at, CoboundaryDecomposition, Y_REF,
};
pub use correlation::{
    correlation_curve, correlation_curve_with, CorrelationCurve, DirectSums, LagSums,
    CORRELATION_BATCHES,
};
pub use green_kubo::{
    block_sums, block_variance, green_kubo_sigma2, green_kubo_sigma2_with, sample_variance,
    VarianceEstimate, Window, GK_MIN_LAG,
};
pub use lil::{lil_diagnostic, LilCurve};
pub use observables::{
    bump, coboundary_chi, coboundary_value, default_bump, generic, Observable, ObservableFn,
};
pub use obstruction::{periodic_obstruction, MAX_ORBIT_RESIDUAL};
pub use series::{
    initial_state, sample_observable, sample_states, Backend, Provenance, TimeSeries, SAMPLE_TOL,
};
