//! Lie and Strang product formulas combining the diffusion and potential factors.

mod scheme;
mod studies;

pub use scheme::{
    evolve, DiffusionBackend, EvolutionTrace, SplitScheme, SplitVariant, Splitter, TraceConfig, HYPOTHESIS_TOL,
};
pub use studies::{
    continuity_verdict, convergence_study, loglog_slope, semigroup_defect, strong_continuity_probe,
    ContinuityVerdict, ConvergenceRow, ConvergenceTable, OrderVerdict, EXACT_TOL, REFERENCE_FACTOR,
};
