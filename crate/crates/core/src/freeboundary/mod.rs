//! Free-boundary diagnostics for computed minimizers.
//!
//! The discrete free boundary consists of the positive interior nodes with a
//! zero 4-neighbour. Everything here reads a field and never modifies it:
//! flux and `λ` statistics, density ratios, linear growth, the gradient bound
//! near the free boundary, blow-up rescalings and the half-disk analyses.

mod blowup;
mod extract;
mod growth;
mod halfplane;

pub use blowup::{blowup_rescale, fit_halfplane, BlowupSpec, HalfplaneFit};
pub use extract::{
    density_ratios, estimate_lambda, extract_free_boundary, DensityRow, DensityTable, FbNode,
    FreeBoundaryReport, SkippedRow,
};
pub use growth::{
    gradient_bound_fit, linear_growth_check, nondegeneracy_samples, GradientFit, LinearGrowth,
    NondegeneracyReport, NondegeneracySample,
};
pub use halfplane::{
    flatness_boundary_data, flatness_decay_check, halfplane_slope_profile, residual_at,
    FlatnessConfig, FlatnessResult, SlopeProfile,
};
