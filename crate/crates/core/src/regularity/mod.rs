//! Quantitative regularity diagnostics for transport maps on the sphere:
//! ball-mass growth of the source, the Hölder exponents they buy, the
//! stay-away margin from the cut locus with its lower bound, the pairwise
//! distance inequality and mass bound behind it, and the Monge–Ampère
//! residual of a smooth potential.

mod growth;
mod monge_ampere;
mod stay_away;


pub use growth::{growth_condition, radius_grid, GrowthCondition, GrowthConditionReport, GrowthRow, SLOPE_LIMIT};
pub use monge_ampere::{
    ma_residual, ma_residual_in_frame, ma_self_consistency, pushforward_density, ChartPotential, MaResidual, PushforwardEstimate,
};
pub use stay_away::{
    density_floor, hemisphere_infimum, lemma_del_loep_check, mass_bound_check, observed_margin, sigma_for_mass, sigma_lower_bound,
    stay_away, Convention, DelLoepReport, MassBoundReport, StayAwayReport,
};

use crate::error::{Error, Result};

/// Ratio of consecutive radii in every radius grid.
pub const RADIUS_RATIO: f64 = 1.189_207_115_002_721; // 2^(1/4)

/// Hölder exponents `(α, β)` with `α = 1 − dim/p` and
/// `β = α/(4·dim − 2 + α)`. `p = ∞` is allowed and gives `α = 1`.
/// Callers pass the intrinsic dimension of the sphere.
pub fn holder_exponent(dim: usize, p: f64) -> Result<(f64, f64)> {
    if dim == 0 || p.is_nan() || p <= dim as f64 {
        return Err(Error::domain(alloc::format!("holder_exponent needs p > dim, got dim = {dim}, p = {p}")));
    }
    let alpha = 1.0 - dim as f64 / p;
    Ok((alpha, alpha / (4.0 * dim as f64 - 2.0 + alpha)))
}
