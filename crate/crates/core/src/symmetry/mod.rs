//! Infinitesimal symmetries of the martingale problem of a diffusor.
//!
//! A projectable field `X = τ(t) ∂_t + φ^i(t, x) ∂_i` is a symmetry of a standard
//! diffusor `L` when `𝓛_X L = μ L`; then `μ = −∂_t τ`.

mod determining;
mod flow;
mod kolmogorov;
mod linalg;
mod sde;
mod solve;

pub use determining::{check_symmetry, determining_residuals, SymmetryVerdict};
pub use flow::{flow, Flow};
pub use kolmogorov::{kolmogorov_check, KolmogorovSymmetryCandidate, KolmogorovVerdict};
pub use sde::{
    bridge_check, bridge_report, sde_determining_residuals, sde_to_diffusor, BridgeReport,
    SdeCoefficients, StochasticTransformation,
};
pub use solve::{find_symmetries, in_span, same_span, span_dimension, AnsatzBasis};
