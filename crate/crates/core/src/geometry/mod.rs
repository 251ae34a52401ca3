//! Second-order geometry on space-time `ℝ × ℝ^m` in one global chart.
//!
//! Index 0 is always time. Diffusors and codiffusors pair through
//! `⟨λ, L⟩ = λ_α b^α + λ_{αβ} A^{αβ}`.

mod fields;
mod ops;
mod tensors;

pub use fields::{CompiledMap, Diffeomorphism, FiniteTransformation, ProjectableVectorField, VectorField};
pub use ops::{
    annihilator_test, apply_diffusor, canonical_annihilator_element, differential,
    diffusor_from_fields, in_annihilator, lie_derivative_codiffusor, lie_derivative_diffusor,
    lie_derivative_one_form, one_form_product, pair, pullback_codiffusor, pullback_diffusor,
    pullback_one_form, pushforward_codiffusor, pushforward_diffusor, pushforward_field,
    second_differential,
};
pub(crate) use tensors::check_coords;
pub use tensors::{Codiffusor, Diffusor, OneForm, SymMatrix};
