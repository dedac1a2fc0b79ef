//! Charts, tensor fields and the basic differential operations on them.

pub mod algebra;
mod chart;
mod field;
mod ops;
pub mod random;

pub use chart::ChartBox;
pub use field::{TensorField, Valence};
pub use ops::{
    change_chart, eval_jet2, exterior_d_jets, exterior_d_oneform, fd_gradient_discrepancy,
    lie_bracket, lie_bracket_jets, lie_derivative, lie_derivative_endo_jets,
    lie_derivative_form_jets, transform_components, ChartMap, MAX_CONDITION,
};
