//! Pliable lasso for Cox proportional-hazards models.
//!
//! Sparse estimation of main effects and hierarchical interaction effects in
//! survival models: interactions between covariates `X` and modifiers `Z`
//! (fixed or time-varying) enter the model only for covariates with nonzero
//! main effects. Fitting is blockwise coordinate descent on a quadratic
//! working approximation of the penalized negative partial log-likelihood,
//! with a regularization path, cross-validation, a stacked logistic fast
//! path, and a simulation benchmark.

pub mod error;
pub mod linalg;
pub mod newton;
pub mod objective;
pub mod solver;
pub mod survival;

pub use error::{Error, Result};
pub use solver::{fit, PenaltyConfig, PliableModel};
pub use survival::{
    build_interactions, standardize, validate_and_index, InteractionDesign, RiskSetIndex,
    SurvivalDataset,
};
