//! Exact regularized integrals and ordered A-cycle integrals of elliptic,
//! quasi-elliptic and almost-elliptic functions on configuration spaces of
//! an elliptic curve.

pub mod coeff;
pub mod error;
pub mod expr;
pub mod laurent;
pub mod mpoly;
pub mod forests;
pub mod residue;
pub mod regint;
pub mod acycle;
pub mod qseries;
pub mod samples;
pub mod checks;
pub mod parse;
pub mod cli;

pub use acycle::{acycle_once, average_acycle, delta, delta_primitive, hollimit_via_forests, ordered_acycle};
pub use coeff::{CoeffMono, CoeffPoly, Rational};
pub use error::{Error, Result};
pub use expr::{expr_equal, recommended_order, Expr, Gen, Var, VarSet, Weight};
pub use forests::{enumerate_forests, forest_to_permutation, permutation_to_forest, tree_factorial, Forest};
pub use parse::{parse, parse_with_arity};
pub use regint::{
    elliptic_anomaly_check, hae_residual, reg_all, reg_default, reg_once, reg_via_chains, reg_via_forests, reg_via_hae,
};
pub use residue::{check_commutators, residue, s_op, total_s, CommutatorMode};
