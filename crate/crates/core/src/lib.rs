//! Effective Hamiltonians of finite-dimensional Hermitian systems, by Givens
//! iteration (NPAD) and recursive Schrieffer-Wolff transformations (RSWT), in
//! numeric and parametric form.

pub mod apps;
pub mod cqed;
pub mod error;
pub mod expr;
pub mod givens;
pub mod linalg;
pub mod npad;
pub mod rswt;
pub mod scalar;

pub use error::{Error, Result};
pub use expr::{Expr, ParamEnv};
pub use linalg::{HermitianMatrix, Matrix};
pub use scalar::{DoubleDouble, NumericScalar, Scalar, C64};
