//! Exact software floating point over parametric formats `F(p, Emin, Emax)`,
//! with FastTwoSum, ExtractScalar, operand conditions for error-free
//! transformations, and an exhaustive sweep engine to check them.

pub mod algorithms;
pub mod conditions;
pub mod dyadic;
pub mod error;
pub mod format;
pub mod rounding;
pub mod verifier;

pub use algorithms::{extract_scalar, fast_two_sum, rounding_error, FtsTrace, ModeTriple, SplitTrace};
pub use conditions::{check, check_detailed, ConditionId, Guarantee};
pub use dyadic::{Dyadic, ExtDyadic};
pub use error::{Error, Result};
pub use format::{pred, succ, ufp, ulp, FormatConfig, Fp};
pub use rounding::{round, RoundingMode};
