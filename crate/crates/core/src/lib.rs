//! Three-term arithmetic progressions in `Z` and `Z/NZ`: exact counting,
//! extremal families, exhaustive extremal search, bounds on the limiting
//! density functions, and checks for the additive-energy inequalities.

pub mod analysis;
pub mod arith;
pub mod bounds;
pub mod canonical;
pub mod count;
pub mod error;
pub mod interchange;
pub mod construct;
pub mod search;
mod ntt;
pub mod rational;
pub mod sets;
pub mod suites;

pub use error::{Error, Result};
pub use sets::{AffineMap, AnySet, IntegerSet, MapContext, ResidueSet};
