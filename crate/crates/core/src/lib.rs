//! Exact iteration of linear set operations `X ↦ aX − bX` on eventually
//! periodic integer sets, with verifiers for the structure results on such
//! orbits and generators for the standard counterexamples.
//!
//! ```
//! use epiter::{grammar::parse_exact_set, linops::{apply_linear_op, LinearOp}};
//!
//! let x = parse_exact_set("AP+(1,3,1)").unwrap();
//! let y = apply_linear_op(LinearOp::new(3, 1).unwrap(), &x).unwrap();
//! assert_eq!(y.to_string(), "AP(2,3)");
//! ```

pub mod analysis;
pub mod arith;
pub mod bits;
pub mod constructions;
pub mod epset;
pub mod error;
pub mod grammar;
pub mod limits;
pub mod linops;
pub mod report;
pub mod residue;
pub mod stability;

pub use epset::{canonicalize, EPSet, Gap, RawEpSet, Rational};
pub use error::{Error, Result};
pub use linops::{LinearOp, OpSequence};
pub use residue::ResidueSet;
