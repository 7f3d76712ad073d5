//! Limsup ranks of trees, Cantor-Bendixson ranks of the closed sets they
//! code, and the wiggle construction whose derivation ranks follow them.
//!
//! Everything is exact: rationals are arbitrary precision and ordinals are
//! kept in Cantor normal form below ω^ω.

pub mod error;
pub mod ordinal;
pub mod rational;
pub mod treescheme;
pub mod closedset;
pub mod plfun;
pub mod denjoy;
pub mod acpack;

pub use error::{Error, Result};
pub use ordinal::Ordinal;
pub use plfun::{ClosedRationalSet, PLFunction, StepFunction};
pub use rational::Q;
pub use treescheme::{ExplicitTree, Node, TreeScheme};
