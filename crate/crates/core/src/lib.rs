//! Exact computations for deciding when a star is a Steiner minimal tree in a
//! finite-dimensional normed space.

pub mod error;
pub mod extremal;
pub mod geometry;
pub mod io;
pub mod l1l2;
mod linalg;
pub mod lp;
pub mod oracle;
pub mod parens;
pub mod rational;
pub mod signed_set;
pub mod verifier;
pub mod zspace;

pub use error::{Error, Result};
pub use rational::{q, Rational};
pub use signed_set::{boxdot, ExtendedFace, SignedSet};
