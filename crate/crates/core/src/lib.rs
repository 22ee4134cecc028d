//! Certified lower bounds on the information complexity of two-party
//! function computation, computed through Wyner common information, together
//! with exact information costs of interactive protocols for matching upper
//! bounds.
//!
//! The pipeline: a finite joint distribution is lifted to the pair
//! `U = (X, Z)`, `V = (Y, Z)`; the bipartite characteristic graph of `(U, V)`
//! is decomposed into maximal-biclique classes; the supremum of
//! `H(U|Q) + H(V|Q)` over Markov auxiliaries `Q` is bracketed between a
//! certified per-edge relaxation and a feasible achievability search; and the
//! bracket turns into a lower bound on information complexity via
//! `IC >= H(X|Y) + H(Y|X) - sup`.  Interactive protocols are simulated by
//! exact transcript enumeration so their information cost `I(X;M|Y) + I(Y;M|X)`
//! gives the matching upper bound.

pub mod bounds;
pub mod cli;
pub mod eq;
pub mod error;
pub mod graph;
pub mod prob;
pub mod protocol;
pub mod wyner;

pub use error::{Error, Result};
pub use prob::{Alphabet, Bits, JointPMF};
