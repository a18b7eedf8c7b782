//! Balanced independent sets and balanced colorings of k-uniform k-partite
//! hypergraphs.
//!
//! - [`hypergraph`]: the data model, degrees, codegrees, complements and
//!   induced subhypergraphs.
//! - [`sets`]: balanced sets, partial colorings and their validators.
//! - [`models`]: the `H(k, N, p)` sampler, degree trimming, and the union
//!   bound with its brute-force counterpart.
//! - [`indep`]: the randomized balanced independent set procedure and an
//!   exact `α_b` oracle.
//! - [`matching`]: perfect matchings in the k-partite complement and the
//!   colorings they induce.
//! - [`coloring`]: the two-stage balanced coloring.

pub mod coloring;
pub mod combinatorics;
pub mod error;
pub mod hypergraph;
pub mod indep;
pub mod io;
pub mod matching;
pub mod models;
pub mod rng;
pub mod sets;
pub mod stats;

pub use error::{Error, Result};
pub use hypergraph::{KPartiteHypergraph, RawHypergraph, Remap, Vertex, Violation};
pub use rng::Seed;
pub use sets::{BalancedSet, PartialColoring};
