//! Edge flips on combinatorial triangulations of the sphere.
//!
//! A *triangulation* here is a maximal simple planar graph given as a rotation
//! system (the clockwise cyclic order of neighbours around every vertex)
//! together with a designated outer face. The crate implements:
//!
//! * the basic flip operation and a text format for triangulations
//!   ([`embedding`]),
//! * detection of separating triangles and their containment order
//!   ([`septri`]),
//! * an algorithm that makes any triangulation 4-connected with at most
//!   `⌊(3n − 9) / 5⌋` flips, plus a coin-ledger audit of that bound
//!   ([`four_connect`]),
//! * Hamiltonian-cycle machinery for 4-connected triangulations
//!   ([`hamiltonian`]),
//! * transformation into the canonical double-fan triangulation and flip
//!   distance composition ([`canonicalize`]),
//! * instance generators, including a family on which the 4-connectivity
//!   bound is tight ([`generators`]),
//! * brute-force oracles for small instances: class enumeration, exact flip
//!   distances and an exhaustive check of the structural lemmas the
//!   algorithms rely on ([`oracle`]).
//!
//! The command line interface lives in [`cli`] and is installed as the
//! `triflip` binary. A chaptered walkthrough of all of the above, rendered
//! from the `book/` sources and doc-tested against this crate, lives in
//! [`guide`].

pub mod embedding;
pub mod canonicalize;
pub mod cli;
pub mod four_connect;
pub mod generators;
pub mod guide;
pub mod hamiltonian;
pub mod oracle;
pub mod septri;

pub use embedding::{
    find_isomorphism, BuildError, CanonicalCode, Edge, FlipError, FlipRecord, FlipSequence,
    ParseError, ReplayError, Triangulation, VertexId,
};
