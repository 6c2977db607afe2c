//! The user guide, one chapter per module below.
//!
//! These are the same markdown files that `mdbook build book/` renders
//! (`book/src/*.md`), included here verbatim so that every code block in
//! the guide compiles and runs as a documentation test of this crate — the
//! guide and the library cannot drift apart.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/rotation-systems.md")]
pub mod rotation_systems {}

#[doc = include_str!("../../../book/src/flips.md")]
pub mod flips {}

#[doc = include_str!("../../../book/src/separating-triangles.md")]
pub mod separating_triangles {}

#[doc = include_str!("../../../book/src/four-connectivity.md")]
pub mod four_connectivity {}

#[doc = include_str!("../../../book/src/hamiltonian-cycles.md")]
pub mod hamiltonian_cycles {}

#[doc = include_str!("../../../book/src/canonical-form.md")]
pub mod canonical_form {}

#[doc = include_str!("../../../book/src/the-oracle.md")]
pub mod the_oracle {}

#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
