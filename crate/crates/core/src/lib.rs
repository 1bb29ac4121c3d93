//! Flat recursive equation systems over finitary signatures and their
//! solutions in Elgot algebras.
//!
//! The crate is organised bottom-up:
//!
//! * [`system`] holds signatures, flat systems `X → HX + P`, parameter
//!   renaming (`h ▹ e`), simultaneous pairing (`f ⊞ e`), equation morphisms
//!   and flattening of arbitrary terms.
//! * [`rational`] represents rational Σ-trees as pointed finite coalgebras and
//!   provides bisimulation, minimisation, unfolding, substitution and the
//!   unique solutions in the free iterative algebra.
//! * [`algebra`] defines the [`algebra::ElgotAlgebra`] trait and the concrete
//!   solution operators (unary closed form, Kleene least solutions, Banach
//!   iteration, join of leaves, the extended algebra on `HA + Y`, and free
//!   rational trees).
//! * [`laws`] checks the solution square, functoriality, compositionality and
//!   solution preservation, with seeded random instance generators.
//! * [`em`] passes between Elgot algebras and Eilenberg–Moore algebras of the
//!   rational monad and checks the monad-algebra laws.
//! * [`format`] reads the line-based text formats for systems, trees and
//!   terms; [`load`] reads algebra files into a [`load::LoadedAlgebra`].

pub mod algebra;
pub mod em;
pub mod format;
pub mod laws;
pub mod load;
pub mod rational;
pub mod system;

pub use algebra::{ElemId, ElgotAlgebra, Solution};
pub use rational::{RationalTree, TreeTruncation};
pub use system::{FlatRhs, FlatSystem, Signature, Term, VarId};
