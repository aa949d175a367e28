//! Boolean-valued first-order semantics over finite complete Boolean
//! algebras, and the correspondence between names for points of a Polish
//! space and functions on the Stone space of the algebra.
//!
//! The crate is organized around a handful of small theories:
//!
//! - [`algebra`]: finite powerset algebras, their elements and ultrafilters;
//! - [`poset`]: finite posets, int-closure, regular-open completions;
//! - [`logic`]: first-order signatures, formulas, a text parser and printer;
//! - [`bvm`]: Boolean-valued structures, the semantics `⟦φ⟧`, quotients by
//!   ultrafilters, and the structure/morphism checkers;
//! - [`space`]: desk-scale Polish spaces with rational points, an enumerated
//!   ball basis, and finite-depth Borel codes;
//! - [`fspace`]: the function spaces `C(St(B), Y)` with lifted Borel
//!   predicates, mixing, and germ quotients;
//! - [`names`]: basis assignments (names for points of `Y`), the
//!   name/function round trips, and predicate preservation;
//! - [`sweeps`]: seeded generators and check harnesses used by the CLI and
//!   the acceptance suite.
//!
//! Everything is exact: truth values are atom sets, coordinates are
//! rationals, and all sweeps are deterministic given a seed.

pub mod algebra;
pub mod bvm;
pub mod fspace;
pub mod logic;
pub mod names;
pub mod poset;
pub mod report;
pub mod space;
pub mod sweeps;

pub use algebra::{AlgElement, AlgebraError, BooleanAlgebra, Mask, Ultrafilter};
pub use poset::{FinitePoset, PosetError};
