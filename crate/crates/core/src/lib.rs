//! Exact invariant theory of the non-abelian group `Z_p ⋊ Z_3`.
//!
//! The crate is organized bottom-up:
//!
//! * [`cyclo`] exact arithmetic in `Q(ζ_n)` plus a modular image map,
//! * [`group`] the group, its irreducible modules and the monomial action,
//! * [`zsum`] zero-sum sequences over `Z_p` and the additive bounds,
//! * [`invariants`] graded pieces of `I = F[V]^A` and `R = F[V]^G`,
//!   transfer maps, span expressions and rank certification,
//! * [`verify`] drivers that check degree-bound statements on windows,
//! * [`separating`] point actions, orbit tests and separating invariants.

pub mod cyclo;
pub mod error;
pub mod group;
pub mod invariants;
pub mod linalg;
pub mod modp;
pub mod report;
pub mod separating;
pub mod verify;
pub mod zsum;

pub use cyclo::CycNumber;
pub use error::{Error, Result};
pub use group::{GroupElement, GroupSpec, IrreducibleLabel, ModuleSpec, VariableTable};
pub use zsum::ZSequence;
