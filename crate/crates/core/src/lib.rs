//! Exact construction and verification of Azumaya lifts.
//!
//! Given a degree-8 central simple algebra of order 2 over a field K,
//! presented by slots `a1; (a2, x2); (a3, x3); d`, the [`lift`] module builds
//! an Azumaya algebra D′ over the truncated local ring T = K[ε]/(ε^N) whose
//! residue is the presented algebra, together with a certificate that can be
//! re-checked independently.
//!
//! Layering, bottom up: [`rational`] and [`field`] (exact scalars),
//! [`linalg`] (elimination over K), [`rings`] (the tower K ⊂ T ⊂ S),
//! [`symbols`] (quaternion symbol calculus over ℚ), [`algebra`]
//! (structure-constant algebras), [`lift`] (the lifting pipeline).

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod arith;
pub mod field;
pub mod lift;
pub mod linalg;
pub mod rational;
pub mod rings;
pub mod symbols;

pub use field::BaseField;
pub use rational::Q;
pub use rings::{Elem, Ring};

use rand_chacha::rand_core::SeedableRng;

/// The RNG behind every randomized search.
pub type SearchRng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SearchRng {
    SearchRng::seed_from_u64(seed)
}
