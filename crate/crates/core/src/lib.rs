//! Exact computer algebra for current algebras `𝔤 ⊗ 𝒜` over almost-graded
//! function algebras (Laurent polynomials, a three-point genus-zero
//! algebra, a two-point torus algebra) and their central extensions by
//! geometric two-cocycles `α(x, y)·Σ res(f dg)`.
//!
//! ```
//! use kn_affine::current::{sl2_generator, Sl2Generator::{E, F}};
//! use kn_affine::kn::Family;
//!
//! let tp = Family::ThreePoint;
//! let b = sl2_generator(E, 1, tp).bracket(&sl2_generator(F, 1, tp)).unwrap();
//! assert_eq!(b.to_string(), "h(2) + a2*h(0)");
//! ```

pub mod central;
pub mod cli;
pub mod coefficients;
pub mod current;
pub mod error;
pub mod expr;
pub mod kn;
pub mod lie;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/coefficients.md")]
    mod coefficients {}
    #[doc = include_str!("../../../book/src/function-algebras.md")]
    mod function_algebras {}
    #[doc = include_str!("../../../book/src/lie-algebras.md")]
    mod lie_algebras {}
    #[doc = include_str!("../../../book/src/current-algebras.md")]
    mod current_algebras {}
    #[doc = include_str!("../../../book/src/central-extensions.md")]
    mod central_extensions {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
