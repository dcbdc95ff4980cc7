//! Global solvability analysis for operators `P = D_t + c(t, D_x)` on the
//! torus `S¹ × Tᴺ`, where `c` is a tube-type symbol (its discrete symbol
//! depends on `t` and the spatial frequency `ξ` only).
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; file formats, configuration and the command line
//! live in the companion `torsolv` crate.
//!
//! Layout:
//! - [`spectral`]: circle grids, frequency boxes, partial-Fourier fields,
//!   DFT analysis/synthesis, spectral primitives and decay fits.
//! - [`symbol`]: symbol specifications and per-frequency [`symbol::ModeProfile`]s.
//! - [`conditions`]: diophantine margins, the minimal oscillation constants
//!   for the forward/backward and resonant window conditions, and the verdict.
//! - [`homogeneous`]: sign-change and sublevel-connectedness checks for
//!   positively homogeneous symbols.
//! - [`solver`]: per-mode solution formulas, closure-of-range test and the
//!   global solve.
//! - [`counterexample`]: right-hand sides that witness non-solvability.
#![no_std]

extern crate alloc;
#[cfg(feature = "parallel")]
extern crate std;

pub mod conditions;
pub mod counterexample;
pub mod error;
pub mod homogeneous;
pub mod logcomplex;
mod math;
mod par;
pub mod solver;
pub mod spectral;
pub mod symbol;
pub mod trig;
pub mod window;

pub use error::{Error, Result};
pub use num_complex::Complex64;
