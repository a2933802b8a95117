//! Numerical toolkit for generators of discrete translates in `L¹(ℝ)`.
//!
//! The crate covers the constructive side of the theory:
//!
//! * [`spectrum`]: discrete frequency sets `Λ` and their counting functions.
//! * [`density`]: substantial interval families and Beurling–Malliavin lower bounds.
//! * [`expfit`]: Sobolev-norm least squares by exponentials and spectral-radius scans.
//! * [`generator`]: the stage-by-stage construction of a `Λ`-generator.
//! * [`bernstein`]: generalized Bernstein classes and their uniqueness diagnostics.
//! * [`pairgen`]: the explicit pair of generators for perturbed integers.
//! * [`span`]: shared translate-approximation harness.
//!
//! # Fourier convention
//!
//! Unless a module says otherwise, `f̂(ζ) = ∫ f(t) e^{iζt} dt` and
//! `f(t) = (1/2π) ∫ f̂(ζ) e^{-iζt} dζ`. With this convention the translate
//! `f(t - λ)` has transform `e^{iλζ} f̂(ζ)`, so a combination of translates
//! `Σ c_λ f(t - λ)` corresponds to the trigonometric polynomial
//! `Σ c_λ e^{iλζ}` times `f̂`.

pub mod bernstein;
pub mod density;
mod error;
pub mod expfit;
pub mod generator;
pub mod io;
pub mod linalg;
pub mod numerics;
pub mod pairgen;
pub mod span;
pub mod spectrum;

pub use error::{Error, Result};

pub use num_complex::Complex64;
