//! Computational toolkit for weighted composition operators W_{f,g}: h ↦ f·(h∘g)
//! acting on weighted Bergman spaces 𝓑_ℓ(𝔻^d) of the unit polydisk.
//!
//! The crate provides the pieces needed to *decide*, numerically but with
//! algebraic normal forms, whether a given symbol pair (f, g) induces a real
//! symmetric (self-adjoint with real matrix), unitary, or 𝒞_{p,q}-symmetric
//! operator:
//!
//! * [`series`] — dense truncated multivariate power series over ℂ;
//! * [`moebius`] — linear-fractional maps of the disk and the self-map test;
//! * [`bergman`] — monomial norms, reproducing kernels, and a quadrature
//!   oracle that is independent of the closed-form norms;
//! * [`symbols`] — weight/map symbol pairs and the structured families;
//! * [`conjugation`] — the weighted conjugations 𝒞_{p,q} built from disk
//!   reflections and rotations;
//! * [`engine`] — matrix sections, sampled pointwise defect functionals, and
//!   section-level diagnostics;
//! * [`classify`] — decision procedures returning certified verdicts with
//!   named condition residuals.
//!
//! Everything is deterministic: sampling is seeded, reductions happen in
//! index order, and parallel paths only map independent items.

pub mod bergman;
pub mod classify;
pub mod conjugation;
pub mod engine;
pub mod moebius;
pub mod series;
pub mod symbols;
