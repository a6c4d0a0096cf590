//! Numerical laboratory for the generalized Ricci flow restricted to diagonal
//! invariant metrics.
//!
//! The flow `∂g/∂t = -2 Ric(g) + ½ H²_g` on the homogeneous spaces treated here
//! reduces to a low-dimensional ODE on the metric coefficients, because the
//! harmonic 3-form stays fixed along diagonal solutions. This crate provides
//!
//! * the scalar parameter model for the underlying spaces ([`space`]),
//! * the Ricci operator, the `H²` bilinear form and the flow vector field,
//!   both assembled from curvature blocks and in closed form ([`curvature`]),
//! * an adaptive embedded Runge-Kutta flow engine with convergence detection
//!   and phase-portrait sampling ([`flow`]),
//! * linear-stability spectra and the full Lyapunov verification machinery
//!   for the globally stable case ([`stability`]),
//! * the bi-invariant SO(n) case with nice-basis structure constants ([`son`]).
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion CLI
//! crate.

#![no_std]

extern crate alloc;

pub mod curvature;
pub mod eigen;
pub mod flow;
pub mod math;
pub mod son;
pub mod space;
pub mod stability;
