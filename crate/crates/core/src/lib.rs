//! Numerical core for nonlinear semidefinite nuclear-norm composite problems:
//!
//! ```text
//! minimize   f(x) + ||F(x)||_*
//! subject to h(x) = 0,  g(x) in S^p_+
//! ```
//!
//! The crate is `no_std` (it needs `alloc`). It provides spectral tools,
//! variational calculus of the PSD projection and of the nuclear norm, an
//! augmented Lagrangian solver with a semismooth Newton inner loop, and
//! diagnostics that check the assumptions behind its local convergence rate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

extern crate alloc;

pub mod alm;
pub mod diagnostics;
mod error;
pub mod nuclear;
pub mod problem;
pub mod psd_cone;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{BlockChoice, EigenDecomposition, SymMatrix};

pub use nalgebra::{DMatrix, DVector};
