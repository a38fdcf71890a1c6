//! Spectra of long-range percolation graphs on lattice groups.
//!
//! The crate samples percolation configurations deterministically from a
//! seed, assembles restricted Laplacians over Folner boxes, counts their
//! eigenvalues, estimates the integrated density of states, and validates
//! the concentration bounds and frequency formulas that control the
//! approximation error.
//!
//! Monte Carlo trials, window batches and bisection shifts are data-parallel;
//! the `parallel` feature (on by default) backs them with rayon, and without
//! it everything degrades to sequential loops with identical output bytes.

pub mod concentration;
mod error;
pub mod estimator;
pub mod frequencies;
pub mod lattice;
pub mod par;
pub mod percolation;
pub mod spectral;

pub use error::{Error, Result};
