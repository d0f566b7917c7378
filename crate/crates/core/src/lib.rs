//! Irreversible MCMC samplers built from jump and continuous Markov processes.
//!
//! The crate provides three families of machinery:
//!
//! * **Continuous dynamics** ([`dynamics`]): stochastic differential equations
//!   specified by a positive semidefinite diffusion matrix `D(z)`, a
//!   skew-symmetric circulation matrix `Q(z)` and the divergence correction
//!   `Γ(z)`, discretized with Euler–Maruyama, plus the leapfrog integrator.
//! * **Jump samplers** ([`jump`], [`mala`]): Metropolis–Hastings, the lifted
//!   irreversible jump sampler (I-Jump) with half-space Gaussian and
//!   directional gamma proposals, MALA, HMC, and the irreversible MALA
//!   (I-MALA) driven by forward/adjoint one-step SDE kernels.
//! * **Diagnostics and harness** ([`diagnostics`], [`harness`]):
//!   autocorrelation, Bartlett-window and multivariate-batch-mean effective
//!   sample sizes, histogram total-variation distance, mode escape times, and
//!   a preset-driven experiment runner with CSV trace output.
//!
//! ```
//! use imcmc::targets::TargetDensity;
//! use imcmc::jump::proposals::HalfSpaceGaussian;
//! use imcmc::sampler::{IJumpSampler, run_chain};
//!
//! let target = TargetDensity::std_normal(2).unwrap();
//! let proposal = HalfSpaceGaussian::new(1.0, 2).unwrap();
//! let mut sampler = IJumpSampler::new(target, Box::new(proposal), None).unwrap();
//! let trace = run_chain(&mut sampler, 2000, 200, 100, 7).unwrap();
//! assert_eq!(trace.len(), 1800);
//! ```

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod jump;
pub mod mala;
pub mod sampler;
pub mod targets;
pub mod trace;

pub use error::{Error, Result};

/// A point in the sampling space.
pub type Point = nalgebra::DVector<f64>;
/// A dense square matrix (D, Q, mass matrices and friends).
pub type Matrix = nalgebra::DMatrix<f64>;
