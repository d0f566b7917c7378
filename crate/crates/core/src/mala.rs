//! Gradient-based proposal samplers: MALA, HMC, and the irreversible MALA
//! (I-MALA) that runs one-step SDE kernels inside the lifted jump scheme.
//!
//! The forward kernel is `P(z|y;ε) = N(z; μ(y,ε), 2εD(y))` with
//! `μ(y,ε) = y + ε[−(D+Q)∇H + Γ]`; the adjoint kernel flips `Q` and uses
//! `Γ̃`. When the dynamics are simulated exactly the pair accepts with
//! probability one; the accept/reject step only corrects discretization error.

use crate::dynamics::{check_divergence_finite, standard_normal_vector, DynamicsSpec};
use crate::error::{Error, Result};
use crate::targets::TargetDensity;
use crate::{Matrix, Point};
use rand::{Rng, RngCore};

/// Which of the two SDE directions a kernel integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelDirection {
    /// `+Q`, divergence Γ.
    Forward,
    /// `−Q`, divergence Γ̃.
    Adjoint,
}

/// One-step Euler–Maruyama transition kernel of the forward or adjoint SDE.
#[derive(Clone)]
pub struct OneStepKernel {
    dynamics: DynamicsSpec,
    direction: KernelDirection,
}

impl OneStepKernel {
    pub fn new(dynamics: DynamicsSpec, direction: KernelDirection) -> Self {
        OneStepKernel { dynamics, direction }
    }

    pub fn direction(&self) -> KernelDirection {
        self.direction
    }

    /// Kernel mean `μ(y, ε)` (forward) or `μ†(y, ε)` (adjoint).
    pub fn mean(&self, y: &Point, target: &TargetDensity, epsilon: f64) -> Result<Point> {
        let grad = target.gradient(y);
        let d = self.dynamics.d(y);
        let q = self.dynamics.q(y);
        let (drift_matrix, gamma) = match self.direction {
            KernelDirection::Forward => (d + q, self.dynamics.gamma_forward(y)),
            KernelDirection::Adjoint => (d - q, self.dynamics.gamma_adjoint(y)),
        };
        check_divergence_finite(&gamma)?;
        Ok(y + (gamma - drift_matrix * grad) * epsilon)
    }

    /// Draws `z ~ N(μ(y,ε), 2εD(y))`.
    pub fn sample(
        &self,
        y: &Point,
        target: &TargetDensity,
        epsilon: f64,
        rng: &mut dyn RngCore,
    ) -> Result<Point> {
        let mean = self.mean(y, target, epsilon)?;
        let factor = self.require_factor(y)?;
        let xi = standard_normal_vector(y.len(), rng);
        Ok(mean + factor * xi * (2.0 * epsilon).sqrt())
    }

    /// `log N(z; μ(y,ε), 2εD(y))`, with `D` evaluated at the conditioning
    /// point `y`.
    pub fn log_density(
        &self,
        z: &Point,
        y: &Point,
        target: &TargetDensity,
        epsilon: f64,
    ) -> Result<f64> {
        let mean = self.mean(y, target, epsilon)?;
        let factor = self.require_factor(y)?;
        let dim = y.len() as f64;
        let resid = z - mean;
        let w = factor
            .solve_lower_triangular(&resid)
            .ok_or_else(|| Error::Numeric("singular Cholesky factor in kernel density".into()))?;
        let log_det_d: f64 = (0..y.len()).map(|i| factor[(i, i)].ln()).sum();
        Ok(-0.5 * dim * (2.0 * std::f64::consts::PI).ln()
            - 0.5 * dim * (2.0 * epsilon).ln()
            - log_det_d
            - w.norm_squared() / (4.0 * epsilon))
    }

    fn require_factor(&self, y: &Point) -> Result<Matrix> {
        self.dynamics.diffusion_factor(y)?.ok_or_else(|| {
            Error::Numeric("one-step kernel needs positive-definite D; got D = 0".into())
        })
    }
}

/// Outcome of a MALA / I-MALA / HMC step.
#[derive(Debug, Clone)]
pub struct GradientStepOutcome {
    pub state: Point,
    pub potential: f64,
    pub accepted: bool,
    pub alpha: f64,
}

/// One Metropolis-adjusted Langevin step. Requires reversible dynamics
/// (`Q ≡ 0`); use [`imala_step`] otherwise.
pub fn mala_step(
    y: &Point,
    target: &TargetDensity,
    dynamics: &DynamicsSpec,
    epsilon: f64,
    rng: &mut dyn RngCore,
) -> Result<GradientStepOutcome> {
    let h_y = target.potential(y);
    if !h_y.is_finite() {
        return Err(Error::Init(format!("mala_step: H not finite at the current state ({h_y})")));
    }
    mala_step_with(y, h_y, target, dynamics, epsilon, rng)
}

/// [`mala_step`] with the current potential already known.
pub fn mala_step_with(
    y: &Point,
    h_y: f64,
    target: &TargetDensity,
    dynamics: &DynamicsSpec,
    epsilon: f64,
    rng: &mut dyn RngCore,
) -> Result<GradientStepOutcome> {
    if !dynamics.has_zero_q(y) {
        return Err(Error::invalid(
            "mala_step requires Q ≡ 0; use imala_step for irreversible dynamics",
        ));
    }
    let kernel = OneStepKernel::new(dynamics.clone(), KernelDirection::Forward);
    let candidate = kernel.sample(y, target, epsilon, rng)?;
    let h_z = target.potential(&candidate);
    let log_q_fwd = kernel.log_density(&candidate, y, target, epsilon)?;
    let log_q_rev = kernel.log_density(y, &candidate, target, epsilon)?;
    let alpha = ((h_y - h_z) + (log_q_rev - log_q_fwd)).exp().min(1.0);
    let u: f64 = rng.random();
    if u < alpha {
        Ok(GradientStepOutcome {
            state: candidate,
            potential: h_z,
            accepted: true,
            alpha,
        })
    } else {
        Ok(GradientStepOutcome {
            state: y.clone(),
            potential: h_y,
            accepted: false,
            alpha,
        })
    }
}

/// Outcome of one I-MALA step.
#[derive(Debug, Clone)]
pub struct ImalaOutcome {
    pub state: Point,
    pub direction: i8,
    pub potential: f64,
    pub accepted: bool,
    pub flipped: bool,
    pub alpha: f64,
}

/// One irreversible MALA step on the lifted state `(z, z^p)` with binary
/// direction `z^p ∈ {−1, +1}`.
///
/// With `z^p > 0` the proposal comes from the forward kernel and the
/// acceptance ratio pairs it against the adjoint density of the reverse move;
/// with `z^p < 0` the roles swap. Rejection negates `z^p`.
pub fn imala_step(
    y: &Point,
    direction: i8,
    target: &TargetDensity,
    dynamics: &DynamicsSpec,
    epsilon: f64,
    rng: &mut dyn RngCore,
) -> Result<ImalaOutcome> {
    let h_y = target.potential(y);
    if !h_y.is_finite() {
        return Err(Error::Init(format!("imala_step: H not finite at the current state ({h_y})")));
    }
    imala_step_with(y, direction, h_y, target, dynamics, epsilon, rng)
}

/// [`imala_step`] with the current potential already known.
pub fn imala_step_with(
    y: &Point,
    direction: i8,
    h_y: f64,
    target: &TargetDensity,
    dynamics: &DynamicsSpec,
    epsilon: f64,
    rng: &mut dyn RngCore,
) -> Result<ImalaOutcome> {
    let forward = OneStepKernel::new(dynamics.clone(), KernelDirection::Forward);
    let adjoint = OneStepKernel::new(dynamics.clone(), KernelDirection::Adjoint);
    let (proposing, reversing) = if direction > 0 {
        (&forward, &adjoint)
    } else {
        (&adjoint, &forward)
    };
    let candidate = proposing.sample(y, target, epsilon, rng)?;
    let h_z = target.potential(&candidate);
    let log_fwd = proposing.log_density(&candidate, y, target, epsilon)?;
    let log_rev = reversing.log_density(y, &candidate, target, epsilon)?;
    let alpha = ((h_y - h_z) + (log_rev - log_fwd)).exp().min(1.0);
    let u: f64 = rng.random();
    if u < alpha {
        Ok(ImalaOutcome {
            state: candidate,
            direction,
            potential: h_z,
            accepted: true,
            flipped: false,
            alpha,
        })
    } else {
        Ok(ImalaOutcome {
            state: y.clone(),
            direction: -direction,
            potential: h_y,
            accepted: false,
            flipped: true,
            alpha,
        })
    }
}

/// One HMC step: resample momentum, run `leapfrog_count` leapfrog steps,
/// accept on the joint Hamiltonian. A non-finite trajectory is treated as a
/// rejection.
pub fn hmc_step(
    theta: &Point,
    target: &TargetDensity,
    mass_inv: &Matrix,
    epsilon: f64,
    leapfrog_count: usize,
    rng: &mut dyn RngCore,
) -> Result<GradientStepOutcome> {
    let u_y = target.potential(theta);
    if !u_y.is_finite() {
        return Err(Error::Init(format!("hmc_step: U not finite at the current state ({u_y})")));
    }
    hmc_step_with(theta, u_y, target, mass_inv, epsilon, leapfrog_count, rng)
}

/// [`hmc_step`] with the current potential already known.
pub fn hmc_step_with(
    theta: &Point,
    u_y: f64,
    target: &TargetDensity,
    mass_inv: &Matrix,
    epsilon: f64,
    leapfrog_count: usize,
    rng: &mut dyn RngCore,
) -> Result<GradientStepOutcome> {
    if leapfrog_count == 0 {
        return Err(Error::invalid("leapfrog count must be at least 1"));
    }
    let dim = theta.len();
    // r ~ N(0, M) realized through the factor of M⁻¹: cov(L⁻ᵀ ξ) = (L Lᵀ)⁻¹
    let mass_inv_factor = crate::dynamics::cholesky_with_jitter(mass_inv)?
        .ok_or_else(|| Error::Numeric("mass matrix inverse must be positive definite".into()))?;
    let xi = standard_normal_vector(dim, rng);
    let momentum = mass_inv_factor
        .transpose()
        .solve_upper_triangular(&xi)
        .ok_or_else(|| Error::Numeric("singular mass factor".into()))?;

    let kinetic = |r: &Point| 0.5 * (mass_inv * r).dot(r);
    let h0 = u_y + kinetic(&momentum);

    let mut th = theta.clone();
    let mut r = momentum;
    let mut finite = true;
    for _ in 0..leapfrog_count {
        (th, r) = crate::dynamics::leapfrog_step(&th, &r, target, mass_inv, epsilon);
        if !(th.iter().all(|x| x.is_finite()) && r.iter().all(|x| x.is_finite())) {
            finite = false;
            break;
        }
    }
    let u_z = if finite { target.potential(&th) } else { f64::INFINITY };
    let alpha = if finite && u_z.is_finite() {
        (h0 - (u_z + kinetic(&r))).exp().min(1.0)
    } else {
        0.0
    };
    let u: f64 = rng.random();
    if u < alpha {
        Ok(GradientStepOutcome {
            state: th,
            potential: u_z,
            accepted: true,
            alpha,
        })
    } else {
        Ok(GradientStepOutcome {
            state: theta.clone(),
            potential: u_y,
            accepted: false,
            alpha,
        })
    }
}

/// Plain-MH acceptance probability that (incorrectly for `Q ≠ 0`) uses the
/// forward kernel in both directions:
/// `α^MH = min(1, π(z)P(y|z;ε) / [π(y)P(z|y;ε)])`.
///
/// Diagnostic only: quantifies how irreversibility degrades naive MH.
pub fn naive_mh_alpha_with_forward_kernel(
    y: &Point,
    z: &Point,
    target: &TargetDensity,
    dynamics: &DynamicsSpec,
    epsilon: f64,
) -> Result<f64> {
    let kernel = OneStepKernel::new(dynamics.clone(), KernelDirection::Forward);
    let log_fwd = kernel.log_density(z, y, target, epsilon)?;
    let log_rev = kernel.log_density(y, z, target, epsilon)?;
    let h_y = target.potential(y);
    let h_z = target.potential(z);
    Ok(((h_y - h_z) + (log_rev - log_fwd)).exp().min(1.0))
}
