//! Continuous Markov dynamics specified by a diffusion matrix `D(z)`, a
//! skew-symmetric matrix `Q(z)` and the divergence correction
//! `Γᵢ(z) = Σⱼ ∂/∂zⱼ (Dᵢⱼ + Qᵢⱼ)`.
//!
//! The drift `-(D+Q)∇H + Γ` with noise `N(0, 2εD)` leaves the target
//! invariant in the small-step limit; the adjoint dynamics flip the sign of
//! `Q` and use `Γ̃ᵢ = Σⱼ ∂/∂zⱼ (Dᵢⱼ − Qᵢⱼ)`.

use crate::error::{Error, Result};
use crate::targets::TargetDensity;
use crate::{Matrix, Point};
use nalgebra::Cholesky;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

/// Tolerance below which a skew/PSD violation is attributed to rounding.
const STRUCTURE_TOL: f64 = 1e-10;

type MatrixFn = dyn Fn(&Point) -> Matrix + Send + Sync;
type VectorFn = dyn Fn(&Point) -> Point + Send + Sync;

/// Constant step size ε shared by all iterations of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    epsilon: f64,
}

impl StepSchedule {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid(format!("step size must be positive, got {epsilon}")));
        }
        Ok(StepSchedule { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// How Γ and Γ̃ are obtained for state-dependent dynamics.
pub enum DivergenceMode {
    /// Caller supplies analytic divergences (forward and adjoint).
    Analytic {
        forward: Box<VectorFn>,
        adjoint: Box<VectorFn>,
    },
    /// Column-wise central differences with step `1e-5·(1+|zⱼ|)`.
    FiniteDifference,
}

/// The `(D, Q, Γ, Γ̃)` bundle driving SDE-based samplers.
#[derive(Clone)]
pub struct DynamicsSpec {
    dim: usize,
    d_fn: Arc<MatrixFn>,
    q_fn: Arc<MatrixFn>,
    gamma_fwd: Arc<VectorFn>,
    gamma_adj: Arc<VectorFn>,
    constant: bool,
    /// Cached Cholesky factor of constant D (`None` when D = 0).
    const_chol: Option<Arc<Matrix>>,
    const_q: Option<Arc<Matrix>>,
}

impl std::fmt::Debug for DynamicsSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DynamicsSpec")
            .field("dim", &self.dim)
            .field("constant", &self.constant)
            .finish()
    }
}

impl DynamicsSpec {
    /// Constant matrices: Γ = Γ̃ = 0 exactly. `d` must be positive
    /// semidefinite and `q` skew-symmetric.
    pub fn constant(d: Matrix, q: Matrix) -> Result<Self> {
        let dim = d.nrows();
        if d.ncols() != dim || q.nrows() != dim || q.ncols() != dim {
            return Err(Error::Validation(format!(
                "D is {}x{}, Q is {}x{}; both must be square of equal size",
                d.nrows(),
                d.ncols(),
                q.nrows(),
                q.ncols()
            )));
        }
        validate_skew(&q)?;
        validate_psd(&d)?;
        let chol = cholesky_with_jitter(&d)?;
        let d = Arc::new(d);
        let q = Arc::new(q);
        let zero = Point::zeros(dim);
        Ok(DynamicsSpec {
            dim,
            d_fn: {
                let d = d.clone();
                Arc::new(move |_: &Point| (*d).clone())
            },
            q_fn: {
                let q = q.clone();
                Arc::new(move |_: &Point| (*q).clone())
            },
            gamma_fwd: {
                let zero = zero.clone();
                Arc::new(move |_: &Point| zero.clone())
            },
            gamma_adj: Arc::new(move |_: &Point| zero.clone()),
            constant: true,
            const_chol: chol.map(Arc::new),
            const_q: Some(q),
        })
    }

    /// State-dependent matrices with divergences either supplied or computed
    /// by central differences.
    pub fn state_dependent(
        dim: usize,
        d_fn: impl Fn(&Point) -> Matrix + Send + Sync + 'static,
        q_fn: impl Fn(&Point) -> Matrix + Send + Sync + 'static,
        divergence: DivergenceMode,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dynamics dimension must be at least 1"));
        }
        let d_fn: Arc<MatrixFn> = Arc::new(d_fn);
        let q_fn: Arc<MatrixFn> = Arc::new(q_fn);
        let (gamma_fwd, gamma_adj): (Arc<VectorFn>, Arc<VectorFn>) = match divergence {
            DivergenceMode::Analytic { forward, adjoint } => (Arc::from(forward), Arc::from(adjoint)),
            DivergenceMode::FiniteDifference => {
                let dp = d_fn.clone();
                let qp = q_fn.clone();
                let fwd: Arc<VectorFn> = Arc::new(move |z: &Point| {
                    fd_divergence(&|p| dp(p) + qp(p), z)
                });
                let dm = d_fn.clone();
                let qm = q_fn.clone();
                let adj: Arc<VectorFn> = Arc::new(move |z: &Point| {
                    fd_divergence(&|p| dm(p) - qm(p), z)
                });
                (fwd, adj)
            }
        };
        Ok(DynamicsSpec {
            dim,
            d_fn,
            q_fn,
            gamma_fwd,
            gamma_adj,
            constant: false,
            const_chol: None,
            const_q: None,
        })
    }

    /// Overdamped Langevin dynamics: D = I, Q = 0.
    pub fn langevin(dim: usize) -> Self {
        DynamicsSpec::constant(Matrix::identity(dim, dim), Matrix::zeros(dim, dim))
            .expect("identity/zero matrices are valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn d(&self, z: &Point) -> Matrix {
        (self.d_fn)(z)
    }

    pub fn q(&self, z: &Point) -> Matrix {
        (self.q_fn)(z)
    }

    pub fn gamma_forward(&self, z: &Point) -> Point {
        (self.gamma_fwd)(z)
    }

    pub fn gamma_adjoint(&self, z: &Point) -> Point {
        (self.gamma_adj)(z)
    }

    /// True when the constant Q is exactly zero (reversible dynamics).
    pub fn has_zero_q(&self, probe: &Point) -> bool {
        match &self.const_q {
            Some(q) => q.iter().all(|&x| x == 0.0),
            None => self.q(probe).iter().all(|&x| x.abs() <= STRUCTURE_TOL),
        }
    }

    /// Cholesky factor L of D(z) (L Lᵀ = D), `None` when `D(z) = 0`.
    pub fn diffusion_factor(&self, z: &Point) -> Result<Option<Matrix>> {
        if let Some(l) = &self.const_chol {
            return Ok(Some((**l).clone()));
        }
        if self.constant {
            return Ok(None); // constant D = 0
        }
        cholesky_with_jitter(&self.d(z))
    }

    /// Draws η ~ N(0, 2εD(z)).
    pub fn sample_noise(&self, z: &Point, epsilon: f64, rng: &mut dyn RngCore) -> Result<Point> {
        match self.diffusion_factor(z)? {
            None => Ok(Point::zeros(self.dim)),
            Some(l) => {
                let xi = standard_normal_vector(self.dim, rng);
                Ok(l * xi * (2.0 * epsilon).sqrt())
            }
        }
    }
}

/// One Euler–Maruyama update:
/// `z' = z + ε[−(D(z)+Q(z))∇H(z) + Γ(z)] + η`, `η ~ N(0, 2εD(z))`.
pub fn sde_step(
    state: &Point,
    target: &TargetDensity,
    dynamics: &DynamicsSpec,
    schedule: StepSchedule,
    rng: &mut dyn RngCore,
) -> Result<Point> {
    let h = target.potential(state);
    if !h.is_finite() {
        return Err(Error::Numeric(format!(
            "sde_step: potential not finite at the current state (H = {h})"
        )));
    }
    let eps = schedule.epsilon();
    let noise = dynamics.sample_noise(state, eps, rng)?;
    Ok(sde_drift(state, target, dynamics, eps) + noise)
}

/// The deterministic part of [`sde_step`]: `z + ε[−(D+Q)∇H + Γ]`.
pub fn sde_drift(
    state: &Point,
    target: &TargetDensity,
    dynamics: &DynamicsSpec,
    epsilon: f64,
) -> Point {
    let grad = target.gradient(state);
    let dq = dynamics.d(state) + dynamics.q(state);
    let gamma = dynamics.gamma_forward(state);
    state + (gamma - dq * grad) * epsilon
}

/// One leapfrog step for separable Hamiltonians:
/// `r½ = r − (ε/2)∇U(θ); θ' = θ + ε M⁻¹ r½; r' = r½ − (ε/2)∇U(θ')`.
pub fn leapfrog_step(
    theta: &Point,
    momentum: &Point,
    target: &TargetDensity,
    mass_inv: &Matrix,
    epsilon: f64,
) -> (Point, Point) {
    let half = 0.5 * epsilon;
    let r_half = momentum - target.gradient(theta) * half;
    let theta_next = theta + mass_inv * &r_half * epsilon;
    let r_next = &r_half - target.gradient(&theta_next) * half;
    (theta_next, r_next)
}

pub(crate) fn standard_normal_vector(dim: usize, rng: &mut dyn RngCore) -> Point {
    Point::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(rng)))
}

fn validate_skew(q: &Matrix) -> Result<()> {
    let sym = q + q.transpose();
    let violation = sym.abs().max();
    if violation > STRUCTURE_TOL {
        return Err(Error::Validation(format!(
            "Q not skew-symmetric: max |Q+Qᵀ| = {violation:.3e}"
        )));
    }
    Ok(())
}

fn validate_psd(d: &Matrix) -> Result<()> {
    let asym = (d - d.transpose()).abs().max();
    if asym > STRUCTURE_TOL {
        return Err(Error::Validation(format!(
            "D not symmetric: max |D−Dᵀ| = {asym:.3e}"
        )));
    }
    let sym = (d + d.transpose()) * 0.5;
    let eigs = sym.symmetric_eigenvalues();
    let min_eig = eigs.min();
    if min_eig < -STRUCTURE_TOL {
        return Err(Error::Validation(format!(
            "D not positive semidefinite: min eigenvalue = {min_eig:.3e}"
        )));
    }
    Ok(())
}

/// Cholesky of a PSD matrix, escalating jitter `1e-12·tr(D)/d` by ×10 on each
/// of at most 3 retries. Returns `None` for the exactly-zero matrix.
pub(crate) fn cholesky_with_jitter(d: &Matrix) -> Result<Option<Matrix>> {
    if d.iter().all(|&x| x == 0.0) {
        return Ok(None);
    }
    if let Some(ch) = Cholesky::new(d.clone()) {
        return Ok(Some(ch.unpack()));
    }
    let dim = d.nrows();
    let mut jitter = 1e-12 * d.trace().abs().max(f64::MIN_POSITIVE) / dim as f64;
    for _ in 0..3 {
        let mut jittered = d.clone();
        for i in 0..dim {
            jittered[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(jittered) {
            return Ok(Some(ch.unpack()));
        }
        jitter *= 10.0;
    }
    Err(Error::Numeric(format!(
        "Cholesky failed after 3 jitter escalations (final jitter {jitter:.3e})"
    )))
}

/// Row divergence of a matrix field by central differences:
/// `out_i = Σⱼ ∂ M_ij/∂zⱼ`.
fn fd_divergence(m_fn: &dyn Fn(&Point) -> Matrix, z: &Point) -> Point {
    let dim = z.len();
    let mut out = Point::zeros(dim);
    for j in 0..dim {
        let h = 1e-5 * (1.0 + z[j].abs());
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[j] += h;
        zm[j] -= h;
        let diff = (m_fn(&zp) - m_fn(&zm)) / (2.0 * h);
        for i in 0..dim {
            out[i] += diff[(i, j)];
        }
    }
    out
}

/// Validates a finite divergence vector, naming the offending coordinate.
pub fn check_divergence_finite(gamma: &Point) -> Result<()> {
    for (i, &g) in gamma.iter().enumerate() {
        if !g.is_finite() {
            return Err(Error::Numeric(format!(
                "divergence is {g} at coordinate {i}"
            )));
        }
    }
    Ok(())
}
