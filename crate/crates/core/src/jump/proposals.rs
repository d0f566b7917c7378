//! Proposal families for the jump samplers.
//!
//! A [`DirectionalProposal`] is the lifted pair `(f̃, g̃)` over `(z, z^p)`:
//! `f̃` proposes along the current direction `z^p`, `g̃` against it, and the
//! two are exchanged by negating the auxiliary variable. The correctness core
//! is the swap identity `f̃(z | y, −y^p) = g̃(z | y, y^p)`, which both shipped
//! families satisfy exactly (bitwise, up to IEEE sign symmetry).

use crate::error::{Error, Result};
use crate::Point;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma as GammaDist, StandardNormal};
use statrs::function::gamma::ln_gamma;

/// Tags for the shipped proposal families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposalFamily {
    HalfSpaceGaussian,
    GammaDirectional,
    PlainGaussian,
    SymmetrizedGamma,
}

/// A plain Metropolis–Hastings proposal `q(z | y)`.
pub trait Proposal: Send + Sync {
    fn sample(&self, y: &Point, rng: &mut dyn RngCore) -> Point;
    /// `log q(z | y)`; `-∞` off the support.
    fn log_density(&self, z: &Point, y: &Point) -> f64;
}

/// The lifted directional pair `(f̃, g̃)` with its auxiliary prior `π^p`.
pub trait DirectionalProposal: Send + Sync {
    fn dim(&self) -> usize;
    fn aux_dim(&self) -> usize;
    fn family(&self) -> ProposalFamily;

    /// Draws `y^p ~ π^p`.
    fn sample_aux(&self, rng: &mut dyn RngCore) -> Point;
    /// `log π^p(y^p)` up to an additive constant; symmetric under negation.
    fn aux_log_prior(&self, yp: &Point) -> f64;
    /// Whether `y^p` lies on the support of `π^p`.
    fn aux_supported(&self, yp: &Point) -> bool;

    /// Draws `z ~ f̃(· | y, y^p)`.
    fn forward_sample(&self, y: &Point, yp: &Point, rng: &mut dyn RngCore) -> Point;
    /// `log f̃(z | y, y^p)`.
    fn forward_log_density(&self, z: &Point, y: &Point, yp: &Point) -> f64;
    /// `log g̃(z | y, y^p)`.
    fn reverse_log_density(&self, z: &Point, y: &Point, yp: &Point) -> f64;
}

/// sgn with the measure-zero tie broken upward: `sgn(0) = +1`.
fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn gaussian_log_density(r2: f64, dim: usize, sigma: f64) -> f64 {
    let var = sigma * sigma;
    -0.5 * dim as f64 * (2.0 * std::f64::consts::PI * var).ln() - r2 / (2.0 * var)
}

/// Half-space Gaussian pair: `z = y ± η·sgn(⟨η, y^p⟩)` with `η ~ N(0, σ²I)`,
/// so the forward move always lands in the half-space aligned with `y^p`.
/// `π^p` is uniform on the unit L2 sphere.
#[derive(Debug, Clone)]
pub struct HalfSpaceGaussian {
    sigma: f64,
    dim: usize,
}

impl HalfSpaceGaussian {
    pub fn new(sigma: f64, dim: usize) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
        }
        if dim == 0 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        Ok(HalfSpaceGaussian { sigma, dim })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl DirectionalProposal for HalfSpaceGaussian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn aux_dim(&self) -> usize {
        self.dim
    }

    fn family(&self) -> ProposalFamily {
        ProposalFamily::HalfSpaceGaussian
    }

    fn sample_aux(&self, rng: &mut dyn RngCore) -> Point {
        // normalized Gaussian vector is uniform on the sphere
        loop {
            let v = Point::from_iterator(self.dim, (0..self.dim).map(|_| {
                let x: f64 = StandardNormal.sample(rng);
                x
            }));
            let n = v.norm();
            if n > 1e-12 {
                return v / n;
            }
        }
    }

    fn aux_log_prior(&self, _yp: &Point) -> f64 {
        0.0 // uniform on the sphere
    }

    fn aux_supported(&self, yp: &Point) -> bool {
        yp.len() == self.dim && (yp.norm() - 1.0).abs() <= 1e-9
    }

    fn forward_sample(&self, y: &Point, yp: &Point, rng: &mut dyn RngCore) -> Point {
        let eta = Point::from_iterator(self.dim, (0..self.dim).map(|_| {
            let x: f64 = StandardNormal.sample(rng);
            x * self.sigma
        }));
        let s = sgn(eta.dot(yp));
        y + eta * s
    }

    fn forward_log_density(&self, z: &Point, y: &Point, yp: &Point) -> f64 {
        let diff = z - y;
        if yp.dot(&diff) >= 0.0 {
            std::f64::consts::LN_2 + gaussian_log_density(diff.norm_squared(), self.dim, self.sigma)
        } else {
            f64::NEG_INFINITY
        }
    }

    fn reverse_log_density(&self, z: &Point, y: &Point, yp: &Point) -> f64 {
        let diff = z - y;
        // complementary half-space; the shared boundary ⟨y^p, z−y⟩ = 0 has
        // measure zero and keeping it in both branches makes the swap
        // identity exact
        if yp.dot(&diff) <= 0.0 {
            std::f64::consts::LN_2 + gaussian_log_density(diff.norm_squared(), self.dim, self.sigma)
        } else {
            f64::NEG_INFINITY
        }
    }
}

fn gamma_ln_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// Directional gamma pair: per coordinate `zᵢ = yᵢ ± γᵢ·yᵢ^p` with
/// independent `γᵢ ~ Gamma(shape, rate)`. `π^p` is uniform on the scaled L1
/// sphere `{y^p : (1/d)·||y^p||₁ = 1}` with independent signs.
#[derive(Debug, Clone)]
pub struct GammaDirectional {
    shape: f64,
    rate: f64,
    dim: usize,
}

impl GammaDirectional {
    /// Paper-default shape is 1.1; see [`GammaDirectional::with_default_shape`].
    pub const DEFAULT_SHAPE: f64 = 1.1;

    pub fn new(shape: f64, rate: f64, dim: usize) -> Result<Self> {
        if !(shape > 0.0) || !(rate > 0.0) {
            return Err(Error::invalid(format!(
                "gamma parameters must be positive, got shape {shape}, rate {rate}"
            )));
        }
        if dim == 0 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        Ok(GammaDirectional { shape, rate, dim })
    }

    pub fn with_default_shape(rate: f64, dim: usize) -> Result<Self> {
        GammaDirectional::new(Self::DEFAULT_SHAPE, rate, dim)
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn sampler(&self) -> GammaDist<f64> {
        GammaDist::new(self.shape, 1.0 / self.rate).expect("validated at construction")
    }

    /// Sum of per-coordinate transformed gamma log densities for the move
    /// `z = y + direction·γ·y^p`, with the 1/|yᵢ^p| Jacobian.
    fn directional_log_density(&self, z: &Point, y: &Point, yp: &Point, direction: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.dim {
            let step = z[i] - y[i];
            if yp[i] == 0.0 {
                // frozen coordinate: point mass at yᵢ
                if step == 0.0 {
                    continue;
                }
                return f64::NEG_INFINITY;
            }
            let gamma = direction * step / yp[i];
            if gamma <= 0.0 {
                return f64::NEG_INFINITY;
            }
            total += gamma_ln_pdf(gamma, self.shape, self.rate) - yp[i].abs().ln();
        }
        total
    }
}

impl DirectionalProposal for GammaDirectional {
    fn dim(&self) -> usize {
        self.dim
    }

    fn aux_dim(&self) -> usize {
        self.dim
    }

    fn family(&self) -> ProposalFamily {
        ProposalFamily::GammaDirectional
    }

    fn sample_aux(&self, rng: &mut dyn RngCore) -> Point {
        // Dirichlet(1,…,1) via normalized exponentials, scaled to the
        // cross-polytope boundary ||y^p||₁ = d, with independent signs
        let d = self.dim;
        let mut exp = Vec::with_capacity(d);
        let mut total = 0.0;
        for _ in 0..d {
            let u: f64 = rng.random();
            let e = -(1.0 - u).ln();
            exp.push(e);
            total += e;
        }
        Point::from_iterator(
            d,
            exp.into_iter().map(|e| {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * d as f64 * e / total
            }),
        )
    }

    fn aux_log_prior(&self, _yp: &Point) -> f64 {
        0.0 // uniform on the scaled L1 sphere
    }

    fn aux_supported(&self, yp: &Point) -> bool {
        yp.len() == self.dim
            && (yp.iter().map(|x| x.abs()).sum::<f64>() / self.dim as f64 - 1.0).abs() <= 1e-9
    }

    fn forward_sample(&self, y: &Point, yp: &Point, rng: &mut dyn RngCore) -> Point {
        let gamma = self.sampler();
        Point::from_iterator(
            self.dim,
            (0..self.dim).map(|i| {
                if yp[i] == 0.0 {
                    y[i]
                } else {
                    y[i] + gamma.sample(rng) * yp[i]
                }
            }),
        )
    }

    fn forward_log_density(&self, z: &Point, y: &Point, yp: &Point) -> f64 {
        self.directional_log_density(z, y, yp, 1.0)
    }

    fn reverse_log_density(&self, z: &Point, y: &Point, yp: &Point) -> f64 {
        self.directional_log_density(z, y, yp, -1.0)
    }
}

/// Isotropic Gaussian random-walk proposal. As a [`DirectionalProposal`] it
/// ignores the auxiliary variable (`f̃ = g̃ = q`), which makes the lifted
/// sampler coincide with plain MH.
#[derive(Debug, Clone)]
pub struct IsotropicGaussian {
    sigma: f64,
    dim: usize,
}

impl IsotropicGaussian {
    pub fn new(sigma: f64, dim: usize) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
        }
        if dim == 0 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        Ok(IsotropicGaussian { sigma, dim })
    }
}

impl Proposal for IsotropicGaussian {
    fn sample(&self, y: &Point, rng: &mut dyn RngCore) -> Point {
        Point::from_iterator(self.dim, (0..self.dim).map(|i| {
            let x: f64 = StandardNormal.sample(rng);
            y[i] + x * self.sigma
        }))
    }

    fn log_density(&self, z: &Point, y: &Point) -> f64 {
        gaussian_log_density((z - y).norm_squared(), self.dim, self.sigma)
    }
}

impl DirectionalProposal for IsotropicGaussian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn aux_dim(&self) -> usize {
        1
    }

    fn family(&self) -> ProposalFamily {
        ProposalFamily::PlainGaussian
    }

    fn sample_aux(&self, rng: &mut dyn RngCore) -> Point {
        Point::from_element(1, if rng.random::<bool>() { 1.0 } else { -1.0 })
    }

    fn aux_log_prior(&self, _yp: &Point) -> f64 {
        0.0
    }

    fn aux_supported(&self, yp: &Point) -> bool {
        yp.len() == 1 && (yp[0] == 1.0 || yp[0] == -1.0)
    }

    fn forward_sample(&self, y: &Point, _yp: &Point, rng: &mut dyn RngCore) -> Point {
        Proposal::sample(self, y, rng)
    }

    fn forward_log_density(&self, z: &Point, y: &Point, _yp: &Point) -> f64 {
        Proposal::log_density(self, z, y)
    }

    fn reverse_log_density(&self, z: &Point, y: &Point, _yp: &Point) -> f64 {
        Proposal::log_density(self, z, y)
    }
}

/// Symmetrized gamma random-walk proposal for plain MH: per coordinate the
/// displacement is `±γ` with equal sign probability, i.e. the mixture
/// `½(f + g)` of the directional pair with the direction integrated out.
#[derive(Debug, Clone)]
pub struct SymmetrizedGamma {
    shape: f64,
    rate: f64,
    dim: usize,
}

impl SymmetrizedGamma {
    pub fn new(shape: f64, rate: f64, dim: usize) -> Result<Self> {
        if !(shape > 0.0) || !(rate > 0.0) {
            return Err(Error::invalid(format!(
                "gamma parameters must be positive, got shape {shape}, rate {rate}"
            )));
        }
        if dim == 0 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        Ok(SymmetrizedGamma { shape, rate, dim })
    }
}

impl Proposal for SymmetrizedGamma {
    fn sample(&self, y: &Point, rng: &mut dyn RngCore) -> Point {
        let gamma = GammaDist::new(self.shape, 1.0 / self.rate).expect("validated");
        Point::from_iterator(self.dim, (0..self.dim).map(|i| {
            let g: f64 = gamma.sample(rng);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            y[i] + sign * g
        }))
    }

    fn log_density(&self, z: &Point, y: &Point) -> f64 {
        let mut total = 0.0;
        for i in 0..self.dim {
            let d = (z[i] - y[i]).abs();
            total += -std::f64::consts::LN_2 + gamma_ln_pdf(d, self.shape, self.rate);
        }
        total
    }
}
