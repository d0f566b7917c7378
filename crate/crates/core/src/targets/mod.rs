//! Target distributions: potential `H(z) = -log π(z)` and its gradient.
//!
//! All samplers consume a [`TargetDensity`]. Points outside the support are
//! signalled with `H = +∞`, which every accept/reject step turns into a
//! rejection; no exceptions are thrown for out-of-support proposals.

mod dataset;

pub use dataset::{load_statlog_csv, LabeledDataset};

use crate::error::{Error, Result};
use crate::{Matrix, Point};
use std::sync::Arc;

type PotentialFn = dyn Fn(&Point) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&Point) -> Point + Send + Sync;

/// An unnormalized target distribution.
///
/// Immutable after construction and cheap to clone; safe to share across
/// concurrently running chains.
#[derive(Clone)]
pub struct TargetDensity {
    dim: usize,
    potential: Arc<PotentialFn>,
    gradient: Arc<GradientFn>,
    support_box: Option<Vec<(f64, f64)>>,
    initial_point: Point,
    name: String,
}

impl std::fmt::Debug for TargetDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TargetDensity")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl TargetDensity {
    /// Builds a target from a potential and its analytic gradient.
    pub fn new(
        dim: usize,
        potential: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("target dimension must be at least 1"));
        }
        Ok(TargetDensity {
            dim,
            potential: Arc::new(potential),
            gradient: Arc::new(gradient),
            support_box: None,
            initial_point: Point::zeros(dim),
            name: "custom".to_string(),
        })
    }

    pub fn with_support_box(mut self, support_box: Vec<(f64, f64)>) -> Self {
        self.support_box = Some(support_box);
        self
    }

    pub fn with_initial_point(mut self, init: Point) -> Self {
        self.initial_point = init;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `H(z)`, `+∞` outside the support.
    pub fn potential(&self, z: &Point) -> f64 {
        (self.potential)(z)
    }

    /// `∇H(z)`; only meaningful where the potential is finite.
    pub fn gradient(&self, z: &Point) -> Point {
        (self.gradient)(z)
    }

    /// Per-dimension interval covering the bulk of the mass, when known.
    /// Used by histogram diagnostics and proposal scaling.
    pub fn support_box(&self) -> Option<&[(f64, f64)]> {
        self.support_box.as_deref()
    }

    /// A point with finite potential, used to start chains.
    pub fn initial_point(&self) -> &Point {
        &self.initial_point
    }

    /// Standard normal in `dim` dimensions: `H(z) = ||z||²/2`, `∇H(z) = z`.
    pub fn std_normal(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("std_normal: dim must be at least 1"));
        }
        let target = TargetDensity::new(
            dim,
            |z: &Point| 0.5 * z.norm_squared(),
            |z: &Point| z.clone(),
        )?;
        Ok(target
            .with_support_box(vec![(-5.0, 5.0); dim])
            .with_name(format!("std-normal-{dim}d")))
    }

    /// Standard log-normal (μ=0, σ=1) on z > 0:
    /// `H(z) = ln z + (ln z)²/2`, `+∞` for z ≤ 0.
    pub fn log_normal() -> Self {
        let target = TargetDensity::new(
            1,
            |z: &Point| {
                let x = z[0];
                if x <= 0.0 {
                    f64::INFINITY
                } else {
                    let l = x.ln();
                    l + 0.5 * l * l
                }
            },
            |z: &Point| {
                let x = z[0];
                let l = x.ln();
                Point::from_element(1, (1.0 + l) / x)
            },
        )
        .expect("dim 1 is valid");
        target
            .with_support_box(vec![(0.0, 5.0)])
            .with_initial_point(Point::from_element(1, 1.0))
            .with_name("log-normal")
    }

    /// 2D bimodal family:
    /// `H(z₁,z₂) = 2(z₁²−τ)² − 0.2 z₁ − 5 z₁² + 5 z₂²`, modes on the z₁ axis.
    pub fn bimodal(tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::invalid(format!("bimodal: tau must be > 0, got {tau}")));
        }
        let target = TargetDensity::new(
            2,
            move |z: &Point| {
                let (z1, z2) = (z[0], z[1]);
                let u = z1 * z1 - tau;
                2.0 * u * u - 0.2 * z1 - 5.0 * z1 * z1 + 5.0 * z2 * z2
            },
            move |z: &Point| {
                let (z1, z2) = (z[0], z[1]);
                let u = z1 * z1 - tau;
                Point::from_column_slice(&[8.0 * u * z1 - 0.2 - 10.0 * z1, 10.0 * z2])
            },
        )?;
        // modes sit near z1 = ±sqrt(tau + 5/4); start in the right-hand one
        let mode = (tau + 1.25).sqrt();
        let half_width = 2.0 * (tau.sqrt() + 1.0);
        Ok(target
            .with_support_box(vec![(-half_width, half_width), (-1.5, 1.5)])
            .with_initial_point(Point::from_column_slice(&[mode, 0.0]))
            .with_name(format!("bimodal-tau{tau}")))
    }

    /// Moon-shaped (banana) target:
    /// `H(z₁,z₂) = z₁⁴/10 + (4(z₂+1.2) − z₁²)²/2`.
    pub fn moon() -> Self {
        let target = TargetDensity::new(
            2,
            |z: &Point| {
                let (z1, z2) = (z[0], z[1]);
                let v = 4.0 * (z2 + 1.2) - z1 * z1;
                z1.powi(4) / 10.0 + 0.5 * v * v
            },
            |z: &Point| {
                let (z1, z2) = (z[0], z[1]);
                let v = 4.0 * (z2 + 1.2) - z1 * z1;
                Point::from_column_slice(&[0.4 * z1.powi(3) - 2.0 * v * z1, 4.0 * v])
            },
        )
        .expect("dim 2 is valid");
        target
            .with_support_box(vec![(-2.5, 2.5), (-2.2, 0.3)])
            .with_initial_point(Point::from_column_slice(&[0.0, -1.2]))
            .with_name("moon")
    }

    /// Isotropic Gaussian mixture: `H(z) = −log Σ_k w_k N(z; m_k, s_k² I)`.
    ///
    /// The gradient is computed through the log-sum-exp softmax so widely
    /// separated modes stay numerically stable.
    pub fn gaussian_mixture(
        means: Vec<Point>,
        weights: Vec<f64>,
        scales: Vec<f64>,
    ) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::invalid("gaussian_mixture: need at least one component"));
        }
        if means.len() != weights.len() || means.len() != scales.len() {
            return Err(Error::invalid(format!(
                "gaussian_mixture: got {} means, {} weights, {} scales",
                means.len(),
                weights.len(),
                scales.len()
            )));
        }
        let dim = means[0].len();
        if dim == 0 || means.iter().any(|m| m.len() != dim) {
            return Err(Error::invalid("gaussian_mixture: inconsistent mean dimensions"));
        }
        if scales.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("gaussian_mixture: scales must be positive"));
        }
        let wsum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(w > 0.0)) || (wsum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "gaussian_mixture: weights must be positive and sum to 1 (sum = {wsum})"
            )));
        }

        // log component density up to the shared (2π)^{d/2}: kept explicit so a
        // single unit component reproduces the std-normal potential plus an
        // exact constant.
        let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
        let log_terms = {
            let means = means.clone();
            let weights = weights.clone();
            let scales = scales.clone();
            move |z: &Point| -> Vec<f64> {
                means
                    .iter()
                    .zip(&weights)
                    .zip(&scales)
                    .map(|((m, &w), &s)| {
                        let r2 = (z - m).norm_squared();
                        w.ln() - dim as f64 * (s.ln() + half_log_2pi) - r2 / (2.0 * s * s)
                    })
                    .collect()
            }
        };
        let log_terms_grad = log_terms.clone();

        let means_g = means.clone();
        let scales_g = scales.clone();
        let bulk = mixture_box(&means, &scales);
        let heaviest = weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        let init = means[heaviest].clone();
        let n_components = means.len();

        let target = TargetDensity::new(
            dim,
            move |z: &Point| {
                let ls = log_terms(z);
                -log_sum_exp(&ls)
            },
            move |z: &Point| {
                let ls = log_terms_grad(z);
                let lse = log_sum_exp(&ls);
                let mut grad = Point::zeros(dim);
                for k in 0..n_components {
                    let p = (ls[k] - lse).exp();
                    // ∇ l_k = -(z - m_k)/s_k²
                    grad += (z - &means_g[k]) * (p / (scales_g[k] * scales_g[k]));
                }
                grad
            },
        )?;
        Ok(target
            .with_support_box(bulk)
            .with_initial_point(init)
            .with_name(format!("gaussian-mixture-{n_components}")))
    }

    /// Bayesian logistic regression posterior with `β ~ N(0, α I)` prior:
    /// `H(β) = −Σᵢ [yᵢ log s(xᵢβ) + (1−yᵢ) log(1−s(xᵢβ))] + ||β||²/(2α)`.
    ///
    /// `alpha = +∞` disables the prior.
    pub fn logistic_regression(data: &LabeledDataset, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::invalid(format!(
                "logistic_regression: prior variance alpha must be > 0, got {alpha}"
            )));
        }
        let design = data.design().clone();
        let design_grad = design.clone();
        let labels: Vec<f64> = data.labels().iter().map(|&y| y as f64).collect();
        let labels_grad = labels.clone();
        let dim = design.ncols();

        let target = TargetDensity::new(
            dim,
            move |beta: &Point| {
                if beta.len() != design.ncols() {
                    return f64::INFINITY;
                }
                let logits = &design * beta;
                let mut nll = 0.0;
                for (i, &y) in labels.iter().enumerate() {
                    let t = logits[i];
                    // -log s(t) = softplus(-t); -log(1 - s(t)) = softplus(t)
                    nll += if y > 0.5 { softplus(-t) } else { softplus(t) };
                }
                nll + beta.norm_squared() / (2.0 * alpha)
            },
            move |beta: &Point| {
                let logits = &design_grad * beta;
                let resid = Point::from_iterator(
                    labels_grad.len(),
                    logits
                        .iter()
                        .zip(&labels_grad)
                        .map(|(&t, &y)| y - logistic(t)),
                );
                design_grad.transpose() * resid * (-1.0) + beta / alpha
            },
        )?;
        Ok(target.with_name(format!("logistic-{}d", dim)))
    }

    /// Shipped 20-component mixture preset: unevenly weighted modes with small
    /// radii, exercising concentrated multimodality in 2D.
    pub fn multimodal_preset() -> Self {
        // deterministic lattice-with-jitter layout on roughly [-7, 7]^2
        let mut means = Vec::new();
        let mut weights = Vec::new();
        let mut scales = Vec::new();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            // splitmix64, mapped to [0,1)
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut v = state;
            v = (v ^ (v >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            v = (v ^ (v >> 27)).wrapping_mul(0x94d049bb133111eb);
            ((v ^ (v >> 31)) >> 11) as f64 / (1u64 << 53) as f64
        };
        for i in 0..20 {
            let gx = (i % 5) as f64;
            let gy = (i / 5) as f64;
            let x = -6.0 + 3.0 * gx + 1.6 * (next() - 0.5);
            let y = -5.25 + 3.5 * gy + 1.6 * (next() - 0.5);
            means.push(Point::from_column_slice(&[x, y]));
            weights.push(0.5 + next());
            scales.push(0.08 + 0.22 * next());
        }
        let wsum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= wsum;
        }
        TargetDensity::gaussian_mixture(means, weights, scales)
            .expect("preset components are valid")
            .with_name("multimodal-20")
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t
    } else {
        t.exp().ln_1p()
    }
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn mixture_box(means: &[Point], scales: &[f64]) -> Vec<(f64, f64)> {
    let dim = means[0].len();
    (0..dim)
        .map(|j| {
            let lo = means
                .iter()
                .zip(scales)
                .map(|(m, s)| m[j] - 4.0 * s)
                .fold(f64::INFINITY, f64::min);
            let hi = means
                .iter()
                .zip(scales)
                .map(|(m, s)| m[j] + 4.0 * s)
                .fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        })
        .collect()
}

/// Uniform density on a box: `H = 0` inside, `+∞` outside. Handy for tests
/// where every in-support proposal must be accepted.
pub fn box_uniform(bounds: Vec<(f64, f64)>) -> Result<TargetDensity> {
    let dim = bounds.len();
    if dim == 0 {
        return Err(Error::invalid("box_uniform: need at least one dimension"));
    }
    let inside = {
        let bounds = bounds.clone();
        move |z: &Point| {
            z.iter()
                .zip(&bounds)
                .all(|(&x, &(lo, hi))| x >= lo && x <= hi)
        }
    };
    let inside_g = inside.clone();
    let init = Point::from_iterator(dim, bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)));
    let target = TargetDensity::new(
        dim,
        move |z: &Point| if inside(z) { 0.0 } else { f64::INFINITY },
        move |z: &Point| {
            let _ = inside_g(z);
            Point::zeros(dim)
        },
    )?;
    Ok(target
        .with_support_box(bounds)
        .with_initial_point(init)
        .with_name("box-uniform"))
}

/// Central finite-difference gradient of an arbitrary potential, with the
/// step `1e-6·(1+|zᵢ|)` per coordinate. Used as an independent cross-check of
/// analytic gradients.
pub fn finite_difference_gradient(f: &dyn Fn(&Point) -> f64, z: &Point) -> Point {
    let mut grad = Point::zeros(z.len());
    for i in 0..z.len() {
        let h = 1e-6 * (1.0 + z[i].abs());
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[i] += h;
        zm[i] -= h;
        grad[i] = (f(&zp) - f(&zm)) / (2.0 * h);
    }
    grad
}

/// Block-antisymmetric `Q` used for logistic-regression experiments:
/// `[[0, −I_d],[I_d, 0]]` with `d = ⌊(dim+1)/2⌋`, padded with a zero
/// row/column when `dim` is odd.
pub fn block_rotation(dim: usize) -> Matrix {
    let d = dim.div_ceil(2);
    let mut q = Matrix::zeros(dim, dim);
    for i in 0..d {
        let j = d + i;
        if j < dim {
            q[(i, j)] = -1.0;
            q[(j, i)] = 1.0;
        }
    }
    q
}

/// The 2D rotation generator `[[0, −1],[1, 0]]` scaled by `c`.
pub fn rotation2(c: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[0.0, -c, c, 0.0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(analytic: &Point, fd: &Point) -> f64 {
        (analytic - fd).norm() / (1.0 + analytic.norm())
    }

    fn check_gradients(target: &TargetDensity, points: &[Point]) {
        for z in points {
            let h = target.potential(z);
            assert!(h.is_finite(), "{}: H not finite at {z:?}", target.name());
            let g = target.gradient(z);
            assert_eq!(g.len(), target.dim());
            assert!(g.iter().all(|x| x.is_finite()));
            let fd = finite_difference_gradient(&|p| target.potential(p), z);
            assert!(
                rel_err(&g, &fd) <= 1e-5,
                "{}: gradient mismatch at {z:?}: analytic {g:?} vs fd {fd:?}",
                target.name()
            );
        }
    }

    fn interior_points(dim: usize, lo: f64, hi: f64, n: usize) -> Vec<Point> {
        // deterministic low-discrepancy-ish scatter, no RNG needed
        (0..n)
            .map(|k| {
                Point::from_iterator(
                    dim,
                    (0..dim).map(|j| {
                        let t = ((k * dim + j) as f64 * 0.618_033_988_749_894_8).fract();
                        lo + (hi - lo) * t
                    }),
                )
            })
            .collect()
    }

    #[test]
    fn std_normal_examples() {
        let t = TargetDensity::std_normal(2).unwrap();
        assert_eq!(t.potential(&Point::from_column_slice(&[0.0, 0.0])), 0.0);
        assert_eq!(
            t.gradient(&Point::from_column_slice(&[0.0, 0.0])),
            Point::zeros(2)
        );
        assert_eq!(t.potential(&Point::from_column_slice(&[1.0, 1.0])), 1.0);
        let t1 = TargetDensity::std_normal(1).unwrap();
        assert_eq!(t1.gradient(&Point::from_element(1, 3.0))[0], 3.0);
        assert!(TargetDensity::std_normal(0).is_err());
    }

    #[test]
    fn log_normal_examples() {
        let t = TargetDensity::log_normal();
        assert_eq!(t.potential(&Point::from_element(1, 1.0)), 0.0);
        let h_e = t.potential(&Point::from_element(1, std::f64::consts::E));
        assert!((h_e - 1.5).abs() < 1e-12, "H(e) = {h_e}");
        assert_eq!(t.potential(&Point::from_element(1, -1.0)), f64::INFINITY);
        assert_eq!(t.potential(&Point::from_element(1, 0.0)), f64::INFINITY);
    }

    #[test]
    fn bimodal_examples() {
        let origin = Point::zeros(2);
        let t1 = TargetDensity::bimodal(1.0).unwrap();
        assert!((t1.potential(&origin) - 2.0).abs() < 1e-12);
        let t05 = TargetDensity::bimodal(0.5).unwrap();
        assert!((t05.potential(&origin) - 0.5).abs() < 1e-12);
        let g = t1.gradient(&Point::from_column_slice(&[0.0, 1.0]));
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert!(TargetDensity::bimodal(0.0).is_err());
        assert!(TargetDensity::bimodal(-1.0).is_err());
    }

    #[test]
    fn bimodal_has_two_minima_in_z1() {
        for tau in [0.5, 1.0, 1.5] {
            let t = TargetDensity::bimodal(tau).unwrap();
            let h = |z1: f64| t.potential(&Point::from_column_slice(&[z1, 0.0]));
            let n = 4001;
            let (lo, hi) = (-4.0, 4.0);
            let step = (hi - lo) / (n - 1) as f64;
            let vals: Vec<f64> = (0..n).map(|i| h(lo + i as f64 * step)).collect();
            let minima = (1..n - 1)
                .filter(|&i| vals[i] < vals[i - 1] && vals[i] < vals[i + 1])
                .count();
            assert_eq!(minima, 2, "tau={tau}: expected exactly two local minima");
        }
    }

    #[test]
    fn moon_examples() {
        let t = TargetDensity::moon();
        let h0 = t.potential(&Point::zeros(2));
        assert!((h0 - 11.52).abs() < 1e-12, "H(0,0) = {h0}");
        let h_min = t.potential(&Point::from_column_slice(&[0.0, -1.2]));
        assert_eq!(h_min, 0.0);
        let g = t.gradient(&Point::zeros(2));
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn mixture_reduces_to_std_normal_plus_constant() {
        let mix = TargetDensity::gaussian_mixture(
            vec![Point::zeros(2)],
            vec![1.0],
            vec![1.0],
        )
        .unwrap();
        let std = TargetDensity::std_normal(2).unwrap();
        let c = mix.potential(&Point::zeros(2)) - std.potential(&Point::zeros(2));
        let expected = (2.0 * std::f64::consts::PI).ln(); // (d/2)·ln 2π with d = 2
        assert!((c - expected).abs() < 1e-12);
        for z in interior_points(2, -3.0, 3.0, 25) {
            let diff = mix.potential(&z) - std.potential(&z) - c;
            assert!(diff.abs() < 1e-12, "offset not constant: {diff}");
        }
        assert_eq!(mix.gradient(&Point::zeros(2)), Point::zeros(2));
    }

    #[test]
    fn mixture_symmetry_and_weighted_pull() {
        let means = vec![
            Point::from_column_slice(&[1.0, 0.0]),
            Point::from_column_slice(&[-1.0, 0.0]),
        ];
        let equal =
            TargetDensity::gaussian_mixture(means.clone(), vec![0.5, 0.5], vec![1.0, 1.0])
                .unwrap();
        let g = equal.gradient(&Point::zeros(2));
        assert!(g.norm() < 1e-14, "symmetric mixture should have flat origin");

        let skew =
            TargetDensity::gaussian_mixture(means, vec![0.9, 0.1], vec![1.0, 1.0]).unwrap();
        let g = skew.gradient(&Point::zeros(2));
        // heavier mode at +1 along z1 pulls the potential downhill toward it
        assert!(g[0] < -1e-3, "gradient should point uphill away from the heavy mode: {g:?}");
        let fd = finite_difference_gradient(&|p| skew.potential(p), &Point::zeros(2));
        assert!(rel_err(&g, &fd) <= 1e-5);
    }

    #[test]
    fn mixture_rejects_bad_args() {
        assert!(TargetDensity::gaussian_mixture(vec![], vec![], vec![]).is_err());
        assert!(TargetDensity::gaussian_mixture(
            vec![Point::zeros(2)],
            vec![0.7],
            vec![1.0]
        )
        .is_err());
        assert!(TargetDensity::gaussian_mixture(
            vec![Point::zeros(2)],
            vec![1.0],
            vec![0.0]
        )
        .is_err());
    }

    #[test]
    fn logistic_regression_score_matches_hand_value() {
        // single row x = (1), y = 1, prior off, β = 0 → ∇H = -0.5
        let data = LabeledDataset::from_parts(
            Matrix::from_row_slice(1, 1, &[1.0]),
            vec![1],
            vec!["intercept".into()],
        )
        .unwrap();
        let t = TargetDensity::logistic_regression(&data, f64::INFINITY).unwrap();
        let g = t.gradient(&Point::zeros(1));
        assert!((g[0] + 0.5).abs() < 1e-12, "score at origin: {}", g[0]);
    }

    #[test]
    fn logistic_regression_prior_vanishes_at_origin() {
        let data = LabeledDataset::from_parts(
            Matrix::from_row_slice(3, 2, &[1.0, 0.3, 1.0, -0.7, 1.0, 1.2]),
            vec![0, 1, 1],
            vec!["intercept".into(), "f0".into()],
        )
        .unwrap();
        let with_prior = TargetDensity::logistic_regression(&data, 100.0).unwrap();
        let without = TargetDensity::logistic_regression(&data, f64::INFINITY).unwrap();
        let origin = Point::zeros(2);
        assert!(
            (with_prior.potential(&origin) - without.potential(&origin)).abs() < 1e-14
        );
        assert!((with_prior.gradient(&origin) - without.gradient(&origin)).norm() < 1e-14);
    }

    #[test]
    fn logistic_regression_is_convex_on_random_pairs() {
        let data = LabeledDataset::from_parts(
            Matrix::from_row_slice(
                4,
                3,
                &[
                    1.0, 0.5, -1.0, //
                    1.0, -0.2, 0.4, //
                    1.0, 1.5, 0.9, //
                    1.0, -1.1, -0.3,
                ],
            ),
            vec![0, 1, 1, 0],
            vec!["intercept".into(), "f0".into(), "f1".into()],
        )
        .unwrap();
        let t = TargetDensity::logistic_regression(&data, 100.0).unwrap();
        let pts = interior_points(3, -2.0, 2.0, 40);
        for pair in pts.chunks(2) {
            let [a, b] = pair else { continue };
            let mid = (a + b) * 0.5;
            assert!(
                t.potential(&mid) <= 0.5 * (t.potential(a) + t.potential(b)) + 1e-9,
                "convexity violated between {a:?} and {b:?}"
            );
        }
    }

    #[test]
    fn gradients_match_finite_differences_everywhere() {
        let cases: Vec<(TargetDensity, f64, f64)> = vec![
            (TargetDensity::std_normal(1).unwrap(), -3.0, 3.0),
            (TargetDensity::std_normal(3).unwrap(), -3.0, 3.0),
            (TargetDensity::log_normal(), 0.1, 4.0),
            (TargetDensity::bimodal(1.0).unwrap(), -2.0, 2.0),
            (TargetDensity::moon(), -2.0, 2.0),
            (TargetDensity::multimodal_preset(), -6.0, 6.0),
        ];
        for (target, lo, hi) in cases {
            check_gradients(&target, &interior_points(target.dim(), lo, hi, 100));
        }
        let data = LabeledDataset::from_parts(
            Matrix::from_row_slice(3, 2, &[1.0, 0.3, 1.0, -0.7, 1.0, 1.2]),
            vec![0, 1, 1],
            vec!["intercept".into(), "f0".into()],
        )
        .unwrap();
        let t = TargetDensity::logistic_regression(&data, 100.0).unwrap();
        check_gradients(&t, &interior_points(2, -2.0, 2.0, 100));
    }

    #[test]
    fn block_rotation_shapes() {
        let q = block_rotation(4);
        assert_eq!(q[(0, 2)], -1.0);
        assert_eq!(q[(2, 0)], 1.0);
        assert_eq!(q[(1, 3)], -1.0);
        // odd dimension: zero padding row/column, still skew
        let q5 = block_rotation(5);
        assert_eq!((q5.clone() + q5.transpose()).abs().max(), 0.0);
        assert_eq!(q5.column(4).amax(), 1.0); // d = 3 pairs (2,5) -> padded in-range part
    }

    #[test]
    fn box_uniform_support() {
        let t = box_uniform(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        assert_eq!(t.potential(&Point::from_column_slice(&[0.5, 0.5])), 0.0);
        assert_eq!(
            t.potential(&Point::from_column_slice(&[1.5, 0.5])),
            f64::INFINITY
        );
    }
}
