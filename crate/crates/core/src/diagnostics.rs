//! Chain-quality estimators: autocorrelation, effective sample sizes,
//! histogram total-variation distance, and mode escape times.

use crate::error::{Error, Result};
use crate::targets::TargetDensity;
use crate::trace::ChainTrace;
use crate::{Matrix, Point};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

/// Biased (divide-by-N) autocorrelation estimate, normalized so γ(0) = 1.
///
/// Computed through FFT so long chains with large lag windows stay cheap;
/// identical (to rounding) to the direct sum
/// `γ(k) = Σ_{t}(x_t−x̄)(x_{t+k}−x̄)/N / γ̂(0)`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if max_lag == 0 {
        return Err(Error::invalid("acf: max_lag must be at least 1"));
    }
    if n <= max_lag {
        return Err(Error::invalid(format!(
            "acf: series length {n} must exceed max_lag {max_lag}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut padded = vec![Complex::new(0.0, 0.0); (2 * n).next_power_of_two()];
    for (slot, &x) in padded.iter_mut().zip(series) {
        slot.re = x - mean;
    }
    let m = padded.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut padded);
    for c in padded.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(m).process(&mut padded);
    let c0 = padded[0].re;
    if c0 <= 0.0 || !c0.is_finite() {
        return Err(Error::Diagnostics(
            "series has zero variance; autocorrelation is degenerate".into(),
        ));
    }
    Ok((0..=max_lag).map(|k| padded[k].re / c0).collect())
}

/// Default Bartlett window: `min(3000, ⌊N/10⌋)`, floored at 1.
pub fn default_bartlett_window(n: usize) -> usize {
    (n / 10).clamp(1, 3000)
}

/// Bartlett-window effective sample size:
/// `ESS = N / (1 + 2 Σ_{k=1}^{M} (1 − k/M) γ(k))`, denominator floored at
/// 1e-8.
pub fn ess_bartlett(series: &[f64], window: usize) -> Result<f64> {
    let gamma = acf(series, window)?;
    Ok(ess_bartlett_from_acf(series.len(), &gamma, window))
}

/// The Bartlett formula applied to precomputed autocorrelations.
pub fn ess_bartlett_from_acf(n: usize, gamma: &[f64], window: usize) -> f64 {
    let m = window as f64;
    let tau: f64 = 1.0
        + 2.0
            * (1..=window)
                .map(|k| (1.0 - k as f64 / m) * gamma[k])
                .sum::<f64>();
    n as f64 / tau.max(1e-8)
}

/// Options for the multivariate batch-mean estimator.
#[derive(Debug, Clone, Copy)]
pub struct MbmOptions {
    /// Batch count K; defaults to ⌊√N⌋.
    pub batches: Option<usize>,
    /// Fall back to the per-coordinate median when the determinant ratio is
    /// degenerate (or the dimension is large).
    pub fallback: bool,
    /// Use the batch-size-scaled `N·(|Σ̂|/|b·Λ̂|)^{1/D}` variant instead of
    /// the printed `K·(|Λ̂|/|Σ̂|)^D` form.
    pub standard_variant: bool,
}

impl Default for MbmOptions {
    fn default() -> Self {
        MbmOptions {
            batches: None,
            fallback: true,
            standard_variant: false,
        }
    }
}

/// Dimension above which the determinant form is abandoned for the
/// per-coordinate median fallback.
const MBM_LARGE_DIM: usize = 12;

/// Multivariate batch-mean ESS over an N×D sample matrix (row-major rows).
pub fn ess_mbm(samples: &[&[f64]], options: MbmOptions) -> Result<f64> {
    let n = samples.len();
    if n < 4 {
        return Err(Error::invalid("ess_mbm: need at least 4 samples"));
    }
    let d = samples[0].len();
    let k = options.batches.unwrap_or_else(|| (n as f64).sqrt().floor() as usize);
    if k < 2 || n < 2 * k {
        return Err(Error::invalid(format!(
            "ess_mbm: batch count {k} needs 2 ≤ K and N ≥ 2K (N = {n})"
        )));
    }
    let batch_len = n / k;
    let used = batch_len * k;

    let mean = {
        let mut m = vec![0.0; d];
        for row in &samples[..used] {
            for (acc, &x) in m.iter_mut().zip(*row) {
                *acc += x;
            }
        }
        m.iter_mut().for_each(|x| *x /= used as f64);
        m
    };

    // sample covariance Σ̂ of the draws
    let mut sigma = Matrix::zeros(d, d);
    for row in &samples[..used] {
        for i in 0..d {
            let ri = row[i] - mean[i];
            for j in i..d {
                sigma[(i, j)] += ri * (row[j] - mean[j]);
            }
        }
    }
    // covariance Λ̂ of the K batch means
    let mut lambda = Matrix::zeros(d, d);
    for b in 0..k {
        let mut bm = vec![0.0; d];
        for row in &samples[b * batch_len..(b + 1) * batch_len] {
            for (acc, &x) in bm.iter_mut().zip(*row) {
                *acc += x;
            }
        }
        for (i, x) in bm.iter_mut().enumerate() {
            *x = *x / batch_len as f64 - mean[i];
        }
        for i in 0..d {
            for j in i..d {
                lambda[(i, j)] += bm[i] * bm[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            sigma[(i, j)] = sigma[(j, i)];
            lambda[(i, j)] = lambda[(j, i)];
        }
    }
    sigma /= (used - 1) as f64;
    lambda /= (k - 1) as f64;

    if options.fallback && d > MBM_LARGE_DIM {
        return per_coordinate_median(k, batch_len, &sigma, &lambda);
    }
    let value = if options.standard_variant {
        let det_sigma = sigma.determinant();
        let det_blambda = (lambda.clone() * batch_len as f64).determinant();
        if det_sigma <= 0.0 || det_blambda <= 0.0 {
            f64::NAN
        } else {
            used as f64 * (det_sigma / det_blambda).powf(1.0 / d as f64)
        }
    } else {
        ess_mbm_from_cov(&lambda, &sigma, k)
    };
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else if options.fallback {
        per_coordinate_median(k, batch_len, &sigma, &lambda)
    } else {
        Err(Error::Numeric(
            "ess_mbm: singular covariance and fallback disabled".into(),
        ))
    }
}

/// The printed determinant form `K·(|Λ̂|/|Σ̂|)^D`, exactly as stated.
pub fn ess_mbm_from_cov(lambda: &Matrix, sigma: &Matrix, k: usize) -> f64 {
    let d = sigma.nrows() as f64;
    let det_lambda = lambda.determinant();
    let det_sigma = sigma.determinant();
    if det_sigma <= 0.0 || det_lambda <= 0.0 {
        return f64::NAN;
    }
    k as f64 * (det_lambda / det_sigma).powf(d)
}

fn per_coordinate_median(
    k: usize,
    batch_len: usize,
    sigma: &Matrix,
    lambda: &Matrix,
) -> Result<f64> {
    let d = sigma.nrows();
    let mut per_dim = Vec::with_capacity(d);
    for j in 0..d {
        let var = sigma[(j, j)];
        let bvar = lambda[(j, j)] * batch_len as f64;
        if var > 0.0 && bvar > 0.0 {
            per_dim.push((k * batch_len) as f64 * var / bvar);
        }
    }
    if per_dim.is_empty() {
        return Err(Error::Numeric(
            "ess_mbm: every coordinate is degenerate".into(),
        ));
    }
    per_dim.sort_by(f64::total_cmp);
    let mid = per_dim.len() / 2;
    Ok(if per_dim.len() % 2 == 1 {
        per_dim[mid]
    } else {
        0.5 * (per_dim[mid - 1] + per_dim[mid])
    })
}

/// Histogram total-variation distance between samples and the target,
/// `TV = ½ Σ_bins |p̂_b − π_b|`, with the target mass per bin from midpoint
/// quadrature renormalized over the box. Supports d ∈ {1, 2}.
pub fn tv_histogram(
    samples: &[&[f64]],
    target: &TargetDensity,
    bounds: &[(f64, f64)],
    bins_per_dim: usize,
) -> Result<f64> {
    let d = bounds.len();
    if d == 0 || d > 2 {
        return Err(Error::invalid(format!(
            "tv_histogram supports 1 or 2 dimensions, got {d}"
        )));
    }
    if bins_per_dim == 0 {
        return Err(Error::invalid("tv_histogram: need at least one bin"));
    }
    if target.dim() != d {
        return Err(Error::invalid(format!(
            "tv_histogram: box is {d}-dimensional but the target has dim {}",
            target.dim()
        )));
    }
    for &(lo, hi) in bounds {
        if !(hi > lo) {
            return Err(Error::invalid("tv_histogram: empty box interval"));
        }
    }
    let total_bins = bins_per_dim.pow(d as u32);
    let widths: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| (hi - lo) / bins_per_dim as f64)
        .collect();

    let bin_of = |x: &[f64]| -> Option<usize> {
        let mut idx = 0usize;
        for j in 0..d {
            let (lo, hi) = bounds[j];
            if x[j] < lo || x[j] > hi {
                return None;
            }
            let mut b = ((x[j] - lo) / widths[j]) as usize;
            if b == bins_per_dim {
                b -= 1; // right edge belongs to the last bin
            }
            idx = idx * bins_per_dim + b;
        }
        Some(idx)
    };

    let mut counts = vec![0u64; total_bins];
    let mut inside = 0u64;
    for row in samples {
        if let Some(b) = bin_of(row) {
            counts[b] += 1;
            inside += 1;
        }
    }
    if inside == 0 {
        return Err(Error::Diagnostics(
            "tv_histogram: every sample lies outside the box".into(),
        ));
    }

    // unnormalized target mass per bin by a composite midpoint rule; coarse
    // binnings are subdivided so the evaluation pitch stays at or below
    // 1/100 of the box per dimension
    let sub = 100usize.div_ceil(bins_per_dim).max(1);
    let mut mass = vec![0.0f64; total_bins];
    let mut total_mass = 0.0;
    let mut mid = Point::zeros(d);
    let sub_cells = sub.pow(d as u32);
    for (b, m) in mass.iter_mut().enumerate() {
        let mut bin_idx = [0usize; 2];
        let mut rem = b;
        for j in (0..d).rev() {
            bin_idx[j] = rem % bins_per_dim;
            rem /= bins_per_dim;
        }
        let mut acc = 0.0;
        for cell in 0..sub_cells {
            let mut c = cell;
            for j in (0..d).rev() {
                let sj = c % sub;
                c /= sub;
                let pitch = widths[j] / sub as f64;
                mid[j] = bounds[j].0 + bin_idx[j] as f64 * widths[j] + (sj as f64 + 0.5) * pitch;
            }
            acc += (-target.potential(&mid)).exp();
        }
        *m = acc;
        total_mass += *m;
    }
    if !(total_mass > 0.0) || !total_mass.is_finite() {
        return Err(Error::Diagnostics(
            "tv_histogram: target mass over the box is degenerate".into(),
        ));
    }

    let mut tv = 0.0;
    for (c, m) in counts.iter().zip(&mass) {
        tv += (*c as f64 / inside as f64 - m / total_mass).abs();
    }
    Ok(0.5 * tv)
}

/// Escape-time report: gaps between consecutive mode switches.
#[derive(Debug, Clone, Serialize)]
pub struct EscapeReport {
    /// Iteration gaps between consecutive switches; entering the initial
    /// mode at step 0 counts as the first switch.
    pub gaps: Vec<u64>,
    pub mean: Option<f64>,
    /// Set when fewer than two switches were seen, making gaps undefined.
    pub too_few_switches: bool,
    /// Steps after the last observed switch (censored residence time).
    pub tail_steps: u64,
}

/// Computes escape times from a trace under a mode classifier.
pub fn escape_times(
    trace: &ChainTrace,
    classifier: impl Fn(&[f64]) -> i32,
) -> Result<EscapeReport> {
    if trace.is_empty() {
        return Err(Error::invalid("escape_times: empty trace"));
    }
    let mut switches: Vec<u64> = vec![0];
    let mut prev = classifier(trace.state(0));
    for i in 1..trace.len() {
        let label = classifier(trace.state(i));
        if label != prev {
            switches.push(i as u64);
            prev = label;
        }
    }
    let tail_steps = (trace.len() as u64 - 1) - switches.last().copied().unwrap_or(0);
    if switches.len() < 2 {
        return Ok(EscapeReport {
            gaps: Vec::new(),
            mean: None,
            too_few_switches: true,
            tail_steps,
        });
    }
    let gaps: Vec<u64> = switches.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<u64>() as f64 / gaps.len() as f64;
    Ok(EscapeReport {
        gaps,
        mean: Some(mean),
        too_few_switches: false,
        tail_steps,
    })
}

/// Mode classifier for the bimodal presets: the sign of z₁.
pub fn sign_of_first_coordinate(state: &[f64]) -> i32 {
    if state[0] >= 0.0 {
        1
    } else {
        -1
    }
}

/// Flat report serialized next to each trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub ess_bw_per_dim: Vec<f64>,
    pub ess_bw_min: f64,
    pub ess_mbm: Option<f64>,
    pub tv: Option<f64>,
    pub mean_escape_time: Option<f64>,
    pub escape_count: Option<usize>,
    pub acceptance_rate: f64,
    pub n_samples: usize,
    pub wall_time_seconds: Option<f64>,
    #[serde(skip, default)]
    pub acf_per_dim: Vec<Vec<f64>>,
}

/// Knobs for [`analyze_trace`].
#[derive(Debug, Clone)]
pub struct DiagnosticsOptions {
    /// Bartlett window M; `None` uses [`default_bartlett_window`].
    pub ess_window: Option<usize>,
    /// Batch count for the MBM estimator; `None` uses ⌊√N⌋.
    pub mbm_batches: Option<usize>,
    pub mbm_standard_variant: bool,
    /// Histogram box; `None` uses the target's support box.
    pub tv_box: Option<Vec<(f64, f64)>>,
    pub tv_bins_per_dim: usize,
    /// Lags kept in the in-memory ACF.
    pub acf_lags: usize,
    /// Escape-time classifier toggle (sign of z₁).
    pub escape_by_sign_z1: bool,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            ess_window: None,
            mbm_batches: None,
            mbm_standard_variant: false,
            tv_box: None,
            tv_bins_per_dim: 100,
            acf_lags: 50,
            escape_by_sign_z1: false,
        }
    }
}

/// Runs the full diagnostic battery over a trace. `target` enables the TV
/// distance; without it (or for dim > 2) TV is left blank.
pub fn analyze_trace(
    trace: &ChainTrace,
    target: Option<&TargetDensity>,
    options: &DiagnosticsOptions,
) -> Result<DiagnosticsReport> {
    let n = trace.len();
    if n < 4 {
        return Err(Error::invalid("analyze_trace: trace too short"));
    }
    let window = options
        .ess_window
        .unwrap_or_else(|| default_bartlett_window(n))
        .min(n - 1);
    let acf_lags = options.acf_lags.min(n - 1).max(1);

    let mut ess_per_dim = Vec::with_capacity(trace.dim());
    let mut acf_per_dim = Vec::with_capacity(trace.dim());
    for j in 0..trace.dim() {
        let series = trace.coordinate(j);
        let gamma = acf(&series, window.max(acf_lags))?;
        ess_per_dim.push(ess_bartlett_from_acf(n, &gamma, window));
        acf_per_dim.push(gamma[..=acf_lags].to_vec());
    }
    let ess_bw_min = ess_per_dim.iter().cloned().fold(f64::INFINITY, f64::min);

    let rows: Vec<&[f64]> = trace.states().collect();
    let ess_mbm_value = ess_mbm(
        &rows,
        MbmOptions {
            batches: options.mbm_batches,
            fallback: true,
            standard_variant: options.mbm_standard_variant,
        },
    )
    .ok();

    let tv = match (target, trace.dim()) {
        (Some(t), 1 | 2) => {
            let bounds: Option<Vec<(f64, f64)>> = options
                .tv_box
                .clone()
                .or_else(|| t.support_box().map(|b| b.to_vec()));
            match bounds {
                Some(b) => Some(tv_histogram(&rows, t, &b, options.tv_bins_per_dim)?),
                None => None,
            }
        }
        _ => None,
    };

    let escape = if options.escape_by_sign_z1 {
        Some(escape_times(trace, sign_of_first_coordinate)?)
    } else {
        None
    };

    Ok(DiagnosticsReport {
        ess_bw_per_dim: ess_per_dim,
        ess_bw_min,
        ess_mbm: ess_mbm_value,
        tv,
        mean_escape_time: escape.as_ref().and_then(|e| e.mean),
        escape_count: escape.as_ref().map(|e| e.gaps.len()),
        acceptance_rate: trace.acceptance_rate(),
        n_samples: n,
        wall_time_seconds: None,
        acf_per_dim,
    })
}
