//! Corpus-level estimators: wake-gap distribution, the m1–m2 power law,
//! rising velocities, coefficient distributions and imitation pressure.

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::pearson;
use crate::types::{TimeSeries, TwoBeautyProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("insufficient sample: {got} values, at least {needed} required")]
    InsufficientSample { needed: usize, got: usize },
    #[error("sample has zero variance")]
    ZeroVariance,
    #[error("invalid value {0} in sample")]
    InvalidValue(f64),
    #[error("tick {t_n} lies outside the awake window [{ta}, {tf}]")]
    OutsideWindow { t_n: usize, ta: usize, tf: usize },
}

/// Which of the two wake ups a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generation {
    First,
    Second,
}

impl Generation {
    pub fn index(self) -> usize {
        match self {
            Generation::First => 0,
            Generation::Second => 1,
        }
    }

    /// `(ta, t, tf)` of this wake up.
    pub fn window(self, profile: &TwoBeautyProfile) -> (usize, usize, usize) {
        let st = profile.stamps();
        match self {
            Generation::First => (st.ta1, st.t1, st.tf1),
            Generation::Second => (st.ta2, st.t2, st.tf2),
        }
    }
}

pub fn wake_gap(profile: &TwoBeautyProfile) -> usize {
    profile.gap()
}

/// Density histogram: `densities[i]` is the fraction of the sample in bin
/// `i` divided by `width`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Histogram {
    pub centers: Vec<f64>,
    pub densities: Vec<f64>,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialFit {
    pub lambda: f64,
    /// Pearson r between the histogram and the fitted density; `None` when
    /// the histogram has a single bin.
    pub r: Option<f64>,
    pub histogram: Histogram,
}

fn check_sample(values: &[f64], needed: usize) -> Result<(), StatsError> {
    if values.len() < needed {
        return Err(StatsError::InsufficientSample {
            needed,
            got: values.len(),
        });
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(StatsError::InvalidValue(bad));
    }
    Ok(())
}

/// Maximum-likelihood exponential rate `1/mean`, with a unit-width histogram
/// centred on integers for the goodness-of-fit correlation.
pub fn fit_exponential(gaps: &[f64]) -> Result<ExponentialFit, StatsError> {
    check_sample(gaps, 10)?;
    if let Some(&bad) = gaps.iter().find(|&&g| g <= 0.0) {
        return Err(StatsError::InvalidValue(bad));
    }
    let n = gaps.len() as f64;
    let lambda = n / gaps.iter().sum::<f64>();

    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min).round() as i64;
    let hi = gaps.iter().copied().fold(0.0, f64::max).round() as i64;
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for &g in gaps {
        counts[(g.round() as i64 - lo) as usize] += 1;
    }
    let centers: Vec<f64> = (lo..=hi).map(|j| j as f64).collect();
    let densities: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let fitted: Vec<f64> = centers.iter().map(|&x| lambda * (-lambda * x).exp()).collect();
    let r = pearson(&densities, &fitted).ok();
    Ok(ExponentialFit {
        lambda,
        r,
        histogram: Histogram {
            centers,
            densities,
            width: 1.0,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub alpha: f64,
    /// Intercept of the log-log line, i.e. the log prefactor.
    pub intercept: f64,
    pub r: f64,
    pub n_pairs: usize,
}

/// Least-squares line through `(ln m1, ln m2)`; the slope is the exponent.
pub fn fit_power_law(m1s: &[f64], m2s: &[f64]) -> Result<PowerLawFit, StatsError> {
    let mut xs = Vec::with_capacity(m1s.len());
    let mut ys = Vec::with_capacity(m1s.len());
    for (&a, &b) in m1s.iter().zip(m2s) {
        if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
            xs.push(a.ln());
            ys.push(b.ln());
        } else {
            warn!("skipping non-positive mass pair ({a}, {b})");
        }
    }
    if xs.len() < 10 {
        return Err(StatsError::InsufficientSample {
            needed: 10,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let alpha = sxy / sxx;
    let r = pearson(&xs, &ys).map_err(|_| StatsError::ZeroVariance)?;
    Ok(PowerLawFit {
        alpha,
        intercept: my - alpha * mx,
        r,
        n_pairs: xs.len(),
    })
}

/// `(S(t) − S(ta)) / (t − ta)` for the chosen wake up.
pub fn rising_velocity(series: &TimeSeries, profile: &TwoBeautyProfile, generation: Generation) -> f64 {
    let (ta, t, _) = generation.window(profile);
    series.rise_rate(ta, t)
}

/// `y = a exp(−(x − μ)² / (2σ²))` fitted to a density histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub a: f64,
    pub mu: f64,
    pub sigma: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    #[serde(skip)]
    pub histogram: Histogram,
}

pub fn gaussian(x: f64, a: f64, mu: f64, sigma: f64) -> f64 {
    a * (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp()
}

/// Histogram with `ceil(√N)` equal bins over `[min, max]`.
pub fn sqrt_histogram(values: &[f64]) -> Result<Histogram, StatsError> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Err(StatsError::ZeroVariance);
    }
    let bins = (values.len() as f64).sqrt().ceil() as usize;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = values.len() as f64;
    Ok(Histogram {
        centers: (0..bins).map(|i| lo + (i as f64 + 0.5) * width).collect(),
        densities: counts.iter().map(|&c| c as f64 / (n * width)).collect(),
        width,
    })
}

/// Solves the 3x3 system `m x = b` by Gaussian elimination with partial
/// pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}

/// Sum that adds mirrored terms `i` and `n − 1 − i` first, so terms that
/// are exact negatives of their mirror cancel exactly.
fn mirrored_sum(n: usize, term: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..n / 2 {
        acc += term(i) + term(n - 1 - i);
    }
    if n % 2 == 1 {
        acc += term(n / 2);
    }
    acc
}

fn sse(xs: &[f64], ys: &[f64], th: [f64; 3]) -> f64 {
    mirrored_sum(xs.len(), |i| (ys[i] - gaussian(xs[i], th[0], th[1], th[2])).powi(2))
}

/// Box constraints on `[a, μ, σ]`.
struct Bounds {
    mu: (f64, f64),
    sigma: (f64, f64),
}

impl Bounds {
    fn clamp(&self, th: [f64; 3]) -> [f64; 3] {
        [
            th[0].max(0.0),
            th[1].clamp(self.mu.0, self.mu.1),
            th[2].clamp(self.sigma.0, self.sigma.1),
        ]
    }
}

/// Levenberg–Marquardt least squares of a Gaussian on `(xs, ys)`, started
/// from `init = [a, μ, σ]`. Steps are projected onto `bounds`, which keeps
/// flat directions (e.g. σ on a two-point histogram) from running away.
/// With `xs` symmetric about 0 and symmetric `ys`, a start at μ = 0 stays
/// there exactly.
fn levenberg_marquardt(xs: &[f64], ys: &[f64], init: [f64; 3], bounds: &Bounds) -> [f64; 3] {
    let n = xs.len();
    let mut th = bounds.clamp(init);
    let mut cost = sse(xs, ys, th);
    let mut damping = 1e-3;
    for _ in 0..500 {
        let [a, mu, s] = th;
        let rows: Vec<([f64; 3], f64)> = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let e = gaussian(x, 1.0, mu, s);
                let d = x - mu;
                let g = [e, a * e * d / (s * s), a * e * d * d / (s * s * s)];
                (g, y - a * e)
            })
            .collect();
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for i in 0..3 {
            jtr[i] = mirrored_sum(n, |k| rows[k].0[i] * rows[k].1);
            for j in 0..3 {
                jtj[i][j] = mirrored_sum(n, |k| rows[k].0[i] * rows[k].0[j]);
            }
        }
        let mut improved = false;
        while damping < 1e12 {
            let mut lhs = jtj;
            for (i, row) in lhs.iter_mut().enumerate() {
                row[i] += damping * jtj[i][i].max(1e-300);
            }
            let Some(step) = solve3(lhs, jtr) else {
                damping *= 10.0;
                continue;
            };
            let cand = bounds.clamp([th[0] + step[0], th[1] + step[1], th[2] + step[2]]);
            let c = sse(xs, ys, cand);
            if c.is_finite() && c < cost {
                let rel = (cost - c) / cost.max(1e-300);
                th = cand;
                cost = c;
                damping = (damping / 10.0).max(1e-12);
                improved = rel > 1e-15;
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    th
}

/// Least-squares Gaussian fit to the `ceil(√N)`-bin density histogram.
pub fn fit_gaussian(values: &[f64]) -> Result<GaussianFit, StatsError> {
    check_sample(values, 30)?;
    let histogram = sqrt_histogram(values)?;
    let bins = histogram.centers.len();
    let w = histogram.width;
    let range = w * bins as f64;
    let mid = histogram.centers[0] - w / 2.0 + range / 2.0;
    // Centred coordinates that are exactly antisymmetric across the range.
    let xs: Vec<f64> = (0..bins)
        .map(|i| (i as f64 + 0.5 - bins as f64 / 2.0) * w)
        .collect();
    let ys = &histogram.densities;
    let mass = mirrored_sum(bins, |i| ys[i]);
    let mean = mirrored_sum(bins, |i| xs[i] * ys[i]) / mass;
    let var = mirrored_sum(bins, |i| (xs[i] - mean).powi(2) * ys[i]) / mass;
    let peak = ys.iter().copied().fold(0.0, f64::max);
    let bounds = Bounds {
        mu: (-range / 2.0, range / 2.0),
        sigma: (w / 2.0, range),
    };
    let [a, mu, sigma] = levenberg_marquardt(&xs, ys, [peak, mean, var.sqrt()], &bounds);
    let my = mass / bins as f64;
    let ss_tot = mirrored_sum(bins, |i| (ys[i] - my).powi(2));
    let ss_res = sse(&xs, ys, [a, mu, sigma]);
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    Ok(GaussianFit {
        a,
        mu: mid + mu,
        sigma,
        r2,
        histogram,
    })
}

/// `(q/m) Σ_{t=ta}^{t_n} S(t)` for the chosen wake up.
pub fn imitation_pressure(
    series: &TimeSeries,
    profile: &TwoBeautyProfile,
    generation: Generation,
    q: f64,
    m: f64,
    t_n: usize,
) -> Result<f64, StatsError> {
    let (ta, _, tf) = generation.window(profile);
    if t_n < ta || t_n > tf {
        return Err(StatsError::OutsideWindow { t_n, ta, tf });
    }
    if !(m > 0.0) {
        return Err(StatsError::InvalidValue(m));
    }
    Ok(q / m * series.window_sum(ta, t_n))
}

/// Per-meme inputs to the corpus summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileStats {
    pub gap: usize,
    pub m: [f64; 2],
    pub v: [f64; 2],
    /// Innovation coefficients estimated from the meme itself.
    pub p_observed: Option<[f64; 2]>,
    /// Imitation coefficients of the fitted model.
    pub q_fitted: Option<[f64; 2]>,
}

impl ProfileStats {
    pub fn from_profile(profile: &TwoBeautyProfile) -> Self {
        let ms = profile.measures();
        Self {
            gap: profile.gap(),
            m: [ms.m1, ms.m2],
            v: [ms.v1, ms.v2],
            p_observed: None,
            q_fitted: None,
        }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub lambda: f64,
    pub lambda_fit_R: Option<f64>,
    pub alpha_m: f64,
    pub alpha_fit_R: f64,
    pub velocity_ratio_mean: f64,
    pub p_gauss: [Option<GaussianFit>; 2],
    pub q_mean: [Option<f64>; 2],
    pub n_profiles: usize,
}

/// Everything computed for a corpus, including the data behind the plots.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub report: CorpusReport,
    pub gaps: ExponentialFit,
    pub power_law: PowerLawFit,
    pub masses: Vec<[f64; 2]>,
    pub velocities: Vec<[f64; 2]>,
    pub p_values: [Vec<f64>; 2],
    pub q_values: [Vec<f64>; 2],
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Summarises a corpus. Input order only matters through floating-point
/// summation, so callers should pass profiles in a canonical order.
pub fn corpus_stats(items: &[ProfileStats]) -> Result<CorpusStats, StatsError> {
    if items.len() < 10 {
        return Err(StatsError::InsufficientSample {
            needed: 10,
            got: items.len(),
        });
    }
    let gap_values: Vec<f64> = items.iter().map(|i| i.gap as f64).collect();
    let gaps = fit_exponential(&gap_values)?;
    let m1s: Vec<f64> = items.iter().map(|i| i.m[0]).collect();
    let m2s: Vec<f64> = items.iter().map(|i| i.m[1]).collect();
    let power_law = fit_power_law(&m1s, &m2s)?;
    let ratios: Vec<f64> = items
        .iter()
        .filter(|i| i.v[0] > 0.0)
        .map(|i| i.v[1] / i.v[0])
        .collect();
    let velocity_ratio_mean = mean(&ratios).unwrap_or(f64::NAN);

    let mut p_values = [Vec::new(), Vec::new()];
    let mut q_values = [Vec::new(), Vec::new()];
    for it in items {
        for g in 0..2 {
            if let Some(p) = it.p_observed {
                p_values[g].push(p[g]);
            }
            if let Some(q) = it.q_fitted {
                q_values[g].push(q[g]);
            }
        }
    }
    let p_gauss = [0, 1].map(|g| match fit_gaussian(&p_values[g]) {
        Ok(fit) => Some(fit),
        Err(e) => {
            warn!("no Gaussian fit of p{}: {e}", g + 1);
            None
        }
    });
    let q_mean = [mean(&q_values[0]), mean(&q_values[1])];

    Ok(CorpusStats {
        report: CorpusReport {
            lambda: gaps.lambda,
            lambda_fit_R: gaps.r,
            alpha_m: power_law.alpha,
            alpha_fit_R: power_law.r,
            velocity_ratio_mean,
            p_gauss,
            q_mean,
            n_profiles: items.len(),
        },
        gaps,
        power_law,
        masses: items.iter().map(|i| i.m).collect(),
        velocities: items.iter().map(|i| i.v).collect(),
        p_values,
        q_values,
    })
}
