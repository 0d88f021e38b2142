//! Fit quality of simulated curves: Pearson correlation, second-peak timing
//! precision and corpus-averaged curves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bass::simulate;
use crate::types::{TimeSeries, TwoBeautyProfile, TwoStageBassModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("at least 2 points are required, got {0}")]
    TooShort(usize),
    #[error("series has zero variance")]
    DegenerateSeries,
}

/// Product-moment correlation of two equally long series.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(EvalError::TooShort(a.len()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(EvalError::DegenerateSeries);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub meme_id: String,
    pub pearson_r: f64,
    /// |simulated t2 − observed t2| in ticks.
    pub peak_error_k: usize,
}

/// Earliest tick at or after `from` holding the maximum of `values[from..]`.
pub fn argmax_from(values: &[f64], from: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (t, &v) in values.iter().enumerate().skip(from) {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(t);
        }
    }
    best
}

/// Observed and simulated popularity on the axis starting at `ta1`,
/// truncated to the shorter of the two.
pub fn aligned_curves(
    series: &TimeSeries,
    profile: &TwoBeautyProfile,
    model: &TwoStageBassModel,
) -> (Vec<f64>, Vec<f64>) {
    let observed = &series.values()[profile.stamps().ta1..];
    let simulated = simulate(model).popularity();
    let n = observed.len().min(simulated.len());
    (observed[..n].to_vec(), simulated[..n].to_vec())
}

/// Compares a fitted model with the meme it was fitted to.
pub fn evaluate_fit(
    series: &TimeSeries,
    profile: &TwoBeautyProfile,
    model: &TwoStageBassModel,
) -> Result<FitReport, EvalError> {
    let (observed, simulated) = aligned_curves(series, profile, model);
    let pearson_r = pearson(&observed, &simulated)?;
    let st = profile.stamps();
    let observed_t2 = st.t2 - st.ta1;
    let full = simulate(model).popularity();
    let simulated_t2 = argmax_from(&full, model.g2.onset).unwrap_or(model.horizon);
    Ok(FitReport {
        meme_id: profile.meme_id().to_string(),
        pearson_r,
        peak_error_k: simulated_t2.abs_diff(observed_t2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    pub count: usize,
    pub fraction: f64,
}

/// Share of reports whose second-peak error is at most `k`; `None` for an
/// empty collection.
pub fn precision_at_k(reports: &[FitReport], k: usize) -> Option<Precision> {
    if reports.is_empty() {
        return None;
    }
    let count = reports.iter().filter(|r| r.peak_error_k <= k).count();
    Some(Precision {
        count,
        fraction: count as f64 / reports.len() as f64,
    })
}

/// Tick-wise mean over the curves that are nonzero at that tick. Curves
/// shorter than the longest count as absent past their end.
pub fn averaged_curve<S: AsRef<[f64]>>(curves: &[S]) -> Vec<f64> {
    let len = curves.iter().map(|c| c.as_ref().len()).max().unwrap_or(0);
    (0..len)
        .map(|t| {
            let (sum, n) = curves
                .iter()
                .filter_map(|c| c.as_ref().get(t).copied())
                .filter(|&v| v != 0.0)
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                0.0
            } else {
                sum / n as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub per_meme: Vec<FitReport>,
    pub p_at_k: BTreeMap<String, Precision>,
    pub mean_r: Option<f64>,
    #[serde(rename = "frac_r_gt_0.4")]
    pub frac_r_gt_0_4: Option<f64>,
}

/// Corpus summary; `reports` should already be in canonical order.
pub fn summarize(reports: Vec<FitReport>) -> EvalSummary {
    let p_at_k = (0..=3)
        .filter_map(|k| precision_at_k(&reports, k).map(|p| (k.to_string(), p)))
        .collect();
    let n = reports.len() as f64;
    let (mean_r, frac) = if reports.is_empty() {
        (None, None)
    } else {
        let mean = reports.iter().map(|r| r.pearson_r).sum::<f64>() / n;
        let above = reports.iter().filter(|r| r.pearson_r > 0.4).count() as f64 / n;
        (Some(mean), Some(above))
    };
    EvalSummary {
        per_meme: reports,
        p_at_k,
        mean_r,
        frac_r_gt_0_4: frac,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(k: usize, r: f64) -> FitReport {
        FitReport {
            meme_id: "m".into(),
            pearson_r: r,
            peak_error_k: k,
        }
    }

    /// Textbook formula with the raw sums, independent of `pearson`.
    fn oracle(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let sa: f64 = a.iter().sum();
        let sb: f64 = b.iter().sum();
        let sab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let saa: f64 = a.iter().map(|x| x * x).sum();
        let sbb: f64 = b.iter().map(|y| y * y).sum();
        (n * sab - sa * sb) / ((n * saa - sa * sa).sqrt() * (n * sbb - sb * sb).sqrt())
    }

    #[test]
    fn pearson_examples() {
        let a = [1.0, 3.0, 2.0, 5.0];
        assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((pearson(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
        let b = [2.0, 1.0, 4.0, 3.0];
        assert!((pearson(&a, &b).unwrap() - oracle(&a, &b)).abs() < 1e-12);
        assert_eq!(pearson(&a, &[1.0; 4]), Err(EvalError::DegenerateSeries));
        assert_eq!(pearson(&a, &b[..3]), Err(EvalError::LengthMismatch(4, 3)));
    }

    #[test]
    fn precision_examples() {
        let reps = vec![report(0, 1.0), report(0, 1.0)];
        assert_eq!(precision_at_k(&reps, 0).unwrap().fraction, 1.0);
        let reps = vec![report(0, 1.0), report(2, 1.0), report(5, 1.0), report(1, 1.0)];
        assert_eq!(precision_at_k(&reps, 1).unwrap().count, 2);
        assert_eq!(precision_at_k(&reps, 2).unwrap().fraction, 0.75);
        assert_eq!(precision_at_k(&[], 1), None);
    }

    #[test]
    fn averaged_curve_examples() {
        let one = vec![vec![1.0, 0.0, 3.0]];
        assert_eq!(averaged_curve(&one), vec![1.0, 0.0, 3.0]);
        assert_eq!(averaged_curve(&[vec![4.0], vec![0.0]]), vec![4.0]);
        assert_eq!(averaged_curve(&[[2.0], [4.0], [6.0]]), vec![4.0]);
        assert_eq!(averaged_curve(&[vec![1.0, 2.0], vec![3.0]]), vec![2.0, 2.0]);
    }

    #[test]
    fn summary_fields() {
        let s = summarize(vec![report(0, 0.9), report(3, 0.2)]);
        assert_eq!(s.p_at_k.len(), 4);
        assert_eq!(s.p_at_k["0"].count, 1);
        assert_eq!(s.p_at_k["3"].fraction, 1.0);
        assert!((s.mean_r.unwrap() - 0.55).abs() < 1e-15);
        assert_eq!(s.frac_r_gt_0_4, Some(0.5));
        let json = serde_json::to_value(&s).unwrap();
        assert!(json.get("frac_r_gt_0.4").is_some());
    }

    #[test]
    fn argmax_from_ties_earliest() {
        let v = [9.0, 1.0, 5.0, 5.0, 2.0];
        assert_eq!(argmax_from(&v, 1), Some(2));
        assert_eq!(argmax_from(&v, 5), None);
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (3usize..30).prop_flat_map(|n| {
            (
                prop::collection::vec(-100.0f64..100.0, n),
                prop::collection::vec(-100.0f64..100.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn pearson_affine_invariant((a, b) in arb_pair(), s in 0.1f64..10.0, c in -50.0f64..50.0) {
            if let Ok(r) = pearson(&a, &b) {
                let a2: Vec<f64> = a.iter().map(|x| s * x + c).collect();
                let r2 = pearson(&a2, &b).unwrap();
                prop_assert!((r - r2).abs() < 1e-9);
                prop_assert!((r - oracle(&a, &b)).abs() < 1e-9);
            }
        }

        #[test]
        fn precision_monotone(ks in prop::collection::vec(0usize..20, 1..40)) {
            let reps: Vec<FitReport> = ks.iter().map(|&k| report(k, 0.5)).collect();
            let mut last = 0.0;
            for k in 0..=20 {
                let f = precision_at_k(&reps, k).unwrap().fraction;
                prop_assert!(f >= last);
                last = f;
            }
            prop_assert_eq!(last, 1.0);
        }

        #[test]
        fn averaged_curve_permutation_free(
            curves in prop::collection::vec(prop::collection::vec(0u8..4, 5), 1..6),
        ) {
            let a: Vec<Vec<f64>> = curves
                .iter()
                .map(|c| c.iter().map(|&x| f64::from(x)).collect())
                .collect();
            let mut b = a.clone();
            b.reverse();
            let (x, y) = (averaged_curve(&a), averaged_curve(&b));
            for (p, q) in x.iter().zip(&y) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }
    }
}
