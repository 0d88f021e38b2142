//! Per-meme steps and order-independent corpus reductions shared by the CLI
//! and the browser demo. Callers are free to run the per-meme steps in
//! parallel; the reductions sort by meme_id before combining.

use crate::bass::{fit, observed_p, FitError, FittedModel, PMode};
use crate::beauty::{identify_two_beauties, Rejection};
use crate::eval::{evaluate_fit, FitReport};
use crate::ingest::Corpus;
use crate::peaks::PeakParams;
use crate::report::ModelRecord;
use crate::types::{TimeSeries, TwoBeautyProfile};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Detection {
    pub profiles: Vec<TwoBeautyProfile>,
    pub rejections: Vec<Rejection>,
}

pub fn detect_one(
    series: &TimeSeries,
    params: &PeakParams,
    alpha: f64,
) -> Result<TwoBeautyProfile, Rejection> {
    identify_two_beauties(series, params, alpha)
}

/// Splits per-meme outcomes into accepted and rejected, sorted by meme_id.
pub fn collect_detection(results: Vec<Result<TwoBeautyProfile, Rejection>>) -> Detection {
    let mut out = Detection::default();
    for r in results {
        match r {
            Ok(p) => out.profiles.push(p),
            Err(e) => out.rejections.push(e),
        }
    }
    out.profiles.sort_by(|a, b| a.meme_id().cmp(b.meme_id()));
    out.rejections.sort_by(|a, b| a.meme_id.cmp(&b.meme_id));
    out
}

/// Looks up the series behind each profile.
pub fn pair_with_series<'a>(
    corpus: &'a Corpus,
    profiles: &'a [TwoBeautyProfile],
) -> Result<Vec<(&'a TimeSeries, &'a TwoBeautyProfile)>, String> {
    profiles
        .iter()
        .map(|p| {
            let s = corpus
                .get(p.meme_id())
                .ok_or_else(|| format!("meme_id `{}` is not in the corpus", p.meme_id()))?;
            if p.stamps().end != s.end() {
                return Err(format!(
                    "T={} of `{}` does not match the corpus series end {}",
                    p.stamps().end,
                    p.meme_id(),
                    s.end()
                ));
            }
            Ok((s, p))
        })
        .collect()
}

/// Mean of the per-meme observed innovation coefficients, skipping memes
/// where they could not be estimated. `observed` must be in canonical order.
pub fn corpus_mean_p(observed: &[Result<(f64, f64), FitError>]) -> Option<(f64, f64)> {
    let ok: Vec<(f64, f64)> = observed.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
    if ok.is_empty() {
        return None;
    }
    let n = ok.len() as f64;
    let (s1, s2) = ok.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    Some((s1 / n, s2 / n))
}

pub fn observed_p_one(series: &TimeSeries, profile: &TwoBeautyProfile) -> Result<(f64, f64), FitError> {
    observed_p(series, profile)
}

pub fn fit_one(
    series: &TimeSeries,
    profile: &TwoBeautyProfile,
    p_mode: PMode,
    corpus_p: Option<(f64, f64)>,
) -> Result<FittedModel, FitError> {
    fit(series, profile, p_mode, corpus_p)
}

pub fn model_record(profile: &TwoBeautyProfile, fitted: &Result<FittedModel, FitError>) -> ModelRecord {
    match fitted {
        Ok(f) => ModelRecord::fitted(profile.meme_id(), f),
        Err(e) => ModelRecord::failed(profile.meme_id(), format!("{}: {e}", e.tag())),
    }
}

/// Fit report for one meme, `None` when the fit or the correlation failed.
pub fn evaluate_one(
    series: &TimeSeries,
    profile: &TwoBeautyProfile,
    fitted: &Result<FittedModel, FitError>,
) -> Option<FitReport> {
    let f = fitted.as_ref().ok()?;
    evaluate_fit(series, profile, &f.model).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthSpec};

    #[test]
    fn noiseless_synthetic_meme_round_trip() {
        let meme = generate(
            "a",
            &SynthSpec {
                p: 0.01,
                q: 0.3,
                quiet: 60,
                m1: 500.0,
                peak_ratio: 3.0,
            },
        )
        .unwrap();
        let profile = detect_one(&meme.series, &PeakParams::default(), 1.0 / 3.0).unwrap();
        assert_eq!(profile.stamps().t2, meme.truth.t2);
        assert!(profile.stamps().ta2.abs_diff(meme.truth.onset2) <= 2);
        let fitted = fit_one(&meme.series, &profile, PMode::Observed, None);
        let report = evaluate_one(&meme.series, &profile, &fitted).unwrap();
        assert!(report.pearson_r > 0.95, "{report:?}");
        assert!(report.peak_error_k <= 1, "{report:?}");
    }

    #[test]
    fn corpus_mean_skips_failures() {
        let obs = vec![
            Ok((0.01, 0.02)),
            Err(FitError::NoInnovationSignal(3)),
            Ok((0.03, 0.04)),
        ];
        let (a, b) = corpus_mean_p(&obs).unwrap();
        assert!((a - 0.02).abs() < 1e-15 && (b - 0.03).abs() < 1e-15);
        assert_eq!(corpus_mean_p(&[]), None);
    }
}
