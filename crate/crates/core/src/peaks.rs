//! Spike-function peak detection.
//!
//! Each tick gets a spike score: the mean of its largest rise above the `k`
//! ticks to the left and its largest drop to the `k` ticks to the right.
//! Ticks whose score is positive and exceeds `mean + h * stddev` of all scores
//! are candidates. A candidate is moved uphill to the local maximum it sits
//! on, and among maxima closer than `k` ticks only the highest survives.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::types::{ModelError, Peak, PeakSet, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakParams {
    /// Neighbourhood half-width.
    pub k: usize,
    /// Significance multiplier on the score standard deviation.
    pub h: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        Self { k: 5, h: 0.5 }
    }
}

impl PeakParams {
    pub fn new(k: usize, h: f64) -> Result<Self, ModelError> {
        if k == 0 {
            return Err(ModelError::InvalidParameter {
                name: "k",
                value: 0.0,
            });
        }
        if !h.is_finite() || h <= 0.0 {
            return Err(ModelError::InvalidParameter { name: "h", value: h });
        }
        Ok(Self { k, h })
    }
}

/// Spike score of tick `i`. A side with no neighbours contributes 0.
pub fn spike_score(series: &TimeSeries, i: usize, k: usize) -> f64 {
    score_at(series.values(), i, k)
}

/// Spike scores of every tick.
pub fn spike_scores(values: &[f64], k: usize) -> Vec<f64> {
    (0..values.len()).map(|i| score_at(values, i, k)).collect()
}

fn score_at(values: &[f64], i: usize, k: usize) -> f64 {
    let here = values[i];
    let left = (1..=k.min(i))
        .map(|j| here - values[i - j])
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
        .unwrap_or(0.0);
    let right = (1..=k)
        .take_while(|j| i + j < values.len())
        .map(|j| here - values[i + j])
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
        .unwrap_or(0.0);
    (left + right) / 2.0
}

/// Climbs from `i` to a neighbour that is strictly higher until none is.
/// When both neighbours are higher the larger wins, the left one on ties.
fn climb(values: &[f64], mut i: usize) -> usize {
    loop {
        let left = (i > 0).then(|| values[i - 1]);
        let right = values.get(i + 1).copied();
        let here = values[i];
        match (left, right) {
            (Some(l), Some(r)) if r > here && r > l => i += 1,
            (Some(l), _) if l > here => i -= 1,
            (None, Some(r)) if r > here => i += 1,
            _ => return i,
        }
    }
}

pub fn detect_peaks(series: &TimeSeries, params: &PeakParams) -> PeakSet {
    let values = series.values();
    let n = values.len();
    let k = params.k;
    if n < 2 * k + 1 {
        warn!(
            "{}: {} ticks is shorter than 2k+1 = {}, no peaks detected",
            series.meme_id(),
            n,
            2 * k + 1
        );
        return PeakSet::default();
    }

    let scores = spike_scores(values, k);
    let mean = scores.iter().sum::<f64>() / n as f64;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
    let threshold = params.h * var.sqrt();

    let mut candidates: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0 && s - mean > threshold)
        .map(|(i, _)| climb(values, i))
        .collect();
    candidates.sort_unstable();
    candidates.dedup();

    // Highest value first, earlier tick first on equal values.
    candidates.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for c in candidates {
        if kept.iter().all(|&j| c.abs_diff(j) >= k) {
            kept.push(c);
        }
    }
    kept.sort_unstable();

    PeakSet {
        peaks: kept
            .into_iter()
            .map(|index| Peak {
                index,
                value: values[index],
                spike_score: scores[index],
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Granularity;
    use proptest::prelude::*;

    fn series(values: Vec<f64>) -> TimeSeries {
        TimeSeries::new("t", Granularity::Day, values).unwrap()
    }

    /// Direct transcription of the score definition, written independently of
    /// `score_at`.
    fn oracle_score(v: &[f64], i: usize, k: usize) -> f64 {
        let mut left: Option<f64> = None;
        let mut right: Option<f64> = None;
        for j in 1..=k {
            if i >= j {
                let d = v[i] - v[i - j];
                left = Some(left.map_or(d, |x: f64| x.max(d)));
            }
            if i + j < v.len() {
                let d = v[i] - v[i + j];
                right = Some(right.map_or(d, |x: f64| x.max(d)));
            }
        }
        (left.unwrap_or(0.0) + right.unwrap_or(0.0)) / 2.0
    }

    #[test]
    fn score_examples() {
        let s = series(vec![0.0, 0.0, 10.0, 0.0, 0.0]);
        assert_eq!(spike_score(&s, 2, 1), 10.0);
        let s = series(vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(spike_score(&s, 4, 2), 1.0);
        let s = series(vec![7.0; 9]);
        for i in 0..9 {
            assert_eq!(spike_score(&s, i, 3), 0.0);
        }
    }

    #[test]
    fn constant_series_has_no_peaks() {
        assert!(detect_peaks(&series(vec![3.0; 40]), &PeakParams::default()).is_empty());
    }

    #[test]
    fn two_isolated_spikes() {
        let mut v = vec![0.0; 30];
        v[10] = 50.0;
        v[20] = 80.0;
        let peaks = detect_peaks(&series(v), &PeakParams::default());
        assert_eq!(peaks.ticks(), vec![10, 20]);
        assert_eq!(peaks.peaks[1].spike_score, 80.0);
    }

    #[test]
    fn close_spikes_are_suppressed() {
        let mut v = vec![0.0; 30];
        v[10] = 5.0;
        v[12] = 9.0;
        let peaks = detect_peaks(&series(v), &PeakParams::default());
        assert_eq!(peaks.ticks(), vec![12]);
    }

    #[test]
    fn short_series_yields_nothing() {
        let s = series(vec![0.0, 9.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(detect_peaks(&s, &PeakParams::default()).is_empty());
    }

    #[test]
    fn flank_candidate_climbs_to_apex() {
        // A smooth bump: the steepest flank scores highest but the apex is
        // what gets reported.
        let mut v = vec![0.0; 40];
        for (i, x) in [1.0, 4.0, 9.0, 14.0, 16.0, 17.0, 16.0, 13.0, 9.0, 5.0, 2.0]
            .iter()
            .enumerate()
        {
            v[15 + i] = *x;
        }
        let peaks = detect_peaks(&series(v), &PeakParams::default());
        assert_eq!(peaks.ticks(), vec![20]);
    }

    #[test]
    fn params_validate() {
        assert!(PeakParams::new(0, 0.5).is_err());
        assert!(PeakParams::new(5, 0.0).is_err());
        assert!(PeakParams::new(5, 0.5).is_ok());
    }

    fn arb_values() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0u32..50, 11..60)
            .prop_map(|v| v.into_iter().map(f64::from).collect())
    }

    proptest! {
        #[test]
        fn score_matches_oracle(v in arb_values(), k in 1usize..7) {
            for i in 0..v.len() {
                prop_assert_eq!(score_at(&v, i, k), oracle_score(&v, i, k));
            }
        }

        #[test]
        fn peaks_are_local_maxima(v in arb_values(), k in 1usize..6) {
            let s = series(v.clone());
            for p in detect_peaks(&s, &PeakParams::new(k, 0.5).unwrap()).iter() {
                let i = p.index;
                prop_assert!(i == 0 || v[i] >= v[i - 1]);
                prop_assert!(i + 1 == v.len() || v[i] >= v[i + 1]);
                prop_assert_eq!(p.value, v[i]);
            }
        }

        #[test]
        fn scale_invariant(v in arb_values(), e in -6i32..7) {
            // Powers of two keep every comparison exact.
            let c = 2f64.powi(e);
            let s = series(v);
            let params = PeakParams::default();
            let a = detect_peaks(&s, &params).ticks();
            let b = detect_peaks(&s.scaled(c).unwrap(), &params).ticks();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn passing_global_max_is_kept(v in arb_values()) {
            let s = series(v.clone());
            let params = PeakParams::default();
            let scores = spike_scores(&v, params.k);
            let n = v.len() as f64;
            let mean = scores.iter().sum::<f64>() / n;
            let sd = (scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            let top = s.argmax();
            let passes = scores[top] > 0.0 && scores[top] - mean > params.h * sd;
            if passes {
                prop_assert!(detect_peaks(&s, &params).contains(top));
            }
        }
    }
}
