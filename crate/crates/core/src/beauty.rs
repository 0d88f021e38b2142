//! Locating the two sleeping beauties of a meme.
//!
//! The awakening time before a peak is the tick farthest from the chord that
//! joins the window start to the peak; the falling-asleep time after a peak is
//! the tick farthest from the chord joining the peak to the window end. The
//! beauty coefficient averages how far the trajectory stays below the
//! awakening chord during a sleep, normalised by `max(1, S(t))`.

use std::fmt;

use log::debug;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::peaks::{detect_peaks, PeakParams};
use crate::types::{BeautyMeasures, Stamps, TimeSeries, TwoBeautyProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeautyError {
    #[error("zero-width window starting at tick {0}")]
    ZeroWidth(usize),
    #[error("window [{start}, {end}] with line end {line_end} is out of range")]
    OutOfRange {
        start: usize,
        end: usize,
        line_end: usize,
    },
}

/// A located time stamp. `degenerate` is set when the search window held at
/// most one tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Located {
    pub tick: usize,
    pub degenerate: bool,
}

/// Numerator of the point-to-chord distance; the denominator is constant
/// along a chord so only the full distance is exposed.
fn chord_offset(s: &[f64], a: usize, b: usize, t: usize) -> f64 {
    let (ta, tb, tt) = (a as f64, b as f64, t as f64);
    ((s[b] - s[a]) * (tt - ta) + (tb - ta) * (s[a] - s[t])).abs()
}

/// Distance from `(t, S(t))` to the line through `(a, S(a))` and `(b, S(b))`.
pub fn chord_distance(series: &TimeSeries, a: usize, b: usize, t: usize) -> f64 {
    let s = series.values();
    let norm = ((s[b] - s[a]).powi(2) + (b as f64 - a as f64).powi(2)).sqrt();
    chord_offset(s, a, b, t) / norm
}

/// Awakening time before `peak`: argmax over `[search_lo, peak)` of the
/// distance to the chord from `anchor_start` to `peak`, latest tick on ties.
pub fn awakening_time(
    series: &TimeSeries,
    anchor_start: usize,
    peak: usize,
    search_lo: usize,
) -> Located {
    assert!(anchor_start < peak && peak <= series.end());
    if search_lo + 1 >= peak {
        return Located {
            tick: peak - 1,
            degenerate: true,
        };
    }
    let mut best = search_lo;
    let mut best_d = f64::NEG_INFINITY;
    for t in search_lo..peak {
        let d = chord_distance(series, anchor_start, peak, t);
        if d >= best_d {
            best = t;
            best_d = d;
        }
    }
    Located {
        tick: best,
        degenerate: false,
    }
}

/// Falling-asleep time after `peak`: argmax over `(peak, search_hi]` of the
/// distance to the chord from `peak` to `anchor_end`, earliest tick on ties.
pub fn falling_asleep_time(
    series: &TimeSeries,
    peak: usize,
    anchor_end: usize,
    search_hi: usize,
) -> Located {
    assert!(peak < anchor_end && anchor_end <= series.end());
    if search_hi <= peak + 1 {
        return Located {
            tick: peak + 1,
            degenerate: true,
        };
    }
    let mut best = peak + 1;
    let mut best_d = f64::NEG_INFINITY;
    for t in peak + 1..=search_hi {
        let d = chord_distance(series, peak, anchor_end, t);
        if d > best_d {
            best = t;
            best_d = d;
        }
    }
    Located {
        tick: best,
        degenerate: false,
    }
}

/// Beauty coefficient of the sleep `[window_start, window_end]` measured
/// against the chord from `window_start` to `line_end`:
///
/// `B = 1/(window_end − window_start) · Σ (ℓ(t) − S(t)) / max(1, S(t))`.
pub fn beauty_coefficient(
    series: &TimeSeries,
    window_start: usize,
    window_end: usize,
    line_end: usize,
) -> Result<f64, BeautyError> {
    if window_end <= window_start {
        return Err(BeautyError::ZeroWidth(window_start));
    }
    if line_end < window_end || line_end > series.end() {
        return Err(BeautyError::OutOfRange {
            start: window_start,
            end: window_end,
            line_end,
        });
    }
    let s = series.values();
    let slope = (s[line_end] - s[window_start]) / (line_end - window_start) as f64;
    let total: f64 = (window_start..=window_end)
        .map(|t| {
            let line = slope * (t - window_start) as f64 + s[window_start];
            (line - s[t]) / s[t].max(1.0)
        })
        .sum();
    Ok(total / (window_end - window_start) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectionReason {
    TooFewPeaks,
    Ordering,
    Threshold,
    Degenerate,
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectionReason::TooFewPeaks => "too-few-peaks",
            RejectionReason::Ordering => "ordering",
            RejectionReason::Threshold => "threshold",
            RejectionReason::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub meme_id: String,
    pub reason: RejectionReason,
}

impl Rejection {
    fn new(series: &TimeSeries, reason: RejectionReason) -> Self {
        Self {
            meme_id: series.meme_id().to_string(),
            reason,
        }
    }
}

/// Runs peak detection and locates the eight stamps, rejecting candidates
/// with fewer than two usable peaks, degenerate search windows or stamps that
/// do not strictly ascend.
pub fn locate_stamps(series: &TimeSeries, params: &PeakParams) -> Result<Stamps, Rejection> {
    use RejectionReason::*;
    let reject = |reason| Rejection::new(series, reason);

    let peaks = detect_peaks(series, params);
    let t2 = series.argmax();
    if !peaks.contains(t2) {
        return Err(reject(TooFewPeaks));
    }
    // Highest earlier peak; the later tick wins a tie.
    let t1 = peaks
        .iter()
        .filter(|p| p.index < t2)
        .max_by(|a, b| a.value.total_cmp(&b.value).then(a.index.cmp(&b.index)))
        .map(|p| p.index)
        .ok_or_else(|| reject(TooFewPeaks))?;

    let t0 = 0;
    let end = series.end();
    if t1 == t0 || t2 == end {
        return Err(reject(Ordering));
    }

    // The second awakening is searched strictly after t1 and the first
    // falling-asleep time no later than ta2.
    let ta2 = awakening_time(series, t0, t2, t1 + 1);
    let tf2 = falling_asleep_time(series, t2, end, end);
    let ta1 = awakening_time(series, t0, t1, t0);
    let tf1 = falling_asleep_time(series, t1, end, ta2.tick);
    debug!(
        "{}: restricted searches ta2 in ({t1}, {t2}), tf1 in ({t1}, {}]",
        series.meme_id(),
        ta2.tick
    );
    if [ta2, tf2, ta1, tf1].iter().any(|l| l.degenerate) {
        return Err(reject(Degenerate));
    }

    let stamps = Stamps {
        t0,
        ta1: ta1.tick,
        t1,
        tf1: tf1.tick,
        ta2: ta2.tick,
        t2,
        tf2: tf2.tick,
        end,
    };
    if !stamps.is_ordered() {
        return Err(reject(Ordering));
    }
    Ok(stamps)
}

/// Locates the stamps and accepts the meme when both beauty coefficients
/// exceed `alpha * S(t_i)`.
pub fn identify_two_beauties(
    series: &TimeSeries,
    params: &PeakParams,
    alpha: f64,
) -> Result<TwoBeautyProfile, Rejection> {
    use RejectionReason::*;
    let reject = |reason| Rejection::new(series, reason);

    let stamps = locate_stamps(series, params)?;
    let b1 = beauty_coefficient(series, stamps.t0, stamps.ta1, stamps.t1)
        .map_err(|_| reject(Degenerate))?;
    let b2 = beauty_coefficient(series, stamps.tf1, stamps.ta2, stamps.t2)
        .map_err(|_| reject(Degenerate))?;
    let peak1 = series.at(stamps.t1);
    let peak2 = series.at(stamps.t2);
    if !(b1 > alpha * peak1 && b2 > alpha * peak2) {
        return Err(reject(Threshold));
    }

    let measures = BeautyMeasures {
        b1,
        b2,
        m1: series.window_sum(stamps.ta1, stamps.tf1),
        m2: series.window_sum(stamps.ta2, stamps.tf2),
        v1: series.rise_rate(stamps.ta1, stamps.t1),
        v2: series.rise_rate(stamps.ta2, stamps.t2),
        peak1,
        peak2,
    };
    // A non-positive rise cannot come from an awakening followed by a peak.
    if measures.v1 <= 0.0 || measures.v2 <= 0.0 {
        return Err(reject(Threshold));
    }
    TwoBeautyProfile::new(series.meme_id(), stamps, measures, alpha)
        .map_err(|_| reject(Threshold))
}
