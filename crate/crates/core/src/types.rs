//! Shared data model: popularity series, peaks, two-beauty profiles and the
//! parameters of the two-generation Bass model.
//!
//! Time is measured in dimensionless integer ticks counted from a meme's first
//! observation. The granularity tag is carried along as metadata only.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("series `{meme_id}` has {len} ticks, at least 2 are required")]
    TooShort { meme_id: String, len: usize },
    #[error("series `{meme_id}` has invalid value {value} at tick {tick}")]
    InvalidValue {
        meme_id: String,
        tick: usize,
        value: f64,
    },
    #[error("time stamps out of order: {0}")]
    Ordering(String),
    #[error("beauty coefficient {name}={value} does not exceed {threshold}")]
    Threshold {
        name: &'static str,
        value: f64,
        threshold: f64,
    },
    #[error("invalid parameter {name}={value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("unknown granularity `{0}`")]
    UnknownGranularity(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    #[default]
    Day,
    Week,
    Month,
    Year,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Day => "day",
            Granularity::Week => "week",
            Granularity::Month => "month",
            Granularity::Year => "year",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "day" | "daily" => Ok(Granularity::Day),
            "week" | "weekly" => Ok(Granularity::Week),
            "month" | "monthly" => Ok(Granularity::Month),
            "year" | "yearly" => Ok(Granularity::Year),
            _ => Err(ModelError::UnknownGranularity(s.to_string())),
        }
    }
}

/// Popularity S(t) of one meme at ticks `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    meme_id: String,
    granularity: Granularity,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(
        meme_id: impl Into<String>,
        granularity: Granularity,
        values: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let meme_id = meme_id.into();
        if values.len() < 2 {
            return Err(ModelError::TooShort {
                meme_id,
                len: values.len(),
            });
        }
        if let Some((tick, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(ModelError::InvalidValue {
                meme_id,
                tick,
                value,
            });
        }
        Ok(Self {
            meme_id,
            granularity,
            values,
        })
    }

    pub fn meme_id(&self) -> &str {
        &self.meme_id
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of ticks, `T + 1`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false: a valid series has at least two ticks.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the last tick, `T`.
    pub fn end(&self) -> usize {
        self.values.len() - 1
    }

    /// S(t). Panics when `t > T`.
    pub fn at(&self, t: usize) -> f64 {
        self.values[t]
    }

    /// Earliest tick holding the maximum value.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (t, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = t;
            }
        }
        best
    }

    /// Σ S(t) for t in `[from, to]`.
    pub fn window_sum(&self, from: usize, to: usize) -> f64 {
        self.values[from..=to].iter().sum()
    }

    /// (S(to) − S(from)) / (to − from).
    pub fn rise_rate(&self, from: usize, to: usize) -> f64 {
        debug_assert!(to > from);
        (self.values[to] - self.values[from]) / (to - from) as f64
    }

    /// Same meme with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, ModelError> {
        Self::new(
            self.meme_id.clone(),
            self.granularity,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    pub value: f64,
    pub spike_score: f64,
}

/// Meaningful peaks of a series, sorted by tick.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn ticks(&self) -> Vec<usize> {
        self.peaks.iter().map(|p| p.index).collect()
    }

    pub fn contains(&self, tick: usize) -> bool {
        self.peaks.iter().any(|p| p.index == tick)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Peak> {
        self.peaks.iter()
    }
}

/// The eight time stamps of a two-beauty meme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamps {
    pub t0: usize,
    pub ta1: usize,
    pub t1: usize,
    pub tf1: usize,
    pub ta2: usize,
    pub t2: usize,
    pub tf2: usize,
    #[serde(rename = "T")]
    pub end: usize,
}

impl Stamps {
    pub fn as_array(&self) -> [usize; 8] {
        [
            self.t0, self.ta1, self.t1, self.tf1, self.ta2, self.t2, self.tf2, self.end,
        ]
    }

    /// `t0 < ta1 < t1 < tf1 < ta2 < t2 < tf2 <= T`.
    pub fn is_ordered(&self) -> bool {
        let s = self.as_array();
        s[..7].windows(2).all(|w| w[0] < w[1]) && s[6] <= s[7]
    }

    pub fn check_order(&self) -> Result<(), ModelError> {
        if self.is_ordered() {
            Ok(())
        } else {
            Err(ModelError::Ordering(format!("{:?}", self.as_array())))
        }
    }

    /// Length of the second sleep, `ta2 − tf1`.
    pub fn wake_gap(&self) -> usize {
        self.ta2.saturating_sub(self.tf1)
    }
}

/// Magnitudes measured on an identified meme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeautyMeasures {
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    /// Awake-window popularity sums.
    pub m1: f64,
    pub m2: f64,
    /// Rising velocities.
    pub v1: f64,
    pub v2: f64,
    /// S(t1) and S(t2).
    pub peak1: f64,
    pub peak2: f64,
}

/// A meme accepted as having two consecutive sleeping beauties.
///
/// Construction checks the stamp ordering and the beauty thresholds; values
/// read back from a report are checked for ordering and gap consistency and
/// can be re-checked against a threshold with [`TwoBeautyProfile::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRecord", into = "ProfileRecord")]
pub struct TwoBeautyProfile {
    meme_id: String,
    stamps: Stamps,
    measures: BeautyMeasures,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileRecord {
    meme_id: String,
    #[serde(flatten)]
    stamps: Stamps,
    #[serde(flatten)]
    measures: BeautyMeasures,
    gap: usize,
}

impl TryFrom<ProfileRecord> for TwoBeautyProfile {
    type Error = ModelError;

    fn try_from(r: ProfileRecord) -> Result<Self, Self::Error> {
        r.stamps.check_order()?;
        if r.gap != r.stamps.wake_gap() {
            return Err(ModelError::Ordering(format!(
                "gap {} does not equal ta2 - tf1 = {}",
                r.gap,
                r.stamps.wake_gap()
            )));
        }
        check_measures(&r.measures)?;
        Ok(Self {
            meme_id: r.meme_id,
            stamps: r.stamps,
            measures: r.measures,
        })
    }
}

impl From<TwoBeautyProfile> for ProfileRecord {
    fn from(p: TwoBeautyProfile) -> Self {
        let gap = p.stamps.wake_gap();
        Self {
            meme_id: p.meme_id,
            stamps: p.stamps,
            measures: p.measures,
            gap,
        }
    }
}

fn check_measures(m: &BeautyMeasures) -> Result<(), ModelError> {
    let fields = [
        ("B1", m.b1),
        ("B2", m.b2),
        ("m1", m.m1),
        ("m2", m.m2),
        ("v1", m.v1),
        ("v2", m.v2),
        ("peak1", m.peak1),
        ("peak2", m.peak2),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            return Err(ModelError::InvalidParameter { name, value });
        }
    }
    for (name, value) in [("m1", m.m1), ("m2", m.m2), ("v1", m.v1), ("v2", m.v2)] {
        if value <= 0.0 {
            return Err(ModelError::InvalidParameter { name, value });
        }
    }
    Ok(())
}

impl TwoBeautyProfile {
    pub fn new(
        meme_id: impl Into<String>,
        stamps: Stamps,
        measures: BeautyMeasures,
        alpha: f64,
    ) -> Result<Self, ModelError> {
        let profile = Self {
            meme_id: meme_id.into(),
            stamps,
            measures,
        };
        profile.validate(alpha)?;
        Ok(profile)
    }

    /// Checks every invariant, including `B_i > alpha * S(t_i)`.
    pub fn validate(&self, alpha: f64) -> Result<(), ModelError> {
        self.stamps.check_order()?;
        check_measures(&self.measures)?;
        let m = &self.measures;
        for (name, value, peak) in [("B1", m.b1, m.peak1), ("B2", m.b2, m.peak2)] {
            let threshold = alpha * peak;
            if value <= threshold {
                return Err(ModelError::Threshold {
                    name,
                    value,
                    threshold,
                });
            }
        }
        Ok(())
    }

    pub fn meme_id(&self) -> &str {
        &self.meme_id
    }

    pub fn stamps(&self) -> &Stamps {
        &self.stamps
    }

    pub fn measures(&self) -> &BeautyMeasures {
        &self.measures
    }

    pub fn gap(&self) -> usize {
        self.stamps.wake_gap()
    }
}

/// One generation of the Bass model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BassGeneration {
    /// Innovation coefficient.
    pub p: f64,
    /// Imitation coefficient.
    pub q: f64,
    /// Diffusion potential.
    pub m: f64,
    /// Start tick on the model axis (0 is the first awakening).
    pub onset: usize,
}

impl BassGeneration {
    pub fn new(p: f64, q: f64, m: f64, onset: usize) -> Result<Self, ModelError> {
        for (name, value) in [("p", p), ("q", q), ("m", m)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(ModelError::InvalidParameter { name, value });
            }
        }
        Ok(Self { p, q, m, onset })
    }

    /// Time from onset to the peak adoption rate, `ln(q/p)/(p+q)`, when
    /// positive.
    pub fn peak_delay(&self) -> Option<f64> {
        (self.q > self.p).then(|| (self.q / self.p).ln() / (self.p + self.q))
    }

    /// Peak adoption rate `m(p+q)^2/(4q)` of an isolated generation.
    pub fn peak_rate(&self) -> f64 {
        self.m * (self.p + self.q).powi(2) / (4.0 * self.q)
    }
}

/// Two overlapping Bass generations; the second absorbs part of the first's
/// adopters once it starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStageBassModel {
    pub g1: BassGeneration,
    pub g2: BassGeneration,
    /// Last simulated tick.
    pub horizon: usize,
}

impl TwoStageBassModel {
    pub fn new(
        g1: BassGeneration,
        g2: BassGeneration,
        horizon: usize,
    ) -> Result<Self, ModelError> {
        if g1.onset != 0 {
            return Err(ModelError::InvalidParameter {
                name: "g1.onset",
                value: g1.onset as f64,
            });
        }
        if g2.onset == 0 {
            return Err(ModelError::InvalidParameter {
                name: "g2.onset",
                value: 0.0,
            });
        }
        Ok(Self { g1, g2, horizon })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stamps() -> Stamps {
        Stamps {
            t0: 0,
            ta1: 10,
            t1: 15,
            tf1: 20,
            ta2: 40,
            t2: 45,
            tf2: 50,
            end: 60,
        }
    }

    fn measures() -> BeautyMeasures {
        BeautyMeasures {
            b1: 10.0,
            b2: 40.0,
            m1: 100.0,
            m2: 300.0,
            v1: 4.0,
            v2: 20.0,
            peak1: 20.0,
            peak2: 100.0,
        }
    }

    #[test]
    fn series_rejects_negative_and_short() {
        assert!(TimeSeries::new("a", Granularity::Day, vec![1.0]).is_err());
        assert!(TimeSeries::new("a", Granularity::Day, vec![1.0, -1.0]).is_err());
        assert!(TimeSeries::new("a", Granularity::Day, vec![1.0, f64::NAN]).is_err());
        let s = TimeSeries::new("a", Granularity::Week, vec![0.0, 3.0, 3.0]).unwrap();
        assert_eq!(s.end(), 2);
        assert_eq!(s.argmax(), 1);
    }

    #[test]
    fn granularity_parses() {
        assert_eq!("Weekly".parse::<Granularity>().unwrap(), Granularity::Week);
        assert!("hour".parse::<Granularity>().is_err());
    }

    #[test]
    fn profile_accepts_valid() {
        let p = TwoBeautyProfile::new("x", stamps(), measures(), 1.0 / 3.0).unwrap();
        assert_eq!(p.gap(), 20);
    }

    #[test]
    fn profile_rejects_each_stamp_shifted_by_one() {
        // Moving any interior stamp onto its neighbour breaks strict order.
        let base = stamps();
        let cases: Vec<Box<dyn Fn(&mut Stamps)>> = vec![
            Box::new(|s| s.ta1 = s.t0),
            Box::new(|s| s.t1 = s.ta1),
            Box::new(|s| s.tf1 = s.t1),
            Box::new(|s| s.ta2 = s.tf1),
            Box::new(|s| s.t2 = s.ta2),
            Box::new(|s| s.tf2 = s.t2),
            Box::new(|s| s.end = s.tf2 - 1),
        ];
        for mutate in cases {
            let mut s = base;
            mutate(&mut s);
            assert!(TwoBeautyProfile::new("x", s, measures(), 1.0 / 3.0).is_err());
        }
        let mut edge = base;
        edge.tf2 = edge.end;
        assert!(TwoBeautyProfile::new("x", edge, measures(), 1.0 / 3.0).is_ok());
    }

    #[test]
    fn profile_threshold_is_strict() {
        let mut m = measures();
        m.b1 = (1.0 / 3.0) * m.peak1;
        assert!(matches!(
            TwoBeautyProfile::new("x", stamps(), m, 1.0 / 3.0),
            Err(ModelError::Threshold { name: "B1", .. })
        ));
        let mut m = measures();
        m.b2 = 0.0;
        assert!(TwoBeautyProfile::new("x", stamps(), m, 1.0 / 3.0).is_err());
    }

    #[test]
    fn profile_json_round_trip_checks_gap() {
        let p = TwoBeautyProfile::new("x", stamps(), measures(), 1.0 / 3.0).unwrap();
        let json = serde_json::to_value(&p).unwrap();
        assert_eq!(json["gap"], 20);
        assert_eq!(json["T"], 60);
        assert_eq!(json["B2"], 40.0);
        let back: TwoBeautyProfile = serde_json::from_value(json.clone()).unwrap();
        assert_eq!(back, p);

        let mut bad = json;
        bad["gap"] = 3.into();
        assert!(serde_json::from_value::<TwoBeautyProfile>(bad).is_err());
    }

    #[test]
    fn bass_generation_validates() {
        assert!(BassGeneration::new(0.0, 0.1, 1.0, 0).is_err());
        assert!(BassGeneration::new(0.01, 0.1, -1.0, 0).is_err());
        let g = BassGeneration::new(0.01, 0.1, 100.0, 0).unwrap();
        assert!((g.peak_delay().unwrap() - 10f64.ln() / 0.11).abs() < 1e-12);
        assert!(BassGeneration::new(0.2, 0.1, 1.0, 0).unwrap().peak_delay().is_none());
    }

    #[test]
    fn two_stage_requires_positive_second_onset() {
        let g1 = BassGeneration::new(0.01, 0.1, 100.0, 0).unwrap();
        let g2 = BassGeneration::new(0.01, 0.1, 100.0, 0).unwrap();
        assert!(TwoStageBassModel::new(g1, g2, 100).is_err());
        let g2 = BassGeneration { onset: 30, ..g2 };
        assert!(TwoStageBassModel::new(g1, g2, 100).is_ok());
    }
}
