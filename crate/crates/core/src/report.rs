//! Stable report serialization.
//!
//! Reports are written as pretty-printed JSON with object keys sorted and
//! every float rounded to 6 significant digits, so that re-serializing a
//! loaded report reproduces the same bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bass::{FittedModel, PMode, RootChoice};
use crate::beauty::Rejection;
use crate::eval::EvalSummary;
use crate::peaks::PeakParams;
use crate::stats::CorpusReport;
use crate::types::{BassGeneration, TwoBeautyProfile, TwoStageBassModel};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// Rounds to 6 significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig6(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        // serde_json's default map is a BTreeMap, so keys come out sorted.
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, canonicalize(v)))
                .collect(),
        ),
        other => other,
    }
}

/// Canonical JSON text of `value`, newline-terminated.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, ReportError> {
    let v = canonicalize(serde_json::to_value(value)?);
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), ReportError> {
    let text = to_canonical_json(value)?;
    fs::write(path, text).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ReportError> {
    let bytes = fs::read(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_slice(&bytes).map_err(|source| ReportError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Detection settings recorded alongside the profiles they produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectParams {
    pub k: usize,
    pub h: f64,
    pub alpha: f64,
}

impl DetectParams {
    pub fn peak_params(&self) -> PeakParams {
        PeakParams {
            k: self.k,
            h: self.h,
        }
    }
}

/// A fitted model in flat form, or the reason the fit failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub meme_id: String,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelFields>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFields {
    pub p1: f64,
    pub q1: f64,
    pub m1: f64,
    pub p2: f64,
    pub q2: f64,
    pub m2: f64,
    /// Second-generation onset on the axis starting at ta1.
    pub onset: usize,
    pub horizon: usize,
    pub root_choice: [RootChoice; 2],
}

impl ModelRecord {
    pub fn fitted(meme_id: impl Into<String>, fitted: &FittedModel) -> Self {
        let TwoStageBassModel { g1, g2, horizon } = fitted.model;
        Self {
            meme_id: meme_id.into(),
            model: Some(ModelFields {
                p1: g1.p,
                q1: g1.q,
                m1: g1.m,
                p2: g2.p,
                q2: g2.q,
                m2: g2.m,
                onset: g2.onset,
                horizon,
                root_choice: fitted.root_choice,
            }),
            rejection: None,
        }
    }

    pub fn failed(meme_id: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            meme_id: meme_id.into(),
            model: None,
            rejection: Some(reason.into()),
        }
    }

    /// The model, re-validated.
    pub fn to_model(&self) -> Option<Result<TwoStageBassModel, crate::types::ModelError>> {
        self.model.as_ref().map(|f| {
            let g1 = BassGeneration::new(f.p1, f.q1, f.m1, 0)?;
            let g2 = BassGeneration::new(f.p2, f.q2, f.m2, f.onset)?;
            TwoStageBassModel::new(g1, g2, f.horizon)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelsSection {
    pub p_mode: PMode,
    /// Corpus-mean innovation coefficients, when they were used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus_p: Option<[f64; 2]>,
    pub fits: Vec<ModelRecord>,
}

/// Evaluation under the configured mode, plus the other mode's mean r.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSection {
    pub p_mode: PMode,
    #[serde(flatten)]
    pub summary: EvalSummary,
    pub mode_comparison: ModeComparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub observed_mean_r: Option<f64>,
    pub corpus_mean_mean_r: Option<f64>,
    /// observed − corpus-mean.
    pub difference: Option<f64>,
}

/// The JSON report. Each pipeline stage fills in its own section.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<DetectParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<Vec<TwoBeautyProfile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejections: Option<Vec<Rejection>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models: Option<ModelsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<CorpusReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalSection>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beauty::RejectionReason;
    use crate::types::{BeautyMeasures, Stamps};

    fn profile() -> TwoBeautyProfile {
        TwoBeautyProfile::new(
            "m1",
            Stamps {
                t0: 0,
                ta1: 19,
                t1: 22,
                tf1: 25,
                ta2: 49,
                t2: 52,
                tf2: 55,
                end: 69,
            },
            BeautyMeasures {
                b1: 4.54545,
                b2: 13.8889,
                m1: 26.0,
                m2: 70.0,
                v1: 2.66667,
                v2: 10.0,
                peak1: 10.0,
                peak2: 30.0,
            },
            1.0 / 3.0,
        )
        .unwrap()
    }

    #[test]
    fn round_sig6_examples() {
        assert_eq!(round_sig6(1.0 / 3.0), 0.333333);
        assert_eq!(round_sig6(123456789.0), 123457000.0);
        assert_eq!(round_sig6(-0.000123456789), -0.000123457);
        assert_eq!(round_sig6(0.0), 0.0);
    }

    #[test]
    fn keys_sorted_and_rounded() {
        let v = serde_json::json!({"b": 2.0 / 3.0, "a": [1, 0.1 + 0.2]});
        let text = to_canonical_json(&v).unwrap();
        assert_eq!(text, "{\n  \"a\": [\n    1,\n    0.3\n  ],\n  \"b\": 0.666667\n}\n");
    }

    #[test]
    fn empty_profile_list() {
        let r = Report {
            source: "x".into(),
            profiles: Some(vec![]),
            ..Default::default()
        };
        let text = to_canonical_json(&r).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back.profiles, Some(vec![]));
        assert!(!text.contains("stats"));
    }

    #[test]
    fn profile_round_trip_and_stable_bytes() {
        let r = Report {
            source: "x".into(),
            params: Some(DetectParams {
                k: 5,
                h: 0.5,
                alpha: 1.0 / 3.0,
            }),
            profiles: Some(vec![profile()]),
            rejections: Some(vec![Rejection {
                meme_id: "m0".into(),
                reason: RejectionReason::Threshold,
            }]),
            ..Default::default()
        };
        let text = to_canonical_json(&r).unwrap();
        assert!(text.contains("\"gap\": 24"));
        assert!(text.contains("\"T\": 69"));
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back.profiles.as_ref().unwrap()[0], profile());
        assert_eq!(to_canonical_json(&back).unwrap(), text);
    }

    #[test]
    fn model_record_round_trip() {
        let model = TwoStageBassModel::new(
            BassGeneration::new(0.01, 0.1, 100.0, 0).unwrap(),
            BassGeneration::new(0.02, 0.2, 300.0, 30).unwrap(),
            80,
        )
        .unwrap();
        let rec = ModelRecord::fitted(
            "a",
            &FittedModel {
                model,
                root_choice: [RootChoice::Upper, RootChoice::Lower],
            },
        );
        let failed = ModelRecord::failed("b", "no-innovation-signal");
        let section = ModelsSection {
            p_mode: PMode::Observed,
            corpus_p: None,
            fits: vec![rec.clone(), failed.clone()],
        };
        let text = to_canonical_json(&section).unwrap();
        assert!(text.contains("\"root_choice\""));
        assert!(text.contains("\"p1\": 0.01"));
        assert!(text.contains("\"rejection\": \"no-innovation-signal\""));
        assert!(text.contains("\"lower\""));
        let back: ModelsSection = serde_json::from_str(&text).unwrap();
        assert_eq!(back.fits[0].to_model().unwrap().unwrap(), model);
        assert_eq!(back.fits[1], failed);
        assert!(back.fits[1].to_model().is_none());
    }
}
