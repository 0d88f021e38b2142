//! Browser bindings: peak detection, two-beauty identification with a
//! model refit, and forward simulation.

use wasm_bindgen::prelude::*;

use sb_meme_core::bass::{fit, simulate, PMode};
use sb_meme_core::eval::{aligned_curves, evaluate_fit};
use sb_meme_core::peaks::{detect_peaks, spike_scores};
use sb_meme_core::{
    identify_two_beauties, BassGeneration, Granularity, ModelError, PeakParams, TimeSeries,
    TwoStageBassModel,
};

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn series(values: Vec<f64>) -> Result<TimeSeries, JsError> {
    TimeSeries::new("input", Granularity::Day, values).map_err(js_err)
}

#[allow(clippy::too_many_arguments)]
fn build_model(
    p1: f64,
    q1: f64,
    m1: f64,
    p2: f64,
    q2: f64,
    m2: f64,
    onset: usize,
    horizon: usize,
) -> Result<TwoStageBassModel, ModelError> {
    let g1 = BassGeneration::new(p1, q1, m1, 0)?;
    let g2 = BassGeneration::new(p2, q2, m2, onset)?;
    TwoStageBassModel::new(g1, g2, horizon)
}

/// Per-tick popularity of a two-generation model over `0..=horizon`.
#[wasm_bindgen(js_name = simulatePopularity)]
#[allow(clippy::too_many_arguments)]
pub fn simulate_popularity(
    p1: f64,
    q1: f64,
    m1: f64,
    p2: f64,
    q2: f64,
    m2: f64,
    onset: usize,
    horizon: usize,
) -> Result<Vec<f64>, JsError> {
    let model = build_model(p1, q1, m1, p2, q2, m2, onset, horizon).map_err(js_err)?;
    Ok(simulate(&model).popularity())
}

#[wasm_bindgen(js_name = spikeScores)]
pub fn spike_scores_js(values: Vec<f64>, k: usize) -> Vec<f64> {
    spike_scores(&values, k)
}

/// Ticks of the meaningful peaks.
#[wasm_bindgen(js_name = detectPeaks)]
pub fn detect_peaks_js(values: Vec<f64>, k: usize, h: f64) -> Result<Vec<u32>, JsError> {
    let params = PeakParams::new(k, h).map_err(js_err)?;
    let s = series(values)?;
    Ok(detect_peaks(&s, &params).iter().map(|p| p.index as u32).collect())
}

/// Result of [`analyze`]. Stamps are `[t0, ta1, t1, tf1, ta2, t2, tf2, T]`.
#[wasm_bindgen]
pub struct Analysis {
    accepted: bool,
    reason: String,
    stamps: Vec<u32>,
    b1: f64,
    b2: f64,
    fit_error: String,
    params: Vec<f64>,
    offset: u32,
    simulated: Vec<f64>,
    pearson_r: f64,
}

#[wasm_bindgen]
impl Analysis {
    #[wasm_bindgen(getter)]
    pub fn accepted(&self) -> bool {
        self.accepted
    }

    /// Rejection reason, empty when accepted.
    #[wasm_bindgen(getter)]
    pub fn reason(&self) -> String {
        self.reason.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn stamps(&self) -> Vec<u32> {
        self.stamps.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn b1(&self) -> f64 {
        self.b1
    }

    #[wasm_bindgen(getter)]
    pub fn b2(&self) -> f64 {
        self.b2
    }

    /// Why the model fit failed, empty on success.
    #[wasm_bindgen(getter, js_name = fitError)]
    pub fn fit_error(&self) -> String {
        self.fit_error.clone()
    }

    /// `[p1, q1, m1, p2, q2, m2]` of the fitted model.
    #[wasm_bindgen(getter)]
    pub fn params(&self) -> Vec<f64> {
        self.params.clone()
    }

    /// Tick of the input where the simulated curve starts.
    #[wasm_bindgen(getter)]
    pub fn offset(&self) -> u32 {
        self.offset
    }

    #[wasm_bindgen(getter)]
    pub fn simulated(&self) -> Vec<f64> {
        self.simulated.clone()
    }

    /// NaN when no fit was made.
    #[wasm_bindgen(getter, js_name = pearsonR)]
    pub fn pearson_r(&self) -> f64 {
        self.pearson_r
    }
}

/// Identifies the two beauties and, when accepted, fits and simulates the
/// model using the meme's own innovation coefficients.
#[wasm_bindgen]
pub fn analyze(values: Vec<f64>, k: usize, h: f64, alpha: f64) -> Result<Analysis, JsError> {
    let params = PeakParams::new(k, h).map_err(js_err)?;
    let s = series(values)?;
    let mut out = Analysis {
        accepted: false,
        reason: String::new(),
        stamps: Vec::new(),
        b1: f64::NAN,
        b2: f64::NAN,
        fit_error: String::new(),
        params: Vec::new(),
        offset: 0,
        simulated: Vec::new(),
        pearson_r: f64::NAN,
    };
    let profile = match identify_two_beauties(&s, &params, alpha) {
        Ok(p) => p,
        Err(r) => {
            out.reason = r.reason.to_string();
            return Ok(out);
        }
    };
    out.accepted = true;
    out.stamps = profile.stamps().as_array().iter().map(|&t| t as u32).collect();
    out.b1 = profile.measures().b1;
    out.b2 = profile.measures().b2;
    match fit(&s, &profile, PMode::Observed, None) {
        Ok(f) => {
            let m = f.model;
            out.params = vec![m.g1.p, m.g1.q, m.g1.m, m.g2.p, m.g2.q, m.g2.m];
            out.offset = profile.stamps().ta1 as u32;
            out.simulated = aligned_curves(&s, &profile, &m).1;
            if let Ok(report) = evaluate_fit(&s, &profile, &m) {
                out.pearson_r = report.pearson_r;
            }
        }
        Err(e) => out.fit_error = e.to_string(),
    }
    Ok(out)
}
