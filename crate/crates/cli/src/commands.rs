use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use sb_meme_core::bass::{simulate as simulate_model, FitError, FittedModel};
use sb_meme_core::eval::{aligned_curves, summarize, FitReport};
use sb_meme_core::ingest::{load_corpus, write_corpus_csv, Corpus};
use sb_meme_core::pipeline::{
    collect_detection, corpus_mean_p, detect_one, evaluate_one, fit_one, model_record,
    observed_p_one, pair_with_series,
};
use sb_meme_core::report::{
    read_json, write_json, DetectParams, EvalSection, ModeComparison, ModelsSection, Report,
};
use sb_meme_core::stats::{corpus_stats, ProfileStats};
use sb_meme_core::synth::{grid_corpus, GridOptions, SynthTruth};
use sb_meme_core::{PMode, PeakParams, TimeSeries, TwoBeautyProfile};

use crate::figures;
use crate::{Insufficient, RunConfig};

pub const PROFILES: &str = "profiles.json";
pub const MODELS: &str = "models.json";
pub const SIMULATED: &str = "simulated.csv";
pub const STATS: &str = "stats.json";
pub const EVAL: &str = "eval.json";
pub const SYNTH: &str = "synth.csv";
pub const SYNTH_TRUTH: &str = "synth.truth.json";

/// Loaded profiles tolerate this relative slack on the beauty threshold,
/// since reports store coefficients with 6 significant digits.
const STORED_THRESHOLD_SLACK: f64 = 1e-5;

fn out_path(c: &RunConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&c.out_dir)
        .with_context(|| format!("creating output directory {}", c.out_dir.display()))?;
    Ok(c.out_dir.join(name))
}

fn load_input(c: &RunConfig) -> Result<Corpus> {
    let path = c.input.as_ref().context("--input is required")?;
    Ok(load_corpus(path, c.granularity)?)
}

fn peak_params(c: &RunConfig) -> Result<PeakParams> {
    Ok(PeakParams::new(c.k, c.h)?)
}

/// Profiles written by `detect`, checked against the corpus they came from.
fn load_profiles(c: &RunConfig) -> Result<(Report, Vec<TwoBeautyProfile>)> {
    let path = c.out_dir.join(PROFILES);
    let report: Report = read_json(&path).with_context(|| format!("run `detect` first ({})", path.display()))?;
    let profiles = report
        .profiles
        .clone()
        .with_context(|| format!("{}: missing field `profiles`", path.display()))?;
    let alpha = report.params.map_or(c.alpha, |p| p.alpha);
    for p in &profiles {
        p.validate(alpha * (1.0 - STORED_THRESHOLD_SLACK))
            .with_context(|| format!("{}: profile `{}`", path.display(), p.meme_id()))?;
    }
    Ok((report, profiles))
}

fn pairs<'a>(
    corpus: &'a Corpus,
    profiles: &'a [TwoBeautyProfile],
) -> Result<Vec<(&'a TimeSeries, &'a TwoBeautyProfile)>> {
    pair_with_series(corpus, profiles).map_err(|e| anyhow::anyhow!("{PROFILES} does not match --input: {e}"))
}

/// Corpus-mean p over the memes whose observed p could be estimated.
fn corpus_p(pairs: &[(&TimeSeries, &TwoBeautyProfile)]) -> Option<(f64, f64)> {
    let observed: Vec<Result<(f64, f64), FitError>> =
        pairs.par_iter().map(|(s, p)| observed_p_one(s, p)).collect();
    corpus_mean_p(&observed)
}

fn fit_all(
    pairs: &[(&TimeSeries, &TwoBeautyProfile)],
    mode: PMode,
    corpus_p: Option<(f64, f64)>,
) -> Vec<Result<FittedModel, FitError>> {
    pairs
        .par_iter()
        .map(|(s, p)| fit_one(s, p, mode, corpus_p))
        .collect()
}

pub fn detect(c: &RunConfig) -> Result<()> {
    let corpus = load_input(c)?;
    let params = peak_params(c)?;
    let results: Vec<_> = corpus
        .series
        .par_iter()
        .map(|s| detect_one(s, &params, c.alpha))
        .collect();
    let detection = collect_detection(results);
    info!(
        "{} accepted, {} rejected",
        detection.profiles.len(),
        detection.rejections.len()
    );
    let report = Report {
        source: corpus.source_label.clone(),
        params: Some(DetectParams {
            k: c.k,
            h: c.h,
            alpha: c.alpha,
        }),
        profiles: Some(detection.profiles),
        rejections: Some(detection.rejections),
        ..Default::default()
    };
    write_json(&report, &out_path(c, PROFILES)?)?;
    if corpus.is_empty() {
        bail!(Insufficient("input corpus has no usable series".into()));
    }
    Ok(())
}

pub fn fit(c: &RunConfig) -> Result<()> {
    let corpus = load_input(c)?;
    let (report, profiles) = load_profiles(c)?;
    let pairs = pairs(&corpus, &profiles)?;
    let cp = match c.p_mode {
        PMode::CorpusMean => corpus_p(&pairs),
        PMode::Observed => None,
    };
    let fits = fit_all(&pairs, c.p_mode, cp);
    let records = profiles.iter().zip(&fits).map(|(p, f)| model_record(p, f)).collect();
    let out = Report {
        source: report.source,
        models: Some(ModelsSection {
            p_mode: c.p_mode,
            corpus_p: cp.map(|(a, b)| [a, b]),
            fits: records,
        }),
        ..Default::default()
    };
    write_json(&out, &out_path(c, MODELS)?)?;
    if profiles.is_empty() {
        bail!(Insufficient(format!("{PROFILES} has no accepted profiles")));
    }
    Ok(())
}

pub fn simulate(c: &RunConfig) -> Result<()> {
    let path = c.out_dir.join(MODELS);
    let report: Report = read_json(&path).with_context(|| format!("run `fit` first ({})", path.display()))?;
    let section = report
        .models
        .with_context(|| format!("{}: missing field `models`", path.display()))?;
    let mut text = String::from("meme_id,t,s1,s2,popularity\n");
    let mut n = 0;
    for rec in &section.fits {
        let Some(model) = rec.to_model() else { continue };
        let model = model.with_context(|| format!("{}: model `{}`", path.display(), rec.meme_id))?;
        let sim = simulate_model(&model);
        let pop = sim.popularity();
        for t in 0..pop.len() {
            text.push_str(&format!("{},{t},{},{},{}\n", rec.meme_id, sim.s1[t], sim.s2[t], pop[t]));
        }
        n += 1;
    }
    let out = out_path(c, SIMULATED)?;
    fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
    if n == 0 {
        bail!(Insufficient(format!("{MODELS} has no fitted models")));
    }
    Ok(())
}

pub fn stats(c: &RunConfig) -> Result<()> {
    let corpus = load_input(c)?;
    let (report, profiles) = load_profiles(c)?;
    let pairs = pairs(&corpus, &profiles)?;

    let models_path = c.out_dir.join(MODELS);
    let q_by_meme: std::collections::BTreeMap<String, [f64; 2]> = if models_path.exists() {
        let models: Report = read_json(&models_path)?;
        models
            .models
            .with_context(|| format!("{}: missing field `models`", models_path.display()))?
            .fits
            .into_iter()
            .filter_map(|r| r.model.map(|m| (r.meme_id, [m.q1, m.q2])))
            .collect()
    } else {
        warn!("{} not found, imitation coefficients are not summarised", models_path.display());
        Default::default()
    };

    let items: Vec<ProfileStats> = pairs
        .par_iter()
        .map(|(s, p)| ProfileStats {
            p_observed: observed_p_one(s, p).ok().map(|(a, b)| [a, b]),
            q_fitted: q_by_meme.get(p.meme_id()).copied(),
            ..ProfileStats::from_profile(p)
        })
        .collect();
    let computed = match corpus_stats(&items) {
        Ok(s) => s,
        Err(e @ sb_meme_core::stats::StatsError::InsufficientSample { .. }) => {
            bail!(Insufficient(e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    let ids: Vec<&str> = profiles.iter().map(|p| p.meme_id()).collect();
    let json_path = out_path(c, STATS)?;
    figures::write_stats_figures(&c.out_dir, &computed, &ids)?;
    let out = Report {
        source: report.source,
        stats: Some(computed.report),
        ..Default::default()
    };
    write_json(&out, &json_path)?;
    Ok(())
}

fn evaluate_all(
    pairs: &[(&TimeSeries, &TwoBeautyProfile)],
    fits: &[Result<FittedModel, FitError>],
) -> Vec<FitReport> {
    pairs
        .par_iter()
        .zip(fits)
        .filter_map(|((s, p), f)| evaluate_one(s, p, f))
        .collect()
}

fn averaged(
    pairs: &[(&TimeSeries, &TwoBeautyProfile)],
    fits: &[Result<FittedModel, FitError>],
) -> (Vec<f64>, Vec<f64>) {
    let curves: Vec<(Vec<f64>, Vec<f64>)> = pairs
        .iter()
        .zip(fits)
        .filter_map(|((s, p), f)| f.as_ref().ok().map(|f| aligned_curves(s, p, &f.model)))
        .collect();
    let observed: Vec<&Vec<f64>> = curves.iter().map(|c| &c.0).collect();
    let simulated: Vec<&Vec<f64>> = curves.iter().map(|c| &c.1).collect();
    (
        sb_meme_core::eval::averaged_curve(&observed),
        sb_meme_core::eval::averaged_curve(&simulated),
    )
}

pub fn eval(c: &RunConfig) -> Result<()> {
    let corpus = load_input(c)?;
    let (report, profiles) = load_profiles(c)?;
    let pairs = pairs(&corpus, &profiles)?;
    if pairs.is_empty() {
        bail!(Insufficient(format!("{PROFILES} has no accepted profiles")));
    }
    let cp = corpus_p(&pairs);
    let fits_mean = fit_all(&pairs, PMode::CorpusMean, cp);
    let fits_obs = fit_all(&pairs, PMode::Observed, None);
    let summary_mean = summarize(evaluate_all(&pairs, &fits_mean));
    let summary_obs = summarize(evaluate_all(&pairs, &fits_obs));

    let json_path = out_path(c, EVAL)?;
    let (obs_avg, sim_mean_avg) = averaged(&pairs, &fits_mean);
    let (obs_avg2, sim_obs_avg) = averaged(&pairs, &fits_obs);
    figures::write_averaged(&c.out_dir.join("fig8.csv"), &obs_avg, &sim_mean_avg)?;
    figures::write_averaged(&c.out_dir.join("fig9.csv"), &obs_avg2, &sim_obs_avg)?;

    let comparison = ModeComparison {
        observed_mean_r: summary_obs.mean_r,
        corpus_mean_mean_r: summary_mean.mean_r,
        difference: summary_obs.mean_r.zip(summary_mean.mean_r).map(|(a, b)| a - b),
    };
    let summary = match c.p_mode {
        PMode::CorpusMean => summary_mean,
        PMode::Observed => summary_obs,
    };
    figures::write_r_histogram(&c.out_dir.join("fig10.csv"), &summary.per_meme)?;
    let out = Report {
        source: report.source,
        eval: Some(EvalSection {
            p_mode: c.p_mode,
            summary,
            mode_comparison: comparison,
        }),
        ..Default::default()
    };
    write_json(&out, &json_path)?;
    Ok(())
}

#[derive(Serialize)]
struct TruthFile<'a> {
    seed: u64,
    per_cell: usize,
    noise: bool,
    memes: Vec<&'a SynthTruth>,
}

pub fn synth(c: &RunConfig) -> Result<()> {
    if c.per_cell == 0 {
        bail!("--per-cell must be at least 1");
    }
    let memes = grid_corpus(&GridOptions {
        seed: c.seed,
        per_cell: c.per_cell,
        noise: c.noise,
    })?;
    let series: Vec<TimeSeries> = memes.iter().map(|m| m.series.clone()).collect();
    write_corpus_csv(&series, &out_path(c, SYNTH)?)?;
    let truth = TruthFile {
        seed: c.seed,
        per_cell: c.per_cell,
        noise: c.noise,
        memes: memes.iter().map(|m| &m.truth).collect(),
    };
    write_json(&truth, &out_path(c, SYNTH_TRUTH)?)?;
    Ok(())
}
