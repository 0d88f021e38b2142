//! Plot-data CSVs written next to the JSON reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use sb_meme_core::eval::FitReport;
use sb_meme_core::report::round_sig6;
use sb_meme_core::stats::{gaussian, CorpusStats, Histogram};

fn num(x: f64) -> String {
    if x.is_finite() {
        round_sig6(x).to_string()
    } else {
        String::new()
    }
}

fn write(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Histogram bins with a fitted curve evaluated at each bin centre.
fn histogram_rows(out: &mut String, label: &str, h: &Histogram, curve: impl Fn(f64) -> f64) {
    for (c, d) in h.centers.iter().zip(&h.densities) {
        let _ = writeln!(out, "{label},{},{},{}", num(*c), num(*d), num(curve(*c)));
    }
}

pub fn write_stats_figures(dir: &Path, s: &CorpusStats, ids: &[&str]) -> Result<()> {
    // Wake-up gaps against the exponential density.
    let lambda = s.gaps.lambda;
    let mut fig3 = String::from("series,x,density,fit\n");
    histogram_rows(&mut fig3, "gap", &s.gaps.histogram, |x| lambda * (-lambda * x).exp());
    write(&dir.join("fig3.csv"), fig3)?;

    // Second-wake mass against first-wake mass, with the log-log fit.
    let pl = &s.power_law;
    let mut fig4 = String::from("meme_id,m1,m2,m2_fit\n");
    for (id, [m1, m2]) in ids.iter().zip(&s.masses) {
        let fit = if *m1 > 0.0 {
            (pl.intercept + pl.alpha * m1.ln()).exp()
        } else {
            f64::NAN
        };
        let _ = writeln!(fig4, "{id},{},{},{}", num(*m1), num(*m2), num(fit));
    }
    write(&dir.join("fig4.csv"), fig4)?;

    let mut fig5 = String::from("meme_id,v1,v2,ratio\n");
    for (id, [v1, v2]) in ids.iter().zip(&s.velocities) {
        let ratio = if *v1 > 0.0 { v2 / v1 } else { f64::NAN };
        let _ = writeln!(fig5, "{id},{},{},{}", num(*v1), num(*v2), num(ratio));
    }
    write(&dir.join("fig5.csv"), fig5)?;

    // Innovation coefficients: histogram plus Gaussian curve per generation.
    let mut fig6 = String::from("series,x,density,fit\n");
    for (g, fit) in s.report.p_gauss.iter().enumerate() {
        if let Some(f) = fit {
            histogram_rows(&mut fig6, &format!("p{}", g + 1), &f.histogram, |x| {
                gaussian(x, f.a, f.mu, f.sigma)
            });
        }
    }
    write(&dir.join("fig6.csv"), fig6)?;

    // Imitation coefficients as raw values, one row each.
    let mut fig7 = String::from("series,index,q\n");
    for (g, qs) in s.q_values.iter().enumerate() {
        for (i, q) in qs.iter().enumerate() {
            let _ = writeln!(fig7, "q{},{i},{}", g + 1, num(*q));
        }
    }
    write(&dir.join("fig7.csv"), fig7)?;
    Ok(())
}

/// Averaged observed and simulated curves on the aligned tick axis.
pub fn write_averaged(path: &Path, observed: &[f64], simulated: &[f64]) -> Result<()> {
    let mut text = String::from("t,observed,simulated\n");
    for t in 0..observed.len().max(simulated.len()) {
        let o = observed.get(t).copied().unwrap_or(f64::NAN);
        let s = simulated.get(t).copied().unwrap_or(f64::NAN);
        let _ = writeln!(text, "{t},{},{}", num(o), num(s));
    }
    write(path, text)
}

/// Pearson r counts in 0.1-wide bins over [-1, 1].
pub fn write_r_histogram(path: &Path, reports: &[FitReport]) -> Result<()> {
    let mut counts = [0usize; 20];
    for r in reports {
        let bin = (((r.pearson_r + 1.0) * 10.0).floor() as isize).clamp(0, 19) as usize;
        counts[bin] += 1;
    }
    let mut text = String::from("r_lo,r_hi,count\n");
    for (i, c) in counts.iter().enumerate() {
        let lo = -1.0 + i as f64 / 10.0;
        let _ = writeln!(text, "{},{},{c}", num(lo), num(lo + 0.1));
    }
    write(path, text)
}
