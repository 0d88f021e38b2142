//! Seeded synthetic corpora of two-generation Bass memes with known ground
//! truth.
//!
//! Each meme is a leading run of zeros followed by the per-tick popularity of
//! a [`TwoStageBassModel`]. The second generation starts a fixed number of
//! quiet ticks after the first generation's popularity has dropped below one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::bass::{bass_cdf, simulate};
use crate::types::{BassGeneration, Granularity, ModelError, TimeSeries, TwoStageBassModel};

pub const GRID_P: [f64; 3] = [0.005, 0.01, 0.02];
pub const GRID_Q: [f64; 3] = [0.1, 0.2, 0.3];
pub const GRID_QUIET: [usize; 3] = [20, 40, 60];

/// Ticks appended after the second generation's popularity drops below one.
const TAIL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub p: f64,
    pub q: f64,
    /// Quiet ticks between the end of the first burst and the second onset.
    pub quiet: usize,
    pub m1: f64,
    /// Second-to-first peak height ratio.
    pub peak_ratio: f64,
}

/// Ground truth for one generated meme, on the meme's own tick axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub meme_id: String,
    pub spec: SynthSpec,
    pub m2: f64,
    pub onset1: usize,
    pub onset2: usize,
    pub t1: usize,
    pub t2: usize,
    #[serde(rename = "T")]
    pub end: usize,
    pub noise: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthMeme {
    pub series: TimeSeries,
    pub truth: SynthTruth,
}

fn pulse(m: f64, p: f64, q: f64, onset: usize, t: usize) -> f64 {
    let x = t as f64 - onset as f64;
    m * (bass_cdf(x, p, q) - bass_cdf(x - 1.0, p, q))
}

fn peak_delay(p: f64, q: f64) -> f64 {
    (q / p).ln() / (p + q)
}

/// First tick after the apex of a pulse where it drops below one.
fn fade_tick(m: f64, p: f64, q: f64, onset: usize) -> usize {
    let mut t = onset + peak_delay(p, q) as usize + 1;
    while pulse(m, p, q, onset, t) >= 1.0 {
        t += 1;
    }
    t
}

/// Builds one noiseless meme.
pub fn generate(meme_id: impl Into<String>, spec: &SynthSpec) -> Result<SynthMeme, ModelError> {
    let SynthSpec { p, q, quiet, m1, peak_ratio } = *spec;
    if !(q > p) {
        return Err(ModelError::InvalidParameter { name: "q", value: q });
    }
    if !(peak_ratio > 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "peak_ratio",
            value: peak_ratio,
        });
    }
    if quiet == 0 {
        return Err(ModelError::InvalidParameter { name: "quiet", value: 0.0 });
    }
    let lead = (3.0 * peak_delay(p, q)).ceil() as usize + 5;
    let onset2 = fade_tick(m1, p, q, lead) + quiet;
    // Same (p, q) in both generations, so the peak rates scale with m.
    let m2 = m1 * peak_ratio;
    let end = fade_tick(m2, p, q, onset2) + TAIL;

    let model = TwoStageBassModel::new(
        BassGeneration::new(p, q, m1, 0)?,
        BassGeneration::new(p, q, m2, onset2 - lead)?,
        end - lead,
    )?;
    let mut values = vec![0.0; lead];
    values.extend(simulate(&model).popularity());
    let meme_id = meme_id.into();
    let series = TimeSeries::new(meme_id.clone(), Granularity::Day, values)?;
    let first: Vec<f64> = (0..onset2).map(|t| pulse(m1, p, q, lead, t)).collect();
    let t1 = TimeSeries::new("g1", Granularity::Day, first)?.argmax();
    let t2 = series.argmax();
    Ok(SynthMeme {
        truth: SynthTruth {
            meme_id,
            spec: *spec,
            m2,
            onset1: lead,
            onset2,
            t1,
            t2,
            end,
            noise: false,
        },
        series,
    })
}

/// Replaces each value by a Poisson draw with that mean.
pub fn add_poisson_noise(meme: &mut SynthMeme, rng: &mut impl Rng) -> Result<(), ModelError> {
    let noisy: Vec<f64> = meme
        .series
        .values()
        .iter()
        .map(|&lambda| match Poisson::new(lambda) {
            Ok(d) => d.sample(rng),
            Err(_) => 0.0,
        })
        .collect();
    meme.series = TimeSeries::new(meme.series.meme_id(), meme.series.granularity(), noisy)?;
    meme.truth.noise = true;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub seed: u64,
    /// Memes per (p, q, quiet) cell.
    pub per_cell: usize,
    pub noise: bool,
}

/// Corpus over the full (p, q, quiet) grid. `m1` is log-uniform in
/// [100, 1000] and the peak ratio uniform in [2, 4].
pub fn grid_corpus(opts: &GridOptions) -> Result<Vec<SynthMeme>, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    for &p in &GRID_P {
        for &q in &GRID_Q {
            for &quiet in &GRID_QUIET {
                for _ in 0..opts.per_cell {
                    let spec = SynthSpec {
                        p,
                        q,
                        quiet,
                        m1: 10f64.powf(rng.random_range(2.0..3.0)),
                        peak_ratio: rng.random_range(2.0..4.0),
                    };
                    let id = format!("synth-{:04}", out.len());
                    let mut meme = generate(id, &spec)?;
                    if opts.noise {
                        add_poisson_noise(&mut meme, &mut rng)?;
                    }
                    out.push(meme);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SynthSpec {
        SynthSpec {
            p: 0.01,
            q: 0.2,
            quiet: 40,
            m1: 300.0,
            peak_ratio: 3.0,
        }
    }

    #[test]
    fn layout_matches_truth() {
        let meme = generate("a", &spec()).unwrap();
        let tr = &meme.truth;
        let s = meme.series.values();
        assert_eq!(s.len(), tr.end + 1);
        assert!(s[..=tr.onset1].iter().all(|&v| v == 0.0));
        assert!(tr.onset1 < tr.t1 && tr.t1 < tr.onset2 && tr.onset2 < tr.t2 && tr.t2 < tr.end);
        // Peak of an isolated Bass pulse sits within a tick of ln(q/p)/(p+q).
        let delay = peak_delay(0.01, 0.2);
        assert!(((tr.t1 - tr.onset1) as f64 - delay).abs() <= 1.0);
        assert!(((tr.t2 - tr.onset2) as f64 - delay).abs() <= 1.0);
    }

    #[test]
    fn superposition_of_pulses() {
        let meme = generate("a", &spec()).unwrap();
        let tr = &meme.truth;
        for (t, &v) in meme.series.values().iter().enumerate() {
            let direct = pulse(tr.spec.m1, 0.01, 0.2, tr.onset1, t) + pulse(tr.m2, 0.01, 0.2, tr.onset2, t);
            assert!((v - direct).abs() <= 1e-9 * direct.max(1.0), "t={t}");
        }
    }

    #[test]
    fn grid_is_seeded() {
        let opts = GridOptions {
            seed: 7,
            per_cell: 1,
            noise: true,
        };
        let a = grid_corpus(&opts).unwrap();
        let b = grid_corpus(&opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 27);
        assert!(a.iter().all(|m| m.series.values().iter().all(|v| v.fract() == 0.0)));
        let c = grid_corpus(&GridOptions { seed: 8, ..opts }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate("a", &SynthSpec { q: 0.005, ..spec() }).is_err());
        assert!(generate("a", &SynthSpec { quiet: 0, ..spec() }).is_err());
    }
}
