//! Two-generation Bass diffusion model.
//!
//! Each generation follows the Bass adoption fraction
//! `F(t) = (1 − e^{−(p+q)t}) / ((q/p) e^{−(p+q)t} + 1)` from its onset. Once
//! the second generation starts it draws adopters from the first:
//!
//! ```text
//! S1(t) = m1 F1(t) (1 − F2(t − on))
//! S2(t) = F2(t − on) (m2 + m1 F1(t))
//! ```
//!
//! These are cumulative adoption levels. The popularity observed per tick is
//! their increment, see [`Simulation::popularity`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{BassGeneration, ModelError, TimeSeries, TwoBeautyProfile, TwoStageBassModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("no innovation signal: S(ta) and S(ta+1) are both zero at tick {0}")]
    NoInnovationSignal(usize),
    #[error("peak-delay equation has no root for p={p}, delta={delta}")]
    NoImitationSolution { p: f64, delta: f64 },
    #[error("awake window [{0}, {1}] has zero popularity")]
    EmptyWakeWindow(usize, usize),
    #[error("corpus-mean innovation coefficients were not supplied")]
    MissingCorpusP,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl FitError {
    /// Short machine-readable tag used in reports.
    pub fn tag(&self) -> &'static str {
        match self {
            FitError::NoInnovationSignal(_) => "no-innovation-signal",
            FitError::NoImitationSolution { .. } => "no-imitation-solution",
            FitError::EmptyWakeWindow(..) => "empty-wake-window",
            FitError::MissingCorpusP => "missing-corpus-p",
            FitError::InvalidArgument(_) => "invalid-argument",
            FitError::Model(_) => "invalid-model",
        }
    }
}

/// Bass adoption fraction at time `t` after onset; 0 before onset.
pub fn bass_cdf(t: f64, p: f64, q: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let e = (-(p + q) * t).exp();
    (1.0 - e) / ((q / p) * e + 1.0)
}

/// Cumulative adoption of each generation at ticks `0..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
}

impl Simulation {
    pub fn total(&self) -> Vec<f64> {
        self.s1.iter().zip(&self.s2).map(|(a, b)| a + b).collect()
    }

    /// Per-tick popularity: the increment of total adoption since the
    /// previous tick.
    pub fn popularity(&self) -> Vec<f64> {
        let total = self.total();
        let mut prev = 0.0;
        total
            .into_iter()
            .map(|c| {
                let inc = c - prev;
                prev = c;
                inc.max(0.0)
            })
            .collect()
    }

    pub fn popularity_series(
        &self,
        meme_id: impl Into<String>,
        granularity: crate::types::Granularity,
    ) -> Result<TimeSeries, ModelError> {
        TimeSeries::new(meme_id, granularity, self.popularity())
    }
}

pub fn simulate(model: &TwoStageBassModel) -> Simulation {
    let (g1, g2) = (&model.g1, &model.g2);
    let n = model.horizon + 1;
    let mut s1 = Vec::with_capacity(n);
    let mut s2 = Vec::with_capacity(n);
    for t in 0..n {
        let f1 = bass_cdf(t as f64 - g1.onset as f64, g1.p, g1.q);
        let f2 = bass_cdf(t as f64 - g2.onset as f64, g2.p, g2.q);
        s1.push(g1.m * f1 * (1.0 - f2));
        s2.push(f2 * (g2.m + g1.m * f1));
    }
    Simulation { s1, s2 }
}

/// Innovation coefficient from the two ticks starting at the awakening:
/// `(S(ta) + S(ta+1)) / (2m)`.
pub fn estimate_p(series: &TimeSeries, ta: usize, m: f64) -> Result<f64, FitError> {
    if ta + 1 > series.end() {
        return Err(FitError::InvalidArgument(format!(
            "ta={ta} leaves no following tick"
        )));
    }
    if !(m > 0.0) {
        return Err(FitError::InvalidArgument(format!("m={m}")));
    }
    let p = (series.at(ta) + series.at(ta + 1)) / (2.0 * m);
    if p == 0.0 {
        return Err(FitError::NoInnovationSignal(ta));
    }
    Ok(p)
}

/// Σ S(t) over the awake window `[ta, tf]`.
pub fn estimate_m(series: &TimeSeries, ta: usize, tf: usize) -> Result<f64, FitError> {
    if ta >= tf || tf > series.end() {
        return Err(FitError::InvalidArgument(format!("window [{ta}, {tf}]")));
    }
    let m = series.window_sum(ta, tf);
    if m == 0.0 {
        return Err(FitError::EmptyWakeWindow(ta, tf));
    }
    Ok(m)
}

/// Roots of `ln(q/p) − Δ(p+q) = 0`, i.e. imitation coefficients whose
/// isolated Bass curve peaks `Δ` ticks after onset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImitationRoots {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootChoice {
    Lower,
    Upper,
}

const ROOT_TOL: f64 = 1e-10;

fn peak_delay_residual(q: f64, p: f64, delta: f64) -> f64 {
    (q / p).ln() - delta * (p + q)
}

/// Bisection on a bracket where `f(lo)` and `f(hi)` have opposite signs.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.abs() < ROOT_TOL || mid <= lo || mid >= hi {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn imitation_roots(p: f64, delta: f64) -> Result<ImitationRoots, FitError> {
    if !(p > 0.0) || !p.is_finite() || !(delta > 0.0) || !delta.is_finite() {
        return Err(FitError::InvalidArgument(format!("p={p}, delta={delta}")));
    }
    let f = |q: f64| peak_delay_residual(q, p, delta);
    // f is concave in q with its maximum at q = 1/delta.
    let apex = 1.0 / delta;
    let f_apex = f(apex);
    if f_apex < 0.0 || apex <= p {
        return Err(FitError::NoImitationSolution { p, delta });
    }
    if f_apex == 0.0 {
        return Ok(ImitationRoots {
            lower: apex,
            upper: apex,
        });
    }
    let lower = bisect(f, p * (1.0 + 1e-9), apex);
    let mut hi = 2.0 * apex;
    while f(hi) >= 0.0 {
        hi *= 2.0;
    }
    let upper = bisect(f, apex, hi);
    Ok(ImitationRoots { lower, upper })
}

/// Imitation coefficient for a peak delay of `delta` ticks (the larger root).
pub fn estimate_q(p: f64, delta: f64) -> Result<f64, FitError> {
    imitation_roots(p, delta).map(|r| r.upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PMode {
    /// Each meme's own innovation coefficients.
    Observed,
    /// Corpus averages of the observed coefficients.
    #[default]
    CorpusMean,
}

impl std::str::FromStr for PMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "observed" => Ok(PMode::Observed),
            "corpus-mean" | "corpus_mean" => Ok(PMode::CorpusMean),
            _ => Err(format!("unknown p-mode `{s}`")),
        }
    }
}

impl std::fmt::Display for PMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PMode::Observed => "observed",
            PMode::CorpusMean => "corpus-mean",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedModel {
    pub model: TwoStageBassModel,
    pub root_choice: [RootChoice; 2],
}

/// Observed innovation coefficients `(p1, p2)` of a profile.
pub fn observed_p(series: &TimeSeries, profile: &TwoBeautyProfile) -> Result<(f64, f64), FitError> {
    let st = profile.stamps();
    let m1 = estimate_m(series, st.ta1, st.tf1)?;
    let m2 = estimate_m(series, st.ta2, st.tf2)?;
    Ok((estimate_p(series, st.ta1, m1)?, estimate_p(series, st.ta2, m2)?))
}

/// Fits both generations on the axis that starts at the first awakening.
pub fn fit(
    series: &TimeSeries,
    profile: &TwoBeautyProfile,
    p_mode: PMode,
    corpus_p: Option<(f64, f64)>,
) -> Result<FittedModel, FitError> {
    let st = profile.stamps();
    let windows = [(st.ta1, st.t1, st.tf1), (st.ta2, st.t2, st.tf2)];
    let mut gens = Vec::with_capacity(2);
    let mut choices = [RootChoice::Upper; 2];
    for (i, &(ta, peak, tf)) in windows.iter().enumerate() {
        let m = estimate_m(series, ta, tf)?;
        let p_obs = estimate_p(series, ta, m)?;
        let p = match p_mode {
            PMode::Observed => p_obs,
            PMode::CorpusMean => {
                let (c1, c2) = corpus_p.ok_or(FitError::MissingCorpusP)?;
                if i == 0 {
                    c1
                } else {
                    c2
                }
            }
        };
        let roots = imitation_roots(p, (peak - ta) as f64)?;
        let observed_peak = series.at(peak);
        let rate = |q: f64| m * (p + q).powi(2) / (4.0 * q);
        let err_upper = (rate(roots.upper) - observed_peak).abs();
        let err_lower = (rate(roots.lower) - observed_peak).abs();
        let (q, choice) = if err_lower < err_upper {
            (roots.lower, RootChoice::Lower)
        } else {
            (roots.upper, RootChoice::Upper)
        };
        choices[i] = choice;
        gens.push(BassGeneration::new(p, q, m, ta - st.ta1)?);
    }
    let model = TwoStageBassModel::new(gens[0], gens[1], st.end - st.ta1)?;
    Ok(FittedModel {
        model,
        root_choice: choices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Granularity;
    use proptest::prelude::*;

    fn series(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new("t", Granularity::Day, v).unwrap()
    }

    #[test]
    fn cdf_limits() {
        assert_eq!(bass_cdf(0.0, 0.01, 0.1), 0.0);
        assert_eq!(bass_cdf(-3.0, 0.01, 0.1), 0.0);
        let (p, q) = (0.01, 0.1);
        assert!(bass_cdf(1e6 / (p + q), p, q) > 1.0 - 1e-6);
    }

    #[test]
    fn cdf_at_peak_time() {
        // e^{-(p+q)t*} = p/q at t* = ln(q/p)/(p+q), so F = (1 - p/q)/2.
        for (p, q) in [(0.01f64, 0.1f64), (0.005, 0.3), (0.02, 0.2)] {
            let t = (q / p).ln() / (p + q);
            assert!((bass_cdf(t, p, q) - (q - p) / (2.0 * q)).abs() < 1e-12);
        }
    }

    #[test]
    fn estimate_p_examples() {
        let s = series(vec![0.0, 2.0, 0.0]);
        assert!((estimate_p(&s, 0, 100.0).unwrap() - 0.01).abs() < 1e-15);
        let s = series(vec![3.0, 5.0, 0.0]);
        assert!((estimate_p(&s, 0, 400.0).unwrap() - 0.01).abs() < 1e-15);
        let s = series(vec![0.0, 0.0, 4.0]);
        assert_eq!(estimate_p(&s, 0, 10.0), Err(FitError::NoInnovationSignal(0)));
    }

    #[test]
    fn estimate_m_examples() {
        let s = series(vec![0.0, 0.0, 4.0, 6.0, 2.0, 0.0]);
        assert_eq!(estimate_m(&s, 1, 5).unwrap(), 12.0);
        let s = series(vec![0.0; 6]);
        assert_eq!(estimate_m(&s, 1, 4), Err(FitError::EmptyWakeWindow(1, 4)));
    }

    #[test]
    fn estimate_m_covers_most_of_a_pulse() {
        let (p, q, m) = (0.02, 0.3, 100.0);
        let model = TwoStageBassModel::new(
            BassGeneration::new(p, q, m, 0).unwrap(),
            BassGeneration::new(p, q, 1e-9, 400).unwrap(),
            399,
        )
        .unwrap();
        let s = simulate(&model).popularity_series("x", Granularity::Day).unwrap();
        for (window, at_least) in [
            ((3.0 / (p + q)).ceil() as usize, 50.0),
            (((q / p).ln() / (p + q) + 4.0 / (p + q)).ceil() as usize, 95.0),
        ] {
            let got = estimate_m(&s, 0, window).unwrap();
            let oracle = m * bass_cdf(window as f64, p, q);
            assert!((got - oracle).abs() < 1e-9);
            assert!(got >= at_least, "window {window}: {got}");
        }
    }

    #[test]
    fn estimate_q_two_roots() {
        let p = 0.01;
        let delta = 10f64.ln() / 0.11;
        let roots = imitation_roots(p, delta).unwrap();
        assert!((roots.upper - 0.1).abs() < 1e-8);
        // Dense grid scan for the sign change below the apex.
        let f = |q: f64| (q / p).ln() - delta * (p + q);
        let mut scan = None;
        let mut q = p * 1.0001;
        while q < 1.0 / delta {
            let next = q + 1e-6;
            if f(q) < 0.0 && f(next) >= 0.0 {
                scan = Some(next);
                break;
            }
            q = next;
        }
        let scan = scan.unwrap();
        assert!((roots.lower - scan).abs() < 2e-6);
        assert!((roots.lower - 0.0176).abs() < 1e-3);
        assert_eq!(estimate_q(p, delta).unwrap(), roots.upper);
    }

    #[test]
    fn estimate_q_no_solution() {
        assert!(matches!(
            estimate_q(0.5, 10.0),
            Err(FitError::NoImitationSolution { .. })
        ));
    }

    fn example_model() -> TwoStageBassModel {
        TwoStageBassModel::new(
            BassGeneration::new(0.01, 0.1, 100.0, 0).unwrap(),
            BassGeneration::new(0.01, 0.1, 1000.0, 40).unwrap(),
            120,
        )
        .unwrap()
    }

    #[test]
    fn simulate_first_generation_only_before_onset() {
        let model = example_model();
        let sim = simulate(&model);
        for t in 0..40 {
            assert_eq!(sim.s1[t], 100.0 * bass_cdf(t as f64, 0.01, 0.1));
            assert_eq!(sim.s2[t], 0.0);
        }
    }

    #[test]
    fn simulate_matches_direct_evaluation() {
        // Values from an independent evaluation of the cumulative equations.
        let sim = simulate(&example_model());
        let total = sim.total();
        let expected = [
            (0, 0.0),
            (20, 42.18138136760228),
            (40, 87.97168341801247),
            (60, 520.3374922396716),
            (120, 1098.3423960393684),
        ];
        for (t, v) in expected {
            assert!((total[t] - v).abs() <= 1e-9 * v.max(1.0), "t={t}: {}", total[t]);
        }
        let pop = sim.popularity();
        assert_eq!(pop.len(), 121);
        assert!((pop[60] - (total[60] - total[59])).abs() < 1e-12);
    }

    #[test]
    fn round_trip_fit_on_noiseless_model() {
        use crate::beauty::identify_two_beauties;
        use crate::peaks::PeakParams;

        let lead = 40;
        let model = TwoStageBassModel::new(
            BassGeneration::new(0.02, 0.3, 200.0, 0).unwrap(),
            BassGeneration::new(0.02, 0.3, 600.0, 60).unwrap(),
            110,
        )
        .unwrap();
        let mut v = vec![0.0; lead];
        v.extend(simulate(&model).popularity());
        let s = series(v);
        let profile = identify_two_beauties(&s, &PeakParams::default(), 1.0 / 3.0).unwrap();
        let fitted = fit(&s, &profile, PMode::Observed, None).unwrap();

        let sim = simulate(&fitted.model).popularity();
        let obs = &s.values()[profile.stamps().ta1..];
        let n = sim.len().min(obs.len());
        let r = crate::eval::pearson(&sim[..n], &obs[..n]).unwrap();
        assert!(r > 0.95, "r={r}");

        // The second-generation peak sits where the peak-delay equation says.
        let g2 = fitted.model.g2;
        let predicted = g2.onset + g2.peak_delay().unwrap().round() as usize;
        let peak = crate::eval::argmax_from(&sim, g2.onset).unwrap();
        assert!(peak.abs_diff(predicted) <= 1, "{peak} vs {predicted}");

        let (p1, p2) = observed_p(&s, &profile).unwrap();
        let same = fit(&s, &profile, PMode::CorpusMean, Some((p1, p2))).unwrap();
        assert_eq!(same, fitted);
        assert_eq!(
            fit(&s, &profile, PMode::CorpusMean, None),
            Err(FitError::MissingCorpusP)
        );
    }

    #[test]
    fn innovation_estimate_at_exact_onset_is_half_the_first_step() {
        // With S(ta) = 0 at the onset, the estimate reduces to F(1)/2 times
        // m / window mass.
        let (p, q, m) = (0.01, 0.2, 1000.0);
        let model = TwoStageBassModel::new(
            BassGeneration::new(p, q, m, 0).unwrap(),
            BassGeneration::new(p, q, 1e-9, 500).unwrap(),
            499,
        )
        .unwrap();
        let s = simulate(&model).popularity_series("x", Granularity::Day).unwrap();
        let tf = 300;
        let mass = estimate_m(&s, 0, tf).unwrap();
        let got = estimate_p(&s, 0, mass).unwrap();
        let oracle = m * bass_cdf(1.0, p, q) / (2.0 * m * bass_cdf(tf as f64, p, q));
        assert!((got - oracle).abs() < 1e-12);
        assert!((0.5..0.6).contains(&(got / p)), "{}", got / p);
    }

    #[test]
    fn fit_reports_missing_innovation_signal() {
        use crate::types::{BeautyMeasures, Stamps};
        let mut v = vec![0.0; 40];
        v[11] = 5.0;
        v[12] = 1.0;
        v[30] = 20.0;
        v[31] = 2.0;
        let s = series(v);
        let stamps = Stamps {
            t0: 0,
            ta1: 9,
            t1: 11,
            tf1: 13,
            ta2: 28,
            t2: 30,
            tf2: 32,
            end: 39,
        };
        let profile = TwoBeautyProfile::new(
            "t",
            stamps,
            BeautyMeasures {
                b1: 10.0,
                b2: 10.0,
                m1: 6.0,
                m2: 22.0,
                v1: 2.5,
                v2: 10.0,
                peak1: 5.0,
                peak2: 20.0,
            },
            1.0 / 3.0,
        )
        .unwrap();
        assert_eq!(
            fit(&s, &profile, PMode::Observed, None),
            Err(FitError::NoInnovationSignal(9))
        );
    }

    proptest! {
        #[test]
        fn cdf_increasing_and_bounded(p in 0.001f64..0.1, q in 0.01f64..1.0, t in 0.0f64..200.0) {
            let a = bass_cdf(t, p, q);
            let b = bass_cdf(t + 0.5, p, q);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b >= a);
        }

        #[test]
        fn estimate_q_inverts_peak_delay(p in 0.001f64..0.05, delta in 1.0f64..60.0) {
            match imitation_roots(p, delta) {
                Ok(r) => {
                    for q in [r.lower, r.upper] {
                        prop_assert!(q > p);
                        prop_assert!(((q / p).ln() - delta * (p + q)).abs() < 1e-8);
                        prop_assert!(((q / p).ln() / (p + q) - delta).abs() < 1e-6);
                    }
                }
                Err(FitError::NoImitationSolution { .. }) => {
                    let apex = 1.0 / delta;
                    prop_assert!(apex <= p || (apex / p).ln() - delta * (p + apex) < 0.0);
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn superposition_identity(
            p1 in 0.001f64..0.05, q1 in 0.05f64..0.5, m1 in 1.0f64..1e4,
            p2 in 0.001f64..0.05, q2 in 0.05f64..0.5, m2 in 1.0f64..1e4,
            onset in 1usize..80,
        ) {
            let model = TwoStageBassModel::new(
                BassGeneration::new(p1, q1, m1, 0).unwrap(),
                BassGeneration::new(p2, q2, m2, onset).unwrap(),
                150,
            ).unwrap();
            let sim = simulate(&model);
            for (t, total) in sim.total().into_iter().enumerate() {
                let direct = m1 * bass_cdf(t as f64, p1, q1)
                    + m2 * bass_cdf(t as f64 - onset as f64, p2, q2);
                prop_assert!((total - direct).abs() <= 1e-9 * direct.abs().max(1e-300));
            }
        }
    }
}
