//! Runs sweep points: every seed is an independent cell, seeds run in parallel.

use qa_hybrid_core::algo_one::AlgoOne;
use qa_hybrid_core::algo_two::{AlgoTwo, ModulationSchedule};
use qa_hybrid_core::analysis::{
    allan_deviation, classify_convergence, fit_white_level, loglog_slope, mad, median, residual_std, AllanCurve,
};
use qa_hybrid_core::estimator::{Estimator, EstimatorState};
use qa_hybrid_core::limits;
use qa_hybrid_core::pipeline::{noise_reference, run_lanes, CycleGenerator, Lane, Trace};
use rayon::prelude::*;

use crate::config::{Algorithm, ScenarioConfig, SweepPoint, TraceOutput};
use crate::error::RunError;

/// Result of one series (an estimator or a noise reference) for one seed.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub converged: bool,
    /// Fitted white level at one cycle; NaN when diverged or not fittable.
    pub level: f64,
    pub slope: f64,
    /// Std of `a_q − a_c` over the second half of the run.
    pub residual_std: f64,
    pub dropped_fraction: f64,
    pub final_state: EstimatorState,
    pub allan: Option<AllanCurve>,
    pub trace: Option<Trace>,
}

/// One series over all seeds of a sweep point.
#[derive(Debug, Clone)]
pub struct SeriesOutcome {
    /// `algo1`, `algo2`, `ref_uncorrelated` or `ref_detection`.
    pub label: String,
    pub algorithm: Option<Algorithm>,
    pub seeds: Vec<SeedOutcome>,
}

impl SeriesOutcome {
    /// Levels of the converged seeds.
    pub fn levels(&self) -> Vec<f64> {
        self.seeds.iter().filter(|s| s.converged && s.level.is_finite()).map(|s| s.level).collect()
    }

    pub fn converged(&self) -> usize {
        self.seeds.iter().filter(|s| s.converged).count()
    }

    /// Median level over converged seeds; NaN unless at least half converged.
    pub fn median_level(&self) -> f64 {
        let l = self.levels();
        if l.is_empty() || 2 * l.len() < self.seeds.len() {
            f64::NAN
        } else {
            median(&l)
        }
    }

    pub fn mad_level(&self) -> f64 {
        let l = self.levels();
        if l.is_empty() {
            f64::NAN
        } else {
            mad(&l)
        }
    }

    fn median_of(&self, f: impl Fn(&SeedOutcome) -> f64) -> f64 {
        let v: Vec<f64> = self.seeds.iter().map(f).filter(|v| v.is_finite()).collect();
        if v.is_empty() {
            f64::NAN
        } else {
            median(&v)
        }
    }

    pub fn median_slope(&self) -> f64 {
        self.median_of(|s| if s.converged { s.slope } else { f64::NAN })
    }

    pub fn median_residual_std(&self) -> f64 {
        self.median_of(|s| s.residual_std)
    }

    pub fn median_dropped_fraction(&self) -> f64 {
        self.median_of(|s| s.dropped_fraction)
    }

    pub fn median_final(&self, f: impl Fn(&EstimatorState) -> f64) -> f64 {
        self.median_of(|s| f(&s.final_state))
    }
}

/// Analytic limits at a sweep point, from the true instrument and truth noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub pulse_separation: f64,
    pub detection_1cycle: f64,
    pub uncorrelated_1cycle: f64,
    pub coriolis_1cycle: f64,
    /// 1-s contrast-noise limit.
    pub contrast_1s: f64,
}

impl Limits {
    pub fn of(cfg: &ScenarioConfig) -> Self {
        let t = &cfg.truth;
        let (sx, sy) = (t.omega_x.cycle_std(), t.omega_y.cycle_std());
        Self {
            pulse_separation: cfg.interferometer.pulse_separation,
            detection_1cycle: limits::detection_limit(&cfg.interferometer),
            uncorrelated_1cycle: t.scale * t.ca_noise.cycle_std(),
            coriolis_1cycle: limits::coriolis_limit(t.v_x0, t.v_y0, sx, sy),
            contrast_1s: limits::contrast_limit_1s(&cfg.interferometer, sx, sy),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub point: SweepPoint,
    pub hash: String,
    pub series: Vec<SeriesOutcome>,
    pub limits: Limits,
}

impl PointOutcome {
    pub fn series(&self, label: &str) -> Option<&SeriesOutcome> {
        self.series.iter().find(|s| s.label == label)
    }
}

/// Run-time options that are not part of the scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Keep traces in memory for every seed regardless of the output setting.
    pub keep_traces: bool,
}

fn keep_trace(cfg: &ScenarioConfig, opts: RunOptions, seed_pos: usize) -> bool {
    opts.keep_traces
        || match cfg.output.traces {
            TraceOutput::None => false,
            TraceOutput::FirstSeed => seed_pos == 0,
            TraceOutput::All => true,
        }
}

/// Run all seeds of one sweep point.
pub fn run_point(point: &SweepPoint, opts: RunOptions) -> Result<PointOutcome, RunError> {
    let cfg = &point.config;
    let seeds = cfg.seeds.list();
    let per_seed: Vec<Vec<(String, Option<Algorithm>, SeedOutcome)>> = seeds
        .par_iter()
        .enumerate()
        .map(|(pos, &seed)| run_seed(cfg, seed, keep_trace(cfg, opts, pos)))
        .collect::<Result<_, _>>()?;

    let mut series: Vec<SeriesOutcome> = Vec::new();
    for cells in per_seed {
        for (label, algorithm, outcome) in cells {
            match series.iter_mut().find(|s| s.label == label) {
                Some(s) => s.seeds.push(outcome),
                None => series.push(SeriesOutcome { label, algorithm, seeds: vec![outcome] }),
            }
        }
    }
    Ok(PointOutcome { point: point.clone(), hash: cfg.hash(), series, limits: Limits::of(cfg) })
}

fn run_seed(
    cfg: &ScenarioConfig,
    seed: u64,
    keep: bool,
) -> Result<Vec<(String, Option<Algorithm>, SeedOutcome)>, RunError> {
    let generator = CycleGenerator::new(cfg.scenario(seed))?;
    let model = cfg.assumed_model();
    let init = cfg.initial.state();
    let mut estimators: Vec<(Algorithm, Box<dyn Estimator>)> = Vec::new();
    for &a in &cfg.algorithms {
        let ac = cfg.algorithm(a);
        let settings = ac.settings(a, model);
        let e: Box<dyn Estimator> = match a {
            Algorithm::Algo1 => Box::new(AlgoOne::new(settings, ac.regularization, init)?),
            Algorithm::Algo2 => {
                Box::new(AlgoTwo::new(settings, ac.regressor_form, ac.normalize_by_contrast, init)?)
            }
        };
        estimators.push((a, e));
    }
    let schedules: Vec<ModulationSchedule> = estimators.iter().map(|(a, _)| cfg.algorithm(*a).schedule(*a)).collect();
    let mut lanes: Vec<Lane<'_>> =
        estimators.iter_mut().zip(&schedules).map(|((_, e), s)| Lane::new(e.as_mut(), *s)).collect();
    run_lanes(&generator, &mut lanes, cfg.cycles)?;

    let mut out = Vec::new();
    for (lane, &a) in lanes.into_iter().zip(&cfg.algorithms) {
        let gain = cfg.algorithm(a).bias_gain(a);
        let outcome = analyze_estimator(cfg, seed, gain, lane.estimator.state(), lane.trace, keep);
        out.push((a.name().to_owned(), Some(a), outcome));
    }
    if cfg.references {
        let schedule = cfg.algo_one.schedule(Algorithm::Algo1);
        let r = noise_reference(&generator, schedule, cfg.cycles)?;
        for (label, s) in [("ref_uncorrelated", r.uncorrelated), ("ref_detection", r.detection)] {
            out.push((label.to_owned(), None, analyze_reference(cfg, seed, &s)));
        }
    }
    Ok(out)
}

fn fit(cfg: &ScenarioConfig, series: &[f64], tau_min: f64) -> (f64, f64, Option<AllanCurve>) {
    match allan_deviation(series, cfg.interferometer.cycle_time) {
        Ok(curve) if curve.sigma.iter().all(|s| *s == 0.0) => (0.0, f64::NAN, Some(curve)),
        Ok(curve) => {
            let level = fit_white_level(&curve, tau_min).unwrap_or(f64::NAN);
            let slope = loglog_slope(&curve, tau_min).unwrap_or(f64::NAN);
            (level, slope, Some(curve))
        }
        Err(_) => (f64::NAN, f64::NAN, None),
    }
}

fn analyze_estimator(
    cfg: &ScenarioConfig,
    seed: u64,
    gain: f64,
    state: &EstimatorState,
    trace: Trace,
    keep: bool,
) -> SeedOutcome {
    let r = &trace.records;
    let skip = (cfg.discard_fraction * r.len() as f64) as usize;
    let err: Vec<f64> = r.iter().map(|x| x.b_hat - cfg.truth.bias_at(x.time)).collect();
    let converged = classify_convergence(&err, 0.0, cfg.interferometer.fringe_spacing()).is_converged();
    let (level, slope, allan) = if converged {
        let b: Vec<f64> = r[skip..].iter().map(|x| x.b_hat).collect();
        fit(cfg, &b, cfg.fit_start * cfg.interferometer.cycle_time / gain)
    } else {
        (f64::NAN, f64::NAN, None)
    };
    let half = &r[r.len() / 2..];
    let a_q: Vec<f64> = half.iter().map(|x| x.a_q).collect();
    let a_c: Vec<f64> = half.iter().map(|x| x.a_c).collect();
    SeedOutcome {
        seed,
        converged,
        level,
        slope,
        residual_std: residual_std(&a_q, &a_c).unwrap_or(f64::NAN),
        dropped_fraction: trace.dropped_fraction(),
        final_state: *state,
        allan,
        trace: keep.then_some(trace),
    }
}

fn analyze_reference(cfg: &ScenarioConfig, seed: u64, series: &[f64]) -> SeedOutcome {
    let skip = (cfg.discard_fraction * series.len() as f64) as usize;
    let (level, slope, allan) = fit(cfg, &series[skip..], cfg.fit_start * cfg.interferometer.cycle_time);
    SeedOutcome {
        seed,
        converged: true,
        level,
        slope,
        residual_std: f64::NAN,
        dropped_fraction: 0.0,
        final_state: EstimatorState::default(),
        allan,
        trace: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_converges_to_truth_with_zero_stability() {
        let text = r#"
name = "zero"
cycles = 6000
seeds = 2
[interferometer]
detection_noise = 0.0
[truth]
bias = 2e-5
scale = 1.001
[truth.accel_z]
held = 0.38
"#;
        let cfg = ScenarioConfig::from_toml_str(text).unwrap();
        let point = &cfg.expand().unwrap()[0];
        let out = run_point(point, RunOptions::default()).unwrap();
        for s in &out.series {
            for seed in &s.seeds {
                assert!(seed.converged);
                assert!((seed.final_state.b_hat - 2e-5).abs() < 1e-12, "{} {}", s.label, seed.final_state.b_hat);
                assert!((seed.final_state.eta_hat - 1.001).abs() < 1e-9);
                assert!(seed.level < 1e-12, "{}", seed.level);
            }
        }
    }

    #[test]
    fn seeds_are_independent_of_thread_count() {
        let text = "name = \"d\"\ncycles = 500\nseeds = [3, 1]\n[truth.accel_z]\nheld = 0.38\n[truth.ca_noise]\nheld = 4.8e-5\n";
        let cfg = ScenarioConfig::from_toml_str(text).unwrap();
        let point = &cfg.expand().unwrap()[0];
        let a = run_point(point, RunOptions::default()).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_point(point, RunOptions::default())).unwrap();
        for (x, y) in a.series.iter().zip(&b.series) {
            assert_eq!(x.seeds.iter().map(|s| s.seed).collect::<Vec<_>>(), vec![3, 1]);
            for (p, q) in x.seeds.iter().zip(&y.seeds) {
                assert_eq!(p.final_state, q.final_state);
            }
        }
    }
}
