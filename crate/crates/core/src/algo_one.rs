//! Algorithm I: direct phase extraction.
//!
//! The fringe is inverted with `arccos`, the 2π ambiguity is resolved by taking
//! the candidate closest to the corrected classical estimate `â_c`, and the
//! error `e = â_q − â_c` drives integrator loops:
//!
//! ```text
//! b̂ += G_b·e
//! η̂ += G_η·e·a_CA/(a_CA² + σ²)
//! θ̂ += G_θ·e·X/(X² + σ_X²)
//! ```
//!
//! `σ²` and `σ_X²` are exponential averages of the squared regressors; the
//! normalized updates wait until an average holds `ExpAverage::WARMUP` samples.
//! Cycles
//! whose `arccos` argument falls outside `[−1, 1]` are dropped.

use crate::error::Result;
use crate::estimator::{
    pseudo_inverse, Coefficient, CycleInputs, Estimator, EstimatorSettings, EstimatorState, ExpAverage, StepReport,
};
use crate::math::{acos, round};
use crate::signal_model::InterferometerConfig;

/// How a regressor enters the scale and coefficient updates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regularization {
    /// `X/(X² + σ_X²)`.
    #[default]
    PseudoInverse,
    /// `X` itself.
    Proportional,
}

/// Invert the fringe and return the QA acceleration nearest to `a_c`, or
/// `None` when `|2(P0 − P)/C| > 1`.
pub fn extract_phase(model: &InterferometerConfig, x: &CycleInputs, a_c: f64, contrast: f64) -> Option<f64> {
    let arg = 2.0 * (model.offset - x.p) / contrast;
    if !(-1.0..=1.0).contains(&arg) {
        return None;
    }
    let phi = acos(arg);
    let kt2 = model.phase_scale();
    let fringe = model.fringe_spacing();
    let nearest = |sign: f64| {
        let base = (sign * phi - x.phi_control) / kt2;
        base + round((a_c - base) / fringe) * fringe
    };
    let (p, m) = (nearest(1.0), nearest(-1.0));
    Some(if (p - a_c).abs() <= (m - a_c).abs() { p } else { m })
}

#[derive(Debug, Clone)]
pub struct AlgoOne {
    settings: EstimatorSettings,
    regularization: Regularization,
    state: EstimatorState,
    var_scale: ExpAverage,
    var_theta: [ExpAverage; 6],
}

impl AlgoOne {
    pub fn new(settings: EstimatorSettings, regularization: Regularization, initial: EstimatorState) -> Result<Self> {
        settings.validate()?;
        let avg = ExpAverage::new(settings.alpha());
        Ok(Self { settings, regularization, state: initial, var_scale: avg, var_theta: [avg; 6] })
    }

    fn weight(&self, x: f64, avg: &ExpAverage) -> f64 {
        match self.regularization {
            Regularization::PseudoInverse if avg.is_warm() => pseudo_inverse(x, avg.value()),
            Regularization::PseudoInverse => 0.0,
            Regularization::Proportional => x,
        }
    }
}

impl Estimator for AlgoOne {
    fn step(&mut self, x: &CycleInputs) -> Result<StepReport> {
        x.validate()?;
        let s = &self.settings;
        let a_c = self.state.corrected_classical(x);
        self.var_scale.update(x.a_ca * x.a_ca);
        for c in s.coefficients.iter() {
            let r = c.regressor(x);
            self.var_theta[c.index()].update(r * r);
        }
        self.state.cycles += 1;

        let Some(a_q) = extract_phase(&s.model, x, a_c, s.contrast_for(x)) else {
            self.state.dropped += 1;
            return Ok(StepReport { a_c, a_q: None, nd: None, updated: false, dropped: true });
        };
        let e = a_q - a_c;
        let (gains, coefficients, estimate_scale) = (s.gains, s.coefficients, s.estimate_scale);
        self.state.b_hat += gains.bias * e;
        if estimate_scale {
            self.state.eta_hat += gains.scale * e * self.weight(x.a_ca, &self.var_scale);
        }
        for c in coefficients.iter() {
            let i = c.index();
            self.state.theta[i] += gains.theta[i] * e * self.weight(c.regressor(x), &self.var_theta[i]);
        }
        Ok(StepReport { a_c, a_q: Some(a_q), nd: None, updated: true, dropped: false })
    }

    fn state(&self) -> &EstimatorState {
        &self.state
    }

    fn settings(&self) -> &EstimatorSettings {
        &self.settings
    }
}

impl AlgoOne {
    pub fn coefficient_variance(&self, c: Coefficient) -> f64 {
        self.var_theta[c.index()].value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{CoefficientSet, Gains};
    use core::f64::consts::PI;

    fn model() -> InterferometerConfig {
        InterferometerConfig::default()
    }

    #[test]
    fn branch_examples() {
        let m = model();
        let fringe = m.fringe_spacing();
        let x = CycleInputs { p: m.offset, ..CycleInputs::default() };
        let a = extract_phase(&m, &x, 0.24 * fringe, m.contrast).unwrap();
        assert!((a - 0.25 * fringe).abs() < 1e-15);
        // arccos is ill-conditioned at the fringe bottom: rounding in P maps to ~1e-12 m/s²
        let x = CycleInputs { p: m.offset - m.contrast / 2.0, ..CycleInputs::default() };
        assert!(extract_phase(&m, &x, 1e-6, m.contrast).unwrap().abs() < 1e-11);
        let x = CycleInputs { p: m.offset - 0.6 * m.contrast, ..CycleInputs::default() };
        assert_eq!(extract_phase(&m, &x, 0.0, m.contrast), None);
    }

    #[test]
    fn branch_recovers_truth_without_slips() {
        let m = model();
        let fringe = m.fringe_spacing();
        for i in 0..2000 {
            let a = -3.0 + 6.0 * (i as f64 * 0.618_033_988_75).fract();
            let phi_c = [PI / 2.0, 0.0, -PI / 2.0][i % 3];
            let p = m.transition_probability(m.contrast, m.interferometer_phase(a, phi_c), 0.0);
            let x = CycleInputs { p, phi_control: phi_c, ..CycleInputs::default() };
            // the mirror solution sits at the reflected phase; stay closer to the truth than to it
            let kt2 = m.phase_scale();
            let wrapped = (kt2 * a + phi_c).rem_euclid(2.0 * PI);
            let to_mirror = wrapped.min(2.0 * PI - wrapped).min((wrapped - PI).abs()) * 2.0 / kt2;
            let limit = (0.25 * fringe).min(0.5 * to_mirror);
            let offset = 0.98 * limit * 2.0 * ((i as f64 * 0.414_213_56).fract() - 0.5);
            let got = extract_phase(&m, &x, a + offset, m.contrast).unwrap();
            assert!((got - a).abs() < 1e-9 * fringe, "{got} vs {a}");
        }
    }

    #[test]
    fn mirror_solution_wins_near_fringe_extremum() {
        let m = model();
        let fringe = m.fringe_spacing();
        let a = 0.01 * fringe;
        let p = m.transition_probability(m.contrast, m.interferometer_phase(a, 0.0), 0.0);
        let x = CycleInputs { p, ..CycleInputs::default() };
        let got = extract_phase(&m, &x, -0.2 * fringe, m.contrast).unwrap();
        assert!((got + a).abs() < 1e-9 * fringe);
    }

    #[test]
    fn bias_gain_example() {
        // e = 1e-4 with G = 0.2 moves b̂ by 2e-5
        let m = model();
        let a_true = 1e-4;
        let p = m.transition_probability(m.contrast, m.interferometer_phase(a_true, 0.0), 0.0);
        let mut s = EstimatorSettings::new(m, 0.2);
        s.estimate_scale = false;
        let mut algo = AlgoOne::new(s, Regularization::PseudoInverse, EstimatorState::default()).unwrap();
        let r = algo.step(&CycleInputs { p, ..CycleInputs::default() }).unwrap();
        assert!(r.updated);
        assert!((algo.state().b_hat - 2e-5).abs() < 1e-12);
    }

    #[test]
    fn zero_error_leaves_state() {
        let m = model();
        let mut s = EstimatorSettings::new(m, 0.2);
        s.coefficients = CoefficientSet::ALL;
        let init = EstimatorState { b_hat: 2e-5, eta_hat: 1.001, ..EstimatorState::default() };
        let mut algo = AlgoOne::new(s, Regularization::PseudoInverse, init).unwrap();
        let mut x = CycleInputs { a_ca: 0.3, a_x: 0.1, omega_y: 0.01, ..CycleInputs::default() };
        x.p = m.transition_probability(m.contrast, m.interferometer_phase(init.corrected_classical(&x), 0.7), 0.0);
        x.phi_control = 0.7;
        for _ in 0..2 * ExpAverage::WARMUP {
            algo.step(&x).unwrap();
        }
        let st = algo.state();
        assert!((st.b_hat - init.b_hat).abs() < 1e-15);
        assert!((st.eta_hat - init.eta_hat).abs() < 1e-14);
        assert!(st.theta.iter().all(|t| t.abs() < 1e-14));
    }

    #[test]
    fn scale_update_is_bounded() {
        let m = model();
        let mut s = EstimatorSettings::new(m, 0.2);
        s.gains = Gains { bias: 0.0, scale: 0.2, theta: [0.0; 6] };
        let mut algo = AlgoOne::new(s, Regularization::PseudoInverse, EstimatorState::default()).unwrap();
        for i in 0..200 {
            let a_ca = 0.5 * ((i as f64 * 0.7548).fract() - 0.5);
            let before = *algo.state();
            let a_true = 1.0003 * a_ca;
            let p = m.transition_probability(m.contrast, m.interferometer_phase(a_true, 0.0), 0.0);
            let r = algo.step(&CycleInputs { p, a_ca, ..CycleInputs::default() }).unwrap();
            if let Some(a_q) = r.a_q {
                let e = a_q - r.a_c;
                let bound = 0.2 * e.abs() / (2.0 * algo.var_scale.value().sqrt());
                assert!((algo.state().eta_hat - before.eta_hat).abs() <= bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn small_first_regressor_does_not_throw_the_scale() {
        // with σ² taken from the first sample alone the step would be G·e/(2·a_CA) = 1
        let m = model();
        let mut s = EstimatorSettings::new(m, 0.2);
        s.gains.bias = 0.0;
        let mut algo = AlgoOne::new(s, Regularization::PseudoInverse, EstimatorState::default()).unwrap();
        let a_ca = 1e-6;
        let p = m.transition_probability(m.contrast, m.interferometer_phase(a_ca + 1e-5, 0.0), 0.0);
        algo.step(&CycleInputs { p, a_ca, ..CycleInputs::default() }).unwrap();
        assert_eq!(algo.state().eta_hat, 1.0);
    }

    #[test]
    fn contrast_correction_without_rotation_is_neutral() {
        let mut m = model();
        m.velocity_spread = 0.01;
        let mut s = EstimatorSettings::new(m, 0.2);
        let x = CycleInputs { p: 0.4, ..CycleInputs::default() };
        let plain = s.contrast_for(&x);
        s.contrast_correction = true;
        assert_eq!(s.contrast_for(&x), plain);
        let spun = CycleInputs { omega_x: 5e-3, omega_y: 13e-3, ..x };
        assert!(s.contrast_for(&spun) < plain);
    }

    #[test]
    fn rejects_nan() {
        let mut algo = AlgoOne::new(EstimatorSettings::new(model(), 0.2), Regularization::PseudoInverse, EstimatorState::default()).unwrap();
        assert!(algo.step(&CycleInputs { p: f64::NAN, ..CycleInputs::default() }).is_err());
    }
}
