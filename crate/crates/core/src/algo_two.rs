//! Algorithm II: three-point fringe tracking.
//!
//! With estimated phases `φ̂_j = k_eff·T²·â_c,j + φ_control,j` for the last three
//! cycles `j = i−2, i−1, i` (indices 0, 1, 2 below), `c_j = cos φ̂_j`,
//! `s_j = sin φ̂_j`:
//!
//! ```text
//! N = (P0 − P1)(c2 − c1) − (P2 − P1)(c0 − c1)
//! D = (s0 − s1)(c2 − c1) − (s2 − s1)(c0 − c1)
//! ```
//!
//! `N` vanishes when the measured probabilities follow the estimated phases,
//! whatever the contrast and offset; to first order `N = (C/2)·ε·D` for a common
//! phase error `ε`. The bias loop is `b̂ += G·N·D/(D² + σ_D²)/(k_eff·T²)`;
//! like every normalized update it waits until `σ_D²` holds
//! `ExpAverage::WARMUP` triplets.
//! Scale and generic coefficients use `D′`, built with the regressor `X_j`
//! weighting `s_j` (`D′ = X·D` when `X` is constant over the triplet).

use crate::error::Result;
use crate::estimator::{pseudo_inverse, CycleInputs, Estimator, EstimatorSettings, EstimatorState, ExpAverage, StepReport};
use crate::math::{cos, sin};
use crate::rng::{channel, NoiseStream};

/// Control-phase sequence applied by the experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields))]
pub enum ModulationSchedule {
    /// Repeating `[+A, 0, −A]`.
    ThreeStep { amplitude: f64 },
    /// Uniform over `[0, 2π)`.
    UniformRandom { seed: u64 },
    Constant { phase: f64 },
}

impl Default for ModulationSchedule {
    fn default() -> Self {
        ModulationSchedule::ThreeStep { amplitude: core::f64::consts::FRAC_PI_2 }
    }
}

impl ModulationSchedule {
    pub fn next_control_phase(&self, i: u64) -> f64 {
        match *self {
            ModulationSchedule::ThreeStep { amplitude } => match i % 3 {
                0 => amplitude,
                1 => 0.0,
                _ => -amplitude,
            },
            ModulationSchedule::UniformRandom { seed } => {
                core::f64::consts::TAU * NoiseStream::at(seed, channel::MODULATION, i).uniform()
            }
            ModulationSchedule::Constant { phase } => phase,
        }
    }
}

/// Which trigonometric term the regressor weights in `D′`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RegressorForm {
    /// `(X0 s0 − X1 s1)(c2 − c1) − (X2 s2 − X1 s1)(c0 − c1)`: the first-order
    /// sensitivity of `N` to an error in the coefficient of `X`.
    #[default]
    SineWeighted,
    /// `(s0 − s1)(X2 c2 − X1 c1) − (s2 − s1)(X0 c0 − X1 c1)`.
    CosineWeighted,
}

/// `N` and `D` from three probabilities and estimated phases.
pub fn compute_nd(p: [f64; 3], phi: [f64; 3]) -> (f64, f64) {
    let c = phi.map(cos);
    let s = phi.map(sin);
    (n_term(p, c), d_term([1.0; 3], c, s, RegressorForm::SineWeighted))
}

#[inline]
fn n_term(p: [f64; 3], c: [f64; 3]) -> f64 {
    (p[0] - p[1]) * (c[2] - c[1]) - (p[2] - p[1]) * (c[0] - c[1])
}

/// `D′` for regressor values `x`; `x = [1, 1, 1]` gives `D`.
pub fn d_term(x: [f64; 3], c: [f64; 3], s: [f64; 3], form: RegressorForm) -> f64 {
    match form {
        RegressorForm::SineWeighted => {
            (x[0] * s[0] - x[1] * s[1]) * (c[2] - c[1]) - (x[2] * s[2] - x[1] * s[1]) * (c[0] - c[1])
        }
        RegressorForm::CosineWeighted => {
            (s[0] - s[1]) * (x[2] * c[2] - x[1] * c[1]) - (s[2] - s[1]) * (x[0] * c[0] - x[1] * c[1])
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Entry {
    p: f64,
    cos: f64,
    sin: f64,
    a_ca: f64,
    regressors: [f64; 6],
}

/// The last three cycles and their estimated phases.
#[derive(Debug, Clone, Default)]
pub struct TripletBuffer {
    entries: [Entry; 3],
    len: usize,
}

impl TripletBuffer {
    fn push(&mut self, e: Entry) {
        self.entries.rotate_left(1);
        self.entries[2] = e;
        self.len = (self.len + 1).min(3);
    }

    pub fn is_full(&self) -> bool {
        self.len == 3
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn cs(&self) -> ([f64; 3], [f64; 3]) {
        (self.entries.map(|e| e.cos), self.entries.map(|e| e.sin))
    }
}

#[derive(Debug, Clone)]
pub struct AlgoTwo {
    settings: EstimatorSettings,
    form: RegressorForm,
    normalize_by_contrast: bool,
    state: EstimatorState,
    buffer: TripletBuffer,
    var_d: ExpAverage,
    var_scale: ExpAverage,
    var_theta: [ExpAverage; 6],
}

impl AlgoTwo {
    pub fn new(
        settings: EstimatorSettings,
        form: RegressorForm,
        normalize_by_contrast: bool,
        initial: EstimatorState,
    ) -> Result<Self> {
        settings.validate()?;
        let avg = ExpAverage::new(settings.alpha());
        Ok(Self {
            settings,
            form,
            normalize_by_contrast,
            state: initial,
            buffer: TripletBuffer::default(),
            var_d: avg,
            var_scale: avg,
            var_theta: [avg; 6],
        })
    }

    pub fn buffer(&self) -> &TripletBuffer {
        &self.buffer
    }
}

impl Estimator for AlgoTwo {
    fn step(&mut self, x: &CycleInputs) -> Result<StepReport> {
        x.validate()?;
        let s = &self.settings;
        let a_c = self.state.corrected_classical(x);
        let phi = s.model.interferometer_phase(a_c, x.phi_control);
        // contrast variations enter the model probabilities relative to the assumed contrast
        let w = if s.contrast_correction { s.contrast_for(x) / s.model.contrast } else { 1.0 };
        let mut regressors = [0.0; 6];
        for c in s.coefficients.iter() {
            regressors[c.index()] = c.regressor(x);
        }
        self.buffer.push(Entry { p: x.p, cos: w * cos(phi), sin: w * sin(phi), a_ca: x.a_ca, regressors });
        self.state.cycles += 1;
        if !self.buffer.is_full() {
            return Ok(StepReport { a_c, a_q: None, nd: None, updated: false, dropped: false });
        }

        let (c, sn) = self.buffer.cs();
        let n = n_term(self.buffer.entries.map(|e| e.p), c);
        let d = d_term([1.0; 3], c, sn, RegressorForm::SineWeighted);
        let var_d = self.var_d.update(d * d);
        let norm = if self.normalize_by_contrast { 2.0 / s.model.contrast } else { 1.0 };
        let k = norm / s.model.phase_scale();
        let (gains, coefficients, estimate_scale, form) = (s.gains, s.coefficients, s.estimate_scale, self.form);

        let warm = |avg: &ExpAverage| if avg.is_warm() { 1.0 } else { 0.0 };
        self.state.b_hat += warm(&self.var_d) * gains.bias * k * n * pseudo_inverse(d, var_d);
        if estimate_scale {
            let dp = d_term(self.buffer.entries.map(|e| e.a_ca), c, sn, form);
            let v = self.var_scale.update(dp * dp);
            self.state.eta_hat += warm(&self.var_scale) * gains.scale * k * n * pseudo_inverse(dp, v);
        }
        for coef in coefficients.iter() {
            let i = coef.index();
            let dp = d_term(self.buffer.entries.map(|e| e.regressors[i]), c, sn, form);
            let v = self.var_theta[i].update(dp * dp);
            self.state.theta[i] += warm(&self.var_theta[i]) * gains.theta[i] * k * n * pseudo_inverse(dp, v);
        }
        Ok(StepReport { a_c, a_q: None, nd: Some((n, d)), updated: true, dropped: false })
    }

    fn state(&self) -> &EstimatorState {
        &self.state
    }

    fn settings(&self) -> &EstimatorSettings {
        &self.settings
    }
}
