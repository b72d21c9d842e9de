//! State and inputs shared by both hybridization algorithms.
//!
//! The classical estimate of the QA acceleration at cycle `i` is
//!
//! ```text
//! â_c = η̂·a_CA + η̂′·a′ + η̂″·a″ + η̂_x·a_x + η̂_y·a_y + 2·v̂_x0·Ω_y − 2·v̂_y0·Ω_x + b̂
//! ```
//!
//! Each generic coefficient θ multiplies one regressor `X` built from the cycle
//! inputs (see [`Coefficient::regressor`]). Coefficients that are not being
//! estimated keep their initial value, so a zero start disables them.

use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};
use crate::signal_model::{InterferometerConfig, RotationState};

/// Generic sensitivity coefficients beyond bias and scale factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Coefficient {
    /// `η′`, s; regressor `a′_z`.
    EtaPrime,
    /// `η″`, s²; regressor `a″_z`.
    EtaDprime,
    /// `η_x`; regressor `a_x`.
    EtaX,
    /// `η_y`; regressor `a_y`.
    EtaY,
    /// `v_x0`, m/s; regressor `2·Ω_y`.
    VX0,
    /// `v_y0`, m/s; regressor `−2·Ω_x`.
    VY0,
}

impl Coefficient {
    pub const ALL: [Coefficient; 6] = [
        Coefficient::EtaPrime,
        Coefficient::EtaDprime,
        Coefficient::EtaX,
        Coefficient::EtaY,
        Coefficient::VX0,
        Coefficient::VY0,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn name(self) -> &'static str {
        match self {
            Coefficient::EtaPrime => "eta_prime",
            Coefficient::EtaDprime => "eta_dprime",
            Coefficient::EtaX => "eta_x",
            Coefficient::EtaY => "eta_y",
            Coefficient::VX0 => "v_x0",
            Coefficient::VY0 => "v_y0",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    #[inline]
    pub fn regressor(self, x: &CycleInputs) -> f64 {
        match self {
            Coefficient::EtaPrime => x.a_prime,
            Coefficient::EtaDprime => x.a_dprime,
            Coefficient::EtaX => x.a_x,
            Coefficient::EtaY => x.a_y,
            Coefficient::VX0 => 2.0 * x.omega_y,
            Coefficient::VY0 => -2.0 * x.omega_x,
        }
    }
}

/// Set of coefficients, stored as a bit mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CoefficientSet(u8);

impl CoefficientSet {
    pub const EMPTY: Self = Self(0);
    pub const ALL: Self = Self(0b11_1111);

    pub fn contains(self, c: Coefficient) -> bool {
        self.0 & (1 << c.index()) != 0
    }

    pub fn insert(&mut self, c: Coefficient) {
        self.0 |= 1 << c.index();
    }

    pub fn remove(&mut self, c: Coefficient) {
        self.0 &= !(1 << c.index());
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Coefficient> {
        Coefficient::ALL.into_iter().filter(move |c| self.contains(*c))
    }
}

impl FromIterator<Coefficient> for CoefficientSet {
    fn from_iter<I: IntoIterator<Item = Coefficient>>(iter: I) -> Self {
        let mut s = Self::EMPTY;
        for c in iter {
            s.insert(c);
        }
        s
    }
}

/// What an estimator sees at one cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CycleInputs {
    /// Measured transition probability.
    pub p: f64,
    pub phi_control: f64,
    /// Kernel-weighted CA vertical acceleration, m/s².
    pub a_ca: f64,
    /// Kernel-weighted first derivative of the CA output, m/s³.
    pub a_prime: f64,
    /// Kernel-weighted second derivative of the CA output, m/s⁴.
    pub a_dprime: f64,
    pub a_x: f64,
    pub a_y: f64,
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
}

impl CycleInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p", self.p),
            ("phi_control", self.phi_control),
            ("a_ca", self.a_ca),
            ("a_prime", self.a_prime),
            ("a_dprime", self.a_dprime),
            ("a_x", self.a_x),
            ("a_y", self.a_y),
            ("omega_x", self.omega_x),
            ("omega_y", self.omega_y),
            ("omega_z", self.omega_z),
        ] {
            ensure_finite(name, v)?;
        }
        Ok(())
    }

    /// Rotation rates of this cycle with zero launch velocity.
    pub fn rotation(&self) -> RotationState {
        RotationState { omega_x: self.omega_x, omega_y: self.omega_y, omega_z: self.omega_z, ..RotationState::default() }
    }
}

/// Current estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorState {
    pub b_hat: f64,
    pub eta_hat: f64,
    /// Indexed by [`Coefficient::index`].
    pub theta: [f64; 6],
    pub cycles: u64,
    pub dropped: u64,
}

impl Default for EstimatorState {
    fn default() -> Self {
        Self { b_hat: 0.0, eta_hat: 1.0, theta: [0.0; 6], cycles: 0, dropped: 0 }
    }
}

impl EstimatorState {
    pub fn theta(&self, c: Coefficient) -> f64 {
        self.theta[c.index()]
    }

    pub fn with_theta(mut self, c: Coefficient, v: f64) -> Self {
        self.theta[c.index()] = v;
        self
    }

    /// Corrected classical acceleration `â_c`.
    pub fn corrected_classical(&self, x: &CycleInputs) -> f64 {
        let mut a = self.eta_hat * x.a_ca + self.b_hat;
        for c in Coefficient::ALL {
            let th = self.theta[c.index()];
            if th != 0.0 {
                a += th * c.regressor(x);
            }
        }
        a
    }

    pub fn dropped_fraction(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.dropped as f64 / self.cycles as f64
        }
    }
}

/// Loop gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub bias: f64,
    pub scale: f64,
    /// Indexed by [`Coefficient::index`].
    pub theta: [f64; 6],
}

impl Gains {
    /// The same gain for every loop.
    pub fn uniform(g: f64) -> Self {
        Self { bias: g, scale: g, theta: [g; 6] }
    }
}

/// Settings shared by both algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSettings {
    /// Instrument model as assumed by the estimator (contrast, offset and
    /// velocity spread may differ from the truth).
    pub model: InterferometerConfig,
    pub gains: Gains,
    pub estimate_scale: bool,
    pub coefficients: CoefficientSet,
    /// Use the per-cycle rotation contrast instead of the fixed assumed contrast.
    pub contrast_correction: bool,
    /// Characteristic time of the regularization averages, s.
    pub averaging_time: f64,
}

impl EstimatorSettings {
    pub fn new(model: InterferometerConfig, gain: f64) -> Self {
        Self {
            model,
            gains: Gains::uniform(gain),
            estimate_scale: true,
            coefficients: CoefficientSet::EMPTY,
            contrast_correction: false,
            averaging_time: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        ensure_non_negative("gains.bias", self.gains.bias)?;
        ensure_non_negative("gains.scale", self.gains.scale)?;
        for g in self.gains.theta {
            ensure_non_negative("gains.theta", g)?;
        }
        ensure_positive("averaging_time", self.averaging_time)?;
        if self.averaging_time < self.model.cycle_time {
            return Err(Error::InvalidParameter { name: "averaging_time", reason: "must be at least one cycle" });
        }
        Ok(())
    }

    /// Weight of the newest sample in the regularization averages.
    pub fn alpha(&self) -> f64 {
        self.model.cycle_time / self.averaging_time
    }

    /// Contrast used for cycle `x`.
    pub fn contrast_for(&self, x: &CycleInputs) -> f64 {
        if self.contrast_correction {
            self.model.rotation_contrast(&x.rotation())
        } else {
            self.model.contrast
        }
    }
}

/// Exponential moving average with start-up bias correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpAverage {
    alpha: f64,
    acc: f64,
    weight: f64,
    count: u32,
}

impl ExpAverage {
    /// Samples an average needs before it may normalize an update. With fewer,
    /// `x/(x² + σ²)` is close to `1/(2x)` and a small first regressor throws
    /// the estimate across fringes.
    pub const WARMUP: u32 = 10;

    pub fn new(alpha: f64) -> Self {
        Self { alpha, acc: 0.0, weight: 0.0, count: 0 }
    }

    pub fn update(&mut self, x: f64) -> f64 {
        self.acc += self.alpha * (x - self.acc);
        self.weight += self.alpha * (1.0 - self.weight);
        self.count = self.count.saturating_add(1);
        self.value()
    }

    pub fn is_warm(&self) -> bool {
        self.count >= Self::WARMUP
    }

    pub fn value(&self) -> f64 {
        if self.weight == 0.0 {
            0.0
        } else {
            self.acc / self.weight
        }
    }
}

/// `x/(x² + s2)`, zero when both vanish.
#[inline]
pub fn pseudo_inverse(x: f64, s2: f64) -> f64 {
    let d = x * x + s2;
    if d == 0.0 {
        0.0
    } else {
        x / d
    }
}

/// Result of one estimator step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// `â_c` before the update.
    pub a_c: f64,
    /// QA acceleration selected by the branch search (Algo I) or `None`.
    pub a_q: Option<f64>,
    /// Fringe-tracking quantities (Algo II) once the buffer is full.
    pub nd: Option<(f64, f64)>,
    /// False when the cycle produced no update (dropped or buffer filling).
    pub updated: bool,
    /// The fringe could not be inverted and the cycle was discarded.
    pub dropped: bool,
}

/// A cycle-by-cycle hybridization loop.
pub trait Estimator {
    fn step(&mut self, x: &CycleInputs) -> Result<StepReport>;
    fn state(&self) -> &EstimatorState;
    fn settings(&self) -> &EstimatorSettings;
}
