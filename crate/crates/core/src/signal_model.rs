//! Closed-form fringe model of the atom interferometer.
//!
//! The transition probability at cycle `i` is
//!
//! ```text
//! P_i = P0 − (C_i / 2) · cos(k_eff·T²·a_i + φ_control,i) + δP_i
//! ```
//!
//! where rotations enter through a Coriolis acceleration `2·v_x0·Ω_y − 2·v_y0·Ω_x`
//! and through the contrast loss `C_i = C0·exp(−2·σ_v²·k_eff²·(Ω_x²+Ω_y²)·T⁴)`.
//! Centrifugal and Euler terms are not modelled.

use core::f64::consts::TAU;

use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};
use crate::math::{cos, exp, powi, sq};

/// Two-photon Raman effective wave-vector at the ⁸⁷Rb D2 line, 4π/780.241 nm.
pub const RB87_K_EFF: f64 = 1.610574e7;

/// Instrument parameters of the quantum accelerometer.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct InterferometerConfig {
    /// Effective wave-vector, rad/m.
    pub k_eff: f64,
    /// Pulse separation `T`, s. The interferometer lasts `2T`.
    pub pulse_separation: f64,
    /// Cycle time `Tc`, s.
    pub cycle_time: f64,
    /// Fringe contrast without rotation, `C0`.
    pub contrast: f64,
    /// Fringe offset `P0`.
    pub offset: f64,
    /// RMS atomic velocity spread `σ_v`, m/s.
    pub velocity_spread: f64,
    /// Detection noise standard deviation `σ_P`.
    pub detection_noise: f64,
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        Self {
            k_eff: RB87_K_EFF,
            pulse_separation: 0.020,
            cycle_time: 0.1,
            contrast: 0.23,
            offset: 0.5,
            velocity_spread: 0.0,
            detection_noise: 0.016,
        }
    }
}

impl InterferometerConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("k_eff", self.k_eff)?;
        ensure_positive("pulse_separation", self.pulse_separation)?;
        ensure_positive("cycle_time", self.cycle_time)?;
        ensure_non_negative("velocity_spread", self.velocity_spread)?;
        ensure_non_negative("detection_noise", self.detection_noise)?;
        ensure_finite("contrast", self.contrast)?;
        ensure_finite("offset", self.offset)?;
        if self.cycle_time < 2.0 * self.pulse_separation {
            return Err(Error::InvalidParameter {
                name: "cycle_time",
                reason: "must be at least twice the pulse separation",
            });
        }
        if !(self.contrast > 0.0 && self.contrast <= 1.0) {
            return Err(Error::InvalidParameter { name: "contrast", reason: "must lie in (0, 1]" });
        }
        let half = 0.5 * self.contrast;
        if self.offset - half < 0.0 || self.offset + half > 1.0 {
            return Err(Error::InvalidParameter {
                name: "offset",
                reason: "fringe P0 ± C/2 must stay within [0, 1]",
            });
        }
        Ok(())
    }

    /// Phase per unit acceleration, `k_eff·T²` (rad per m/s²).
    #[inline]
    pub fn phase_scale(&self) -> f64 {
        self.k_eff * sq(self.pulse_separation)
    }

    /// Interferometer phase for acceleration `a` plus the applied control phase.
    #[inline]
    pub fn interferometer_phase(&self, a: f64, phi_control: f64) -> f64 {
        self.phase_scale() * a + phi_control
    }

    /// Acceleration producing a 2π phase shift.
    #[inline]
    pub fn fringe_spacing(&self) -> f64 {
        TAU / self.phase_scale()
    }

    /// Contrast reduced by transverse rotation and the atomic velocity spread.
    /// `Ω_z` does not enter.
    pub fn rotation_contrast(&self, rot: &RotationState) -> f64 {
        let exponent = 2.0
            * sq(self.velocity_spread)
            * sq(self.k_eff)
            * (sq(rot.omega_x) + sq(rot.omega_y))
            * powi(self.pulse_separation, 4);
        self.contrast * exp(-exponent)
    }

    /// `P0 − (contrast/2)·cos(phase) + noise`. Not clamped to [0, 1].
    #[inline]
    pub fn transition_probability(&self, contrast: f64, phase: f64, detection_noise: f64) -> f64 {
        self.offset - 0.5 * contrast * cos(phase) + detection_noise
    }
}

/// Angular velocity of the sensor head and the mean transverse launch velocity
/// of the atom cloud.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RotationState {
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    pub v_x0: f64,
    pub v_y0: f64,
}

/// Coriolis acceleration seen along the QA axis: `2·v_x0·Ω_y − 2·v_y0·Ω_x`.
#[inline]
pub fn coriolis_acceleration(rot: &RotationState) -> f64 {
    2.0 * rot.v_x0 * rot.omega_y - 2.0 * rot.v_y0 * rot.omega_x
}
