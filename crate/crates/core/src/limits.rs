//! Analytic stability limits of the bias estimate.

use crate::math::{sq, sqrt};
use crate::signal_model::InterferometerConfig;

/// Detection-noise limit at one cycle, `2√2·σ_P/(C·k_eff·T²)`.
pub fn detection_limit(cfg: &InterferometerConfig) -> f64 {
    2.0 * sqrt(2.0) * cfg.detection_noise / (cfg.contrast * cfg.phase_scale())
}

/// Per-cycle std of the uncorrected Coriolis acceleration
/// `2·v_x0·Ω_y − 2·v_y0·Ω_x` for independent rotation rates.
pub fn coriolis_limit(v_x0: f64, v_y0: f64, sigma_omega_x: f64, sigma_omega_y: f64) -> f64 {
    2.0 * sqrt(v_x0 * v_x0 * sigma_omega_y * sigma_omega_y + v_y0 * v_y0 * sigma_omega_x * sigma_omega_x)
}

/// Variance `σ_Ω² = σ_x² + σ_y²` of the transverse angular velocity vector.
pub fn effective_rotation_variance(sigma_omega_x: f64, sigma_omega_y: f64) -> f64 {
    sq(sigma_omega_x) + sq(sigma_omega_y)
}

/// Contrast-noise limit at 1 s, `2√3·k_eff·T²·σ_v²·σ_Ω²·√Tc`.
pub fn contrast_limit_1s(cfg: &InterferometerConfig, sigma_omega_x: f64, sigma_omega_y: f64) -> f64 {
    2.0 * sqrt(3.0)
        * cfg.phase_scale()
        * cfg.velocity_spread
        * cfg.velocity_spread
        * effective_rotation_variance(sigma_omega_x, sigma_omega_y)
        * sqrt(cfg.cycle_time)
}

/// Convert a one-cycle white level to the level at 1 s.
pub fn level_at_1s(level_1cycle: f64, cycle_time: f64) -> f64 {
    level_1cycle * sqrt(cycle_time)
}
