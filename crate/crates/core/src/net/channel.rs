//! Path-loss gain and transmission rate.

use super::ChannelParams;

/// Distances below this are clamped before the gain power law, which is
/// singular at zero.
pub const MIN_DISTANCE_M: f64 = 1.0;

/// 10^(x/10): dB (or dBm) to linear.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Power-law channel gain at distance `d_m` metres.
pub fn channel_gain(d_m: f64, params: &ChannelParams) -> f64 {
    let d = d_m.max(MIN_DISTANCE_M);
    params.path_loss_coeff * d.powf(-params.path_loss_exp)
}

/// Rate in bits/second: B * ln(1 + Pt * g / eta), with transmit power and
/// noise in linear milliwatts. Natural logarithm, as the model is stated.
pub fn tx_rate(bandwidth_hz: f64, tx_power_mw: f64, gain: f64, noise_mw: f64) -> f64 {
    bandwidth_hz * (1.0 + tx_power_mw * gain / noise_mw).ln()
}
