//! Measurement drivers: transfer sweeps, dead-zone and blind-zone search,
//! pulse statistics, Monte-Carlo variation, PVT scaling, power scaling, and
//! toggle-count activity.

mod handles;
mod mc;
mod pvt;

pub use handles::{
    period_fs, phase_to_offset_fs, BehavioralPfd, MeasureOutcome, PfdHandle, SwitchPfd,
    WARMUP_PERIODS,
};
pub use mc::{histogram_csv, monte_carlo, HistBin, McReport, McTarget};
pub use pvt::{pvt_sweep, PvtGrid, PvtModel, PVT_A_VOLT, PVT_B_TEMP, PVT_C_CROSS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::sim::WaveformSet;

/// Uniform per-device delay for which the switch-level reference PFD
/// measures a 40 ps dead zone. Derived by [`calibrate_switch_delay`]; a test
/// keeps this constant honest.
pub const CALIBRATED_DEVICE_DELAY_FS: u64 = 20_000;

// ---------------------------------------------------------------------------
// Transfer characteristic
// ---------------------------------------------------------------------------

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferPoint {
    pub phi_rad: f64,
    /// (up - down) duty normalized to the ideal 0.5 endpoint at |phi| = pi.
    pub normalized_output: f64,
    pub settled: bool,
}

/// Normalized transfer characteristic over phase offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferCurve {
    pub freq_hz: f64,
    pub points: Vec<TransferPoint>,
}

impl TransferCurve {
    pub fn csv(&self) -> String {
        let mut out = String::from("phi_rad,normalized_output,settled\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                p.phi_rad, p.normalized_output, p.settled
            ));
        }
        out
    }
}

/// Sweeps phase offsets from -pi to +pi.
///
/// `points` must be odd and at least 3 so phi = 0 is sampled. Each point
/// runs at least 16 settled cycles; the output is the time-averaged
/// (up - down) charge-pump-visible duty divided by the ideal endpoint 0.5.
pub fn transfer_sweep(handle: &dyn PfdHandle, freq_hz: f64, points: usize) -> TransferCurve {
    assert!(points >= 3 && points % 2 == 1, "points must be odd and >= 3");
    let cycles = 16;
    let pts: Vec<TransferPoint> = (0..points)
        .into_par_iter()
        .map(|i| {
            let phi = -std::f64::consts::PI
                + 2.0 * std::f64::consts::PI * i as f64 / (points - 1) as f64;
            let out = handle.measure(freq_hz, phi, cycles);
            TransferPoint {
                phi_rad: phi,
                normalized_output: out.duty_difference() / 0.5,
                settled: out.settled,
            }
        })
        .collect();
    TransferCurve {
        freq_hz,
        points: pts,
    }
}

// ---------------------------------------------------------------------------
// Dead zone and blind zone
// ---------------------------------------------------------------------------

/// Smallest edge separation producing a charge-pump-visible pulse, found by
/// bisection over (0, period/4], accurate to `resolution_fs`.
///
/// Returns 0 when even 1 fs separations are detected.
pub fn measure_dead_zone(handle: &dyn PfdHandle, freq_hz: f64, resolution_fs: u64) -> u64 {
    assert!(resolution_fs >= 1);
    let period = period_fs(freq_hz);
    let visible = |sep_fs: u64| -> bool {
        let phi = sep_fs as f64 / period as f64 * 2.0 * std::f64::consts::PI;
        handle.measure(freq_hz, phi, 4).any_visible()
    };
    if visible(1) {
        return 0;
    }
    let mut lo = 1u64; // invisible
    let mut hi = period / 4; // assumed visible
    if !visible(hi) {
        return hi;
    }
    while hi - lo > resolution_fs {
        let mid = lo + (hi - lo) / 2;
        if visible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Total window length around a reset during which an incoming edge is
/// missed, measured by sweeping a probe edge across the reset region.
pub fn measure_blind_zone(handle: &dyn PfdHandle, freq_hz: f64) -> u64 {
    let period = period_fs(freq_hz);
    let step = 250u64;
    let max_offset = period / 4;
    let missed: u64 = (1..=max_offset / step)
        .into_par_iter()
        .map(|k| u64::from(handle.probe_blind(freq_hz, k * step)))
        .sum();
    missed * step
}

// ---------------------------------------------------------------------------
// Pulse width statistics
// ---------------------------------------------------------------------------

/// Mean/std/count of completed high-pulse widths on one net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseStats {
    pub net: String,
    pub mean_fs: f64,
    pub std_fs: f64,
    pub count: usize,
}

/// Widths of all completed high pulses per net, rises after `warmup_fs`.
pub fn pulse_width_stats(w: &WaveformSet, nets: &[&str], warmup_fs: u64) -> Vec<PulseStats> {
    nets.iter()
        .map(|&net| {
            let widths: Vec<u64> = w
                .high_pulses(net, warmup_fs)
                .iter()
                .map(|&(r, f)| f - r)
                .collect();
            if widths.is_empty() {
                return PulseStats {
                    net: net.to_string(),
                    mean_fs: 0.0,
                    std_fs: 0.0,
                    count: 0,
                };
            }
            let n = widths.len() as f64;
            let mean = widths.iter().sum::<u64>() as f64 / n;
            let var = widths
                .iter()
                .map(|&x| (x as f64 - mean) * (x as f64 - mean))
                .sum::<f64>()
                / n;
            PulseStats {
                net: net.to_string(),
                mean_fs: mean,
                std_fs: var.sqrt(),
                count: widths.len(),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Dennard power scaling
// ---------------------------------------------------------------------------

/// Constant-field power scaling across technology nodes:
/// `power * (to_node / from_node)^2`.
pub fn dennard_scale(power_w: f64, from_node_nm: f64, to_node_nm: f64) -> f64 {
    assert!(from_node_nm > 0.0 && to_node_nm > 0.0);
    power_w * (to_node_nm / from_node_nm).powi(2)
}

// ---------------------------------------------------------------------------
// Activity proxy
// ---------------------------------------------------------------------------

/// Toggle counts per net plus a weighted total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityReport {
    pub per_net: Vec<(String, usize)>,
    pub weighted_total: f64,
}

/// Counts definite 0<->1 transitions per net; `weights` default to 1.
pub fn activity_report(
    w: &WaveformSet,
    weights: &std::collections::BTreeMap<String, f64>,
    warmup_fs: u64,
) -> ActivityReport {
    let mut per_net = Vec::new();
    let mut total = 0.0;
    for name in w.net_names() {
        let toggles = w.toggle_count(name, warmup_fs);
        total += toggles as f64 * weights.get(name).copied().unwrap_or(1.0);
        per_net.push((name.clone(), toggles));
    }
    per_net.sort_by(|a, b| a.0.cmp(&b.0));
    ActivityReport {
        per_net,
        weighted_total: total,
    }
}

// ---------------------------------------------------------------------------
// Switch-level delay calibration
// ---------------------------------------------------------------------------

/// Finds the uniform device delay at which the switch-level reference PFD
/// measures `target_dead_zone_fs`. The measured dead zone grows
/// monotonically with the device delay, so bisection converges.
pub fn calibrate_switch_delay(target_dead_zone_fs: u64, freq_hz: f64) -> u64 {
    let dead_zone = |delay_fs: u64| -> u64 {
        let handle = SwitchPfd::reference(delay_fs);
        measure_dead_zone(&handle, freq_hz, 100)
    };
    let mut lo = 1_000u64;
    let mut hi = 100_000u64;
    while hi - lo > 250 {
        let mid = lo + (hi - lo) / 2;
        if dead_zone(mid) >= target_dead_zone_fs {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfd::PfdConfig;

    #[test]
    fn dead_zone_matches_setup_time_across_settings() {
        for setup_ps in [0u64, 10, 40, 100] {
            let cfg = PfdConfig {
                t_setup_fs: setup_ps * 1_000,
                ..PfdConfig::ideal()
            };
            let handle = BehavioralPfd::new(cfg);
            let measured = measure_dead_zone(&handle, 1e9, 10);
            let err = measured as i64 - (setup_ps * 1_000) as i64;
            assert!(
                err.unsigned_abs() <= 10,
                "setup {} ps measured {} fs",
                setup_ps,
                measured
            );
        }
    }

    #[test]
    fn transfer_at_quarter_turn_is_half() {
        // Oracle: an ideal tri-state PFD atphi = pi/2 spends a quarter
        // period with Up high each cycle, so (up-down) duty = 0.25 and the
        // normalized output is 0.5.
        let handle = BehavioralPfd::new(PfdConfig {
            t_setup_fs: 0,
            ..PfdConfig::ideal()
        });
        let out = handle.measure(1e9, std::f64::consts::FRAC_PI_2, 16);
        let normalized = out.duty_difference() / 0.5;
        assert!((normalized - 0.5).abs() < 1e-9, "normalized {}", normalized);
    }

    #[test]
    fn blind_zone_presets() {
        // Proposed design: no blind window.
        let proposed = BehavioralPfd::new(PfdConfig::ideal());
        assert_eq!(measure_blind_zone(&proposed, 3e9), 0);
        // Comparison design: one tenth of the period.
        let comparison = BehavioralPfd::new(PfdConfig::comparison_preset(1e9));
        let measured = measure_blind_zone(&comparison, 1e9);
        assert!(
            (measured as i64 - 100_000).unsigned_abs() <= 1_000,
            "measured {}",
            measured
        );
        let comparison2 = BehavioralPfd::new(PfdConfig::comparison_preset(2e9));
        let measured2 = measure_blind_zone(&comparison2, 2e9);
        assert!((measured2 as i64 - 50_000).unsigned_abs() <= 1_000);
    }

    #[test]
    fn dennard_examples() {
        assert_eq!(dennard_scale(4.41e-6, 28.0, 28.0), 4.41e-6);
        let f180 = dennard_scale(1.0, 180.0, 28.0);
        assert!((f180 - 0.024198).abs() < 1e-5, "{}", f180);
        let f65 = dennard_scale(1.0, 65.0, 28.0);
        assert!((f65 - 0.185562).abs() < 1e-5, "{}", f65);
        // Multiplicative composition.
        let a = dennard_scale(dennard_scale(2.0, 180.0, 65.0), 65.0, 28.0);
        let b = dennard_scale(2.0, 180.0, 28.0);
        assert!((a - b).abs() < 1e-12);
    }
}
