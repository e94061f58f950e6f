//! Uniform driver interface over the two PFD implementations.
//!
//! A handle runs phase-offset comparison cycles at a given frequency and
//! reports the resulting output pulses. Positive phase means Ref leads Div.
//! Both implementations apply a warm-up of two input periods before the
//! measured window.

use crate::netlist::build_reference_pfd;
use crate::pfd::{run_behavioral, PfdConfig, PfdEvent, PfdSignal};
use crate::sim::{compile, run, Bit, DelayConfig, SimModel, Stimulus};

pub const WARMUP_PERIODS: u64 = 2;

/// Result of one phase-offset measurement.
#[derive(Debug, Clone, Default)]
pub struct MeasureOutcome {
    /// Charge-pump-visible pulse widths inside the measured window (fs).
    pub up_visible_fs: Vec<u64>,
    /// All completed up pulses, including sub-threshold ones.
    pub up_all_fs: Vec<u64>,
    pub down_visible_fs: Vec<u64>,
    pub down_all_fs: Vec<u64>,
    /// Length of the measured window (fs).
    pub window_fs: u64,
    /// False when the stimulus failed to settle (unknown output levels in
    /// the measured window).
    pub settled: bool,
}

impl MeasureOutcome {
    pub fn any_visible(&self) -> bool {
        !self.up_visible_fs.is_empty() || !self.down_visible_fs.is_empty()
    }

    /// Time-averaged (up - down) visible duty over the window.
    pub fn duty_difference(&self) -> f64 {
        let up: u64 = self.up_visible_fs.iter().sum();
        let down: u64 = self.down_visible_fs.iter().sum();
        (up as f64 - down as f64) / self.window_fs as f64
    }
}

/// A runnable PFD implementation.
pub trait PfdHandle: Sync {
    /// Runs `cycles` comparison cycles at `freq_hz` with phase offset
    /// `phi_rad` (positive = Ref leads) and reports output pulses.
    fn measure(&self, freq_hz: f64, phi_rad: f64, cycles: u32) -> MeasureOutcome;

    /// Probes the blind zone: a fresh comparison cycle is followed by a
    /// probe edge `offset_fs` after the reset start. True when the probe
    /// edge was missed.
    fn probe_blind(&self, freq_hz: f64, offset_fs: u64) -> bool;
}

/// Signed edge offset for a phase, wrapped into (-T/2, T/2].
pub fn phase_to_offset_fs(phi_rad: f64, period_fs: u64) -> i64 {
    let t = period_fs as i64;
    let raw = (phi_rad / (2.0 * std::f64::consts::PI) * period_fs as f64).round() as i64;
    let mut d = raw.rem_euclid(t);
    if d > t / 2 {
        d -= t;
    }
    d
}

pub fn period_fs(freq_hz: f64) -> u64 {
    (1e15 / freq_hz).round() as u64
}

// ---------------------------------------------------------------------------
// Behavioral handle
// ---------------------------------------------------------------------------

/// Behavioral PFD driven by generated edge sequences.
#[derive(Debug, Clone)]
pub struct BehavioralPfd {
    pub cfg: PfdConfig,
}

impl BehavioralPfd {
    pub fn new(cfg: PfdConfig) -> Self {
        BehavioralPfd { cfg }
    }

    pub fn ideal() -> Self {
        BehavioralPfd::new(PfdConfig::ideal())
    }

    fn edges(&self, period: u64, offset: i64, total_cycles: u64) -> Vec<(PfdEvent, u64)> {
        let start = period as i64;
        let mut edges = Vec::new();
        for n in 0..total_cycles as i64 {
            let t_ref = start + n * period as i64;
            let t_div = t_ref + offset;
            edges.push((PfdEvent::RefEdge, t_ref as u64));
            edges.push((PfdEvent::DivEdge, t_div.max(0) as u64));
        }
        // Ties resolve Ref first so a zero offset still arms before reset.
        edges.sort_by_key(|&(e, t)| (t, e != PfdEvent::RefEdge));
        edges
    }
}

impl PfdHandle for BehavioralPfd {
    fn measure(&self, freq_hz: f64, phi_rad: f64, cycles: u32) -> MeasureOutcome {
        let period = period_fs(freq_hz);
        let offset = phase_to_offset_fs(phi_rad, period);
        let total = WARMUP_PERIODS + cycles as u64 + 1;
        let edges = self.edges(period, offset, total);
        let horizon = period * (total + 1);
        let (_, pulses, _) =
            run_behavioral(&self.cfg, &edges, horizon).expect("generated edges are ordered");

        let w_start = period * (1 + WARMUP_PERIODS);
        let w_end = w_start + cycles as u64 * period;
        let mut out = MeasureOutcome {
            window_fs: w_end - w_start,
            settled: true,
            ..Default::default()
        };
        for p in pulses {
            if p.start_fs < w_start || p.start_fs >= w_end {
                continue;
            }
            let width = p.width_fs();
            match p.signal {
                PfdSignal::Up => {
                    out.up_all_fs.push(width);
                    if p.cp_visible {
                        out.up_visible_fs.push(width);
                    }
                }
                PfdSignal::Down => {
                    out.down_all_fs.push(width);
                    if p.cp_visible {
                        out.down_visible_fs.push(width);
                    }
                }
            }
        }
        out
    }

    fn probe_blind(&self, freq_hz: f64, offset_fs: u64) -> bool {
        let period = period_fs(freq_hz);
        // Arm with Ref, reset with Div 2 ps later, then probe with the next
        // Ref edge `offset_fs` after the reset start.
        let t0 = period;
        let sep = 2_000.min(period / 8).max(1);
        let reset_start = t0 + sep;
        let probe = reset_start + offset_fs;
        let edges = [
            (PfdEvent::RefEdge, t0),
            (PfdEvent::DivEdge, reset_start),
            (PfdEvent::RefEdge, probe),
        ];
        let horizon = probe + period * 2;
        let (_, _, st) =
            run_behavioral(&self.cfg, &edges, horizon).expect("edges ordered");
        // The probe edge was acted upon iff the machine re-armed.
        !matches!(st.mode, crate::pfd::PfdMode::UpActive)
    }
}

// ---------------------------------------------------------------------------
// Switch-level handle
// ---------------------------------------------------------------------------

/// Switch-level reference PFD driven by return-to-zero pulse trains.
///
/// Input pulses are two device delays wide, which matches the evaluation
/// window of the dynamic stages; the measured Up/Down pulse widths then
/// track the input edge separation.
#[derive(Debug, Clone)]
pub struct SwitchPfd {
    pub model: SimModel,
    pub up_net: String,
    pub down_net: String,
    pub pulse_width_fs: u64,
}

impl SwitchPfd {
    /// Reference netlist with a uniform per-device delay.
    pub fn reference(delay_fs: u64) -> Self {
        let netlist = build_reference_pfd();
        let model = compile(&netlist, &DelayConfig::new(), delay_fs).expect("reference is valid");
        let up = netlist
            .metadata
            .get("up_net")
            .cloned()
            .unwrap_or_else(|| "X".to_string());
        let down = netlist
            .metadata
            .get("down_net")
            .cloned()
            .unwrap_or_else(|| "Y".to_string());
        SwitchPfd {
            model,
            up_net: up,
            down_net: down,
            pulse_width_fs: 2 * delay_fs,
        }
    }

    /// Wraps an existing compiled model (for per-device delay studies).
    pub fn from_model(model: SimModel) -> Self {
        let up = model
            .netlist
            .metadata
            .get("up_net")
            .cloned()
            .unwrap_or_else(|| "X".to_string());
        let down = model
            .netlist
            .metadata
            .get("down_net")
            .cloned()
            .unwrap_or_else(|| "Y".to_string());
        let w = 2 * model.max_delay_fs();
        SwitchPfd {
            model,
            up_net: up,
            down_net: down,
            pulse_width_fs: w,
        }
    }

    /// Pulse train with the warm-up cycles breaking the cold-start unknown
    /// state: a solo Div pulse charges the Down half's dynamic nodes, a solo
    /// Ref pulse then drives Y to a definite level, and regular pulse pairs
    /// follow from cycle 2 on.
    fn pulse_train(&self, period: u64, offset: i64, total_cycles: u64) -> Stimulus {
        let start = period as i64;
        let w = self.pulse_width_fs as i64;
        let mut ref_edges = Vec::new();
        let mut div_edges = Vec::new();
        div_edges.push(start);
        ref_edges.push(start + period as i64);
        for n in 2..total_cycles as i64 {
            let t_ref = start + n * period as i64;
            ref_edges.push(t_ref);
            div_edges.push((t_ref + offset).max(1));
        }
        let mut stim = Stimulus::new();
        for t in ref_edges {
            stim = stim.pulse("Ref", t as u64, w as u64);
        }
        for t in div_edges {
            stim = stim.pulse("Div", t as u64, w as u64);
        }
        stim
    }
}

impl PfdHandle for SwitchPfd {
    fn measure(&self, freq_hz: f64, phi_rad: f64, cycles: u32) -> MeasureOutcome {
        let period = period_fs(freq_hz);
        let offset = phase_to_offset_fs(phi_rad, period);
        let total = WARMUP_PERIODS + cycles as u64 + 1;
        let stim = self.pulse_train(period, offset, total);
        let horizon = period * (total + 1);
        let result = run(&self.model, &stim, horizon).expect("pulse train is a valid stimulus");

        let w_start = period * (1 + WARMUP_PERIODS);
        let w_end = w_start + cycles as u64 * period;
        let mut out = MeasureOutcome {
            window_fs: w_end - w_start,
            settled: true,
            ..Default::default()
        };
        for (net, vis, all) in [
            (
                &self.up_net,
                &mut out.up_visible_fs,
                &mut out.up_all_fs,
            ),
            (
                &self.down_net,
                &mut out.down_visible_fs,
                &mut out.down_all_fs,
            ),
        ] {
            for (rise, fall) in result.waveform.high_pulses(net, w_start) {
                if rise >= w_end {
                    continue;
                }
                let width = fall - rise;
                all.push(width);
                vis.push(width);
            }
            // Unknown levels inside the window mean the point did not settle.
            if let Some(tr) = result.waveform.transitions(net) {
                if tr
                    .iter()
                    .any(|&(t, lv)| t >= w_start && t < w_end && lv.value == Bit::Unknown)
                {
                    out.settled = false;
                }
            }
        }
        out
    }

    fn probe_blind(&self, freq_hz: f64, offset_fs: u64) -> bool {
        let period = period_fs(freq_hz);
        let w = self.pulse_width_fs;
        let t0 = 3 * period;
        let sep = (2 * w).min(period / 4);
        let reset_start = t0 + sep;
        let probe = reset_start + offset_fs;
        let stim = Stimulus::new()
            .pulse("Div", period, w) // warm-up: solo Div, then solo Ref
            .pulse("Ref", 2 * period, w)
            .pulse("Ref", t0, w)
            .pulse("Div", reset_start, w)
            .pulse("Ref", probe, w);
        let horizon = probe + 2 * period;
        let result = run(&self.model, &stim, horizon).expect("valid stimulus");
        // Missed iff the probe edge produced no fresh Up rise.
        !result
            .waveform
            .high_pulses(&self.up_net, probe)
            .iter()
            .any(|&(rise, _)| rise >= probe)
            && result
                .waveform
                .value_at(&self.up_net, horizon)
                .map(|lv| lv.value != Bit::One)
                .unwrap_or(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_wrapping() {
        let t = 1_000_000;
        assert_eq!(phase_to_offset_fs(0.0, t), 0);
        assert_eq!(phase_to_offset_fs(std::f64::consts::PI, t), 500_000);
        assert_eq!(phase_to_offset_fs(-std::f64::consts::FRAC_PI_2, t), -250_000);
        // 2*pi-periodic.
        assert_eq!(
            phase_to_offset_fs(0.3 + 2.0 * std::f64::consts::PI, t),
            phase_to_offset_fs(0.3, t)
        );
    }

    #[test]
    fn behavioral_width_tracks_phase() {
        let h = BehavioralPfd::ideal();
        let out = h.measure(1e9, 0.1 * std::f64::consts::PI, 8);
        assert!(out.settled);
        assert_eq!(out.up_visible_fs.len(), 8);
        assert!(out.up_visible_fs.iter().all(|&w| w == 50_000));
        assert!(out.down_visible_fs.is_empty());
    }

    #[test]
    fn behavioral_negative_phase_mirrors() {
        let h = BehavioralPfd::ideal();
        let pos = h.measure(1e9, 0.2 * std::f64::consts::PI, 8);
        let neg = h.measure(1e9, -0.2 * std::f64::consts::PI, 8);
        assert_eq!(pos.up_visible_fs, neg.down_visible_fs);
    }
}
