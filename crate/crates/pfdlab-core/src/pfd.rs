//! Behavioral tri-state PFD.
//!
//! The fast, analyzable twin of the switch-level reference circuit: a
//! three-state machine (null / up-active / down-active) with a reset window,
//! parameterized output delays, a dead-zone threshold on the effective pulse
//! width, and an optional blind-zone window after each reset start.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Behavioral timing parameters (all femtoseconds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfdConfig {
    /// Dead-zone-defining setup time: pulses shorter than this are flagged
    /// invisible to the charge pump.
    pub t_setup_fs: u64,
    /// Reset path delay; both outputs stay asserted this long after the
    /// trailing edge arrives.
    pub t_reset_fs: u64,
    pub t_out_rise_fs: u64,
    pub t_out_fall_fs: u64,
    /// Edges arriving within this window after a reset start are missed.
    /// Zero for the proposed design.
    pub blind_window_fs: u64,
    /// Charge-pump activation threshold; combined with `t_setup_fs` via max.
    pub min_effective_pulse_fs: u64,
}

impl Default for PfdConfig {
    fn default() -> Self {
        PfdConfig {
            t_setup_fs: 40_000,
            t_reset_fs: 10_000,
            t_out_rise_fs: 7_000,
            t_out_fall_fs: 7_000,
            blind_window_fs: 0,
            min_effective_pulse_fs: 0,
        }
    }
}

impl PfdConfig {
    /// Measurement configuration: symmetric output delays and a zero reset
    /// window so pulse widths equal the input edge separation exactly.
    pub fn ideal() -> Self {
        PfdConfig {
            t_reset_fs: 0,
            ..PfdConfig::default()
        }
    }

    /// Comparison-design preset with a blind zone of one tenth of the input
    /// period at `freq_hz`.
    pub fn comparison_preset(freq_hz: f64) -> Self {
        let period_fs = (1e15 / freq_hz).round() as u64;
        PfdConfig {
            blind_window_fs: period_fs / 10,
            ..PfdConfig::ideal()
        }
    }

    pub fn visibility_threshold_fs(&self) -> u64 {
        self.t_setup_fs.max(self.min_effective_pulse_fs)
    }
}

/// Tri-state machine mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PfdMode {
    Null,
    UpActive,
    DownActive,
    Resetting,
}

/// Live machine state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfdState {
    pub mode: PfdMode,
    pub up: bool,
    pub down: bool,
    /// End of the current reset window, when `mode == Resetting`.
    pub pending_reset_at: Option<u64>,
    last_event_fs: Option<u64>,
    last_reset_start: Option<u64>,
    /// Pending output rise times (already emitted as transitions).
    up_since: Option<u64>,
    down_since: Option<u64>,
    /// Edge remembered while resetting, replayed when the reset completes.
    deferred: Option<PfdEvent>,
}

impl Default for PfdState {
    fn default() -> Self {
        PfdState {
            mode: PfdMode::Null,
            up: false,
            down: false,
            pending_reset_at: None,
            last_event_fs: None,
            last_reset_start: None,
            up_since: None,
            down_since: None,
            deferred: None,
        }
    }
}

/// Input event kinds. `RefEdge`/`DivEdge` are rising edges; `Timer` must be
/// delivered at `pending_reset_at`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PfdEvent {
    RefEdge,
    DivEdge,
    Timer,
}

/// Which output an emitted transition belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PfdSignal {
    Up,
    Down,
}

/// An output level change, timestamped in femtoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputTransition {
    pub time_fs: u64,
    pub signal: PfdSignal,
    pub level: bool,
}

/// A completed output pulse. `cp_visible` is false for sub-threshold pulses
/// (emitted but invisible to the charge pump).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PfdPulse {
    pub signal: PfdSignal,
    pub start_fs: u64,
    pub end_fs: u64,
    pub cp_visible: bool,
}

impl PfdPulse {
    pub fn width_fs(&self) -> u64 {
        self.end_fs - self.start_fs
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PfdError {
    #[error("event at {at} fs arrives before previous event at {last} fs")]
    OutOfOrder { at: u64, last: u64 },
    #[error("timer event at {at} fs but no reset is pending")]
    SpuriousTimer { at: u64 },
}

/// Output of one step: emitted transitions and pulses completed by this step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutput {
    pub transitions: Vec<OutputTransition>,
    pub pulses: Vec<PfdPulse>,
}

/// Advances the machine by one event.
///
/// Rising input edges in `Null` arm the matching output; the opposite edge
/// while armed starts the reset, which releases both outputs `t_reset` after
/// the follower's output rise. Edges within `blind_window` of a reset start
/// are dropped; other edges during a reset are deferred to the reset end.
pub fn pfd_step(
    state: &mut PfdState,
    cfg: &PfdConfig,
    event: PfdEvent,
    at_fs: u64,
) -> Result<StepOutput, PfdError> {
    if let Some(last) = state.last_event_fs {
        if at_fs < last {
            return Err(PfdError::OutOfOrder { at: at_fs, last });
        }
    }
    state.last_event_fs = Some(at_fs);

    let mut out = StepOutput::default();

    if event == PfdEvent::Timer {
        if state.mode != PfdMode::Resetting || state.pending_reset_at != Some(at_fs) {
            return Err(PfdError::SpuriousTimer { at: at_fs });
        }
        release_outputs(state, cfg, at_fs, &mut out);
        state.mode = PfdMode::Null;
        state.pending_reset_at = None;
        if let Some(deferred) = state.deferred.take() {
            let mut chained = pfd_step(state, cfg, deferred, at_fs)?;
            out.transitions.append(&mut chained.transitions);
            out.pulses.append(&mut chained.pulses);
        }
        return Ok(out);
    }

    // Blind zone: edges too close after a reset start are missed entirely.
    if let Some(rs) = state.last_reset_start {
        if cfg.blind_window_fs > 0 && at_fs >= rs && at_fs - rs < cfg.blind_window_fs {
            return Ok(out);
        }
    }

    match (state.mode, event) {
        (PfdMode::Null, PfdEvent::RefEdge) => {
            state.mode = PfdMode::UpActive;
            raise(state, cfg, PfdSignal::Up, at_fs, &mut out);
        }
        (PfdMode::Null, PfdEvent::DivEdge) => {
            state.mode = PfdMode::DownActive;
            raise(state, cfg, PfdSignal::Down, at_fs, &mut out);
        }
        (PfdMode::UpActive, PfdEvent::DivEdge) | (PfdMode::DownActive, PfdEvent::RefEdge) => {
            let follower = if state.mode == PfdMode::UpActive {
                PfdSignal::Down
            } else {
                PfdSignal::Up
            };
            state.mode = PfdMode::Resetting;
            state.last_reset_start = Some(at_fs);
            state.pending_reset_at = Some(at_fs + cfg.t_reset_fs);
            raise(state, cfg, follower, at_fs, &mut out);
        }
        // Same-side edges while armed: frequency detection, no change.
        (PfdMode::UpActive, PfdEvent::RefEdge) | (PfdMode::DownActive, PfdEvent::DivEdge) => {}
        (PfdMode::Resetting, e) => {
            state.deferred = Some(e);
        }
        (_, PfdEvent::Timer) => unreachable!(),
    }
    Ok(out)
}

fn raise(
    state: &mut PfdState,
    cfg: &PfdConfig,
    signal: PfdSignal,
    at_fs: u64,
    out: &mut StepOutput,
) {
    let t = at_fs + cfg.t_out_rise_fs;
    match signal {
        PfdSignal::Up => {
            if !state.up {
                state.up = true;
                state.up_since = Some(t);
                out.transitions.push(OutputTransition {
                    time_fs: t,
                    signal,
                    level: true,
                });
            }
        }
        PfdSignal::Down => {
            if !state.down {
                state.down = true;
                state.down_since = Some(t);
                out.transitions.push(OutputTransition {
                    time_fs: t,
                    signal,
                    level: true,
                });
            }
        }
    }
}

fn release_outputs(state: &mut PfdState, cfg: &PfdConfig, at_fs: u64, out: &mut StepOutput) {
    let t = at_fs + cfg.t_out_fall_fs;
    let threshold = cfg.visibility_threshold_fs();
    for (flag, since, signal) in [
        (&mut state.up, &mut state.up_since, PfdSignal::Up),
        (&mut state.down, &mut state.down_since, PfdSignal::Down),
    ] {
        if *flag {
            *flag = false;
            out.transitions.push(OutputTransition {
                time_fs: t,
                signal,
                level: false,
            });
            if let Some(start) = since.take() {
                if t > start {
                    out.pulses.push(PfdPulse {
                        signal,
                        start_fs: start,
                        end_fs: t,
                        cp_visible: (t - start) >= threshold,
                    });
                }
            }
        }
    }
}

/// Net charge delivered to the loop filter per comparison cycle for a fixed
/// phase offset, in coulombs. The effective pulse width is the phase-
/// equivalent edge separation, zeroed below the dead-zone threshold.
pub fn net_charge_per_cycle(cfg: &PfdConfig, delta_phi: f64, freq_hz: f64, icp_a: f64) -> f64 {
    assert!(delta_phi.abs() <= std::f64::consts::PI, "|delta_phi| must be <= pi");
    assert!(freq_hz > 0.0);
    let period_s = 1.0 / freq_hz;
    let width_s = delta_phi.abs() / (2.0 * std::f64::consts::PI) * period_s;
    let threshold_s = cfg.visibility_threshold_fs() as f64 * 1e-15;
    if width_s < threshold_s {
        return 0.0;
    }
    delta_phi.signum() * width_s * icp_a
}

/// Convenience driver: runs a sequence of timed edges through the machine,
/// inserting timer events automatically, and returns all transitions and
/// completed pulses.
pub fn run_behavioral(
    cfg: &PfdConfig,
    edges: &[(PfdEvent, u64)],
    t_end_fs: u64,
) -> Result<(Vec<OutputTransition>, Vec<PfdPulse>, PfdState), PfdError> {
    let mut state = PfdState::default();
    let mut transitions = Vec::new();
    let mut pulses = Vec::new();
    let mut i = 0;
    loop {
        let next_edge = edges.get(i).map(|&(_, t)| t);
        let next_timer = state.pending_reset_at;
        let (event, at) = match (next_edge, next_timer) {
            (Some(te), Some(tt)) if tt <= te => (PfdEvent::Timer, tt),
            (Some(te), _) => {
                let e = edges[i].0;
                i += 1;
                (e, te)
            }
            (None, Some(tt)) => (PfdEvent::Timer, tt),
            (None, None) => break,
        };
        if at > t_end_fs {
            break;
        }
        let out = pfd_step(&mut state, cfg, event, at)?;
        transitions.extend(out.transitions);
        pulses.extend(out.pulses);
    }
    Ok((transitions, pulses, state))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ref_edge_in_null_asserts_up() {
        let cfg = PfdConfig::ideal();
        let mut st = PfdState::default();
        let out = pfd_step(&mut st, &cfg, PfdEvent::RefEdge, 1_000).unwrap();
        assert_eq!(st.mode, PfdMode::UpActive);
        assert!(st.up && !st.down);
        assert_eq!(out.transitions[0].signal, PfdSignal::Up);
        assert_eq!(out.transitions[0].time_fs, 1_000 + cfg.t_out_rise_fs);
    }

    #[test]
    fn div_while_up_resets_with_exact_overlap() {
        let cfg = PfdConfig {
            t_reset_fs: 5_000,
            ..PfdConfig::ideal()
        };
        let edges = [(PfdEvent::RefEdge, 0), (PfdEvent::DivEdge, 100_000)];
        let (transitions, _, _) = run_behavioral(&cfg, &edges, 1_000_000).unwrap();
        let down_up = transitions
            .iter()
            .find(|t| t.signal == PfdSignal::Down && t.level)
            .unwrap()
            .time_fs;
        let up_down = transitions
            .iter()
            .find(|t| t.signal == PfdSignal::Up && !t.level)
            .unwrap()
            .time_fs;
        // rise/fall symmetric: overlap equals t_reset exactly.
        assert_eq!(up_down - down_up, cfg.t_reset_fs);
    }

    #[test]
    fn ten_ps_separation_with_40ps_setup_is_subthreshold() {
        let cfg = PfdConfig::ideal();
        let edges = [(PfdEvent::RefEdge, 0), (PfdEvent::DivEdge, 10_000)];
        let (_, pulses, _) = run_behavioral(&cfg, &edges, 1_000_000).unwrap();
        let up = pulses.iter().find(|p| p.signal == PfdSignal::Up).unwrap();
        assert_eq!(up.width_fs(), 10_000);
        assert!(!up.cp_visible);
    }

    #[test]
    fn out_of_order_events_rejected() {
        let cfg = PfdConfig::ideal();
        let mut st = PfdState::default();
        pfd_step(&mut st, &cfg, PfdEvent::RefEdge, 1_000).unwrap();
        let err = pfd_step(&mut st, &cfg, PfdEvent::DivEdge, 500).unwrap_err();
        assert_eq!(err, PfdError::OutOfOrder { at: 500, last: 1_000 });
    }

    #[test]
    fn charge_examples() {
        let cfg = PfdConfig {
            t_setup_fs: 0,
            ..PfdConfig::ideal()
        };
        assert_eq!(net_charge_per_cycle(&cfg, 0.0, 1e9, 50e-6), 0.0);
        // pi/2 at 1 GHz, 50 uA: 0.25 ns * 50 uA = 12.5 fC.
        let q = net_charge_per_cycle(&cfg, std::f64::consts::FRAC_PI_2, 1e9, 50e-6);
        assert!((q - 12.5e-15).abs() < 1e-20, "q = {}", q);
        // Antisymmetry.
        let qn = net_charge_per_cycle(&cfg, -std::f64::consts::FRAC_PI_2, 1e9, 50e-6);
        assert_eq!(q, -qn);
    }

    #[test]
    fn blind_window_drops_edges() {
        let cfg = PfdConfig {
            blind_window_fs: 50_000,
            ..PfdConfig::ideal()
        };
        // Reset starts at 100 ps; an edge 20 ps later is inside the window.
        let edges = [
            (PfdEvent::RefEdge, 0),
            (PfdEvent::DivEdge, 100_000),
            (PfdEvent::RefEdge, 120_000),
        ];
        let (_, _, st) = run_behavioral(&cfg, &edges, 1_000_000).unwrap();
        assert_eq!(st.mode, PfdMode::Null, "missed edge must not re-arm");
    }

    #[test]
    fn zero_blind_window_defers_and_acts() {
        let cfg = PfdConfig {
            t_reset_fs: 30_000,
            ..PfdConfig::ideal()
        };
        let edges = [
            (PfdEvent::RefEdge, 0),
            (PfdEvent::DivEdge, 100_000),
            (PfdEvent::RefEdge, 110_000), // during reset, must be deferred
        ];
        let (_, _, st) = run_behavioral(&cfg, &edges, 1_000_000).unwrap();
        assert_eq!(st.mode, PfdMode::UpActive);
    }
}
