//! Event-driven phase-domain PLL/DLL simulation.
//!
//! Between loop events (reference edge, feedback edge, reset timer) the
//! charge-pump current is piecewise constant, so the loop filter advances in
//! closed form: the integrating capacitor ramps linearly, the series
//! resistor contributes an instantaneous proportional step while current
//! flows, and the optional second capacitor follows the exact two-state RC
//! response. VCO phase accumulates the closed-form integral of
//! `f0 + kvco * v_ctrl`; feedback edges are located by solving the phase
//! crossing inside the current regime.
//!
//! A deliberately different fixed-step integrator ([`fixed_step_reference`])
//! exists for cross-checking; it advances voltage and phase by forward Euler
//! on a fine grid with event-aligned substeps.

use serde::{Deserialize, Serialize};

use crate::pfd::{pfd_step, PfdConfig, PfdEvent, PfdState};

pub const FS_PER_S: f64 = 1e15;

/// Loop topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoopMode {
    Pll,
    Dll,
}

/// Passive loop filter: series R-C1 leg, optional ripple capacitor C2.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FilterConfig {
    pub r_ohm: f64,
    pub c1_f: f64,
    pub c2_f: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopConfig {
    pub mode: LoopMode,
    pub f_ref_hz: f64,
    pub divider_n: u32,
    pub icp_up_a: f64,
    pub icp_down_a: f64,
    /// Constant drain on the filter node.
    pub leakage_a: f64,
    pub filter: FilterConfig,
    /// VCO: frequency f0 + kvco * v_ctrl.
    pub vco_f0_hz: f64,
    pub vco_kvco_hz_per_v: f64,
    /// Delay line: delay d0 - kdl * v_ctrl.
    pub dll_d0_s: f64,
    pub dll_kdl_s_per_v: f64,
    pub v_init: f64,
    /// Control voltage clamp range.
    pub vdd_nominal: f64,
    pub pfd: PfdConfig,
    /// Lock threshold in radians; None means the dead-zone-equivalent phase
    /// `2*pi*f_ref*t_setup`.
    pub lock_threshold_rad: Option<f64>,
}

impl LoopConfig {
    /// The pinned second-order PLL configuration used across tests: N=1,
    /// 1 GHz reference, 0.9 GHz free-running VCO, 500 MHz/V, 50 uA,
    /// R=10 kOhm, C1=10 pF.
    pub fn pinned_pll() -> Self {
        LoopConfig {
            mode: LoopMode::Pll,
            f_ref_hz: 1e9,
            divider_n: 1,
            icp_up_a: 50e-6,
            icp_down_a: 50e-6,
            leakage_a: 0.0,
            filter: FilterConfig {
                r_ohm: 10_000.0,
                c1_f: 10e-12,
                c2_f: None,
            },
            vco_f0_hz: 0.9e9,
            vco_kvco_hz_per_v: 500e6,
            dll_d0_s: 0.0,
            dll_kdl_s_per_v: 0.0,
            v_init: 0.0,
            vdd_nominal: 1.0,
            pfd: PfdConfig::ideal(),
            lock_threshold_rad: None,
        }
    }

    /// A DLL with kdl chosen for negative feedback: delay pulls toward one
    /// reference period. First-order loop: pure capacitive filter (no
    /// series resistor), discrete-time gain kdl*icp/C1 = 0.1 per cycle.
    pub fn pinned_dll() -> Self {
        let t = 1.0 / 1e9;
        LoopConfig {
            mode: LoopMode::Dll,
            dll_d0_s: 1.5 * t,
            dll_kdl_s_per_v: t,
            vco_f0_hz: 0.0,
            vco_kvco_hz_per_v: 0.0,
            icp_up_a: 100e-6,
            icp_down_a: 100e-6,
            filter: FilterConfig {
                r_ohm: 0.0,
                c1_f: 1e-12,
                c2_f: None,
            },
            ..LoopConfig::pinned_pll()
        }
    }

    pub fn period_fs(&self) -> u64 {
        (FS_PER_S / self.f_ref_hz).round() as u64
    }

    pub fn lock_threshold(&self) -> f64 {
        self.lock_threshold_rad.unwrap_or_else(|| {
            2.0 * std::f64::consts::PI * self.f_ref_hz * (self.pfd.t_setup_fs as f64 / FS_PER_S)
        })
    }
}

/// Live loop state.
#[derive(Debug, Clone)]
pub struct LoopState {
    pub t_fs: u64,
    /// Voltage on the integrating capacitor C1.
    pub v_c1: f64,
    /// Voltage on C2 (equals v_ctrl when C2 present).
    pub v_c2: f64,
    pub vco_phase_rad: f64,
    pub next_ref_edge_fs: u64,
    /// PLL: predicted from phase; DLL: queue of launched edges.
    pub next_div_edges_fs: std::collections::VecDeque<u64>,
    pub div_edge_count: u64,
    pub pfd_state: PfdState,
    pub up: bool,
    pub down: bool,
    pub last_ref_edge_fs: Option<u64>,
    pub last_div_edge_fs: Option<u64>,
    pub clamp_events: u32,
    /// Signed phase error recorded at the most recent reset, when any.
    pub last_phase_error_rad: Option<f64>,
}

impl LoopState {
    pub fn new(cfg: &LoopConfig) -> Self {
        LoopState {
            t_fs: 0,
            v_c1: cfg.v_init,
            v_c2: cfg.v_init,
            vco_phase_rad: 0.0,
            next_ref_edge_fs: cfg.period_fs(),
            next_div_edges_fs: Default::default(),
            div_edge_count: 0,
            pfd_state: PfdState::default(),
            up: false,
            down: false,
            last_ref_edge_fs: None,
            last_div_edge_fs: None,
            clamp_events: 0,
            last_phase_error_rad: None,
        }
    }

    /// Net charge-pump current in the present output state.
    pub fn pump_current(&self, cfg: &LoopConfig) -> f64 {
        let mut i = 0.0;
        if self.up {
            i += cfg.icp_up_a;
        }
        if self.down {
            i -= cfg.icp_down_a;
        }
        i - cfg.leakage_a
    }

    /// Control voltage seen by the VCO / delay line.
    pub fn v_ctrl(&self, cfg: &LoopConfig) -> f64 {
        let v = match cfg.filter.c2_f {
            Some(_) => self.v_c2,
            None => self.v_c1 + self.pump_current(cfg) * cfg.filter.r_ohm,
        };
        v.clamp(0.0, cfg.vdd_nominal)
    }

    pub fn vco_freq(&self, cfg: &LoopConfig) -> f64 {
        cfg.vco_f0_hz + cfg.vco_kvco_hz_per_v * self.v_ctrl(cfg)
    }

    pub fn dll_delay_s(&self, cfg: &LoopConfig) -> f64 {
        (cfg.dll_d0_s - cfg.dll_kdl_s_per_v * self.v_ctrl(cfg)).max(0.0)
    }
}

/// What a single [`loop_advance`] step processed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoopEvent {
    RefEdge { t_fs: u64 },
    DivEdge { t_fs: u64 },
    ResetTimer { t_fs: u64 },
    /// A reset fired; carries the signed phase error
    /// `(t_ref - t_div) * 2*pi*f_ref` of the comparison.
    Comparison { phase_error_rad: f64 },
}

fn advance_filter(state: &mut LoopState, cfg: &LoopConfig, dt_s: f64) {
    let i = state.pump_current(cfg);
    match cfg.filter.c2_f {
        None => {
            state.v_c1 += i * dt_s / cfg.filter.c1_f;
        }
        Some(c2) => {
            let c1 = cfg.filter.c1_f;
            let r = cfg.filter.r_ohm;
            let q = c1 * state.v_c1 + c2 * state.v_c2 + i * dt_s;
            let tau = r * c1 * c2 / (c1 + c2);
            let dv_inf = i * r * c1 / (c1 + c2);
            let dv0 = state.v_c2 - state.v_c1;
            let dv = dv_inf + (dv0 - dv_inf) * (-dt_s / tau).exp();
            state.v_c1 = (q - c2 * dv) / (c1 + c2);
            state.v_c2 = (q + c1 * dv) / (c1 + c2);
        }
    }
    // Clamp the stored state into the supply range.
    for v in [&mut state.v_c1, &mut state.v_c2] {
        if *v < 0.0 || *v > cfg.vdd_nominal {
            *v = v.clamp(0.0, cfg.vdd_nominal);
            state.clamp_events += 1;
        }
    }
}

/// Closed-form VCO phase increment over `dt_s` in the current regime.
fn phase_increment(state: &LoopState, cfg: &LoopConfig, dt_s: f64) -> f64 {
    let i = state.pump_current(cfg);
    match cfg.filter.c2_f {
        None => {
            let a = (state.v_c1 + i * cfg.filter.r_ohm).clamp(0.0, cfg.vdd_nominal);
            let b = i / cfg.filter.c1_f;
            // v(t) = a + b t (unclamped ramp); clamping mid-interval is rare
            // and absorbed by the voltage clamp at interval ends.
            2.0 * std::f64::consts::PI
                * (cfg.vco_f0_hz * dt_s
                    + cfg.vco_kvco_hz_per_v * (a * dt_s + 0.5 * b * dt_s * dt_s))
        }
        Some(c2) => {
            let c1 = cfg.filter.c1_f;
            let r = cfg.filter.r_ohm;
            let q0 = c1 * state.v_c1 + c2 * state.v_c2;
            let tau = r * c1 * c2 / (c1 + c2);
            let dv_inf = i * r * c1 / (c1 + c2);
            let dv0 = state.v_c2 - state.v_c1;
            // v2(t) = (q(t) + c1*dv(t)) / (c1+c2)
            let int_q = q0 * dt_s + 0.5 * i * dt_s * dt_s;
            let int_dv = dv_inf * dt_s + (dv0 - dv_inf) * tau * (1.0 - (-dt_s / tau).exp());
            let int_v2 = (int_q + c1 * int_dv) / (c1 + c2);
            2.0 * std::f64::consts::PI * (cfg.vco_f0_hz * dt_s + cfg.vco_kvco_hz_per_v * int_v2)
        }
    }
}

/// Solves for the time (seconds from now) at which the VCO phase gains
/// `target_dphi`, within the current regime. Returns None when unreachable.
fn solve_phase_crossing(state: &LoopState, cfg: &LoopConfig, target_dphi: f64) -> Option<f64> {
    if target_dphi <= 0.0 {
        return Some(0.0);
    }
    // Bracket then bisect/Newton; frequency is positive in all supported
    // configs so the increment is strictly monotone in dt.
    let f_now = state.vco_freq(cfg).max(1.0);
    let mut hi = target_dphi / (2.0 * std::f64::consts::PI * f_now);
    let mut iter = 0;
    while phase_increment(state, cfg, hi) < target_dphi {
        hi *= 2.0;
        iter += 1;
        if iter > 128 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phase_increment(state, cfg, mid) < target_dphi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Advances the loop to its earliest pending event and processes it.
pub fn loop_advance(state: &mut LoopState, cfg: &LoopConfig) -> Vec<LoopEvent> {
    // Candidate events.
    let t_ref = state.next_ref_edge_fs;
    let t_timer = state.pfd_state.pending_reset_at;
    let t_div = match cfg.mode {
        LoopMode::Dll => state.next_div_edges_fs.front().copied(),
        LoopMode::Pll => {
            let target =
                2.0 * std::f64::consts::PI * cfg.divider_n as f64 * (state.div_edge_count + 1) as f64;
            let dphi = target - state.vco_phase_rad;
            solve_phase_crossing(state, cfg, dphi)
                .map(|dt_s| state.t_fs + (dt_s * FS_PER_S).round() as u64)
        }
    };

    let mut t_next = t_ref;
    if let Some(t) = t_div {
        t_next = t_next.min(t);
    }
    if let Some(t) = t_timer {
        t_next = t_next.min(t);
    }

    // Integrate up to the event.
    let dt_s = (t_next.saturating_sub(state.t_fs)) as f64 / FS_PER_S;
    state.vco_phase_rad += phase_increment(state, cfg, dt_s);
    advance_filter(state, cfg, dt_s);
    state.t_fs = t_next;

    let mut events = Vec::new();

    // Deliver in deterministic order: timer, then div, then ref.
    if t_timer == Some(t_next) {
        let out = pfd_step(&mut state.pfd_state, &cfg.pfd, PfdEvent::Timer, t_next)
            .expect("timer events are generated in order");
        apply_outputs(state, &out);
        events.push(LoopEvent::ResetTimer { t_fs: t_next });
    }
    if t_div == Some(t_next) {
        match cfg.mode {
            LoopMode::Dll => {
                state.next_div_edges_fs.pop_front();
            }
            LoopMode::Pll => {
                // Snap phase to the crossing target to avoid drift.
                state.div_edge_count += 1;
                state.vco_phase_rad =
                    2.0 * std::f64::consts::PI * cfg.divider_n as f64 * state.div_edge_count as f64;
            }
        }
        if cfg.mode == LoopMode::Dll {
            state.div_edge_count += 1;
        }
        state.last_div_edge_fs = Some(t_next);
        let was_up = state.pfd_state.up;
        let out = pfd_step(&mut state.pfd_state, &cfg.pfd, PfdEvent::DivEdge, t_next)
            .expect("events delivered in order");
        apply_outputs(state, &out);
        events.push(LoopEvent::DivEdge { t_fs: t_next });
        if was_up {
            // Reset fired: ref led, div trailed.
            if let Some(t_ref_last) = state.last_ref_edge_fs {
                let err = (t_ref_last as f64 - t_next as f64) / FS_PER_S
                    * 2.0
                    * std::f64::consts::PI
                    * cfg.f_ref_hz;
                state.last_phase_error_rad = Some(err);
                events.push(LoopEvent::Comparison {
                    phase_error_rad: err,
                });
            }
        }
    }
    if t_ref == t_next {
        state.next_ref_edge_fs += cfg.period_fs();
        state.last_ref_edge_fs = Some(t_next);
        if cfg.mode == LoopMode::Dll {
            let delay_fs = (state.dll_delay_s(cfg) * FS_PER_S).round() as u64;
            state.next_div_edges_fs.push_back(t_next + delay_fs);
        }
        let was_down = state.pfd_state.down;
        let out = pfd_step(&mut state.pfd_state, &cfg.pfd, PfdEvent::RefEdge, t_next)
            .expect("events delivered in order");
        apply_outputs(state, &out);
        events.push(LoopEvent::RefEdge { t_fs: t_next });
        if was_down {
            if let Some(t_div_last) = state.last_div_edge_fs {
                let err = (t_next as f64 - t_div_last as f64) / FS_PER_S
                    * 2.0
                    * std::f64::consts::PI
                    * cfg.f_ref_hz;
                state.last_phase_error_rad = Some(err);
                events.push(LoopEvent::Comparison {
                    phase_error_rad: err,
                });
            }
        }
    }

    events
}

fn apply_outputs(state: &mut LoopState, out: &crate::pfd::StepOutput) {
    // The loop's charge pump follows the logical up/down levels directly;
    // output-stage rise/fall offsets do not shift pump switching here.
    let _ = out;
    state.up = state.pfd_state.up;
    state.down = state.pfd_state.down;
}

/// Outcome of [`run_lock`]. `v_ctrl_trace` is sampled at every reference
/// edge as `(time_fs, volts)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LockReport {
    pub locked: bool,
    pub lock_time_fs: Option<u64>,
    pub steady_phase_error_rad: f64,
    /// Mean lead of the reference edge over the feedback edge near steady
    /// state; positive when Ref leads Div.
    pub steady_ref_lead_rad: f64,
    pub final_freq_hz: f64,
    pub final_v_ctrl: f64,
    pub cycles_run: u64,
    pub clamp_events: u32,
    pub v_ctrl_trace: Vec<(u64, f64)>,
}

/// Runs the loop until the lock criterion holds for 50 consecutive
/// comparisons or `max_cycles` reference cycles elapse.
pub fn run_lock(cfg: &LoopConfig, max_cycles: u64) -> LockReport {
    assert!(max_cycles >= 100, "max_cycles must be at least 100");
    let mut state = LoopState::new(cfg);
    let threshold = cfg.lock_threshold();

    let mut consecutive = 0u32;
    let mut locked_at: Option<u64> = None;
    let mut cycles = 0u64;
    let mut trace = Vec::new();
    let mut recent_errors: std::collections::VecDeque<f64> = Default::default();

    while cycles < max_cycles {
        let events = loop_advance(&mut state, cfg);
        for ev in &events {
            match ev {
                LoopEvent::RefEdge { t_fs } => {
                    cycles += 1;
                    trace.push((*t_fs, state.v_ctrl(cfg)));
                }
                LoopEvent::Comparison { phase_error_rad } => {
                    recent_errors.push_back(*phase_error_rad);
                    if recent_errors.len() > 50 {
                        recent_errors.pop_front();
                    }
                    if phase_error_rad.abs() < threshold {
                        consecutive += 1;
                        if consecutive == 50 && locked_at.is_none() {
                            locked_at = Some(state.t_fs);
                        }
                    } else {
                        consecutive = 0;
                    }
                }
                _ => {}
            }
        }
    }

    let steady = if recent_errors.is_empty() {
        0.0
    } else {
        recent_errors.iter().sum::<f64>() / recent_errors.len() as f64
    };
    let final_freq = match cfg.mode {
        LoopMode::Pll => state.vco_freq(cfg),
        LoopMode::Dll => cfg.f_ref_hz,
    };
    LockReport {
        locked: locked_at.is_some(),
        lock_time_fs: locked_at,
        steady_phase_error_rad: steady,
        steady_ref_lead_rad: -steady,
        final_freq_hz: final_freq,
        final_v_ctrl: state.v_ctrl(cfg),
        cycles_run: cycles,
        clamp_events: state.clamp_events,
        v_ctrl_trace: trace,
    }
}

/// Forward-Euler reference integrator with event-aligned substeps.
///
/// Returns `(time_fs, v_ctrl)` samples at every grid point. Independent of
/// the closed-form path: voltage advances by `I*dt/C`, phase by `2*pi*f*dt`
/// with v held constant over each substep, and feedback edges are detected
/// by phase crossing with linear interpolation.
pub fn fixed_step_reference(cfg: &LoopConfig, t_end_fs: u64, dt_fs: u64) -> Vec<(u64, f64)> {
    let mut state = LoopState::new(cfg);
    let mut samples = Vec::new();
    let mut t = 0u64;
    samples.push((0, state.v_ctrl(cfg)));

    while t < t_end_fs {
        let step_end = (t + dt_fs).min(t_end_fs);
        // Process any events inside (t, step_end] in time order.
        loop {
            let t_timer = state.pfd_state.pending_reset_at.filter(|&tt| tt <= step_end);
            let t_ref = (state.next_ref_edge_fs <= step_end).then_some(state.next_ref_edge_fs);
            let t_div = match cfg.mode {
                LoopMode::Dll => state
                    .next_div_edges_fs
                    .front()
                    .copied()
                    .filter(|&td| td <= step_end),
                LoopMode::Pll => {
                    let target = 2.0
                        * std::f64::consts::PI
                        * cfg.divider_n as f64
                        * (state.div_edge_count + 1) as f64;
                    let dphi = target - state.vco_phase_rad;
                    let f = state.vco_freq(cfg).max(1.0);
                    let dt_cross = dphi / (2.0 * std::f64::consts::PI * f);
                    let t_cross = state.t_fs + (dt_cross * FS_PER_S).round().max(0.0) as u64;
                    (t_cross <= step_end).then_some(t_cross)
                }
            };
            let mut next: Option<(u64, u8)> = None;
            for (cand, kind) in [(t_timer, 0u8), (t_div, 1), (t_ref, 2)] {
                if let Some(tc) = cand {
                    if next.map(|(tn, _)| tc < tn).unwrap_or(true) {
                        next = Some((tc, kind));
                    }
                }
            }
            let Some((te, kind)) = next else { break };

            // Euler-integrate up to the event.
            euler_advance(&mut state, cfg, te);
            match kind {
                0 => {
                    let out =
                        pfd_step(&mut state.pfd_state, &cfg.pfd, PfdEvent::Timer, te).unwrap();
                    apply_outputs(&mut state, &out);
                }
                1 => {
                    match cfg.mode {
                        LoopMode::Dll => {
                            state.next_div_edges_fs.pop_front();
                        }
                        LoopMode::Pll => {
                            state.div_edge_count += 1;
                            state.vco_phase_rad = 2.0
                                * std::f64::consts::PI
                                * cfg.divider_n as f64
                                * state.div_edge_count as f64;
                        }
                    }
                    if cfg.mode == LoopMode::Dll {
                        state.div_edge_count += 1;
                    }
                    state.last_div_edge_fs = Some(te);
                    let out =
                        pfd_step(&mut state.pfd_state, &cfg.pfd, PfdEvent::DivEdge, te).unwrap();
                    apply_outputs(&mut state, &out);
                }
                _ => {
                    state.next_ref_edge_fs += cfg.period_fs();
                    state.last_ref_edge_fs = Some(te);
                    if cfg.mode == LoopMode::Dll {
                        let delay_fs = (state.dll_delay_s(cfg) * FS_PER_S).round() as u64;
                        state.next_div_edges_fs.push_back(te + delay_fs);
                    }
                    let out =
                        pfd_step(&mut state.pfd_state, &cfg.pfd, PfdEvent::RefEdge, te).unwrap();
                    apply_outputs(&mut state, &out);
                }
            }
        }
        euler_advance(&mut state, cfg, step_end);
        t = step_end;
        samples.push((t, state.v_ctrl(cfg)));
    }
    samples
}

fn euler_advance(state: &mut LoopState, cfg: &LoopConfig, to_fs: u64) {
    if to_fs <= state.t_fs {
        return;
    }
    let dt_s = (to_fs - state.t_fs) as f64 / FS_PER_S;
    let v = state.v_ctrl(cfg);
    state.vco_phase_rad +=
        2.0 * std::f64::consts::PI * (cfg.vco_f0_hz + cfg.vco_kvco_hz_per_v * v) * dt_s;
    let i = state.pump_current(cfg);
    match cfg.filter.c2_f {
        None => state.v_c1 += i * dt_s / cfg.filter.c1_f,
        Some(c2) => {
            let i_r = (state.v_c2 - state.v_c1) / cfg.filter.r_ohm;
            state.v_c1 += i_r * dt_s / cfg.filter.c1_f;
            state.v_c2 += (i - i_r) * dt_s / c2;
        }
    }
    for v in [&mut state.v_c1, &mut state.v_c2] {
        if *v < 0.0 || *v > cfg.vdd_nominal {
            *v = v.clamp(0.0, cfg.vdd_nominal);
            state.clamp_events += 1;
        }
    }
    state.t_fs = to_fs;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_current_leaves_v_ctrl_unchanged() {
        let mut cfg = LoopConfig::pinned_pll();
        cfg.icp_up_a = 0.0;
        cfg.icp_down_a = 0.0;
        cfg.v_init = 0.3;
        let mut state = LoopState::new(&cfg);
        for _ in 0..100 {
            loop_advance(&mut state, &cfg);
        }
        assert_eq!(state.v_ctrl(&cfg), 0.3);
    }

    #[test]
    fn charge_arithmetic_100ps_50ua_into_10pf() {
        let cfg = LoopConfig::pinned_pll();
        let mut state = LoopState::new(&cfg);
        state.up = true;
        let v0 = state.v_c1;
        advance_filter(&mut state, &cfg, 100e-12);
        // dV = I dt / C1 = 50 uA * 100 ps / 10 pF = 0.5 mV.
        assert!((state.v_c1 - v0 - 0.5e-3).abs() < 1e-12);
    }

    #[test]
    fn open_loop_reports_unlocked() {
        let mut cfg = LoopConfig::pinned_pll();
        cfg.icp_up_a = 0.0;
        cfg.icp_down_a = 0.0;
        let report = run_lock(&cfg, 200);
        assert!(!report.locked);
        let constant = report.v_ctrl_trace.iter().all(|&(_, v)| v == cfg.v_init);
        assert!(constant);
    }

    #[test]
    fn pinned_pll_locks_to_1ghz() {
        let cfg = LoopConfig::pinned_pll();
        let report = run_lock(&cfg, 3000);
        assert!(report.locked, "report: {:?}", report.lock_time_fs);
        let err = (report.final_freq_hz - 1e9).abs() / 1e9;
        assert!(err < 1e-3, "final freq {} Hz", report.final_freq_hz);
    }

    #[test]
    fn pinned_dll_locks_to_one_period() {
        let cfg = LoopConfig::pinned_dll();
        let report = run_lock(&cfg, 3000);
        assert!(report.locked);
        // Steady delay error below the dead-zone equivalent.
        assert!(report.steady_phase_error_rad.abs() < cfg.lock_threshold());
    }

    #[test]
    fn charge_bookkeeping_with_c2_conserves_charge() {
        let mut cfg = LoopConfig::pinned_pll();
        cfg.filter.c2_f = Some(2e-12);
        let mut state = LoopState::new(&cfg);
        state.up = true;
        let q0 = cfg.filter.c1_f * state.v_c1 + 2e-12 * state.v_c2;
        advance_filter(&mut state, &cfg, 3e-9);
        let q1 = cfg.filter.c1_f * state.v_c1 + 2e-12 * state.v_c2;
        let injected = cfg.icp_up_a * 3e-9;
        assert!((q1 - q0 - injected).abs() < injected * 1e-12);
    }
}
