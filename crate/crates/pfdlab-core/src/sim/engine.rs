//! The event loop.
//!
//! Events are processed in timestamp batches: all input edges and scheduled
//! net transitions at the current time are applied together in net-name
//! order, the affected channel-connected components are re-solved in index
//! order, and resulting transitions are scheduled after the bottleneck delay
//! of the newly conducting path. Re-solving reconciles pending transitions:
//! a pending event whose value no longer matches the solved target is
//! cancelled (a cut-off in-flight transition never lands). Zero-delay
//! devices feed a micro-iteration at the same timestamp, bounded by the
//! oscillation guard.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;

use thiserror::Error;

use super::solve::solve_ccc;
use super::stimulus::{Stimulus, StimulusError};
use super::waveform::WaveformSet;
use super::{Bit, LogicValue, Origin, SimModel};

/// Default bound on same-timestamp micro-iterations.
pub const DEFAULT_OSCILLATION_BOUND: usize = 1000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Stimulus(#[from] StimulusError),
    #[error("oscillation at t = {time_fs} fs: {iterations} zero-delay iterations without settling")]
    Oscillation { time_fs: u64, iterations: usize },
}

/// Counters describing one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimStats {
    pub transitions: usize,
    pub batches: usize,
    pub solves: usize,
}

/// Run output: complete waveforms, final net states, and counters.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub waveform: WaveformSet,
    pub final_state: BTreeMap<String, LogicValue>,
    pub stats: SimStats,
}

impl RunResult {
    pub fn final_value(&self, net: &str) -> Option<LogicValue> {
        self.final_state.get(net).copied()
    }
}

/// Runs the model under `stim` until `t_end` (fs) inclusive.
pub fn run(model: &SimModel, stim: &Stimulus, t_end: u64) -> Result<RunResult, SimError> {
    run_with_bound(model, stim, t_end, DEFAULT_OSCILLATION_BOUND)
}

/// [`run`] with an explicit oscillation bound.
pub fn run_with_bound(
    model: &SimModel,
    stim: &Stimulus,
    t_end: u64,
    oscillation_bound: usize,
) -> Result<RunResult, SimError> {
    let inputs = model.netlist.inputs();
    stim.check(&inputs)?;

    let idx = &model.index;
    let n_nets = model.netlist.nets.len();

    // Current state. Everything starts as stored UNKNOWN, then presets,
    // rails, and initial input levels are applied.
    let mut state = vec![LogicValue::stored(Bit::Unknown); n_nets];
    for (name, preset) in &model.initial_state {
        if let Some(&ni) = idx.net_ids.get(name) {
            state[ni] = *preset;
        }
    }
    state[idx.vdd] = LogicValue::driven(Bit::One);
    state[idx.gnd] = LogicValue::driven(Bit::Zero);
    for &ii in &idx.input_ids {
        let level = stim.initial_level(&model.netlist.nets[ii].name);
        state[ii] = LogicValue::driven(level);
    }

    let mut waveform = WaveformSet::new(
        model.netlist.nets.iter().map(|n| n.name.clone()).collect(),
        t_end,
    );
    for (ni, lv) in state.iter().enumerate() {
        waveform.record(ni, 0, *lv);
    }

    // Input edges, ascending; index into it as time advances.
    let input_events = stim.events_until(t_end);
    let mut next_input = 0usize;

    // One pending transition per net, with a lazy heap of (time, net).
    let mut pending: Vec<Option<(u64, LogicValue)>> = vec![None; n_nets];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();

    let mut stats = SimStats::default();

    // Name-ordered application within a batch.
    let mut name_order: Vec<usize> = (0..n_nets).collect();
    name_order.sort_by(|&a, &b| model.netlist.nets[a].name.cmp(&model.netlist.nets[b].name));
    let name_rank: Vec<usize> = {
        let mut r = vec![0; n_nets];
        for (rank, &ni) in name_order.iter().enumerate() {
            r[ni] = rank;
        }
        r
    };

    // The t = 0 batch resolves every component once.
    let mut first = true;

    loop {
        let next_sched = loop {
            match heap.peek() {
                Some(&Reverse((t, ni))) => match pending[ni] {
                    Some((pt, _)) if pt == t => break Some(t),
                    _ => {
                        heap.pop();
                    }
                },
                None => break None,
            }
        };
        let next_in = input_events.get(next_input).map(|e| e.1);
        let t_now = if first {
            0
        } else {
            match (next_sched, next_in) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => break,
            }
        };
        if t_now > t_end {
            break;
        }

        let mut affected: BTreeSet<usize> = BTreeSet::new();
        if first {
            affected.extend(0..idx.comp_devices.len());
        }

        let mut iterations = 0usize;
        loop {
            // Gather this micro-batch: scheduled transitions and input edges at t_now.
            let mut batch: Vec<(usize, LogicValue)> = Vec::new();
            loop {
                match heap.peek() {
                    Some(&Reverse((t, ni))) if t == t_now => {
                        heap.pop();
                        if let Some((pt, lv)) = pending[ni] {
                            if pt == t_now {
                                pending[ni] = None;
                                batch.push((ni, lv));
                            }
                        }
                    }
                    _ => break,
                }
            }
            while next_input < input_events.len() && input_events[next_input].1 == t_now {
                let (net, _, level) = &input_events[next_input];
                let ni = idx.net_ids[net];
                batch.push((ni, LogicValue::driven(*level)));
                next_input += 1;
            }
            if batch.is_empty() && !(first && iterations == 0) {
                break;
            }
            batch.sort_by_key(|&(ni, _)| name_rank[ni]);

            for &(ni, lv) in &batch {
                let prev = state[ni];
                state[ni] = lv;
                if prev.value != lv.value {
                    waveform.record(ni, t_now, lv);
                    stats.transitions += 1;
                }
                if let Some(owner) = idx.owner[ni] {
                    affected.insert(owner);
                }
                for &comp in &idx.gate_listeners[ni] {
                    affected.insert(comp);
                }
            }

            // Re-solve affected components and reconcile schedules.
            let comps: Vec<usize> = affected.iter().copied().collect();
            affected.clear();
            for comp in comps {
                stats.solves += 1;
                let solved = solve_ccc(model, comp, &state);
                for (slot, &ni) in idx.comp_nets[comp].iter().enumerate() {
                    let target = solved[slot].state;
                    let current = state[ni];
                    match target.origin {
                        Origin::Driven => {
                            let delay = solved[slot].path_delay_fs.unwrap_or(0);
                            match pending[ni] {
                                Some((_, lv)) if lv.value == target.value => {
                                    // Keep the earlier schedule.
                                }
                                _ => {
                                    pending[ni] = None;
                                    if target.value != current.value {
                                        let at = t_now + delay;
                                        pending[ni] = Some((at, target));
                                        heap.push(Reverse((at, ni)));
                                    } else if current.origin != Origin::Driven {
                                        // Same level, now actively held.
                                        state[ni] = target;
                                    }
                                }
                            }
                        }
                        Origin::Stored => {
                            if target.value == current.value {
                                // Cut-off: any in-flight transition is lost.
                                pending[ni] = None;
                                if current.origin != Origin::Stored {
                                    state[ni] = target;
                                }
                            } else {
                                // Charge uncertainty materializes after the
                                // possible path's delay.
                                debug_assert_eq!(target.value, Bit::Unknown);
                                let at = t_now + solved[slot].path_delay_fs.unwrap_or(0);
                                match pending[ni] {
                                    Some((_, lv)) if lv.value == target.value => {}
                                    _ => {
                                        pending[ni] = Some((at, target));
                                        heap.push(Reverse((at, ni)));
                                    }
                                }
                            }
                        }
                    }
                }
            }

            stats.batches += 1;
            iterations += 1;
            if iterations > oscillation_bound {
                return Err(SimError::Oscillation {
                    time_fs: t_now,
                    iterations,
                });
            }

            // Loop again only if new same-timestamp work appeared.
            let more_sched = loop {
                match heap.peek() {
                    Some(&Reverse((t, ni))) => {
                        if pending[ni].map(|(pt, _)| pt == t).unwrap_or(false) {
                            break t == t_now;
                        }
                        heap.pop();
                    }
                    None => break false,
                }
            };
            let more_input =
                next_input < input_events.len() && input_events[next_input].1 == t_now;
            if !more_sched && !more_input {
                break;
            }
        }
        first = false;
    }

    let final_state = model
        .netlist
        .nets
        .iter()
        .enumerate()
        .map(|(ni, n)| (n.name.clone(), state[ni]))
        .collect();

    Ok(RunResult {
        waveform,
        final_state,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;
    use crate::sim::{compile, DelayConfig};

    fn inverter() -> SimModel {
        let n = parse_netlist(
            b".supply vdd VDD
.supply gnd GND
.input in
.output out
MP1 out in VDD PMOS
MN1 out in GND NMOS
.end
",
        )
        .unwrap();
        compile(&n, &DelayConfig::new(), 10_000).unwrap()
    }

    #[test]
    fn inverter_follows_input_with_one_delay() {
        let m = inverter();
        let stim = Stimulus::new()
            .edge("in", 100_000, Bit::One)
            .edge("in", 200_000, Bit::Zero);
        let r = run(&m, &stim, 300_000).unwrap();
        let out = r.waveform.transitions("out").unwrap();
        // t=0: unknown -> solves to driven one at 10 ps; then follows input.
        assert_eq!(out[1], (10_000, LogicValue::driven(Bit::One)));
        assert_eq!(out[2], (110_000, LogicValue::driven(Bit::Zero)));
        assert_eq!(out[3], (210_000, LogicValue::driven(Bit::One)));
        assert_eq!(r.final_value("out").unwrap().value, Bit::One);
    }

    #[test]
    fn zero_delay_override_switches_instantaneously() {
        let n = inverter().netlist;
        let mut overrides = DelayConfig::new();
        overrides.insert("P1".into(), 0);
        overrides.insert("N1".into(), 0);
        let m = compile(&n, &overrides, 10_000).unwrap();
        let stim = Stimulus::new().edge("in", 100_000, Bit::One);
        let r = run(&m, &stim, 200_000).unwrap();
        let out = r.waveform.transitions("out").unwrap();
        assert!(out.contains(&(100_000, LogicValue::driven(Bit::Zero))));
    }

    #[test]
    fn determinism_same_inputs_same_waves() {
        let m = inverter();
        let stim = Stimulus::new().clock("in", 50_000, 10_000, 0.4);
        let a = run(&m, &stim, 1_000_000).unwrap();
        let b = run(&m, &stim, 1_000_000).unwrap();
        assert_eq!(a.waveform, b.waveform);
        assert_eq!(a.stats, b.stats);
    }
}
