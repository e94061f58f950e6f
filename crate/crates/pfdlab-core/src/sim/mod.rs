//! Event-driven switch-level simulation of MOS netlists.
//!
//! Nets carry three-valued logic with a two-level strength model: a net is
//! DRIVEN when a conducting path reaches a rail, and STORED (charge
//! retention) when no path conducts. Conflicting rails resolve to UNKNOWN;
//! there is no ratioed resolution and no pass-level degradation.

mod engine;
mod solve;
mod stimulus;
mod waveform;

pub use engine::{run, RunResult, SimError, SimStats};
pub use solve::{solve_ccc, NetState};
pub use stimulus::{ClockSpec, Stimulus, StimulusError};
pub use waveform::{
    export_waveform, parse_waveform_csv, values_only, ExportFormat, WaveformError, WaveformSet,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::netlist::{
    channel_connected_components, validate, ComponentPartition, NetKind, Netlist, Polarity,
};

/// Default per-device switching delay when neither an override nor a netlist
/// attribute applies.
pub const DEFAULT_DEVICE_DELAY_FS: u64 = 10_000;

/// Three-valued logic level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
    Unknown,
}

impl Bit {
    pub fn as_char(self) -> char {
        match self {
            Bit::Zero => '0',
            Bit::One => '1',
            Bit::Unknown => 'X',
        }
    }

    pub fn from_char(c: char) -> Option<Bit> {
        match c {
            '0' => Some(Bit::Zero),
            '1' => Some(Bit::One),
            'X' | 'x' => Some(Bit::Unknown),
            _ => None,
        }
    }
}

/// How a net arrived at its current level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// A conducting path to a rail (or input) imposes the level.
    Driven,
    /// No conducting path; the level is retained charge.
    Stored,
}

/// A net's level together with its strength origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicValue {
    pub value: Bit,
    pub origin: Origin,
}

impl LogicValue {
    pub const fn driven(value: Bit) -> Self {
        LogicValue {
            value,
            origin: Origin::Driven,
        }
    }

    pub const fn stored(value: Bit) -> Self {
        LogicValue {
            value,
            origin: Origin::Stored,
        }
    }
}

/// Per-device delay overrides by device name.
pub type DelayConfig = BTreeMap<String, u64>;

/// Compile error: the netlist failed validation.
#[derive(Debug, thiserror::Error)]
#[error("netlist failed validation: {0:?}")]
pub struct CompileError(pub Vec<crate::netlist::Violation>);

/// A compiled simulation model: netlist plus precomputed channel-connected
/// components and fully resolved per-device delays.
///
/// Immutable after compile;多 concurrent runs may share one model.
#[derive(Debug, Clone)]
pub struct SimModel {
    pub netlist: Netlist,
    pub partition: ComponentPartition,
    /// Resolved delay per device, same order as `netlist.devices`.
    pub delays_fs: Vec<u64>,
    /// Optional preset levels applied at t = 0 (nets not listed start as
    /// stored UNKNOWN).
    pub initial_state: BTreeMap<String, LogicValue>,
    pub(crate) index: ModelIndex,
}

/// Precomputed lookup tables used by the event loop.
#[derive(Debug, Clone)]
pub(crate) struct ModelIndex {
    /// Net name -> net index.
    pub net_ids: BTreeMap<String, usize>,
    /// Per net: component ids that contain a device gated by this net.
    pub gate_listeners: Vec<Vec<usize>>,
    /// Per net: component id owning this net (None for boundary nets).
    pub owner: Vec<Option<usize>>,
    /// Per component: devices (netlist indices).
    pub comp_devices: Vec<Vec<usize>>,
    /// Per component: internal net indices.
    pub comp_nets: Vec<Vec<usize>>,
    /// Rail / input net indices.
    pub vdd: usize,
    pub gnd: usize,
    pub input_ids: Vec<usize>,
}

impl SimModel {
    /// Resolved delay of a device by name, mainly for tests.
    pub fn delay_of(&self, device: &str) -> Option<u64> {
        self.netlist
            .devices
            .iter()
            .position(|d| d.name == device)
            .map(|i| self.delays_fs[i])
    }

    pub fn max_delay_fs(&self) -> u64 {
        self.delays_fs.iter().copied().max().unwrap_or(0)
    }

    /// Returns a copy with preset initial net levels.
    pub fn with_initial_state(mut self, presets: BTreeMap<String, LogicValue>) -> Self {
        self.initial_state = presets;
        self
    }
}

/// Compiles a validated netlist into a simulation model.
///
/// Delay resolution order: explicit override, then netlist `delay=`
/// attribute, then `default_delay_fs`.
pub fn compile(
    netlist: &Netlist,
    overrides: &DelayConfig,
    default_delay_fs: u64,
) -> Result<SimModel, CompileError> {
    let report = validate(netlist);
    if !report.is_valid() {
        return Err(CompileError(
            report.violations.into_iter().filter(|v| !v.is_warning()).collect(),
        ));
    }

    let partition = channel_connected_components(netlist);
    let delays_fs = netlist
        .devices
        .iter()
        .map(|d| {
            overrides
                .get(&d.name)
                .copied()
                .or(d.delay_fs)
                .unwrap_or(default_delay_fs)
        })
        .collect();

    let net_ids: BTreeMap<String, usize> = netlist
        .nets
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.clone(), i))
        .collect();

    let mut gate_listeners = vec![Vec::new(); netlist.nets.len()];
    for (ci, devs) in partition.device_groups.iter().enumerate() {
        for &di in devs {
            let gi = net_ids[&netlist.devices[di].gate];
            let listeners: &mut Vec<usize> = &mut gate_listeners[gi];
            if !listeners.contains(&ci) {
                listeners.push(ci);
            }
        }
    }

    let mut owner = vec![None; netlist.nets.len()];
    for (ci, nets) in partition.net_groups.iter().enumerate() {
        for &ni in nets {
            owner[ni] = Some(ci);
        }
    }

    let vdd = netlist
        .nets
        .iter()
        .position(|n| n.kind == NetKind::SupplyHigh)
        .expect("validated netlist has vdd");
    let gnd = netlist
        .nets
        .iter()
        .position(|n| n.kind == NetKind::SupplyLow)
        .expect("validated netlist has gnd");
    let input_ids = netlist
        .nets
        .iter()
        .enumerate()
        .filter(|(_, n)| n.kind == NetKind::Input)
        .map(|(i, _)| i)
        .collect();

    let index = ModelIndex {
        net_ids,
        gate_listeners,
        owner,
        comp_devices: partition.device_groups.clone(),
        comp_nets: partition.net_groups.clone(),
        vdd,
        gnd,
        input_ids,
    };

    Ok(SimModel {
        netlist: netlist.clone(),
        partition,
        delays_fs,
        initial_state: BTreeMap::new(),
        index,
    })
}

/// Conduction rule: NMOS on gate=1, PMOS on gate=0; UNKNOWN gate means
/// possibly conducting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Conduction {
    On,
    Off,
    Maybe,
}

pub(crate) fn conduction(polarity: Polarity, gate: Bit) -> Conduction {
    match (polarity, gate) {
        (Polarity::Nmos, Bit::One) | (Polarity::Pmos, Bit::Zero) => Conduction::On,
        (Polarity::Nmos, Bit::Zero) | (Polarity::Pmos, Bit::One) => Conduction::Off,
        (_, Bit::Unknown) => Conduction::Maybe,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::build_reference_pfd;

    #[test]
    fn default_delay_propagates_to_all_devices() {
        let model = compile(&build_reference_pfd(), &DelayConfig::new(), DEFAULT_DEVICE_DELAY_FS)
            .unwrap();
        assert_eq!(model.delays_fs.len(), 20);
        assert!(model.delays_fs.iter().all(|&d| d == 10_000));
    }

    #[test]
    fn override_beats_attribute_beats_default() {
        let mut netlist = build_reference_pfd();
        netlist.devices[0].delay_fs = Some(5_000);
        let mut overrides = DelayConfig::new();
        overrides.insert(netlist.devices[1].name.clone(), 1_000);
        let model = compile(&netlist, &overrides, 10_000).unwrap();
        assert_eq!(model.delays_fs[0], 5_000);
        assert_eq!(model.delays_fs[1], 1_000);
        assert_eq!(model.delays_fs[2], 10_000);
    }
}
