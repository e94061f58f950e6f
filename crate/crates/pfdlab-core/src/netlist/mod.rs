//! Transistor netlist representation: nets, MOS devices, and whole-circuit
//! containers, plus the text format used to exchange them.
//!
//! A netlist here is a switch-level description: every device is an NMOS or
//! PMOS switch with drain/gate/source terminals and an optional per-device
//! delay attribute in femtoseconds. Supplies, inputs, and outputs are
//! declared explicitly; all other nets are internal signal nets.

mod ccc;
mod parser;
mod reference;
mod validate;

pub use ccc::{channel_connected_components, ComponentPartition};
pub use parser::{parse_netlist, ParseError};
pub use reference::{build_reference_pfd, build_reference_pfd_with_buffers, ReferenceNets};
pub use validate::{validate, ValidationReport, Violation};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Role of a net within a netlist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetKind {
    /// Internal signal net.
    Signal,
    /// Positive supply rail (logic one).
    SupplyHigh,
    /// Ground rail (logic zero).
    SupplyLow,
    /// Externally driven input.
    Input,
    /// Declared observable output.
    Output,
}

/// A named net.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub kind: NetKind,
}

/// MOS polarity. NMOS conducts on gate = 1, PMOS on gate = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    Pmos,
    Nmos,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::Pmos => write!(f, "PMOS"),
            Polarity::Nmos => write!(f, "NMOS"),
        }
    }
}

/// A single MOS switch.
///
/// `delay_fs` is the per-device switching delay attribute; `None` defers to
/// the simulator's delay configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Device {
    pub name: String,
    pub polarity: Polarity,
    pub drain: String,
    pub gate: String,
    pub source: String,
    pub delay_fs: Option<u64>,
}

/// A complete netlist: nets, devices, and free-form metadata.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Netlist {
    pub nets: Vec<Net>,
    pub devices: Vec<Device>,
    pub metadata: BTreeMap<String, String>,
}

impl Netlist {
    /// Looks up a net by name.
    pub fn net(&self, name: &str) -> Option<&Net> {
        self.nets.iter().find(|n| n.name == name)
    }

    /// Index of a net by name.
    pub fn net_index(&self, name: &str) -> Option<usize> {
        self.nets.iter().position(|n| n.name == name)
    }

    /// The supply-high net name, if declared.
    pub fn supply_high(&self) -> Option<&str> {
        self.nets
            .iter()
            .find(|n| n.kind == NetKind::SupplyHigh)
            .map(|n| n.name.as_str())
    }

    /// The supply-low net name, if declared.
    pub fn supply_low(&self) -> Option<&str> {
        self.nets
            .iter()
            .find(|n| n.kind == NetKind::SupplyLow)
            .map(|n| n.name.as_str())
    }

    /// Names of declared input nets, in declaration order.
    pub fn inputs(&self) -> Vec<&str> {
        self.nets
            .iter()
            .filter(|n| n.kind == NetKind::Input)
            .map(|n| n.name.as_str())
            .collect()
    }

    /// Names of declared output nets, in declaration order.
    pub fn outputs(&self) -> Vec<&str> {
        self.nets
            .iter()
            .filter(|n| n.kind == NetKind::Output)
            .map(|n| n.name.as_str())
            .collect()
    }

    /// Serializes to the canonical text form.
    ///
    /// The output is deterministic: equal netlists serialize byte-identically,
    /// and `parse_netlist(serialize(n)) == n` for every valid netlist.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!(".meta {} {}\n", k, v));
        }
        if let Some(h) = self.supply_high() {
            out.push_str(&format!(".supply vdd {}\n", h));
        }
        if let Some(l) = self.supply_low() {
            out.push_str(&format!(".supply gnd {}\n", l));
        }
        let inputs = self.inputs();
        if !inputs.is_empty() {
            out.push_str(&format!(".input {}\n", inputs.join(" ")));
        }
        let outputs = self.outputs();
        if !outputs.is_empty() {
            out.push_str(&format!(".output {}\n", outputs.join(" ")));
        }
        let signals: Vec<&str> = self
            .nets
            .iter()
            .filter(|n| n.kind == NetKind::Signal)
            .map(|n| n.name.as_str())
            .collect();
        if !signals.is_empty() {
            out.push_str(&format!(".net {}\n", signals.join(" ")));
        }
        for d in &self.devices {
            match d.delay_fs {
                Some(fs) => out.push_str(&format!(
                    "M{} {} {} {} {} delay={}fs\n",
                    d.name, d.drain, d.gate, d.source, d.polarity, fs
                )),
                None => out.push_str(&format!(
                    "M{} {} {} {} {}\n",
                    d.name, d.drain, d.gate, d.source, d.polarity
                )),
            }
        }
        out.push_str(".end\n");
        out
    }
}
