//! Built-in reference PFD netlist.
//!
//! The circuit is two mirrored dynamic TSPC-style halves of ten transistors
//! each. The Up half samples the Ref edge, the Down half samples the Div
//! edge, and each half resets the other through a cross-coupled discharge
//! pair. Per half:
//!
//! * a series PMOS pair precharges the first dynamic node (W1/W3) while both
//!   inputs are low, and a single NMOS discharges it on the half's own clock;
//! * a second stage discharges the self-resetting node (W2/W4) through an
//!   NMOS stack on the clock edge, after which that node immediately
//!   recharges through a PMOS gated by the now-low first node — producing a
//!   one-delay evaluation window;
//! * the output (X/Y) is charged through a PMOS pair during the evaluation
//!   window and then held dynamically; it is discharged through an NMOS pair
//!   gated by the opposite output and by the self-resetting node, which
//!   blocks the discharge path exactly while the output is being charged.
//!
//! Net and device names follow the Up-half symbols W1/W2 and P1..P5/N1..N5,
//! with W3/W4, P6..P10, and N6..N10 as their Down-half mirrors.

use super::{Device, Net, NetKind, Netlist, Polarity};

/// Well-known net names of the reference PFD.
pub struct ReferenceNets;

impl ReferenceNets {
    pub const VDD: &'static str = "VDD";
    pub const GND: &'static str = "GND";
    pub const REF: &'static str = "Ref";
    pub const DIV: &'static str = "Div";
    /// Up output.
    pub const X: &'static str = "X";
    /// Down output.
    pub const Y: &'static str = "Y";
    pub const W1: &'static str = "W1";
    pub const W2: &'static str = "W2";
    pub const W3: &'static str = "W3";
    pub const W4: &'static str = "W4";
}

fn dev(name: &str, polarity: Polarity, drain: &str, gate: &str, source: &str) -> Device {
    Device {
        name: name.to_string(),
        polarity,
        drain: drain.to_string(),
        gate: gate.to_string(),
        source: source.to_string(),
        delay_fs: None,
    }
}

/// Builds the 20-transistor reference PFD.
///
/// Inputs `Ref` and `Div`; outputs `X` (Up) and `Y` (Down). Deterministic:
/// repeated calls serialize byte-identically.
pub fn build_reference_pfd() -> Netlist {
    use Polarity::{Nmos, Pmos};

    let mut nets = Vec::new();
    let mut push = |name: &str, kind: NetKind| {
        nets.push(Net {
            name: name.to_string(),
            kind,
        })
    };
    push(ReferenceNets::VDD, NetKind::SupplyHigh);
    push(ReferenceNets::GND, NetKind::SupplyLow);
    push(ReferenceNets::REF, NetKind::Input);
    push(ReferenceNets::DIV, NetKind::Input);
    push(ReferenceNets::X, NetKind::Output);
    push(ReferenceNets::Y, NetKind::Output);
    for s in ["W1", "W2", "W3", "W4", "A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4"] {
        push(s, NetKind::Signal);
    }

    let devices = vec![
        // Up half: clocked by Ref, data input Div, output X.
        dev("P1", Pmos, "A1", "Div", "VDD"),
        dev("P2", Pmos, "W1", "Ref", "A1"),
        dev("P3", Pmos, "W2", "W1", "VDD"),
        dev("P4", Pmos, "A3", "W2", "VDD"),
        dev("P5", Pmos, "X", "Div", "A3"),
        dev("N1", Nmos, "W1", "Ref", "GND"),
        dev("N2", Nmos, "W2", "W1", "A2"),
        dev("N3", Nmos, "A2", "Ref", "GND"),
        dev("N4", Nmos, "A4", "W2", "GND"),
        dev("N5", Nmos, "X", "Y", "A4"),
        // Down half: clocked by Div, data input Ref, output Y.
        dev("P6", Pmos, "B1", "Ref", "VDD"),
        dev("P7", Pmos, "W3", "Div", "B1"),
        dev("P8", Pmos, "W4", "W3", "VDD"),
        dev("P9", Pmos, "B3", "W4", "VDD"),
        dev("P10", Pmos, "Y", "Ref", "B3"),
        dev("N6", Nmos, "W3", "Div", "GND"),
        dev("N7", Nmos, "W4", "W3", "B2"),
        dev("N8", Nmos, "B2", "Div", "GND"),
        dev("N9", Nmos, "B4", "W4", "GND"),
        dev("N10", Nmos, "Y", "X", "B4"),
    ];

    let mut metadata = std::collections::BTreeMap::new();
    metadata.insert("name".to_string(), "tspc_pfd_20t".to_string());
    metadata.insert("up_net".to_string(), ReferenceNets::X.to_string());
    metadata.insert("down_net".to_string(), ReferenceNets::Y.to_string());

    Netlist {
        nets,
        devices,
        metadata,
    }
}

/// Reference PFD with an output inverter pair appended, so `Up`/`Down` are
/// buffered copies of X/Y rather than the dynamic nodes themselves.
pub fn build_reference_pfd_with_buffers() -> Netlist {
    use Polarity::{Nmos, Pmos};
    let mut n = build_reference_pfd();
    for (node, bar, out) in [("X", "XB", "Up"), ("Y", "YB", "Down")] {
        for name in [bar, out] {
            n.nets.push(Net {
                name: name.to_string(),
                kind: if name == out {
                    NetKind::Output
                } else {
                    NetKind::Signal
                },
            });
        }
        n.devices.push(dev(&format!("PB{}1", node), Pmos, bar, node, "VDD"));
        n.devices.push(dev(&format!("NB{}1", node), Nmos, bar, node, "GND"));
        n.devices.push(dev(&format!("PB{}2", node), Pmos, out, bar, "VDD"));
        n.devices.push(dev(&format!("NB{}2", node), Nmos, out, bar, "GND"));
    }
    // The unbuffered X/Y stay observable but are demoted to plain signals.
    for net in n.nets.iter_mut() {
        if net.name == "X" || net.name == "Y" {
            net.kind = NetKind::Signal;
        }
    }
    n.metadata.insert("up_net".to_string(), "Up".to_string());
    n.metadata.insert("down_net".to_string(), "Down".to_string());
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_devices_ten_each() {
        let n = build_reference_pfd();
        assert_eq!(n.devices.len(), 20);
        let pmos = n.devices.iter().filter(|d| d.polarity == Polarity::Pmos).count();
        assert_eq!(pmos, 10);
        assert_eq!(n.devices.len() - pmos, 10);
    }

    #[test]
    fn deterministic_serialization() {
        assert_eq!(build_reference_pfd().serialize(), build_reference_pfd().serialize());
    }

    #[test]
    fn roundtrips_through_parser() {
        let n = build_reference_pfd();
        let parsed = super::super::parse_netlist(n.serialize().as_bytes()).unwrap();
        assert_eq!(parsed, n);
        assert_eq!(parsed.devices.len(), 20);
    }

    #[test]
    fn buffered_variant_has_24_devices() {
        let n = build_reference_pfd_with_buffers();
        assert_eq!(n.devices.len(), 28);
        assert_eq!(n.outputs(), vec!["Up", "Down"]);
    }
}
