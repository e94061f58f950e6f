//! Channel-connected component decomposition.
//!
//! Two devices share a component iff they are connected through source/drain
//! nets; gate connections never merge components. Supply rails bound every
//! adjacent component without merging them.

use std::collections::BTreeMap;

use super::{NetKind, Netlist};

/// Partition of devices (and their internal nets) into channel-connected
/// components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    /// Per component: device indices into `netlist.devices`, sorted.
    pub device_groups: Vec<Vec<usize>>,
    /// Per component: indices of non-rail nets touched by the group's
    /// source/drain terminals, sorted.
    pub net_groups: Vec<Vec<usize>>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.device_groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.device_groups.is_empty()
    }
}

/// True when the net acts as a boundary for channel connectivity: rails are
/// always boundaries; inputs are externally driven and likewise do not merge
/// components.
pub(crate) fn is_boundary(kind: NetKind) -> bool {
    matches!(kind, NetKind::SupplyHigh | NetKind::SupplyLow | NetKind::Input)
}

/// Computes the channel-connected components of a netlist.
pub fn channel_connected_components(netlist: &Netlist) -> ComponentPartition {
    let net_index: BTreeMap<&str, usize> = netlist
        .nets
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();

    // Adjacency from non-boundary net to devices touching it via s/d.
    let mut net_devices: Vec<Vec<usize>> = vec![Vec::new(); netlist.nets.len()];
    for (di, d) in netlist.devices.iter().enumerate() {
        for term in [&d.drain, &d.source] {
            let ni = net_index[term.as_str()];
            if !is_boundary(netlist.nets[ni].kind) {
                net_devices[ni].push(di);
            }
        }
    }

    let mut device_comp = vec![usize::MAX; netlist.devices.len()];
    let mut device_groups = Vec::new();
    let mut net_groups = Vec::new();

    for start in 0..netlist.devices.len() {
        if device_comp[start] != usize::MAX {
            continue;
        }
        let comp = device_groups.len();
        let mut stack = vec![start];
        let mut devs = Vec::new();
        let mut nets = Vec::new();
        device_comp[start] = comp;
        while let Some(di) = stack.pop() {
            devs.push(di);
            let d = &netlist.devices[di];
            for term in [&d.drain, &d.source] {
                let ni = net_index[term.as_str()];
                if is_boundary(netlist.nets[ni].kind) {
                    continue;
                }
                if !nets.contains(&ni) {
                    nets.push(ni);
                }
                for &other in &net_devices[ni] {
                    if device_comp[other] == usize::MAX {
                        device_comp[other] = comp;
                        stack.push(other);
                    }
                }
            }
        }
        devs.sort_unstable();
        nets.sort_unstable();
        device_groups.push(devs);
        net_groups.push(nets);
    }

    ComponentPartition {
        device_groups,
        net_groups,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_netlist, reference::build_reference_pfd};
    use super::*;

    fn inverter_pair() -> Netlist {
        parse_netlist(
            b".supply vdd VDD
.supply gnd GND
.input a
.net m
.output z
MP1 m a VDD PMOS
MN1 m a GND NMOS
MP2 z m VDD PMOS
MN2 z m GND NMOS
.end
",
        )
        .unwrap()
    }

    #[test]
    fn inverter_is_one_component() {
        let n = parse_netlist(
            b".supply vdd VDD
.supply gnd GND
.input a
.output z
MP1 z a VDD PMOS
MN1 z a GND NMOS
.end
",
        )
        .unwrap();
        let p = channel_connected_components(&n);
        assert_eq!(p.len(), 1);
        assert_eq!(p.device_groups[0], vec![0, 1]);
    }

    #[test]
    fn cascaded_inverters_are_two_components() {
        let p = channel_connected_components(&inverter_pair());
        assert_eq!(p.len(), 2);
    }

    /// Independent union-find over source/drain edges, used as the oracle for
    /// the reference netlist's component count.
    fn union_find_components(n: &Netlist) -> usize {
        let mut parent: Vec<usize> = (0..n.devices.len()).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        for i in 0..n.devices.len() {
            for j in (i + 1)..n.devices.len() {
                let (a, b) = (&n.devices[i], &n.devices[j]);
                let shared = [&a.drain, &a.source].into_iter().any(|ta| {
                    [&b.drain, &b.source].into_iter().any(|tb| {
                        ta == tb
                            && !is_boundary(n.net(ta).unwrap().kind)
                    })
                });
                if shared {
                    let (ra, rb) = (find(&mut parent, i), find(&mut parent, j));
                    if ra != rb {
                        parent[ra] = rb;
                    }
                }
            }
        }
        let mut roots: Vec<usize> = (0..n.devices.len()).map(|i| find(&mut parent, i)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    #[test]
    fn reference_pfd_matches_union_find_oracle() {
        let n = build_reference_pfd();
        let p = channel_connected_components(&n);
        assert_eq!(p.len(), union_find_components(&n));
        // Frozen from the oracle: three stages per half.
        assert_eq!(p.len(), 6);
    }

    #[test]
    fn partition_covers_every_device_exactly_once() {
        let n = build_reference_pfd();
        let p = channel_connected_components(&n);
        let mut seen = vec![0usize; n.devices.len()];
        for g in &p.device_groups {
            for &d in g {
                seen[d] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }
}
