//! Waveform storage and export.
//!
//! A `WaveformSet` stores, per net, the time-ordered value transitions with
//! femtosecond timestamps. Every net has an entry at t = 0. Exports are
//! bit-exact: CSV rows are `time_fs,net,value` sorted by time then net name,
//! VCD uses a 1 fs timescale.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{Bit, LogicValue};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WaveformError {
    #[error("CSV line {0}: {1}")]
    Csv(usize, String),
    #[error("unknown net `{0}`")]
    UnknownNet(String),
}

/// Export target format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Vcd,
}

/// Per-net ordered transitions over a fixed horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveformSet {
    net_names: Vec<String>,
    /// Indexed like `net_names`; times strictly increasing per net.
    transitions: Vec<Vec<(u64, LogicValue)>>,
    horizon_fs: u64,
}

impl WaveformSet {
    pub fn new(net_names: Vec<String>, horizon_fs: u64) -> Self {
        let n = net_names.len();
        WaveformSet {
            net_names,
            transitions: vec![Vec::new(); n],
            horizon_fs,
        }
    }

    pub fn horizon_fs(&self) -> u64 {
        self.horizon_fs
    }

    pub fn net_names(&self) -> &[String] {
        &self.net_names
    }

    pub(crate) fn record(&mut self, net: usize, time_fs: u64, value: LogicValue) {
        debug_assert!(self
            .transitions[net]
            .last()
            .map(|&(t, _)| t < time_fs || (t == time_fs && time_fs == 0))
            .unwrap_or(true));
        if let Some(last) = self.transitions[net].last_mut() {
            if last.0 == time_fs {
                last.1 = value;
                return;
            }
        }
        self.transitions[net].push((time_fs, value));
    }

    pub fn net_index(&self, net: &str) -> Option<usize> {
        self.net_names.iter().position(|n| n == net)
    }

    /// Transitions of one net, `(time_fs, value)`, ascending.
    pub fn transitions(&self, net: &str) -> Option<&[(u64, LogicValue)]> {
        self.net_index(net).map(|i| self.transitions[i].as_slice())
    }

    /// Level of `net` at time `t` (last transition at or before `t`).
    pub fn value_at(&self, net: &str, t: u64) -> Option<LogicValue> {
        let idx = self.net_index(net)?;
        let tr = &self.transitions[idx];
        match tr.binary_search_by_key(&t, |&(time, _)| time) {
            Ok(i) => Some(tr[i].1),
            Err(0) => None,
            Err(i) => Some(tr[i - 1].1),
        }
    }

    /// Completed high pulses `(rise_fs, fall_fs)` of a net, with both edges
    /// strictly after `from_fs`.
    pub fn high_pulses(&self, net: &str, from_fs: u64) -> Vec<(u64, u64)> {
        let Some(idx) = self.net_index(net) else {
            return Vec::new();
        };
        let mut pulses = Vec::new();
        let mut rise: Option<u64> = None;
        for &(t, lv) in &self.transitions[idx] {
            match lv.value {
                Bit::One => {
                    if rise.is_none() {
                        rise = Some(t);
                    }
                }
                _ => {
                    if let Some(r) = rise.take() {
                        if lv.value == Bit::Zero && r > from_fs {
                            pulses.push((r, t));
                        }
                    }
                }
            }
        }
        pulses
    }

    /// Number of definite 0<->1 toggles per net after `from_fs`.
    pub fn toggle_count(&self, net: &str, from_fs: u64) -> usize {
        let Some(idx) = self.net_index(net) else {
            return 0;
        };
        let mut count = 0;
        let mut prev: Option<Bit> = None;
        for &(t, lv) in &self.transitions[idx] {
            if let (Some(a), b) = (prev, lv.value) {
                let toggled = matches!(
                    (a, b),
                    (Bit::Zero, Bit::One) | (Bit::One, Bit::Zero)
                );
                if toggled && t > from_fs {
                    count += 1;
                }
            }
            prev = Some(lv.value);
        }
        count
    }

    /// Total time `net` spends at logic one inside `[from_fs, to_fs)`.
    pub fn high_time(&self, net: &str, from_fs: u64, to_fs: u64) -> u64 {
        let Some(idx) = self.net_index(net) else {
            return 0;
        };
        let mut total = 0;
        let mut prev_t = from_fs;
        let mut prev_v = self.value_at(net, from_fs).map(|lv| lv.value);
        for &(t, lv) in &self.transitions[idx] {
            if t <= from_fs {
                continue;
            }
            let seg_end = t.min(to_fs);
            if seg_end > prev_t && prev_v == Some(Bit::One) {
                total += seg_end - prev_t;
            }
            if t >= to_fs {
                return total;
            }
            prev_t = t;
            prev_v = Some(lv.value);
        }
        if prev_v == Some(Bit::One) && to_fs > prev_t {
            total += to_fs - prev_t;
        }
        total
    }
}

/// Serializes a waveform to CSV or VCD bytes.
pub fn export_waveform(w: &WaveformSet, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Csv => export_csv(w),
        ExportFormat::Vcd => export_vcd(w),
    }
}

fn export_csv(w: &WaveformSet) -> Vec<u8> {
    let mut rows: Vec<(u64, &str, char)> = Vec::new();
    for (ni, name) in w.net_names.iter().enumerate() {
        for &(t, lv) in &w.transitions[ni] {
            rows.push((t, name.as_str(), lv.value.as_char()));
        }
    }
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out = String::from("time_fs,net,value\n");
    for (t, net, v) in rows {
        out.push_str(&format!("{},{},{}\n", t, net, v));
    }
    out.into_bytes()
}

fn vcd_id(i: usize) -> String {
    // Printable identifier characters per the VCD character set.
    let chars: Vec<char> = ('!'..='~').collect();
    let mut i = i;
    let mut id = String::new();
    loop {
        id.push(chars[i % chars.len()]);
        i /= chars.len();
        if i == 0 {
            break;
        }
    }
    id
}

fn export_vcd(w: &WaveformSet) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("$version pfdlab $end\n");
    out.push_str("$timescale 1fs $end\n");
    out.push_str("$scope module pfd $end\n");
    for (i, name) in w.net_names.iter().enumerate() {
        out.push_str(&format!("$var wire 1 {} {} $end\n", vcd_id(i), name));
    }
    out.push_str("$upscope $end\n$enddefinitions $end\n");

    let mut rows: Vec<(u64, usize, char)> = Vec::new();
    for (ni, _) in w.net_names.iter().enumerate() {
        for &(t, lv) in &w.transitions[ni] {
            let c = match lv.value {
                Bit::Zero => '0',
                Bit::One => '1',
                Bit::Unknown => 'x',
            };
            rows.push((t, ni, c));
        }
    }
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut current: Option<u64> = None;
    for (t, ni, c) in rows {
        if current != Some(t) {
            out.push_str(&format!("#{}\n", t));
            if current.is_none() {
                out.push_str("$dumpvars\n");
            }
            current = Some(t);
        }
        out.push_str(&format!("{}{}\n", c, vcd_id(ni)));
    }
    out.push_str(&format!("#{}\n", w.horizon_fs));
    out.into_bytes()
}

/// Parses CSV produced by [`export_waveform`] back into a `WaveformSet`.
pub fn parse_waveform_csv(bytes: &[u8], horizon_fs: u64) -> Result<WaveformSet, WaveformError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| WaveformError::Csv(1, "not valid UTF-8".to_string()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "time_fs,net,value")) => {}
        _ => return Err(WaveformError::Csv(1, "missing header".to_string())),
    }
    let mut nets: Vec<String> = Vec::new();
    let mut per_net: BTreeMap<String, Vec<(u64, LogicValue)>> = BTreeMap::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let (t, net, v) = (
            parts.next().unwrap_or(""),
            parts.next().unwrap_or(""),
            parts.next().unwrap_or(""),
        );
        let t: u64 = t
            .parse()
            .map_err(|_| WaveformError::Csv(i + 1, format!("bad time `{}`", t)))?;
        let value = v
            .chars()
            .next()
            .and_then(Bit::from_char)
            .ok_or_else(|| WaveformError::Csv(i + 1, format!("bad value `{}`", v)))?;
        if !per_net.contains_key(net) {
            nets.push(net.to_string());
        }
        // Origin is not represented in CSV; stored is the neutral choice.
        per_net
            .entry(net.to_string())
            .or_default()
            .push((t, LogicValue::stored(value)));
    }
    nets.sort();
    let transitions = nets
        .iter()
        .map(|n| per_net.remove(n).unwrap_or_default())
        .collect();
    Ok(WaveformSet {
        net_names: nets,
        transitions,
        horizon_fs,
    })
}

/// Canonical comparison view that ignores origin (CSV round-trips drop it).
pub fn values_only(w: &WaveformSet) -> Vec<(String, Vec<(u64, Bit)>)> {
    let mut out: Vec<(String, Vec<(u64, Bit)>)> = w
        .net_names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            (
                n.clone(),
                w.transitions[i].iter().map(|&(t, lv)| (t, lv.value)).collect(),
            )
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> WaveformSet {
        let mut w = WaveformSet::new(vec!["X".into(), "Y".into()], 1000);
        w.record(0, 0, LogicValue::stored(Bit::Unknown));
        w.record(1, 0, LogicValue::stored(Bit::Unknown));
        w.record(0, 100, LogicValue::driven(Bit::One));
        w.record(1, 150, LogicValue::driven(Bit::Zero));
        w.record(0, 400, LogicValue::driven(Bit::Zero));
        w
    }

    #[test]
    fn empty_horizon_gives_header_only_csv() {
        let w = WaveformSet::new(vec![], 0);
        assert_eq!(export_waveform(&w, ExportFormat::Csv), b"time_fs,net,value\n");
    }

    #[test]
    fn csv_rows_sorted_time_then_net() {
        let csv = String::from_utf8(export_waveform(&sample(), ExportFormat::Csv)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "time_fs,net,value");
        assert_eq!(lines[1], "0,X,X");
        assert_eq!(lines[2], "0,Y,X");
        assert_eq!(lines[3], "100,X,1");
        assert_eq!(lines[4], "150,Y,0");
    }

    #[test]
    fn csv_roundtrip_preserves_values() {
        let w = sample();
        let csv = export_waveform(&w, ExportFormat::Csv);
        let back = parse_waveform_csv(&csv, w.horizon_fs()).unwrap();
        assert_eq!(values_only(&w), values_only(&back));
    }

    #[test]
    fn vcd_has_timescale_and_vars() {
        let vcd = String::from_utf8(export_waveform(&sample(), ExportFormat::Vcd)).unwrap();
        assert!(vcd.contains("$timescale 1fs $end"));
        assert!(vcd.contains("$var wire 1 ! X $end"));
        assert!(vcd.contains("#100"));
    }

    #[test]
    fn pulse_and_duty_helpers() {
        let w = sample();
        assert_eq!(w.high_pulses("X", 0), vec![(100, 400)]);
        assert_eq!(w.high_time("X", 0, 1000), 300);
        assert_eq!(w.toggle_count("X", 0), 1);
        assert_eq!(w.value_at("X", 250).unwrap().value, Bit::One);
    }
}
