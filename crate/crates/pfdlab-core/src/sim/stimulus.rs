//! Input stimulus description: free-running clocks and explicit edge lists.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Bit;

/// A periodic clock on one input net.
///
/// The net is high during `[n*period + phase, n*period + phase + duty*period)`
/// for every cycle n >= 0 that fits the horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClockSpec {
    pub net: String,
    pub period_fs: u64,
    pub phase_fs: u64,
    pub duty: f64,
}

/// Explicit input transitions plus optional clocks.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Stimulus {
    pub clocks: Vec<ClockSpec>,
    /// (net, time fs, level). Times must be strictly increasing per net.
    pub explicit_edges: Vec<(String, u64, Bit)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StimulusError {
    #[error("duty cycle {0} outside (0, 1)")]
    BadDuty(String),
    #[error("explicit edges for net `{0}` are not strictly increasing")]
    NonMonotonicEdges(String),
    #[error("stimulus targets net `{0}` which is not a declared input")]
    NotAnInput(String),
}

impl Stimulus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a clock; `duty` must lie strictly inside (0, 1).
    pub fn clock(mut self, net: &str, period_fs: u64, phase_fs: u64, duty: f64) -> Self {
        self.clocks.push(ClockSpec {
            net: net.to_string(),
            period_fs,
            phase_fs,
            duty,
        });
        self
    }

    /// Adds one explicit edge.
    pub fn edge(mut self, net: &str, time_fs: u64, level: Bit) -> Self {
        self.explicit_edges.push((net.to_string(), time_fs, level));
        self
    }

    /// Adds a return-to-zero pulse: rise at `start`, fall at `start + width`.
    pub fn pulse(self, net: &str, start_fs: u64, width_fs: u64) -> Self {
        self.edge(net, start_fs, Bit::One)
            .edge(net, start_fs + width_fs, Bit::Zero)
    }

    /// Checks internal consistency and that all targets are in `inputs`.
    pub fn check(&self, inputs: &[&str]) -> Result<(), StimulusError> {
        for c in &self.clocks {
            if !(c.duty > 0.0 && c.duty < 1.0) {
                return Err(StimulusError::BadDuty(c.net.clone()));
            }
            if !inputs.contains(&c.net.as_str()) {
                return Err(StimulusError::NotAnInput(c.net.clone()));
            }
        }
        let mut last: std::collections::BTreeMap<&str, u64> = Default::default();
        for (net, t, _) in &self.explicit_edges {
            if !inputs.contains(&net.as_str()) {
                return Err(StimulusError::NotAnInput(net.clone()));
            }
            if let Some(&prev) = last.get(net.as_str()) {
                if *t <= prev {
                    return Err(StimulusError::NonMonotonicEdges(net.clone()));
                }
            }
            last.insert(net, *t);
        }
        Ok(())
    }

    /// Initial level of `net` at t = 0.
    pub fn initial_level(&self, net: &str) -> Bit {
        for c in &self.clocks {
            if c.net == net {
                // High iff t=0 falls inside the first high window.
                return if c.phase_fs == 0 { Bit::One } else { Bit::Zero };
            }
        }
        for (n, t, level) in &self.explicit_edges {
            if n == net && *t == 0 {
                return *level;
            }
        }
        Bit::Zero
    }

    /// All transitions in (0, t_end], sorted by time. Explicit edges at t=0
    /// are treated as initial levels, not transitions.
    pub fn events_until(&self, t_end: u64) -> Vec<(String, u64, Bit)> {
        let mut out: Vec<(String, u64, Bit)> = Vec::new();
        for c in &self.clocks {
            let high = (c.duty * c.period_fs as f64).round() as u64;
            let high = high.clamp(1, c.period_fs - 1);
            let mut n = 0u64;
            loop {
                let rise = n * c.period_fs + c.phase_fs;
                let fall = rise + high;
                if rise > t_end {
                    break;
                }
                if rise > 0 {
                    out.push((c.net.clone(), rise, Bit::One));
                }
                if fall <= t_end {
                    out.push((c.net.clone(), fall, Bit::Zero));
                }
                n += 1;
            }
        }
        for (net, t, level) in &self.explicit_edges {
            if *t > 0 && *t <= t_end {
                out.push((net.clone(), *t, *level));
            }
        }
        out.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_generates_expected_edges() {
        let s = Stimulus::new().clock("Ref", 1_000_000, 0, 0.5);
        let ev = s.events_until(2_000_000);
        // t=0 rise folds into the initial level; falls at 0.5M/1.5M, rises at 1M/2M.
        assert_eq!(s.initial_level("Ref"), Bit::One);
        assert_eq!(ev.len(), 4);
        assert_eq!(ev[0], ("Ref".to_string(), 500_000, Bit::Zero));
        assert_eq!(ev[1], ("Ref".to_string(), 1_000_000, Bit::One));
    }

    #[test]
    fn duty_bounds_enforced() {
        let s = Stimulus::new().clock("Ref", 1_000, 0, 1.0);
        assert_eq!(
            s.check(&["Ref"]).unwrap_err(),
            StimulusError::BadDuty("Ref".to_string())
        );
    }

    #[test]
    fn non_input_target_rejected() {
        let s = Stimulus::new().edge("W1", 10, Bit::One);
        assert_eq!(
            s.check(&["Ref", "Div"]).unwrap_err(),
            StimulusError::NotAnInput("W1".to_string())
        );
    }
}
