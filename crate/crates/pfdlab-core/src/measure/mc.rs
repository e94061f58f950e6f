//! Monte-Carlo process variation over timing parameters.
//!
//! Each sample multiplies every delay-like parameter by an independent
//! Gaussian factor with standard deviation `rel_sigma / 3`, so that the
//! requested relative variation is a 3-sigma bound. Sample `i` draws from a
//! stream seeded with `seed ^ i`, making reports byte-identical for equal
//! seeds regardless of worker count. Up widths are taken at `+phi`, down
//! widths at `-phi`, matching a symmetric two-sided phase stimulus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::handles::{BehavioralPfd, PfdHandle, SwitchPfd};
use crate::pfd::PfdConfig;
use crate::sim::SimModel;

/// Histogram bin over pulse widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistBin {
    pub lo_fs: u64,
    pub hi_fs: u64,
    pub count: u32,
}

/// Aggregated Monte-Carlo results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub samples: u32,
    pub rel_sigma: f64,
    pub seed: u64,
    pub mean_up_fs: f64,
    pub mean_down_fs: f64,
    pub std_up_fs: f64,
    pub std_down_fs: f64,
    pub hist_up: Vec<HistBin>,
    pub hist_down: Vec<HistBin>,
}

/// What the Monte-Carlo driver perturbs.
#[derive(Debug, Clone)]
pub enum McTarget {
    /// Behavioral model; factors apply to the output rise/fall and reset
    /// delays.
    Behavioral(PfdConfig),
    /// Switch-level model; factors apply to every device delay.
    Switch(SimModel),
}

/// Deterministic standard normal draw (Box-Muller on the ChaCha stream).
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn factor(rng: &mut ChaCha8Rng, rel_sigma: f64) -> f64 {
    let f = 1.0 + gaussian(rng) * rel_sigma / 3.0;
    f.max(0.05)
}

fn scale_u64(v: u64, f: f64) -> u64 {
    ((v as f64) * f).round().max(0.0) as u64
}

fn mean_width(widths: &[u64]) -> Option<f64> {
    if widths.is_empty() {
        None
    } else {
        Some(widths.iter().sum::<u64>() as f64 / widths.len() as f64)
    }
}

/// Runs the Monte-Carlo experiment.
///
/// `phi_rad` should be positive; each sample is measured at `+phi` for the
/// Up width and `-phi` for the Down width.
pub fn monte_carlo(
    target: &McTarget,
    rel_sigma: f64,
    samples: u32,
    seed: u64,
    phi_rad: f64,
    freq_hz: f64,
) -> McReport {
    assert!(samples >= 1);
    assert!(rel_sigma >= 0.0);
    let cycles = 4;

    let per_sample: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
            match target {
                McTarget::Behavioral(cfg) => {
                    let mut c = cfg.clone();
                    c.t_out_rise_fs = scale_u64(c.t_out_rise_fs, factor(&mut rng, rel_sigma));
                    c.t_out_fall_fs = scale_u64(c.t_out_fall_fs, factor(&mut rng, rel_sigma));
                    c.t_reset_fs = scale_u64(c.t_reset_fs, factor(&mut rng, rel_sigma));
                    let h = BehavioralPfd::new(c);
                    let up = mean_width(&h.measure(freq_hz, phi_rad, cycles).up_all_fs);
                    let down = mean_width(&h.measure(freq_hz, -phi_rad, cycles).down_all_fs);
                    (up.unwrap_or(0.0), down.unwrap_or(0.0))
                }
                McTarget::Switch(model) => {
                    let mut m = model.clone();
                    for d in m.delays_fs.iter_mut() {
                        *d = scale_u64(*d, factor(&mut rng, rel_sigma));
                    }
                    let h = SwitchPfd::from_model(m);
                    let up = mean_width(&h.measure(freq_hz, phi_rad, cycles).up_all_fs);
                    let down = mean_width(&h.measure(freq_hz, -phi_rad, cycles).down_all_fs);
                    (up.unwrap_or(0.0), down.unwrap_or(0.0))
                }
            }
        })
        .collect();

    let ups: Vec<f64> = per_sample.iter().map(|p| p.0).collect();
    let downs: Vec<f64> = per_sample.iter().map(|p| p.1).collect();
    let (mean_up, std_up) = mean_std(&ups);
    let (mean_down, std_down) = mean_std(&downs);

    McReport {
        samples,
        rel_sigma,
        seed,
        mean_up_fs: mean_up,
        mean_down_fs: mean_down,
        std_up_fs: std_up,
        std_down_fs: std_down,
        hist_up: histogram(&ups, 100),
        hist_down: histogram(&downs, 100),
    }
}

/// Fixed-order mean and population standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fixed-width binning aligned to multiples of `bin_fs`.
fn histogram(xs: &[f64], bin_fs: u64) -> Vec<HistBin> {
    if xs.is_empty() {
        return Vec::new();
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo_bin = (lo as u64) / bin_fs;
    let hi_bin = (hi as u64) / bin_fs;
    let mut bins: Vec<HistBin> = (lo_bin..=hi_bin)
        .map(|b| HistBin {
            lo_fs: b * bin_fs,
            hi_fs: (b + 1) * bin_fs,
            count: 0,
        })
        .collect();
    let last = bins.len() - 1;
    for &x in xs {
        let b = ((x as u64) / bin_fs - lo_bin) as usize;
        bins[b.min(last)].count += 1;
    }
    bins
}

/// CSV rendering of a histogram: `bin_lo_fs,bin_hi_fs,count`.
pub fn histogram_csv(bins: &[HistBin]) -> String {
    let mut out = String::from("bin_lo_fs,bin_hi_fs,count\n");
    for b in bins {
        out.push_str(&format!("{},{},{}\n", b.lo_fs, b.hi_fs, b.count));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_sigma_has_zero_spread() {
        let target = McTarget::Behavioral(PfdConfig::ideal());
        let r = monte_carlo(&target, 0.0, 16, 3, 0.2 * std::f64::consts::PI, 1e9);
        assert_eq!(r.std_up_fs, 0.0);
        assert_eq!(r.std_down_fs, 0.0);
        assert_eq!(r.mean_up_fs, 100_000.0);
    }

    #[test]
    fn equal_seeds_reproduce_exactly() {
        let target = McTarget::Behavioral(PfdConfig::ideal());
        let a = monte_carlo(&target, 0.10, 64, 7, 0.2 * std::f64::consts::PI, 1e9);
        let b = monte_carlo(&target, 0.10, 64, 7, 0.2 * std::f64::consts::PI, 1e9);
        assert_eq!(a, b);
    }

    #[test]
    fn histogram_counts_everything() {
        let xs: Vec<f64> = (0..100).map(|i| 1_000.0 + i as f64 * 7.0).collect();
        let bins = histogram(&xs, 100);
        let total: u32 = bins.iter().map(|b| b.count).sum();
        assert_eq!(total, 100);
    }
}
