use pfdlab_core::measure::{SwitchPfd, BehavioralPfd, PfdHandle, measure_dead_zone, CALIBRATED_DEVICE_DELAY_FS};

fn main() {
    println!("== dead zone, default 10ps delays ==");
    let h = SwitchPfd::reference(10_000);
    println!("  dz = {} fs (expect ~20000)", measure_dead_zone(&h, 1e9, 100));

    println!("== dead zone, calibrated 20ps delays ==");
    let h = SwitchPfd::reference(CALIBRATED_DEVICE_DELAY_FS);
    println!("  dz = {} fs (expect ~40000)", measure_dead_zone(&h, 1e9, 100));

    println!("== widths at phi=0.1pi / 0.2pi (calibrated) ==");
    for phi in [0.1, 0.2] {
        let out = h.measure(1e9, phi * std::f64::consts::PI, 8);
        println!("  phi={}pi: up={:?} down={:?} settled={}", phi, out.up_visible_fs, out.down_visible_fs, out.settled);
    }

    println!("== duty linearity (switch vs behavioral) ==");
    let b = BehavioralPfd::ideal();
    for phi in [-0.9, -0.5, -0.2, -0.05, 0.05, 0.2, 0.5, 0.9, 1.0] {
        let sw = h.measure(1e9, phi * std::f64::consts::PI, 16);
        let bh = b.measure(1e9, phi * std::f64::consts::PI, 16);
        println!("  phi={:+.2}pi: switch={:+.5} behavioral={:+.5} settled={}", phi,
            sw.duty_difference() / 0.5, bh.duty_difference() / 0.5, sw.settled);
    }

    println!("== blind zone probes (switch, calibrated) ==");
    println!("  blind = {} fs", pfdlab_core::measure::measure_blind_zone(&h, 1e9));
}
