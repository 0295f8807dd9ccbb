//! Rate versus the number of Stage-I blocks for three operating points.
//!
//! `cargo run --release --example fig5_tradeoff -- [trials]`

use irs_mobility::cli::{fig5_curve, FIG5_SETTINGS};
use irs_mobility::SystemConfig;

fn main() -> irs_mobility::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let cfg = SystemConfig::default();
    for (mx, pt) in FIG5_SETTINGS {
        let curve = fig5_curve(&cfg, mx, pt, trials)?;
        let (best, rate) = curve
            .iter()
            .map(|(n1, s)| (*n1, s.mean_rate()))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        println!("M_R = {mx}, Pt = {pt} dBm: best N1 = {best} ({rate:.3} bps/Hz)");
        for (n1, s) in &curve {
            let bar = "#".repeat((s.mean_rate() * 3.0) as usize);
            println!("  N1 {n1:>2} {:>7.3} {bar}", s.mean_rate());
        }
    }
    Ok(())
}
