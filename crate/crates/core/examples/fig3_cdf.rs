//! Stage-II SNR distribution of Proposed vs RR and the outage gain.
//!
//! `cargo run --release --example fig3_cdf -- [trials]`

use irs_mobility::cli::Experiment;
use irs_mobility::montecarlo::percentile_gain_db;
use irs_mobility::{run_experiment, ExperimentSpec, ProtocolScheme, Sweep, SystemConfig};

fn main() -> irs_mobility::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let cfg = Experiment::Fig3.configure(&SystemConfig::default());
    let spec = ExperimentSpec::new(
        cfg,
        Sweep::None,
        vec![ProtocolScheme::Proposed, ProtocolScheme::RandomRefraction],
        trials,
    );
    let result = run_experiment(&spec)?;
    let point = &result.points[0];
    let proposed = point.schemes[0].snr_cdf()?;
    let rr = point.schemes[1].snr_cdf()?;

    println!("{:>6} {:>12} {:>12} {:>10}", "p", "Proposed dB", "RR dB", "gain dB");
    for p in [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9] {
        println!(
            "{p:>6.2} {:>12.2} {:>12.2} {:>10.2}",
            10.0 * proposed.quantile(p)?.log10(),
            10.0 * rr.quantile(p)?.log10(),
            percentile_gain_db(&proposed, &rr, p)?
        );
    }
    Ok(())
}
