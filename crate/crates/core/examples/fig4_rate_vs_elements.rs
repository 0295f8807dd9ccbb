//! Achievable rate of all four schemes versus the number of elements.
//!
//! `cargo run --release --example fig4_rate_vs_elements -- [trials]`

use irs_mobility::cli::{Experiment, FIG4_ELEMENTS};
use irs_mobility::{run_experiment, ExperimentSpec, ProtocolScheme, Sweep, SystemConfig};

fn main() -> irs_mobility::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let cfg = Experiment::Fig4.configure(&SystemConfig::default());
    let spec = ExperimentSpec::new(
        cfg,
        Sweep::Elements(FIG4_ELEMENTS.to_vec()),
        ProtocolScheme::ALL.to_vec(),
        trials,
    );
    let result = run_experiment(&spec)?;

    print!("{:>5}", "M_R");
    for s in ProtocolScheme::ALL {
        print!(" {:>20}", s.name());
    }
    println!();
    for point in &result.points {
        print!("{:>5}", point.config.irs_mx);
        for s in &point.schemes {
            print!(" {:>12.3} +/- {:.3}", s.mean_rate(), s.std_error());
        }
        println!();
    }
    Ok(())
}
