//! Runs every scheme on the same frame and prints per-block SNR and rates.

use irs_mobility::{CsiSource, ProtocolScheme, Simulator, SystemConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> irs_mobility::Result<()> {
    let cfg = SystemConfig::default();
    let mut sim = Simulator::new(&cfg)?;
    sim.prepare(&ProtocolScheme::ALL)?;
    let frame = sim.sample_frame(&mut ChaCha8Rng::seed_from_u64(2))?;

    let runs = ProtocolScheme::ALL
        .iter()
        .map(|&s| sim.run(&frame, s, CsiSource::Estimated, &mut ChaCha8Rng::seed_from_u64(9)))
        .collect::<irs_mobility::Result<Vec<_>>>()?;

    print!("block");
    for r in &runs {
        print!(" {:>14}", r.scheme.name());
    }
    println!();
    for n in 0..cfg.blocks_n {
        print!("{:>5}", n + 1);
        for r in &runs {
            print!(" {:>14.2}", 10.0 * r.blocks[n].snr_gamma.log10());
        }
        println!();
    }
    println!();
    for r in &runs {
        println!(
            "{:<14} R_I {:.3}  R_II {:.3}  R {:.3} bps/Hz",
            r.scheme.name(),
            r.rate_stage1,
            r.rate_stage2,
            r.rate_overall
        );
    }
    if let Some(ml) = &runs[0].ml_result {
        println!("\nML: f_d {:.2} Hz (true {:.2}), psi {:.5} (true {:.5})", ml.fd_hat, frame.cascaded.doppler_fd, ml.psi_x_hat.0, frame.cascaded.psi_x.0);
    }
    Ok(())
}
