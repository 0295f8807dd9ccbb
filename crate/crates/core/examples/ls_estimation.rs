//! One Stage-I block: DFT pilots, LS estimate and best-of-tau selection.

use irs_mobility::channel::cscg;
use irs_mobility::estimation::{dft_training_matrix, ls_estimate};
use irs_mobility::protocol::stage1_block;
use irs_mobility::{RefractionVector, SystemConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> irs_mobility::Result<()> {
    let cfg = SystemConfig::default();
    let theta = dft_training_matrix(cfg.pilots_tau)?;
    println!("training matrix (tau = {}):", theta.rows());
    for i in 0..theta.rows() {
        println!("  [{:.3}, {:.3}]", theta.entry(i, 0), theta.entry(i, 1));
    }

    // plain LS on made-up values
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (h_d, h_r) = (cscg(1.0, &mut rng), cscg(1.0, &mut rng));
    let y: Vec<_> = (0..theta.rows())
        .map(|i| theta.entry(i, 0) * h_d + theta.entry(i, 1) * h_r + cscg(1e-3, &mut rng))
        .collect();
    let est = ls_estimate(&y, &theta)?;
    println!("\nh_d  true {h_d:.4}  est {:.4}", est.h_d_hat);
    println!("h_r  true {h_r:.4}  est {:.4}", est.h_r_bar_hat);

    // the same on a simulated frame
    let frame = cfg.channel_model()?.sample_frame(&mut rng)?;
    let v_bar = RefractionVector::random(cfg.irs_mx, &mut rng);
    let out = stage1_block(&frame, 1, &v_bar, &theta, cfg.noise_variance(), &mut rng)?;
    println!("\nblock 1 SNR with selected refraction: {:.2} dB", 10.0 * out.metrics.snr_gamma.log10());
    Ok(())
}
