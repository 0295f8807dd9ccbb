//! Joint Doppler, phase and gain estimation from noisy Stage-I blocks.

use irs_mobility::channel::{cscg, wrap_phase};
use irs_mobility::{ml_estimate, RefractionVector, SystemConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> irs_mobility::Result<()> {
    let cfg = SystemConfig::default();
    let tc = cfg.block_duration_s();
    let grid = cfg.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let frame = cfg.channel_model()?.sample_frame(&mut rng)?;
    let p = frame.cascaded;

    println!("truth: f_d {:.3} Hz, psi {:.5}, |beta| {:.3e}", p.doppler_fd, p.psi_x.0, p.beta.norm());
    println!("{:>10} {:>12} {:>12} {:>12}", "noise", "f_d err Hz", "psi err", "beta rel err");
    for noise in [0.0, 1e-16, 1e-14, 1e-12] {
        let v_bar: Vec<_> = (0..cfg.stage1_blocks_n1)
            .map(|_| RefractionVector::random(cfg.irs_mx, &mut rng))
            .collect();
        // the LS estimate of hbar_r has error variance sigma^2 / tau
        let h: Vec<_> = v_bar
            .iter()
            .enumerate()
            .map(|(k, v)| Ok(frame.refracted(k + 1, v)? + cscg(noise / cfg.pilots_tau as f64, &mut rng)))
            .collect::<irs_mobility::Result<_>>()?;
        let est = ml_estimate(&h, &v_bar, tc, &grid)?;
        println!(
            "{noise:>10.0e} {:>12.4} {:>12.2e} {:>12.2e}",
            est.fd_hat - p.doppler_fd,
            wrap_phase(est.psi_x_hat.0 - p.psi_x.0),
            (est.beta_hat - p.beta).norm() / p.beta.norm()
        );
    }
    Ok(())
}
