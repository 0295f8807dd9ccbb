//! Draws one frame for the default setup and prints its ground truth.

use irs_mobility::channel::bessel_j0;
use irs_mobility::SystemConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> irs_mobility::Result<()> {
    let cfg = SystemConfig::default();
    let model = cfg.channel_model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let frame = model.sample_frame(&mut rng)?;
    let p = frame.cascaded;

    println!("wavelength       {:.4} m", cfg.wavelength());
    println!("f_max            {:.1} Hz", cfg.max_doppler_hz());
    println!("block duration   {:.3e} s", cfg.block_duration_s());
    println!("doppler f_d      {:.2} Hz", p.doppler_fd);
    println!("effective phase  {:.4}", p.psi_x.0);
    println!("|beta|           {:.3e}", p.beta.norm());
    println!("direct mean pwr  {:.3e}", cfg.direct_mean_power());

    println!("\nlag  J0(2 pi f_max k Tc)");
    let x = cfg.max_doppler_hz() * cfg.block_duration_s();
    for k in 0..=5 {
        println!("{k:>3}  {:+.4}", bessel_j0(2.0 * std::f64::consts::PI * x * k as f64));
    }

    println!("\nblock  |h_d|^2 (dB)");
    for n in 1..=frame.blocks() {
        println!("{n:>5}  {:.2}", 10.0 * frame.direct_at(n).norm_sqr().log10());
    }
    Ok(())
}
