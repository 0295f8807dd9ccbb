use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use irs_mobility::estimation::{ccce_estimate, ccce_pilot_refraction, ccce_refraction, TrainingMatrix};
use irs_mobility::montecarlo::{trial_rng, CHANNEL_STREAM, PROTOCOL_STREAM};
use irs_mobility::protocol::{stage2_refraction, Stage};
use irs_mobility::{CsiSource, MlEstimate, ProtocolScheme, Simulator, SystemConfig};

fn std_db(x: &[f64]) -> f64 {
    let db: Vec<f64> = x.iter().map(|v| 20.0 * v.log10()).collect();
    let mean = db.iter().sum::<f64>() / db.len() as f64;
    (db.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / db.len() as f64).sqrt()
}

#[test]
fn stage2_gain_exceeds_stage1_on_average() {
    let cfg = SystemConfig::default();
    let sim = Simulator::new(&cfg).unwrap();
    let (mut w1, mut w2) = (Vec::new(), Vec::new());
    for trial in 0..200 {
        let frame = sim.sample_frame(&mut trial_rng(1, 0, trial, CHANNEL_STREAM)).unwrap();
        let m = sim
            .run(&frame, ProtocolScheme::Proposed, CsiSource::Estimated, &mut trial_rng(1, 0, trial, PROTOCOL_STREAM))
            .unwrap();
        for b in &m.blocks {
            match b.stage {
                Stage::I => w1.push(b.gain_w),
                Stage::II => w2.push(b.gain_w),
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&w2) > 10.0 * mean(&w1), "{} vs {}", mean(&w2), mean(&w1));
}

#[test]
fn perfect_csi_converts_fast_fading_to_slow() {
    let cfg = SystemConfig::default();
    let sim = Simulator::new(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let frame = sim.sample_frame(&mut rng).unwrap();
        let p = frame.cascaded;
        let ml = MlEstimate {
            fd_hat: p.doppler_fd,
            psi_x_hat: p.psi_x,
            beta_hat: p.beta,
            objective: 0.0,
            degenerate_training: false,
        };
        let (mut combined, mut direct) = (Vec::new(), Vec::new());
        for n in cfg.stage1_blocks_n1 + 1..=cfg.blocks_n {
            let h_d = frame.direct_at(n);
            let v = stage2_refraction(&ml, h_d.arg(), n, sim.block_duration(), cfg.irs_mx).unwrap();
            combined.push(frame.effective(n, &v).unwrap().norm());
            direct.push(h_d.norm());
        }
        assert!(std_db(&combined) < std_db(&direct));
    }
}

#[test]
fn ccce_refractions_are_unit_modulus() {
    let cfg = SystemConfig {
        irs_mx: 20,
        ..SystemConfig::default()
    };
    let sim = Simulator::new(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let frame = sim.sample_frame(&mut rng).unwrap();
    let theta = TrainingMatrix::dft_square(cfg.irs_mx + 1).unwrap();
    for n in 1..=cfg.blocks_n {
        let c = frame.cascaded_at(n, cfg.irs_mx).unwrap();
        let y: Vec<_> = (0..=cfg.irs_mx)
            .map(|i| {
                let v = ccce_pilot_refraction(&theta, i);
                assert!(v.coefficients().iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
                irs_mobility::channel::effective_channel(&c, &v, frame.direct_at(n)).unwrap()
                    + irs_mobility::channel::cscg(sim.noise_variance(), &mut rng)
            })
            .collect();
        let v = ccce_refraction(&ccce_estimate(&y, &theta).unwrap());
        assert!(v.coefficients().iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
    }
}

#[test]
fn rate_grows_with_block_gain() {
    let cfg = SystemConfig::default();
    let sim = Simulator::new(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let frame = sim.sample_frame(&mut rng).unwrap();
    let stronger = {
        let mut f = frame.clone();
        f.cascaded.beta *= 3.0;
        f
    };
    let run = |f| {
        sim.run(f, ProtocolScheme::Proposed, CsiSource::Genie, &mut ChaCha8Rng::seed_from_u64(4))
            .unwrap()
    };
    let (weak, strong) = (run(&frame), run(&stronger));
    for (a, b) in weak.blocks.iter().zip(&strong.blocks).skip(cfg.stage1_blocks_n1) {
        assert!(b.gain_w >= a.gain_w);
    }
    assert!(strong.rate_overall > weak.rate_overall);
}
