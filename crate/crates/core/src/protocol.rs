//! One transmission frame under the two-stage protocol and the benchmark
//! schemes.
//!
//! Stage I (blocks `1..=N1`): random initial training refraction, two-column
//! DFT pilots, LS estimate, best-of-`tau` data refraction. At the end of
//! Stage I the Doppler, effective phase and cascaded gain are estimated
//! jointly. Stage II (blocks `N1+1..=N`): IRS-off pilots give the direct
//! channel phase and the IRS is steered to compensate the Doppler rotation
//! and align with the direct path.
//!
//! Block gains are always evaluated on the true channel with the refraction
//! the scheme actually chose.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{
    cscg, effective_channel, steering_vector, ChannelModel, FrameChannel, RefractionVector,
};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::estimation::{
    average_estimate, ccce_estimate, ccce_pilot_refraction, ccce_refraction, dft_training_matrix,
    ls_estimate, ml_estimate, BlockEstimate, CascadedEstimate, GridSpec, MlEstimate,
    TrainingMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolScheme {
    /// Two-stage protocol with Doppler compensation and channel phase alignment.
    Proposed,
    /// Two-stage protocol without aligning to the direct-channel phase.
    ProposedNoCpa,
    /// Random refraction with best-of-`tau` selection in every block.
    RandomRefraction,
    /// Conventional per-block estimation of every cascaded coefficient.
    Ccce,
}

impl ProtocolScheme {
    pub const ALL: [ProtocolScheme; 4] = [
        ProtocolScheme::Proposed,
        ProtocolScheme::ProposedNoCpa,
        ProtocolScheme::RandomRefraction,
        ProtocolScheme::Ccce,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolScheme::Proposed => "Proposed",
            ProtocolScheme::ProposedNoCpa => "ProposedNoCPA",
            ProtocolScheme::RandomRefraction => "RR",
            ProtocolScheme::Ccce => "CCCE",
        }
    }
}

impl fmt::Display for ProtocolScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the receiver's channel knowledge comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CsiSource {
    #[default]
    Estimated,
    /// Every estimator output is replaced by the ground truth.
    Genie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMetrics {
    pub block_index: usize,
    /// `|h|^2` of the true effective channel during data transmission.
    pub gain_w: f64,
    /// `gain_w / sigma^2`.
    pub snr_gamma: f64,
    pub stage: Stage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMetrics {
    pub scheme: ProtocolScheme,
    pub blocks: Vec<BlockMetrics>,
    /// Number of blocks accounted to Stage I (N for RR, 0 for CCCE).
    pub stage1_blocks: usize,
    pub rate_stage1: f64,
    pub rate_stage2: f64,
    pub rate_overall: f64,
    pub ml_result: Option<MlEstimate>,
}

/// Result of one Stage-I block.
#[derive(Debug, Clone)]
pub struct Stage1Outcome {
    pub estimate: BlockEstimate,
    pub data_refraction: RefractionVector,
    pub metrics: BlockMetrics,
}

fn block_metrics(n: usize, gain_w: f64, sigma2: f64, stage: Stage) -> BlockMetrics {
    BlockMetrics {
        block_index: n,
        gain_w,
        snr_gamma: gain_w / sigma2,
        stage,
    }
}

/// Stage-I block: pilots `y_i = mu_i hbar_r + h_d + z_i`, LS estimate, then
/// the `mu_i vbar` with the largest estimated received power carries data.
pub fn stage1_block<R: Rng + ?Sized>(
    frame: &FrameChannel,
    n: usize,
    v_bar: &RefractionVector,
    theta: &TrainingMatrix,
    sigma2: f64,
    rng: &mut R,
) -> Result<Stage1Outcome> {
    stage1_block_with(frame, n, v_bar, theta, sigma2, CsiSource::Estimated, rng)
}

fn stage1_block_with<R: Rng + ?Sized>(
    frame: &FrameChannel,
    n: usize,
    v_bar: &RefractionVector,
    theta: &TrainingMatrix,
    sigma2: f64,
    csi: CsiSource,
    rng: &mut R,
) -> Result<Stage1Outcome> {
    if n == 0 || n > frame.blocks() {
        return Err(Error::InvalidArgument(format!("block index {n} out of range")));
    }
    let c = frame.cascaded_at(n, v_bar.len())?;
    let h_d = frame.direct_at(n);
    let h_r_bar = effective_channel(&c, v_bar, h_d)? - h_d;

    let y: Vec<Complex64> = (0..theta.rows())
        .map(|i| theta.entry(i, 1) * h_r_bar + h_d + cscg(sigma2, rng))
        .collect();
    let mut estimate = ls_estimate(&y, theta)?;
    estimate.block_index = n;

    let (sel_d, sel_r) = match csi {
        CsiSource::Estimated => (estimate.h_d_hat, estimate.h_r_bar_hat),
        CsiSource::Genie => (h_d, h_r_bar),
    };
    let mut best = 0;
    let mut best_power = f64::NEG_INFINITY;
    for i in 0..theta.rows() {
        let p = (sel_d + theta.entry(i, 1) * sel_r).norm_sqr();
        if p > best_power {
            best_power = p;
            best = i;
        }
    }
    let data_refraction = v_bar.rotated(theta.entry(best, 1));
    let gain_w = effective_channel(&c, &data_refraction, h_d)?.norm_sqr();
    Ok(Stage1Outcome {
        estimate,
        data_refraction,
        metrics: block_metrics(n, gain_w, sigma2, Stage::I),
    })
}

/// Stage-II data refraction
/// `exp(-j(2 pi fd_hat n Tc + angle(beta_hat) - angle_hd_hat)) s(psi_hat)`.
/// Passing `angle_hd_hat = 0` gives the variant without phase alignment.
pub fn stage2_refraction(
    ml: &MlEstimate,
    angle_hd_hat: f64,
    n: usize,
    tc: f64,
    mx: usize,
) -> Result<RefractionVector> {
    let phase = -(2.0 * PI * ml.fd_hat * n as f64 * tc + ml.beta_hat.arg() - angle_hd_hat);
    let rot = Complex64::from_polar(1.0, phase);
    RefractionVector::new(
        steering_vector(ml.psi_x_hat, mx)?
            .into_iter()
            .map(|s| s * rot)
            .collect(),
    )
}

/// `(Q - tau) / (len Q) * sum log2(1 + W / (Gamma sigma^2))`, zero for an
/// empty stage.
fn stage_rate(blocks: &[BlockMetrics], data_fraction: f64, gamma: f64, sigma2: f64) -> f64 {
    if blocks.is_empty() {
        return 0.0;
    }
    let sum: f64 = blocks
        .iter()
        .map(|b| (b.gain_w / (gamma * sigma2)).ln_1p() / std::f64::consts::LN_2)
        .sum();
    data_fraction * sum / blocks.len() as f64
}

/// Precomputed per-configuration state for running many frames.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SystemConfig,
    model: ChannelModel,
    theta: TrainingMatrix,
    grid: GridSpec,
    tc: f64,
    sigma2: f64,
    gamma: f64,
    ccce: Option<CcceTraining>,
}

#[derive(Debug, Clone)]
struct CcceTraining {
    theta_full: TrainingMatrix,
    pilots: Vec<RefractionVector>,
}

impl Simulator {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        Ok(Simulator {
            model: config.channel_model()?,
            theta: dft_training_matrix(config.pilots_tau)?,
            grid: config.grid(),
            tc: config.block_duration_s(),
            sigma2: config.noise_variance(),
            gamma: config.gamma_gap_linear(),
            ccce: None,
            config: config.clone(),
        })
    }

    /// Overrides the normalized noise power (e.g. zero for noiseless checks).
    pub fn with_noise_variance(mut self, sigma2: f64) -> Self {
        self.sigma2 = sigma2;
        self
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn noise_variance(&self) -> f64 {
        self.sigma2
    }

    pub fn block_duration(&self) -> f64 {
        self.tc
    }

    pub fn sample_frame<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FrameChannel> {
        self.model.sample_frame(rng)
    }

    fn ccce_training(&mut self) -> Result<&CcceTraining> {
        if self.ccce.is_none() {
            let theta_full = TrainingMatrix::dft_square(self.config.irs_mx + 1)?;
            let pilots = (0..theta_full.rows())
                .map(|i| ccce_pilot_refraction(&theta_full, i))
                .collect();
            self.ccce = Some(CcceTraining { theta_full, pilots });
        }
        Ok(self.ccce.as_ref().expect("initialized above"))
    }

    /// Builds the CCCE training up front so `run` can take `&self`.
    pub fn prepare(&mut self, schemes: &[ProtocolScheme]) -> Result<()> {
        if schemes.contains(&ProtocolScheme::Ccce) {
            self.ccce_training()?;
        }
        Ok(())
    }

    /// Runs one scheme over a given frame. Protocol randomness (training
    /// refractions and noise) is drawn from `rng` in block order.
    pub fn run<R: Rng + ?Sized>(
        &self,
        frame: &FrameChannel,
        scheme: ProtocolScheme,
        csi: CsiSource,
        rng: &mut R,
    ) -> Result<FrameMetrics> {
        if frame.blocks() != self.config.blocks_n {
            return Err(Error::LengthMismatch {
                expected: self.config.blocks_n,
                actual: frame.blocks(),
            });
        }
        match scheme {
            ProtocolScheme::Ccce => self.run_ccce(frame, csi, rng),
            ProtocolScheme::RandomRefraction => {
                self.run_two_stage(frame, scheme, self.config.blocks_n, csi, rng)
            }
            ProtocolScheme::Proposed | ProtocolScheme::ProposedNoCpa => {
                self.run_two_stage(frame, scheme, self.config.stage1_blocks_n1, csi, rng)
            }
        }
    }

    fn data_fraction(&self, pilots: usize) -> f64 {
        let q = self.config.symbols_per_block_q;
        q.saturating_sub(pilots) as f64 / q as f64
    }

    fn run_two_stage<R: Rng + ?Sized>(
        &self,
        frame: &FrameChannel,
        scheme: ProtocolScheme,
        n1: usize,
        csi: CsiSource,
        rng: &mut R,
    ) -> Result<FrameMetrics> {
        let n_total = self.config.blocks_n;
        let mx = self.config.irs_mx;
        let mut blocks = Vec::with_capacity(n_total);
        let mut h_hats = Vec::with_capacity(n1);
        let mut v_bars = Vec::with_capacity(n1);

        for n in 1..=n1 {
            let v_bar = RefractionVector::random(mx, rng);
            let out = stage1_block_with(frame, n, &v_bar, &self.theta, self.sigma2, csi, rng)?;
            h_hats.push(out.estimate.h_r_bar_hat);
            v_bars.push(v_bar);
            blocks.push(out.metrics);
        }

        let mut ml_result = None;
        if n1 < n_total {
            let ml = match csi {
                CsiSource::Estimated => ml_estimate(&h_hats, &v_bars, self.tc, &self.grid)?,
                CsiSource::Genie => MlEstimate {
                    fd_hat: frame.cascaded.doppler_fd,
                    psi_x_hat: frame.cascaded.psi_x,
                    beta_hat: frame.cascaded.beta,
                    objective: f64::NAN,
                    degenerate_training: false,
                },
            };
            for n in n1 + 1..=n_total {
                let h_d = frame.direct_at(n);
                let angle = match scheme {
                    ProtocolScheme::ProposedNoCpa => 0.0,
                    _ => match csi {
                        CsiSource::Estimated => {
                            let y: Vec<Complex64> = (0..self.config.pilots_tau)
                                .map(|_| h_d + cscg(self.sigma2, rng))
                                .collect();
                            average_estimate(&y)?.arg()
                        }
                        CsiSource::Genie => h_d.arg(),
                    },
                };
                let v = stage2_refraction(&ml, angle, n, self.tc, mx)?;
                let gain_w = frame.effective(n, &v)?.norm_sqr();
                blocks.push(block_metrics(n, gain_w, self.sigma2, Stage::II));
            }
            ml_result = Some(ml);
        }

        let frac = self.data_fraction(self.config.pilots_tau);
        let rate_stage1 = stage_rate(&blocks[..n1], frac, self.gamma, self.sigma2);
        let rate_stage2 = stage_rate(&blocks[n1..], frac, self.gamma, self.sigma2);
        Ok(FrameMetrics {
            scheme,
            blocks,
            stage1_blocks: n1,
            rate_stage1,
            rate_stage2,
            rate_overall: overall_rate(n1, n_total, rate_stage1, rate_stage2),
            ml_result,
        })
    }

    fn run_ccce<R: Rng + ?Sized>(
        &self,
        frame: &FrameChannel,
        csi: CsiSource,
        rng: &mut R,
    ) -> Result<FrameMetrics> {
        let training = self.ccce.as_ref().ok_or_else(|| {
            Error::InvalidArgument("CCCE training not prepared; call Simulator::prepare".into())
        })?;
        let mx = self.config.irs_mx;
        let n_total = self.config.blocks_n;
        let mut blocks = Vec::with_capacity(n_total);
        for n in 1..=n_total {
            let c = frame.cascaded_at(n, mx)?;
            let h_d = frame.direct_at(n);
            let estimate = match csi {
                CsiSource::Estimated => {
                    let y = training
                        .pilots
                        .iter()
                        .map(|v| Ok(effective_channel(&c, v, h_d)? + cscg(self.sigma2, rng)))
                        .collect::<Result<Vec<_>>>()?;
                    ccce_estimate(&y, &training.theta_full)?
                }
                CsiSource::Genie => CascadedEstimate {
                    h_d_hat: h_d,
                    c_hat: c.clone(),
                },
            };
            let v = ccce_refraction(&estimate);
            let gain_w = effective_channel(&c, &v, h_d)?.norm_sqr();
            blocks.push(block_metrics(n, gain_w, self.sigma2, Stage::II));
        }
        // M + 1 pilots per block; no data symbols once they fill the block
        let frac = self.data_fraction(mx + 1);
        let rate_stage2 = stage_rate(&blocks, frac, self.gamma, self.sigma2);
        Ok(FrameMetrics {
            scheme: ProtocolScheme::Ccce,
            blocks,
            stage1_blocks: 0,
            rate_stage1: 0.0,
            rate_stage2,
            rate_overall: overall_rate(0, n_total, 0.0, rate_stage2),
            ml_result: None,
        })
    }
}

/// `(N1/N) R_I + ((N - N1)/N) R_II`.
pub fn overall_rate(n1: usize, n: usize, rate_stage1: f64, rate_stage2: f64) -> f64 {
    let w1 = n1 as f64 / n as f64;
    let w2 = (n - n1) as f64 / n as f64;
    let mut r = 0.0;
    if n1 > 0 {
        r += w1 * rate_stage1;
    }
    if n1 < n {
        r += w2 * rate_stage2;
    }
    r
}

/// Draws a frame from `config` and runs `scheme` on it with estimated CSI.
pub fn run_frame<R: Rng + ?Sized>(
    config: &SystemConfig,
    scheme: ProtocolScheme,
    rng: &mut R,
) -> Result<FrameMetrics> {
    let mut sim = Simulator::new(config)?;
    sim.prepare(&[scheme])?;
    let frame = sim.sample_frame(rng)?;
    sim.run(&frame, scheme, CsiSource::Estimated, rng)
}
