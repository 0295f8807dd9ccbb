//! Seeded Monte Carlo harness: trial seeding, sweeps and aggregation.
//!
//! Every random draw is fixed by `(master_seed, point, trial, stream)`
//! through [`derive_seed`]. Stream 0 draws the frame channel and stream 1
//! drives the protocol. All schemes at a given `(point, trial)` see the same
//! frame channel and start from the same protocol seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{linear_to_db, SystemConfig};
use crate::error::{Error, Result};
use crate::protocol::{CsiSource, FrameMetrics, ProtocolScheme, Simulator};

pub const CHANNEL_STREAM: u64 = 0;
pub const PROTOCOL_STREAM: u64 = 1;

/// Sorted samples with the right-continuous step CDF `F(x) = #{s <= x} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empirical CDF of an empty sample".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidArgument("NaN sample".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// `(value, F(value))` at each distinct sample value.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (k, &x) in self.sorted.iter().enumerate() {
            let p = (k + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = p,
                _ => out.push((x, p)),
            }
        }
        out
    }

    pub fn prob_le(&self, x: f64) -> f64 {
        let count = self.sorted.partition_point(|&s| s <= x);
        count as f64 / self.sorted.len() as f64
    }

    /// Type-7 quantile: linear interpolation at position `(n - 1) p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
        }
        let h = (self.sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(self.sorted.len() - 1);
        let frac = h - lo as f64;
        Ok(self.sorted[lo] + frac * (self.sorted[hi] - self.sorted[lo]))
    }
}

pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    Ok(EmpiricalCdf::new(samples)?.points())
}

/// `10 log10(Q_a(p) / Q_b(p))` for linear-scale samples.
pub fn percentile_gain_db(a: &EmpiricalCdf, b: &EmpiricalCdf, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("probability {p} outside (0, 1)")));
    }
    Ok(linear_to_db(a.quantile(p)?) - linear_to_db(b.quantile(p)?))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based seed: each coordinate is folded in through a splitmix64
/// round, so neighbouring counters give unrelated seeds.
pub fn derive_seed(master: u64, point: u64, trial: u64, stream: u64) -> u64 {
    [point, trial, stream]
        .iter()
        .fold(splitmix64(master), |acc, &x| splitmix64(acc ^ splitmix64(x)))
}

pub fn trial_rng(master: u64, point: usize, trial: usize, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, point as u64, trial as u64, stream))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    None,
    Elements(Vec<usize>),
    Stage1Blocks(Vec<usize>),
    TransmitPowerDbm(Vec<f64>),
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::None => 1,
            Sweep::Elements(v) | Sweep::Stage1Blocks(v) => v.len(),
            Sweep::TransmitPowerDbm(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        let values = self.values();
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty sweep".into()));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("sweep values must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Sweep values as reals (`NaN` for [`Sweep::None`]).
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::None => vec![f64::NAN],
            Sweep::Elements(v) | Sweep::Stage1Blocks(v) => v.iter().map(|&x| x as f64).collect(),
            Sweep::TransmitPowerDbm(v) => v.clone(),
        }
    }

    pub fn apply(&self, base: &SystemConfig, index: usize) -> SystemConfig {
        let mut cfg = base.clone();
        match self {
            Sweep::None => {}
            Sweep::Elements(v) => cfg.irs_mx = v[index],
            Sweep::Stage1Blocks(v) => cfg.stage1_blocks_n1 = v[index],
            Sweep::TransmitPowerDbm(v) => cfg.transmit_power_dbm = v[index],
        }
        cfg
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub base: SystemConfig,
    pub sweep: Sweep,
    pub schemes: Vec<ProtocolScheme>,
    pub trials: usize,
    pub master_seed: u64,
    pub csi: CsiSource,
}

impl ExperimentSpec {
    pub fn new(base: SystemConfig, sweep: Sweep, schemes: Vec<ProtocolScheme>, trials: usize) -> Self {
        let master_seed = base.master_seed;
        ExperimentSpec {
            base,
            sweep,
            schemes,
            trials,
            master_seed,
            csi: CsiSource::Estimated,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidArgument("no schemes requested".into()));
        }
        self.sweep.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSummary {
    pub scheme: ProtocolScheme,
    /// Overall rate of each trial, in trial order.
    pub rates: Vec<f64>,
    /// Linear SNR of every block after the configured Stage I, pooled over
    /// trials in trial order.
    pub stage2_snr: Vec<f64>,
}

impl SchemeSummary {
    pub fn mean_rate(&self) -> f64 {
        self.rates.iter().sum::<f64>() / self.rates.len() as f64
    }

    /// Standard error of [`Self::mean_rate`] (zero for a single trial).
    pub fn std_error(&self) -> f64 {
        let n = self.rates.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean_rate();
        let var = self.rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    }

    pub fn stage2_snr_db(&self) -> Vec<f64> {
        self.stage2_snr.iter().map(|&x| linear_to_db(x)).collect()
    }

    pub fn snr_cdf(&self) -> Result<EmpiricalCdf> {
        EmpiricalCdf::new(&self.stage2_snr)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub index: usize,
    pub value: f64,
    pub config: SystemConfig,
    pub schemes: Vec<SchemeSummary>,
}

impl PointResult {
    pub fn scheme(&self, scheme: ProtocolScheme) -> Option<&SchemeSummary> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub points: Vec<PointResult>,
}

/// Runs one trial of every scheme at a point under common random numbers.
pub fn run_trial(
    sim: &Simulator,
    schemes: &[ProtocolScheme],
    csi: CsiSource,
    master_seed: u64,
    point: usize,
    trial: usize,
) -> Result<Vec<FrameMetrics>> {
    let frame = sim.sample_frame(&mut trial_rng(master_seed, point, trial, CHANNEL_STREAM))?;
    schemes
        .iter()
        .map(|&scheme| {
            let mut rng = trial_rng(master_seed, point, trial, PROTOCOL_STREAM);
            sim.run(&frame, scheme, csi, &mut rng)
        })
        .collect()
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<AggregateResult> {
    spec.validate()?;
    let values = spec.sweep.values();
    let sims = (0..spec.sweep.len())
        .map(|p| {
            let cfg = spec.sweep.apply(&spec.base, p);
            let mut sim = Simulator::new(&cfg)?;
            sim.prepare(&spec.schemes)?;
            Ok(sim)
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..sims.len())
        .flat_map(|p| (0..spec.trials).map(move |t| (p, t)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(p, t)| run_trial(&sims[p], &spec.schemes, spec.csi, spec.master_seed, p, t))
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(sims.len());
    for (p, (sim, trials)) in sims.iter().zip(outcomes.chunks(spec.trials)).enumerate() {
        let n1 = sim.config().stage1_blocks_n1;
        let schemes = spec
            .schemes
            .iter()
            .enumerate()
            .map(|(k, &scheme)| SchemeSummary {
                scheme,
                rates: trials.iter().map(|t| t[k].rate_overall).collect(),
                stage2_snr: trials
                    .iter()
                    .flat_map(|t| t[k].blocks.iter())
                    .filter(|b| b.block_index > n1)
                    .map(|b| b.snr_gamma)
                    .collect(),
            })
            .collect();
        points.push(PointResult {
            index: p,
            value: values[p],
            config: sim.config().clone(),
            schemes,
        });
    }
    Ok(AggregateResult { points })
}
