//! Named experiments and their CSV outputs.
//!
//! | file | columns |
//! |------|---------|
//! | `fig3a.csv` | `scheme,snr_db,cdf` |
//! | `fig3b.csv` | `scheme,block_index,snr_db` |
//! | `fig4.csv` | `scheme,M_R,rate_bps_hz` |
//! | `fig5.csv` | `M_R,Pt_dbm,N1,rate_bps_hz` |
//! | `custom.csv` | `scheme,trials,rate_bps_hz,rate_std_error,snr_p10_db,snr_p50_db` |
//!
//! Every run also writes `manifest.toml`, the effective configuration with the
//! seed and trial count actually used. Feeding it back through `--config`
//! reproduces the CSVs byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::config::{linear_to_db, load_config, SystemConfig};
use crate::error::{Error, Result};
use crate::montecarlo::{run_experiment, run_trial, ExperimentSpec, Sweep};
use crate::protocol::{CsiSource, ProtocolScheme, Simulator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Fig3,
    Fig4,
    Fig5,
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Custom => "custom",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Experiment::Fig3 => 500,
            Experiment::Fig4 | Experiment::Fig5 | Experiment::Custom => 200,
        }
    }

    /// The configuration the experiment actually runs: figure experiments pin
    /// their operating point, `custom` uses the file as given.
    pub fn configure(self, base: &SystemConfig) -> SystemConfig {
        let mut cfg = base.clone();
        match self {
            Experiment::Fig3 => {
                cfg.transmit_power_dbm = 41.0;
                cfg.stage1_blocks_n1 = 5;
                cfg.irs_mx = 50;
            }
            Experiment::Fig4 => {
                cfg.transmit_power_dbm = 31.0;
                cfg.stage1_blocks_n1 = 10;
            }
            Experiment::Fig5 | Experiment::Custom => {}
        }
        cfg
    }
}

pub const FIG4_ELEMENTS: [usize; 5] = [10, 30, 50, 70, 90];
pub const FIG5_SETTINGS: [(usize, f64); 3] = [(50, 31.0), (100, 31.0), (50, 41.0)];

#[derive(Debug, Clone, Parser)]
#[command(name = "sim", about = "Monte Carlo experiments for the IRS-assisted high-mobility protocol")]
pub struct Args {
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// Flat TOML configuration; missing keys take the default setup.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the trial count per sweep point.
    #[arg(long)]
    pub trials: Option<usize>,
}

pub fn execute(args: &Args) -> Result<Vec<PathBuf>> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => SystemConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = Some(trials);
    }
    cfg.validate()?;
    run_named(args.experiment, &cfg, &args.out)
}

/// Runs `experiment` and returns the files written, manifest last.
pub fn run_named(experiment: Experiment, config: &SystemConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut cfg = experiment.configure(config);
    cfg.trials = Some(cfg.trials.unwrap_or(experiment.default_trials()));
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;

    let mut written = match experiment {
        Experiment::Fig3 => fig3(&cfg, out_dir)?,
        Experiment::Fig4 => vec![fig4(&cfg, out_dir)?],
        Experiment::Fig5 => vec![fig5(&cfg, out_dir)?],
        Experiment::Custom => vec![custom(&cfg, out_dir)?],
    };
    let manifest = out_dir.join("manifest.toml");
    // derived grid values stay comments so sweeps keep deriving them per point
    let grid = cfg.grid();
    let text = format!(
        "# experiment: {}\n# derived grid: fd_range = [{}, {}] Hz, fd_coarse_step = {} Hz, psi_coarse_step = {}\n{}",
        experiment.name(),
        grid.fd_range.0,
        grid.fd_range.1,
        grid.fd_coarse_step,
        grid.psi_coarse_step,
        cfg.to_toml_string()?
    );
    fs::write(&manifest, text)?;
    written.push(manifest);

    for path in &written {
        if fs::metadata(path)?.len() == 0 {
            return Err(Error::InvalidArgument(format!("{} is empty", path.display())));
        }
    }
    Ok(written)
}

fn trials(cfg: &SystemConfig) -> usize {
    cfg.trials.unwrap_or(1)
}

fn num(x: f64) -> String {
    format!("{x}")
}

struct Csv {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl Csv {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let mut writer = csv::Writer::from_path(&path).map_err(std::io::Error::from)?;
        writer.write_record(header).map_err(std::io::Error::from)?;
        Ok(Csv { path, writer })
    }

    fn row(&mut self, fields: &[String]) -> Result<()> {
        self.writer.write_record(fields).map_err(std::io::Error::from)?;
        Ok(())
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush()?;
        Ok(self.path)
    }
}

fn fig3(cfg: &SystemConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let schemes = vec![ProtocolScheme::Proposed, ProtocolScheme::RandomRefraction];
    let spec = ExperimentSpec::new(cfg.clone(), Sweep::None, schemes.clone(), trials(cfg));
    let result = run_experiment(&spec)?;

    let mut a = Csv::create(dir, "fig3a.csv", &["scheme", "snr_db", "cdf"])?;
    for summary in &result.points[0].schemes {
        for (snr, p) in summary.snr_cdf()?.points() {
            a.row(&[summary.scheme.name().into(), num(linear_to_db(snr)), num(p)])?;
        }
    }

    let sim = Simulator::new(cfg)?;
    let frames = run_trial(&sim, &schemes, CsiSource::Estimated, cfg.master_seed, 0, 0)?;
    let mut b = Csv::create(dir, "fig3b.csv", &["scheme", "block_index", "snr_db"])?;
    for frame in &frames {
        for block in &frame.blocks {
            b.row(&[
                frame.scheme.name().into(),
                block.block_index.to_string(),
                num(linear_to_db(block.snr_gamma)),
            ])?;
        }
    }
    Ok(vec![a.finish()?, b.finish()?])
}

fn fig4(cfg: &SystemConfig, dir: &Path) -> Result<PathBuf> {
    let spec = ExperimentSpec::new(
        cfg.clone(),
        Sweep::Elements(FIG4_ELEMENTS.to_vec()),
        ProtocolScheme::ALL.to_vec(),
        trials(cfg),
    );
    let result = run_experiment(&spec)?;
    let mut out = Csv::create(dir, "fig4.csv", &["scheme", "M_R", "rate_bps_hz"])?;
    for scheme in ProtocolScheme::ALL {
        for point in &result.points {
            let s = point.scheme(scheme).expect("scheme was requested");
            out.row(&[scheme.name().into(), point.config.irs_mx.to_string(), num(s.mean_rate())])?;
        }
    }
    out.finish()
}

/// Proposed-scheme rate for every `N1` in `2..N` at one `(M_R, Pt)` setting.
pub fn fig5_curve(cfg: &SystemConfig, mx: usize, pt_dbm: f64, trials: usize) -> Result<Vec<(usize, crate::montecarlo::SchemeSummary)>> {
    let base = SystemConfig {
        irs_mx: mx,
        transmit_power_dbm: pt_dbm,
        stage1_blocks_n1: 2,
        ..cfg.clone()
    };
    let n1s: Vec<usize> = (2..cfg.blocks_n).collect();
    let spec = ExperimentSpec::new(base, Sweep::Stage1Blocks(n1s.clone()), vec![ProtocolScheme::Proposed], trials);
    let result = run_experiment(&spec)?;
    Ok(n1s
        .into_iter()
        .zip(result.points.into_iter().map(|mut p| p.schemes.remove(0)))
        .collect())
}

fn fig5(cfg: &SystemConfig, dir: &Path) -> Result<PathBuf> {
    let mut out = Csv::create(dir, "fig5.csv", &["M_R", "Pt_dbm", "N1", "rate_bps_hz"])?;
    for (mx, pt) in FIG5_SETTINGS {
        for (n1, s) in fig5_curve(cfg, mx, pt, trials(cfg))? {
            out.row(&[mx.to_string(), num(pt), n1.to_string(), num(s.mean_rate())])?;
        }
    }
    out.finish()
}

fn custom(cfg: &SystemConfig, dir: &Path) -> Result<PathBuf> {
    let spec = ExperimentSpec::new(cfg.clone(), Sweep::None, ProtocolScheme::ALL.to_vec(), trials(cfg));
    let result = run_experiment(&spec)?;
    let mut out = Csv::create(
        dir,
        "custom.csv",
        &["scheme", "trials", "rate_bps_hz", "rate_std_error", "snr_p10_db", "snr_p50_db"],
    )?;
    for s in &result.points[0].schemes {
        let (p10, p50) = match s.snr_cdf() {
            Ok(cdf) => (linear_to_db(cdf.quantile(0.1)?), linear_to_db(cdf.quantile(0.5)?)),
            Err(_) => (f64::NAN, f64::NAN),
        };
        out.row(&[
            s.scheme.name().into(),
            s.rates.len().to_string(),
            num(s.mean_rate()),
            num(s.std_error()),
            num(p10),
            num(p50),
        ])?;
    }
    out.finish()
}
