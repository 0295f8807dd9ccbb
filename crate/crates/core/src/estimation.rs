//! Channel estimators: per-block LS over the two-column DFT training,
//! direct-channel averaging with the IRS off, the joint ML search for the
//! cascaded-channel triple, and the full per-element LS used by the
//! conventional benchmark.

use std::f64::consts::PI;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::channel::{wrap_phase, RefractionVector, SteeringPhase};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative threshold below which the Gram matrix is treated as singular.
const RANK_TOL: f64 = 1e-12;

/// Pilot training matrix `Theta` (tau x K) together with its pseudo-inverse.
#[derive(Debug, Clone)]
pub struct TrainingMatrix {
    rows: usize,
    cols: usize,
    entries: DMatrix<Complex64>,
    pinv: DMatrix<Complex64>,
    gram_inv: DMatrix<Complex64>,
}

impl TrainingMatrix {
    /// Builds from a row-major entry list. Fails unless the matrix has full
    /// column rank.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if cols == 0 || entries.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        if rows < cols {
            return Err(Error::RankDeficient { required: cols });
        }
        let theta = DMatrix::from_row_slice(rows, cols, &entries);
        let theta_h = theta.adjoint();
        let gram = &theta_h * &theta;
        let chol = gram
            .clone()
            .cholesky()
            .ok_or(Error::RankDeficient { required: cols })?;
        let diag: Vec<f64> = (0..cols).map(|i| chol.l_dirty()[(i, i)].re.powi(2)).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(max > 0.0) || min < RANK_TOL * max {
            return Err(Error::RankDeficient { required: cols });
        }
        let gram_inv = chol.inverse();
        let pinv = &gram_inv * theta_h;
        Ok(TrainingMatrix {
            rows,
            cols,
            entries: theta,
            pinv,
            gram_inv,
        })
    }

    /// `tau x 2` matrix with rows `[1, mu_i]`, every `mu_i` unit modulus.
    pub fn from_common_phases(mus: &[Complex64]) -> Result<Self> {
        if mus.iter().any(|m| (m.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidArgument(
                "training phase shifts must have unit modulus".into(),
            ));
        }
        let entries = mus
            .iter()
            .flat_map(|&mu| [Complex64::new(1.0, 0.0), mu])
            .collect();
        Self::new(mus.len(), 2, entries)
    }

    /// Full `size x size` DFT matrix, entry `(i, k) = exp(-j 2 pi i k / size)`.
    pub fn dft_square(size: usize) -> Result<Self> {
        let entries = (0..size)
            .flat_map(|i| (0..size).map(move |k| dft_entry(i, k, size)))
            .collect();
        Self::new(size, size, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, k: usize) -> Complex64 {
        self.entries[(i, k)]
    }

    /// `Theta^H Theta`.
    pub fn gram(&self) -> DMatrix<Complex64> {
        self.entries.adjoint() * &self.entries
    }

    /// `(Theta^H Theta)^-1`; the LS error covariance is this times the noise
    /// variance.
    pub fn gram_inverse(&self) -> &DMatrix<Complex64> {
        &self.gram_inv
    }

    /// Least-squares solution `Theta^+ y`.
    pub fn solve(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.rows {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                actual: y.len(),
            });
        }
        Ok((0..self.cols)
            .map(|k| (0..self.rows).map(|i| self.pinv[(k, i)] * y[i]).sum())
            .collect())
    }
}

fn dft_entry(i: usize, k: usize, size: usize) -> Complex64 {
    // reduce first so large products stay exact
    let idx = (i * k) % size;
    Complex64::from_polar(1.0, -2.0 * PI * idx as f64 / size as f64)
}

/// First two columns of the `tau x tau` DFT matrix: row `i` is
/// `[1, exp(-j 2 pi i / tau)]`.
pub fn dft_training_matrix(tau: usize) -> Result<TrainingMatrix> {
    if tau < 2 {
        return Err(Error::InvalidArgument(format!(
            "training needs tau >= 2 pilots for rank 2, got {tau}"
        )));
    }
    let mus: Vec<Complex64> = (0..tau).map(|i| dft_entry(i, 1, tau)).collect();
    TrainingMatrix::from_common_phases(&mus)
}

/// LS estimate of the direct and initial IRS-refracted channels of a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEstimate {
    pub block_index: usize,
    pub h_d_hat: Complex64,
    pub h_r_bar_hat: Complex64,
}

/// `Theta^+ y` for a two-column training matrix.
pub fn ls_estimate(y: &[Complex64], theta: &TrainingMatrix) -> Result<BlockEstimate> {
    if theta.cols() != 2 {
        return Err(Error::InvalidArgument(format!(
            "block LS expects a two-column training matrix, got {} columns",
            theta.cols()
        )));
    }
    let x = theta.solve(y)?;
    Ok(BlockEstimate {
        block_index: 0,
        h_d_hat: x[0],
        h_r_bar_hat: x[1],
    })
}

/// Sample mean of IRS-off pilots.
pub fn average_estimate(y: &[Complex64]) -> Result<Complex64> {
    if y.is_empty() {
        return Err(Error::InvalidArgument("no pilots to average".into()));
    }
    Ok(y.iter().sum::<Complex64>() / y.len() as f64)
}

/// Search grid for the joint Doppler / effective-phase ML estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Inclusive Doppler search interval in Hz.
    pub fd_range: (f64, f64),
    pub fd_coarse_step: f64,
    pub psi_coarse_step: f64,
    pub refinement_levels: usize,
    /// Step ratio between successive refinement levels, in `(0, 1)`.
    pub refinement_shrink: f64,
}

impl GridSpec {
    /// Doppler step `1/(10 N Tc)` over `[-f_max, f_max]`, phase step
    /// `2/(10 Mx)`, three refinements shrinking by 10.
    pub fn recommended(f_max: f64, blocks: usize, tc: f64, mx: usize) -> Self {
        GridSpec {
            fd_range: (-f_max, f_max),
            fd_coarse_step: 1.0 / (10.0 * blocks as f64 * tc),
            psi_coarse_step: 2.0 / (10.0 * mx as f64),
            refinement_levels: 3,
            refinement_shrink: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.fd_range;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "invalid Doppler range [{lo}, {hi}]"
            )));
        }
        if !(self.fd_coarse_step > 0.0) || !(self.psi_coarse_step > 0.0) {
            return Err(Error::InvalidArgument("grid steps must be positive".into()));
        }
        if !(self.refinement_shrink > 0.0 && self.refinement_shrink < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "refinement shrink must lie in (0, 1), got {}",
                self.refinement_shrink
            )));
        }
        Ok(())
    }

    fn psi_points(&self) -> usize {
        ((2.0 / self.psi_coarse_step) - 1e-9).ceil().max(1.0) as usize
    }

    /// Step sizes after the last refinement level, `(Hz, phase)`.
    pub fn final_steps(&self) -> (f64, f64) {
        let shrink = self.refinement_shrink.powi(self.refinement_levels as i32);
        (
            self.fd_coarse_step * shrink,
            2.0 / self.psi_points() as f64 * shrink,
        )
    }
}

/// Output of the ML search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlEstimate {
    pub fd_hat: f64,
    pub psi_x_hat: SteeringPhase,
    pub beta_hat: Complex64,
    /// Maximized projection `|xi^H h|^2 / (xi^H xi)`.
    pub objective: f64,
    /// Set when every training row is identical, in which case the Doppler
    /// and phase cannot be separated from the observations.
    pub degenerate_training: bool,
}

/// Stage-I observations together with the training refractions that
/// produced them.
struct MlProblem<'a> {
    h: &'a [Complex64],
    rows: Vec<&'a [Complex64]>,
    elements: usize,
    tc: f64,
    // threshold on xi^H xi below which a grid point is skipped
    norm_floor: f64,
}

impl<'a> MlProblem<'a> {
    fn new(h: &'a [Complex64], v_bar: &'a [RefractionVector], tc: f64) -> Result<Self> {
        if h.len() != v_bar.len() {
            return Err(Error::LengthMismatch {
                expected: v_bar.len(),
                actual: h.len(),
            });
        }
        if v_bar.is_empty() {
            return Err(Error::InvalidArgument("empty training refraction matrix".into()));
        }
        let elements = v_bar[0].len();
        if elements == 0 {
            return Err(Error::InvalidArgument("training refractions have no elements".into()));
        }
        if let Some(bad) = v_bar.iter().find(|v| v.len() != elements) {
            return Err(Error::LengthMismatch {
                expected: elements,
                actual: bad.len(),
            });
        }
        if v_bar.iter().all(|v| v.is_off()) {
            return Err(Error::InvalidArgument(
                "training refraction matrix is all zero".into(),
            ));
        }
        let energy: f64 = v_bar
            .iter()
            .flat_map(|v| v.coefficients())
            .map(|c| c.norm_sqr())
            .sum();
        Ok(MlProblem {
            h,
            rows: v_bar.iter().map(|v| v.coefficients()).collect(),
            elements,
            tc,
            norm_floor: 1e-10 * energy,
        })
    }

    /// `w_n = sum_m vbar_{n,m} conj(s_m(psi))` for every block, by Horner.
    fn weights(&self, psi: f64) -> Vec<Complex64> {
        let z = Complex64::from_polar(1.0, PI * psi);
        self.rows
            .iter()
            .map(|row| row.iter().rev().fold(ZERO, |acc, &v| acc * z + v))
            .collect()
    }

    /// `exp(j 2 pi fd n Tc)` for `n = 1..=N1`.
    fn rotations(&self, fd: f64) -> Vec<Complex64> {
        (1..=self.h.len())
            .map(|n| Complex64::from_polar(1.0, 2.0 * PI * fd * n as f64 * self.tc))
            .collect()
    }

    fn project(&self, rot: &[Complex64], w: &[Complex64]) -> (Complex64, f64) {
        let mut num = ZERO;
        let mut norm = 0.0;
        for ((r, w), &h) in rot.iter().zip(w).zip(self.h) {
            num += (r * w).conj() * h;
            norm += w.norm_sqr();
        }
        (num, norm)
    }

    /// `(xi^H h, xi^H xi)` at one grid point.
    fn projection(&self, fd: f64, psi: f64) -> (Complex64, f64) {
        self.project(&self.rotations(fd), &self.weights(psi))
    }

    fn ratio(&self, (num, norm): (Complex64, f64)) -> f64 {
        if norm <= self.norm_floor {
            0.0
        } else {
            num.norm_sqr() / norm
        }
    }

    fn objective(&self, fd: f64, psi: f64) -> f64 {
        self.ratio(self.projection(fd, psi))
    }

    /// `w_n`, `dw_n/dpsi` and `d2w_n/dpsi2` for every block.
    fn weight_derivatives(&self, psi: f64) -> Vec<[Complex64; 3]> {
        let z = Complex64::from_polar(1.0, PI * psi);
        let jpi = Complex64::new(0.0, PI);
        self.rows
            .iter()
            .map(|row| {
                let mut out = [ZERO; 3];
                let mut zm = Complex64::new(1.0, 0.0);
                for (m, &v) in row.iter().enumerate() {
                    let d = jpi * m as f64;
                    let t = v * zm;
                    out[0] += t;
                    out[1] += t * d;
                    out[2] += t * d * d;
                    zm *= z;
                }
                out
            })
            .collect()
    }

    /// Objective, gradient and Hessian in `(fd, psi)`.
    fn curvature(&self, fd: f64, psi: f64) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let w = self.weight_derivatives(psi);
        let (mut a, mut a_f, mut a_p, mut a_ff, mut a_fp, mut a_pp) = (ZERO, ZERO, ZERO, ZERO, ZERO, ZERO);
        let (mut b, mut b_p, mut b_pp) = (0.0, 0.0, 0.0);
        for (n, (wn, &h)) in w.iter().zip(self.h).enumerate() {
            let kappa = 2.0 * PI * (n + 1) as f64 * self.tc;
            let jk = Complex64::new(0.0, -kappa);
            let rot = Complex64::from_polar(1.0, -kappa * fd) * h;
            let (c0, c1, c2) = (wn[0].conj() * rot, wn[1].conj() * rot, wn[2].conj() * rot);
            a += c0;
            a_f += jk * c0;
            a_ff += jk * jk * c0;
            a_p += c1;
            a_fp += jk * c1;
            a_pp += c2;
            b += wn[0].norm_sqr();
            b_p += 2.0 * (wn[1] * wn[0].conj()).re;
            b_pp += 2.0 * ((wn[2] * wn[0].conj()).re + wn[1].norm_sqr());
        }
        let p = a.norm_sqr();
        let p_f = 2.0 * (a_f * a.conj()).re;
        let p_p = 2.0 * (a_p * a.conj()).re;
        let p_ff = 2.0 * (a_ff * a.conj() + a_f * a_f.conj()).re;
        let p_fp = 2.0 * (a_fp * a.conj() + a_f * a_p.conj()).re;
        let p_pp = 2.0 * (a_pp * a.conj() + a_p * a_p.conj()).re;
        let j = p / b;
        let grad = [p_f / b, (p_p * b - p * b_p) / (b * b)];
        let h_ff = p_ff / b;
        let h_fp = (p_fp * b - p_f * b_p) / (b * b);
        let h_pp = p_pp / b - 2.0 * p_p * b_p / (b * b) - p * b_pp / (b * b)
            + 2.0 * p * b_p * b_p / (b * b * b);
        (j, grad, [[h_ff, h_fp], [h_fp, h_pp]])
    }

    fn rows_identical(&self) -> bool {
        self.rows.len() > 1 && self.rows.iter().all(|r| *r == self.rows[0])
    }
}

/// ML objective `|xi^H h|^2 / (xi^H xi)` with
/// `xi = Gamma(fd) Vbar conj(s(psi))`.
pub fn ml_objective(
    fd: f64,
    psi_x: SteeringPhase,
    h_r_bar_hats: &[Complex64],
    v_bar: &[RefractionVector],
    tc: f64,
) -> Result<f64> {
    let problem = MlProblem::new(h_r_bar_hats, v_bar, tc)?;
    Ok(problem.objective(fd, psi_x.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GridPoint {
    pub fd_index: usize,
    pub psi_index: usize,
    pub value: f64,
}

/// Strictly larger wins; exact ties keep the lowest Doppler index, then the
/// lowest phase index.
pub(crate) fn prefer(candidate: GridPoint, incumbent: Option<GridPoint>) -> bool {
    match incumbent {
        None => true,
        Some(best) => {
            candidate.value > best.value
                || (candidate.value == best.value
                    && (candidate.fd_index, candidate.psi_index)
                        < (best.fd_index, best.psi_index))
        }
    }
}

fn doppler_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let k_lo = (lo / step - 1e-9).ceil() as i64;
    let k_hi = (hi / step + 1e-9).floor() as i64;
    if k_lo > k_hi {
        return vec![0.5 * (lo + hi)];
    }
    (k_lo..=k_hi)
        .map(|k| (k as f64 * step).clamp(lo, hi))
        .collect()
}

/// Coarse search over Doppler multiples of the step and `P` equispaced
/// phases `-1 + 2p/P`. Phase sums are evaluated with FFTs.
fn coarse_search(problem: &MlProblem<'_>, grid: &GridSpec) -> (f64, f64) {
    let fds = doppler_grid(grid.fd_range.0, grid.fd_range.1, grid.fd_coarse_step);
    let p_len = grid.psi_points();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(p_len);
    let inverse = planner.plan_fft_inverse(p_len);

    let alternating = |m: usize| if m % 2 == 0 { 1.0 } else { -1.0 };

    // xi^H xi at every phase: sum_n |w_n(psi_p)|^2 with
    // w_n(psi_p) = sum_m vbar_{n,m} (-1)^m exp(+j 2 pi m p / P).
    let mut norms = vec![0.0; p_len];
    let mut buf = vec![ZERO; p_len];
    for row in &problem.rows {
        buf.iter_mut().for_each(|b| *b = ZERO);
        for (m, &v) in row.iter().enumerate() {
            buf[m % p_len] += v * alternating(m);
        }
        inverse.process(&mut buf);
        for (acc, w) in norms.iter_mut().zip(&buf) {
            *acc += w.norm_sqr();
        }
    }

    let mut best: Option<GridPoint> = None;
    let mut per_element = vec![ZERO; problem.elements];
    for (k, &fd) in fds.iter().enumerate() {
        // b_m = sum_n conj(vbar_{n,m}) h_n exp(-j 2 pi fd n Tc)
        per_element.iter_mut().for_each(|b| *b = ZERO);
        for (n, (row, &h)) in problem.rows.iter().zip(problem.h).enumerate() {
            let rot = Complex64::from_polar(1.0, -2.0 * PI * fd * (n + 1) as f64 * problem.tc);
            let weighted = h * rot;
            for (b, v) in per_element.iter_mut().zip(row.iter()) {
                *b += v.conj() * weighted;
            }
        }
        buf.iter_mut().for_each(|b| *b = ZERO);
        for (m, &b) in per_element.iter().enumerate() {
            buf[m % p_len] += b * alternating(m);
        }
        forward.process(&mut buf);
        for (p, (num, &norm)) in buf.iter().zip(&norms).enumerate() {
            let value = if norm <= problem.norm_floor {
                0.0
            } else {
                num.norm_sqr() / norm
            };
            let cand = GridPoint {
                fd_index: k,
                psi_index: p,
                value,
            };
            if prefer(cand, best) {
                best = Some(cand);
            }
        }
    }
    let best = best.expect("grid is never empty");
    (
        fds[best.fd_index],
        -1.0 + 2.0 * best.psi_index as f64 / p_len as f64,
    )
}

/// Joint ML estimate of `{f_d, psi_x, beta}` from the Stage-I estimates of
/// the initial IRS-refracted channel.
///
/// A coarse grid over `fd_range x [-1, 1)` is followed by
/// `refinement_levels` local grids, each spanning two previous steps on
/// either side of the incumbent with the step shrunk by
/// `refinement_shrink`. `beta` is the least-squares gain at the winner.
pub fn ml_estimate(
    h_r_bar_hats: &[Complex64],
    v_bar: &[RefractionVector],
    tc: f64,
    grid: &GridSpec,
) -> Result<MlEstimate> {
    if h_r_bar_hats.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "joint Doppler/phase estimation needs at least 2 blocks, got {}",
            h_r_bar_hats.len()
        )));
    }
    grid.validate()?;
    let problem = MlProblem::new(h_r_bar_hats, v_bar, tc)?;
    let degenerate = problem.rows_identical();
    if degenerate {
        warn!("identical training refractions: Doppler and phase may be ambiguous");
    }

    let (mut fd, mut psi) = coarse_search(&problem, grid);
    let mut fd_step = grid.fd_coarse_step;
    let mut psi_step = 2.0 / grid.psi_points() as f64;
    let (lo, hi) = grid.fd_range;
    let span = (2.0 / grid.refinement_shrink).ceil() as i64;

    for _ in 0..grid.refinement_levels {
        fd_step *= grid.refinement_shrink;
        psi_step *= grid.refinement_shrink;
        let psis: Vec<f64> = (-span..=span)
            .map(|i| wrap_phase(psi + i as f64 * psi_step))
            .collect();
        let weights: Vec<Vec<Complex64>> = psis.iter().map(|&ps| problem.weights(ps)).collect();
        let mut best: Option<GridPoint> = None;
        let (mut best_fd, mut best_psi) = (fd, psi);
        for (k, i) in (-span..=span).enumerate() {
            let f = fd + i as f64 * fd_step;
            if f < lo - 1e-12 || f > hi + 1e-12 {
                continue;
            }
            let rot = problem.rotations(f);
            for (p, (&ps, w)) in psis.iter().zip(&weights).enumerate() {
                let cand = GridPoint {
                    fd_index: k,
                    psi_index: p,
                    value: problem.ratio(problem.project(&rot, w)),
                };
                if prefer(cand, best) {
                    best = Some(cand);
                    best_fd = f;
                    best_psi = ps;
                }
            }
        }
        fd = best_fd;
        psi = best_psi;
    }

    if problem.projection(fd, psi).1 > problem.norm_floor {
        (fd, psi) = polish(&problem, fd, psi, grid.fd_range);
    }

    let (num, norm) = problem.projection(fd, psi);
    let objective = problem.ratio((num, norm));
    let beta_hat = if norm <= problem.norm_floor { ZERO } else { num / norm };
    Ok(MlEstimate {
        fd_hat: fd,
        psi_x_hat: SteeringPhase(psi),
        beta_hat,
        objective,
        degenerate_training: degenerate,
    })
}

/// Newton ascent from the grid winner. The objective has a long, nearly flat
/// ridge along coupled `(fd, psi)` directions that a coordinate grid only
/// resolves to its cell size; steps are taken only while they increase the
/// objective.
fn polish(problem: &MlProblem<'_>, mut fd: f64, mut psi: f64, (lo, hi): (f64, f64)) -> (f64, f64) {
    let mut current = problem.objective(fd, psi);
    for _ in 0..50 {
        let (_, g, h) = problem.curvature(fd, psi);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        // only a negative definite Hessian gives an ascent step
        if !(h[0][0] < 0.0 && det > 0.0) {
            break;
        }
        let step_f = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let step_p = -(h[0][0] * g[1] - h[1][0] * g[0]) / det;
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let f = (fd + scale * step_f).clamp(lo, hi);
            let p = wrap_phase(psi + scale * step_p);
            let value = problem.objective(f, p);
            if value > current {
                fd = f;
                psi = p;
                current = value;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (fd, psi)
}

/// Per-element cascaded channel and direct channel of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadedEstimate {
    pub h_d_hat: Complex64,
    /// Estimated `c`, oriented like [`crate::channel::CascadedChannelParams::cascaded_channel`].
    pub c_hat: Vec<Complex64>,
}

/// IRS refraction applied during pilot `i` of the conventional scheme: the
/// DFT row without its leading (direct-path) entry.
pub fn ccce_pilot_refraction(theta_full: &TrainingMatrix, i: usize) -> RefractionVector {
    RefractionVector::from_phases((1..theta_full.cols()).map(|k| theta_full.entry(i, k).arg()))
}

/// LS solve of `y = Theta_full [h_d; conj(c)]` over `M + 1` pilots.
pub fn ccce_estimate(y: &[Complex64], theta_full: &TrainingMatrix) -> Result<CascadedEstimate> {
    if theta_full.rows() != theta_full.cols() || y.len() != theta_full.rows() {
        return Err(Error::LengthMismatch {
            expected: theta_full.cols(),
            actual: y.len(),
        });
    }
    let x = theta_full.solve(y)?;
    Ok(CascadedEstimate {
        h_d_hat: x[0],
        c_hat: x[1..].iter().map(|g| g.conj()).collect(),
    })
}

/// Per-element alignment: every cascaded term `conj(c_m) v_m` is rotated
/// onto the phase of the direct channel.
pub fn ccce_refraction(estimate: &CascadedEstimate) -> RefractionVector {
    let target = estimate.h_d_hat.arg();
    RefractionVector::from_phases(
        estimate
            .c_hat
            .iter()
            .map(|c| target - c.conj().arg())
            .collect::<Vec<_>>(),
    )
}
