//! Ground-truth channel synthesis.
//!
//! The BS-IRS link is a line-of-sight path with a Doppler rotation, the
//! IRS-user link is a static line-of-sight path (IRS and user share the
//! vehicle), and the BS-user direct link is Rayleigh fading with Jakes
//! time correlation across blocks.
//!
//! Convention: a frame's effective channel at block `n` is
//!
//! ```text
//! h(n) = beta * exp(j 2 pi f_d n Tc) * s(psi_x)^H v + h_d(n)
//! ```
//!
//! and [`CascadedChannelParams::cascaded_channel`] returns the vector `c(n)`
//! for which `c(n)^H v` equals the first term, so [`effective_channel`]
//! (a plain conjugate inner product) reproduces the formula above.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const UNIT_MODULUS_TOL: f64 = 1e-12;

/// Normalized phase difference between adjacent elements, in units of pi.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct SteeringPhase(pub f64);

impl SteeringPhase {
    pub fn new(value: f64) -> Self {
        SteeringPhase(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Representative in `[-1, 1)`. Steering vectors have period 2 in the
    /// phase, so this does not change the vector.
    pub fn canonical(self) -> Self {
        SteeringPhase(wrap_phase(self.0))
    }
}

/// `((x + 1) mod 2) - 1`, which lands in `[-1, 1)`.
pub fn wrap_phase(x: f64) -> f64 {
    let w = (x + 1.0).rem_euclid(2.0) - 1.0;
    // rem_euclid can round up to exactly 2.0 for tiny negative inputs
    if w >= 1.0 {
        w - 2.0
    } else {
        w
    }
}

/// Geometry and large-scale fading of one line-of-sight link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Elevation angle in radians, within `[-pi/2, pi/2]`.
    pub elevation: f64,
    /// Azimuth angle in radians, within `[0, 2 pi)`.
    pub azimuth: f64,
    /// Link distance in meters.
    pub distance: f64,
    pub path_loss_exponent: f64,
    /// Linear power gain at the 1 m reference distance.
    pub reference_gain_xi0: f64,
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "link distance must be positive, got {}",
                self.distance
            )));
        }
        if !(self.reference_gain_xi0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "reference gain must be positive, got {}",
                self.reference_gain_xi0
            )));
        }
        if !(-PI / 2.0..=PI / 2.0).contains(&self.elevation) {
            return Err(Error::InvalidArgument(format!(
                "elevation {} outside [-pi/2, pi/2]",
                self.elevation
            )));
        }
        if !(0.0..2.0 * PI).contains(&self.azimuth) {
            return Err(Error::InvalidArgument(format!(
                "azimuth {} outside [0, 2pi)",
                self.azimuth
            )));
        }
        Ok(())
    }

    /// Average power gain `xi0 * d^(-exponent)`.
    pub fn mean_power_gain(&self) -> f64 {
        self.reference_gain_xi0 * self.distance.powf(-self.path_loss_exponent)
    }

    /// Normalized spatial frequency along the array x-axis.
    pub fn phase_x(&self, spacing_over_lambda: f64) -> SteeringPhase {
        SteeringPhase(2.0 * spacing_over_lambda * self.elevation.cos() * self.azimuth.cos())
    }

    /// Normalized spatial frequency along the array y-axis.
    pub fn phase_y(&self, spacing_over_lambda: f64) -> SteeringPhase {
        SteeringPhase(2.0 * spacing_over_lambda * self.elevation.cos() * self.azimuth.sin())
    }
}

/// `s(phi, M)`: entry `m` is `exp(-j m pi phi)`.
pub fn steering_vector(phi: SteeringPhase, m: usize) -> Result<Vec<Complex64>> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "steering vector needs at least one element".into(),
        ));
    }
    Ok((0..m)
        .map(|k| Complex64::from_polar(1.0, -(k as f64) * PI * phi.0))
        .collect())
}

/// UPA response `s(phi, Mx) ⊗ s(varphi, My)`.
pub fn array_response(
    elevation: f64,
    azimuth: f64,
    mx: usize,
    my: usize,
    spacing_over_lambda: f64,
) -> Result<Vec<Complex64>> {
    let phi = SteeringPhase(2.0 * spacing_over_lambda * elevation.cos() * azimuth.cos());
    let varphi = SteeringPhase(2.0 * spacing_over_lambda * elevation.cos() * azimuth.sin());
    let sx = steering_vector(phi, mx)?;
    let sy = steering_vector(varphi, my)?;
    Ok(kron(&sx, &sy))
}

pub fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

/// `v cos(elevation) cos(azimuth) / lambda`.
pub fn doppler_frequency(speed: f64, elevation: f64, azimuth: f64, wavelength: f64) -> f64 {
    speed * elevation.cos() * azimuth.cos() / wavelength
}

/// Draws a complex path gain with deterministic magnitude
/// `sqrt(xi0 d^-exponent)` and uniform phase.
pub fn sample_path_gain<R: Rng + ?Sized>(geometry: &LinkGeometry, rng: &mut R) -> Complex64 {
    let phase = rng.gen_range(0.0..2.0 * PI);
    Complex64::from_polar(geometry.mean_power_gain().sqrt(), phase)
}

/// Parameters of the cascaded BS-IRS-user channel, constant over a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadedChannelParams {
    /// Product path gain `alpha_BI * alpha_IU`.
    pub beta: Complex64,
    /// Doppler frequency of the BS-IRS link in Hz.
    pub doppler_fd: f64,
    /// Effective phase along the x-axis, canonical in `[-1, 1)`.
    pub psi_x: SteeringPhase,
}

impl CascadedChannelParams {
    /// Scalar `beta exp(j 2 pi f_d n Tc)` multiplying `s(psi_x)^H v`.
    pub fn rotated_gain(&self, n: usize, tc: f64) -> Complex64 {
        self.beta * Complex64::from_polar(1.0, 2.0 * PI * self.doppler_fd * n as f64 * tc)
    }

    /// Cascaded channel vector `c(n)` for block `n` (1-based), oriented so
    /// that `c(n)^H v = beta exp(j 2 pi f_d n Tc) s(psi_x)^H v`.
    pub fn cascaded_channel(&self, n: usize, tc: f64, mx: usize) -> Result<Vec<Complex64>> {
        let g = self.rotated_gain(n, tc).conj();
        Ok(steering_vector(self.psi_x, mx)?
            .into_iter()
            .map(|s| g * s)
            .collect())
    }
}

/// Draws the cascaded-channel triple for one frame. Only `My = 1` arrays are
/// supported by the protocol.
pub fn cascaded_params<R: Rng + ?Sized>(
    bs_irs: &LinkGeometry,
    irs_user: &LinkGeometry,
    speed: f64,
    wavelength: f64,
    spacing_over_lambda: f64,
    my: usize,
    rng: &mut R,
) -> Result<CascadedChannelParams> {
    if my != 1 {
        return Err(Error::InvalidArgument(format!(
            "cascaded channel reduction requires My = 1, got {my}"
        )));
    }
    if !(wavelength > 0.0) {
        return Err(Error::InvalidArgument("wavelength must be positive".into()));
    }
    bs_irs.validate()?;
    irs_user.validate()?;
    let alpha_bi = sample_path_gain(bs_irs, rng);
    let alpha_iu = sample_path_gain(irs_user, rng);
    let psi_tilde =
        irs_user.phase_x(spacing_over_lambda).0 - bs_irs.phase_x(spacing_over_lambda).0;
    Ok(CascadedChannelParams {
        beta: alpha_bi * alpha_iu,
        doppler_fd: doppler_frequency(speed, bs_irs.elevation, bs_irs.azimuth, wavelength),
        psi_x: SteeringPhase(wrap_phase(psi_tilde)),
    })
}

/// Zeroth-order Bessel function of the first kind.
pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

/// Generator of block-rate Rayleigh sequences with Jakes autocorrelation
/// `R(k) = P J0(2 pi f_max k Tc)`.
///
/// The target covariance matrix is factored once (symmetric eigensolver,
/// negative round-off eigenvalues clamped to zero) and reused for every
/// draw, so each sequence has the target autocorrelation exactly on the
/// block grid.
#[derive(Debug, Clone)]
pub struct JakesGenerator {
    len: usize,
    // Row-major N x N factor with L L^T = covariance.
    factor: Vec<f64>,
    mean_power: f64,
    fully_correlated: bool,
}

impl JakesGenerator {
    pub fn new(len: usize, tc: f64, f_max: f64, mean_power: f64) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidArgument("sequence length must be >= 1".into()));
        }
        if !(mean_power > 0.0) {
            return Err(Error::InvalidArgument("mean power must be positive".into()));
        }
        if !(f_max >= 0.0) || !(tc > 0.0) {
            return Err(Error::InvalidArgument(
                "need f_max >= 0 and Tc > 0".into(),
            ));
        }
        if f_max == 0.0 {
            return Ok(JakesGenerator {
                len,
                factor: Vec::new(),
                mean_power,
                fully_correlated: true,
            });
        }

        let acf: Vec<f64> = (0..len)
            .map(|k| bessel_j0(2.0 * PI * f_max * k as f64 * tc))
            .collect();
        let cov = DMatrix::from_fn(len, len, |i, j| acf[i.abs_diff(j)]);
        let eig = SymmetricEigen::new(cov);
        let mut factor = vec![0.0; len * len];
        for j in 0..len {
            let scale = eig.eigenvalues[j].max(0.0).sqrt();
            for i in 0..len {
                factor[i * len + j] = eig.eigenvectors[(i, j)] * scale;
            }
        }
        Ok(JakesGenerator {
            len,
            factor,
            mean_power,
            fully_correlated: false,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        let amp = (self.mean_power / 2.0).sqrt();
        if self.fully_correlated {
            let z = complex_gaussian(rng) * amp;
            return vec![z; self.len];
        }
        let white: Vec<Complex64> = (0..self.len).map(|_| complex_gaussian(rng)).collect();
        (0..self.len)
            .map(|i| {
                let row = &self.factor[i * self.len..(i + 1) * self.len];
                row.iter().zip(&white).map(|(&l, &z)| z * l).sum::<Complex64>() * amp
            })
            .collect()
    }
}

/// Unit-variance-per-component complex Gaussian `(x + j y)` with x, y ~ N(0, 1).
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Circularly symmetric Gaussian with total variance `variance`.
pub fn cscg<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    complex_gaussian(rng) * (variance / 2.0).sqrt()
}

/// One-shot convenience wrapper around [`JakesGenerator`].
pub fn sample_direct_channel_sequence<R: Rng + ?Sized>(
    n: usize,
    tc: f64,
    f_max: f64,
    mean_power: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    Ok(JakesGenerator::new(n, tc, f_max, mean_power)?.sample(rng))
}

/// IRS refraction coefficients. Either every entry has unit modulus, or
/// every entry is zero (IRS switched off).
#[derive(Debug, Clone, PartialEq)]
pub struct RefractionVector {
    coefficients: Vec<Complex64>,
}

impl RefractionVector {
    pub fn off(m: usize) -> Self {
        RefractionVector {
            coefficients: vec![Complex64::new(0.0, 0.0); m],
        }
    }

    pub fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        RefractionVector {
            coefficients: phases
                .into_iter()
                .map(|p| Complex64::from_polar(1.0, p))
                .collect(),
        }
    }

    /// Independent uniform phases on `[0, 2 pi)`.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        Self::from_phases((0..m).map(|_| rng.gen_range(0.0..2.0 * PI)).collect::<Vec<_>>())
    }

    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        let all_off = coefficients.iter().all(|c| c.norm() == 0.0);
        let all_unit = coefficients
            .iter()
            .all(|c| (c.norm() - 1.0).abs() <= UNIT_MODULUS_TOL);
        if !(all_off || all_unit) {
            return Err(Error::InvalidArgument(
                "refraction coefficients must all be unit modulus or all zero".into(),
            ));
        }
        Ok(RefractionVector { coefficients })
    }

    /// Common phase rotation of every element, e.g. the training shifts `mu_i`.
    pub fn rotated(&self, phase: Complex64) -> Self {
        RefractionVector {
            coefficients: self.coefficients.iter().map(|&c| c * phase).collect(),
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn is_off(&self) -> bool {
        self.coefficients.iter().all(|c| c.norm() == 0.0)
    }
}

/// `c^H v + h_d`.
pub fn effective_channel(
    c_n: &[Complex64],
    v: &RefractionVector,
    h_d: Complex64,
) -> Result<Complex64> {
    if c_n.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: c_n.len(),
            actual: v.len(),
        });
    }
    Ok(inner(c_n, v.coefficients()) + h_d)
}

/// Conjugate inner product `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Ground truth of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameChannel {
    pub cascaded: CascadedChannelParams,
    /// `h_d(n)` for n = 1..=N, stored at index n - 1.
    pub direct: Vec<Complex64>,
    pub block_duration_tc: f64,
}

impl FrameChannel {
    pub fn blocks(&self) -> usize {
        self.direct.len()
    }

    pub fn direct_at(&self, n: usize) -> Complex64 {
        self.direct[n - 1]
    }

    pub fn cascaded_at(&self, n: usize, mx: usize) -> Result<Vec<Complex64>> {
        self.cascaded.cascaded_channel(n, self.block_duration_tc, mx)
    }

    /// True effective channel at block `n` under refraction `v`.
    pub fn effective(&self, n: usize, v: &RefractionVector) -> Result<Complex64> {
        let c = self.cascaded_at(n, v.len())?;
        effective_channel(&c, v, self.direct_at(n))
    }

    /// IRS-refracted part `c(n)^H v` alone.
    pub fn refracted(&self, n: usize, v: &RefractionVector) -> Result<Complex64> {
        Ok(self.effective(n, v)? - self.direct_at(n))
    }
}

/// Everything needed to draw [`FrameChannel`]s for a fixed system setup.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub bs_irs: LinkGeometry,
    pub irs_user: LinkGeometry,
    pub speed: f64,
    pub wavelength: f64,
    pub spacing_over_lambda: f64,
    pub my: usize,
    pub block_duration_tc: f64,
    pub direct: JakesGenerator,
}

impl ChannelModel {
    pub fn sample_frame<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FrameChannel> {
        let cascaded = cascaded_params(
            &self.bs_irs,
            &self.irs_user,
            self.speed,
            self.wavelength,
            self.spacing_over_lambda,
            self.my,
            rng,
        )?;
        Ok(FrameChannel {
            cascaded,
            direct: self.direct.sample(rng),
            block_duration_tc: self.block_duration_tc,
        })
    }
}
