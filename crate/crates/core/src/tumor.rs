//! Frequency-domain tumour-response synthesis and injection.
//!
//! The injected response for one antenna pair and tumour position p0 is
//!
//! ```text
//! Rt(p0, w) = Gamma * R(w) * exp(-j*(k_im*(d_im_t - d_im_d) + k_br*(d_br_t - d_br_d)))
//! ```
//!
//! where R(w) is the spectrum of the received signal, d_* are the path
//! lengths through immersion medium and breast tissue for the direct path
//! and the path via the tumour, and the wavenumbers come from the Debye
//! permittivity of breast tissue. The principal square root keeps
//! |exp(-j*k*d)| <= 1 for d >= 0, so propagation attenuates.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::signal::{AntennaPairId, SignalError, TimeSeries};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 2.99792458e8;
/// Permittivity of free space (F/m).
pub const EPSILON_0: f64 = 8.854e-12;

#[derive(Debug, thiserror::Error)]
pub enum TumorError {
    #[error("invalid Debye parameters: {0}")]
    BadDebye(String),
    #[error("angular frequency must be positive for the Debye model")]
    ZeroFrequency,
    #[error("tumour position {0:?} is not strictly inside the breast hemisphere")]
    TumourOutsideBreast([f64; 3]),
    #[error("antenna {0} not present in geometry")]
    UnknownAntenna(u8),
    #[error("gamma must be non-negative, got {0}")]
    BadGamma(f64),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// Single-pole Debye parameters with a static-conductivity term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DebyeParams {
    pub eps_inf: f64,
    pub delta_eps: f64,
    /// Pole relaxation constant (seconds).
    pub tau: f64,
    /// Static conductivity (S/m).
    pub sigma_s: f64,
}

impl DebyeParams {
    pub fn new(eps_inf: f64, delta_eps: f64, tau: f64, sigma_s: f64) -> Result<Self, TumorError> {
        if !(eps_inf >= 1.0) {
            return Err(TumorError::BadDebye(format!("eps_inf must be >= 1, got {eps_inf}")));
        }
        if !(delta_eps >= 0.0) {
            return Err(TumorError::BadDebye(format!(
                "delta_eps must be >= 0, got {delta_eps}"
            )));
        }
        if !(tau > 0.0) {
            return Err(TumorError::BadDebye(format!("tau must be > 0, got {tau}")));
        }
        if !(sigma_s >= 0.0) {
            return Err(TumorError::BadDebye(format!("sigma_s must be >= 0, got {sigma_s}")));
        }
        Ok(Self { eps_inf, delta_eps, tau, sigma_s })
    }
}

/// Complex relative permittivity at angular frequency `omega`.
pub fn debye(p: &DebyeParams, omega: f64) -> Result<Complex64, TumorError> {
    if !(omega > 0.0) {
        return Err(TumorError::ZeroFrequency);
    }
    let relaxation = Complex64::new(p.delta_eps, 0.0) / Complex64::new(1.0, omega * p.tau);
    let conduction = Complex64::new(p.sigma_s, 0.0) / Complex64::new(0.0, omega * EPSILON_0);
    Ok(Complex64::new(p.eps_inf, 0.0) + relaxation + conduction)
}

/// Complex wavenumber k = sqrt(eps) * omega / c with the principal root.
pub fn wavenumber(eps: Complex64, omega: f64) -> Complex64 {
    eps.sqrt() * (omega / SPEED_OF_LIGHT)
}

/// Hemispherical breast model with antennas on a surrounding bowl.
///
/// The breast occupies {|p| < breast_radius, z < 0}; the flat face is the
/// z = 0 plane. Antenna positions are indexed by antenna id (1-based).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Geometry {
    pub breast_radius: f64,
    pub antenna_positions: Vec<[f64; 3]>,
    /// Real relative permittivity of the immersion medium.
    pub eps_im: f64,
}

impl Geometry {
    /// Two rings of eight antennas on a bowl of radius
    /// `breast_radius + standoff`, at the given ring depths.
    pub fn two_rings(breast_radius: f64, standoff: f64, ring_z: [f64; 2], eps_im: f64) -> Self {
        let bowl = breast_radius + standoff;
        let mut antenna_positions = Vec::with_capacity(16);
        for (ring, &z) in ring_z.iter().enumerate() {
            let rho = (bowl * bowl - z * z).sqrt();
            for k in 0..8 {
                let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.5 * ring as f64) / 8.0;
                antenna_positions.push([rho * angle.cos(), rho * angle.sin(), z]);
            }
        }
        Self { breast_radius, antenna_positions, eps_im }
    }

    pub fn antenna(&self, id: u8) -> Result<[f64; 3], TumorError> {
        self.antenna_positions
            .get(id as usize - 1)
            .copied()
            .ok_or(TumorError::UnknownAntenna(id))
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        norm(p) < self.breast_radius && p[2] < 0.0
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry::two_rings(0.07, 0.01, [-0.01, -0.04], 3.0)
    }
}

/// Immersion/breast path lengths for the direct path and the tumour path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLengths {
    pub d_im_t: f64,
    pub d_br_t: f64,
    pub d_im_d: f64,
    pub d_br_d: f64,
}

fn norm(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Splits the segment a -> b at the sphere |p| = radius into the length
/// inside the sphere and the length outside.
fn segment_split(a: [f64; 3], b: [f64; 3], radius: f64) -> (f64, f64) {
    let d = sub(b, a);
    let len = norm(d);
    if len == 0.0 {
        return (0.0, 0.0);
    }
    // |a + t*d|^2 = radius^2, t in [0, 1].
    let aa = dot(d, d);
    let bb = 2.0 * dot(a, d);
    let cc = dot(a, a) - radius * radius;
    let disc = bb * bb - 4.0 * aa * cc;
    if disc <= 0.0 {
        // No crossing: entirely inside or outside.
        return if norm(a) < radius { (len, 0.0) } else { (0.0, len) };
    }
    let sq = disc.sqrt();
    let t1 = ((-bb - sq) / (2.0 * aa)).clamp(0.0, 1.0);
    let t2 = ((-bb + sq) / (2.0 * aa)).clamp(0.0, 1.0);
    let inside = (t2 - t1) * len;
    (inside, len - inside)
}

/// Path lengths through immersion medium and breast tissue for the direct
/// path tx -> rx and the tumour path tx -> p0 -> rx.
pub fn path_lengths(
    g: &Geometry,
    pair: AntennaPairId,
    p0: [f64; 3],
) -> Result<PathLengths, TumorError> {
    if !g.contains(p0) {
        return Err(TumorError::TumourOutsideBreast(p0));
    }
    let tx = g.antenna(pair.tx)?;
    let rx = g.antenna(pair.rx)?;
    let (br_leg1, im_leg1) = segment_split(tx, p0, g.breast_radius);
    let (br_leg2, im_leg2) = segment_split(p0, rx, g.breast_radius);
    let (br_d, im_d) = segment_split(tx, rx, g.breast_radius);
    Ok(PathLengths {
        d_im_t: im_leg1 + im_leg2,
        d_br_t: br_leg1 + br_leg2,
        d_im_d: im_d,
        d_br_d: br_d,
    })
}

/// Adds the simulated tumour response to a measurement.
///
/// The response spectrum is built on the positive-frequency bins and
/// mirrored with Hermitian symmetry, so the output stays real. The DC bin
/// uses the zero-frequency limit of the phase factor (which is 1).
pub fn inject(
    x: &TimeSeries,
    g: &Geometry,
    pair: AntennaPairId,
    p0: [f64; 3],
    gamma: f64,
    breast: &DebyeParams,
) -> Result<TimeSeries, TumorError> {
    if !(gamma >= 0.0) {
        return Err(TumorError::BadGamma(gamma));
    }
    let paths = path_lengths(g, pair, p0)?;
    let delta_im = paths.d_im_t - paths.d_im_d;
    let delta_br = paths.d_br_t - paths.d_br_d;

    let n = x.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    let mut spectrum: Vec<Complex64> =
        x.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut spectrum);

    let df = 1.0 / (n as f64 * x.dt());
    let sqrt_eps_im = Complex64::new(g.eps_im, 0.0).sqrt();
    let mut response = vec![Complex64::new(0.0, 0.0); n];
    // Zero-frequency limit of the phase factor: k -> 0, so the factor is 1.
    response[0] = Complex64::new(gamma, 0.0) * spectrum[0];
    for m in 1..=n / 2 {
        let omega = 2.0 * std::f64::consts::PI * df * m as f64;
        let k_im = sqrt_eps_im * (omega / SPEED_OF_LIGHT);
        let k_br = wavenumber(debye(breast, omega)?, omega);
        let phase = (-Complex64::i() * (k_im * delta_im + k_br * delta_br)).exp();
        let mut r = Complex64::new(gamma, 0.0) * spectrum[m] * phase;
        if n % 2 == 0 && m == n / 2 {
            // Nyquist bin must stay real for a real output.
            r = Complex64::new(r.re, 0.0);
        }
        response[m] = r;
        if m != n - m {
            response[n - m] = r.conj();
        }
    }

    ifft.process(&mut response);
    let scale = 1.0 / n as f64;
    let samples: Vec<f64> = x
        .samples()
        .iter()
        .zip(&response)
        .map(|(&v, r)| v + r.re * scale)
        .collect();
    Ok(TimeSeries::new(samples, x.dt())?)
}
