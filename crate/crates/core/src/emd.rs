//! Empirical mode decomposition by iterative sifting.
//!
//! A decomposition candidate is accepted as an intrinsic mode function when
//! it satisfies both IMF conditions:
//!
//! - C1: the number of extrema and the number of zero-crossings differ by at
//!   most one;
//! - C2: the mean of the upper and lower envelopes is (numerically) zero.
//!
//! C2 is tested with the usual surrogate: the RMS of the mean envelope must
//! stay below `c2_tol` times the RMS of the candidate.

use serde::{Deserialize, Serialize};

use crate::signal::TimeSeries;

#[derive(Debug, thiserror::Error)]
pub enum EmdError {
    #[error("insufficient extrema for envelopes: {maxima} maxima, {minima} minima (need 2 of each)")]
    InsufficientExtrema { maxima: usize, minima: usize },
    #[error("signal too short for sifting: {0} samples (need at least 8)")]
    TooShort(usize),
}

/// Envelope boundary policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryPolicy {
    /// Mirror the two nearest extrema across each endpoint before fitting.
    MirrorExtrema,
    /// Pin the envelope to the signal's endpoint values.
    ClampEndpoints,
}

/// Envelope interpolation kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interpolation {
    NaturalCubic,
    Linear,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiftConfig {
    /// Maximum number of IMFs to extract.
    pub n_imf_max: usize,
    /// Maximum sifting iterations per mode; on exhaustion the current
    /// candidate is accepted and flagged.
    pub max_sift_iters: usize,
    /// Relative tolerance of the mean-envelope test (C2 surrogate).
    pub c2_tol: f64,
    pub boundary: BoundaryPolicy,
    pub interpolation: Interpolation,
}

impl Default for SiftConfig {
    fn default() -> Self {
        Self {
            n_imf_max: 5,
            max_sift_iters: 64,
            c2_tol: 0.05,
            boundary: BoundaryPolicy::MirrorExtrema,
            interpolation: Interpolation::NaturalCubic,
        }
    }
}

/// Ordered IMFs plus residue from one sifting run.
#[derive(Debug, Clone)]
pub struct ImfSet {
    pub imfs: Vec<TimeSeries>,
    pub residue: TimeSeries,
    pub source_len: usize,
    /// Per-IMF flag: true when the mode was accepted without passing the
    /// IMF conditions (sifting did not converge).
    pub warned: Vec<bool>,
}

impl ImfSet {
    pub fn any_warned(&self) -> bool {
        self.warned.iter().any(|w| *w)
    }

    /// Sum of all IMFs plus the residue.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residue.samples().to_vec();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf.samples()) {
                *o += v;
            }
        }
        out
    }
}

/// Interior strict local maxima and minima (0-based indices).
///
/// A flat plateau contributes its midpoint index; plateaus touching either
/// end of the signal are not interior and contribute nothing.
pub fn find_extrema(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let n = x.len();
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    if n < 3 {
        return (maxima, minima);
    }
    let mut run_start = 0usize;
    let mut i = 1usize;
    while i <= n {
        if i == n || x[i] != x[run_start] {
            let run_end = i - 1;
            if run_start > 0 && run_end < n - 1 {
                let before = x[run_start - 1];
                let after = x[run_end + 1];
                let v = x[run_start];
                let mid = (run_start + run_end) / 2;
                if v > before && v > after {
                    maxima.push(mid);
                } else if v < before && v < after {
                    minima.push(mid);
                }
            }
            run_start = i;
        }
        i += 1;
    }
    (maxima, minima)
}

/// Extrema/zero-crossing census for condition C1.
#[derive(Debug, Clone, Copy)]
pub struct C1Count {
    pub n_extrema: usize,
    pub n_zero_crossings: usize,
    pub passes: bool,
}

/// Counts extrema and zero crossings and applies condition C1.
///
/// A zero crossing is a sign change between consecutive samples; runs of
/// exact zeros between opposite signs count once.
pub fn count_c1(x: &[f64]) -> C1Count {
    let (maxima, minima) = find_extrema(x);
    let n_extrema = maxima.len() + minima.len();
    let mut n_zero_crossings = 0usize;
    let mut last_sign = 0i8;
    for &v in x {
        let sign = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                n_zero_crossings += 1;
            }
            last_sign = sign;
        }
    }
    let passes = n_extrema.abs_diff(n_zero_crossings) <= 1;
    C1Count { n_extrema, n_zero_crossings, passes }
}

/// Natural cubic spline through `(xs, ys)`, evaluated at 0..n-1.
///
/// `xs` must be strictly increasing and cover [0, n-1].
fn natural_cubic_eval(xs: &[f64], ys: &[f64], n: usize) -> Vec<f64> {
    let m = xs.len();
    if m == 2 {
        return linear_eval(xs, ys, n);
    }
    // Second derivatives via the standard tridiagonal (Thomas) solve with
    // natural end conditions.
    let mut c = vec![0.0; m];
    let mut l = vec![1.0; m];
    let mut mu = vec![0.0; m];
    let mut z = vec![0.0; m];
    let h: Vec<f64> = (0..m - 1).map(|i| xs[i + 1] - xs[i]).collect();
    for i in 1..m - 1 {
        let alpha = 3.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
        l[i] = 2.0 * (xs[i + 1] - xs[i - 1]) - h[i - 1] * mu[i - 1];
        mu[i] = h[i] / l[i];
        z[i] = (alpha - h[i - 1] * z[i - 1]) / l[i];
    }
    for j in (1..m - 1).rev() {
        c[j] = z[j] - mu[j] * c[j + 1];
    }
    let mut out = vec![0.0; n];
    let mut seg = 0usize;
    for (t, o) in out.iter_mut().enumerate() {
        let tf = t as f64;
        while seg + 2 < m && xs[seg + 1] < tf {
            seg += 1;
        }
        let dx = tf - xs[seg];
        let hs = h[seg];
        let b = (ys[seg + 1] - ys[seg]) / hs - hs * (c[seg + 1] + 2.0 * c[seg]) / 3.0;
        let d = (c[seg + 1] - c[seg]) / (3.0 * hs);
        *o = ys[seg] + b * dx + c[seg] * dx * dx + d * dx * dx * dx;
    }
    out
}

fn linear_eval(xs: &[f64], ys: &[f64], n: usize) -> Vec<f64> {
    let m = xs.len();
    let mut out = vec![0.0; n];
    let mut seg = 0usize;
    for (t, o) in out.iter_mut().enumerate() {
        let tf = t as f64;
        while seg + 2 < m && xs[seg + 1] < tf {
            seg += 1;
        }
        let w = (tf - xs[seg]) / (xs[seg + 1] - xs[seg]);
        *o = ys[seg] + w * (ys[seg + 1] - ys[seg]);
    }
    out
}

/// Knot list for one envelope after boundary augmentation.
fn envelope_knots(
    x: &[f64],
    extrema: &[usize],
    boundary: BoundaryPolicy,
) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut xs = Vec::with_capacity(extrema.len() + 4);
    let mut ys = Vec::with_capacity(extrema.len() + 4);
    match boundary {
        BoundaryPolicy::MirrorExtrema => {
            // Interior extrema have index >= 1, so reflections across the
            // endpoints never collide with the originals.
            let (e0, e1) = (extrema[0], extrema[1]);
            xs.push(-(e1 as f64));
            ys.push(x[e1]);
            xs.push(-(e0 as f64));
            ys.push(x[e0]);
            for &e in extrema {
                xs.push(e as f64);
                ys.push(x[e]);
            }
            let (el, ep) = (extrema[extrema.len() - 1], extrema[extrema.len() - 2]);
            let edge = 2.0 * (n as f64 - 1.0);
            xs.push(edge - el as f64);
            ys.push(x[el]);
            xs.push(edge - ep as f64);
            ys.push(x[ep]);
        }
        BoundaryPolicy::ClampEndpoints => {
            xs.push(0.0);
            ys.push(x[0]);
            for &e in extrema {
                xs.push(e as f64);
                ys.push(x[e]);
            }
            xs.push(n as f64 - 1.0);
            ys.push(x[n - 1]);
        }
    }
    (xs, ys)
}

/// Upper and lower envelopes through the given extrema.
///
/// Envelopes are interpolants through the extrema extended over the whole
/// index range by the boundary policy. Spline overshoot means the upper
/// envelope is not guaranteed to dominate the lower one pointwise.
pub fn envelopes(
    x: &[f64],
    maxima: &[usize],
    minima: &[usize],
    boundary: BoundaryPolicy,
    interpolation: Interpolation,
) -> Result<(Vec<f64>, Vec<f64>), EmdError> {
    if maxima.len() < 2 || minima.len() < 2 {
        return Err(EmdError::InsufficientExtrema { maxima: maxima.len(), minima: minima.len() });
    }
    let n = x.len();
    let eval = |extrema: &[usize]| {
        let (xs, ys) = envelope_knots(x, extrema, boundary);
        match interpolation {
            Interpolation::NaturalCubic => natural_cubic_eval(&xs, &ys, n),
            Interpolation::Linear => linear_eval(&xs, &ys, n),
        }
    };
    Ok((eval(maxima), eval(minima)))
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Decomposes `x` into up to `cfg.n_imf_max` IMFs plus a residue.
///
/// Extraction stops early when the residue has fewer than 3 extrema. A mode
/// whose sifting does not converge within `max_sift_iters` is accepted as-is
/// and flagged in [`ImfSet::warned`]; decomposition never aborts.
pub fn sift(x: &TimeSeries, cfg: &SiftConfig) -> Result<ImfSet, EmdError> {
    let n = x.len();
    if n < 8 {
        return Err(EmdError::TooShort(n));
    }
    let mut residue = x.samples().to_vec();
    let mut imfs = Vec::new();
    let mut warned = Vec::new();

    while imfs.len() < cfg.n_imf_max {
        let (maxima, minima) = find_extrema(&residue);
        if maxima.len() + minima.len() < 3 {
            break;
        }
        let (candidate, mode_warned) = extract_mode(&residue, cfg);
        for (r, d) in residue.iter_mut().zip(&candidate) {
            *r -= d;
        }
        imfs.push(TimeSeries::new(candidate, x.dt()).expect("candidate has source length"));
        warned.push(mode_warned);
    }

    Ok(ImfSet {
        imfs,
        residue: TimeSeries::new(residue, x.dt()).expect("residue has source length"),
        source_len: n,
        warned,
    })
}

/// Sifts one IMF candidate out of `residue`. Returns the accepted candidate
/// and whether it was accepted without passing the IMF conditions.
fn extract_mode(residue: &[f64], cfg: &SiftConfig) -> (Vec<f64>, bool) {
    let mut z = residue.to_vec();
    let mut iters = 0usize;
    loop {
        let (maxima, minima) = find_extrema(&z);
        if maxima.len() < 2 || minima.len() < 2 {
            // Cannot build envelopes; nothing left to sift out. C2 is vacuous
            // without an oscillation, so the candidate stands or falls on C1.
            let ok = count_c1(&z).passes;
            return (z, !ok);
        }
        let (e_max, e_min) =
            envelopes(&z, &maxima, &minima, cfg.boundary, cfg.interpolation).expect("checked");
        let mean_env: Vec<f64> =
            e_max.iter().zip(&e_min).map(|(a, b)| 0.5 * (a + b)).collect();
        let z_rms = rms(&z);
        let c1 = count_c1(&z).passes;
        let c2 = z_rms == 0.0 || rms(&mean_env) < cfg.c2_tol * z_rms;
        if c1 && c2 {
            return (z, false);
        }
        for (zi, m) in z.iter_mut().zip(&mean_env) {
            *zi -= m;
        }
        iters += 1;
        if iters >= cfg.max_sift_iters {
            return (z, true);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::TimeSeries;
    use std::f64::consts::PI;

    fn series(samples: Vec<f64>) -> TimeSeries {
        TimeSeries::new(samples, 1.0).unwrap()
    }

    fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn extrema_single_hump_and_dip() {
        // 1-based positions 2 and 4 are 0-based 1 and 3.
        let (maxima, minima) = find_extrema(&[0.0, 1.0, 0.0, -1.0, 0.0]);
        assert_eq!(maxima, vec![1]);
        assert_eq!(minima, vec![3]);
    }

    #[test]
    fn extrema_monotone_none() {
        let (maxima, minima) = find_extrema(&[0.0, 1.0, 2.0, 3.0]);
        assert!(maxima.is_empty());
        assert!(minima.is_empty());
    }

    #[test]
    fn extrema_plateau_midpoint() {
        // Plateau over 1-based samples 2..3; midpoint rule picks 2 (0-based 1).
        let (maxima, minima) = find_extrema(&[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(maxima, vec![1]);
        assert!(minima.is_empty());
    }

    #[test]
    fn extrema_boundary_plateau_skipped() {
        let (maxima, minima) = find_extrema(&[1.0, 1.0, 0.0, 1.0, 1.0]);
        assert!(maxima.is_empty());
        assert_eq!(minima, vec![2]);
    }

    #[test]
    fn c1_alternating() {
        let c = count_c1(&[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(c.n_extrema, 2);
        assert_eq!(c.n_zero_crossings, 3);
        assert!(c.passes);
    }

    #[test]
    fn c1_sinusoid_two_periods() {
        let x: Vec<f64> = (0..256).map(|i| (2.0 * PI * 2.0 * i as f64 / 256.0).sin()).collect();
        let c = count_c1(&x);
        assert!(c.n_extrema.abs_diff(c.n_zero_crossings) <= 1);
        assert!(c.passes);
    }

    #[test]
    fn c1_no_crossings_fails() {
        let c = count_c1(&[1.0, 2.0, 1.0, 2.0, 1.0]);
        assert_eq!(c.n_extrema, 3);
        assert_eq!(c.n_zero_crossings, 0);
        assert!(!c.passes);
    }

    #[test]
    fn c1_exact_zero_counts_once() {
        let c = count_c1(&[1.0, 0.0, -1.0, 0.0, 0.0, 1.0]);
        assert_eq!(c.n_zero_crossings, 2);
    }

    #[test]
    fn envelope_mean_of_offset_sinusoid() {
        // x = 0.5 + sin; analytic envelopes are 1.5 and -0.5, mean 0.5.
        let n = 512;
        let x: Vec<f64> =
            (0..n).map(|i| 0.5 + (2.0 * PI * 8.0 * i as f64 / n as f64).sin()).collect();
        let (maxima, minima) = find_extrema(&x);
        let (e_max, e_min) = envelopes(
            &x,
            &maxima,
            &minima,
            BoundaryPolicy::MirrorExtrema,
            Interpolation::NaturalCubic,
        )
        .unwrap();
        let lo = n / 10;
        let hi = n - n / 10;
        let max_dev = (lo..hi)
            .map(|i| (0.5 * (e_max[i] + e_min[i]) - 0.5).abs())
            .fold(0.0f64, f64::max);
        assert!(max_dev < 0.05, "interior mean-envelope deviation {max_dev}");
    }

    #[test]
    fn envelope_mean_of_triangle_wave() {
        let period = 32usize;
        let n = 512;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i % period) as f64 / period as f64;
                if p < 0.5 {
                    4.0 * p - 1.0
                } else {
                    3.0 - 4.0 * p
                }
            })
            .collect();
        let (maxima, minima) = find_extrema(&x);
        let (e_max, e_min) = envelopes(
            &x,
            &maxima,
            &minima,
            BoundaryPolicy::MirrorExtrema,
            Interpolation::NaturalCubic,
        )
        .unwrap();
        let lo = n / 10;
        let hi = n - n / 10;
        let max_dev =
            (lo..hi).map(|i| (0.5 * (e_max[i] + e_min[i])).abs()).fold(0.0f64, f64::max);
        assert!(max_dev < 0.05, "interior mean-envelope deviation {max_dev}");
    }

    #[test]
    fn envelope_single_maximum_is_insufficient() {
        let x = [0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0];
        let (maxima, minima) = find_extrema(&x);
        assert_eq!(maxima.len(), 1);
        let err = envelopes(
            &x,
            &maxima,
            &minima,
            BoundaryPolicy::MirrorExtrema,
            Interpolation::NaturalCubic,
        )
        .unwrap_err();
        assert!(matches!(err, EmdError::InsufficientExtrema { .. }));
    }

    #[test]
    fn sift_pure_sinusoid_is_one_imf() {
        let n = 512;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 8.0 * i as f64 / n as f64).sin()).collect();
        let set = sift(&series(x.clone()), &SiftConfig::default()).unwrap();
        assert!(!set.imfs.is_empty());
        let d1 = set.imfs[0].samples();
        let dot: f64 = d1.iter().zip(&x).map(|(a, b)| a * b).sum();
        let corr = dot / (d1.iter().map(|v| v * v).sum::<f64>().sqrt()
            * x.iter().map(|v| v * v).sum::<f64>().sqrt());
        assert!(corr > 0.99, "correlation {corr}");
        let res_norm = set.residue.samples().iter().map(|v| v * v).sum::<f64>().sqrt();
        let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res_norm < 0.05 * x_norm, "residue {res_norm} vs {x_norm}");
    }

    #[test]
    fn sift_constant_has_no_imfs() {
        let set = sift(&series(vec![3.25; 64]), &SiftConfig::default()).unwrap();
        assert!(set.imfs.is_empty());
        assert_eq!(set.residue.samples(), &[3.25; 64][..]);
    }

    #[test]
    fn sift_two_tone_separation() {
        // The two constructed components are the oracle.
        let n = 1024;
        let t: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let hi: Vec<f64> = t.iter().map(|&t| (2.0 * PI * 32.0 * t).sin()).collect();
        let lo: Vec<f64> = t.iter().map(|&t| (2.0 * PI * 4.0 * t).sin()).collect();
        let x: Vec<f64> = hi.iter().zip(&lo).map(|(a, b)| a + b).collect();
        let set = sift(&series(x), &SiftConfig::default()).unwrap();
        assert!(set.imfs.len() >= 2, "expected at least 2 IMFs, got {}", set.imfs.len());
        let lo_i = n / 10;
        let hi_i = n - n / 10;
        let e1 = rel_l2(&set.imfs[0].samples()[lo_i..hi_i], &hi[lo_i..hi_i]);
        let e2 = rel_l2(&set.imfs[1].samples()[lo_i..hi_i], &lo[lo_i..hi_i]);
        assert!(e1 < 0.2, "high-tone interior error {e1}");
        assert!(e2 < 0.2, "low-tone interior error {e2}");
    }

    #[test]
    fn sift_reconstruction_and_c1() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 256;
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    (2.0 * PI * 19.0 * t).sin() + 0.5 * (2.0 * PI * 3.0 * t).cos()
                        + 0.1 * rng.gen_range(-1.0..1.0)
                })
                .collect();
            let ts = series(x.clone());
            let set = sift(&ts, &SiftConfig::default()).unwrap();
            let rec = set.reconstruct();
            assert!(rel_l2(&rec, &x) < 1e-9);
            for (imf, warned) in set.imfs.iter().zip(&set.warned) {
                if !warned {
                    assert!(count_c1(imf.samples()).passes);
                }
            }
        }
    }

    #[test]
    fn sift_shift_equivariance_on_interior_signal() {
        // Constant-amplitude content: integer shifts move every extremum
        // rigidly, so the IMFs shift on the common interior.
        let n = 512;
        let base: Vec<f64> = (0..n)
            .map(|i| {
                (2.0 * PI * 64.0 * i as f64 / n as f64).sin()
                    + 0.5 * (2.0 * PI * 16.0 * i as f64 / n as f64).sin()
            })
            .collect();
        let cfg = SiftConfig::default();
        let set0 = sift(&series(base.clone()), &cfg).unwrap();
        for s in [-8i64, -3, 4, 8] {
            let shifted: Vec<f64> = (0..n as i64)
                .map(|i| {
                    let j = i - s;
                    if j >= 0 && (j as usize) < n {
                        base[j as usize]
                    } else {
                        0.0
                    }
                })
                .collect();
            let set_s = sift(&series(shifted), &cfg).unwrap();
            let k = set0.imfs.len().min(set_s.imfs.len());
            assert!(k >= 1);
            for m in 0..k.min(2) {
                let d0 = set0.imfs[m].samples();
                let ds = set_s.imfs[m].samples();
                let margin = 32usize;
                let mut num = 0.0;
                let mut den = 0.0;
                for i in margin..n - margin {
                    let j = i as i64 - s;
                    if j >= margin as i64 && (j as usize) < n - margin {
                        let diff = ds[i] - d0[j as usize];
                        num += diff * diff;
                        den += d0[j as usize] * d0[j as usize];
                    }
                }
                let err = (num / den).sqrt();
                assert!(err < 1e-3, "mode {m}, shift {s}: interior error {err}");
            }
        }
    }

    #[test]
    fn sift_is_deterministic() {
        let n = 300;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                (2.0 * PI * 13.0 * t).sin() + 0.3 * (2.0 * PI * 2.0 * t).sin()
            })
            .collect();
        let ts = series(x);
        let a = sift(&ts, &SiftConfig::default()).unwrap();
        let b = sift(&ts, &SiftConfig::default()).unwrap();
        assert_eq!(a.imfs.len(), b.imfs.len());
        for (ia, ib) in a.imfs.iter().zip(&b.imfs) {
            assert_eq!(ia.samples(), ib.samples());
        }
        assert_eq!(a.residue.samples(), b.residue.samples());
    }
}
