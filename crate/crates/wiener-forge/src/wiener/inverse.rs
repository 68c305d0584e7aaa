use super::annulus::{invertibility_annulus, Annulus, AnnulusOptions};
use super::decay::{decay_estimate, DecayEstimate};
use crate::algebra::{AlgebraElement, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::sequences::{fft2, sample_circle, sample_torus, Sequence};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseOptions {
    pub tol: f64,
    /// Sampling radius (both axes on Z^2); must lie inside the annulus.
    pub radius: f64,
    /// Largest sample count per axis on Z.
    pub k_cap: usize,
    /// Largest sample count per axis on Z^2.
    pub k_cap_2d: usize,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, radius: 1.0, k_cap: 1 << 20, k_cap_2d: 1 << 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentInverse {
    pub coeffs: Sequence,
    /// Sample count (per axis) at convergence.
    pub k: usize,
    /// `sum ||(f * g - delta)(n)||` over indices whose convolution only needs coefficients inside the window.
    pub residual: f64,
}

fn invert_samples(samples: &[AlgebraElement], tol: f64) -> Result<Vec<AlgebraElement>> {
    samples
        .par_iter()
        .map(|v| v.invert(tol).map_err(|e| Error::NotInvertibleOnTorus(format!("sample not invertible on the sampling circle: {e}"))))
        .collect()
}

fn max_change(a: &[AlgebraElement], b: &[AlgebraElement]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.sub(y).map(|d| d.norm()).unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
}

fn coefficients_1d(f: &Sequence, radius: f64, k: usize, window: (i64, i64), tol: f64) -> Result<Vec<AlgebraElement>> {
    let inv = invert_samples(&sample_circle(f, radius, k), tol)?;
    let d = f.coeff_dim();
    let fft = FftPlanner::new().plan_fft_forward(k);
    let mut out = vec![AlgebraElement::zero(d); (window.1 - window.0 + 1) as usize];
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for e in 0..d * d {
        for (j, v) in inv.iter().enumerate() {
            buf[j] = v.entries()[e];
        }
        fft.process(&mut buf);
        for (i, n) in (window.0..=window.1).enumerate() {
            out[i].entries_mut()[e] = buf[n.rem_euclid(k as i64) as usize] / (k as f64 * radius.powi(n as i32));
        }
    }
    Ok(out)
}

/// `sum ||(f * g)(n) - delta(n)||` over the indices whose convolution is fully determined by the window of `g`.
fn interior_residual(f: &Sequence, g: &Sequence) -> Result<f64> {
    let prod = f.convolve(g)?;
    let (flo, fhi) = (f.lo(), f.hi());
    let (glo, ghi) = (g.lo(), g.hi());
    let lo = [glo[0] + fhi[0], glo[1] + fhi[1]];
    let hi = [ghi[0] + flo[0], ghi[1] + flo[1]];
    let unit = AlgebraElement::identity(f.coeff_dim());
    let mut acc = 0.0;
    for (m, v) in prod.iter() {
        if m[0] < lo[0] || m[0] > hi[0] || m[1] < lo[1] || m[1] > hi[1] {
            continue;
        }
        acc += if m == [0, 0] { v.sub(&unit)?.norm() } else { v.norm() };
    }
    Ok(acc)
}

/// Laurent coefficients of `f^{-1}` on `out_window`, from samples on the circle `|z| = opts.radius`.
///
/// The sample count doubles until no coefficient moves by more than `tol`.
pub fn laurent_inverse(f: &Sequence, ann: &Annulus, out_window: (i64, i64), opts: &InverseOptions) -> Result<LaurentInverse> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch("laurent_inverse needs a sequence on Z".into()));
    }
    if !ann.contains(1.0) {
        return Err(Error::NotInvertibleOnTorus(format!("annulus ({}, {}) misses the unit circle", ann.inner, ann.outer)));
    }
    if !ann.contains(opts.radius) {
        return Err(Error::InvalidDescriptor(format!("sampling radius {} outside ({}, {})", opts.radius, ann.inner, ann.outer)));
    }
    if out_window.1 < out_window.0 {
        return Err(Error::InvalidDescriptor("empty output window".into()));
    }
    let width = (out_window.1 - out_window.0 + 1) as usize + f.shape()[0];
    let mut k = (2 * width).next_power_of_two().max(64);
    let mut prev = coefficients_1d(f, opts.radius, k, out_window, opts.tol)?;
    loop {
        if 2 * k > opts.k_cap {
            return Err(Error::NoConvergence(format!("sample count would exceed {}", opts.k_cap)));
        }
        k *= 2;
        let next = coefficients_1d(f, opts.radius, k, out_window, opts.tol)?;
        let change = max_change(&prev, &next);
        prev = next;
        if change <= opts.tol {
            break;
        }
    }
    let coeffs = Sequence::new(out_window.0, prev)?;
    let residual = interior_residual(f, &coeffs)?;
    if residual > 10.0 * opts.tol {
        return Err(Error::Inaccurate { residual, tol: 10.0 * opts.tol });
    }
    Ok(LaurentInverse { coeffs, k, residual })
}

/// Annulus, inverse on `window` and tail fit in one call; the decay is `None` when the inverse has no fittable tail.
pub fn inverse_with_decay(
    f: &Sequence,
    window: (i64, i64),
    ann_opts: &AnnulusOptions,
    opts: &InverseOptions,
) -> Result<(Annulus, LaurentInverse, Option<DecayEstimate>)> {
    let ann = invertibility_annulus(f, None, ann_opts)?;
    let inv = laurent_inverse(f, &ann, window, opts)?;
    let decay = match decay_estimate(&inv.coeffs) {
        Ok(d) => Some(d),
        Err(Error::TooShort { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok((ann, inv, decay))
}

fn coefficients_2d(f: &Sequence, radii: [f64; 2], k: usize, lo: [i64; 2], hi: [i64; 2], tol: f64) -> Result<Vec<AlgebraElement>> {
    let inv = invert_samples(&sample_torus(f, radii, k), tol)?;
    let d = f.coeff_dim();
    let fft = FftPlanner::new().plan_fft_forward(k);
    let shape = [(hi[0] - lo[0] + 1) as usize, (hi[1] - lo[1] + 1) as usize];
    let mut out = vec![AlgebraElement::zero(d); shape[0] * shape[1]];
    let mut buf = vec![Complex64::new(0.0, 0.0); k * k];
    let mut col = vec![Complex64::new(0.0, 0.0); k];
    let scale = (k * k) as f64;
    for e in 0..d * d {
        for (j, v) in inv.iter().enumerate() {
            buf[j] = v.entries()[e];
        }
        fft2(&*fft, &mut buf, &mut col, k);
        for a in lo[0]..=hi[0] {
            for b in lo[1]..=hi[1] {
                let src = a.rem_euclid(k as i64) as usize * k + b.rem_euclid(k as i64) as usize;
                let dst = (a - lo[0]) as usize * shape[1] + (b - lo[1]) as usize;
                out[dst].entries_mut()[e] = buf[src] / (scale * radii[0].powi(a as i32) * radii[1].powi(b as i32));
            }
        }
    }
    Ok(out)
}

/// Two-dimensional analogue of [`laurent_inverse`] on the torus with the given radii.
pub fn laurent_inverse_z2(
    f: &Sequence,
    radii: [f64; 2],
    out_window: ([i64; 2], [i64; 2]),
    opts: &InverseOptions,
) -> Result<LaurentInverse> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch("laurent_inverse_z2 needs a sequence on Z^2".into()));
    }
    let (lo, hi) = out_window;
    if hi[0] < lo[0] || hi[1] < lo[1] {
        return Err(Error::InvalidDescriptor("empty output window".into()));
    }
    let width = ((hi[0] - lo[0]).max(hi[1] - lo[1]) + 1) as usize + f.shape()[0].max(f.shape()[1]);
    let mut k = (2 * width).next_power_of_two().max(32);
    let mut prev = coefficients_2d(f, radii, k, lo, hi, opts.tol)?;
    loop {
        if 2 * k > opts.k_cap_2d {
            return Err(Error::NoConvergence(format!("sample count per axis would exceed {}", opts.k_cap_2d)));
        }
        k *= 2;
        let next = coefficients_2d(f, radii, k, lo, hi, opts.tol)?;
        let change = max_change(&prev, &next);
        prev = next;
        if change <= opts.tol {
            break;
        }
    }
    let shape = [(hi[0] - lo[0] + 1) as usize, (hi[1] - lo[1] + 1) as usize];
    let coeffs = Sequence::new_2d(lo, shape, prev)?;
    let residual = interior_residual(f, &coeffs)?;
    if residual > 10.0 * opts.tol {
        return Err(Error::Inaccurate { residual, tol: 10.0 * opts.tol });
    }
    Ok(LaurentInverse { coeffs, k, residual })
}
