//! Weighted `L^1` on the real line: piecewise-exponential functions, their
//! transform on a vertical strip, the strip on which `1 + f^` stays
//! invertible, and the maximal weight built from it.

use crate::algebra::{AlgebraElement, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::weights::{rho_pair_r, Domain, Weight};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `amp * e^{lambda x}` on `[x0, x1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x0: f64,
    pub x1: f64,
    pub lambda: Complex64,
    pub amp: AlgebraElement,
}

/// Compactly supported piecewise-exponential function with values in the coefficient algebra.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealFunction {
    pub segments: Vec<Segment>,
}

/// `(e^u - 1) / u`, with the removable singularity at `u = 0` filled in.
fn exprel(u: Complex64) -> Complex64 {
    if u.norm() < 1e-2 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = term;
        for k in 2..=12 {
            term *= u / k as f64;
            acc += term;
        }
        acc
    } else {
        (u.exp() - 1.0) / u
    }
}

impl RealFunction {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let f = Self { segments };
        f.validate()?;
        Ok(f)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `c * e^{lambda x}` on a single interval.
    pub fn exponential(x0: f64, x1: f64, lambda: f64, c: f64) -> Result<Self> {
        Self::new(vec![Segment { x0, x1, lambda: Complex64::new(lambda, 0.0), amp: AlgebraElement::scalar(c) }])
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.coeff_dim();
        for s in &self.segments {
            if !(s.x0.is_finite() && s.x1.is_finite() && s.x0 < s.x1) {
                return Err(Error::InvalidDescriptor(format!("segment [{}, {}] is not a bounded interval", s.x0, s.x1)));
            }
            if !(s.lambda.re.is_finite() && s.lambda.im.is_finite()) {
                return Err(Error::InvalidDescriptor("segment exponent must be finite".into()));
            }
            if s.amp.dim() != d {
                return Err(Error::DimensionMismatch("segment amplitudes differ in size".into()));
            }
        }
        Ok(())
    }

    pub fn coeff_dim(&self) -> usize {
        self.segments.first().map(|s| s.amp.dim()).unwrap_or(1)
    }

    pub fn scale(&self, c: f64) -> Self {
        let segments = self.segments.iter().map(|s| Segment { amp: s.amp.scale(c), ..s.clone() }).collect();
        Self { segments }
    }

    pub fn eval(&self, x: f64) -> AlgebraElement {
        let mut acc = AlgebraElement::zero(self.coeff_dim());
        for s in &self.segments {
            if s.x0 <= x && x <= s.x1 {
                acc = acc.add(&s.amp.scale((s.lambda * x).exp())).expect("validated dimensions");
            }
        }
        acc
    }

    /// `int ||f(x)|| dx`, bounded by summing the segment norms.
    pub fn l1_norm(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                let len = s.x1 - s.x0;
                let a = s.lambda.re;
                s.amp.norm() * (a * s.x0).exp() * len * exprel(Complex64::new(a * len, 0.0)).re
            })
            .sum()
    }
}

/// `f^(z) = int f(x) e^{z x} dx`, integrated in closed form per segment.
pub fn transform_on_strip(f: &RealFunction, z: Complex64) -> AlgebraElement {
    let mut acc = AlgebraElement::zero(f.coeff_dim());
    for s in &f.segments {
        let w = s.lambda + z;
        let len = s.x1 - s.x0;
        let integral = (w * s.x0).exp() * len * exprel(w * len);
        acc = acc.add(&s.amp.scale(integral)).expect("validated dimensions");
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripOptions {
    /// Grid lines in the real direction.
    pub nx: usize,
    /// Grid lines in the imaginary direction over `[-M, M]`.
    pub ny: usize,
    pub tol: f64,
}

impl Default for StripOptions {
    fn default() -> Self {
        Self { nx: 41, ny: 401, tol: DEFAULT_TOL }
    }
}

/// Open strip `left < Re z < right` on which `1 + f^(z)` is invertible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub left: f64,
    pub right: f64,
    /// `||f^(x + iy)|| < 1` on the sampled lines for `|y| >= vertical_bound`.
    pub vertical_bound: f64,
    /// Height above which `||f^|| <= 1/2` holds by the segment-wise estimate.
    pub analytic_bound: f64,
    /// The region `vertical_bound <= |y| <= analytic_bound` was only checked on the grid.
    pub grid_certified: bool,
    /// Zeros of `det(1 + f^)` located in the closed weight strip.
    pub zeros: Vec<Complex64>,
    /// `(rho1, rho2)` of the weight.
    pub rho: [f64; 2],
}

fn unitised(f: &RealFunction, z: Complex64) -> AlgebraElement {
    AlgebraElement::identity(f.coeff_dim()).add(&transform_on_strip(f, z)).expect("matching dimensions")
}

fn det(f: &RealFunction, z: Complex64) -> Complex64 {
    unitised(f, z).det()
}

fn newton(f: &RealFunction, mut z: Complex64) -> Option<Complex64> {
    for _ in 0..60 {
        let d = det(f, z);
        let h = 1e-6 * (1.0 + z.norm());
        let dd = (det(f, z + h) - det(f, z - h)) / (2.0 * h);
        if dd.norm() == 0.0 {
            return None;
        }
        let step = d / dd;
        z -= step;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return None;
        }
        if step.norm() <= 1e-14 * (1.0 + z.norm()) {
            break;
        }
    }
    (det(f, z).norm() <= 1e-10).then_some(z)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 || a == b {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Largest real part of `z x` over the strip for `x` in a segment, i.e. the weight-side growth.
fn segment_bound(s: &Segment, rho: [f64; 2]) -> f64 {
    let a = s.lambda.re;
    rho.iter().map(|x| ((a + x) * s.x1).exp() + ((a + x) * s.x0).exp()).fold(0.0, f64::max) * s.amp.norm()
}

/// Strip inside `[rho1, rho2]` on which `1 + f^` has no zeros, located by a grid scan and Newton refinement.
pub fn strip_of_invertibility(f: &RealFunction, w: &Weight, opts: &StripOptions) -> Result<Strip> {
    if w.domain != Domain::R {
        return Err(Error::DomainMismatch("strip_of_invertibility needs a weight on R".into()));
    }
    f.validate()?;
    let rho = rho_pair_r(w)?;
    if !(rho.rho1.is_finite() && rho.rho2.is_finite()) {
        return Err(Error::RateOutOfRange(format!("strip ({}, {}) is unbounded", rho.rho1, rho.rho2)));
    }
    let bounds = [rho.rho1, rho.rho2];
    let c_sum: f64 = f.segments.iter().map(|s| segment_bound(s, bounds)).sum();
    let im_max = f.segments.iter().map(|s| s.lambda.im.abs()).fold(0.0, f64::max);
    let analytic_bound = if c_sum == 0.0 { 0.0 } else { im_max + 2.0 * c_sum };
    let xs = linspace(rho.rho1, rho.rho2, opts.nx);

    // lower the height while every sampled line stays in the Neumann region
    let heights = linspace(0.0, analytic_bound, opts.ny.div_ceil(2));
    let small = |y: f64| {
        xs.iter().all(|x| {
            transform_on_strip(f, Complex64::new(*x, y)).norm() < 1.0 && transform_on_strip(f, Complex64::new(*x, -y)).norm() < 1.0
        })
    };
    let mut vertical_bound = analytic_bound;
    for y in heights.iter().rev() {
        if !small(*y) {
            break;
        }
        vertical_bound = *y;
    }

    let ys = linspace(-vertical_bound, vertical_bound, if vertical_bound == 0.0 { 1 } else { opts.ny });
    if let Some(y) = ys.iter().find(|y| !unitised(f, Complex64::new(0.0, **y)).is_invertible(opts.tol)) {
        return Err(Error::NotInvertibleOnAxis(*y));
    }
    let grid: Vec<Vec<f64>> = ys.par_iter().map(|y| xs.iter().map(|x| det(f, Complex64::new(*x, *y)).norm()).collect()).collect();
    let mut starts = Vec::new();
    for (j, row) in grid.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            let mut is_min = true;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (a, b) = (j as i64 + dj, i as i64 + di);
                    if (dj, di) != (0, 0) && a >= 0 && b >= 0 && (a as usize) < grid.len() && (b as usize) < row.len() {
                        is_min &= *v <= grid[a as usize][b as usize];
                    }
                }
            }
            if is_min {
                starts.push(Complex64::new(xs[i], ys[j]));
            }
        }
    }
    let found: Vec<Complex64> = starts.par_iter().filter_map(|z| newton(f, *z)).collect();
    let slack = 1e-9 * (1.0 + rho.rho1.abs().max(rho.rho2));
    let mut zeros: Vec<Complex64> = Vec::new();
    for z in found {
        let inside = z.re >= rho.rho1 - slack && z.re <= rho.rho2 + slack && z.im.abs() <= vertical_bound + 1.0;
        if inside && zeros.iter().all(|q| (q - z).norm() > 1e-8) {
            zeros.push(z);
        }
    }
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    if let Some(z) = zeros.iter().find(|z| z.re.abs() <= opts.tol.max(1e-12)) {
        return Err(Error::NotInvertibleOnAxis(z.im));
    }
    let right = zeros.iter().filter(|z| z.re > 0.0).map(|z| z.re).fold(rho.rho2, f64::min);
    let left = zeros.iter().filter(|z| z.re < 0.0).map(|z| z.re).fold(rho.rho1, f64::max);
    Ok(Strip {
        left: left.max(rho.rho1),
        right: right.min(rho.rho2),
        vertical_bound,
        analytic_bound,
        grid_certified: vertical_bound < analytic_bound,
        zeros,
        rho: bounds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousMaxWeight {
    pub case: u8,
    /// Log-scale rates of `eta` on the negative and positive half-lines.
    pub r: f64,
    pub s: f64,
    pub eta: Weight,
    pub strip: Option<Strip>,
}

/// Maximal weight on R: `w` itself, or `w` with one or both half-lines replaced by `e^{r x}`, `e^{s x}`.
pub fn max_weight_continuous(f: &RealFunction, w: &Weight, opts: &StripOptions) -> Result<ContinuousMaxWeight> {
    let rho = rho_pair_r(w)?;
    if rho.admissible_rho {
        return Ok(ContinuousMaxWeight { case: 1, r: rho.rho1, s: rho.rho2, eta: w.clone(), strip: None });
    }
    let strip = strip_of_invertibility(f, w, opts)?;
    let (r, s) = (strip.left, strip.right);
    let eta = match (r == rho.rho1, s == rho.rho2) {
        (true, true) => return Ok(ContinuousMaxWeight { case: 1, r, s, eta: w.clone(), strip: Some(strip) }),
        (true, false) => Weight::piecewise(w.clone(), Weight::exp_linear_r(s)?, 1.0)?,
        (false, true) => Weight::piecewise(Weight::exp_linear_r(-r)?, w.clone(), 1.0)?,
        (false, false) => Weight::piecewise(Weight::exp_linear_r(-r)?, Weight::exp_linear_r(s)?, 1.0)?,
    };
    Ok(ContinuousMaxWeight { case: 2, r, s, eta, strip: Some(strip) })
}
