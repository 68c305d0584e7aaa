use super::{Domain, Family, Weight, WeightFamily};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrsOptions {
    /// Largest multiple `k` used by the numeric path.
    pub k_max: u64,
    pub grs_tol: f64,
    /// Skip closed forms even when available.
    pub force_numeric: bool,
}

impl Default for GrsOptions {
    fn default() -> Self {
        Self { k_max: 1 << 14, grs_tol: 1e-3, force_numeric: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrsDirection {
    pub direction: Vec<i64>,
    /// Estimate of `lim_k w(k m)^{1/k}`.
    pub limit: f64,
    pub analytic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrsReport {
    pub directions: Vec<GrsDirection>,
    pub admissible: bool,
    pub grs_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedGrsDirection {
    pub direction: Vec<i64>,
    pub per_n: Vec<f64>,
    pub observed_min: f64,
    pub inf_estimate: f64,
    /// The last members' limits are still decreasing at the depth cutoff.
    pub decreasing_tail: bool,
    pub analytic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedGrsReport {
    pub directions: Vec<ExtendedGrsDirection>,
    pub depth: usize,
    pub pass: bool,
    pub grs_tol: f64,
}

fn dimension(d: Domain) -> Option<usize> {
    match d {
        Domain::Z | Domain::R => Some(1),
        Domain::Z2 => Some(2),
        Domain::ZN => None,
    }
}

/// Coordinate directions and diagonals used when none are given (the first four coordinates on Z^N).
pub fn default_directions(domain: Domain) -> Vec<Vec<i64>> {
    match domain {
        Domain::Z | Domain::R => vec![vec![1], vec![-1]],
        Domain::Z2 => [[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [1, -1], [-1, 1], [-1, -1]].iter().map(|d| d.to_vec()).collect(),
        Domain::ZN => (0..8)
            .map(|i| {
                let mut d = vec![0; 4];
                d[i / 2] = if i % 2 == 0 { 1 } else { -1 };
                d
            })
            .collect(),
    }
}

fn check_direction(w: &Weight, m: &[i64]) -> Result<()> {
    match dimension(w.domain) {
        Some(n) if n != m.len() => Err(Error::DimensionMismatch(format!("direction {m:?} for a {:?} weight", w.domain))),
        _ if m.is_empty() => Err(Error::DimensionMismatch("empty direction".into())),
        _ => Ok(()),
    }
}

fn norm(m: &[i64]) -> f64 {
    m.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt()
}

/// Closed-form `lim_k w(k m)^{1/k}` for parametric descriptors.
fn analytic_limit(w: &Weight, m: &[i64]) -> Option<f64> {
    if m.iter().all(|x| *x == 0) {
        return Some(1.0);
    }
    match &w.family {
        Family::StepGeometric { r, s } => {
            let n = m[0];
            Some(if n < 0 { r.powf(n as f64) } else { s.powf(n as f64) })
        }
        Family::Polynomial { .. } | Family::Subexponential { .. } => Some(1.0),
        Family::Exponential { r } => Some((norm(m) / (r + 1.0)).exp()),
        Family::ExpLinearR { c } => Some((c * norm(m)).exp()),
        Family::Hybrid { r, s, .. } => {
            let n = m[0] as f64;
            Some(if n < 0.0 { r.powf(n / 2.0) } else { s.powf(n / 2.0) })
        }
        Family::ProductZ2 { w1, w2 } => Some(analytic_limit(w1, &m[..1])? * analytic_limit(w2, &m[1..])?),
        Family::OrderN { positions, rates } => Some(
            positions
                .iter()
                .zip(rates)
                .map(|(p, (r, s))| {
                    let a = m.get(p - 1).copied().unwrap_or(0) as f64;
                    if a < 0.0 {
                        r.powf(a)
                    } else {
                        s.powf(a)
                    }
                })
                .product(),
        ),
        Family::Piecewise { neg, pos, .. } => {
            if m[0] < 0 {
                analytic_limit(neg, m)
            } else {
                analytic_limit(pos, m)
            }
        }
        Family::Scaled { inner, .. } => analytic_limit(inner, m),
        Family::Product { a, b } => Some(analytic_limit(a, m)? * analytic_limit(b, m)?),
        Family::Tabulated { .. } | Family::TabulatedZ2 { .. } => None,
    }
}

fn eval_at(w: &Weight, m: &[i64], k: u64) -> Result<f64> {
    let km: Vec<i64> = m.iter().map(|x| x * k as i64).collect();
    match w.domain {
        Domain::Z => w.eval_z(km[0]),
        Domain::R => w.eval_r(km[0] as f64),
        Domain::Z2 => w.eval_z2([km[0], km[1]]),
        Domain::ZN => w.eval_zn(&km),
    }
}

/// Aitken's delta-squared on three equally log-spaced samples.
fn aitken(x0: f64, x1: f64, x2: f64) -> f64 {
    let d = x2 - 2.0 * x1 + x0;
    if d.abs() <= 1e-300 || !d.is_finite() {
        x2
    } else {
        x2 - (x2 - x1).powi(2) / d
    }
}

/// Numeric limit from `log w(k m) / k` at `k = K/4, K/2, K`, with `K` capped by any tabulated window.
fn numeric_limit(w: &Weight, m: &[i64], k_max: u64) -> f64 {
    let mut k = k_max.max(16);
    while k >= 4 && !eval_at(w, m, k).map(f64::is_finite).unwrap_or(false) {
        k /= 2;
    }
    if k < 4 {
        return eval_at(w, m, 1).unwrap_or(1.0);
    }
    let s = |k: u64| eval_at(w, m, k).map(|v| v.ln() / k as f64).unwrap_or(f64::NAN);
    let (x0, x1, x2) = (s(k / 4), s(k / 2), s(k));
    aitken(x0, x1, x2).clamp(0.0, x2.max(0.0)).exp()
}

fn limit(w: &Weight, m: &[i64], opts: &GrsOptions) -> Result<(f64, bool)> {
    check_direction(w, m)?;
    if !opts.force_numeric {
        if let Some(l) = analytic_limit(w, m) {
            return Ok((l, true));
        }
    }
    Ok((numeric_limit(w, m, opts.k_max), false))
}

/// Estimates `lim_k w(k m)^{1/k}` per direction; admissible iff every limit is within `grs_tol` of 1.
pub fn grs_check(w: &Weight, directions: &[Vec<i64>], opts: &GrsOptions) -> Result<GrsReport> {
    let mut out = Vec::with_capacity(directions.len());
    for m in directions {
        let (limit, analytic) = limit(w, m, opts)?;
        out.push(GrsDirection { direction: m.clone(), limit, analytic });
    }
    let admissible = out.iter().all(|d| (d.limit - 1.0).abs() <= if d.analytic { 1e-12 } else { opts.grs_tol });
    Ok(GrsReport { directions: out, admissible, grs_tol: opts.grs_tol })
}

/// Infimum over the family of the per-member limits, extrapolated when the tail is still decreasing.
pub fn extended_grs(fam: &WeightFamily, directions: &[Vec<i64>], opts: &GrsOptions) -> Result<ExtendedGrsReport> {
    fam.validate()?;
    let n = fam.len();
    let mut out = Vec::with_capacity(directions.len());
    for m in directions {
        let mut per_n = Vec::with_capacity(n);
        let mut analytic = true;
        for w in &fam.weights {
            let (l, a) = limit(w, m, opts)?;
            analytic &= a;
            per_n.push(l);
        }
        let observed_min = per_n.iter().copied().fold(f64::INFINITY, f64::min);
        let decreasing_tail = n >= 8 && per_n[n - 4..].windows(2).all(|p| p[1] < p[0]);
        let inf_estimate = if decreasing_tail {
            let x = |i: usize| per_n[i - 1].ln();
            let e = aitken(x(n / 4), x(n / 2), x(n));
            e.clamp(0.0, observed_min.ln()).exp()
        } else {
            observed_min
        };
        out.push(ExtendedGrsDirection { direction: m.clone(), per_n, observed_min, inf_estimate, decreasing_tail, analytic });
    }
    let pass = out.iter().all(|d| d.inf_estimate <= 1.0 + opts.grs_tol);
    Ok(ExtendedGrsReport { directions: out, depth: n, pass, grs_tol: opts.grs_tol })
}
