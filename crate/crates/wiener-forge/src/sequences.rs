//! Finitely supported algebra-valued sequences on Z and Z^2.
//!
//! A [`Sequence`] stores its coefficients densely on an explicit window. The
//! quasi-norm follows the p-th power convention: `lp_norm` returns
//! `sum ||f(n)||^p w(n)^p` with no outer root.

use crate::algebra::{AlgebraElement, NormKind};
use crate::error::{Error, Result};
use crate::weights::{rho_pair, Domain, Weight};
use crate::wiener::{DecayEstimate, TailFit};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SequenceRepr", into = "SequenceRepr")]
pub struct Sequence {
    dim: usize,
    coeff_dim: usize,
    lo: [i64; 2],
    shape: [usize; 2],
    data: Vec<AlgebraElement>,
}

#[derive(Serialize, Deserialize)]
struct SequenceRepr {
    dim: usize,
    coeff_dim: usize,
    entries: Vec<EntryRepr>,
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    index: Vec<i64>,
    value: AlgebraElement,
}

impl TryFrom<SequenceRepr> for Sequence {
    type Error = Error;

    fn try_from(r: SequenceRepr) -> Result<Self> {
        let entries = r.entries.into_iter().map(|e| (e.index, e.value)).collect();
        Sequence::from_entries(r.dim, r.coeff_dim, entries)
    }
}

impl From<Sequence> for SequenceRepr {
    fn from(s: Sequence) -> Self {
        let entries =
            s.iter().filter(|(_, v)| !v.is_zero()).map(|(m, v)| EntryRepr { index: m[..s.dim].to_vec(), value: v.clone() }).collect();
        SequenceRepr { dim: s.dim, coeff_dim: s.coeff_dim, entries }
    }
}

/// Samples of the symbol on a circle (or torus) of the given radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolSamples {
    pub radius: Vec<f64>,
    pub k: usize,
    /// `F(radius e^{2 pi i j / K})`, row-major over `(j1, j2)` on the torus.
    pub values: Vec<AlgebraElement>,
}

impl Sequence {
    fn check_values(values: &[AlgebraElement]) -> Result<usize> {
        let d = values.first().map(|v| v.dim()).ok_or_else(|| Error::InvalidDescriptor("empty sequence".into()))?;
        if values.iter().any(|v| v.dim() != d) {
            return Err(Error::DimensionMismatch("sequence entries must share a dimension".into()));
        }
        Ok(d)
    }

    /// One-dimensional sequence with `values[i]` at index `lo + i`.
    pub fn new(lo: i64, values: Vec<AlgebraElement>) -> Result<Self> {
        let coeff_dim = Self::check_values(&values)?;
        Ok(Self { dim: 1, coeff_dim, lo: [lo, 0], shape: [values.len(), 1], data: values })
    }

    /// Two-dimensional sequence, row-major over `[lo[0], lo[0] + shape[0]) x [lo[1], lo[1] + shape[1])`.
    pub fn new_2d(lo: [i64; 2], shape: [usize; 2], values: Vec<AlgebraElement>) -> Result<Self> {
        if values.len() != shape[0] * shape[1] {
            return Err(Error::DimensionMismatch(format!("{} values for shape {shape:?}", values.len())));
        }
        let coeff_dim = Self::check_values(&values)?;
        Ok(Self { dim: 2, coeff_dim, lo, shape, data: values })
    }

    pub fn scalars(lo: i64, values: &[f64]) -> Self {
        Self::new(lo, values.iter().map(|v| AlgebraElement::scalar(*v)).collect()).expect("non-empty scalar data")
    }

    pub fn complex_scalars(lo: i64, values: &[Complex64]) -> Self {
        Self::new(lo, values.iter().map(|v| AlgebraElement::scalar(*v)).collect()).expect("non-empty scalar data")
    }

    /// The convolution unit on Z.
    pub fn delta(coeff_dim: usize) -> Self {
        Self::new(0, vec![AlgebraElement::identity(coeff_dim)]).expect("one entry")
    }

    /// The convolution unit on Z^2.
    pub fn delta_2d(coeff_dim: usize) -> Self {
        Self::new_2d([0, 0], [1, 1], vec![AlgebraElement::identity(coeff_dim)]).expect("one entry")
    }

    /// Builds the smallest window holding the given sparse entries; repeated indices add up.
    pub fn from_entries(dim: usize, coeff_dim: usize, entries: Vec<(Vec<i64>, AlgebraElement)>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidDescriptor(format!("sequences live on Z or Z^2, got dim {dim}")));
        }
        if coeff_dim == 0 {
            return Err(Error::InvalidDescriptor("coeff_dim must be at least 1".into()));
        }
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        for (idx, v) in &entries {
            if idx.len() != dim {
                return Err(Error::DimensionMismatch(format!("index {idx:?} in a dim-{dim} sequence")));
            }
            if v.dim() != coeff_dim {
                return Err(Error::DimensionMismatch(format!("entry of dimension {} for coeff_dim {coeff_dim}", v.dim())));
            }
            for a in 0..dim {
                lo[a] = lo[a].min(idx[a]);
                hi[a] = hi[a].max(idx[a]);
            }
        }
        if entries.is_empty() {
            lo = [0, 0];
            hi = [0, 0];
        }
        if dim == 1 {
            lo[1] = 0;
            hi[1] = 0;
        }
        let shape = [(hi[0] - lo[0] + 1) as usize, (hi[1] - lo[1] + 1) as usize];
        let mut data = vec![AlgebraElement::zero(coeff_dim); shape[0] * shape[1]];
        for (idx, v) in entries {
            let j = if dim == 2 { idx[1] - lo[1] } else { 0 };
            let k = (idx[0] - lo[0]) as usize * shape[1] + j as usize;
            data[k] = data[k].add(&v)?;
        }
        Ok(Self { dim, coeff_dim, lo, shape, data })
    }

    /// Tensor product `(a (x) b)(m1, m2) = a(m1) b(m2)` of two one-dimensional sequences.
    pub fn tensor(a: &Sequence, b: &Sequence) -> Result<Self> {
        if a.dim != 1 || b.dim != 1 {
            return Err(Error::DimensionMismatch("tensor needs two sequences on Z".into()));
        }
        let mut values = Vec::with_capacity(a.data.len() * b.data.len());
        for x in &a.data {
            for y in &b.data {
                values.push(x.mul(y)?);
            }
        }
        Self::new_2d([a.lo[0], b.lo[0]], [a.data.len(), b.data.len()], values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    /// Lower corner of the window (second entry is 0 on Z).
    pub fn lo(&self) -> [i64; 2] {
        self.lo
    }

    pub fn hi(&self) -> [i64; 2] {
        [self.lo[0] + self.shape[0] as i64 - 1, self.lo[1] + self.shape[1] as i64 - 1]
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn values(&self) -> &[AlgebraElement] {
        &self.data
    }

    /// `(lo, hi)` of a sequence on Z.
    pub fn window(&self) -> (i64, i64) {
        (self.lo[0], self.hi()[0])
    }

    pub fn get(&self, n: i64) -> Option<&AlgebraElement> {
        self.get_2d([n, 0])
    }

    pub fn get_2d(&self, m: [i64; 2]) -> Option<&AlgebraElement> {
        let hi = self.hi();
        if m[0] < self.lo[0] || m[0] > hi[0] || m[1] < self.lo[1] || m[1] > hi[1] {
            return None;
        }
        Some(&self.data[(m[0] - self.lo[0]) as usize * self.shape[1] + (m[1] - self.lo[1]) as usize])
    }

    /// Entries with their indices (second index 0 on Z).
    pub fn iter(&self) -> impl Iterator<Item = ([i64; 2], &AlgebraElement)> + '_ {
        let (lo, w) = (self.lo, self.shape[1]);
        self.data.iter().enumerate().map(move |(k, v)| ([lo[0] + (k / w) as i64, lo[1] + (k % w) as i64], v))
    }

    /// Shrinks the window to the nonzero entries.
    pub fn trimmed(&self) -> Self {
        let entries: Vec<(Vec<i64>, AlgebraElement)> =
            self.iter().filter(|(_, v)| !v.is_zero()).map(|(m, v)| (m[..self.dim].to_vec(), v.clone())).collect();
        if entries.is_empty() {
            let origin = vec![0; self.dim];
            return Self::from_entries(self.dim, self.coeff_dim, vec![(origin, AlgebraElement::zero(self.coeff_dim))])
                .expect("consistent zero entry");
        }
        Self::from_entries(self.dim, self.coeff_dim, entries).expect("entries taken from a valid sequence")
    }

    /// `||f||_{l^p_w} = sum ||f(n)||^p w(n)^p` with the entrywise norm.
    pub fn lp_norm(&self, p: f64, w: &Weight) -> Result<f64> {
        self.lp_norm_with(p, w, NormKind::Entrywise)
    }

    pub fn lp_norm_with(&self, p: f64, w: &Weight, kind: NormKind) -> Result<f64> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::ExponentOutOfRange(format!("p must be positive and finite, got {p}")));
        }
        let mut acc = 0.0;
        for (m, v) in self.iter() {
            let a = v.norm_with(kind);
            if a == 0.0 {
                continue;
            }
            let wm = self.weight_at(w, m)?;
            acc += (a * wm).powf(p);
        }
        Ok(acc)
    }

    fn weight_at(&self, w: &Weight, m: [i64; 2]) -> Result<f64> {
        match (self.dim, w.domain) {
            (1, Domain::Z) => w.eval_z(m[0]),
            (2, Domain::Z2) => w.eval_z2(m),
            (d, dom) => Err(Error::DomainMismatch(format!("{dom:?} weight on a dim-{d} sequence"))),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.coeff_dim != other.coeff_dim {
            return Err(Error::DimensionMismatch(format!(
                "dim {} / coeff_dim {} against dim {} / coeff_dim {}",
                self.dim, self.coeff_dim, other.dim, other.coeff_dim
            )));
        }
        Ok(())
    }

    /// Exact finite convolution on the Minkowski sum of the windows.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let lo = [self.lo[0] + other.lo[0], self.lo[1] + other.lo[1]];
        let shape = [self.shape[0] + other.shape[0] - 1, self.shape[1] + other.shape[1] - 1];
        let mut data = vec![AlgebraElement::zero(self.coeff_dim); shape[0] * shape[1]];
        for (i, a) in self.data.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let (ai, aj) = (i / self.shape[1], i % self.shape[1]);
            for (j, b) in other.data.iter().enumerate() {
                let (bi, bj) = (j / other.shape[1], j % other.shape[1]);
                data[(ai + bi) * shape[1] + aj + bj].mul_acc(a, b);
            }
        }
        Ok(Self { dim: self.dim, coeff_dim: self.coeff_dim, lo, shape, data })
    }

    /// `f - g` on the union of the windows.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut entries: Vec<(Vec<i64>, AlgebraElement)> = self.iter().map(|(m, v)| (m[..self.dim].to_vec(), v.clone())).collect();
        entries.extend(other.iter().map(|(m, v)| (m[..self.dim].to_vec(), v.scale(-1.0))));
        Self::from_entries(self.dim, self.coeff_dim, entries)
    }

    /// `sum ||f(n)||` with the entrywise norm.
    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).sum()
    }

    /// `f^(z) = sum f(n) z^n` on Z.
    pub fn symbol_eval(&self, z: Complex64) -> Result<AlgebraElement> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch("symbol_eval needs a sequence on Z; use symbol_eval_2d".into()));
        }
        self.symbol_eval_2d(z, Complex64::new(1.0, 0.0))
    }

    /// `f^(z1, z2) = sum f(m) z1^{m1} z2^{m2}`; on Z the second argument is ignored.
    pub fn symbol_eval_2d(&self, z1: Complex64, z2: Complex64) -> Result<AlgebraElement> {
        let hi = self.hi();
        if (z1 == Complex64::new(0.0, 0.0) && self.lo[0] < 0) || (self.dim == 2 && z2 == Complex64::new(0.0, 0.0) && self.lo[1] < 0) {
            return Err(Error::ZeroArgument);
        }
        let mut out = AlgebraElement::zero(self.coeff_dim);
        for a in self.lo[0]..=hi[0] {
            let pa = z1.powi(a as i32);
            for b in self.lo[1]..=hi[1] {
                let c = if self.dim == 2 { pa * z2.powi(b as i32) } else { pa };
                let v = self.get_2d([a, b]).expect("inside window");
                for (e, x) in out.entries_mut().iter_mut().zip(v.entries()) {
                    *e += x * c;
                }
            }
        }
        Ok(out)
    }

    /// Symbol samples at `radius e^{2 pi i j / K}` by one FFT per matrix entry.
    pub fn symbol_on_circle(&self, radius: f64, k: usize) -> Result<SymbolSamples> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch("symbol_on_circle needs a sequence on Z".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::ZeroArgument);
        }
        if !k.is_power_of_two() || k < 2 * self.shape[0] {
            return Err(Error::InvalidDescriptor(format!(
                "K = {k} must be a power of two at least twice the support width {}",
                self.shape[0]
            )));
        }
        Ok(SymbolSamples { radius: vec![radius], k, values: sample_circle(self, radius, k) })
    }

    /// Symbol samples on the torus `|z1| = radii[0]`, `|z2| = radii[1]`, `K x K` points.
    pub fn symbol_on_torus(&self, radii: [f64; 2], k: usize) -> Result<SymbolSamples> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch("symbol_on_torus needs a sequence on Z^2".into()));
        }
        if !(radii[0] > 0.0 && radii[1] > 0.0) {
            return Err(Error::ZeroArgument);
        }
        if !k.is_power_of_two() || k < 2 * self.shape[0].max(self.shape[1]) {
            return Err(Error::InvalidDescriptor(format!("K = {k} too small or not a power of two")));
        }
        Ok(SymbolSamples { radius: radii.to_vec(), k, values: sample_torus(self, radii, k) })
    }
}

/// Circle samples without the size checks; aliasing folds indices modulo `K`.
pub(crate) fn sample_circle(f: &Sequence, radius: f64, k: usize) -> Vec<AlgebraElement> {
    let d2 = f.coeff_dim * f.coeff_dim;
    let fft = FftPlanner::new().plan_fft_inverse(k);
    let mut out = vec![AlgebraElement::zero(f.coeff_dim); k];
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for e in 0..d2 {
        buf.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (m, v) in f.iter() {
            let c = v.entries()[e];
            if c != Complex64::new(0.0, 0.0) {
                buf[m[0].rem_euclid(k as i64) as usize] += c * radius.powi(m[0] as i32);
            }
        }
        fft.process(&mut buf);
        for (j, x) in buf.iter().enumerate() {
            out[j].entries_mut()[e] = *x;
        }
    }
    out
}

pub(crate) fn sample_torus(f: &Sequence, radii: [f64; 2], k: usize) -> Vec<AlgebraElement> {
    let d2 = f.coeff_dim * f.coeff_dim;
    let fft = FftPlanner::new().plan_fft_inverse(k);
    let mut out = vec![AlgebraElement::zero(f.coeff_dim); k * k];
    let mut buf = vec![Complex64::new(0.0, 0.0); k * k];
    let mut col = vec![Complex64::new(0.0, 0.0); k];
    for e in 0..d2 {
        buf.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (m, v) in f.iter() {
            let c = v.entries()[e];
            if c != Complex64::new(0.0, 0.0) {
                let i = m[0].rem_euclid(k as i64) as usize;
                let j = m[1].rem_euclid(k as i64) as usize;
                buf[i * k + j] += c * radii[0].powi(m[0] as i32) * radii[1].powi(m[1] as i32);
            }
        }
        fft2(&*fft, &mut buf, &mut col, k);
        for (j, x) in buf.iter().enumerate() {
            out[j].entries_mut()[e] = *x;
        }
    }
    out
}

/// In-place two-dimensional transform of a row-major `k x k` buffer.
pub(crate) fn fft2(fft: &dyn rustfft::Fft<f64>, buf: &mut [Complex64], col: &mut [Complex64], k: usize) {
    for row in buf.chunks_mut(k) {
        fft.process(row);
    }
    for j in 0..k {
        for i in 0..k {
            col[i] = buf[i * k + j];
        }
        fft.process(col);
        for i in 0..k {
            buf[i * k + j] = col[i];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    NotMember,
    Inconclusive,
}

impl Verdict {
    /// `NotMember` dominates `Inconclusive`, which dominates `Member`.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (NotMember, _) | (_, NotMember) => NotMember,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Member,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideCertificate {
    /// `p (log rate + log growth)`: the per-step log ratio of consecutive weighted terms.
    pub log_ratio: f64,
    pub tail_ratio: f64,
    /// Fitted slope of `log(||g(n)||^p w(n)^p)` against `|n|` on the fit window.
    pub weighted_slope: f64,
    pub fit_residual: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipCertificate {
    pub verdict: Verdict,
    /// `||g||_{l^p_w}` over the stored window.
    pub partial_norm: f64,
    /// Largest side tail ratio (0 for finite support).
    pub tail_ratio: f64,
    pub neg: Option<SideCertificate>,
    pub pos: Option<SideCertificate>,
    pub margin: f64,
}

/// Default log-scale margin for membership verdicts.
pub const MEMBERSHIP_MARGIN: f64 = 1e-6;

/// Residual below which a tail counts as exactly geometric.
const GEOMETRIC_RESIDUAL: f64 = 1e-5;

/// Tail test for `g in l^p_w`. A `None` decay means the data is finitely supported.
pub fn membership_certificate(
    g: &Sequence,
    decay: Option<&DecayEstimate>,
    p: f64,
    w: &Weight,
    margin: f64,
) -> Result<MembershipCertificate> {
    let partial_norm = g.lp_norm(p, w)?;
    let decay = match decay {
        None => return Ok(MembershipCertificate { verdict: Verdict::Member, partial_norm, tail_ratio: 0.0, neg: None, pos: None, margin }),
        Some(d) => d,
    };
    if g.dim() != 1 || w.domain != Domain::Z {
        return Err(Error::DomainMismatch("tail certificates need a sequence and a weight on Z".into()));
    }
    let rho = rho_pair(w)?;
    let side = |fit: &TailFit, growth: f64| -> Result<SideCertificate> {
        let log_ratio = p * (fit.rate.ln() + growth.ln());
        let weighted_slope = weighted_slope(g, fit.fit_window, p, w)?;
        let verdict = if log_ratio < -margin && weighted_slope < -margin {
            Verdict::Member
        } else if (log_ratio >= margin && weighted_slope >= -margin)
            || (log_ratio.abs() < margin && weighted_slope >= -margin && fit.residual < GEOMETRIC_RESIDUAL)
        {
            Verdict::NotMember
        } else {
            Verdict::Inconclusive
        };
        Ok(SideCertificate { log_ratio, tail_ratio: log_ratio.exp(), weighted_slope, fit_residual: fit.residual, verdict })
    };
    let neg = decay.neg.as_ref().map(|f| side(f, 1.0 / rho.rho1)).transpose()?;
    let pos = decay.pos.as_ref().map(|f| side(f, rho.rho2)).transpose()?;
    let verdict = [&neg, &pos].iter().fold(Verdict::Member, |acc, s| match s {
        Some(s) => acc.combine(s.verdict),
        None => acc,
    });
    let tail_ratio = [&neg, &pos].iter().filter_map(|s| s.as_ref().map(|s| s.tail_ratio)).fold(0.0, f64::max);
    Ok(MembershipCertificate { verdict, partial_norm, tail_ratio, neg, pos, margin })
}

fn weighted_slope(g: &Sequence, window: (i64, i64), p: f64, w: &Weight) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in window.0..=window.1 {
        let a = g.get(n).map(|v| v.norm()).unwrap_or(0.0);
        if a > 0.0 {
            xs.push(n.unsigned_abs() as f64);
            ys.push(p * (a.ln() + w.eval_z(n)?.ln()));
        }
    }
    Ok(crate::wiener::least_squares(&xs, &ys).0)
}
