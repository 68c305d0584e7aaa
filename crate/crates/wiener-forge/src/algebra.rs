//! The coefficient algebra: complex scalars and dense complex `d x d` matrices.
//!
//! A scalar is stored as a `1 x 1` matrix. The default norm is the entrywise
//! l2 (Frobenius) norm, which is submultiplicative; the induced 2-norm is
//! available through [`NormKind::Induced2`].

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    #[default]
    Entrywise,
    Induced2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    dim: usize,
    data: Vec<Complex64>,
}

impl AlgebraElement {
    pub fn scalar(c: impl Into<Complex64>) -> Self {
        Self { dim: 1, data: vec![c.into()] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zero(values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = *v;
        }
        m
    }

    /// Row-major entries; `data.len()` must be a perfect square.
    pub fn matrix(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!("{} entries for a {dim}x{dim} matrix", data.len())));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("matrix rows must form a square array".into()));
        }
        Self::matrix(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn as_scalar(&self) -> Option<Complex64> {
        self.is_scalar().then(|| self.data[0])
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!("dimension {} against {}", self.dim, other.dim)));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        out.mul_acc(self, other);
        Ok(out)
    }

    /// `self += a * b` without dimension checks.
    pub(crate) fn mul_acc(&mut self, a: &Self, b: &Self) {
        let d = self.dim;
        for i in 0..d {
            for k in 0..d {
                let aik = a.data[i * d + k];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    self.data[i * d + j] += aik * b.data[k * d + j];
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() })
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        Self { dim: self.dim, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_with(NormKind::Entrywise)
    }

    pub fn norm_with(&self, kind: NormKind) -> f64 {
        if self.is_scalar() {
            return self.data[0].norm();
        }
        match kind {
            NormKind::Entrywise => self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            NormKind::Induced2 => self.singular_values()[0],
        }
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let d = self.dim;
        let mut gram = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.data[k * d + i].conj() * self.data[k * d + j];
                }
                gram[i * d + j] = acc;
            }
        }
        let mut ev: Vec<f64> = hermitian_eigenvalues(&gram, d).into_iter().map(|l| l.max(0.0).sqrt()).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn det(&self) -> Complex64 {
        match lu(self) {
            Some(f) => f.det(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn invert(&self, tol: f64) -> Result<Self> {
        let d = self.dim;
        let scale = self.data.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let threshold = tol * scale;
        let f = lu(self).ok_or(Error::Singular { pivot: 0.0, threshold })?;
        let min_pivot = f.min_pivot();
        if !(min_pivot > threshold) {
            return Err(Error::Singular { pivot: min_pivot, threshold });
        }
        let mut inv = f.inverse();
        let one = Self::identity(d);
        let mut residual = self.residual(&inv, &one);
        if residual > tol {
            // one step of iterative refinement: X <- X + X (I - A X)
            let mut ax = Self::zero(d);
            ax.mul_acc(self, &inv);
            let corr_rhs = one.sub(&ax)?;
            let mut corr = Self::zero(d);
            corr.mul_acc(&inv, &corr_rhs);
            inv = inv.add(&corr)?;
            residual = self.residual(&inv, &one);
        }
        if residual > tol {
            return Err(Error::Inaccurate { residual, tol });
        }
        Ok(inv)
    }

    fn residual(&self, inv: &Self, one: &Self) -> f64 {
        let mut ab = Self::zero(self.dim);
        ab.mul_acc(self, inv);
        let mut ba = Self::zero(self.dim);
        ba.mul_acc(inv, self);
        let r1 = ab.sub(one).map(|x| x.norm()).unwrap_or(f64::INFINITY);
        let r2 = ba.sub(one).map(|x| x.norm()).unwrap_or(f64::INFINITY);
        r1.max(r2)
    }

    pub fn is_invertible(&self, tol: f64) -> bool {
        self.invert(tol).is_ok()
    }
}

struct Lu {
    dim: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    sign: f64,
}

/// Gaussian elimination with partial pivoting. `None` only for an exactly zero column.
fn lu(a: &AlgebraElement) -> Option<Lu> {
    let d = a.dim;
    let mut m = a.data.clone();
    let mut perm: Vec<usize> = (0..d).collect();
    let mut sign = 1.0;
    for k in 0..d {
        let p = (k..d).max_by(|&i, &j| m[i * d + k].norm().total_cmp(&m[j * d + k].norm()))?;
        if m[p * d + k].norm() == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..d {
                m.swap(k * d + j, p * d + j);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let pivot = m[k * d + k];
        for i in k + 1..d {
            let factor = m[i * d + k] / pivot;
            m[i * d + k] = factor;
            for j in k + 1..d {
                let t = m[k * d + j];
                m[i * d + j] -= factor * t;
            }
        }
    }
    Some(Lu { dim: d, lu: m, perm, sign })
}

impl Lu {
    fn det(&self) -> Complex64 {
        let d = self.dim;
        (0..d).fold(Complex64::new(self.sign, 0.0), |acc, i| acc * self.lu[i * d + i])
    }

    fn min_pivot(&self) -> f64 {
        let d = self.dim;
        (0..d).map(|i| self.lu[i * d + i].norm()).fold(f64::INFINITY, f64::min)
    }

    fn inverse(&self) -> AlgebraElement {
        let d = self.dim;
        let mut inv = AlgebraElement::zero(d);
        for col in 0..d {
            let mut x: Vec<Complex64> =
                (0..d).map(|i| if self.perm[i] == col { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect();
            for i in 0..d {
                for j in 0..i {
                    let t = x[j];
                    x[i] -= self.lu[i * d + j] * t;
                }
            }
            for i in (0..d).rev() {
                for j in i + 1..d {
                    let t = x[j];
                    x[i] -= self.lu[i * d + j] * t;
                }
                x[i] /= self.lu[i * d + i];
            }
            for (i, v) in x.iter().enumerate() {
                inv.data[i * d + col] = *v;
            }
        }
        inv
    }
}

/// Eigenvalues of a Hermitian matrix through the real symmetric embedding
/// `[[X, -Y], [Y, X]]` and cyclic Jacobi rotations.
fn hermitian_eigenvalues(h: &[Complex64], n: usize) -> Vec<f64> {
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[i * n + j];
            a[i * m + j] = z.re;
            a[(i + n) * m + j + n] = z.re;
            a[i * m + j + n] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total || off == 0.0 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    // every eigenvalue of the embedding appears twice
    ev.into_iter().step_by(2).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ElementRepr {
    Scalar([f64; 2]),
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = if self.is_scalar() {
            ElementRepr::Scalar([self.data[0].re, self.data[0].im])
        } else {
            ElementRepr::Matrix(self.data.chunks(self.dim).map(|row| row.iter().map(|c| [c.re, c.im]).collect()).collect())
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ElementRepr::deserialize(d)? {
            ElementRepr::Scalar([re, im]) => Ok(Self::scalar(Complex64::new(re, im))),
            ElementRepr::Matrix(rows) => {
                let rows: Vec<Vec<Complex64>> =
                    rows.into_iter().map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()).collect();
                Self::from_rows(&rows).map_err(serde::de::Error::custom)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mat2(a: f64, b: f64, cc: f64, d: f64) -> AlgebraElement {
        AlgebraElement::from_rows(&[vec![c(a), c(b)], vec![c(cc), c(d)]]).unwrap()
    }

    #[test]
    fn unit_is_identity_for_mul() {
        let a = mat2(1.0, 2.0, 3.0, 4.0);
        assert_eq!(AlgebraElement::identity(2).mul(&a).unwrap(), a);
    }

    #[test]
    fn scalar_and_diagonal_products() {
        let p = AlgebraElement::scalar(2.0).mul(&AlgebraElement::scalar(3.0)).unwrap();
        assert_eq!(p.as_scalar(), Some(c(6.0)));
        let d = AlgebraElement::diag(&[c(2.0), c(3.0)]).mul(&AlgebraElement::diag(&[c(5.0), c(7.0)])).unwrap();
        assert_eq!(d, AlgebraElement::diag(&[c(10.0), c(21.0)]));
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let e = AlgebraElement::scalar(1.0).mul(&AlgebraElement::identity(2));
        assert!(matches!(e, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn norms_of_simple_elements() {
        assert_eq!(AlgebraElement::scalar(-3.0).norm(), 3.0);
        assert_relative_eq!(AlgebraElement::identity(2).norm(), 2f64.sqrt());
        assert_relative_eq!(AlgebraElement::diag(&[c(3.0), c(4.0)]).norm(), 5.0);
        assert_relative_eq!(AlgebraElement::diag(&[c(3.0), c(4.0)]).norm_with(NormKind::Induced2), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn inverses_of_simple_elements() {
        assert_eq!(AlgebraElement::scalar(2.0).invert(DEFAULT_TOL).unwrap().as_scalar(), Some(c(0.5)));
        assert_eq!(AlgebraElement::identity(3).invert(DEFAULT_TOL).unwrap(), AlgebraElement::identity(3));
        let inv = AlgebraElement::diag(&[c(2.0), c(4.0)]).invert(DEFAULT_TOL).unwrap();
        assert_eq!(inv, AlgebraElement::diag(&[c(0.5), c(0.25)]));
    }

    #[test]
    fn singular_elements_are_detected() {
        assert!(!AlgebraElement::scalar(0.0).is_invertible(DEFAULT_TOL));
        assert!(AlgebraElement::identity(2).is_invertible(DEFAULT_TOL));
        assert!(!mat2(1.0, 1.0, 1.0, 1.0).is_invertible(DEFAULT_TOL));
        assert!(matches!(mat2(1.0, 1.0, 1.0, 1.0).invert(DEFAULT_TOL), Err(Error::Singular { .. })));
    }

    #[test]
    fn determinant_and_singular_values() {
        let a = mat2(1.0, 2.0, 3.0, 4.0);
        assert_relative_eq!(a.det().re, -2.0, epsilon = 1e-12);
        let sv = a.singular_values();
        assert_relative_eq!(sv[0] * sv[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(sv[0] * sv[0] + sv[1] * sv[1], 30.0, epsilon = 1e-10);
    }

    #[test]
    fn json_round_trip() {
        let m = AlgebraElement::from_rows(&[vec![c(2.0), Complex64::new(0.0, 1.0)], vec![c(0.0), c(2.0)]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[2.0,0.0],[0.0,1.0]],[[0.0,0.0],[2.0,0.0]]]");
        assert_eq!(serde_json::from_str::<AlgebraElement>(&s).unwrap(), m);
        let z: AlgebraElement = serde_json::from_str("[1.5,-2.0]").unwrap();
        assert_eq!(z.as_scalar(), Some(Complex64::new(1.5, -2.0)));
    }

    fn element(dim: usize) -> impl Strategy<Value = AlgebraElement> {
        proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64), dim * dim)
            .prop_map(move |v| AlgebraElement::matrix(dim, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
    }

    fn pair() -> impl Strategy<Value = (AlgebraElement, AlgebraElement)> {
        (1usize..5).prop_flat_map(|d| (element(d), element(d)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn norm_is_submultiplicative((a, b) in pair()) {
            let ab = a.mul(&b).unwrap();
            for kind in [NormKind::Entrywise, NormKind::Induced2] {
                prop_assert!(ab.norm_with(kind) <= a.norm_with(kind) * b.norm_with(kind) * (1.0 + 1e-12) + 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn double_inverse_is_identity(a in (1usize..5).prop_flat_map(element)) {
            let d = a.dim();
            // shift the spectrum away from zero to keep the matrix well conditioned
            let shifted = a.add(&AlgebraElement::identity(d).scale(30.0)).unwrap();
            let back = shifted.invert(DEFAULT_TOL).unwrap().invert(DEFAULT_TOL).unwrap();
            prop_assert!(back.sub(&shifted).unwrap().norm() <= 2.0 * DEFAULT_TOL * shifted.norm());
        }

        #[test]
        fn near_identity_is_invertible(a in (1usize..5).prop_flat_map(element), t in 0.0..0.999f64) {
            let d = a.dim();
            let n = a.norm();
            prop_assume!(n > 0.0);
            let x = AlgebraElement::identity(d).sub(&a.scale(t / n)).unwrap();
            prop_assert!(AlgebraElement::identity(d).sub(&x).unwrap().norm() < 1.0);
            prop_assert!(x.is_invertible(DEFAULT_TOL));
        }
    }
}
