//! Scalar Laurent polynomials and their nonzero roots.
//!
//! Roots are the eigenvalues of the balanced companion matrix of
//! `z^(-lo) p(z)`, found with shifted complex QR on the Hessenberg form and
//! polished by a few Newton steps on the original coefficients.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    /// Exponent of `coeffs[0]`.
    pub lo: i64,
    pub coeffs: Vec<Complex64>,
}

impl LaurentPoly {
    pub fn new(lo: i64, coeffs: Vec<Complex64>) -> Self {
        Self { lo, coeffs }.trimmed()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(0, vec![c])
    }

    pub fn zero() -> Self {
        Self { lo: 0, coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    /// Drops exactly zero coefficients at both ends.
    pub fn trimmed(mut self) -> Self {
        while self.coeffs.last() == Some(&ZERO) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| **c == ZERO).count();
        if lead == self.coeffs.len() {
            return Self::zero();
        }
        self.coeffs.drain(..lead);
        self.lo += lead as i64;
        self
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.lo as i32)
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let mut coeffs = vec![ZERO; (hi - lo + 1) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(self.lo - lo) as usize + i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[(other.lo - lo) as usize + i] += c;
        }
        Self::new(lo, coeffs)
    }

    pub fn neg(&self) -> Self {
        Self { lo: self.lo, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(self.lo + other.lo, coeffs)
    }

    /// Nonzero roots with multiplicity.
    pub fn roots(&self) -> Vec<Complex64> {
        polynomial_roots(&self.coeffs)
    }
}

/// Roots of `sum a_k z^k` (ascending coefficients) other than `z = 0`.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let first = match coeffs.iter().position(|c| *c != ZERO) {
        Some(i) => i,
        None => return Vec::new(),
    };
    let last = coeffs.iter().rposition(|c| *c != ZERO).unwrap();
    let a = &coeffs[first..=last];
    let n = a.len() - 1;
    match n {
        0 => Vec::new(),
        1 => vec![-a[0] / a[1]],
        _ => {
            let lead = a[n];
            let mut h = vec![ZERO; n * n];
            for i in 1..n {
                h[i * n + i - 1] = Complex64::new(1.0, 0.0);
            }
            for i in 0..n {
                h[i * n + n - 1] = -a[i] / lead;
            }
            balance(&mut h, n);
            let mut roots = hessenberg_eigenvalues(&mut h, n);
            for r in roots.iter_mut() {
                *r = newton_polish(a, *r);
            }
            roots
        }
    }
}

fn newton_polish(a: &[Complex64], mut z: Complex64) -> Complex64 {
    let eval = |z: Complex64| {
        let mut p = ZERO;
        let mut dp = ZERO;
        for c in a.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let (mut p, _) = eval(z);
    for _ in 0..4 {
        let (_, dp) = eval(z);
        if dp == ZERO {
            break;
        }
        let cand = z - p / dp;
        let (pc, _) = eval(cand);
        if pc.norm() < p.norm() {
            z = cand;
            p = pc;
        } else {
            break;
        }
    }
    z
}

/// Parlett-Reinsch balancing with powers of two.
fn balance(h: &mut [Complex64], n: usize) {
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += h[j * n + i].l1_norm();
                    r += h[i * n + j].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    h[i * n + j] /= f;
                    h[j * n + i] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by explicitly shifted QR.
fn hessenberg_eigenvalues(h: &mut [Complex64], n: usize) -> Vec<Complex64> {
    let at = |i: usize, j: usize| i * n + j;
    let mut eig = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut rot: Vec<(f64, Complex64)> = vec![(0.0, ZERO); n];
    loop {
        if hi == 0 {
            eig.push(h[at(0, 0)]);
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[at(l, l)].l1_norm() + h[at(l - 1, l - 1)].l1_norm();
            if h[at(l, l - 1)].l1_norm() <= f64::EPSILON * s.max(f64::MIN_POSITIVE) {
                h[at(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig.push(h[at(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 500 {
            // give up on the remaining block; its diagonal is the best estimate
            for k in (l..=hi).rev() {
                eig.push(h[at(k, k)]);
            }
            if l == 0 {
                break;
            }
            hi = l - 1;
            iter = 0;
            continue;
        }
        let mu = if iter % 11 == 10 {
            h[at(hi, hi)] + Complex64::new(0.75, 0.5) * h[at(hi, hi - 1)].norm()
        } else {
            let a = h[at(hi - 1, hi - 1)];
            let b = h[at(hi - 1, hi)];
            let c = h[at(hi, hi - 1)];
            let d = h[at(hi, hi)];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let l1 = (a + d) * 0.5 + disc;
            let l2 = (a + d) * 0.5 - disc;
            if (l1 - d).norm() < (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };
        for k in l..=hi {
            h[at(k, k)] -= mu;
        }
        for k in l..hi {
            let x = h[at(k, k)];
            let y = h[at(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (1.0, ZERO)
            } else if x.norm() == 0.0 {
                (0.0, Complex64::new(1.0, 0.0))
            } else {
                (x.norm() / r, (x / x.norm()) * y.conj() / r)
            };
            rot[k] = (c, s);
            for j in k..=hi {
                let u = h[at(k, j)];
                let v = h[at(k + 1, j)];
                h[at(k, j)] = u * c + s * v;
                h[at(k + 1, j)] = -s.conj() * u + v * c;
            }
        }
        for k in l..hi {
            let (c, s) = rot[k];
            let top = (k + 2).min(hi);
            for i in l..=top {
                let u = h[at(i, k)];
                let v = h[at(i, k + 1)];
                h[at(i, k)] = u * c + v * s.conj();
                h[at(i, k + 1)] = -u * s + v * c;
            }
        }
        for k in l..=hi {
            h[at(k, k)] += mu;
        }
    }
    eig
}

/// Determinant of a square matrix of Laurent polynomials by cofactor expansion.
pub fn laurent_det(m: &[LaurentPoly], d: usize) -> LaurentPoly {
    match d {
        0 => LaurentPoly::constant(Complex64::new(1.0, 0.0)),
        1 => m[0].clone(),
        _ => {
            let mut acc = LaurentPoly::zero();
            for j in 0..d {
                if m[j].is_zero() {
                    continue;
                }
                let minor: Vec<LaurentPoly> =
                    (1..d).flat_map(|r| (0..d).filter(move |&c| c != j).map(move |c| (r, c))).map(|(r, c)| m[r * d + c].clone()).collect();
                let term = m[j].mul(&laurent_det(&minor, d - 1));
                acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sorted_by_modulus(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
        v
    }

    #[test]
    fn linear_and_quadratic_roots() {
        let p = LaurentPoly::new(0, vec![c(2.0), c(-1.0)]);
        let r = p.roots();
        assert_eq!(r.len(), 1);
        assert!((r[0] - c(2.0)).norm() < 1e-15);

        let q = LaurentPoly::new(-1, vec![c(1.0), c(-2.5), c(1.0)]);
        let r = sorted_by_modulus(q.roots());
        assert!((r[0] - c(0.5)).norm() < 1e-13);
        assert!((r[1] - c(2.0)).norm() < 1e-13);
    }

    #[test]
    fn trimming_removes_zero_roots() {
        let p = LaurentPoly::new(-2, vec![c(0.0), c(0.0), c(-3.0), c(1.0), c(0.0)]);
        assert_eq!(p.lo, 0);
        assert_eq!(p.hi(), 1);
        assert!((p.roots()[0] - c(3.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_of_unity() {
        let mut coeffs = vec![c(0.0); 9];
        coeffs[0] = c(-1.0);
        coeffs[8] = c(1.0);
        let r = polynomial_roots(&coeffs);
        assert_eq!(r.len(), 8);
        for z in r {
            assert!((z.norm() - 1.0).abs() < 1e-13);
            assert!((z.powi(8) - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn cofactor_determinant_of_diagonal_symbol() {
        let a = LaurentPoly::new(0, vec![c(2.0), c(-1.0)]);
        let b = LaurentPoly::new(0, vec![c(3.0), c(-1.0)]);
        let m = vec![a.clone(), LaurentPoly::zero(), LaurentPoly::zero(), b.clone()];
        assert_eq!(laurent_det(&m, 2), a.mul(&b));
    }

    proptest! {
        #[test]
        fn roots_reproduce_prescribed_factors(
            raw in proptest::collection::vec((0.2..3.0f64, 0.0..std::f64::consts::TAU), 1..12)
        ) {
            let roots: Vec<Complex64> = raw.iter().map(|(m, a)| Complex64::from_polar(*m, *a)).collect();
            let mut p = LaurentPoly::constant(c(1.0));
            for r in &roots {
                p = p.mul(&LaurentPoly::new(0, vec![-r, c(1.0)]));
            }
            let found = p.roots();
            prop_assert_eq!(found.len(), roots.len());
            for r in &roots {
                let best = found.iter().map(|z| (z - r).norm()).fold(f64::INFINITY, f64::min);
                // clustered roots lose accuracy like eps^(1/multiplicity)
                prop_assert!(best < 1e-4 * (1.0 + r.norm()), "root {} missed by {}", r, best);
            }
            for z in &found {
                prop_assert!(p.eval(*z).norm() <= 1e-8 * p.coeffs.iter().map(|c| c.norm()).sum::<f64>() * (1.0 + z.norm()).powi(roots.len() as i32));
            }
        }
    }
}
