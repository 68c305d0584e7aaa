use crate::algebra::{AlgebraElement, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::poly::{laurent_det, LaurentPoly};
use crate::sequences::{sample_circle, Sequence};
use crate::weights::RhoZ;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusOptions {
    pub tol: f64,
    /// Relative back-off `delta` from root moduli.
    pub margin: f64,
    /// Radii sampled between root moduli for matrix symbols.
    pub radius_grid: usize,
    pub angle_grid: usize,
}

impl Default for AnnulusOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, margin: 0.01, radius_grid: 8, angle_grid: 64 }
    }
}

/// Open annulus `inner < |z| < outer` on which the symbol is invertible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
    /// `[r, s]` with `inner < r <= 1 <= s < outer`, intersected with the weight's rates.
    pub closed_clamp: Option<[f64; 2]>,
    /// Nonzero roots of `det f^`.
    pub roots: Vec<Complex64>,
    /// Set when the radius grid found a non-invertible sample away from the roots.
    pub grid_shrunk: bool,
}

impl Annulus {
    pub fn contains(&self, radius: f64) -> bool {
        self.inner < radius && radius < self.outer
    }

    /// Radii backed off from the annulus boundary by the relative margin, staying on the right side of 1.
    pub fn caps(&self, margin: f64) -> (f64, f64) {
        let r = if self.inner == 0.0 { 0.0 } else { (self.inner * (1.0 + margin)).min(self.inner.sqrt()) };
        let s = if self.outer.is_infinite() { f64::INFINITY } else { (self.outer * (1.0 - margin)).max(self.outer.sqrt()) };
        (r, s)
    }
}

/// Drops end coefficients that are round-off relative to the largest one.
pub(crate) fn trim_relative(p: LaurentPoly) -> LaurentPoly {
    let max = p.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let keep = |c: &Complex64| c.norm() > 1e-14 * max;
    let first = match p.coeffs.iter().position(keep) {
        Some(i) => i,
        None => return LaurentPoly::zero(),
    };
    let last = p.coeffs.iter().rposition(keep).unwrap();
    LaurentPoly::new(p.lo + first as i64, p.coeffs[first..=last].to_vec())
}

/// Entry `(i, j)` of a matrix sequence on Z as a Laurent polynomial.
pub(crate) fn entry_poly(f: &Sequence, i: usize, j: usize) -> LaurentPoly {
    let (lo, _) = f.window();
    LaurentPoly::new(lo, f.values().iter().map(|v| v.get(i, j)).collect())
}

/// `det f^(z)` as a Laurent polynomial: cofactor expansion for `d <= 4`, interpolation on the circle otherwise.
pub(crate) fn det_poly(f: &Sequence) -> LaurentPoly {
    let d = f.coeff_dim();
    if d <= 4 {
        let entries: Vec<LaurentPoly> = (0..d * d).map(|k| entry_poly(f, k / d, k % d)).collect();
        return trim_relative(laurent_det(&entries, d));
    }
    let (lo, hi) = f.window();
    let (dlo, dhi) = (d as i64 * lo, d as i64 * hi);
    let width = (dhi - dlo + 1) as usize;
    let k = width.next_power_of_two().max(8);
    let mut buf: Vec<Complex64> = sample_circle(f, 1.0, k).iter().map(AlgebraElement::det).collect();
    FftPlanner::new().plan_fft_forward(k).process(&mut buf);
    let coeffs = (dlo..=dhi).map(|n| buf[n.rem_euclid(k as i64) as usize] / k as f64).collect();
    trim_relative(LaurentPoly::new(dlo, coeffs))
}

pub(crate) fn on_circle(root: Complex64, tol: f64) -> bool {
    (root.norm() - 1.0).abs() <= tol * (1.0 + root.norm())
}

pub(crate) fn split_roots(roots: &[Complex64]) -> (f64, f64) {
    let inner = roots.iter().map(|r| r.norm()).filter(|m| *m < 1.0).fold(0.0, f64::max);
    let outer = roots.iter().map(|r| r.norm()).filter(|m| *m > 1.0).fold(f64::INFINITY, f64::min);
    (inner, outer)
}

/// Maximal open annulus around the unit circle on which `f^` is invertible.
pub fn invertibility_annulus(f: &Sequence, clamp: Option<&RhoZ>, opts: &AnnulusOptions) -> Result<Annulus> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch("invertibility_annulus needs a sequence on Z".into()));
    }
    let det = det_poly(f);
    if det.is_zero() {
        return Err(Error::NotInvertibleOnTorus("det f^ vanishes identically".into()));
    }
    let roots = det.roots();
    if let Some(r) = roots.iter().find(|r| on_circle(**r, opts.tol)) {
        return Err(Error::NotInvertibleOnTorus(format!("root {r} on the unit circle")));
    }
    let width = f.shape()[0];
    let k = (2 * width).next_power_of_two().max(opts.angle_grid.next_power_of_two());
    if let Some(j) = sample_circle(f, 1.0, k).iter().position(|v| !v.is_invertible(opts.tol)) {
        return Err(Error::NotInvertibleOnTorus(format!("sample {j} of {k} on the unit circle is singular")));
    }
    let (mut inner, mut outer) = split_roots(&roots);
    let mut grid_shrunk = false;
    if f.coeff_dim() > 1 && opts.radius_grid > 0 {
        let half = opts.radius_grid.div_ceil(2);
        let k = opts.angle_grid.next_power_of_two().max((2 * width).next_power_of_two());
        let top = if outer.is_finite() { outer } else { 4.0 };
        for i in 1..=half {
            let t = i as f64 / (half + 1) as f64;
            for radius in [1.0 - (1.0 - inner) * t, 1.0 + (top - 1.0) * t] {
                if !(inner < radius && radius < outer) {
                    continue;
                }
                if sample_circle(f, radius, k).iter().any(|v| !v.is_invertible(opts.tol)) {
                    grid_shrunk = true;
                    if radius < 1.0 {
                        inner = inner.max(radius);
                    } else {
                        outer = outer.min(radius);
                    }
                }
            }
        }
    }
    let mut ann = Annulus { inner, outer, closed_clamp: None, roots, grid_shrunk };
    if let Some(rho) = clamp {
        let (r_cap, s_cap) = ann.caps(opts.margin);
        ann.closed_clamp = Some([rho.rho1.max(r_cap), rho.rho2.min(s_cap)]);
    }
    Ok(ann)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{rho_pair, Weight};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn linear_symbol() {
        let f = Sequence::scalars(0, &[2.0, -1.0]);
        let a = invertibility_annulus(&f, None, &AnnulusOptions::default()).unwrap();
        assert_eq!(a.inner, 0.0);
        assert!((a.outer - 2.0).abs() < 1e-14);
        let rho = rho_pair(&Weight::exponential(0.0)).unwrap();
        let a = invertibility_annulus(&f, Some(&rho), &AnnulusOptions::default()).unwrap();
        let [r, s] = a.closed_clamp.unwrap();
        assert_eq!(r, (-1f64).exp());
        assert!((s - 1.98).abs() < 1e-13);
    }

    #[test]
    fn unit_and_quadratic_symbols() {
        let a = invertibility_annulus(&Sequence::delta(1), None, &AnnulusOptions::default()).unwrap();
        assert_eq!((a.inner, a.outer), (0.0, f64::INFINITY));
        let a = invertibility_annulus(&Sequence::scalars(-1, &[1.0, -2.5, 1.0]), None, &AnnulusOptions::default()).unwrap();
        assert!((a.inner - 0.5).abs() < 1e-14 && (a.outer - 2.0).abs() < 1e-14);
    }

    #[test]
    fn root_on_the_circle_is_rejected() {
        let e = invertibility_annulus(&Sequence::scalars(0, &[1.0, -1.0]), None, &AnnulusOptions::default());
        assert!(matches!(e, Err(Error::NotInvertibleOnTorus(_))));
    }

    #[test]
    fn matrix_symbols_use_the_determinant() {
        let d = |a: f64, b: f64| AlgebraElement::diag(&[c(a), c(b)]);
        let f = Sequence::new(0, vec![d(2.0, 3.0), d(-1.0, -1.0)]).unwrap();
        let a = invertibility_annulus(&f, None, &AnnulusOptions::default()).unwrap();
        assert!((a.outer - 2.0).abs() < 1e-13 && !a.grid_shrunk);
        // d = 5 goes through interpolation
        let big = |v: [f64; 5]| AlgebraElement::diag(&v.map(c));
        let g =
            Sequence::new(-1, vec![big([0.0, 0.0, 0.25, 0.0, 0.0]), big([3.0, 4.0, 1.0, 5.0, 6.0]), big([-1.0, -1.0, 0.0, -1.0, -1.0])])
                .unwrap();
        let a = invertibility_annulus(&g, None, &AnnulusOptions::default()).unwrap();
        assert!((a.outer - 3.0).abs() < 1e-10);
        assert!((a.inner - 0.25).abs() < 1e-10);
    }
}
