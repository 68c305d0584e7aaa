#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use wiener_forge::{AlgebraElement, Sequence};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn frobenius(m: &AlgebraElement) -> f64 {
    m.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Random symbol on `[-3, 3]` with `f(0) = c I` dominating the rest, so `sigma_min(f^(z)) >= 0.3` on the circle.
pub fn random_symbol<R: Rng>(rng: &mut R, d: usize) -> Sequence {
    let lead = rng.gen_range(1.5..3.0);
    let budget = rng.gen_range(0.1..0.7) * (lead - 0.3);
    let mut rest: Vec<AlgebraElement> = (0..7)
        .map(|_| {
            let data = (0..d * d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            AlgebraElement::matrix(d, data).unwrap()
        })
        .collect();
    let total: f64 = rest.iter().map(frobenius).sum();
    for m in &mut rest {
        *m = m.scale(budget / total);
    }
    rest[3] = rest[3].add(&AlgebraElement::identity(d).scale(lead)).unwrap();
    Sequence::new(-3, rest).unwrap()
}

pub fn min_singular_on_circle(f: &Sequence, samples: usize) -> f64 {
    (0..samples)
        .map(|k| {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / samples as f64);
            let v = f.symbol_eval(z).unwrap();
            v.singular_values().into_iter().fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Inverse of `f` on `[-n, n]` from the finite section of its block Laurent operator,
/// solved by banded Gaussian elimination with partial pivoting.
pub fn toeplitz_inverse(f: &Sequence, n: i64) -> Vec<AlgebraElement> {
    let d = f.coeff_dim();
    let (flo, fhi) = f.window();
    let blocks = (2 * n + 1) as usize;
    let size = blocks * d;
    let band = ((fhi - flo + 1) as usize) * d;
    let mut a = vec![Complex64::new(0.0, 0.0); size * size];
    for bi in 0..blocks {
        for bj in 0..blocks {
            let k = bi as i64 - bj as i64;
            if let Some(v) = f.get(k) {
                for i in 0..d {
                    for j in 0..d {
                        a[(bi * d + i) * size + bj * d + j] = v.get(i, j);
                    }
                }
            }
        }
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); size * d];
    for i in 0..d {
        rhs[(n as usize * d + i) * d + i] = c(1.0, 0.0);
    }
    let reach = 2 * band + 1;
    for k in 0..size {
        let last = (k + band + 1).min(size);
        let piv = (k..last).max_by(|&x, &y| a[x * size + k].norm().total_cmp(&a[y * size + k].norm())).unwrap();
        if piv != k {
            for j in k..(k + reach).min(size) {
                a.swap(k * size + j, piv * size + j);
            }
            for j in 0..d {
                rhs.swap(k * d + j, piv * d + j);
            }
        }
        let p = a[k * size + k];
        for i in k + 1..last {
            let l = a[i * size + k] / p;
            if l == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k..(k + reach).min(size) {
                let t = a[k * size + j];
                a[i * size + j] -= l * t;
            }
            for j in 0..d {
                let t = rhs[k * d + j];
                rhs[i * d + j] -= l * t;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); size * d];
    for k in (0..size).rev() {
        for j in 0..d {
            let mut s = rhs[k * d + j];
            for m in k + 1..(k + reach).min(size) {
                s -= a[k * size + m] * x[m * d + j];
            }
            x[k * d + j] = s / a[k * size + k];
        }
    }
    (0..blocks)
        .map(|b| {
            let data = (0..d * d).map(|e| x[(b * d + e / d) * d + e % d]).collect();
            AlgebraElement::matrix(d, data).unwrap()
        })
        .collect()
}

pub fn max_diff(a: &AlgebraElement, b: &AlgebraElement) -> f64 {
    a.entries().iter().zip(b.entries()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
