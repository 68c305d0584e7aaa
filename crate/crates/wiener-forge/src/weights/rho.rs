use super::{Domain, Family, Weight};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const UNIT_TOL: f64 = 1e-12;

fn is_one(x: f64) -> bool {
    (x - 1.0).abs() <= UNIT_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoZ {
    pub rho1: f64,
    pub rho2: f64,
    pub approximate: bool,
    pub admissible_rho: bool,
}

impl RhoZ {
    fn new(rho1: f64, rho2: f64, approximate: bool) -> Self {
        Self { rho1, rho2, approximate, admissible_rho: is_one(rho1) && is_one(rho2) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoZ2 {
    pub rho1: f64,
    pub rho2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub approximate: bool,
    pub admissible_rho: bool,
}

impl RhoZ2 {
    fn new(rho1: f64, rho2: f64, mu1: f64, mu2: f64, approximate: bool) -> Self {
        let admissible_rho = [rho1, rho2, mu1, mu2].iter().all(|x| is_one(*x));
        Self { rho1, rho2, mu1, mu2, approximate, admissible_rho }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoZN {
    /// `(position, rho_i, mu_i)` for the listed coordinates; all others are `(1, 1)`.
    pub coordinates: Vec<(usize, f64, f64)>,
    pub s_omega: Vec<usize>,
    /// `|S_omega|`: the weight is m-nonadmissible with this m.
    pub nonadmissible_order: usize,
    pub admissible_rho: bool,
}

/// Log-scale abscissas on R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoR {
    pub rho1: f64,
    pub rho2: f64,
    pub approximate: bool,
    pub admissible_rho: bool,
}

/// `rho1 = sup_{n <= -1} w(n)^{1/n}` and `rho2 = inf_{n >= 1} w(n)^{1/n}` on Z.
pub fn rho_pair(w: &Weight) -> Result<RhoZ> {
    if w.domain != Domain::Z {
        return Err(Error::DomainMismatch(format!("rho_pair needs a Z weight, got {:?}", w.domain)));
    }
    Ok(match &w.family {
        Family::StepGeometric { r, s } => RhoZ::new(*r, *s, false),
        Family::Polynomial { .. } | Family::Subexponential { .. } => RhoZ::new(1.0, 1.0, false),
        Family::Exponential { r } => {
            let c = 1.0 / (r + 1.0);
            RhoZ::new((-c).exp(), c.exp(), false)
        }
        Family::Tabulated { lo, hi, values } => {
            let mut rho1: f64 = 0.0;
            let mut rho2 = f64::INFINITY;
            for (i, v) in values.iter().enumerate() {
                let n = lo + i as i64;
                if n != 0 {
                    let root = v.powf(1.0 / n as f64);
                    if n < 0 {
                        rho1 = rho1.max(root);
                    } else {
                        rho2 = rho2.min(root);
                    }
                }
            }
            // an empty side carries no information beyond the forced bound
            if *lo >= 0 {
                rho1 = 1.0;
            }
            if *hi <= 0 {
                rho2 = 1.0;
            }
            RhoZ::new(rho1.min(1.0), rho2.max(1.0), true)
        }
        Family::Piecewise { neg, pos, .. } => {
            let a = rho_pair(neg)?;
            let b = rho_pair(pos)?;
            RhoZ::new(a.rho1, b.rho2, a.approximate || b.approximate)
        }
        Family::Hybrid { r, s, .. } => RhoZ::new(r.sqrt(), s.sqrt(), false),
        Family::Scaled { inner, .. } => rho_pair(inner)?,
        Family::Product { a, b } => {
            let x = rho_pair(a)?;
            let y = rho_pair(b)?;
            RhoZ::new(x.rho1 * y.rho1, x.rho2 * y.rho2, x.approximate || y.approximate)
        }
        Family::ProductZ2 { .. } | Family::OrderN { .. } | Family::TabulatedZ2 { .. } | Family::ExpLinearR { .. } => {
            unreachable!("validated Z weight")
        }
    })
}

/// `rho_{1,2}` and `mu_{1,2}` on Z^2, with the square roots of the definition.
pub fn rho_mu_z2(w: &Weight) -> Result<RhoZ2> {
    if w.domain != Domain::Z2 {
        return Err(Error::DomainMismatch(format!("rho_mu_z2 needs a Z2 weight, got {:?}", w.domain)));
    }
    match &w.family {
        Family::ProductZ2 { w1, w2 } if unit_at_origin(w1) && unit_at_origin(w2) => {
            // with w(0) = 1 the cross factor is maximal at m2 = 0, so each axis separates
            let a = rho_pair(w1)?;
            let b = rho_pair(w2)?;
            Ok(RhoZ2::new(a.rho1.sqrt(), a.rho2.sqrt(), b.rho1.sqrt(), b.rho2.sqrt(), a.approximate || b.approximate))
        }
        Family::Polynomial { .. } | Family::Subexponential { .. } => Ok(RhoZ2::new(1.0, 1.0, 1.0, 1.0, false)),
        Family::Exponential { r } => {
            let c = 0.5 / (r + 1.0);
            Ok(RhoZ2::new((-c).exp(), c.exp(), (-c).exp(), c.exp(), false))
        }
        Family::Scaled { inner, .. } => rho_mu_z2(inner),
        Family::TabulatedZ2 { lo, hi, .. } => Ok(windowed_z2(w, *lo, *hi)),
        Family::ProductZ2 { w1, w2 } => {
            let (a, b) = (span(w1), span(w2));
            Ok(windowed_z2(w, [a.0, b.0], [a.1, b.1]))
        }
        _ => {
            let (lo, hi) = w.tabulated_window().unwrap_or((-64, 64));
            Ok(windowed_z2(w, [lo, lo], [hi, hi]))
        }
    }
}

fn unit_at_origin(w: &Weight) -> bool {
    w.is_parametric() && w.eval_z(0).map(|v| v == 1.0).unwrap_or(false)
}

fn span(w: &Weight) -> (i64, i64) {
    match w.tabulated_window() {
        Some((lo, hi)) => (lo.max(-64), hi.min(64)),
        None => (-64, 64),
    }
}

fn windowed_z2(w: &Weight, lo: [i64; 2], hi: [i64; 2]) -> RhoZ2 {
    let mut rho1 = 0.0f64;
    let mut rho2 = f64::INFINITY;
    let mut mu1 = 0.0f64;
    let mut mu2 = f64::INFINITY;
    for m1 in lo[0]..=hi[0] {
        for m2 in lo[1]..=hi[1] {
            let v = match w.eval_z2([m1, m2]) {
                Ok(v) => v,
                Err(_) => continue,
            };
            if m1 < 0 {
                rho1 = rho1.max(v.powf(1.0 / m1 as f64));
            } else if m1 > 0 {
                rho2 = rho2.min(v.powf(1.0 / m1 as f64));
            }
            if m2 < 0 {
                mu1 = mu1.max(v.powf(1.0 / m2 as f64));
            } else if m2 > 0 {
                mu2 = mu2.min(v.powf(1.0 / m2 as f64));
            }
        }
    }
    let fix_lo = |x: f64| if x == 0.0 { 1.0 } else { x.min(1.0) };
    let fix_hi = |x: f64| if x.is_infinite() { 1.0 } else { x.max(1.0) };
    RhoZ2::new(fix_lo(rho1).sqrt(), fix_hi(rho2).sqrt(), fix_lo(mu1).sqrt(), fix_hi(mu2).sqrt(), true)
}

/// Coordinates where an order-n weight fails `rho_i = mu_i = 1`.
pub fn s_omega(w: &Weight) -> Result<RhoZN> {
    match &w.family {
        Family::OrderN { positions, rates } => {
            let coordinates: Vec<(usize, f64, f64)> = positions.iter().zip(rates).map(|(p, (r, s))| (*p, *r, *s)).collect();
            let s_omega: Vec<usize> = coordinates.iter().filter(|(_, r, s)| !is_one(*r) || !is_one(*s)).map(|(p, _, _)| *p).collect();
            Ok(RhoZN { nonadmissible_order: s_omega.len(), admissible_rho: s_omega.is_empty(), coordinates, s_omega })
        }
        _ => Err(Error::DomainMismatch("s_omega needs an order_n weight".into())),
    }
}

/// `rho1 = sup_{x < 0} log w(x) / x` and `rho2 = inf_{x > 0} log w(x) / x` on R.
pub fn rho_pair_r(w: &Weight) -> Result<RhoR> {
    if w.domain != Domain::R {
        return Err(Error::DomainMismatch(format!("rho_pair_r needs an R weight, got {:?}", w.domain)));
    }
    let mk = |rho1: f64, rho2: f64, approximate: bool| RhoR {
        rho1,
        rho2,
        approximate,
        admissible_rho: rho1.abs() <= UNIT_TOL && rho2.abs() <= UNIT_TOL,
    };
    Ok(match &w.family {
        Family::ExpLinearR { c } => mk(-c, *c, false),
        Family::Polynomial { .. } | Family::Subexponential { .. } => mk(0.0, 0.0, false),
        Family::Exponential { r } => mk(-1.0 / (r + 1.0), 1.0 / (r + 1.0), false),
        Family::Tabulated { lo, hi, values } => {
            let mut rho1 = f64::NEG_INFINITY;
            let mut rho2 = f64::INFINITY;
            for (i, v) in values.iter().enumerate() {
                let x = (lo + i as i64) as f64;
                if x < 0.0 {
                    rho1 = rho1.max(v.ln() / x);
                } else if x > 0.0 {
                    rho2 = rho2.min(v.ln() / x);
                }
            }
            let rho1 = if rho1.is_finite() { rho1.min(0.0) } else { 0.0 };
            let rho2 = if rho2.is_finite() && *hi > 0 { rho2.max(0.0) } else { 0.0 };
            mk(rho1, rho2, true)
        }
        Family::Piecewise { neg, pos, .. } => {
            let a = rho_pair_r(neg)?;
            let b = rho_pair_r(pos)?;
            mk(a.rho1, b.rho2, a.approximate || b.approximate)
        }
        Family::Scaled { inner, .. } => rho_pair_r(inner)?,
        Family::Product { a, b } => {
            let x = rho_pair_r(a)?;
            let y = rho_pair_r(b)?;
            mk(x.rho1 + y.rho1, x.rho2 + y.rho2, x.approximate || y.approximate)
        }
        _ => unreachable!("validated R weight"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rho_of_parametric_families() {
        let e = rho_pair(&Weight::exponential(0.0)).unwrap();
        assert_relative_eq!(e.rho1, (-1f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(e.rho2, 1f64.exp(), max_relative = 1e-15);
        assert!(!e.admissible_rho);
        let p = rho_pair(&Weight::polynomial(3.0)).unwrap();
        assert_eq!((p.rho1, p.rho2), (1.0, 1.0));
        assert!(p.admissible_rho);
        let s = rho_pair(&Weight::step_geometric(0.5, 3.0).unwrap()).unwrap();
        assert_eq!((s.rho1, s.rho2), (0.5, 3.0));
    }

    #[test]
    fn rho_of_tabulated_matches_definition() {
        let w = Weight::exponential(0.0);
        let values: Vec<f64> = (-20..=20).map(|n| w.eval_z(n).unwrap()).collect();
        let t = rho_pair(&Weight::tabulated(-20, values).unwrap()).unwrap();
        assert!(t.approximate);
        assert_relative_eq!(t.rho1, (-1f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(t.rho2, 1f64.exp(), max_relative = 1e-12);
    }

    #[test]
    fn rho_mu_of_products() {
        let r = rho_mu_z2(&Weight::product_z2(Weight::exponential(0.0), Weight::polynomial(2.0)).unwrap()).unwrap();
        assert_relative_eq!(r.rho1, (-0.5f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(r.rho2, 0.5f64.exp(), max_relative = 1e-15);
        assert_eq!((r.mu1, r.mu2), (1.0, 1.0));
        let a = rho_mu_z2(&Weight::product_z2(Weight::polynomial(1.0), Weight::polynomial(1.0)).unwrap()).unwrap();
        assert!(a.admissible_rho);
    }

    #[test]
    fn rho_mu_of_tabulated_product() {
        let w1 = Weight::step_geometric(0.5, 2.0).unwrap();
        let w2 = Weight::step_geometric(0.25, 4.0).unwrap();
        let mut values = Vec::new();
        for m1 in -30..=30 {
            for m2 in -30..=30 {
                values.push(w1.eval_z(m1).unwrap() * w2.eval_z(m2).unwrap());
            }
        }
        let r = rho_mu_z2(&Weight::tabulated_z2([-30, -30], [30, 30], values).unwrap()).unwrap();
        assert!(r.approximate);
        assert!((r.rho1 - 0.5f64.sqrt()).abs() < 1e-6);
        assert!((r.rho2 - 2f64.sqrt()).abs() < 1e-6);
        assert!((r.mu1 - 0.5).abs() < 1e-6);
        assert!((r.mu2 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn s_omega_of_order_n_weights() {
        let w = Weight::order_n(vec![2, 5], vec![(0.5, 1.0), (1.0, 3.0)]).unwrap();
        let r = s_omega(&w).unwrap();
        assert_eq!(r.s_omega, vec![2, 5]);
        assert_eq!(r.nonadmissible_order, 2);
        let r = s_omega(&Weight::order_n(vec![1], vec![(1.0, 1.0)]).unwrap()).unwrap();
        assert!(r.s_omega.is_empty() && r.admissible_rho);
        let r = s_omega(&Weight::order_n(vec![1, 2, 3], vec![(0.9, 1.1); 3]).unwrap()).unwrap();
        assert_eq!(r.nonadmissible_order, 3);
    }

    #[test]
    fn rho_on_the_line() {
        let r = rho_pair_r(&Weight::exp_linear_r(2.0).unwrap()).unwrap();
        assert_eq!((r.rho1, r.rho2), (-2.0, 2.0));
        let one = rho_pair_r(&Weight::exp_linear_r(0.0).unwrap()).unwrap();
        assert!(one.admissible_rho);
        let p = rho_pair_r(&Weight::polynomial(2.0).on(Domain::R).unwrap()).unwrap();
        assert_eq!((p.rho1, p.rho2), (0.0, 0.0));
    }

    /// Random submultiplicative data: `max` of a few step-geometric and polynomial weights.
    fn random_weight_values() -> impl Strategy<Value = Vec<f64>> {
        (0.3..1.0f64, 1.0..3.0f64, 0.0..3.0f64, 0.0..0.5f64).prop_map(|(r, s, p, a)| {
            (-40..=40)
                .map(|n: i64| {
                    let g = if n <= 0 { r.powi(n as i32) } else { s.powi(n as i32) };
                    g * (1.0 + n.abs() as f64).powf(p) * (a * (n.abs() as f64).sqrt()).exp()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn tabulated_rho_brackets_one(values in random_weight_values()) {
            let t = rho_pair(&Weight::tabulated(-40, values).unwrap()).unwrap();
            prop_assert!(t.rho1 <= 1.0 && 1.0 <= t.rho2);
        }

        #[test]
        fn windowed_rho2_is_non_increasing_in_the_window(values in random_weight_values(), cut in 2usize..39) {
            let small = Weight::tabulated(-(cut as i64), values[40 - cut..=40 + cut].to_vec()).unwrap();
            let large = Weight::tabulated(-40, values).unwrap();
            prop_assert!(rho_pair(&large).unwrap().rho2 <= rho_pair(&small).unwrap().rho2);
            prop_assert!(rho_pair(&large).unwrap().rho1 >= rho_pair(&small).unwrap().rho1);
        }
    }
}
