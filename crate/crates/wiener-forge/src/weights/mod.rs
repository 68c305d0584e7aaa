//! Weights: submultiplicative maps `w >= 1` on Z, Z^2, Z^N (order-n weights) and R.
//!
//! A [`Weight`] is a domain plus a [`Family`] descriptor. Parametric families
//! carry closed-form growth rates; tabulated ones are evaluated on a window
//! and their rates are windowed estimates flagged `approximate`.

mod checks;
mod grs;
mod rho;

pub use checks::{
    check_submultiplicative, compare, family_monotonicity, p_almost_monotone_check, star_property, CompareReport, MonotonicityReport,
    PAlmostReport, RateVerdict, StarReport, SubmultReport,
};
pub use grs::{default_directions, extended_grs, grs_check, ExtendedGrsDirection, ExtendedGrsReport, GrsDirection, GrsOptions, GrsReport};
pub use rho::{rho_mu_z2, rho_pair, rho_pair_r, s_omega, RhoR, RhoZ, RhoZ2, RhoZN};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Domain {
    #[default]
    Z,
    Z2,
    ZN,
    R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    #[serde(default)]
    pub domain: Domain,
    #[serde(flatten)]
    pub family: Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `r^n` for `n <= 0`, `s^n` for `n >= 0`.
    StepGeometric { r: f64, s: f64 },
    /// `(1 + |m|)^s`.
    Polynomial { s: f64 },
    /// `e^{|m| / (r + 1)}`.
    Exponential { r: f64 },
    /// `e^{a |m|^b}`.
    Subexponential { a: f64, b: f64 },
    /// `w1(m1) w2(m2)` on Z^2.
    ProductZ2 { w1: Box<Weight>, w2: Box<Weight> },
    /// Weight of order n on Z^N: `prod_j h_j^{alpha_{i_j}}` with `h_j = r_j` or `s_j`
    /// depending on the sign of the coordinate. Positions are 1-based.
    OrderN { positions: Vec<usize>, rates: Vec<(f64, f64)> },
    /// Values on the integer window `[lo, hi]`; on R, log-linear interpolation between nodes.
    Tabulated { lo: i64, hi: i64, values: Vec<f64> },
    /// Row-major values on `[lo[0], hi[0]] x [lo[1], hi[1]]`.
    TabulatedZ2 { lo: [i64; 2], hi: [i64; 2], values: Vec<f64> },
    /// `e^{c |x|}` on R.
    ExpLinearR { c: f64 },
    /// `neg` on the negative half-line, `pos` on the positive one, `zero` at the origin.
    Piecewise { neg: Box<Weight>, pos: Box<Weight>, zero: f64 },
    /// `r^{m/2} e^{|m|^gamma / 2}` for `m < 0`, `s^{m/2} e^{|m|^gamma / 2}` for `m >= 0`.
    Hybrid { r: f64, s: f64, gamma: f64 },
    /// `c * inner` with `c >= 1`.
    Scaled { c: f64, inner: Box<Weight> },
    /// Pointwise product.
    Product { a: Box<Weight>, b: Box<Weight> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point<'a> {
    Z(i64),
    Z2([i64; 2]),
    ZN(&'a [i64]),
    R(f64),
}

impl Point<'_> {
    fn domain(&self) -> Domain {
        match self {
            Point::Z(_) => Domain::Z,
            Point::Z2(_) => Domain::Z2,
            Point::ZN(_) => Domain::ZN,
            Point::R(_) => Domain::R,
        }
    }

    fn magnitude(&self) -> f64 {
        match self {
            Point::Z(n) => n.unsigned_abs() as f64,
            Point::Z2([a, b]) => ((*a as f64).powi(2) + (*b as f64).powi(2)).sqrt(),
            Point::ZN(v) => v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt(),
            Point::R(x) => x.abs(),
        }
    }
}

impl Weight {
    fn build(domain: Domain, family: Family) -> Result<Self> {
        let w = Weight { domain, family };
        w.validate()?;
        Ok(w)
    }

    pub fn step_geometric(r: f64, s: f64) -> Result<Self> {
        Self::build(Domain::Z, Family::StepGeometric { r, s })
    }

    /// The constant weight 1 on Z.
    pub fn one() -> Self {
        Weight { domain: Domain::Z, family: Family::StepGeometric { r: 1.0, s: 1.0 } }
    }

    pub fn polynomial(s: f64) -> Self {
        Weight { domain: Domain::Z, family: Family::Polynomial { s } }
    }

    pub fn exponential(r: f64) -> Self {
        Weight { domain: Domain::Z, family: Family::Exponential { r } }
    }

    pub fn subexponential(a: f64, b: f64) -> Result<Self> {
        Self::build(Domain::Z, Family::Subexponential { a, b })
    }

    pub fn product_z2(w1: Weight, w2: Weight) -> Result<Self> {
        Self::build(Domain::Z2, Family::ProductZ2 { w1: Box::new(w1), w2: Box::new(w2) })
    }

    pub fn order_n(positions: Vec<usize>, rates: Vec<(f64, f64)>) -> Result<Self> {
        Self::build(Domain::ZN, Family::OrderN { positions, rates })
    }

    pub fn tabulated(lo: i64, values: Vec<f64>) -> Result<Self> {
        let hi = lo + values.len() as i64 - 1;
        Self::build(Domain::Z, Family::Tabulated { lo, hi, values })
    }

    pub fn tabulated_z2(lo: [i64; 2], hi: [i64; 2], values: Vec<f64>) -> Result<Self> {
        Self::build(Domain::Z2, Family::TabulatedZ2 { lo, hi, values })
    }

    pub fn exp_linear_r(c: f64) -> Result<Self> {
        Self::build(Domain::R, Family::ExpLinearR { c })
    }

    pub fn piecewise(neg: Weight, pos: Weight, zero: f64) -> Result<Self> {
        let domain = neg.domain;
        Self::build(domain, Family::Piecewise { neg: Box::new(neg), pos: Box::new(pos), zero })
    }

    pub fn hybrid(r: f64, s: f64, gamma: f64) -> Result<Self> {
        Self::build(Domain::Z, Family::Hybrid { r, s, gamma })
    }

    pub fn scaled(c: f64, inner: Weight) -> Result<Self> {
        let domain = inner.domain;
        Self::build(domain, Family::Scaled { c, inner: Box::new(inner) })
    }

    pub fn product(a: Weight, b: Weight) -> Result<Self> {
        let domain = a.domain;
        Self::build(domain, Family::Product { a: Box::new(a), b: Box::new(b) })
    }

    /// Re-targets a dimension-free family (polynomial, exponential, subexponential) to another domain.
    pub fn on(mut self, domain: Domain) -> Result<Self> {
        self.domain = domain;
        self.validate()?;
        Ok(self)
    }

    /// Parameter ranges and family/domain compatibility.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDescriptor(msg));
        let d = self.domain;
        match &self.family {
            Family::StepGeometric { r, s } => {
                if d != Domain::Z {
                    return bad("step_geometric lives on Z".into());
                }
                if !(*r > 0.0 && *r <= 1.0 && *s >= 1.0 && s.is_finite()) {
                    return Err(Error::RateOutOfRange(format!("need 0 < r <= 1 <= s, got r={r}, s={s}")));
                }
            }
            Family::Polynomial { s } => {
                if !(*s >= 0.0) {
                    return bad(format!("polynomial exponent must be >= 0, got {s}"));
                }
            }
            Family::Exponential { r } => {
                if !(*r > -1.0) || !r.is_finite() {
                    return bad(format!("exponential parameter must exceed -1, got {r}"));
                }
            }
            Family::Subexponential { a, b } => {
                if !(*a > 0.0 && *b > 0.0 && *b < 1.0) {
                    return bad(format!("subexponential needs a > 0 and 0 < b < 1, got a={a}, b={b}"));
                }
            }
            Family::ProductZ2 { w1, w2 } => {
                if d != Domain::Z2 || w1.domain != Domain::Z || w2.domain != Domain::Z {
                    return bad("product_z2 combines two Z weights into a Z2 weight".into());
                }
                w1.validate()?;
                w2.validate()?;
            }
            Family::OrderN { positions, rates } => {
                if d != Domain::ZN {
                    return bad("order_n lives on ZN".into());
                }
                if positions.len() != rates.len() || positions.is_empty() {
                    return bad("order_n needs one rate pair per position".into());
                }
                if positions[0] == 0 || positions.windows(2).any(|p| p[0] >= p[1]) {
                    return bad("order_n positions must be 1-based and strictly increasing".into());
                }
                if rates.iter().any(|(r, s)| !(*r > 0.0 && *r <= 1.0 && *s >= 1.0 && s.is_finite())) {
                    return Err(Error::RateOutOfRange("order_n rates need 0 < r_j <= 1 <= s_j".into()));
                }
            }
            Family::Tabulated { lo, hi, values } => {
                if !(d == Domain::Z || d == Domain::R) {
                    return bad("tabulated weights live on Z or R".into());
                }
                if hi < lo || values.len() as i64 != hi - lo + 1 {
                    return bad(format!("tabulated window [{lo}, {hi}] has {} values", values.len()));
                }
                if values.iter().any(|v| !(*v >= 1.0) || !v.is_finite()) {
                    return bad("tabulated values must be finite and >= 1".into());
                }
            }
            Family::TabulatedZ2 { lo, hi, values } => {
                if d != Domain::Z2 {
                    return bad("tabulated_z2 lives on Z2".into());
                }
                let n = (hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1);
                if hi[0] < lo[0] || hi[1] < lo[1] || values.len() as i64 != n {
                    return bad("tabulated_z2 window and value count disagree".into());
                }
                if values.iter().any(|v| !(*v >= 1.0) || !v.is_finite()) {
                    return bad("tabulated values must be finite and >= 1".into());
                }
            }
            Family::ExpLinearR { c } => {
                if d != Domain::R || !(*c >= 0.0) {
                    return bad(format!("exp_linear_r lives on R with c >= 0, got c={c}"));
                }
            }
            Family::Piecewise { neg, pos, zero } => {
                if !(d == Domain::Z || d == Domain::R) || neg.domain != d || pos.domain != d {
                    return bad("piecewise weights live on Z or R with matching parts".into());
                }
                if !(*zero >= 1.0) {
                    return bad("piecewise value at 0 must be >= 1".into());
                }
                neg.validate()?;
                pos.validate()?;
            }
            Family::Hybrid { r, s, gamma } => {
                if d != Domain::Z {
                    return bad("hybrid weights live on Z".into());
                }
                if !(*r > 0.0 && *r <= 1.0 && *s >= 1.0) {
                    return Err(Error::RateOutOfRange(format!("need 0 < r <= 1 <= s, got r={r}, s={s}")));
                }
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    return bad(format!("gamma must lie in (0, 1), got {gamma}"));
                }
            }
            Family::Scaled { c, inner } => {
                if !(*c >= 1.0) || inner.domain != d {
                    return bad(format!("scale must be >= 1 with matching domain, got {c}"));
                }
                inner.validate()?;
            }
            Family::Product { a, b } => {
                if a.domain != d || b.domain != d {
                    return bad("product factors must share the domain".into());
                }
                a.validate()?;
                b.validate()?;
            }
        }
        if d == Domain::ZN && !matches!(self.family, Family::OrderN { .. }) {
            return bad("only order_n weights are supported on ZN".into());
        }
        Ok(())
    }

    pub fn evaluate(&self, p: Point) -> Result<f64> {
        if p.domain() != self.domain {
            return Err(Error::DomainMismatch(format!("{:?} point for a {:?} weight", p.domain(), self.domain)));
        }
        self.eval_unchecked(p)
    }

    pub fn eval_z(&self, n: i64) -> Result<f64> {
        self.evaluate(Point::Z(n))
    }

    pub fn eval_z2(&self, m: [i64; 2]) -> Result<f64> {
        self.evaluate(Point::Z2(m))
    }

    pub fn eval_zn(&self, m: &[i64]) -> Result<f64> {
        self.evaluate(Point::ZN(m))
    }

    pub fn eval_r(&self, x: f64) -> Result<f64> {
        self.evaluate(Point::R(x))
    }

    fn eval_unchecked(&self, p: Point) -> Result<f64> {
        match &self.family {
            Family::StepGeometric { r, s } => {
                let n = match p {
                    Point::Z(n) => n,
                    _ => unreachable!(),
                };
                Ok(if n <= 0 { r.powf(n as f64) } else { s.powf(n as f64) })
            }
            Family::Polynomial { s } => Ok((1.0 + p.magnitude()).powf(*s)),
            Family::Exponential { r } => Ok((p.magnitude() / (r + 1.0)).exp()),
            Family::Subexponential { a, b } => Ok((a * p.magnitude().powf(*b)).exp()),
            Family::ProductZ2 { w1, w2 } => {
                let [a, b] = match p {
                    Point::Z2(m) => m,
                    _ => unreachable!(),
                };
                Ok(w1.eval_z(a)? * w2.eval_z(b)?)
            }
            Family::OrderN { positions, rates } => {
                let alpha = match p {
                    Point::ZN(a) => a,
                    _ => unreachable!(),
                };
                let mut acc = 1.0;
                for (pos, (r, s)) in positions.iter().zip(rates) {
                    let a = alpha.get(pos - 1).copied().unwrap_or(0);
                    acc *= if a <= 0 { r.powf(a as f64) } else { s.powf(a as f64) };
                }
                Ok(acc)
            }
            Family::Tabulated { lo, hi, values } => match p {
                Point::Z(n) => {
                    if n < *lo || n > *hi {
                        return Err(Error::OutOfWindow { index: n.to_string(), lo: lo.to_string(), hi: hi.to_string() });
                    }
                    Ok(values[(n - lo) as usize])
                }
                Point::R(x) => {
                    if x < *lo as f64 || x > *hi as f64 {
                        return Err(Error::OutOfWindow { index: x.to_string(), lo: lo.to_string(), hi: hi.to_string() });
                    }
                    let i = ((x - *lo as f64).floor() as usize).min(values.len() - 1);
                    let t = x - (*lo as f64 + i as f64);
                    if t == 0.0 || i + 1 == values.len() {
                        return Ok(values[i]);
                    }
                    Ok((values[i].ln() * (1.0 - t) + values[i + 1].ln() * t).exp())
                }
                _ => unreachable!(),
            },
            Family::TabulatedZ2 { lo, hi, values } => {
                let m = match p {
                    Point::Z2(m) => m,
                    _ => unreachable!(),
                };
                if m[0] < lo[0] || m[0] > hi[0] || m[1] < lo[1] || m[1] > hi[1] {
                    return Err(Error::OutOfWindow { index: format!("{m:?}"), lo: format!("{lo:?}"), hi: format!("{hi:?}") });
                }
                let width = (hi[1] - lo[1] + 1) as usize;
                Ok(values[(m[0] - lo[0]) as usize * width + (m[1] - lo[1]) as usize])
            }
            Family::ExpLinearR { c } => Ok((c * p.magnitude()).exp()),
            Family::Piecewise { neg, pos, zero } => {
                let sign = match p {
                    Point::Z(n) => n.signum() as f64,
                    Point::R(x) => {
                        if x == 0.0 {
                            0.0
                        } else {
                            x.signum()
                        }
                    }
                    _ => unreachable!(),
                };
                if sign < 0.0 {
                    neg.eval_unchecked(p)
                } else if sign > 0.0 {
                    pos.eval_unchecked(p)
                } else {
                    Ok(*zero)
                }
            }
            Family::Hybrid { r, s, gamma } => {
                let n = match p {
                    Point::Z(n) => n,
                    _ => unreachable!(),
                };
                let base = if n < 0 { *r } else { *s };
                let m = n as f64;
                Ok((0.5 * (m * base.ln() + m.abs().powf(*gamma))).exp())
            }
            Family::Scaled { c, inner } => Ok(c * inner.eval_unchecked(p)?),
            Family::Product { a, b } => Ok(a.eval_unchecked(p)? * b.eval_unchecked(p)?),
        }
    }

    /// True when every value comes from a closed form (no tabulated part).
    pub fn is_parametric(&self) -> bool {
        match &self.family {
            Family::Tabulated { .. } | Family::TabulatedZ2 { .. } => false,
            Family::ProductZ2 { w1, w2 } => w1.is_parametric() && w2.is_parametric(),
            Family::Piecewise { neg, pos, .. } => neg.is_parametric() && pos.is_parametric(),
            Family::Scaled { inner, .. } => inner.is_parametric(),
            Family::Product { a, b } => a.is_parametric() && b.is_parametric(),
            _ => true,
        }
    }

    /// Integer window on which a tabulated part is defined, if any.
    pub fn tabulated_window(&self) -> Option<(i64, i64)> {
        match &self.family {
            Family::Tabulated { lo, hi, .. } => Some((*lo, *hi)),
            Family::Piecewise { neg, pos, .. } => {
                let a = neg.tabulated_window().map(|(lo, _)| lo).unwrap_or(i64::MIN);
                let b = pos.tabulated_window().map(|(_, hi)| hi).unwrap_or(i64::MAX);
                (a != i64::MIN || b != i64::MAX).then_some((a, b))
            }
            Family::Scaled { inner, .. } => inner.tabulated_window(),
            Family::Product { a, b } => match (a.tabulated_window(), b.tabulated_window()) {
                (Some(x), Some(y)) => Some((x.0.max(y.0), x.1.min(y.1))),
                (x, y) => x.or(y),
            },
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFamily {
    pub weights: Vec<Weight>,
    pub direction: Direction,
    #[serde(default)]
    pub p_seq: Vec<f64>,
}

impl WeightFamily {
    pub fn new(weights: Vec<Weight>, direction: Direction, p_seq: Vec<f64>) -> Result<Self> {
        let fam = Self { weights, direction, p_seq };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::InvalidDescriptor("empty weight family".into()));
        }
        if !self.p_seq.is_empty() && self.p_seq.len() != self.weights.len() {
            return Err(Error::InvalidDescriptor(format!("{} exponents for {} weights", self.p_seq.len(), self.weights.len())));
        }
        let d = self.weights[0].domain;
        for w in &self.weights {
            w.validate()?;
            if w.domain != d {
                return Err(Error::InvalidDescriptor("family members must share a domain".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Exponent of member `n` (0-based); 1 when no exponents were given.
    pub fn p(&self, n: usize) -> f64 {
        self.p_seq.get(n).copied().unwrap_or(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn evaluates_parametric_families() {
        assert_relative_eq!(Weight::polynomial(2.0).eval_z(3).unwrap(), 16.0);
        assert_relative_eq!(Weight::exponential(0.0).eval_z(-2).unwrap(), 1f64.exp().powi(2), max_relative = 1e-15);
        assert_relative_eq!(Weight::step_geometric(0.5, 3.0).unwrap().eval_z(-2).unwrap(), 4.0);
        assert_relative_eq!(Weight::step_geometric(0.5, 3.0).unwrap().eval_z(2).unwrap(), 9.0);
        let h = Weight::hybrid(1.0, 4.0, 0.5).unwrap();
        assert_relative_eq!(h.eval_z(4).unwrap(), 16.0 * 1f64.exp(), max_relative = 1e-14);
    }

    #[test]
    fn multi_dimensional_families() {
        let p = Weight::product_z2(Weight::polynomial(1.0), Weight::exponential(0.0)).unwrap();
        assert_relative_eq!(p.eval_z2([2, -1]).unwrap(), 3.0 * 1f64.exp(), max_relative = 1e-15);
        let o = Weight::order_n(vec![2, 5], vec![(0.5, 1.0), (1.0, 3.0)]).unwrap();
        assert_relative_eq!(o.eval_zn(&[7, -2, 0, 0, 2]).unwrap(), 4.0 * 9.0);
        let e = Weight::exponential(0.0).on(Domain::Z2).unwrap();
        assert_relative_eq!(e.eval_z2([3, 4]).unwrap(), 5f64.exp(), max_relative = 1e-15);
    }

    #[test]
    fn tabulated_window_is_enforced() {
        let t = Weight::tabulated(-1, vec![2.0, 1.0, 2.0]).unwrap();
        assert_eq!(t.eval_z(1).unwrap(), 2.0);
        assert!(matches!(t.eval_z(2), Err(Error::OutOfWindow { .. })));
        assert!(Weight::tabulated(0, vec![0.5]).is_err());
    }

    #[test]
    fn domain_is_checked() {
        assert!(matches!(Weight::polynomial(1.0).eval_r(0.5), Err(Error::DomainMismatch(_))));
        assert!(Weight::step_geometric(1.5, 2.0).is_err());
        assert!(Weight::order_n(vec![3, 2], vec![(1.0, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn piecewise_picks_sides() {
        let w = Weight::piecewise(Weight::exponential(0.0), Weight::step_geometric(1.0, 2.0).unwrap(), 1.0).unwrap();
        assert_relative_eq!(w.eval_z(-3).unwrap(), 3f64.exp(), max_relative = 1e-15);
        assert_eq!(w.eval_z(3).unwrap(), 8.0);
        assert_eq!(w.eval_z(0).unwrap(), 1.0);
    }

    #[test]
    fn json_descriptors() {
        let w: Weight = serde_json::from_str(r#"{"family":"polynomial","s":2.0,"domain":"Z"}"#).unwrap();
        assert_eq!(w, Weight::polynomial(2.0));
        let t: Weight = serde_json::from_str(r#"{"family":"tabulated","lo":-1,"hi":1,"values":[2,1,2]}"#).unwrap();
        assert_eq!(t.eval_z(-1).unwrap(), 2.0);
        let p = Weight::product_z2(Weight::polynomial(1.0), Weight::exponential(0.0)).unwrap();
        let back: Weight = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
