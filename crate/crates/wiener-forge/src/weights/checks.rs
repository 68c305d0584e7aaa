use super::rho::{rho_mu_z2, rho_pair, rho_pair_r};
use super::{Direction, Domain, Weight, WeightFamily};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmultReport {
    pub max_ratio: f64,
    pub worst_pair: Option<(Vec<i64>, Vec<i64>)>,
    pub pass: bool,
}

/// Integer lattice points of `[lo, hi]` (per axis on Z^2).
fn lattice(d: Domain, lo: i64, hi: i64) -> Result<Vec<Vec<i64>>> {
    match d {
        Domain::Z | Domain::R => Ok((lo..=hi).map(|n| vec![n]).collect()),
        Domain::Z2 => Ok((lo..=hi).flat_map(|a| (lo..=hi).map(move |b| vec![a, b])).collect()),
        Domain::ZN => Err(Error::DomainMismatch("window scans are not available on ZN".into())),
    }
}

pub(crate) fn eval_at(w: &Weight, m: &[i64]) -> Result<f64> {
    match w.domain {
        Domain::Z => w.eval_z(m[0]),
        Domain::R => w.eval_r(m[0] as f64),
        Domain::Z2 => w.eval_z2([m[0], m[1]]),
        Domain::ZN => w.eval_zn(m),
    }
}

/// Max of `w(x+y) / (w(x) w(y))` over pairs with `x`, `y`, `x+y` in the window.
pub fn check_submultiplicative(w: &Weight, window: (i64, i64), tol: f64) -> Result<SubmultReport> {
    let (lo, hi) = window;
    let pts = lattice(w.domain, lo, hi)?;
    let vals: Vec<f64> = pts.iter().map(|m| eval_at(w, m)).collect::<Result<_>>()?;
    let index = |m: &[i64]| -> Option<usize> {
        if m.iter().any(|x| *x < lo || *x > hi) {
            return None;
        }
        let width = (hi - lo + 1) as usize;
        Some(m.iter().fold(0usize, |acc, x| acc * width + (x - lo) as usize))
    };
    let mut max_ratio = 0.0f64;
    let mut worst_pair = None;
    for (i, x) in pts.iter().enumerate() {
        for (j, y) in pts.iter().enumerate().skip(i) {
            let s: Vec<i64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
            if let Some(k) = index(&s) {
                let ratio = vals[k] / (vals[i] * vals[j]);
                if ratio > max_ratio {
                    max_ratio = ratio;
                    worst_pair = Some((x.clone(), y.clone()));
                }
            }
        }
    }
    Ok(SubmultReport { max_ratio, worst_pair, pass: max_ratio <= 1.0 + tol })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarReport {
    pub admissible_rho: bool,
    pub even_in_m2: bool,
    pub even_in_m1: bool,
    pub condition1: bool,
    /// `[sup_{m1<0}, inf_{m1>=1}]` of `(w(m1,m2) w(m1,-m2))^{1/m1}`.
    pub first_axis: [f64; 2],
    /// `[sup_{m2<0}, inf_{m2>=1}]` of `(w(m1,m2) w(-m1,m2))^{1/m2}`.
    pub second_axis: [f64; 2],
    pub condition2: bool,
    /// The second equality of condition (2) is read with `m2 < 0, m1 in Z`.
    pub interpreted: bool,
    pub approximate: bool,
    pub holds: bool,
}

/// Property `*_w` on the window `[-half, half]^2`.
pub fn star_property(w: &Weight, half: i64, tol: f64) -> Result<StarReport> {
    if w.domain != Domain::Z2 {
        return Err(Error::DomainMismatch("star_property needs a Z2 weight".into()));
    }
    let rho = rho_mu_z2(w)?;
    let at = |a: i64, b: i64| w.eval_z2([a, b]);
    let close = |x: f64, y: f64| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0);
    let mut even_in_m2 = true;
    let mut even_in_m1 = true;
    let mut first = [0.0f64, f64::INFINITY];
    let mut second = [0.0f64, f64::INFINITY];
    for a in -half..=half {
        for b in -half..=half {
            let v = at(a, b)?;
            even_in_m2 &= close(v, at(a, -b)?);
            even_in_m1 &= close(v, at(-a, b)?);
            if a != 0 {
                let t = (v * at(a, -b)?).powf(1.0 / a as f64);
                if a < 0 {
                    first[0] = first[0].max(t);
                } else {
                    first[1] = first[1].min(t);
                }
            }
            if b != 0 {
                let t = (v * at(-a, b)?).powf(1.0 / b as f64);
                if b < 0 {
                    second[0] = second[0].max(t);
                } else {
                    second[1] = second[1].min(t);
                }
            }
        }
    }
    let condition1 = rho.admissible_rho && (even_in_m1 || even_in_m2);
    let condition2 = close(first[0], first[1]) && close(second[0], second[1]);
    Ok(StarReport {
        admissible_rho: rho.admissible_rho,
        even_in_m2,
        even_in_m1,
        condition1,
        first_axis: first,
        second_axis: second,
        condition2,
        interpreted: true,
        approximate: true,
        holds: condition1 || condition2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateVerdict {
    /// The rates of `nu` lie inside those of `omega`.
    Inside,
    Outside,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// `max(1, max nu/omega)` on the window.
    pub window_k: f64,
    pub rates: RateVerdict,
    /// Log-growth of the ratio from the inner shell to the outer shell of the window.
    pub edge_growth: f64,
    pub k: Option<f64>,
}

const EDGE_GROWTH_LIMIT: f64 = 0.01;
const RATE_TOL: f64 = 1e-12;

fn rate_verdict(nu: &Weight, omega: &Weight) -> RateVerdict {
    let inside = |a1: f64, a2: f64, b1: f64, b2: f64| a1 >= b1 * (1.0 - RATE_TOL) && a2 <= b2 * (1.0 + RATE_TOL);
    let ok = match nu.domain {
        Domain::Z => match (rho_pair(nu), rho_pair(omega)) {
            (Ok(a), Ok(b)) => inside(a.rho1, a.rho2, b.rho1, b.rho2),
            _ => return RateVerdict::Unknown,
        },
        Domain::Z2 => match (rho_mu_z2(nu), rho_mu_z2(omega)) {
            (Ok(a), Ok(b)) => inside(a.rho1, a.rho2, b.rho1, b.rho2) && inside(a.mu1, a.mu2, b.mu1, b.mu2),
            _ => return RateVerdict::Unknown,
        },
        Domain::R => match (rho_pair_r(nu), rho_pair_r(omega)) {
            (Ok(a), Ok(b)) => a.rho1 >= b.rho1 - RATE_TOL && a.rho2 <= b.rho2 + RATE_TOL,
            _ => return RateVerdict::Unknown,
        },
        Domain::ZN => return RateVerdict::Unknown,
    };
    if ok {
        RateVerdict::Inside
    } else {
        RateVerdict::Outside
    }
}

/// Smallest `K` with `nu <= K omega` on the window, or `None` when no global constant can exist.
pub fn compare(nu: &Weight, omega: &Weight, window: (i64, i64)) -> Result<CompareReport> {
    if nu.domain != omega.domain {
        return Err(Error::DomainMismatch(format!("{:?} against {:?}", nu.domain, omega.domain)));
    }
    let (lo, hi) = window;
    let pts = lattice(nu.domain, lo, hi)?;
    let reach = lo.unsigned_abs().max(hi.unsigned_abs()) as i64;
    let mut window_k = 1.0f64;
    let mut outer = 0.0f64;
    let mut inner = 0.0f64;
    for m in &pts {
        let ratio = eval_at(nu, m)? / eval_at(omega, m)?;
        window_k = window_k.max(ratio);
        let r = m.iter().map(|x| x.abs()).max().unwrap_or(0);
        if 4 * r > 3 * reach {
            outer = outer.max(ratio);
        } else if 2 * r > reach {
            inner = inner.max(ratio);
        }
    }
    let edge_growth = if inner > 0.0 && outer > 0.0 { (outer / inner).ln() } else { 0.0 };
    let rates = rate_verdict(nu, omega);
    let bounded = rates != RateVerdict::Outside && edge_growth <= EDGE_GROWTH_LIMIT;
    Ok(CompareReport { window_k, rates, edge_growth, k: bounded.then_some(window_k) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PAlmostReport {
    pub p: f64,
    pub p_conj: f64,
    /// Max over the inner half of the window of `(u * u)(n) / u(n)` with `u = w^{-p'}`.
    pub conv_ratio_max: f64,
    pub partial_sum: f64,
    pub tail_estimate: f64,
    pub sum_estimate: f64,
    /// Fitted power-law exponent of `u` on each tail, `[negative, positive]`.
    pub tail_power: [f64; 2],
    pub summable: bool,
    pub rho1: f64,
    pub rho2: f64,
    /// Constant for `w(n) <= K w(n+k)`, `n, k <= -1`; present only when `rho1 = 1`.
    pub k_neg: Option<f64>,
    /// Constant for `w(n) <= K w(n+k)`, `n, k >= 0`; present only when `rho2 = 1`.
    pub k_pos: Option<f64>,
    pub pass: bool,
}

/// Side tail beyond the window from the last two samples (geometric) and a power-law fit.
fn side_tail(u_edge: f64, u_prev: f64, u_half: f64, edge: f64) -> (f64, f64) {
    let q = u_edge / u_prev;
    let geometric = if q < 1.0 { u_edge * q / (1.0 - q) } else { f64::INFINITY };
    let alpha = (u_half / u_edge).ln() / ((1.0 + edge) / (1.0 + edge / 2.0)).ln();
    let power = if alpha > 1.0 { u_edge * (1.0 + edge) / (alpha - 1.0) } else { f64::INFINITY };
    let tail = if geometric.is_finite() && power.is_finite() { geometric.max(power) } else { f64::INFINITY };
    (tail, alpha)
}

pub fn p_almost_monotone_check(w: &Weight, p: f64, window: (i64, i64), tol: f64) -> Result<PAlmostReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::ExponentOutOfRange(format!("p-almost monotone needs 1 < p < inf, got {p}")));
    }
    if w.domain != Domain::Z {
        return Err(Error::DomainMismatch("p-almost monotone weights live on Z".into()));
    }
    let (lo, hi) = window;
    if lo > -8 || hi < 8 {
        return Err(Error::TooShort { needed: 8 });
    }
    let p_conj = p / (p - 1.0);
    let omega: Vec<f64> = (lo..=hi).map(|n| w.eval_z(n)).collect::<Result<_>>()?;
    let u: Vec<f64> = omega.iter().map(|v| v.powf(-p_conj)).collect();
    let at = |n: i64| u[(n - lo) as usize];

    let mut conv_ratio_max = 0.0f64;
    for n in lo / 2..=hi / 2 {
        let mut acc = 0.0;
        for k in lo..=hi {
            let j = n - k;
            if j >= lo && j <= hi {
                acc += at(k) * at(j);
            }
        }
        conv_ratio_max = conv_ratio_max.max(acc / at(n));
    }

    let partial_sum: f64 = u.iter().sum();
    let (tail_neg, alpha_neg) = side_tail(at(lo), at(lo + 1), at(lo / 2), lo.unsigned_abs() as f64);
    let (tail_pos, alpha_pos) = side_tail(at(hi), at(hi - 1), at(hi / 2), hi as f64);
    let summable = alpha_neg > 1.05 && alpha_pos > 1.05 && tail_neg.is_finite() && tail_pos.is_finite();
    let tail_estimate = tail_neg + tail_pos;

    let rho = rho_pair(w)?;
    let unit = |x: f64| (x - 1.0).abs() <= 1e-9;
    let k_neg = unit(rho.rho1).then(|| {
        // max over m < l <= -1 of w(l) / w(m)
        let mut run = 0.0f64;
        let mut k = 1.0f64;
        for m in (lo..=-1).rev() {
            if run > 0.0 {
                k = k.max(run / omega[(m - lo) as usize]);
            }
            run = run.max(omega[(m - lo) as usize]);
        }
        k
    });
    let k_pos = unit(rho.rho2).then(|| {
        let mut run = 0.0f64;
        let mut k = 1.0f64;
        for m in 0..=hi {
            let v = omega[(m - lo) as usize];
            run = run.max(v);
            k = k.max(run / v);
        }
        k
    });
    Ok(PAlmostReport {
        p,
        p_conj,
        conv_ratio_max,
        partial_sum,
        tail_estimate,
        sum_estimate: partial_sum + tail_estimate,
        tail_power: [alpha_neg, alpha_pos],
        summable,
        rho1: rho.rho1,
        rho2: rho.rho2,
        k_neg,
        k_pos,
        pass: conv_ratio_max <= 1.0 + tol && summable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub pointwise: bool,
    /// `(member index, point)` of the first pointwise violation between members `i` and `i + 1`.
    pub first_pointwise_violation: Option<(usize, Vec<i64>)>,
    pub rho_chain: bool,
    pub first_rho_violation: Option<usize>,
    pub pass: bool,
}

/// Per-axis `(rho1, rho2)` pairs of a member.
fn axis_rates(w: &Weight) -> Result<Vec<(f64, f64)>> {
    Ok(match w.domain {
        Domain::Z => {
            let r = rho_pair(w)?;
            vec![(r.rho1, r.rho2)]
        }
        Domain::Z2 => {
            let r = rho_mu_z2(w)?;
            vec![(r.rho1, r.rho2), (r.mu1, r.mu2)]
        }
        Domain::R => {
            let r = rho_pair_r(w)?;
            vec![(r.rho1.exp(), r.rho2.exp())]
        }
        Domain::ZN => return Err(Error::DomainMismatch("family checks are not available on ZN".into())),
    })
}

/// Pointwise monotonicity on the window and the chain `rho1(w_{n+1}) <= rho1(w_n) <= 1 <= rho2(w_n) <= rho2(w_{n+1})`
/// (reversed for decreasing families).
pub fn family_monotonicity(fam: &WeightFamily, window: (i64, i64)) -> Result<MonotonicityReport> {
    fam.validate()?;
    if fam.len() < 2 {
        return Err(Error::InvalidDescriptor("monotonicity needs at least two members".into()));
    }
    let pts = lattice(fam.weights[0].domain, window.0, window.1)?;
    let le = |a: f64, b: f64| a <= b * (1.0 + 1e-12);
    let mut first_pointwise_violation = None;
    'outer: for i in 0..fam.len() - 1 {
        let (a, b) = (&fam.weights[i], &fam.weights[i + 1]);
        for m in &pts {
            let (x, y) = (eval_at(a, m)?, eval_at(b, m)?);
            let ok = match fam.direction {
                Direction::Increasing => le(x, y),
                Direction::Decreasing => le(y, x),
            };
            if !ok {
                first_pointwise_violation = Some((i, m.clone()));
                break 'outer;
            }
        }
    }
    let rates: Vec<Vec<(f64, f64)>> = fam.weights.iter().map(axis_rates).collect::<Result<_>>()?;
    let mut first_rho_violation = None;
    for i in 0..fam.len() - 1 {
        let ok = rates[i].iter().zip(&rates[i + 1]).all(|(&(a1, a2), &(b1, b2))| {
            let chain = le(a1, 1.0) && le(1.0, a2) && le(b1, 1.0) && le(1.0, b2);
            chain
                && match fam.direction {
                    Direction::Increasing => le(b1, a1) && le(a2, b2),
                    Direction::Decreasing => le(a1, b1) && le(b2, a2),
                }
        });
        if !ok {
            first_rho_violation = Some(i);
            break;
        }
    }
    let pointwise = first_pointwise_violation.is_none();
    let rho_chain = first_rho_violation.is_none();
    Ok(MonotonicityReport { pointwise, first_pointwise_violation, rho_chain, first_rho_violation, pass: pointwise && rho_chain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn submultiplicativity_scans() {
        let s = check_submultiplicative(&Weight::step_geometric(0.3, 2.5).unwrap(), (-20, 20), 1e-12).unwrap();
        assert!(s.pass && s.max_ratio <= 1.0 + 1e-12);
        let p = check_submultiplicative(&Weight::polynomial(1.0), (-50, 50), 1e-12).unwrap();
        assert!(p.pass);
        let mut values: Vec<f64> = (-10..=10).map(|n: i64| (n.abs() as f64 / 2.0).exp()).collect();
        values[15] *= 0.5;
        let t = check_submultiplicative(&Weight::tabulated(-10, values).unwrap(), (-10, 10), 1e-12).unwrap();
        assert!(!t.pass);
        let (x, y) = t.worst_pair.unwrap();
        assert!(x[0] + y[0] == 5 || x[0] == 5 || y[0] == 5);
    }

    #[test]
    fn submultiplicativity_on_z2() {
        let w = Weight::product_z2(Weight::polynomial(1.0), Weight::exponential(0.0)).unwrap();
        assert!(check_submultiplicative(&w, (-6, 6), 1e-12).unwrap().pass);
    }

    #[test]
    fn star_property_examples() {
        let pp = Weight::product_z2(Weight::polynomial(1.0), Weight::polynomial(1.0)).unwrap();
        let r = star_property(&pp, 12, 1e-12).unwrap();
        assert!(r.condition1 && r.holds && r.even_in_m1 && r.even_in_m2);
        let ep = Weight::product_z2(Weight::exponential(0.0), Weight::polynomial(1.0)).unwrap();
        let r = star_property(&ep, 12, 1e-9).unwrap();
        assert!(!r.condition1);
        assert_relative_eq!(r.first_axis[0], (-2f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(r.first_axis[1], 2f64.exp(), max_relative = 1e-12);
        assert!(!r.condition2 && !r.holds && r.interpreted);
    }

    #[test]
    fn star_condition_two_without_symmetry() {
        // rho = mu = 1 but neither reflection symmetry: w = (1+|m1|)(1+|m2|)(1 + [m1 > 0][m2 > 0])
        let mut values = Vec::new();
        for a in -15i64..=15 {
            for b in -15i64..=15 {
                let bump = if a > 0 && b > 0 { 2.0 } else { 1.0 };
                values.push((1.0 + a.abs() as f64) * (1.0 + b.abs() as f64) * bump);
            }
        }
        let w = Weight::tabulated_z2([-15, -15], [15, 15], values).unwrap();
        let r = star_property(&w, 7, 1e-12).unwrap();
        assert!(!r.even_in_m1 && !r.even_in_m2);
        assert!(!r.condition1);
    }

    #[test]
    fn compare_examples() {
        let nu = Weight::step_geometric(0.5, 2.0).unwrap();
        let om = Weight::exponential(0.0);
        let c = compare(&nu, &om, (-60, 60)).unwrap();
        assert_eq!(c.k, Some(1.0));
        assert_eq!(c.rates, RateVerdict::Inside);
        assert_eq!(compare(&om, &om, (-60, 60)).unwrap().k, Some(1.0));
        let c = compare(&om, &Weight::polynomial(5.0), (-60, 60)).unwrap();
        assert_eq!(c.k, None);
        assert_eq!(c.rates, RateVerdict::Outside);
    }

    #[test]
    fn compare_detects_polynomial_growth() {
        let nu = Weight::polynomial(2.0);
        let om = Weight::scaled(1000.0, Weight::polynomial(1.0)).unwrap();
        let c = compare(&nu, &om, (-200, 200)).unwrap();
        assert_eq!(c.rates, RateVerdict::Inside);
        assert!(c.k.is_none() && c.edge_growth > 0.1);
        let back = compare(&om, &Weight::scaled(1000.0, Weight::polynomial(2.0)).unwrap(), (-200, 200)).unwrap();
        assert_eq!(back.k, Some(1.0));
    }

    #[test]
    fn p_almost_monotone_examples() {
        let e = p_almost_monotone_check(&Weight::exponential(0.0), 2.0, (-60, 60), 1e-12).unwrap();
        let q = (-2f64).exp();
        assert_relative_eq!(e.sum_estimate, (1.0 + q) / (1.0 - q), max_relative = 1e-12);
        assert!(e.summable);
        assert!(e.conv_ratio_max > 1.0 && !e.pass);
        assert!(e.k_neg.is_none() && e.k_pos.is_none());

        let p = p_almost_monotone_check(&Weight::polynomial(2.0), 2.0, (-400, 400), 1e-12).unwrap();
        assert!(p.summable);
        let zeta4 = std::f64::consts::PI.powi(4) / 90.0;
        assert!((p.sum_estimate - (2.0 * zeta4 - 1.0)).abs() < 1e-6);
        assert_eq!(p.k_neg, Some(1.0));

        let c = p_almost_monotone_check(&Weight::polynomial(0.0), 2.0, (-100, 100), 1e-12).unwrap();
        assert!(!c.summable && !c.pass);
        assert!(matches!(p_almost_monotone_check(&Weight::polynomial(1.0), 1.0, (-10, 10), 1e-12), Err(Error::ExponentOutOfRange(_))));
    }

    #[test]
    fn p_almost_monotone_one_sided_weight() {
        let w = Weight::scaled(8.0, Weight::product(Weight::polynomial(2.0), Weight::step_geometric(1.0, 1f64.exp()).unwrap()).unwrap())
            .unwrap();
        let r = p_almost_monotone_check(&w, 2.0, (-200, 200), 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.k_neg, Some(1.0));
        assert!(r.k_pos.is_none());
    }

    fn exp_n(n: f64) -> Weight {
        Weight::exponential(1.0 / n - 1.0)
    }

    #[test]
    fn family_monotonicity_examples() {
        let inc = WeightFamily::new((1..=4).map(|n| exp_n(n as f64)).collect(), Direction::Increasing, vec![]).unwrap();
        assert!(family_monotonicity(&inc, (-30, 30)).unwrap().pass);
        let dec = WeightFamily::new((1..=4).map(|n| Weight::exponential(n as f64)).collect(), Direction::Decreasing, vec![]).unwrap();
        assert!(family_monotonicity(&dec, (-30, 30)).unwrap().pass);
        let mut swapped = inc.clone();
        swapped.weights.swap(1, 2);
        let r = family_monotonicity(&swapped, (-30, 30)).unwrap();
        assert!(!r.pass);
        assert_eq!(r.first_pointwise_violation.map(|v| v.0), Some(1));
        assert_eq!(r.first_rho_violation, Some(1));
    }

    proptest! {
        #[test]
        fn increasing_step_geometric_families_satisfy_the_rho_chain(
            rs in proptest::collection::vec((0.05..1.0f64, 1.0..5.0f64), 2..6)
        ) {
            let mut rs = rs;
            rs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            let mut ss: Vec<f64> = rs.iter().map(|x| x.1).collect();
            ss.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ws = rs.iter().zip(&ss).map(|((r, _), s)| Weight::step_geometric(*r, *s).unwrap()).collect();
            let fam = WeightFamily::new(ws, Direction::Increasing, vec![]).unwrap();
            let rep = family_monotonicity(&fam, (-25, 25)).unwrap();
            prop_assert!(rep.pass);
        }

        #[test]
        fn star_condition_one_is_exact_on_even_products(s1 in 0.0..4.0f64, s2 in 0.0..4.0f64, a in 0.1..2.0f64) {
            let w1 = Weight::product(Weight::polynomial(s1), Weight::subexponential(a, 0.5).unwrap()).unwrap();
            let w = Weight::product_z2(w1, Weight::polynomial(s2)).unwrap();
            let r = star_property(&w, 6, 0.0).unwrap();
            prop_assert!(r.even_in_m1 && r.even_in_m2 && r.condition1);
        }
    }
}
