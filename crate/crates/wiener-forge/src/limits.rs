//! Type-I (intersections) and Type-II (unions) of weighted spaces: membership
//! at a finite depth, norm inclusion chains, inverse-closedness and the
//! rapidly/exponentially decreasing hierarchy.

use crate::error::{Error, Result};
use crate::sequences::{membership_certificate, MembershipCertificate, Sequence, Verdict, MEMBERSHIP_MARGIN};
use crate::weights::{compare, default_directions, extended_grs, grs_check, Direction, GrsOptions, Weight, WeightFamily};
use crate::wiener::{decay_estimate, DecayEstimate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    TypeI,
    TypeII,
}

/// A countable intersection (Type-I) or union (Type-II) of `l^{p_n}_{w_n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitDescriptor {
    pub kind: LimitKind,
    #[serde(flatten)]
    pub fam: WeightFamily,
    /// Exponents live in `(1, inf)` instead of `(0, 1]`.
    #[serde(default)]
    pub p_gt1: bool,
}

impl LimitDescriptor {
    pub fn new(kind: LimitKind, fam: WeightFamily) -> Result<Self> {
        let d = Self { kind, fam, p_gt1: false };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        self.fam.validate()?;
        let (want, ordered): (Direction, fn(f64, f64) -> bool) = match self.kind {
            LimitKind::TypeI => (Direction::Increasing, |a, b| b <= a),
            LimitKind::TypeII => (Direction::Decreasing, |a, b| b >= a),
        };
        if self.fam.direction != want {
            return Err(Error::InvalidDescriptor(format!("{:?} needs a {want:?} family", self.kind)));
        }
        let in_range = |p: f64| if self.p_gt1 { p > 1.0 && p.is_finite() } else { p > 0.0 && p <= 1.0 };
        if let Some(p) = self.fam.p_seq.iter().find(|p| !in_range(**p)) {
            return Err(Error::ExponentOutOfRange(format!("exponent {p} outside the allowed range")));
        }
        if self.fam.p_seq.windows(2).any(|w| !ordered(w[0], w[1])) {
            let how = if self.kind == LimitKind::TypeI { "non-increasing" } else { "non-decreasing" };
            return Err(Error::InvalidDescriptor(format!("{:?} exponents must be {how}", self.kind)));
        }
        Ok(())
    }
}

fn decay_of(f: &Sequence) -> Result<Option<DecayEstimate>> {
    match decay_estimate(f) {
        Ok(d) => Ok(Some(d)),
        Err(Error::TooShort { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn certificates(f: &Sequence, d: &LimitDescriptor, depth: usize) -> Result<Vec<MembershipCertificate>> {
    if depth == 0 || depth > d.fam.len() {
        return Err(Error::InvalidDescriptor(format!("depth {depth} for a family of {} members", d.fam.len())));
    }
    let decay = decay_of(f)?;
    (0..depth)
        .into_par_iter()
        .map(|n| membership_certificate(f, decay.as_ref(), d.fam.p(n), &d.fam.weights[n], MEMBERSHIP_MARGIN))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Type1Membership {
    pub depth: usize,
    pub per_n: Vec<MembershipCertificate>,
    /// Member iff every member up to the depth is.
    pub verdict: Verdict,
}

/// Membership of `f` in the first `depth` spaces of a Type-I intersection.
pub fn membership_type1(f: &Sequence, d: &LimitDescriptor, depth: usize) -> Result<Type1Membership> {
    let per_n = certificates(f, d, depth)?;
    let verdict = per_n.iter().fold(Verdict::Member, |acc, c| acc.combine(c.verdict));
    Ok(Type1Membership { depth, per_n, verdict })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Type2Membership {
    pub depth: usize,
    pub per_n: Vec<MembershipCertificate>,
    /// Smallest member index (starting at 1) whose space contains `f`.
    pub first_n: Option<usize>,
    pub verdict: Verdict,
}

/// Membership of `f` in a Type-II union, searched over the first `depth` members.
pub fn membership_type2(f: &Sequence, d: &LimitDescriptor, depth: usize) -> Result<Type2Membership> {
    let per_n = certificates(f, d, depth)?;
    let first_n = per_n.iter().position(|c| c.verdict == Verdict::Member).map(|i| i + 1);
    let verdict = if first_n.is_some() {
        Verdict::Member
    } else if per_n.iter().any(|c| c.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::NotMember
    };
    Ok(Type2Membership { depth, per_n, first_n, verdict })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    /// `[||f||_1, ||f||_{q,nu}^{1/q}, ||f||_{p,nu}^{1/p}, ||f||_{p,omega}^{1/p}]`.
    pub norms: [f64; 4],
    pub holds: [bool; 3],
    pub pass: bool,
}

/// Checks `||f||_1 <= ||f||_{q,nu}^{1/q} <= ||f||_{p,nu}^{1/p} <= ||f||_{p,omega}^{1/p}` on the support of `f`.
pub fn inclusion_chain_check(f: &Sequence, p: f64, q: f64, nu: &Weight, omega: &Weight) -> Result<ChainReport> {
    if !(p > 0.0 && p <= q && q <= 1.0) {
        return Err(Error::ExponentOutOfRange(format!("need 0 < p <= q <= 1, got p = {p}, q = {q}")));
    }
    if f.dim() == 1 {
        let (lo, hi) = f.window();
        let c = compare(nu, omega, (lo.min(-1), hi.max(1)))?;
        if c.window_k > 1.0 + 1e-12 {
            return Err(Error::HypothesisFailed(format!("nu exceeds omega by a factor {} on the support", c.window_k)));
        }
    }
    let one = match f.dim() {
        1 => Weight::one(),
        _ => Weight::product_z2(Weight::one(), Weight::one())?,
    };
    let norms =
        [f.lp_norm(1.0, &one)?, f.lp_norm(q, nu)?.powf(1.0 / q), f.lp_norm(p, nu)?.powf(1.0 / p), f.lp_norm(p, omega)?.powf(1.0 / p)];
    let le = |a: f64, b: f64| a <= b * (1.0 + 1e-12);
    let holds = [le(norms[0], norms[1]), le(norms[1], norms[2]), le(norms[2], norms[3])];
    Ok(ChainReport { norms, holds, pass: holds.iter().all(|h| *h) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedReport {
    pub closed: bool,
    pub reason: String,
}

/// Inverse-closedness: every member satisfies GRS (Type-I), or the family satisfies extended GRS (Type-II).
pub fn inverse_closed_predicate(d: &LimitDescriptor, opts: &GrsOptions) -> Result<ClosedReport> {
    d.validate()?;
    let dirs = default_directions(d.fam.weights[0].domain);
    match d.kind {
        LimitKind::TypeI => {
            for (n, w) in d.fam.weights.iter().enumerate() {
                let r = grs_check(w, &dirs, opts)?;
                if !r.admissible {
                    let tol = |analytic: bool| if analytic { 1e-12 } else { opts.grs_tol };
                    let bad = r.directions.iter().find(|x| (x.limit - 1.0).abs() > tol(x.analytic)).unwrap_or(&r.directions[0]);
                    return Ok(ClosedReport {
                        closed: false,
                        reason: format!("GRS fails for member n = {} in direction {:?} with limit {}", n + 1, bad.direction, bad.limit),
                    });
                }
            }
            Ok(ClosedReport { closed: true, reason: format!("all {} members satisfy GRS", d.fam.len()) })
        }
        LimitKind::TypeII => {
            let r = extended_grs(&d.fam, &dirs, opts)?;
            if r.pass {
                return Ok(ClosedReport { closed: true, reason: format!("extended GRS holds at depth {}", r.depth) });
            }
            let bad = r.directions.iter().max_by(|a, b| a.inf_estimate.total_cmp(&b.inf_estimate)).expect("at least one direction");
            Ok(ClosedReport {
                closed: false,
                reason: format!("extended GRS fails in direction {:?}: infimum estimate {}", bad.direction, bad.inf_estimate),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyParams {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub p_seq: Vec<f64>,
    pub q_seq: Vec<f64>,
    pub depth: usize,
}

impl HierarchyParams {
    /// `p_n = q_n = p` for every member.
    pub fn uniform(p: f64, a: f64, b: f64, depth: usize) -> Self {
        Self { p, a, b, p_seq: vec![p; depth], q_seq: vec![p; depth], depth }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub name: String,
    pub verdict: Verdict,
}

/// A constant `K` with `lhs <= K rhs` recovered on a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dominance {
    pub n: usize,
    pub relation: String,
    pub window: (i64, i64),
    pub window_k: f64,
    /// `compare` confirms the bound extends beyond the window.
    pub confirmed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyRow {
    pub n: i64,
    pub log_g: f64,
    pub log_eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyReport {
    pub depth: usize,
    pub links: Vec<Link>,
    pub dominance: Vec<Dominance>,
    pub columns: Vec<HierarchyRow>,
}

const MAX_REACH: f64 = 4096.0;

fn reach_for(peak: f64) -> i64 {
    (4.0 * peak).clamp(200.0, MAX_REACH).ceil() as i64
}

fn aggregate_union(v: &[Verdict]) -> Verdict {
    if v.contains(&Verdict::Member) {
        Verdict::Member
    } else if v.contains(&Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::NotMember
    }
}

/// Verdicts of `g` along `E^{q_n} < l^p_eta < S^{p_n} < l^{p_n}_{w_n} < l^{p_1}_{w_1} < l^1`,
/// with `eta = e^{a|m|^b}`, exponential `e^{|m|/(n+1)}` and polynomial `(1+|m|)^n` weights.
pub fn hierarchy_demo(g: &Sequence, params: &HierarchyParams) -> Result<HierarchyReport> {
    let HierarchyParams { p, a, b, ref p_seq, ref q_seq, depth } = *params;
    if depth == 0 || p_seq.len() < depth || q_seq.len() < depth {
        return Err(Error::InvalidDescriptor(format!("need {depth} exponents in each sequence")));
    }
    for n in 0..depth {
        if !(0.0 < q_seq[n] && q_seq[n] <= p && p <= p_seq[n] && p_seq[n] <= 1.0) {
            return Err(Error::HypothesisFailed(format!(
                "need 0 < q_n <= p <= p_n <= 1; at n = {} got q = {}, p = {p}, p_n = {}",
                n + 1,
                q_seq[n],
                p_seq[n]
            )));
        }
    }
    let eta = Weight::subexponential(a, b)?;
    let expo = |n: usize| Weight::exponential(n as f64);
    let poly = |n: usize| Weight::polynomial(n as f64);
    let decay = decay_of(g)?;
    let verdict =
        |q: f64, w: &Weight| -> Result<Verdict> { Ok(membership_certificate(g, decay.as_ref(), q, w, MEMBERSHIP_MARGIN)?.verdict) };

    let e_per: Vec<Verdict> = (1..=depth).map(|n| verdict(q_seq[n - 1], &expo(n))).collect::<Result<_>>()?;
    let s_per: Vec<Verdict> = (1..=depth).map(|n| verdict(p_seq[n - 1], &poly(n))).collect::<Result<_>>()?;
    let links = vec![
        Link { name: format!("E^(q_n), n <= {depth}"), verdict: aggregate_union(&e_per) },
        Link { name: format!("l^{p}_eta(a={a}, b={b})"), verdict: verdict(p, &eta)? },
        Link { name: format!("S^(p_n), n <= {depth}"), verdict: s_per.iter().fold(Verdict::Member, |acc, v| acc.combine(*v)) },
        Link { name: format!("l^(p_{depth})_(w_{depth})"), verdict: s_per[depth - 1] },
        Link { name: "l^(p_1)_(w_1)".into(), verdict: s_per[0] },
        Link { name: "l^1".into(), verdict: verdict(1.0, &Weight::one())? },
    ];

    let mut dominance = Vec::with_capacity(2 * depth);
    for n in 1..=depth {
        // eta / nu_n peaks where a b m^{b-1} = 1/(n+1); w_n / eta where n/(1+m) = a b m^{b-1}
        let r1 = reach_for((a * b * (n as f64 + 1.0)).powf(1.0 / (1.0 - b)));
        let c = compare(&eta, &expo(n), (-r1, r1))?;
        dominance.push(Dominance {
            n,
            relation: "eta <= K nu_n".into(),
            window: (-r1, r1),
            window_k: c.window_k,
            confirmed: c.k.is_some(),
        });
        let r2 = reach_for((n as f64 / (a * b)).powf(1.0 / b));
        let c = compare(&poly(n), &eta, (-r2, r2))?;
        dominance.push(Dominance { n, relation: "w_n <= K eta".into(), window: (-r2, r2), window_k: c.window_k, confirmed: c.k.is_some() });
    }

    let mut columns = Vec::new();
    if g.dim() == 1 {
        for (m, v) in g.iter() {
            let norm = v.norm();
            if norm > 0.0 {
                columns.push(HierarchyRow { n: m[0], log_g: norm.ln(), log_eta: eta.eval_z(m[0])?.ln() });
            }
        }
    }
    Ok(HierarchyReport { depth, links, dominance, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_family(n: usize, scale: impl Fn(usize) -> f64, dir: Direction) -> WeightFamily {
        // member k is e^{scale(k) |m|}
        let ws = (1..=n).map(|k| Weight::exponential(1.0 / scale(k) - 1.0)).collect();
        WeightFamily::new(ws, dir, vec![]).unwrap()
    }

    fn geometric(lo: i64, hi: i64, rate: f64) -> Sequence {
        Sequence::scalars(lo, &(lo..=hi).map(|n| rate.powi(n.abs() as i32)).collect::<Vec<_>>())
    }

    #[test]
    fn type1_examples() {
        let poly = WeightFamily::new((1..=4).map(|n| Weight::polynomial(n as f64)).collect(), Direction::Increasing, vec![]).unwrap();
        let d = LimitDescriptor::new(LimitKind::TypeI, poly).unwrap();
        let g = Sequence::scalars(0, &(0..=60).map(|n| 0.5f64.powi(n + 1)).collect::<Vec<_>>());
        assert_eq!(membership_type1(&g, &d, 4).unwrap().verdict, Verdict::Member);
        assert_eq!(membership_type1(&Sequence::scalars(-1, &[1.0, 2.0, 3.0]), &d, 4).unwrap().verdict, Verdict::Member);

        let e = LimitDescriptor::new(LimitKind::TypeI, exp_family(3, |k| k as f64, Direction::Increasing)).unwrap();
        let r = membership_type1(&g, &e, 3).unwrap();
        assert_eq!(r.per_n[0].verdict, Verdict::NotMember);
        assert_eq!(r.verdict, Verdict::NotMember);
    }

    #[test]
    fn type2_examples() {
        let d = LimitDescriptor::new(LimitKind::TypeII, exp_family(120, |k| 1.0 / (k as f64 + 1.0), Direction::Decreasing)).unwrap();
        let g = Sequence::scalars(0, &(0..=60).map(|n| 0.5f64.powi(n + 1)).collect::<Vec<_>>());
        assert_eq!(membership_type2(&g, &d, 8).unwrap().first_n, Some(1));
        assert_eq!(membership_type2(&Sequence::delta(1), &d, 8).unwrap().first_n, Some(1));
        let slow = geometric(0, 3000, 1.0 / 1.01);
        assert_eq!(membership_type2(&slow, &d, 120).unwrap().first_n, Some(100));
    }

    #[test]
    fn descriptor_validation() {
        let inc = exp_family(2, |k| k as f64, Direction::Increasing);
        assert!(LimitDescriptor::new(LimitKind::TypeII, inc.clone()).is_err());
        let mut bad = inc.clone();
        bad.p_seq = vec![0.5, 0.7];
        assert!(LimitDescriptor::new(LimitKind::TypeI, bad).is_err());
        let mut big = inc;
        big.p_seq = vec![1.0, 1.5];
        assert!(matches!(LimitDescriptor::new(LimitKind::TypeI, big), Err(Error::ExponentOutOfRange(_))));
    }

    #[test]
    fn chain_examples() {
        let f = Sequence::scalars(0, &[2.0, -1.0]);
        let r = inclusion_chain_check(&f, 0.5, 1.0, &Weight::one(), &Weight::exponential(0.0)).unwrap();
        assert!(r.pass);
        assert!((r.norms[0] - 3.0).abs() < 1e-14 && (r.norms[1] - 3.0).abs() < 1e-14);
        assert!((r.norms[2] - (2f64.sqrt() + 1.0).powi(2)).abs() < 1e-12);
        assert!((r.norms[3] - (2f64.sqrt() + 0.5f64.exp()).powi(2)).abs() < 1e-12);
        let r = inclusion_chain_check(&Sequence::delta(1), 0.3, 0.6, &Weight::one(), &Weight::polynomial(2.0)).unwrap();
        assert!(r.norms.iter().all(|n| (n - 1.0).abs() < 1e-15));
        let e = inclusion_chain_check(&f, 0.5, 1.0, &Weight::exponential(0.0), &Weight::one());
        assert!(matches!(e, Err(Error::HypothesisFailed(_))));
    }

    #[test]
    fn closedness_examples() {
        let opts = GrsOptions::default();
        let poly = WeightFamily::new((1..=5).map(|n| Weight::polynomial(n as f64)).collect(), Direction::Increasing, vec![]).unwrap();
        assert!(inverse_closed_predicate(&LimitDescriptor::new(LimitKind::TypeI, poly).unwrap(), &opts).unwrap().closed);
        let nu = exp_family(16, |k| 1.0 / (k as f64 + 1.0), Direction::Decreasing);
        assert!(inverse_closed_predicate(&LimitDescriptor::new(LimitKind::TypeII, nu).unwrap(), &opts).unwrap().closed);
        let e = exp_family(3, |k| k as f64, Direction::Increasing);
        let r = inverse_closed_predicate(&LimitDescriptor::new(LimitKind::TypeI, e).unwrap(), &opts).unwrap();
        assert!(!r.closed);
        assert!(r.reason.contains("n = 1") && r.reason.contains(&format!("{}", 1f64.exp())), "{}", r.reason);
    }

    #[test]
    fn hierarchy_examples() {
        let params = HierarchyParams::uniform(0.5, 1.0, 0.5, 4);
        let r = hierarchy_demo(&geometric(-200, 200, 0.25), &params).unwrap();
        assert!(r.links.iter().all(|l| l.verdict == Verdict::Member), "{:?}", r.links);
        assert!(r.dominance.iter().all(|d| d.confirmed && d.window_k.is_finite()));
        let r = hierarchy_demo(&Sequence::delta(1), &params).unwrap();
        assert!(r.links.iter().all(|l| l.verdict == Verdict::Member));
        let slow = Sequence::scalars(-1000, &(-1000..=1000i64).map(|n| (-(n.abs() as f64).sqrt()).exp()).collect::<Vec<_>>());
        let r = hierarchy_demo(&slow, &params).unwrap();
        assert_eq!(r.links[1].verdict, Verdict::Inconclusive);
        assert_eq!(r.links[2].verdict, Verdict::Member);
        let bad = HierarchyParams { q_seq: vec![0.7; 4], ..params };
        assert!(matches!(hierarchy_demo(&Sequence::delta(1), &bad), Err(Error::HypothesisFailed(_))));
    }
}
