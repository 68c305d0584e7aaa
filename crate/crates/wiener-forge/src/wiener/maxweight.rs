use super::annulus::{invertibility_annulus, AnnulusOptions};
use super::inverse::{inverse_with_decay, InverseOptions};
use crate::error::{Error, Result};
use crate::sequences::{membership_certificate, Sequence, Verdict, MEMBERSHIP_MARGIN};
use crate::weights::{compare, rho_pair, Domain, Weight};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest weight `eta` with `f^{-1}` inheriting membership, together with the rates it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxWeight {
    /// 1 when `eta = omega`, 2 when a root of the symbol caps one of the rates.
    pub case: u8,
    pub r: f64,
    pub s: f64,
    pub eta: Weight,
    pub roots: Vec<Complex64>,
}

/// The step-geometric weight `r^n` for `n <= 0`, `s^n` for `n >= 0`.
pub fn construct_nu_step(r: f64, s: f64) -> Result<Weight> {
    if !(r > 0.0 && r <= 1.0 && s >= 1.0 && s.is_finite()) {
        return Err(Error::RateOutOfRange(format!("need 0 < r <= 1 <= s < inf, got r = {r}, s = {s}")));
    }
    Weight::step_geometric(r, s)
}

/// Maximal weight for `f` below `w`, from the rates of `w` and the root moduli of `det f^`.
pub fn max_weight_discrete(f: &Sequence, w: &Weight, opts: &AnnulusOptions) -> Result<MaxWeight> {
    if w.domain != Domain::Z {
        return Err(Error::DomainMismatch("max_weight_discrete needs a weight on Z".into()));
    }
    let rho = rho_pair(w)?;
    let ann = invertibility_annulus(f, Some(&rho), opts)?;
    let (rs, ss) = (ann.inner, ann.outer);
    if rho.admissible_rho || (rs <= rho.rho1 && ss >= rho.rho2) {
        return Ok(MaxWeight { case: 1, r: rho.rho1, s: rho.rho2, eta: w.clone(), roots: ann.roots });
    }
    let r = rho.rho1.max(rs);
    let s = rho.rho2.min(ss);
    let eta = if r == rho.rho1 {
        Weight::piecewise(w.clone(), Weight::step_geometric(1.0, s)?, w.eval_z(0)?)?
    } else if s == rho.rho2 {
        Weight::piecewise(Weight::step_geometric(r, 1.0)?, w.clone(), w.eval_z(0)?)?
    } else {
        Weight::step_geometric(r, s)?
    };
    Ok(MaxWeight { case: 2, r, s, eta, roots: ann.roots })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCheck {
    pub nu: Weight,
    /// Constant with `nu <= K omega`, when one exists.
    pub k_omega: Option<f64>,
    pub membership: Verdict,
    /// Dominated by `omega` and certified to contain `f^{-1}`.
    pub in_hypothesis: bool,
    /// Constant with `nu <= K eta`, when one exists.
    pub k_eta: Option<f64>,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalityReport {
    pub candidates: Vec<CandidateCheck>,
    pub violations: usize,
    pub pass: bool,
}

/// Checks that every candidate weight that satisfies the hypotheses is dominated by `eta`.
pub fn maximality_check(
    eta: &Weight,
    omega: &Weight,
    candidates: &[Weight],
    f: &Sequence,
    p: f64,
    window: (i64, i64),
) -> Result<MaximalityReport> {
    let (_, inv, decay) = inverse_with_decay(f, window, &AnnulusOptions::default(), &InverseOptions::default())?;
    let mut out = Vec::with_capacity(candidates.len());
    for nu in candidates {
        let k_omega = compare(nu, omega, window)?.k;
        let membership = membership_certificate(&inv.coeffs, decay.as_ref(), p, nu, MEMBERSHIP_MARGIN)?.verdict;
        let in_hypothesis = k_omega.is_some() && membership == Verdict::Member;
        let k_eta = compare(nu, eta, window)?.k;
        out.push(CandidateCheck { nu: nu.clone(), k_omega, membership, in_hypothesis, k_eta, violation: in_hypothesis && k_eta.is_none() });
    }
    let violations = out.iter().filter(|c| c.violation).count();
    Ok(MaximalityReport { candidates: out, violations, pass: violations == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Family;

    fn e_abs(scale: f64) -> Weight {
        // e^{scale |n|} is Exponential{r} with 1 / (r + 1) = scale
        Weight::exponential(1.0 / scale - 1.0)
    }

    #[test]
    fn one_sided_root() {
        let f = Sequence::scalars(0, &[2.0, -1.0]);
        let m = max_weight_discrete(&f, &e_abs(1.0), &AnnulusOptions::default()).unwrap();
        assert_eq!(m.case, 2);
        assert!((m.r - (-1f64).exp()).abs() < 1e-15);
        assert!((m.s - 2.0).abs() < 1e-13);
        for n in -10..=10i64 {
            let want = if n <= 0 { (-n as f64).exp() } else { 2f64.powi(n as i32) };
            assert!((m.eta.eval_z(n).unwrap() / want - 1.0).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn admissible_weight_is_kept() {
        let f = Sequence::scalars(0, &[2.0, -1.0]);
        let w = Weight::polynomial(3.0);
        let m = max_weight_discrete(&f, &w, &AnnulusOptions::default()).unwrap();
        assert_eq!((m.case, &m.eta), (1, &w));
    }

    #[test]
    fn both_roots_bite() {
        let f = Sequence::scalars(-1, &[1.0, -2.5, 1.0]);
        let m = max_weight_discrete(&f, &e_abs(2.0), &AnnulusOptions::default()).unwrap();
        assert_eq!(m.case, 2);
        match m.eta.family {
            Family::StepGeometric { r, s } => {
                assert!((r - 0.5).abs() < 1e-13 && (s - 2.0).abs() < 1e-13);
            }
            ref other => panic!("unexpected eta {other:?}"),
        }
    }

    #[test]
    fn step_weights() {
        assert_eq!(construct_nu_step(1.0, 1.0).unwrap().eval_z(-7).unwrap(), 1.0);
        assert!((construct_nu_step(0.5, 3.0).unwrap().eval_z(2).unwrap() - 9.0).abs() < 1e-14);
        let nu = construct_nu_step((-1f64).exp(), 2.0).unwrap();
        let r = rho_pair(&nu).unwrap();
        assert_eq!((r.rho1, r.rho2), ((-1f64).exp(), 2.0));
        assert!(matches!(construct_nu_step(1.5, 2.0), Err(Error::RateOutOfRange(_))));
    }

    #[test]
    fn maximality_of_the_one_sided_example() {
        let f = Sequence::scalars(0, &[2.0, -1.0]);
        let omega = e_abs(1.0);
        let eta = max_weight_discrete(&f, &omega, &AnnulusOptions::default()).unwrap().eta;
        let mut candidates: Vec<Weight> = [1.2, 1.5, 1.9].iter().map(|s| construct_nu_step(1.0, *s).unwrap()).collect();
        candidates.push(construct_nu_step(1.0, 2.5).unwrap());
        candidates.push(eta.clone());
        let rep = maximality_check(&eta, &omega, &candidates, &f, 1.0, (-64, 64)).unwrap();
        assert!(rep.pass);
        for c in &rep.candidates[..3] {
            assert!(c.in_hypothesis);
            assert_eq!(c.k_eta, Some(1.0));
        }
        assert_eq!(rep.candidates[3].membership, Verdict::NotMember);
        assert!(!rep.candidates[3].in_hypothesis);
        assert_eq!(rep.candidates[4].k_eta, Some(1.0));
    }
}
