use super::annulus::{det_poly, on_circle, split_roots, Annulus, AnnulusOptions};
use super::decay::DecayEstimate;
use super::inverse::{inverse_with_decay, InverseOptions, LaurentInverse};
use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::sequences::{membership_certificate, Sequence, Verdict, MEMBERSHIP_MARGIN};
use crate::weights::{rho_mu_z2, rho_pair, star_property, Direction, Domain, Weight, WeightFamily};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConstruction {
    pub nu: WeightFamily,
    /// Membership of the computed inverse in `l^{p_n}_{nu_n}` for each member.
    pub per_n: Vec<Verdict>,
    /// First member whose space contains `f` (Type-II only).
    pub first_k: Option<usize>,
    /// Root moduli bounding the invertibility annulus.
    pub inner: f64,
    pub outer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Z2FamilyConstruction {
    pub nu: WeightFamily,
    /// `[inner, outer]` root moduli for the first and second variable.
    pub axis_annuli: [[f64; 2]; 2],
    /// Clamping caps `[r, s]` per axis after the margin back-off.
    pub axis_caps: [[f64; 2]; 2],
}

const FAMILY_WINDOW: (i64, i64) = (-200, 200);

fn clamp_step(w: &Weight, caps: (f64, f64)) -> Result<Weight> {
    let rho = rho_pair(w)?;
    Weight::step_geometric(rho.rho1.max(caps.0), rho.rho2.min(caps.1))
}

fn verdicts(inv: &LaurentInverse, decay: Option<&DecayEstimate>, nu: &WeightFamily) -> Result<Vec<Verdict>> {
    nu.weights
        .par_iter()
        .enumerate()
        .map(|(n, w)| Ok(membership_certificate(&inv.coeffs, decay, nu.p(n), w, MEMBERSHIP_MARGIN)?.verdict))
        .collect()
}

fn admissible(fam: &WeightFamily) -> Result<Vec<bool>> {
    fam.weights.iter().map(|w| Ok(rho_pair(w)?.admissible_rho)).collect()
}

fn setup(f: &Sequence, fam: &WeightFamily, want: Direction) -> Result<(Annulus, LaurentInverse, Option<DecayEstimate>)> {
    fam.validate()?;
    if fam.direction != want {
        return Err(Error::InvalidDescriptor(format!("expected a {want:?} family, got {:?}", fam.direction)));
    }
    if fam.weights[0].domain != Domain::Z {
        return Err(Error::DomainMismatch("family members must be weights on Z".into()));
    }
    inverse_with_decay(f, FAMILY_WINDOW, &AnnulusOptions::default(), &InverseOptions::default())
}

/// Increasing family `nu_n <= omega_n` whose intersection contains the inverse of `f`.
pub fn type1_family(f: &Sequence, fam: &WeightFamily, margin: f64) -> Result<FamilyConstruction> {
    let (ann, inv, decay) = setup(f, fam, Direction::Increasing)?;
    let caps = ann.caps(margin);
    let adm = admissible(fam)?;
    let weights = match adm.iter().position(|a| !a) {
        None => fam.weights.clone(),
        Some(k) => fam
            .weights
            .iter()
            .enumerate()
            .map(|(n, w)| if n < k { Ok(Weight::one()) } else { clamp_step(w, caps) })
            .collect::<Result<_>>()?,
    };
    let nu = WeightFamily { weights, direction: Direction::Increasing, p_seq: fam.p_seq.clone() };
    let per_n = verdicts(&inv, decay.as_ref(), &nu)?;
    Ok(FamilyConstruction { nu, per_n, first_k: None, inner: ann.inner, outer: ann.outer })
}

/// Decreasing family `nu_n <= omega_n` whose union contains the inverse of `f`.
pub fn type2_family(f: &Sequence, fam: &WeightFamily, margin: f64) -> Result<FamilyConstruction> {
    let (ann, inv, decay) = setup(f, fam, Direction::Decreasing)?;
    let caps = ann.caps(margin);
    let adm = admissible(fam)?;
    let f_decay = match super::decay::decay_estimate(f) {
        Ok(d) => Some(d),
        Err(Error::TooShort { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut first_k = None;
    for (n, w) in fam.weights.iter().enumerate() {
        if membership_certificate(f, f_decay.as_ref(), fam.p(n), w, MEMBERSHIP_MARGIN)?.verdict == Verdict::Member {
            first_k = Some(n);
            break;
        }
    }
    let k = first_k.ok_or_else(|| Error::HypothesisFailed("f lies in none of the family's spaces".into()))?;
    if !fam.p_seq.is_empty() {
        for j in k..fam.len().saturating_sub(1) {
            if !adm[j] && adm[j + 1] {
                let bad = (j + 1..fam.len() - 1).find(|&n| fam.p(n + 1) <= fam.p(n));
                if let Some(n) = bad {
                    return Err(Error::InvalidDescriptor(format!(
                        "member {} is admissible after a non-admissible member, so p must increase strictly from there; p[{}] = {} >= p[{}] = {}",
                        j + 1,
                        n,
                        fam.p(n),
                        n + 1,
                        fam.p(n + 1)
                    )));
                }
            }
        }
    }
    let weights = if adm[k] {
        fam.weights.clone()
    } else {
        let j = (k + 1..fam.len()).find(|&l| adm[l]).unwrap_or(fam.len());
        fam.weights
            .iter()
            .enumerate()
            .map(|(l, w)| {
                if l < k {
                    Ok(w.clone())
                } else if l < j {
                    clamp_step(w, caps)
                } else {
                    Ok(Weight::one())
                }
            })
            .collect::<Result<_>>()?
    };
    let nu = WeightFamily { weights, direction: Direction::Decreasing, p_seq: fam.p_seq.clone() };
    let per_n = verdicts(&inv, decay.as_ref(), &nu)?;
    Ok(FamilyConstruction { nu, per_n, first_k, inner: ann.inner, outer: ann.outer })
}

/// Root moduli of `det f^(z, eta)` in one variable, intersected over `eta` (or `z`) on a grid of the unit circle.
fn axis_annulus(f: &Sequence, axis: usize, grid: usize, tol: f64) -> Result<[f64; 2]> {
    let lo = f.lo();
    let shape = f.shape();
    let d = f.coeff_dim();
    let per_theta = |t: usize| -> Result<[f64; 2]> {
        let w = Complex64::from_polar(1.0, TAU * t as f64 / grid as f64);
        let mut vals = vec![AlgebraElement::zero(d); shape[axis]];
        for (m, v) in f.iter() {
            let other = m[1 - axis];
            let slot = &mut vals[(m[axis] - lo[axis]) as usize];
            *slot = slot.add(&v.scale(w.powi(other as i32)))?;
        }
        let poly = det_poly(&Sequence::new(lo[axis], vals)?);
        if poly.is_zero() {
            return Err(Error::NotInvertibleOnTorus("det f^ vanishes identically on a frozen slice".into()));
        }
        let roots = poly.roots();
        if let Some(r) = roots.iter().find(|r| on_circle(**r, tol)) {
            return Err(Error::NotInvertibleOnTorus(format!("root {r} on the torus")));
        }
        let (inner, outer) = split_roots(&roots);
        Ok([inner, outer])
    };
    let per: Vec<[f64; 2]> = (0..grid).into_par_iter().map(per_theta).collect::<Result<_>>()?;
    Ok(per.iter().fold([0.0, f64::INFINITY], |acc, a| [acc[0].max(a[0]), acc[1].min(a[1])]))
}

/// Four-quadrant product weights `nu_n` for a symbol on Z^2, clamped per axis.
pub fn type_families_z2(f: &Sequence, fam: &WeightFamily, margin: f64, opts: &AnnulusOptions) -> Result<Z2FamilyConstruction> {
    fam.validate()?;
    if f.dim() != 2 || fam.weights[0].domain != Domain::Z2 {
        return Err(Error::DomainMismatch("type_families_z2 needs a symbol and weights on Z^2".into()));
    }
    let mut rates = Vec::with_capacity(fam.len());
    for (n, w) in fam.weights.iter().enumerate() {
        let rm = rho_mu_z2(w)?;
        if rm.admissible_rho && !star_property(w, 16, 1e-9)?.holds {
            return Err(Error::HypothesisFailed(format!("member {n} has unit rates and fails the star property")));
        }
        rates.push(rm);
    }
    let a1 = axis_annulus(f, 0, opts.angle_grid, opts.tol)?;
    let a2 = axis_annulus(f, 1, opts.angle_grid, opts.tol)?;
    let cap = |a: [f64; 2]| {
        let (r, s) = Annulus { inner: a[0], outer: a[1], closed_clamp: None, roots: Vec::new(), grid_shrunk: false }.caps(margin);
        [r, s]
    };
    let (c1, c2) = (cap(a1), cap(a2));
    let clamped = |n: usize| -> Result<Weight> {
        let rm = &rates[n];
        let x = Weight::step_geometric(rm.rho1.powi(2).max(c1[0]), rm.rho2.powi(2).min(c1[1]))?;
        let y = Weight::step_geometric(rm.mu1.powi(2).max(c2[0]), rm.mu2.powi(2).min(c2[1]))?;
        Weight::product_z2(x, y)
    };
    let unit = || Weight::product_z2(Weight::one(), Weight::one());
    let adm: Vec<bool> = rates.iter().map(|r| r.admissible_rho).collect();
    let weights: Vec<Weight> = match fam.direction {
        Direction::Increasing => match adm.iter().position(|a| !a) {
            None => fam.weights.clone(),
            Some(k) => (0..fam.len()).map(|n| if n < k { unit() } else { clamped(n) }).collect::<Result<_>>()?,
        },
        Direction::Decreasing => {
            if adm[0] {
                fam.weights.clone()
            } else {
                let j = adm.iter().position(|a| *a).unwrap_or(fam.len());
                (0..fam.len()).map(|n| if n < j { clamped(n) } else { unit() }).collect::<Result<_>>()?
            }
        }
    };
    Ok(Z2FamilyConstruction {
        nu: WeightFamily { weights, direction: fam.direction, p_seq: fam.p_seq.clone() },
        axis_annuli: [a1, a2],
        axis_caps: [c1, c2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{family_monotonicity, Family};

    fn step_rates(w: &Weight) -> (f64, f64) {
        match w.family {
            Family::StepGeometric { r, s } => (r, s),
            ref other => panic!("not step-geometric: {other:?}"),
        }
    }

    fn f1() -> Sequence {
        Sequence::scalars(0, &[2.0, -1.0])
    }

    #[test]
    fn type1_exponential_family() {
        // omega_n = e^{n|m|}, p_n = 1/n
        let ws = (1..=4).map(|n| Weight::exponential(1.0 / n as f64 - 1.0)).collect();
        let fam = WeightFamily::new(ws, Direction::Increasing, (1..=4).map(|n| 1.0 / n as f64).collect()).unwrap();
        let out = type1_family(&f1(), &fam, 0.01).unwrap();
        for (n, w) in out.nu.weights.iter().enumerate() {
            let (r, s) = step_rates(w);
            assert!((r - (-(n as f64 + 1.0)).exp()).abs() < 1e-12);
            assert!((s - 1.98).abs() < 1e-12);
        }
        assert!(out.per_n.iter().all(|v| *v == Verdict::Member));
        assert!(family_monotonicity(&out.nu, (-30, 30)).unwrap().pass);
    }

    #[test]
    fn type1_admissible_family_is_kept() {
        let ws: Vec<Weight> = (1..=3).map(|n| Weight::polynomial(n as f64)).collect();
        let fam = WeightFamily::new(ws.clone(), Direction::Increasing, vec![]).unwrap();
        assert_eq!(type1_family(&f1(), &fam, 0.01).unwrap().nu.weights, ws);
    }

    #[test]
    fn type1_switches_at_the_first_nonadmissible_member() {
        let fam = WeightFamily::new(vec![Weight::polynomial(1.0), Weight::exponential(0.0)], Direction::Increasing, vec![]).unwrap();
        let out = type1_family(&f1(), &fam, 0.01).unwrap();
        assert_eq!(out.nu.weights[0], Weight::one());
        let (r, s) = step_rates(&out.nu.weights[1]);
        assert!((r - (-1f64).exp()).abs() < 1e-12 && (s - 1.98).abs() < 1e-12);
    }

    #[test]
    fn type2_exponential_family() {
        // omega_n = e^{2|m|/n}, p_n = n/(n+1)
        let ws = (1..=5).map(|n| Weight::exponential(n as f64 / 2.0 - 1.0)).collect();
        let ps = (1..=5).map(|n| n as f64 / (n as f64 + 1.0)).collect();
        let fam = WeightFamily::new(ws, Direction::Decreasing, ps).unwrap();
        let out = type2_family(&f1(), &fam, 0.01).unwrap();
        assert_eq!(out.first_k, Some(0));
        for (i, w) in out.nu.weights.iter().enumerate() {
            let n = i as f64 + 1.0;
            let (r, s) = step_rates(w);
            assert!((r - (-2.0 / n).exp()).abs() < 1e-12);
            assert!((s - (2.0 / n).exp().min(1.98)).abs() < 1e-12);
        }
        assert!(family_monotonicity(&out.nu, (-30, 30)).unwrap().pass);
    }

    #[test]
    fn type2_admissible_head_and_tail() {
        let ws = vec![Weight::polynomial(2.0), Weight::polynomial(1.0)];
        let fam = WeightFamily::new(ws.clone(), Direction::Decreasing, vec![]).unwrap();
        assert_eq!(type2_family(&f1(), &fam, 0.01).unwrap().nu.weights, ws);

        let ws = vec![Weight::exponential(0.0), Weight::exponential(1.0), Weight::polynomial(1.0), Weight::polynomial(0.5)];
        let fam = WeightFamily::new(ws, Direction::Decreasing, vec![0.5, 0.6, 0.7, 0.8]).unwrap();
        let out = type2_family(&f1(), &fam, 0.01).unwrap();
        assert_eq!(out.nu.weights[2], Weight::one());
        assert_eq!(out.nu.weights[3], Weight::one());
        assert_eq!(step_rates(&out.nu.weights[0]).1, 1.98);
    }

    #[test]
    fn type2_side_condition() {
        let ws = vec![Weight::exponential(0.0), Weight::polynomial(1.0), Weight::polynomial(0.5)];
        let fam = WeightFamily::new(ws, Direction::Decreasing, vec![0.5, 0.7, 0.7]).unwrap();
        assert!(matches!(type2_family(&f1(), &fam, 0.01), Err(Error::InvalidDescriptor(_))));
    }

    #[test]
    fn separable_z2_caps() {
        let f = Sequence::tensor(&f1(), &Sequence::scalars(0, &[3.0, -1.0])).unwrap();
        let ws = (1..=3)
            .map(|n| {
                let e = Weight::exponential(1.0 / n as f64 - 1.0);
                Weight::product_z2(e.clone(), e).unwrap()
            })
            .collect();
        let fam = WeightFamily::new(ws, Direction::Increasing, vec![]).unwrap();
        let out = type_families_z2(&f, &fam, 0.01, &AnnulusOptions::default()).unwrap();
        assert!((out.axis_caps[0][1] - 1.98).abs() < 1e-10);
        assert!((out.axis_caps[1][1] - 2.97).abs() < 1e-10);
        for (w, om) in out.nu.weights.iter().zip(&fam.weights) {
            for a in -20..=20 {
                for b in -20..=20 {
                    assert!(w.eval_z2([a, b]).unwrap() <= om.eval_z2([a, b]).unwrap() * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn unit_symbol_on_z2_keeps_the_rates() {
        let e = Weight::exponential(0.0);
        let fam = WeightFamily::new(vec![Weight::product_z2(e.clone(), e).unwrap()], Direction::Increasing, vec![]).unwrap();
        let out = type_families_z2(&Sequence::delta_2d(1), &fam, 0.01, &AnnulusOptions::default()).unwrap();
        let rm = rho_mu_z2(&out.nu.weights[0]).unwrap();
        assert!((rm.rho1.powi(2) - (-1f64).exp()).abs() < 1e-12 && (rm.mu2.powi(2) - 1f64.exp()).abs() < 1e-12);
    }
}
