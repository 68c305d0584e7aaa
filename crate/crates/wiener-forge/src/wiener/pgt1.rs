use super::annulus::{invertibility_annulus, AnnulusOptions};
use crate::error::{Error, Result};
use crate::sequences::Sequence;
use crate::weights::{compare, p_almost_monotone_check, rho_pair, PAlmostReport, Weight};
use serde::{Deserialize, Serialize};

/// Weight for the `p > 1` construction together with its comparison constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PGt1Nu {
    /// 0 when `w` has unit rates and is returned unchanged; otherwise 1 (`rho1 = 1`), 2 (`rho2 = 1`) or 3.
    pub case: u8,
    pub nu: Weight,
    pub r: f64,
    pub s: f64,
    pub gamma: f64,
    /// `max nu / w` over the working window.
    pub k: f64,
    pub check: PAlmostReport,
}

/// Working window for the almost-monotone check and the tabulated running maxima.
pub const PGT1_WINDOW: (i64, i64) = (-200, 200);

fn unit(x: f64) -> bool {
    (x - 1.0).abs() <= 1e-12
}

/// Builds `nu <= K w` for a `p`-almost monotone weight `w` and an invertible symbol `f`.
pub fn p_gt1_nu(f: &Sequence, w: &Weight, p: f64, gamma: f64, margin: f64) -> Result<PGt1Nu> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidDescriptor(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let (lo, hi) = PGT1_WINDOW;
    let check = p_almost_monotone_check(w, p, PGT1_WINDOW, 1e-9)?;
    if !check.pass {
        return Err(Error::HypothesisFailed(format!("weight is not {p}-almost monotone on [{lo}, {hi}]")));
    }
    let rho = rho_pair(w)?;
    if rho.admissible_rho {
        return Ok(PGt1Nu { case: 0, nu: w.clone(), r: 1.0, s: 1.0, gamma, k: 1.0, check });
    }
    let ann = invertibility_annulus(f, Some(&rho), &AnnulusOptions::default())?;
    let (r_cap, s_cap) = ann.caps(margin);
    let r = rho.rho1.max(r_cap);
    let s = rho.rho2.min(s_cap);
    let (case, nu) = if unit(rho.rho1) {
        let mut run = 0.0f64;
        let mut vals = Vec::with_capacity((-lo) as usize);
        for m in (lo..=-1).rev() {
            run = run.max(w.eval_z(m)?);
            vals.push(run);
        }
        vals.reverse();
        (1, Weight::piecewise(Weight::tabulated(lo, vals)?, Weight::hybrid(1.0, s, gamma)?, 1.0)?)
    } else if unit(rho.rho2) {
        let mut run = 0.0f64;
        let mut vals = Vec::with_capacity(hi as usize + 1);
        for m in 0..=hi {
            run = run.max(w.eval_z(m)?);
            vals.push(run);
        }
        (2, Weight::piecewise(Weight::hybrid(r, 1.0, gamma)?, Weight::tabulated(0, vals)?, w.eval_z(0)?)?)
    } else {
        (3, Weight::hybrid(r, s, gamma)?)
    };
    let k = compare(&nu, w, PGT1_WINDOW)?.window_k;
    Ok(PGt1Nu { case, nu, r, s, gamma, k, check })
}
