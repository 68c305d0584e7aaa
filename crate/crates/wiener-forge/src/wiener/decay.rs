use super::least_squares;
use crate::error::{Error, Result};
use crate::sequences::Sequence;
use serde::{Deserialize, Serialize};

/// Entries below this fraction of the largest norm are treated as round-off.
const FIT_FLOOR: f64 = 1e-10;
/// Fewest entries above the floor a side needs before it is fitted.
pub(crate) const MIN_SIDE: usize = 16;

/// Log-linear fit `||g(n)|| ~ prefactor * rate^{|n|}` on one tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub rate: f64,
    pub prefactor: f64,
    /// Index range used for the fit (negative indices on the left tail).
    pub fit_window: (i64, i64),
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub neg: Option<TailFit>,
    pub pos: Option<TailFit>,
    /// RMS of the log-linear fit over both tails.
    pub residual: f64,
}

impl DecayEstimate {
    pub fn rate_pos(&self) -> Option<f64> {
        self.pos.as_ref().map(|t| t.rate)
    }

    pub fn rate_neg(&self) -> Option<f64> {
        self.neg.as_ref().map(|t| t.rate)
    }
}

fn fit_side(g: &Sequence, sign: i64, floor: f64) -> Option<TailFit> {
    let (lo, hi) = g.window();
    let reach = if sign > 0 { hi } else { -lo };
    let extent = (1..=reach).rev().find(|k| g.get(sign * k).map(|v| v.norm()).unwrap_or(0.0) > floor)?;
    if (extent as usize) < MIN_SIDE {
        return None;
    }
    let start = (extent + 1) / 2;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for k in start..=extent {
        let a = g.get(sign * k).map(|v| v.norm()).unwrap_or(0.0);
        if a > floor {
            xs.push(k as f64);
            ys.push(a.ln());
        }
    }
    let (slope, intercept, residual) = least_squares(&xs, &ys);
    let fit_window = if sign > 0 { (start, extent) } else { (-extent, -start) };
    Some(TailFit { rate: slope.exp(), prefactor: intercept.exp(), fit_window, residual })
}

/// Geometric tail rates of a sequence on Z, fitted on the outer half of each tail.
pub fn decay_estimate(g: &Sequence) -> Result<DecayEstimate> {
    if g.dim() != 1 {
        return Err(Error::DimensionMismatch("decay_estimate needs a sequence on Z".into()));
    }
    let max = g.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = FIT_FLOOR * max;
    let neg = fit_side(g, -1, floor);
    let pos = fit_side(g, 1, floor);
    if neg.is_none() && pos.is_none() {
        return Err(Error::TooShort { needed: MIN_SIDE });
    }
    let residual = {
        let fits: Vec<&TailFit> = [&neg, &pos].into_iter().flatten().collect();
        (fits.iter().map(|f| f.residual.powi(2)).sum::<f64>() / fits.len() as f64).sqrt()
    };
    Ok(DecayEstimate { neg, pos, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_geometric_tail() {
        let g = Sequence::scalars(0, &(0..=40).map(|n| 0.5f64.powi(n + 1)).collect::<Vec<_>>());
        let d = decay_estimate(&g).unwrap();
        assert!((d.rate_pos().unwrap() - 0.5).abs() < 1e-6);
        assert!(d.neg.is_none());
        assert!(d.residual < 1e-12);
    }

    #[test]
    fn unit_is_too_short() {
        assert_eq!(decay_estimate(&Sequence::delta(1)), Err(Error::TooShort { needed: MIN_SIDE }));
    }

    #[test]
    fn two_sided_tail() {
        // z / ((z - 1/2)(z - 2)) has coefficients -(2/3) 2^{-|n|} on both sides of the unit circle
        let g = Sequence::scalars(-60, &(-60..=60).map(|n: i64| -(2.0 / 3.0) * 0.5f64.powi(n.abs() as i32)).collect::<Vec<_>>());
        let d = decay_estimate(&g).unwrap();
        assert!((d.rate_pos().unwrap() - 0.5).abs() < 1e-9);
        assert!((d.rate_neg().unwrap() - 0.5).abs() < 1e-9);
        assert!(d.neg.unwrap().fit_window.1 < 0);
    }
}
