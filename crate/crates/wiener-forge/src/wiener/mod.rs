//! Inversion and weight constructions.
//!
//! The pipeline for a symbol `f` on Z is: [`invertibility_annulus`] locates
//! the roots of `det f^` and the open annulus around the unit circle on which
//! the symbol stays invertible; [`laurent_inverse`] recovers the Laurent
//! coefficients of the inverse by sampling a circle inside that annulus;
//! [`decay_estimate`] fits the geometric tails of the result. The weight
//! constructions ([`max_weight_discrete`], [`type1_family`], [`type2_family`],
//! [`type_families_z2`], [`p_gt1_nu`]) clamp the rates of a given weight
//! against the annulus.

mod annulus;
mod decay;
mod families;
mod inverse;
mod maxweight;
mod pgt1;

pub use annulus::{invertibility_annulus, Annulus, AnnulusOptions};
pub use decay::{decay_estimate, DecayEstimate, TailFit};
pub use families::{type1_family, type2_family, type_families_z2, FamilyConstruction, Z2FamilyConstruction};
pub use inverse::{inverse_with_decay, laurent_inverse, laurent_inverse_z2, InverseOptions, LaurentInverse};
pub use maxweight::{construct_nu_step, max_weight_discrete, maximality_check, CandidateCheck, MaxWeight, MaximalityReport};
pub use pgt1::{p_gt1_nu, PGt1Nu};

/// Least-squares line through `(xs, ys)`: `(slope, intercept, rms residual)`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return (0.0, ys.first().copied().unwrap_or(0.0), 0.0);
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}
