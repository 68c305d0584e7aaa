use crate::output::{Output, Table, EXIT_INCONCLUSIVE, EXIT_OK};
use crate::{Cmd, RunConfig};
use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use std::path::Path;
use wiener_forge::continuous::{max_weight_continuous, strip_of_invertibility, RealFunction, StripOptions};
use wiener_forge::limits::{hierarchy_demo, inclusion_chain_check, HierarchyParams, LimitDescriptor, LimitKind};
use wiener_forge::sequences::{membership_certificate, Sequence, Verdict, MEMBERSHIP_MARGIN};
use wiener_forge::weights::{
    default_directions, extended_grs, family_monotonicity, grs_check, rho_mu_z2, rho_pair, rho_pair_r, s_omega, Domain, Family, GrsOptions,
    Weight, WeightFamily,
};
use wiener_forge::wiener::{
    construct_nu_step, decay_estimate, invertibility_annulus, laurent_inverse, laurent_inverse_z2, max_weight_discrete, type1_family,
    type2_family, type_families_z2, AnnulusOptions, InverseOptions,
};
use wiener_forge::{AlgebraElement, Error};

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow::Error::new(Error::InvalidDescriptor(format!("{}: {e}", path.display()))))
}

fn annulus_opts(cfg: &RunConfig) -> AnnulusOptions {
    AnnulusOptions { tol: cfg.tol, margin: cfg.margin, ..Default::default() }
}

fn inverse_opts(cfg: &RunConfig) -> Result<InverseOptions> {
    if !cfg.fft_cap.is_power_of_two() {
        bail!(Error::InvalidDescriptor(format!("--fft-cap must be a power of two, got {}", cfg.fft_cap)));
    }
    Ok(InverseOptions { tol: cfg.tol, k_cap: cfg.fft_cap, ..Default::default() })
}

fn check_config(cfg: &RunConfig) -> Result<()> {
    for (name, v) in [("tol", cfg.tol), ("margin", cfg.margin), ("grs-tol", cfg.grs_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            bail!(Error::InvalidDescriptor(format!("--{name} must be positive, got {v}")));
        }
    }
    if cfg.depth == 0 {
        bail!(Error::InvalidDescriptor("--depth must be at least 1".into()));
    }
    Ok(())
}

fn element_columns(d: usize) -> Vec<String> {
    if d == 1 {
        return vec!["re".into(), "im".into()];
    }
    (0..d * d).flat_map(|k| [format!("re_{}_{}", k / d, k % d), format!("im_{}_{}", k / d, k % d)]).collect()
}

fn element_cells(v: &AlgebraElement) -> Vec<String> {
    v.entries().iter().flat_map(|c| [c.re.to_string(), c.im.to_string()]).collect()
}

fn coefficient_table(g: &Sequence) -> Table {
    let mut header: Vec<String> = if g.dim() == 1 { vec!["n".into()] } else { vec!["m1".into(), "m2".into()] };
    header.push("norm".into());
    header.extend(element_columns(g.coeff_dim()));
    let rows = g
        .iter()
        .map(|(m, v)| {
            let mut row: Vec<String> = m[..g.dim()].iter().map(|x| x.to_string()).collect();
            row.push(v.norm().to_string());
            row.extend(element_cells(v));
            row
        })
        .collect();
    Table { name: "inverse", header, rows }
}

fn step_rates(w: &Weight) -> Option<(f64, f64)> {
    match &w.family {
        Family::StepGeometric { r, s } => Some((*r, *s)),
        _ => rho_pair(w).ok().map(|x| (x.rho1, x.rho2)),
    }
}

pub fn run(cmd: &Cmd, cfg: &RunConfig) -> Result<Output> {
    check_config(cfg)?;
    match cmd {
        Cmd::Rho { weight } => rho(&read_json(weight)?),
        Cmd::Grs { input } => grs(read_json(input)?, cfg),
        Cmd::Invert { sequence, weight, p } => invert(&read_json(sequence)?, &read_json(weight)?, *p, cfg),
        Cmd::Annulus { sequence, weight } => {
            let f: Sequence = read_json(sequence)?;
            let rho = match weight {
                Some(w) => Some(rho_pair(&read_json::<Weight>(w)?)?),
                None => None,
            };
            Output::new("annulus", invertibility_annulus(&f, rho.as_ref(), &annulus_opts(cfg))?)
        }
        Cmd::Maxweight { input, weight } => {
            let w: Weight = read_json(weight)?;
            if w.domain == Domain::R {
                let f: RealFunction = read_json(input)?;
                Output::new("maxweight", max_weight_continuous(&f, &w, &StripOptions { tol: cfg.tol, ..Default::default() })?)
            } else {
                let f: Sequence = read_json(input)?;
                Output::new("maxweight", max_weight_discrete(&f, &w, &annulus_opts(cfg))?)
            }
        }
        Cmd::Family { sequence, family, type1, type2 } => {
            let kind = match (type1, type2) {
                (true, _) => Some(LimitKind::TypeI),
                (_, true) => Some(LimitKind::TypeII),
                _ => None,
            };
            self::family(&read_json(sequence)?, read_json(family)?, kind, cfg)
        }
        Cmd::Hierarchy { sequence, rate, p, a, b, p_seq, q_seq } => {
            let g = match sequence {
                Some(path) => read_json(path)?,
                None => {
                    if !(*rate > 0.0 && *rate < 1.0) {
                        bail!(Error::InvalidDescriptor(format!("--rate must lie in (0, 1), got {rate}")));
                    }
                    let (lo, hi) = cfg.window;
                    Sequence::scalars(lo, &(lo..=hi).map(|n| rate.powi(n.unsigned_abs() as i32)).collect::<Vec<_>>())
                }
            };
            let fill = |v: &Vec<f64>| if v.is_empty() { vec![*p; cfg.depth] } else { v.clone() };
            let params = HierarchyParams { p: *p, a: *a, b: *b, p_seq: fill(p_seq), q_seq: fill(q_seq), depth: cfg.depth };
            let report = hierarchy_demo(&g, &params)?;
            let rows = report.columns.iter().map(|r| vec![r.n.to_string(), r.log_g.to_string(), r.log_eta.to_string()]).collect();
            let table = Table { name: "hierarchy", header: vec!["n".into(), "log_g".into(), "log_eta".into()], rows };
            Ok(Output::new("hierarchy", &report)?.with_table(table))
        }
        Cmd::Chain { sequence, nu, omega, p, q } => {
            let r = inclusion_chain_check(&read_json(sequence)?, *p, *q, &read_json(nu)?, &read_json(omega)?)?;
            let code = if r.pass { EXIT_OK } else { EXIT_INCONCLUSIVE };
            Ok(Output::new("chain", r)?.with_code(code))
        }
        Cmd::Continuous { function, weight } => {
            let f: RealFunction = read_json(function)?;
            let w: Weight = read_json(weight)?;
            let opts = StripOptions { tol: cfg.tol, ..Default::default() };
            let strip = strip_of_invertibility(&f, &w, &opts)?;
            let max = max_weight_continuous(&f, &w, &opts)?;
            Output::new("continuous", json!({ "strip": strip, "max_weight": max }))
        }
    }
}

fn rho(w: &Weight) -> Result<Output> {
    let report = match w.domain {
        Domain::Z => serde_json::to_value(rho_pair(w)?)?,
        Domain::Z2 => serde_json::to_value(rho_mu_z2(w)?)?,
        Domain::ZN => serde_json::to_value(s_omega(w)?)?,
        Domain::R => serde_json::to_value(rho_pair_r(w)?)?,
    };
    Output::new("rho", report)
}

fn grs(input: Value, cfg: &RunConfig) -> Result<Output> {
    let opts = GrsOptions { grs_tol: cfg.grs_tol, ..Default::default() };
    let header = vec!["direction".into(), "limit".into()];
    if input.get("weights").is_some() {
        let fam: WeightFamily = serde_json::from_value(input).map_err(|e| Error::InvalidDescriptor(e.to_string()))?;
        let r = extended_grs(&fam, &default_directions(fam.weights[0].domain), &opts)?;
        let rows = r.directions.iter().map(|d| vec![format!("{:?}", d.direction), d.inf_estimate.to_string()]).collect();
        return Ok(Output::new("grs", r)?.with_table(Table { name: "grs", header, rows }));
    }
    let w: Weight = serde_json::from_value(input).map_err(|e| Error::InvalidDescriptor(e.to_string()))?;
    let r = grs_check(&w, &default_directions(w.domain), &opts)?;
    let rows = r.directions.iter().map(|d| vec![format!("{:?}", d.direction), d.limit.to_string()]).collect();
    Ok(Output::new("grs", r)?.with_table(Table { name: "grs", header, rows }))
}

fn invert(f: &Sequence, w: &Weight, p: f64, cfg: &RunConfig) -> Result<Output> {
    let opts = inverse_opts(cfg)?;
    let (lo, hi) = cfg.window;
    if f.dim() == 2 {
        let inv = laurent_inverse_z2(f, [1.0, 1.0], ([lo, lo], [hi, hi]), &opts)?;
        let table = coefficient_table(&inv.coeffs);
        let report = json!({ "k": inv.k, "residual": inv.residual, "window": [lo, hi] });
        return Ok(Output::new("invert", report)?.with_table(table));
    }
    let rho = rho_pair(w)?;
    let ann = invertibility_annulus(f, Some(&rho), &annulus_opts(cfg))?;
    let inv = laurent_inverse(f, &ann, cfg.window, &opts)?;
    let decay = match decay_estimate(&inv.coeffs) {
        Ok(d) => Some(d),
        Err(Error::TooShort { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let nu = if rho.admissible_rho {
        w.clone()
    } else {
        let [r, s] = ann.closed_clamp.expect("clamp requested");
        construct_nu_step(r, s)?
    };
    let cert = membership_certificate(&inv.coeffs, decay.as_ref(), p, &nu, MEMBERSHIP_MARGIN)?;
    let code = if cert.verdict == Verdict::Member { EXIT_OK } else { EXIT_INCONCLUSIVE };
    let table = coefficient_table(&inv.coeffs);
    let report = json!({
        "annulus": ann,
        "k": inv.k,
        "residual": inv.residual,
        "decay": decay,
        "nu": nu,
        "p": p,
        "membership": cert,
    });
    Ok(Output::new("invert", report)?.with_table(table).with_code(code))
}

fn family(f: &Sequence, input: Value, kind: Option<LimitKind>, cfg: &RunConfig) -> Result<Output> {
    let (fam, kind) = if input.get("kind").is_some() {
        let d: LimitDescriptor = serde_json::from_value(input).map_err(|e| Error::InvalidDescriptor(e.to_string()))?;
        d.validate()?;
        (d.fam, kind.unwrap_or(d.kind))
    } else {
        let fam: WeightFamily = serde_json::from_value(input).map_err(|e| Error::InvalidDescriptor(e.to_string()))?;
        let kind = kind.ok_or_else(|| Error::InvalidDescriptor("pass --type1 or --type2, or give \"kind\" in the descriptor".into()))?;
        (fam, kind)
    };
    let header: Vec<String> = ["n", "r_n", "s_n", "verdict"].iter().map(|s| s.to_string()).collect();
    if f.dim() == 2 {
        let out = type_families_z2(f, &fam, cfg.margin, &annulus_opts(cfg))?;
        let rows = out
            .nu
            .weights
            .iter()
            .enumerate()
            .map(|(n, w)| {
                let rm = rho_mu_z2(w).ok();
                let cell = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
                vec![(n + 1).to_string(), cell(rm.map(|r| r.rho1 * r.mu1)), cell(rm.map(|r| r.rho2 * r.mu2)), String::new()]
            })
            .collect();
        return Ok(Output::new("family", &out)?.with_table(Table { name: "family", header, rows }));
    }
    let out = match kind {
        LimitKind::TypeI => type1_family(f, &fam, cfg.margin)?,
        LimitKind::TypeII => type2_family(f, &fam, cfg.margin)?,
    };
    let mono = family_monotonicity(&out.nu, cfg.window)?;
    let ok = match kind {
        LimitKind::TypeI => out.per_n.iter().all(|v| *v == Verdict::Member),
        LimitKind::TypeII => out.per_n.contains(&Verdict::Member),
    };
    let rows = out
        .nu
        .weights
        .iter()
        .zip(&out.per_n)
        .enumerate()
        .map(|(n, (w, v))| {
            let (r, s) = step_rates(w).unwrap_or((f64::NAN, f64::NAN));
            vec![(n + 1).to_string(), r.to_string(), s.to_string(), serde_json::to_value(v).unwrap().as_str().unwrap_or("").to_string()]
        })
        .collect();
    let report = json!({ "kind": kind, "construction": out, "monotonicity": mono });
    Ok(Output::new("family", report)?.with_table(Table { name: "family", header, rows }).with_code(if ok {
        EXIT_OK
    } else {
        EXIT_INCONCLUSIVE
    }))
}
