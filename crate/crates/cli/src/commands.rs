use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::json;

use bellnet_core::classical::{
    classical_bound, classical_max, strategy_correlators, BoundValidity, MixtureOptions, Mode, Witness,
};
use bellnet_core::hybrid::{classify, closed_form_bounds, BoundsReport, HybridSplit};
use bellnet_core::nosignal::{ns_max, ns_value};
use bellnet_core::operators::build_segmented_operators;
use bellnet_core::quantum::{
    dense_expectation, dense_state_for_spec, quantum_sum_family, sos_residual, sweep_angles,
};
use bellnet_core::{NetworkSpec, OperatorFamily};

use crate::report::{spec_digest, LEntry, RunReport, Status, Verdict};
use crate::{CliError, Context};

pub const AGREEMENT_TOLERANCE: f64 = 1e-9;

pub fn read_spec(path: &Path) -> Result<NetworkSpec, CliError> {
    let doc = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(NetworkSpec::parse(&doc)?)
}

fn load_valid(path: &Path, report: &mut RunReport) -> Result<NetworkSpec, CliError> {
    let spec = read_spec(path)?;
    report.spec_digest = Some(spec_digest(&spec));
    Ok(spec.validated()?)
}

/// The all-quantum network with the same routing.
pub fn quantum_spec(spec: &NetworkSpec) -> Result<NetworkSpec, CliError> {
    if spec.is_fully_quantum() {
        Ok(spec.clone())
    } else {
        log::info!("replacing classical and no-signaling sources by entangled states");
        Ok(spec.associated_quantum()?)
    }
}

fn rows(family: &OperatorFamily) -> Vec<LEntry> {
    family
        .operators
        .iter()
        .map(|op| LEntry {
            l: op.index.to_string(),
            omega: Some(op.weight()),
            g: Some(op.g.labeled()),
            settings: op
                .b_settings
                .iter()
                .map(|b| (b.observer.clone(), b.label.clone()))
                .collect(),
            values: BTreeMap::new(),
        })
        .collect()
}

pub fn validate(path: &Path, report: &mut RunReport) -> Result<(), CliError> {
    let spec = read_spec(path)?;
    report.spec_digest = Some(spec_digest(&spec));
    let diags = spec.validate();
    for d in &diags {
        eprintln!("error[{}]: {}", d.code, d.message);
    }
    let detail = if diags.is_empty() {
        format!("M_A = {}, M_B = {}", spec.m_a(), spec.m_b())
    } else {
        diags.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; ")
    };
    report
        .verdicts
        .push(Verdict::new("validation", Status::from_bool(diags.is_empty()), detail));
    report.details = json!({
        "diagnostics": diags,
        "m_a": spec.m_a(),
        "m_b": spec.m_b(),
        "sources": spec.split_counts(),
    });
    Ok(())
}

pub fn operators(path: &Path, report: &mut RunReport) -> Result<(), CliError> {
    let spec = quantum_spec(&load_valid(path, report)?)?;
    let family = build_segmented_operators(&spec)?;
    report.per_l = rows(&family);
    let a_observers: Vec<_> = family.operators[0]
        .a_factors
        .iter()
        .map(|f| {
            json!({
                "id": f.observer,
                "theta": f.theta,
                "axes": f.axes.map(|a| a.to_string()),
                "v0": f.v0.labeled(),
                "v1": f.v1.labeled(),
            })
        })
        .collect();
    let b_observers: Vec<_> = family
        .b_observers
        .iter()
        .map(|b| json!({"id": b.id, "settings": b.settings}))
        .collect();
    report.details = json!({
        "stabilizer_generators": family.state.generators().iter().map(|g| g.labeled()).collect::<Vec<_>>(),
        "a_observers": a_observers,
        "b_observers": b_observers,
    });
    Ok(())
}

fn split_report(report: &mut RunReport, bounds: &BoundsReport) {
    report.bounds.insert("b_c".into(), bounds.b_c);
    report.bounds.insert("b_q".into(), bounds.b_q);
    report.bounds.insert("b_ns".into(), bounds.b_ns);
    report.bounds.insert("b_max".into(), bounds.b_max);
    report.verdicts.push(Verdict::new(
        "degeneracies",
        Status::from_bool(bounds.degeneracies_hold),
        "pure splits reduce to their single-kind bound",
    ));
    if let Some(achieved) = bounds.achieved {
        report.bounds.insert("achieved".into(), achieved);
        report.verdicts.push(Verdict::new(
            "achieves B_max",
            Status::from_bool((achieved - bounds.b_max).abs() <= AGREEMENT_TOLERANCE * bounds.b_max.max(1.0)),
            format!("{achieved:.9} vs {:.9}", bounds.b_max),
        ));
    }
    report.details = serde_json::to_value(bounds).expect("bounds serialize");
}

pub fn bounds(ma: usize, uvw: Option<HybridSplit>, p: f64, report: &mut RunReport) -> Result<(), CliError> {
    let split = match uvw {
        Some(s) => s,
        None => HybridSplit::new(0, ma, 0)?,
    };
    if split.m_a() != ma {
        return Err(CliError::Invalid(format!("split {split} has M_A = {}, not {ma}", split.m_a())));
    }
    let b = closed_form_bounds(split, p)?;
    split_report(report, &b);
    Ok(())
}

pub fn classify_cmd(
    file: Option<&Path>,
    uvw: Option<HybridSplit>,
    p: Option<f64>,
    report: &mut RunReport,
) -> Result<(), CliError> {
    let spec = match (file, uvw) {
        (Some(path), _) => load_valid(path, report)?,
        (None, Some(split)) => bellnet_core::netspec::hybrid_star(split.u, split.v, split.w),
        (None, None) => return Err(CliError::Usage("classify needs a network file or --uvw".into())),
    };
    let p = p.unwrap_or(spec.p);
    let b = classify(&spec, p)?;
    split_report(report, &b);
    Ok(())
}

pub fn quantum(
    path: &Path,
    p: Option<f64>,
    dense_check: bool,
    sos: bool,
    ctx: &Context,
    report: &mut RunReport,
) -> Result<(), CliError> {
    let spec = quantum_spec(&load_valid(path, report)?)?;
    let p = p.unwrap_or(spec.p);
    let family = build_segmented_operators(&spec)?;
    let qs = quantum_sum_family(&family, p)?;
    report.per_l = rows(&family);
    for (entry, row) in report.per_l.iter_mut().zip(&qs.rows) {
        entry.values.insert("quantum".into(), row.value);
    }
    report.bounds.insert("quantum_bound".into(), qs.bound);
    report.bounds.insert("product_formula".into(), qs.product_formula);
    report.verdicts.push(Verdict::new(
        "product formula",
        Status::from_bool((qs.sum - qs.product_formula).abs() <= AGREEMENT_TOLERANCE),
        format!("Σ = {:.12}, ∏ = {:.12}", qs.sum, qs.product_formula),
    ));
    report.verdicts.push(Verdict::new(
        "quantum bound",
        Status::from_bool(qs.sum <= qs.bound + AGREEMENT_TOLERANCE),
        format!("Σ = {:.12} ≤ {:.12}", qs.sum, qs.bound),
    ));
    let mut details = json!({"p": p, "sum": qs.sum, "angles": family.angles()});

    if dense_check || sos {
        let dense = dense_state_for_spec(&spec, ctx.dense_cap)?;
        if dense_check {
            let mut worst: f64 = 0.0;
            for (entry, op) in report.per_l.iter_mut().zip(&family.operators) {
                let d = dense_expectation(op, &dense)?;
                worst = worst.max((d - entry.values["quantum"]).abs());
                entry.values.insert("dense".into(), d);
            }
            report.verdicts.push(Verdict::new(
                "dense agreement",
                Status::from_bool(worst < AGREEMENT_TOLERANCE),
                format!("max deviation {worst:.3e}"),
            ));
        }
        if sos {
            let w = sos_residual(&family, &dense, p)?;
            let worst = w.residuals.iter().cloned().fold(0.0, f64::max);
            for (entry, r) in report.per_l.iter_mut().zip(&w.residuals) {
                entry.values.insert("sos_residual".into(), *r);
            }
            report.verdicts.push(Verdict::new(
                "sos residuals",
                Status::from_bool(worst < AGREEMENT_TOLERANCE),
                format!("max ‖M_l|Ψ⟩‖ = {worst:.3e}"),
            ));
            details["sos"] = serde_json::to_value(&w).expect("witness serializes");
        }
    }
    report.details = details;
    Ok(())
}

pub fn sweep(path: &Path, p: Option<f64>, grid: usize, report: &mut RunReport) -> Result<(), CliError> {
    let spec = quantum_spec(&load_valid(path, report)?)?;
    let p = p.unwrap_or(spec.p);
    let r = sweep_angles(&spec, p, grid)?;
    let bound = bellnet_core::quantum::quantum_bound(spec.m_a(), p);
    report.bounds.insert("quantum_bound".into(), bound);
    report.bounds.insert("max".into(), r.max);
    report.verdicts.push(Verdict::new(
        "quantum bound",
        Status::from_bool(r.max <= bound + AGREEMENT_TOLERANCE),
        format!("grid max {:.9} at {:?}", r.max, r.argmax),
    ));
    report.details = json!({"p": p, "grid": grid, "sweep": r});
    Ok(())
}

pub fn bruteforce(
    path: &Path,
    p: Option<f64>,
    mixture: bool,
    restarts: usize,
    ctx: &Context,
    report: &mut RunReport,
) -> Result<(), CliError> {
    let spec = quantum_spec(&load_valid(path, report)?)?;
    let p = p.unwrap_or(spec.p);
    let family = build_segmented_operators(&spec)?;
    let mode = if mixture { Mode::Mixture } else { Mode::Deterministic };
    let opts = MixtureOptions {
        restarts,
        seed: ctx.seed,
        ..MixtureOptions::default()
    };
    let r = classical_max(&family, p, mode, opts)?;
    report.seed = r.seed;
    report.per_l = rows(&family);
    let per_l: Vec<f64> = match &r.witness {
        Witness::Strategy { strategy, .. } => strategy_correlators(&family, strategy)?
            .into_iter()
            .map(|c| c as f64)
            .collect(),
        Witness::Mixture { weights } => {
            let mut v = vec![0.0; family.operators.len()];
            for (vertex, w) in weights {
                v[vertex.l] += w * f64::from(vertex.sign);
            }
            v
        }
    };
    for (entry, v) in report.per_l.iter_mut().zip(per_l) {
        entry.values.insert("classical".into(), v);
    }
    let bound = classical_bound(family.m_a(), p)?;
    report.bounds.insert("classical_bound".into(), bound.value);
    report.bounds.insert("max".into(), r.value);
    match bound.validity {
        BoundValidity::Valid => report.verdicts.push(Verdict::new(
            "classical bound",
            Status::from_bool(r.value <= bound.value + AGREEMENT_TOLERANCE),
            format!("max {:.9}, bound {:.9}", r.value, bound.value),
        )),
        BoundValidity::NotABound { vertex_value } => report.verdicts.push(Verdict::new(
            "classical bound",
            Status::Skip,
            format!("2^(M_A(1-p)) is not a bound for p > 1; a single strategy reaches {vertex_value}"),
        )),
    }
    report.details = json!({
        "max": r.value,
        "bound": bound.value,
        "validity": bound.validity,
        "mode": r.mode_used,
        "linear_exact": r.linear_exact,
        "strategies": r.strategies,
        "full_enumeration": r.full_enumeration,
        "sampled_best": r.sampled_best,
        "witness": r.witness,
    });
    Ok(())
}

pub fn ns(path: &Path, p: Option<f64>, report: &mut RunReport) -> Result<(), CliError> {
    let spec = load_valid(path, report)?;
    let p = p.unwrap_or(spec.p);
    let v = ns_value(&spec, p)?;
    report.per_l = v
        .per_l
        .iter()
        .map(|(l, x)| LEntry {
            l: l.to_string(),
            values: BTreeMap::from([("ns".to_string(), *x)]),
            ..LEntry::default()
        })
        .collect();
    let max = ns_max(spec.m_a(), p)?;
    report.bounds.insert("ns_max".into(), max);
    report.verdicts.push(Verdict::new(
        "no-signaling bound",
        Status::from_bool(v.sum <= max + AGREEMENT_TOLERANCE),
        format!("Σ = {:.9} ≤ {max:.9}", v.sum),
    ));
    report.details = json!({
        "p": p,
        "sum": v.sum,
        "exact_sum": v.exact_sum.map(|r| r.to_string()),
    });
    Ok(())
}
