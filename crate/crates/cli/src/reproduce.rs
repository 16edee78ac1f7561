use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use num_rational::Rational64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use bellnet_core::classical::{classical_max, MixtureOptions, Mode};
use bellnet_core::hybrid::{
    classify, closed_form_bounds, factorized_value, holder_check, optimal_witnesses, reproducibility,
    t_nonlocality_degree, HybridSplit, Reproducibility,
};
use bellnet_core::netspec::hybrid_star;
use bellnet_core::nosignal::{ns_value, pr_box, validate_box};
use bellnet_core::operators::{
    build_ghz_mermin_block, build_segmented_operators, even_parity_strings, virtual_qubit_pair, OperatorFamily,
};
use bellnet_core::quantum::{
    angle_grid, dense_expectation, dense_state_for_spec, quantum_bound, quantum_sum_family, quantum_value,
    sos_residual, sweep_family, DenseState,
};
use bellnet_core::{NetworkSpec, PauliString, Roster};

use crate::networks::load;
use crate::report::{RunReport, Status, Verdict};
use crate::{CliError, Context};

const TOL: f64 = 1e-9;
const SWEEP_TOL: f64 = 1e-3;
const RESTARTS: usize = 1000;
const HOLDER_TRIALS: usize = 10_000;

const STARS: [&str; 3] = ["star1.json", "star2.json", "star3.json"];
const VALID_NETWORKS: [&str; 6] = [
    "star1.json",
    "star2.json",
    "star3.json",
    "ghz3-star.json",
    "hybrid-111.json",
    "ns-star2.json",
];

type RowResult = Result<String, CliError>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Invalid(msg()))
    }
}

struct Suite<'a> {
    ctx: &'a Context,
    dir: Option<&'a Path>,
    grid: usize,
}

impl Suite<'_> {
    fn document(&self, name: &str) -> Result<NetworkSpec, CliError> {
        Ok(NetworkSpec::parse(&load(name, self.dir)?)?)
    }

    /// The network's structure with every type-A angle at π/4; the rows
    /// that need other angles set them explicitly.
    fn structure(&self, name: &str) -> Result<NetworkSpec, CliError> {
        let spec = self.document(name)?;
        let m = spec.m_a();
        Ok(spec.with_angles(&vec![FRAC_PI_4; m])?)
    }

    fn family(&self, name: &str) -> Result<OperatorFamily, CliError> {
        Ok(build_segmented_operators(&self.structure(name)?)?)
    }

    fn validate(&self, name: &str) -> RowResult {
        let spec = self.document(name)?;
        let diags = spec.validate();
        check(diags.is_empty(), || {
            diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
        })?;
        Ok(format!("M_A = {}, M_B = {}", spec.m_a(), spec.m_b()))
    }

    fn reject_bad_nb(&self) -> RowResult {
        let diags = self.document("bad-nb1.json")?.validate();
        check(diags.iter().any(|d| d.code == "n_b"), || format!("diagnostics {diags:?}"))?;
        Ok("n_B ≥ 2 violated".into())
    }

    fn linear_classical(&self) -> RowResult {
        for name in STARS {
            let r = classical_max(&self.family(name)?, 1.0, Mode::Deterministic, MixtureOptions::default())?;
            check(r.linear_exact == Some(1), || format!("{name}: {:?}", r.linear_exact))?;
        }
        Ok("max Σ⟨B_l⟩ = 1 for M_A = 1, 2, 3".into())
    }

    fn nonlinear_classical(&self) -> RowResult {
        let opts = MixtureOptions {
            restarts: RESTARTS,
            seed: self.ctx.seed,
            ..MixtureOptions::default()
        };
        for name in STARS {
            let fam = self.family(name)?;
            let m = fam.m_a() as f64;
            for p in [0.5, 0.75] {
                let bound = 2f64.powf(m * (1.0 - p));
                let r = classical_max(&fam, p, Mode::Mixture, opts)?;
                check((r.value - bound).abs() <= TOL, || format!("{name} p={p}: {} vs {bound}", r.value))?;
                let sampled = r.sampled_best.unwrap_or(f64::INFINITY);
                check(sampled <= bound + TOL, || format!("{name} p={p}: sampled {sampled}"))?;
            }
        }
        let r = classical_max(&self.family("star1.json")?, 2.0, Mode::Deterministic, MixtureOptions::default())?;
        check(r.value == 1.0, || format!("p=2 vertex max {}", r.value))?;
        Ok("2^{M_A(1−p)} for p ∈ {1/2, 3/4}; p=2 vertex max 1".into())
    }

    fn quantum_formula(&self) -> RowResult {
        let mut rng = StdRng::seed_from_u64(self.ctx.seed);
        for name in STARS {
            let fam = self.family(name)?;
            for p in [0.5, 1.0, 2.0] {
                for _ in 0..20 {
                    let angles: Vec<f64> = (0..fam.m_a()).map(|_| rng.random_range(0.01..1.56)).collect();
                    let s = quantum_sum_family(&fam.with_angles(&angles)?, p)?.sum;
                    let want: f64 = angles.iter().map(|t| t.cos().powf(p) + t.sin().powf(p)).product();
                    check((s - want).abs() <= TOL, || format!("{name} p={p}: {s} vs {want}"))?;
                }
            }
        }
        Ok("Σ⟨B_l⟩^p = ∏(cos^p θ + sin^p θ) on 20 tuples per case".into())
    }

    fn quantum_sweep(&self) -> RowResult {
        let step = angle_grid(self.grid).first().copied().unwrap_or(0.0);
        for name in STARS {
            let fam = self.family(name)?;
            for p in [0.5, 1.0, 2.0] {
                let r = sweep_family(&fam, p, self.grid)?;
                let bound = quantum_bound(fam.m_a(), p);
                check((r.max - bound).abs() <= SWEEP_TOL, || format!("{name} p={p}: {} vs {bound}", r.max))?;
                check(r.argmax.iter().all(|t| (t - FRAC_PI_4).abs() <= step + 1e-12), || {
                    format!("{name} p={p}: argmax {:?}", r.argmax)
                })?;
            }
        }
        Ok(format!("grid {} max 2^{{M_A(1−p/2)}} at π/4", self.grid))
    }

    fn dense_pair(&self, name: &str) -> Result<(OperatorFamily, DenseState), CliError> {
        if name == "virtual" {
            let l = &even_parity_strings(1)[1];
            let fam = virtual_qubit_pair(1, l)?;
            let mut dense = DenseState::bell(Roster::for_source(1, 2))?;
            for i in 2..=3 {
                dense = dense.tensor(&DenseState::bell(Roster::for_source(i, 2))?, self.ctx.dense_cap)?;
            }
            return Ok((fam, dense));
        }
        let spec = self.structure(name)?;
        let dense = dense_state_for_spec(&spec, self.ctx.dense_cap)?;
        Ok((build_segmented_operators(&spec)?, dense))
    }

    fn dense_agreement(&self, name: &str) -> RowResult {
        let (fam, dense) = self.dense_pair(name)?;
        let mut rng = StdRng::seed_from_u64(self.ctx.seed);
        let random: Vec<f64> = (0..fam.m_a()).map(|_| rng.random_range(0.05..1.5)).collect();
        let mut worst: f64 = 0.0;
        for f in [fam.clone(), fam.with_angles(&random)?] {
            for op in &f.operators {
                let s = quantum_value(op, &f.state)?;
                worst = worst.max((s - dense_expectation(op, &dense)?).abs());
            }
        }
        check(worst < TOL, || format!("deviation {worst:e}"))?;
        Ok(format!("{} qubits, max deviation {worst:.1e}", dense.num_qubits()))
    }

    fn sos(&self, name: &str) -> RowResult {
        let (fam, dense) = self.dense_pair(name)?;
        let w = sos_residual(&fam, &dense, 1.0)?;
        let worst = w.residuals.iter().cloned().fold(0.0, f64::max);
        check(worst < TOL, || format!("residual {worst:e}"))?;
        let zeros = DenseState::basis(fam.roster().clone(), 0, self.ctx.dense_cap)?;
        let control = sos_residual(&fam, &zeros, 1.0)?;
        let best = control.residuals.iter().cloned().fold(0.0, f64::max);
        check(best >= 0.5, || format!("|0…0⟩ control residual {best}"))?;
        Ok(format!("max residual {worst:.1e}, control {best:.3}"))
    }

    fn no_signaling(&self) -> RowResult {
        check(validate_box(&pr_box()).is_empty(), || "PR box signals".into())?;
        for m in 1..=3 {
            let v = ns_value(&hybrid_star(0, 0, m), 1.0)?;
            check(v.exact_sum == Some(Rational64::from_integer(1 << m)), || {
                format!("M_A={m}: {:?}", v.exact_sum)
            })?;
        }
        let v = ns_value(&self.structure("ns-star2.json")?, 0.5)?;
        check(v.exact_sum == Some(Rational64::from_integer(4)), || format!("ns-star2: {:?}", v.exact_sum))?;
        Ok("Σ = 2^{M_A} exactly for M_A = 1, 2, 3".into())
    }

    fn hybrid_formula(&self) -> RowResult {
        for m in 2..=3 {
            for p in [0.5, 1.0] {
                for split in HybridSplit::all(m) {
                    let b = closed_form_bounds(split, p)?;
                    let (c, q, n) = optimal_witnesses(split);
                    let f = factorized_value(&c, &q, &n, p)?;
                    check((f - b.b_max).abs() <= TOL, || format!("{split} p={p}: {f} vs {}", b.b_max))?;
                    let lo = HybridSplit::new(split.u, m - split.u, 0)?.b_max(p);
                    let hi = HybridSplit::new(split.u, 0, m - split.u)?.b_max(p);
                    check(lo <= b.b_max + 1e-12 && b.b_max <= hi + 1e-12, || format!("{split} p={p}: ordering"))?;
                }
            }
        }
        let spec = self.structure("hybrid-111.json")?;
        for p in [0.5, 1.0] {
            let b = classify(&spec, p)?;
            let achieved = b.achieved.unwrap_or(f64::NAN);
            check((achieved - b.b_max).abs() <= TOL, || format!("hybrid-111 p={p}: {achieved} vs {}", b.b_max))?;
        }
        Ok("factorized witnesses reach B_max; ordering holds".into())
    }

    fn classification(&self) -> RowResult {
        let s = |u, v, w| HybridSplit::new(u, v, w);
        check(reproducibility(s(0, 2, 0)?, s(1, 0, 1)?)? == Reproducibility::Equal, || {
            "⟨0,2,0⟩ vs ⟨1,0,1⟩".into()
        })?;
        for name in ["star2.json", "star3.json"] {
            let fam = self.family(name)?;
            let value = quantum_sum_family(&fam, 1.0)?.sum;
            let d = t_nonlocality_degree(value, fam.m_a(), 1.0)?;
            check(d.degree == Some(2), || format!("{name}: degree {:?}", d.degree))?;
        }
        for m in 1..=6 {
            for u2 in 0..=m {
                let dominates = reproducibility(s(0, m, 0)?, s(u2, 0, m - u2)?)? == Reproducibility::FirstDominates;
                check(dominates == (2 * u2 > m), || format!("M_A={m} u′={u2}"))?;
            }
        }
        Ok("⟨0,2,0⟩ ≡ ⟨1,0,1⟩; degree 2 for n = 2, 3; dominance iff u′ > M_A/2".into())
    }

    fn mermin(&self) -> RowResult {
        let spec = self.structure("ghz3-star.json")?;
        let ghz = spec
            .sources
            .iter()
            .find(|s| s.particles == 3)
            .ok_or_else(|| CliError::Invalid("no three-particle source".into()))?
            .id;
        let block = build_ghz_mermin_block(&spec, ghz)?;
        let r = classical_max(&block, 1.0, Mode::Deterministic, MixtureOptions::default())?;
        check(r.linear_exact == Some(1), || format!("LHV max {:?}", r.linear_exact))?;
        let q = quantum_sum_family(&block, 1.0)?.sum;
        check((q - 2.0).abs() <= TOL, || format!("quantum {q}"))?;
        Ok("LHV max 1, quantum 2".into())
    }

    fn virtual_qubit(&self) -> RowResult {
        let opts = MixtureOptions {
            seed: self.ctx.seed,
            ..MixtureOptions::default()
        };
        for l in even_parity_strings(1) {
            let fam = virtual_qubit_pair(1, &l)?;
            let f = &fam.operators[0].a_factors[0];
            let id = PauliString::identity(fam.roster().clone());
            check(!f.v0.commutes(&f.v1)?, || format!("l={l}: commuting pair"))?;
            check(f.v0.mul(&f.v0)? == id && f.v1.mul(&f.v1)? == id, || format!("l={l}: square"))?;
            for p in [1.0, 2.0] {
                let q = quantum_sum_family(&fam, p)?.sum;
                check((q - 2f64.powf(1.0 - p / 2.0)).abs() <= TOL, || format!("l={l} p={p}: quantum {q}"))?;
            }
            for p in [0.5, 1.0] {
                let c = classical_max(&fam, p, Mode::Mixture, opts)?.value;
                check((c - 2f64.powf(1.0 - p)).abs() <= TOL, || format!("l={l} p={p}: LHV {c}"))?;
            }
        }
        Ok("4 pairs: quantum 2^{1−p/2}, LHV 2^{1−p}".into())
    }

    fn holder(&self) -> RowResult {
        let mut rng = StdRng::seed_from_u64(self.ctx.seed);
        for alpha in 1..=3 {
            for _ in 0..HOLDER_TRIALS {
                let arrays: Vec<Vec<f64>> = (0..3).map(|_| (0..8).map(|_| rng.random::<f64>() * 10.0).collect()).collect();
                let refs: Vec<&[f64]> = arrays.iter().map(Vec::as_slice).collect();
                let r = holder_check(&refs, alpha)?;
                check(r.lhs <= r.rhs + 1e-12, || format!("α={alpha}: {} > {}", r.lhs, r.rhs))?;
            }
        }
        let consts: Vec<Vec<f64>> = (0..3).map(|k| vec![0.5 + k as f64; 8]).collect();
        let refs: Vec<&[f64]> = consts.iter().map(Vec::as_slice).collect();
        let r = holder_check(&refs, 3)?;
        check((r.lhs - r.rhs).abs() <= 1e-12, || format!("constant arrays {} vs {}", r.lhs, r.rhs))?;
        Ok(format!("{} triples per α", HOLDER_TRIALS))
    }
}

fn push(report: &mut RunReport, name: impl Into<String>, outcome: RowResult) {
    let verdict = match outcome {
        Ok(detail) => Verdict::new(name, Status::Pass, detail),
        Err(CliError::Core(e)) if e.is_resource_guard() => Verdict::new(name, Status::Skip, e.to_string()),
        Err(e) => Verdict::new(name, Status::Fail, e.to_string()),
    };
    log::info!("{} {}", verdict.status.as_str(), verdict.name);
    report.verdicts.push(verdict);
}

/// Every check on the bundled networks, one verdict per row.
pub fn reproduce(ctx: &Context, dir: Option<&Path>, grid: usize, report: &mut RunReport) -> Result<(), CliError> {
    let suite = Suite { ctx, dir, grid };
    report.seed = Some(ctx.seed);
    for name in VALID_NETWORKS {
        push(report, format!("validate {name}"), suite.validate(name));
    }
    push(report, "reject bad-nb1.json", suite.reject_bad_nb());
    push(report, "linear classical bound", suite.linear_classical());
    push(report, "nonlinear classical bound", suite.nonlinear_classical());
    push(report, "quantum product formula", suite.quantum_formula());
    push(report, "quantum sweep", suite.quantum_sweep());
    for name in ["star2.json", "star3.json", "ghz3-star.json", "virtual"] {
        push(report, format!("dense agreement {name}"), suite.dense_agreement(name));
    }
    for name in ["star2.json", "star3.json", "ghz3-star.json", "virtual"] {
        push(report, format!("sos residuals {name}"), suite.sos(name));
    }
    push(report, "no-signaling maximum", suite.no_signaling());
    push(report, "hybrid formula and ordering", suite.hybrid_formula());
    push(report, "classification", suite.classification());
    push(report, "Mermin block", suite.mermin());
    push(report, "virtual qubit", suite.virtual_qubit());
    push(report, "Hölder inequality", suite.holder());
    Ok(())
}
