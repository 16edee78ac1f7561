//! Acceptance matrix. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::FRAC_PI_4;
use std::process::ExitCode;
use std::time::Instant;

use bellnet_core::classical::{classical_bound, classical_max, MixtureOptions, Mode};
use bellnet_core::hybrid::{
    closed_form_bounds, factorized_value, holder_check, optimal_witnesses, reproducibility,
    t_nonlocality_degree, HybridSplit, Reproducibility,
};
use bellnet_core::netspec::{ghz_star, hybrid_star, quantum_star};
use bellnet_core::nosignal::{ns_value, pr_box, validate_box};
use bellnet_core::operators::{
    build_ghz_mermin_block, build_segmented_operators, even_parity_strings, virtual_qubit_family,
    virtual_qubit_pair, OperatorFamily,
};
use bellnet_core::quantum::{
    angle_grid, dense_expectation, dense_state_for_spec, quantum_sum_family, quantum_value, sos_residual,
    sweep_family, DenseState, DEFAULT_DENSE_CAP,
};
use bellnet_core::{PauliString, Roster};
use num_rational::Rational64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SEED: u64 = 20_240_601;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

/// Independent oracle: all `±1` assignments of a star network with one B
/// setting per `l`, maximizing the signed sum `Σ_l ∏_i (a0_i + (−1)^{l_i} a1_i)/2 · b_l`.
fn star_linear_oracle(m: usize) -> i64 {
    let settings = 1usize << m;
    let mut best = i64::MIN;
    for a in 0..1u64 << (2 * m) {
        for b in 0..1u64 << settings {
            let pm = |bits: u64, k: usize| if (bits >> k) & 1 == 1 { -1i64 } else { 1 };
            let mut total = 0;
            for l in 0..settings {
                let mut num = pm(b, l);
                for i in 0..m {
                    let li = (l >> (m - 1 - i)) & 1;
                    let (a0, a1) = (pm(a, 2 * i), pm(a, 2 * i + 1));
                    num *= a0 + if li == 1 { -a1 } else { a1 };
                }
                total += num / (1 << m);
            }
            best = best.max(total);
        }
    }
    best
}

fn star(m: usize) -> Result<OperatorFamily, String> {
    build_segmented_operators(&quantum_star(m)).map_err(e)
}

fn criterion_1() -> Outcome {
    for m in 1..=3 {
        let fam = star(m)?;
        let r = classical_max(&fam, 1.0, Mode::Deterministic, MixtureOptions::default()).map_err(e)?;
        let oracle = star_linear_oracle(m);
        ensure(oracle == 1, || format!("oracle gives {oracle} for M_A={m}"))?;
        ensure(r.linear_exact == Some(1), || format!("M_A={m}: brute force {:?}", r.linear_exact))?;
    }
    Ok("max Σ⟨B_l⟩_C = 1 exactly for M_A = 1, 2, 3".into())
}

fn criterion_2() -> Outcome {
    let opts = MixtureOptions {
        restarts: 1000,
        seed: SEED,
        ..Default::default()
    };
    for m in 1..=3 {
        let fam = star(m)?;
        for p in [0.5, 0.75] {
            let bound = 2f64.powf(m as f64 * (1.0 - p));
            let r = classical_max(&fam, p, Mode::Mixture, opts).map_err(e)?;
            ensure((r.value - bound).abs() <= 1e-9, || format!("M_A={m} p={p}: {} vs {bound}", r.value))?;
            // Uniform witness evaluated independently.
            let uniform: f64 = (0..1 << m).map(|_| (0.5f64.powi(m as i32)).powf(p)).sum();
            ensure((uniform - bound).abs() <= 1e-9, || format!("uniform witness {uniform} vs {bound}"))?;
            let sampled = r.sampled_best.unwrap_or(f64::INFINITY);
            ensure(sampled <= bound + 1e-9, || format!("M_A={m} p={p}: hill climb reached {sampled} > {bound}"))?;
            let cb = classical_bound(m, p).map_err(e)?;
            ensure((cb.value - bound).abs() <= 1e-12, || "classical_bound mismatch".into())?;
        }
    }
    let fam = star(1)?;
    let r = classical_max(&fam, 2.0, Mode::Deterministic, MixtureOptions::default()).map_err(e)?;
    ensure(r.value == 1.0, || format!("p=2 deterministic max {}", r.value))?;
    Ok("mixture optimum 2^{M_A(1−p)} for p ∈ {1/2, 3/4}, 10³ restarts never above; p=2 vertex max 1.0".into())
}

fn criterion_3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    for m in 1..=3 {
        let fam = star(m)?;
        for p in [0.5, 1.0, 2.0] {
            for _ in 0..20 {
                let angles: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..1.56)).collect();
                let s = quantum_sum_family(&fam.with_angles(&angles).map_err(e)?, p).map_err(e)?;
                let oracle: f64 = angles.iter().map(|t| t.cos().powf(p) + t.sin().powf(p)).product();
                ensure((s.sum - oracle).abs() <= 1e-9, || format!("M_A={m} p={p} {angles:?}: {} vs {oracle}", s.sum))?;
            }
            let grid = 101;
            let step = angle_grid(grid)[0];
            let r = sweep_family(&fam, p, grid).map_err(e)?;
            let bound = 2f64.powf(m as f64 * (1.0 - p / 2.0));
            ensure((r.max - bound).abs() <= 1e-3, || format!("M_A={m} p={p}: sweep max {} vs {bound}", r.max))?;
            ensure(r.argmax.iter().all(|t| (t - FRAC_PI_4).abs() <= step + 1e-12), || {
                format!("M_A={m} p={p}: argmax {:?}", r.argmax)
            })?;
        }
    }
    Ok("Σ⟨B_l⟩^p = ∏(cos^p θ + sin^p θ) on 20 tuples; grid-101 max 2^{M_A(1−p/2)} at π/4".into())
}

fn bell_dense(n: usize) -> Result<DenseState, String> {
    let mut acc: Option<DenseState> = None;
    for i in 1..=n as u32 {
        let b = DenseState::bell(Roster::for_source(i, 2)).map_err(e)?;
        acc = Some(match acc {
            None => b,
            Some(a) => a.tensor(&b, DEFAULT_DENSE_CAP).map_err(e)?,
        });
    }
    acc.ok_or_else(|| "empty".into())
}

fn test_networks() -> Result<Vec<(String, OperatorFamily, DenseState)>, String> {
    let mut out = Vec::new();
    for (name, spec) in [
        ("two Bell pairs", quantum_star(2)),
        ("three Bell pairs", quantum_star(3)),
        ("Bell + GHZ_3", ghz_star(2)),
    ] {
        let fam = build_segmented_operators(&spec).map_err(e)?;
        let dense = dense_state_for_spec(&spec, DEFAULT_DENSE_CAP).map_err(e)?;
        out.push((name.to_string(), fam, dense));
    }
    for l in even_parity_strings(1) {
        out.push((format!("virtual qubit l={l}"), virtual_qubit_pair(1, &l).map_err(e)?, bell_dense(3)?));
    }
    Ok(out)
}

fn criterion_4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut checked = 0;
    for (name, fam, dense) in test_networks()? {
        let mut angle_sets = vec![vec![FRAC_PI_4; fam.m_a()]];
        angle_sets.push((0..fam.m_a()).map(|_| rng.random_range(0.05..1.5)).collect());
        for angles in angle_sets {
            let fam = fam.with_angles(&angles).map_err(e)?;
            for op in &fam.operators {
                let s = quantum_value(op, &fam.state).map_err(e)?;
                let d = dense_expectation(op, &dense).map_err(e)?;
                ensure((s - d).abs() < 1e-9, || format!("{name} l={}: stabilizer {s} vs dense {d}", op.index))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (l, network, θ) pairs agree within 1e-9"))
}

fn criterion_5() -> Outcome {
    for (name, fam, dense) in test_networks()? {
        let w = sos_residual(&fam, &dense, 1.0).map_err(e)?;
        let worst = w.residuals.iter().cloned().fold(0.0, f64::max);
        ensure(worst < 1e-9, || format!("{name}: residual {worst}"))?;
        let zeros = DenseState::basis(fam.roster().clone(), 0, DEFAULT_DENSE_CAP).map_err(e)?;
        let control = sos_residual(&fam, &zeros, 1.0).map_err(e)?;
        let best = control.residuals.iter().cloned().fold(0.0, f64::max);
        ensure(best >= 0.5, || format!("{name}: |0…0⟩ control residual only {best}"))?;
    }
    Ok("‖M_l|Ψ⟩‖ < 1e-9 on tailored states, ≥ 0.5 on |0…0⟩".into())
}

fn criterion_6() -> Outcome {
    let pr = pr_box();
    ensure(validate_box(&pr).is_empty(), || "PR box fails validation".into())?;
    // Oracle: E(x, y) = (−1)^{xy} straight from the definition.
    let corr = |x: i64, y: i64| if x * y == 1 { -1 } else { 1 };
    for m in 1..=3 {
        let oracle_l: i64 = (0..1 << m)
            .map(|l: i64| {
                (0..m)
                    .map(|i| {
                        let y = (l >> (m - 1 - i)) & 1;
                        let s = if y == 1 { -1 } else { 1 };
                        (corr(0, y) + s * corr(1, y)) / 2
                    })
                    .product::<i64>()
                    .abs()
            })
            .sum();
        for p in [0.5, 1.0] {
            let v = ns_value(&hybrid_star(0, 0, m), p).map_err(e)?;
            let want = Rational64::from_integer(1 << m);
            ensure(v.exact_sum == Some(want), || format!("M_A={m} p={p}: {:?}", v.exact_sum))?;
            ensure(oracle_l == 1 << m, || format!("oracle {oracle_l}"))?;
        }
    }
    Ok("PR witness gives Σ = 2^{M_A} exactly for M_A = 1, 2, 3; boxes no-signaling".into())
}

fn criterion_7() -> Outcome {
    let mut count = 0;
    for m in 2..=3 {
        for p in [0.5, 1.0] {
            for split in HybridSplit::all(m) {
                let report = closed_form_bounds(split, p).map_err(e)?;
                let (c, q, n) = optimal_witnesses(split);
                let f = factorized_value(&c, &q, &n, p).map_err(e)?;
                ensure((f - report.b_max).abs() <= 1e-9, || format!("{split} p={p}: {f} vs {}", report.b_max))?;
                let lower = HybridSplit::new(split.u, m - split.u, 0).map_err(e)?.b_max(p);
                let upper = HybridSplit::new(split.u, 0, m - split.u).map_err(e)?.b_max(p);
                ensure(lower <= report.b_max + 1e-12 && report.b_max <= upper + 1e-12, || {
                    format!("{split} p={p}: ordering {lower} ≤ {} ≤ {upper} fails", report.b_max)
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} (split, p) cases: factorized witnesses reproduce B_max; ordering holds"))
}

fn criterion_8() -> Outcome {
    let s = |u, v, w| HybridSplit::new(u, v, w).map_err(e);
    ensure(
        reproducibility(s(0, 2, 0)?, s(1, 0, 1)?).map_err(e)? == Reproducibility::Equal,
        || "⟨0,2,0⟩ vs ⟨1,0,1⟩ not equal".into(),
    )?;
    for (n, want) in [(2, 2), (3, 2)] {
        let value = quantum_sum_family(&star(n)?, 1.0).map_err(e)?.sum;
        let d = t_nonlocality_degree(value, n, 1.0).map_err(e)?;
        ensure(d.degree == Some(want), || format!("n={n}: degree {:?}", d.degree))?;
    }
    for m in 1..=6 {
        for u2 in 0..=m {
            let verdict = reproducibility(s(0, m, 0)?, s(u2, 0, m - u2)?).map_err(e)?;
            let dominates = verdict == Reproducibility::FirstDominates;
            // Oracle: compare the two closed forms directly at several p.
            for p in [0.25, 0.5, 1.0] {
                let q = 2f64.powf(m as f64 - p * m as f64 / 2.0);
                let h = 2f64.powf(m as f64 - p * u2 as f64);
                ensure((q > h * (1.0 + 1e-12)) == dominates, || format!("M_A={m} u′={u2} p={p}"))?;
            }
            ensure(dominates == (2 * u2 > m), || format!("M_A={m} u′={u2}: {verdict:?}"))?;
        }
    }
    Ok("⟨0,2,0⟩ ≡ ⟨1,0,1⟩; degrees 2 for n = 2, 3; dominance iff u′ > M_A/2 (M_A ≤ 6)".into())
}

fn criterion_9() -> Outcome {
    let block = build_ghz_mermin_block(&ghz_star(1), 1).map_err(e)?;
    let r = classical_max(&block, 1.0, Mode::Deterministic, MixtureOptions::default()).map_err(e)?;
    ensure(r.linear_exact == Some(1), || format!("LHV max {:?}", r.linear_exact))?;
    // Oracle: outputs a, c of the two A observers, b per XOR setting.
    let mut best = i64::MIN;
    for bits in 0..64u32 {
        let pm = |k: u32| if (bits >> k) & 1 == 1 { -1i64 } else { 1 };
        let (a0, a1, c0, c1, b0, b1) = (pm(0), pm(1), pm(2), pm(3), pm(4), pm(5));
        let mut total = 0;
        for (l1, l2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let sign = if l1 * l2 == 1 { -1 } else { 1 };
            let fa = a0 + if l1 == 1 { -a1 } else { a1 };
            let fc = c0 + if l2 == 1 { -c1 } else { c1 };
            let b = if l1 ^ l2 == 1 { b1 } else { b0 };
            total += sign * fa * fc * b / 4;
        }
        best = best.max(total);
    }
    ensure(best == 1, || format!("oracle LHV max {best}"))?;
    let q = quantum_sum_family(&block, 1.0).map_err(e)?;
    ensure((q.sum - 2.0).abs() <= 1e-9, || format!("quantum value {}", q.sum))?;
    ensure((q.sum - 2f64.powf(2.0 * (1.0 - 0.5))).abs() <= 1e-9, || "bound mismatch".into())?;
    Ok("LHV max 1 exactly, quantum 2.0 at π/4".into())
}

fn criterion_10() -> Outcome {
    let strings = even_parity_strings(1);
    ensure(strings.len() == 4, || format!("{} even-parity strings", strings.len()))?;
    for l in &strings {
        let fam = virtual_qubit_pair(1, l).map_err(e)?;
        let f = &fam.operators[0].a_factors[0];
        let id = PauliString::identity(fam.roster().clone());
        ensure(!f.v0.commutes(&f.v1).map_err(e)?, || format!("l={l}: pair commutes"))?;
        ensure(f.v0.mul(&f.v0).map_err(e)? == id && f.v1.mul(&f.v1).map_err(e)? == id, || {
            format!("l={l}: square is not the identity")
        })?;
        for p in [1.0, 2.0] {
            let q = quantum_sum_family(&fam, p).map_err(e)?.sum;
            let want = 2f64.powf(1.0 - p / 2.0);
            ensure((q - want).abs() <= 1e-9, || format!("l={l} p={p}: quantum {q} vs {want}"))?;
        }
        let opts = MixtureOptions {
            seed: SEED,
            ..Default::default()
        };
        for p in [0.5, 1.0] {
            let r = classical_max(&fam, p, Mode::Mixture, opts).map_err(e)?;
            let want = 2f64.powf(1.0 - p);
            ensure((r.value - want).abs() <= 1e-9, || format!("l={l} p={p}: LHV {} vs {want}", r.value))?;
            if let Some(s) = r.sampled_best {
                ensure(s <= want + 1e-9, || format!("l={l} p={p}: sampled {s}"))?;
            }
        }
        let _ = virtual_qubit_family(1, l, 0.3).map_err(e)?;
    }
    Ok("4 even-parity pairs anticommute and square to I; quantum 2^{1−p/2}, LHV 2^{1−p}".into())
}

fn criterion_11() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let len = 8;
    for alpha in 1..=3u32 {
        for _ in 0..10_000 {
            let arrays: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..len).map(|_| rng.random::<f64>() * 10.0).collect())
                .collect();
            let refs: Vec<&[f64]> = arrays.iter().map(Vec::as_slice).collect();
            let r = holder_check(&refs, alpha).map_err(e)?;
            ensure(r.lhs <= r.rhs + 1e-12, || format!("α={alpha}: {} > {}", r.lhs, r.rhs))?;
        }
    }
    for _ in 0..100 {
        let consts: Vec<Vec<f64>> = (0..3).map(|_| vec![rng.random::<f64>(); len]).collect();
        let refs: Vec<&[f64]> = consts.iter().map(Vec::as_slice).collect();
        let r = holder_check(&refs, 3).map_err(e)?;
        ensure((r.lhs - r.rhs).abs() <= 1e-12, || format!("constant arrays: {} vs {}", r.lhs, r.rhs))?;
    }
    Ok("3·10⁴ random triples satisfy lhs ≤ rhs; constant arrays give equality".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("linear classical bound", criterion_1),
        ("nonlinear classical bound", criterion_2),
        ("quantum value and bound", criterion_3),
        ("stabilizer-dense equivalence", criterion_4),
        ("sum-of-squares residuals", criterion_5),
        ("no-signaling maximum", criterion_6),
        ("hybrid formula and ordering", criterion_7),
        ("classification", criterion_8),
        ("Mermin block", criterion_9),
        ("virtual qubit", criterion_10),
        ("Hölder inequality", criterion_11),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({ms} ms)", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({ms} ms)", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
