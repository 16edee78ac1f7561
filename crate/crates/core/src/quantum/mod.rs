//! Quantum values of segmented operators on their tailored stabilizer states.

pub mod dense;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::netspec::{NetworkSpec, Payload, SourceKind, StateSpec};
use crate::operators::{build_segmented_operators, OperatorFamily, SegmentedBellOperator};
use crate::pauli::StabilizerState;
pub use dense::{DenseState, DEFAULT_DENSE_CAP};

/// Largest grid a sweep will evaluate.
pub const MAX_SWEEP_POINTS: u128 = 50_000_000;

/// `ω_l · ⟨g_l⟩_Ψ`.
pub fn quantum_value(op: &SegmentedBellOperator, state: &StabilizerState) -> Result<f64> {
    Ok(op.weight() * state.expectation(&op.g)? as f64)
}

/// `2^{M_A(1 − p/2)}`.
pub fn quantum_bound(m_a: usize, p: f64) -> f64 {
    2f64.powf(m_a as f64 * (1.0 - p / 2.0))
}

/// `∏_i (cos^p θ_i + sin^p θ_i)`.
pub fn product_formula(angles: &[f64], p: f64) -> f64 {
    angles
        .iter()
        .map(|t| crate::abs_pow(t.cos(), p) + crate::abs_pow(t.sin(), p))
        .product()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LRow {
    pub l: BitString,
    pub weight: f64,
    pub g: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumSum {
    pub rows: Vec<LRow>,
    pub sum: f64,
    pub product_formula: f64,
    pub bound: f64,
}

/// `Σ_l |⟨B_l⟩|^p` via the stabilizer path.
pub fn quantum_sum_family(family: &OperatorFamily, p: f64) -> Result<QuantumSum> {
    let mut rows = Vec::with_capacity(family.operators.len());
    for op in &family.operators {
        rows.push(LRow {
            l: op.index.clone(),
            weight: op.weight(),
            g: op.g.labeled(),
            value: quantum_value(op, &family.state)?,
        });
    }
    let sum = rows.iter().map(|r| crate::abs_pow(r.value, p)).sum();
    Ok(QuantumSum {
        rows,
        sum,
        product_formula: product_formula(&family.angles(), p),
        bound: quantum_bound(family.m_a(), p),
    })
}

pub fn quantum_sum(spec: &NetworkSpec, p: f64) -> Result<QuantumSum> {
    quantum_sum_family(&build_segmented_operators(spec)?, p)
}

/// Dense state of a network's quantum sources; Bell and GHZ payloads are
/// written out explicitly, generator payloads are projected.
pub fn dense_state_for_spec(spec: &NetworkSpec, cap: usize) -> Result<DenseState> {
    let mut acc: Option<DenseState> = None;
    for s in spec.sources.iter().filter(|s| s.kind == SourceKind::Quantum) {
        let d = match &s.payload {
            Payload::State(StateSpec::Bell) => DenseState::bell(s.roster())?,
            Payload::State(StateSpec::Ghz(_)) => DenseState::ghz(s.roster(), cap)?,
            _ => DenseState::from_stabilizer(&s.state()?, cap)?,
        };
        acc = Some(match acc {
            None => d,
            Some(a) => a.tensor(&d, cap)?,
        });
    }
    acc.ok_or_else(|| Error::Unsupported("network has no quantum source".into()))
}

/// `∏_i (A-factor_i) |Φ⟩`, each factor scaled by `scale(i)`.
fn apply_a_side(op: &SegmentedBellOperator, state: &DenseState, scale: impl Fn(usize) -> f64) -> Result<DenseState> {
    let mut phi = state.clone();
    for (i, f) in op.a_factors.iter().enumerate() {
        let (c0, c1) = f.coefficients();
        let s = scale(i);
        phi = phi.apply_sum(&[(c0 * s, &f.v0), (c1 * s, &f.v1)])?;
    }
    Ok(phi)
}

fn apply_b_side(op: &SegmentedBellOperator, state: &DenseState) -> Result<DenseState> {
    let mut phi = state.clone();
    for b in &op.b_settings {
        phi = phi.apply(&b.pauli)?;
    }
    Ok(phi)
}

/// `⟨Φ| B_l |Φ⟩` with `B_l` assembled from `A_0`, `A_1` and the B-side Paulis.
pub fn dense_expectation(op: &SegmentedBellOperator, state: &DenseState) -> Result<f64> {
    let phi = apply_b_side(op, &apply_a_side(op, state, |_| 1.0)?)?;
    let e = state.inner(&phi) * op.sign as f64;
    if e.im.abs() >= 1e-10 {
        return Err(Error::NonRealExpectation(e.im));
    }
    Ok(e.re)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub max: f64,
    pub argmax: Vec<f64>,
    pub grid_index: Vec<usize>,
    pub points: u128,
}

/// Interior grid `θ_k = kπ / (2(G + 1))`, `k = 1..=G`.
pub fn angle_grid(grid: usize) -> Vec<f64> {
    (1..=grid).map(|k| k as f64 * FRAC_PI_2 / (grid as f64 + 1.0)).collect()
}

/// Grid search of `Σ_l |⟨B_l⟩|^p` over all type-A angles. Values within
/// `1e-12` of the maximum are tied; ties go to the point closest to
/// `(π/4, …, π/4)`, then to the lowest grid index.
pub fn sweep_family(family: &OperatorFamily, p: f64, grid: usize) -> Result<SweepResult> {
    if grid < 3 {
        return Err(Error::InvalidArgument(format!("grid size {grid} is below 3")));
    }
    let m = family.m_a();
    let points = (grid as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if points > MAX_SWEEP_POINTS {
        return Err(Error::ResourceGuard {
            what: "sweep grid points",
            requested: points,
            limit: MAX_SWEEP_POINTS,
        });
    }
    let expectations: Vec<f64> = family
        .operators
        .iter()
        .map(|op| family.state.expectation(&op.g).map(|e| crate::abs_pow(e as f64, p)))
        .collect::<Result<_>>()?;
    let thetas = angle_grid(grid);
    let cos_p: Vec<f64> = thetas.iter().map(|t| crate::abs_pow(t.cos(), p)).collect();
    let sin_p: Vec<f64> = thetas.iter().map(|t| crate::abs_pow(t.sin(), p)).collect();
    let decode = |mut idx: u128| -> Vec<usize> {
        let mut out = vec![0; m];
        for slot in out.iter_mut().rev() {
            *slot = (idx % grid as u128) as usize;
            idx /= grid as u128;
        }
        out
    };
    let value = |idx: u128| -> f64 {
        let ks = decode(idx);
        family
            .operators
            .iter()
            .zip(&expectations)
            .map(|(op, e)| {
                op.index
                    .bits()
                    .iter()
                    .zip(&ks)
                    .map(|(&b, &k)| if b { sin_p[k] } else { cos_p[k] })
                    .product::<f64>()
                    * e
            })
            .sum()
    };
    let n = points as u64;
    let max = (0..n).into_par_iter().map(|i| value(i as u128)).reduce(|| f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * max.abs().max(1.0);
    let center = (grid as f64 + 1.0) / 2.0 - 1.0;
    let (_, best) = (0..n)
        .into_par_iter()
        .filter(|&i| value(i as u128) >= max - tol)
        .map(|i| {
            let d: f64 = decode(i as u128).iter().map(|&k| (k as f64 - center).powi(2)).sum();
            (d, i)
        })
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| if (a.0, a.1) <= (b.0, b.1) { a } else { b },
        );
    let ks = decode(best as u128);
    Ok(SweepResult {
        max,
        argmax: ks.iter().map(|&k| thetas[k]).collect(),
        grid_index: ks,
        points,
    })
}

pub fn sweep_angles(spec: &NetworkSpec, p: f64, grid: usize) -> Result<SweepResult> {
    sweep_family(&build_segmented_operators(spec)?, p, grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SosWitness {
    /// `‖M_l |Φ⟩‖` per `l`.
    pub residuals: Vec<f64>,
    pub weights: Vec<f64>,
    /// `γ = Σ ω_l^p M_l† M_l` is a nonnegative combination of squares.
    pub gamma_psd: bool,
    /// `⟨Φ|γ|Φ⟩`.
    pub gamma_on_state: f64,
}

/// Residuals of `M_l = ∏_i (A_0 + (−1)^{l_i} A_1)/(2ω_l^{(i)}) − sign_l ∏_j B_j`.
pub fn sos_residual(family: &OperatorFamily, state: &DenseState, p: f64) -> Result<SosWitness> {
    let mut residuals = Vec::with_capacity(family.operators.len());
    let mut weights = Vec::with_capacity(family.operators.len());
    for op in &family.operators {
        if op.a_factors.iter().any(|f| f.weight() == 0.0) {
            return Err(Error::InvalidArgument(format!(
                "l = {} has a vanishing angle weight",
                op.index
            )));
        }
        let a = apply_a_side(op, state, |i| 1.0 / op.a_factors[i].weight())?;
        let b = apply_b_side(op, state)?.scaled(op.sign as f64);
        residuals.push(a.sub(&b).norm());
        weights.push(op.weight());
    }
    let gamma_on_state = residuals
        .iter()
        .zip(&weights)
        .map(|(r, w)| crate::abs_pow(*w, p) * r * r)
        .sum();
    Ok(SosWitness {
        gamma_psd: weights.iter().all(|w| *w >= 0.0),
        residuals,
        weights,
        gamma_on_state,
    })
}

/// Closest grid angle to `π/4`.
pub fn nearest_grid_center(grid: usize) -> f64 {
    angle_grid(grid)
        .into_iter()
        .min_by(|a, b| (a - FRAC_PI_4).abs().total_cmp(&(b - FRAC_PI_4).abs()))
        .unwrap_or(FRAC_PI_4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netspec::quantum_star;
    use crate::pauli::Roster;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_bell_values() {
        let family = build_segmented_operators(&quantum_star(2)).unwrap();
        let dense = dense_state_for_spec(&quantum_star(2), DEFAULT_DENSE_CAP).unwrap();
        for op in &family.operators {
            assert_abs_diff_eq!(quantum_value(op, &family.state).unwrap(), 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(dense_expectation(op, &dense).unwrap(), 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_state_probe() {
        let spec = quantum_star(2);
        let family = build_segmented_operators(&spec).unwrap();
        let zeros = DenseState::basis(family.roster().clone(), 0, DEFAULT_DENSE_CAP).unwrap();
        // l = 00 uses only Z, which fixes |0000⟩.
        assert_abs_diff_eq!(dense_expectation(&family.operators[0], &zeros).unwrap(), 0.5, epsilon = 1e-12);
        let stab_zeros = StabilizerState::zeros(family.roster().clone()).unwrap();
        for op in &family.operators[1..] {
            assert_eq!(quantum_value(op, &stab_zeros).unwrap(), 0.0);
        }
    }

    #[test]
    fn degenerate_angle() {
        let family = build_segmented_operators(&quantum_star(1)).unwrap().with_angles(&[0.0]).unwrap();
        let v: Vec<f64> = family
            .operators
            .iter()
            .map(|op| quantum_value(op, &family.state).unwrap())
            .collect();
        assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sums_match_closed_form() {
        let s = quantum_sum(&quantum_star(2), 1.0).unwrap();
        assert_abs_diff_eq!(s.sum, 2.0, epsilon = 1e-12);
        let s = quantum_sum(&quantum_star(1), 2.0).unwrap();
        assert_abs_diff_eq!(s.sum, 1.0, epsilon = 1e-12);
        let s = quantum_sum(&quantum_star(2), 0.5).unwrap();
        assert_abs_diff_eq!(s.sum, 2f64.powf(1.5), epsilon = 1e-12);
    }

    #[test]
    fn sweep_single_pair() {
        let r = sweep_angles(&quantum_star(1), 1.0, 101).unwrap();
        assert_abs_diff_eq!(r.max, 2f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(r.argmax[0], FRAC_PI_4, epsilon = 1e-12);
        let flat = sweep_angles(&quantum_star(1), 2.0, 101).unwrap();
        assert_abs_diff_eq!(flat.max, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(flat.argmax[0], FRAC_PI_4, epsilon = 1e-12);
        assert!(sweep_angles(&quantum_star(1), 1.0, 2).is_err());
    }

    #[test]
    fn sos_on_tailored_and_control() {
        let spec = quantum_star(2);
        let family = build_segmented_operators(&spec).unwrap();
        let dense = dense_state_for_spec(&spec, DEFAULT_DENSE_CAP).unwrap();
        let w = sos_residual(&family, &dense, 1.0).unwrap();
        assert!(w.residuals.iter().all(|r| *r < 1e-9));
        let zeros = DenseState::basis(Roster::clone(family.roster()), 0, DEFAULT_DENSE_CAP).unwrap();
        let w = sos_residual(&family, &zeros, 1.0).unwrap();
        assert!(w.residuals.iter().any(|r| *r > 0.5));
    }
}
