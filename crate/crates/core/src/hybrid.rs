//! Star networks mixing classical, quantum and no-signaling sources.

use serde::Serialize;

use crate::classical::{classical_bound, BoundValidity};
use crate::error::{Error, Result};
use crate::netspec::{NetworkSpec, SourceKind};
use crate::nosignal::ns_value;
use crate::operators::build_segmented_operators;
use crate::quantum::{quantum_bound, quantum_value};

/// Relative tolerance used when comparing against closed-form bounds.
pub const BOUND_TOLERANCE: f64 = 1e-12;

/// `⟨u, v, w⟩`: classical, quantum and no-signaling source counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct HybridSplit {
    pub u: usize,
    pub v: usize,
    pub w: usize,
}

impl HybridSplit {
    pub fn new(u: usize, v: usize, w: usize) -> Result<HybridSplit> {
        if u + v + w == 0 {
            return Err(Error::InvalidArgument("split ⟨0,0,0⟩ has no sources".into()));
        }
        Ok(HybridSplit { u, v, w })
    }

    pub fn m_a(&self) -> usize {
        self.u + self.v + self.w
    }

    /// `u + v/2`, doubled to stay integral.
    pub fn locality_twice(&self) -> usize {
        2 * self.u + self.v
    }

    /// `2^{M_A − p(u + v/2)}`.
    pub fn b_max(&self, p: f64) -> f64 {
        2f64.powf(self.m_a() as f64 - p * (self.u as f64 + self.v as f64 / 2.0))
    }

    /// Every split with `u + v + w = m_a`.
    pub fn all(m_a: usize) -> Vec<HybridSplit> {
        let mut out = Vec::new();
        for u in 0..=m_a {
            for v in 0..=m_a - u {
                out.push(HybridSplit { u, v, w: m_a - u - v });
            }
        }
        out
    }

    pub fn of_spec(spec: &NetworkSpec) -> Result<HybridSplit> {
        let (u, v, w) = spec.split_counts();
        HybridSplit::new(u, v, w)
    }
}

impl std::str::FromStr for HybridSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<HybridSplit> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Syntax(format!("split {s:?} is not of the form u,v,w"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let n: Vec<usize> = parts
            .iter()
            .map(|p| p.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        HybridSplit::new(n[0], n[1], n[2])
    }
}

impl std::fmt::Display for HybridSplit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "⟨{},{},{}⟩", self.u, self.v, self.w)
    }
}

fn check_factor_len(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() || !xs.len().is_power_of_two() {
        return Err(Error::LengthMismatch(format!(
            "{name} has {} entries, expected a power of two",
            xs.len()
        )));
    }
    Ok(())
}

/// `Σ_{l_C, l_Q, l_NS} |ξ_C[l_C] ξ_Q[l_Q] ξ_NS[l_NS]|^p`; each list is indexed
/// by its own sub-string, so an absent kind is passed as `[1.0]`.
pub fn factorized_value(xi_c: &[f64], xi_q: &[f64], xi_ns: &[f64], p: f64) -> Result<f64> {
    check_factor_len("ξ_C", xi_c)?;
    check_factor_len("ξ_Q", xi_q)?;
    check_factor_len("ξ_NS", xi_ns)?;
    let mut total = 0.0;
    for c in xi_c {
        for q in xi_q {
            for n in xi_ns {
                total += crate::abs_pow(c * q * n, p);
            }
        }
    }
    Ok(total)
}

/// Optimal per-kind witnesses: `2^{−u}`, `2^{−v/2}` and `1` on every sub-string.
pub fn optimal_witnesses(split: HybridSplit) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (
        vec![2f64.powf(-(split.u as f64)); 1 << split.u],
        vec![2f64.powf(-(split.v as f64) / 2.0); 1 << split.v],
        vec![1.0; 1 << split.w],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub split: HybridSplit,
    pub m_a: usize,
    pub p: f64,
    pub b_c: f64,
    pub b_c_validity: BoundValidity,
    pub b_q: f64,
    pub b_ns: f64,
    pub b_max: f64,
    /// `B_max` equals the pure bound whenever the split has only one kind.
    pub degeneracies_hold: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonlocality: Option<TDegree>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= BOUND_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

pub fn closed_form_bounds(split: HybridSplit, p: f64) -> Result<BoundsReport> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p = {p} must be positive")));
    }
    let m_a = split.m_a();
    let c = classical_bound(m_a, p)?;
    let b_q = quantum_bound(m_a, p);
    let b_ns = 2f64.powi(m_a as i32);
    let b_max = split.b_max(p);
    let degeneracies_hold = (split.u != m_a || close(b_max, c.value))
        && (split.v != m_a || close(b_max, b_q))
        && (split.w != m_a || close(b_max, b_ns));
    Ok(BoundsReport {
        split,
        m_a,
        p,
        b_c: c.value,
        b_c_validity: c.validity,
        b_q,
        b_ns,
        b_max,
        degeneracies_hold,
        achieved: None,
        nonlocality: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderResult {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `Σ_l (∏_X z_X[l])^{1/α} ≤ ∏_X (Σ_l z_X[l])^{1/α}` for nonnegative arrays
/// of equal length. With `α` equal to the number of arrays this is Hölder's
/// inequality, with equality for constant arrays.
pub fn holder_check(factors: &[&[f64]], alpha: u32) -> Result<HolderResult> {
    if alpha == 0 {
        return Err(Error::InvalidArgument("α must be positive".into()));
    }
    let n = factors
        .first()
        .map(|f| f.len())
        .ok_or_else(|| Error::InvalidArgument("no arrays".into()))?;
    for f in factors {
        if f.len() != n {
            return Err(Error::LengthMismatch(format!("array lengths {} and {n}", f.len())));
        }
        if let Some(x) = f.iter().find(|x| **x < 0.0 || x.is_nan()) {
            return Err(Error::InvalidArgument(format!("negative entry {x}")));
        }
    }
    let inv = 1.0 / alpha as f64;
    let lhs = (0..n)
        .map(|l| factors.iter().map(|f| f[l]).product::<f64>().powf(inv))
        .sum::<f64>();
    let rhs = factors.iter().map(|f| f.iter().sum::<f64>().powf(inv)).product::<f64>();
    Ok(HolderResult {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// The exponent matched to the number of present kinds: 3 if all of
/// `u, v, w` are nonzero, 2 if exactly one is zero, 1 otherwise.
pub fn holder_alpha(split: HybridSplit) -> u32 {
    [split.u, split.v, split.w].iter().filter(|&&k| k > 0).count().max(1) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reproducibility {
    /// The first split reaches a strictly larger `B_max` for every `p > 0`.
    FirstDominates,
    SecondDominates,
    Equal,
}

/// Compares `u + v/2` of two splits with the same `M_A`; the smaller wins.
pub fn reproducibility(first: HybridSplit, second: HybridSplit) -> Result<Reproducibility> {
    if first.m_a() != second.m_a() {
        return Err(Error::InvalidArgument(format!(
            "splits {first} and {second} have different M_A"
        )));
    }
    Ok(match first.locality_twice().cmp(&second.locality_twice()) {
        std::cmp::Ordering::Less => Reproducibility::FirstDominates,
        std::cmp::Ordering::Greater => Reproducibility::SecondDominates,
        std::cmp::Ordering::Equal => Reproducibility::Equal,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TDegree {
    /// Smallest `t` with `value > 2^{n − p t}`.
    pub degree: Option<usize>,
    /// No `t ≤ n` is exceeded: the all-classical model reproduces the value.
    pub classically_modelable: bool,
}

/// `value > B_max^{⟨t, 0, n−t⟩}` with a relative tolerance on ties.
pub fn is_t_nonlocal(value: f64, n: usize, p: f64, t: usize) -> Result<bool> {
    if t > n {
        return Err(Error::InvalidArgument(format!("t = {t} exceeds n = {n}")));
    }
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidArgument(format!("p = {p} must be positive")));
    }
    let bound = 2f64.powf(n as f64 - p * t as f64);
    Ok(value > bound && !close(value, bound))
}

pub fn t_nonlocality_degree(value: f64, n: usize, p: f64) -> Result<TDegree> {
    if n == 0 {
        return Err(Error::InvalidArgument("t range is empty for n = 0".into()));
    }
    for t in 1..=n {
        if is_t_nonlocal(value, n, p, t)? {
            return Ok(TDegree {
                degree: Some(t),
                classically_modelable: false,
            });
        }
    }
    Ok(TDegree {
        degree: None,
        classically_modelable: true,
    })
}

/// Per-kind factor lists of a star-shaped hybrid network: the uniform
/// classical witness, the quantum values of the quantum sub-network and the
/// no-signaling values of the box sub-network.
pub fn network_factors(spec: &NetworkSpec) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let diags = spec.validate();
    if !diags.is_empty() {
        return Err(Error::InvalidNetwork(diags.into_iter().map(|d| d.to_string()).collect()));
    }
    let split = HybridSplit::of_spec(spec)?;
    let a_count = |kind| spec.restrict_to_kind(kind).m_a();
    let u_a = a_count(SourceKind::Classical);
    let xi_c = vec![2f64.powf(-(u_a as f64)); 1 << u_a];
    let xi_q = if split.v > 0 {
        let fam = build_segmented_operators(&spec.restrict_to_kind(SourceKind::Quantum))?;
        fam.operators
            .iter()
            .map(|op| quantum_value(op, &fam.state))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![1.0]
    };
    let xi_ns = if split.w > 0 {
        ns_value(&spec.restrict_to_kind(SourceKind::NoSignaling), 1.0)?
            .per_l
            .into_iter()
            .map(|(_, v)| v)
            .collect()
    } else {
        vec![1.0]
    };
    Ok((xi_c, xi_q, xi_ns))
}

/// Closed-form bounds plus the value reached by the network's own witnesses
/// and its t-nonlocality degree.
pub fn classify(spec: &NetworkSpec, p: f64) -> Result<BoundsReport> {
    let split = HybridSplit::of_spec(spec)?;
    let mut report = closed_form_bounds(split, p)?;
    let (c, q, n) = network_factors(spec)?;
    let achieved = factorized_value(&c, &q, &n, p)?;
    report.nonlocality = Some(t_nonlocality_degree(achieved, spec.sources.len(), p)?);
    report.achieved = Some(achieved);
    Ok(report)
}

/// `classify` for a star split at `θ = π/4`, without a network file.
pub fn classify_split(split: HybridSplit, p: f64) -> Result<BoundsReport> {
    classify(&crate::netspec::hybrid_star(split.u, split.v, split.w), p)
}
