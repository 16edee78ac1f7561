//! Local hidden variable oracle over deterministic strategies.
//!
//! A strategy fixes `a_0, a_1 ∈ {±1}` for every type-A observer and an output
//! `b ∈ {±1}` for every setting of every type-B observer. The hidden variable
//! is shared by all parties, so one global table covers every model.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::operators::OperatorFamily;

pub const MAX_M_A: usize = 5;
pub const MAX_B_SETTINGS: usize = 32;
/// Above this many strategies the search works per type-A assignment.
pub const FULL_ENUMERATION_LIMIT: u128 = 1 << 22;
pub const DEFAULT_RESTARTS: usize = 1000;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeterministicStrategy {
    /// `(a_0, a_1)` per type-A observer.
    pub a: Vec<(i8, i8)>,
    /// `b[j][s]` for setting `s` of type-B observer `j`.
    pub b: Vec<Vec<i8>>,
}

#[derive(Debug, Clone)]
struct CompiledOp {
    bits: Vec<bool>,
    sign: i8,
    /// `(observer, setting)` pairs.
    settings: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
struct Compiled {
    m_a: usize,
    b_counts: Vec<usize>,
    ops: Vec<CompiledOp>,
}

impl Compiled {
    fn new(family: &OperatorFamily) -> Result<Compiled> {
        let ops = family
            .operators
            .iter()
            .map(|op| {
                let settings = op
                    .b_settings
                    .iter()
                    .map(|b| {
                        let j = family
                            .b_observers
                            .iter()
                            .position(|o| o.id == b.observer)
                            .ok_or_else(|| Error::InvalidArgument(format!("unknown observer {}", b.observer)))?;
                        let s = family.b_observers[j]
                            .setting_index(&b.label)
                            .ok_or_else(|| Error::InvalidArgument(format!("unknown setting {}", b.label)))?;
                        Ok((j, s))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(CompiledOp {
                    bits: op.index.bits().to_vec(),
                    sign: op.sign,
                    settings,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Compiled {
            m_a: family.m_a(),
            b_counts: family.b_observers.iter().map(|b| b.settings.len()).collect(),
            ops,
        })
    }

    fn settings_total(&self) -> usize {
        self.b_counts.iter().sum()
    }

    fn count(&self) -> u128 {
        1u128 << (2 * self.m_a + self.settings_total())
    }

    /// Most significant bits first: `a_0, a_1` of each A observer, then the
    /// B outputs in observer/setting order. Bit 0 means `+1`.
    fn decode(&self, idx: u128) -> DeterministicStrategy {
        let total = 2 * self.m_a + self.settings_total();
        let bit = |k: usize| -> i8 {
            if (idx >> (total - 1 - k)) & 1 == 1 {
                -1
            } else {
                1
            }
        };
        let a = (0..self.m_a).map(|i| (bit(2 * i), bit(2 * i + 1))).collect();
        let mut k = 2 * self.m_a;
        let b = self
            .b_counts
            .iter()
            .map(|&n| {
                let v = (0..n).map(|s| bit(k + s)).collect();
                k += n;
                v
            })
            .collect();
        DeterministicStrategy { a, b }
    }

    fn encode(&self, s: &DeterministicStrategy) -> u128 {
        let mut idx = 0u128;
        let mut push = |v: i8| idx = (idx << 1) | (v < 0) as u128;
        for &(a0, a1) in &s.a {
            push(a0);
            push(a1);
        }
        for row in &s.b {
            for &v in row {
                push(v);
            }
        }
        idx
    }

    /// Exact `⟨B_l⟩ ∈ {−1, 0, 1}` per `l`.
    fn correlators(&self, s: &DeterministicStrategy) -> Vec<i64> {
        self.ops
            .iter()
            .map(|op| {
                let mut num = op.sign as i64;
                for (&(a0, a1), &bit) in s.a.iter().zip(&op.bits) {
                    let sgn = if bit { -1 } else { 1 };
                    num *= a0 as i64 + sgn * a1 as i64;
                }
                for &(j, k) in &op.settings {
                    num *= s.b[j][k] as i64;
                }
                num >> self.m_a
            })
            .collect()
    }

    fn check_guard(&self) -> Result<()> {
        if self.m_a > MAX_M_A {
            return Err(Error::ResourceGuard {
                what: "type-A observers for enumeration",
                requested: self.m_a as u128,
                limit: MAX_M_A as u128,
            });
        }
        if self.settings_total() > MAX_B_SETTINGS {
            return Err(Error::ResourceGuard {
                what: "type-B settings for enumeration",
                requested: self.settings_total() as u128,
                limit: MAX_B_SETTINGS as u128,
            });
        }
        Ok(())
    }
}

/// Number of deterministic strategies, `4^{M_A} · 2^{#settings}`.
pub fn strategy_count(family: &OperatorFamily) -> Result<u128> {
    let c = Compiled::new(family)?;
    c.check_guard()?;
    Ok(c.count())
}

/// Every deterministic strategy exactly once, in lexicographic order.
pub fn enumerate_strategies(family: &OperatorFamily) -> Result<impl Iterator<Item = DeterministicStrategy>> {
    let c = Compiled::new(family)?;
    c.check_guard()?;
    let n = c.count();
    Ok((0..n).map(move |i| c.decode(i)))
}

pub fn strategy_index(family: &OperatorFamily, s: &DeterministicStrategy) -> Result<u128> {
    Ok(Compiled::new(family)?.encode(s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureValue {
    pub p_l: Vec<f64>,
    pub correlators: Vec<f64>,
    pub objective: f64,
}

/// Exact per-`l` correlators of one strategy.
pub fn strategy_correlators(family: &OperatorFamily, s: &DeterministicStrategy) -> Result<Vec<i64>> {
    Ok(Compiled::new(family)?.correlators(s))
}

/// The string fired by a strategy: `l_i = 1` iff `a_0 ≠ a_1`.
pub fn firing_string(s: &DeterministicStrategy) -> BitString {
    BitString::new(s.a.iter().map(|(a0, a1)| a0 != a1).collect())
}

pub fn strategy_value(family: &OperatorFamily, s: &DeterministicStrategy, p: f64) -> Result<MixtureValue> {
    let c = Compiled::new(family)?;
    let corr = c.correlators(s);
    let p_l = c
        .ops
        .iter()
        .map(|op| {
            s.a.iter()
                .zip(&op.bits)
                .map(|(&(a0, a1), &bit)| {
                    let sgn = if bit { -1 } else { 1 };
                    (a0 as i64 + sgn * a1 as i64).abs() as f64 / 2.0
                })
                .product()
        })
        .collect();
    Ok(MixtureValue {
        p_l,
        objective: corr.iter().map(|&v| crate::abs_pow(v as f64, p)).sum(),
        correlators: corr.into_iter().map(|v| v as f64).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Deterministic,
    Mixture,
}

/// A point of the deterministic correlation polytope: `⟨B_l⟩ = sign` on one `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Vertex {
    pub l: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    Strategy {
        index: u128,
        strategy: DeterministicStrategy,
        firing: BitString,
    },
    Mixture {
        weights: Vec<(Vertex, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalResult {
    pub value: f64,
    /// Exact signed sum `Σ_l ⟨B_l⟩` for `p = 1`.
    pub linear_exact: Option<i64>,
    pub mode_used: Mode,
    pub witness: Witness,
    pub strategies: u128,
    pub full_enumeration: bool,
    /// Best hill-climbing mixture, mixture mode only.
    pub sampled_best: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy)]
pub struct MixtureOptions {
    pub restarts: usize,
    pub steps: usize,
    pub seed: u64,
}

impl Default for MixtureOptions {
    fn default() -> Self {
        MixtureOptions {
            restarts: DEFAULT_RESTARTS,
            steps: 400,
            seed: DEFAULT_SEED,
        }
    }
}

fn objective_of(corr: &[i64], p: f64) -> f64 {
    if p == 1.0 {
        corr.iter().sum::<i64>() as f64
    } else {
        corr.iter().map(|&v| crate::abs_pow(v as f64, p)).sum()
    }
}

/// Best deterministic strategy; lowest index wins ties.
fn deterministic_max(c: &Compiled, p: f64, limit: u128) -> (f64, Option<i64>, u128, bool) {
    let count = c.count();
    if count <= limit {
        let (value, neg_idx) = (0..count as u64)
            .into_par_iter()
            .map(|i| {
                let corr = c.correlators(&c.decode(i as u128));
                (objective_of(&corr, p), std::cmp::Reverse(i))
            })
            .reduce(
                || (f64::NEG_INFINITY, std::cmp::Reverse(u64::MAX)),
                |a, b| match a.0.total_cmp(&b.0) {
                    std::cmp::Ordering::Less => b,
                    std::cmp::Ordering::Greater => a,
                    std::cmp::Ordering::Equal => {
                        if a.1 >= b.1 {
                            a
                        } else {
                            b
                        }
                    }
                },
            );
        let idx = neg_idx.0 as u128;
        let linear = (p == 1.0).then(|| c.correlators(&c.decode(idx)).iter().sum());
        (value, linear, idx, true)
    } else {
        // Only the fired operator is nonzero, so the B outputs can be fixed
        // per type-A assignment.
        let total_b = c.settings_total();
        let mut best: Option<(f64, u128)> = None;
        for a_idx in 0..1u128 << (2 * c.m_a) {
            let mut s = c.decode(a_idx << total_b);
            let fired = c
                .ops
                .iter()
                .position(|op| s.a.iter().zip(&op.bits).all(|(&(a0, a1), &bit)| (a0 != a1) == bit))
                .expect("every strategy fires one string");
            if c.correlators(&s)[fired] < 0 {
                if let Some(&(j, k)) = c.ops[fired].settings.iter().max_by_key(|&&(j, k)| {
                    c.b_counts[..j].iter().sum::<usize>() + k
                }) {
                    s.b[j][k] = -1;
                }
            }
            let idx = c.encode(&s);
            let v = objective_of(&c.correlators(&s), p);
            if best.is_none_or(|(bv, bi)| v > bv || (v == bv && idx < bi)) {
                best = Some((v, idx));
            }
        }
        let (v, idx) = best.expect("at least one assignment");
        let linear = (p == 1.0).then(|| c.correlators(&c.decode(idx)).iter().sum());
        (v, linear, idx, false)
    }
}

/// Distinct deterministic correlation vectors `±e_l`.
pub fn vertex_vectors(family: &OperatorFamily) -> Result<Vec<Vertex>> {
    let c = Compiled::new(family)?;
    c.check_guard()?;
    let mut out = std::collections::BTreeSet::new();
    for a_idx in 0..1u128 << (2 * c.m_a) {
        let s = c.decode(a_idx << c.settings_total());
        for (l, v) in c.correlators(&s).into_iter().enumerate() {
            if v != 0 {
                out.insert(Vertex { l, sign: v as i8 });
                if !c.ops[l].settings.is_empty() {
                    out.insert(Vertex { l, sign: -v as i8 });
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Objective of a mixture of vertices.
pub fn mixture_value(vertices: &[Vertex], weights: &[f64], num_l: usize, p: f64) -> MixtureValue {
    let mut p_l = vec![0.0; num_l];
    let mut corr = vec![0.0; num_l];
    for (v, &w) in vertices.iter().zip(weights) {
        p_l[v.l] += w;
        corr[v.l] += w * v.sign as f64;
    }
    MixtureValue {
        objective: corr.iter().map(|&c| crate::abs_pow(c, p)).sum(),
        p_l,
        correlators: corr,
    }
}

/// Random point of the probability simplex (flat Dirichlet).
pub fn random_simplex_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

/// Random-restart hill climbing over mixture weights; returns the best
/// objective and weights found.
pub fn hill_climb(vertices: &[Vertex], num_l: usize, p: f64, opts: MixtureOptions) -> (f64, Vec<f64>) {
    let n = vertices.len();
    let mut rng = StdRng::seed_from_u64(opts.seed);
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    if n == 0 {
        return best;
    }
    for _ in 0..opts.restarts {
        let mut w = random_simplex_point(&mut rng, n);
        let mut cur = mixture_value(vertices, &w, num_l, p).objective;
        for _ in 0..opts.steps {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i == j || w[i] == 0.0 {
                continue;
            }
            let moved = w[i] * rng.random::<f64>();
            w[i] -= moved;
            w[j] += moved;
            let v = mixture_value(vertices, &w, num_l, p).objective;
            if v > cur {
                cur = v;
            } else {
                w[i] += moved;
                w[j] -= moved;
            }
        }
        if cur > best.0 {
            best = (cur, w);
        }
    }
    best
}

/// Classical maximum of `Σ_l |⟨B_l⟩|^p` (signed sum for `p = 1`).
///
/// Mixture mode applies to `p < 1`: it returns the uniform-over-`l` witness
/// with `P_l = 2^{−M_A}` and reports the best hill-climbed mixture alongside.
/// For `p ≥ 1` a vertex is optimal and the deterministic search is used.
pub fn classical_max(family: &OperatorFamily, p: f64, mode: Mode, opts: MixtureOptions) -> Result<ClassicalResult> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p = {p} must be positive")));
    }
    let c = Compiled::new(family)?;
    c.check_guard()?;
    let count = c.count();
    if mode == Mode::Mixture && p < 1.0 {
        let vertices = vertex_vectors(family)?;
        let num_l = c.ops.len();
        let mut weights = vec![0.0; vertices.len()];
        let mut covered = vec![false; num_l];
        for (k, v) in vertices.iter().enumerate() {
            if v.sign > 0 && !covered[v.l] {
                covered[v.l] = true;
                weights[k] = 1.0 / num_l as f64;
            }
        }
        let uniform = mixture_value(&vertices, &weights, num_l, p);
        let (sampled, sampled_w) = hill_climb(&vertices, num_l, p, opts);
        let (value, weights) = if sampled > uniform.objective {
            (sampled, sampled_w)
        } else {
            (uniform.objective, weights)
        };
        return Ok(ClassicalResult {
            value,
            linear_exact: None,
            mode_used: Mode::Mixture,
            witness: Witness::Mixture {
                weights: vertices.into_iter().zip(weights).filter(|(_, w)| *w > 0.0).collect(),
            },
            strategies: count,
            full_enumeration: false,
            sampled_best: Some(sampled),
            seed: Some(opts.seed),
        });
    }
    if mode == Mode::Mixture {
        log::info!("p = {p} ≥ 1: a deterministic strategy is optimal, using deterministic search");
    }
    let (value, linear, idx, full) = deterministic_max(&c, p, FULL_ENUMERATION_LIMIT);
    let strategy = c.decode(idx);
    Ok(ClassicalResult {
        value,
        linear_exact: linear,
        mode_used: Mode::Deterministic,
        witness: Witness::Strategy {
            index: idx,
            firing: firing_string(&strategy),
            strategy,
        },
        strategies: count,
        full_enumeration: full,
        sampled_best: None,
        seed: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "validity", rename_all = "kebab-case")]
pub enum BoundValidity {
    Valid,
    /// For `p > 1` the formula lies below what a single strategy reaches.
    NotABound { vertex_value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalBound {
    pub value: f64,
    #[serde(flatten)]
    pub validity: BoundValidity,
}

/// `2^{M_A(1−p)}`, valid for `p ∈ (0, 1]`.
pub fn classical_bound(m_a: usize, p: f64) -> Result<ClassicalBound> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p = {p} must be positive")));
    }
    if m_a == 0 {
        return Err(Error::InvalidArgument("M_A must be at least 1".into()));
    }
    Ok(ClassicalBound {
        value: 2f64.powf(m_a as f64 * (1.0 - p)),
        validity: if p <= 1.0 {
            BoundValidity::Valid
        } else {
            BoundValidity::NotABound { vertex_value: 1.0 }
        },
    })
}
