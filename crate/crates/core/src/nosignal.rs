//! Bipartite no-signaling boxes with binary inputs and `±1` outputs.
//!
//! Tables are indexed `[a][b][x][y]` where output index 0 stands for `+1` and
//! 1 for `−1`. The first party of a box is the particle with emission index 1.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::netspec::{NetworkSpec, Payload, SourceKind};

/// Scalar type of a behavior table.
pub trait Probability:
    Clone
    + PartialOrd
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn close_to(&self, other: &Self) -> bool;
    fn to_f64(&self) -> f64;
    fn from_ratio(n: i64, d: i64) -> Self;
}

impl Probability for Rational64 {
    fn close_to(&self, other: &Self) -> bool {
        self == other
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn from_ratio(n: i64, d: i64) -> Self {
        Rational64::new(n, d)
    }
}

/// Slack for floating-point tables.
pub const FLOAT_SLACK: f64 = 1e-12;

impl Probability for f64 {
    fn close_to(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_SLACK
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_ratio(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorTable<T> {
    p: [[[[T; 2]; 2]; 2]; 2],
}

fn sign_of(k: usize) -> i64 {
    if k == 0 {
        1
    } else {
        -1
    }
}

impl<T: Probability> BehaviorTable<T> {
    pub fn from_fn(f: impl Fn(usize, usize, usize, usize) -> T) -> Self {
        BehaviorTable {
            p: std::array::from_fn(|a| {
                std::array::from_fn(|b| std::array::from_fn(|x| std::array::from_fn(|y| f(a, b, x, y))))
            }),
        }
    }

    /// Entry by table index (`0 ↔ +1`, `1 ↔ −1`).
    pub fn entry(&self, a: usize, b: usize, x: usize, y: usize) -> &T {
        &self.p[a][b][x][y]
    }

    /// `P(a, b | x, y)` with `a, b ∈ {+1, −1}`.
    pub fn prob(&self, a: i8, b: i8, x: usize, y: usize) -> &T {
        let idx = |v: i8| if v > 0 { 0 } else { 1 };
        &self.p[idx(a)][idx(b)][x][y]
    }

    /// `E(x, y) = Σ a b P(a, b | x, y)`.
    pub fn correlator(&self, x: usize, y: usize) -> T {
        let mut e = T::zero();
        for a in 0..2 {
            for b in 0..2 {
                let v = self.p[a][b][x][y].clone();
                e = if sign_of(a) * sign_of(b) > 0 { e + v } else { e - v };
            }
        }
        e
    }

    /// Same box with the two parties swapped.
    pub fn swapped(&self) -> Self {
        BehaviorTable::from_fn(|a, b, x, y| self.p[b][a][y][x].clone())
    }

    pub fn map<U: Probability>(&self, f: impl Fn(&T) -> U) -> BehaviorTable<U> {
        BehaviorTable::from_fn(|a, b, x, y| f(&self.p[a][b][x][y]))
    }

    /// Segmented correlator `(E(0,l) + (−1)^l E(1,l))/2`, first party's input
    /// `x` summed, second party's input fixed to `l`.
    pub fn segmented_value(&self, l: bool) -> T {
        let y = l as usize;
        let two = T::one() + T::one();
        if l {
            (self.correlator(0, y) - self.correlator(1, y)) / two
        } else {
            (self.correlator(0, y) + self.correlator(1, y)) / two
        }
    }

    /// Convex combination `Σ w_k t_k`.
    pub fn mixture(parts: &[(T, &BehaviorTable<T>)]) -> Self {
        BehaviorTable::from_fn(|a, b, x, y| {
            parts
                .iter()
                .fold(T::zero(), |acc, (w, t)| acc + w.clone() * t.p[a][b][x][y].clone())
        })
    }
}

/// Normalization, positivity and no-signaling diagnostics; empty when valid.
pub fn validate_box<T: Probability>(t: &BehaviorTable<T>) -> Vec<String> {
    let mut out = Vec::new();
    let zero = T::zero();
    for x in 0..2 {
        for y in 0..2 {
            let mut total = T::zero();
            for a in 0..2 {
                for b in 0..2 {
                    let v = t.p[a][b][x][y].clone();
                    if v < zero && !v.close_to(&zero) {
                        out.push(format!("negative probability at a={},b={}|x={x},y={y}", sign_of(a), sign_of(b)));
                    }
                    total = total + v;
                }
            }
            if !total.close_to(&T::one()) {
                out.push(format!("probabilities for x={x}, y={y} sum to {:?}, not 1", total));
            }
        }
    }
    let marg_a = |a: usize, x: usize, y: usize| t.p[a][0][x][y].clone() + t.p[a][1][x][y].clone();
    let marg_b = |b: usize, x: usize, y: usize| t.p[0][b][x][y].clone() + t.p[1][b][x][y].clone();
    let mut a_signals = false;
    let mut b_signals = false;
    for k in 0..2 {
        for s in 0..2 {
            if !marg_a(k, s, 0).close_to(&marg_a(k, s, 1)) {
                a_signals = true;
            }
            if !marg_b(k, 0, s).close_to(&marg_b(k, 1, s)) {
                b_signals = true;
            }
        }
    }
    if a_signals {
        out.push("A-marginal depends on y".into());
    }
    if b_signals {
        out.push("B-marginal depends on x".into());
    }
    out
}

/// A box given either exactly or in floating point.
#[derive(Debug, Clone, PartialEq)]
pub enum NsBox {
    Exact(BehaviorTable<Rational64>),
    Float(BehaviorTable<f64>),
}

impl NsBox {
    pub fn to_float(&self) -> BehaviorTable<f64> {
        match self {
            NsBox::Exact(t) => t.map(|v| v.to_f64()),
            NsBox::Float(t) => t.clone(),
        }
    }
}

pub fn validate_ns_box(b: &NsBox) -> Vec<String> {
    match b {
        NsBox::Exact(t) => validate_box(t),
        NsBox::Float(t) => validate_box(t),
    }
}

/// `P(a, b | x, y) = 1/2` iff `a b = (−1)^{x y}`.
pub fn pr_box() -> BehaviorTable<Rational64> {
    pr_variant(false, false, false)
}

/// PR box with `a ⊕ b = x y ⊕ αx ⊕ βy ⊕ γ` (outputs as bits).
pub fn pr_variant(alpha: bool, beta: bool, gamma: bool) -> BehaviorTable<Rational64> {
    BehaviorTable::from_fn(|a, b, x, y| {
        let rhs = (x & y) ^ (alpha as usize & x) ^ (beta as usize & y) ^ gamma as usize;
        if a ^ b == rhs {
            Rational64::new(1, 2)
        } else {
            Rational64::zero()
        }
    })
}

/// `P = 1/4` everywhere.
pub fn uniform_box() -> BehaviorTable<Rational64> {
    BehaviorTable::from_fn(|_, _, _, _| Rational64::new(1, 4))
}

/// Local deterministic box with output bits `a = fa[x]`, `b = fb[y]`.
pub fn deterministic_box(fa: [usize; 2], fb: [usize; 2]) -> BehaviorTable<Rational64> {
    BehaviorTable::from_fn(|a, b, x, y| {
        if a == fa[x] && b == fb[y] {
            Rational64::one()
        } else {
            Rational64::zero()
        }
    })
}

/// The 16 local deterministic boxes followed by the 8 PR variants.
pub fn vertex_boxes() -> Vec<BehaviorTable<Rational64>> {
    let mut out = Vec::with_capacity(24);
    for fa in 0..4 {
        for fb in 0..4 {
            out.push(deterministic_box([fa >> 1, fa & 1], [fb >> 1, fb & 1]));
        }
    }
    for k in 0..8 {
        out.push(pr_variant(k & 4 != 0, k & 2 != 0, k & 1 != 0));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct NsValue {
    pub per_l: Vec<(BitString, f64)>,
    /// Exact per-l values when every box is exact.
    pub exact_per_l: Option<Vec<Rational64>>,
    pub sum: f64,
    /// Exact objective when it is rational (`p = 1` or all `|⟨B_l⟩| ∈ {0, 1}`).
    pub exact_sum: Option<Rational64>,
}

/// One box per source, oriented so that the type-A party comes first.
fn oriented_boxes(spec: &NetworkSpec) -> Result<Vec<NsBox>> {
    let a_obs = spec.a_observers();
    let mut out = Vec::new();
    for o in &a_obs {
        let held = spec.particles_of(&o.id);
        let particle = *held.first().ok_or_else(|| Error::InvalidArgument(format!("{} holds nothing", o.id)))?;
        let s = spec
            .source(particle.source)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown source {}", particle.source)))?;
        let b = match (&s.kind, &s.payload) {
            (SourceKind::NoSignaling, Payload::Box(b)) => b.resolve(),
            _ => {
                return Err(Error::Unsupported(format!(
                    "source {} is not a no-signaling source",
                    s.id
                )))
            }
        };
        if s.particles != 2 {
            return Err(Error::Unsupported(format!("source {} is not a bipartite box", s.id)));
        }
        let other = if particle.emission == 1 { 2 } else { 1 };
        let other_label = crate::pauli::ParticleLabel::new(s.id, other);
        if spec
            .route_of(&other_label)
            .and_then(|id| spec.observer(id))
            .is_none_or(|obs| obs.is_a())
        {
            return Err(Error::Unsupported(format!(
                "source {} must connect one type-A and one type-B observer",
                s.id
            )));
        }
        out.push(match (b, particle.emission) {
            (b, 1) => b,
            (NsBox::Exact(t), _) => NsBox::Exact(t.swapped()),
            (NsBox::Float(t), _) => NsBox::Float(t.swapped()),
        });
    }
    Ok(out)
}

/// `Σ_l |∏_k ⟨B^{(l_k)}⟩_k|^p` over independent boxes, one per type-A observer.
pub fn ns_value(spec: &NetworkSpec, p: f64) -> Result<NsValue> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidArgument(format!("p = {p} must be positive")));
    }
    if spec.sources.iter().any(|s| s.kind != SourceKind::NoSignaling) {
        return Err(Error::Unsupported("ns_value needs a network of no-signaling sources".into()));
    }
    let boxes = oriented_boxes(spec)?;
    let m_a = boxes.len();
    let exact: Option<Vec<&BehaviorTable<Rational64>>> = boxes
        .iter()
        .map(|b| match b {
            NsBox::Exact(t) => Some(t),
            NsBox::Float(_) => None,
        })
        .collect();
    let floats: Vec<BehaviorTable<f64>> = boxes.iter().map(NsBox::to_float).collect();

    let mut per_l = Vec::with_capacity(1 << m_a);
    let mut exact_per_l = exact.as_ref().map(|_| Vec::with_capacity(1 << m_a));
    for l in BitString::all(m_a) {
        let v: f64 = floats.iter().zip(l.bits()).map(|(t, &b)| t.segmented_value(b)).product();
        per_l.push((l.clone(), v));
        if let (Some(ex), Some(out)) = (&exact, &mut exact_per_l) {
            let r = ex
                .iter()
                .zip(l.bits())
                .fold(Rational64::one(), |acc, (t, &b)| acc * t.segmented_value(b));
            out.push(r);
        }
    }
    let sum = match &exact_per_l {
        Some(ex) => ex.iter().map(|r| crate::abs_pow(r.to_f64(), p)).sum(),
        None => per_l.iter().map(|(_, v)| crate::abs_pow(*v, p)).sum(),
    };
    let exact_sum = exact_per_l.as_ref().and_then(|ex| {
        let unit = ex.iter().all(|r| r.is_zero() || r.abs() == Rational64::one());
        if p == 1.0 || unit {
            Some(if p == 1.0 {
                ex.iter().fold(Rational64::zero(), |acc, r| acc + r.abs())
            } else {
                Rational64::from_integer(ex.iter().filter(|r| !r.is_zero()).count() as i64)
            })
        } else {
            None
        }
    });
    Ok(NsValue {
        per_l,
        exact_per_l,
        sum,
        exact_sum,
    })
}

/// Algebraic maximum `2^{M_A}`, attained by PR boxes for every `p > 0`.
pub fn ns_max(m_a: usize, p: f64) -> Result<f64> {
    if m_a == 0 {
        return Err(Error::InvalidArgument("M_A must be at least 1".into()));
    }
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidArgument(format!("p = {p} must be positive")));
    }
    Ok(2f64.powi(m_a as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netspec::{hybrid_star, BoxSpec};

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn pr_correlators() {
        let pr = pr_box();
        assert_eq!(pr.correlator(0, 0), r(1, 1));
        assert_eq!(pr.correlator(0, 1), r(1, 1));
        assert_eq!(pr.correlator(1, 0), r(1, 1));
        assert_eq!(pr.correlator(1, 1), r(-1, 1));
        assert_eq!(pr.segmented_value(false), r(1, 1));
        assert_eq!(pr.segmented_value(true), r(1, 1));
        assert!(validate_box(&pr).is_empty());
        assert!(validate_box(&uniform_box()).is_empty());
    }

    #[test]
    fn signaling_box_flagged() {
        // Alice outputs Bob's input.
        let t = BehaviorTable::from_fn(|a, b, _x, y| if a == y && b == 0 { r(1, 1) } else { r(0, 1) });
        let d = validate_box(&t);
        assert!(d.iter().any(|m| m == "A-marginal depends on y"), "{d:?}");
        let mut bad = uniform_box().map(|v| v.to_f64());
        bad = BehaviorTable::from_fn(|a, b, x, y| bad.entry(a, b, x, y) * if x == 0 { 1.0 } else { 2.0 });
        assert!(validate_box(&bad).iter().any(|m| m.contains("sum to")));
    }

    #[test]
    fn all_vertices_valid() {
        let v = vertex_boxes();
        assert_eq!(v.len(), 24);
        for t in &v {
            assert!(validate_box(t).is_empty());
        }
    }

    #[test]
    fn star_values() {
        let spec = hybrid_star(0, 0, 2);
        let v = ns_value(&spec, 1.0).unwrap();
        assert_eq!(v.exact_sum, Some(r(4, 1)));
        let v = ns_value(&spec, 0.5).unwrap();
        assert_eq!(v.exact_sum, Some(r(4, 1)));

        let mut noisy = spec.clone();
        for s in &mut noisy.sources {
            s.payload = Payload::Box(BoxSpec::Table(Box::new(NsBox::Exact(uniform_box()))));
        }
        assert_eq!(ns_value(&noisy, 1.0).unwrap().exact_sum, Some(r(0, 1)));

        let mut mixed = spec.clone();
        mixed.sources[1].payload = Payload::Box(BoxSpec::Table(Box::new(NsBox::Exact(uniform_box()))));
        assert_eq!(ns_value(&mixed, 1.0).unwrap().sum, 0.0);
    }

    #[test]
    fn ns_max_values() {
        assert_eq!(ns_max(2, 1.0).unwrap(), 4.0);
        assert_eq!(ns_max(1, 1.0).unwrap(), 2.0);
        assert_eq!(ns_max(3, 0.5).unwrap(), ns_max(3, 1.0).unwrap());
        assert!(ns_max(0, 1.0).is_err());
    }
}
