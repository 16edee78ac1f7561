//! Stabilizing operators `g_l` and the segmented Bell operators `B_l` grafted
//! from them.
//!
//! For a type-A observer holding one qubit with axis pair `(P_0, P_1)` and
//! angle `θ`, the two dichotomic observables are
//! `A_0 = cos θ P_0 + sin θ P_1` and `A_1 = cos θ P_0 − sin θ P_1`, so the
//! factor `(A_0 + (−1)^{l_i} A_1)/2` equals `cos θ P_0` for `l_i = 0` and
//! `sin θ P_1` for `l_i = 1`. Type-B observers measure the joint Pauli of
//! `g_l` restricted to their particles, indexed by a setting label.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::netspec::{AxisPair, NetworkSpec, ObserverKind, SettingMap, SourceKind};
use crate::pauli::{ParticleLabel, Pauli, PauliString, Roster, StabilizerState};

/// Largest source for which the stabilizer group is enumerated.
const MAX_GROUP_QUBITS: usize = 20;

/// Local operators of one source: for every bit pattern on its A-held qubits,
/// the stabilizer-group element whose components on those qubits match the
/// selected axes.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperatorTable {
    pub a_qubits: Vec<ParticleLabel>,
    pub axes: Vec<AxisPair>,
    /// Indexed by the big-endian pattern over `a_qubits`.
    pub elements: Vec<PauliString>,
}

impl LocalOperatorTable {
    pub fn element(&self, pattern: &BitString) -> &PauliString {
        &self.elements[pattern.index()]
    }
}

fn matches(element: &PauliString, qubits: &[ParticleLabel], axes: &[AxisPair], pattern: usize) -> bool {
    let k = qubits.len();
    qubits.iter().zip(axes).enumerate().all(|(i, (q, a))| {
        let bit = (pattern >> (k - 1 - i)) & 1 == 1;
        element.at(q) == Some(a.get(bit))
    })
}

/// Searches the stabilizer group of `state` for local operators on the listed
/// A-held qubits. Qubits with a fixed axis pair use it; the others try the six
/// valid pairs in `AxisPair::search_order`, lexicographically over qubits.
pub fn select_local_operators(
    state: &StabilizerState,
    a_qubits: &[(ParticleLabel, Option<AxisPair>)],
) -> Result<LocalOperatorTable> {
    if state.num_qubits() > MAX_GROUP_QUBITS {
        return Err(Error::ResourceGuard {
            what: "stabilizer group enumeration (qubits)",
            requested: state.num_qubits() as u128,
            limit: MAX_GROUP_QUBITS as u128,
        });
    }
    for (q, axes) in a_qubits {
        if !state.roster().contains(q) {
            return Err(Error::UnknownParticle(*q));
        }
        if let Some(a) = axes {
            if !a.is_valid() {
                return Err(Error::InvalidArgument(format!("axis pair {a} on {q} is not valid")));
            }
        }
    }
    let qubits: Vec<ParticleLabel> = a_qubits.iter().map(|(q, _)| *q).collect();
    let group: Vec<PauliString> = state.group_elements().collect();

    // Report the first qubit that admits no pair even on its own.
    for (q, axes) in a_qubits {
        let candidates: Vec<AxisPair> = match axes {
            Some(a) => vec![*a],
            None => AxisPair::search_order().to_vec(),
        };
        let ok = candidates.iter().any(|a| {
            (0..2).all(|bit| group.iter().any(|g| matches(g, &[*q], &[*a], bit)))
        });
        if !ok {
            return Err(Error::NoValidOperatorPair(*q));
        }
    }

    let candidates: Vec<Vec<AxisPair>> = a_qubits
        .iter()
        .map(|(_, axes)| match axes {
            Some(a) => vec![*a],
            None => AxisPair::search_order().to_vec(),
        })
        .collect();
    let k = qubits.len();
    let mut odometer = vec![0usize; k];
    loop {
        let axes: Vec<AxisPair> = odometer.iter().zip(&candidates).map(|(&i, c)| c[i]).collect();
        let elements: Option<Vec<PauliString>> = (0..1usize << k)
            .map(|pattern| group.iter().find(|g| matches(g, &qubits, &axes, pattern)).cloned())
            .collect();
        if let Some(elements) = elements {
            return Ok(LocalOperatorTable {
                a_qubits: qubits,
                axes,
                elements,
            });
        }
        // Advance, last qubit fastest.
        let mut pos = k;
        loop {
            if pos == 0 {
                return Err(Error::NoValidOperatorPair(qubits[0]));
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < candidates[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

/// One type-A factor `(A_0 + (−1)^bit A_1)/2` with
/// `A_{0,1} = cos θ V_0 ± sin θ V_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AFactor {
    pub observer: String,
    pub bit: bool,
    pub theta: f64,
    /// `None` for multi-qubit (virtual) observables.
    pub axes: Option<AxisPair>,
    pub v0: PauliString,
    pub v1: PauliString,
}

impl AFactor {
    /// `cos θ` for bit 0, `sin θ` for bit 1.
    pub fn weight(&self) -> f64 {
        if self.bit {
            self.theta.sin()
        } else {
            self.theta.cos()
        }
    }

    pub fn selected(&self) -> &PauliString {
        if self.bit {
            &self.v1
        } else {
            &self.v0
        }
    }

    /// Coefficients of `V_0` and `V_1` in the factor.
    pub fn coefficients(&self) -> (f64, f64) {
        let s = if self.bit { -1.0 } else { 1.0 };
        let (c, sn) = (self.theta.cos(), self.theta.sin());
        ((c + s * c) / 2.0, (sn - s * sn) / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BSetting {
    pub observer: String,
    pub label: String,
    pub pauli: PauliString,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedBellOperator {
    pub index: BitString,
    pub sign: i8,
    pub a_factors: Vec<AFactor>,
    pub b_settings: Vec<BSetting>,
    /// The stabilizing operator: `sign · ∏ V_{l_i} · ∏ B`.
    pub g: PauliString,
}

impl SegmentedBellOperator {
    /// `ω_l = ∏ cos^{1−l_i} θ_i sin^{l_i} θ_i`.
    pub fn weight(&self) -> f64 {
        self.a_factors.iter().map(AFactor::weight).product()
    }

    /// Rebuilds `g_l` from the grafted pieces.
    pub fn pauli_part(&self) -> Result<PauliString> {
        let mut acc = PauliString::identity(self.g.roster().clone());
        if self.sign < 0 {
            acc = acc.negate();
        }
        for f in &self.a_factors {
            acc = acc.mul(f.selected())?;
        }
        for b in &self.b_settings {
            acc = acc.mul(&b.pauli)?;
        }
        Ok(acc)
    }

    pub fn setting(&self, observer: &str) -> Option<&BSetting> {
        self.b_settings.iter().find(|b| b.observer == observer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BObserver {
    pub id: String,
    /// Distinct setting labels in order of first use.
    pub settings: Vec<String>,
}

impl BObserver {
    pub fn setting_index(&self, label: &str) -> Option<usize> {
        self.settings.iter().position(|s| s == label)
    }
}

/// All `2^{M_A}` segmented operators of a network together with the state
/// they are tailored to.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFamily {
    pub state: StabilizerState,
    pub a_observers: Vec<String>,
    pub b_observers: Vec<BObserver>,
    /// Ordered by `index`.
    pub operators: Vec<SegmentedBellOperator>,
}

impl OperatorFamily {
    pub fn m_a(&self) -> usize {
        self.a_observers.len()
    }

    pub fn roster(&self) -> &Roster {
        self.state.roster()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.a_observers
            .iter()
            .enumerate()
            .map(|(i, _)| self.operators[0].a_factors[i].theta)
            .collect()
    }

    /// Same operators with the type-A angles replaced (in `a_observers` order).
    pub fn with_angles(&self, angles: &[f64]) -> Result<OperatorFamily> {
        if angles.len() != self.m_a() {
            return Err(Error::LengthMismatch(format!(
                "{} angles for {} type-A observers",
                angles.len(),
                self.m_a()
            )));
        }
        let mut out = self.clone();
        for op in &mut out.operators {
            for (f, &t) in op.a_factors.iter_mut().zip(angles) {
                f.theta = t;
            }
        }
        Ok(out)
    }

    /// Total number of B settings across observers.
    pub fn num_b_settings(&self) -> usize {
        self.b_observers.iter().map(|b| b.settings.len()).sum()
    }

    pub fn stabilizers(&self) -> Vec<(BitString, PauliString)> {
        self.operators.iter().map(|op| (op.index.clone(), op.g.clone())).collect()
    }
}

fn letters_on(roster: &Roster, source: &PauliString, keep: &[ParticleLabel]) -> Result<PauliString> {
    let letters: Vec<Pauli> = roster
        .labels()
        .iter()
        .map(|l| {
            if keep.contains(l) {
                source.at(l).ok_or(Error::UnknownParticle(*l))
            } else {
                Ok(Pauli::I)
            }
        })
        .collect::<Result<_>>()?;
    PauliString::from_letters(roster.clone(), &letters, 0)
}

/// Width of a binary label distinguishing `count` values.
fn label_width(count: usize) -> usize {
    if count <= 1 {
        0
    } else {
        (usize::BITS - (count - 1).leading_zeros()) as usize
    }
}

fn collect_b_observers(ops: &[SegmentedBellOperator], ids: &[String]) -> Vec<BObserver> {
    ids.iter()
        .map(|id| {
            let mut settings: Vec<String> = Vec::new();
            for op in ops {
                if let Some(b) = op.setting(id) {
                    if !settings.contains(&b.label) {
                        settings.push(b.label.clone());
                    }
                }
            }
            BObserver {
                id: id.clone(),
                settings,
            }
        })
        .collect()
}

/// Builds `B_l` for every `l` of a validated, fully quantum network.
pub fn build_segmented_operators(spec: &NetworkSpec) -> Result<OperatorFamily> {
    let diags = spec.validate();
    if !diags.is_empty() {
        return Err(Error::InvalidNetwork(diags.into_iter().map(|d| d.to_string()).collect()));
    }
    if !spec.is_fully_quantum() {
        return Err(Error::Unsupported(
            "segmented operators need a fully quantum network; evaluate hybrid networks per source kind".into(),
        ));
    }
    let state = spec.quantum_state()?;
    let roster = state.roster().clone();

    let a_obs = spec.a_observers();
    let a_ids: Vec<String> = a_obs.iter().map(|o| o.id.clone()).collect();
    let a_particle: Vec<ParticleLabel> = a_ids.iter().map(|id| spec.particles_of(id)[0]).collect();
    let m_a = a_ids.len();
    let b_ids: Vec<String> = spec.b_observers().iter().map(|o| o.id.clone()).collect();

    struct Fragment {
        source: u32,
        /// Positions in `l` of this source's A-held qubits.
        bits: Vec<usize>,
        table: Option<LocalOperatorTable>,
        /// Per pattern, the label of the B-side restriction.
        labels: Vec<String>,
    }

    let mut fragments = Vec::new();
    for s in &spec.sources {
        let bits: Vec<usize> = (0..m_a).filter(|&i| a_particle[i].source == s.id).collect();
        if bits.is_empty() {
            fragments.push(Fragment {
                source: s.id,
                bits,
                table: None,
                labels: vec![String::new()],
            });
            continue;
        }
        let local_state = s.state()?;
        let request: Vec<(ParticleLabel, Option<AxisPair>)> = bits
            .iter()
            .map(|&i| match &a_obs[i].kind {
                ObserverKind::A { axes, .. } => (a_particle[i], *axes),
                ObserverKind::B => unreachable!("a_observers only returns type-A observers"),
            })
            .collect();
        let table = select_local_operators(&local_state, &request)?;

        // Label the distinct B-side restrictions in order of first appearance.
        let b_held: Vec<ParticleLabel> = s
            .roster()
            .labels()
            .iter()
            .copied()
            .filter(|p| !a_particle.contains(p))
            .collect();
        let restrictions: Vec<PauliString> = table
            .elements
            .iter()
            .map(|e| letters_on(&s.roster(), e, &b_held))
            .collect::<Result<_>>()?;
        let mut distinct: Vec<&PauliString> = Vec::new();
        for r in &restrictions {
            if !distinct.contains(&r) {
                distinct.push(r);
            }
        }
        let width = label_width(distinct.len());
        let labels = restrictions
            .iter()
            .map(|r| {
                let k = distinct.iter().position(|d| *d == r).unwrap_or(0);
                if width == 0 {
                    String::new()
                } else {
                    BitString::from_index(k, width).to_string()
                }
            })
            .collect();
        fragments.push(Fragment {
            source: s.id,
            bits,
            table: Some(table),
            labels,
        });
    }

    let mut operators = Vec::with_capacity(1 << m_a);
    for l in BitString::all(m_a) {
        let mut g = PauliString::identity(roster.clone());
        let mut source_labels: BTreeMap<u32, String> = BTreeMap::new();
        for f in &fragments {
            let pattern = BitString::new(f.bits.iter().map(|&i| l.bit(i)).collect());
            if let Some(t) = &f.table {
                g = g.mul(&t.element(&pattern).extend_to(&roster)?)?;
                source_labels.insert(f.source, f.labels[pattern.index()].clone());
            }
        }
        let sign = g.sign().ok_or_else(|| Error::NonHermitian(g.to_string()))?;

        let a_factors = (0..m_a)
            .map(|i| {
                let (theta, axes) = match &a_obs[i].kind {
                    ObserverKind::A { angle, .. } => (*angle, {
                        let f = fragments
                            .iter()
                            .find(|f| f.bits.contains(&i))
                            .and_then(|f| f.table.as_ref().map(|t| (f, t)))
                            .expect("every A observer belongs to a fragment");
                        let k = f.0.bits.iter().position(|&b| b == i).unwrap_or(0);
                        f.1.axes[k]
                    }),
                    ObserverKind::B => unreachable!(),
                };
                Ok(AFactor {
                    observer: a_ids[i].clone(),
                    bit: l.bit(i),
                    theta,
                    axes: Some(axes),
                    v0: PauliString::single(roster.clone(), a_particle[i], axes.0)?,
                    v1: PauliString::single(roster.clone(), a_particle[i], axes.1)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut b_settings = Vec::new();
        for id in &b_ids {
            let held = spec.particles_of(id);
            let pauli = letters_on(&roster, &g, &held)?;
            let label = match &spec.setting_map {
                SettingMap::Identity => {
                    let mut feeding: Vec<u32> = held.iter().map(|p| p.source).collect();
                    feeding.dedup();
                    feeding
                        .iter()
                        .map(|s| source_labels.get(s).cloned().unwrap_or_default())
                        .collect::<String>()
                }
                SettingMap::Observable => held
                    .iter()
                    .map(|p| pauli.at(p).map(|x| x.letter()).unwrap_or('I'))
                    .collect(),
                SettingMap::Explicit(m) => m
                    .get(id)
                    .and_then(|t| t.get(&l))
                    .cloned()
                    .ok_or_else(|| Error::InvalidArgument(format!("ymap has no entry for {id} at l = {l}")))?,
            };
            b_settings.push(BSetting {
                observer: id.clone(),
                label,
                pauli,
            });
        }

        operators.push(SegmentedBellOperator {
            index: l,
            sign,
            a_factors,
            b_settings,
            g,
        });
    }

    let b_observers = collect_b_observers(&operators, &b_ids);
    Ok(OperatorFamily {
        state,
        a_observers: a_ids,
        b_observers,
        operators,
    })
}

/// `l ↦ g_l` for a validated fully quantum network.
pub fn build_global_stabilizers(spec: &NetworkSpec) -> Result<Vec<(BitString, PauliString)>> {
    Ok(build_segmented_operators(spec)?.stabilizers())
}

/// The four fragments of a GHZ₃ source whose first particle goes to a type-B
/// observer and the other two to type-A observers. Fragment `(l_n, l_{n+1})`
/// carries sign `(−1)^{l_n l_{n+1}}` and B setting `l_n ⊕ l_{n+1}` when the
/// observers use the `(Y, X)` axes.
pub fn build_ghz_mermin_block(spec: &NetworkSpec, source: u32) -> Result<OperatorFamily> {
    let s = spec
        .source(source)
        .ok_or_else(|| Error::InvalidArgument(format!("no source {source}")))?;
    if s.kind != SourceKind::Quantum || s.particles != 3 {
        return Err(Error::InvalidArgument(format!("source {source} is not a three-qubit quantum source")));
    }
    let a_count = s
        .roster()
        .labels()
        .iter()
        .filter(|p| spec.route_of(p).and_then(|o| spec.observer(o)).is_some_and(|o| o.is_a()))
        .count();
    if a_count != 2 {
        return Err(Error::InvalidArgument(format!(
            "source {source} routes {a_count} particles to type-A observers, expected 2"
        )));
    }
    let mut sub = spec.restrict_to_sources(&[source]);
    sub.setting_map = SettingMap::Identity;
    build_segmented_operators(&sub)
}

/// Two-operator family on a virtual qubit: `2s + 1` Bell pairs whose first
/// qubits all go to one type-A observer and whose second qubits go to
/// `B_1 … B_{2s+1}`. The observer's pair is `V_0 = ∏ Z^{1−l_i} X^{l_i}` and
/// `V_1 = ∏ Z^{l_i} X^{1−l_i}` on its qubits, which anticommute and square to
/// the identity. Operator `0` pairs `V_0` with B settings `l`, operator `1`
/// pairs `V_1` with the complemented settings.
pub fn virtual_qubit_family(s: usize, l: &BitString, theta: f64) -> Result<OperatorFamily> {
    let n = 2 * s + 1;
    if s == 0 {
        return Err(Error::InvalidArgument("s must be positive".into()));
    }
    if l.len() != n {
        return Err(Error::LengthMismatch(format!("l has {} bits, expected {n}", l.len())));
    }
    if l.parity() {
        return Err(Error::InvalidArgument(format!("l = {l} has odd parity")));
    }
    let mut state: Option<StabilizerState> = None;
    for i in 1..=n as u32 {
        let b = StabilizerState::bell(Roster::for_source(i, 2))?;
        state = Some(match state {
            None => b,
            Some(acc) => acc.tensor(&b)?,
        });
    }
    let state = state.expect("n ≥ 3");
    let roster = state.roster().clone();
    let first = |i: usize| ParticleLabel::new(i as u32 + 1, 1);
    let second = |i: usize| ParticleLabel::new(i as u32 + 1, 2);
    let zx = |bit: bool| if bit { Pauli::X } else { Pauli::Z };

    let build = |targets: &dyn Fn(usize) -> ParticleLabel, pick: &dyn Fn(usize) -> bool| -> Result<PauliString> {
        let mut letters = vec![Pauli::I; roster.len()];
        for i in 0..n {
            let pos = roster.position(&targets(i)).ok_or(Error::UnknownParticle(targets(i)))?;
            letters[pos] = zx(pick(i));
        }
        PauliString::from_letters(roster.clone(), &letters, 0)
    };
    let v0 = build(&first, &|i| l.bit(i))?;
    let v1 = build(&first, &|i| !l.bit(i))?;
    let b_ids: Vec<String> = (1..=n).map(|j| format!("B{j}")).collect();

    let mut operators = Vec::new();
    for bit in [false, true] {
        let settings = if bit { l.complement() } else { l.clone() };
        let b_settings = (0..n)
            .map(|j| {
                Ok(BSetting {
                    observer: b_ids[j].clone(),
                    label: if settings.bit(j) { "1".into() } else { "0".into() },
                    pauli: PauliString::single(roster.clone(), second(j), zx(settings.bit(j)))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let factor = AFactor {
            observer: "A1".into(),
            bit,
            theta,
            axes: None,
            v0: v0.clone(),
            v1: v1.clone(),
        };
        let mut g = factor.selected().clone();
        for b in &b_settings {
            g = g.mul(&b.pauli)?;
        }
        operators.push(SegmentedBellOperator {
            index: BitString::new(vec![bit]),
            sign: g.sign().ok_or_else(|| Error::NonHermitian(g.to_string()))?,
            a_factors: vec![factor],
            b_settings,
            g,
        });
    }
    let b_observers = collect_b_observers(&operators, &b_ids);
    Ok(OperatorFamily {
        state,
        a_observers: vec!["A1".into()],
        b_observers,
        operators,
    })
}

/// [`virtual_qubit_family`] at `θ = π/4`.
pub fn virtual_qubit_pair(s: usize, l: &BitString) -> Result<OperatorFamily> {
    virtual_qubit_family(s, l, FRAC_PI_4)
}

/// Even-parity strings of length `2s + 1`.
pub fn even_parity_strings(s: usize) -> Vec<BitString> {
    BitString::all(2 * s + 1).filter(|l| !l.parity()).collect()
}
