//! Network descriptions: sources, particle routing, observers.
//!
//! The on-disk format is a JSON document:
//!
//! ```json
//! {
//!   "sources": [
//!     {"id": 1, "kind": "quantum", "particles": 2, "state": "bell"},
//!     {"id": 2, "kind": "ns", "particles": 2, "box": "pr"}
//!   ],
//!   "routing": [
//!     {"particle": [1, 1], "to": "B"}, {"particle": [1, 2], "to": "A1"},
//!     {"particle": [2, 1], "to": "B"}, {"particle": [2, 2], "to": "A2"}
//!   ],
//!   "observers": [
//!     {"id": "A1", "type": "A", "angle": 0.7853981633974483, "axes": ["Z", "X"]},
//!     {"id": "A2", "type": "A"},
//!     {"id": "B", "type": "B"}
//!   ],
//!   "p": 1.0
//! }
//! ```
//!
//! `state` is `"bell"`, `"ghz:<k>"` or `{"generators": ["-XXX", ...]}`;
//! `box` is `"pr"` or `{"table": {"a,b|x,y": prob, ...}}` with 16 entries,
//! probabilities given as numbers or exact `"n/d"` strings. `ymap` is
//! `"identity"` (default), `"observable"`, or an explicit
//! `{"<B id>": {"<l>": "<label>"}}` table.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::nosignal::{self, BehaviorTable, NsBox};
use crate::pauli::{ParticleLabel, Pauli, Roster, StabilizerState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SourceKind {
    #[serde(rename = "classical")]
    Classical,
    #[serde(rename = "quantum")]
    Quantum,
    #[serde(rename = "ns")]
    NoSignaling,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::Classical => "classical",
            SourceKind::Quantum => "quantum",
            SourceKind::NoSignaling => "ns",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Bell,
    Ghz(u32),
    Generators(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoxSpec {
    Pr,
    Table(Box<NsBox>),
}

impl BoxSpec {
    pub fn resolve(&self) -> NsBox {
        match self {
            BoxSpec::Pr => NsBox::Exact(nosignal::pr_box()),
            BoxSpec::Table(t) => (**t).clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    None,
    State(StateSpec),
    Box(BoxSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceDecl {
    pub id: u32,
    pub kind: SourceKind,
    pub particles: u32,
    pub payload: Payload,
}

impl SourceDecl {
    pub fn roster(&self) -> Roster {
        Roster::for_source(self.id, self.particles)
    }

    /// The stabilizer state of a quantum source over its own particles.
    pub fn state(&self) -> Result<StabilizerState> {
        let roster = self.roster();
        match &self.payload {
            Payload::State(StateSpec::Bell) => StabilizerState::bell(roster),
            Payload::State(StateSpec::Ghz(_)) => StabilizerState::ghz(roster),
            Payload::State(StateSpec::Generators(g)) => {
                let gens: Vec<&str> = g.iter().map(String::as_str).collect();
                StabilizerState::from_strings(roster, &gens)
            }
            _ => Err(Error::Unsupported(format!("source {} carries no quantum state", self.id))),
        }
    }
}

/// Ordered pair `(P_0, P_1)` of single-qubit Paulis measured by a type-A observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AxisPair(pub Pauli, pub Pauli);

impl AxisPair {
    pub const DEFAULT: AxisPair = AxisPair(Pauli::Z, Pauli::X);

    /// Two distinct non-identity Paulis, i.e. one of `{X,Y}`, `{Y,Z}`, `{X,Z}`.
    pub fn is_valid(&self) -> bool {
        self.0 != self.1 && self.0 != Pauli::I && self.1 != Pauli::I
    }

    pub fn get(&self, bit: bool) -> Pauli {
        if bit {
            self.1
        } else {
            self.0
        }
    }

    /// All six valid ordered pairs with `Z < X < Y`.
    pub fn search_order() -> [AxisPair; 6] {
        use Pauli::*;
        [
            AxisPair(Z, X),
            AxisPair(Z, Y),
            AxisPair(X, Z),
            AxisPair(X, Y),
            AxisPair(Y, Z),
            AxisPair(Y, X),
        ]
    }
}

impl fmt::Display for AxisPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObserverKind {
    /// `axes: None` lets operator selection search for a valid pair.
    A { angle: f64, axes: Option<AxisPair> },
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverDecl {
    pub id: String,
    pub kind: ObserverKind,
}

impl ObserverDecl {
    pub fn is_a(&self) -> bool {
        matches!(self.kind, ObserverKind::A { .. })
    }

    pub fn angle(&self) -> Option<f64> {
        match self.kind {
            ObserverKind::A { angle, .. } => Some(angle),
            ObserverKind::B => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub particle: ParticleLabel,
    pub to: String,
}

/// How a type-B observer's setting label `y_j(l)` is derived from `l`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SettingMap {
    /// Bits of `l` belonging to the sources that feed the observer.
    #[default]
    Identity,
    /// One setting per distinct joint Pauli observable.
    Observable,
    /// Per observer, `l` → label.
    Explicit(BTreeMap<String, BTreeMap<BitString, String>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    fn new(code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub sources: Vec<SourceDecl>,
    pub routing: Vec<Route>,
    pub observers: Vec<ObserverDecl>,
    pub p: f64,
    pub setting_map: SettingMap,
}

// ---- raw document -------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    sources: Vec<RawSource>,
    routing: Vec<RawRoute>,
    observers: Vec<RawObserver>,
    #[serde(default = "default_p")]
    p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ymap: Option<RawSettingMap>,
}

fn default_p() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<u32>,
    kind: SourceKind,
    particles: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state: Option<RawState>,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    box_: Option<RawBox>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawState {
    Named(String),
    Generators { generators: Vec<String> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawBox {
    Named(String),
    Table { table: BTreeMap<String, RawProb> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawProb {
    Num(f64),
    Text(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoute {
    particle: [u32; 2],
    to: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObserver {
    id: String,
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axes: Option<[String; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawSettingMap {
    Named(String),
    Explicit(BTreeMap<String, BTreeMap<String, String>>),
}

fn parse_letter(s: &str, field: &str) -> Result<Pauli> {
    let mut chars = s.chars();
    match (chars.next().and_then(Pauli::from_letter), chars.next()) {
        (Some(p), None) => Ok(p),
        _ => Err(Error::Syntax(format!("{field}: {s:?} is not a Pauli letter"))),
    }
}

fn parse_sign(s: &str) -> Option<usize> {
    match s.trim() {
        "1" | "+1" | "+" => Some(0),
        "-1" | "-" => Some(1),
        _ => None,
    }
}

fn parse_bit(s: &str) -> Option<usize> {
    match s.trim() {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    }
}

/// `"a,b|x,y"` → `(a, b, x, y)` as table indices.
fn parse_box_key(key: &str) -> Result<(usize, usize, usize, usize)> {
    let bad = || Error::Syntax(format!("box table key {key:?} is not of the form \"a,b|x,y\""));
    let (out, inp) = key.split_once('|').ok_or_else(bad)?;
    let (a, b) = out.split_once(',').ok_or_else(bad)?;
    let (x, y) = inp.split_once(',').ok_or_else(bad)?;
    Ok((
        parse_sign(a).ok_or_else(bad)?,
        parse_sign(b).ok_or_else(bad)?,
        parse_bit(x).ok_or_else(bad)?,
        parse_bit(y).ok_or_else(bad)?,
    ))
}

fn box_key(a: usize, b: usize, x: usize, y: usize) -> String {
    let sign = |k| if k == 0 { "1" } else { "-1" };
    format!("{},{}|{},{}", sign(a), sign(b), x, y)
}

fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: i64 = d.trim().parse().ok()?;
            (d != 0).then_some(())?;
            Some(Rational64::new(n.trim().parse().ok()?, d))
        }
        None => s.parse::<i64>().ok().map(Rational64::from_integer),
    }
}

fn parse_table(table: &BTreeMap<String, RawProb>) -> Result<NsBox> {
    if table.len() != 16 {
        return Err(Error::Syntax(format!("box table has {} entries, expected 16", table.len())));
    }
    let mut exact = [[[[None; 2]; 2]; 2]; 2];
    let mut float = [[[[0.0f64; 2]; 2]; 2]; 2];
    let mut all_exact = true;
    for (key, value) in table {
        let (a, b, x, y) = parse_box_key(key)?;
        if exact[a][b][x][y].is_some() || float[a][b][x][y] != 0.0 {
            return Err(Error::Syntax(format!("duplicate box table key {key:?}")));
        }
        match value {
            RawProb::Text(s) => {
                let r = parse_rational(s)
                    .ok_or_else(|| Error::Syntax(format!("bad probability {s:?}")))?;
                exact[a][b][x][y] = Some(r);
                float[a][b][x][y] = *r.numer() as f64 / *r.denom() as f64;
            }
            RawProb::Num(v) => {
                all_exact = false;
                float[a][b][x][y] = *v;
                exact[a][b][x][y] = Some(Rational64::from_integer(0));
            }
        }
    }
    Ok(if all_exact {
        NsBox::Exact(BehaviorTable::from_fn(|a, b, x, y| exact[a][b][x][y].unwrap()))
    } else {
        NsBox::Float(BehaviorTable::from_fn(|a, b, x, y| float[a][b][x][y]))
    })
}

fn table_to_raw(t: &NsBox) -> BTreeMap<String, RawProb> {
    let mut out = BTreeMap::new();
    for a in 0..2 {
        for b in 0..2 {
            for x in 0..2 {
                for y in 0..2 {
                    let v = match t {
                        NsBox::Exact(t) => {
                            let r = t.entry(a, b, x, y);
                            RawProb::Text(if *r.denom() == 1 {
                                r.numer().to_string()
                            } else {
                                format!("{}/{}", r.numer(), r.denom())
                            })
                        }
                        NsBox::Float(t) => RawProb::Num(*t.entry(a, b, x, y)),
                    };
                    out.insert(box_key(a, b, x, y), v);
                }
            }
        }
    }
    out
}

impl NetworkSpec {
    /// Parses a JSON network document and applies defaults
    /// (angle `π/4`, identity setting map).
    pub fn parse(document: &str) -> Result<NetworkSpec> {
        let raw: RawDocument = serde_json::from_str(document).map_err(|e| {
            Error::Syntax(format!("line {} column {}: {}", e.line(), e.column(), e))
        })?;
        NetworkSpec::from_raw(raw)
    }

    fn from_raw(raw: RawDocument) -> Result<NetworkSpec> {
        let mut sources = Vec::with_capacity(raw.sources.len());
        for (k, s) in raw.sources.into_iter().enumerate() {
            let id = s.id.unwrap_or(k as u32 + 1);
            if id == 0 {
                return Err(Error::Syntax("source ids start at 1".into()));
            }
            let payload = match (s.state, s.box_) {
                (Some(_), Some(_)) => {
                    return Err(Error::Syntax(format!("source {id} has both a state and a box")))
                }
                (Some(RawState::Named(name)), None) => {
                    Payload::State(if name == "bell" {
                        StateSpec::Bell
                    } else if let Some(k) = name.strip_prefix("ghz:") {
                        StateSpec::Ghz(k.parse().map_err(|_| {
                            Error::Syntax(format!("source {id}: bad GHZ size in {name:?}"))
                        })?)
                    } else {
                        return Err(Error::Syntax(format!("source {id}: unknown state {name:?}")));
                    })
                }
                (Some(RawState::Generators { generators }), None) => {
                    Payload::State(StateSpec::Generators(generators))
                }
                (None, Some(RawBox::Named(name))) => {
                    if name != "pr" {
                        return Err(Error::Syntax(format!("source {id}: unknown box {name:?}")));
                    }
                    Payload::Box(BoxSpec::Pr)
                }
                (None, Some(RawBox::Table { table })) => Payload::Box(BoxSpec::Table(Box::new(parse_table(&table)?))),
                (None, None) => Payload::None,
            };
            sources.push(SourceDecl {
                id,
                kind: s.kind,
                particles: s.particles,
                payload,
            });
        }

        let mut observers = Vec::with_capacity(raw.observers.len());
        for o in raw.observers {
            let kind = match o.kind.as_str() {
                "A" => {
                    let axes = match &o.axes {
                        Some([p0, p1]) => Some(AxisPair(
                            parse_letter(p0, &format!("observer {} axes", o.id))?,
                            parse_letter(p1, &format!("observer {} axes", o.id))?,
                        )),
                        None => None,
                    };
                    ObserverKind::A {
                        angle: o.angle.unwrap_or(FRAC_PI_4),
                        axes,
                    }
                }
                "B" => {
                    if o.angle.is_some() || o.axes.is_some() {
                        return Err(Error::Syntax(format!(
                            "observer {}: type-B observers take no angle or axes",
                            o.id
                        )));
                    }
                    ObserverKind::B
                }
                other => {
                    return Err(Error::Syntax(format!("observer {}: unknown type {other:?}", o.id)))
                }
            };
            observers.push(ObserverDecl { id: o.id, kind });
        }

        let mut routing = Vec::with_capacity(raw.routing.len());
        for r in raw.routing {
            let particle = ParticleLabel::new(r.particle[0], r.particle[1]);
            if !sources.iter().any(|s| s.id == particle.source) {
                return Err(Error::Syntax(format!("routing refers to unknown source {}", particle.source)));
            }
            if !observers.iter().any(|o| o.id == r.to) {
                return Err(Error::Syntax(format!("routing refers to unknown observer {:?}", r.to)));
            }
            routing.push(Route { particle, to: r.to });
        }

        let setting_map = match raw.ymap {
            None => SettingMap::Identity,
            Some(RawSettingMap::Named(n)) if n == "identity" => SettingMap::Identity,
            Some(RawSettingMap::Named(n)) if n == "observable" => SettingMap::Observable,
            Some(RawSettingMap::Named(n)) => {
                return Err(Error::Syntax(format!("unknown ymap {n:?}")))
            }
            Some(RawSettingMap::Explicit(m)) => {
                let mut out = BTreeMap::new();
                for (obs, table) in m {
                    if !observers.iter().any(|o| o.id == obs && !o.is_a()) {
                        return Err(Error::Syntax(format!("ymap refers to unknown type-B observer {obs:?}")));
                    }
                    let mut t = BTreeMap::new();
                    for (l, y) in table {
                        t.insert(l.parse::<BitString>()?, y);
                    }
                    out.insert(obs, t);
                }
                SettingMap::Explicit(out)
            }
        };

        Ok(NetworkSpec {
            sources,
            routing,
            observers,
            p: raw.p,
            setting_map,
        })
    }

    fn to_raw(&self) -> RawDocument {
        let sources = self
            .sources
            .iter()
            .map(|s| {
                let (state, box_) = match &s.payload {
                    Payload::None => (None, None),
                    Payload::State(StateSpec::Bell) => (Some(RawState::Named("bell".into())), None),
                    Payload::State(StateSpec::Ghz(k)) => (Some(RawState::Named(format!("ghz:{k}"))), None),
                    Payload::State(StateSpec::Generators(g)) => {
                        (Some(RawState::Generators { generators: g.clone() }), None)
                    }
                    Payload::Box(BoxSpec::Pr) => (None, Some(RawBox::Named("pr".into()))),
                    Payload::Box(BoxSpec::Table(t)) => (None, Some(RawBox::Table { table: table_to_raw(t) })),
                };
                RawSource {
                    id: Some(s.id),
                    kind: s.kind,
                    particles: s.particles,
                    state,
                    box_,
                }
            })
            .collect();
        let observers = self
            .observers
            .iter()
            .map(|o| match &o.kind {
                ObserverKind::A { angle, axes } => RawObserver {
                    id: o.id.clone(),
                    kind: "A".into(),
                    angle: Some(*angle),
                    axes: axes.map(|a| [a.0.to_string(), a.1.to_string()]),
                },
                ObserverKind::B => RawObserver {
                    id: o.id.clone(),
                    kind: "B".into(),
                    angle: None,
                    axes: None,
                },
            })
            .collect();
        let ymap = match &self.setting_map {
            SettingMap::Identity => None,
            SettingMap::Observable => Some(RawSettingMap::Named("observable".into())),
            SettingMap::Explicit(m) => Some(RawSettingMap::Explicit(
                m.iter()
                    .map(|(k, t)| (k.clone(), t.iter().map(|(l, y)| (l.to_string(), y.clone())).collect()))
                    .collect(),
            )),
        };
        RawDocument {
            sources,
            routing: self
                .routing
                .iter()
                .map(|r| RawRoute {
                    particle: [r.particle.source, r.particle.emission],
                    to: r.to.clone(),
                })
                .collect(),
            observers,
            p: self.p,
            ymap,
        }
    }

    /// Canonical pretty-printed JSON document.
    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("network documents always serialize")
    }

    pub fn source(&self, id: u32) -> Option<&SourceDecl> {
        self.sources.iter().find(|s| s.id == id)
    }

    pub fn observer(&self, id: &str) -> Option<&ObserverDecl> {
        self.observers.iter().find(|o| o.id == id)
    }

    pub fn route_of(&self, particle: &ParticleLabel) -> Option<&str> {
        self.routing
            .iter()
            .find(|r| &r.particle == particle)
            .map(|r| r.to.as_str())
    }

    /// Particles routed to `observer`, in source-major order.
    pub fn particles_of(&self, observer: &str) -> Vec<ParticleLabel> {
        let mut ps: Vec<_> = self
            .routing
            .iter()
            .filter(|r| r.to == observer)
            .map(|r| r.particle)
            .collect();
        ps.sort();
        ps
    }

    /// Type-A observers ordered by the particle they hold. This fixes the bit
    /// order of `l`.
    pub fn a_observers(&self) -> Vec<&ObserverDecl> {
        let mut a: Vec<(Option<ParticleLabel>, &ObserverDecl)> = self
            .observers
            .iter()
            .filter(|o| o.is_a())
            .map(|o| (self.particles_of(&o.id).first().copied(), o))
            .collect();
        a.sort_by_key(|(p, _)| p.map(|p| (0, p)).unwrap_or((1, ParticleLabel::new(0, 0))));
        a.into_iter().map(|(_, o)| o).collect()
    }

    pub fn b_observers(&self) -> Vec<&ObserverDecl> {
        self.observers.iter().filter(|o| !o.is_a()).collect()
    }

    pub fn m_a(&self) -> usize {
        self.observers.iter().filter(|o| o.is_a()).count()
    }

    pub fn m_b(&self) -> usize {
        self.observers.len() - self.m_a()
    }

    /// Counts of classical, quantum and no-signaling sources.
    pub fn split_counts(&self) -> (usize, usize, usize) {
        let count = |k| self.sources.iter().filter(|s| s.kind == k).count();
        (
            count(SourceKind::Classical),
            count(SourceKind::Quantum),
            count(SourceKind::NoSignaling),
        )
    }

    pub fn is_fully_quantum(&self) -> bool {
        self.sources.iter().all(|s| s.kind == SourceKind::Quantum)
    }

    /// Product stabilizer state of all quantum sources, source-major roster.
    pub fn quantum_state(&self) -> Result<StabilizerState> {
        let mut state: Option<StabilizerState> = None;
        for s in self.sources.iter().filter(|s| s.kind == SourceKind::Quantum) {
            let st = s.state()?;
            state = Some(match state {
                None => st,
                Some(acc) => acc.tensor(&st)?,
            });
        }
        state.ok_or_else(|| Error::Unsupported("network has no quantum source".into()))
    }

    /// Replaces classical and no-signaling sources by Bell pairs (two
    /// particles) or GHZ states (more), keeping routing and observers.
    pub fn associated_quantum(&self) -> Result<NetworkSpec> {
        let mut spec = self.clone();
        for s in &mut spec.sources {
            if s.kind == SourceKind::Quantum {
                continue;
            }
            let state = match s.particles {
                2 => StateSpec::Bell,
                k if k > 2 => StateSpec::Ghz(k),
                _ => {
                    return Err(Error::Unsupported(format!(
                        "source {} emits a single particle and has no entangled counterpart",
                        s.id
                    )))
                }
            };
            s.kind = SourceKind::Quantum;
            s.payload = Payload::State(state);
        }
        Ok(spec)
    }

    /// Sub-network made of the listed sources, their particles and the
    /// observers receiving them.
    pub fn restrict_to_sources(&self, ids: &[u32]) -> NetworkSpec {
        let routing: Vec<Route> = self
            .routing
            .iter()
            .filter(|r| ids.contains(&r.particle.source))
            .cloned()
            .collect();
        let observers = self
            .observers
            .iter()
            .filter(|o| routing.iter().any(|r| r.to == o.id))
            .cloned()
            .collect();
        NetworkSpec {
            sources: self.sources.iter().filter(|s| ids.contains(&s.id)).cloned().collect(),
            routing,
            observers,
            p: self.p,
            setting_map: SettingMap::Identity,
        }
    }

    /// Sub-network of all sources of one kind.
    pub fn restrict_to_kind(&self, kind: SourceKind) -> NetworkSpec {
        let ids: Vec<u32> = self.sources.iter().filter(|s| s.kind == kind).map(|s| s.id).collect();
        self.restrict_to_sources(&ids)
    }

    /// Same network with type-A angles replaced, in `a_observers` order.
    pub fn with_angles(&self, angles: &[f64]) -> Result<NetworkSpec> {
        let order: Vec<String> = self.a_observers().iter().map(|o| o.id.clone()).collect();
        if order.len() != angles.len() {
            return Err(Error::LengthMismatch(format!(
                "{} angles for {} type-A observers",
                angles.len(),
                order.len()
            )));
        }
        let mut spec = self.clone();
        for (id, &theta) in order.iter().zip(angles) {
            if let Some(o) = spec.observers.iter_mut().find(|o| &o.id == id) {
                if let ObserverKind::A { angle, .. } = &mut o.kind {
                    *angle = theta;
                }
            }
        }
        Ok(spec)
    }

    /// Collapses every type-B observer into a single observer `B` measuring
    /// the joint observable.
    pub fn merge_b_observers(&self) -> NetworkSpec {
        let bs: BTreeSet<String> = self.b_observers().iter().map(|o| o.id.clone()).collect();
        if bs.len() <= 1 {
            return self.clone();
        }
        let merged = "B".to_string();
        log::info!("merging type-B observers {:?} into {merged:?}", bs);
        let mut spec = self.clone();
        spec.observers.retain(|o| o.is_a());
        spec.observers.push(ObserverDecl {
            id: merged.clone(),
            kind: ObserverKind::B,
        });
        for r in &mut spec.routing {
            if bs.contains(&r.to) {
                r.to = merged.clone();
            }
        }
        if let SettingMap::Explicit(_) = spec.setting_map {
            log::warn!("explicit setting map dropped by observer merge");
            spec.setting_map = SettingMap::Identity;
        }
        spec
    }

    /// Every structural violation; empty means valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();

        if !(self.p > 0.0 && self.p.is_finite()) {
            out.push(Diagnostic::new("p", format!("exponent p = {} must be positive", self.p)));
        }

        let mut ids = BTreeSet::new();
        for s in &self.sources {
            if !ids.insert(s.id) {
                out.push(Diagnostic::new("source", format!("duplicate source id {}", s.id)));
            }
            if s.particles == 0 {
                out.push(Diagnostic::new("source", format!("source {} emits no particles", s.id)));
            }
            match (&s.kind, &s.payload) {
                (SourceKind::Classical, Payload::None) => {}
                (SourceKind::Classical, _) => out.push(Diagnostic::new(
                    "payload",
                    format!("classical source {} carries a payload", s.id),
                )),
                (SourceKind::Quantum, Payload::State(st)) => {
                    if let StateSpec::Ghz(k) = st {
                        if *k != s.particles {
                            out.push(Diagnostic::new(
                                "payload",
                                format!("source {}: ghz:{k} on {} particles", s.id, s.particles),
                            ));
                        }
                    }
                    if let StateSpec::Bell = st {
                        if s.particles != 2 {
                            out.push(Diagnostic::new(
                                "payload",
                                format!("source {}: Bell state on {} particles", s.id, s.particles),
                            ));
                        }
                    }
                    if let Err(e) = s.state() {
                        out.push(Diagnostic::new("payload", format!("source {}: {e}", s.id)));
                    }
                }
                (SourceKind::Quantum, _) => out.push(Diagnostic::new(
                    "payload",
                    format!("quantum source {} needs a state", s.id),
                )),
                (SourceKind::NoSignaling, Payload::Box(b)) => {
                    if s.particles != 2 {
                        out.push(Diagnostic::new(
                            "payload",
                            format!("no-signaling source {} must emit 2 particles for a bipartite box", s.id),
                        ));
                    }
                    for d in nosignal::validate_ns_box(&b.resolve()) {
                        out.push(Diagnostic::new("payload", format!("source {}: {d}", s.id)));
                    }
                }
                (SourceKind::NoSignaling, _) => out.push(Diagnostic::new(
                    "payload",
                    format!("no-signaling source {} needs a box", s.id),
                )),
            }
        }

        let mut obs_ids = BTreeSet::new();
        for o in &self.observers {
            if !obs_ids.insert(o.id.as_str()) {
                out.push(Diagnostic::new("observer", format!("duplicate observer id {:?}", o.id)));
            }
        }

        // Routing must partition all emitted particles.
        let mut seen: BTreeMap<ParticleLabel, usize> = BTreeMap::new();
        for r in &self.routing {
            *seen.entry(r.particle).or_default() += 1;
            match self.source(r.particle.source) {
                Some(s) if r.particle.emission >= 1 && r.particle.emission <= s.particles => {}
                _ => out.push(Diagnostic::new(
                    "routing",
                    format!("particle {} is not emitted by any source", r.particle),
                )),
            }
            if self.observer(&r.to).is_none() {
                out.push(Diagnostic::new("routing", format!("unknown observer {:?}", r.to)));
            }
        }
        for (p, n) in &seen {
            if *n > 1 {
                out.push(Diagnostic::new("routing", format!("particle {p} routed {n} times")));
            }
        }
        for s in &self.sources {
            for j in 1..=s.particles {
                let p = ParticleLabel::new(s.id, j);
                if !seen.contains_key(&p) {
                    out.push(Diagnostic::new("routing", format!("particle {p} is not routed")));
                }
            }
        }

        let single_source = self.sources.len() == 1;
        for o in &self.observers {
            let held = self.particles_of(&o.id).len();
            match &o.kind {
                ObserverKind::A { angle, axes } => {
                    if held != 1 {
                        out.push(Diagnostic::new(
                            "n_a",
                            format!("type-A observer {} holds {held} particle(s): n_A = 1 violated", o.id),
                        ));
                    }
                    if !(*angle > 0.0 && *angle < FRAC_PI_2) {
                        out.push(Diagnostic::new(
                            "angle",
                            format!("observer {}: angle {angle} outside the open interval (0, π/2)", o.id),
                        ));
                    }
                    if let Some(a) = axes {
                        if !a.is_valid() {
                            out.push(Diagnostic::new(
                                "axes",
                                format!(
                                    "observer {}: axis criteria violated, {a} is not one of {{X,Y}}, {{Y,Z}}, {{X,Z}}",
                                    o.id
                                ),
                            ));
                        }
                    }
                }
                ObserverKind::B => {
                    // A single source is the plain two-party Bell scenario.
                    if held < 2 && !(single_source && held == 1) {
                        out.push(Diagnostic::new(
                            "n_b",
                            format!("type-B observer {} holds {held} particle(s): n_B ≥ 2 violated", o.id),
                        ));
                    }
                }
            }
        }
        if self.m_a() == 0 {
            out.push(Diagnostic::new("n_a", "network has no type-A observer (M_A = 0)"));
        }

        if let SettingMap::Explicit(m) = &self.setting_map {
            let m_a = self.m_a();
            for (obs, table) in m {
                for l in BitString::all(m_a) {
                    if !table.contains_key(&l) {
                        out.push(Diagnostic::new(
                            "ymap",
                            format!("ymap for {obs:?} has no entry for l = {l}"),
                        ));
                    }
                }
            }
        }
        out
    }

    pub fn validated(self) -> Result<NetworkSpec> {
        let diags = self.validate();
        if diags.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidNetwork(diags.into_iter().map(|d| d.to_string()).collect()))
        }
    }
}

// ---- builders ---------------------------------------------------------------

/// Star network: source `i` sends `(i,1)` to the central `B` and `(i,2)` to
/// `A_i`. Quantum sources emit Bell pairs, no-signaling sources PR boxes.
pub fn star(kinds: &[SourceKind]) -> NetworkSpec {
    let mut sources = Vec::new();
    let mut routing = Vec::new();
    let mut observers = Vec::new();
    for (k, kind) in kinds.iter().enumerate() {
        let id = k as u32 + 1;
        let payload = match kind {
            SourceKind::Classical => Payload::None,
            SourceKind::Quantum => Payload::State(StateSpec::Bell),
            SourceKind::NoSignaling => Payload::Box(BoxSpec::Pr),
        };
        sources.push(SourceDecl {
            id,
            kind: *kind,
            particles: 2,
            payload,
        });
        routing.push(Route {
            particle: ParticleLabel::new(id, 1),
            to: "B".into(),
        });
        routing.push(Route {
            particle: ParticleLabel::new(id, 2),
            to: format!("A{id}"),
        });
        observers.push(ObserverDecl {
            id: format!("A{id}"),
            kind: ObserverKind::A {
                angle: FRAC_PI_4,
                axes: None,
            },
        });
    }
    observers.push(ObserverDecl {
        id: "B".into(),
        kind: ObserverKind::B,
    });
    NetworkSpec {
        sources,
        routing,
        observers,
        p: 1.0,
        setting_map: SettingMap::Identity,
    }
}

/// Fully quantum star of `n` Bell pairs.
pub fn quantum_star(n: usize) -> NetworkSpec {
    star(&vec![SourceKind::Quantum; n])
}

/// Star split into `u` classical, `v` quantum and `w` no-signaling sources, in that order.
pub fn hybrid_star(u: usize, v: usize, w: usize) -> NetworkSpec {
    let mut kinds = vec![SourceKind::Classical; u];
    kinds.extend(vec![SourceKind::Quantum; v]);
    kinds.extend(vec![SourceKind::NoSignaling; w]);
    star(&kinds)
}

/// `n − 1` Bell sources plus a GHZ₃ source `n` whose particle `(n,1)` goes to
/// `B`, `(n,2)` to `A_n` and `(n,3)` to `A_{n+1}`. The GHZ observers measure
/// `(Y, X)`.
pub fn ghz_star(n: usize) -> NetworkSpec {
    assert!(n >= 1);
    let mut spec = quantum_star(n - 1);
    let id = n as u32;
    spec.sources.push(SourceDecl {
        id,
        kind: SourceKind::Quantum,
        particles: 3,
        payload: Payload::State(StateSpec::Ghz(3)),
    });
    spec.routing.push(Route {
        particle: ParticleLabel::new(id, 1),
        to: "B".into(),
    });
    for (j, name) in [(2, format!("A{id}")), (3, format!("A{}", id + 1))] {
        spec.routing.push(Route {
            particle: ParticleLabel::new(id, j),
            to: name.clone(),
        });
        spec.observers.insert(
            spec.observers.len() - 1,
            ObserverDecl {
                id: name,
                kind: ObserverKind::A {
                    angle: FRAC_PI_4,
                    axes: Some(AxisPair(Pauli::Y, Pauli::X)),
                },
            },
        );
    }
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_SOURCE_STAR: &str = r#"{
        "sources": [
            {"id": 1, "kind": "quantum", "particles": 2, "state": "bell"},
            {"id": 2, "kind": "quantum", "particles": 2, "state": "bell"}
        ],
        "routing": [
            {"particle": [1, 2], "to": "A1"},
            {"particle": [2, 2], "to": "A2"},
            {"particle": [1, 1], "to": "B1"},
            {"particle": [2, 1], "to": "B1"}
        ],
        "observers": [
            {"id": "A1", "type": "A"},
            {"id": "A2", "type": "A"},
            {"id": "B1", "type": "B"}
        ],
        "p": 1
    }"#;

    #[test]
    fn parses_two_bell_network() {
        let spec = NetworkSpec::parse(TWO_SOURCE_STAR).unwrap();
        assert_eq!(spec.m_a(), 2);
        assert_eq!(spec.m_b(), 1);
        assert!(spec.validate().is_empty(), "{:?}", spec.validate());
        for o in spec.a_observers() {
            assert_eq!(o.angle(), Some(FRAC_PI_4));
        }
        assert_eq!(spec.particles_of("B1").len(), 2);
    }

    #[test]
    fn ghz_payload() {
        let doc = r#"{"sources":[{"kind":"quantum","particles":3,"state":"ghz:3"}],
            "routing":[{"particle":[1,1],"to":"B"},{"particle":[1,2],"to":"A1"},{"particle":[1,3],"to":"A2"}],
            "observers":[{"id":"A1","type":"A"},{"id":"A2","type":"A"},{"id":"B","type":"B"}],"p":1}"#;
        let spec = NetworkSpec::parse(doc).unwrap();
        let state = spec.sources[0].state().unwrap();
        for g in ["-XXX", "XYY", "YXY", "YYX"] {
            let p = crate::pauli::PauliString::parse(g, state.roster().clone()).unwrap();
            assert_eq!(state.expectation(&p).unwrap(), 1, "{g}");
        }
    }

    #[test]
    fn single_particle_b_flagged() {
        let mut spec = quantum_star(2);
        // Give each source its own B observer.
        spec.observers.push(ObserverDecl {
            id: "B2".into(),
            kind: ObserverKind::B,
        });
        spec.routing[2].to = "B2".into();
        let diags = spec.validate();
        assert!(diags.iter().any(|d| d.message.contains("n_B ≥ 2 violated")), "{diags:?}");
    }

    #[test]
    fn single_source_bell_test_is_valid() {
        assert!(quantum_star(1).validate().is_empty());
    }

    #[test]
    fn axis_pair_xx_flagged() {
        let mut spec = quantum_star(1);
        spec.observers[0].kind = ObserverKind::A {
            angle: FRAC_PI_4,
            axes: Some(AxisPair(Pauli::X, Pauli::X)),
        };
        let diags = spec.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "axes");
        assert!(diags[0].message.contains("axis criteria violated"));
    }

    #[test]
    fn routing_and_angle_diagnostics() {
        let mut spec = quantum_star(2);
        spec.routing.pop();
        // (2,2) now goes to A1, leaving A2 empty, and (1,1) is routed twice.
        spec.routing.push(Route {
            particle: ParticleLabel::new(2, 2),
            to: "A1".into(),
        });
        spec.routing.push(Route {
            particle: ParticleLabel::new(1, 1),
            to: "A2".into(),
        });
        if let ObserverKind::A { angle, .. } = &mut spec.observers[0].kind {
            *angle = 0.0;
        }
        let codes: Vec<String> = spec.validate().into_iter().map(|d| d.code).collect();
        for c in ["routing", "angle", "n_a"] {
            assert!(codes.iter().any(|x| x == c), "{c} missing in {codes:?}");
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(NetworkSpec::parse("{"), Err(Error::Syntax(_))));
        let bad_ref = TWO_SOURCE_STAR.replace(r#""to": "A2""#, r#""to": "A9""#);
        assert!(NetworkSpec::parse(&bad_ref).is_err());
        let bad_src = TWO_SOURCE_STAR.replace("[2, 2]", "[7, 2]");
        assert!(NetworkSpec::parse(&bad_src).is_err());
        let bad_axis = TWO_SOURCE_STAR.replace(r#""type": "A"}"#, r#""type": "A", "axes": ["Z", "Q"]}"#);
        assert!(NetworkSpec::parse(&bad_axis).is_err());
    }

    #[test]
    fn serialize_round_trip() {
        for spec in [quantum_star(3), hybrid_star(1, 1, 1), ghz_star(2), NetworkSpec::parse(TWO_SOURCE_STAR).unwrap()] {
            let doc = spec.to_document();
            let back = NetworkSpec::parse(&doc).unwrap();
            assert_eq!(back, spec);
            assert_eq!(back.to_document(), doc);
        }
    }

    #[test]
    fn explicit_box_table() {
        let mut table = serde_json::Map::new();
        for a in ["1", "-1"] {
            for b in ["1", "-1"] {
                for x in 0..2 {
                    for y in 0..2 {
                        table.insert(format!("{a},{b}|{x},{y}"), "1/4".into());
                    }
                }
            }
        }
        let doc = serde_json::json!({
            "sources": [{"kind": "ns", "particles": 2, "box": {"table": table}}],
            "routing": [{"particle": [1,1], "to": "B"}, {"particle": [1,2], "to": "A1"}],
            "observers": [{"id": "A1", "type": "A"}, {"id": "B", "type": "B"}]
        });
        let spec = NetworkSpec::parse(&doc.to_string()).unwrap();
        assert!(spec.validate().is_empty());
        match &spec.sources[0].payload {
            Payload::Box(BoxSpec::Table(t)) if matches!(**t, NsBox::Exact(_)) => {}
            other => panic!("expected exact table, got {other:?}"),
        }
        let back = NetworkSpec::parse(&spec.to_document()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn merge_is_explicit() {
        let mut spec = quantum_star(2);
        spec.observers.push(ObserverDecl {
            id: "B2".into(),
            kind: ObserverKind::B,
        });
        spec.routing[2].to = "B2".into();
        let merged = spec.merge_b_observers();
        assert_eq!(merged.m_b(), 1);
        assert_eq!(merged.particles_of("B").len(), 2);
        assert!(merged.validate().is_empty());
    }
}
