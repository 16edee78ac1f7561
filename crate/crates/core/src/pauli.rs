//! Phased Pauli strings over particle-labelled qubits and stabilizer states.
//!
//! A [`PauliString`] is `i^k · P_1 ⊗ … ⊗ P_n` stored as two bit masks
//! (`x`, `z`) and a phase exponent `k mod 4`; `Y` is the Hermitian Pauli `Y`,
//! encoded as `x = z = 1`. Qubits are addressed through a [`Roster`] of
//! [`ParticleLabel`]s so that operators built on different sub-networks can be
//! compared, extended and tensored by identity rather than by position.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 64;

/// Particle `(i, j)`: the `j`-th particle emitted by source `i` (both 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParticleLabel {
    pub source: u32,
    pub emission: u32,
}

impl ParticleLabel {
    pub const fn new(source: u32, emission: u32) -> Self {
        ParticleLabel { source, emission }
    }
}

impl fmt::Display for ParticleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.source, self.emission)
    }
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Ordered, duplicate-free list of particle labels. Cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Roster(Arc<[ParticleLabel]>);

impl Roster {
    pub fn new(labels: Vec<ParticleLabel>) -> Result<Roster> {
        if labels.len() > MAX_QUBITS {
            return Err(Error::RosterTooLarge(labels.len()));
        }
        for (k, a) in labels.iter().enumerate() {
            if labels[..k].contains(a) {
                return Err(Error::DuplicateParticle(*a));
            }
        }
        Ok(Roster(labels.into()))
    }

    /// Particles `(source, 1..=count)`.
    pub fn for_source(source: u32, count: u32) -> Roster {
        Roster((1..=count).map(|j| ParticleLabel::new(source, j)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[ParticleLabel] {
        &self.0
    }

    pub fn position(&self, label: &ParticleLabel) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    pub fn contains(&self, label: &ParticleLabel) -> bool {
        self.position(label).is_some()
    }

    pub fn is_subset_of(&self, other: &Roster) -> bool {
        self.0.iter().all(|l| other.contains(l))
    }

    /// Concatenation of two disjoint rosters.
    pub fn concat(&self, other: &Roster) -> Result<Roster> {
        let mut labels = self.0.to_vec();
        labels.extend_from_slice(&other.0);
        Roster::new(labels)
    }
}

impl fmt::Display for Roster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: u8,
    x: u64,
    z: u64,
    roster: Roster,
}

impl PauliString {
    pub fn identity(roster: Roster) -> PauliString {
        PauliString {
            phase: 0,
            x: 0,
            z: 0,
            roster,
        }
    }

    pub fn from_letters(roster: Roster, letters: &[Pauli], phase: u8) -> Result<PauliString> {
        if letters.len() != roster.len() {
            return Err(Error::PauliSyntax {
                input: letters.iter().map(|p| p.letter()).collect(),
                reason: format!("expected {} letters", roster.len()),
            });
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (k, p) in letters.iter().enumerate() {
            let (bx, bz) = p.bits();
            x |= (bx as u64) << k;
            z |= (bz as u64) << k;
        }
        Ok(PauliString {
            phase: phase % 4,
            x,
            z,
            roster,
        })
    }

    /// `P` on `label`, identity elsewhere.
    pub fn single(roster: Roster, label: ParticleLabel, pauli: Pauli) -> Result<PauliString> {
        let k = roster.position(&label).ok_or(Error::UnknownParticle(label))?;
        let (bx, bz) = pauli.bits();
        Ok(PauliString {
            phase: 0,
            x: (bx as u64) << k,
            z: (bz as u64) << k,
            roster,
        })
    }

    /// Parses `"-XXX"`, `"+ZZ"`, `"iXY"`, `"-iZ"`.
    pub fn parse(input: &str, roster: Roster) -> Result<PauliString> {
        let syntax = |reason: &str| Error::PauliSyntax {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let s = input.trim();
        let (neg, s) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (imag, s) = match s.strip_prefix('i') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let letters = s
            .chars()
            .map(|c| Pauli::from_letter(c).ok_or_else(|| syntax("letters must be I, X, Y or Z")))
            .collect::<Result<Vec<_>>>()?;
        if letters.len() != roster.len() {
            return Err(syntax(&format!("expected {} letters, got {}", roster.len(), letters.len())));
        }
        let phase = 2 * neg as u8 + imag as u8;
        PauliString::from_letters(roster, &letters, phase)
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn len(&self) -> usize {
        self.roster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roster.is_empty()
    }

    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn get(&self, k: usize) -> Pauli {
        Pauli::from_bits((self.x >> k) & 1 == 1, (self.z >> k) & 1 == 1)
    }

    pub fn at(&self, label: &ParticleLabel) -> Option<Pauli> {
        self.roster.position(label).map(|k| self.get(k))
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.len()).map(|k| self.get(k)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// `+1`/`-1` for Hermitian strings.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn with_phase(&self, phase: u8) -> PauliString {
        PauliString {
            phase: phase % 4,
            ..self.clone()
        }
    }

    pub fn negate(&self) -> PauliString {
        self.with_phase(self.phase + 2)
    }

    pub fn same_letters(&self, other: &PauliString) -> bool {
        self.roster == other.roster && self.x == other.x && self.z == other.z
    }

    fn check_roster(&self, other: &PauliString) -> Result<()> {
        if self.roster != other.roster {
            return Err(Error::RosterMismatch {
                left: self.roster.to_string(),
                right: other.roster.to_string(),
            });
        }
        Ok(())
    }

    /// Product `self · other` with exact phase.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        self.check_roster(other)?;
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        let (px, py, pz) = (x1 & !z1, x1 & z1, !x1 & z1);
        let (qx, qy, qz) = (x2 & !z2, x2 & z2, !x2 & z2);
        // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
        let plus = (px & qy) | (py & qz) | (pz & qx);
        let minus = (px & qz) | (py & qx) | (pz & qy);
        let phase = (self.phase as i64 + other.phase as i64 + plus.count_ones() as i64
            - minus.count_ones() as i64)
            .rem_euclid(4) as u8;
        Ok(PauliString {
            phase,
            x: x1 ^ x2,
            z: z1 ^ z2,
            roster: self.roster.clone(),
        })
    }

    /// True iff the symplectic inner product vanishes.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_roster(other)?;
        Ok(((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2))
    }

    /// Same operator written over a larger roster, identity on the new particles.
    pub fn extend_to(&self, roster: &Roster) -> Result<PauliString> {
        if &self.roster == roster {
            return Ok(self.clone());
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (k, label) in self.roster.labels().iter().enumerate() {
            let pos = roster.position(label).ok_or(Error::UnknownParticle(*label))?;
            x |= ((self.x >> k) & 1) << pos;
            z |= ((self.z >> k) & 1) << pos;
        }
        Ok(PauliString {
            phase: self.phase,
            x,
            z,
            roster: roster.clone(),
        })
    }

    /// Letters on a sub-roster, phase dropped.
    pub fn restrict_letters(&self, roster: &Roster) -> Result<PauliString> {
        let letters = roster
            .labels()
            .iter()
            .map(|l| self.at(l).ok_or(Error::UnknownParticle(*l)))
            .collect::<Result<Vec<_>>>()?;
        PauliString::from_letters(roster.clone(), &letters, 0)
    }

    /// `self ⊗ other` over the concatenated roster.
    pub fn tensor(&self, other: &PauliString) -> Result<PauliString> {
        let roster = self.roster.concat(&other.roster)?;
        let n = self.len();
        Ok(PauliString {
            phase: (self.phase + other.phase) % 4,
            x: self.x | other.x.checked_shl(n as u32).unwrap_or(0),
            z: self.z | other.z.checked_shl(n as u32).unwrap_or(0),
            roster,
        })
    }

    pub fn letter_string(&self) -> String {
        self.letters().iter().map(|p| p.letter()).collect()
    }

    /// `"-Z(1,1)X(2,2)"`, identities omitted.
    pub fn labeled(&self) -> String {
        let mut out = String::from(phase_prefix(self.phase));
        for (k, l) in self.roster.labels().iter().enumerate() {
            let p = self.get(k);
            if p != Pauli::I {
                out.push_str(&format!("{}{}", p.letter(), l));
            }
        }
        if self.is_identity() {
            out.push('I');
        }
        out
    }
}

fn phase_prefix(phase: u8) -> &'static str {
    match phase % 4 {
        0 => "",
        1 => "i",
        2 => "-",
        _ => "-i",
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", phase_prefix(self.phase), self.letter_string())
    }
}

pub fn pauli_mul(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    p.mul(q)
}

pub fn commutes(p: &PauliString, q: &PauliString) -> Result<bool> {
    p.commutes(q)
}

/// Pure stabilizer state given by `n` independent commuting Hermitian generators.
///
/// The generators are kept as given; a reduced row-echelon copy of the tableau
/// (columns `x_0 … x_{n-1} z_0 … z_{n-1}`, first available row as pivot) is
/// used for membership tests and group enumeration.
#[derive(Debug, Clone)]
pub struct StabilizerState {
    roster: Roster,
    generators: Vec<PauliString>,
    rows: Vec<PauliString>,
    pivots: Vec<usize>,
}

impl PartialEq for StabilizerState {
    fn eq(&self, other: &Self) -> bool {
        self.roster == other.roster && self.rows == other.rows
    }
}

fn column(p: &PauliString, c: usize) -> bool {
    let n = p.len();
    if c < n {
        (p.x >> c) & 1 == 1
    } else {
        (p.z >> (c - n)) & 1 == 1
    }
}

impl StabilizerState {
    pub fn new(roster: Roster, generators: Vec<PauliString>) -> Result<StabilizerState> {
        let n = roster.len();
        if generators.len() != n {
            return Err(Error::InvalidStabilizer(format!(
                "{} generators for {} qubits",
                generators.len(),
                n
            )));
        }
        let generators = generators
            .into_iter()
            .map(|g| g.extend_to(&roster))
            .collect::<Result<Vec<_>>>()?;
        for g in &generators {
            if !g.is_hermitian() {
                return Err(Error::InvalidStabilizer(format!("{g} has imaginary phase")));
            }
        }
        for (a, g) in generators.iter().enumerate() {
            for h in &generators[a + 1..] {
                if !g.commutes(h)? {
                    return Err(Error::InvalidStabilizer(format!("{g} and {h} anticommute")));
                }
            }
        }
        let mut rows = generators.clone();
        let mut pivots = Vec::with_capacity(n);
        let mut r = 0;
        for c in 0..2 * n {
            let Some(found) = (r..rows.len()).find(|&i| column(&rows[i], c)) else {
                continue;
            };
            rows.swap(r, found);
            for j in 0..rows.len() {
                if j != r && column(&rows[j], c) {
                    rows[j] = rows[j].mul(&rows[r])?;
                }
            }
            pivots.push(c);
            r += 1;
        }
        if r < n {
            return Err(Error::InvalidStabilizer(format!(
                "generators are dependent (rank {r} < {n})"
            )));
        }
        Ok(StabilizerState {
            roster,
            generators,
            rows,
            pivots,
        })
    }

    pub fn from_strings(roster: Roster, generators: &[&str]) -> Result<StabilizerState> {
        let gens = generators
            .iter()
            .map(|s| PauliString::parse(s, roster.clone()))
            .collect::<Result<Vec<_>>>()?;
        StabilizerState::new(roster, gens)
    }

    /// `(|00⟩ + |11⟩)/√2`, stabilized by `XX` and `ZZ`.
    pub fn bell(roster: Roster) -> Result<StabilizerState> {
        if roster.len() != 2 {
            return Err(Error::InvalidStabilizer("a Bell pair has two qubits".into()));
        }
        StabilizerState::from_strings(roster, &["XX", "ZZ"])
    }

    /// `(|0…0⟩ − |1…1⟩)/√2`, stabilized by `-X…X` and neighbouring `ZZ` pairs.
    pub fn ghz(roster: Roster) -> Result<StabilizerState> {
        let k = roster.len();
        if k < 2 {
            return Err(Error::InvalidStabilizer("GHZ states need at least two qubits".into()));
        }
        let mut gens = vec![PauliString::from_letters(roster.clone(), &vec![Pauli::X; k], 2)?];
        for j in 0..k - 1 {
            let mut letters = vec![Pauli::I; k];
            letters[j] = Pauli::Z;
            letters[j + 1] = Pauli::Z;
            gens.push(PauliString::from_letters(roster.clone(), &letters, 0)?);
        }
        StabilizerState::new(roster, gens)
    }

    /// `|0…0⟩`, stabilized by the single-qubit `Z`s.
    pub fn zeros(roster: Roster) -> Result<StabilizerState> {
        let gens = roster
            .labels()
            .iter()
            .map(|l| PauliString::single(roster.clone(), *l, Pauli::Z))
            .collect::<Result<Vec<_>>>()?;
        StabilizerState::new(roster, gens)
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn num_qubits(&self) -> usize {
        self.roster.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// Reduced row-echelon generators.
    pub fn canonical_generators(&self) -> &[PauliString] {
        &self.rows
    }

    pub fn tensor(&self, other: &StabilizerState) -> Result<StabilizerState> {
        let roster = self.roster.concat(&other.roster)?;
        let left = PauliString::identity(self.roster.clone());
        let right = PauliString::identity(other.roster.clone());
        let mut gens = Vec::with_capacity(roster.len());
        for g in &self.generators {
            gens.push(g.tensor(&right)?);
        }
        for g in &other.generators {
            gens.push(left.tensor(g)?);
        }
        StabilizerState::new(roster, gens)
    }

    /// `⟨ψ|P|ψ⟩ ∈ {−1, 0, +1}`. `P` may live on a sub-roster.
    pub fn expectation(&self, p: &PauliString) -> Result<i8> {
        let p = p.extend_to(&self.roster)?;
        if !p.is_hermitian() {
            return Err(Error::NonHermitian(p.to_string()));
        }
        for row in &self.rows {
            if !row.commutes(&p)? {
                return Ok(0);
            }
        }
        let mut acc = PauliString::identity(self.roster.clone());
        let (mut rx, mut rz) = (p.x, p.z);
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let probe = PauliString {
                phase: 0,
                x: rx,
                z: rz,
                roster: self.roster.clone(),
            };
            if column(&probe, c) {
                acc = acc.mul(row)?;
                rx ^= row.x;
                rz ^= row.z;
            }
        }
        if rx != 0 || rz != 0 {
            // A full-rank group has no commuting non-members.
            return Ok(0);
        }
        Ok(if acc.phase == p.phase { 1 } else { -1 })
    }

    pub fn contains(&self, p: &PauliString) -> Result<bool> {
        Ok(self.expectation(p)? == 1)
    }

    /// Element `Π_{k ∈ mask} row_k` of the stabilizer group.
    pub fn element(&self, mask: u64) -> PauliString {
        let mut acc = PauliString::identity(self.roster.clone());
        for (k, row) in self.rows.iter().enumerate() {
            if (mask >> k) & 1 == 1 {
                acc = acc.mul(row).expect("rows share the roster");
            }
        }
        acc
    }

    /// All `2^n` group elements, identity first, in canonical mask order.
    pub fn group_elements(&self) -> impl Iterator<Item = PauliString> + '_ {
        let n = self.rows.len() as u32;
        let count = if n >= 64 { u64::MAX } else { 1u64 << n };
        (0..count).map(move |m| self.element(m))
    }
}

/// `⟨S|P|S⟩` for a stabilizer state.
pub fn stabilizer_expectation(state: &StabilizerState, p: &PauliString) -> Result<i8> {
    state.expectation(p)
}
