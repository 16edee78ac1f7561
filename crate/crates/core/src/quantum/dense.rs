//! Small dense state-vector simulator used as an independent oracle.
//!
//! Qubit `k` of the roster is bit `n − 1 − k` of the basis index, so the
//! first particle is the most significant bit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, Roster, StabilizerState};

pub const DEFAULT_DENSE_CAP: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// 2×2 matrix of a single-qubit Pauli, row-major.
fn matrix(p: Pauli) -> [[Complex64; 2]; 2] {
    match p {
        Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
        Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
        Pauli::Y => [[ZERO, -I], [I, ZERO]],
        Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::ResourceGuard {
            what: "dense state qubits",
            requested: n as u128,
            limit: cap as u128,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    roster: Roster,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn from_amplitudes(roster: Roster, amps: Vec<Complex64>, cap: usize) -> Result<DenseState> {
        check_cap(roster.len(), cap)?;
        if amps.len() != 1usize << roster.len() {
            return Err(Error::LengthMismatch(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                roster.len()
            )));
        }
        let mut s = DenseState { roster, amps };
        s.normalize()?;
        Ok(s)
    }

    /// `|b_1 … b_n⟩` with the first bit on the first particle.
    pub fn basis(roster: Roster, index: usize, cap: usize) -> Result<DenseState> {
        check_cap(roster.len(), cap)?;
        let mut amps = vec![ZERO; 1 << roster.len()];
        amps[index] = ONE;
        Ok(DenseState { roster, amps })
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell(roster: Roster) -> Result<DenseState> {
        if roster.len() != 2 {
            return Err(Error::InvalidArgument("Bell state needs two qubits".into()));
        }
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Ok(DenseState {
            roster,
            amps: vec![h, ZERO, ZERO, h],
        })
    }

    /// `(|0…0⟩ − |1…1⟩)/√2`.
    pub fn ghz(roster: Roster, cap: usize) -> Result<DenseState> {
        check_cap(roster.len(), cap)?;
        let n = roster.len();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = Complex64::new(h, 0.0);
        amps[(1 << n) - 1] = Complex64::new(-h, 0.0);
        Ok(DenseState { roster, amps })
    }

    /// Projects computational basis states onto the joint +1 eigenspace of the
    /// generators until a nonzero vector appears.
    pub fn from_stabilizer(state: &StabilizerState, cap: usize) -> Result<DenseState> {
        let roster = state.roster().clone();
        check_cap(roster.len(), cap)?;
        for k in 0..1usize << roster.len() {
            let mut v = DenseState::basis(roster.clone(), k, cap)?;
            for g in state.generators() {
                let gv = v.apply(g)?;
                for (a, b) in v.amps.iter_mut().zip(&gv.amps) {
                    *a = (*a + *b) * 0.5;
                }
            }
            if v.norm() > 1e-6 {
                v.normalize()?;
                return Ok(v);
            }
        }
        Err(Error::InvalidStabilizer("generators have no common +1 eigenvector".into()))
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn num_qubits(&self) -> usize {
        self.roster.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(())
    }

    pub fn tensor(&self, other: &DenseState, cap: usize) -> Result<DenseState> {
        let roster = self.roster.concat(&other.roster)?;
        check_cap(roster.len(), cap)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(DenseState { roster, amps })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Applies a 2×2 matrix on qubit `k`.
    fn apply_single(&mut self, k: usize, m: &[[Complex64; 2]; 2]) {
        let n = self.roster.len();
        let bit = 1usize << (n - 1 - k);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// `P |self⟩`, letter by letter with the string's global phase.
    pub fn apply(&self, p: &PauliString) -> Result<DenseState> {
        let p = p.extend_to(&self.roster)?;
        let mut out = self.clone();
        for k in 0..p.len() {
            let letter = p.get(k);
            if letter != Pauli::I {
                out.apply_single(k, &matrix(letter));
            }
        }
        let phase = I.powu(p.phase_exponent() as u32);
        for a in &mut out.amps {
            *a *= phase;
        }
        Ok(out)
    }

    /// `Σ c_k P_k |self⟩`.
    pub fn apply_sum(&self, terms: &[(f64, &PauliString)]) -> Result<DenseState> {
        let mut out = DenseState {
            roster: self.roster.clone(),
            amps: vec![ZERO; self.amps.len()],
        };
        for (c, p) in terms {
            let v = self.apply(p)?;
            for (o, a) in out.amps.iter_mut().zip(&v.amps) {
                *o += a * c;
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> DenseState {
        DenseState {
            roster: self.roster.clone(),
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    pub fn sub(&self, other: &DenseState) -> DenseState {
        DenseState {
            roster: self.roster.clone(),
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a - b).collect(),
        }
    }

    /// `⟨self| P |self⟩` as a complex number.
    pub fn expectation(&self, p: &PauliString) -> Result<Complex64> {
        Ok(self.inner(&self.apply(p)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::ParticleLabel;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bell_expectations() {
        let r = Roster::for_source(1, 2);
        let bell = DenseState::bell(r.clone()).unwrap();
        for (s, want) in [("XX", 1.0), ("ZZ", 1.0), ("YY", -1.0), ("ZX", 0.0), ("IZ", 0.0)] {
            let p = PauliString::parse(s, r.clone()).unwrap();
            let e = bell.expectation(&p).unwrap();
            assert_abs_diff_eq!(e.re, want, epsilon = 1e-12);
            assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn projection_matches_explicit_states() {
        let r = Roster::for_source(1, 3);
        let stab = StabilizerState::ghz(r.clone()).unwrap();
        let projected = DenseState::from_stabilizer(&stab, 12).unwrap();
        let explicit = DenseState::ghz(r, 12).unwrap();
        assert_abs_diff_eq!(projected.inner(&explicit).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_qubit_order() {
        let r = Roster::for_source(1, 2);
        let zero = DenseState::basis(r.clone(), 0, 12).unwrap();
        let x1 = PauliString::single(r.clone(), ParticleLabel::new(1, 1), Pauli::X).unwrap();
        // X on the first particle flips the most significant bit.
        assert_eq!(zero.apply(&x1).unwrap().amplitudes()[2], ONE);
        let y = PauliString::single(r, ParticleLabel::new(1, 2), Pauli::Y).unwrap();
        assert_eq!(zero.apply(&y).unwrap().amplitudes()[1], I);
    }

    #[test]
    fn cap_enforced() {
        let r = Roster::for_source(1, 5);
        assert!(DenseState::basis(r, 0, 4).unwrap_err().is_resource_guard());
    }
}
