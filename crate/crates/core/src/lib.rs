//! Correlation strengths in hybrid source networks.
//!
//! A network distributes particles from classical, quantum and no-signaling
//! sources to type-A observers (one particle, two dichotomic settings) and
//! type-B observers (a joint Pauli measurement chosen by a setting string).
//! Starting from the stabilizer group of the distributed quantum state this
//! crate builds the family of segmented Bell operators `B_l`, one per
//! `M_A`-bit string `l`, and evaluates
//!
//! * the local-hidden-variable maximum of `Σ_l |⟨B_l⟩|^p` by exhaustive
//!   enumeration ([`classical`]),
//! * the quantum value on the tailored stabilizer state, with a dense
//!   state-vector oracle and sum-of-squares residuals ([`quantum`]),
//! * the no-signaling value with PR boxes ([`nosignal`]),
//! * the closed-form bounds for hybrid splits `⟨u,v,w⟩` together with the
//!   reproducibility ordering and `t`-nonlocality degree ([`hybrid`]).
//!
//! Network descriptions are JSON documents, see [`netspec`].

pub mod bits;
pub mod classical;
pub mod error;
pub mod hybrid;
pub mod netspec;
pub mod nosignal;
pub mod operators;
pub mod pauli;
pub mod quantum;

pub use bits::BitString;
pub use error::{Error, Result};
pub use netspec::{NetworkSpec, ObserverDecl, ObserverKind, SourceDecl, SourceKind};
pub use operators::{OperatorFamily, SegmentedBellOperator};
pub use pauli::{ParticleLabel, Pauli, PauliString, Roster, StabilizerState};

/// `|x|^p`, the per-term power used by every objective `Σ_l |⟨B_l⟩|^p`.
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        0.0
    } else if p == 1.0 {
        a
    } else {
        a.powf(p)
    }
}
