//! Phase-tracked generalized Pauli operators on n qudits of dimension d.
//!
//! An operator is kept in the canonical form τ^p · ∏_v X_v^{x_v} · ∏_v Z_v^{z_v}
//! with τ = e^{iπ/d}, so τ² = ω = e^{2πi/d}. Global phases live in ℤ_{2d},
//! which is enough to represent the i in the qubit iY faces and the ±1 signs
//! that show up in redundancy relations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::ChiralError;

/// Global phase as an exponent of τ = e^{iπ/d}, reduced into [0, 2d).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseExponent {
    exp: u32,
    two_d: u32,
}

impl PhaseExponent {
    pub fn new(exp: i64, d: u32) -> Self {
        let two_d = 2 * d as i64;
        PhaseExponent {
            exp: exp.rem_euclid(two_d) as u32,
            two_d: two_d as u32,
        }
    }

    pub fn zero(d: u32) -> Self {
        PhaseExponent { exp: 0, two_d: 2 * d }
    }

    /// Exponent of τ in [0, 2d).
    pub fn tau_exponent(&self) -> u32 {
        self.exp
    }

    /// Exponent of ω = τ² if the phase lies in ⟨ω⟩.
    pub fn omega_exponent(&self) -> Option<u32> {
        if self.exp % 2 == 0 {
            Some(self.exp / 2)
        } else {
            None
        }
    }

    pub fn d(&self) -> u32 {
        self.two_d / 2
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0
    }

    /// τ^d = e^{iπ} = −1 for every d.
    pub fn is_minus_one(&self) -> bool {
        self.exp == self.two_d / 2
    }

    pub fn mul(&self, other: &PhaseExponent) -> PhaseExponent {
        assert_eq!(self.two_d, other.two_d);
        PhaseExponent {
            exp: (self.exp + other.exp) % self.two_d,
            two_d: self.two_d,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        let theta = std::f64::consts::PI * self.exp as f64 / (self.two_d as f64 / 2.0);
        Complex64::new(theta.cos(), theta.sin())
    }
}

impl fmt::Debug for PhaseExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "τ^{}", self.exp)
    }
}

impl fmt::Display for PhaseExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.two_d / 2;
        if self.exp == 0 {
            write!(f, "+1")
        } else if self.exp == d {
            write!(f, "-1")
        } else {
            write!(f, "τ^{}", self.exp)
        }
    }
}

/// Generalized Pauli in canonical form. Site indexing is supplied by the
/// lattice; operators never carry lattice structure themselves.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOperator {
    d: u32,
    phase: u32, // exponent of τ, mod 2d
    x: Vec<u8>,
    z: Vec<u8>,
}

impl PauliOperator {
    pub fn identity(d: u32, n: usize) -> Self {
        assert!(d >= 2, "qudit dimension must be at least 2");
        assert!(d <= 64, "qudit dimension above 64 is not supported");
        PauliOperator {
            d,
            phase: 0,
            x: vec![0; n],
            z: vec![0; n],
        }
    }

    /// Single-site X^a Z^b at `site` with no phase.
    pub fn single(d: u32, n: usize, site: usize, a: i64, b: i64) -> Self {
        let mut op = Self::identity(d, n);
        op.x[site] = a.rem_euclid(d as i64) as u8;
        op.z[site] = b.rem_euclid(d as i64) as u8;
        op
    }

    pub fn from_exponents(d: u32, x: Vec<u8>, z: Vec<u8>, phase: i64) -> Self {
        assert_eq!(x.len(), z.len());
        let mut op = PauliOperator {
            d,
            phase: 0,
            x,
            z,
        };
        for v in op.x.iter_mut().chain(op.z.iter_mut()) {
            *v %= d as u8;
        }
        op.phase = phase.rem_euclid(2 * d as i64) as u32;
        op
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn sites(&self) -> usize {
        self.x.len()
    }

    pub fn phase(&self) -> PhaseExponent {
        PhaseExponent {
            exp: self.phase,
            two_d: 2 * self.d,
        }
    }

    pub fn x_exponent(&self, site: usize) -> u8 {
        self.x[site]
    }

    pub fn z_exponent(&self, site: usize) -> u8 {
        self.z[site]
    }

    pub fn x_vec(&self) -> &[u8] {
        &self.x
    }

    pub fn z_vec(&self) -> &[u8] {
        &self.z
    }

    /// Number of sites with (x, z) ≠ (0, 0).
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .filter(|(a, b)| **a != 0 || **b != 0)
            .count()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.x
            .iter()
            .zip(&self.z)
            .enumerate()
            .filter(|(_, (a, b))| **a != 0 || **b != 0)
            .map(|(i, _)| i)
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().all(|&a| a == 0) && self.z.iter().all(|&b| b == 0)
    }

    fn check_compatible(&self, other: &PauliOperator) -> Result<(), ChiralError> {
        if self.d != other.d {
            return Err(ChiralError::DimensionMismatch {
                left: self.d,
                right: other.d,
            });
        }
        if self.x.len() != other.x.len() {
            return Err(ChiralError::SiteCountMismatch {
                left: self.x.len(),
                right: other.x.len(),
            });
        }
        Ok(())
    }

    /// Canonical form of the operator product self·other.
    ///
    /// Moving Z^{z₁} past X^{x₂} costs ω^{z₁·x₂}, i.e. τ^{2 z₁·x₂}.
    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator, ChiralError> {
        self.check_compatible(other)?;
        let d = self.d as u32;
        let mut cross: u64 = 0;
        for i in 0..self.x.len() {
            cross += self.z[i] as u64 * other.x[i] as u64;
        }
        let cross = (cross % d as u64) as u32;
        let phase = (self.phase + other.phase + 2 * cross) % (2 * d);
        let x = self
            .x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| ((*a as u32 + *b as u32) % d) as u8)
            .collect();
        let z = self
            .z
            .iter()
            .zip(&other.z)
            .map(|(a, b)| ((*a as u32 + *b as u32) % d) as u8)
            .collect();
        Ok(PauliOperator {
            d: self.d,
            phase,
            x,
            z,
        })
    }

    /// Exponent c with self·other = ω^c other·self.
    pub fn commutation_exponent(&self, other: &PauliOperator) -> Result<u32, ChiralError> {
        self.check_compatible(other)?;
        let d = self.d as i64;
        let mut c: i64 = 0;
        for i in 0..self.x.len() {
            c += self.z[i] as i64 * other.x[i] as i64 - self.x[i] as i64 * other.z[i] as i64;
            c = c.rem_euclid(d);
        }
        Ok(c as u32)
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> Result<bool, ChiralError> {
        Ok(self.commutation_exponent(other)? == 0)
    }

    /// Canonical form of self^k for any integer k (negative k gives inverses).
    ///
    /// (τ^p X^x Z^z)^k = τ^{kp} ω^{binom(k,2)·(x·z)} X^{kx} Z^{kz}, per site.
    pub fn power(&self, k: i64) -> PauliOperator {
        let d = self.d as i64;
        let mut dot: i64 = 0;
        for i in 0..self.x.len() {
            dot = (dot + self.x[i] as i64 * self.z[i] as i64) % d;
        }
        // binom(k, 2) = k(k-1)/2 is an integer for all k
        let binom = {
            let km = k.rem_euclid(2 * d);
            km * (km - 1) / 2
        };
        let phase = (k.rem_euclid(2 * d) * self.phase as i64 + 2 * binom * dot)
            .rem_euclid(2 * d) as u32;
        let km = k.rem_euclid(d) as u32;
        let x = self.x.iter().map(|&a| ((a as u32 * km) % d as u32) as u8).collect();
        let z = self.z.iter().map(|&b| ((b as u32 * km) % d as u32) as u8).collect();
        PauliOperator {
            d: self.d,
            phase,
            x,
            z,
        }
    }

    pub fn inverse(&self) -> PauliOperator {
        self.power(-1)
    }

    /// If the operator is proportional to the identity, return the phase.
    pub fn proportional_identity_phase(&self) -> Option<PhaseExponent> {
        if self.is_identity_up_to_phase() {
            Some(self.phase())
        } else {
            None
        }
    }

    /// Restriction to a site mask: exponents kept inside, zeroed outside.
    /// The global phase is dropped (truncation is a support operation, not a
    /// group operation).
    pub fn restrict(&self, keep: &[bool]) -> PauliOperator {
        assert_eq!(keep.len(), self.x.len());
        let x = self
            .x
            .iter()
            .zip(keep)
            .map(|(a, k)| if *k { *a } else { 0 })
            .collect();
        let z = self
            .z
            .iter()
            .zip(keep)
            .map(|(b, k)| if *k { *b } else { 0 })
            .collect();
        PauliOperator {
            d: self.d,
            phase: 0,
            x,
            z,
        }
    }

    /// Embed into a larger register by a site map (old site i → map[i]).
    pub fn embed(&self, n_new: usize, map: &[usize]) -> PauliOperator {
        assert_eq!(map.len(), self.x.len());
        let mut op = PauliOperator::identity(self.d, n_new);
        op.phase = self.phase;
        for (i, &j) in map.iter().enumerate() {
            op.x[j] = self.x[i];
            op.z[j] = self.z[i];
        }
        op
    }

    /// Tensor across registers: self on sites [0, n), other appended after.
    pub fn tensor(&self, other: &PauliOperator) -> PauliOperator {
        assert_eq!(self.d, other.d);
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        let mut z = self.z.clone();
        z.extend_from_slice(&other.z);
        PauliOperator {
            d: self.d,
            phase: (self.phase + other.phase) % (2 * self.d),
            x,
            z,
        }
    }

    /// Symplectic vector (x | z) over ℤ_d, used by the code-level algebra.
    pub fn symplectic_vec(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(2 * self.x.len());
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.z);
        v
    }
}

/// Product of a sequence of operators, left to right.
pub fn product<'a>(
    ops: impl IntoIterator<Item = &'a PauliOperator>,
    d: u32,
    n: usize,
) -> Result<PauliOperator, ChiralError> {
    let mut acc = PauliOperator::identity(d, n);
    for op in ops {
        acc = acc.multiply(op)?;
    }
    Ok(acc)
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase != 0 {
            write!(f, "τ^{} ", self.phase)?;
        }
        let mut first = true;
        for i in 0..self.x.len() {
            let (a, b) = (self.x[i], self.z[i]);
            if a == 0 && b == 0 {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}:", i)?;
            if a == 1 {
                write!(f, "X")?;
            } else if a > 1 {
                write!(f, "X^{}", a)?;
            }
            if b == 1 {
                write!(f, "Z")?;
            } else if b > 1 {
                write!(f, "Z^{}", b)?;
            }
        }
        if first {
            write!(f, "I")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
