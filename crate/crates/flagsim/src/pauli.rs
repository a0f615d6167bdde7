//! Phase-free n-qubit Pauli operators in binary-symplectic form.
//!
//! An operator is a pair of packed bit vectors: `x_bits[i]` set means qubit
//! `i` carries an X component, `z_bits[i]` a Z component, both set means Y.
//! Global phases are dropped throughout: every circuit simulated here is
//! Clifford with Pauli faults, so measurement statistics depend only on the
//! symplectic data.
//!
//! Text rendering follows the index notation used for stabilizer generators,
//! e.g. `X2X4X6` or `Z1Z2` (1-based qubit indices). Parsing accepts optional
//! whitespace or commas between factors.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A packed bit vector of fixed length.
///
/// Lengths beyond 64 spill into additional words; every code in the catalog
/// fits in one.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64).max(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[i / 64];
        if v {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Parity of the AND with `other` (number of shared set bits mod 2).
    pub fn and_parity(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

/// Single-qubit Pauli component (identity excluded where noted).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum P {
    X,
    Y,
    Z,
}

impl P {
    pub const ALL: [P; 3] = [P::X, P::Y, P::Z];

    pub fn has_x(self) -> bool {
        matches!(self, P::X | P::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, P::Z | P::Y)
    }

    pub fn letter(self) -> char {
        match self {
            P::X => 'X',
            P::Y => 'Y',
            P::Z => 'Z',
        }
    }
}

/// The type of a pure-type Pauli operator or stabilizer generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliType {
    X,
    Z,
}

impl PauliType {
    pub fn opposite(self) -> PauliType {
        match self {
            PauliType::X => PauliType::Z,
            PauliType::Z => PauliType::X,
        }
    }
}

impl fmt::Display for PauliType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PauliType::X => write!(f, "X"),
            PauliType::Z => write!(f, "Z"),
        }
    }
}

/// An n-qubit Pauli operator modulo phase.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOperator {
    n: usize,
    x: Bits,
    z: Bits,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "operators act on at least one qubit");
        PauliOperator {
            n,
            x: Bits::zeros(n),
            z: Bits::zeros(n),
        }
    }

    /// A single-qubit Pauli embedded on qubit `q` (0-based).
    pub fn single(n: usize, q: usize, p: P) -> Self {
        let mut op = Self::identity(n);
        op.apply(q, p);
        op
    }

    /// A pure X- or Z-type operator with the given support (0-based indices).
    pub fn from_support(n: usize, ty: PauliType, support: &[usize]) -> Self {
        let mut op = Self::identity(n);
        for &q in support {
            match ty {
                PauliType::X => op.x.set(q, true),
                PauliType::Z => op.z.set(q, true),
            }
        }
        op
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> &Bits {
        &self.x
    }

    pub fn z_bits(&self) -> &Bits {
        &self.z
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x.get(q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z.get(q)
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Multiplies the component of `p` onto qubit `q` (phase dropped).
    pub fn apply(&mut self, q: usize, p: P) {
        if p.has_x() {
            self.x.flip(q);
        }
        if p.has_z() {
            self.z.flip(q);
        }
    }

    /// The component on qubit `q`, or `None` for identity.
    pub fn component(&self, q: usize) -> Option<P> {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => None,
            (true, false) => Some(P::X),
            (true, true) => Some(P::Y),
            (false, true) => Some(P::Z),
        }
    }

    /// Number of qubits with a non-identity component.
    pub fn weight(&self) -> usize {
        self.x
            .words
            .iter()
            .zip(&self.z.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Group product modulo phase: componentwise XOR of both bit vectors.
    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        out.x.xor_assign(&other.x);
        out.z.xor_assign(&other.z);
        Ok(out)
    }

    pub fn mul_assign(&mut self, other: &PauliOperator) {
        assert_eq!(self.n, other.n);
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    /// True iff the symplectic inner product
    /// `sum_i (p.x[i] q.z[i] + p.z[i] q.x[i])` is even.
    pub fn commutes(&self, other: &PauliOperator) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        Ok(!(self.x.and_parity(&other.z) ^ self.z.and_parity(&other.x)))
    }

    /// The X-type part (Z components dropped).
    pub fn x_part(&self) -> PauliOperator {
        PauliOperator {
            n: self.n,
            x: self.x.clone(),
            z: Bits::zeros(self.n),
        }
    }

    /// The Z-type part (X components dropped).
    pub fn z_part(&self) -> PauliOperator {
        PauliOperator {
            n: self.n,
            x: Bits::zeros(self.n),
            z: self.z.clone(),
        }
    }

    /// The part of the given type.
    pub fn part(&self, ty: PauliType) -> PauliOperator {
        match ty {
            PauliType::X => self.x_part(),
            PauliType::Z => self.z_part(),
        }
    }

    /// `Some(type)` when the operator is non-identity and purely X or Z.
    pub fn pure_type(&self) -> Option<PauliType> {
        match (self.x.is_zero(), self.z.is_zero()) {
            (false, true) => Some(PauliType::X),
            (true, false) => Some(PauliType::Z),
            _ => None,
        }
    }

    /// Restricts to the first `m` qubits.
    pub fn truncated(&self, m: usize) -> PauliOperator {
        let mut out = PauliOperator::identity(m);
        for q in 0..m {
            if let Some(p) = self.component(q) {
                out.apply(q, p);
            }
        }
        out
    }

    /// Parses the index notation, e.g. `X2X4X6`, `Z1 Z2`, or `I` for the
    /// identity. Indices are 1-based and must not exceed `n`.
    pub fn parse(s: &str, n: usize) -> Result<PauliOperator> {
        let mut op = PauliOperator::identity(n);
        let mut chars = s.chars().peekable();
        let mut saw_factor = false;
        while let Some(c) = chars.next() {
            if c.is_whitespace() || c == ',' || c == '*' {
                continue;
            }
            if c == 'I' || c == 'i' {
                saw_factor = true;
                continue;
            }
            let p = match c {
                'X' | 'x' => P::X,
                'Y' | 'y' => P::Y,
                'Z' | 'z' => P::Z,
                _ => return Err(Error::Parse(format!("unexpected character `{c}` in `{s}`"))),
            };
            let mut digits = String::new();
            while let Some(d) = chars.peek() {
                if d.is_ascii_digit() {
                    digits.push(*d);
                    chars.next();
                } else {
                    break;
                }
            }
            if digits.is_empty() {
                return Err(Error::Parse(format!("missing qubit index after `{c}` in `{s}`")));
            }
            let idx: usize = digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad index `{digits}`")))?;
            if idx == 0 || idx > n {
                return Err(Error::Parse(format!(
                    "qubit index {idx} out of range 1..={n} in `{s}`"
                )));
            }
            op.apply(idx - 1, p);
            saw_factor = true;
        }
        if !saw_factor {
            return Err(Error::Parse(format!("empty Pauli string `{s}`")));
        }
        Ok(op)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        for q in 0..self.n {
            if let Some(p) = self.component(q) {
                write!(f, "{}{}", p.letter(), q + 1)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An ordered syndrome bit vector, one bit per generator; bit order is fixed
/// by the generator list it was computed against.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syndrome {
    bits: u32,
    len: u8,
}

impl Syndrome {
    pub fn zero(len: usize) -> Self {
        assert!(len <= 32);
        Syndrome { bits: 0, len: len as u8 }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = Syndrome::zero(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// Parses a bit string such as `111100` (leftmost character = bit 0).
    pub fn parse(s: &str) -> Result<Syndrome> {
        let mut out = Syndrome::zero(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => out.set(i, true),
                _ => return Err(Error::Parse(format!("bad syndrome string `{s}`"))),
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        self.bits >> i & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len());
        if v {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn xor(&self, other: &Syndrome) -> Syndrome {
        debug_assert_eq!(self.len, other.len);
        Syndrome {
            bits: self.bits ^ other.bits,
            len: self.len,
        }
    }

    /// Concatenates `self` followed by `other`.
    pub fn concat(&self, other: &Syndrome) -> Syndrome {
        let mut out = Syndrome::zero(self.len() + other.len());
        for i in 0..self.len() {
            out.set(i, self.get(i));
        }
        for i in 0..other.len() {
            out.set(self.len() + i, other.get(i));
        }
        out
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Syndrome of `e` against an ordered generator list: bit `i` is set iff `e`
/// anticommutes with `generators[i]`.
pub fn syndrome_of(e: &PauliOperator, generators: &[PauliOperator]) -> Result<Syndrome> {
    let mut s = Syndrome::zero(generators.len());
    for (i, g) in generators.iter().enumerate() {
        s.set(i, !e.commutes(g)?);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xp(n: usize, support: &[usize]) -> PauliOperator {
        PauliOperator::from_support(n, PauliType::X, support)
    }

    fn zp(n: usize, support: &[usize]) -> PauliOperator {
        PauliOperator::from_support(n, PauliType::Z, support)
    }

    #[test]
    fn commutation_basics() {
        let x1 = PauliOperator::single(2, 0, P::X);
        let z1 = PauliOperator::single(2, 0, P::Z);
        assert!(!x1.commutes(&z1).unwrap());
        let x12 = xp(2, &[0, 1]);
        let z12 = zp(2, &[0, 1]);
        assert!(x12.commutes(&z12).unwrap());
        assert!(x12.commutes(&x12).unwrap());
        assert!(x12.commutes(&PauliOperator::identity(2)).unwrap());
    }

    #[test]
    fn anticommuting_hook_example() {
        // X on qubits 2..6 of the nine-qubit code against Z1Z2 flips the first
        // syndrome bit.
        let e = xp(9, &[1, 2, 3, 4, 5]);
        let g = zp(9, &[0, 1]);
        assert!(!e.commutes(&g).unwrap());
    }

    #[test]
    fn multiply_is_phase_free_group_product() {
        let x1 = PauliOperator::single(3, 0, P::X);
        let z1 = PauliOperator::single(3, 0, P::Z);
        let y1 = PauliOperator::single(3, 0, P::Y);
        assert_eq!(x1.multiply(&z1).unwrap(), y1);

        let a = xp(3, &[0, 1]);
        let b = xp(3, &[1, 2]);
        assert_eq!(a.multiply(&b).unwrap(), xp(3, &[0, 2]));

        let id = PauliOperator::identity(3);
        let z12 = zp(3, &[0, 1]);
        assert_eq!(z12.multiply(&id).unwrap(), z12);
        assert!(z12.multiply(&z12).unwrap().is_identity());
    }

    #[test]
    fn weight_counts_nonidentity_sites() {
        assert_eq!(PauliOperator::identity(5).weight(), 0);
        let mut op = PauliOperator::identity(5);
        op.apply(0, P::X);
        op.apply(1, P::Y);
        op.apply(2, P::Z);
        assert_eq!(op.weight(), 3);
        assert_eq!(zp(4, &[0, 1, 2, 3]).weight(), 4);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = PauliOperator::identity(3);
        let b = PauliOperator::identity(4);
        assert!(a.commutes(&b).is_err());
        assert!(a.multiply(&b).is_err());
    }

    #[test]
    fn syndrome_against_shor_z_generators() {
        // Z-pair generators of the nine-qubit code in listed order.
        let zgens: Vec<_> = [[0, 1], [1, 2], [3, 4], [4, 5], [6, 7], [7, 8]]
            .iter()
            .map(|s| zp(9, s))
            .collect();
        let e = xp(9, &[1, 3, 5]); // X2 X4 X6 in 1-based notation
        assert_eq!(syndrome_of(&e, &zgens).unwrap().to_string(), "111100");
        let e = xp(9, &[3, 4, 5, 7]); // X4 X5 X6 X8
        assert_eq!(syndrome_of(&e, &zgens).unwrap().to_string(), "000011");
        let id = PauliOperator::identity(9);
        assert!(syndrome_of(&id, &zgens).unwrap().is_zero());
    }

    #[test]
    fn parse_and_render_index_notation() {
        let op = PauliOperator::parse("X2 X4 X6", 9).unwrap();
        assert_eq!(op, xp(9, &[1, 3, 5]));
        assert_eq!(op.to_string(), "X2X4X6");
        let op = PauliOperator::parse("Z1Z2", 9).unwrap();
        assert_eq!(op, zp(9, &[0, 1]));
        let op = PauliOperator::parse("I", 4).unwrap();
        assert!(op.is_identity());
        assert_eq!(op.to_string(), "I");
        let y = PauliOperator::parse("Y3", 4).unwrap();
        assert_eq!(y.component(2), Some(P::Y));
        assert!(PauliOperator::parse("X0", 4).is_err());
        assert!(PauliOperator::parse("X5", 4).is_err());
        assert!(PauliOperator::parse("Q1", 4).is_err());
    }

    #[test]
    fn multiword_operators_work_past_64_qubits() {
        let n = 130;
        let mut op = PauliOperator::identity(n);
        op.apply(0, P::X);
        op.apply(64, P::Y);
        op.apply(129, P::Z);
        assert_eq!(op.weight(), 3);
        let other = PauliOperator::single(n, 64, P::Z);
        assert!(!op.commutes(&other).unwrap());
        assert_eq!(op.multiply(&op).unwrap(), PauliOperator::identity(n));
    }
}
