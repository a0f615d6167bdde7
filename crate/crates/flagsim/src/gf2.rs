//! GF(2) linear algebra on packed symplectic rows.
//!
//! Pauli operators map to rows of 2n bits (x-half then z-half). Stabilizer
//! group membership is decided by rank comparison: `e` is in the group iff
//! appending its row to the generator matrix does not increase the rank.

use crate::pauli::PauliOperator;

/// A single packed row of a binary matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Row {
    pub words: Vec<u64>,
    pub len: usize,
}

impl Row {
    pub fn zeros(len: usize) -> Self {
        Row {
            words: vec![0; len.div_ceil(64).max(1)],
            len,
        }
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &Row) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn leading_one(&self) -> Option<usize> {
        for (wi, w) in self.words.iter().enumerate() {
            if *w != 0 {
                return Some(wi * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }
}

/// The symplectic row of a Pauli operator: x bits in positions `0..n`,
/// z bits in `n..2n`.
pub fn symplectic_row(p: &PauliOperator) -> Row {
    let n = p.n();
    let mut row = Row::zeros(2 * n);
    for q in 0..n {
        if p.x_bit(q) {
            row.set(q);
        }
        if p.z_bit(q) {
            row.set(n + q);
        }
    }
    row
}

/// A row-echelon basis maintained incrementally. Rows are kept reduced so
/// membership tests are a single reduction pass.
#[derive(Clone)]
pub struct EchelonBasis {
    rows: Vec<Row>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new() -> Self {
        EchelonBasis {
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn from_rows(rows: impl IntoIterator<Item = Row>) -> Self {
        let mut basis = Self::new();
        for r in rows {
            basis.insert(r);
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the basis; returns the remainder.
    pub fn reduce(&self, mut row: Row) -> Row {
        for (r, &p) in self.rows.iter().zip(&self.pivots) {
            if row.get(p) {
                row.xor_assign(r);
            }
        }
        row
    }

    /// True iff `row` is in the span.
    pub fn contains(&self, row: Row) -> bool {
        self.reduce(row).is_zero()
    }

    /// Inserts `row` if independent; returns whether the rank grew.
    pub fn insert(&mut self, row: Row) -> bool {
        let rem = self.reduce(row);
        match rem.leading_one() {
            None => false,
            Some(p) => {
                // Back-reduce existing rows so the basis stays fully reduced.
                for r in self.rows.iter_mut() {
                    if r.get(p) {
                        r.xor_assign(&rem);
                    }
                }
                let at = self.pivots.partition_point(|&q| q < p);
                self.rows.insert(at, rem);
                self.pivots.insert(at, p);
                true
            }
        }
    }
}

impl Default for EchelonBasis {
    fn default() -> Self {
        Self::new()
    }
}

/// Rank of a list of Pauli operators viewed as symplectic rows.
pub fn symplectic_rank(ops: &[PauliOperator]) -> usize {
    EchelonBasis::from_rows(ops.iter().map(symplectic_row)).rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliOperator, PauliType};

    fn zp(n: usize, s: &[usize]) -> PauliOperator {
        PauliOperator::from_support(n, PauliType::Z, s)
    }

    #[test]
    fn rank_and_membership() {
        let gens = vec![zp(4, &[0, 1]), zp(4, &[1, 2]), zp(4, &[2, 3])];
        let basis = EchelonBasis::from_rows(gens.iter().map(symplectic_row));
        assert_eq!(basis.rank(), 3);
        // Z1Z3 = (Z1Z2)(Z2Z3) is in the span; Z1 alone is not.
        assert!(basis.contains(symplectic_row(&zp(4, &[0, 2]))));
        assert!(!basis.contains(symplectic_row(&zp(4, &[0]))));
    }

    #[test]
    fn dependent_insert_does_not_grow() {
        let mut basis = EchelonBasis::new();
        assert!(basis.insert(symplectic_row(&zp(3, &[0, 1]))));
        assert!(basis.insert(symplectic_row(&zp(3, &[1, 2]))));
        assert!(!basis.insert(symplectic_row(&zp(3, &[0, 2]))));
        assert_eq!(basis.rank(), 2);
    }
}
