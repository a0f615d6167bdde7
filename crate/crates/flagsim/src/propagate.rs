//! Pauli-frame propagation of fault sets through a Clifford circuit.
//!
//! A frame is a pair of packed bit vectors over the circuit's wires. Input
//! errors and faults XOR into the frame; each gate conjugates it (CNOT:
//! `X_c -> X_c X_t`, `Z_t -> Z_c Z_t`; SWAP exchanges components; prep resets
//! the wire). Measurement outcomes are deterministic functions of the frame:
//! a Z measurement reads the X component, an X measurement the Z component,
//! XOR any measurement-flip faults. No state is simulated; inputs are
//! codewords, circuits are Clifford, and noise is Pauli, so this is exact.

use crate::circuit::{Circuit, Gate, MeasBasis, MeasKind};
use crate::faults::{FaultEffect, FaultEvent};
use crate::pauli::{PauliOperator, P};

/// Mutable Pauli frame over a circuit's wires.
#[derive(Clone)]
pub struct Frame {
    x: Vec<u64>,
    z: Vec<u64>,
    wires: usize,
}

impl Frame {
    pub fn new(wires: usize) -> Self {
        let words = wires.div_ceil(64).max(1);
        Frame {
            x: vec![0; words],
            z: vec![0; words],
            wires,
        }
    }

    #[inline]
    fn get(v: &[u64], q: usize) -> bool {
        v[q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn flip(v: &mut [u64], q: usize) {
        v[q / 64] ^= 1 << (q % 64);
    }

    pub fn x_bit(&self, q: usize) -> bool {
        Self::get(&self.x, q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        Self::get(&self.z, q)
    }

    pub fn clear(&mut self) {
        self.x.fill(0);
        self.z.fill(0);
    }

    pub fn apply_pauli(&mut self, q: usize, p: P) {
        if p.has_x() {
            Self::flip(&mut self.x, q);
        }
        if p.has_z() {
            Self::flip(&mut self.z, q);
        }
    }

    /// XORs an operator onto wires `offset..offset+op.n()`.
    pub fn absorb(&mut self, op: &PauliOperator, offset: usize) {
        for q in 0..op.n() {
            if op.x_bit(q) {
                Self::flip(&mut self.x, offset + q);
            }
            if op.z_bit(q) {
                Self::flip(&mut self.z, offset + q);
            }
        }
    }

    /// Extracts wires `offset..offset+n` as an operator.
    pub fn extract(&self, offset: usize, n: usize) -> PauliOperator {
        let mut op = PauliOperator::identity(n);
        for q in 0..n {
            match (Self::get(&self.x, offset + q), Self::get(&self.z, offset + q)) {
                (false, false) => {}
                (true, false) => op.apply(q, P::X),
                (true, true) => op.apply(q, P::Y),
                (false, true) => op.apply(q, P::Z),
            }
        }
        op
    }

    #[inline]
    fn reset_wire(&mut self, q: usize) {
        self.x[q / 64] &= !(1 << (q % 64));
        self.z[q / 64] &= !(1 << (q % 64));
    }

    #[inline]
    fn conj_gate(&mut self, gate: &Gate) {
        match *gate {
            Gate::Cnot(c, t) => {
                if Self::get(&self.x, c) {
                    Self::flip(&mut self.x, t);
                }
                if Self::get(&self.z, t) {
                    Self::flip(&mut self.z, c);
                }
            }
            Gate::Swap(a, b) => {
                let (xa, za) = (Self::get(&self.x, a), Self::get(&self.z, a));
                let (xb, zb) = (Self::get(&self.x, b), Self::get(&self.z, b));
                if xa != xb {
                    Self::flip(&mut self.x, a);
                    Self::flip(&mut self.x, b);
                }
                if za != zb {
                    Self::flip(&mut self.z, a);
                    Self::flip(&mut self.z, b);
                }
            }
            Gate::PrepZ(q) | Gate::PrepX(q) => self.reset_wire(q),
            Gate::MeasZ(_) | Gate::MeasX(_) | Gate::Idle(_) => {}
        }
    }

    pub fn wires(&self) -> usize {
        self.wires
    }
}

/// Outcome of propagating one circuit: residual data error, raw measurement
/// outcomes, and the same bits split into syndrome and flag vectors.
#[derive(Clone, Debug)]
pub struct FrameResult {
    /// Frame restricted to the data wires after the last step.
    pub residual: PauliOperator,
    /// One bit per measurement, in canonical circuit order (`false` = +1).
    pub outcomes: Vec<bool>,
    /// (generator index, bit) for each syndrome measurement.
    pub synd_bits: Vec<(usize, bool)>,
    /// (flag index, bit) for each flag measurement.
    pub flag_bits: Vec<(usize, bool)>,
}

impl FrameResult {
    pub fn any_flag(&self) -> bool {
        self.flag_bits.iter().any(|(_, b)| *b)
    }

    pub fn any_syndrome(&self) -> bool {
        self.synd_bits.iter().any(|(_, b)| *b)
    }

    pub fn any_bit(&self) -> bool {
        self.outcomes.iter().any(|b| *b)
    }
}

/// Propagates `faults` (sorted by location index) through `c`.
///
/// `input` is an error already present on the data wires when the circuit
/// starts; `frame` is the working buffer, which must span at least
/// `c.num_wires()` wires and is left holding the final frame (callers that
/// chain circuits on a shared data register read it back out).
pub fn propagate_with_frame(
    c: &Circuit,
    faults: &[FaultEvent],
    frame: &mut Frame,
    flips_scratch: &mut Vec<bool>,
) -> FrameResult {
    debug_assert!(faults.windows(2).all(|w| w[0].loc <= w[1].loc));
    let locs = c.locations();
    let mut cursor = 0usize;
    let mut outcomes = Vec::with_capacity(c.meas.len());
    // Pending measurement flips, indexed like `outcomes`.
    flips_scratch.clear();
    flips_scratch.resize(c.meas.len(), false);
    let mut meas_count = 0usize;
    let mut loc_counter = 0usize;
    let mut meas_idx_of_loc: Vec<(usize, usize)> = Vec::new(); // (loc idx, meas idx)

    for (si, step) in c.steps.iter().enumerate() {
        for gate in step {
            match gate {
                Gate::MeasZ(q) => {
                    meas_idx_of_loc.push((loc_counter, meas_count));
                    outcomes.push(frame.x_bit(*q));
                    meas_count += 1;
                }
                Gate::MeasX(q) => {
                    meas_idx_of_loc.push((loc_counter, meas_count));
                    outcomes.push(frame.z_bit(*q));
                    meas_count += 1;
                }
                g => frame.conj_gate(g),
            }
            loc_counter += 1;
        }
        // Faults attach after the gates of their step.
        while cursor < faults.len() && locs[faults[cursor].loc].step as usize == si {
            match faults[cursor].effect {
                FaultEffect::Single { wire, p } => frame.apply_pauli(wire as usize, p),
                FaultEffect::Two { a, pa, b, pb } => {
                    if let Some(p) = pa {
                        frame.apply_pauli(a as usize, p);
                    }
                    if let Some(p) = pb {
                        frame.apply_pauli(b as usize, p);
                    }
                }
                FaultEffect::MeasFlip => {
                    let loc = faults[cursor].loc;
                    let mi = meas_idx_of_loc
                        .iter()
                        .rev()
                        .find(|(l, _)| *l == loc)
                        .map(|(_, m)| *m)
                        .expect("measurement flip fault on a measurement location");
                    outcomes[mi] ^= true;
                }
            }
            cursor += 1;
        }
    }
    debug_assert_eq!(cursor, faults.len(), "fault on nonexistent location");

    let residual = frame.extract(0, c.n_data);
    let mut synd_bits = Vec::new();
    let mut flag_bits = Vec::new();
    for (m, &bit) in c.meas.iter().zip(&outcomes) {
        match m.kind {
            MeasKind::Syndrome(i) => synd_bits.push((i, bit)),
            MeasKind::Flag(i) => flag_bits.push((i, bit)),
        }
    }
    let _ = MeasBasis::Z; // basis is consumed during outcome computation
    FrameResult {
        residual,
        outcomes,
        synd_bits,
        flag_bits,
    }
}

/// Pure single-circuit propagation starting from an empty (or given) frame.
pub fn propagate(c: &Circuit, faults: &[FaultEvent], input: Option<&PauliOperator>) -> FrameResult {
    let mut frame = Frame::new(c.num_wires());
    if let Some(e) = input {
        frame.absorb(e, 0);
    }
    let mut scratch = Vec::new();
    propagate_with_frame(c, faults, &mut frame, &mut scratch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{MeasKind, Role, Scheduler};
    use crate::faults::enumerate_single_faults;
    use crate::pauli::{PauliType, P};

    /// One CNOT on two data wires, no measurements.
    fn single_cnot() -> Circuit {
        let mut s = Scheduler::new("cx", vec![Role::Data, Role::Data], 2);
        s.cnot(0, 1);
        s.finish().unwrap()
    }

    #[test]
    fn cnot_conjugation_table_exhaustive() {
        // All 16 two-qubit Paulis through one CNOT, against the standard
        // table computed by symplectic arithmetic.
        let c = single_cnot();
        let ps = [None, Some(P::X), Some(P::Y), Some(P::Z)];
        for pa in ps {
            for pb in ps {
                let mut input = PauliOperator::identity(2);
                if let Some(p) = pa {
                    input.apply(0, p);
                }
                if let Some(p) = pb {
                    input.apply(1, p);
                }
                let out = propagate(&c, &[], Some(&input)).residual;
                // Expected: x_t ^= x_c, z_c ^= z_t.
                let mut expect = PauliOperator::identity(2);
                let (xc, zc) = (input.x_bit(0), input.z_bit(0));
                let (xt, zt) = (input.x_bit(1), input.z_bit(1));
                if xc {
                    expect.apply(0, P::X);
                }
                if zc ^ zt {
                    expect.apply(0, P::Z);
                }
                if xt ^ xc {
                    expect.apply(1, P::X);
                }
                if zt {
                    expect.apply(1, P::Z);
                }
                assert_eq!(out, expect, "CNOT conjugation of {input}");
            }
        }
    }

    /// Flagged measurement of Z1Z2Z3Z4: ancilla |0> collects the parity, the
    /// flag |+> brackets the middle CNOTs.
    fn flagged_zzzz() -> Circuit {
        let roles = vec![
            Role::Data,
            Role::Data,
            Role::Data,
            Role::Data,
            Role::Ancilla,
            Role::Flag,
        ];
        let mut s = Scheduler::new("fz", roles, 4);
        s.prep_z(4);
        s.prep_x(5);
        s.cnot(0, 4);
        s.cnot(5, 4);
        s.cnot(1, 4);
        s.cnot(2, 4);
        s.cnot(5, 4);
        s.cnot(3, 4);
        s.meas_z(4, MeasKind::Syndrome(0));
        s.meas_x(5, MeasKind::Flag(0));
        s.finish().unwrap()
    }

    #[test]
    fn hook_fault_triggers_flag_and_leaves_z3z4() {
        let c = flagged_zzzz();
        // A Z on the ancilla right after the second data CNOT (the bad
        // location of the unflagged circuit).
        let loc = c
            .locations()
            .iter()
            .position(|l| {
                l.kind == crate::circuit::LocationKind::Cnot
                    && l.a == 1 // CNOT(d2 -> ancilla)
            })
            .unwrap();
        let fault = FaultEvent {
            loc,
            effect: FaultEffect::Two {
                a: 1,
                pa: None,
                b: 4,
                pb: Some(P::Z),
            },
        };
        let r = propagate(&c, &[fault], None);
        assert_eq!(
            r.residual,
            PauliOperator::from_support(4, PauliType::Z, &[2, 3])
        );
        assert_eq!(r.flag_bits, vec![(0, true)]);
        assert_eq!(r.synd_bits, vec![(0, false)]);
    }

    #[test]
    fn noiseless_run_is_all_zero() {
        let c = flagged_zzzz();
        let r = propagate(&c, &[], None);
        assert!(r.residual.is_identity());
        assert!(!r.any_bit());
    }

    #[test]
    fn input_error_reads_out_as_syndrome() {
        let c = flagged_zzzz();
        let x1 = PauliOperator::single(4, 0, P::X);
        let r = propagate(&c, &[], Some(&x1));
        assert_eq!(r.synd_bits, vec![(0, true)]);
        assert_eq!(r.flag_bits, vec![(0, false)]);
        assert_eq!(r.residual, x1);
    }

    #[test]
    fn linearity_over_disjoint_fault_sets() {
        let c = flagged_zzzz();
        let all = enumerate_single_faults(&c);
        // Pick two faults at different locations and compare the XOR of the
        // individual runs with the joint run.
        for step in [3usize, 17, 31] {
            let a = all[step % all.len()];
            let b = all[(step * 7 + 5) % all.len()];
            if a.loc == b.loc {
                continue;
            }
            let (first, second) = if a.loc <= b.loc { (a, b) } else { (b, a) };
            let ra = propagate(&c, &[first], None);
            let rb = propagate(&c, &[second], None);
            let rj = propagate(&c, &[first, second], None);
            assert_eq!(
                rj.residual,
                ra.residual.multiply(&rb.residual).unwrap(),
                "residuals multiply"
            );
            for i in 0..rj.outcomes.len() {
                assert_eq!(rj.outcomes[i], ra.outcomes[i] ^ rb.outcomes[i]);
            }
        }
    }

    #[test]
    fn measurement_flip_only_touches_outcome() {
        let c = flagged_zzzz();
        let loc = c
            .locations()
            .iter()
            .position(|l| l.kind == crate::circuit::LocationKind::MeasZ)
            .unwrap();
        let r = propagate(
            &c,
            &[FaultEvent {
                loc,
                effect: FaultEffect::MeasFlip,
            }],
            None,
        );
        assert!(r.residual.is_identity());
        assert_eq!(r.synd_bits, vec![(0, true)]);
    }

    #[test]
    fn swap_exchanges_frames() {
        let mut s = Scheduler::new("swap", vec![Role::Data, Role::Data], 2);
        s.swap(0, 1);
        let c = s.finish().unwrap();
        let input = PauliOperator::single(2, 0, P::Y);
        let r = propagate(&c, &[], Some(&input));
        assert_eq!(r.residual, PauliOperator::single(2, 1, P::Y));
    }
}
