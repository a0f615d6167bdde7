//! Builders for syndrome-extraction gadgets.
//!
//! Conventions: a Z-type stabilizer is measured by an ancilla prepared in
//! |0> that targets the data CNOTs and is read out in Z; its flag is
//! prepared in |+>, controls the two coupling CNOTs, and is read out in X.
//! The X-type circuit is the exact dual. Flag couplings sit immediately
//! after the first and immediately before the last data CNOT, so a hook on
//! the ancilla outside that window leaves an error equivalent to weight one.

use crate::circuit::{Circuit, Gate, MeasKind, Role, Scheduler};
use crate::codes::CssCode;
use crate::pauli::{PauliOperator, PauliType};
use crate::{Error, Result};

/// One stabilizer inside a (possibly shared-flag) extraction part.
#[derive(Clone, Debug)]
pub struct PartMember {
    pub gen: PauliOperator,
    pub ty: PauliType,
    /// Data coupling order: 0-based qubit indices, a permutation of the
    /// generator's support.
    pub order: Vec<usize>,
    /// Ancilla wire.
    pub anc: usize,
    /// Generator index recorded on the syndrome measurement.
    pub syn_idx: usize,
}

impl PartMember {
    pub fn new(code: &CssCode, gen_idx: usize, order: Vec<usize>, anc: usize) -> Self {
        PartMember {
            gen: code.generators()[gen_idx].clone(),
            ty: code.generator_type(gen_idx),
            order,
            anc,
            syn_idx: gen_idx,
        }
    }

    pub fn support_order(code: &CssCode, gen_idx: usize, anc: usize) -> Self {
        let g = &code.generators()[gen_idx];
        let order = (0..g.n()).filter(|&q| g.component(q).is_some()).collect();
        Self::new(code, gen_idx, order, anc)
    }
}

/// A CNOT spliced into one member's coupling stream (flag couplings and the
/// ancilla-to-ancilla couplings of dual-ancilla parts).
#[derive(Clone, Copy, Debug)]
pub struct CrossInsert {
    /// Which member's stream carries the gate.
    pub member: usize,
    /// Number of data couplings preceding the gate.
    pub after: usize,
    pub control: usize,
    pub target: usize,
}

/// A dedicated shared flag wire.
#[derive(Clone, Copy, Debug)]
pub struct FlagSpec {
    pub wire: usize,
    /// Type of the stabilizers it guards; fixes prep and measurement basis.
    pub guards: PauliType,
    pub flag_idx: usize,
}

pub fn validate_order(gen: &PauliOperator, order: &[usize]) -> Result<()> {
    let mut support: Vec<usize> = (0..gen.n())
        .filter(|&q| gen.component(q).is_some())
        .collect();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    support.sort_unstable();
    if sorted != support {
        return Err(Error::Schedule(format!(
            "coupling order {order:?} is not a permutation of the support of {gen}"
        )));
    }
    Ok(())
}

/// Emits one extraction part into the scheduler: ancilla preps, data
/// couplings column-interleaved across members with any cross couplings
/// spliced in, then measurements.
pub fn emit_part(
    s: &mut Scheduler,
    n_data: usize,
    members: &[PartMember],
    crosses: &[CrossInsert],
    flag: Option<FlagSpec>,
) -> Result<()> {
    for m in members {
        validate_order(&m.gen, &m.order)?;
        match m.ty {
            PauliType::Z => s.prep_z(m.anc),
            PauliType::X => s.prep_x(m.anc),
        }
    }
    if let Some(f) = flag {
        match f.guards {
            // A flag guarding Z-type circuits is |+> measured in X; guarding
            // X-type circuits it is |0> measured in Z.
            PauliType::Z => s.prep_x(f.wire),
            PauliType::X => s.prep_z(f.wire),
        }
    }
    // Per-member gate streams.
    let mut streams: Vec<Vec<Gate>> = members
        .iter()
        .map(|m| {
            m.order
                .iter()
                .map(|&q| match m.ty {
                    PauliType::Z => Gate::Cnot(q, m.anc),
                    PauliType::X => Gate::Cnot(m.anc, q),
                })
                .collect()
        })
        .collect();
    // Splice crosses, deepest position first so earlier indices stay valid.
    let mut sorted: Vec<&CrossInsert> = crosses.iter().collect();
    sorted.sort_by_key(|c| std::cmp::Reverse((c.member, c.after)));
    for c in sorted {
        if c.member >= streams.len() || c.after > members[c.member].order.len() {
            return Err(Error::Schedule(format!("cross insert {c:?} out of range")));
        }
        let stream = &mut streams[c.member];
        // Find the position just after `c.after` data couplings.
        let mut seen = 0usize;
        let mut at = stream.len();
        for (i, g) in stream.iter().enumerate() {
            let is_data = matches!(g, Gate::Cnot(a, b) if *a < n_data || *b < n_data);
            if is_data {
                if seen == c.after {
                    at = i;
                    break;
                }
                seen += 1;
            }
        }
        stream.insert(at, Gate::Cnot(c.control, c.target));
    }
    // Column-interleaved emission; the greedy scheduler packs across members.
    let max_len = streams.iter().map(|v| v.len()).max().unwrap_or(0);
    for col in 0..max_len {
        for stream in &streams {
            if let Some(g) = stream.get(col) {
                s.gate(*g);
            }
        }
    }
    for m in members {
        match m.ty {
            PauliType::Z => s.meas_z(m.anc, MeasKind::Syndrome(m.syn_idx)),
            PauliType::X => s.meas_x(m.anc, MeasKind::Syndrome(m.syn_idx)),
        }
    }
    if let Some(f) = flag {
        match f.guards {
            PauliType::Z => s.meas_x(f.wire, MeasKind::Flag(f.flag_idx)),
            PauliType::X => s.meas_z(f.wire, MeasKind::Flag(f.flag_idx)),
        }
    }
    Ok(())
}

/// The standard flag-coupling window: one coupling after the first data CNOT
/// and one before the last. Degenerates to an adjacent pair for weight 2.
pub fn flag_window_inserts(members: &[PartMember], flag_wire: usize) -> Vec<CrossInsert> {
    let mut out = Vec::new();
    for (i, m) in members.iter().enumerate() {
        let w = m.order.len();
        let (control, target) = match m.ty {
            PauliType::Z => (flag_wire, m.anc),
            PauliType::X => (m.anc, flag_wire),
        };
        out.push(CrossInsert {
            member: i,
            after: 1,
            control,
            target,
        });
        out.push(CrossInsert {
            member: i,
            after: w - 1,
            control,
            target,
        });
    }
    out
}

pub fn standalone_roles(n: usize, ancillas: usize, flags: usize) -> Vec<Role> {
    let mut roles = vec![Role::Data; n];
    roles.extend(std::iter::repeat(Role::Ancilla).take(ancillas));
    roles.extend(std::iter::repeat(Role::Flag).take(flags));
    roles
}

fn standalone_member(g: &PauliOperator, anc: usize, order: Option<&[usize]>) -> Result<PartMember> {
    let ty = g
        .pure_type()
        .ok_or_else(|| Error::MixedType(g.to_string()))?;
    Ok(PartMember {
        gen: g.clone(),
        ty,
        order: order
            .map(|o| o.to_vec())
            .unwrap_or_else(|| (0..g.n()).filter(|&q| g.component(q).is_some()).collect()),
        anc,
        syn_idx: 0,
    })
}

/// Unflagged parity-measurement circuit for one stabilizer.
///
/// Z-type: ancilla PrepZ, `w` data CNOTs in support order, MeasZ. X-type is
/// the dual with CNOT directions reversed.
pub fn build_unflagged(g: &PauliOperator) -> Result<Circuit> {
    if g.weight() < 2 {
        return Err(Error::WeightTooLow(g.weight()));
    }
    let n = g.n();
    let member = standalone_member(g, n, None)?;
    let mut s = Scheduler::new(&format!("unflagged {g}"), standalone_roles(n, 1, 0), n);
    emit_part(&mut s, n, &[member], &[], None)?;
    s.finish()
}

/// Standard flagged extraction circuit for one stabilizer of weight >= 3.
///
/// `order` overrides the data coupling order (defaults to support order).
pub fn build_flagged(g: &PauliOperator, order: Option<&[usize]>) -> Result<Circuit> {
    if g.weight() < 3 {
        return Err(Error::WeightTooLow(g.weight()));
    }
    let n = g.n();
    let member = standalone_member(g, n, order)?;
    let flag = FlagSpec {
        wire: n + 1,
        guards: member.ty,
        flag_idx: 0,
    };
    let inserts = flag_window_inserts(std::slice::from_ref(&member), flag.wire);
    let mut s = Scheduler::new(&format!("flagged {g}"), standalone_roles(n, 1, 1), n);
    emit_part(&mut s, n, &[member], &inserts, Some(flag))?;
    s.finish()
}

/// Shared-flag parallel extraction: one ancilla per stabilizer, one flag
/// qubit coupled to every ancilla by a window pair, data CNOTs interleaved
/// by greedy packing.
pub fn build_shared_flag(group: &[(PauliOperator, Vec<usize>)]) -> Result<Circuit> {
    if group.is_empty() {
        return Err(Error::Schedule("empty shared-flag group".into()));
    }
    let n = group[0].0.n();
    let mut ty = None;
    for (g, _) in group {
        let t = g
            .pure_type()
            .ok_or_else(|| Error::MixedType(g.to_string()))?;
        if *ty.get_or_insert(t) != t {
            return Err(Error::MixedType(
                "shared-flag group mixes X- and Z-type stabilizers".into(),
            ));
        }
    }
    let ty = ty.unwrap();
    let mut s = Scheduler::new("shared-flag", standalone_roles(n, group.len(), 1), n);
    let members: Vec<PartMember> = group
        .iter()
        .enumerate()
        .map(|(i, (g, order))| PartMember {
            gen: g.clone(),
            ty,
            order: order.clone(),
            anc: n + i,
            syn_idx: i,
        })
        .collect();
    let flag = FlagSpec {
        wire: n + group.len(),
        guards: ty,
        flag_idx: 0,
    };
    let inserts = flag_window_inserts(&members, flag.wire);
    emit_part(&mut s, n, &members, &inserts, Some(flag))?;
    s.finish()
}

/// The two-ancilla parallel extraction of `X1X2X3X4` and `Z1Z2Z3Z4` for the
/// [[4,2,2]] code, with the two ancilla states exchanged by SWAP gates so the
/// code space is preserved and each ancilla flags the other.
///
/// Wire 4 starts as the X-parity collector (|+>), wire 5 as the Z-parity
/// collector (|0>). Couplings pair up so every data qubit meets both
/// collectors with the ancilla-ancilla couplings cancelling out:
/// X order (1,3,4,2), Z order (3,1,2,4).
pub fn build_422_parallel(code: &CssCode) -> Result<Circuit> {
    assert_eq!(code.n, 4);
    let x_gen_idx = code.x_indices()[0];
    let z_gen_idx = code.z_indices()[0];
    let roles = standalone_roles(4, 2, 0);
    let mut s = Scheduler::new("422 parallel ED", roles, 4);
    let (a, b) = (4usize, 5usize);
    s.prep_x(a);
    s.prep_z(b);
    s.cnot(a, 0);
    s.cnot(2, b);
    s.swap(a, b);
    // X state now on wire b, Z state on wire a.
    s.cnot(b, 2);
    s.cnot(0, a);
    s.cnot(b, 3);
    s.cnot(1, a);
    s.swap(a, b);
    s.cnot(a, 1);
    s.cnot(3, b);
    s.meas_x(a, MeasKind::Syndrome(x_gen_idx));
    s.meas_z(b, MeasKind::Syndrome(z_gen_idx));
    s.finish()
}

/// Unflagged extraction of several generators, one ancilla each, packed in
/// parallel (`cascade = false`) or strictly sequentially with a single
/// reused ancilla wire (`cascade = true`, the low-qubit-count layout of the
/// standard flag scheme).
pub fn build_unflagged_set(
    code: &CssCode,
    gen_indices: &[usize],
    cascade: bool,
    name: &str,
) -> Result<Circuit> {
    let n = code.n;
    let ancillas = if cascade { 1 } else { gen_indices.len() };
    let mut s = Scheduler::new(name, standalone_roles(n, ancillas, 0), n);
    if cascade {
        for &gi in gen_indices {
            let member = PartMember::support_order(code, gi, n);
            emit_part(&mut s, n, &[member], &[], None)?;
            s.barrier();
        }
    } else {
        let members: Vec<PartMember> = gen_indices
            .iter()
            .enumerate()
            .map(|(i, &gi)| PartMember::support_order(code, gi, n + i))
            .collect();
        emit_part(&mut s, n, &members, &[], None)?;
    }
    s.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::LocationKind;
    use crate::pauli::PauliOperator;

    fn zzzz() -> PauliOperator {
        PauliOperator::parse("Z1Z2Z3Z4", 4).unwrap()
    }

    #[test]
    fn unflagged_structure() {
        let c = build_unflagged(&zzzz()).unwrap();
        let census = c.census();
        assert_eq!(census.cnot, 4);
        assert_eq!(census.prep, 1);
        assert_eq!(census.meas_z, 1);
        // Two CNOTs for a weight-2 stabilizer.
        let c = build_unflagged(&PauliOperator::parse("Z1Z2", 9).unwrap()).unwrap();
        assert_eq!(c.census().cnot, 2);
        // Identity-support input rejected.
        assert!(build_unflagged(&PauliOperator::parse("Z1", 4).unwrap()).is_err());
        assert!(build_unflagged(&PauliOperator::parse("X1Z2", 4).unwrap()).is_err());
    }

    #[test]
    fn flagged_structure() {
        let c = build_flagged(&zzzz(), None).unwrap();
        let census = c.census();
        assert_eq!(census.cnot, 6); // 4 data + 2 flag couplings
        assert_eq!(census.prep, 2);
        assert_eq!(census.meas_z, 1);
        assert_eq!(census.meas_x, 1); // flag of a Z-type circuit reads out in X

        // Weight-6 X stabilizer: 6 data CNOTs + 2 flag CNOTs.
        let g7 = PauliOperator::parse("X1X2X3X4X5X6", 9).unwrap();
        let c = build_flagged(&g7, None).unwrap();
        assert_eq!(c.census().cnot, 8);

        // Weight 2 needs no flag.
        assert!(build_flagged(&PauliOperator::parse("Z1Z2", 4).unwrap(), None).is_err());
    }

    #[test]
    fn flag_couplings_bracket_the_window() {
        let c = build_flagged(&zzzz(), None).unwrap();
        // Walk CNOTs touching the ancilla (wire 4): the flag couplings must
        // be the 2nd and 5th of the six.
        let mut kinds = Vec::new();
        for step in &c.steps {
            for g in step {
                if let Gate::Cnot(a, b) = g {
                    if *a == 4 || *b == 4 {
                        kinds.push(*a == 5 || *b == 5);
                    }
                }
            }
        }
        assert_eq!(kinds, vec![false, true, false, false, true, false]);
    }

    #[test]
    fn parallel_422_census() {
        let code = crate::codes::CssCode::catalog("422").unwrap();
        let c = build_422_parallel(&code).unwrap();
        let census = c.census();
        assert_eq!(census.cnot, 8);
        assert_eq!(census.swap, 2);
        assert_eq!(census.prep, 2);
        assert_eq!(census.meas_x, 1);
        assert_eq!(census.meas_z, 1);
        assert_eq!(census.idle, 16);
        assert_eq!(census.total(), 30);
    }

    #[test]
    fn shared_flag_group_counts() {
        // The two weight-6 X stabilizers of the nine-qubit code.
        let g7 = PauliOperator::parse("X1X2X3X4X5X6", 9).unwrap();
        let g8 = PauliOperator::parse("X4X5X6X7X8X9", 9).unwrap();
        let c = build_shared_flag(&[
            (g7, vec![0, 2, 4, 3, 1, 5]),
            (g8, vec![6, 8, 4, 7, 5, 3]),
        ])
        .unwrap();
        let census = c.census();
        assert_eq!(census.cnot, 16); // 12 data + 4 flag couplings
        assert_eq!(census.prep, 3);
        let meas_locs: Vec<_> = c
            .locations()
            .iter()
            .filter(|l| matches!(l.kind, LocationKind::MeasX | LocationKind::MeasZ))
            .collect();
        assert_eq!(meas_locs.len(), 3);

        // Mixed types rejected.
        let gx = PauliOperator::parse("X1X2X3X4", 4).unwrap();
        let gz = PauliOperator::parse("Z1Z2Z3Z4", 4).unwrap();
        assert!(build_shared_flag(&[(gx, vec![0, 1, 2, 3]), (gz, vec![0, 1, 2, 3])]).is_err());

        // Bad order rejected.
        let g = PauliOperator::parse("X1X2X3X4", 4).unwrap();
        assert!(build_shared_flag(&[(g, vec![0, 1, 2, 2])]).is_err());
    }
}
