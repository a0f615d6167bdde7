//! Extraction schemes: the per-code flag and parallel constructions, their
//! follow-up circuits, ex-Rec assembly, and the executor that runs scheme
//! circuits against a shared data register.
//!
//! Shipped coupling orders were found with the randomized order search and
//! certified by exhaustive single-fault enumeration; the certification tests
//! re-verify them on every run.

use crate::builders::{
    build_422_parallel, build_unflagged_set, emit_part, flag_window_inserts, standalone_roles,
    CrossInsert, FlagSpec, PartMember,
};
use crate::circuit::{Circuit, Gate, Role, Scheduler};
use crate::codes::CssCode;
use crate::decode::{Followup, RoundDriver, UnitBits};
use crate::faults::{sample_faults, FaultEvent, NoiseParams};
use crate::pauli::{PauliOperator, PauliType};
use crate::propagate::{propagate_with_frame, Frame};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Flagged extraction in cascade (one stabilizer at a time) or the parallel
/// scheme with shared flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    Flag,
    Parallel,
}

impl SchemeKind {
    pub fn parse(s: &str) -> Option<SchemeKind> {
        match s {
            "flag" => Some(SchemeKind::Flag),
            "parallel" => Some(SchemeKind::Parallel),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Flag => "flag",
            SchemeKind::Parallel => "parallel",
        }
    }
}

/// Stabilizer side a unit measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    X,
    Z,
    Mixed,
}

/// One conditionally-executed circuit of the flagged round.
#[derive(Clone)]
pub struct ExtractionUnit {
    pub circuit: Circuit,
    pub side: Side,
    /// Maps the unit's wires into the composed block wire space (for census
    /// and ex-Rec assembly; execution only shares the data wires).
    pub wire_map: Vec<usize>,
}

/// A complete syndrome-extraction scheme for one code.
#[derive(Clone)]
pub struct Scheme {
    pub code: CssCode,
    pub kind: SchemeKind,
    pub id: String,
    pub units: Vec<ExtractionUnit>,
    pub followup_complete: Circuit,
    pub followup_x: Circuit,
    pub followup_z: Circuit,
    pub total_flags: usize,
    /// Wire roles of the composed extraction block.
    block_roles: Vec<Role>,
}

impl Scheme {
    pub fn is_type_pure(&self) -> bool {
        self.units.iter().all(|u| u.side != Side::Mixed)
    }

    pub fn followup_circuit(&self, f: Followup) -> &Circuit {
        match f {
            Followup::Complete => &self.followup_complete,
            Followup::Only(PauliType::X) => &self.followup_x,
            Followup::Only(PauliType::Z) => &self.followup_z,
        }
    }

    /// The flagged round as one composed circuit (units in order, sequential
    /// parts), used for location counting and ex-Rec assembly.
    pub fn block_circuit(&self) -> Result<Circuit> {
        let mut s = Scheduler::new(
            &format!("{} extraction block", self.id),
            self.block_roles.clone(),
            self.code.n,
        );
        for unit in &self.units {
            replay(&mut s, &unit.circuit, &unit.wire_map)?;
            s.barrier();
        }
        s.finish()
    }

    /// The ex-Rec CNOT: leading extraction blocks on two codeblocks,
    /// transversal CNOTs, trailing blocks, with all idles explicit.
    pub fn build_exrec_cnot(&self) -> Result<Circuit> {
        let n = self.code.n;
        let anc = self.block_roles.len() - n;
        // Wires: block-1 data, block-2 data, block-1 ancillas, block-2 ancillas.
        let mut roles = vec![Role::Data; 2 * n];
        roles.extend_from_slice(&self.block_roles[n..]);
        roles.extend_from_slice(&self.block_roles[n..]);
        let map1: Vec<usize> = (0..n).chain(2 * n..2 * n + anc).collect();
        let map2: Vec<usize> = (n..2 * n).chain(2 * n + anc..2 * n + 2 * anc).collect();
        let mut s = Scheduler::new(&format!("{} ex-Rec CNOT", self.id), roles, 2 * n);
        for unit in &self.units {
            let m1: Vec<usize> = unit.wire_map.iter().map(|&w| map1[w]).collect();
            replay(&mut s, &unit.circuit, &m1)?;
            let m2: Vec<usize> = unit.wire_map.iter().map(|&w| map2[w]).collect();
            replay(&mut s, &unit.circuit, &m2)?;
            s.barrier();
        }
        s.barrier();
        for q in 0..n {
            s.cnot(q, n + q);
        }
        s.barrier();
        for unit in &self.units {
            let m1: Vec<usize> = unit.wire_map.iter().map(|&w| map1[w]).collect();
            replay(&mut s, &unit.circuit, &m1)?;
            let m2: Vec<usize> = unit.wire_map.iter().map(|&w| map2[w]).collect();
            replay(&mut s, &unit.circuit, &m2)?;
            s.barrier();
        }
        s.finish()
    }

    /// The transversal-CNOT stage as a standalone circuit on `2n` data wires
    /// (block 1 controls block 2).
    pub fn transversal_circuit(&self) -> Circuit {
        let n = self.code.n;
        let mut s = Scheduler::new("transversal CNOT", vec![Role::Data; 2 * n], 2 * n);
        for q in 0..n {
            s.cnot(q, n + q);
        }
        s.finish().expect("transversal layer is trivially valid")
    }
}

/// Replays a circuit's non-idle gates into a scheduler under a wire map,
/// preserving gate order (idles are regenerated by the scheduler).
fn replay(s: &mut Scheduler, c: &Circuit, map: &[usize]) -> Result<()> {
    let mut meas_cursor = 0usize;
    for step in &c.steps {
        for gate in step {
            match *gate {
                Gate::Idle(_) => {}
                Gate::PrepZ(q) => s.prep_z(map[q]),
                Gate::PrepX(q) => s.prep_x(map[q]),
                Gate::Cnot(c2, t) => s.cnot(map[c2], map[t]),
                Gate::Swap(a, b) => s.swap(map[a], map[b]),
                Gate::MeasZ(q) => {
                    s.meas_z(map[q], c.meas[meas_cursor].kind);
                    meas_cursor += 1;
                }
                Gate::MeasX(q) => {
                    s.meas_x(map[q], c.meas[meas_cursor].kind);
                    meas_cursor += 1;
                }
            }
        }
    }
    Ok(())
}

/// Shipped data-coupling orders (0-based qubit indices).
///
/// The nine-qubit orders reproduce the published flag-raised syndrome table;
/// the Steane and Reed-Muller orders were produced by the randomized search
/// and frozen here.
pub mod orders {
    /// X1..X6 stabilizer of the nine-qubit code.
    pub const SHOR_G7: [usize; 6] = [0, 2, 4, 3, 1, 5];
    /// X4..X9 stabilizer of the nine-qubit code.
    pub const SHOR_G8: [usize; 6] = [6, 8, 4, 7, 5, 3];
}

fn support(g: &PauliOperator) -> Vec<usize> {
    (0..g.n()).filter(|&q| g.component(q).is_some()).collect()
}

/// Constructs the named scheme with the shipped defaults.
pub fn build_scheme(code: &CssCode, kind: SchemeKind) -> Result<Scheme> {
    match (code.name.as_str(), kind) {
        (_, SchemeKind::Flag) => build_flag_scheme(code),
        ("422", SchemeKind::Parallel) => build_422_parallel_scheme(code),
        ("shor913", SchemeKind::Parallel) => build_shor_parallel(code),
        ("steane713", SchemeKind::Parallel) => build_steane_parallel(code, None),
        ("rm1513", SchemeKind::Parallel) => build_rm_parallel(code, None),
        (name, k) => Err(Error::UnknownScheme(k.name().into(), name.into())),
    }
}

/// The cascade flag scheme: every generator measured one at a time, weight-2
/// generators unflagged (they have no bad location), higher weights with the
/// standard flagged circuit. Two shared extra wires in total.
fn build_flag_scheme(code: &CssCode) -> Result<Scheme> {
    let n = code.n;
    let block_roles = {
        let mut r = vec![Role::Data; n];
        r.push(Role::Ancilla);
        r.push(Role::Flag);
        r
    };
    let mut units = Vec::new();
    let mut flag_count = 0usize;
    for gi in 0..code.generators().len() {
        let g = &code.generators()[gi];
        let w = g.weight();
        let ty = code.generator_type(gi);
        let order = shipped_order(code, gi);
        let mut s = Scheduler::new(
            &format!("{} C(g{})", code.name, gi + 1),
            standalone_roles(n, 1, usize::from(w >= 3)),
            n,
        );
        let member = PartMember {
            gen: g.clone(),
            ty,
            order,
            anc: n,
            syn_idx: gi,
        };
        if w >= 3 {
            let flag = FlagSpec {
                wire: n + 1,
                guards: ty,
                flag_idx: flag_count,
            };
            let inserts = flag_window_inserts(std::slice::from_ref(&member), flag.wire);
            emit_part(&mut s, n, &[member], &inserts, Some(flag))?;
            flag_count += 1;
        } else {
            emit_part(&mut s, n, &[member], &[], None)?;
        }
        let circuit = s.finish()?;
        let wire_map: Vec<usize> = (0..circuit.num_wires()).collect();
        units.push(ExtractionUnit {
            circuit,
            side: side_of(ty),
            wire_map,
        });
    }
    // Follow-ups reuse the single ancilla wire in cascade, matching the
    // scheme's low qubit count.
    let all: Vec<usize> = (0..code.generators().len()).collect();
    let followup_complete = build_unflagged_set(code, &all, true, "complete unflagged")?;
    let followup_x = build_unflagged_set(code, code.x_indices(), true, "X unflagged")?;
    let followup_z = build_unflagged_set(code, code.z_indices(), true, "Z unflagged")?;
    Ok(Scheme {
        code: code.clone(),
        kind: SchemeKind::Flag,
        id: format!("{}-flag", code.name),
        units,
        followup_complete,
        followup_x,
        followup_z,
        total_flags: flag_count,
        block_roles,
    })
}

fn side_of(ty: PauliType) -> Side {
    match ty {
        PauliType::X => Side::X,
        PauliType::Z => Side::Z,
    }
}

/// Default coupling order for one generator in the flag scheme.
fn shipped_order(code: &CssCode, gi: usize) -> Vec<usize> {
    match (code.name.as_str(), gi) {
        ("shor913", 6) => orders::SHOR_G7.to_vec(),
        ("shor913", 7) => orders::SHOR_G8.to_vec(),
        _ => support(&code.generators()[gi]),
    }
}

/// The [[4,2,2]] parallel scheme: a single two-ancilla SWAP-coupled circuit
/// measuring both stabilizers at once.
fn build_422_parallel_scheme(code: &CssCode) -> Result<Scheme> {
    let circuit = build_422_parallel(code)?;
    let block_roles = circuit.roles.clone();
    let wire_map: Vec<usize> = (0..circuit.num_wires()).collect();
    let all: Vec<usize> = (0..code.generators().len()).collect();
    Ok(Scheme {
        code: code.clone(),
        kind: SchemeKind::Parallel,
        id: "422-parallel".into(),
        units: vec![ExtractionUnit {
            circuit,
            side: Side::Mixed,
            wire_map,
        }],
        followup_complete: build_unflagged_set(code, &all, false, "complete unflagged")?,
        followup_x: build_unflagged_set(code, code.x_indices(), false, "X unflagged")?,
        followup_z: build_unflagged_set(code, code.z_indices(), false, "Z unflagged")?,
        total_flags: 0,
        block_roles,
    })
}

/// The nine-qubit parallel scheme. Part A measures the six weight-2
/// Z-stabilizers with six ancillas and no flag; Part B measures the two
/// weight-6 X-stabilizers with two ancillas and one shared flag, reusing
/// three of Part A's wires.
fn build_shor_parallel(code: &CssCode) -> Result<Scheme> {
    let n = code.n; // 9
    let block_roles = {
        let mut r = vec![Role::Data; n];
        r.extend(std::iter::repeat(Role::Ancilla).take(6));
        r
    };

    // Part A: g1..g6 unflagged in parallel, ancillas on wires 9..14.
    let mut s = Scheduler::new("shor913 part A", standalone_roles(n, 6, 0), n);
    let members: Vec<PartMember> = (0..6)
        .map(|gi| PartMember::support_order(code, gi, n + gi))
        .collect();
    emit_part(&mut s, n, &members, &[], None)?;
    let part_a = s.finish()?;
    let map_a: Vec<usize> = (0..part_a.num_wires()).collect();

    // Part B: g7, g8 with one shared flag; wires 9, 10 are the syndrome
    // ancillas and wire 11 the flag (three Part A ancillas reset and reused).
    let mut s = Scheduler::new("shor913 part B", standalone_roles(n, 2, 1), n);
    let members = vec![
        PartMember::new(code, 6, orders::SHOR_G7.to_vec(), n),
        PartMember::new(code, 7, orders::SHOR_G8.to_vec(), n + 1),
    ];
    let flag = FlagSpec {
        wire: n + 2,
        guards: PauliType::X,
        flag_idx: 0,
    };
    let inserts = flag_window_inserts(&members, flag.wire);
    emit_part(&mut s, n, &members, &inserts, Some(flag))?;
    let part_b = s.finish()?;
    let map_b: Vec<usize> = (0..part_b.num_wires()).collect();

    let all: Vec<usize> = (0..8).collect();
    Ok(Scheme {
        code: code.clone(),
        kind: SchemeKind::Parallel,
        id: "shor913-parallel".into(),
        units: vec![
            ExtractionUnit {
                circuit: part_a,
                side: Side::Z,
                wire_map: map_a,
            },
            ExtractionUnit {
                circuit: part_b,
                side: Side::X,
                wire_map: map_b,
            },
        ],
        followup_complete: build_unflagged_set(code, &all, false, "complete unflagged")?,
        followup_x: build_unflagged_set(code, code.x_indices(), false, "X unflagged")?,
        followup_z: build_unflagged_set(code, code.z_indices(), false, "Z unflagged")?,
        total_flags: 1,
        block_roles,
    })
}

/// Parameters of one dual-ancilla Steane part: coupling orders for the three
/// stabilizers and the cross-coupling placement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualAncillaPart {
    /// Generator indices (one of one type, two of the other).
    pub gens: [usize; 3],
    /// Coupling orders aligned with `gens`.
    pub orders: [Vec<usize>; 3],
    /// Which of `gens` is the cross-coupled partner of the lone-type ancilla.
    pub crossed: usize,
    /// Cross couplings sit after this many data couplings of the lone-type
    /// ancilla (window start) and before its last one (window end).
    pub window: (usize, usize),
}

/// Shipped dual-ancilla parameters for the Steane parallel scheme (searched
/// and certified; see the order-search test).
pub fn steane_default_parts() -> [DualAncillaPart; 2] {
    [
        DualAncillaPart {
            gens: [0, 1, 2],
            orders: [vec![0, 2, 4, 6], vec![1, 2, 5, 6], vec![3, 4, 5, 6]],
            crossed: 1,
            window: (1, 3),
        },
        DualAncillaPart {
            gens: [3, 4, 5],
            orders: [vec![0, 2, 4, 6], vec![1, 2, 5, 6], vec![3, 4, 5, 6]],
            crossed: 4,
            window: (1, 3),
        },
    ]
}

/// Builds the Steane parallel scheme from dual-ancilla part parameters
/// (`None` uses the shipped defaults). Each part measures three stabilizers
/// with three bare ancillas; two CNOTs couple the lone-type ancilla to one
/// partner so each flags the other's dangerous hooks.
pub fn build_steane_parallel(code: &CssCode, parts: Option<[DualAncillaPart; 2]>) -> Result<Scheme> {
    let n = code.n; // 7
    let parts = parts.unwrap_or_else(steane_default_parts);
    let block_roles = {
        let mut r = vec![Role::Data; n];
        r.extend(std::iter::repeat(Role::Ancilla).take(3));
        r
    };
    let mut units = Vec::new();
    for (pi, part) in parts.iter().enumerate() {
        let mut s = Scheduler::new(
            &format!("steane713 part {}", ['A', 'B'][pi]),
            standalone_roles(n, 3, 0),
            n,
        );
        let members: Vec<PartMember> = part
            .gens
            .iter()
            .zip(&part.orders)
            .enumerate()
            .map(|(i, (&gi, order))| PartMember::new(code, gi, order.clone(), n + i))
            .collect();
        // The lone-type member controls the crosses; its partner is `crossed`.
        let lone = lone_type_member(code, &part.gens)?;
        let partner = part
            .gens
            .iter()
            .position(|&g| g == part.crossed)
            .ok_or_else(|| Error::Config("crossed generator not in part".into()))?;
        let lone_ty = code.generator_type(part.gens[lone]);
        // Cross direction: the |+>-prepared ancilla controls. For an X-type
        // lone member that is the lone ancilla; for a Z-type lone member the
        // partner controls.
        let (control, target) = match lone_ty {
            PauliType::X => (members[lone].anc, members[partner].anc),
            PauliType::Z => (members[partner].anc, members[lone].anc),
        };
        // The window positions index the data couplings of whichever member
        // carries the crosses in its stream: always the lone member, so the
        // two crosses bracket its middle couplings.
        let crosses = [
            CrossInsert {
                member: lone,
                after: part.window.0,
                control,
                target,
            },
            CrossInsert {
                member: lone,
                after: part.window.1,
                control,
                target,
            },
        ];
        emit_part(&mut s, n, &members, &crosses, None)?;
        let circuit = s.finish()?;
        let wire_map: Vec<usize> = (0..circuit.num_wires()).collect();
        units.push(ExtractionUnit {
            circuit,
            side: Side::Mixed,
            wire_map,
        });
    }

    // Unflagged follow-ups: the parts without their crosses (separate sides
    // pack three ancillas in parallel).
    let all: Vec<usize> = (0..6).collect();
    Ok(Scheme {
        code: code.clone(),
        kind: SchemeKind::Parallel,
        id: "steane713-parallel".into(),
        units,
        followup_complete: build_unflagged_set(code, &all, false, "complete unflagged")?,
        followup_x: build_unflagged_set(code, code.x_indices(), false, "X unflagged")?,
        followup_z: build_unflagged_set(code, code.z_indices(), false, "Z unflagged")?,
        total_flags: 0,
        block_roles,
    })
}

fn lone_type_member(code: &CssCode, gens: &[usize; 3]) -> Result<usize> {
    let types: Vec<PauliType> = gens.iter().map(|&g| code.generator_type(g)).collect();
    let x_count = types.iter().filter(|t| **t == PauliType::X).count();
    let lone_ty = match x_count {
        1 => PauliType::X,
        2 => PauliType::Z,
        _ => {
            return Err(Error::Config(
                "dual-ancilla part needs one stabilizer of one type and two of the other".into(),
            ))
        }
    };
    Ok(types.iter().position(|t| *t == lone_ty).unwrap())
}

/// Shipped shared-flag groups for the [[15,1,3]] parallel scheme: the four
/// Z-parts and the X-part, with searched coupling orders.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SharedFlagGroup {
    pub gens: Vec<usize>,
    pub orders: Vec<Vec<usize>>,
}

pub fn rm_default_groups() -> Vec<SharedFlagGroup> {
    // Placeholder support orders; replaced by searched orders before
    // certification lands.
    let code = CssCode::catalog("rm1513").expect("catalog");
    let group = |gens: &[usize]| SharedFlagGroup {
        gens: gens.to_vec(),
        orders: gens
            .iter()
            .map(|&g| support(&code.generators()[g]))
            .collect(),
    };
    vec![
        group(&[0, 5, 9]),
        group(&[1, 4, 7]),
        group(&[2, 6]),
        group(&[3, 8]),
        group(&[10, 11, 12, 13]),
    ]
}

/// Builds the [[15,1,3]] parallel scheme from shared-flag groups (`None`
/// uses the shipped defaults).
pub fn build_rm_parallel(code: &CssCode, groups: Option<Vec<SharedFlagGroup>>) -> Result<Scheme> {
    let groups = groups.unwrap_or_else(rm_default_groups);
    let mut scheme = build_grouped_parallel(code, groups, "rm1513-parallel")?;
    scheme.kind = SchemeKind::Parallel;
    Ok(scheme)
}

/// Builds a parallel scheme from same-type shared-flag groups: one unit per
/// group, each with its own ancillas and one dedicated flag, run in sequence
/// with ancilla reuse.
pub fn build_grouped_parallel(
    code: &CssCode,
    groups: Vec<SharedFlagGroup>,
    id: &str,
) -> Result<Scheme> {
    let n = code.n;
    let max_anc = groups
        .iter()
        .map(|g| g.gens.len() + 1)
        .max()
        .unwrap_or(1);
    let block_roles = {
        let mut r = vec![Role::Data; n];
        r.extend(std::iter::repeat(Role::Ancilla).take(max_anc));
        r
    };
    let mut units = Vec::new();
    for (flag_idx, group) in groups.iter().enumerate() {
        let ty = code.generator_type(group.gens[0]);
        for &g in &group.gens {
            if code.generator_type(g) != ty {
                return Err(Error::MixedType(format!(
                    "group {:?} mixes stabilizer types",
                    group.gens
                )));
            }
        }
        let mut s = Scheduler::new(
            &format!("{} part {}", id, flag_idx + 1),
            standalone_roles(n, group.gens.len(), 1),
            n,
        );
        let members: Vec<PartMember> = group
            .gens
            .iter()
            .zip(&group.orders)
            .enumerate()
            .map(|(i, (&gi, order))| PartMember::new(code, gi, order.clone(), n + i))
            .collect();
        let flag = FlagSpec {
            wire: n + group.gens.len(),
            guards: ty,
            flag_idx,
        };
        let inserts = flag_window_inserts(&members, flag.wire);
        emit_part(&mut s, n, &members, &inserts, Some(flag))?;
        let circuit = s.finish()?;
        let wire_map: Vec<usize> = (0..circuit.num_wires()).collect();
        units.push(ExtractionUnit {
            circuit,
            side: side_of(ty),
            wire_map,
        });
    }
    let all: Vec<usize> = (0..code.generators().len()).collect();
    Ok(Scheme {
        code: code.clone(),
        kind: SchemeKind::Parallel,
        id: id.to_string(),
        units,
        followup_complete: build_unflagged_set(code, &all, false, "complete unflagged")?,
        followup_x: build_unflagged_set(code, code.x_indices(), false, "X unflagged")?,
        followup_z: build_unflagged_set(code, code.z_indices(), false, "Z unflagged")?,
        total_flags: groups.len(),
        block_roles,
    })
}

/// How a [`SchemeExecutor`] injects faults.
#[derive(Clone, Copy, Debug)]
pub enum NoiseMode {
    Noiseless,
    /// Independent depolarizing noise with per-circuit-execution streams
    /// derived from the trial seed.
    Sampled(NoiseParams, u64),
    /// A single injected fault in the given circuit (certification).
    Inject(CircuitUid, FaultEvent),
}

/// Stable identity of a scheme circuit for fault injection and RNG streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CircuitUid {
    Unit(usize),
    FollowupComplete,
    FollowupX,
    FollowupZ,
    Transversal,
}

impl CircuitUid {
    fn stream_tag(&self) -> u64 {
        match self {
            CircuitUid::Unit(i) => 0x10 + *i as u64,
            CircuitUid::FollowupComplete => 0x100,
            CircuitUid::FollowupX => 0x101,
            CircuitUid::FollowupZ => 0x102,
            CircuitUid::Transversal => 0x200,
        }
    }

    pub fn of_followup(f: Followup) -> CircuitUid {
        match f {
            Followup::Complete => CircuitUid::FollowupComplete,
            Followup::Only(PauliType::X) => CircuitUid::FollowupX,
            Followup::Only(PauliType::Z) => CircuitUid::FollowupZ,
        }
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Executes scheme circuits against a shared data register.
///
/// The register holds `blocks * n` data qubits; `data_offset` selects the
/// codeblock a run addresses. Fault sampling for execution `k` of circuit
/// `uid` is drawn from a stream seeded by `(trial_seed, uid, k)` alone, so a
/// trial is reproducible independent of thread scheduling and procedures
/// sharing a fault world stay aligned on common circuits.
pub struct SchemeExecutor<'a> {
    pub scheme: &'a Scheme,
    data: Frame,
    pub data_offset: usize,
    mode: NoiseMode,
    exec_counts: std::collections::HashMap<u64, u32>,
    pub faults_seen: usize,
    injected_done: bool,
    frame_scratch: Frame,
    flips_scratch: Vec<bool>,
}

impl<'a> SchemeExecutor<'a> {
    pub fn new(scheme: &'a Scheme, blocks: usize, mode: NoiseMode) -> Self {
        let n = scheme.code.n;
        let max_wires = scheme
            .units
            .iter()
            .map(|u| u.circuit.num_wires())
            .chain([
                scheme.followup_complete.num_wires(),
                scheme.followup_x.num_wires(),
                scheme.followup_z.num_wires(),
                2 * n,
            ])
            .max()
            .unwrap();
        SchemeExecutor {
            scheme,
            data: Frame::new(blocks * n),
            data_offset: 0,
            mode,
            exec_counts: std::collections::HashMap::new(),
            faults_seen: 0,
            injected_done: false,
            frame_scratch: Frame::new(max_wires),
            flips_scratch: Vec::new(),
        }
    }

    pub fn set_input(&mut self, op: &PauliOperator, offset: usize) {
        self.data.absorb(op, offset);
    }

    pub fn residual_at(&self, offset: usize) -> PauliOperator {
        self.data.extract(offset, self.scheme.code.n)
    }

    /// Runs `circuit` against the data register at the current offset.
    /// `forced_noiseless` bypasses the noise mode (ideal rounds).
    pub fn run_circuit(
        &mut self,
        circuit: &Circuit,
        uid: CircuitUid,
        forced_noiseless: bool,
    ) -> crate::propagate::FrameResult {
        let n = self.scheme.code.n;
        let faults: Vec<FaultEvent> = if forced_noiseless {
            Vec::new()
        } else {
            match &self.mode {
                NoiseMode::Noiseless => Vec::new(),
                NoiseMode::Sampled(params, trial_seed) => {
                    let count = self.exec_counts.entry(uid.stream_tag()).or_insert(0);
                    let seed = splitmix64(
                        trial_seed ^ splitmix64(uid.stream_tag() ^ ((*count as u64) << 32)),
                    );
                    *count += 1;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    sample_faults(circuit, params, &mut rng)
                }
                NoiseMode::Inject(target, fault) => {
                    if *target == uid && !self.injected_done {
                        self.injected_done = true;
                        vec![*fault]
                    } else {
                        Vec::new()
                    }
                }
            }
        };
        self.faults_seen += faults.len();
        // Load the shared data register into the scratch frame.
        let scratch = &mut self.frame_scratch;
        scratch.clear();
        for q in 0..n {
            let src = self.data_offset + q;
            if self.data.x_bit(src) {
                scratch.apply_pauli(q, crate::pauli::P::X);
            }
            if self.data.z_bit(src) {
                scratch.apply_pauli(q, crate::pauli::P::Z);
            }
        }
        let result = propagate_with_frame(circuit, &faults, scratch, &mut self.flips_scratch);
        // Write the data wires back.
        for q in 0..n {
            let dst = self.data_offset + q;
            let (sx, sz) = (scratch.x_bit(q), scratch.z_bit(q));
            if sx != self.data.x_bit(dst) {
                self.data.apply_pauli(dst, crate::pauli::P::X);
            }
            if sz != self.data.z_bit(dst) {
                self.data.apply_pauli(dst, crate::pauli::P::Z);
            }
        }
        result
    }

    /// Runs the transversal CNOT stage of the ex-Rec against the full
    /// two-block register.
    pub fn run_transversal(&mut self, circuit: &Circuit) -> crate::propagate::FrameResult {
        let saved = self.data_offset;
        self.data_offset = 0;
        let n2 = circuit.n_data;
        debug_assert_eq!(n2, 2 * self.scheme.code.n);
        let faults: Vec<FaultEvent> = match &self.mode {
            NoiseMode::Noiseless => Vec::new(),
            NoiseMode::Sampled(params, trial_seed) => {
                let uid = CircuitUid::Transversal;
                let count = self.exec_counts.entry(uid.stream_tag()).or_insert(0);
                let seed = splitmix64(
                    trial_seed ^ splitmix64(uid.stream_tag() ^ ((*count as u64) << 32)),
                );
                *count += 1;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                sample_faults(circuit, params, &mut rng)
            }
            NoiseMode::Inject(target, fault) => {
                if *target == CircuitUid::Transversal && !self.injected_done {
                    self.injected_done = true;
                    vec![*fault]
                } else {
                    Vec::new()
                }
            }
        };
        self.faults_seen += faults.len();
        let scratch = &mut self.frame_scratch;
        scratch.clear();
        for q in 0..n2 {
            if self.data.x_bit(q) {
                scratch.apply_pauli(q, crate::pauli::P::X);
            }
            if self.data.z_bit(q) {
                scratch.apply_pauli(q, crate::pauli::P::Z);
            }
        }
        let result = propagate_with_frame(circuit, &faults, scratch, &mut self.flips_scratch);
        for q in 0..n2 {
            let (sx, sz) = (scratch.x_bit(q), scratch.z_bit(q));
            if sx != self.data.x_bit(q) {
                self.data.apply_pauli(q, crate::pauli::P::X);
            }
            if sz != self.data.z_bit(q) {
                self.data.apply_pauli(q, crate::pauli::P::Z);
            }
        }
        self.data_offset = saved;
        result
    }
}

impl RoundDriver for SchemeExecutor<'_> {
    fn run_unit(&mut self, unit: usize) -> UnitBits {
        let scheme = self.scheme;
        let r = self.run_circuit(&scheme.units[unit].circuit, CircuitUid::Unit(unit), false);
        UnitBits {
            synd: r.synd_bits,
            flags: r.flag_bits,
        }
    }

    fn run_followup(&mut self, f: Followup) -> Vec<(usize, bool)> {
        let scheme = self.scheme;
        let r = self.run_circuit(scheme.followup_circuit(f), CircuitUid::of_followup(f), false);
        r.synd_bits
    }

    fn run_followup_ideal(&mut self, f: Followup) -> Vec<(usize, bool)> {
        let scheme = self.scheme;
        let r = self.run_circuit(scheme.followup_circuit(f), CircuitUid::of_followup(f), true);
        r.synd_bits
    }

    fn apply_correction(&mut self, op: &PauliOperator) {
        self.data.absorb(op, self.data_offset);
    }

    fn current_residual(&self) -> PauliOperator {
        self.residual_at(self.data_offset)
    }
}
