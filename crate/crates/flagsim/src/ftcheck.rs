//! Exhaustive single-fault certification, flag lookup-table generation, and
//! the randomized order search for shared-flag parallel circuits.
//!
//! A location is bad relative to a committed decoding procedure: a single
//! fault is injected, the full conditional procedure runs noiselessly, one
//! more ideal correction round resolves deferred weight-1 residuals, and the
//! final frame is classified. Certification passes when no fault ends
//! logical and every flag-raised key maps to one residual coset.

use crate::circuit::{Circuit, Gate, LocationKind, MeasKind};
use crate::codes::{CssCode, ResidualClass};
use crate::decode::{
    run_procedure, Action, Collision, DecodingTables, Followup, Mode, Procedure, RoundDriver,
    TableCtx,
};
use crate::faults::{enumerate_single_faults, FaultEffect, FaultEvent};
use crate::gf2::{symplectic_row, EchelonBasis};
use crate::pauli::{PauliOperator, PauliType, P};
use crate::scheme::{CircuitUid, NoiseMode, Scheme, SchemeExecutor, SchemeKind};
use crate::{Error, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

/// One row of an exported fault table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaultTableRow {
    pub fault_id: usize,
    pub circuit: String,
    pub location: String,
    pub effect: String,
    pub residual: String,
    /// Syndrome bits observed during the flagged round, generator order.
    pub m: String,
    /// Flag bits observed during the flagged round.
    pub f: String,
    /// Follow-up syndrome, when a follow-up ran (generator order, `-` for
    /// unmeasured generators).
    pub m_prime: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BadLocation {
    pub circuit: String,
    pub location: String,
    pub effect: String,
    pub residual: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BudgetLine {
    pub group: String,
    pub sum: usize,
    pub limit: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BCountLine {
    pub generator: String,
    pub weight: usize,
    pub count: usize,
}

/// Verdict of exhaustive single-fault certification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub scheme: String,
    pub procedure: String,
    pub mode: String,
    pub pass: bool,
    pub bad_locations: Vec<BadLocation>,
    /// Proposition-3 uniqueness: no two inequivalent residuals behind one
    /// flag-raised key.
    pub uniqueness: bool,
    pub collisions: Vec<Collision>,
    pub b_counts: Vec<BCountLine>,
    pub budget: Vec<BudgetLine>,
    pub faults_checked: usize,
}

/// A scheme together with the tables and certificate produced by [`certify`].
#[derive(Clone)]
pub struct CertifiedScheme {
    pub scheme: Scheme,
    pub procedure: Procedure,
    pub mode: Mode,
    pub tables: DecodingTables,
    pub certificate: Certificate,
}

/// Number of distinct fault classes of a single-flag circuit that trigger
/// its flag: flag-raising single faults are grouped by the stabilizer-group
/// coset of the type-relevant part of their residual, and nontrivial cosets
/// are counted.
pub fn b_count(c: &Circuit, code: &CssCode) -> Result<usize> {
    let flag_meas: Vec<_> = c
        .meas
        .iter()
        .filter(|m| matches!(m.kind, MeasKind::Flag(_)))
        .collect();
    if flag_meas.len() != 1 {
        return Err(Error::BadCircuit(format!(
            "b_count needs exactly one flag qubit, found {}",
            flag_meas.len()
        )));
    }
    let ty = circuit_stab_type(c, code)?;
    let basis = stabilizer_basis(code);
    let mut classes = std::collections::BTreeSet::new();
    for fault in enumerate_single_faults(c) {
        let r = crate::propagate::propagate(c, &[fault], None);
        if !r.flag_bits.iter().any(|(_, b)| *b) {
            continue;
        }
        let part = r.residual.part(ty);
        let reduced = basis.reduce(symplectic_row(&part));
        if !reduced.is_zero() {
            classes.insert(reduced.words);
        }
    }
    Ok(classes.len())
}

fn stabilizer_basis(code: &CssCode) -> EchelonBasis {
    EchelonBasis::from_rows(code.generators().iter().map(symplectic_row))
}

/// The stabilizer type a circuit's syndrome measurements address (must be
/// uniform). An X-type parity collector reads out in the X basis.
fn circuit_stab_type(c: &Circuit, _code: &CssCode) -> Result<PauliType> {
    let mut ty = None;
    for m in &c.meas {
        if let MeasKind::Syndrome(_) = m.kind {
            let t = match m.basis {
                crate::circuit::MeasBasis::X => PauliType::X,
                crate::circuit::MeasBasis::Z => PauliType::Z,
            };
            if *ty.get_or_insert(t) != t {
                return Err(Error::MixedType(format!(
                    "circuit {} measures both types",
                    c.name
                )));
            }
        }
    }
    ty.ok_or_else(|| Error::BadCircuit("no syndrome measurement".into()))
}

/// Proposition-3 budget check for a same-type shared-flag group: the summed
/// flag-triggering class counts must fit the opposite side's syndrome space.
pub fn check_budget(
    code: &CssCode,
    group: &[(usize, Vec<usize>)],
) -> Result<BudgetLine> {
    let mut ty = None;
    let mut sum = 0usize;
    let mut label = Vec::new();
    for (gi, order) in group {
        let t = code.generator_type(*gi);
        if *ty.get_or_insert(t) != t {
            return Err(Error::MixedType("budget check on a mixed-type group".into()));
        }
        label.push(format!("g{}", gi + 1));
        let g = &code.generators()[*gi];
        if g.weight() >= 3 {
            let c = crate::builders::build_flagged(g, Some(order))?;
            sum += b_count(&c, code)?;
        }
    }
    let limit_bits = match ty.unwrap() {
        PauliType::X => code.num_z(),
        PauliType::Z => code.num_x(),
    };
    let limit = 1usize << limit_bits;
    Ok(BudgetLine {
        group: label.join(","),
        ok: sum <= limit,
        sum,
        limit,
    })
}

/// Everything certification injects: single location failures in every
/// scheme circuit plus every weight-1 input data error.
enum Injection {
    Fault(CircuitUid, FaultEvent),
    Input(PauliOperator),
}

fn scheme_circuits(scheme: &Scheme) -> Vec<(CircuitUid, &Circuit)> {
    let mut v: Vec<(CircuitUid, &Circuit)> = scheme
        .units
        .iter()
        .enumerate()
        .map(|(i, u)| (CircuitUid::Unit(i), &u.circuit))
        .collect();
    v.push((CircuitUid::FollowupComplete, &scheme.followup_complete));
    v.push((CircuitUid::FollowupX, &scheme.followup_x));
    v.push((CircuitUid::FollowupZ, &scheme.followup_z));
    v
}

fn injections(scheme: &Scheme) -> Vec<Injection> {
    let mut out = Vec::new();
    for (uid, c) in scheme_circuits(scheme) {
        for fault in enumerate_single_faults(c) {
            out.push(Injection::Fault(uid, fault));
        }
    }
    for q in 0..scheme.code.n {
        for p in P::ALL {
            out.push(Injection::Input(PauliOperator::single(scheme.code.n, q, p)));
        }
    }
    out
}

fn describe_location(c: &Circuit, loc_idx: usize) -> String {
    let loc = c.locations()[loc_idx];
    let kind = match loc.kind {
        LocationKind::Prep => "prep",
        LocationKind::MeasX => "meas_x",
        LocationKind::MeasZ => "meas_z",
        LocationKind::Cnot => "cnot",
        LocationKind::Swap => "swap",
        LocationKind::Idle => "idle",
    };
    if loc.a == loc.b {
        format!("step {} {} q{}", loc.step, kind, loc.a)
    } else {
        format!("step {} {} q{} q{}", loc.step, kind, loc.a, loc.b)
    }
}

/// Exhaustively certifies a scheme under one procedure and mode, building
/// the flag lookup tables along the way.
///
/// Every single fault is injected in turn; the procedure runs noiselessly
/// around it, one additional ideal round resolves deferred weight-1
/// residuals, and the final frame is classified. In correction mode, missing
/// lookup keys self-register from the exact residual and key conflicts are
/// reported as uniqueness violations.
pub fn certify(scheme: &Scheme, procedure: Procedure, mode: Mode) -> Result<CertifiedScheme> {
    Ok(certify_with_table(scheme, procedure, mode, false)?.0)
}

pub fn certify_with_table(
    scheme: &Scheme,
    procedure: Procedure,
    mode: Mode,
    collect_rows: bool,
) -> Result<(CertifiedScheme, Vec<FaultTableRow>)> {
    if mode == Mode::Detect && procedure != Procedure::Detect {
        return Err(Error::Config(
            "detection mode uses the detect procedure".into(),
        ));
    }
    let code = &scheme.code;
    let mut tables = DecodingTables::lookup0_for(code);
    let mut collisions: Vec<Collision> = Vec::new();
    let mut bad = Vec::new();
    let mut rows = Vec::new();
    let all = injections(scheme);
    let n_faults = all.len();

    for (fault_id, inj) in all.iter().enumerate() {
        let noise = match inj {
            Injection::Fault(uid, ev) => NoiseMode::Inject(*uid, *ev),
            Injection::Input(_) => NoiseMode::Noiseless,
        };
        let mut exec = SchemeExecutor::new(scheme, 1, noise);
        if let Injection::Input(e) = inj {
            exec.set_input(e, 0);
        }
        let outcome = run_procedure(
            scheme,
            procedure,
            &mut exec,
            if mode == Mode::Correct {
                TableCtx::Learn {
                    tables: &mut tables,
                    collisions: &mut collisions,
                }
            } else {
                TableCtx::Use(&tables)
            },
            true,
        );
        // Trailing ideal round.
        let verdict_bad = match mode {
            Mode::Correct => {
                let bits = exec.run_followup_ideal(Followup::Complete);
                let corr = tables.lookup0(code, Followup::Complete, &bits);
                if let Some(c) = corr {
                    exec.apply_correction(&c);
                }
                matches!(
                    code.classify_residual(&exec.residual_at(0)),
                    ResidualClass::Logical | ResidualClass::Detectable
                )
            }
            Mode::Detect => {
                if outcome.action == Action::Discard {
                    false
                } else {
                    let bits = exec.run_followup_ideal(Followup::Complete);
                    if bits.iter().any(|(_, b)| *b) {
                        false // caught and discarded by the next round
                    } else {
                        code.classify_residual(&exec.residual_at(0)) == ResidualClass::Logical
                    }
                }
            }
        };
        if verdict_bad {
            bad.push(describe_injection(scheme, inj));
        }
        if collect_rows {
            if let Injection::Fault(uid, ev) = inj {
                rows.push(make_row(scheme, fault_id, *uid, ev, procedure, &tables));
            }
        }
    }

    // Structural extras: per-stabilizer flag-class counts and budgets.
    let b_counts = scheme_b_counts(scheme)?;
    let budget = scheme_budgets(scheme)?;
    let uniqueness = collisions.is_empty();
    let pass = bad.is_empty() && uniqueness && budget.iter().all(|b| b.ok);
    let certificate = Certificate {
        scheme: scheme.id.clone(),
        procedure: procedure.name().into(),
        mode: mode.name().into(),
        pass,
        bad_locations: bad,
        uniqueness,
        collisions,
        b_counts,
        budget,
        faults_checked: n_faults,
    };
    Ok((
        CertifiedScheme {
            scheme: scheme.clone(),
            procedure,
            mode,
            tables,
            certificate,
        },
        rows,
    ))
}

fn describe_injection(scheme: &Scheme, inj: &Injection) -> BadLocation {
    match inj {
        Injection::Fault(uid, ev) => {
            let c = circuit_of(scheme, *uid);
            BadLocation {
                circuit: c.name.clone(),
                location: describe_location(c, ev.loc),
                effect: ev.effect.to_string(),
                residual: String::new(),
            }
        }
        Injection::Input(e) => BadLocation {
            circuit: "input".into(),
            location: "input".into(),
            effect: e.to_string(),
            residual: String::new(),
        },
    }
}

fn circuit_of(scheme: &Scheme, uid: CircuitUid) -> &Circuit {
    match uid {
        CircuitUid::Unit(i) => &scheme.units[i].circuit,
        CircuitUid::FollowupComplete => &scheme.followup_complete,
        CircuitUid::FollowupX => &scheme.followup_x,
        CircuitUid::FollowupZ => &scheme.followup_z,
        CircuitUid::Transversal => unreachable!("transversal is not a scheme circuit"),
    }
}

/// One fault-table row: the fault propagated through its own circuit in
/// isolation (bits as the flagged round sees them) plus the follow-up
/// syndrome of its residual.
fn make_row(
    scheme: &Scheme,
    fault_id: usize,
    uid: CircuitUid,
    ev: &FaultEvent,
    procedure: Procedure,
    tables: &DecodingTables,
) -> FaultTableRow {
    let _ = tables;
    let code = &scheme.code;
    let c = circuit_of(scheme, uid);
    let r = crate::propagate::propagate(c, &[*ev], None);
    let n_gens = code.generators().len();
    let mut m = vec!['-'; n_gens];
    for (g, b) in &r.synd_bits {
        m[*g] = if *b { '1' } else { '0' };
    }
    let mut f = vec!['0'; scheme.total_flags.max(1)];
    for (i, b) in &r.flag_bits {
        if *i < f.len() {
            f[*i] = if *b { '1' } else { '0' };
        }
    }
    // Follow-up syndrome of the residual: the separate opposite-type
    // extraction for CSS procedures, complete otherwise.
    let m_prime = {
        let s = code.syndrome(&r.residual).expect("residual on data");
        let mut out = vec!['-'; n_gens];
        let complete = procedure == Procedure::Alg1 || procedure == Procedure::Detect;
        for (pos, bit) in (0..n_gens).map(|g| (g, s.get(g))) {
            let ty = code.generator_type(pos);
            let include = complete
                || match circuit_stab_type(c, code) {
                    Ok(t) => ty == t.opposite(),
                    Err(_) => true,
                };
            if include {
                out[pos] = if bit { '1' } else { '0' };
            }
        }
        out.into_iter().collect()
    };
    FaultTableRow {
        fault_id,
        circuit: c.name.clone(),
        location: describe_location(c, ev.loc),
        effect: ev.effect.to_string(),
        residual: r.residual.to_string(),
        m: m.into_iter().collect(),
        f: f.into_iter().collect(),
        m_prime,
    }
}

fn scheme_b_counts(scheme: &Scheme) -> Result<Vec<BCountLine>> {
    let code = &scheme.code;
    let mut out = Vec::new();
    for (gi, g) in code.generators().iter().enumerate() {
        if g.weight() < 3 {
            continue;
        }
        let order = scheme_order_of(scheme, gi);
        let c = crate::builders::build_flagged(g, order.as_deref())?;
        out.push(BCountLine {
            generator: format!("g{}", gi + 1),
            weight: g.weight(),
            count: b_count(&c, code)?,
        });
    }
    Ok(out)
}

/// Recovers the data coupling order of generator `gi` from the scheme's
/// circuits by following the ancilla state's worldline (SWAP-aware).
fn scheme_order_of(scheme: &Scheme, gi: usize) -> Option<Vec<usize>> {
    let n = scheme.code.n;
    for unit in &scheme.units {
        for state in ancilla_states(&unit.circuit) {
            if state.meas != MeasKind::Syndrome(gi) {
                continue;
            }
            let order: Vec<usize> = state
                .couplings
                .iter()
                .filter_map(|&(loc_idx, wire)| {
                    let loc = unit.circuit.locations()[loc_idx];
                    let other = if loc.a == wire { loc.b } else { loc.a };
                    ((other as usize) < n).then_some(other as usize)
                })
                .collect();
            if !order.is_empty() {
                return Some(order);
            }
        }
    }
    None
}

fn scheme_budgets(scheme: &Scheme) -> Result<Vec<BudgetLine>> {
    let code = &scheme.code;
    let mut out = Vec::new();
    if scheme.kind != SchemeKind::Parallel {
        return Ok(out);
    }
    for unit in &scheme.units {
        // Shared-flag units only: one flag measurement plus >= 1 stabilizer.
        let has_flag = unit
            .circuit
            .meas
            .iter()
            .any(|m| matches!(m.kind, MeasKind::Flag(_)));
        if !has_flag {
            continue;
        }
        let gens: Vec<usize> = unit
            .circuit
            .meas
            .iter()
            .filter_map(|m| match m.kind {
                MeasKind::Syndrome(g) => Some(g),
                MeasKind::Flag(_) => None,
            })
            .collect();
        let group: Vec<(usize, Vec<usize>)> = gens
            .iter()
            .map(|&g| (g, scheme_order_of(scheme, g).unwrap_or_default()))
            .collect();
        out.push(check_budget(code, &group)?);
    }
    Ok(out)
}

/// Detection-mode parallel measurement of every same-type generator behind
/// one shared flag.
pub fn ed_parallel_all(code: &CssCode, ty: PauliType) -> Result<Circuit> {
    let gens: Vec<usize> = (0..code.generators().len())
        .filter(|&g| code.generator_type(g) == ty)
        .collect();
    let group: Vec<(PauliOperator, Vec<usize>)> = gens
        .iter()
        .map(|&g| {
            let op = code.generators()[g].clone();
            let order = (0..code.n).filter(|&q| op.component(q).is_some()).collect();
            (op, order)
        })
        .collect();
    crate::builders::build_shared_flag(&group)
}

/// Wraps a single-type all-generator circuit in an ad-hoc scheme so it can
/// run through detection certification.
pub fn ed_parallel_all_scheme(code: &CssCode, ty: PauliType) -> Result<Scheme> {
    let gens: Vec<usize> = (0..code.generators().len())
        .filter(|&g| code.generator_type(g) == ty)
        .collect();
    let orders: Vec<Vec<usize>> = gens
        .iter()
        .map(|&g| {
            let op = &code.generators()[g];
            (0..code.n).filter(|&q| op.component(q).is_some()).collect()
        })
        .collect();
    let groups = vec![crate::scheme::SharedFlagGroup {
        gens: gens.clone(),
        orders,
    }];
    crate::scheme::build_grouped_parallel(code, groups, &format!("{}-ed-parallel-{}", code.name, ty))
}

/// Result of the randomized order search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub orders: Vec<Vec<usize>>,
    pub iterations: u64,
    pub seed: u64,
}

/// Finds coupling orders for a same-type shared-flag group such that every
/// flag-triggering fault class has a unique, nonzero opposite-type syndrome.
///
/// Starts from the given (or in-support) orders and perturbs the data-CNOT
/// order of one or two randomly chosen members per iteration, keeping the
/// best attempt. The budget precondition is checked first.
pub fn algorithm2_search(
    code: &CssCode,
    gens: &[usize],
    seed: u64,
    max_iters: u64,
) -> Result<SearchOutcome> {
    let support = |gi: usize| -> Vec<usize> {
        let g = &code.generators()[gi];
        (0..code.n).filter(|&q| g.component(q).is_some()).collect()
    };
    let mut orders: Vec<Vec<usize>> = gens.iter().map(|&g| support(g)).collect();
    let budget = check_budget(
        code,
        &gens
            .iter()
            .cloned()
            .zip(orders.iter().cloned())
            .collect::<Vec<_>>(),
    )?;
    if !budget.ok {
        return Err(Error::BudgetExceeded(budget.sum, budget.limit.trailing_zeros() as usize));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut best_collisions = usize::MAX;
    let mut best_orders = orders.clone();
    for iter in 0..max_iters {
        let collisions = group_syndrome_collisions(code, gens, &orders)?;
        if collisions == 0 {
            return Ok(SearchOutcome {
                orders,
                iterations: iter,
                seed,
            });
        }
        if collisions < best_collisions {
            best_collisions = collisions;
            best_orders = orders.clone();
        }
        // Randomly adjust the orders of a subset of the members: one or two
        // members get a random transposition each.
        orders = best_orders.clone();
        let k = 1 + rng.gen_range(0..2usize.min(gens.len()));
        for _ in 0..k {
            let m = rng.gen_range(0..orders.len());
            let w = orders[m].len();
            if w >= 2 {
                let i = rng.gen_range(0..w);
                let j = rng.gen_range(0..w);
                orders[m].swap(i, j);
            }
        }
    }
    Err(Error::SearchExhausted(max_iters, best_collisions))
}

/// Number of identification conflicts among the flag-triggering classes of a
/// shared-flag group: distinct residual cosets must have distinct
/// opposite-type syndromes, and nontrivial cosets need a nonzero syndrome.
pub fn group_syndrome_collisions(
    code: &CssCode,
    gens: &[usize],
    orders: &[Vec<usize>],
) -> Result<usize> {
    let group: Vec<(PauliOperator, Vec<usize>)> = gens
        .iter()
        .zip(orders)
        .map(|(&g, o)| (code.generators()[g].clone(), o.clone()))
        .collect();
    let c = crate::builders::build_shared_flag(&group)?;
    let ty = code.generator_type(gens[0]);
    let basis = stabilizer_basis(code);
    let mut by_class: std::collections::BTreeMap<Vec<u64>, PauliOperator> =
        std::collections::BTreeMap::new();
    for fault in enumerate_single_faults(&c) {
        let r = crate::propagate::propagate(&c, &[fault], None);
        if !r.flag_bits.iter().any(|(_, b)| *b) {
            continue;
        }
        let part = r.residual.part(ty);
        let reduced = basis.reduce(symplectic_row(&part));
        by_class.entry(reduced.words.clone()).or_insert(part);
    }
    let mut seen = std::collections::BTreeMap::new();
    let mut collisions = 0usize;
    for (class, rep) in &by_class {
        let s = match ty {
            PauliType::X => code.syndrome_z_gens(rep)?,
            PauliType::Z => code.syndrome_x_gens(rep)?,
        };
        let trivial = class.iter().all(|w| *w == 0);
        if trivial {
            continue;
        }
        if s.is_zero() {
            collisions += 1; // indistinguishable from no error
            continue;
        }
        if seen.insert(s, class.clone()).is_some() {
            collisions += 1;
        }
    }
    Ok(collisions)
}

/// Canonical gap positions of one ancilla state: the post-prep location and
/// the location of each of its couplings, on the wire the state occupied
/// there (SWAP gates move states across wires without counting as
/// couplings).
#[derive(Clone, Debug)]
pub struct AncillaStateInfo {
    pub meas: MeasKind,
    pub prep_loc: usize,
    pub prep_wire: u16,
    /// (location index, wire the state occupied) per coupling in order.
    pub couplings: Vec<(usize, u16)>,
}

pub fn ancilla_states(c: &Circuit) -> Vec<AncillaStateInfo> {
    #[derive(Clone)]
    struct Open {
        prep_loc: usize,
        prep_wire: u16,
        couplings: Vec<(usize, u16)>,
    }
    let mut wire_state: Vec<Option<usize>> = vec![None; c.num_wires()];
    let mut open: Vec<Open> = Vec::new();
    let mut done: Vec<AncillaStateInfo> = Vec::new();
    let mut meas_cursor = 0usize;
    let mut loc = 0usize;
    for step in &c.steps {
        for gate in step {
            match *gate {
                Gate::PrepZ(q) | Gate::PrepX(q) => {
                    wire_state[q] = Some(open.len());
                    open.push(Open {
                        prep_loc: loc,
                        prep_wire: q as u16,
                        couplings: Vec::new(),
                    });
                }
                Gate::Cnot(a, b) => {
                    for q in [a, b] {
                        if let Some(sid) = wire_state[q] {
                            open[sid].couplings.push((loc, q as u16));
                        }
                    }
                }
                Gate::Swap(a, b) => {
                    wire_state.swap(a, b);
                }
                Gate::MeasZ(q) | Gate::MeasX(q) => {
                    if let Some(sid) = wire_state[q].take() {
                        let o = open[sid].clone();
                        done.push(AncillaStateInfo {
                            meas: c.meas[meas_cursor].kind,
                            prep_loc: o.prep_loc,
                            prep_wire: o.prep_wire,
                            couplings: o.couplings,
                        });
                    }
                    meas_cursor += 1;
                }
                Gate::Idle(_) => {}
            }
            loc += 1;
        }
    }
    done
}

/// A single-qubit Pauli fault placed at one canonical gap of an ancilla
/// state: gap 0 sits after the preparation, gap `k >= 1` immediately after
/// the state's k-th coupling.
pub fn gap_fault(c: &Circuit, state: &AncillaStateInfo, gap: usize, p: P) -> FaultEvent {
    if gap == 0 {
        FaultEvent {
            loc: state.prep_loc,
            effect: FaultEffect::Single {
                wire: state.prep_wire,
                p,
            },
        }
    } else {
        let (loc_idx, wire) = state.couplings[gap - 1];
        let loc = c.locations()[loc_idx];
        FaultEvent {
            loc: loc_idx,
            effect: FaultEffect::Two {
                a: loc.a,
                pa: (loc.a == wire).then_some(p),
                b: loc.b,
                pb: (loc.b == wire && loc.a != wire).then_some(p),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::build_flagged;

    #[test]
    fn b_count_bounds_and_equality() {
        let shor = CssCode::catalog("shor913").unwrap();
        // Weight-6 stabilizer with the shipped order: exactly w - 1 = 5.
        let g7 = &shor.generators()[6];
        let c = build_flagged(g7, Some(&crate::scheme::orders::SHOR_G7)).unwrap();
        assert_eq!(b_count(&c, &shor).unwrap(), 5);
        let g8 = &shor.generators()[7];
        let c = build_flagged(g8, Some(&crate::scheme::orders::SHOR_G8)).unwrap();
        assert_eq!(b_count(&c, &shor).unwrap(), 5);

        // Weight-4 flagged circuits stay within w - 1 = 3.
        let steane = CssCode::catalog("steane713").unwrap();
        for gi in 0..6 {
            let c = build_flagged(&steane.generators()[gi], None).unwrap();
            assert!(b_count(&c, &steane).unwrap() <= 3);
        }
    }

    #[test]
    fn budget_check_matches_paper_numbers() {
        let shor = CssCode::catalog("shor913").unwrap();
        let group = vec![
            (6usize, crate::scheme::orders::SHOR_G7.to_vec()),
            (7usize, crate::scheme::orders::SHOR_G8.to_vec()),
        ];
        let line = check_budget(&shor, &group).unwrap();
        assert_eq!(line.sum, 10);
        assert_eq!(line.limit, 64);
        assert!(line.ok);

        // Four weight-8 Z-stabilizers of the Reed-Muller code overflow the
        // 2^4 budget.
        let rm = CssCode::catalog("rm1513").unwrap();
        let sup = |gi: usize| -> Vec<usize> {
            let g = &rm.generators()[gi];
            (0..rm.n).filter(|&q| g.component(q).is_some()).collect()
        };
        let group: Vec<(usize, Vec<usize>)> = (0..4).map(|g| (g, sup(g))).collect();
        let line = check_budget(&rm, &group).unwrap();
        assert!(!line.ok);
        assert!(line.sum > 16);

        // The shipped three-member Z-groups fit: sums <= 13 against 16.
        let group: Vec<(usize, Vec<usize>)> = [0usize, 5, 9].iter().map(|&g| (g, sup(g))).collect();
        let line = check_budget(&rm, &group).unwrap();
        assert!(line.ok);
        assert!(line.sum <= 13);
        assert_eq!(line.limit, 16);
    }
}
