//! The adaptive decoding procedures and their lookup tables.
//!
//! A procedure drives one extraction round: it runs flagged units, branches
//! on the observed flag and syndrome bits, conditionally runs unflagged
//! follow-up extractions, and applies a correction. Branch logic is pure
//! given the bits; circuit execution is abstracted behind [`RoundDriver`] so
//! the same code path serves exhaustive certification (noiseless, injected
//! faults), table construction, and Monte Carlo trials.

use crate::codes::CssCode;
use crate::pauli::{PauliOperator, PauliType};
use crate::scheme::{Scheme, Side};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Which unflagged extraction a follow-up measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Followup {
    /// All generators.
    Complete,
    /// Only the generators of the given type.
    Only(PauliType),
}

impl fmt::Display for Followup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Followup::Complete => write!(f, "complete"),
            Followup::Only(t) => write!(f, "{t}-only"),
        }
    }
}

/// The decoding procedures of the toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Procedure {
    /// Standard flag decoding: units in order, first fired unit triggers a
    /// complete unflagged extraction.
    Alg1,
    /// CSS-adaptive decoding with separate follow-ups and early exit after
    /// the X-stabilizer side.
    Alg3,
    /// Symmetric CSS decoding: both sides always run, separate follow-ups.
    Alg4,
    /// Alg4 with complete unflagged follow-ups on the syndrome branches.
    Alg4Complete,
    /// Error detection: discard on any fired bit.
    Detect,
}

impl Procedure {
    pub fn parse(s: &str) -> Option<Procedure> {
        match s {
            "alg1" => Some(Procedure::Alg1),
            "alg3" => Some(Procedure::Alg3),
            "alg4" => Some(Procedure::Alg4),
            "alg4-complete" | "alg4complete" | "alg4_complete" => Some(Procedure::Alg4Complete),
            "detect" => Some(Procedure::Detect),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Procedure::Alg1 => "alg1",
            Procedure::Alg3 => "alg3",
            Procedure::Alg4 => "alg4",
            Procedure::Alg4Complete => "alg4-complete",
            Procedure::Detect => "detect",
        }
    }
}

/// Detection vs correction semantics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Correct,
    Detect,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "correct" => Some(Mode::Correct),
            "detect" => Some(Mode::Detect),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Correct => "correct",
            Mode::Detect => "detect",
        }
    }
}

/// Bits observed while running one extraction unit.
#[derive(Clone, Debug, Default)]
pub struct UnitBits {
    /// (generator index, bit) pairs.
    pub synd: Vec<(usize, bool)>,
    /// (flag index, bit) pairs.
    pub flags: Vec<(usize, bool)>,
}

impl UnitBits {
    pub fn any_flag(&self) -> bool {
        self.flags.iter().any(|(_, b)| *b)
    }

    pub fn any_synd(&self) -> bool {
        self.synd.iter().any(|(_, b)| *b)
    }

    pub fn any(&self) -> bool {
        self.any_flag() || self.any_synd()
    }

    pub fn merge(&mut self, other: &UnitBits) {
        self.synd.extend_from_slice(&other.synd);
        self.flags.extend_from_slice(&other.flags);
    }
}

/// Execution backend for one error-correction round: runs unit circuits and
/// follow-ups against some data register and applies corrections to it.
pub trait RoundDriver {
    fn run_unit(&mut self, unit: usize) -> UnitBits;
    /// Runs an unflagged follow-up under the driver's noise model.
    fn run_followup(&mut self, f: Followup) -> Vec<(usize, bool)>;
    /// Runs an unflagged follow-up with no noise (the trailing resolution
    /// round of a trial).
    fn run_followup_ideal(&mut self, f: Followup) -> Vec<(usize, bool)>;
    fn apply_correction(&mut self, op: &PauliOperator);
    /// Data error currently on the register (exact in certification drivers,
    /// tracked frame in Monte Carlo drivers).
    fn current_residual(&self) -> PauliOperator;
}

/// Key of one flag-table entry: the fired bits observed at branch time plus
/// the follow-up outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlagKey {
    /// Fired flag bits at branch time, indexed by global flag index.
    pub flags: u32,
    /// Fired syndrome bits at branch time, indexed by generator index.
    pub synd: u32,
    /// 0 = complete, 1 = X-only, 2 = Z-only follow-up.
    pub followup: u8,
    /// Follow-up outcome bits, indexed by generator index.
    pub bits: u32,
}

impl FlagKey {
    pub fn new(pattern: &UnitBits, followup: Followup, bits: &[(usize, bool)]) -> FlagKey {
        let mut f = 0u32;
        let mut s = 0u32;
        for (i, b) in &pattern.flags {
            if *b {
                f |= 1 << i;
            }
        }
        for (i, b) in &pattern.synd {
            if *b {
                s |= 1 << i;
            }
        }
        FlagKey {
            flags: f,
            synd: s,
            followup: match followup {
                Followup::Complete => 0,
                Followup::Only(PauliType::X) => 1,
                Followup::Only(PauliType::Z) => 2,
            },
            bits: pack_bits(bits),
        }
    }
}

pub fn pack_bits(bits: &[(usize, bool)]) -> u32 {
    let mut out = 0u32;
    for (i, b) in bits {
        if *b {
            out |= 1 << i;
        }
    }
    out
}

/// A recorded syndrome collision: two inequivalent residuals behind one key.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Collision {
    pub key: FlagKey,
    pub existing: String,
    pub conflicting: String,
}

/// Lookup tables for one (scheme, procedure) pair.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DecodingTables {
    /// Minimum-weight X-type correction keyed by packed syndrome against the
    /// Z-type generators (bit positions within the Z-generator list).
    min_x_correction: BTreeMap<u32, PauliOperator>,
    /// Minimum-weight Z-type correction keyed by packed syndrome against the
    /// X-type generators.
    min_z_correction: BTreeMap<u32, PauliOperator>,
    /// LOOKUP(f): corrections for flag-raised keys, built by exhaustive
    /// single-fault enumeration during certification.
    pub flag: BTreeMap<FlagKey, PauliOperator>,
}

impl DecodingTables {
    /// Builds the LOOKUP(0) side: minimum-weight pure-type corrections over
    /// errors of weight <= 2, inserted in increasing weight.
    pub fn lookup0_for(code: &CssCode) -> DecodingTables {
        let mut t = DecodingTables::default();
        for (ty, map) in [
            (PauliType::X, &mut t.min_x_correction),
            (PauliType::Z, &mut t.min_z_correction),
        ] {
            map.insert(0, PauliOperator::identity(code.n));
            let mut supports: Vec<Vec<usize>> = (0..code.n).map(|q| vec![q]).collect();
            for a in 0..code.n {
                for b in a + 1..code.n {
                    supports.push(vec![a, b]);
                }
            }
            for support in supports {
                let e = PauliOperator::from_support(code.n, ty, &support);
                let s = match ty {
                    PauliType::X => code.syndrome_z_gens(&e).unwrap(),
                    PauliType::Z => code.syndrome_x_gens(&e).unwrap(),
                };
                let mut key = 0u32;
                for i in 0..s.len() {
                    if s.get(i) {
                        key |= 1 << i;
                    }
                }
                map.entry(key).or_insert(e);
            }
        }
        t
    }

    /// LOOKUP(0): minimum-weight correction for a follow-up outcome, or
    /// `None` when no pure-type error of weight <= 2 matches.
    pub fn lookup0(
        &self,
        code: &CssCode,
        followup: Followup,
        bits: &[(usize, bool)],
    ) -> Option<PauliOperator> {
        let pack_positions = |idx: &[usize]| -> u32 {
            let mut out = 0u32;
            for (pos, gi) in idx.iter().enumerate() {
                if bits.iter().any(|(g, b)| g == gi && *b) {
                    out |= 1 << pos;
                }
            }
            out
        };
        match followup {
            Followup::Only(PauliType::Z) => {
                // Z-generator outcomes identify X errors.
                self.min_x_correction
                    .get(&pack_positions(code.z_indices()))
                    .cloned()
            }
            Followup::Only(PauliType::X) => self
                .min_z_correction
                .get(&pack_positions(code.x_indices()))
                .cloned(),
            Followup::Complete => {
                let xc = self.min_x_correction.get(&pack_positions(code.z_indices()))?;
                let zc = self.min_z_correction.get(&pack_positions(code.x_indices()))?;
                Some(xc.multiply(zc).expect("same code"))
            }
        }
    }
}

/// Table access during a round: frozen tables for simulation, or a learning
/// view that self-registers missing keys from the exact residual during
/// certification.
pub enum TableCtx<'a> {
    Use(&'a DecodingTables),
    Learn {
        tables: &'a mut DecodingTables,
        collisions: &'a mut Vec<Collision>,
    },
}

impl TableCtx<'_> {
    /// Resolves a flag-raised lookup. In `Learn` mode a missing key is
    /// registered with the part of the current residual the follow-up can
    /// identify; an inequivalent residual behind an existing key is recorded
    /// as a collision (a Proposition-3 uniqueness violation).
    fn flag_correct(
        &mut self,
        key: FlagKey,
        followup: Followup,
        bits: &[(usize, bool)],
        code: &CssCode,
        residual: impl FnOnce() -> PauliOperator,
    ) -> Option<PauliOperator> {
        match self {
            TableCtx::Use(t) => t
                .flag
                .get(&key)
                .cloned()
                .or_else(|| t.lookup0(code, followup, bits)),
            TableCtx::Learn { tables, collisions } => {
                let visible = visible_part(&residual(), followup);
                if let Some(existing) = tables.flag.get(&key) {
                    if !code.coset_equal(existing, &visible) {
                        collisions.push(Collision {
                            key,
                            existing: existing.to_string(),
                            conflicting: visible.to_string(),
                        });
                    }
                    Some(existing.clone())
                } else {
                    tables.flag.insert(key, visible.clone());
                    Some(visible)
                }
            }
        }
    }

    fn lookup0(
        &self,
        code: &CssCode,
        followup: Followup,
        bits: &[(usize, bool)],
    ) -> Option<PauliOperator> {
        match self {
            TableCtx::Use(t) => t.lookup0(code, followup, bits),
            TableCtx::Learn { tables, .. } => tables.lookup0(code, followup, bits),
        }
    }
}

/// The part of a residual that a follow-up extraction can identify: Z-type
/// generators see X components and vice versa; the invisible weight-<=1
/// remainder is left for the next cycle.
pub fn visible_part(residual: &PauliOperator, followup: Followup) -> PauliOperator {
    match followup {
        Followup::Complete => residual.clone(),
        Followup::Only(PauliType::Z) => residual.x_part(),
        Followup::Only(PauliType::X) => residual.z_part(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    NoOp,
    Correction(String),
    Discard,
}

/// One step of the decoder trace (serializable for debugging and the golden
/// tests).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum TraceEvent {
    Unit {
        unit: usize,
        synd: Vec<(usize, bool)>,
        flags: Vec<(usize, bool)>,
    },
    Branch {
        label: String,
    },
    FollowupRun {
        followup: String,
        bits: Vec<(usize, bool)>,
    },
    Correction {
        op: String,
    },
    Discard,
}

/// What one decoding round did.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub action: Action,
    /// Follow-ups that ran, in order.
    pub followups: Vec<Followup>,
    pub trace: Vec<TraceEvent>,
}

impl DecodeOutcome {
    fn new() -> Self {
        DecodeOutcome {
            action: Action::NoOp,
            followups: Vec::new(),
            trace: Vec::new(),
        }
    }

    /// Spec-level summary of the follow-ups used: none, X-only, Z-only, or
    /// complete (a complete run, or both separate sides).
    pub fn followups_used(&self) -> &'static str {
        let mut x = false;
        let mut z = false;
        for f in &self.followups {
            match f {
                Followup::Complete => return "complete",
                Followup::Only(PauliType::X) => x = true,
                Followup::Only(PauliType::Z) => z = true,
            }
        }
        match (x, z) {
            (false, false) => "none",
            (true, false) => "X-only",
            (false, true) => "Z-only",
            (true, true) => "complete",
        }
    }
}

struct RoundCtx<'a, 'b, D: RoundDriver> {
    scheme: &'a Scheme,
    driver: &'b mut D,
    tables: TableCtx<'b>,
    out: DecodeOutcome,
}

impl<D: RoundDriver> RoundCtx<'_, '_, D> {
    fn run_unit(&mut self, u: usize) -> UnitBits {
        let bits = self.driver.run_unit(u);
        self.out.trace.push(TraceEvent::Unit {
            unit: u,
            synd: bits.synd.clone(),
            flags: bits.flags.clone(),
        });
        bits
    }

    fn followup(&mut self, f: Followup) -> Vec<(usize, bool)> {
        let bits = self.driver.run_followup(f);
        self.out.followups.push(f);
        self.out.trace.push(TraceEvent::FollowupRun {
            followup: f.to_string(),
            bits: bits.clone(),
        });
        bits
    }

    fn branch(&mut self, label: &str) {
        self.out.trace.push(TraceEvent::Branch {
            label: label.to_string(),
        });
    }

    fn apply(&mut self, op: Option<PauliOperator>) {
        let op = match op {
            Some(op) if !op.is_identity() => op,
            _ => {
                self.out.trace.push(TraceEvent::Correction {
                    op: "I".to_string(),
                });
                return;
            }
        };
        self.driver.apply_correction(&op);
        self.out.trace.push(TraceEvent::Correction {
            op: op.to_string(),
        });
        let total = match &self.out.action {
            Action::Correction(prev) => {
                let prev = PauliOperator::parse(prev, self.scheme.code.n).expect("trace op");
                prev.multiply(&op).expect("same register").to_string()
            }
            _ => op.to_string(),
        };
        self.out.action = Action::Correction(total);
    }

    fn flag_branch(&mut self, pattern: &UnitBits, followup: Followup) {
        let bits = self.followup(followup);
        let key = FlagKey::new(pattern, followup, &bits);
        let code = &self.scheme.code;
        let corr = {
            let driver = &mut *self.driver;
            self.tables
                .flag_correct(key, followup, &bits, code, || driver.current_residual())
        };
        self.apply(corr);
    }

    fn lookup0_branch(&mut self, followup: Followup) {
        let bits = self.followup(followup);
        let corr = self.tables.lookup0(&self.scheme.code, followup, &bits);
        self.apply(corr);
    }
}

/// Runs one decoding round of `proc` over the scheme's units.
///
/// `x_first` selects which stabilizer side the CSS procedures treat first;
/// certification and single-round trials use the printed X-first order.
pub fn run_procedure<D: RoundDriver>(
    scheme: &Scheme,
    proc: Procedure,
    driver: &mut D,
    tables: TableCtx<'_>,
    x_first: bool,
) -> DecodeOutcome {
    let mut ctx = RoundCtx {
        scheme,
        driver,
        tables,
        out: DecodeOutcome::new(),
    };
    match proc {
        Procedure::Detect => detect(&mut ctx),
        Procedure::Alg1 => alg1(&mut ctx),
        Procedure::Alg3 => {
            if ctx.scheme.is_type_pure() {
                alg3(&mut ctx, x_first)
            } else {
                alg3_mixed(&mut ctx, x_first)
            }
        }
        Procedure::Alg4 | Procedure::Alg4Complete => {
            let complete = proc == Procedure::Alg4Complete;
            alg4(&mut ctx, complete, x_first)
        }
    }
    ctx.out
}

/// Error detection: run every unit, discard on any fired bit.
fn detect<D: RoundDriver>(ctx: &mut RoundCtx<'_, '_, D>) {
    let mut fired = false;
    for u in 0..ctx.scheme.units.len() {
        let bits = ctx.run_unit(u);
        fired |= bits.any();
    }
    if fired {
        ctx.out.action = Action::Discard;
        ctx.out.trace.push(TraceEvent::Discard);
    }
}

/// Standard flag decoding, generalized to multi-stabilizer units: the first
/// unit with a fired flag (or, for dual-role units, any fired bit) triggers a
/// complete unflagged extraction decoded through LOOKUP(f); a fired syndrome
/// bit alone triggers the same extraction through LOOKUP(0).
fn alg1<D: RoundDriver>(ctx: &mut RoundCtx<'_, '_, D>) {
    for u in 0..ctx.scheme.units.len() {
        let bits = ctx.run_unit(u);
        let treat_as_flag = if ctx.scheme.units[u].side == Side::Mixed {
            bits.any()
        } else {
            bits.any_flag()
        };
        if treat_as_flag {
            ctx.branch("flag raised: complete unflagged extraction, LOOKUP(f)");
            ctx.flag_branch(&bits, Followup::Complete);
            return;
        }
        if bits.any_synd() {
            ctx.branch("syndrome fired: complete unflagged extraction, LOOKUP(0)");
            ctx.lookup0_branch(Followup::Complete);
            return;
        }
    }
}

/// CSS-adaptive decoding for type-pure schemes: the X-stabilizer side runs
/// first; a flag there triggers only the opposite-type follow-up; a bare
/// syndrome triggers a complete follow-up; the Z side runs only when the X
/// side was silent.
fn alg3<D: RoundDriver>(ctx: &mut RoundCtx<'_, '_, D>, x_first: bool) {
    let (first, second) = sides(ctx.scheme, x_first);
    let (first_ty, second_ty) = if x_first {
        (PauliType::X, PauliType::Z)
    } else {
        (PauliType::Z, PauliType::X)
    };

    let mut bits = UnitBits::default();
    for u in first {
        let b = ctx.run_unit(u);
        bits.merge(&b);
    }
    if bits.any_flag() {
        ctx.branch("first-side flag: separate opposite-type follow-up, LOOKUP(f)");
        ctx.flag_branch(&bits, Followup::Only(second_ty));
        return;
    }
    if bits.any_synd() {
        ctx.branch("first-side syndrome: complete unflagged extraction, LOOKUP(0)");
        ctx.lookup0_branch(Followup::Complete);
        return;
    }
    let mut bits = UnitBits::default();
    for u in second {
        let b = ctx.run_unit(u);
        bits.merge(&b);
    }
    if bits.any_flag() {
        ctx.branch("second-side flag: separate opposite-type follow-up, LOOKUP(f)");
        ctx.flag_branch(&bits, Followup::Only(first_ty));
        return;
    }
    if bits.any_synd() {
        ctx.branch("second-side syndrome: separate same-type follow-up, LOOKUP(0)");
        ctx.lookup0_branch(Followup::Only(second_ty));
    }
}

/// Alg3 semantics for schemes whose units mix stabilizer types (the
/// dual-ancilla parallel parts): every unit runs, then fired bits are split
/// by the error type they indicate. Z-generator bits fire on X-type data
/// errors and on X-hooks flagged through the cross couplings, so they take
/// the X-correction branch, and dually.
fn alg3_mixed<D: RoundDriver>(ctx: &mut RoundCtx<'_, '_, D>, x_first: bool) {
    let mut bits = UnitBits::default();
    for u in 0..ctx.scheme.units.len() {
        let b = ctx.run_unit(u);
        bits.merge(&b);
    }
    let code = ctx.scheme.code.clone();
    let fired_of = |ty: PauliType, bits: &UnitBits| {
        bits.synd
            .iter()
            .any(|(g, b)| *b && code.generator_type(*g) == ty)
    };
    let z_fired = fired_of(PauliType::Z, &bits);
    let x_fired = fired_of(PauliType::X, &bits);
    // Z-generator bits identify X-type errors, so in the X-first treatment
    // they take priority.
    let order = if x_first {
        [(z_fired, PauliType::Z), (x_fired, PauliType::X)]
    } else {
        [(x_fired, PauliType::X), (z_fired, PauliType::Z)]
    };
    for (fired, ty) in order {
        if fired {
            ctx.branch(&format!(
                "{ty}-generator bits fired: separate {ty}-type follow-up, LOOKUP(f)"
            ));
            ctx.flag_branch(&bits, Followup::Only(ty));
            return;
        }
    }
}

/// Symmetric CSS decoding: both sides always run; each side's flag branch
/// takes the opposite-type follow-up, each side's syndrome branch re-extracts
/// its own side (or a complete extraction in the `complete` variant).
fn alg4<D: RoundDriver>(ctx: &mut RoundCtx<'_, '_, D>, complete: bool, x_first: bool) {
    let (first, second) = sides(ctx.scheme, x_first);
    let (first_ty, second_ty) = if x_first {
        (PauliType::X, PauliType::Z)
    } else {
        (PauliType::Z, PauliType::X)
    };
    for (units, own_ty, opp_ty) in [
        (first, first_ty, second_ty),
        (second, second_ty, first_ty),
    ] {
        let mut bits = UnitBits::default();
        for u in units {
            let b = ctx.run_unit(u);
            bits.merge(&b);
        }
        if bits.any_flag() {
            ctx.branch("flag: separate opposite-type follow-up, LOOKUP(f)");
            ctx.flag_branch(&bits, Followup::Only(opp_ty));
        } else if bits.any_synd() {
            if complete {
                ctx.branch("syndrome: complete unflagged extraction, LOOKUP(0)");
                ctx.lookup0_branch(Followup::Complete);
            } else {
                ctx.branch("syndrome: separate same-side re-extraction, LOOKUP(0)");
                ctx.lookup0_branch(Followup::Only(own_ty));
            }
        }
    }
}

/// Unit indices of the (first, second) sides for the CSS procedures.
fn sides(scheme: &Scheme, x_first: bool) -> (Vec<usize>, Vec<usize>) {
    let xs: Vec<usize> = scheme
        .units
        .iter()
        .enumerate()
        .filter(|(_, u)| u.side == Side::X)
        .map(|(i, _)| i)
        .collect();
    let zs: Vec<usize> = scheme
        .units
        .iter()
        .enumerate()
        .filter(|(_, u)| u.side == Side::Z)
        .map(|(i, _)| i)
        .collect();
    if x_first {
        (xs, zs)
    } else {
        (zs, xs)
    }
}
