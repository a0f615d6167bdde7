//! Circuit-level depolarizing error model: per-location fault sets,
//! probabilities, exhaustive enumeration, and sampling.
//!
//! Faults attach after gates and before measurements. A single-qubit location
//! (preparation or idle) draws X, Y, or Z; a CNOT or SWAP draws one of the 15
//! non-identity two-qubit Paulis; a measurement is corrupted by an outcome
//! flip. Rates: gates and preparations `p` total, measurements `2p/3`, idles
//! `gamma * p`.

use crate::circuit::{Circuit, Location, LocationKind};
use crate::pauli::P;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Gate error rate `p` and idle ratio `gamma`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
    pub gamma: f64,
}

impl NoiseParams {
    pub fn new(p: f64, gamma: f64) -> Result<NoiseParams> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("error rate p={p} outside [0,1]")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!("gamma={gamma} outside [0,1]")));
        }
        Ok(NoiseParams { p, gamma })
    }
}

/// The physical effect of one location failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultEffect {
    /// A Pauli on a single wire (prep, idle).
    Single { wire: u16, p: P },
    /// A non-identity two-qubit Pauli on a CNOT or SWAP, given as optional
    /// components on the two wires (never both `None`).
    Two {
        a: u16,
        pa: Option<P>,
        b: u16,
        pb: Option<P>,
    },
    /// An outcome flip on a measurement.
    MeasFlip,
}

impl fmt::Display for FaultEffect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultEffect::Single { wire, p } => write!(f, "{}@{}", p.letter(), wire),
            FaultEffect::Two { a, pa, b, pb } => {
                let c = |x: &Option<P>| x.map_or('I', |p| p.letter());
                write!(f, "{}{}@{},{}", c(pa), c(pb), a, b)
            }
            FaultEffect::MeasFlip => write!(f, "flip"),
        }
    }
}

/// A location failure: one location paired with one effect from its set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultEvent {
    /// Index into the owning circuit's canonical location list.
    pub loc: usize,
    pub effect: FaultEffect,
}

const TWO_QUBIT_PAULIS: [(Option<P>, Option<P>); 15] = [
    (None, Some(P::X)),
    (None, Some(P::Y)),
    (None, Some(P::Z)),
    (Some(P::X), None),
    (Some(P::X), Some(P::X)),
    (Some(P::X), Some(P::Y)),
    (Some(P::X), Some(P::Z)),
    (Some(P::Y), None),
    (Some(P::Y), Some(P::X)),
    (Some(P::Y), Some(P::Y)),
    (Some(P::Y), Some(P::Z)),
    (Some(P::Z), None),
    (Some(P::Z), Some(P::X)),
    (Some(P::Z), Some(P::Y)),
    (Some(P::Z), Some(P::Z)),
];

/// The fault set of one location with each event's probability as a multiple
/// of `p` (idle events scale with `gamma`).
pub fn fault_set(loc_idx: usize, loc: &Location, gamma: f64) -> Vec<(FaultEvent, f64)> {
    match loc.kind {
        LocationKind::Prep => P::ALL
            .iter()
            .map(|&p| {
                (
                    FaultEvent {
                        loc: loc_idx,
                        effect: FaultEffect::Single { wire: loc.a, p },
                    },
                    1.0 / 3.0,
                )
            })
            .collect(),
        LocationKind::Idle => P::ALL
            .iter()
            .map(|&p| {
                (
                    FaultEvent {
                        loc: loc_idx,
                        effect: FaultEffect::Single { wire: loc.a, p },
                    },
                    gamma / 3.0,
                )
            })
            .collect(),
        LocationKind::Cnot | LocationKind::Swap => TWO_QUBIT_PAULIS
            .iter()
            .map(|&(pa, pb)| {
                (
                    FaultEvent {
                        loc: loc_idx,
                        effect: FaultEffect::Two {
                            a: loc.a,
                            pa,
                            b: loc.b,
                            pb,
                        },
                    },
                    1.0 / 15.0,
                )
            })
            .collect(),
        LocationKind::MeasX | LocationKind::MeasZ => vec![(
            FaultEvent {
                loc: loc_idx,
                effect: FaultEffect::MeasFlip,
            },
            2.0 / 3.0,
        )],
    }
}

/// Total failure probability of a location as a multiple of `p`.
pub fn location_rate(kind: LocationKind, gamma: f64) -> f64 {
    match kind {
        LocationKind::Prep | LocationKind::Cnot | LocationKind::Swap => 1.0,
        LocationKind::MeasX | LocationKind::MeasZ => 2.0 / 3.0,
        LocationKind::Idle => gamma,
    }
}

/// Every (location, effect) pair of the circuit exactly once, in canonical
/// location order.
pub fn enumerate_single_faults(c: &Circuit) -> Vec<FaultEvent> {
    let mut out = Vec::new();
    for (i, loc) in c.locations().iter().enumerate() {
        for (ev, _) in fault_set(i, loc, 1.0) {
            out.push(ev);
        }
    }
    out
}

/// Samples independent location failures for one run of the circuit.
///
/// Uses geometric skipping at the maximal per-location rate `p` with
/// acceptance thinning for measurement (2/3) and idle (`gamma`) locations, so
/// a low-noise run costs O(faults) rather than O(locations). The returned
/// list is sorted in circuit order.
pub fn sample_faults<R: Rng>(c: &Circuit, params: &NoiseParams, rng: &mut R) -> Vec<FaultEvent> {
    let mut out = Vec::new();
    let locs = c.locations();
    let p = params.p;
    if p <= 0.0 || locs.is_empty() {
        return out;
    }
    let mut i = 0usize;
    if p >= 1.0 {
        // Every location fails with certainty at its own acceptance rate.
        for (idx, loc) in locs.iter().enumerate() {
            let accept = location_rate(loc.kind, params.gamma);
            if accept >= 1.0 || rng.gen::<f64>() < accept {
                out.push(draw_effect(idx, loc, rng));
            }
        }
        return out;
    }
    let log1m = (1.0 - p).ln();
    loop {
        // Geometric skip to the next candidate failure at rate p.
        let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let skip = (u.ln() / log1m).floor() as usize;
        i = match i.checked_add(skip) {
            Some(v) => v,
            None => break,
        };
        if i >= locs.len() {
            break;
        }
        let loc = &locs[i];
        let accept = location_rate(loc.kind, params.gamma);
        if accept >= 1.0 || rng.gen::<f64>() < accept {
            out.push(draw_effect(i, loc, rng));
        }
        i += 1;
    }
    out
}

fn draw_effect<R: Rng>(idx: usize, loc: &Location, rng: &mut R) -> FaultEvent {
    match loc.kind {
        LocationKind::Prep | LocationKind::Idle => {
            let p = P::ALL[rng.gen_range(0..3)];
            FaultEvent {
                loc: idx,
                effect: FaultEffect::Single { wire: loc.a, p },
            }
        }
        LocationKind::Cnot | LocationKind::Swap => {
            let (pa, pb) = TWO_QUBIT_PAULIS[rng.gen_range(0..15)];
            FaultEvent {
                loc: idx,
                effect: FaultEffect::Two {
                    a: loc.a,
                    pa,
                    b: loc.b,
                    pb,
                },
            }
        }
        LocationKind::MeasX | LocationKind::MeasZ => FaultEvent {
            loc: idx,
            effect: FaultEffect::MeasFlip,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{MeasKind, Role, Scheduler};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> Circuit {
        let mut s = Scheduler::new("toy", vec![Role::Data, Role::Data, Role::Ancilla], 2);
        s.prep_z(2);
        s.cnot(0, 2);
        s.cnot(1, 2);
        s.meas_z(2, MeasKind::Syndrome(0));
        s.finish().unwrap()
    }

    #[test]
    fn fault_set_cardinalities_and_rates() {
        let c = toy();
        let mut total_by_kind = std::collections::HashMap::new();
        for (i, loc) in c.locations().iter().enumerate() {
            let set = fault_set(i, loc, 1.0);
            let sum: f64 = set.iter().map(|(_, w)| w).sum();
            total_by_kind.insert(loc.kind, (set.len(), sum));
        }
        assert_eq!(total_by_kind[&LocationKind::Cnot].0, 15);
        assert!((total_by_kind[&LocationKind::Cnot].1 - 1.0).abs() < 1e-12);
        assert_eq!(total_by_kind[&LocationKind::Prep].0, 3);
        assert!((total_by_kind[&LocationKind::Prep].1 - 1.0).abs() < 1e-12);
        assert_eq!(total_by_kind[&LocationKind::MeasZ].0, 1);
        assert!((total_by_kind[&LocationKind::MeasZ].1 - 2.0 / 3.0).abs() < 1e-12);
        // gamma = 0 silences idles.
        let idle = c
            .locations()
            .iter()
            .position(|l| l.kind == LocationKind::Idle)
            .unwrap();
        let set = fault_set(idle, &c.locations()[idle], 0.0);
        assert!(set.iter().all(|(_, w)| *w == 0.0));
    }

    #[test]
    fn enumeration_counts_match_census() {
        let c = toy();
        let census = c.census();
        let expect = 3 * (census.prep + census.idle)
            + 15 * (census.cnot + census.swap)
            + census.meas_x
            + census.meas_z;
        assert_eq!(enumerate_single_faults(&c).len(), expect);
    }

    #[test]
    fn sampling_extremes() {
        let c = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let none = sample_faults(&c, &NoiseParams::new(0.0, 1.0).unwrap(), &mut rng);
        assert!(none.is_empty());
        // p = 1: every gate-like location fails with certainty.
        let all = sample_faults(&c, &NoiseParams::new(1.0, 0.0).unwrap(), &mut rng);
        let gate_like = c
            .locations()
            .iter()
            .filter(|l| matches!(l.kind, LocationKind::Prep | LocationKind::Cnot))
            .count();
        assert!(all.len() >= gate_like);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let c = toy();
        let params = NoiseParams::new(0.3, 0.5).unwrap();
        let a: Vec<_> = (0..50)
            .flat_map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(t);
                sample_faults(&c, &params, &mut rng)
            })
            .collect();
        let b: Vec<_> = (0..50)
            .flat_map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(t);
                sample_faults(&c, &params, &mut rng)
            })
            .collect();
        assert_eq!(a, b);
    }
}
