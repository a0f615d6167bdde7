use flagsim::codes::CssCode;
use flagsim::decode::{Mode, Procedure};
use flagsim::ftcheck::certify;
use flagsim::scheme::{build_steane_parallel, DualAncillaPart};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn score(code: &CssCode, parts: [DualAncillaPart; 2]) -> usize {
    let scheme = match build_steane_parallel(code, Some(parts)) {
        Ok(s) => s,
        Err(_) => return usize::MAX,
    };
    let mut total = 0usize;
    for (proc, mode) in [
        (Procedure::Alg3, Mode::Correct),
        (Procedure::Alg1, Mode::Correct),
        (Procedure::Detect, Mode::Detect),
    ] {
        match certify(&scheme, proc, mode) {
            Ok(cs) => {
                total += cs.certificate.bad_locations.len() + cs.certificate.collisions.len();
            }
            Err(_) => return usize::MAX,
        }
        if total > 0 {
            break; // early exit, this candidate is dead anyway
        }
    }
    total
}

fn main() {
    let code = CssCode::catalog("steane713").unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20260810);
    let sup = |g: usize| -> Vec<usize> {
        let op = &code.generators()[g];
        (0..7).filter(|&q| op.component(q).is_some()).collect()
    };
    let windows = [(1usize, 3usize), (1, 2), (2, 3), (0, 3), (1, 4)];
    let mut best = usize::MAX;
    for iter in 0..200_000u64 {
        let mk = |gens: [usize; 3], crossed: usize, rng: &mut rand_chacha::ChaCha8Rng, win: (usize, usize)| {
            let mut orders: [Vec<usize>; 3] = [sup(gens[0]), sup(gens[1]), sup(gens[2])];
            for o in orders.iter_mut() {
                o.shuffle(rng);
            }
            DualAncillaPart { gens, orders, crossed, window: win }
        };
        let ca = [1usize, 2][rng.gen_range(0..2)];
        let cb = [4usize, 5][rng.gen_range(0..2)];
        let win_a = windows[rng.gen_range(0..windows.len())];
        let win_b = windows[rng.gen_range(0..windows.len())];
        let parts = [mk([0, 1, 2], ca, &mut rng, win_a), mk([3, 4, 5], cb, &mut rng, win_b)];
        let s = score(&code, parts.clone());
        if s < best {
            best = s;
            eprintln!("iter {iter}: score {s}  parts {parts:?}");
        }
        if s == 0 {
            println!("FOUND at iter {iter}:");
            println!("{}", serde_json::to_string_pretty(&parts).unwrap());
            return;
        }
    }
    eprintln!("search exhausted, best {best}");
}
