//! Monte Carlo sampling from a scenario + policy, producing a `Dataset`
//! whose empirical rates converge to the closed forms.
//!
//! Sampling is chunked: chunk `i` draws from its own ChaCha8 stream
//! derived from (seed, i), so the dataset is a pure function of
//! (scenario, policy, n, seed) regardless of how many worker threads run
//! the chunks. Records are aggregated per (gender, score, outcome,
//! decision) cell with multiplicities, in a fixed cell order.

use super::{Gender, HiringPolicy, PhelpsianScenario};
use crate::core::{Dataset, Dimension, IndividualRecord, Schema};
use crate::rational::to_f64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Records per RNG stream.
pub const SIMULATION_CHUNK: u64 = 65_536;

/// cell index: ((gender * 3 + score) * 2 + outcome) * 2 + decision
const CELLS: usize = 24;

#[derive(Clone, Copy)]
struct Probs {
    split_m: f64,
    p: [f64; 2],
    phi: [f64; 2],
    d: [f64; 2],
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn probs(s: &PhelpsianScenario, pol: &HiringPolicy) -> Probs {
    let of = |g: Gender| {
        (
            clamp_unit(to_f64(s.prevalence_of(g))),
            clamp_unit(to_f64(s.precision_of(g))),
            clamp_unit(to_f64(pol.for_gender(g))),
        )
    };
    let (pm, phim, dm) = of(Gender::M);
    let (pf, phif, df) = of(Gender::F);
    Probs {
        split_m: clamp_unit(to_f64(s.gender_split())),
        p: [pm, pf],
        phi: [phim, phif],
        d: [dm, df],
    }
}

fn run_chunk(pr: &Probs, seed: u64, stream: u64, count: u64) -> [u64; CELLS] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut tally = [0u64; CELLS];
    for _ in 0..count {
        let g = if rng.gen_bool(pr.split_m) { 0 } else { 1 };
        let qualified = rng.gen_bool(pr.p[g]);
        let precise = rng.gen_bool(pr.phi[g]);
        let score = match (qualified, precise) {
            (true, true) => 2,
            (true, false) => 1,
            (false, true) => 0,
            (false, false) => 1,
        };
        let hired = match score {
            2 => true,
            0 => false,
            _ => rng.gen_bool(pr.d[g]),
        };
        let cell = ((g * 3 + score) * 2 + usize::from(qualified)) * 2 + usize::from(hired);
        tally[cell] += 1;
    }
    tally
}

fn merge(a: [u64; CELLS], b: [u64; CELLS]) -> [u64; CELLS] {
    let mut out = a;
    for (o, v) in out.iter_mut().zip(b.iter()) {
        *o += v;
    }
    out
}

fn chunk_plan(n: u64) -> Vec<(u64, u64)> {
    (0..n.div_ceil(SIMULATION_CHUNK))
        .map(|i| (i, (n - i * SIMULATION_CHUNK).min(SIMULATION_CHUNK)))
        .collect()
}

/// Draws `n` workers: gender from the scenario's split, qualification from
/// the gender's prevalence, score from the test technology, decision from
/// the policy. Deterministic in `seed`. Requires `n >= 1`.
pub fn simulate(s: &PhelpsianScenario, pol: &HiringPolicy, n: u64, seed: u64) -> Dataset {
    assert!(n >= 1, "sample count must be at least 1");
    let pr = probs(s, pol);
    let chunks = chunk_plan(n);

    #[cfg(feature = "parallel")]
    let tally: [u64; CELLS] = {
        use rayon::prelude::*;
        chunks
            .par_iter()
            .map(|(i, c)| run_chunk(&pr, seed, *i, *c))
            .reduce(|| [0u64; CELLS], merge)
    };

    #[cfg(not(feature = "parallel"))]
    let tally: [u64; CELLS] = chunks
        .iter()
        .map(|(i, c)| run_chunk(&pr, seed, *i, *c))
        .fold([0u64; CELLS], merge);

    dataset_from_tally(tally)
}

/// Single-threaded twin of [`simulate`]: same chunked draws in a plain
/// loop, byte-identical result. Kept available under every feature
/// configuration so the two paths can be compared and benchmarked.
pub fn simulate_sequential(
    s: &PhelpsianScenario,
    pol: &HiringPolicy,
    n: u64,
    seed: u64,
) -> Dataset {
    assert!(n >= 1, "sample count must be at least 1");
    let pr = probs(s, pol);
    let tally = chunk_plan(n)
        .iter()
        .map(|(i, c)| run_chunk(&pr, seed, *i, *c))
        .fold([0u64; CELLS], merge);
    dataset_from_tally(tally)
}

fn dataset_from_tally(tally: [u64; CELLS]) -> Dataset {
    let schema = Schema {
        sensitive: vec![Dimension::new(
            "gender",
            vec!["m".to_string(), "f".to_string()],
        )],
        permissible: vec![Dimension::new(
            "score",
            vec!["1".to_string(), "2".to_string(), "3".to_string()],
        )],
        outcome: "qualified".to_string(),
        decision: "hired".to_string(),
    };
    let mut records = Vec::new();
    for g in 0..2u16 {
        for score in 0..3u16 {
            for outcome in [false, true] {
                for decision in [false, true] {
                    let cell = ((g as usize * 3 + score as usize) * 2 + usize::from(outcome)) * 2
                        + usize::from(decision);
                    if tally[cell] > 0 {
                        records.push(IndividualRecord {
                            sensitive: vec![g],
                            permissible: vec![score],
                            outcome,
                            decision,
                            count: tally[cell],
                        });
                    }
                }
            }
        }
    }
    Dataset::from_parts(schema, records).expect("simulated records are valid")
}
