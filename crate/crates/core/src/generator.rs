//! Seeded planted instances.
//!
//! The stream is ChaCha8 seeded through `SeedableRng::seed_from_u64`, so a seed reproduces
//! the same instance on every platform. For each clause: draw `k` distinct variables
//! (sorted ascending) with `rand::seq::index::sample`, then one sign bit per literal; redraw
//! until both planted assignments satisfy the clause.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formula::{Assignment, Clause, Formula, Instance, Literal};

pub const MAX_ATTEMPTS_PER_CLAUSE: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct PlantedGenerator {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub plant_pair: (Assignment, Assignment),
}

impl PlantedGenerator {
    /// Plants `0^n` and `1^n`.
    pub fn new(n: usize, m: usize, k: usize, seed: u64) -> Self {
        PlantedGenerator {
            n,
            m,
            k,
            seed,
            plant_pair: (Assignment::zeros(n), Assignment::ones(n)),
        }
    }

    /// Plants `0^n` and a second assignment drawn from the seed stream.
    pub fn with_random_plants(n: usize, m: usize, k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let a = Assignment::new((0..n).map(|_| rng.gen()).collect());
        let b = Assignment::new((0..n).map(|_| rng.gen()).collect());
        PlantedGenerator {
            n,
            m,
            k,
            seed,
            plant_pair: (a, b),
        }
    }
}

pub fn gen_random_instance(gen: &PlantedGenerator) -> Result<Instance> {
    let PlantedGenerator { n, m, k, seed, .. } = *gen;
    let (s, t) = &gen.plant_pair;
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 ≤ k ≤ n, got k={k} n={n}")));
    }
    if m == 0 {
        return Err(Error::invalid("need m ≥ 1"));
    }
    if s.len() != n || t.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: if s.len() != n { s.len() } else { t.len() },
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let mut attempts = 0u64;
        let clause = loop {
            attempts += 1;
            if attempts > MAX_ATTEMPTS_PER_CLAUSE {
                return Err(Error::CapExceeded {
                    what: "rejection-sampling attempts per clause",
                    limit: MAX_ATTEMPTS_PER_CLAUSE as u128,
                    actual: attempts as u128,
                });
            }
            let mut vars = sample(&mut rng, n, k).into_vec();
            vars.sort_unstable();
            let lits = vars
                .into_iter()
                .map(|v| Literal::new(v + 1, rng.gen()))
                .collect();
            let c = Clause::new(lits).expect("distinct variables");
            if c.is_satisfied(s) && c.is_satisfied(t) {
                break c;
            }
        };
        clauses.push(clause);
    }
    Instance::new(Formula::new(n, clauses)?, s.clone(), t.clone())
}
