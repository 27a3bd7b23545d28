//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use eksr_core::exact::opt_exact;
use eksr_core::generator::{gen_random_instance, PlantedGenerator};
use eksr_core::rational::{ratio, zero, Rational};
use eksr_core::{parse_instance, Assignment, Clause, Formula, Instance, Literal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EXAMPLE: &str = "p eksr 4 6 3\n-1 -2 3 0\n-1 2 -3 0\n1 -2 -3 0\n-1 2 -4 0\n\
    -2 3 -4 0\n1 -3 -4 0\ns 0000\nt 1111\n";

pub fn example() -> Instance {
    parse_instance(EXAMPLE).unwrap()
}

pub fn bits(s: &str) -> Assignment {
    s.parse().unwrap()
}

/// Orders of `flips` (applied from `from`) that keep `clause` satisfied at every step,
/// counted by depth-first enumeration.
fn good_orders(clause: &Clause, cur: &mut Assignment, flips: &mut Vec<usize>) -> u64 {
    if !clause.is_satisfied(cur) {
        return 0;
    }
    if flips.is_empty() {
        return 1;
    }
    let mut total = 0;
    for i in 0..flips.len() {
        let v = flips.remove(i);
        cur.flip(v);
        total += good_orders(clause, cur, flips);
        cur.flip(v);
        flips.insert(i, v);
    }
    total
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Probability that a uniform order of the variables differing between `from` and `to`
/// keeps `clause` satisfied at every step.
pub fn brute_phase(clause: &Clause, from: &Assignment, to: &Assignment) -> Rational {
    let mut flips: Vec<usize> = (1..=from.len())
        .filter(|&v| from.get(v) != to.get(v))
        .collect();
    let total = factorial(flips.len());
    let good = good_orders(clause, &mut from.clone(), &mut flips);
    ratio(good as i64, total as i64)
}

/// Survival of `clause` averaged over uniform `rho` and both phase orders. All assignments
/// range over the clause's own variables `1..=k`.
pub fn brute_survival(clause: &Clause, start: &Assignment, end: &Assignment) -> Rational {
    let n = start.len();
    let mut sum = zero();
    for r in 0..1u64 << n {
        let rho = Assignment::from_index(r, n);
        let p1 = brute_phase(clause, start, &rho);
        if p1 != zero() {
            sum += p1 * brute_phase(clause, &rho, end);
        }
    }
    sum / Rational::from_integer((1u64 << n).into())
}

/// Clause on variables `1..=k`; bit `i` of `signs` negates literal `i + 1`.
pub fn local_clause(k: usize, signs: u64) -> Clause {
    Clause::new(
        (0..k)
            .map(|i| Literal::new(i + 1, signs >> i & 1 == 1))
            .collect(),
    )
    .unwrap()
}

/// Local assignment making exactly literal `i` (0-based) of `clause` true.
pub fn only_literal_true(clause: &Clause, i: usize) -> Assignment {
    let mut a = Assignment::zeros(clause.width());
    for (j, l) in clause.literals().iter().enumerate() {
        // A literal is true iff the variable's value differs from its negation flag.
        if (j == i) != l.is_negated() {
            a.flip(l.var());
        }
    }
    a
}

pub fn max_sat(f: &Formula) -> Rational {
    let n = f.num_vars();
    let best = (0..1u64 << n)
        .map(|i| f.satisfied_count(&Assignment::from_index(i, n)))
        .max()
        .unwrap();
    ratio(best as i64, f.num_clauses() as i64)
}

pub fn first_satisfying(f: &Formula) -> Option<Assignment> {
    let n = f.num_vars();
    (0..1u64 << n)
        .map(|i| Assignment::from_index(i, n))
        .find(|a| f.is_satisfied(a))
}

/// All eight sign patterns on variables 1..3: max-sat 7/8.
pub fn all_eight() -> Formula {
    Formula::new(3, (0..8).map(|s| local_clause(3, s)).collect()).unwrap()
}

/// Random width-`k` formula with distinct sorted variables per clause.
pub fn random_formula(n: usize, m: usize, k: usize, seed: u64) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..m)
        .map(|_| {
            let mut vars = rand::seq::index::sample(&mut rng, n, k).into_vec();
            vars.sort_unstable();
            Clause::new(
                vars.into_iter()
                    .map(|v| Literal::new(v + 1, rng.gen()))
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    Formula::new(n, clauses).unwrap()
}

/// Planted instances whose exact optimum is 1, with a value-1 witness.
pub fn value_one_instances(
    n: usize,
    m: usize,
    k: usize,
    want: usize,
) -> Vec<(Instance, eksr_core::ReconfSequence)> {
    let mut out = Vec::new();
    for seed in 0..500 {
        let inst =
            gen_random_instance(&PlantedGenerator::with_random_plants(n, m, k, seed)).unwrap();
        let res = opt_exact(&inst, 24).unwrap();
        if res.opt == eksr_core::rational::one() {
            out.push((inst, res.witness));
            if out.len() == want {
                break;
            }
        }
    }
    assert_eq!(out.len(), want, "not enough value-1 instances");
    out
}
