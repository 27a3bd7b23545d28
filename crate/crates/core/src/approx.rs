//! Approximation through a random intermediate assignment.
//!
//! A sequence is built as `start ⇝ rho ⇝ end`: first flip the variables where `start` and
//! `rho` differ in some order, then those where `rho` and `end` differ. With `rho` uniform
//! and both orders uniform, the survival probability of each clause factorizes into two
//! ballot-style quantities that depend only on per-clause counts ([`PhaseState`]). The
//! deterministic algorithm fixes `rho` and both orders by conditional expectations.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formula::{diff_vars, Assignment, Clause, Instance, ReconfSequence};
use crate::rational::{binomial, int, one, pow2, ratio, zero, Rational};

/// Clause-local counts for one phase.
///
/// `true_count` literals are currently true; `offs` pending flips turn a true literal false
/// and `ons` pending flips turn a false literal true.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhaseState {
    pub true_count: u32,
    pub offs: u32,
    pub ons: u32,
}

impl PhaseState {
    pub fn new(true_count: u32, offs: u32, ons: u32) -> Self {
        PhaseState {
            true_count,
            offs,
            ons,
        }
    }

    /// Counts for moving the clause from `from` to `to`.
    pub fn between(clause: &Clause, from: &Assignment, to: &Assignment) -> Self {
        let mut s = PhaseState::new(0, 0, 0);
        for l in clause.literals() {
            let (x, y) = (l.eval(from), l.eval(to));
            s.true_count += x as u32;
            s.offs += (x && !y) as u32;
            s.ons += (!x && y) as u32;
        }
        s
    }

    fn after_off(self) -> Self {
        PhaseState::new(self.true_count - 1, self.offs - 1, self.ons)
    }

    fn after_on(self) -> Self {
        PhaseState::new(self.true_count + 1, self.offs, self.ons - 1)
    }
}

/// Memo table for [`phase_survival`].
#[derive(Default)]
pub struct SurvivalTable {
    memo: HashMap<PhaseState, Rational>,
}

impl SurvivalTable {
    pub fn new() -> Self {
        SurvivalTable::default()
    }

    pub fn get(&mut self, s: PhaseState) -> Rational {
        if s.true_count == 0 {
            return zero();
        }
        if s.offs == 0 {
            return one();
        }
        if let Some(v) = self.memo.get(&s) {
            return v.clone();
        }
        let total = (s.offs + s.ons) as i64;
        let mut v = ratio(s.offs as i64, total) * self.get(s.after_off());
        if s.ons > 0 {
            v += ratio(s.ons as i64, total) * self.get(s.after_on());
        }
        self.memo.insert(s, v.clone());
        v
    }
}

/// Probability that a uniform interleaving of `offs` decrements and `ons` increments,
/// starting from `true_count`, never brings the count to 0.
pub fn phase_survival(state: PhaseState) -> Rational {
    SurvivalTable::new().get(state)
}

/// Probability that a uniform element of the irredundant sequences through `rho` keeps
/// `clause` satisfied at every step.
pub fn clause_survival_given_rho(
    clause: &Clause,
    start: &Assignment,
    end: &Assignment,
    rho: &Assignment,
) -> Rational {
    let mut t = SurvivalTable::new();
    survival_with(&mut t, clause, start, end, rho)
}

fn survival_with(
    t: &mut SurvivalTable,
    clause: &Clause,
    start: &Assignment,
    end: &Assignment,
    rho: &Assignment,
) -> Rational {
    let p1 = t.get(PhaseState::between(clause, start, rho));
    if p1.is_zero() {
        return p1;
    }
    p1 * t.get(PhaseState::between(clause, rho, end))
}

/// Endpoint bits of one clause, with survival probabilities tabulated over every
/// restriction of `rho` to the clause's variables (bit `t` of the mask is the value given
/// to the clause's `t`-th variable).
struct ClauseTable {
    vars: Vec<usize>,
    by_mask: Vec<Rational>,
}

impl ClauseTable {
    fn build(t: &mut SurvivalTable, clause: &Clause, start: &Assignment, end: &Assignment) -> Self {
        let vars: Vec<usize> = clause.vars().collect();
        let k = vars.len();
        let mut by_mask = Vec::with_capacity(1 << k);
        // Local coordinates: assignments over the clause's variables only.
        let local = Clause::new(
            clause
                .literals()
                .iter()
                .enumerate()
                .map(|(i, l)| crate::formula::Literal::new(i + 1, l.is_negated()))
                .collect(),
        )
        .expect("clause is valid");
        let restrict = |a: &Assignment| Assignment::new(vars.iter().map(|&v| a.get(v)).collect());
        let (ls, le) = (restrict(start), restrict(end));
        for mask in 0..1u64 << k {
            let rho = Assignment::from_index(mask, k);
            by_mask.push(survival_with(t, &local, &ls, &le, &rho));
        }
        ClauseTable { vars, by_mask }
    }

    /// Average over completions of the variables not fixed by `fixed` (indices ≥ its length).
    fn average(&self, fixed: &[bool]) -> Rational {
        let mut base = 0usize;
        let mut free = Vec::new();
        for (i, &v) in self.vars.iter().enumerate() {
            match fixed.get(v - 1) {
                Some(&b) => base |= (b as usize) << i,
                None => free.push(i),
            }
        }
        let mut sum = zero();
        for sub in 0..1usize << free.len() {
            let mut mask = base;
            for (j, &i) in free.iter().enumerate() {
                mask |= (sub >> j & 1) << i;
            }
            sum += &self.by_mask[mask];
        }
        sum / Rational::from_integer(pow2(free.len() as u32))
    }
}

/// Expected fraction of clauses that stay satisfied throughout, with `rho` uniform apart from
/// its first `rho_prefix.len()` bits and both flip orders uniform.
pub fn expected_sequence_value(instance: &Instance, rho_prefix: &[bool]) -> Result<Rational> {
    if rho_prefix.len() > instance.num_vars() {
        return Err(Error::LengthMismatch {
            expected: instance.num_vars(),
            found: rho_prefix.len(),
        });
    }
    let mut t = SurvivalTable::new();
    let total = instance
        .formula
        .clauses()
        .iter()
        .map(|c| ClauseTable::build(&mut t, c, &instance.start, &instance.end).average(rho_prefix))
        .fold(zero(), |acc, x| acc + x);
    Ok(total / int(instance.num_clauses() as i64))
}

/// `rho` plus the flip orders of both phases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundingPlan {
    pub rho: Assignment,
    pub phase1_order: Vec<usize>,
    pub phase2_order: Vec<usize>,
}

impl RoundingPlan {
    pub fn sequence(&self, start: &Assignment) -> ReconfSequence {
        let mut flips = self.phase1_order.clone();
        flips.extend_from_slice(&self.phase2_order);
        ReconfSequence::from_flips(start, &flips)
    }
}

/// Samples `rho` bit by bit (variable 1 first) and shuffles both phases, all from one
/// ChaCha8 stream seeded with `seed`.
pub fn sample_plan(instance: &Instance, seed: u64) -> RoundingPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = Assignment::new(
        (0..instance.num_vars())
            .map(|_| rng.gen::<bool>())
            .collect(),
    );
    let mut phase1_order = diff_vars(&instance.start, &rho).expect("same length");
    let mut phase2_order = diff_vars(&rho, &instance.end).expect("same length");
    phase1_order.shuffle(&mut rng);
    phase2_order.shuffle(&mut rng);
    RoundingPlan {
        rho,
        phase1_order,
        phase2_order,
    }
}

pub fn randomized_round(instance: &Instance, seed: u64) -> ReconfSequence {
    sample_plan(instance, seed).sequence(&instance.start)
}

pub fn derandomize(instance: &Instance) -> ReconfSequence {
    derandomize_plan(instance).sequence(&instance.start)
}

/// Fixes `rho`, then the phase-1 order, then the phase-2 order, each step maximizing the
/// conditional expected number of clauses satisfied throughout.
///
/// Identical endpoints short-circuit to `rho = start` with empty orders: the length-1
/// sequence already has value 1.
pub fn derandomize_plan(instance: &Instance) -> RoundingPlan {
    if instance.start == instance.end {
        return RoundingPlan {
            rho: instance.start.clone(),
            phase1_order: Vec::new(),
            phase2_order: Vec::new(),
        };
    }
    let n = instance.num_vars();
    let clauses = instance.formula.clauses();
    let occ = instance.formula.occurrences();
    let mut t = SurvivalTable::new();

    let tables: Vec<ClauseTable> = clauses
        .iter()
        .map(|c| ClauseTable::build(&mut t, c, &instance.start, &instance.end))
        .collect();
    let mut fixed = Vec::with_capacity(n);
    for v in 1..=n {
        let score = |fixed: &mut Vec<bool>, bit: bool| {
            fixed.push(bit);
            let s = occ[v - 1]
                .iter()
                .fold(zero(), |acc, &j| acc + tables[j].average(fixed));
            fixed.pop();
            s
        };
        let s0 = score(&mut fixed, false);
        let s1 = score(&mut fixed, true);
        fixed.push(s1 > s0);
    }
    let rho = Assignment::new(fixed);

    let p1: Vec<PhaseState> = clauses
        .iter()
        .map(|c| PhaseState::between(c, &instance.start, &rho))
        .collect();
    let p2: Vec<PhaseState> = clauses
        .iter()
        .map(|c| PhaseState::between(c, &rho, &instance.end))
        .collect();

    let f2: Vec<Rational> = p2.iter().map(|&s| t.get(s)).collect();
    let (phase1_order, alive) = greedy_order(
        &mut t,
        clauses,
        &occ,
        &instance.start,
        &rho,
        p1,
        &f2,
        vec![true; clauses.len()],
    );
    let f1: Vec<Rational> = alive
        .iter()
        .map(|&a| if a { one() } else { zero() })
        .collect();
    let (phase2_order, _) =
        greedy_order(&mut t, clauses, &occ, &rho, &instance.end, p2, &f1, alive);
    RoundingPlan {
        rho,
        phase1_order,
        phase2_order,
    }
}

/// One phase of the conditional-expectation walk from `from` to `to`. `other` is the fixed
/// survival factor contributed by the other phase. Returns the order and which clauses
/// survived this phase.
#[allow(clippy::too_many_arguments)]
fn greedy_order(
    t: &mut SurvivalTable,
    clauses: &[Clause],
    occ: &[Vec<usize>],
    from: &Assignment,
    to: &Assignment,
    mut states: Vec<PhaseState>,
    other: &[Rational],
    mut alive: Vec<bool>,
) -> (Vec<usize>, Vec<bool>) {
    let mut pending = diff_vars(from, to).expect("same length");
    let mut cur = from.clone();
    let mut order = Vec::with_capacity(pending.len());
    let step = |s: PhaseState, clause: &Clause, cur: &Assignment, v: usize| {
        let lit = clause
            .literals()
            .iter()
            .find(|l| l.var() == v)
            .expect("clause mentions v");
        if lit.eval(cur) {
            s.after_off()
        } else {
            s.after_on()
        }
    };
    while !pending.is_empty() {
        let mut best: Option<(Rational, usize)> = None;
        for (pi, &v) in pending.iter().enumerate() {
            let mut gain = zero();
            for &j in &occ[v - 1] {
                if !alive[j] || other[j].is_zero() {
                    continue;
                }
                let next = step(states[j], &clauses[j], &cur, v);
                gain += (t.get(next) - t.get(states[j])) * &other[j];
            }
            // `pending` is ascending, so strict comparison keeps the smallest index on ties.
            if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                best = Some((gain, pi));
            }
        }
        let (_, pi) = best.expect("pending non-empty");
        let v = pending.remove(pi);
        for &j in &occ[v - 1] {
            if !alive[j] {
                continue;
            }
            states[j] = step(states[j], &clauses[j], &cur, v);
            if states[j].true_count == 0 {
                alive[j] = false;
            }
        }
        cur.flip(v);
        order.push(v);
    }
    (order, alive)
}

/// Which guarantee applies: endpoints differing on the clause, or agreeing on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundCase {
    Neq,
    Eq,
}

/// Lower bound on the survival probability of a clause whose endpoints each make exactly
/// one literal true: different literals (`Neq`) or the same literal (`Eq`).
pub fn closed_form_bound(k: usize, case: BoundCase) -> Result<Rational> {
    if k < 3 {
        return Err(Error::invalid(format!(
            "closed-form bound needs k ≥ 3, got {k}"
        )));
    }
    let big_k = match case {
        BoundCase::Neq => k - 2,
        BoundCase::Eq => k - 1,
    } as u64;
    let denom = Rational::from_integer(pow2(big_k as u32));
    let mut sum = zero();
    for j in 0..=big_k {
        let j_i = j as i64;
        let weight = Rational::from_integer(binomial(big_k, j)) / &denom;
        let sq = ratio(j_i, j_i + 1) * ratio(j_i, j_i + 1);
        let bracket = match case {
            BoundCase::Neq => sq + ratio(2 * (j_i + 1), j_i + 2) + one(),
            BoundCase::Eq => sq + one(),
        };
        sum += weight * bracket;
    }
    let front = match case {
        BoundCase::Neq => ratio(1, 4),
        BoundCase::Eq => ratio(1, 2),
    };
    Ok(front * sum)
}

/// `min(Neq, Eq)`: the guaranteed approximation factor for width `k`.
pub fn approximation_factor(k: usize) -> Result<Rational> {
    let a = closed_form_bound(k, BoundCase::Neq)?;
    let b = closed_form_bound(k, BoundCase::Eq)?;
    Ok(if a < b { a } else { b })
}

/// `1 − 1/(k−1) − 1/k`.
pub fn simple_lower_bound(k: usize) -> Rational {
    let k = k as i64;
    one() - ratio(1, k - 1) - ratio(1, k)
}

/// `Σ_{j=0..n} C(n, j) / (j + shift)` by direct summation.
pub fn binom_sum(n: u64, shift: u64) -> Rational {
    (0..=n).fold(zero(), |acc, j| {
        acc + Rational::new(binomial(n, j), BigInt::from(j + shift))
    })
}

/// Closed forms of [`binom_sum`] for `shift` 1 and 2.
pub fn binom_sum_closed(n: u64, shift: u64) -> Result<Rational> {
    let p = Rational::from_integer(pow2(n as u32 + 1));
    let n_r = int(n as i64);
    match shift {
        1 => Ok((p - one()) / (n_r + one())),
        2 => Ok((p * &n_r + one()) / ((&n_r + one()) * (n_r + int(2)))),
        _ => Err(Error::invalid(format!(
            "closed form known only for shift 1 or 2, got {shift}"
        ))),
    }
}
