//! Finite models of randomized verifiers.
//!
//! A verifier is a list of weighted atoms. Each atom reads the proof at its query positions
//! and applies a truth table; the acceptance probability is the total weight of accepting
//! atoms. Weights are exact, so every probability below is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Clause, Formula, Literal};
use crate::rational::{binomial, format_ratio, int, one, parse_ratio, ratio, zero, Rational};

pub const Q_CAP: usize = 12;
pub const ATOM_CAP: u128 = 10_000_000;

/// Truth table over `{0,1}^arity`; bit `t` of a view index is the value read at query `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    arity: usize,
    bits: Vec<u64>,
}

impl Predicate {
    pub fn from_fn(arity: usize, f: impl Fn(u64) -> bool) -> Self {
        let size = 1usize << arity;
        let mut bits = vec![0u64; size.div_ceil(64)];
        for v in 0..size {
            if f(v as u64) {
                bits[v / 64] |= 1 << (v % 64);
            }
        }
        Predicate { arity, bits }
    }

    pub fn always(arity: usize) -> Self {
        Predicate::from_fn(arity, |_| true)
    }

    /// Rejects exactly `view`.
    pub fn or_rejecting(arity: usize, view: u64) -> Self {
        Predicate::from_fn(arity, |v| v != view)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn accepts(&self, view: u64) -> bool {
        self.bits[(view / 64) as usize] >> (view % 64) & 1 == 1
    }

    pub fn rejecting_views(&self) -> impl Iterator<Item = u64> + '_ {
        (0..1u64 << self.arity).filter(|&v| !self.accepts(v))
    }

    /// Byte `i` holds views `8i .. 8i+7`, lowest view in the lowest bit; bytes in order.
    pub fn to_hex(&self) -> String {
        let size = 1usize << self.arity;
        (0..size.div_ceil(8))
            .map(|i| {
                let byte = (0..8)
                    .filter(|b| i * 8 + b < size && self.accepts((i * 8 + b) as u64))
                    .fold(0u8, |acc, b| acc | 1 << b);
                format!("{byte:02x}")
            })
            .collect()
    }

    pub fn from_hex(arity: usize, hex: &str) -> Result<Self> {
        let size = 1usize << arity;
        if hex.len() != size.div_ceil(8) * 2 {
            return Err(Error::invalid(format!(
                "truth table for arity {arity} needs {} hex digits, got {}",
                size.div_ceil(8) * 2,
                hex.len()
            )));
        }
        let bytes = (0..hex.len() / 2)
            .map(|i| {
                u8::from_str_radix(&hex[2 * i..2 * i + 2], 16)
                    .map_err(|_| Error::invalid(format!("bad hex in truth table `{hex}`")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Predicate::from_fn(arity, |v| {
            bytes[(v / 8) as usize] >> (v % 8) & 1 == 1
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub weight: Rational,
    /// 1-based proof positions.
    pub queries: Vec<usize>,
    pub predicate: Predicate,
}

impl Atom {
    fn view(&self, proof: &[bool]) -> u64 {
        self.queries
            .iter()
            .enumerate()
            .fold(0u64, |acc, (t, &p)| acc | (proof[p - 1] as u64) << t)
    }

    pub fn accepts(&self, proof: &[bool]) -> bool {
        self.predicate.accepts(self.view(proof))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifierSpec {
    proof_len: usize,
    atoms: Vec<Atom>,
}

impl VerifierSpec {
    pub fn new(proof_len: usize, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("verifier needs at least one atom"));
        }
        let mut total = zero();
        for a in &atoms {
            if a.weight <= zero() {
                return Err(Error::invalid("atom weights must be positive"));
            }
            if a.queries.len() > Q_CAP {
                return Err(Error::CapExceeded {
                    what: "queries per atom",
                    limit: Q_CAP as u128,
                    actual: a.queries.len() as u128,
                });
            }
            if a.predicate.arity() != a.queries.len() {
                return Err(Error::invalid("predicate arity differs from query count"));
            }
            if let Some(&p) = a.queries.iter().find(|&&p| p == 0 || p > proof_len) {
                return Err(Error::invalid(format!(
                    "query position {p} outside 1..={proof_len}"
                )));
            }
            total += &a.weight;
        }
        if total != one() {
            return Err(Error::invalid(format!(
                "atom weights sum to {}, not 1",
                format_ratio(&total)
            )));
        }
        Ok(VerifierSpec { proof_len, atoms })
    }

    pub fn proof_len(&self) -> usize {
        self.proof_len
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_weight(&self) -> Rational {
        self.atoms.iter().fold(zero(), |acc, a| acc + &a.weight)
    }

    pub fn max_queries(&self) -> usize {
        self.atoms
            .iter()
            .map(|a| a.queries.len())
            .max()
            .unwrap_or(0)
    }

    fn check_proof(&self, proof: &[bool]) -> Result<()> {
        if proof.len() != self.proof_len {
            return Err(Error::LengthMismatch {
                expected: self.proof_len,
                found: proof.len(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SpecJson::from(self)).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SpecJson = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("verifier JSON: {e}")))?;
        let atoms = raw
            .atoms
            .into_iter()
            .map(|a| {
                Ok(Atom {
                    weight: parse_ratio(&a.weight)?,
                    predicate: Predicate::from_hex(a.queries.len(), &a.table)?,
                    queries: a.queries,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        VerifierSpec::new(raw.proof_len, atoms)
    }
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    proof_len: usize,
    atoms: Vec<AtomJson>,
}

#[derive(Serialize, Deserialize)]
struct AtomJson {
    weight: String,
    queries: Vec<usize>,
    table: String,
}

impl From<&VerifierSpec> for SpecJson {
    fn from(v: &VerifierSpec) -> Self {
        SpecJson {
            proof_len: v.proof_len,
            atoms: v
                .atoms
                .iter()
                .map(|a| AtomJson {
                    weight: format_ratio(&a.weight),
                    queries: a.queries.clone(),
                    table: a.predicate.to_hex(),
                })
                .collect(),
        }
    }
}

pub fn acceptance_probability(v: &VerifierSpec, proof: &[bool]) -> Result<Rational> {
    v.check_proof(proof)?;
    Ok(v.atoms
        .iter()
        .filter(|a| a.accepts(proof))
        .fold(zero(), |acc, a| acc + &a.weight))
}

pub fn rejection_probability(v: &VerifierSpec, proof: &[bool]) -> Result<Rational> {
    Ok(one() - acceptance_probability(v, proof)?)
}

fn clause_predicate(c: &Clause) -> Predicate {
    Predicate::from_fn(c.width(), |v| {
        c.literals()
            .iter()
            .enumerate()
            .any(|(t, l)| l.eval_bit(v >> t & 1 == 1))
    })
}

/// One atom of weight `1/m` per clause, checking that clause.
pub fn make_clause_verifier(formula: &Formula) -> Result<VerifierSpec> {
    let w = ratio(1, formula.num_clauses() as i64);
    let atoms = formula
        .clauses()
        .iter()
        .map(|c| Atom {
            weight: w.clone(),
            queries: c.vars().collect(),
            predicate: clause_predicate(c),
        })
        .collect();
    VerifierSpec::new(formula.num_vars(), atoms)
}

/// Lexicographic `p`-subsets of `1..=n`.
fn subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=p).collect();
    if p > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..p).rev().find(|&i| cur[i] < n - p + i + 1) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..p {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Uniform over `p`-subsets of the proof; accepts iff every queried bit is 1.
pub fn make_all_one(p: usize, ell: usize) -> Result<VerifierSpec> {
    if p == 0 || p > ell {
        return Err(Error::invalid(format!("need 1 ≤ p ≤ ℓ, got p={p} ℓ={ell}")));
    }
    let count = binomial(ell as u64, p as u64);
    let count_u = count.to_u128().unwrap_or(u128::MAX);
    if count_u > ATOM_CAP {
        return Err(Error::CapExceeded {
            what: "all-one verifier atoms",
            limit: ATOM_CAP,
            actual: count_u,
        });
    }
    let w = Rational::new(BigInt::one(), count);
    let all = (1u64 << p) - 1;
    let pred = Predicate::from_fn(p, |v| v == all);
    let atoms = subsets(ell, p)
        .into_iter()
        .map(|queries| Atom {
            weight: w.clone(),
            queries,
            predicate: pred.clone(),
        })
        .collect();
    VerifierSpec::new(ell, atoms)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifierParams {
    pub q: usize,
    /// Soundness gap `1 − s`.
    pub g: Rational,
    pub mu: Rational,
    pub delta: Rational,
    pub lambda: usize,
    pub k: usize,
}

impl VerifierParams {
    /// `μ = q/2`, `δ = ε/4`, `λ = ⌊k/q⌋`.
    pub fn new(q: usize, g: Rational, epsilon: &Rational, k: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("q must be positive"));
        }
        if g <= zero() || g >= one() {
            return Err(Error::invalid("g must lie in (0,1)"));
        }
        if *epsilon <= zero() || *epsilon >= one() {
            return Err(Error::invalid("ε must lie in (0,1)"));
        }
        let p = VerifierParams {
            q,
            mu: ratio(q as i64, 2),
            delta: epsilon / int(4),
            lambda: k / q,
            k,
            g,
        };
        let w = p.mixture_weight();
        if w <= zero() || w >= one() {
            return Err(Error::invalid(format!(
                "mixture weight μ/(g·k) = {} is not in (0,1)",
                format_ratio(&w)
            )));
        }
        if p.lambda < 2 {
            return Err(Error::invalid(format!("λ = ⌊k/q⌋ = {} < 2", p.lambda)));
        }
        Ok(p)
    }

    /// `μ / (g·k)`.
    pub fn mixture_weight(&self) -> Rational {
        &self.mu / (&self.g * int(self.k as i64))
    }
}

/// Runs `base` on the first half with probability `w = μ/(g·k)` and `allone` on the second
/// half otherwise.
pub fn make_combined(
    base: &VerifierSpec,
    allone: &VerifierSpec,
    params: &VerifierParams,
) -> Result<VerifierSpec> {
    let w = params.mixture_weight();
    if w <= zero() || w >= one() {
        return Err(Error::invalid("mixture weight must lie in (0,1)"));
    }
    let rest = one() - &w;
    let shift = base.proof_len;
    let mut atoms: Vec<Atom> = base
        .atoms
        .iter()
        .map(|a| Atom {
            weight: &a.weight * &w,
            ..a.clone()
        })
        .collect();
    atoms.extend(allone.atoms.iter().map(|a| Atom {
        weight: &a.weight * &rest,
        queries: a.queries.iter().map(|p| p + shift).collect(),
        predicate: a.predicate.clone(),
    }));
    VerifierSpec::new(base.proof_len + allone.proof_len, atoms)
}

/// One factor of a Horn product: a verifier and the offset added to its query positions.
struct Part<'a> {
    spec: &'a VerifierSpec,
    shift: usize,
}

/// Product over one atom per part. The first part must accept, every later part must reject,
/// for the combined atom to reject. With `disjoint_only`, tuples whose query sets overlap
/// become always-accept atoms without queries.
fn horn_product(parts: &[Part], proof_len: usize, disjoint_only: bool) -> Result<VerifierSpec> {
    let count = parts
        .iter()
        .try_fold(1u128, |acc, p| acc.checked_mul(p.spec.atoms.len() as u128))
        .unwrap_or(u128::MAX);
    if count > ATOM_CAP {
        return Err(Error::CapExceeded {
            what: "horn verifier atoms",
            limit: ATOM_CAP,
            actual: count,
        });
    }
    let mut atoms = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; parts.len()];
    loop {
        let chosen: Vec<&Atom> = parts
            .iter()
            .zip(&idx)
            .map(|(p, &i)| &p.spec.atoms[i])
            .collect();
        let weight = chosen.iter().fold(one(), |acc, a| acc * &a.weight);
        let queries: Vec<Vec<usize>> = chosen
            .iter()
            .zip(parts)
            .map(|(a, p)| a.queries.iter().map(|q| q + p.shift).collect())
            .collect();
        let overlap = {
            let mut all: Vec<usize> = queries.iter().flatten().copied().collect();
            let before = all.len();
            all.sort_unstable();
            all.dedup();
            all.len() != before
        };
        if disjoint_only && overlap {
            atoms.push(Atom {
                weight,
                queries: Vec::new(),
                predicate: Predicate::always(0),
            });
        } else {
            // Repeated positions are read once.
            let mut merged: Vec<usize> = Vec::new();
            for &q in queries.iter().flatten() {
                if !merged.contains(&q) {
                    merged.push(q);
                }
            }
            if merged.len() > Q_CAP {
                return Err(Error::CapExceeded {
                    what: "queries per atom",
                    limit: Q_CAP as u128,
                    actual: merged.len() as u128,
                });
            }
            let slots: Vec<Vec<usize>> = queries
                .iter()
                .map(|qs| {
                    qs.iter()
                        .map(|q| merged.iter().position(|m| m == q).unwrap())
                        .collect()
                })
                .collect();
            let preds: Vec<&Predicate> = chosen.iter().map(|a| &a.predicate).collect();
            let predicate = Predicate::from_fn(merged.len(), |view| {
                preds.iter().zip(&slots).enumerate().any(|(i, (p, slot))| {
                    let local = slot
                        .iter()
                        .enumerate()
                        .fold(0u64, |acc, (t, &s)| acc | (view >> s & 1) << t);
                    p.accepts(local) == (i == 0)
                })
            });
            atoms.push(Atom {
                weight,
                queries: merged,
                predicate,
            });
        }
        // Odometer, last part fastest.
        let mut pos = parts.len();
        loop {
            if pos == 0 {
                return VerifierSpec::new(proof_len, atoms);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < parts[pos].spec.atoms.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Horn verifier: one atom of `w`, `λ − 1` of `allone_q`, and optionally one of
/// `allone_rem`. Accepts if the query sets overlap, if the `w` atom accepts, or if some
/// all-one atom rejects. All-one atoms read the tail of `w`'s proof.
pub fn make_horn(
    w: &VerifierSpec,
    allone_q: &VerifierSpec,
    allone_rem: Option<&VerifierSpec>,
    lambda: usize,
) -> Result<VerifierSpec> {
    if lambda < 2 {
        return Err(Error::invalid(format!("need λ ≥ 2, got {lambda}")));
    }
    let tail = |a: &VerifierSpec| {
        w.proof_len
            .checked_sub(a.proof_len)
            .ok_or_else(|| Error::invalid("all-one verifier longer than the combined proof"))
    };
    let mut parts = vec![Part { spec: w, shift: 0 }];
    let shift_q = tail(allone_q)?;
    for _ in 1..lambda {
        parts.push(Part {
            spec: allone_q,
            shift: shift_q,
        });
    }
    if let Some(r) = allone_rem {
        parts.push(Part {
            spec: r,
            shift: tail(r)?,
        });
    }
    horn_product(&parts, w.proof_len, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TupleMode {
    /// Independent draws; repeated or overlapping clauses are evaluated as drawn.
    WithReplacement,
    /// Tuples sharing a variable accept outright.
    Disjoint,
}

/// λ clause checks drawn from `formula`: rejects iff the first clause is violated and the
/// others are satisfied.
pub fn make_overview_horn(
    formula: &Formula,
    lambda: usize,
    mode: TupleMode,
) -> Result<VerifierSpec> {
    if lambda < 2 {
        return Err(Error::invalid(format!("need λ ≥ 2, got {lambda}")));
    }
    let base = make_clause_verifier(formula)?;
    // Negating every later clause check turns "violated first, satisfied rest" into the
    // product's "first accepts or some later rejects" acceptance rule.
    let parts: Vec<Part> = (0..lambda)
        .map(|_| Part {
            spec: &base,
            shift: 0,
        })
        .collect();
    horn_product(&parts, base.proof_len, mode == TupleMode::Disjoint)
}

/// Splits each atom with `R > 0` rejecting views into `R` atoms of weight `w/R`, each
/// rejecting one of those views.
pub fn make_or_emulator(horn: &VerifierSpec) -> Result<VerifierSpec> {
    let mut atoms = Vec::new();
    for a in &horn.atoms {
        let rejecting: Vec<u64> = a.predicate.rejecting_views().collect();
        if rejecting.is_empty() {
            atoms.push(a.clone());
            continue;
        }
        let w = &a.weight / int(rejecting.len() as i64);
        for view in rejecting {
            atoms.push(Atom {
                weight: w.clone(),
                queries: a.queries.clone(),
                predicate: Predicate::or_rejecting(a.queries.len(), view),
            });
        }
    }
    if atoms.len() as u128 > ATOM_CAP {
        return Err(Error::CapExceeded {
            what: "OR-emulator atoms",
            limit: ATOM_CAP,
            actual: atoms.len() as u128,
        });
    }
    VerifierSpec::new(horn.proof_len, atoms)
}

/// Result of [`cnf_from_or_verifier`]: the formula and the multiplier `D` (lcm of rejecting
/// atom weight denominators).
#[derive(Clone, Debug)]
pub struct EmittedCnf {
    pub formula: Formula,
    pub multiplier: BigInt,
}

impl EmittedCnf {
    /// `D / m_Φ`: `1 − value(Φ, Π) = ratio · Pr[X rejects Π]`.
    pub fn rejection_ratio(&self) -> Rational {
        Rational::new(
            self.multiplier.clone(),
            BigInt::from(self.formula.num_clauses()),
        )
    }
}

/// For every atom with exactly one rejecting view, `weight · D` copies of the clause that
/// is false exactly on that view (positive literal where the view reads 0).
pub fn cnf_from_or_verifier(x: &VerifierSpec, width_k: usize) -> Result<EmittedCnf> {
    let mut rejecting = Vec::new();
    for a in &x.atoms {
        let views: Vec<u64> = a.predicate.rejecting_views().collect();
        match views.len() {
            0 => {}
            1 => {
                if a.queries.len() != width_k {
                    return Err(Error::WidthMismatch {
                        expected: width_k,
                        found: a.queries.len(),
                    });
                }
                rejecting.push((a, views[0]));
            }
            r => {
                return Err(Error::invalid(format!(
                    "atom rejects {r} views; apply the OR emulator first"
                )))
            }
        }
    }
    if rejecting.is_empty() {
        return Err(Error::EmptyFormula);
    }
    let d = rejecting
        .iter()
        .fold(BigInt::one(), |acc, (a, _)| acc.lcm(a.weight.denom()));
    let total: BigInt = rejecting
        .iter()
        .map(|(a, _)| (&a.weight * Rational::from_integer(d.clone())).to_integer())
        .sum();
    let total_u = total.to_u128().unwrap_or(u128::MAX);
    if total_u > ATOM_CAP {
        return Err(Error::CapExceeded {
            what: "emitted clause copies",
            limit: ATOM_CAP,
            actual: total_u,
        });
    }
    let mut clauses = Vec::with_capacity(total_u as usize);
    for (a, view) in rejecting {
        let lits = a
            .queries
            .iter()
            .enumerate()
            .map(|(t, &p)| Literal::new(p, view >> t & 1 == 1))
            .collect();
        let c = Clause::new(lits)?;
        let copies = (&a.weight * Rational::from_integer(d.clone()))
            .to_integer()
            .to_usize()
            .expect("bounded by cap");
        clauses.extend(std::iter::repeat_n(c, copies));
    }
    Ok(EmittedCnf {
        formula: Formula::new(x.proof_len, clauses)?,
        multiplier: d,
    })
}

/// Total weight of atoms reading `position`.
pub fn query_probability(v: &VerifierSpec, position: usize) -> Result<Rational> {
    if position == 0 || position > v.proof_len {
        return Err(Error::invalid(format!(
            "position {position} outside 1..={}",
            v.proof_len
        )));
    }
    Ok(v.atoms
        .iter()
        .filter(|a| a.queries.contains(&position))
        .fold(zero(), |acc, a| acc + &a.weight))
}

/// `⌈ μ(μ+δ)/δ · 1/(g·q) ⌉` with `μ = q/2`, `δ = ε/4`.
pub fn lambda_zero(q: usize, g: &Rational, epsilon: &Rational) -> Result<u64> {
    if q == 0 || g.is_zero() || epsilon.is_zero() {
        return Err(Error::invalid("q, g and ε must be non-zero"));
    }
    if *epsilon <= zero() || *epsilon >= one() || *g <= zero() || *g >= one() {
        return Err(Error::invalid("g and ε must lie in (0,1)"));
    }
    let mu = ratio(q as i64, 2);
    let delta = epsilon / int(4);
    let v = &mu * (&mu + &delta) / &delta / (g * int(q as i64));
    v.ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::invalid("λ₀ does not fit in 64 bits"))
}

/// `ε(1 − ε)^{λ−1}`.
pub fn horn_rejection(lambda: usize, eps: &Rational) -> Rational {
    let mut p = eps.clone();
    let q = one() - eps;
    for _ in 1..lambda {
        p *= &q;
    }
    p
}

pub fn horn_rejection_curve(
    lambda: usize,
    samples: &[Rational],
) -> Result<Vec<(Rational, Rational)>> {
    samples
        .iter()
        .map(|e| {
            if *e < zero() || *e > one() {
                return Err(Error::invalid(format!(
                    "ε = {} outside [0,1]",
                    format_ratio(e)
                )));
            }
            Ok((e.clone(), horn_rejection(lambda, e)))
        })
        .collect()
}

/// `{0, 1/steps, …, 1}`.
pub fn uniform_grid(steps: usize) -> Vec<Rational> {
    (0..=steps).map(|i| ratio(i as i64, steps as i64)).collect()
}

/// First sample attaining the maximum of the curve.
pub fn curve_argmax(curve: &[(Rational, Rational)]) -> Option<Rational> {
    let mut best: Option<&(Rational, Rational)> = None;
    for p in curve {
        if best.is_none_or(|b| p.1 > b.1) {
            best = Some(p);
        }
    }
    best.map(|p| p.0.clone())
}
