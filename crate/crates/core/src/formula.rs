//! Instances, assignments, reconfiguration sequences and their values.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::error::{Error, ParseError, Result};
use crate::rational::Rational;

/// A variable (1-based) or its negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: usize,
    negated: bool,
}

impl Literal {
    pub fn new(var: usize, negated: bool) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal { var, negated }
    }

    pub fn pos(var: usize) -> Self {
        Literal::new(var, false)
    }

    pub fn neg(var: usize) -> Self {
        Literal::new(var, true)
    }

    /// Signed DIMACS-style integer: `-3` is the negation of `x3`.
    pub fn from_signed(v: i64) -> Option<Self> {
        if v == 0 {
            return None;
        }
        Some(Literal::new(v.unsigned_abs() as usize, v < 0))
    }

    pub fn to_signed(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    pub fn var(self) -> usize {
        self.var
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    pub fn negate(self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }

    /// Truth value of the literal when its variable takes `bit`.
    #[inline]
    pub fn eval_bit(self, bit: bool) -> bool {
        bit != self.negated
    }

    #[inline]
    pub fn eval(self, a: &Assignment) -> bool {
        self.eval_bit(a.get(self.var))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_signed())
    }
}

/// A disjunction of literals over pairwise distinct variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Result<Self> {
        if literals.is_empty() {
            return Err(Error::invalid("empty clause"));
        }
        let mut seen = BTreeSet::new();
        for l in &literals {
            if !seen.insert(l.var()) {
                return Err(Error::invalid(format!(
                    "variable {} appears more than once in a clause",
                    l.var()
                )));
            }
        }
        Ok(Clause { literals })
    }

    pub fn from_signed(lits: &[i64]) -> Result<Self> {
        let literals = lits
            .iter()
            .map(|&v| Literal::from_signed(v).ok_or_else(|| Error::invalid("zero literal")))
            .collect::<Result<Vec<_>>>()?;
        Clause::new(literals)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn width(&self) -> usize {
        self.literals.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.literals.iter().map(|l| l.var())
    }

    pub fn max_var(&self) -> usize {
        self.vars().max().unwrap_or(0)
    }

    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        self.literals.iter().any(|l| l.eval(a))
    }

    /// Number of literals made true by `a`.
    pub fn true_count(&self, a: &Assignment) -> usize {
        self.literals.iter().filter(|l| l.eval(a)).count()
    }

    pub fn shares_variable(&self, other: &Clause) -> bool {
        self.vars().any(|v| other.vars().any(|w| w == v))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.literals {
            write!(f, "{l} ")?;
        }
        write!(f, "0")
    }
}

/// A CNF formula over variables `1..=n`.
///
/// Formulas built with [`Formula::new`] are E*k*-CNF: every clause has the same width.
/// [`Formula::mixed`] admits varying widths; gadget reductions use it for intermediate
/// formulas that are later converted to uniform width.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    n: usize,
    width: Option<usize>,
    clauses: Vec<Clause>,
}

impl Formula {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        let f = Formula::mixed(n, clauses)?;
        if f.width.is_none() {
            return Err(Error::MixedWidth);
        }
        Ok(f)
    }

    pub fn mixed(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::EmptyFormula);
        }
        for c in &clauses {
            if c.max_var() > n {
                return Err(Error::invalid(format!(
                    "clause mentions variable {} but formula has {n}",
                    c.max_var()
                )));
            }
        }
        let w = clauses[0].width();
        let width = clauses.iter().all(|c| c.width() == w).then_some(w);
        Ok(Formula { n, width, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Uniform clause width, or `None` for a mixed-width formula.
    pub fn width(&self) -> Option<usize> {
        self.width
    }

    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Clause::width).max().unwrap_or(0)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn satisfied_count(&self, a: &Assignment) -> usize {
        self.clauses.iter().filter(|c| c.is_satisfied(a)).count()
    }

    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.is_satisfied(a))
    }

    /// For each variable (index `v - 1`), the indices of clauses mentioning it.
    pub fn occurrences(&self) -> Vec<Vec<usize>> {
        let mut occ = vec![Vec::new(); self.n];
        for (j, c) in self.clauses.iter().enumerate() {
            for v in c.vars() {
                occ[v - 1].push(j);
            }
        }
        occ
    }

    fn check_len(&self, a: &Assignment) -> Result<()> {
        if a.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: a.len(),
            });
        }
        Ok(())
    }
}

/// A truth assignment; position `i` holds the value of `x_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Assignment(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Assignment(vec![true; n])
    }

    /// Bit `i` of `index` is the value of `x_{i+1}`.
    pub fn from_index(index: u64, n: usize) -> Self {
        Assignment((0..n).map(|i| index >> i & 1 == 1).collect())
    }

    pub fn to_index(&self) -> u64 {
        assert!(self.0.len() <= 64, "assignment too long for an index");
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (b as u64) << i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value of variable `var` (1-based).
    #[inline]
    pub fn get(&self, var: usize) -> bool {
        self.0[var - 1]
    }

    pub fn set(&mut self, var: usize, bit: bool) {
        self.0[var - 1] = bit;
    }

    pub fn flip(&mut self, var: usize) {
        self.0[var - 1] = !self.0[var - 1];
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn hamming(&self, other: &Assignment) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Concatenation `self ∘ other`.
    pub fn concat(&self, other: &Assignment) -> Assignment {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        Assignment(bits)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseError::BadBitstring(s.to_string())),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Assignment)
    }
}

/// A non-empty list of equal-length assignments, consecutive ones at Hamming distance ≤ 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconfSequence {
    steps: Vec<Assignment>,
}

impl ReconfSequence {
    pub fn new(steps: Vec<Assignment>) -> Result<Self> {
        check_adjacency(&steps)?;
        Ok(ReconfSequence { steps })
    }

    pub fn singleton(a: Assignment) -> Self {
        ReconfSequence { steps: vec![a] }
    }

    /// Starts at `start` and flips the listed variables in order.
    pub fn from_flips(start: &Assignment, flips: &[usize]) -> Self {
        let mut steps = Vec::with_capacity(flips.len() + 1);
        let mut cur = start.clone();
        steps.push(cur.clone());
        for &v in flips {
            cur.flip(v);
            steps.push(cur.clone());
        }
        ReconfSequence { steps }
    }

    pub fn steps(&self) -> &[Assignment] {
        &self.steps
    }

    pub fn into_steps(self) -> Vec<Assignment> {
        self.steps
    }

    pub fn first(&self) -> &Assignment {
        &self.steps[0]
    }

    pub fn last(&self) -> &Assignment {
        self.steps.last().expect("non-empty")
    }

    /// The variable flipped at each transition; repeated assignments contribute nothing.
    pub fn flips(&self) -> Vec<usize> {
        self.steps
            .windows(2)
            .filter_map(|w| {
                w[0].bits()
                    .iter()
                    .zip(w[1].bits())
                    .position(|(a, b)| a != b)
                    .map(|i| i + 1)
            })
            .collect()
    }

    /// Appends `other`, dropping its first step when it repeats our last one.
    pub fn extend(&mut self, other: &ReconfSequence) {
        let skip = usize::from(other.first() == self.last());
        self.steps.extend(other.steps[skip..].iter().cloned());
    }
}

impl Deref for ReconfSequence {
    type Target = [Assignment];

    fn deref(&self) -> &[Assignment] {
        &self.steps
    }
}

fn check_adjacency(steps: &[Assignment]) -> Result<()> {
    let first = steps.first().ok_or(Error::EmptySequence)?;
    for s in steps {
        if s.len() != first.len() {
            return Err(Error::LengthMismatch {
                expected: first.len(),
                found: s.len(),
            });
        }
    }
    for (i, w) in steps.windows(2).enumerate() {
        let d = w[0].hamming(&w[1]);
        if d > 1 {
            return Err(Error::AdjacencyViolation {
                step: i + 1,
                distance: d,
            });
        }
    }
    Ok(())
}

/// An E*k*-CNF formula with two satisfying endpoint assignments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub formula: Formula,
    pub start: Assignment,
    pub end: Assignment,
}

impl Instance {
    pub fn new(formula: Formula, start: Assignment, end: Assignment) -> Result<Self> {
        formula.check_len(&start)?;
        formula.check_len(&end)?;
        if !formula.is_satisfied(&start) {
            return Err(Error::EndpointNotSatisfying { which: "start" });
        }
        if !formula.is_satisfied(&end) {
            return Err(Error::EndpointNotSatisfying { which: "end" });
        }
        Ok(Instance {
            formula,
            start,
            end,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.formula.num_vars()
    }

    pub fn num_clauses(&self) -> usize {
        self.formula.num_clauses()
    }
}

/// Fraction of clauses satisfied by `a`.
pub fn value(formula: &Formula, a: &Assignment) -> Result<Rational> {
    formula.check_len(a)?;
    Ok(Rational::new(
        formula.satisfied_count(a).into(),
        formula.num_clauses().into(),
    ))
}

/// Minimum of [`value`] over the steps.
pub fn seq_value(formula: &Formula, steps: &[Assignment]) -> Result<Rational> {
    check_adjacency(steps)?;
    formula.check_len(&steps[0])?;
    let worst = steps
        .iter()
        .map(|a| formula.satisfied_count(a))
        .min()
        .expect("non-empty");
    Ok(Rational::new(worst.into(), formula.num_clauses().into()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceReport {
    pub valid: bool,
    /// Present iff `valid`.
    pub value: Option<Rational>,
    pub reason: Option<String>,
}

/// Validates `steps` as a reconfiguration sequence from the instance's start to its end.
pub fn check_sequence(instance: &Instance, steps: &[Assignment]) -> SequenceReport {
    let fail = |reason: String| SequenceReport {
        valid: false,
        value: None,
        reason: Some(reason),
    };
    let Some(first) = steps.first() else {
        return fail("empty sequence".into());
    };
    if first != &instance.start {
        return fail(format!(
            "sequence starts at {first}, instance starts at {}",
            instance.start
        ));
    }
    let last = steps.last().expect("non-empty");
    if last != &instance.end {
        return fail(format!(
            "sequence ends at {last}, instance ends at {}",
            instance.end
        ));
    }
    match seq_value(&instance.formula, steps) {
        Ok(v) => SequenceReport {
            valid: true,
            value: Some(v),
            reason: None,
        },
        Err(e) => fail(e.to_string()),
    }
}

/// Variables (1-based, ascending) at which `a` and `b` differ.
pub fn diff_vars(a: &Assignment, b: &Assignment) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.bits()
        .iter()
        .zip(b.bits())
        .enumerate()
        .filter(|(_, (x, y))| x != y)
        .map(|(i, _)| i + 1)
        .collect())
}

pub const DEFAULT_IRREDUNDANT_CAP: usize = 8;

/// Enumerates every irredundant sequence from `start` to `end`: one per flip order of the
/// differing variables, in lexicographic order of the flip order.
pub fn irredundant_sequences(
    start: &Assignment,
    end: &Assignment,
    cap: usize,
) -> Result<IrredundantSequences> {
    let order = diff_vars(start, end)?;
    if order.len() > cap {
        return Err(Error::CapExceeded {
            what: "differing variables",
            limit: cap as u128,
            actual: order.len() as u128,
        });
    }
    Ok(IrredundantSequences {
        start: start.clone(),
        order: Some(order),
    })
}

pub struct IrredundantSequences {
    start: Assignment,
    order: Option<Vec<usize>>,
}

impl Iterator for IrredundantSequences {
    type Item = ReconfSequence;

    fn next(&mut self) -> Option<ReconfSequence> {
        let order = self.order.as_mut()?;
        let seq = ReconfSequence::from_flips(&self.start, order);
        if !next_permutation(order) {
            self.order = None;
        }
        Some(seq)
    }
}

/// Advances to the next lexicographic permutation; false when `v` was the last one.
pub(crate) fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len())
        .rev()
        .find(|&j| v[j] > v[i])
        .expect("pivot");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// Parses an instance file: comment lines `c ...`, a `p eksr <n> <m> <k>` header, `m`
/// clause lines of `k` signed literals terminated by `0`, then `s <bits>` and `t <bits>`.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let parsed = parse_text(text, true)?;
    let (start, end) = parsed.endpoints.expect("required");
    Instance::new(parsed.formula, start, end)
}

/// Parses only the formula part of an instance file; `s`/`t` lines are optional and ignored.
/// Used where the endpoints are fixed by a construction rather than supplied.
pub fn parse_formula(text: &str) -> Result<Formula> {
    parse_text(text, false).map(|p| p.formula)
}

struct Parsed {
    formula: Formula,
    endpoints: Option<(Assignment, Assignment)>,
}

fn parse_text(text: &str, need_endpoints: bool) -> Result<Parsed> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut start: Option<Assignment> = None;
    let mut end: Option<Assignment> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line == "c" || line.starts_with("c ") || line.starts_with("c\t") {
            continue;
        }
        let perr = |kind| Error::parse(line_no, kind);
        let mut toks = line.split_whitespace();
        let head = toks.next().expect("non-empty");
        match head {
            "p" => {
                if header.is_some() {
                    return Err(perr(ParseError::DuplicateHeader));
                }
                if !clauses.is_empty() || start.is_some() || end.is_some() {
                    return Err(perr(ParseError::MalformedHeader(
                        "header must be the first non-comment line".into(),
                    )));
                }
                let rest: Vec<&str> = toks.collect();
                if rest.len() != 4 || rest[0] != "eksr" {
                    return Err(perr(ParseError::MalformedHeader(line.into())));
                }
                let nums = rest[1..]
                    .iter()
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| perr(ParseError::MalformedHeader(line.into())))?;
                let (n, m, k) = (nums[0], nums[1], nums[2]);
                if m == 0 || k == 0 || k > n {
                    return Err(perr(ParseError::MalformedHeader(format!(
                        "need m ≥ 1 and 1 ≤ k ≤ n, got n={n} m={m} k={k}"
                    ))));
                }
                header = Some((n, m, k));
            }
            "s" | "t" => {
                let (n, m, _) = header.ok_or(perr(ParseError::MissingHeader))?;
                if clauses.len() != m {
                    return Err(perr(ParseError::ClauseCount {
                        expected: m,
                        found: clauses.len(),
                    }));
                }
                let bits = toks.next().unwrap_or("");
                if toks.next().is_some() {
                    return Err(perr(ParseError::UnexpectedLine(line.into())));
                }
                let a: Assignment = bits.parse().map_err(perr)?;
                if a.len() != n {
                    return Err(perr(ParseError::BitstringLength {
                        expected: n,
                        found: a.len(),
                    }));
                }
                let out_of_order = head == "s" && end.is_some();
                let slot = if head == "s" { &mut start } else { &mut end };
                if slot.is_some() || out_of_order {
                    return Err(perr(ParseError::UnexpectedLine(line.into())));
                }
                *slot = Some(a);
            }
            _ => {
                let (n, m, k) = header.ok_or(perr(ParseError::MissingHeader))?;
                if start.is_some() || end.is_some() {
                    return Err(perr(ParseError::UnexpectedLine(line.into())));
                }
                if clauses.len() == m {
                    return Err(perr(ParseError::ClauseCount {
                        expected: m,
                        found: m + 1,
                    }));
                }
                let nums = line
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<i64>()
                            .map_err(|_| perr(ParseError::BadLiteral(t.into())))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let Some((&0, lits)) = nums.split_last() else {
                    return Err(perr(ParseError::MissingTerminator));
                };
                if let Some(pos) = lits.iter().position(|&v| v == 0) {
                    return Err(perr(ParseError::BadLiteral(format!(
                        "0 at position {} before end of clause",
                        pos + 1
                    ))));
                }
                if lits.len() != k {
                    return Err(perr(ParseError::WrongLiteralCount {
                        expected: k,
                        found: lits.len(),
                    }));
                }
                let mut seen = BTreeSet::new();
                let mut literals = Vec::with_capacity(k);
                for &v in lits {
                    let lit = Literal::from_signed(v).expect("non-zero");
                    if lit.var() > n {
                        return Err(perr(ParseError::VariableOutOfRange { var: lit.var(), n }));
                    }
                    if !seen.insert(lit.var()) {
                        return Err(perr(ParseError::DuplicateVariable(lit.var())));
                    }
                    literals.push(lit);
                }
                clauses.push(Clause { literals });
            }
        }
    }

    let eof = last_line + 1;
    let (n, m, _) = header.ok_or(Error::parse(eof, ParseError::MissingHeader))?;
    if clauses.len() != m {
        return Err(Error::parse(
            eof,
            ParseError::ClauseCount {
                expected: m,
                found: clauses.len(),
            },
        ));
    }
    let formula = Formula::new(n, clauses)?;
    let endpoints = match (start, end) {
        (Some(s), Some(t)) => Some((s, t)),
        (None, _) if need_endpoints => {
            return Err(Error::parse(eof, ParseError::MissingAssignment('s')))
        }
        (_, None) if need_endpoints => {
            return Err(Error::parse(eof, ParseError::MissingAssignment('t')))
        }
        _ => None,
    };
    Ok(Parsed { formula, endpoints })
}

/// Writes the instance in the format accepted by [`parse_instance`]. Mixed-width formulas
/// have no representation in this format.
pub fn serialize_instance(instance: &Instance) -> Result<String> {
    let mut out = serialize_formula(&instance.formula)?;
    out.push_str(&format!("s {}\nt {}\n", instance.start, instance.end));
    Ok(out)
}

pub fn serialize_formula(formula: &Formula) -> Result<String> {
    let k = formula.width().ok_or(Error::MixedWidth)?;
    let mut out = format!(
        "p eksr {} {} {}\n",
        formula.num_vars(),
        formula.num_clauses(),
        k
    );
    for c in formula.clauses() {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    Ok(out)
}
