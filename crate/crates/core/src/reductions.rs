//! Gap-preserving instance compilers.
//!
//! Every compiler returns a [`ReductionOutput`]: the produced instance, the parameters it was
//! built with, and enough structure for [`build_witness`] to turn a certificate for the source
//! (a value-1 path, or a satisfying assignment for the gadget reductions) into a value-1
//! sequence for the output.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::formula::{diff_vars, Assignment, Clause, Formula, Instance, Literal, ReconfSequence};
use crate::rational::{format_ratio, int, one, Rational};

/// Upper bound on emitted clauses and enumerated tuples.
pub const CLAUSE_CAP: u128 = 10_000_000;
/// Widest clause the horn emulation will emit.
pub const HORN_WIDTH_CAP: usize = 12;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReductionParams {
    /// Fresh padding / Horn variables.
    pub k_fresh: Option<usize>,
    pub gamma: Option<usize>,
    pub lambda: Option<usize>,
    pub delta: Option<Rational>,
    pub m1: Option<usize>,
    pub m2: Option<usize>,
    pub m3: Option<usize>,
    /// Fraction of ordered tuples dropped for sharing a variable.
    pub discarded_fraction: Option<Rational>,
}

impl ReductionParams {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.into(), v);
            }
        };
        put("K", self.k_fresh.map(Value::from));
        put("gamma", self.gamma.map(Value::from));
        put("lambda", self.lambda.map(Value::from));
        put("delta", self.delta.as_ref().map(|d| format_ratio(d).into()));
        put("m1", self.m1.map(Value::from));
        put("m2", self.m2.map(Value::from));
        put("m3", self.m3.map(Value::from));
        put(
            "discarded_fraction",
            self.discarded_fraction
                .as_ref()
                .map(|d| format_ratio(d).into()),
        );
        Value::Object(m)
    }
}

/// Literal sets and fresh variables for one source clause of the width conversion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidthGroup {
    /// `S_1 .. S_Γ`.
    pub sets: Vec<Vec<Literal>>,
    /// Variable index of `y_{j,1}`; the chain occupies `first_y .. first_y + Γ - 2`.
    pub first_y: usize,
}

impl WidthGroup {
    fn gamma(&self) -> usize {
        self.sets.len()
    }

    fn y(&self, i: usize) -> usize {
        self.first_y + i - 1
    }

    /// First set (1-based) holding a literal true under `a`, ignoring literals on `skip`.
    fn first_true(&self, a: &Assignment, skip: Option<usize>) -> Option<usize> {
        self.sets
            .iter()
            .position(|s| s.iter().any(|l| Some(l.var()) != skip && l.eval(a)))
            .map(|i| i + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReductionKind {
    Pad {
        k_fresh: usize,
    },
    Horn,
    /// One entry per source clause; `None` marks a clause copied unchanged.
    Width {
        groups: Vec<Option<WidthGroup>>,
    },
    /// Gadget with `x` block followed by a fresh block flipped in `block_flips` order.
    Np {
        block_start: Assignment,
        block_flips: Vec<usize>,
        /// Present for the width-3 gadget: the mixed {3,4} instance before width conversion.
        raw: Option<Box<(Instance, ReductionOutput)>>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionOutput {
    pub instance: Instance,
    pub witness: Option<ReconfSequence>,
    /// `var_map[i]` is the output variable standing for source variable `i + 1`.
    pub var_map: Vec<usize>,
    pub params: ReductionParams,
    pub source: Formula,
    pub kind: ReductionKind,
}

/// What [`build_witness`] is given about the source.
#[derive(Clone, Debug)]
pub enum SourceCertificate {
    /// A sequence between the source endpoints satisfying every clause at every step.
    Path(ReconfSequence),
    /// A satisfying assignment of the source formula.
    Satisfying(Assignment),
}

fn identity_map(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

fn require_width(f: &Formula, k: usize) -> Result<()> {
    match f.width() {
        Some(w) if w == k => Ok(()),
        Some(w) => Err(Error::WidthMismatch {
            expected: k,
            found: w,
        }),
        None => Err(Error::MixedWidth),
    }
}

fn check_count(what: &'static str, actual: u128) -> Result<()> {
    if actual > CLAUSE_CAP {
        return Err(Error::CapExceeded {
            what,
            limit: CLAUSE_CAP,
            actual,
        });
    }
    Ok(())
}

fn zero_block(a: &Assignment, k: usize) -> Assignment {
    a.concat(&Assignment::zeros(k))
}

/// Appends all `2^K` sign patterns over `K = k_target − 3` fresh variables to every clause.
pub fn reduce_pad(source: &Instance, k_target: usize) -> Result<ReductionOutput> {
    require_width(&source.formula, 3)?;
    if k_target < 4 {
        return Err(Error::invalid(format!(
            "padding needs k_target ≥ 4, got {k_target}"
        )));
    }
    let k = k_target - 3;
    let n = source.num_vars();
    check_count(
        "padded clauses",
        (source.num_clauses() as u128) << k.min(100),
    )?;
    let mut clauses = Vec::with_capacity(source.num_clauses() << k);
    for c in source.formula.clauses() {
        for pattern in 0u64..1 << k {
            let mut lits = c.literals().to_vec();
            lits.extend((0..k).map(|t| Literal::new(n + t + 1, pattern >> t & 1 == 1)));
            clauses.push(Clause::new(lits)?);
        }
    }
    let formula = Formula::new(n + k, clauses)?;
    let instance = Instance::new(
        formula,
        zero_block(&source.start, k),
        zero_block(&source.end, k),
    )?;
    Ok(ReductionOutput {
        instance,
        witness: None,
        var_map: identity_map(n),
        params: ReductionParams {
            k_fresh: Some(k),
            ..Default::default()
        },
        source: source.formula.clone(),
        kind: ReductionKind::Pad { k_fresh: k },
    })
}

/// The 7 local assignments (bit `t` = value of the clause's `t`-th variable) satisfying `c`.
fn satisfying_views(c: &Clause) -> Vec<u64> {
    let k = c.width();
    (0..1u64 << k)
        .filter(|&v| {
            c.literals()
                .iter()
                .enumerate()
                .any(|(t, l)| l.eval_bit(v >> t & 1 == 1))
        })
        .collect()
}

/// Emits, for every ordered λ-tuple of pairwise variable-disjoint clauses and every local
/// view falsifying the first clause while satisfying the rest, the clause forbidding that view.
pub fn reduce_horn_emulation(source: &Instance, lambda: usize) -> Result<ReductionOutput> {
    require_width(&source.formula, 3)?;
    if lambda < 2 {
        return Err(Error::invalid(format!("need λ ≥ 2, got {lambda}")));
    }
    let width = 3 * lambda;
    if width > HORN_WIDTH_CAP {
        return Err(Error::CapExceeded {
            what: "horn emulation clause width",
            limit: HORN_WIDTH_CAP as u128,
            actual: width as u128,
        });
    }
    let clauses = source.formula.clauses();
    let m = clauses.len();
    let tuples = (m as u128).checked_pow(lambda as u32).unwrap_or(u128::MAX);
    check_count("ordered clause tuples", tuples)?;

    let views: Vec<Vec<u64>> = clauses.iter().map(satisfying_views).collect();
    let mut out = Vec::new();
    let mut disjoint = 0u128;
    let mut tuple = vec![0usize; lambda];
    loop {
        let ok = (0..lambda).all(|a| {
            (a + 1..lambda).all(|b| !clauses[tuple[a]].shares_variable(&clauses[tuple[b]]))
        });
        if ok {
            disjoint += 1;
            check_count(
                "horn emulation clauses",
                disjoint * 7u128.pow(lambda as u32 - 1),
            )?;
            emit_horn_views(clauses, &views, &tuple, &mut out)?;
        }
        if !advance(&mut tuple, |_| m) {
            break;
        }
    }
    if disjoint == 0 {
        return Err(Error::NoDisjointTuple);
    }
    let n = source.num_vars();
    let formula = Formula::new(n, out)?;
    let instance = Instance::new(formula, source.start.clone(), source.end.clone())?;
    let total = Rational::new((tuples as u64).into(), 1u64.into());
    Ok(ReductionOutput {
        instance,
        witness: None,
        var_map: identity_map(n),
        params: ReductionParams {
            lambda: Some(lambda),
            discarded_fraction: Some(
                (&total - Rational::from_integer((disjoint as u64).into())) / total,
            ),
            ..Default::default()
        },
        source: source.formula.clone(),
        kind: ReductionKind::Horn,
    })
}

fn emit_horn_views(
    clauses: &[Clause],
    views: &[Vec<u64>],
    tuple: &[usize],
    out: &mut Vec<Clause>,
) -> Result<()> {
    let rest = &tuple[1..];
    let mut choice = vec![0usize; rest.len()];
    loop {
        // The first clause's literals, falsified, are forbidden as themselves.
        let mut lits = clauses[tuple[0]].literals().to_vec();
        for (r, &j) in rest.iter().enumerate() {
            let view = views[j][choice[r]];
            for (t, l) in clauses[j].literals().iter().enumerate() {
                // Positive literal where the forbidden view has 0.
                lits.push(Literal::new(l.var(), view >> t & 1 == 1));
            }
        }
        out.push(Clause::new(lits)?);
        if !advance(&mut choice, |r| views[rest[r]].len()) {
            return Ok(());
        }
    }
}

/// Odometer step with the last digit fastest; false after the final combination.
fn advance(digits: &mut [usize], base: impl Fn(usize) -> usize) -> bool {
    for pos in (0..digits.len()).rev() {
        digits[pos] += 1;
        if digits[pos] < base(pos) {
            return true;
        }
        digits[pos] = 0;
    }
    false
}

/// Splits `k − 2`-sized consecutive chunks, topping the last one up, then adds one more
/// literal to the first and last sets.
fn cover_sets(lits: &[Literal], k_target: usize) -> Vec<Vec<Literal>> {
    let chunk = k_target - 2;
    let gamma = lits.len().div_ceil(chunk);
    let mut sets: Vec<Vec<Literal>> = lits.chunks(chunk).map(<[Literal]>::to_vec).collect();
    debug_assert_eq!(sets.len(), gamma);
    let top_up = |s: &mut Vec<Literal>, size: usize| {
        for l in lits {
            if s.len() >= size {
                break;
            }
            if !s.contains(l) {
                s.push(*l);
            }
        }
    };
    top_up(sets.last_mut().expect("non-empty"), chunk);
    top_up(&mut sets[0], chunk + 1);
    top_up(sets.last_mut().expect("non-empty"), chunk + 1);
    sets
}

/// Converts wider clauses into chains of width-`k_target` clauses linked by fresh variables.
/// Clauses already of width `k_target` are copied unchanged, so mixed-width sources are
/// accepted as long as no clause is narrower than `k_target`.
pub fn reduce_width(source: &Instance, k_target: usize) -> Result<ReductionOutput> {
    if k_target < 3 {
        return Err(Error::invalid(format!(
            "width conversion needs k_target ≥ 3 (k_target − 2 > 0), got {k_target}"
        )));
    }
    let n = source.num_vars();
    let mut next_var = n + 1;
    let mut groups = Vec::with_capacity(source.num_clauses());
    let mut clauses = Vec::new();
    let mut gamma_max = 1;
    for c in source.formula.clauses() {
        let w = c.width();
        if w < k_target {
            return Err(Error::WidthMismatch {
                expected: k_target,
                found: w,
            });
        }
        if w == k_target {
            clauses.push(c.clone());
            groups.push(None);
            continue;
        }
        let sets = cover_sets(c.literals(), k_target);
        let g = WidthGroup {
            first_y: next_var,
            sets,
        };
        let gamma = g.gamma();
        gamma_max = gamma_max.max(gamma);
        next_var += gamma - 1;
        check_count("width conversion clauses", (clauses.len() + gamma) as u128)?;
        for i in 1..=gamma {
            let mut lits = Vec::with_capacity(k_target);
            if i < gamma {
                lits.push(Literal::neg(g.y(i)));
            }
            if i > 1 {
                lits.push(Literal::pos(g.y(i - 1)));
            }
            lits.extend_from_slice(&g.sets[i - 1]);
            clauses.push(Clause::new(lits)?);
        }
        groups.push(Some(g));
    }
    let total = next_var - 1;
    let formula = Formula::new(total, clauses)?;
    let start = lift_endpoint(&groups, &source.start, total);
    let end = lift_endpoint(&groups, &source.end, total);
    let instance = Instance::new(formula, start, end)?;
    Ok(ReductionOutput {
        instance,
        witness: None,
        var_map: identity_map(n),
        params: ReductionParams {
            gamma: Some(gamma_max),
            ..Default::default()
        },
        source: source.formula.clone(),
        kind: ReductionKind::Width { groups },
    })
}

/// `y_{j,i} = 0` below the first set holding a true literal, 1 from there on.
fn lift_endpoint(groups: &[Option<WidthGroup>], a: &Assignment, total: usize) -> Assignment {
    let mut bits = a.bits().to_vec();
    bits.resize(total, false);
    let mut out = Assignment::new(bits);
    for g in groups.iter().flatten() {
        // An unsatisfied source clause leaves the chain at its last set, which is then false;
        // the instance constructor reports it.
        let t = g.first_true(a, None).unwrap_or(g.gamma());
        for i in 1..g.gamma() {
            out.set(g.y(i), i >= t);
        }
    }
    out
}

/// Copies of a guard clause used by the gadget reductions: `⌈δm⌉`.
fn copies(delta: &Rational, m: usize) -> Result<usize> {
    if *delta <= int(0) {
        return Err(Error::invalid("δ must be positive"));
    }
    let c = (delta * int(m as i64)).ceil().to_integer();
    let c: usize = c
        .try_into()
        .map_err(|_| Error::invalid("copy count too large"))?;
    check_count("gadget guard copies", c as u128)?;
    Ok(c)
}

/// Gadget reductions from width-3 formulas. `k_target` 3 and 4 use guard clauses with
/// `⌈δm⌉` copies each; `k_target ≥ 5` uses the `K = k_target − 3` Horn clauses over fresh
/// variables and ignores `delta`.
pub fn reduce_np_gadget(
    source: &Formula,
    k_target: usize,
    delta: &Rational,
) -> Result<ReductionOutput> {
    require_width(source, 3)?;
    match k_target {
        3 => np3(source, delta),
        4 => np4(source, delta),
        k if k >= 5 => npk(source, k),
        _ => Err(Error::invalid(format!(
            "gadget reduction needs k_target ≥ 3, got {k_target}"
        ))),
    }
}

fn with_y(c: &Clause, y: usize) -> Clause {
    let mut lits = c.literals().to_vec();
    lits.push(Literal::pos(y));
    Clause::new(lits).expect("fresh variable")
}

fn signed(n: usize, lits: &[i64]) -> Clause {
    // Offsets relative to the fresh block: 1 is the first fresh variable.
    let lits: Vec<i64> = lits
        .iter()
        .map(|&l| l.signum() * (n as i64 + l.abs()))
        .collect();
    Clause::from_signed(&lits).expect("distinct fresh variables")
}

fn np_raw(
    source: &Formula,
    delta: &Rational,
    guards: &[&[i64]],
    block_start: &str,
    block_end: &str,
) -> Result<(Instance, ReductionParams)> {
    let n = source.num_vars();
    let m = source.num_clauses();
    let c = copies(delta, m)?;
    let fresh = block_start.len();
    let mut clauses: Vec<Clause> = source
        .clauses()
        .iter()
        .map(|cl| with_y(cl, n + 1))
        .collect();
    for g in guards {
        clauses.extend(std::iter::repeat_n(signed(n, g), c));
    }
    let formula = Formula::mixed(n + fresh, clauses)?;
    let start = Assignment::ones(n).concat(&block_start.parse().expect("bits"));
    let end = Assignment::zeros(n).concat(&block_end.parse().expect("bits"));
    let params = ReductionParams {
        delta: Some(delta.clone()),
        m1: Some(c),
        m2: Some(c),
        m3: (guards.len() == 3).then_some(c),
        ..Default::default()
    };
    Ok((Instance::new(formula, start, end)?, params))
}

fn np3(source: &Formula, delta: &Rational) -> Result<ReductionOutput> {
    let n = source.num_vars();
    // Fresh block (y, z1, z2).
    let (raw_inst, params) = np_raw(source, delta, &[&[-1, 2, -3], &[-1, -2, 3]], "111", "100")?;
    let width = reduce_width(&raw_inst, 3)?;
    Ok(ReductionOutput {
        instance: width.instance.clone(),
        witness: None,
        var_map: identity_map(n),
        params: ReductionParams {
            gamma: width.params.gamma,
            ..params
        },
        source: source.clone(),
        kind: ReductionKind::Np {
            block_start: "111".parse().expect("bits"),
            block_flips: vec![n + 1, n + 2, n + 3, n + 1],
            raw: Some(Box::new((raw_inst, width))),
        },
    })
}

fn np4(source: &Formula, delta: &Rational) -> Result<ReductionOutput> {
    let n = source.num_vars();
    // Fresh block (y, z1, z2, z3).
    let (instance, params) = np_raw(
        source,
        delta,
        &[&[-1, 2, -3, -4], &[-1, -2, 3, -4], &[-1, -2, -3, 4]],
        "1111",
        "1000",
    )?;
    Ok(ReductionOutput {
        instance,
        witness: None,
        var_map: identity_map(n),
        params,
        source: source.clone(),
        kind: ReductionKind::Np {
            block_start: "1111".parse().expect("bits"),
            block_flips: vec![n + 1, n + 2, n + 3, n + 4, n + 1],
            raw: None,
        },
    })
}

fn npk(source: &Formula, k_target: usize) -> Result<ReductionOutput> {
    let n = source.num_vars();
    let k = k_target - 3;
    check_count("horn-gadget clauses", (k * source.num_clauses()) as u128)?;
    let mut clauses = Vec::with_capacity(k * source.num_clauses());
    for c in source.clauses() {
        for i in 1..=k {
            let mut lits = c.literals().to_vec();
            lits.extend((1..=k).map(|t| Literal::new(n + t, t != i)));
            clauses.push(Clause::new(lits)?);
        }
    }
    let formula = Formula::new(n + k, clauses)?;
    let instance = Instance::new(formula, Assignment::ones(n + k), Assignment::zeros(n + k))?;
    Ok(ReductionOutput {
        instance,
        witness: None,
        var_map: identity_map(n),
        params: ReductionParams {
            k_fresh: Some(k),
            ..Default::default()
        },
        source: source.clone(),
        kind: ReductionKind::Np {
            block_start: Assignment::ones(k),
            block_flips: (n + 1..=n + k).collect(),
            raw: None,
        },
    })
}

/// A value-1 sequence for the output, built from the source certificate.
pub fn build_witness(out: &ReductionOutput, cert: &SourceCertificate) -> Result<ReconfSequence> {
    match (&out.kind, cert) {
        (ReductionKind::Pad { k_fresh }, SourceCertificate::Path(p)) => {
            check_source_path(out, p)?;
            let steps = p.iter().map(|a| zero_block(a, *k_fresh)).collect();
            ReconfSequence::new(steps)
        }
        (ReductionKind::Horn, SourceCertificate::Path(p)) => {
            check_source_path(out, p)?;
            Ok(p.clone())
        }
        (ReductionKind::Width { groups }, SourceCertificate::Path(p)) => {
            check_source_path(out, p)?;
            Ok(lift_width_path(groups, p, out.instance.num_vars()))
        }
        (
            ReductionKind::Np {
                block_start,
                block_flips,
                raw,
            },
            SourceCertificate::Satisfying(alpha),
        ) => {
            if alpha.len() != out.source.num_vars() {
                return Err(Error::LengthMismatch {
                    expected: out.source.num_vars(),
                    found: alpha.len(),
                });
            }
            if !out.source.is_satisfied(alpha) {
                return Err(Error::NotSatisfying);
            }
            let raw_path = np_path(alpha, block_start, block_flips);
            match raw {
                None => Ok(raw_path),
                Some(inner) => {
                    let (_, width) = inner.as_ref();
                    let ReductionKind::Width { groups } = &width.kind else {
                        unreachable!("gadget composes with width conversion")
                    };
                    Ok(lift_width_path(
                        groups,
                        &raw_path,
                        width.instance.num_vars(),
                    ))
                }
            }
        }
        (ReductionKind::Np { .. }, SourceCertificate::Path(_)) => Err(Error::invalid(
            "gadget reductions take a satisfying assignment of the source formula",
        )),
        (_, SourceCertificate::Satisfying(_)) => Err(Error::invalid(
            "this reduction takes a value-1 path between the source endpoints",
        )),
    }
}

/// Builds the witness and stores it in the output.
pub fn attach_witness(
    mut out: ReductionOutput,
    cert: &SourceCertificate,
) -> Result<ReductionOutput> {
    out.witness = Some(build_witness(&out, cert)?);
    Ok(out)
}

/// The raw mixed-width gadget instance for the width-3 gadget reduction.
pub fn raw_instance(out: &ReductionOutput) -> Option<&Instance> {
    match &out.kind {
        ReductionKind::Np { raw: Some(r), .. } => Some(&r.0),
        _ => None,
    }
}

fn check_source_path(out: &ReductionOutput, p: &ReconfSequence) -> Result<()> {
    if p.first().len() != out.source.num_vars() {
        return Err(Error::LengthMismatch {
            expected: out.source.num_vars(),
            found: p.first().len(),
        });
    }
    if p.iter().any(|a| !out.source.is_satisfied(a)) {
        return Err(Error::NotSatisfying);
    }
    Ok(())
}

/// `1^n → α* → 0^n` on the `x` block with the fresh-block flips in the middle.
fn np_path(alpha: &Assignment, block_start: &Assignment, block_flips: &[usize]) -> ReconfSequence {
    let n = alpha.len();
    let start = Assignment::ones(n).concat(block_start);
    let mut flips = diff_vars(&Assignment::ones(n), alpha).expect("same length");
    flips.extend_from_slice(block_flips);
    flips.extend(diff_vars(alpha, &Assignment::zeros(n)).expect("same length"));
    ReconfSequence::from_flips(&start, &flips)
}

/// Replays a value-1 source path on the converted instance, moving each chain's pointer
/// (the first `y` set to 1) ahead of any flip that would falsify its current set.
fn lift_width_path(
    groups: &[Option<WidthGroup>],
    p: &ReconfSequence,
    total: usize,
) -> ReconfSequence {
    let mut cur = lift_endpoint(groups, p.first(), total);
    let mut steps = vec![cur.clone()];
    let mut ptr: Vec<usize> = groups
        .iter()
        .map(|g| {
            g.as_ref()
                .map_or(0, |g| g.first_true(p.first(), None).expect("satisfied"))
        })
        .collect();

    let mv = |g: &WidthGroup,
              from: usize,
              to: usize,
              cur: &mut Assignment,
              steps: &mut Vec<Assignment>| {
        let order: Vec<usize> = if to > from {
            (from..to).rev().collect()
        } else {
            (to..from).collect()
        };
        for i in order {
            cur.flip(g.y(i));
            steps.push(cur.clone());
        }
    };

    for v in p.flips() {
        for (j, g) in groups.iter().enumerate() {
            let Some(g) = g else { continue };
            let set = &g.sets[ptr[j] - 1];
            let others_true = set.iter().any(|l| l.var() != v && l.eval(&cur));
            if !others_true && set.iter().any(|l| l.var() == v) {
                let to = g.first_true(&cur, Some(v)).expect("source stays satisfied");
                mv(g, ptr[j], to, &mut cur, &mut steps);
                ptr[j] = to;
            }
        }
        cur.flip(v);
        steps.push(cur.clone());
    }
    for (j, g) in groups.iter().enumerate() {
        let Some(g) = g else { continue };
        let to = g.first_true(&cur, None).expect("end satisfies source");
        mv(g, ptr[j], to, &mut cur, &mut steps);
    }
    ReconfSequence::new(steps).expect("single flips")
}

/// Metadata block for reports.
pub fn params_meta(out: &ReductionOutput) -> Value {
    json!({
        "n": out.instance.num_vars(),
        "m": out.instance.num_clauses(),
        "k": out.instance.formula.width(),
        "params": out.params.to_json(),
        "var_map": out.var_map,
    })
}

/// `1 − δ/(1 + cδ)`, the soundness value of the guard gadget with `c` guard clauses.
pub fn gadget_soundness(delta: &Rational, guards: usize) -> Rational {
    one() - delta / (one() + int(guards as i64) * delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::opt_exact;
    use crate::formula::{parse_instance, seq_value};
    use crate::rational::ratio;

    const EXAMPLE: &str = "p eksr 4 6 3\n-1 -2 3 0\n-1 2 -3 0\n1 -2 -3 0\n-1 2 -4 0\n\
        -2 3 -4 0\n1 -3 -4 0\ns 0000\nt 1111\n";

    fn example() -> Instance {
        parse_instance(EXAMPLE).unwrap()
    }

    fn path(strs: &[&str]) -> ReconfSequence {
        ReconfSequence::new(strs.iter().map(|s| s.parse().unwrap()).collect()).unwrap()
    }

    fn sat_path_instance() -> (Instance, ReconfSequence) {
        let inst = parse_instance("p eksr 6 2 3\n1 2 3 0\n-4 5 6 0\ns 100000\nt 010001\n").unwrap();
        let p = path(&["100000", "110000", "010000", "010001"]);
        (inst, p)
    }

    #[test]
    fn pad_counts_and_soundness() {
        let out = reduce_pad(&example(), 5).unwrap();
        assert_eq!(out.instance.num_clauses(), 24);
        assert_eq!(out.instance.formula.width(), Some(5));
        assert_eq!(out.instance.num_vars(), 6);
        assert!(reduce_pad(&example(), 3).is_err());
        let r = opt_exact(&out.instance, 24).unwrap();
        assert_eq!(r.opt, one() - (one() - ratio(5, 6)) / int(4));
    }

    #[test]
    fn pad_witness() {
        let (inst, p) = sat_path_instance();
        let out = reduce_pad(&inst, 4).unwrap();
        let w = build_witness(&out, &SourceCertificate::Path(p)).unwrap();
        assert_eq!(seq_value(&out.instance.formula, &w).unwrap(), one());
        assert_eq!(w.first(), &out.instance.start);
        assert_eq!(w.last(), &out.instance.end);
    }

    #[test]
    fn horn_counts() {
        let (inst, p) = sat_path_instance();
        let out = reduce_horn_emulation(&inst, 2).unwrap();
        assert_eq!(out.instance.num_clauses(), 14);
        assert_eq!(out.instance.formula.width(), Some(6));
        assert_eq!(out.params.discarded_fraction, Some(ratio(2, 4)));
        let w = build_witness(&out, &SourceCertificate::Path(p)).unwrap();
        assert_eq!(seq_value(&out.instance.formula, &w).unwrap(), one());

        let shared = parse_instance("p eksr 5 2 3\n1 2 3 0\n1 4 5 0\ns 11111\nt 11111\n").unwrap();
        assert_eq!(
            reduce_horn_emulation(&shared, 2).unwrap_err(),
            Error::NoDisjointTuple
        );
    }

    #[test]
    fn width_shape() {
        let inst = parse_instance("p eksr 6 1 6\n1 2 3 4 5 6 0\ns 100000\nt 000001\n").unwrap();
        let out = reduce_width(&inst, 4).unwrap();
        assert_eq!(out.params.gamma, Some(3));
        assert_eq!(out.instance.num_clauses(), 3);
        assert_eq!(out.instance.num_vars(), 8);
        assert_eq!(out.instance.formula.width(), Some(4));
        let w = build_witness(
            &out,
            &SourceCertificate::Path(path(&["100000", "100001", "000001"])),
        )
        .unwrap();
        assert_eq!(seq_value(&out.instance.formula, &w).unwrap(), one());
        assert_eq!(w.last(), &out.instance.end);
        assert!(reduce_width(&inst, 2).is_err());
    }

    #[test]
    fn gadget_counts() {
        let src = example().formula;
        let out = reduce_np_gadget(&src, 4, &ratio(1, 2)).unwrap();
        assert_eq!(out.instance.num_clauses(), 15);
        assert_eq!(out.instance.num_vars(), 8);
        assert_eq!(out.instance.formula.width(), Some(4));
        let out = reduce_np_gadget(&src, 5, &ratio(1, 2)).unwrap();
        assert_eq!(out.instance.num_clauses(), 12);
        assert_eq!(out.instance.formula.width(), Some(5));
        let out = reduce_np_gadget(&src, 3, &ratio(1, 2)).unwrap();
        assert_eq!(out.instance.formula.width(), Some(3));
        let raw = raw_instance(&out).unwrap();
        assert_eq!(raw.num_clauses(), 12);
        assert_eq!(raw.formula.width(), None);
    }

    #[test]
    fn gadget_witness_blocks() {
        let src = example().formula;
        let alpha: Assignment = "0000".parse().unwrap();
        let out = reduce_np_gadget(&src, 4, &ratio(1, 2)).unwrap();
        let w = build_witness(&out, &SourceCertificate::Satisfying(alpha.clone())).unwrap();
        let blocks: Vec<String> = w.iter().map(|a| a.to_string()[4..].to_string()).collect();
        let mut dedup = blocks.clone();
        dedup.dedup();
        assert_eq!(dedup, ["1111", "0111", "0011", "0001", "0000", "1000"]);
        assert_eq!(seq_value(&out.instance.formula, &w).unwrap(), one());

        let out3 = reduce_np_gadget(&src, 3, &ratio(1, 2)).unwrap();
        let raw = raw_instance(&out3).unwrap();
        let raw_w = np_path(&alpha, &"111".parse().unwrap(), &[5, 6, 7, 5]);
        let mut dedup: Vec<String> = raw_w
            .iter()
            .map(|a| a.to_string()[4..].to_string())
            .collect();
        dedup.dedup();
        assert_eq!(dedup, ["111", "011", "001", "000", "100"]);
        assert_eq!(seq_value(&raw.formula, &raw_w).unwrap(), one());
        let w3 = build_witness(&out3, &SourceCertificate::Satisfying(alpha)).unwrap();
        assert_eq!(seq_value(&out3.instance.formula, &w3).unwrap(), one());
        assert_eq!(w3.first(), &out3.instance.start);
        assert_eq!(w3.last(), &out3.instance.end);

        let bad: Assignment = "0111".parse().unwrap();
        assert_eq!(
            build_witness(&out, &SourceCertificate::Satisfying(bad)).unwrap_err(),
            Error::NotSatisfying
        );
    }
}
