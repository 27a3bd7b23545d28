//! One PASS/FAIL line per acceptance criterion. Runs without the libtest harness so the
//! lines always reach stdout.

mod common;

use std::time::{Duration, Instant};

use common::*;
use eksr_core::approx::{
    approximation_factor, binom_sum, binom_sum_closed, clause_survival_given_rho,
    closed_form_bound, derandomize, BoundCase,
};
use eksr_core::exact::opt_exact;
use eksr_core::generator::{gen_random_instance, PlantedGenerator};
use eksr_core::rational::{
    format_ratio, int, one, ratio, to_f64, truncate_decimal, zero, Rational,
};
use eksr_core::reductions::{
    attach_witness, gadget_soundness, raw_instance, reduce_horn_emulation, reduce_np_gadget,
    reduce_pad, reduce_width, ReductionOutput, SourceCertificate,
};
use eksr_core::verifier::{
    acceptance_probability, cnf_from_or_verifier, horn_rejection, make_all_one,
    make_clause_verifier, make_combined, make_horn, make_or_emulator, make_overview_horn,
    rejection_probability, TupleMode, VerifierParams, VerifierSpec,
};
use eksr_core::{check_sequence, value, Assignment, Clause, Formula, Instance};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn c1_example() -> Outcome {
    let inst = example();
    let res = opt_exact(&inst, 24).map_err(|e| e.to_string())?;
    ensure!(res.opt == ratio(5, 6), "opt = {}", format_ratio(&res.opt));
    let path: Vec<Assignment> = ["0000", "0001", "0011", "0111", "1111"].map(bits).to_vec();
    let rep = check_sequence(&inst, &path);
    ensure!(
        rep.value == Some(ratio(4, 6)),
        "suboptimal path value {:?}",
        rep.value
    );
    Ok("opt = 5/6, listed path = 4/6".to_string())
}

const PUBLISHED: [&str; 8] = [
    "0.572", "0.631", "0.679", "0.718", "0.749", "0.775", "0.796", "0.814",
];

fn c2_table() -> Outcome {
    for (k, want) in (3..=10).zip(PUBLISHED) {
        let f = approximation_factor(k).map_err(|e| e.to_string())?;
        let shown = truncate_decimal(&f, 3);
        let diff = (to_f64(&f) - want.parse::<f64>().unwrap()).abs();
        ensure!(shown == want && diff <= 0.001, "k={k}: {shown} vs {want}");
    }
    Ok("8/8 rows match".into())
}

fn c3_closed_form() -> Outcome {
    let mut checked = 0;
    for k in 3..=6usize {
        let neq = closed_form_bound(k, BoundCase::Neq).unwrap();
        let eq = closed_form_bound(k, BoundCase::Eq).unwrap();
        let patterns: Vec<u64> = if k <= 4 {
            (0..1 << k).collect()
        } else {
            vec![0, 0b0101_0101 & ((1 << k) - 1)]
        };
        for signs in patterns {
            let c = local_clause(k, signs);
            for i in 0..k {
                for j in 0..k {
                    let s = only_literal_true(&c, i);
                    let t = only_literal_true(&c, j);
                    let got = brute_survival(&c, &s, &t);
                    let want = if i == j { &eq } else { &neq };
                    ensure!(
                        got == *want,
                        "k={k} signs={signs:b} i={i} j={j}: {} vs {}",
                        format_ratio(&got),
                        format_ratio(want)
                    );
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} endpoint configurations equal"))
}

fn c4_guarantee() -> Outcome {
    let ns = [8usize, 12, 16, 20, 24];
    let mut exact_checked = 0;
    for i in 0..200u64 {
        let k = 3 + (i % 4) as usize;
        let n = ns[(i / 4 % 5) as usize];
        let m = 20 + (i as usize * 37) % 181;
        let gen = if i % 2 == 0 {
            PlantedGenerator::new(n, m, k, i)
        } else {
            PlantedGenerator::with_random_plants(n, m, k, i)
        };
        let inst = gen_random_instance(&gen).map_err(|e| e.to_string())?;
        let seq = derandomize(&inst);
        let rep = check_sequence(&inst, &seq);
        ensure!(rep.valid, "instance {i}: invalid sequence {:?}", rep.reason);
        let v = rep.value.unwrap();
        let bound = approximation_factor(k).unwrap();
        ensure!(
            v >= bound,
            "instance {i} (n={n} m={m} k={k}): {} < {}",
            format_ratio(&v),
            format_ratio(&bound)
        );
        if n <= 20 {
            let opt = opt_exact(&inst, 24).map_err(|e| e.to_string())?.opt;
            ensure!(
                v <= opt,
                "instance {i}: {} > opt {}",
                format_ratio(&v),
                format_ratio(&opt)
            );
            exact_checked += 1;
        }
    }
    Ok(format!(
        "200 instances, 0 violations, {exact_checked} compared with exact opt"
    ))
}

fn c5_fact() -> Outcome {
    for n in 0..=40u64 {
        for shift in [1, 2] {
            ensure!(
                binom_sum(n, shift) == binom_sum_closed(n, shift).unwrap(),
                "n={n} shift={shift}"
            );
        }
    }
    Ok("n = 0..40, both identities".into())
}

/// Averaged survival from the library, cross-checked against enumeration.
fn averaged_survival(c: &Clause, s: &Assignment, t: &Assignment) -> Result<Rational, String> {
    let k = s.len();
    let lib = (0..1u64 << k).fold(zero(), |acc, r| {
        acc + clause_survival_given_rho(c, s, t, &Assignment::from_index(r, k))
    }) / int(1 << k);
    let brute = brute_survival(c, s, t);
    ensure!(
        lib == brute,
        "library {} vs enumeration {}",
        format_ratio(&lib),
        format_ratio(&brute)
    );
    Ok(lib)
}

fn c6_monotone() -> Outcome {
    let mut raises = 0;
    for k in 1..=4usize {
        for signs in 0..1u64 << k {
            let c = local_clause(k, signs);
            let sat: Vec<Assignment> = (0..1u64 << k)
                .map(|i| Assignment::from_index(i, k))
                .filter(|a| c.is_satisfied(a))
                .collect();
            for s in &sat {
                for t in &sat {
                    let base = averaged_survival(&c, s, t)?;
                    for l in c.literals() {
                        for (which, a) in [(0, s), (1, t)] {
                            if l.eval(a) {
                                continue;
                            }
                            let mut raised = a.clone();
                            raised.flip(l.var());
                            let (s2, t2) = if which == 0 {
                                (&raised, t)
                            } else {
                                (s, &raised)
                            };
                            let after = averaged_survival(&c, s2, t2)?;
                            ensure!(after >= base, "k={k} s={s} t={t} raising {}", l.var());
                            raises += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{raises} literal raises, none decreasing"))
}

fn witness_is_value_one(out: &ReductionOutput, label: &str) -> Result<(), String> {
    let w = out.witness.as_ref().ok_or(format!("{label}: no witness"))?;
    let rep = check_sequence(&out.instance, w);
    ensure!(
        rep.value == Some(one()),
        "{label}: witness report {:?} {:?}",
        rep.value.map(|v| format_ratio(&v)),
        rep.reason
    );
    Ok(())
}

fn c7_completeness() -> Outcome {
    let e = |e: eksr_core::Error| e.to_string();
    let mut count = 0;
    for (inst, path) in value_one_instances(8, 12, 3, 4) {
        let cert = SourceCertificate::Path(path);
        for k in [4, 5, 6] {
            witness_is_value_one(
                &attach_witness(reduce_pad(&inst, k).map_err(e)?, &cert).map_err(e)?,
                "pad",
            )?;
            count += 1;
        }
        witness_is_value_one(
            &attach_witness(reduce_horn_emulation(&inst, 2).map_err(e)?, &cert).map_err(e)?,
            "horn",
        )?;
        count += 1;
    }
    for k_src in [4, 5, 6] {
        for (inst, path) in value_one_instances(10, 15, k_src, 3) {
            let cert = SourceCertificate::Path(path);
            for k in 3..k_src {
                witness_is_value_one(
                    &attach_witness(reduce_width(&inst, k).map_err(e)?, &cert).map_err(e)?,
                    "width",
                )?;
                count += 1;
            }
        }
    }
    for seed in 0..6 {
        let f = random_formula(6, 10, 3, seed);
        let Some(alpha) = first_satisfying(&f) else {
            continue;
        };
        let cert = SourceCertificate::Satisfying(alpha);
        let d = ratio(1, 5);
        witness_is_value_one(
            &attach_witness(reduce_np_gadget(&f, 3, &d).map_err(e)?, &cert).map_err(e)?,
            "np3",
        )?;
        witness_is_value_one(
            &attach_witness(reduce_np_gadget(&f, 4, &d).map_err(e)?, &cert).map_err(e)?,
            "np4",
        )?;
        for k in [5, 6, 7] {
            witness_is_value_one(
                &attach_witness(reduce_np_gadget(&f, k, &d).map_err(e)?, &cert).map_err(e)?,
                "npk",
            )?;
        }
        count += 5;
    }
    Ok(format!("{count} witnesses with value exactly 1"))
}

fn opt_of(inst: &Instance) -> Result<Rational, String> {
    ensure!(
        inst.num_vars() <= 20,
        "output has n = {} > 20",
        inst.num_vars()
    );
    Ok(opt_exact(inst, 20).map_err(|e| e.to_string())?.opt)
}

fn c8_soundness() -> Outcome {
    let e = |e: eksr_core::Error| e.to_string();
    let mut sources = vec![all_eight()];
    for seed in 0..400 {
        let f = random_formula(5, 18, 3, 1000 + seed);
        if max_sat(&f) < one() {
            sources.push(f);
        }
        if sources.len() == 7 {
            break;
        }
    }
    ensure!(sources.len() == 7, "too few unsatisfiable sources");
    let mut checks = 0;
    for f in &sources {
        let delta = one() - max_sat(f);
        let np3 = reduce_np_gadget(f, 3, &delta).map_err(e)?;
        let raw = raw_instance(&np3).expect("raw gadget instance");
        let raw_opt = opt_of(raw)?;
        let b3 = gadget_soundness(&delta, 2);
        ensure!(
            raw_opt <= b3,
            "np3: opt {} > {}",
            format_ratio(&raw_opt),
            format_ratio(&b3)
        );
        // The width-3 output violates at least as many clauses as the raw gadget.
        if np3.instance.num_vars() <= 20 {
            let out_opt = opt_of(&np3.instance)?;
            let m_raw = int(raw.num_clauses() as i64);
            let m_out = int(np3.instance.num_clauses() as i64);
            let b = one() - (one() - &b3) * m_raw / m_out;
            ensure!(
                out_opt <= b,
                "np3 width-3: opt {} > {}",
                format_ratio(&out_opt),
                format_ratio(&b)
            );
            checks += 1;
        }
        let np4 = reduce_np_gadget(f, 4, &delta).map_err(e)?;
        let opt4 = opt_of(&np4.instance)?;
        let b4 = gadget_soundness(&delta, 3);
        ensure!(
            opt4 <= b4,
            "np4: opt {} > {}",
            format_ratio(&opt4),
            format_ratio(&b4)
        );
        checks += 2;
    }
    let mut pad_sources = vec![example()];
    for seed in 0..200 {
        let inst =
            gen_random_instance(&PlantedGenerator::with_random_plants(7, 30, 3, seed)).unwrap();
        if opt_exact(&inst, 24).unwrap().opt < one() {
            pad_sources.push(inst);
        }
        if pad_sources.len() == 5 {
            break;
        }
    }
    for inst in &pad_sources {
        let src_opt = opt_exact(inst, 24).map_err(e)?.opt;
        for k in [4, 5] {
            let out = reduce_pad(inst, k).map_err(e)?;
            let opt = opt_of(&out.instance)?;
            let b = one() - (one() - &src_opt) / int(1 << (k - 3));
            ensure!(
                opt <= b,
                "pad k={k}: opt {} > {}",
                format_ratio(&opt),
                format_ratio(&b)
            );
            checks += 1;
        }
    }
    Ok(format!(
        "{checks} exact soundness checks, all outputs n ≤ 20"
    ))
}

fn disjoint_formula(m: usize, seed: u64) -> Formula {
    let f = random_formula(3, m, 3, seed);
    let clauses = f
        .clauses()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let lits: Vec<i64> = c
                .literals()
                .iter()
                .map(|l| {
                    let s = l.to_signed();
                    s.signum() * (s.abs() + 3 * j as i64)
                })
                .collect();
            Clause::from_signed(&lits).unwrap()
        })
        .collect();
    Formula::new(3 * m, clauses).unwrap()
}

fn c9_verifier() -> Outcome {
    let e = |e: eksr_core::Error| e.to_string();
    let mut checked = 0u64;
    for n in 3..=12usize {
        for seed in 0..3 {
            let f = random_formula(n, 2 * n, 3, 77 + seed + 10 * n as u64);
            let v = make_clause_verifier(&f).map_err(e)?;
            for i in 0..1u64 << n {
                let a = Assignment::from_index(i, n);
                ensure!(
                    acceptance_probability(&v, a.bits()).map_err(e)? == value(&f, &a).map_err(e)?,
                    "clause verifier n={n} at {a}"
                );
                checked += 1;
            }
        }
    }
    for (lambda, m) in [(2, 3), (2, 4), (3, 2), (3, 3)] {
        let f = disjoint_formula(m, lambda as u64 * 10 + m as u64);
        let horn = make_overview_horn(&f, lambda, TupleMode::WithReplacement).map_err(e)?;
        for i in 0..1u64 << f.num_vars() {
            let a = Assignment::from_index(i, f.num_vars());
            let eps = one() - value(&f, &a).map_err(e)?;
            ensure!(
                rejection_probability(&horn, a.bits()).map_err(e)? == horn_rejection(lambda, &eps),
                "overview horn λ={lambda} at {a}"
            );
            checked += 1;
        }
    }
    let mut hosts: Vec<VerifierSpec> = Vec::new();
    for (lambda, m) in [(2, 2), (2, 3)] {
        let f = disjoint_formula(m, 5 + m as u64);
        hosts.push(make_overview_horn(&f, lambda, TupleMode::Disjoint).map_err(e)?);
    }
    let small = Formula::new(
        3,
        vec![
            Clause::from_signed(&[1, 2, 3]).unwrap(),
            Clause::from_signed(&[-1, 2, -3]).unwrap(),
        ],
    )
    .unwrap();
    let params = VerifierParams::new(3, ratio(1, 2), &ratio(1, 2), 6).map_err(e)?;
    let w = make_combined(
        &make_clause_verifier(&small).map_err(e)?,
        &make_all_one(3, 4).map_err(e)?,
        &params,
    )
    .map_err(e)?;
    hosts.push(make_horn(&w, &make_all_one(3, 4).map_err(e)?, None, 2).map_err(e)?);
    for horn in &hosts {
        let x = make_or_emulator(horn).map_err(e)?;
        let width = x.max_queries();
        let cnf = cnf_from_or_verifier(&x, width).map_err(e)?;
        let n = horn.proof_len();
        for i in 0..1u64 << n {
            let a = Assignment::from_index(i, n);
            let h = acceptance_probability(horn, a.bits()).map_err(e)?;
            let xa = acceptance_probability(&x, a.bits()).map_err(e)?;
            ensure!(
                (h == one()) == (xa == one()),
                "OR emulator changed the accept-1 set at {a}"
            );
            let violated = one() - value(&cnf.formula, &a).map_err(e)?;
            ensure!(
                violated == cnf.rejection_ratio() * (one() - xa),
                "CNF ratio at {a}"
            );
            checked += 1;
        }
    }
    Ok(format!("{checked} exact proof evaluations"))
}

fn c10_scope(prior: &[bool]) -> Outcome {
    ensure!(
        prior[6] && prior[7] && prior[8],
        "constructive coverage (7, 8, 9) did not pass"
    );
    Ok("hardness constants are out of scope; coverage by criteria 7-9".into())
}

fn main() {
    let runs: [Criterion; 9] = [
        ("four-variable worked example", c1_example, 1),
        ("published approximation factors k = 3..10", c2_table, 1),
        ("closed form equals enumeration", c3_closed_form, 120),
        (
            "derandomized guarantee on 200 planted instances",
            c4_guarantee,
            600,
        ),
        ("binomial identities", c5_fact, 1),
        ("survival monotonicity", c6_monotone, 60),
        ("reduction completeness", c7_completeness, 60),
        ("reduction soundness at desk scale", c8_soundness, 1200),
        ("verifier laws", c9_verifier, 300),
    ];
    let mut passed = Vec::new();
    for (i, (name, f, budget)) in runs.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let dt = t.elapsed();
        let in_time = dt <= Duration::from_secs(*budget);
        let ok = out.is_ok() && in_time;
        let detail = match out {
            Ok(s) => s,
            Err(s) => s,
        };
        let time_note = if in_time {
            String::new()
        } else {
            format!(" over {budget}s budget")
        };
        println!(
            "criterion {:>2}: {} {name} ({detail}; {:.2}s{time_note})",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            dt.as_secs_f64()
        );
        passed.push(ok);
    }
    let last = c10_scope(&passed);
    println!(
        "criterion 10: {} hardness claims ({})",
        if last.is_ok() { "PASS" } else { "FAIL" },
        last.as_ref().unwrap_or_else(|e| e)
    );
    passed.push(last.is_ok());
    if passed.iter().any(|p| !p) {
        std::process::exit(1);
    }
}
