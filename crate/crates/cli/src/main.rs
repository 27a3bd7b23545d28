//! `eksr`: command-line front end. Every command prints one JSON object on stdout.
//!
//! Exit codes: 0 success, 1 domain or I/O error, 2 usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use eksr_core::approx::{
    approximation_factor, closed_form_bound, derandomize_plan, sample_plan, BoundCase,
};
use eksr_core::exact::{opt_exact, DEFAULT_N_CAP};
use eksr_core::generator::{gen_random_instance, PlantedGenerator};
use eksr_core::rational::{format_ratio, parse_ratio, truncate_decimal};
use eksr_core::reductions::{
    attach_witness, params_meta, reduce_horn_emulation, reduce_np_gadget, reduce_pad, reduce_width,
    ReductionOutput, SourceCertificate,
};
use eksr_core::report::Report;
use eksr_core::verifier::{
    acceptance_probability, curve_argmax, horn_rejection, horn_rejection_curve, uniform_grid,
    VerifierSpec,
};
use eksr_core::{
    check_sequence, parse_formula, parse_instance, seq_value, serialize_instance, value,
    Assignment, Formula, Instance,
};

#[derive(Parser)]
#[command(
    name = "eksr",
    version,
    about = "Maxmin Ek-SAT reconfiguration toolkit"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// PRNG seed (ChaCha8).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest variable count for exhaustive search.
    #[arg(long, global = true, default_value_t = DEFAULT_N_CAP)]
    cap: usize,
    /// Grid resolution for sampled curves.
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    /// JSON output (the only mode; accepted for compatibility).
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the approximation algorithm.
    Approx {
        file: PathBuf,
        /// Sample one rounding with `--seed` instead of derandomizing.
        #[arg(long)]
        randomized: bool,
    },
    /// Exact optimum with a witness.
    Exact { file: PathBuf },
    /// Fraction of clauses satisfied by one assignment.
    Value { file: PathBuf, assignment: String },
    /// Validate a sequence (report JSON or whitespace-separated bitstrings).
    CheckSeq { file: PathBuf, sequence: PathBuf },
    /// Compile a gadget reduction.
    Reduce(ReduceArgs),
    /// Verifier utilities.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Approximation factors per width.
    Table {
        #[arg(long, default_value_t = 3)]
        k_min: usize,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
    },
    /// Planted random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        /// Draw both planted assignments from the seed instead of 0^n and 1^n.
        #[arg(long)]
        random_plants: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceKind {
    Pad,
    Horn,
    Width,
    Np3,
    Np4,
    Npk,
}

#[derive(Args)]
struct ReduceArgs {
    kind: ReduceKind,
    file: PathBuf,
    /// Target width (pad, width, npk).
    #[arg(long)]
    k: Option<usize>,
    /// Tuple length (horn).
    #[arg(long)]
    lambda: Option<usize>,
    /// Guard weight `P/Q` (np3, np4).
    #[arg(long)]
    delta: Option<String>,
    /// Write the output instance here instead of embedding it in the report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Build and report a value-1 witness sequence.
    #[arg(long)]
    witness: bool,
    /// Satisfying source assignment for gadget witnesses (searched for when absent).
    #[arg(long)]
    sat: Option<String>,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Horn rejection curve ε(1−ε)^(λ−1) on a uniform grid.
    Curve {
        #[arg(long)]
        lambda: usize,
    },
    /// Acceptance probability of a verifier spec on a proof.
    Accept { spec: PathBuf, proof: String },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn load_formula(path: &Path) -> Result<Formula> {
    parse_formula(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn parse_bits(s: &str) -> Result<Assignment> {
    s.parse::<Assignment>()
        .map_err(|e| anyhow!("bad assignment `{s}`: {e}"))
}

fn load_sequence(path: &Path) -> Result<Vec<Assignment>> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        return Ok(Report::from_json(&text)?.assignments()?);
    }
    text.split_whitespace().map(parse_bits).collect()
}

fn run(cli: Cli) -> Result<Value> {
    let g = &cli.global;
    match cli.command {
        Command::Approx { file, randomized } => {
            let inst = load_instance(&file)?;
            let plan = if randomized {
                sample_plan(&inst, g.seed)
            } else {
                derandomize_plan(&inst)
            };
            let seq = plan.sequence(&inst.start);
            let v = seq_value(&inst.formula, &seq)?;
            let mut r = Report::new()
                .with_value(&v)
                .with_sequence(&seq)
                .meta(
                    "mode",
                    if randomized {
                        "randomized"
                    } else {
                        "derandomized"
                    },
                )
                .meta("rho", plan.rho.to_string());
            if randomized {
                r = r.meta("seed", g.seed);
            }
            if let Some(k) = inst.formula.width().filter(|&k| k >= 3) {
                r = r.meta("guarantee", format_ratio(&approximation_factor(k)?));
            }
            Ok(serde_json::to_value(r)?)
        }
        Command::Exact { file } => {
            let inst = load_instance(&file)?;
            let res = opt_exact(&inst, g.cap)?;
            let r = Report::new()
                .with_value(&res.opt)
                .with_sequence(&res.witness)
                .meta("opt_count", res.opt_count)
                .meta("m", inst.num_clauses());
            Ok(serde_json::to_value(r)?)
        }
        Command::Value { file, assignment } => {
            let f = load_formula(&file)?;
            let a = parse_bits(&assignment)?;
            let v = value(&f, &a)?;
            let r = Report::new()
                .with_value(&v)
                .meta("satisfied", f.satisfied_count(&a))
                .meta("m", f.num_clauses());
            Ok(serde_json::to_value(r)?)
        }
        Command::CheckSeq { file, sequence } => {
            let inst = load_instance(&file)?;
            let steps = load_sequence(&sequence)?;
            let rep = check_sequence(&inst, &steps);
            let mut r = Report::new().meta("valid", rep.valid);
            if let Some(v) = &rep.value {
                r = r.with_value(v);
                r.sequence = steps.iter().map(ToString::to_string).collect();
                r.flips = eksr_core::ReconfSequence::new(steps)?.flips();
            }
            if let Some(reason) = rep.reason {
                r = r.meta("reason", reason);
            }
            Ok(serde_json::to_value(r)?)
        }
        Command::Reduce(args) => reduce(g, args),
        Command::Verify(VerifyCommand::Curve { lambda }) => {
            if lambda < 1 {
                bail!("need λ ≥ 1");
            }
            if g.samples == 0 {
                bail!("need --samples ≥ 1");
            }
            let curve = horn_rejection_curve(lambda, &uniform_grid(g.samples))?;
            let argmax = curve_argmax(&curve).expect("non-empty grid");
            let points: Vec<Value> = curve
                .iter()
                .map(|(e, r)| json!([format_ratio(e), format_ratio(r)]))
                .collect();
            let r = Report::new()
                .with_value(&horn_rejection(lambda, &argmax))
                .meta("lambda", lambda)
                .meta("argmax", format_ratio(&argmax))
                .meta("curve", points);
            Ok(serde_json::to_value(r)?)
        }
        Command::Verify(VerifyCommand::Accept { spec, proof }) => {
            let v = VerifierSpec::from_json(&read(&spec)?)?;
            let p = parse_bits(&proof)?;
            let acc = acceptance_probability(&v, p.bits())?;
            let r = Report::new()
                .with_value(&acc)
                .meta("atoms", v.atoms().len())
                .meta("proof_len", v.proof_len());
            Ok(serde_json::to_value(r)?)
        }
        Command::Table { k_min, k_max } => {
            if k_min < 3 || k_min > k_max {
                bail!("need 3 ≤ k-min ≤ k-max");
            }
            let rows = (k_min..=k_max)
                .map(|k| {
                    let neq = closed_form_bound(k, BoundCase::Neq)?;
                    let eq = closed_form_bound(k, BoundCase::Eq)?;
                    let f = approximation_factor(k)?;
                    Ok(json!({
                        "k": k,
                        "neq": format_ratio(&neq),
                        "eq": format_ratio(&eq),
                        "factor": format_ratio(&f),
                        "decimal": truncate_decimal(&f, 3),
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(serde_json::to_value(Report::new().meta("rows", rows))?)
        }
        Command::Gen {
            n,
            m,
            k,
            random_plants,
            out,
        } => {
            let gen = if random_plants {
                PlantedGenerator::with_random_plants(n, m, k, g.seed)
            } else {
                PlantedGenerator::new(n, m, k, g.seed)
            };
            let inst = gen_random_instance(&gen)?;
            let text = serialize_instance(&inst)?;
            let r = Report::new()
                .meta("n", n)
                .meta("m", m)
                .meta("k", k)
                .meta("seed", g.seed);
            Ok(serde_json::to_value(emit(r, &text, out.as_deref())?)?)
        }
    }
}

fn emit(r: Report, text: &str, out: Option<&Path>) -> Result<Report> {
    Ok(match out {
        Some(p) => {
            fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?;
            r.meta("out", p.display().to_string())
        }
        None => r.meta("instance", text),
    })
}

/// First satisfying assignment in index order.
fn find_satisfying(f: &Formula, cap: usize) -> Result<Assignment> {
    let n = f.num_vars();
    if n > cap {
        bail!("no --sat given and n = {n} exceeds --cap {cap} for the search");
    }
    (0..1u64 << n)
        .map(|i| Assignment::from_index(i, n))
        .find(|a| f.is_satisfied(a))
        .ok_or_else(|| anyhow!("source formula is unsatisfiable"))
}

fn reduce(g: &Global, args: ReduceArgs) -> Result<Value> {
    let need_k = |name: &str| args.k.ok_or_else(|| anyhow!("`reduce {name}` needs --k"));
    let delta = || -> Result<_> {
        let d = args
            .delta
            .as_deref()
            .ok_or_else(|| anyhow!("this reduction needs --delta P/Q"))?;
        Ok(parse_ratio(d)?)
    };
    let gadget = matches!(
        args.kind,
        ReduceKind::Np3 | ReduceKind::Np4 | ReduceKind::Npk
    );
    let out: ReductionOutput = if gadget {
        let f = load_formula(&args.file)?;
        let o = match args.kind {
            ReduceKind::Np3 => reduce_np_gadget(&f, 3, &delta()?)?,
            ReduceKind::Np4 => reduce_np_gadget(&f, 4, &delta()?)?,
            _ => {
                let k = need_k("npk")?;
                if k < 5 {
                    bail!("`reduce npk` needs --k ≥ 5");
                }
                reduce_np_gadget(&f, k, &eksr_core::rational::zero())?
            }
        };
        if args.witness {
            let alpha = match &args.sat {
                Some(s) => parse_bits(s)?,
                None => find_satisfying(&f, g.cap)?,
            };
            attach_witness(o, &SourceCertificate::Satisfying(alpha))?
        } else {
            o
        }
    } else {
        let inst = load_instance(&args.file)?;
        let o = match args.kind {
            ReduceKind::Pad => reduce_pad(&inst, need_k("pad")?)?,
            ReduceKind::Width => reduce_width(&inst, need_k("width")?)?,
            _ => {
                let l = args
                    .lambda
                    .ok_or_else(|| anyhow!("`reduce horn` needs --lambda"))?;
                reduce_horn_emulation(&inst, l)?
            }
        };
        if args.witness {
            let res = opt_exact(&inst, g.cap)?;
            if res.opt != eksr_core::rational::one() {
                bail!(
                    "source optimum is {}, so no value-1 witness exists",
                    format_ratio(&res.opt)
                );
            }
            attach_witness(o, &SourceCertificate::Path(res.witness))?
        } else {
            o
        }
    };
    let mut r = Report::new();
    if let Some(w) = &out.witness {
        r = r
            .with_value(&seq_value(&out.instance.formula, w)?)
            .with_sequence(w);
    }
    if let Value::Object(m) = params_meta(&out) {
        r.meta.extend(m);
    }
    let text = serialize_instance(&out.instance)?;
    Ok(serde_json::to_value(emit(r, &text, args.out.as_deref())?)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(v) => {
            use std::io::Write;
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout().lock(), "{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
