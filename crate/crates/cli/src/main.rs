//! `quantreach`: evaluate, quantise and verify quantised ReLU networks.
//!
//! Exit status: 0 when the command completed (a verdict, whatever it is, is
//! in the output), 1 on usage or input errors, 2 on a resource verdict and 3
//! when `selfcheck` finds a disagreement.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use quantreach::arithmetic::{getbit_fixed, getbit_float, parse_rational, ArithmeticFormat, Rational};
use quantreach::automata::Budget;
use quantreach::network::{Network, Semantics};
use quantreach::reduction::{parse_dimacs, reduce_quantised, reduce_with, BinarityGadget};
use quantreach::selfcheck::agreement_suite;
use quantreach::spec::{format_lp_spec, parse_bv_spec, parse_lp_spec};
use quantreach::verifier::{self, Backend, Limits, Problem, Report};

#[derive(Parser)]
#[command(name = "quantreach", version, about = "Reachability checking for quantised ReLU networks")]
struct Cli {
    /// Worker threads for the parallel searches (default: one per core).
    #[arg(long, global = true, env = "QUANTREACH_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a network on inputs, exactly or in a format.
    Eval(EvalArgs),
    /// Round every weight and bias of a network into a format.
    Quantise(QuantiseArgs),
    /// Decide a reachability problem and print a verdict record.
    Verify(VerifyArgs),
    /// Turn a 3CNF formula into a network and LP specification.
    Reduce(ReduceArgs),
    /// Read one bit of a rational's binary encoding.
    Getbit(GetbitArgs),
    /// Run random instances through both BV backends and compare.
    Selfcheck(SelfcheckArgs),
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    net: PathBuf,
    /// Evaluate in this format instead of exactly.
    #[arg(long)]
    arith: Option<ArithmeticFormat>,
    #[arg(long, value_enum, default_value_t = SemanticsArg::PerNeuron)]
    semantics: SemanticsArg,
    /// Comma-separated input coordinates such as `1/2,-3`; repeatable.
    #[arg(long = "input", required = true, allow_hyphen_values = true)]
    inputs: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsArg {
    PerNeuron,
    PerOperation,
}

#[derive(Args)]
struct QuantiseArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    arith: ArithmeticFormat,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LimitArgs {
    /// Cap on explored automaton states.
    #[arg(long, env = "QUANTREACH_MAX_STATES")]
    max_states: Option<usize>,
    /// Wall-clock cap for automaton exploration.
    #[arg(long, env = "QUANTREACH_MAX_SECONDS")]
    max_seconds: Option<f64>,
    /// Cap on enumerated grid inputs.
    #[arg(long, env = "QUANTREACH_MAX_INPUTS")]
    max_inputs: Option<u64>,
    /// Cap on activation-pattern search nodes.
    #[arg(long, env = "QUANTREACH_MAX_PATTERNS")]
    max_patterns: Option<u64>,
    /// Largest exponent width the float automaton accepts.
    #[arg(long, env = "QUANTREACH_FLOAT_E_CAP")]
    float_e_cap: Option<u32>,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        let mut l = Limits::default();
        let budget = Budget::default();
        l.budget = Budget {
            max_states: self.max_states.unwrap_or(budget.max_states),
            max_seconds: self.max_seconds,
        };
        if let Some(n) = self.max_inputs {
            l.max_inputs = n;
        }
        if let Some(n) = self.max_patterns {
            l.max_patterns = n;
        }
        if let Some(e) = self.float_e_cap {
            l.float_e_cap = e;
        }
        l
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    problem: Problem,
    /// Defaults to pattern-lp for reach-q-lp, automata for reach-bv and
    /// brute otherwise.
    #[arg(long)]
    backend: Option<Backend>,
    #[arg(long)]
    net: PathBuf,
    /// LP spec file for the LP problems, BV spec file for the BV ones.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    arith: Option<ArithmeticFormat>,
    /// Leave the witness out of the record.
    #[arg(long)]
    no_witness: bool,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum GadgetArg {
    Corrected,
    Printed,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    dimacs: PathBuf,
    /// Also emit the fixed-point format with this many fraction bits.
    #[arg(long)]
    frac_bits: Option<u32>,
    #[arg(long, value_enum, default_value_t = GadgetArg::Corrected)]
    gadget: GadgetArg,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GetbitArgs {
    /// The rational `p/q`.
    #[arg(long, allow_hyphen_values = true)]
    value: String,
    /// Fixed point: the bit of weight `2^weight` in two's complement.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["arith", "position"])]
    weight: Option<i64>,
    /// Float layout to read from, together with `--position`.
    #[arg(long, requires = "position")]
    arith: Option<ArithmeticFormat>,
    /// Index into the float word (sign, exponent, then mantissa).
    #[arg(long, requires = "arith")]
    position: Option<usize>,
}

#[derive(Args)]
struct SelfcheckArgs {
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    limits: LimitArgs,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_net(path: &Path) -> Result<Network> {
    read(path)?.parse().with_context(|| path.display().to_string())
}

fn parse_point(text: &str) -> Result<Vec<Rational>> {
    text.split(',')
        .map(|v| parse_rational(v.trim()).with_context(|| format!("bad input coordinate `{v}`")))
        .collect()
}

fn eval(args: &EvalArgs) -> Result<String> {
    let net = load_net(&args.net)?;
    let semantics = match args.semantics {
        SemanticsArg::PerNeuron => Semantics::PerNeuron,
        SemanticsArg::PerOperation => Semantics::PerOperation,
    };
    let mut out = String::from("format=1\n");
    for (n, text) in args.inputs.iter().enumerate() {
        let x = parse_point(text)?;
        let y = match &args.arith {
            Some(fmt) => net.eval_quantised_with(&x, fmt, semantics),
            None => net.eval_rational(&x),
        }
        .with_context(|| format!("input {}", n + 1))?;
        writeln!(out, "point {}", n + 1)?;
        for (i, v) in x.iter().enumerate() {
            writeln!(out, "x{} {v}", i + 1)?;
        }
        for (i, v) in y.iter().enumerate() {
            writeln!(out, "y{} {v}", i + 1)?;
        }
    }
    Ok(out)
}

fn quantise(args: &QuantiseArgs) -> Result<String> {
    let text = load_net(&args.net)?.quantise(&args.arith).to_string();
    match &args.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn verify(args: &VerifyArgs) -> Result<Report> {
    let net = load_net(&args.net)?;
    let text = read(&args.spec)?;
    let spec_err = || args.spec.display().to_string();
    let limits = args.limits.limits();
    let problem = args.problem;
    let backend = args.backend.unwrap_or(match problem {
        Problem::ReachQLp => Backend::PatternLp,
        Problem::ReachBv => Backend::Automata,
        _ => Backend::Brute,
    });
    let allowed = match problem {
        Problem::ReachQLp => backend == Backend::PatternLp,
        Problem::ReachBv => backend != Backend::PatternLp,
        _ => backend == Backend::Brute,
    };
    if !allowed {
        bail!("backend {backend} does not decide {problem}");
    }
    let arith = || args.arith.as_ref().with_context(|| format!("{problem} needs --arith"));
    let (d, m) = (net.input_dim(), net.output_dim());
    let mut report = if problem.is_bv() {
        let (phi_in, phi_out) = parse_bv_spec(&text, d, m).with_context(spec_err)?;
        match problem {
            Problem::ReachFBv => verifier::reach_f_bv(&net, &phi_in, &phi_out, arith()?, &limits)?,
            _ => verifier::reach_bv(&net, &phi_in, &phi_out, arith()?, backend, &limits)?,
        }
    } else {
        let (input, output) = parse_lp_spec(&text, d, m).with_context(spec_err)?;
        match problem {
            Problem::ReachQLp => verifier::reach_q_lp(&net, &input, &output, &limits)?,
            Problem::ReachFLp => verifier::reach_f_lp(&net, &input, &output, arith()?, &limits)?,
            _ => verifier::reach_lp(&net, &input, &output, arith()?, &limits)?,
        }
    };
    if args.no_witness {
        report.witness = None;
    }
    Ok(report)
}

fn reduce_cmd(args: &ReduceArgs) -> Result<String> {
    let cnf = parse_dimacs(&read(&args.dimacs)?).with_context(|| args.dimacs.display().to_string())?;
    let gadget = match args.gadget {
        GadgetArg::Corrected => BinarityGadget::Corrected,
        GadgetArg::Printed => BinarityGadget::Printed,
    };
    let inst = reduce_with(&cnf, gadget);
    fs::create_dir_all(&args.out_dir).with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let write = |name: &str, text: &str| -> Result<PathBuf> {
        let path = args.out_dir.join(name);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    };
    let mut out = String::from("format=1\n");
    let net = write("network.fnn", &inst.network.to_string())?;
    writeln!(out, "network {}", net.display())?;
    let spec = write("spec.lp", &format_lp_spec(&inst.input_spec, &inst.output_spec))?;
    writeln!(out, "spec {}", spec.display())?;
    if let Some(f) = args.frac_bits {
        let (_, fmt) = reduce_quantised(&cnf, f)?;
        let path = write("arith.txt", &format!("{fmt}\n"))?;
        writeln!(out, "arith {fmt}")?;
        writeln!(out, "arith-file {}", path.display())?;
    }
    Ok(out)
}

fn getbit(args: &GetbitArgs) -> Result<String> {
    let x = parse_rational(&args.value).with_context(|| format!("bad value `{}`", args.value))?;
    let bit = match (args.weight, &args.arith, args.position) {
        (Some(t), None, None) => getbit_fixed(x.numer(), x.denom(), t),
        (None, Some(ArithmeticFormat::Float(fmt)), Some(pos)) => {
            if x.is_zero() {
                bail!("zero has no float bit layout to read from");
            }
            let len = ArithmeticFormat::Float(*fmt).word_len();
            if pos >= len {
                bail!("position {pos} is outside the {len}-bit word");
            }
            getbit_float(x.numer(), x.denom(), fmt, pos)
        }
        (None, Some(_), _) => bail!("--arith must be a float format; use --weight for fixed point"),
        _ => bail!("give either --weight, or --arith with --position"),
    };
    Ok(format!("format=1\nbit {}\n", bit as u8))
}

fn selfcheck(args: &SelfcheckArgs) -> Result<(String, bool)> {
    let runs = agreement_suite(args.count, args.seed, &args.limits.limits())?;
    let mut out = String::from("format=1\n");
    let mut agree = 0;
    for a in &runs {
        agree += a.agrees() as usize;
        writeln!(
            out,
            "instance {} {} brute {} automata {}{}",
            a.index + 1,
            a.instance.fmt,
            a.brute.verdict,
            a.automata.verdict,
            if a.agrees() { "" } else { " DISAGREE" }
        )?;
    }
    writeln!(out, "agree {agree}/{}", runs.len())?;
    Ok((out, agree == runs.len()))
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot start the worker pool")?;
    }
    let (text, code) = match &cli.command {
        Command::Eval(a) => (eval(a)?, 0),
        Command::Quantise(a) => (quantise(a)?, 0),
        Command::Verify(a) => {
            let report = verify(a)?;
            let code = if report.verdict.is_resource() { 2 } else { 0 };
            (report.to_string(), code)
        }
        Command::Reduce(a) => (reduce_cmd(a)?, 0),
        Command::Getbit(a) => (getbit(a)?, 0),
        Command::Selfcheck(a) => {
            let (text, ok) = selfcheck(a)?;
            (text, if ok { 0 } else { 3 })
        }
    };
    print!("{text}");
    Ok(ExitCode::from(code))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
