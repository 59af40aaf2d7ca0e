use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use spdp_core::algebra::{parse_polynomial, Field, Gf62, Polynomial, Rational, RingMode};
use spdp_core::families::{FamilyKind, FamilyParams, FamilySpec};
use spdp_core::localwidth::{
    circuit_rank_bound, coordinate_budget, count_kappa_step_sequences, count_profiles, realized_profiles, t_step, width_for,
    LocalModel, DEFAULT_C_GATE,
};
use spdp_core::pipeline::{
    run_manifest, run_pipeline, runs_to_csv, Circuit, Cnf, Manifest, PipelineInput, PipelineParams, PipelineRun, SignatureMode,
};
use spdp_core::spdp::{build_matrix, Budget, Convention, RankReport, SpdpParams};
use spdp_core::verify::{run_suite, Suite, SuiteReport};
use spdp_core::{Error, TOOL_VERSION};

const EXIT_PARSE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_VIOLATION: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Parser)]
#[command(name = "spdp", version, about = "Shifted-partial-derivative rank tools")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Serialize)]
struct Global {
    /// Derivative order.
    #[arg(long, global = true)]
    kappa: Option<usize>,
    /// Shift degree.
    #[arg(long, global = true)]
    ell: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = ConventionArg::Exact)]
    convention: ConventionArg,
    #[arg(long, global = true, value_enum, default_value_t = FieldArg::Q)]
    field: FieldArg,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Column cap for SPDP matrices.
    #[arg(long, global = true, env = "SPDP_BUDGET")]
    budget: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ConventionArg {
    Exact,
    Cumulative,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum FieldArg {
    Q,
    Gfp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Multilinear,
    Standard,
}

impl From<ModeArg> for RingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Multilinear => RingMode::Multilinear,
            ModeArg::Standard => RingMode::Standard,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SignatureArg {
    Support,
    Multiset,
}

#[derive(Args)]
struct Source {
    /// Polynomial text such as `x1*x2 + x2*x3`, or `@path` to read it.
    polynomial: Option<String>,
    /// Family spec as JSON, or `@path` to a JSON file.
    #[arg(long, conflicts_with = "polynomial")]
    family: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Multilinear)]
    mode: ModeArg,
}

#[derive(Subcommand)]
enum Command {
    /// Rank and codimension of one SPDP matrix.
    Rank {
        #[command(flatten)]
        source: Source,
        /// Also write the matrix as `r c v` triplets to this path.
        #[arg(long)]
        triplets: Option<String>,
    },
    /// Rank over a grid of (kappa, ell); fails if rank drops as ell grows.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Inclusive range `a..b` (or a single value).
        #[arg(long, default_value = "1")]
        kappas: String,
        #[arg(long, default_value = "0..2")]
        ells: String,
        /// Rename variable i to perm[i] (0-based, comma separated).
        #[arg(long, value_delimiter = ',')]
        permute: Option<Vec<usize>>,
    },
    /// Circuit to rank collapse pipeline.
    Pipeline(PipelineArgs),
    /// Executable property suites.
    Verify {
        /// Suite name, or `all`.
        suite: String,
        #[arg(long)]
        cases: Option<usize>,
    },
    /// Print a family member's polynomial.
    Family {
        /// permanent, diagonal_power, random_deg3, goldreich_like, toy_example, custom
        kind: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        exponent: Option<usize>,
        #[arg(long)]
        clauses: Option<usize>,
        #[arg(long)]
        locality: Option<usize>,
        #[arg(long)]
        predicates: Option<usize>,
        #[arg(long)]
        polynomial: Option<String>,
    },
    /// Local-width counting and bound calculators.
    Bound {
        #[command(subcommand)]
        which: BoundCmd,
    },
}

#[derive(Args)]
struct PipelineArgs {
    /// Bundled manifest name or a manifest JSON path.
    #[arg(long, conflicts_with_all = ["spec", "circuit", "cnf"])]
    manifest: Option<String>,
    /// One family spec (JSON path).
    #[arg(long)]
    spec: Option<String>,
    /// Circuit in the gate DSL.
    #[arg(long)]
    circuit: Option<String>,
    /// CNF in DIMACS format.
    #[arg(long)]
    cnf: Option<String>,
    /// Fraction of inputs fixed before pruning (default 0).
    #[arg(long)]
    rho: Option<f64>,
    /// Window budget constant in `ceil(c_w * log2 n)` (default 3).
    #[arg(long)]
    c_w: Option<f64>,
    #[arg(long, value_enum)]
    signature: Option<SignatureArg>,
    /// Rank the window polynomial without merging signature classes.
    #[arg(long)]
    no_compress: bool,
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Histograms of R interfaces over S' bins.
    Profiles {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s_prime: usize,
    },
    /// Single-step transitions and kappa-step sequences.
    Steps {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        alphabet: usize,
    },
    /// `s^(c*kappa) * C(n+ell, ell)`.
    Circuit {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_C_GATE)]
        c_gate: u32,
    },
    /// Coordinate budget for `per_step` coordinates touched per step.
    Coordinates {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        per_step: usize,
    },
    /// Width `floor(C * log2(n)^c)` and the toy model's realized profiles.
    Width {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.25)]
        constant: f64,
        #[arg(long, default_value_t = 1.0)]
        exponent: f64,
        /// Largest kappa for realized-profile counts.
        #[arg(long, default_value_t = 8)]
        max_kappa: usize,
    },
}

enum Failure {
    Core(Error),
    Io(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(e) => match e.root() {
                Error::BudgetExceeded { .. } => EXIT_BUDGET,
                Error::Field(_) | Error::Stage { .. } => EXIT_INTERNAL,
                _ => EXIT_PARSE,
            },
            Failure::Io(_) => EXIT_PARSE,
            Failure::Violation(_) => EXIT_VIOLATION,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) | Failure::Violation(m) => m.clone(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_arg(text: &str) -> Result<String, Failure> {
    match text.strip_prefix('@') {
        Some(path) => read_file(path),
        None => Ok(text.to_string()),
    }
}

fn read_file(path: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read `{path}`: {e}")))
}

impl Global {
    fn budget(&self) -> Budget {
        let mut b = Budget::default();
        if let Some(cap) = self.budget {
            b.max_columns = cap;
        }
        b
    }

    fn params(&self, kappa: usize, ell: usize) -> SpdpParams {
        let p = SpdpParams::new(kappa, ell);
        match self.convention {
            ConventionArg::Exact => p,
            ConventionArg::Cumulative => p.cumulative(),
        }
    }

    fn convention(&self) -> Convention {
        match self.convention {
            ConventionArg::Exact => Convention::Exact,
            ConventionArg::Cumulative => Convention::Cumulative,
        }
    }

    fn field_tag(&self) -> String {
        match self.field {
            FieldArg::Q => Rational::MODE.tag(),
            FieldArg::Gfp => Gf62::MODE.tag(),
        }
    }
}

/// Every report carries the tool version, the effective config, the seed
/// and the field.
fn envelope(command: &str, g: &Global, extra: Value, result: impl Serialize) -> Value {
    json!({
        "tool": TOOL_VERSION,
        "command": command,
        "config": {
            "kappa": g.kappa,
            "ell": g.ell,
            "convention": g.convention,
            "field": g.field,
            "budget": g.budget(),
            "format": g.format,
        },
        "effective": extra,
        "seed": g.seed,
        "field": g.field_tag(),
        "result": result,
    })
}

fn header(command: &str, g: &Global, extra: &Value) -> String {
    format!(
        "# {TOOL_VERSION} {command} field={} seed={} budget={} effective={}\n",
        g.field_tag(),
        g.seed,
        g.budget().max_columns,
        extra
    )
}

fn emit(command: &str, g: &Global, extra: Value, result: impl Serialize, csv: impl FnOnce() -> String, human: impl FnOnce() -> String) {
    match g.format {
        Format::Json => {
            let v = envelope(command, g, extra, result);
            println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
        }
        Format::Csv => print!("{}{}", header(command, g, &extra), csv()),
        Format::Human => print!("{}{}", header(command, g, &extra), human()),
    }
}

fn load_polynomial<F: Field>(source: &Source, seed: u64) -> Result<(String, Polynomial<F>), Failure> {
    if let Some(spec) = &source.family {
        let mut spec = FamilySpec::from_json(&read_arg(spec)?)?;
        if spec.seed == 0 {
            spec.seed = seed;
        }
        let label = spec.to_json();
        return Ok((label, spec.build()?));
    }
    let text = source
        .polynomial
        .as_deref()
        .ok_or_else(|| Failure::Io("give a polynomial or --family".into()))?;
    let text = read_arg(text)?;
    Ok((text.trim().to_string(), parse_polynomial(&text, None, source.mode.into())?))
}

fn cmd_rank<F: Field>(g: &Global, source: &Source, triplets: Option<&str>) -> CmdResult {
    let (input, p) = load_polynomial::<F>(source, g.seed)?;
    let params = g.params(g.kappa.unwrap_or(1), g.ell.unwrap_or(1));
    let m = build_matrix(&p, &params, &g.budget())?;
    if let Some(path) = triplets {
        fs::write(path, m.to_triplets()).map_err(|e| Failure::Io(format!("cannot write `{path}`: {e}")))?;
    }
    let report = m.rank();
    let extra = json!({ "kappa": params.kappa, "ell": params.ell, "convention": params.convention, "input": input });
    let r = report.clone();
    emit(
        "rank",
        g,
        extra,
        &report,
        || format!("gamma,ambient_dim,codim,rows,cols,field\n{},{},{},{},{},{}\n", r.gamma, r.ambient_dim, r.codim, r.rows, r.cols, r.field),
        || human_rank(&report),
    );
    Ok(())
}

fn human_rank(r: &RankReport) -> String {
    format!(
        "rank       {}\nambient    {}\ncodim      {}\nmatrix     {} x {}\nfield      {}\n",
        r.gamma, r.ambient_dim, r.codim, r.rows, r.cols, r.field
    )
}

fn parse_range(text: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Io(format!("bad range `{text}`; expected `a..b` or `a`"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    match text.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![num(text)?]),
    }
}

#[derive(Serialize)]
struct SweepCell {
    kappa: usize,
    ell: usize,
    gamma: usize,
    ambient_dim: usize,
}

fn cmd_sweep<F: Field>(g: &Global, source: &Source, kappas: &str, ells: &str, permute: Option<&[usize]>) -> CmdResult {
    let (input, mut p) = load_polynomial::<F>(source, g.seed)?;
    if let Some(perm) = permute {
        p = p.permute(perm)?;
    }
    let (kappas, ells) = (parse_range(kappas)?, parse_range(ells)?);
    let mut cells = Vec::new();
    let mut violations = Vec::new();
    for &k in &kappas {
        let mut prev: Option<usize> = None;
        for &l in &ells {
            let report = build_matrix(&p, &g.params(k, l), &g.budget())?.rank();
            if let Some(before) = prev.filter(|&b| report.gamma < b) {
                violations.push(format!("kappa={k}: rank fell from {before} to {} at ell={l} for p = {p}", report.gamma));
            }
            prev = Some(report.gamma);
            cells.push(SweepCell {
                kappa: k,
                ell: l,
                gamma: report.gamma,
                ambient_dim: report.ambient_dim,
            });
        }
    }
    let extra = json!({ "kappas": kappas, "ells": ells, "permute": permute, "input": input });
    let csv = || {
        let mut out = String::from("kappa,ell,gamma,ambient_dim\n");
        for c in &cells {
            out.push_str(&format!("{},{},{},{}\n", c.kappa, c.ell, c.gamma, c.ambient_dim));
        }
        out
    };
    let table = csv();
    emit("sweep", g, extra, json!({ "cells": &cells, "violations": &violations }), || table.clone(), || table.replace(',', "\t"));
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(violations.join("\n")))
    }
}

fn pipeline_params(g: &Global, a: &PipelineArgs) -> PipelineParams {
    let mut p = PipelineParams {
        kappa: g.kappa,
        convention: g.convention(),
        compress: !a.no_compress,
        budget: g.budget(),
        ..Default::default()
    };
    if let Some(ell) = g.ell {
        p.ell = ell;
    }
    if let Some(rho) = a.rho {
        p.rho = rho;
    }
    if let Some(c_w) = a.c_w {
        p.c_w = c_w;
    }
    if let Some(sig) = a.signature {
        p.signature = match sig {
            SignatureArg::Support => SignatureMode::Support,
            SignatureArg::Multiset => SignatureMode::Multiset,
        };
    }
    p
}

fn cmd_pipeline<F: Field>(g: &Global, a: &PipelineArgs) -> CmdResult {
    let params = pipeline_params(g, a);
    let runs: Vec<PipelineRun> = if let Some(path) = &a.spec {
        let spec = FamilySpec::from_json(&read_file(path)?)?;
        vec![run_pipeline::<F>(&PipelineInput::Family(spec), &params, g.seed)?]
    } else if let Some(path) = &a.circuit {
        let circuit = Circuit::parse(&read_file(path)?)?;
        let input = PipelineInput::Circuit { name: path.clone(), circuit };
        vec![run_pipeline::<F>(&input, &params, g.seed)?]
    } else if let Some(path) = &a.cnf {
        let cnf = Cnf::from_dimacs(&read_file(path)?)?;
        let input = PipelineInput::Cnf { name: path.clone(), cnf };
        vec![run_pipeline::<F>(&input, &params, g.seed)?]
    } else {
        let name = a.manifest.as_deref().unwrap_or("table1_scaled");
        let manifest = match Manifest::bundled(name) {
            Some(m) => m,
            None => Manifest::from_json(&read_file(name)?)?,
        };
        run_manifest::<F>(&manifest, &params, g.seed)?
    };
    let csv = runs_to_csv(&runs);
    let human = || {
        let mut out = String::new();
        for r in &runs {
            out.push_str(&format!(
                "{:<20} n={:<6} live={:<4} profiles={:<4} rank={:<6} threshold={:<4} {}\n",
                r.family,
                r.n,
                r.live_vars,
                r.profiles,
                r.gamma,
                r.threshold,
                if r.pass { "pass" } else { "fail" }
            ));
        }
        out
    };
    emit("pipeline", g, json!({ "params": params }), &runs, || csv.clone(), human);
    Ok(())
}

fn cmd_verify(g: &Global, suite: &str, cases: Option<usize>) -> CmdResult {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse()?]
    };
    let reports: Vec<SuiteReport> = suites
        .iter()
        .map(|&s| run_suite(s, g.seed, cases))
        .collect::<Result<_, _>>()?;
    let line = |r: &SuiteReport| {
        format!(
            "{},{},{},{},{}\n",
            r.suite,
            r.cases,
            r.checks,
            r.violations.len(),
            if r.passed() { "pass" } else { "fail" }
        )
    };
    let csv = || std::iter::once("suite,cases,checks,violations,status\n".to_string()).chain(reports.iter().map(line)).collect();
    let human = || {
        let mut out = String::new();
        for r in &reports {
            out.push_str(&format!("{:<14} {:>5} checks  {}\n", r.suite.name(), r.checks, if r.passed() { "pass" } else { "FAIL" }));
            for v in &r.violations {
                out.push_str(&format!("  {}: {}\n", v.instance, v.detail));
            }
        }
        out
    };
    emit("verify", g, json!({ "cases": cases }), &reports, csv, human);
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.violations.iter().map(move |v| format!("{}: {} ({})", r.suite, v.detail, v.instance)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(failed.join("\n")))
    }
}

fn cmd_family<F: Field>(g: &Global, kind: &str, params: FamilyParams) -> CmdResult {
    let kind: FamilyKind =
        serde_json::from_value(Value::String(kind.to_string())).map_err(|_| Failure::Core(Error::InvalidFamily(format!("unknown family `{kind}`"))))?;
    let spec = FamilySpec {
        kind,
        params,
        seed: g.seed,
    };
    let p: Polynomial<F> = spec.build()?;
    let text = p.to_string();
    let result = json!({
        "spec": spec,
        "n_vars": p.n_vars(),
        "terms": p.len(),
        "degree": p.degree(),
        "polynomial": text,
    });
    emit("family", g, Value::Null, result, || format!("n_vars,terms,degree,polynomial\n{},{},{},\"{text}\"\n", p.n_vars(), p.len(), p.degree()), || format!("{text}\n"));
    Ok(())
}

fn cmd_bound(g: &Global, which: &BoundCmd) -> CmdResult {
    let kappa = g.kappa.unwrap_or(1);
    let ell = g.ell.unwrap_or(1);
    let (name, fields): (&str, Vec<(&str, String)>) = match *which {
        BoundCmd::Profiles { r, s_prime } => {
            if s_prime == 0 {
                return Err(Error::InvalidModel("S' must be at least 1".into()).into());
            }
            ("profiles", vec![("r", r.to_string()), ("s_prime", s_prime.to_string()), ("count", count_profiles(r, s_prime).to_string())])
        }
        BoundCmd::Steps { r, b, alphabet } => {
            let t = t_step(r, b, alphabet);
            let seq = count_kappa_step_sequences(&t, kappa);
            ("steps", vec![("r", r.to_string()), ("b", b.to_string()), ("alphabet", alphabet.to_string()), ("kappa", kappa.to_string()), ("t_step", t.to_string()), ("sequences", seq.to_string())])
        }
        BoundCmd::Circuit { s, n, c_gate } => (
            "circuit",
            vec![
                ("s", s.to_string()),
                ("n", n.to_string()),
                ("kappa", kappa.to_string()),
                ("ell", ell.to_string()),
                ("c_gate", c_gate.to_string()),
                ("bound", circuit_rank_bound(s, n, kappa, ell, c_gate).to_string()),
            ],
        ),
        BoundCmd::Coordinates { n, per_step } => (
            "coordinates",
            vec![("n", n.to_string()), ("kappa", kappa.to_string()), ("ell", ell.to_string()), ("budget", coordinate_budget(n, kappa, ell, per_step).to_string())],
        ),
        BoundCmd::Width { n, constant, exponent, max_kappa } => {
            let r = width_for(n, constant, exponent);
            let model = LocalModel::toy(r);
            let counts: Vec<String> = (2..=max_kappa.max(2)).map(|k| realized_profiles(&model, r, k).len().to_string()).collect();
            (
                "width",
                vec![
                    ("n", n.to_string()),
                    ("r", r.to_string()),
                    ("s_prime", model.s_prime().to_string()),
                    ("profile_cap", count_profiles(r, model.s_prime()).to_string()),
                    ("realized_kappa_2_up", counts.join(" ")),
                ],
            )
        }
    };
    let obj: serde_json::Map<String, Value> = fields.iter().map(|(k, v)| (k.to_string(), Value::String(v.clone()))).collect();
    let csv = || {
        let keys: Vec<&str> = fields.iter().map(|f| f.0).collect();
        let vals: Vec<&str> = fields.iter().map(|f| f.1.as_str()).collect();
        format!("{}\n{}\n", keys.join(","), vals.join(","))
    };
    let human = || fields.iter().map(|(k, v)| format!("{k:<20} {v}\n")).collect();
    emit("bound", g, json!({ "calculator": name, "kappa": kappa, "ell": ell }), obj, csv, human);
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let g = &cli.global;
    macro_rules! by_field {
        ($f:ident ( $($arg:expr),* )) => {
            match g.field {
                FieldArg::Q => $f::<Rational>($($arg),*),
                FieldArg::Gfp => $f::<Gf62>($($arg),*),
            }
        };
    }
    match &cli.command {
        Command::Rank { source, triplets } => by_field!(cmd_rank(g, source, triplets.as_deref())),
        Command::Sweep { source, kappas, ells, permute } => by_field!(cmd_sweep(g, source, kappas, ells, permute.as_deref())),
        Command::Pipeline(args) => by_field!(cmd_pipeline(g, args)),
        Command::Verify { suite, cases } => cmd_verify(g, suite, *cases),
        Command::Family {
            kind,
            n,
            d,
            exponent,
            clauses,
            locality,
            predicates,
            polynomial,
        } => {
            let params = FamilyParams {
                n: *n,
                d: *d,
                exponent: *exponent,
                clauses: *clauses,
                locality: *locality,
                predicates: *predicates,
                polynomial: polynomial.clone(),
                mode: None,
            };
            by_field!(cmd_family(g, kind, params))
        }
        Command::Bound { which } => cmd_bound(g, which),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
