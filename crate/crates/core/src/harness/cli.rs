//! The `lattest` command line. Coordinates in every JSON document it reads or writes
//! are 1-based.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use super::experiment::CSV_HEADER;
use super::{
    emit_plots, run_experiment, ExperimentConfig, Grid, InputKind, LatticeSpec, TesterKind,
};
use crate::codeformula::CodeFormulaLattice;
use crate::codes::{rm_code, BinaryLinearCode};
use crate::error::{Error, Result};
use crate::exactlinalg::{
    format_rational, parse_rational, parse_rational_list, rational_to_json, vector_from_json,
    vector_to_json,
};
use crate::lattice::{distance_oracle, find_modulus, shortest_vector, LatticeBasis};
use crate::lineartest::{
    adaptive_to_nonadaptive, dual_witness, lift_bounded_to_integer, lift_integer_to_real,
    rho_members, two_sided_to_linear, DualWitnessQuery, TreeDistribution, TreeTester,
};
use crate::testers::{knapsack_distance, KnapsackLattice, LatticeTester};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "lattest",
    version,
    about = "Local membership testers for integer lattices"
)]
pub struct Cli {
    /// Master seed; per-cell and per-trial seeds derive from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Directory for trials.jsonl, aggregate.csv and SVG plots.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// JSON file holding an array of rationals, or an object with key "t".
    #[arg(long, conflicts_with = "values")]
    pub input: Option<PathBuf>,
    /// Comma-separated rationals, e.g. `1/2,0,3`.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TesterChoice {
    Auto,
    CodeFormula,
    CodeFormulaLinear,
    NonadaptiveHarvested,
    Integer,
    Knapsack,
    LiftedKnapsack,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a lattice (or a single RM code) and write its JSON.
    Construct {
        /// Degrees of the RM family `RM(k_0, r) ⊆ RM(k_1, r) ⊆ ...`.
        #[arg(long, value_delimiter = ',', requires = "r")]
        rm_family: Vec<usize>,
        #[arg(long)]
        r: Option<usize>,
        /// Height m; must match the family length when both are given.
        #[arg(long)]
        height: Option<usize>,
        /// Code JSON files, one per level.
        #[arg(long, value_delimiter = ',')]
        codes: Vec<PathBuf>,
        /// Knapsack weights `a`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        knapsack: Vec<i64>,
        #[arg(long)]
        integer: Option<usize>,
        /// Only the code RM(k, r).
        #[arg(long, num_args = 2, value_names = ["K", "R"])]
        rm: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a tester on one input.
    Test {
        #[arg(long)]
        lattice: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value = "1/3")]
        s: String,
        #[arg(long, default_value_t = 1)]
        p: u32,
        #[arg(long, value_enum, default_value_t = TesterChoice::Auto)]
        tester: TesterChoice,
    },
    /// Run a tolerant tester on one input.
    TolerantTest {
        #[arg(long)]
        lattice: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        eps1: String,
        #[arg(long)]
        eps2: String,
        #[arg(long, default_value = "1/3")]
        c: String,
        #[arg(long, default_value = "1/3")]
        s: String,
    },
    /// Run an experiment config over its parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Exact distance (or shortest vector) by coset enumeration.
    Oracle {
        #[arg(long)]
        lattice: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 1)]
        p: u32,
        #[arg(long)]
        shortest: bool,
    },
    /// Dual vector certifying that the values on `coords` extend to no lattice point.
    DualWitness {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long, value_delimiter = ',')]
        coords: Vec<usize>,
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Apply the decision-tree reductions in order.
    Transform {
        /// Stages among 2sided, nonadaptive, integer, real.
        #[arg(long, value_delimiter = ',')]
        pipeline: Vec<String>,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long, default_value = "1/4")]
        eps: String,
        #[arg(long, default_value = "1/3")]
        s: String,
        #[arg(long, default_value_t = 1)]
        p: u32,
    },
    /// SVG charts from an aggregate CSV.
    Plot {
        /// Defaults to `<out-dir>/aggregate.csv`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::InvalidInput(m) | Error::RankError(m) | Error::NotALattice(m) => {
            Error::ConfigError(m)
        }
        Error::Io(io) => Error::ConfigError(io.to_string()),
        Error::Json(j) => Error::ConfigError(j.to_string()),
        other => other,
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::ConfigError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::ConfigError(format!("{}: {e}", path.display())))
}

fn read_input(args: &InputArgs) -> Result<Vec<String>> {
    let t = match (&args.input, &args.values) {
        (Some(path), _) => {
            let v = read_json(path)?;
            vector_from_json(v.get("t").unwrap_or(&v)).map_err(config_err)?
        }
        (None, Some(s)) => parse_rational_list(s).map_err(config_err)?,
        (None, None) => {
            return Err(Error::ConfigError(
                "one of --input or --values is required".into(),
            ))
        }
    };
    Ok(t.iter().map(format_rational).collect())
}

fn emit(out: &mut dyn Write, v: &Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Construct {
            rm_family,
            r,
            height,
            codes,
            knapsack,
            integer,
            rm,
            output,
        } => {
            let v = construct(rm_family, *r, *height, codes, knapsack, *integer, rm)?;
            match output {
                Some(path) => fs::write(path, serde_json::to_string_pretty(&v)? + "\n")?,
                None => emit(out, &v)?,
            }
            Ok(())
        }
        Command::Test {
            lattice,
            input,
            eps,
            s,
            p,
            tester,
        } => {
            let kind = match tester {
                TesterChoice::Auto => auto_tester(&read_json(lattice)?)?,
                TesterChoice::CodeFormula => TesterKind::CodeFormula,
                TesterChoice::CodeFormulaLinear => TesterKind::CodeFormulaLinear,
                TesterChoice::NonadaptiveHarvested => TesterKind::NonadaptiveHarvested,
                TesterChoice::Integer => TesterKind::Integer,
                TesterChoice::Knapsack => TesterKind::Knapsack,
                TesterChoice::LiftedKnapsack => TesterKind::LiftedKnapsack,
            };
            let grid = Grid {
                eps: vec![eps.clone()],
                s: vec![s.clone()],
                p: vec![*p],
                ..Grid::default()
            };
            single_input(cli, out, lattice, input, kind, grid)
        }
        Command::TolerantTest {
            lattice,
            input,
            eps1,
            eps2,
            c,
            s,
        } => {
            let kind = if read_json(lattice)?.get("code_formula").is_some() {
                TesterKind::TolerantCodeFormula
            } else {
                TesterKind::TolerantInteger
            };
            let grid = Grid {
                eps1: vec![eps1.clone()],
                eps2: vec![eps2.clone()],
                c: vec![c.clone()],
                s: vec![s.clone()],
                ..Grid::default()
            };
            single_input(cli, out, lattice, input, kind, grid)
        }
        Command::Sweep { config } => {
            let text = fs::read_to_string(config)
                .map_err(|e| Error::ConfigError(format!("{}: {e}", config.display())))?;
            let mut cfg = ExperimentConfig::from_json_str(&text)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(trials) = cli.trials {
                cfg.trials = trials;
            }
            if cli.out_dir.is_some() {
                cfg.out_dir = cli.out_dir.clone();
            }
            let aggs = run_experiment(&cfg)?;
            report(cli.format, out, &aggs)
        }
        Command::Oracle {
            lattice,
            input,
            p,
            shortest,
        } => oracle(cli.format, out, lattice, input, *p, *shortest),
        Command::DualWitness {
            lattice,
            coords,
            values,
        } => {
            let l = load_lattice(lattice)?;
            if coords.contains(&0) {
                return Err(Error::ConfigError("coordinates are 1-based".into()));
            }
            let vals = parse_rational_list(values).map_err(config_err)?;
            let q = DualWitnessQuery::new(coords.iter().map(|c| c - 1).collect(), vals)
                .map_err(config_err)?;
            let w = dual_witness(&l, &q).map_err(config_err)?;
            emit(out, &json!({ "witness": w.as_deref().map(vector_to_json) }))
        }
        Command::Transform {
            pipeline,
            tree,
            lattice,
            eps,
            s,
            p,
        } => {
            let v = transform(pipeline, tree, lattice, eps, s, *p)?;
            emit(out, &v)
        }
        Command::Plot { input } => {
            let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
            let csv_path = input.clone().unwrap_or_else(|| dir.join("aggregate.csv"));
            let csv = fs::read_to_string(&csv_path)
                .map_err(|e| Error::ConfigError(format!("{}: {e}", csv_path.display())))?;
            let files = emit_plots(&csv, &dir).map_err(config_err)?;
            emit(
                out,
                &json!({ "written": files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>() }),
            )
        }
    }
}

fn construct(
    rm_family: &[usize],
    r: Option<usize>,
    height: Option<usize>,
    codes: &[PathBuf],
    knapsack: &[i64],
    integer: Option<usize>,
    rm: &[usize],
) -> Result<Value> {
    let chosen = [
        !rm_family.is_empty(),
        !codes.is_empty(),
        !knapsack.is_empty(),
        integer.is_some(),
        !rm.is_empty(),
    ];
    if chosen.iter().filter(|&&b| b).count() != 1 {
        return Err(Error::ConfigError(
            "choose exactly one of --rm-family, --codes, --knapsack, --integer, --rm".into(),
        ));
    }
    let levels = rm_family.len().max(codes.len());
    if let Some(h) = height {
        if levels > 0 && h != levels {
            return Err(Error::ConfigError(format!(
                "--height {h} but the family has {levels} levels"
            )));
        }
    }
    if !rm_family.is_empty() {
        let r = r.ok_or_else(|| Error::ConfigError("--rm-family needs --r".into()))?;
        return Ok(CodeFormulaLattice::from_rm(rm_family, r)
            .map_err(config_err)?
            .to_json());
    }
    if !codes.is_empty() {
        let family = codes
            .iter()
            .map(|p| BinaryLinearCode::from_json(&read_json(p)?).map_err(config_err))
            .collect::<Result<Vec<_>>>()?;
        return Ok(CodeFormulaLattice::build(family, levels)
            .map_err(config_err)?
            .to_json());
    }
    if !knapsack.is_empty() {
        let k = KnapsackLattice::new(knapsack);
        let mut v = k.lattice().to_json();
        v["knapsack"] = json!({ "a": knapsack });
        return Ok(v);
    }
    if let Some(n) = integer {
        if n == 0 {
            return Err(Error::ConfigError("--integer needs n >= 1".into()));
        }
        return Ok(LatticeBasis::integer_lattice(n).to_json());
    }
    let code = rm_code(rm[0], rm[1]).map_err(config_err)?;
    Ok(code.to_json())
}

fn auto_tester(v: &Value) -> Result<TesterKind> {
    if v.get("code_formula").is_some() {
        return Ok(TesterKind::CodeFormula);
    }
    if v.get("knapsack").is_some() {
        return Ok(TesterKind::LiftedKnapsack);
    }
    let l = LatticeBasis::from_json(v).map_err(config_err)?;
    if l.is_full_rank() && l.determinant()? == 1.into() {
        return Ok(TesterKind::Integer);
    }
    Err(Error::ConfigError(
        "no tester applies to this lattice; construct it as a code-formula or knapsack lattice"
            .into(),
    ))
}

fn single_input(
    cli: &Cli,
    out: &mut dyn Write,
    lattice: &Path,
    input: &InputArgs,
    tester: TesterKind,
    grid: Grid,
) -> Result<()> {
    let cfg = ExperimentConfig {
        lattice: LatticeSpec::File {
            path: lattice.to_path_buf(),
        },
        tester,
        input: InputKind::Given,
        grid,
        trials: cli.trials.unwrap_or(1),
        seed: cli.seed.unwrap_or(0),
        out_dir: cli.out_dir.clone(),
        far_pool: 1,
        far_attempts: 1,
        values: Some(read_input(input)?),
    };
    let aggs = run_experiment(&cfg)?;
    if cfg.trials == 1 && cli.format == Format::Json {
        let a = &aggs[0];
        let r = &a.records[0];
        return emit(
            out,
            &json!({
                "tester": a.tester.name(),
                "verdict": if r.accepted { "accept" } else { "reject" },
                "queries": r.transcript.iter().map(|(i, v)| json!([i + 1, rational_to_json(v)])).collect::<Vec<_>>(),
                "query_count": r.query_count,
                "budget": a.budget,
                "seed": r.seed,
                "master_seed": a.master_seed,
            }),
        );
    }
    report(cli.format, out, &aggs)
}

fn report(format: Format, out: &mut dyn Write, aggs: &[super::TrialAggregate]) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for a in aggs {
                writeln!(out, "{}", a.csv_row())?;
            }
            Ok(())
        }
        Format::Json => emit(
            out,
            &Value::Array(aggs.iter().map(|a| a.to_json()).collect()),
        ),
    }
}

fn load_lattice(path: &Path) -> Result<LatticeBasis> {
    LatticeBasis::from_json(&read_json(path)?).map_err(config_err)
}

fn oracle(
    format: Format,
    out: &mut dyn Write,
    lattice: &Path,
    input: &InputArgs,
    p: u32,
    shortest: bool,
) -> Result<()> {
    if p != 1 && p != 2 {
        return Err(Error::ConfigError("p must be 1 or 2".into()));
    }
    let v = read_json(lattice)?;
    let l = LatticeBasis::from_json(&v).map_err(config_err)?;
    let result = if !l.is_full_rank() {
        let a: Vec<i64> = v
            .get("knapsack")
            .and_then(|k| k.get("a"))
            .and_then(|a| serde_json::from_value(a.clone()).ok())
            .ok_or_else(|| {
                Error::ConfigError("exact distances need a full-rank or knapsack lattice".into())
            })?;
        if shortest {
            return Err(Error::ConfigError(
                "--shortest needs a full-rank lattice".into(),
            ));
        }
        let t = parse_values(&read_input(input)?)?;
        let k = KnapsackLattice::new(&a);
        if t.len() != k.dim() {
            return Err(Error::ConfigError(format!(
                "input has {} coordinates, expected {}",
                t.len(),
                k.dim()
            )));
        }
        json!({ "p": p, "dist_pow_p": rational_to_json(&knapsack_distance(&k, &t, p)?) })
    } else {
        let m = find_modulus(&l)?;
        if shortest {
            shortest_vector(&l, &m, p)?.to_json()
        } else {
            let t = parse_values(&read_input(input)?)?;
            if t.len() != l.dim() {
                return Err(Error::ConfigError(format!(
                    "input has {} coordinates, expected {}",
                    t.len(),
                    l.dim()
                )));
            }
            distance_oracle(&l, &m, &t, p)?.to_json()
        }
    };
    match format {
        Format::Json => emit(out, &result),
        Format::Csv => {
            writeln!(out, "p,dist_pow_p")?;
            writeln!(
                out,
                "{},{}",
                p,
                result["dist_pow_p"].as_str().unwrap_or_default()
            )?;
            Ok(())
        }
    }
}

fn parse_values(xs: &[String]) -> Result<Vec<crate::exactlinalg::Rational>> {
    xs.iter()
        .map(|x| parse_rational(x).map_err(config_err))
        .collect()
}

fn transform(
    pipeline: &[String],
    tree: &Path,
    lattice: &Path,
    eps: &str,
    s: &str,
    p: u32,
) -> Result<Value> {
    let l = load_lattice(lattice)?;
    let m = find_modulus(&l)?;
    let mut dist = TreeDistribution::from_json(&read_json(tree)?).map_err(config_err)?;
    dist.validate(l.dim()).map_err(config_err)?;
    let eps = parse_rational(eps).map_err(config_err)?;
    let s = parse_rational(s).map_err(config_err)?;
    let mut current: Arc<dyn LatticeTester> =
        Arc::new(TreeTester::new(l.dim(), dist.clone()).map_err(config_err)?);
    let mut stages = Vec::new();
    let mut linear = false;
    for stage in pipeline {
        let info = match stage.as_str() {
            "2sided" => {
                dist = two_sided_to_linear(&dist, &l, &m).map_err(config_err)?;
                current = Arc::new(TreeTester::new(l.dim(), dist.clone())?);
                json!({
                    "stage": "2sided",
                    "trees": dist.trees().len(),
                    "rho_members": rational_to_json(&rho_members(&dist, &m)),
                    "distribution": dist.to_json(),
                })
            }
            "nonadaptive" => {
                let t = adaptive_to_nonadaptive(&dist, &l, &m).map_err(config_err)?;
                let sets = t.sampler().max_size();
                linear = true;
                current = Arc::new(t);
                json!({ "stage": "nonadaptive", "max_index_set": sets, "query_budget": current.query_budget() })
            }
            "integer" => {
                current = Arc::new(lift_bounded_to_integer(current, &m));
                json!({ "stage": "integer", "query_budget": current.query_budget() })
            }
            "real" => {
                current = Arc::new(lift_integer_to_real(current, &eps, &s, p).map_err(config_err)?);
                json!({ "stage": "real", "query_budget": current.query_budget() })
            }
            other => return Err(Error::ConfigError(format!(
                "unknown pipeline stage {other:?}; expected 2sided, nonadaptive, integer or real"
            ))),
        };
        stages.push(info);
    }
    Ok(json!({ "stages": stages, "final_query_budget": current.query_budget(), "linear": linear }))
}
