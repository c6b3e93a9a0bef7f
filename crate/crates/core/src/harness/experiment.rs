use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde_json::{json, Value};

use super::config::parse_list;
use super::far::{generate_far_input, generate_far_span_input, FarInput};
use super::rng::{cell_seed, rng_from_seed, trial_seed};
use super::stats::{wilson_interval, WILSON_Z_99};
use super::{ExperimentConfig, InputKind, LatticeSpec, TesterKind};
use crate::codeformula::{lattice_tester, tolerant_lattice_tester, CodeFormulaLattice, TesterMode};
use crate::error::{Error, Result};
use crate::exactlinalg::{format_rational, int, parse_rational, ratio, rational_to_json, Rational};
use crate::exec::Exec;
use crate::lattice::{find_modulus, project_to_span, LatticeBasis, ModulusStructure};
use crate::lineartest::{nonadaptive_linear_tester, HarvestedIndexSets};
use crate::testers::{
    far_instance_outside_span, integer_lattice_tester, knapsack_tester, lift_tester_outside_span,
    tolerant_integer_tester, KnapsackLattice, LatticeTester,
};

/// Frozen column list of `aggregate.csv`, preceded by a `# lattest-aggregate v1` line.
pub const CSV_HEADER: &str = "tester,input,eps,s,c,eps1,eps2,p,trials,accepts,accept_rate,wilson_lo,wilson_hi,mean_queries,max_queries,budget,master_seed";
const CSV_VERSION: &str = "# lattest-aggregate v1";

/// One point of the parameter grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellParams {
    pub eps: Option<Rational>,
    pub s: Option<Rational>,
    pub c: Option<Rational>,
    pub eps1: Option<Rational>,
    pub eps2: Option<Rational>,
    pub p: u32,
}

fn opt(x: &Option<Rational>) -> String {
    x.as_ref().map(format_rational).unwrap_or_default()
}

impl CellParams {
    pub fn to_json(&self) -> Value {
        let f = |x: &Option<Rational>| x.as_ref().map(format_rational);
        json!({
            "eps": f(&self.eps), "s": f(&self.s), "c": f(&self.c),
            "eps1": f(&self.eps1), "eps2": f(&self.eps2), "p": self.p,
        })
    }

    fn need(&self, name: &str, x: &Option<Rational>) -> Result<Rational> {
        x.clone()
            .ok_or_else(|| Error::ConfigError(format!("grid cell is missing {name}")))
    }
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub accepted: bool,
    pub query_count: usize,
    pub input_index: usize,
    /// `(coordinate, value)` pairs in query order, 0-based.
    pub transcript: Vec<(usize, Rational)>,
}

/// Statistics of one grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialAggregate {
    pub tester: TesterKind,
    pub input: InputKind,
    pub params: CellParams,
    pub trials: u64,
    pub accepts: u64,
    pub accept_rate: Rational,
    pub wilson: (f64, f64),
    pub mean_queries: f64,
    pub max_queries: usize,
    pub budget: usize,
    pub master_seed: u64,
    pub records: Vec<TrialRecord>,
    /// Inputs used by the trials, with their certificates when far.
    pub inputs: Vec<(Vec<Rational>, Option<Value>)>,
}

impl TrialAggregate {
    /// Summary without per-trial records.
    pub fn to_json(&self) -> Value {
        json!({
            "tester": self.tester.name(),
            "input": self.input.name(),
            "params": self.params.to_json(),
            "trials": self.trials,
            "accepts": self.accepts,
            "accept_rate": rational_to_json(&self.accept_rate),
            "wilson": [self.wilson.0, self.wilson.1],
            "mean_queries": self.mean_queries,
            "max_queries": self.max_queries,
            "budget": self.budget,
            "master_seed": self.master_seed,
        })
    }

    pub fn csv_row(&self) -> String {
        let p = &self.params;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.3},{},{},{}",
            self.tester.name(),
            self.input.name(),
            opt(&p.eps),
            opt(&p.s),
            opt(&p.c),
            opt(&p.eps1),
            opt(&p.eps2),
            p.p,
            self.trials,
            self.accepts,
            num_traits::ToPrimitive::to_f64(&self.accept_rate).unwrap_or(f64::NAN),
            self.wilson.0,
            self.wilson.1,
            self.mean_queries,
            self.max_queries,
            self.budget,
            self.master_seed,
        )
    }
}

enum Resolved {
    CodeFormula(CodeFormulaLattice, ModulusStructure),
    Plain(LatticeBasis, ModulusStructure),
    Knapsack(KnapsackLattice),
}

fn resolve(spec: &LatticeSpec) -> Result<Resolved> {
    let full = |l: LatticeBasis| -> Result<Resolved> {
        let m = find_modulus(&l)?;
        Ok(Resolved::Plain(l, m))
    };
    match spec {
        LatticeSpec::RmFamily { degrees, r } => {
            let cf = CodeFormulaLattice::from_rm(degrees, *r)
                .map_err(|e| Error::ConfigError(format!("cannot build RM family: {e}")))?;
            let m = find_modulus(cf.lattice())?;
            Ok(Resolved::CodeFormula(cf, m))
        }
        LatticeSpec::Integer { n } => full(LatticeBasis::integer_lattice(*n)),
        LatticeSpec::Knapsack { a } => Ok(Resolved::Knapsack(KnapsackLattice::new(a))),
        LatticeSpec::File { path } => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::ConfigError(format!("{}: {e}", path.display())))?;
            let v: Value = serde_json::from_str(&text)?;
            resolve_json(&v)
        }
    }
}

fn resolve_json(v: &Value) -> Result<Resolved> {
    if v.get("code_formula").is_some() {
        let cf = CodeFormulaLattice::from_json(v)?;
        let m = find_modulus(cf.lattice())?;
        return Ok(Resolved::CodeFormula(cf, m));
    }
    if let Some(k) = v.get("knapsack") {
        let a: Vec<i64> = serde_json::from_value(k.get("a").cloned().unwrap_or(Value::Null))?;
        return Ok(Resolved::Knapsack(KnapsackLattice::new(&a)));
    }
    let l = LatticeBasis::from_json(v)?;
    let m = find_modulus(&l)?;
    Ok(Resolved::Plain(l, m))
}

impl Resolved {
    fn dim(&self) -> usize {
        match self {
            Resolved::CodeFormula(cf, _) => cf.n(),
            Resolved::Plain(l, _) => l.dim(),
            Resolved::Knapsack(k) => k.dim(),
        }
    }

    fn code_formula(&self, kind: TesterKind) -> Result<&CodeFormulaLattice> {
        match self {
            Resolved::CodeFormula(cf, _) => Ok(cf),
            _ => Err(Error::ConfigError(format!(
                "tester {} needs a code-formula lattice",
                kind.name()
            ))),
        }
    }

    fn knapsack(&self, kind: TesterKind) -> Result<&KnapsackLattice> {
        match self {
            Resolved::Knapsack(k) => Ok(k),
            _ => Err(Error::ConfigError(format!(
                "tester {} needs a knapsack lattice",
                kind.name()
            ))),
        }
    }

    fn full_rank(&self) -> Option<(&LatticeBasis, &ModulusStructure)> {
        match self {
            Resolved::CodeFormula(cf, m) => Some((cf.lattice(), m)),
            Resolved::Plain(l, m) => Some((l, m)),
            Resolved::Knapsack(_) => None,
        }
    }
}

fn require_integer_lattice(r: &Resolved, kind: TesterKind) -> Result<()> {
    let ok = match r.full_rank() {
        Some((l, _)) => l.determinant()? == 1.into(),
        None => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::ConfigError(format!(
            "tester {} needs the lattice Z^n",
            kind.name()
        )))
    }
}

fn build_tester(r: &Resolved, kind: TesterKind, p: &CellParams) -> Result<Arc<dyn LatticeTester>> {
    if matches!(kind, TesterKind::Integer | TesterKind::TolerantInteger) {
        require_integer_lattice(r, kind)?;
    }
    Ok(match kind {
        TesterKind::CodeFormula | TesterKind::CodeFormulaLinear => {
            let mode = if kind == TesterKind::CodeFormula {
                TesterMode::Standard
            } else {
                TesterMode::Linear
            };
            let cf = r.code_formula(kind)?;
            Arc::new(
                lattice_tester(cf, &p.need("eps", &p.eps)?, &p.need("s", &p.s)?)?.with_mode(mode),
            )
        }
        TesterKind::NonadaptiveHarvested => {
            let cf = r.code_formula(kind)?;
            let source = Arc::new(lattice_tester(
                cf,
                &p.need("eps", &p.eps)?,
                &p.need("s", &p.s)?,
            )?);
            Arc::new(nonadaptive_linear_tester(
                cf.lattice(),
                Arc::new(HarvestedIndexSets { source }),
            ))
        }
        TesterKind::TolerantCodeFormula => Arc::new(tolerant_lattice_tester(
            r.code_formula(kind)?,
            &p.need("eps1", &p.eps1)?,
            &p.need("eps2", &p.eps2)?,
            &p.need("c", &p.c)?,
            &p.need("s", &p.s)?,
        )?),
        TesterKind::Integer => Arc::new(integer_lattice_tester(
            r.dim(),
            &p.need("eps", &p.eps)?,
            &p.need("s", &p.s)?,
            p.p,
        )?),
        TesterKind::TolerantInteger => Arc::new(tolerant_integer_tester(
            r.dim(),
            &p.need("eps1", &p.eps1)?,
            &p.need("eps2", &p.eps2)?,
            &p.need("c", &p.c)?,
            &p.need("s", &p.s)?,
        )?),
        TesterKind::Knapsack => Arc::new(knapsack_tester(
            r.knapsack(kind)?,
            &p.need("eps", &p.eps)?,
            &p.need("s", &p.s)?,
            p.p,
        )?),
        TesterKind::LiftedKnapsack => {
            let k = r.knapsack(kind)?;
            let eps = p.need("eps", &p.eps)?;
            let inner = Arc::new(knapsack_tester(
                k,
                &(&eps / int(2)),
                &p.need("s", &p.s)?,
                p.p,
            )?);
            Arc::new(lift_tester_outside_span(k.lattice(), inner, &eps, p.p)?)
        }
    })
}

fn tolerant(kind: TesterKind) -> bool {
    matches!(
        kind,
        TesterKind::TolerantCodeFormula | TesterKind::TolerantInteger
    )
}

fn random_member(r: &Resolved, rng: &mut dyn rand::RngCore) -> Vec<Rational> {
    match r.full_rank() {
        Some((_, m)) => {
            let v = &m.reps()[rng.gen_range(0..m.len())];
            v.iter().map(|&x| int(x)).collect()
        }
        None => {
            let Resolved::Knapsack(k) = r else {
                unreachable!()
            };
            let free: Vec<Rational> = (0..k.dim() - 1)
                .map(|_| int(rng.gen_range(-3..=3)))
                .collect();
            k.span_point(&free)
        }
    }
}

fn make_inputs(
    cfg: &ExperimentConfig,
    r: &Resolved,
    params: &CellParams,
    seed: u64,
) -> Result<Vec<(Vec<Rational>, Option<Value>)>> {
    let mut rng = rng_from_seed(seed);
    let n = r.dim();
    let pool = (cfg.trials as usize).clamp(1, cfg.far_pool.max(1));
    match cfg.input {
        InputKind::AllHalves => Ok(vec![(vec![ratio(1, 2); n], None)]),
        InputKind::Given => {
            let t = parse_values(cfg.values.as_deref().unwrap_or_default())?;
            if t.len() != n {
                return Err(Error::ConfigError(format!(
                    "input has {} coordinates, lattice dimension is {n}",
                    t.len()
                )));
            }
            Ok(vec![(t, None)])
        }
        InputKind::Members => Ok((0..cfg.trials.min(4096))
            .map(|_| (random_member(r, &mut rng), None))
            .collect()),
        InputKind::Close => {
            let e1 = params.need("eps1", &params.eps1)?;
            Ok((0..pool)
                .map(|_| {
                    let mut t = random_member(r, &mut rng);
                    let j = rng.gen_range(0..n);
                    t[j] += &e1;
                    (t, None)
                })
                .collect())
        }
        InputKind::Far => {
            let eps = if tolerant(cfg.tester) {
                params.need("eps2", &params.eps2)?
            } else {
                params.need("eps", &params.eps)?
            };
            let mut out = Vec::with_capacity(pool);
            for _ in 0..pool {
                let far: FarInput = match (cfg.tester, r) {
                    (TesterKind::LiftedKnapsack, Resolved::Knapsack(k)) => {
                        let t = far_instance_outside_span(k.lattice(), &eps, params.p, &mut rng)?;
                        let proj = project_to_span(k.lattice(), &t, 2)?;
                        FarInput {
                            t,
                            certificate: json!({ "perp_l2_sq": format_rational(&proj.perp_pow_p) }),
                            strategy: "outside-span-gadget",
                        }
                    }
                    (_, Resolved::Knapsack(k)) => {
                        generate_far_span_input(k, &eps, params.p, &mut rng, cfg.far_attempts)?
                    }
                    (_, Resolved::CodeFormula(cf, m)) => generate_far_input(
                        cf.lattice(),
                        m,
                        &eps,
                        params.p,
                        &mut rng,
                        Some(cf),
                        cfg.far_attempts,
                    )?,
                    (_, Resolved::Plain(l, m)) => {
                        generate_far_input(l, m, &eps, params.p, &mut rng, None, cfg.far_attempts)?
                    }
                };
                out.push((far.t, Some(far.certificate)));
            }
            Ok(out)
        }
    }
}

fn parse_values(xs: &[String]) -> Result<Vec<Rational>> {
    xs.iter()
        .map(|x| parse_rational(x).map_err(|e| Error::ConfigError(format!("input value {x}: {e}"))))
        .collect()
}

fn cells(cfg: &ExperimentConfig) -> Result<Vec<CellParams>> {
    let g = &cfg.grid;
    let lift = |name: &str, xs: &[String]| -> Result<Vec<Option<Rational>>> {
        let v = parse_list(name, xs)?;
        Ok(if v.is_empty() {
            vec![None]
        } else {
            v.into_iter().map(Some).collect()
        })
    };
    let (eps, s, c, e1, e2) = (
        lift("eps", &g.eps)?,
        lift("s", &g.s)?,
        lift("c", &g.c)?,
        lift("eps1", &g.eps1)?,
        lift("eps2", &g.eps2)?,
    );
    let mut ps = g.p.clone();
    ps.sort_unstable();
    ps.dedup();
    if ps.is_empty() {
        ps.push(1);
    }
    let mut out = Vec::new();
    for a in &eps {
        for b in &s {
            for cc in &c {
                for d in &e1 {
                    for e in &e2 {
                        for &p in &ps {
                            out.push(CellParams {
                                eps: a.clone(),
                                s: b.clone(),
                                c: cc.clone(),
                                eps1: d.clone(),
                                eps2: e.clone(),
                                p,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Runs every grid cell; trials run in parallel and results are independent of
/// scheduling. Writes `trials.jsonl` and `aggregate.csv` when `out_dir` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialAggregate>> {
    cfg.validate()?;
    let resolved = resolve(&cfg.lattice)?;
    let mut aggregates = Vec::new();
    for (ci, params) in cells(cfg)?.into_iter().enumerate() {
        let cs = cell_seed(cfg.seed, ci as u64);
        let tester = build_tester(&resolved, cfg.tester, &params).map_err(|e| match e {
            Error::InvalidInput(m) => Error::ConfigError(m),
            other => other,
        })?;
        let inputs = make_inputs(cfg, &resolved, &params, cs)?;
        let records = Exec::default().map_range(cfg.trials as usize, |i| {
            let seed = trial_seed(cs, i as u64);
            let input_index = i % inputs.len();
            let o = tester.test(&inputs[input_index].0, seed);
            TrialRecord {
                trial: i as u64,
                seed,
                accepted: o.accepted,
                query_count: o.query_count,
                input_index,
                transcript: o.transcript,
            }
        });
        let budget = tester.query_budget();
        let accepts = records.iter().filter(|r| r.accepted).count() as u64;
        let max_queries = records.iter().map(|r| r.query_count).max().unwrap_or(0);
        if max_queries > budget {
            return Err(Error::InvariantViolated(format!(
                "a trial used {max_queries} queries, above the budget {budget}"
            )));
        }
        let total_q: usize = records.iter().map(|r| r.query_count).sum();
        aggregates.push(TrialAggregate {
            tester: cfg.tester,
            input: cfg.input,
            params,
            trials: cfg.trials,
            accepts,
            accept_rate: Rational::new(accepts.into(), cfg.trials.into()),
            wilson: wilson_interval(accepts, cfg.trials, WILSON_Z_99),
            mean_queries: total_q as f64 / cfg.trials as f64,
            max_queries,
            budget,
            master_seed: cfg.seed,
            records,
            inputs,
        });
    }
    if let Some(dir) = &cfg.out_dir {
        write_outputs(&aggregates, dir)?;
    }
    Ok(aggregates)
}

/// Writes `trials.jsonl` (one row per trial, far inputs with their certificate) and
/// `aggregate.csv` into `dir`.
pub fn write_outputs(aggregates: &[TrialAggregate], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut jsonl = String::new();
    let mut csv = format!("{CSV_VERSION}\n{CSV_HEADER}\n");
    for (ci, a) in aggregates.iter().enumerate() {
        for r in &a.records {
            let (_, cert) = &a.inputs[r.input_index];
            let row = json!({
                "cell": ci,
                "tester": a.tester.name(),
                "input": a.input.name(),
                "params": a.params.to_json(),
                "trial": r.trial,
                "seed": r.seed,
                "master_seed": a.master_seed,
                "input_index": r.input_index,
                "verdict": if r.accepted { "accept" } else { "reject" },
                "query_count": r.query_count,
                "queries": r.transcript.iter().map(|(i, v)| json!([i + 1, rational_to_json(v)])).collect::<Vec<_>>(),
                "certificate": cert,
            });
            writeln!(jsonl, "{row}").expect("writing to a String");
        }
        writeln!(csv, "{}", a.csv_row()).expect("writing to a String");
    }
    fs::write(dir.join("trials.jsonl"), jsonl)?;
    fs::write(dir.join("aggregate.csv"), csv)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Grid;

    fn cfg(
        tester: TesterKind,
        input: InputKind,
        lattice: LatticeSpec,
        eps: &[&str],
    ) -> ExperimentConfig {
        ExperimentConfig {
            lattice,
            tester,
            input,
            grid: Grid {
                eps: eps.iter().map(|s| s.to_string()).collect(),
                s: vec!["1/3".into()],
                ..Grid::default()
            },
            trials: 40,
            seed: 11,
            out_dir: None,
            far_pool: 4,
            far_attempts: 50,
            values: None,
        }
    }

    #[test]
    fn members_always_accepted_and_halves_rejected() {
        let rm = LatticeSpec::RmFamily {
            degrees: vec![1, 2],
            r: 3,
        };
        let a = run_experiment(&cfg(
            TesterKind::CodeFormula,
            InputKind::Members,
            rm,
            &["1/4"],
        ))
        .unwrap();
        assert_eq!(a[0].accept_rate, int(1));
        let z = LatticeSpec::Integer { n: 8 };
        let a =
            run_experiment(&cfg(TesterKind::Integer, InputKind::AllHalves, z, &["1/2"])).unwrap();
        assert_eq!(a[0].accepts, 0);
    }

    #[test]
    fn outputs_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let rm = LatticeSpec::RmFamily {
            degrees: vec![1, 2],
            r: 3,
        };
        let mut c = cfg(TesterKind::CodeFormula, InputKind::Far, rm, &["1/8", "1/4"]);
        c.out_dir = Some(dir.path().join("a"));
        run_experiment(&c).unwrap();
        c.out_dir = Some(dir.path().join("b"));
        let aggs = run_experiment(&c).unwrap();
        assert_eq!(aggs.len(), 2);
        for f in ["trials.jsonl", "aggregate.csv"] {
            let a = fs::read(dir.path().join("a").join(f)).unwrap();
            let b = fs::read(dir.path().join("b").join(f)).unwrap();
            assert_eq!(a, b, "{f} differs");
        }
        let csv = fs::read_to_string(dir.path().join("a/aggregate.csv")).unwrap();
        assert!(csv.starts_with("# lattest-aggregate v1\ntester,input,eps"));
        let first = fs::read_to_string(dir.path().join("a/trials.jsonl")).unwrap();
        let row: Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
        assert!(row["certificate"]["dist_pow_p"].is_string());
    }

    #[test]
    fn wrong_lattice_is_config_error() {
        let z = LatticeSpec::Integer { n: 4 };
        let err = run_experiment(&cfg(TesterKind::Knapsack, InputKind::Members, z, &["1/4"]))
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
