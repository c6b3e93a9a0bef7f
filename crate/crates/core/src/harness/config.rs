use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlinalg::{parse_rational, Rational};

/// Where the lattice of an experiment comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LatticeSpec {
    /// `RM(k_0, r) + 2 RM(k_1, r) + ... + 2^m Z^n`.
    RmFamily {
        degrees: Vec<usize>,
        r: usize,
    },
    Integer {
        n: usize,
    },
    Knapsack {
        a: Vec<i64>,
    },
    /// A lattice JSON file as written by `lattest construct`.
    File {
        path: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TesterKind {
    CodeFormula,
    CodeFormulaLinear,
    TolerantCodeFormula,
    Integer,
    TolerantInteger,
    Knapsack,
    LiftedKnapsack,
    /// Canonical linear test on index sets harvested from the code-formula tester.
    NonadaptiveHarvested,
}

impl TesterKind {
    pub fn name(self) -> &'static str {
        match self {
            TesterKind::CodeFormula => "code-formula",
            TesterKind::CodeFormulaLinear => "code-formula-linear",
            TesterKind::TolerantCodeFormula => "tolerant-code-formula",
            TesterKind::Integer => "integer",
            TesterKind::TolerantInteger => "tolerant-integer",
            TesterKind::Knapsack => "knapsack",
            TesterKind::LiftedKnapsack => "lifted-knapsack",
            TesterKind::NonadaptiveHarvested => "nonadaptive-harvested",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// Uniform members of `V` (span members for knapsack lattices).
    Members,
    /// Oracle-certified inputs at distance `>= eps` (`eps2` for tolerant testers).
    Far,
    /// A member moved by `eps1` along one axis.
    Close,
    AllHalves,
    /// The fixed vector in [`ExperimentConfig::values`].
    Given,
}

impl InputKind {
    pub fn name(self) -> &'static str {
        match self {
            InputKind::Members => "members",
            InputKind::Far => "far",
            InputKind::Close => "close",
            InputKind::AllHalves => "all-halves",
            InputKind::Given => "given",
        }
    }
}

/// Parameter lists; the experiment runs their cartesian product.
///
/// Rationals are strings such as `"1/4"`. Lists a tester does not use may be empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid {
    pub eps: Vec<String>,
    pub s: Vec<String>,
    pub c: Vec<String>,
    pub eps1: Vec<String>,
    pub eps2: Vec<String>,
    pub p: Vec<u32>,
}

fn default_pool() -> usize {
    16
}

fn default_attempts() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    pub tester: TesterKind,
    pub input: InputKind,
    pub grid: Grid,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Distinct far inputs generated per cell; trials cycle through them.
    #[serde(default = "default_pool")]
    pub far_pool: usize,
    #[serde(default = "default_attempts")]
    pub far_attempts: usize,
    /// Input vector for `"input": "given"`.
    #[serde(default)]
    pub values: Option<Vec<String>>,
}

pub(crate) fn parse_list(name: &str, xs: &[String]) -> Result<Vec<Rational>> {
    let mut out = xs
        .iter()
        .map(|x| {
            parse_rational(x).map_err(|e| Error::ConfigError(format!("grid value {name}={x}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::ConfigError(format!("experiment config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::ConfigError("trials must be at least 1".into()));
        }
        let need = |name: &str, xs: &[String]| -> Result<()> {
            if xs.is_empty() {
                Err(Error::ConfigError(format!(
                    "tester {} needs a nonempty grid list \"{name}\"",
                    self.tester.name()
                )))
            } else {
                Ok(())
            }
        };
        let g = &self.grid;
        match self.tester {
            TesterKind::CodeFormula
            | TesterKind::CodeFormulaLinear
            | TesterKind::NonadaptiveHarvested
            | TesterKind::Integer
            | TesterKind::Knapsack
            | TesterKind::LiftedKnapsack => {
                need("eps", &g.eps)?;
                need("s", &g.s)?;
            }
            TesterKind::TolerantCodeFormula | TesterKind::TolerantInteger => {
                need("eps1", &g.eps1)?;
                need("eps2", &g.eps2)?;
                need("c", &g.c)?;
                need("s", &g.s)?;
            }
        }
        if self.input == InputKind::Close {
            need("eps1", &g.eps1)?;
        }
        if (self.input == InputKind::Given) != self.values.is_some() {
            return Err(Error::ConfigError(
                "\"values\" is required for, and only for, input \"given\"".into(),
            ));
        }
        if g.p.iter().any(|&p| p != 1 && p != 2) {
            return Err(Error::ConfigError("p must be 1 or 2".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_json_str(
            r#"{"lattice": {"kind": "rm-family", "degrees": [1, 2], "r": 3},
                "tester": "code-formula", "input": "far",
                "grid": {"eps": ["1/4"], "s": ["1/3"]}, "trials": 10, "seed": 7}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.far_pool, 16);
        let mut bad = cfg.clone();
        bad.trials = 0;
        assert!(matches!(bad.validate(), Err(Error::ConfigError(_))));
        let mut bad = cfg;
        bad.tester = TesterKind::TolerantInteger;
        assert!(bad.validate().is_err());
        assert!(ExperimentConfig::from_json_str("{}").is_err());
    }
}
