use std::sync::Arc;

use serde_json::{json, Value};

use crate::codes::{
    rm_code, schur_condition, BinaryLinearCode, CodeTesterFactory, RmTesterFactory,
};
use crate::error::{Error, Result};
use crate::exactlinalg::{int, RatMatrix, Rational};
use crate::lattice::{distance_oracle, LatticeBasis, ModulusStructure};

/// Heights above this are refused (`2^m` must stay a small modulus).
const MAX_HEIGHT: usize = 16;

/// `L = C_0 + 2 C_1 + ... + 2^{m-1} C_{m-1} + 2^m Z^n` for a Schur-closed nested family.
#[derive(Clone, Debug)]
pub struct CodeFormulaLattice {
    family: Vec<BinaryLinearCode>,
    lattice: LatticeBasis,
    factories: Vec<Option<Arc<dyn CodeTesterFactory>>>,
    rm: Option<(Vec<usize>, usize)>,
}

impl CodeFormulaLattice {
    pub fn build(family: Vec<BinaryLinearCode>, m: usize) -> Result<Self> {
        if family.len() != m {
            return Err(Error::invalid(format!(
                "height {m} but the family has {} codes",
                family.len()
            )));
        }
        if m == 0 || m > MAX_HEIGHT {
            return Err(Error::invalid(format!(
                "height must lie in [1, {MAX_HEIGHT}]"
            )));
        }
        if !schur_condition(&family)? {
            return Err(Error::NotALattice(
                "the family is not nested or not closed under Schur products".into(),
            ));
        }
        let n = family[0].n();
        let mut gens: Vec<Vec<Rational>> = Vec::new();
        for (i, code) in family.iter().enumerate() {
            let scale = 1i64 << i;
            for g in code.generator() {
                gens.push(g.iter().map(|&b| int(scale * i64::from(b))).collect());
            }
        }
        for j in 0..n {
            let mut e = vec![int(0); n];
            e[j] = int(1i64 << m);
            gens.push(e);
        }
        let lattice = LatticeBasis::from_generators(&RatMatrix::from_rows(gens, n)?)?;
        Ok(CodeFormulaLattice {
            factories: vec![None; m],
            family,
            lattice,
            rm: None,
        })
    }

    /// `RM(k_0, r) + 2 RM(k_1, r) + ...` with flat testers registered for every level.
    pub fn from_rm(degrees: &[usize], r: usize) -> Result<Self> {
        let family = degrees
            .iter()
            .map(|&k| Ok(rm_code(k, r)?.code().clone()))
            .collect::<Result<Vec<_>>>()?;
        let mut l = Self::build(family, degrees.len())?;
        for (i, &k) in degrees.iter().enumerate() {
            l.register(i, Arc::new(RmTesterFactory::new(k, r)?))?;
        }
        l.rm = Some((degrees.to_vec(), r));
        Ok(l)
    }

    pub fn register(&mut self, level: usize, factory: Arc<dyn CodeTesterFactory>) -> Result<()> {
        if level >= self.height() {
            return Err(Error::invalid(format!("no code at level {level}")));
        }
        if factory.block_length() != self.n() {
            return Err(Error::invalid(
                "tester block length differs from the code length",
            ));
        }
        self.factories[level] = Some(factory);
        Ok(())
    }

    pub fn factory(&self, level: usize) -> Result<&Arc<dyn CodeTesterFactory>> {
        self.factories
            .get(level)
            .and_then(Option::as_ref)
            .ok_or_else(|| Error::ConfigError(format!("no code tester registered for C_{level}")))
    }

    pub fn family(&self) -> &[BinaryLinearCode] {
        &self.family
    }

    pub fn height(&self) -> usize {
        self.family.len()
    }

    pub fn n(&self) -> usize {
        self.lattice.dim()
    }

    pub fn lattice(&self) -> &LatticeBasis {
        &self.lattice
    }

    /// Lattice JSON plus a `"code_formula"` block describing the family.
    pub fn to_json(&self) -> Value {
        let mut v = self.lattice.to_json();
        let mut cf = json!({
            "height": self.height(),
            "family": self.family.iter().map(BinaryLinearCode::to_json).collect::<Vec<_>>(),
        });
        if let Some((degrees, r)) = &self.rm {
            cf["rm"] = json!({ "degrees": degrees, "r": r });
        }
        v["code_formula"] = cf;
        v
    }

    /// Reads the `"code_formula"` block; RM families get their testers back.
    pub fn from_json(v: &Value) -> Result<Self> {
        let cf = v.get("code_formula").ok_or_else(|| {
            Error::ConfigError("lattice file has no \"code_formula\" block".into())
        })?;
        if let Some(rm) = cf.get("rm") {
            let degrees: Vec<usize> =
                serde_json::from_value(rm.get("degrees").cloned().unwrap_or(Value::Null))?;
            let r = rm
                .get("r")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::invalid("\"rm\" block needs \"r\""))?
                as usize;
            return Self::from_rm(&degrees, r);
        }
        let family = cf
            .get("family")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::invalid("\"code_formula\" needs \"family\""))?
            .iter()
            .map(BinaryLinearCode::from_json)
            .collect::<Result<Vec<_>>>()?;
        let m = family.len();
        Self::build(family, m)
    }
}

/// `(d_1(t, C_k), d_1(2^k t, L), 2^k d_1(t, C_k))` for a bit vector `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SandwichTriple {
    pub lower: Rational,
    pub lattice: Rational,
    pub upper: Rational,
}

/// Computes the triple with both oracles; a broken ordering is an
/// [`Error::InvariantViolated`].
pub fn distance_sandwich_check(
    l: &CodeFormulaLattice,
    m: &ModulusStructure,
    k: usize,
    t: &[u8],
) -> Result<SandwichTriple> {
    let code = l
        .family()
        .get(k)
        .ok_or_else(|| Error::invalid(format!("no code at level {k}")))?;
    let (hd, _) = code.hamming_distance_oracle(t)?;
    let scale = 1i64 << k;
    let scaled: Vec<Rational> = t.iter().map(|&b| int(scale * i64::from(b))).collect();
    let lattice = distance_oracle(l.lattice(), m, &scaled, 1)?.dist_pow_p;
    let lower = int(hd as i64);
    let upper = int(scale * hd as i64);
    if !(lower <= lattice && lattice <= upper) {
        return Err(Error::InvariantViolated(format!(
            "sandwich {lower} <= {lattice} <= {upper} fails"
        )));
    }
    Ok(SandwichTriple {
        lower,
        lattice,
        upper,
    })
}
