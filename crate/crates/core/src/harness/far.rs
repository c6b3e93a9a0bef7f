use rand::{Rng, RngCore};
use serde_json::{json, Value};

use crate::codeformula::CodeFormulaLattice;
use crate::error::{Error, Result};
use crate::exactlinalg::{abs_pow, format_rational, int, ratio, Rational};
use crate::lattice::{distance_oracle, DistanceResult, LatticeBasis, ModulusStructure};
use crate::testers::{knapsack_distance, KnapsackLattice};

/// An input together with the oracle certificate of its distance.
#[derive(Clone, Debug, PartialEq)]
pub struct FarInput {
    pub t: Vec<Rational>,
    pub certificate: Value,
    pub strategy: &'static str,
}

fn target(eps: &Rational, p: u32, n: usize) -> Rational {
    abs_pow(eps, p) * int(n as i64)
}

fn certify(
    l: &LatticeBasis,
    m: &ModulusStructure,
    t: Vec<Rational>,
    p: u32,
    goal: &Rational,
    strategy: &'static str,
) -> Result<Option<FarInput>> {
    let DistanceResult {
        dist_pow_p,
        witness,
        ..
    } = distance_oracle(l, m, &t, p)?;
    if dist_pow_p < *goal {
        return Ok(None);
    }
    let certificate = DistanceResult {
        p,
        dist_pow_p,
        witness,
    }
    .to_json();
    Ok(Some(FarInput {
        t,
        certificate,
        strategy,
    }))
}

/// Returns `t` with `d_p(t, L)^p >= eps^p n`, certified by the distance oracle.
///
/// Tries, in order: `attempts` random half-integral points of `[0, d)^n`; for a
/// code-formula lattice, `attempts` vectors `2^k w` per level with `w` a random bit
/// vector; finally the all-halves vector.
pub fn generate_far_input(
    l: &LatticeBasis,
    m: &ModulusStructure,
    eps: &Rational,
    p: u32,
    rng: &mut dyn RngCore,
    code_formula: Option<&CodeFormulaLattice>,
    attempts: usize,
) -> Result<FarInput> {
    let n = l.dim();
    let goal = target(eps, p, n);
    let d = m.d();
    for _ in 0..attempts {
        let t: Vec<Rational> = (0..n).map(|_| ratio(rng.gen_range(0..2 * d), 2)).collect();
        if let Some(f) = certify(l, m, t, p, &goal, "random")? {
            return Ok(f);
        }
    }
    if let Some(cf) = code_formula {
        for k in (0..cf.height()).rev() {
            for _ in 0..attempts {
                let w: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
                let (hd, _) = cf.family()[k].hamming_distance_oracle(&w)?;
                // d_1(2^k w, L) >= d_H(w, C_k), so skip words that cannot qualify
                if p == 1 && int(hd as i64) * int(1i64 << k) < goal {
                    continue;
                }
                let t = w.iter().map(|&b| int(i64::from(b) << k)).collect();
                if let Some(f) = certify(l, m, t, p, &goal, "scaled-codeword-gadget")? {
                    return Ok(f);
                }
            }
        }
    }
    if let Some(f) = certify(l, m, vec![ratio(1, 2); n], p, &goal, "all-halves")? {
        return Ok(f);
    }
    Err(Error::GenerationFailed(format!(
        "no input at distance^p >= {} found",
        format_rational(&goal)
    )))
}

/// Returns `w ∈ span(L)` for a knapsack lattice with `d_p(w, L)^p >= eps^p n`.
pub fn generate_far_span_input(
    k: &KnapsackLattice,
    eps: &Rational,
    p: u32,
    rng: &mut dyn RngCore,
    attempts: usize,
) -> Result<FarInput> {
    let goal = target(eps, p, k.dim());
    for _ in 0..attempts.max(1) {
        let free: Vec<Rational> = (0..k.dim() - 1)
            .map(|_| ratio(rng.gen_range(-4..=4), 2))
            .collect();
        let w = k.span_point(&free);
        let dist = knapsack_distance(k, &w, p)?;
        if dist >= goal {
            return Ok(FarInput {
                t: w,
                certificate: json!({ "p": p, "dist_pow_p": format_rational(&dist) }),
                strategy: "random-span",
            });
        }
    }
    Err(Error::GenerationFailed(format!(
        "no span input at distance^p >= {} found",
        format_rational(&goal)
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinalg::parse_rational;
    use crate::lattice::find_modulus;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn integer_lattice_halves() {
        let l = LatticeBasis::integer_lattice(8);
        let m = find_modulus(&l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = generate_far_input(&l, &m, &ratio(1, 2), 1, &mut rng, None, 0).unwrap();
        assert_eq!(f.strategy, "all-halves");
        assert!(generate_far_input(&l, &m, &ratio(3, 4), 1, &mut rng, None, 5).is_err());
    }

    #[test]
    fn toy_lattice_certificates() {
        let cf = CodeFormulaLattice::from_rm(&[1, 2], 3).unwrap();
        let m = find_modulus(cf.lattice()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f =
            generate_far_input(cf.lattice(), &m, &ratio(1, 4), 1, &mut rng, Some(&cf), 50).unwrap();
        let d = parse_rational(f.certificate["dist_pow_p"].as_str().unwrap()).unwrap();
        assert!(d >= int(2));
        let err =
            generate_far_input(cf.lattice(), &m, &int(1), 1, &mut rng, Some(&cf), 5).unwrap_err();
        assert!(matches!(err, Error::GenerationFailed(_)));
    }

    #[test]
    fn knapsack_span_inputs() {
        let k = KnapsackLattice::new(&[2, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = generate_far_span_input(&k, &ratio(1, 3), 1, &mut rng, 200).unwrap();
        assert!(k.lattice().contains(&f.t).is_ok());
    }
}
