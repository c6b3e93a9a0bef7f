use std::collections::BTreeSet;

use num_traits::Zero;

use super::LatticeBasis;
use crate::error::{Error, Result};
use crate::exactlinalg::{
    abs_pow, dot, inverse, orthogonal_complement_basis, solve, RatMatrix, Rational,
};

/// `t = parallel + perpendicular` with `parallel ∈ span(L)` and `perpendicular ⊥ span(L)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanProjection {
    pub parallel: Vec<Rational>,
    pub perpendicular: Vec<Rational>,
    /// `||perpendicular||_p^p`
    pub perp_pow_p: Rational,
}

/// Orthogonal projection onto `span(L)` through the normal equations
/// `(B B^T) x = B t`, so no orthonormal basis (and no square root) is needed.
pub fn project_to_span(l: &LatticeBasis, t: &[Rational], p: u32) -> Result<SpanProjection> {
    super::oracle::check_p(p)?;
    if t.len() != l.dim() {
        return Err(Error::invalid("dimension mismatch in projection"));
    }
    let b = l.basis();
    let parallel = if l.rank() == 0 {
        vec![Rational::zero(); t.len()]
    } else {
        let rhs = b.mul_vec(t);
        let x = solve(&b.gram(), &rhs)?.ok_or(Error::SingularMatrix)?;
        b.left_mul_vec(&x)
    };
    let perpendicular: Vec<Rational> = t.iter().zip(&parallel).map(|(a, b)| a - b).collect();
    let perp_pow_p = perpendicular
        .iter()
        .fold(Rational::zero(), |acc, x| acc + abs_pow(x, p));
    Ok(SpanProjection {
        parallel,
        perpendicular,
        perp_pow_p,
    })
}

/// `P`: the coordinates on which some vector of `span(L)^⊥` is nonzero (0-based).
pub fn support_of_complement(l: &LatticeBasis) -> Result<BTreeSet<usize>> {
    Ok(ComplementProjector::new(l)?.support().clone())
}

/// Projection onto `span(L)^⊥` computed from the coordinates in `P` only.
#[derive(Clone, Debug)]
pub struct ComplementProjector {
    basis: RatMatrix,
    gram_inv: RatMatrix,
    support: BTreeSet<usize>,
    dim: usize,
}

impl ComplementProjector {
    pub fn new(l: &LatticeBasis) -> Result<Self> {
        let basis = orthogonal_complement_basis(l.basis())?;
        let support = (0..l.dim())
            .filter(|&j| basis.row_iter().any(|r| !r[j].is_zero()))
            .collect();
        let gram_inv = inverse(&basis.gram())?;
        Ok(ComplementProjector {
            basis,
            gram_inv,
            support,
            dim: l.dim(),
        })
    }

    /// Rows spanning `span(L)^⊥` (integral, unnormalised).
    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    pub fn support(&self) -> &BTreeSet<usize> {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `t^⊥ = U^T (U U^T)^{-1} U t`, where `t` is only read on `P` through `value`.
    pub fn perpendicular(&self, mut value: impl FnMut(usize) -> Rational) -> Vec<Rational> {
        let mut t = vec![Rational::zero(); self.dim];
        for &j in &self.support {
            t[j] = value(j);
        }
        let ut = self.basis.mul_vec(&t);
        let coeffs = self.gram_inv.mul_vec(&ut);
        self.basis.left_mul_vec(&coeffs)
    }

    /// `||proj_{span(L)^⊥}(e_j)||_2^2`, positive exactly when `j ∈ P`.
    pub fn axis_weight(&self, j: usize) -> Rational {
        let col: Vec<Rational> = self.basis.row_iter().map(|r| r[j].clone()).collect();
        dot(&col, &self.gram_inv.mul_vec(&col))
    }
}
