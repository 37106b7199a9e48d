//! Bringing a positive matrix into permutation-sum form: Sinkhorn scaling
//! to a doubly-stochastic matrix, then Birkhoff–von Neumann extraction of
//! a convex combination of permutations, so that `M = D₁ (Σ w_i Π_i) D₂`.

mod birkhoff;
mod matching;
mod sinkhorn;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::operator::{PermSum, SignedPermTerm};

pub use birkhoff::{birkhoff, BirkhoffResult};
pub use sinkhorn::{sinkhorn, stochastic_deviation, ScalingPair, Sinkhorn};

/// Iteration budget used by [`ingest`].
pub const INGEST_MAX_ITER: usize = 100_000;

fn real_entries(m: &DenseMatrix) -> Result<Vec<f64>> {
    m.as_slice()
        .iter()
        .map(|z| {
            if z.im != 0.0 {
                Err(Error::invalid("matrix has complex entries"))
            } else {
                Ok(z.re)
            }
        })
        .collect()
}

/// Writes a strictly positive matrix as `M = diag(d1) · A · diag(d2)` with
/// `A` a convex combination of permutations.
///
/// The returned pair is the outer scaling (the inverse of the Sinkhorn
/// scaling), with `d1[0] = 1`. Input that is already doubly stochastic
/// within `tol` skips scaling, so it may contain zeros.
pub fn ingest(m: &DenseMatrix, tol: f64) -> Result<(ScalingPair, PermSum)> {
    let entries = real_entries(m)?;
    let already_stochastic =
        m.is_square() && entries.iter().all(|&x| x >= 0.0) && stochastic_deviation(m) < tol;
    let (scaling, s) = if already_stochastic {
        let ones = vec![1.0; m.rows()];
        (
            ScalingPair {
                d1: ones.clone(),
                d2: ones,
            },
            m.clone(),
        )
    } else {
        let scaled = sinkhorn(m, tol, INGEST_MAX_ITER)?;
        (scaled.scaling.inverse(), scaled.matrix)
    };
    let bvn = birkhoff(&s, tol)?;
    let n = m.rows().trailing_zeros();
    let terms = bvn
        .terms
        .into_iter()
        .map(|(w, p)| SignedPermTerm::real(w, p))
        .collect();
    Ok((scaling, PermSum::new(n, terms)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn two_by_two_round_trip() {
        let m = DenseMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let (scaling, a) = ingest(&m, 1e-12).unwrap();
        assert_eq!(scaling.d1[0], 1.0);
        assert!(a.terms().iter().all(|t| t.alpha.re > 0.0 && t.zmask.is_empty()));
        let rebuilt = scaling.apply(&a.materialize().unwrap()).unwrap();
        assert!(rebuilt.max_abs_diff(&m).unwrap() < 1e-7);
    }

    #[test]
    fn permutation_input_gives_one_term() {
        let mut s = DenseMatrix::zeros(4, 4);
        for (j, i) in [2usize, 0, 3, 1].into_iter().enumerate() {
            s[(i, j)] = Complex64::new(1.0, 0.0);
        }
        let (scaling, a) = ingest(&s, 1e-10).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a.terms()[0].perm.map(), &[2, 0, 3, 1]);
        assert!(scaling.d1.iter().chain(&scaling.d2).all(|&x| x == 1.0));
    }

    #[test]
    fn rejects_complex_input() {
        let m = DenseMatrix::from_rows(&[
            vec![Complex64::new(1.0, 1.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        ])
        .unwrap();
        assert!(ingest(&m, 1e-10).is_err());
    }
}
