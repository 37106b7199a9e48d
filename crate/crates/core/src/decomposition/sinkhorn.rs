use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

use super::real_entries;

/// Diagonal scalings `D₁ = diag(d1)`, `D₂ = diag(d2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPair {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl ScalingPair {
    /// `diag(d1) · m · diag(d2)`.
    pub fn apply(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        if m.rows() != self.d1.len() || m.cols() != self.d2.len() {
            return Err(Error::invalid("scaling size does not match matrix"));
        }
        Ok(DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            m[(i, j)] * (self.d1[i] * self.d2[j])
        }))
    }

    /// The pair undoing this scaling.
    pub fn inverse(&self) -> ScalingPair {
        ScalingPair {
            d1: self.d1.iter().map(|x| 1.0 / x).collect(),
            d2: self.d2.iter().map(|x| 1.0 / x).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sinkhorn {
    /// Scalings with `D₁·M·D₂ = S`, normalized so that `d1[0] = 1`.
    pub scaling: ScalingPair,
    /// The doubly-stochastic result `S`.
    pub matrix: DenseMatrix,
    pub iterations: usize,
    /// Max row/column sum deviation after each iteration.
    pub deviations: Vec<f64>,
}

/// Largest `|row sum - 1|` or `|column sum - 1|`.
pub fn stochastic_deviation(m: &DenseMatrix) -> f64 {
    let n = m.rows();
    let mut col = vec![0.0; m.cols()];
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut row = 0.0;
        for (c, z) in col.iter_mut().zip(m.row(i)) {
            row += z.re;
            *c += z.re;
        }
        worst = worst.max((row - 1.0).abs());
    }
    col.iter().fold(worst, |w, c| w.max((c - 1.0).abs()))
}

/// Alternating row/column normalization of a strictly positive matrix
/// until every row and column sums to 1 within `tol`.
pub fn sinkhorn(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<Sinkhorn> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::invalid("sinkhorn needs a non-empty square matrix"));
    }
    let a = real_entries(m)?;
    if let Some(x) = a.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::invalid(format!(
            "sinkhorn needs strictly positive finite entries, found {x}"
        )));
    }
    let n = m.rows();
    let mut d1 = vec![1.0; n];
    let mut d2 = vec![1.0; n];
    let mut deviations = Vec::new();

    let deviation = |d1: &[f64], d2: &[f64]| {
        let mut col = vec![0.0; n];
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                let s = d1[i] * a[i * n + j] * d2[j];
                row += s;
                col[j] += s;
            }
            worst = worst.max((row - 1.0).abs());
        }
        col.iter().fold(worst, |w, c| w.max((c - 1.0).abs()))
    };

    let mut dev = deviation(&d1, &d2);
    let mut iterations = 0;
    while dev >= tol {
        if iterations == max_iter {
            let last = scaled(&a, n, &d1, &d2);
            return Err(Error::NonConvergence {
                iterations,
                deviation: dev,
                last_iterate: last.as_slice().iter().map(|z| z.re).collect(),
            });
        }
        for i in 0..n {
            let s: f64 = (0..n).map(|j| a[i * n + j] * d2[j]).sum();
            d1[i] = 1.0 / s;
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|i| d1[i] * a[i * n + j]).sum();
            d2[j] = 1.0 / s;
        }
        iterations += 1;
        dev = deviation(&d1, &d2);
        deviations.push(dev);
    }

    let g = d1[0];
    for x in &mut d1 {
        *x /= g;
    }
    for x in &mut d2 {
        *x *= g;
    }
    Ok(Sinkhorn {
        matrix: scaled(&a, n, &d1, &d2),
        scaling: ScalingPair { d1, d2 },
        iterations,
        deviations,
    })
}

fn scaled(a: &[f64], n: usize, d1: &[f64], d2: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| Complex64::new(d1[i] * a[i * n + j] * d2[j], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn all_ones() {
        let m = DenseMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = sinkhorn(&m, 1e-14, 100).unwrap();
        for z in s.matrix.as_slice() {
            assert!((z.re - 0.5).abs() < 1e-15);
        }
        assert_eq!(s.scaling.d1[0], 1.0);
    }

    #[test]
    fn doubly_stochastic_is_a_fixed_point() {
        let m = DenseMatrix::from_real_rows(&[vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        let s = sinkhorn(&m, 1e-14, 100).unwrap();
        for x in s.scaling.d1.iter().chain(&s.scaling.d2) {
            assert!((x - 1.0).abs() < 1e-14);
        }
        assert!(s.matrix.max_abs_diff(&m).unwrap() < 1e-14);
    }

    #[test]
    fn random_positive_converges_and_rebuilds() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let m = DenseMatrix::from_fn(8, 8, |_, _| Complex64::new(rng.gen_range(0.01..1.0), 0.0));
        let s = sinkhorn(&m, 1e-12, 10_000).unwrap();
        assert!(stochastic_deviation(&s.matrix) < 1e-10);
        assert!(s.scaling.apply(&m).unwrap().max_abs_diff(&s.matrix).unwrap() < 1e-14);
        for w in s.deviations.chunks(10).collect::<Vec<_>>().windows(2) {
            assert!(w[1][0] <= w[0][0]);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let z = DenseMatrix::from_real_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(sinkhorn(&z, 1e-10, 10), Err(Error::InvalidArgument(_))));
        assert!(sinkhorn(&DenseMatrix::zeros(2, 3), 1e-10, 10).is_err());
        let m = DenseMatrix::from_real_rows(&[
            vec![1.0, 100.0, 3.0],
            vec![0.01, 1.0, 7.0],
            vec![5.0, 0.2, 1.0],
        ])
        .unwrap();
        let r = sinkhorn(&m, 1e-15, 1);
        assert!(matches!(r, Err(Error::NonConvergence { iterations: 1, .. })), "{r:?}");
    }
}
