use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::perm::Permutation;

use super::matching::Matching;
use super::real_entries;
use super::sinkhorn::stochastic_deviation;

/// Weighted permutations extracted from a doubly-stochastic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffResult {
    pub terms: Vec<(f64, Permutation)>,
    /// Max absolute entry of `S - Σ w_i Π_i`.
    pub residual: f64,
}

impl BirkhoffResult {
    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w).sum()
    }

    /// `Σ w_i Π_i` as a dense matrix.
    pub fn reconstruct(&self, dim: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(dim, dim);
        for (w, p) in &self.terms {
            for j in 0..dim {
                m[(p.image(j), j)].re += w;
            }
        }
        m
    }
}

/// Greedy Birkhoff–von Neumann decomposition.
///
/// Repeatedly finds a perfect matching on the entries above `tol`, removes
/// the largest multiple of that permutation that keeps the remainder
/// non-negative, and stops once every entry is below `tol`. The dimension
/// must be a power of two so each term is a permutation of qubit basis
/// states.
pub fn birkhoff(s: &DenseMatrix, tol: f64) -> Result<BirkhoffResult> {
    if !s.is_square() {
        return Err(Error::invalid("birkhoff needs a square matrix"));
    }
    let n = s.rows();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::invalid(format!(
            "birkhoff terms are qubit permutations; dimension {n} is not 2^k with k >= 1"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let mut rem = real_entries(s)?;
    if let Some(x) = rem.iter().find(|&&x| x < -1e-12 || !x.is_finite()) {
        return Err(Error::invalid(format!("entry {x} is negative")));
    }
    let input_dev = stochastic_deviation(s);
    if input_dev > 1e-6 {
        return Err(Error::invalid(format!(
            "matrix is not doubly stochastic (max row/column deviation {input_dev:e})"
        )));
    }
    // Remainder mass attributable to the input's own imbalance.
    let noise_floor = 2.0 * input_dev + n as f64 * tol;
    let max_terms = n * n - 2 * n + 2;

    let mut terms = Vec::new();
    let mut matching = Matching::new(n);
    loop {
        let max_entry = rem.iter().copied().fold(0.0, f64::max);
        if max_entry < tol {
            break;
        }
        let found = matching.complete(|i, j| rem[i * n + j] > tol);
        if !found {
            let max_row = (0..n)
                .map(|i| rem[i * n..(i + 1) * n].iter().map(|x| x.max(0.0)).sum::<f64>())
                .fold(0.0, f64::max);
            if max_row <= noise_floor {
                break;
            }
            return Err(Error::DecompositionFailure {
                message: format!(
                    "no perfect matching on the support after {} terms (remaining row mass {max_row:e})",
                    terms.len()
                ),
                partial: Box::new(BirkhoffResult {
                    residual: residual(&rem),
                    terms,
                }),
            });
        }
        let w = (0..n)
            .map(|i| rem[i * n + matching.col_of_row[i]])
            .fold(f64::INFINITY, f64::min);
        let mut map = vec![0usize; n];
        for i in 0..n {
            let j = matching.col_of_row[i];
            rem[i * n + j] -= w;
            if rem[i * n + j] <= tol {
                matching.unmatch_row(i);
            }
            map[j] = i;
        }
        terms.push((w, Permutation::from_map(map)?));
        if terms.len() > max_terms {
            return Err(Error::DecompositionFailure {
                message: format!("exceeded the {max_terms}-term bound"),
                partial: Box::new(BirkhoffResult {
                    residual: residual(&rem),
                    terms,
                }),
            });
        }
    }
    Ok(BirkhoffResult {
        residual: residual(&rem),
        terms,
    })
}

fn residual(rem: &[f64]) -> f64 {
    rem.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
