//! Spectra of dense operators, eigenvalue error metrics, and Gershgorin
//! disks with the radius-change bounds for bit-flip and phase-flip noise.

mod assignment;
mod eigen;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::operator::ErrorSpec;

pub use assignment::min_cost_assignment;
pub use eigen::{eigenpairs, eigenpairs_with, residual, EigenConfig, Eigenpairs, EIGEN_CAP};

/// All eigenvalues of a matrix, with the worst certified residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub residual_bound: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dominant(&self) -> Option<Complex64> {
        dominant(&self.eigenvalues)
    }
}

/// Eigenvalues of a general complex matrix, residual-certified.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Spectrum> {
    eigenvalues_with(m, EigenConfig::default())
}

pub fn eigenvalues_with(m: &DenseMatrix, cfg: EigenConfig) -> Result<Spectrum> {
    let pairs = eigenpairs_with(m, cfg)?;
    Ok(Spectrum {
        residual_bound: pairs.residuals.iter().copied().fold(0.0, f64::max),
        eigenvalues: pairs.values,
    })
}

/// Relative width within which moduli and real parts count as tied when
/// picking the dominant eigenvalue.
const TIE_TOL: f64 = 1e-9;

/// Eigenvalue of largest modulus; `None` for an empty list.
///
/// Ties are broken by real part, then imaginary part. Values within
/// `1e-9·max|λ|` of each other count as tied, so rounding noise cannot
/// decide between the members of a conjugate pair.
pub fn dominant(values: &[Complex64]) -> Option<Complex64> {
    let top = values.iter().map(|z| z.norm()).max_by(f64::total_cmp)?;
    let slack = TIE_TOL * top;
    let by_modulus: Vec<Complex64> = values.iter().copied().filter(|z| z.norm() >= top - slack).collect();
    let best_re = by_modulus.iter().map(|z| z.re).max_by(f64::total_cmp)?;
    by_modulus
        .into_iter()
        .filter(|z| z.re >= best_re - slack)
        .max_by(|a, b| a.im.total_cmp(&b.im))
}

/// `|λ_a - λ_b| / |λ_a|`.
pub fn relative_error(lam_a: Complex64, lam_b: Complex64) -> Result<f64> {
    let denom = lam_a.norm();
    if denom == 0.0 {
        return Err(Error::DivisionDomain(
            "relative error against a zero eigenvalue".into(),
        ));
    }
    Ok((lam_a - lam_b).norm() / denom)
}

/// Denominator of the normalized mean squared eigenvalue error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmseNormalization {
    /// `|λ_max(A)|`.
    #[default]
    Modulus,
    /// `|λ_max(A)|²`, dimensionally consistent with the numerator.
    SquaredModulus,
}

/// Eigenvalue pairing that minimizes `Σ |λ_i - μ_σ(i)|`.
pub fn pair_eigenvalues(a: &[Complex64], b: &[Complex64]) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "spectra differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    let mut cost = Vec::with_capacity(n * n);
    for x in a {
        cost.extend(b.iter().map(|y| (x - y).norm()));
    }
    Ok(min_cost_assignment(n, &cost))
}

/// `(1/N) Σ |λ_i(A) - λ_σ(i)(B)|² / |λ_max(A)|` under the optimal pairing.
pub fn nmse(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    nmse_with(a, b, NmseNormalization::Modulus)
}

pub fn nmse_with(a: &Spectrum, b: &Spectrum, norm: NmseNormalization) -> Result<f64> {
    let pairing = pair_eigenvalues(&a.eigenvalues, &b.eigenvalues)?;
    let n = a.len();
    if n == 0 {
        return Ok(0.0);
    }
    let lmax = dominant(&a.eigenvalues).map_or(0.0, |z| z.norm());
    if lmax == 0.0 {
        return Err(Error::DivisionDomain(
            "NMSE against a spectrum whose dominant eigenvalue is zero".into(),
        ));
    }
    let denom = match norm {
        NmseNormalization::Modulus => lmax,
        NmseNormalization::SquaredModulus => lmax * lmax,
    };
    let sq: f64 = a
        .eigenvalues
        .iter()
        .zip(&pairing)
        .map(|(x, &j)| (x - b.eigenvalues[j]).norm_sqr())
        .sum();
    Ok(sq / (n as f64 * denom))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GershgorinDisk {
    pub center: Complex64,
    pub radius: f64,
}

impl GershgorinDisk {
    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        (z - self.center).norm() <= self.radius + slack
    }
}

/// Row disks: center `m_ii`, radius `Σ_{j≠i} |m_ij|`.
pub fn gershgorin(m: &DenseMatrix) -> Result<Vec<GershgorinDisk>> {
    if !m.is_square() {
        return Err(Error::invalid("gershgorin disks need a square matrix"));
    }
    Ok((0..m.rows())
        .map(|i| GershgorinDisk {
            center: m[(i, i)],
            radius: off_diagonal_row_sum(m, i),
        })
        .collect())
}

fn off_diagonal_row_sum(m: &DenseMatrix, i: usize) -> f64 {
    m.row(i)
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, z)| z.norm())
        .sum()
}

/// `Σ 2 p_i |α_i|`: bound on the change of any Gershgorin radius under
/// the bit-flip mixture.
pub fn bitflip_radius_bound(e: &ErrorSpec, alphas: &[Complex64]) -> Result<f64> {
    weighted_mass(&e.p, alphas)
}

/// `Σ 2 q_i |α_i|`, the phase-flip counterpart.
pub fn phaseflip_radius_bound(e: &ErrorSpec, alphas: &[Complex64]) -> Result<f64> {
    weighted_mass(&e.q, alphas)
}

fn weighted_mass(probs: &[f64], alphas: &[Complex64]) -> Result<f64> {
    if probs.len() != alphas.len() {
        return Err(Error::invalid(format!(
            "{} probabilities for {} coefficients",
            probs.len(),
            alphas.len()
        )));
    }
    Ok(probs.iter().zip(alphas).map(|(p, a)| 2.0 * p * a.norm()).sum())
}

/// Per-row `|R_j(B) - R_j(A)|` of the off-diagonal Gershgorin radii.
pub fn radius_deltas(a: &DenseMatrix, b: &DenseMatrix) -> Result<Vec<f64>> {
    if a.rows() != b.rows() || a.cols() != b.cols() || !a.is_square() {
        return Err(Error::invalid(format!(
            "radius deltas need equal square shapes, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok((0..a.rows())
        .map(|i| (off_diagonal_row_sum(b, i) - off_diagonal_row_sum(a, i)).abs())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{CoefficientRange, PermSum};
    use crate::perm::QubitMask;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn spectrum(v: &[f64]) -> Spectrum {
        Spectrum {
            eigenvalues: v.iter().map(|&x| c(x)).collect(),
            residual_bound: 0.0,
        }
    }

    #[test]
    fn dominant_rules() {
        assert_eq!(dominant(&[c(1.0), c(0.2)]), Some(c(1.0)));
        assert_eq!(dominant(&[c(-2.0), c(1.0)]), Some(c(-2.0)));
        // Equal modulus: larger real part, then larger imaginary part.
        assert_eq!(dominant(&[c(-1.0), c(1.0)]), Some(c(1.0)));
        assert_eq!(
            dominant(&[Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0)]),
            Some(Complex64::new(0.0, 1.0))
        );
        // A conjugate pair whose moduli differ by rounding.
        let lo = Complex64::new(0.6, -0.8);
        let hi = Complex64::new(0.6 + 1e-15, 0.8);
        assert!(lo.norm() != hi.norm());
        assert_eq!(dominant(&[lo, hi]), Some(hi));
        assert_eq!(dominant(&[Complex64::new(0.6 + 1e-15, -0.8), Complex64::new(0.6, 0.8)]), Some(Complex64::new(0.6, 0.8)));
        assert_eq!(dominant(&[]), None);
    }

    #[test]
    fn dominant_of_positive_permsum_is_coefficient_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let a = PermSum::random(4, 10, CoefficientRange::Positive, &mut rng).unwrap();
            let lam = eigenvalues(&a.materialize().unwrap()).unwrap().dominant().unwrap();
            let sum = a.coefficient_sum();
            assert!(relative_error(sum, lam).unwrap() < 1e-10);
        }
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(c(1.5), c(1.5)).unwrap(), 0.0);
        assert_eq!(relative_error(c(2.0), c(1.0)).unwrap(), 0.5);
        assert!(matches!(relative_error(c(0.0), c(1.0)), Err(Error::DivisionDomain(_))));
    }

    #[test]
    fn nmse_examples() {
        let a = spectrum(&[1.0, 0.2]);
        let b = spectrum(&[1.0, -0.4]);
        assert_eq!(nmse(&a, &a).unwrap(), 0.0);
        assert!((nmse(&a, &b).unwrap() - 0.18).abs() < 1e-15);
        let b_rev = spectrum(&[-0.4, 1.0]);
        assert!((nmse(&a, &b_rev).unwrap() - 0.18).abs() < 1e-15);
        assert!((nmse_with(&spectrum(&[2.0, 0.0]), &spectrum(&[2.0, 1.0]), NmseNormalization::SquaredModulus).unwrap()
            - 0.125)
            .abs()
            < 1e-15);
        assert!(nmse(&a, &spectrum(&[1.0])).is_err());
        assert!(nmse(&spectrum(&[0.0]), &spectrum(&[1.0])).is_err());
    }

    #[test]
    fn gershgorin_examples() {
        for d in gershgorin(&DenseMatrix::identity(3)).unwrap() {
            assert_eq!(d, GershgorinDisk { center: c(1.0), radius: 0.0 });
        }
        let m = DenseMatrix::from_real_rows(&[vec![0.6, 0.4], vec![0.4, 0.6]]).unwrap();
        for d in gershgorin(&m).unwrap() {
            assert_eq!(d.center, c(0.6));
            assert!((d.radius - 0.4).abs() < 1e-15);
        }
        assert!(gershgorin(&DenseMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn bound_examples() {
        let alphas = [c(0.6)];
        let zero = ErrorSpec::zero(1);
        assert_eq!(bitflip_radius_bound(&zero, &alphas).unwrap(), 0.0);
        assert_eq!(phaseflip_radius_bound(&zero, &alphas).unwrap(), 0.0);
        let e = ErrorSpec::bitflip(vec![0.5], vec![QubitMask(1)]).unwrap();
        assert!((bitflip_radius_bound(&e, &alphas).unwrap() - 0.6).abs() < 1e-15);
        let q = ErrorSpec::phaseflip(vec![0.5], vec![QubitMask(1)]).unwrap();
        assert!((phaseflip_radius_bound(&q, &[c(1.0)]).unwrap() - 1.0).abs() < 1e-15);
        // Same formula under p <-> q.
        let swapped = ErrorSpec::phaseflip(e.p.clone(), e.b.clone()).unwrap();
        assert_eq!(
            bitflip_radius_bound(&e, &alphas).unwrap(),
            phaseflip_radius_bound(&swapped, &alphas).unwrap()
        );
        assert!(bitflip_radius_bound(&e, &[c(1.0), c(2.0)]).is_err());
    }

    #[test]
    fn radius_deltas_examples() {
        let a = DenseMatrix::from_real_rows(&[vec![0.6, 0.4], vec![0.4, 0.6]]).unwrap();
        assert_eq!(radius_deltas(&a, &a).unwrap(), vec![0.0, 0.0]);
        let b = DenseMatrix::from_real_rows(&[vec![0.3, 0.7], vec![0.7, 0.3]]).unwrap();
        for d in radius_deltas(&a, &b).unwrap() {
            assert!((d - 0.3).abs() < 1e-15);
        }
        assert!(radius_deltas(&a, &DenseMatrix::identity(3)).is_err());
    }
}
