//! Output-state fidelity of a perturbed operator and the singular-value
//! bounds on the relative output error.
//!
//! For an input `ψ` the reference output is `φ = Aψ` and the noisy output is
//! `φ̃ = Bψ`. Two fidelities are tracked:
//!
//! * `f_overlap = |⟨φ|φ̃⟩| / ‖φ‖²`, blind to a global phase on `B`;
//! * `f_re = 1 - ‖φ - φ̃‖ / ‖φ‖`, which is not.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{inner, norm2, DenseMatrix, LinearOperator};
use crate::error::{Error, Result};
use crate::perm;
use crate::spectral::{self, gershgorin};

/// How random input states are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StateMode {
    /// Amplitudes uniform on `[0, 1]`.
    Positive,
    /// Amplitudes uniform on `[-1, 1]`.
    Mixed,
    /// A mixed draw with `⌊s·N⌋` random amplitudes zeroed.
    Sparse(f64),
}

impl FromStr for StateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(StateMode::Positive),
            "mixed" => Ok(StateMode::Mixed),
            _ => {
                let frac = s
                    .strip_prefix("sparse:")
                    .and_then(|f| f.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::invalid(format!(
                            "unknown state mode '{s}' (expected positive|mixed|sparse:<s>)"
                        ))
                    })?;
                if !(0.0..1.0).contains(&frac) {
                    return Err(Error::invalid(format!("sparsity {frac} outside [0, 1)")));
                }
                Ok(StateMode::Sparse(frac))
            }
        }
    }
}

impl fmt::Display for StateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateMode::Positive => f.write_str("positive"),
            StateMode::Mixed => f.write_str("mixed"),
            StateMode::Sparse(s) => write!(f, "sparse:{s}"),
        }
    }
}

impl TryFrom<String> for StateMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StateMode> for String {
    fn from(m: StateMode) -> String {
        m.to_string()
    }
}

/// A unit-norm input state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    mode: Option<StateMode>,
}

impl StateVector {
    /// Normalizes the given amplitudes; fails on the zero vector.
    pub fn from_amplitudes(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let nrm = norm2(&amplitudes);
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::invalid("state vector has zero or non-finite norm"));
        }
        for a in &mut amplitudes {
            *a /= nrm;
        }
        Ok(StateVector {
            amplitudes,
            mode: None,
        })
    }

    pub fn random<R: Rng + ?Sized>(n: u32, mode: StateMode, rng: &mut R) -> Result<Self> {
        let dim = perm::dimension(n)?;
        let zeroed = match mode {
            StateMode::Sparse(s) => {
                if !(0.0..1.0).contains(&s) {
                    return Err(Error::invalid(format!("sparsity {s} outside [0, 1)")));
                }
                let z = (s * dim as f64).floor() as usize;
                if z >= dim {
                    return Err(Error::invalid(format!(
                        "sparsity {s} leaves no support on {dim} amplitudes"
                    )));
                }
                z
            }
            _ => 0,
        };
        loop {
            let mut amps: Vec<Complex64> = (0..dim)
                .map(|_| {
                    let u: f64 = rng.gen();
                    let x = match mode {
                        StateMode::Positive => u,
                        StateMode::Mixed | StateMode::Sparse(_) => 2.0 * u - 1.0,
                    };
                    Complex64::new(x, 0.0)
                })
                .collect();
            if zeroed > 0 {
                for i in index::sample(rng, dim, zeroed) {
                    amps[i] = Complex64::new(0.0, 0.0);
                }
            }
            if let Ok(mut s) = StateVector::from_amplitudes(amps) {
                s.mode = Some(mode);
                return Ok(s);
            }
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn mode(&self) -> Option<StateMode> {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.amplitudes.iter().filter(|a| a.norm() != 0.0).count()
    }
}

fn outputs<A, B>(a: &A, b: &B, psi: &StateVector) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    let phi = a.apply(psi.amplitudes())?;
    let phi_b = b.apply(psi.amplitudes())?;
    let nrm = norm2(&phi);
    if nrm == 0.0 {
        return Err(Error::DivisionDomain("A maps the input state to zero".into()));
    }
    Ok((phi, phi_b, nrm))
}

/// `|⟨Aψ|Bψ⟩| / ‖Aψ‖²`. Not clamped: exceeds 1 when `B` amplifies.
pub fn f_overlap<A, B>(a: &A, b: &B, psi: &StateVector) -> Result<f64>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    let (phi, phi_b, _) = outputs(a, b, psi)?;
    Ok(overlap(&phi, &phi_b))
}

// Divides by the accumulated ‖φ‖² rather than a squared root so that
// B = A gives exactly 1.
fn overlap(phi: &[Complex64], phi_b: &[Complex64]) -> f64 {
    let energy: f64 = phi.iter().map(Complex64::norm_sqr).sum();
    inner(phi, phi_b).norm() / energy
}

/// `1 - ‖(A - B)ψ‖ / ‖Aψ‖`.
pub fn f_re<A, B>(a: &A, b: &B, psi: &StateVector) -> Result<f64>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    let (phi, phi_b, nrm) = outputs(a, b, psi)?;
    Ok(1.0 - diff_norm(&phi, &phi_b) / nrm)
}

fn diff_norm(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// `(σ_min, σ_max)` from the extreme eigenvalues of `MᴴM`.
///
/// Eigenvalues of `MᴴM` below `N·ε·λ_max` are at the rounding floor and
/// are reported as an exact zero singular value.
pub fn singular_extremes(m: &DenseMatrix) -> Result<(f64, f64)> {
    if !m.is_square() {
        return Err(Error::invalid("singular extremes need a square matrix"));
    }
    if m.rows() == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    let gram = m.adjoint().matmul(m)?;
    let spec = spectral::eigenvalues(&gram)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for z in &spec.eigenvalues {
        let x = z.re.max(0.0);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo <= m.rows() as f64 * f64::EPSILON * hi {
        lo = 0.0;
    }
    Ok((lo.sqrt(), hi.sqrt()))
}

/// Observed fidelities together with the bounds on the relative error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub f_overlap: f64,
    pub f_re: f64,
    /// `‖(A - B)ψ‖ / ‖Aψ‖`.
    pub relative_error: f64,
    /// `|‖Aψ‖ - ‖Bψ‖| / ‖Aψ‖`.
    pub bound_lower: f64,
    /// `σ_max(A - B) / σ_min(A)`; infinite when `A` is singular.
    pub bound_upper: f64,
    /// `(σ_max(A) + σ_max(B)) / σ_min(A)`; infinite when `A` is singular.
    pub bound_upper_loose: f64,
    pub sigma_min_a: f64,
    pub sigma_max_a: f64,
    pub sigma_max_b: f64,
}

/// Singular-value data that depends only on the operator pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSingularValues {
    pub sigma_min_a: f64,
    pub sigma_max_a: f64,
    pub sigma_max_b: f64,
    pub sigma_max_diff: f64,
}

impl PairSingularValues {
    pub fn compute(a: &DenseMatrix, b: &DenseMatrix) -> Result<Self> {
        let (sigma_min_a, sigma_max_a) = singular_extremes(a)?;
        let (_, sigma_max_b) = singular_extremes(b)?;
        let (_, sigma_max_diff) = singular_extremes(&a.sub(b)?)?;
        Ok(PairSingularValues {
            sigma_min_a,
            sigma_max_a,
            sigma_max_b,
            sigma_max_diff,
        })
    }
}

pub fn relative_error_bounds(a: &DenseMatrix, b: &DenseMatrix, psi: &StateVector) -> Result<FidelityReport> {
    let sv = PairSingularValues::compute(a, b)?;
    report_with(a, b, psi, &sv)
}

/// Same as [`relative_error_bounds`] with the singular values precomputed,
/// for evaluating many states against one operator pair.
pub fn report_with<A, B>(a: &A, b: &B, psi: &StateVector, sv: &PairSingularValues) -> Result<FidelityReport>
where
    A: LinearOperator + ?Sized,
    B: LinearOperator + ?Sized,
{
    let (phi, phi_b, nrm) = outputs(a, b, psi)?;
    let err = diff_norm(&phi, &phi_b) / nrm;
    let (bound_upper, bound_upper_loose) = if sv.sigma_min_a > 0.0 {
        (
            sv.sigma_max_diff / sv.sigma_min_a,
            (sv.sigma_max_a + sv.sigma_max_b) / sv.sigma_min_a,
        )
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(FidelityReport {
        f_overlap: overlap(&phi, &phi_b),
        f_re: 1.0 - err,
        relative_error: err,
        bound_lower: (nrm - norm2(&phi_b)).abs() / nrm,
        bound_upper,
        bound_upper_loose,
        sigma_min_a: sv.sigma_min_a,
        sigma_max_a: sv.sigma_max_a,
        sigma_max_b: sv.sigma_max_b,
    })
}

fn check_real_symmetric(m: &DenseMatrix, name: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(format!("{name} is not square")));
    }
    let tol = 1e-12 * m.max_abs().max(1.0);
    if m.max_imag() > tol {
        return Err(Error::invalid(format!("{name} is not real")));
    }
    if m.max_abs_diff(&m.transpose())? > tol {
        return Err(Error::invalid(format!("{name} is not symmetric")));
    }
    Ok(())
}

/// `1 - max_i ΔR_i / |λ_max(A)|` where `ΔR_i = Σ_{j≠i} |(A - B)_ij|` is the
/// Gershgorin radius of `A - B`. A lower bound on `f_re` for inputs along
/// the dominant eigenvector of `A`, valid for real symmetric `A`, `B` with
/// equal diagonals.
pub fn symmetric_fre_floor(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    check_real_symmetric(a, "A")?;
    check_real_symmetric(b, "B")?;
    let diff = a.sub(b)?;
    let tol = 1e-12 * a.max_abs().max(b.max_abs()).max(1.0);
    if diff.diagonal().iter().any(|d| d.norm() > tol) {
        return Err(Error::invalid("A and B must share their diagonal"));
    }
    let lmax = spectral::eigenvalues(a)?
        .dominant()
        .map_or(0.0, |z| z.norm());
    if lmax == 0.0 {
        return Err(Error::DivisionDomain("A has only zero eigenvalues".into()));
    }
    let max_radius = gershgorin(&diff)?
        .iter()
        .map(|d| d.radius)
        .fold(0.0, f64::max);
    Ok(1.0 - max_radius / lmax)
}

/// Result of the overlap floor computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OverlapFloor {
    Value { floor: f64 },
    /// `AᵀB` has eigenvalues off the real axis, so the floor is undefined.
    NotApplicable { max_imag: f64 },
}

/// `|λ_max(AᵀB)| / σ_max(A)²` for real symmetric `A`, `B` whose product
/// `AᵀB` has a real spectrum.
pub fn overlap_floor_symmetric(a: &DenseMatrix, b: &DenseMatrix) -> Result<OverlapFloor> {
    check_real_symmetric(a, "A")?;
    check_real_symmetric(b, "B")?;
    let prod = a.transpose().matmul(b)?;
    let spec = spectral::eigenvalues(&prod)?;
    let max_imag = spec.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag >= 1e-8 {
        return Ok(OverlapFloor::NotApplicable { max_imag });
    }
    let (_, smax) = singular_extremes(a)?;
    if smax == 0.0 {
        return Err(Error::DivisionDomain("A is the zero matrix".into()));
    }
    let lmax = spec.dominant().map_or(0.0, |z| z.norm());
    Ok(OverlapFloor::Value {
        floor: lmax / (smax * smax),
    })
}
