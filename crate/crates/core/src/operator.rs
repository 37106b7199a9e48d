//! Operators written as `A = Σ α_i Z^{z_i} Π_i` and the bit-flip / phase-flip
//! channels acting on them.
//!
//! The channels are deterministic mixtures: a term hit with probability `p`
//! becomes `(1-p)·α·Π + p·α·X^b·Π`. Zero-weight pieces are dropped, so a
//! term with zero error probability passes through untouched.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{DenseMatrix, LinearOperator};
use crate::error::{Error, Result};
use crate::perm::{self, z_sign, Permutation, QubitMask};

/// Largest dimension `materialize` will build by default.
pub const MATERIALIZE_CAP: usize = 1 << 12;

/// One term `α · Z^zmask · Π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedPermTerm {
    pub alpha: Complex64,
    pub zmask: QubitMask,
    pub perm: Permutation,
}

impl SignedPermTerm {
    pub fn new(alpha: Complex64, zmask: QubitMask, perm: Permutation) -> Result<Self> {
        zmask.check(perm.qubits())?;
        Ok(SignedPermTerm { alpha, zmask, perm })
    }

    /// Unsigned, real-coefficient term.
    pub fn real(alpha: f64, perm: Permutation) -> Self {
        SignedPermTerm {
            alpha: Complex64::new(alpha, 0.0),
            zmask: QubitMask::NONE,
            perm,
        }
    }

    fn scaled(&self, w: f64) -> Self {
        SignedPermTerm {
            alpha: self.alpha * w,
            zmask: self.zmask,
            perm: self.perm.clone(),
        }
    }
}

/// Where random coefficients are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientRange {
    /// Uniform on `[0, 1]`.
    Positive,
    /// Uniform on `[-1, 1]`.
    Mixed,
}

impl CoefficientRange {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        match self {
            CoefficientRange::Positive => u,
            CoefficientRange::Mixed => 2.0 * u - 1.0,
        }
    }
}

impl std::str::FromStr for CoefficientRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(CoefficientRange::Positive),
            "mixed" => Ok(CoefficientRange::Mixed),
            other => Err(Error::invalid(format!(
                "unknown coefficient range '{other}' (expected positive|mixed)"
            ))),
        }
    }
}

/// A linear combination of signed permutations on `n` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PermSumRepr")]
pub struct PermSum {
    n: u32,
    terms: Vec<SignedPermTerm>,
}

#[derive(Deserialize)]
struct PermSumRepr {
    n: u32,
    terms: Vec<SignedPermTerm>,
}

impl TryFrom<PermSumRepr> for PermSum {
    type Error = Error;

    fn try_from(r: PermSumRepr) -> Result<Self> {
        PermSum::new(r.n, r.terms)
    }
}

impl PermSum {
    pub fn new(n: u32, terms: Vec<SignedPermTerm>) -> Result<Self> {
        perm::dimension(n)?;
        if terms.is_empty() {
            return Err(Error::invalid("a permutation sum needs at least one term"));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.perm.qubits() != n {
                return Err(Error::invalid(format!(
                    "term {i} acts on {} qubits, expected {n}",
                    t.perm.qubits()
                )));
            }
            t.zmask.check(n)?;
        }
        Ok(PermSum { n, terms })
    }

    /// `K` terms with random permutations and coefficients drawn from `range`.
    pub fn random<R: Rng + ?Sized>(
        n: u32,
        k: usize,
        range: CoefficientRange,
        rng: &mut R,
    ) -> Result<Self> {
        let terms = (0..k)
            .map(|_| {
                let alpha = range.sample(rng);
                Ok(SignedPermTerm::real(alpha, Permutation::random(n, rng)?))
            })
            .collect::<Result<Vec<_>>>()?;
        PermSum::new(n, terms)
    }

    pub fn qubits(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[SignedPermTerm] {
        &self.terms
    }

    pub fn alphas(&self) -> Vec<Complex64> {
        self.terms.iter().map(|t| t.alpha).collect()
    }

    pub fn coefficient_sum(&self) -> Complex64 {
        self.terms.iter().map(|t| t.alpha).sum()
    }

    /// Dense matrix, capped at [`MATERIALIZE_CAP`].
    pub fn materialize(&self) -> Result<DenseMatrix> {
        self.materialize_capped(MATERIALIZE_CAP)
    }

    pub fn materialize_capped(&self, cap: usize) -> Result<DenseMatrix> {
        let dim = self.dim();
        if dim > cap {
            return Err(Error::ResourceLimit {
                what: "dense materialization",
                requested: dim,
                cap,
            });
        }
        let mut m = DenseMatrix::zeros(dim, dim);
        for t in &self.terms {
            for j in 0..dim {
                let row = t.perm.image(j);
                m[(row, j)] += t.alpha * z_sign(row, t.zmask);
            }
        }
        Ok(m)
    }

    /// Column sums of the matrix, computed term by term.
    pub fn column_sums(&self) -> Vec<Complex64> {
        let mut sums = vec![Complex64::new(0.0, 0.0); self.dim()];
        for t in &self.terms {
            for (j, s) in sums.iter_mut().enumerate() {
                *s += t.alpha * z_sign(t.perm.image(j), t.zmask);
            }
        }
        sums
    }

    /// Bit-flip mixture: term `i` becomes `(1-p_i)α_i Π_i + p_i α_i X^{b_i} Π_i`.
    pub fn perturb_bitflip(&self, e: &ErrorSpec) -> Result<PermSum> {
        self.check_spec(e)?;
        let mut terms = Vec::with_capacity(2 * self.len());
        for (i, t) in self.terms.iter().enumerate() {
            let (p, b) = (e.p[i], e.b[i]);
            if p == 0.0 {
                terms.push(t.clone());
                continue;
            }
            if p < 1.0 {
                terms.push(t.scaled(1.0 - p));
            }
            terms.push(SignedPermTerm {
                alpha: t.alpha * p,
                zmask: t.zmask,
                perm: t.perm.apply_x_mask(b)?,
            });
        }
        PermSum::new(self.n, terms)
    }

    /// Phase-flip mixture: term `i` becomes `(1-q_i)α_i Π_i + q_i α_i Z^{φ_i} Π_i`.
    pub fn perturb_phaseflip(&self, e: &ErrorSpec) -> Result<PermSum> {
        self.check_spec(e)?;
        let mut terms = Vec::with_capacity(2 * self.len());
        for (i, t) in self.terms.iter().enumerate() {
            let (q, phi) = (e.q[i], e.phi[i]);
            if q == 0.0 {
                terms.push(t.clone());
                continue;
            }
            if q < 1.0 {
                terms.push(t.scaled(1.0 - q));
            }
            terms.push(SignedPermTerm {
                alpha: t.alpha * q,
                zmask: t.zmask ^ phi,
                perm: t.perm.clone(),
            });
        }
        PermSum::new(self.n, terms)
    }

    /// Both channels, bit-flips first: each term expands into up to four
    /// pieces `Π, X^bΠ, Z^φΠ, Z^φX^bΠ` weighted by the independent
    /// probabilities.
    pub fn perturb_combined(&self, e: &ErrorSpec) -> Result<PermSum> {
        self.check_spec(e)?;
        let mut terms = Vec::with_capacity(4 * self.len());
        for (i, t) in self.terms.iter().enumerate() {
            let (p, q) = (e.p[i], e.q[i]);
            if p == 0.0 && q == 0.0 {
                terms.push(t.clone());
                continue;
            }
            let flipped = t.perm.apply_x_mask(e.b[i])?;
            let phased = t.zmask ^ e.phi[i];
            let pieces = [
                ((1.0 - q) * (1.0 - p), t.zmask, &t.perm),
                ((1.0 - q) * p, t.zmask, &flipped),
                (q * (1.0 - p), phased, &t.perm),
                (q * p, phased, &flipped),
            ];
            for (w, zmask, perm) in pieces {
                if w != 0.0 {
                    terms.push(SignedPermTerm {
                        alpha: t.alpha * w,
                        zmask,
                        perm: perm.clone(),
                    });
                }
            }
        }
        PermSum::new(self.n, terms)
    }

    /// One Bernoulli realization of the combined channel: exactly `K` terms,
    /// each independently bit-flipped with probability `p_i` and then
    /// phase-flipped with probability `q_i`.
    pub fn sample_realization<R: Rng + ?Sized>(&self, e: &ErrorSpec, rng: &mut R) -> Result<PermSum> {
        self.check_spec(e)?;
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let bit = rng.gen::<f64>() < e.p[i];
                let phase = rng.gen::<f64>() < e.q[i];
                Ok(SignedPermTerm {
                    alpha: t.alpha,
                    zmask: if phase { t.zmask ^ e.phi[i] } else { t.zmask },
                    perm: if bit {
                        t.perm.apply_x_mask(e.b[i])?
                    } else {
                        t.perm.clone()
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PermSum::new(self.n, terms)
    }

    /// Moves the coefficient of term `i` to term `i ^ control_mask`,
    /// leaving the signed permutations where they are.
    pub fn swap_coefficients(&self, control_mask: usize) -> Result<PermSum> {
        let k = self.len();
        if !k.is_power_of_two() {
            return Err(Error::invalid(format!(
                "coefficient swap needs a power-of-two term count, got {k}"
            )));
        }
        if control_mask >= k {
            return Err(Error::invalid(format!(
                "control mask {control_mask} out of range for {k} terms"
            )));
        }
        let mut terms = self.terms.clone();
        for (i, t) in self.terms.iter().enumerate() {
            terms[i ^ control_mask].alpha = t.alpha;
        }
        PermSum::new(self.n, terms)
    }

    fn check_spec(&self, e: &ErrorSpec) -> Result<()> {
        if e.len() != self.len() {
            return Err(Error::invalid(format!(
                "error spec has {} entries for {} terms",
                e.len(),
                self.len()
            )));
        }
        e.check(self.n)
    }
}

impl LinearOperator for PermSum {
    fn dim(&self) -> usize {
        PermSum::dim(self)
    }

    fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for t in &self.terms {
            t.perm.accumulate_into(t.alpha, t.zmask, v, &mut out)?;
        }
        Ok(out)
    }
}

/// Per-term error probabilities and target masks.
///
/// `p`/`b` drive bit-flips, `q`/`phi` drive phase-flips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ErrorSpecRepr")]
pub struct ErrorSpec {
    pub p: Vec<f64>,
    pub b: Vec<QubitMask>,
    pub q: Vec<f64>,
    pub phi: Vec<QubitMask>,
}

#[derive(Deserialize)]
struct ErrorSpecRepr {
    p: Vec<f64>,
    b: Vec<QubitMask>,
    q: Vec<f64>,
    phi: Vec<QubitMask>,
}

impl TryFrom<ErrorSpecRepr> for ErrorSpec {
    type Error = Error;

    fn try_from(r: ErrorSpecRepr) -> Result<Self> {
        ErrorSpec::new(r.p, r.b, r.q, r.phi)
    }
}

impl ErrorSpec {
    pub fn new(p: Vec<f64>, b: Vec<QubitMask>, q: Vec<f64>, phi: Vec<QubitMask>) -> Result<Self> {
        let k = p.len();
        if b.len() != k || q.len() != k || phi.len() != k {
            return Err(Error::invalid("error spec arrays differ in length"));
        }
        if let Some(x) = p.iter().chain(&q).find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::invalid(format!("probability {x} outside [0, 1]")));
        }
        Ok(ErrorSpec { p, b, q, phi })
    }

    /// No errors on any of `k` terms.
    pub fn zero(k: usize) -> Self {
        ErrorSpec {
            p: vec![0.0; k],
            b: vec![QubitMask::NONE; k],
            q: vec![0.0; k],
            phi: vec![QubitMask::NONE; k],
        }
    }

    /// Bit-flips only.
    pub fn bitflip(p: Vec<f64>, b: Vec<QubitMask>) -> Result<Self> {
        let k = p.len();
        Self::new(p, b, vec![0.0; k], vec![QubitMask::NONE; k])
    }

    /// Phase-flips only.
    pub fn phaseflip(q: Vec<f64>, phi: Vec<QubitMask>) -> Result<Self> {
        let k = q.len();
        Self::new(vec![0.0; k], vec![QubitMask::NONE; k], q, phi)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn check(&self, n: u32) -> Result<()> {
        for m in self.b.iter().chain(&self.phi) {
            m.check(n)?;
        }
        Ok(())
    }
}
