//! Dense eigensolver for general complex matrices.
//!
//! Householder reduction to upper Hessenberg form, then single-shift complex
//! QR sweeps (Wilkinson shifts, with exceptional shifts against stagnation)
//! on the active window until the Hessenberg matrix is triangular. Each
//! eigenvector comes from inverse iteration on the Hessenberg form, mapped
//! back through the Householder reflectors; every eigenvalue is certified by
//! the residual `‖Mv - λv‖₂` of its unit eigenvector, measured against the
//! original matrix.

use num_complex::Complex64;

use crate::dense::{norm2, DenseMatrix};
use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest dimension the solver accepts.
pub const EIGEN_CAP: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenConfig {
    /// Residuals must satisfy `‖Mv - λv‖₂ <= residual_factor · ‖M‖_F`.
    pub residual_factor: f64,
    /// QR sweep budget is `sweeps_per_dim · N`.
    pub sweeps_per_dim: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            residual_factor: 1e-8,
            sweeps_per_dim: 100,
        }
    }
}

/// Eigenvalues with unit eigenvectors and their residuals.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<Complex64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
}

pub fn eigenpairs(m: &DenseMatrix) -> Result<Eigenpairs> {
    eigenpairs_with(m, EigenConfig::default())
}

pub fn eigenpairs_with(m: &DenseMatrix, cfg: EigenConfig) -> Result<Eigenpairs> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n > EIGEN_CAP {
        return Err(Error::ResourceLimit {
            what: "eigensolver",
            requested: n,
            cap: EIGEN_CAP,
        });
    }
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    if n == 0 {
        return Ok(Eigenpairs {
            values: vec![],
            vectors: vec![],
            residuals: vec![],
        });
    }

    let mut h = m.clone();
    let mut q = DenseMatrix::identity(n);
    reduce_to_hessenberg(&mut h, &mut q);
    let mut t = h.clone();
    triangularize(&mut t, cfg.sweeps_per_dim.saturating_mul(n).max(30))?;

    let values = t.diagonal();
    let tol = cfg.residual_factor * m.frobenius_norm();
    let mut solver = HessenbergSolver::new(&h);
    let vectors = values.iter().map(|&lambda| {
        solver
            .vector(lambda)
            .map(|y| q.matvec(&y).expect("square"))
            .unwrap_or_else(|| vec![ZERO; n])
    });

    let mut residuals = Vec::with_capacity(n);
    let mut vectors_out = Vec::with_capacity(n);
    for (k, (lambda, v)) in values.iter().zip(vectors).enumerate() {
        let mut v = v;
        let mut r = residual(m, *lambda, &v);
        if !(r <= tol) {
            if let Some((v2, r2)) = inverse_iteration(m, *lambda) {
                if r2 < r || r.is_nan() {
                    v = v2;
                    r = r2;
                }
            }
        }
        if !(r <= tol) {
            return Err(Error::NumericalFailure {
                message: format!(
                    "residual {r:e} for eigenvalue {k} ({lambda}) exceeds {tol:e}"
                ),
                partial: values.clone(),
            });
        }
        residuals.push(r);
        vectors_out.push(v);
    }

    Ok(Eigenpairs {
        values,
        vectors: vectors_out,
        residuals,
    })
}

/// `‖Mv - λv‖₂` for the given vector.
pub fn residual(m: &DenseMatrix, lambda: Complex64, v: &[Complex64]) -> f64 {
    let mv = m.matvec(v).expect("dimension checked by caller");
    mv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Householder reduction `A <- Q^H A Q`, accumulating `Q` into `q`.
fn reduce_to_hessenberg(a: &mut DenseMatrix, q: &mut DenseMatrix) {
    let n = a.rows();
    let mut v = vec![ZERO; n];
    let mut s = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;

        let len = n - k - 1;
        let v = &mut v[..len];
        for (vi, i) in v.iter_mut().zip(k + 1..n) {
            *vi = a[(i, k)];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(Complex64::norm_sqr).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;

        // Left: rows k+1.., columns k..
        let s = &mut s[..n];
        s[k..].fill(ZERO);
        for (vi, i) in v.iter().zip(k + 1..n) {
            let vc = vi.conj();
            for (sj, aij) in s[k..].iter_mut().zip(&a.row(i)[k..]) {
                *sj += vc * aij;
            }
        }
        for (vi, i) in v.iter().zip(k + 1..n) {
            let f = *vi * tau;
            for (aij, sj) in a.row_mut(i)[k..].iter_mut().zip(&s[k..]) {
                *aij -= f * sj;
            }
        }

        // Right: all rows, columns k+1..
        apply_reflector_right(a, v, tau, k + 1);
        apply_reflector_right(q, v, tau, k + 1);

        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

fn apply_reflector_right(m: &mut DenseMatrix, v: &[Complex64], tau: f64, offset: usize) {
    for i in 0..m.rows() {
        let row = &mut m.row_mut(i)[offset..offset + v.len()];
        let dot: Complex64 = row.iter().zip(v).map(|(x, y)| x * y).sum();
        let f = dot * tau;
        for (x, y) in row.iter_mut().zip(v) {
            *x -= f * y.conj();
        }
    }
}

/// Rotation `[c s; -s̄ c]` mapping `(a, b)` to `(r, 0)`.
#[derive(Debug, Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn new(a: Complex64, b: Complex64) -> (Self, Complex64) {
        let an = a.norm();
        let bn = b.norm();
        if bn == 0.0 {
            return (Givens { c: 1.0, s: ZERO }, a);
        }
        if an == 0.0 {
            return (Givens { c: 0.0, s: b.conj() / bn }, Complex64::new(bn, 0.0));
        }
        let norm = an.hypot(bn);
        let phase = a / an;
        (
            Givens {
                c: an / norm,
                s: phase * b.conj() / norm,
            },
            phase * norm,
        )
    }

    /// Rows `i`, `i+1`, the given columns.
    fn apply_left(&self, m: &mut DenseMatrix, i: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let x = m[(i, j)];
            let y = m[(i + 1, j)];
            m[(i, j)] = self.c * x + self.s * y;
            m[(i + 1, j)] = -self.s.conj() * x + self.c * y;
        }
    }
}

/// Multiplies rows `l..=hi` of a Hessenberg matrix on the right by the
/// adjoints of `rots`, rotation `i` acting on columns `l+i`, `l+i+1` and
/// rows up to `l+i+1`. Runs row by row to keep the access contiguous.
fn apply_sweep_right(h: &mut DenseMatrix, rots: &[Givens], l: usize, hi: usize) {
    for r in l..=hi {
        let first = l.max(r.saturating_sub(1));
        let row = h.row_mut(r);
        for (g, k) in rots.iter().zip(l..).skip(first - l) {
            let x = row[k];
            let y = row[k + 1];
            row[k] = x * g.c + y * g.s.conj();
            row[k + 1] = -x * g.s + y * g.c;
        }
    }
}

/// Shifted QR on an upper Hessenberg `h` until its diagonal holds the
/// eigenvalues. Only the unreduced window is updated, so entries outside it
/// are not those of a Schur form.
fn triangularize(h: &mut DenseMatrix, max_sweeps: usize) -> Result<()> {
    let n = h.rows();
    let hnorm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    let mut rots: Vec<Givens> = Vec::with_capacity(n);

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut scale = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if scale == 0.0 {
                scale = hnorm;
            }
            if h[(l, l - 1)].norm() <= EPS * scale {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }

        total += 1;
        its += 1;
        if total > max_sweeps {
            return Err(Error::NumericalFailure {
                message: format!("QR iteration did not converge in {max_sweeps} sweeps"),
                partial: (hi + 1..n).map(|k| h[(k, k)]).collect(),
            });
        }

        let shift = if its.is_multiple_of(10) {
            // Exceptional shift: breaks the cycling seen on unitary blocks.
            let k = if its % 20 == 10 { l } else { hi - 1 };
            let sub = h[(k + 1, k)];
            let s = if sub.re != 0.0 { sub.re.abs() } else { sub.norm() };
            let base = if k == l { h[(l, l)] } else { h[(hi, hi)] };
            base + 0.75 * s
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in l..=hi {
            h[(k, k)] -= shift;
        }
        rots.clear();
        for k in l..hi {
            let (g, r) = Givens::new(h[(k, k)], h[(k + 1, k)]);
            h[(k, k)] = r;
            h[(k + 1, k)] = ZERO;
            g.apply_left(h, k, k + 1..hi + 1);
            rots.push(g);
        }
        apply_sweep_right(h, &rots, l, hi);
        for k in l..=hi {
            h[(k, k)] += shift;
        }
    }

    Ok(())
}

/// Eigenvalue of `[a b; c d]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Inverse iteration on an upper Hessenberg `H`, reusing one work buffer
/// across shifts.
///
/// LU with partial pivoting restricted to adjacent rows keeps each solve at
/// `O(N²)`. Pivots below `ε‖H‖_F` are raised to that size, so an exact
/// eigenvalue still yields a finite solve.
struct HessenbergSolver<'a> {
    h: &'a DenseMatrix,
    eps3: f64,
    u: Vec<Complex64>,
    mult: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl<'a> HessenbergSolver<'a> {
    fn new(h: &'a DenseMatrix) -> Self {
        let n = h.rows();
        let hnorm = h.frobenius_norm();
        HessenbergSolver {
            h,
            eps3: if hnorm > 0.0 { EPS * hnorm } else { 1.0 },
            u: vec![ZERO; n * n],
            mult: vec![ZERO; n],
            swapped: vec![false; n],
        }
    }

    /// Unit `y` with small `‖(H - λ)y‖`, or `None` on overflow.
    fn vector(&mut self, lambda: Complex64) -> Option<Vec<Complex64>> {
        let n = self.h.rows();
        let eps3 = Complex64::new(self.eps3, 0.0);
        let u = &mut self.u;
        u.copy_from_slice(self.h.as_slice());
        for i in 0..n {
            u[i * n + i] -= lambda;
        }
        for k in 0..n - 1 {
            let (top, rest) = u.split_at_mut((k + 1) * n);
            let rk = &mut top[k * n + k..];
            let rk1 = &mut rest[k..n];
            self.swapped[k] = rk1[0].norm() > rk[0].norm();
            if self.swapped[k] {
                rk.swap_with_slice(rk1);
            }
            if rk[0].norm() < self.eps3 {
                rk[0] = eps3;
            }
            let f = rk1[0] / rk[0];
            self.mult[k] = f;
            rk1[0] = ZERO;
            if f != ZERO {
                for (a, b) in rk1[1..].iter_mut().zip(&rk[1..]) {
                    *a -= f * b;
                }
            }
        }
        let last = n * n - 1;
        if u[last].norm() < self.eps3 {
            u[last] = eps3;
        }

        let mut y: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + (i as f64 * 0.618).fract(), 0.0))
            .collect();
        normalize(&mut y);
        for _ in 0..2 {
            for k in 0..n - 1 {
                if self.swapped[k] {
                    y.swap(k, k + 1);
                }
                let yk = y[k];
                y[k + 1] -= self.mult[k] * yk;
            }
            for i in (0..n).rev() {
                let row = &u[i * n..(i + 1) * n];
                let s: Complex64 = row[i + 1..].iter().zip(&y[i + 1..]).map(|(a, x)| a * x).sum();
                y[i] = (y[i] - s) / row[i];
            }
            if y.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
                return None;
            }
            normalize(&mut y);
        }
        Some(y)
    }
}

fn normalize(v: &mut [Complex64]) {
    let nrm = norm2(v);
    if nrm > 0.0 && nrm.is_finite() {
        for x in v.iter_mut() {
            *x /= nrm;
        }
    }
}

/// A few steps of inverse iteration on the full matrix with a slightly
/// perturbed shift. Used only when the Hessenberg vector misses the residual
/// target.
fn inverse_iteration(m: &DenseMatrix, lambda: Complex64) -> Option<(Vec<Complex64>, f64)> {
    let n = m.rows();
    let delta = EPS * m.frobenius_norm().max(1.0) * 16.0;
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] -= lambda + Complex64::new(delta, delta);
    }
    let lu = Lu::factor(shifted)?;
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64 * 0.618).fract(), 0.0))
        .collect();
    normalize(&mut v);
    let mut best: Option<(Vec<Complex64>, f64)> = None;
    for _ in 0..4 {
        v = lu.solve(&v);
        normalize(&mut v);
        if v.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            break;
        }
        let r = residual(m, lambda, &v);
        if best.as_ref().is_none_or(|(_, br)| r < *br) {
            best = Some((v.clone(), r));
        }
    }
    best
}

/// LU with partial pivoting.
struct Lu {
    lu: DenseMatrix,
    piv: Vec<usize>,
}

impl Lu {
    fn factor(mut a: DenseMatrix) -> Option<Self> {
        let n = a.rows();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                // Exactly singular: nudge the pivot so the solve still
                // produces a null-space direction.
                a[(k, k)] = Complex64::new(EPS, 0.0);
            } else if p != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = tmp;
                }
                piv.swap(k, p);
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f != ZERO {
                    for j in k + 1..n {
                        let akj = a[(k, j)];
                        a[(i, j)] -= f * akj;
                    }
                }
            }
        }
        Some(Lu { lu: a, piv })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = b.len();
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: Complex64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: Complex64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }
}
