//! Permutations of n-qubit computational basis indices.
//!
//! A [`Permutation`] stores the image of every basis index. The matrix it
//! stands for has a 1 at row `map[j]`, column `j`, so applying it to a state
//! is a scatter `out[map[j]] = v[j]`. Qubit `k` is bit `k` of the index
//! (bit 0 is the least significant).

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest qubit count accepted for index-map objects.
pub const MAX_QUBITS: u32 = 30;

/// `2^n`, after checking that `n` is a usable qubit count.
pub fn dimension(n: u32) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("qubit count must be at least 1"));
    }
    if n >= usize::BITS {
        return Err(Error::invalid(format!(
            "2^{n} overflows the platform integer"
        )));
    }
    if n > MAX_QUBITS {
        return Err(Error::ResourceLimit {
            what: "permutation",
            requested: n as usize,
            cap: MAX_QUBITS as usize,
        });
    }
    Ok(1usize << n)
}

/// Set of targeted qubits; bit `k` set means qubit `k` is acted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitMask(pub u64);

impl QubitMask {
    pub const NONE: QubitMask = QubitMask(0);

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    /// Mask from a list of qubit positions.
    pub fn from_qubits(qubits: impl IntoIterator<Item = u32>) -> Self {
        QubitMask(qubits.into_iter().fold(0u64, |acc, q| acc | (1u64 << q)))
    }

    pub fn check(self, n: u32) -> Result<()> {
        if n < u64::BITS && self.0 >> n != 0 {
            return Err(Error::invalid(format!(
                "qubit mask {:#b} out of range for {n} qubits",
                self.0
            )));
        }
        Ok(())
    }
}

impl std::ops::BitXor for QubitMask {
    type Output = QubitMask;

    fn bitxor(self, rhs: QubitMask) -> QubitMask {
        QubitMask(self.0 ^ rhs.0)
    }
}

/// Sign of basis state `index` under `Z^phi`: `(-1)^popcount(index & phi)`.
#[inline]
pub fn z_sign(index: usize, phi: QubitMask) -> f64 {
    if ((index as u64) & phi.0).count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Permutation of the `2^n` basis indices of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    n: u32,
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: u32) -> Result<Self> {
        let dim = dimension(n)?;
        Ok(Permutation {
            n,
            map: (0..dim).collect(),
        })
    }

    /// Uniformly random permutation (Fisher-Yates over the index map).
    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        let mut p = Self::identity(n)?;
        p.map.shuffle(rng);
        Ok(p)
    }

    /// The basis XOR `j -> j ^ mask`, i.e. the matrix of `X^mask`.
    pub fn xor(n: u32, mask: QubitMask) -> Result<Self> {
        Self::identity(n)?.apply_x_mask(mask)
    }

    /// Builds a permutation from an explicit index map, checking bijectivity.
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let len = map.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "permutation length {len} is not 2^n with n >= 1"
            )));
        }
        let n = len.trailing_zeros();
        dimension(n)?;
        let mut seen = vec![false; len];
        for &m in &map {
            if m >= len || std::mem::replace(&mut seen[m], true) {
                return Err(Error::invalid(format!(
                    "index map is not a bijection on 0..{len} (offending value {m})"
                )));
            }
        }
        Ok(Permutation { n, map })
    }

    pub fn qubits(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Image of basis index `j`.
    #[inline]
    pub fn image(&self, j: usize) -> usize {
        self.map[j]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(j, &m)| j == m)
    }

    /// `X^mask` applied after this permutation.
    pub fn apply_x_mask(&self, mask: QubitMask) -> Result<Self> {
        mask.check(self.n)?;
        let b = mask.0 as usize;
        Ok(Permutation {
            n: self.n,
            map: self.map.iter().map(|&m| m ^ b).collect(),
        })
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Permutation) -> Result<Self> {
        if self.n != first.n {
            return Err(Error::invalid("composing permutations of different sizes"));
        }
        Ok(Permutation {
            n: self.n,
            map: first.map.iter().map(|&j| self.map[j]).collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (j, &m) in self.map.iter().enumerate() {
            inv[m] = j;
        }
        Permutation { n: self.n, map: inv }
    }

    /// Computes `Z^phi · P · v` in O(N) without building a matrix.
    pub fn apply_to_state(&self, phi: QubitMask, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.accumulate_into(Complex64::new(1.0, 0.0), phi, v, &mut out)?;
        Ok(out)
    }

    /// `out += coeff · Z^phi · P · v`.
    pub(crate) fn accumulate_into(
        &self,
        coeff: Complex64,
        phi: QubitMask,
        v: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<()> {
        if v.len() != self.dim() || out.len() != self.dim() {
            return Err(Error::invalid(format!(
                "state length {} does not match dimension {}",
                v.len(),
                self.dim()
            )));
        }
        phi.check(self.n)?;
        for (j, &x) in v.iter().enumerate() {
            let row = self.map[j];
            out[row] += coeff * z_sign(row, phi) * x;
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(map: Vec<usize>) -> Result<Self> {
        Permutation::from_map(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.map
    }
}
