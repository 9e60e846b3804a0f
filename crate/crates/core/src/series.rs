//! Dense truncated multivariate power series over ℂ.
//!
//! A [`PowerSeries`] holds the Taylor coefficients c_α of Σ_α c_α z^α on a
//! per-variable-capped grid: α is retained iff α_j ≤ caps_j for every j.
//! Binary operations truncate to the per-variable minimum of the operand
//! caps. Every operation is truncation-exact: if the operands carry the exact
//! coefficients of their functions through their caps, so does the result
//! through the result caps (multiplication is lower-triangular — the
//! coefficient at γ only involves α + β = γ, all retained).
//!
//! Coefficients are stored in lexicographic multi-index order with the last
//! variable varying fastest; this is also the basis order used by the matrix
//! sections, so linear offsets double as basis indices.

use num_complex::Complex64;
use thiserror::Error;

use crate::moebius::Lft;

/// Exponent vector of a monomial z^α.
pub type MultiIndex = Vec<usize>;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("dimension mismatch: {left} variables vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("multi-index {index:?} exceeds truncation caps {caps:?}")]
    CapExceeded { index: Vec<usize>, caps: Vec<usize> },
    #[error("linear-fractional map with d = 0 has a pole at the origin and no Taylor expansion there")]
    PoleAtOrigin,
    #[error("series parameter must lie in the open unit disk, got modulus {modulus}")]
    WeightOutsideDisk { modulus: f64 },
}

/// Per-variable degree caps. A multi-index α is retained iff α_j ≤ caps_j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truncation {
    caps: Vec<usize>,
}

impl Truncation {
    pub fn new(caps: Vec<usize>) -> Self {
        assert!(!caps.is_empty(), "truncation needs at least one variable");
        Truncation { caps }
    }

    pub fn uniform(d: usize, cap: usize) -> Self {
        Truncation::new(vec![cap; d])
    }

    pub fn dim(&self) -> usize {
        self.caps.len()
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }

    /// Number of retained multi-indices, ∏_j (caps_j + 1).
    pub fn coeff_count(&self) -> usize {
        self.caps.iter().map(|&c| c + 1).product()
    }

    pub fn contains(&self, alpha: &[usize]) -> bool {
        alpha.len() == self.dim() && alpha.iter().zip(&self.caps).all(|(&a, &c)| a <= c)
    }

    /// Linear offset of α in storage order (lexicographic, last variable
    /// fastest). α must be retained.
    pub fn offset(&self, alpha: &[usize]) -> usize {
        debug_assert!(self.contains(alpha), "index {alpha:?} outside caps {:?}", self.caps);
        let mut off = 0;
        for (j, &a) in alpha.iter().enumerate() {
            off = off * (self.caps[j] + 1) + a;
        }
        off
    }

    /// Per-variable minimum with `other`; the truncation of binary results.
    pub fn min(&self, other: &Truncation) -> Truncation {
        debug_assert_eq!(self.dim(), other.dim());
        Truncation::new(
            self.caps.iter().zip(&other.caps).map(|(&a, &b)| a.min(b)).collect(),
        )
    }

    /// All retained multi-indices in storage order.
    pub fn indices(&self) -> Indices<'_> {
        Indices { caps: &self.caps, next: Some(vec![0; self.caps.len()]) }
    }
}

/// Odometer over retained multi-indices in storage order.
pub struct Indices<'a> {
    caps: &'a [usize],
    next: Option<Vec<usize>>,
}

impl Iterator for Indices<'_> {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        // Increment from the last variable (fastest) with carry.
        for j in (0..self.caps.len()).rev() {
            if succ[j] < self.caps[j] {
                succ[j] += 1;
                self.next = Some(succ);
                break;
            }
            succ[j] = 0;
        }
        Some(current)
    }
}

/// Truncated Taylor series Σ_{α ≤ caps} c_α z^α.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    trunc: Truncation,
    coeffs: Vec<Complex64>,
}

impl PowerSeries {
    pub fn zero(trunc: Truncation) -> Self {
        let n = trunc.coeff_count();
        PowerSeries { trunc, coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn constant(trunc: Truncation, value: Complex64) -> Self {
        let mut s = PowerSeries::zero(trunc);
        s.coeffs[0] = value;
        s
    }

    /// The monomial z^α. Rejects exponents beyond the caps (the monomial
    /// would be invisible in this truncation, which is always a caller bug).
    pub fn monomial(trunc: Truncation, alpha: &[usize]) -> Result<Self, SeriesError> {
        if alpha.len() != trunc.dim() {
            return Err(SeriesError::DimMismatch { left: alpha.len(), right: trunc.dim() });
        }
        if !trunc.contains(alpha) {
            return Err(SeriesError::CapExceeded {
                index: alpha.to_vec(),
                caps: trunc.caps().to_vec(),
            });
        }
        let mut s = PowerSeries::zero(trunc);
        let off = s.trunc.offset(alpha);
        s.coeffs[off] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Tensor product c·∏_j h_j(z_j) from one univariate coefficient slice
    /// per variable; the caps are read off the slice lengths.
    pub fn tensor(c: Complex64, factors: &[Vec<Complex64>]) -> Self {
        assert!(!factors.is_empty(), "tensor needs at least one variable");
        let trunc = Truncation::new(factors.iter().map(|f| f.len() - 1).collect());
        let mut s = PowerSeries::zero(trunc);
        for (off, alpha) in s.trunc.indices().enumerate() {
            let mut v = c;
            for (j, &a) in alpha.iter().enumerate() {
                v *= factors[j][a];
            }
            s.coeffs[off] = v;
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    pub fn trunc(&self) -> &Truncation {
        &self.trunc
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at a retained multi-index.
    pub fn coeff(&self, alpha: &[usize]) -> Complex64 {
        assert!(
            self.trunc.contains(alpha),
            "coefficient {alpha:?} not retained under caps {:?}",
            self.trunc.caps()
        );
        self.coeffs[self.trunc.offset(alpha)]
    }

    pub fn add(&self, rhs: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        if self.dim() != rhs.dim() {
            return Err(SeriesError::DimMismatch { left: self.dim(), right: rhs.dim() });
        }
        let trunc = self.trunc.min(&rhs.trunc);
        let mut out = PowerSeries::zero(trunc);
        for (off, alpha) in out.trunc.indices().enumerate() {
            out.coeffs[off] = self.coeff(&alpha) + rhs.coeff(&alpha);
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> PowerSeries {
        PowerSeries {
            trunc: self.trunc.clone(),
            coeffs: self.coeffs.iter().map(|&v| c * v).collect(),
        }
    }

    /// Coefficient-wise complex conjugate; represents conj(s(conj(z))).
    pub fn conjugate_coeffs(&self) -> PowerSeries {
        PowerSeries {
            trunc: self.trunc.clone(),
            coeffs: self.coeffs.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Product, truncated to the per-variable minimum caps. Retained
    /// coefficients are exact (all contributing pairs are retained in the
    /// operands).
    pub fn mul(&self, rhs: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        if self.dim() != rhs.dim() {
            return Err(SeriesError::DimMismatch { left: self.dim(), right: rhs.dim() });
        }
        let trunc = self.trunc.min(&rhs.trunc);
        let d = trunc.dim();
        let caps = trunc.caps().to_vec();
        let mut out = PowerSeries::zero(trunc);
        let left: Vec<MultiIndex> = self.trunc.indices().collect();
        let right: Vec<MultiIndex> = rhs.trunc.indices().collect();
        for (ia, alpha) in left.iter().enumerate() {
            let ca = self.coeffs[ia];
            if ca.norm_sqr() == 0.0 {
                continue;
            }
            'pairs: for (ib, beta) in right.iter().enumerate() {
                let cb = rhs.coeffs[ib];
                if cb.norm_sqr() == 0.0 {
                    continue;
                }
                let mut off = 0;
                for j in 0..d {
                    let g = alpha[j] + beta[j];
                    if g > caps[j] {
                        continue 'pairs;
                    }
                    off = off * (caps[j] + 1) + g;
                }
                out.coeffs[off] += ca * cb;
            }
        }
        Ok(out)
    }

    /// Multiplies by the univariate series h(z_var) without changing the
    /// truncation. `h` must supply exact coefficients through caps[var].
    pub(crate) fn mul_univar_in(&self, h: &[Complex64], var: usize) -> PowerSeries {
        assert!(var < self.dim());
        let cap = self.trunc.caps()[var];
        assert!(h.len() > cap, "univariate factor shorter than caps[{var}] + 1");
        let mut out = PowerSeries::zero(self.trunc.clone());
        for (off, alpha) in self.trunc.indices().enumerate() {
            let cv = self.coeffs[off];
            if cv.norm_sqr() == 0.0 {
                continue;
            }
            // Scatter cv·h_k into γ = α + k·e_var. Offsets along one variable
            // move in steps of its stride.
            let stride: usize = self.trunc.caps()[var + 1..].iter().map(|&c| c + 1).product();
            for (k, &hk) in h.iter().take(cap - alpha[var] + 1).enumerate() {
                out.coeffs[off + k * stride] += cv * hk;
            }
        }
        out
    }

    /// Restriction to smaller caps (per variable ≤ current).
    pub fn truncate(&self, trunc: &Truncation) -> Result<PowerSeries, SeriesError> {
        if trunc.dim() != self.dim() {
            return Err(SeriesError::DimMismatch { left: trunc.dim(), right: self.dim() });
        }
        for (j, (&new, &old)) in trunc.caps().iter().zip(self.trunc.caps()).enumerate() {
            if new > old {
                return Err(SeriesError::CapExceeded {
                    index: {
                        let mut ix = vec![0; self.dim()];
                        ix[j] = new;
                        ix
                    },
                    caps: self.trunc.caps().to_vec(),
                });
            }
        }
        let mut out = PowerSeries::zero(trunc.clone());
        for (off, alpha) in out.trunc.indices().enumerate() {
            out.coeffs[off] = self.coeff(&alpha);
        }
        Ok(out)
    }

    /// Horner evaluation at a point of ℂ^d.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.dim(), "evaluation point has wrong dimension");
        fn horner(coeffs: &[Complex64], caps: &[usize], z: &[Complex64]) -> Complex64 {
            if caps.len() == 1 {
                let mut acc = Complex64::new(0.0, 0.0);
                for &c in coeffs.iter().rev() {
                    acc = acc * z[0] + c;
                }
                return acc;
            }
            let block: usize = caps[1..].iter().map(|&c| c + 1).product();
            let mut acc = Complex64::new(0.0, 0.0);
            for chunk in coeffs.chunks(block).rev() {
                acc = acc * z[0] + horner(chunk, &caps[1..], &z[1..]);
            }
            acc
        }
        horner(&self.coeffs, self.trunc.caps(), z)
    }

    /// Largest |c_α| over retained α with α_j = caps_j for some j — a cheap
    /// indicator of how much mass sits at the truncation edge.
    pub fn edge_mass(&self) -> f64 {
        let caps = self.trunc.caps();
        self.trunc
            .indices()
            .enumerate()
            .filter(|(_, alpha)| alpha.iter().zip(caps).any(|(&a, &c)| a == c))
            .map(|(off, _)| self.coeffs[off].norm())
            .fold(0.0, f64::max)
    }
}

/// (1 − w·x)^{−m} = Σ_n C(n+m−1, n) wⁿ xⁿ as a univariate series through
/// degree `cap`, via the overflow-free ratio recurrence
/// c_{n+1} = c_n · w · (n + m)/(n + 1). Requires |w| < 1 (the only regime in
/// which these factors arise) and m ≥ 1.
pub fn neg_binomial_series(w: Complex64, m: u32, cap: usize) -> Result<PowerSeries, SeriesError> {
    if w.norm() >= 1.0 {
        return Err(SeriesError::WeightOutsideDisk { modulus: w.norm() });
    }
    assert!(m >= 1, "exponent m must be positive");
    let mut s = PowerSeries::zero(Truncation::new(vec![cap]));
    s.coeffs_mut().copy_from_slice(&univar::neg_binomial(w, m, cap));
    Ok(s)
}

/// Taylor expansion of an LFT about the origin through degree `cap`.
/// Fails when d = 0 (pole at the origin).
pub fn lft_series(phi: &Lft, cap: usize) -> Result<PowerSeries, SeriesError> {
    let coeffs = univar::lft(phi, cap)?;
    let mut s = PowerSeries::zero(Truncation::new(vec![cap]));
    s.coeffs_mut().copy_from_slice(&coeffs);
    Ok(s)
}

/// k-th power by repeated squaring under the series' own truncation.
pub fn pow(s: &PowerSeries, k: u64) -> PowerSeries {
    let mut acc = PowerSeries::constant(s.trunc().clone(), Complex64::new(1.0, 0.0));
    let mut base = s.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc.mul(&base).expect("same dimension by construction");
        }
        k >>= 1;
        if k > 0 {
            base = base.mul(&base).expect("same dimension by construction");
        }
    }
    acc
}

/// Embeds a univariate series as a function of variable `var` inside a
/// d-variable truncation. The univariate series must reach at least
/// caps[var]; other variables' caps are free.
pub fn lift(s: &PowerSeries, var: usize, trunc: &Truncation) -> Result<PowerSeries, SeriesError> {
    if s.dim() != 1 {
        return Err(SeriesError::DimMismatch { left: s.dim(), right: 1 });
    }
    assert!(var < trunc.dim(), "variable index out of range");
    let need = trunc.caps()[var];
    let have = s.trunc().caps()[0];
    if need > have {
        return Err(SeriesError::CapExceeded { index: vec![need], caps: vec![have] });
    }
    let mut out = PowerSeries::zero(trunc.clone());
    let mut alpha = vec![0usize; trunc.dim()];
    for k in 0..=need {
        alpha[var] = k;
        let off = trunc.offset(&alpha);
        out.coeffs[off] = s.coeffs[k];
    }
    Ok(out)
}

/// Univariate coefficient kernels shared by the symbol and conjugation
/// machinery (plain `Vec<Complex64>`, index = degree).
pub(crate) mod univar {
    use super::*;

    pub fn one(cap: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); cap + 1];
        v[0] = Complex64::new(1.0, 0.0);
        v
    }

    /// Coefficients of (1 − w·x)^{−m}.
    pub fn neg_binomial(w: Complex64, m: u32, cap: usize) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(cap + 1);
        let mut c = Complex64::new(1.0, 0.0);
        v.push(c);
        for n in 0..cap {
            c = c * w * ((n as f64 + m as f64) / (n as f64 + 1.0));
            v.push(c);
        }
        v
    }

    /// Taylor coefficients of (a·x + b)/(c·x + d) about 0; requires d ≠ 0.
    pub fn lft(phi: &Lft, cap: usize) -> Result<Vec<Complex64>, SeriesError> {
        if phi.d.norm() == 0.0 {
            return Err(SeriesError::PoleAtOrigin);
        }
        // 1/(c·x + d) = (1/d)·Σ (−c/d)^k x^k, then multiply by (a·x + b).
        let r = -phi.c / phi.d;
        let mut inv = Vec::with_capacity(cap + 1);
        let mut t = Complex64::new(1.0, 0.0) / phi.d;
        inv.push(t);
        for _ in 0..cap {
            t *= r;
            inv.push(t);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); cap + 1];
        for k in 0..=cap {
            out[k] = phi.b * inv[k];
            if k > 0 {
                out[k] += phi.a * inv[k - 1];
            }
        }
        Ok(out)
    }

    pub fn mul(a: &[Complex64], b: &[Complex64], cap: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); cap + 1];
        for (i, &ai) in a.iter().enumerate().take(cap + 1) {
            if ai.norm_sqr() == 0.0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate().take(cap + 1 - i) {
                out[i + j] += ai * bj;
            }
        }
        out
    }

}
