//! The weighted conjugations 𝒞_{p,q} on 𝓑_ℓ(𝔻^d).
//!
//! Each variable carries either a disk reflection ω_{p_j} (parameter
//! 0 < |p_j| < 1) or a rotation z_j ↦ q_j·z_j (|q_j| = 1); ω(z) acts
//! coordinatewise. With the weight
//! ϑ(z) = ∏_{reflection j} (1−|p_j|²)^{1+ℓ_j/2}/(1−conj(p_j)·z_j)^{ℓ_j+2},
//! the conjugation is the antilinear map
//!
//!   (𝒞h)(z) = ϑ(z)·conj(h(conj(ω(z)))).
//!
//! It is involutive and isometric, and sends the reproducing kernel K_z to
//! ϑ(z)·K_{conj(ω(z))} — the scalar is ϑ(z) itself, not its conjugate.
//! Rotations preserve degrees, so rotation-only conjugations act exactly on
//! truncated series; reflections have infinite Taylor expansions and the
//! series-level application is truncation-lossy, which is why [`apply`]
//! reports an a-posteriori tail estimate next to the result.
//!
//! [`apply`]: ConjugationParams::apply

use num_complex::Complex64;
use thiserror::Error;

use crate::bergman::SpaceParams;
use crate::series::{univar, PowerSeries};

#[derive(Debug, Error, PartialEq)]
pub enum ConjugationError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("coordinate {coord} lies outside the open unit disk (|z| = {modulus})")]
    PointOutsideDomain { coord: usize, modulus: f64 },
    #[error("reflection parameter of coordinate {coord} must satisfy 0 < |p| < 1, got |p| = {modulus}")]
    InvalidReflection { coord: usize, modulus: f64 },
    #[error("rotation parameter of coordinate {coord} must be unimodular, got |q| = {modulus}")]
    RotationNotUnimodular { coord: usize, modulus: f64 },
    #[error("invalid index partition: {reason}")]
    BadPartition { reason: String },
}

/// Tolerance on |q| − 1 for rotation parameters.
pub const UNIMODULAR_SLACK: f64 = 1e-12;

/// Per-coordinate action of the conjugation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordConjugation {
    /// ω_{p}(z) = (conj(p)/p)·(p − z)/(1 − conj(p)·z), with 0 < |p| < 1.
    Reflection(Complex64),
    /// z ↦ q·z with |q| = 1.
    Rotation(Complex64),
}

/// A full conjugation 𝒞_{p,q}: one [`CoordConjugation`] per variable plus
/// the space parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugationParams {
    coords: Vec<CoordConjugation>,
    sp: SpaceParams,
}

impl ConjugationParams {
    pub fn new(coords: Vec<CoordConjugation>, sp: SpaceParams) -> Result<Self, ConjugationError> {
        if coords.len() != sp.dim() {
            return Err(ConjugationError::DimMismatch { left: coords.len(), right: sp.dim() });
        }
        for (j, coord) in coords.iter().enumerate() {
            match *coord {
                CoordConjugation::Reflection(p) => {
                    let m = p.norm();
                    if m == 0.0 || m >= 1.0 {
                        return Err(ConjugationError::InvalidReflection { coord: j, modulus: m });
                    }
                }
                CoordConjugation::Rotation(q) => {
                    let m = q.norm();
                    if (m - 1.0).abs() > UNIMODULAR_SLACK {
                        return Err(ConjugationError::RotationNotUnimodular { coord: j, modulus: m });
                    }
                }
            }
        }
        Ok(ConjugationParams { coords, sp })
    }

    /// Builds from an explicit partition: `u1`/`u2` are disjoint 0-based
    /// coordinate sets covering 0..d, paired in order with `p` and `q`.
    pub fn from_partition(
        u1: &[usize],
        u2: &[usize],
        p: &[Complex64],
        q: &[Complex64],
        sp: SpaceParams,
    ) -> Result<Self, ConjugationError> {
        let d = sp.dim();
        if u1.len() + u2.len() != d {
            return Err(ConjugationError::BadPartition {
                reason: format!("|U1| + |U2| = {} but d = {d}", u1.len() + u2.len()),
            });
        }
        if p.len() != u1.len() || q.len() != u2.len() {
            return Err(ConjugationError::BadPartition {
                reason: "parameter lists must pair with their index sets".into(),
            });
        }
        let mut coords: Vec<Option<CoordConjugation>> = vec![None; d];
        for (&j, &pj) in u1.iter().zip(p) {
            if j >= d || coords[j].is_some() {
                return Err(ConjugationError::BadPartition {
                    reason: format!("coordinate {j} repeated or out of range"),
                });
            }
            coords[j] = Some(CoordConjugation::Reflection(pj));
        }
        for (&j, &qj) in u2.iter().zip(q) {
            if j >= d || coords[j].is_some() {
                return Err(ConjugationError::BadPartition {
                    reason: format!("coordinate {j} repeated or out of range"),
                });
            }
            coords[j] = Some(CoordConjugation::Rotation(qj));
        }
        let coords = coords.into_iter().map(|c| c.unwrap()).collect();
        ConjugationParams::new(coords, sp)
    }

    pub fn dim(&self) -> usize {
        self.sp.dim()
    }

    pub fn space(&self) -> &SpaceParams {
        &self.sp
    }

    pub fn coords(&self) -> &[CoordConjugation] {
        &self.coords
    }

    /// 0-based reflection coordinates (U₁), ascending.
    pub fn reflection_indices(&self) -> Vec<usize> {
        self.coords
            .iter()
            .enumerate()
            .filter_map(|(j, c)| matches!(c, CoordConjugation::Reflection(_)).then_some(j))
            .collect()
    }

    /// 0-based rotation coordinates (U₂), ascending.
    pub fn rotation_indices(&self) -> Vec<usize> {
        self.coords
            .iter()
            .enumerate()
            .filter_map(|(j, c)| matches!(c, CoordConjugation::Rotation(_)).then_some(j))
            .collect()
    }

    fn check_point(&self, z: &[Complex64]) -> Result<(), ConjugationError> {
        if z.len() != self.dim() {
            return Err(ConjugationError::DimMismatch { left: z.len(), right: self.dim() });
        }
        for (j, &zj) in z.iter().enumerate() {
            let m = zj.norm();
            if m >= 1.0 {
                return Err(ConjugationError::PointOutsideDomain { coord: j, modulus: m });
            }
        }
        Ok(())
    }

    /// ϑ(z) — the reflection-coordinate weight; 1 when there are no
    /// reflections.
    pub fn theta_weight_eval(&self, z: &[Complex64]) -> Result<Complex64, ConjugationError> {
        self.check_point(z)?;
        let mut v = Complex64::new(1.0, 0.0);
        for (j, coord) in self.coords.iter().enumerate() {
            if let CoordConjugation::Reflection(p) = *coord {
                let ell = self.sp.ell()[j] as f64;
                let num = (1.0 - p.norm_sqr()).powf(1.0 + ell / 2.0);
                let den = (Complex64::new(1.0, 0.0) - p.conj() * z[j]).powi(self.sp.kernel_exponent(j) as i32);
                v *= num / den;
            }
        }
        Ok(v)
    }

    /// ω(z), coordinatewise: the reflection ω_{p_j} or the rotation q_j·z_j.
    pub fn omega_eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>, ConjugationError> {
        self.check_point(z)?;
        let mut out = Vec::with_capacity(self.dim());
        for (j, coord) in self.coords.iter().enumerate() {
            match *coord {
                CoordConjugation::Reflection(p) => {
                    let pc = p.conj();
                    out.push((pc / p) * (p - z[j]) / (Complex64::new(1.0, 0.0) - pc * z[j]));
                }
                CoordConjugation::Rotation(q) => out.push(q * z[j]),
            }
        }
        Ok(out)
    }

    /// The kernel image law 𝒞K_z = ϑ(z)·K_w with w = conj(ω(z)): returns
    /// (ϑ(z), w).
    pub fn kernel_image(&self, z: &[Complex64]) -> Result<(Complex64, Vec<Complex64>), ConjugationError> {
        let scalar = self.theta_weight_eval(z)?;
        let w = self.omega_eval(z)?.iter().map(|v| v.conj()).collect();
        Ok((scalar, w))
    }

    /// Applies 𝒞 to a truncated series:
    /// 𝒞h = ϑ·Σ_α conj(h_α)·∏_j ω_j^{α_j}, all factors expanded through the
    /// caps of `h`. Retained coefficients are exact for the truncated input;
    /// the reported tail estimate gauges what the discarded degrees of the
    /// *input's own conjugate image* contribute (zero only when every
    /// coordinate is a rotation and the input is polynomial).
    pub fn apply(&self, h: &PowerSeries) -> Result<ConjugatedSeries, ConjugationError> {
        if h.dim() != self.dim() {
            return Err(ConjugationError::DimMismatch { left: h.dim(), right: self.dim() });
        }
        let trunc = h.trunc().clone();
        let caps = trunc.caps().to_vec();
        let d = self.dim();

        // Per variable: Taylor coefficients of ω_j^k for k = 0..=caps_j.
        let mut powers: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(d);
        for (j, coord) in self.coords.iter().enumerate() {
            let cap = caps[j];
            let table = match *coord {
                CoordConjugation::Rotation(q) => {
                    // (q·z)^k = q^k z^k — degree-preserving monomials.
                    let mut table = Vec::with_capacity(cap + 1);
                    let mut qk = Complex64::new(1.0, 0.0);
                    for k in 0..=cap {
                        let mut v = vec![Complex64::new(0.0, 0.0); cap + 1];
                        v[k] = qk;
                        table.push(v);
                        qk *= q;
                    }
                    table
                }
                CoordConjugation::Reflection(p) => {
                    let base = univar::lft(
                        &crate::moebius::omega_p(p).expect("validated at construction"),
                        cap,
                    )
                    .expect("omega_p has d = 1 ≠ 0");
                    let mut table = Vec::with_capacity(cap + 1);
                    table.push(univar::one(cap));
                    for k in 1..=cap {
                        table.push(univar::mul(&table[k - 1], &base, cap));
                    }
                    table
                }
            };
            powers.push(table);
        }

        // Σ_α conj(h_α)·(⊗_j ω_j^{α_j}): accumulate the tensor product of the
        // per-variable rows directly into the output grid.
        let mut composed = PowerSeries::zero(trunc.clone());
        let alphas: Vec<Vec<usize>> = trunc.indices().collect();
        for (ia, alpha) in alphas.iter().enumerate() {
            let ha = h.coeffs()[ia].conj();
            if ha.norm_sqr() == 0.0 {
                continue;
            }
            for (io, gamma) in alphas.iter().enumerate() {
                let mut v = ha;
                for j in 0..d {
                    v *= powers[j][alpha[j]][gamma[j]];
                }
                composed.coeffs_mut()[io] += v;
            }
        }

        // Multiply by ϑ: a constant times (1 − conj(p_j)·z_j)^{−(ℓ_j+2)} per
        // reflection variable.
        let mut result = composed;
        let mut prefactor = Complex64::new(1.0, 0.0);
        for (j, coord) in self.coords.iter().enumerate() {
            if let CoordConjugation::Reflection(p) = *coord {
                let ell = self.sp.ell()[j] as f64;
                prefactor *= Complex64::new((1.0 - p.norm_sqr()).powf(1.0 + ell / 2.0), 0.0);
                let nb = univar::neg_binomial(p.conj(), self.sp.kernel_exponent(j), caps[j]);
                result = result.mul_univar_in(&nb, j);
            }
        }
        let series = result.scale(prefactor);
        let tail_estimate = tail_estimate(&series);
        Ok(ConjugatedSeries { series, tail_estimate })
    }
}

/// Result of applying a conjugation at a fixed truncation.
#[derive(Debug, Clone)]
pub struct ConjugatedSeries {
    pub series: PowerSeries,
    /// Heuristic a-posteriori bound on the coefficient mass beyond the caps,
    /// from geometric extrapolation of the last two total-degree shells.
    /// Conservative: can be nonzero even when the truncation is exact.
    pub tail_estimate: f64,
}

/// Geometric extrapolation of the ℓ¹ coefficient mass beyond the caps: with
/// shell masses s_k = Σ_{|α| = k} |c_α| at the two largest total degrees,
/// estimates s_top·r/(1−r) for r = s_top/s_prev (∞ if the shells grow).
fn tail_estimate(s: &PowerSeries) -> f64 {
    let caps = s.trunc().caps();
    let top_degree: usize = caps.iter().sum();
    if top_degree < 2 {
        return s.edge_mass();
    }
    let mut s_top = 0.0;
    let mut s_prev = 0.0;
    for (off, alpha) in s.trunc().indices().enumerate() {
        let total: usize = alpha.iter().sum();
        if total == top_degree {
            s_top += s.coeffs()[off].norm();
        } else if total == top_degree - 1 {
            s_prev += s.coeffs()[off].norm();
        }
    }
    if s_top == 0.0 {
        0.0
    } else if s_top < s_prev {
        let r = s_top / s_prev;
        s_top * r / (1.0 - r)
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::{inner_product, kernel_coeffs, kernel_eval};
    use crate::series::Truncation;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mixed_2d() -> ConjugationParams {
        // |p| = 0.36: reflection tails decay like |p|^k·poly(k), so caps in
        // the 40s push truncation effects below 1e-12.
        ConjugationParams::new(
            vec![
                CoordConjugation::Reflection(c(0.3, -0.2)),
                CoordConjugation::Rotation(Complex64::from_polar(1.0, 0.7)),
            ],
            SpaceParams::new(vec![1, 2]),
        )
        .unwrap()
    }

    fn random_poly(trunc: &Truncation, seed: u64) -> PowerSeries {
        // Tiny deterministic LCG – enough for coefficient fuzz here.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let mut h = PowerSeries::zero(trunc.clone());
        for slot in h.coeffs_mut() {
            *slot = c(next(), next());
        }
        h
    }

    #[test]
    fn parameter_validation() {
        let sp = SpaceParams::new(vec![0]);
        assert!(matches!(
            ConjugationParams::new(vec![CoordConjugation::Reflection(c(0.0, 0.0))], sp.clone()),
            Err(ConjugationError::InvalidReflection { coord: 0, .. })
        ));
        assert!(matches!(
            ConjugationParams::new(vec![CoordConjugation::Rotation(c(0.9, 0.0))], sp.clone()),
            Err(ConjugationError::RotationNotUnimodular { coord: 0, .. })
        ));
        assert!(matches!(
            ConjugationParams::from_partition(&[0], &[0], &[c(0.3, 0.0)], &[c(1.0, 0.0)], sp),
            Err(ConjugationError::BadPartition { .. })
        ));
    }

    #[test]
    fn omega_is_an_antiholomorphic_involution_pointwise() {
        let cp = mixed_2d();
        let z = [c(0.3, -0.4), c(-0.2, 0.35)];
        let w = cp.omega_eval(&z).unwrap();
        let wc: Vec<Complex64> = w.iter().map(|v| v.conj()).collect();
        let back = cp.omega_eval(&wc).unwrap();
        for j in 0..2 {
            assert!((back[j].conj() - z[j]).norm() < 1e-14, "coordinate {j}");
        }
    }

    #[test]
    fn theta_weight_cocycle_identity() {
        // ϑ(z)·conj(ϑ(conj(ω(z)))) = 1.
        let cp = mixed_2d();
        let z = [c(0.5, 0.1), c(0.3, -0.6)];
        let th = cp.theta_weight_eval(&z).unwrap();
        let wz: Vec<Complex64> = cp.omega_eval(&z).unwrap().iter().map(|v| v.conj()).collect();
        let th_back = cp.theta_weight_eval(&wz).unwrap();
        assert!((th * th_back.conj() - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn apply_matches_pointwise_definition() {
        let cp = mixed_2d();
        let trunc = Truncation::new(vec![24, 6]);
        let mut h = PowerSeries::zero(trunc.clone());
        // A sparse polynomial of low degree so the truncation tail is tiny.
        for (alpha, v) in [(vec![0usize, 0], c(0.7, -0.2)), (vec![2, 1], c(-0.4, 0.9)), (vec![3, 2], c(0.15, 0.3))] {
            let off = trunc.offset(&alpha);
            h.coeffs_mut()[off] = v;
        }
        let image = cp.apply(&h).unwrap();
        for z in [[c(0.2, 0.1), c(-0.3, 0.15)], [c(-0.35, 0.3), c(0.1, -0.4)]] {
            let direct = cp.theta_weight_eval(&z).unwrap()
                * h.eval(&cp.omega_eval(&z).unwrap().iter().map(|v| v.conj()).collect::<Vec<_>>())
                    .conj();
            let via_series = image.series.eval(&z);
            assert!((direct - via_series).norm() < 1e-10, "z = {z:?}");
        }
    }

    #[test]
    fn kernel_image_law_matches_applied_kernel_coefficients() {
        let cp = mixed_2d();
        let sp = cp.space().clone();
        let z = [c(0.35, 0.2), c(-0.25, 0.4)];
        // Both variables need generous caps: the reflection variable for its
        // |p|^k tail, the rotation variable because the kernel itself has an
        // infinite expansion that the final pointwise check evaluates.
        let trunc = Truncation::new(vec![40, 26]);
        let kz = kernel_coeffs(&z, &trunc, &sp).unwrap();
        let image = cp.apply(&kz).unwrap();
        let (scalar, w) = cp.kernel_image(&z).unwrap();
        let kw = kernel_coeffs(&w, &trunc, &sp).unwrap().scale(scalar);
        // Compare away from the truncation edge, where the applied image is
        // still accurate.
        let inner = Truncation::new(vec![12, 6]);
        for alpha in inner.indices() {
            let diff = (image.series.coeff(&alpha) - kw.coeff(&alpha)).norm();
            assert!(diff < 1e-10, "alpha = {alpha:?}, diff = {diff}");
        }
        // And pointwise: 𝒞K_z evaluated at u equals ϑ(z)·K_w(u).
        let u = [c(0.15, -0.3), c(0.3, 0.25)];
        let direct = scalar * kernel_eval(&w, &u, &sp).unwrap();
        assert!((image.series.eval(&u) - direct).norm() < 1e-8);
    }

    #[test]
    fn rotation_only_conjugation_is_exact_and_involutive() {
        let sp = SpaceParams::new(vec![0, 1]);
        let cp = ConjugationParams::new(
            vec![
                CoordConjugation::Rotation(Complex64::from_polar(1.0, 1.1)),
                CoordConjugation::Rotation(Complex64::from_polar(1.0, -0.4)),
            ],
            sp,
        )
        .unwrap();
        let trunc = Truncation::new(vec![5, 4]);
        let h = random_poly(&trunc, 7);
        let twice = cp.apply(&cp.apply(&h).unwrap().series).unwrap();
        for (off, alpha) in trunc.indices().enumerate() {
            assert!(
                (twice.series.coeffs()[off] - h.coeff(&alpha)).norm() < 1e-14,
                "alpha = {alpha:?}"
            );
        }
    }

    #[test]
    fn involution_and_isometry_with_reflections() {
        let cp = mixed_2d();
        let sp = cp.space().clone();
        // Polynomial degrees ≤ (6, 4); reflection-variable caps far beyond
        // twice the degree so the |p|^k tails drop under the tolerances.
        let deg = Truncation::new(vec![6, 4]);
        let trunc = Truncation::new(vec![44, 10]);
        let mut h1 = PowerSeries::zero(trunc.clone());
        let mut h2 = PowerSeries::zero(trunc.clone());
        let p1 = random_poly(&deg, 11);
        let p2 = random_poly(&deg, 23);
        for alpha in deg.indices() {
            let off = trunc.offset(&alpha);
            h1.coeffs_mut()[off] = p1.coeff(&alpha);
            h2.coeffs_mut()[off] = p2.coeff(&alpha);
        }
        let c1 = cp.apply(&h1).unwrap();
        let c2 = cp.apply(&h2).unwrap();
        // ⟨𝒞h₁, 𝒞h₂⟩ = ⟨h₂, h₁⟩.
        let lhs = inner_product(&c1.series, &c2.series, &sp).unwrap();
        let rhs = inner_product(&h2, &h1, &sp).unwrap();
        assert!((lhs - rhs).norm() < 1e-10, "lhs = {lhs}, rhs = {rhs}");
        // 𝒞𝒞h = h on the low-degree coefficients.
        let back = cp.apply(&c1.series).unwrap();
        for alpha in deg.indices() {
            let diff = (back.series.coeff(&alpha) - h1.coeff(&alpha)).norm();
            assert!(diff < 1e-11, "alpha = {alpha:?}, diff = {diff}");
        }
    }

    #[test]
    fn antilinearity_is_exact() {
        let cp = mixed_2d();
        let trunc = Truncation::new(vec![8, 6]);
        let h1 = random_poly(&trunc, 3);
        let h2 = random_poly(&trunc, 5);
        let (a, b) = (c(0.3, -0.8), c(-1.1, 0.25));
        let combo = h1.scale(a).add(&h2.scale(b)).unwrap();
        let lhs = cp.apply(&combo).unwrap().series;
        let rhs = cp
            .apply(&h1)
            .unwrap()
            .series
            .scale(a.conj())
            .add(&cp.apply(&h2).unwrap().series.scale(b.conj()))
            .unwrap();
        for (off, alpha) in trunc.indices().enumerate() {
            assert!((lhs.coeffs()[off] - rhs.coeff(&alpha)).norm() < 1e-12, "alpha = {alpha:?}");
        }
    }

    #[test]
    fn tail_estimate_small_for_generous_caps() {
        let cp = mixed_2d();
        let trunc = Truncation::new(vec![26, 8]);
        let mut h = PowerSeries::zero(trunc.clone());
        h.coeffs_mut()[trunc.offset(&[1, 1])] = c(0.9, -0.1);
        let image = cp.apply(&h).unwrap();
        assert!(image.tail_estimate < 1e-8, "tail = {}", image.tail_estimate);
    }
}
