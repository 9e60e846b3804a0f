//! Linear-fractional transformations (LFTs) of the complex plane and the
//! exact criterion for an LFT to map the open unit disk into itself.
//!
//! An LFT is φ(x) = (a·x + b)/(c·x + d) with ad − bc ≠ 0. Coordinate maps of
//! composition symbols are either such maps or constants; the [`DiskMap`]
//! enum covers both, since the constant case has a vanishing determinant and
//! is not expressible as a valid `Lft`.

use num_complex::Complex64;
use thiserror::Error;

/// Tolerance below which a self-map margin still counts as a self-map
/// (boundary-touching maps are admitted up to roundoff).
pub const SELF_MAP_SLACK: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MoebiusError {
    #[error("degenerate coefficients: ad - bc = 0")]
    Degenerate,
    #[error("evaluation at a pole: c·x + d = 0 at x = {at}")]
    PoleHit { at: Complex64 },
    #[error("reflection point must satisfy 0 < |p| < 1, got |p| = {modulus}")]
    InvalidReflectionPoint { modulus: f64 },
}

/// φ(x) = (a·x + b)/(c·x + d), stored by its four coefficients.
///
/// The coefficients are only defined up to a common nonzero scalar;
/// [`Lft::projectively_eq`] compares modulo that scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lft {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Lft {
    /// Builds an LFT, rejecting degenerate coefficient quadruples.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self, MoebiusError> {
        let phi = Lft { a, b, c, d };
        if phi.det().norm() == 0.0 {
            return Err(MoebiusError::Degenerate);
        }
        Ok(phi)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn eval(&self, x: Complex64) -> Result<Complex64, MoebiusError> {
        let den = self.c * x + self.d;
        if den.norm() == 0.0 {
            return Err(MoebiusError::PoleHit { at: x });
        }
        Ok((self.a * x + self.b) / den)
    }

    /// φ'(x) = (ad − bc)/(c·x + d)².
    pub fn derivative_at(&self, x: Complex64) -> Result<Complex64, MoebiusError> {
        let den = self.c * x + self.d;
        if den.norm() == 0.0 {
            return Err(MoebiusError::PoleHit { at: x });
        }
        Ok(self.det() / (den * den))
    }

    /// (self ∘ other)(x) = self(other(x)), via the 2×2 coefficient-matrix product.
    pub fn compose(&self, other: &Lft) -> Lft {
        Lft {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// The inverse map, as the adjugate coefficient matrix (projective scale
    /// is irrelevant).
    pub fn inverse(&self) -> Lft {
        Lft { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Exact disk-self-map criterion:
    /// |b·conj(d) − a·conj(c)| + |ad − bc| ≤ |d|² − |c|².
    ///
    /// The margin is the right side minus the left side; the map sends 𝔻 into
    /// 𝔻 (up to boundary touching) iff the margin is ≥ 0, and the check
    /// admits margins down to −[`SELF_MAP_SLACK`] to absorb roundoff.
    pub fn self_map_check(&self) -> SelfMapCheck {
        let lhs = (self.b * self.d.conj() - self.a * self.c.conj()).norm() + self.det().norm();
        let rhs = self.d.norm_sqr() - self.c.norm_sqr();
        let margin = rhs - lhs;
        SelfMapCheck { margin, holds: margin >= -SELF_MAP_SLACK }
    }

    /// Scaled deviation from coefficient proportionality: the largest 2×2
    /// minor of the two coefficient 4-vectors divided by the product of
    /// their largest moduli. Zero iff the maps agree as transformations.
    pub fn projective_gap(&self, other: &Lft) -> f64 {
        let v = [self.a, self.b, self.c, self.d];
        let w = [other.a, other.b, other.c, other.d];
        let sv = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let sw = w.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let scale = (sv * sw).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in (i + 1)..4 {
                worst = worst.max((v[i] * w[j] - v[j] * w[i]).norm() / scale);
            }
        }
        worst
    }

    /// Coefficient-proportionality test: true iff the two coefficient
    /// 4-vectors are parallel within `tol` (rank-one test on all 2×2 minors,
    /// scaled by the largest coefficient moduli).
    pub fn projectively_eq(&self, other: &Lft, tol: f64) -> bool {
        self.projective_gap(other) <= tol
    }
}

/// Result of the disk-self-map criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfMapCheck {
    /// (|d|² − |c|²) − (|b·conj(d) − a·conj(c)| + |ad − bc|); positive means
    /// strictly inside the criterion.
    pub margin: f64,
    /// `margin >= -SELF_MAP_SLACK`.
    pub holds: bool,
}

/// The disk reflection ω_p(z) = (conj(p)/p)·(p − z)/(1 − conj(p)·z) for
/// 0 < |p| < 1, as an LFT with coefficients (−p̄/p, p̄, −p̄, 1).
///
/// ω_p(0) = p̄ and ω_p(p) = 0. The composition square ω_p∘ω_p is the identity
/// only for real p; the identity that holds for every p — and the one the
/// conjugation machinery relies on — is the antilinear one,
/// conj(ω_p(conj(ω_p(z)))) = z.
pub fn omega_p(p: Complex64) -> Result<Lft, MoebiusError> {
    let modulus = p.norm();
    if modulus == 0.0 || modulus >= 1.0 {
        return Err(MoebiusError::InvalidReflectionPoint { modulus });
    }
    let pc = p.conj();
    Ok(Lft { a: -pc / p, b: pc, c: -pc, d: Complex64::new(1.0, 0.0) })
}

/// A holomorphic coordinate map of the disk: either a constant value in 𝔻,
/// or a nondegenerate LFT. Normal-form branches with a vanishing linear part
/// (b = 0, β = 0, E = 0) produce genuine constants, which no valid `Lft`
/// can represent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiskMap {
    Constant(Complex64),
    Mobius(Lft),
}

impl DiskMap {
    /// Interprets raw LFT coefficients, degrading gracefully to a constant:
    /// a degenerate quadruple with a = c = 0, d ≠ 0 denotes the constant b/d;
    /// any other degenerate quadruple is rejected.
    pub fn from_lft_coeffs(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, MoebiusError> {
        if (a * d - b * c).norm() == 0.0 {
            if a.norm() == 0.0 && c.norm() == 0.0 && d.norm() != 0.0 {
                return Ok(DiskMap::Constant(b / d));
            }
            return Err(MoebiusError::Degenerate);
        }
        Ok(DiskMap::Mobius(Lft { a, b, c, d }))
    }

    pub fn eval(&self, x: Complex64) -> Result<Complex64, MoebiusError> {
        match self {
            DiskMap::Constant(v) => Ok(*v),
            DiskMap::Mobius(phi) => phi.eval(x),
        }
    }

    pub fn derivative_at(&self, x: Complex64) -> Result<Complex64, MoebiusError> {
        match self {
            DiskMap::Constant(_) => Ok(Complex64::new(0.0, 0.0)),
            DiskMap::Mobius(phi) => phi.derivative_at(x),
        }
    }

    /// Self-map criterion; for a constant v the margin is 1 − |v|.
    pub fn self_map_check(&self) -> SelfMapCheck {
        match self {
            DiskMap::Constant(v) => {
                let margin = 1.0 - v.norm();
                SelfMapCheck { margin, holds: margin >= -SELF_MAP_SLACK }
            }
            DiskMap::Mobius(phi) => phi.self_map_check(),
        }
    }

    pub fn as_lft(&self) -> Option<&Lft> {
        match self {
            DiskMap::Constant(_) => None,
            DiskMap::Mobius(phi) => Some(phi),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_and_derivative_match_finite_differences() {
        let phi = Lft::new(c(0.3, 0.1), c(0.2, -0.4), c(-0.1, 0.2), c(1.0, 0.0)).unwrap();
        let x = c(0.35, -0.2);
        let h = 1e-6;
        let fd = (phi.eval(x + c(h, 0.0)).unwrap() - phi.eval(x - c(h, 0.0)).unwrap()) / (2.0 * h);
        assert!((phi.derivative_at(x).unwrap() - fd).norm() < 1e-8);
    }

    #[test]
    fn compose_then_inverse_is_projectively_identity() {
        let phi = Lft::new(c(0.6, 0.2), c(0.1, 0.0), c(0.2, -0.1), c(1.0, 0.0)).unwrap();
        let id = phi.compose(&phi.inverse());
        let identity = Lft { a: c(1.0, 0.0), b: c(0.0, 0.0), c: c(0.0, 0.0), d: c(1.0, 0.0) };
        assert!(id.projectively_eq(&identity, 1e-10));
    }

    #[test]
    fn degenerate_coefficients_rejected() {
        assert_eq!(
            Lft::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)),
            Err(MoebiusError::Degenerate)
        );
    }

    #[test]
    fn pole_evaluation_rejected() {
        let phi = Lft::new(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(-0.5, 0.0)).unwrap();
        assert!(matches!(phi.eval(c(0.5, 0.0)), Err(MoebiusError::PoleHit { .. })));
    }

    #[test]
    fn omega_p_sends_zero_to_p_conjugate_and_p_to_zero() {
        let p = c(0.4, 0.3);
        let w = omega_p(p).unwrap();
        assert!((w.eval(c(0.0, 0.0)).unwrap() - p.conj()).norm() < 1e-15);
        assert!(w.eval(p).unwrap().norm() < 1e-15);
    }

    #[test]
    fn omega_p_antilinear_involution_for_complex_p() {
        let p = c(0.35, -0.5);
        let w = omega_p(p).unwrap();
        for z in [c(0.0, 0.0), c(0.3, 0.6), c(-0.7, 0.1), c(0.05, -0.85)] {
            let back = w.eval(w.eval(z).unwrap().conj()).unwrap().conj();
            assert!((back - z).norm() < 1e-13, "z = {z}, round trip = {back}");
        }
    }

    #[test]
    fn omega_p_composition_square_is_identity_only_for_real_p() {
        let identity = Lft { a: c(1.0, 0.0), b: c(0.0, 0.0), c: c(0.0, 0.0), d: c(1.0, 0.0) };
        let real = omega_p(c(0.5, 0.0)).unwrap();
        assert!(real.compose(&real).projectively_eq(&identity, 1e-12));
        // Witness that the plain composition square fails off the real axis:
        // for p = 0.5i, ω_p(ω_p(0)) = −0.8i.
        let imag = omega_p(c(0.0, 0.5)).unwrap();
        assert!(!imag.compose(&imag).projectively_eq(&identity, 1e-6));
        let twice = imag.eval(imag.eval(c(0.0, 0.0)).unwrap()).unwrap();
        assert!((twice - c(0.0, -0.8)).norm() < 1e-15);
    }

    #[test]
    fn omega_p_rejects_zero_and_boundary_points() {
        assert!(matches!(omega_p(c(0.0, 0.0)), Err(MoebiusError::InvalidReflectionPoint { .. })));
        assert!(matches!(omega_p(c(1.0, 0.0)), Err(MoebiusError::InvalidReflectionPoint { .. })));
    }

    #[test]
    fn self_map_margins_on_known_maps() {
        // g(z) = 2z is not a self-map: margin = 1 − 2 = −1.
        let double = Lft::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let chk = double.self_map_check();
        assert!(!chk.holds);
        assert!((chk.margin - (-1.0)).abs() < 1e-15);

        // A rotation touches the boundary: margin exactly 0.
        let rot = Lft::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let chk = rot.self_map_check();
        assert!(chk.holds);
        assert!(chk.margin.abs() < 1e-15);

        // Disk reflections are self-maps touching the boundary.
        let w = omega_p(c(0.3, 0.4)).unwrap();
        let chk = w.self_map_check();
        assert!(chk.holds, "omega_p margin = {}", chk.margin);
        assert!(chk.margin.abs() < 1e-12);
    }

    #[test]
    fn constant_disk_map_from_degenerate_coefficients() {
        let m = DiskMap::from_lft_coeffs(c(0.0, 0.0), c(0.3, 0.4), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(m, DiskMap::Constant(c(0.3, 0.4)));
        assert_eq!(m.derivative_at(c(0.2, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(m.self_map_check().holds);
        // Degenerate but not constant-shaped: rejected.
        assert!(DiskMap::from_lft_coeffs(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)).is_err());
    }
}
