//! Weighted Bergman spaces 𝓑_ℓ(𝔻^d) of the unit polydisk: closed-form
//! monomial norms, reproducing kernels, coefficient inner products, and an
//! independent quadrature oracle.
//!
//! The norm is ‖ξ‖² = ∫_{𝔻^d} |ξ(z)|² ∏_j (1+ℓ_j)(1−|z_j|²)^{ℓ_j} dA(z_j)
//! with area measure normalized so A(𝔻) = 1. Monomials are orthogonal with
//! ‖z^α‖² = ∏_j α_j!·(ℓ_j+1)!/(α_j+ℓ_j+1)!, and the reproducing kernel is
//! K_z(u) = ∏_j (1 − u_j·conj(z_j))^{−(ℓ_j+2)}.
//!
//! [`quad_inner_product`] evaluates the same integral by a tensor-product
//! rule — Gauss–Legendre in t = r² on [0,1] per variable, uniform trapezoid
//! in angle — and never touches the closed-form norms, so the two routes
//! check each other.

use num_complex::Complex64;
use thiserror::Error;

use crate::series::{MultiIndex, PowerSeries, Truncation};

#[derive(Debug, Error, PartialEq)]
pub enum BergmanError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("coordinate {coord} lies outside the open unit disk (|z| = {modulus})")]
    PointOutsideDomain { coord: usize, modulus: f64 },
    #[error("angular grid under-resolved in variable {var}: need at least {needed} nodes for caps, have {have}")]
    UnderResolvedAngular { var: usize, needed: usize, have: usize },
    #[error("radial grid under-resolved in variable {var}: need at least {needed} nodes for caps, have {have}")]
    UnderResolvedRadial { var: usize, needed: usize, have: usize },
}

/// Weight exponents ℓ = (ℓ_1, …, ℓ_d), nonnegative integers; d = ell.len().
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceParams {
    ell: Vec<usize>,
}

impl SpaceParams {
    pub fn new(ell: Vec<usize>) -> Self {
        assert!(!ell.is_empty(), "the polydisk needs at least one variable");
        SpaceParams { ell }
    }

    pub fn dim(&self) -> usize {
        self.ell.len()
    }

    pub fn ell(&self) -> &[usize] {
        &self.ell
    }

    /// Kernel exponent ℓ_j + 2 of variable j.
    pub fn kernel_exponent(&self, j: usize) -> u32 {
        (self.ell[j] + 2) as u32
    }
}

/// ‖z^α‖² = ∏_j α_j!·(ℓ_j+1)!/(α_j+ℓ_j+1)!, evaluated by the stable ratio
/// product ∏_j ∏_{i=1..α_j} i/(ℓ_j+1+i) — no factorial overflows.
pub fn monomial_norm_sq(alpha: &[usize], sp: &SpaceParams) -> f64 {
    assert_eq!(alpha.len(), sp.dim(), "multi-index dimension mismatch");
    let mut v = 1.0;
    for (j, &a) in alpha.iter().enumerate() {
        let ell = sp.ell[j] as f64;
        for i in 1..=a {
            v *= i as f64 / (ell + 1.0 + i as f64);
        }
    }
    v
}

/// All retained multi-indices in storage order — the basis order used by
/// matrix sections (e_α = z^α/‖z^α‖, α ascending lexicographically).
pub fn basis_enumerate(trunc: &Truncation, sp: &SpaceParams) -> Vec<MultiIndex> {
    assert_eq!(trunc.dim(), sp.dim(), "truncation dimension mismatch");
    trunc.indices().collect()
}

fn check_in_polydisk(z: &[Complex64]) -> Result<(), BergmanError> {
    for (j, &zj) in z.iter().enumerate() {
        let m = zj.norm();
        if m >= 1.0 {
            return Err(BergmanError::PointOutsideDomain { coord: j, modulus: m });
        }
    }
    Ok(())
}

/// K_z(u) = ∏_j (1 − u_j·conj(z_j))^{−(ℓ_j+2)}. Both points must lie in the
/// open polydisk.
pub fn kernel_eval(z: &[Complex64], u: &[Complex64], sp: &SpaceParams) -> Result<Complex64, BergmanError> {
    if z.len() != sp.dim() || u.len() != sp.dim() {
        return Err(BergmanError::DimMismatch { left: z.len().max(u.len()), right: sp.dim() });
    }
    check_in_polydisk(z)?;
    check_in_polydisk(u)?;
    let mut v = Complex64::new(1.0, 0.0);
    for j in 0..sp.dim() {
        let base = Complex64::new(1.0, 0.0) - u[j] * z[j].conj();
        v *= base.powi(-(sp.kernel_exponent(j) as i32));
    }
    Ok(v)
}

/// Taylor coefficients of u ↦ K_z(u): the tensor product of the univariate
/// expansions (1 − conj(z_j)·u_j)^{−(ℓ_j+2)}.
pub fn kernel_coeffs(z: &[Complex64], trunc: &Truncation, sp: &SpaceParams) -> Result<PowerSeries, BergmanError> {
    if z.len() != sp.dim() || trunc.dim() != sp.dim() {
        return Err(BergmanError::DimMismatch { left: z.len().max(trunc.dim()), right: sp.dim() });
    }
    check_in_polydisk(z)?;
    let factors: Vec<Vec<Complex64>> = (0..sp.dim())
        .map(|j| crate::series::univar::neg_binomial(z[j].conj(), sp.kernel_exponent(j), trunc.caps()[j]))
        .collect();
    Ok(PowerSeries::tensor(Complex64::new(1.0, 0.0), &factors))
}

/// ⟨s1, s2⟩ = Σ_α s1_α·conj(s2_α)·‖z^α‖² over the common truncation
/// (conjugate-linear in the second argument).
pub fn inner_product(s1: &PowerSeries, s2: &PowerSeries, sp: &SpaceParams) -> Result<Complex64, BergmanError> {
    if s1.dim() != sp.dim() || s2.dim() != sp.dim() {
        return Err(BergmanError::DimMismatch { left: s1.dim().max(s2.dim()), right: sp.dim() });
    }
    let common = s1.trunc().min(s2.trunc());
    let mut acc = Complex64::new(0.0, 0.0);
    for alpha in common.indices() {
        acc += s1.coeff(&alpha) * s2.coeff(&alpha).conj() * monomial_norm_sq(&alpha, sp);
    }
    Ok(acc)
}

/// Tensor-product quadrature rule: per variable, an n-node Gauss–Legendre
/// rule in t = r² on [0,1] (weights sum to 1) and an m-node uniform angular
/// grid. The Bergman weight (1+ℓ)(1−t)^ℓ stays in the integrand.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    radial_t: Vec<f64>,
    radial_w: Vec<f64>,
    angular_count: usize,
}

impl QuadratureGrid {
    pub fn new(radial_nodes: usize, angular_count: usize) -> Self {
        assert!(radial_nodes >= 1 && angular_count >= 1);
        let (radial_t, radial_w) = gauss_legendre_unit(radial_nodes);
        QuadratureGrid { radial_t, radial_w, angular_count }
    }

    pub fn radial_nodes(&self) -> usize {
        self.radial_t.len()
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    pub fn radial(&self) -> (&[f64], &[f64]) {
        (&self.radial_t, &self.radial_w)
    }
}

/// Gauss–Legendre nodes/weights on [0, 1], by Newton iteration on the
/// three-term Legendre recurrence over [−1, 1] and an affine map. Weights
/// are positive and sum to 1.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    // P_n and P_n' at x via the recurrence.
    fn legendre(n: usize, x: f64) -> (f64, f64) {
        let (mut p0, mut p1) = (1.0, x);
        for j in 2..=n {
            let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    }
    let mut t = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for k in 0..n {
        // Standard initial guess for the k-th root (descending in x).
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        if n == 1 {
            x = 0.0;
        }
        for _ in 0..60 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        t.push(0.5 * (x + 1.0));
        w.push(1.0 / ((1.0 - x * x) * dp * dp)); // = (2/((1−x²)P'²))/2 for [0,1]
    }
    // Ascending nodes read better in reports.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| t[i].partial_cmp(&t[j]).unwrap());
    (order.iter().map(|&i| t[i]).collect(), order.iter().map(|&i| w[i]).collect())
}

/// ⟨s1, s2⟩ by the tensor-product rule, evaluated in its exactly equivalent
/// per-variable factorized form: expanding s1·conj(s2) into monomials
/// z^α·conj(z)^β, the node sum splits into radial-moment × angular-average
/// tables per variable (the grid sum distributes over the finite monomial
/// sum — same finite sum, reorganized). Under-resolved grids are rejected:
/// the angular count must be ≥ 2·cap+1 and the radial count must integrate
/// t^cap·(1−t)^ℓ exactly.
pub fn quad_inner_product(
    s1: &PowerSeries,
    s2: &PowerSeries,
    sp: &SpaceParams,
    grid: &QuadratureGrid,
) -> Result<Complex64, BergmanError> {
    if s1.dim() != sp.dim() || s2.dim() != sp.dim() {
        return Err(BergmanError::DimMismatch { left: s1.dim().max(s2.dim()), right: sp.dim() });
    }
    let common = s1.trunc().min(s2.trunc());
    let caps = common.caps();
    for (j, &cap) in caps.iter().enumerate() {
        let needed_ang = 2 * cap + 1;
        if grid.angular_count < needed_ang {
            return Err(BergmanError::UnderResolvedAngular {
                var: j,
                needed: needed_ang,
                have: grid.angular_count,
            });
        }
        // Gauss–Legendre with n nodes is exact through degree 2n−1; the
        // integrands here are t^a·(1−t)^ℓ with a ≤ cap.
        let needed_rad = (cap + sp.ell[j]) / 2 + 1;
        if grid.radial_nodes() < needed_rad {
            return Err(BergmanError::UnderResolvedRadial {
                var: j,
                needed: needed_rad,
                have: grid.radial_nodes(),
            });
        }
    }

    // Per variable j: radial[s] = Σ_k w_k·(1+ℓ_j)(1−t_k)^{ℓ_j}·(√t_k)^s and
    // angular[δ] = (1/m)·Σ e^{iδθ}, δ = α_j − β_j ∈ [−cap, cap].
    let d = sp.dim();
    let m = grid.angular_count as f64;
    let mut radial: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut angular: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for (j, &cap) in caps.iter().enumerate() {
        let ell = sp.ell[j] as i32;
        let mut rt = vec![0.0; 2 * cap + 1];
        for (&t, &w) in grid.radial_t.iter().zip(&grid.radial_w) {
            let pref = w * (1.0 + ell as f64) * (1.0 - t).powi(ell);
            let root = t.sqrt();
            let mut pw = 1.0;
            for slot in rt.iter_mut() {
                *slot += pref * pw;
                pw *= root;
            }
        }
        radial.push(rt);
        let mut at = vec![Complex64::new(0.0, 0.0); 2 * cap + 1];
        for (delta_plus_cap, slot) in at.iter_mut().enumerate() {
            let delta = delta_plus_cap as i64 - cap as i64;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..grid.angular_count {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / m;
                acc += Complex64::from_polar(1.0, delta as f64 * theta);
            }
            *slot = acc / m;
        }
        angular.push(at);
    }

    let idx: Vec<MultiIndex> = common.indices().collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for alpha in &idx {
        let ca = s1.coeff(alpha);
        if ca.norm_sqr() == 0.0 {
            continue;
        }
        for beta in &idx {
            let cb = s2.coeff(beta);
            if cb.norm_sqr() == 0.0 {
                continue;
            }
            let mut factor = Complex64::new(1.0, 0.0);
            for j in 0..d {
                let r = radial[j][alpha[j] + beta[j]];
                let a = angular[j][(alpha[j] as i64 - beta[j] as i64 + caps[j] as i64) as usize];
                factor *= r * a;
            }
            acc += ca * cb.conj() * factor;
        }
    }
    Ok(acc)
}
