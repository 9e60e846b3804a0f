//! Symbol pairs (f, g) for weighted composition operators W_{f,g}h = f·(h∘g)
//! on 𝓑_ℓ(𝔻^d), and the structured families whose members are certified
//! real symmetric, unitary, or 𝒞_{p,q}-symmetric.
//!
//! A weight symbol is kept in factored form f(z) = c·∏_i (1 − w_i·z_{v_i})^{−m_i}
//! — every family of interest has this shape (constants times kernel
//! sections). A map symbol acts coordinatewise: g_κ(z) = φ_κ(z_{v(κ)}) with
//! φ_κ a disk constant or a Möbius map; v need not be injective in general,
//! though each structured family constrains it.

use num_complex::Complex64;
use thiserror::Error;

use crate::bergman::SpaceParams;
use crate::conjugation::{ConjugationParams, CoordConjugation};
use crate::moebius::{DiskMap, Lft};
use crate::series::{univar, PowerSeries, Truncation};

/// Slack admitted on the boundary of closed feasibility conditions.
pub const CONDITION_SLACK: f64 = 1e-12;

/// Absolute tolerance for the complex compatibility equation of the
/// reflection-coordinate family.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum SymbolError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("variable index {var} out of range for d = {dim}")]
    VarOutOfRange { var: usize, dim: usize },
    #[error("kernel factor exponent must be positive")]
    ZeroExponent,
    #[error("coordinate {coord} violates {condition}: residual {residual:.3e}")]
    ConditionViolated { condition: &'static str, coord: usize, residual: f64 },
    #[error("scalar violates {condition}: residual {residual:.3e}")]
    ScalarConditionViolated { condition: &'static str, residual: f64 },
    #[error("index map is not a permutation: {detail}")]
    NotAPermutation { detail: String },
    #[error("coordinate {coord} pairs a {expected} conjugation with {got} parameters")]
    BranchMismatch { coord: usize, expected: &'static str, got: &'static str },
    #[error("point lies outside the open polydisk at coordinate {coord} (|z| = {modulus})")]
    PointOutsideDomain { coord: usize, modulus: f64 },
    #[error(transparent)]
    Moebius(#[from] crate::moebius::MoebiusError),
}

/// One factor (1 − w·z_var)^{−m} of a weight symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelFactor {
    pub w: Complex64,
    pub m: u32,
    pub var: usize,
}

/// f(z) = c·∏ factors.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSymbol {
    pub c: Complex64,
    pub factors: Vec<KernelFactor>,
}

impl WeightSymbol {
    pub fn constant(c: Complex64) -> Self {
        WeightSymbol { c, factors: Vec::new() }
    }

    /// Canonical factor list: factors with |w| ≤ tol are dropped (they are
    /// identically 1), factors sharing a variable and the same base point
    /// within tol are merged by adding exponents, and the result is sorted
    /// by (var, re w, im w). Two weight symbols represent the same function
    /// iff their canonical forms agree entrywise.
    pub fn canonical(&self, tol: f64) -> (Complex64, Vec<KernelFactor>) {
        let mut kept: Vec<KernelFactor> =
            self.factors.iter().copied().filter(|f| f.w.norm() > tol).collect();
        kept.sort_by(|x, y| {
            (x.var, x.w.re, x.w.im)
                .partial_cmp(&(y.var, y.w.re, y.w.im))
                .expect("factor parameters are finite")
        });
        let mut merged: Vec<KernelFactor> = Vec::with_capacity(kept.len());
        for f in kept {
            match merged.last_mut() {
                Some(last) if last.var == f.var && (last.w - f.w).norm() <= tol => last.m += f.m,
                _ => merged.push(f),
            }
        }
        (self.c, merged)
    }

    /// Entrywise comparison of canonical forms within `tol` (scale-relative
    /// on the scalar).
    pub fn same_function(&self, other: &WeightSymbol, tol: f64) -> bool {
        let (c1, f1) = self.canonical(tol);
        let (c2, f2) = other.canonical(tol);
        if (c1 - c2).norm() > tol * c1.norm().max(c2.norm()).max(1.0) || f1.len() != f2.len() {
            return false;
        }
        f1.iter()
            .zip(&f2)
            .all(|(a, b)| a.var == b.var && a.m == b.m && (a.w - b.w).norm() <= tol)
    }
}

/// Coordinate κ of g reads input variable `var` through `map`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapCoordinate {
    pub var: usize,
    pub map: DiskMap,
}

/// g(z) = (φ_1(z_{v(1)}), …, φ_d(z_{v(d)})).
#[derive(Debug, Clone, PartialEq)]
pub struct MapSymbol {
    coords: Vec<MapCoordinate>,
}

impl MapSymbol {
    pub fn new(coords: Vec<MapCoordinate>) -> Self {
        MapSymbol { coords }
    }

    pub fn coords(&self) -> &[MapCoordinate] {
        &self.coords
    }
}

/// A full operator symbol: weight, map, and the space they act on.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPair {
    f: WeightSymbol,
    g: MapSymbol,
    sp: SpaceParams,
}

/// Structural margins collected by [`SymbolPair::validate`]. `is_valid`
/// means the weight factors stay analytic on the polydisk and every
/// coordinate map sends 𝔻 into 𝔻 (up to boundary slack).
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDiagnostics {
    /// max_i |w_i| over weight factors (0 if none); must be < 1.
    pub worst_factor_modulus: f64,
    pub factor_weights_in_disk: bool,
    /// Self-map margin per coordinate of g.
    pub self_map_margins: Vec<f64>,
    pub min_self_map_margin: f64,
    pub all_self_maps: bool,
}

impl SymbolDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.factor_weights_in_disk && self.all_self_maps
    }
}

impl SymbolPair {
    /// Structural assembly: dimensions and index ranges only. Analytic
    /// requirements (factor base points inside 𝔻, coordinate maps sending
    /// 𝔻 into 𝔻) are reported by [`validate`](Self::validate), not enforced
    /// here — classification needs to *run* on violating symbols.
    pub fn new(f: WeightSymbol, g: MapSymbol, sp: SpaceParams) -> Result<Self, SymbolError> {
        let d = sp.dim();
        if g.coords.len() != d {
            return Err(SymbolError::DimMismatch { left: g.coords.len(), right: d });
        }
        for factor in &f.factors {
            if factor.var >= d {
                return Err(SymbolError::VarOutOfRange { var: factor.var, dim: d });
            }
            if factor.m == 0 {
                return Err(SymbolError::ZeroExponent);
            }
        }
        for coord in &g.coords {
            if coord.var >= d {
                return Err(SymbolError::VarOutOfRange { var: coord.var, dim: d });
            }
        }
        Ok(SymbolPair { f, g, sp })
    }

    pub fn f(&self) -> &WeightSymbol {
        &self.f
    }

    pub fn g(&self) -> &MapSymbol {
        &self.g
    }

    pub fn space(&self) -> &SpaceParams {
        &self.sp
    }

    pub fn dim(&self) -> usize {
        self.sp.dim()
    }

    pub fn validate(&self) -> SymbolDiagnostics {
        let worst = self.f.factors.iter().map(|f| f.w.norm()).fold(0.0, f64::max);
        let margins: Vec<f64> =
            self.g.coords.iter().map(|c| c.map.self_map_check().margin).collect();
        let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
        SymbolDiagnostics {
            worst_factor_modulus: worst,
            factor_weights_in_disk: worst < 1.0,
            all_self_maps: margins.iter().all(|&m| m >= -crate::moebius::SELF_MAP_SLACK),
            min_self_map_margin: min_margin,
            self_map_margins: margins,
        }
    }

    fn check_point(&self, z: &[Complex64]) -> Result<(), SymbolError> {
        if z.len() != self.dim() {
            return Err(SymbolError::DimMismatch { left: z.len(), right: self.dim() });
        }
        for (j, &zj) in z.iter().enumerate() {
            let m = zj.norm();
            if m >= 1.0 {
                return Err(SymbolError::PointOutsideDomain { coord: j, modulus: m });
            }
        }
        Ok(())
    }

    /// f(z) for z in the open polydisk.
    pub fn eval_f(&self, z: &[Complex64]) -> Result<Complex64, SymbolError> {
        self.check_point(z)?;
        let mut v = self.f.c;
        for factor in &self.f.factors {
            let base = Complex64::new(1.0, 0.0) - factor.w * z[factor.var];
            v *= base.powi(-(factor.m as i32));
        }
        Ok(v)
    }

    /// g(z) for z in the open polydisk. The image is *not* required to lie
    /// in the polydisk — callers that need that must check it.
    pub fn eval_g(&self, z: &[Complex64]) -> Result<Vec<Complex64>, SymbolError> {
        self.check_point(z)?;
        let mut out = Vec::with_capacity(self.dim());
        for coord in &self.g.coords {
            out.push(coord.map.eval(z[coord.var])?);
        }
        Ok(out)
    }

    /// Taylor coefficients of f through `trunc` (exact: every factor has an
    /// exact univariate expansion).
    pub fn weight_series(&self, trunc: &Truncation) -> PowerSeries {
        assert_eq!(trunc.dim(), self.dim(), "truncation dimension mismatch");
        let per_var = self.weight_univar_factors(trunc);
        PowerSeries::tensor(self.f.c, &per_var)
    }

    /// Per-variable univariate factor products of f (without the scalar c).
    fn weight_univar_factors(&self, trunc: &Truncation) -> Vec<Vec<Complex64>> {
        let caps = trunc.caps();
        let mut per_var: Vec<Vec<Complex64>> = caps.iter().map(|&c| univar::one(c)).collect();
        for factor in &self.f.factors {
            let cap = caps[factor.var];
            let nb = univar::neg_binomial(factor.w, factor.m, cap);
            per_var[factor.var] = univar::mul(&per_var[factor.var], &nb, cap);
        }
        per_var
    }

    /// Taylor coefficients of W_{f,g} z^α = f·∏_κ φ_κ(z_{v(κ)})^{α_κ}
    /// through `trunc`, exact for validated symbols. For repeated columns
    /// use [`SectionSeriesBuilder`], which shares the power tables.
    pub fn composed_monomial_series(&self, alpha: &[usize], trunc: &Truncation) -> PowerSeries {
        SectionSeriesBuilder::new(self, trunc).column(alpha)
    }
}

/// Shared expansion machinery for the columns of a matrix section: for each
/// coordinate κ, the Taylor coefficients of φ_κ^k (k ≤ caps_κ) in its input
/// variable, plus the per-variable factors of f. A column α is then a
/// product of univariate series per variable, tensored together — no
/// full-dimensional multiplications.
pub struct SectionSeriesBuilder<'a> {
    sym: &'a SymbolPair,
    trunc: Truncation,
    f_per_var: Vec<Vec<Complex64>>,
    /// powers[κ][k] = coefficients of φ_κ^k in variable v(κ), length
    /// caps[v(κ)]+1.
    powers: Vec<Vec<Vec<Complex64>>>,
}

impl<'a> SectionSeriesBuilder<'a> {
    pub fn new(sym: &'a SymbolPair, trunc: &Truncation) -> Self {
        assert_eq!(trunc.dim(), sym.dim(), "truncation dimension mismatch");
        let caps = trunc.caps();
        let f_per_var = sym.weight_univar_factors(trunc);
        let mut powers = Vec::with_capacity(sym.dim());
        for (kappa, coord) in sym.g.coords().iter().enumerate() {
            let cap_in = caps[coord.var];
            let base = match coord.map {
                DiskMap::Constant(v) => {
                    let mut s = vec![Complex64::new(0.0, 0.0); cap_in + 1];
                    s[0] = v;
                    s
                }
                DiskMap::Mobius(ref phi) => {
                    univar::lft(phi, cap_in).expect("self-maps have d ≠ 0")
                }
            };
            let mut table = Vec::with_capacity(caps[kappa] + 1);
            table.push(univar::one(cap_in));
            for k in 1..=caps[kappa] {
                table.push(univar::mul(&table[k - 1], &base, cap_in));
            }
            powers.push(table);
        }
        SectionSeriesBuilder { sym, trunc: trunc.clone(), f_per_var, powers }
    }

    pub fn trunc(&self) -> &Truncation {
        &self.trunc
    }

    /// Coefficients of W z^α.
    pub fn column(&self, alpha: &[usize]) -> PowerSeries {
        assert!(self.trunc.contains(alpha), "column index {alpha:?} outside caps");
        let caps = self.trunc.caps();
        let mut per_var = self.f_per_var.clone();
        for (kappa, &ak) in alpha.iter().enumerate() {
            if ak == 0 {
                continue;
            }
            let t = self.sym.g.coords()[kappa].var;
            per_var[t] = univar::mul(&per_var[t], &self.powers[kappa][ak], caps[t]);
        }
        PowerSeries::tensor(self.sym.f.c, &per_var)
    }

    /// Coefficients of W h = Σ_α h_α·(W z^α) for a series h on the same
    /// truncation.
    pub fn apply(&self, h: &PowerSeries) -> PowerSeries {
        assert_eq!(h.trunc(), &self.trunc, "operand truncation must match the builder");
        let mut out = PowerSeries::zero(self.trunc.clone());
        for (off, alpha) in self.trunc.indices().enumerate() {
            let ha = h.coeffs()[off];
            if ha.norm_sqr() == 0.0 {
                continue;
            }
            let col = self.column(&alpha);
            for (o, slot) in out.coeffs_mut().iter_mut().enumerate() {
                *slot += ha * col.coeffs()[o];
            }
        }
        out
    }
}

// ------------------------------------------------------------------------
// Structured families.
// ------------------------------------------------------------------------

/// Real-symmetric family: f = c·K_a with c real, and
/// g_κ(z) = a_κ + b_κ·z_κ/(1 − conj(a_κ)·z_κ) with b real, subject to the
/// per-coordinate feasibility inequality
/// |a_κ·(b_κ − |a_κ|² + 1)| + |b_κ| ≤ 1 − |a_κ|² — which is exactly the
/// disk-self-map criterion of g_κ.
pub fn real_symmetric_symbol(
    c: f64,
    a: &[Complex64],
    b: &[f64],
    sp: &SpaceParams,
) -> Result<SymbolPair, SymbolError> {
    let d = sp.dim();
    if a.len() != d || b.len() != d {
        return Err(SymbolError::DimMismatch { left: a.len().min(b.len()), right: d });
    }
    for (kappa, (&ak, &bk)) in a.iter().zip(b).enumerate() {
        if ak.norm() >= 1.0 {
            return Err(SymbolError::ConditionViolated {
                condition: "base-point-in-disk",
                coord: kappa,
                residual: ak.norm() - 1.0,
            });
        }
        let residual = (ak * (bk - ak.norm_sqr() + 1.0)).norm() + bk.abs() - (1.0 - ak.norm_sqr());
        if residual > CONDITION_SLACK {
            return Err(SymbolError::ConditionViolated {
                condition: "self-map-inequality",
                coord: kappa,
                residual,
            });
        }
    }
    let factors = a
        .iter()
        .enumerate()
        .filter(|(_, ak)| ak.norm() > 0.0)
        .map(|(j, ak)| KernelFactor { w: ak.conj(), m: sp.kernel_exponent(j), var: j })
        .collect();
    let coords = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(kappa, (&ak, &bk))| {
            let map = if bk == 0.0 {
                DiskMap::Constant(ak)
            } else {
                DiskMap::Mobius(Lft {
                    a: Complex64::new(bk, 0.0) - Complex64::new(ak.norm_sqr(), 0.0),
                    b: ak,
                    c: -ak.conj(),
                    d: Complex64::new(1.0, 0.0),
                })
            };
            MapCoordinate { var: kappa, map }
        })
        .collect();
    SymbolPair::new(
        WeightSymbol { c: Complex64::new(c, 0.0), factors },
        MapSymbol::new(coords),
        sp.clone(),
    )
}

/// Unitary family: with |c| = 1, a ∈ 𝕋^d, θ ∈ 𝔻^d and a permutation φ
/// preserving the weight vector (ℓ∘φ = ℓ),
///   f(z) = c·∏_j (1−|θ_j|²)^{1+ℓ_j/2}/(1 − a_j·conj(θ_j)·z_{φ(j)})^{ℓ_j+2},
///   g_κ(z) = a_κ·(conj(a_κ)·θ_κ − z_{φ(κ)})/(1 − a_κ·conj(θ_κ)·z_{φ(κ)}).
pub fn unitary_symbol(
    c: Complex64,
    a: &[Complex64],
    theta: &[Complex64],
    phi: &[usize],
    sp: &SpaceParams,
) -> Result<SymbolPair, SymbolError> {
    let d = sp.dim();
    if a.len() != d || theta.len() != d || phi.len() != d {
        return Err(SymbolError::DimMismatch { left: a.len().min(theta.len()).min(phi.len()), right: d });
    }
    let c_res = (c.norm() - 1.0).abs();
    if c_res > CONDITION_SLACK {
        return Err(SymbolError::ScalarConditionViolated {
            condition: "unimodular-scalar",
            residual: c_res,
        });
    }
    let mut seen = vec![false; d];
    for &t in phi {
        if t >= d || seen[t] {
            return Err(SymbolError::NotAPermutation { detail: format!("image {t} repeated or out of range") });
        }
        seen[t] = true;
    }
    for (kappa, (&ak, &tk)) in a.iter().zip(theta).enumerate() {
        let a_res = (ak.norm() - 1.0).abs();
        if a_res > CONDITION_SLACK {
            return Err(SymbolError::ConditionViolated {
                condition: "unimodular-coefficient",
                coord: kappa,
                residual: a_res,
            });
        }
        if tk.norm() >= 1.0 {
            return Err(SymbolError::ConditionViolated {
                condition: "parameter-in-disk",
                coord: kappa,
                residual: tk.norm() - 1.0,
            });
        }
        if sp.ell()[phi[kappa]] != sp.ell()[kappa] {
            return Err(SymbolError::ConditionViolated {
                condition: "weight-permutation-compatible",
                coord: kappa,
                residual: (sp.ell()[phi[kappa]] as f64 - sp.ell()[kappa] as f64).abs(),
            });
        }
    }
    let mut scalar = c;
    let mut factors = Vec::new();
    for (j, &tj) in theta.iter().enumerate() {
        let ell = sp.ell()[j] as f64;
        scalar *= Complex64::new((1.0 - tj.norm_sqr()).powf(1.0 + ell / 2.0), 0.0);
        let w = a[j] * tj.conj();
        if w.norm() > 0.0 {
            factors.push(KernelFactor { w, m: sp.kernel_exponent(j), var: phi[j] });
        }
    }
    let coords = (0..d)
        .map(|kappa| MapCoordinate {
            var: phi[kappa],
            map: DiskMap::Mobius(Lft {
                a: -a[kappa],
                b: theta[kappa],
                c: -a[kappa] * theta[kappa].conj(),
                d: Complex64::new(1.0, 0.0),
            }),
        })
        .collect();
    SymbolPair::new(WeightSymbol { c: scalar, factors }, MapSymbol::new(coords), sp.clone())
}

/// The self-inverse unitary symbol 𝒜_θ: ψ_θ = K_θ/‖K_θ‖ together with the
/// coordinatewise involution φ_θ,κ(z) = (θ_κ − z_κ)/(1 − z_κ·conj(θ_κ)) —
/// the unitary family at c = 1, a = (1,…,1), φ = id.
pub fn involution_symbol(theta: &[Complex64], sp: &SpaceParams) -> Result<SymbolPair, SymbolError> {
    let ones = vec![Complex64::new(1.0, 0.0); sp.dim()];
    let id: Vec<usize> = (0..sp.dim()).collect();
    unitary_symbol(Complex64::new(1.0, 0.0), &ones, theta, &id, sp)
}

/// Per-coordinate parameters of the 𝒞_{p,q}-symmetric family. Reflection
/// coordinates (U₁) take g_κ = G + E/(u + F) (or the constant G when E = 0);
/// rotation coordinates (U₂) take g_κ = α + β·q·u/(1 − α·q·u) (or the
/// constant α when β = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CsymCoordParams {
    ReflectionConstant { g_value: Complex64 },
    ReflectionMobius { g_const: Complex64, e: Complex64, f_shift: Complex64 },
    RotationConstant { alpha: Complex64 },
    RotationMobius { alpha: Complex64, beta: Complex64 },
}

/// 𝒞_{p,q}-symmetric family for the conjugation `cp`: builds g from the
/// per-coordinate parameters and f = c̃·K_w with w = conj(ω(g(r))), where
/// r_j = p_j on reflection coordinates and 0 on rotation coordinates. The
/// scalar c̃ may be any complex number.
///
/// Conditions checked per reflection coordinate κ (p := p_κ):
/// * E = 0: G ∈ 𝔻 ("reflection-constant-in-disk");
/// * E ≠ 0: the compatibility equation
///   p − G|p|² = −F|p|² + (G·F + E)·conj(p) ("reflection-compatibility",
///   absolute residual ≤ 1e-10) and the self-map inequality
///   |(G·F + E)·conj(F) − G| + |E| ≤ |F|² − 1 ("reflection-self-map").
///
/// Per rotation coordinate: β = 0: α ∈ 𝔻 ("rotation-constant-in-disk");
/// β ≠ 0: |α + conj(α)(β − α²)| + |β| ≤ 1 − |α|² ("rotation-self-map").
pub fn csym_symbol(
    cp: &ConjugationParams,
    coords: &[CsymCoordParams],
    c_tilde: Complex64,
) -> Result<SymbolPair, SymbolError> {
    let sp = cp.space().clone();
    let d = sp.dim();
    if coords.len() != d {
        return Err(SymbolError::DimMismatch { left: coords.len(), right: d });
    }
    let mut map_coords = Vec::with_capacity(d);
    for (kappa, (conj_coord, par)) in cp.coords().iter().zip(coords).enumerate() {
        let map = match (conj_coord, par) {
            (CoordConjugation::Reflection(p), &CsymCoordParams::ReflectionConstant { g_value }) => {
                let _ = p;
                if g_value.norm() >= 1.0 {
                    return Err(SymbolError::ConditionViolated {
                        condition: "reflection-constant-in-disk",
                        coord: kappa,
                        residual: g_value.norm() - 1.0,
                    });
                }
                DiskMap::Constant(g_value)
            }
            (
                CoordConjugation::Reflection(p),
                &CsymCoordParams::ReflectionMobius { g_const: big_g, e, f_shift: big_f },
            ) => {
                if e.norm() == 0.0 {
                    // Degenerate branch: fall back to the constant case.
                    if big_g.norm() >= 1.0 {
                        return Err(SymbolError::ConditionViolated {
                            condition: "reflection-constant-in-disk",
                            coord: kappa,
                            residual: big_g.norm() - 1.0,
                        });
                    }
                    DiskMap::Constant(big_g)
                } else {
                    let p = *p;
                    let compat = (p - big_g * p.norm_sqr())
                        - (-big_f * p.norm_sqr() + (big_g * big_f + e) * p.conj());
                    if compat.norm() > COMPATIBILITY_TOL {
                        return Err(SymbolError::ConditionViolated {
                            condition: "reflection-compatibility",
                            coord: kappa,
                            residual: compat.norm(),
                        });
                    }
                    let self_map = ((big_g * big_f + e) * big_f.conj() - big_g).norm() + e.norm()
                        - (big_f.norm_sqr() - 1.0);
                    if self_map > CONDITION_SLACK {
                        return Err(SymbolError::ConditionViolated {
                            condition: "reflection-self-map",
                            coord: kappa,
                            residual: self_map,
                        });
                    }
                    // g(u) = G + E/(u+F) = (G·u + (G·F+E))/(u + F).
                    DiskMap::Mobius(Lft {
                        a: big_g,
                        b: big_g * big_f + e,
                        c: Complex64::new(1.0, 0.0),
                        d: big_f,
                    })
                }
            }
            (CoordConjugation::Rotation(_), &CsymCoordParams::RotationConstant { alpha }) => {
                if alpha.norm() >= 1.0 {
                    return Err(SymbolError::ConditionViolated {
                        condition: "rotation-constant-in-disk",
                        coord: kappa,
                        residual: alpha.norm() - 1.0,
                    });
                }
                DiskMap::Constant(alpha)
            }
            (CoordConjugation::Rotation(q), &CsymCoordParams::RotationMobius { alpha, beta }) => {
                if beta.norm() == 0.0 {
                    if alpha.norm() >= 1.0 {
                        return Err(SymbolError::ConditionViolated {
                            condition: "rotation-constant-in-disk",
                            coord: kappa,
                            residual: alpha.norm() - 1.0,
                        });
                    }
                    DiskMap::Constant(alpha)
                } else {
                    let residual = (alpha + alpha.conj() * (beta - alpha * alpha)).norm()
                        + beta.norm()
                        - (1.0 - alpha.norm_sqr());
                    if residual > CONDITION_SLACK {
                        return Err(SymbolError::ConditionViolated {
                            condition: "rotation-self-map",
                            coord: kappa,
                            residual,
                        });
                    }
                    // g(u) = α + β·q·u/(1 − α·q·u) = ((β−α²)·q·u + α)/(−α·q·u + 1).
                    DiskMap::Mobius(Lft {
                        a: (beta - alpha * alpha) * q,
                        b: alpha,
                        c: -alpha * q,
                        d: Complex64::new(1.0, 0.0),
                    })
                }
            }
            (CoordConjugation::Reflection(_), other) => {
                return Err(SymbolError::BranchMismatch {
                    coord: kappa,
                    expected: "reflection",
                    got: match other {
                        CsymCoordParams::RotationConstant { .. }
                        | CsymCoordParams::RotationMobius { .. } => "rotation",
                        _ => unreachable!(),
                    },
                });
            }
            (CoordConjugation::Rotation(_), _) => {
                return Err(SymbolError::BranchMismatch {
                    coord: kappa,
                    expected: "rotation",
                    got: "reflection",
                });
            }
        };
        map_coords.push(MapCoordinate { var: kappa, map });
    }

    // f = c̃·K_w, w = conj(ω(g(r))): the kernel factor in variable j is
    // (1 − ω_j(g_j(r_j))·z_j)^{−(ℓ_j+2)}.
    let r: Vec<Complex64> = cp
        .coords()
        .iter()
        .map(|c| match c {
            CoordConjugation::Reflection(p) => *p,
            CoordConjugation::Rotation(_) => Complex64::new(0.0, 0.0),
        })
        .collect();
    let mut factors = Vec::new();
    for j in 0..d {
        let gj = map_coords[j].map.eval(r[j])?;
        let point = [gj];
        let w_full = {
            // Evaluate coordinate j of ω only.
            match cp.coords()[j] {
                CoordConjugation::Reflection(p) => {
                    let pc = p.conj();
                    (pc / p) * (p - point[0]) / (Complex64::new(1.0, 0.0) - pc * point[0])
                }
                CoordConjugation::Rotation(q) => q * point[0],
            }
        };
        if w_full.norm() > 0.0 {
            factors.push(KernelFactor { w: w_full, m: sp.kernel_exponent(j), var: j });
        }
    }
    SymbolPair::new(
        WeightSymbol { c: c_tilde, factors },
        MapSymbol::new(map_coords),
        sp,
    )
}
