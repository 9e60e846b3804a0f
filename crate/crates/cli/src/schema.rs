//! On-disk JSON formats: symbol files, conjugation files, LFT lists. All
//! coordinate and variable indices in files are 1-based; conversion to the
//! library's 0-based indexing happens here and nowhere else.

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use wco_core::bergman::SpaceParams;
use wco_core::conjugation::ConjugationParams;
use wco_core::moebius::{DiskMap, Lft};
use wco_core::symbols::{KernelFactor, MapCoordinate, MapSymbol, SymbolPair, WeightSymbol};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<ComplexJson> for Complex64 {
    fn from(v: ComplexJson) -> Self {
        Complex64::new(v.re, v.im)
    }
}

impl From<Complex64> for ComplexJson {
    fn from(v: Complex64) -> Self {
        ComplexJson { re: v.re, im: v.im }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorJson {
    pub w: ComplexJson,
    pub m: u32,
    /// 1-based variable index.
    pub var: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightJson {
    pub c: ComplexJson,
    #[serde(default)]
    pub factors: Vec<FactorJson>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LftJson {
    pub a: ComplexJson,
    pub b: ComplexJson,
    pub c: ComplexJson,
    pub d: ComplexJson,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapCoordJson {
    /// 1-based variable index read by this coordinate.
    pub var: usize,
    pub lft: LftJson,
}

/// Symbol file: space dimensions, weight vector, factored weight f, and
/// the coordinate maps of g. A constant coordinate v is written as the
/// degenerate quadruple {a:0, b:v, c:0, d:1}.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolJson {
    pub d: usize,
    pub ell: Vec<usize>,
    pub f: WeightJson,
    pub g: Vec<MapCoordJson>,
}

/// Conjugation file: the reflection/rotation partition (1-based variable
/// lists) with one p per U1 entry and one q per U2 entry, in list order.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugationJson {
    #[serde(rename = "U1", default)]
    pub u1: Vec<usize>,
    #[serde(rename = "U2", default)]
    pub u2: Vec<usize>,
    #[serde(default)]
    pub p: Vec<ComplexJson>,
    #[serde(default)]
    pub q: Vec<ComplexJson>,
}

fn to_zero_based(var: usize, d: usize, what: &str) -> Result<usize> {
    if var == 0 || var > d {
        bail!("{what} index {var} out of range 1..={d}");
    }
    Ok(var - 1)
}

pub fn symbol_from_json(j: &SymbolJson) -> Result<SymbolPair> {
    if j.ell.len() != j.d {
        bail!("field `ell` has {} entries but d = {}", j.ell.len(), j.d);
    }
    if j.g.len() != j.d {
        bail!("field `g` has {} coordinates but d = {}", j.g.len(), j.d);
    }
    let sp = SpaceParams::new(j.ell.clone());
    let mut factors = Vec::with_capacity(j.f.factors.len());
    for fac in &j.f.factors {
        factors.push(KernelFactor {
            w: fac.w.into(),
            m: fac.m,
            var: to_zero_based(fac.var, j.d, "weight factor variable")?,
        });
    }
    let f = WeightSymbol { c: j.f.c.into(), factors };
    let mut coords = Vec::with_capacity(j.d);
    for (kappa, gc) in j.g.iter().enumerate() {
        let map = DiskMap::from_lft_coeffs(
            gc.lft.a.into(),
            gc.lft.b.into(),
            gc.lft.c.into(),
            gc.lft.d.into(),
        )
        .with_context(|| format!("coordinate {} of g", kappa + 1))?;
        coords.push(MapCoordinate {
            var: to_zero_based(gc.var, j.d, "map coordinate variable")?,
            map,
        });
    }
    Ok(SymbolPair::new(f, MapSymbol::new(coords), sp)?)
}

pub fn conjugation_from_json(j: &ConjugationJson, sp: &SpaceParams) -> Result<ConjugationParams> {
    let d = sp.dim();
    if j.p.len() != j.u1.len() {
        bail!("{} reflection parameters for {} U1 coordinates", j.p.len(), j.u1.len());
    }
    if j.q.len() != j.u2.len() {
        bail!("{} rotation parameters for {} U2 coordinates", j.q.len(), j.u2.len());
    }
    let mut u1 = Vec::with_capacity(j.u1.len());
    for &v in &j.u1 {
        u1.push(to_zero_based(v, d, "U1 variable")?);
    }
    let mut u2 = Vec::with_capacity(j.u2.len());
    for &v in &j.u2 {
        u2.push(to_zero_based(v, d, "U2 variable")?);
    }
    let p: Vec<Complex64> = j.p.iter().map(|&x| x.into()).collect();
    let q: Vec<Complex64> = j.q.iter().map(|&x| x.into()).collect();
    Ok(ConjugationParams::from_partition(&u1, &u2, &p, &q, sp.clone())?)
}

pub fn lft_from_json(j: &LftJson) -> Lft {
    Lft { a: j.a.into(), b: j.b.into(), c: j.c.into(), d: j.d.into() }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))
}
