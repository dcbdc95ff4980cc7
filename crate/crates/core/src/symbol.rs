//! Tube-type discrete symbols `c(t, ξ) = a(t, ξ) + i b(t, ξ)` and their
//! per-frequency profiles.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{self, freq_norm};
use crate::par::map_indexed;
use crate::spectral::{self, CircleGrid, FrequencyBox, Primitive};
use crate::trig::TrigPoly;

/// Default resonance tolerance `ε_Z`.
pub const DEFAULT_EPS_Z: f64 = 1e-9;

/// Frequency weight `q(ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    One,
    /// `|ξ|^p`, with `q(0) = 0` for `p > 0`.
    NormPower(f64),
}

impl Weight {
    pub fn eval(&self, xi: &[i64]) -> f64 {
        match *self {
            Weight::One => 1.0,
            Weight::NormPower(p) => {
                let r = freq_norm(xi);
                if r == 0.0 {
                    if p > 0.0 {
                        0.0
                    } else {
                        1.0
                    }
                } else {
                    math::powf(r, p)
                }
            }
        }
    }
}

/// Real and imaginary time profiles `(a(t), b(t))`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPair {
    pub re: TrigPoly,
    pub im: TrigPoly,
}

impl TrigPair {
    pub fn new(re: TrigPoly, im: TrigPoly) -> Self {
        Self { re, im }
    }

    pub fn imaginary(im: TrigPoly) -> Self {
        Self { re: TrigPoly::default(), im }
    }
}

/// Positively homogeneous symbol of degree `m`: `c(t, nξ) = n^m c(t, ξ)`.
///
/// Base data lives on primitive lattice directions `ξ̂` (gcd of components
/// 1). A direction without an explicit entry uses `|ξ̂|^m · default(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousSpec {
    pub degree: f64,
    pub default: Option<TrigPair>,
    pub directions: Vec<(Vec<i64>, TrigPair)>,
}

impl HomogeneousSpec {
    /// `c(t, ξ) = |ξ|^m (a(t) + i b(t))`.
    pub fn isotropic(degree: f64, profile: TrigPair) -> Self {
        Self { degree, default: Some(profile), directions: Vec::new() }
    }

    fn base_at(&self, dir: &[i64], t: f64) -> Result<Complex64> {
        if let Some((_, p)) = self.directions.iter().find(|(d, _)| d.as_slice() == dir) {
            return Ok(Complex64::new(p.re.eval(t), p.im.eval(t)));
        }
        match &self.default {
            Some(p) => {
                let s = math::powf(freq_norm(dir), self.degree);
                Ok(Complex64::new(s * p.re.eval(t), s * p.im.eval(t)))
            }
            None => Err(Error::InvalidSymbol(format!(
                "homogeneous symbol has no base data for direction {dir:?}"
            ))),
        }
    }
}

/// Samples `c(t_j, ξ)` given per frequency.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tabulated {
    pub nt: usize,
    pub entries: BTreeMap<Vec<i64>, Vec<Complex64>>,
}

impl Tabulated {
    pub fn from_fn<F>(grid: &CircleGrid, freq_box: &FrequencyBox, mut c: F) -> Self
    where
        F: FnMut(f64, &[i64]) -> Complex64,
    {
        let entries = freq_box
            .freqs()
            .iter()
            .map(|xi| (xi.clone(), grid.nodes().iter().map(|&t| c(t, xi)).collect()))
            .collect();
        Self { nt: grid.len(), entries }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolVariant {
    /// `c(t, ξ) = λ q(ξ)`.
    Constant { value: Complex64, weight: Weight },
    /// `c(t, ξ) = (a(t) + i b(t)) q(ξ)`.
    Separable { profile: TrigPair, weight: Weight },
    Homogeneous(HomogeneousSpec),
    /// Homogeneous principal part plus a separable remainder of lower order.
    HomogeneousPlusLower {
        principal: HomogeneousSpec,
        lower: TrigPair,
        lower_weight: Weight,
        lower_order: f64,
    },
    Tabulated(Box<Tabulated>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSpec {
    /// Declared order `m`.
    pub order: f64,
    pub variant: SymbolVariant,
}

impl SymbolSpec {
    pub fn new(order: f64, variant: SymbolVariant) -> Self {
        Self { order, variant }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.order.is_finite() {
            return Err(Error::InvalidSymbol("order must be finite".into()));
        }
        match &self.variant {
            SymbolVariant::Homogeneous(h) => {
                if h.degree != self.order {
                    return Err(Error::InvalidSymbol(format!(
                        "homogeneous degree {} differs from declared order {}",
                        h.degree, self.order
                    )));
                }
            }
            SymbolVariant::HomogeneousPlusLower { principal, lower_order, .. } => {
                if principal.degree != self.order {
                    return Err(Error::InvalidSymbol(
                        "principal degree must equal the declared order".into(),
                    ));
                }
                if *lower_order >= self.order {
                    return Err(Error::InvalidSymbol(format!(
                        "lower order {lower_order} must be below principal order {}",
                        self.order
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.variant, SymbolVariant::Homogeneous(_))
    }

    /// `c(t_j, ξ)` on the grid. Homogeneous variants evaluate through the
    /// primitive direction of `ξ` and the homogeneity law.
    pub fn samples(&self, grid: &CircleGrid, xi: &[i64]) -> Result<Vec<Complex64>> {
        let nodes = grid.nodes();
        match &self.variant {
            SymbolVariant::Constant { value, weight } => {
                let v = value * weight.eval(xi);
                Ok(alloc::vec![v; grid.len()])
            }
            SymbolVariant::Separable { profile, weight } => {
                let q = weight.eval(xi);
                Ok(nodes
                    .iter()
                    .map(|&t| Complex64::new(q * profile.re.eval(t), q * profile.im.eval(t)))
                    .collect())
            }
            SymbolVariant::Homogeneous(h) => homogeneous_samples(h, &nodes, xi),
            SymbolVariant::HomogeneousPlusLower { principal, lower, lower_weight, .. } => {
                let mut s = homogeneous_samples(principal, &nodes, xi)?;
                let q = lower_weight.eval(xi);
                for (v, &t) in s.iter_mut().zip(&nodes) {
                    *v += Complex64::new(q * lower.re.eval(t), q * lower.im.eval(t));
                }
                Ok(s)
            }
            SymbolVariant::Tabulated(tab) => {
                if tab.nt != grid.len() {
                    return Err(Error::ShapeMismatch {
                        context: "tabulated symbol grid",
                        expected: grid.len(),
                        found: tab.nt,
                    });
                }
                let s = tab
                    .entries
                    .get(xi)
                    .ok_or_else(|| Error::MissingFrequency { xi: xi.to_vec() })?;
                if s.len() != grid.len() {
                    return Err(Error::ShapeMismatch {
                        context: "tabulated symbol samples",
                        expected: grid.len(),
                        found: s.len(),
                    });
                }
                Ok(s.clone())
            }
        }
    }
}

fn homogeneous_samples(h: &HomogeneousSpec, nodes: &[f64], xi: &[i64]) -> Result<Vec<Complex64>> {
    let (dir, mult) = primitive_direction(xi);
    if mult == 0 {
        return Ok(alloc::vec![Complex64::new(0.0, 0.0); nodes.len()]);
    }
    let s = math::powf(mult as f64, h.degree);
    nodes.iter().map(|&t| Ok(h.base_at(&dir, t)? * s)).collect()
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// `(ξ̂, n)` with `ξ = n ξ̂` and `ξ̂` primitive; `n = 0` for `ξ = 0`.
pub fn primitive_direction(xi: &[i64]) -> (Vec<i64>, i64) {
    let g = xi.iter().fold(0, |g, &k| gcd(g, k));
    if g == 0 {
        return (xi.to_vec(), 0);
    }
    (xi.iter().map(|k| k / g).collect(), g)
}

/// Per-frequency cache of everything the conditions and solver need.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    pub xi: Vec<i64>,
    /// Euclidean `|ξ|`.
    pub norm: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Average of `a`; the ramp slope of `A`.
    pub a0: f64,
    /// Average of `b`; the ramp slope of `B`.
    pub b0: f64,
    pub a_prim: Primitive,
    pub b_prim: Primitive,
    pub resonant: bool,
    /// `max(dist(a₀, Z), |b₀|)`, the quantity compared with `ε_Z`.
    pub resonance_margin: f64,
    /// Node where `B` is maximal (smallest index on ties); resonant only.
    pub t_max: Option<usize>,
}

impl ModeProfile {
    pub fn from_samples(
        grid: &CircleGrid,
        xi: &[i64],
        a: Vec<f64>,
        b: Vec<f64>,
        eps_z: f64,
        basepoint: usize,
    ) -> Result<Self> {
        let a_prim = spectral::spectral_primitive(grid, &a, basepoint)?;
        let b_prim = spectral::spectral_primitive(grid, &b, basepoint)?;
        let a0 = a_prim.slope;
        let b0 = b_prim.slope;
        let test = resonance_of(a0, b0, eps_z);
        let t_max = test.resonant.then(|| b_prim.argmax());
        Ok(Self {
            xi: xi.to_vec(),
            norm: freq_norm(xi),
            a,
            b,
            a0,
            b0,
            a_prim,
            b_prim,
            resonant: test.resonant,
            resonance_margin: test.margin,
            t_max,
        })
    }

    pub fn from_complex(
        grid: &CircleGrid,
        xi: &[i64],
        c: &[Complex64],
        eps_z: f64,
        basepoint: usize,
    ) -> Result<Self> {
        let a = c.iter().map(|z| z.re).collect();
        let b = c.iter().map(|z| z.im).collect();
        Self::from_samples(grid, xi, a, b, eps_z, basepoint)
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn c0(&self) -> Complex64 {
        Complex64::new(self.a0, self.b0)
    }

    pub fn symbol_at(&self, j: usize) -> Complex64 {
        Complex64::new(self.a[j], self.b[j])
    }

    pub fn is_zero_frequency(&self) -> bool {
        self.xi.iter().all(|&k| k == 0)
    }

    /// Profile of `c` multiplied by `factor > 0`, as at `nξ` for a degree-`m`
    /// homogeneous symbol with `factor = n^m`. Resonance is re-tested.
    pub fn scaled(&self, xi: &[i64], factor: f64, eps_z: f64) -> Self {
        let a_prim = self.a_prim.scaled(factor);
        let b_prim = self.b_prim.scaled(factor);
        let a0 = self.a0 * factor;
        let b0 = self.b0 * factor;
        let test = resonance_of(a0, b0, eps_z);
        let t_max = test.resonant.then(|| b_prim.argmax());
        Self {
            xi: xi.to_vec(),
            norm: freq_norm(xi),
            a: self.a.iter().map(|v| v * factor).collect(),
            b: self.b.iter().map(|v| v * factor).collect(),
            a0,
            b0,
            a_prim,
            b_prim,
            resonant: test.resonant,
            resonance_margin: test.margin,
            t_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceTest {
    pub resonant: bool,
    pub margin: f64,
}

fn resonance_of(a0: f64, b0: f64, eps_z: f64) -> ResonanceTest {
    let margin = math::dist_to_int(a0).max(math::abs(b0));
    ResonanceTest { resonant: margin <= eps_z, margin }
}

/// `ξ ∈ 𝒵` test: `dist(a₀, Z) ≤ ε_Z` and `|b₀| ≤ ε_Z`.
pub fn resonance_test(profile: &ModeProfile, eps_z: f64) -> ResonanceTest {
    resonance_of(profile.a0, profile.b0, eps_z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub eps_z: f64,
    pub basepoint: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { eps_z: DEFAULT_EPS_Z, basepoint: 0 }
    }
}

/// One profile per frequency of the box, in box order.
pub fn evaluate(
    spec: &SymbolSpec,
    grid: &CircleGrid,
    freq_box: &FrequencyBox,
    opts: EvalOptions,
) -> Result<Vec<ModeProfile>> {
    spec.validate()?;
    if opts.basepoint >= grid.len() {
        return Err(Error::NodeOutOfRange { index: opts.basepoint, n: grid.len() });
    }
    if let SymbolVariant::Homogeneous(h) = &spec.variant {
        return evaluate_homogeneous(spec, h, grid, freq_box, opts);
    }
    map_indexed(freq_box.len(), |idx| {
        let xi = freq_box.freq(idx);
        let c = spec.samples(grid, xi)?;
        ModeProfile::from_complex(grid, xi, &c, opts.eps_z, opts.basepoint)
    })
    .into_iter()
    .collect()
}

fn evaluate_homogeneous(
    spec: &SymbolSpec,
    h: &HomogeneousSpec,
    grid: &CircleGrid,
    freq_box: &FrequencyBox,
    opts: EvalOptions,
) -> Result<Vec<ModeProfile>> {
    let mut dirs: Vec<Vec<i64>> = freq_box
        .freqs()
        .iter()
        .filter_map(|xi| {
            let (d, n) = primitive_direction(xi);
            (n > 0).then_some(d)
        })
        .collect();
    dirs.sort();
    dirs.dedup();
    let bases: Vec<ModeProfile> = map_indexed(dirs.len(), |i| {
        let c = spec.samples(grid, &dirs[i])?;
        ModeProfile::from_complex(grid, &dirs[i], &c, opts.eps_z, opts.basepoint)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let by_dir: BTreeMap<&[i64], &ModeProfile> =
        dirs.iter().map(|d| d.as_slice()).zip(bases.iter()).collect();
    freq_box
        .freqs()
        .iter()
        .map(|xi| {
            let (d, n) = primitive_direction(xi);
            if n == 0 {
                let zero = alloc::vec![0.0; grid.len()];
                return ModeProfile::from_samples(grid, xi, zero.clone(), zero, opts.eps_z, opts.basepoint);
            }
            let base = by_dir[d.as_slice()];
            if n == 1 {
                return Ok(base.clone());
            }
            Ok(base.scaled(xi, math::powf(n as f64, h.degree), opts.eps_z))
        })
        .collect()
}

/// Estimated constants `C_α = max_ξ sup_t |∂_t^α c(t,ξ)| / (1+|ξ|)^m` for
/// `α = 0, 1, 2`. A finite spot check of symbol-class membership.
pub fn class_constants(grid: &CircleGrid, profiles: &[ModeProfile], order: f64) -> Result<[f64; 3]> {
    let mut out = [0.0f64; 3];
    for p in profiles {
        let c: Vec<Complex64> = (0..p.len()).map(|j| p.symbol_at(j)).collect();
        let w = math::powf(1.0 + p.norm, order);
        for (alpha, slot) in out.iter_mut().enumerate() {
            let d = spectral::derivative(grid, &c, alpha as u32)?;
            let sup = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
            *slot = slot.max(sup / w);
        }
    }
    Ok(out)
}
