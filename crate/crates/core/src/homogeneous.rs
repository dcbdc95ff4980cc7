//! Checks specific to positively homogeneous symbols: sign changes of `b`,
//! connectedness of the sublevel sets of `B`, and the resulting
//! characterization of global solvability.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::conditions::{dio_fit, dio_margin, DioFitConfig, DioOutcome, DioStatus};
use crate::error::{Error, Result};
use crate::math;
use crate::par::map_indexed;
use crate::spectral::{CircleGrid, FrequencyBox};
use crate::symbol::{
    evaluate, primitive_direction, EvalOptions, HomogeneousSpec, ModeProfile, SymbolSpec, SymbolVariant,
};

/// Default relative tolerance for [`sign_change`].
pub const DEFAULT_SIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignChange {
    pub changes: bool,
    /// `b` vanishes identically.
    pub degenerate: bool,
    /// The smaller excursion to one side of zero is within `10³·tol·max|b|`
    /// of zero: the answer hinges on values close to the tolerance.
    pub near_degenerate: bool,
}

/// Whether `b` takes both signs, relative to `tol · max|b|`.
pub fn sign_change(b: &[f64], tol: f64) -> SignChange {
    let lo = b.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = math::abs(lo).max(math::abs(hi));
    if scale == 0.0 {
        return SignChange { changes: false, degenerate: true, near_degenerate: false };
    }
    let changes = lo < -tol * scale && hi > tol * scale;
    // signed excursion of the smaller side: positive when both signs occur
    let minor = (-lo).min(hi);
    SignChange {
        changes,
        degenerate: false,
        near_degenerate: math::abs(minor) <= 1e3 * tol * scale,
    }
}

/// Number of maximal cyclic runs of nodes with `B < λ`.
pub fn sublevel_components(b: &[f64], lambda: f64) -> usize {
    let n = b.len();
    let below = |i: usize| b[i] < lambda;
    let inside = (0..n).filter(|&i| below(i)).count();
    if inside == n {
        return 1;
    }
    (0..n).filter(|&i| below(i) && !below((i + n - 1) % n)).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SublevelScan {
    pub xi: Vec<i64>,
    /// `(λ, components)` at midpoints between consecutive distinct values.
    pub counts: Vec<(f64, usize)>,
    pub max_components: usize,
    pub connected_all: bool,
}

/// Sweeps `λ` over the midpoints of the sorted distinct samples of `B`.
///
/// Nodes are switched on in increasing order of `B`; each activation adds a
/// component and merges with every active neighbour, so the sweep costs
/// `O(n log n)`.
pub fn connected_all(profile: &ModeProfile) -> SublevelScan {
    let b = &profile.b_prim.samples;
    let n = b.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| b[i].total_cmp(&b[j]).then(i.cmp(&j)));
    let mut active = vec![false; n];
    let mut comps: isize = 0;
    let mut active_count = 0;
    let mut counts = Vec::new();
    let mut k = 0;
    while k < n {
        let v = b[order[k]];
        while k < n && b[order[k]] == v {
            let i = order[k];
            active[i] = true;
            active_count += 1;
            comps += 1;
            let left = (i + n - 1) % n;
            let right = (i + 1) % n;
            if active[left] {
                comps -= 1;
            }
            if active[right] && right != left {
                comps -= 1;
            }
            k += 1;
        }
        if k < n {
            let lambda = 0.5 * (v + b[order[k]]);
            // a fully active circle closes into one component
            let c = if active_count == n { 1 } else { comps.max(0) as usize };
            counts.push((lambda, c));
        }
    }
    let max_components = counts.iter().map(|&(_, c)| c).max().unwrap_or(if n > 0 { 1 } else { 0 });
    SublevelScan {
        xi: profile.xi.clone(),
        counts,
        max_components,
        connected_all: max_components <= 1,
    }
}

/// Strict local maxima of the cyclic sequence after merging runs of equal
/// values. `B` has connected sublevels iff this is at most one.
pub fn strict_local_maxima(b: &[f64]) -> usize {
    let mut merged: Vec<f64> = Vec::with_capacity(b.len());
    for &v in b {
        if merged.last() != Some(&v) {
            merged.push(v);
        }
    }
    while merged.len() > 1 && merged.first() == merged.last() {
        merged.pop();
    }
    let m = merged.len();
    if m < 2 {
        return 0;
    }
    (0..m)
        .filter(|&i| merged[i] > merged[(i + m - 1) % m] && merged[i] > merged[(i + 1) % m])
        .count()
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorollaryReason {
    Ok,
    /// Non-resonant `ξ` whose `b(·, ξ)` changes sign; `direction` is the
    /// primitive direction where it was detected.
    SignChange { direction: Vec<i64> },
    /// Resonant `ξ` with a disconnected sublevel set of `B(·, ξ)`.
    SublevelDisconnected { direction: Vec<i64>, components: usize },
}

impl CorollaryReason {
    pub fn is_ok(&self) -> bool {
        matches!(self, CorollaryReason::Ok)
    }

    pub fn describe(&self) -> String {
        match self {
            CorollaryReason::Ok => String::from("ok"),
            CorollaryReason::SignChange { direction } => {
                format!("sign change at primitive xi {direction:?}")
            }
            CorollaryReason::SublevelDisconnected { direction, components } => {
                format!("sublevel disconnected at primitive xi {direction:?} ({components} components)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryRow {
    pub xi: Vec<i64>,
    pub resonant: bool,
    pub sign_change: SignChange,
    pub max_components: Option<usize>,
    pub reason: CorollaryReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryVerdict {
    pub solvable: bool,
    pub dio: DioStatus,
    /// One row per nonzero frequency of the box, in box order.
    pub rows: Vec<CorollaryRow>,
}

impl CorollaryVerdict {
    pub fn first_failure(&self) -> Option<&CorollaryRow> {
        self.rows.iter().find(|r| !r.reason.is_ok())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryConfig {
    pub sign_tol: f64,
    pub dio: DioFitConfig,
    pub eval: EvalOptions,
}

impl Default for CorollaryConfig {
    fn default() -> Self {
        Self { sign_tol: DEFAULT_SIGN_TOL, dio: DioFitConfig::default(), eval: EvalOptions::default() }
    }
}

struct Shape {
    sign: SignChange,
    scan: SublevelScan,
}

fn shape_of(profile: &ModeProfile, tol: f64) -> Shape {
    Shape { sign: sign_change(&profile.b, tol), scan: connected_all(profile) }
}

fn judge(class: &ModeProfile, shape: &Shape, direction: &[i64]) -> CorollaryRow {
    let (max_components, reason) = if class.resonant {
        let c = shape.scan.max_components;
        let reason = if shape.scan.connected_all {
            CorollaryReason::Ok
        } else {
            CorollaryReason::SublevelDisconnected { direction: direction.to_vec(), components: c }
        };
        (Some(c), reason)
    } else if shape.sign.changes {
        (None, CorollaryReason::SignChange { direction: direction.to_vec() })
    } else {
        (None, CorollaryReason::Ok)
    };
    CorollaryRow {
        xi: class.xi.clone(),
        resonant: class.resonant,
        sign_change: shape.sign,
        max_components,
        reason,
    }
}

fn dio_status(profiles: &[ModeProfile], cfg: DioFitConfig) -> Result<DioStatus> {
    let margins: Vec<_> = profiles.iter().map(dio_margin).collect();
    Ok(match dio_fit(&margins, cfg) {
        Ok(DioOutcome::Vacuous) => DioStatus::Vacuous,
        Ok(DioOutcome::Fit(f)) => DioStatus::Fitted(f),
        Err(Error::TooFewFrequencies { found, .. }) => DioStatus::Insufficient { found },
        Err(e) => return Err(e),
    })
}

fn homogeneous_part(spec: &SymbolSpec) -> Result<&HomogeneousSpec> {
    match &spec.variant {
        SymbolVariant::Homogeneous(h) => {
            if !(h.degree > 0.0) {
                return Err(Error::InvalidSymbol(format!(
                    "the homogeneous characterization needs order m > 0, got {}",
                    h.degree
                )));
            }
            Ok(h)
        }
        _ => Err(Error::InvalidSymbol("corollary_verdict needs a homogeneous symbol".into())),
    }
}

/// Solvability at cutoff by the homogeneous characterization: (DC) clean,
/// no sign change of `b` at non-resonant `ξ`, connected sublevels of `B` at
/// resonant `ξ`. Shapes are computed on primitive directions only.
pub fn corollary_verdict(
    spec: &SymbolSpec,
    grid: &CircleGrid,
    freq_box: &FrequencyBox,
    cfg: CorollaryConfig,
) -> Result<CorollaryVerdict> {
    homogeneous_part(spec)?;
    let profiles = evaluate(spec, grid, freq_box, cfg.eval)?;
    let mut dir_index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    for (i, p) in profiles.iter().enumerate() {
        let (d, n) = primitive_direction(&p.xi);
        if n == 1 {
            dir_index.insert(d, i);
        }
    }
    let dirs: Vec<(&Vec<i64>, &usize)> = dir_index.iter().collect();
    let shapes: Vec<Shape> = map_indexed(dirs.len(), |k| shape_of(&profiles[*dirs[k].1], cfg.sign_tol));
    let shape_of_dir: BTreeMap<&[i64], &Shape> =
        dirs.iter().map(|(d, _)| d.as_slice()).zip(shapes.iter()).collect();
    let rows = profiles
        .iter()
        .filter(|p| !p.is_zero_frequency())
        .map(|p| {
            let (d, _) = primitive_direction(&p.xi);
            judge(p, shape_of_dir[d.as_slice()], &d)
        })
        .collect();
    finish(&profiles, rows, cfg)
}

/// [`corollary_verdict`] without the homogeneity reduction: every
/// frequency's own profile is scanned.
pub fn corollary_verdict_unreduced(
    spec: &SymbolSpec,
    grid: &CircleGrid,
    freq_box: &FrequencyBox,
    cfg: CorollaryConfig,
) -> Result<CorollaryVerdict> {
    homogeneous_part(spec)?;
    let profiles = evaluate(spec, grid, freq_box, cfg.eval)?;
    let rows = profiles
        .iter()
        .filter(|p| !p.is_zero_frequency())
        .map(|p| judge(p, &shape_of(p, cfg.sign_tol), &primitive_direction(&p.xi).0))
        .collect();
    finish(&profiles, rows, cfg)
}

fn finish(profiles: &[ModeProfile], rows: Vec<CorollaryRow>, cfg: CorollaryConfig) -> Result<CorollaryVerdict> {
    let dio = dio_status(profiles, cfg.dio)?;
    let rows: Vec<CorollaryRow> = rows;
    let solvable = dio.is_clean() && rows.iter().all(|r| r.reason.is_ok());
    Ok(CorollaryVerdict { solvable, dio, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PerturbedOutcome {
    /// Some primitive `ξ₀` has `b_{m0}(ξ₀) ≠ 0` and `b_m(·, ξ₀)` changes sign.
    NotSolvable { direction: Vec<i64>, principal_mean: f64 },
    /// The hypotheses fail everywhere in the box; use the general conditions.
    Inconclusive,
}

/// Necessary-condition check for a homogeneous principal part plus a
/// lower-order remainder. `mean_tol` is the threshold for `b_{m0} ≠ 0`.
pub fn perturbed_principal_check(
    spec: &SymbolSpec,
    grid: &CircleGrid,
    freq_box: &FrequencyBox,
    sign_tol: f64,
    mean_tol: f64,
) -> Result<PerturbedOutcome> {
    spec.validate()?;
    let SymbolVariant::HomogeneousPlusLower { principal, .. } = &spec.variant else {
        return Err(Error::InvalidSymbol("perturbed_principal_check needs a homogeneous-plus-lower symbol".into()));
    };
    let principal_spec = SymbolSpec::new(principal.degree, SymbolVariant::Homogeneous(principal.clone()));
    for xi in freq_box.freqs() {
        let (d, n) = primitive_direction(xi);
        if n != 1 {
            continue;
        }
        let c = principal_spec.samples(grid, &d)?;
        let p = ModeProfile::from_complex(grid, &d, &c, 0.0, 0)?;
        if math::abs(p.b0) > mean_tol && sign_change(&p.b, sign_tol).changes {
            return Ok(PerturbedOutcome::NotSolvable { direction: d, principal_mean: p.b0 });
        }
    }
    Ok(PerturbedOutcome::Inconclusive)
}
