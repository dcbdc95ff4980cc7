//! Diophantine margins, the minimal oscillation constants for the window
//! conditions `(α)_D^±` and `(β)_D`, and the aggregated verdict at a cutoff.
//!
//! Windows live on grid nodes. A window of length `δ = |ξ|^{-m}` spans
//! `w = ⌈δ/h⌉` steps, i.e. the `w + 1` nodes `τ..=τ+w`. Lifted indices
//! `i ≥ n` refer to `t_i + 2π` and use [`Primitive::lifted`].
//!
//! [`Primitive::lifted`]: crate::spectral::Primitive::lifted

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, TAU};
use crate::par::map_indexed;
use crate::spectral::{freq_norm, line_fit, FrequencyBox};
use crate::symbol::ModeProfile;
use crate::window::{sliding_max, sliding_min};

/// Smallest `|ξ|` at which the log-oscillation constants are defined.
pub const MIN_NORM: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DioMargin {
    pub xi: Vec<i64>,
    pub norm: f64,
    pub resonant: bool,
    /// `min_τ |τ + c₀(ξ)|`.
    pub margin: f64,
    /// `|1 - e^{-2πi c₀}|`.
    pub exp_margin1: f64,
    /// `|e^{2πi c₀} - 1|`.
    pub exp_margin2: f64,
}

pub fn dio_margin(profile: &ModeProfile) -> DioMargin {
    let da = math::dist_to_int(profile.a0);
    let margin = math::hypot(da, profile.b0);
    let fa = profile.a0 - math::round(profile.a0);
    DioMargin {
        xi: profile.xi.clone(),
        norm: profile.norm,
        resonant: profile.resonant,
        margin,
        exp_margin1: expm1_i_abs(-fa, profile.b0),
        exp_margin2: expm1_i_abs(fa, -profile.b0),
    }
}

/// `|e^{2πi(x + i y)} - 1|` = `|e^{-2πy} e^{2πix} - 1|`, without cancellation
/// for small arguments.
fn expm1_i_abs(x: f64, y: f64) -> f64 {
    let r = math::expm1(-TAU * y);
    let s = math::sin(math::PI * x);
    let re = r * math::cos(TAU * x) - 2.0 * s * s;
    let im = (1.0 + r) * math::sin(TAU * x);
    math::hypot(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DioFitConfig {
    /// A margin more than this factor below the bulk envelope is an offender.
    pub offender_factor: f64,
}

impl Default for DioFitConfig {
    fn default() -> Self {
        Self { offender_factor: 1e3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Offender {
    pub xi: Vec<i64>,
    pub margin: f64,
    /// Bulk envelope value at this `|ξ|`.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DioFit {
    /// `Ĉ` in `margin ≳ Ĉ (1+|ξ|)^{-M̂}`.
    pub c_hat: f64,
    pub m_hat: f64,
    /// Sorted by how far below the envelope they lie, worst first.
    pub offenders: Vec<Offender>,
    /// Envelope exponents fitted on the two exponential margins.
    pub exp_exponents: (f64, f64),
    /// Both exponential exponents lie within 1 of `M̂`.
    pub lemma_consistent: bool,
    pub points: usize,
}

impl DioFit {
    pub fn worst_offender(&self) -> Option<&[i64]> {
        self.offenders.first().map(|o| o.xi.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DioOutcome {
    /// Every frequency is resonant; (DC) quantifies over nothing.
    Vacuous,
    Fit(DioFit),
}

/// Envelope exponent: least-squares slope of the running minimum of `ys`
/// (with `xs` ascending), negated and clamped at zero.
fn envelope_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mut run = Vec::with_capacity(ys.len());
    let mut lo = f64::INFINITY;
    for &y in ys {
        lo = lo.min(y);
        run.push(lo);
    }
    let (slope, intercept, _) = line_fit(xs, &run);
    ((-slope).max(0.0), intercept)
}

const MIN_SHELL: usize = 8;

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

pub fn dio_fit(margins: &[DioMargin], cfg: DioFitConfig) -> Result<DioOutcome> {
    let mut pts: Vec<&DioMargin> = margins.iter().filter(|m| !m.resonant).collect();
    if pts.is_empty() {
        return Ok(DioOutcome::Vacuous);
    }
    if pts.len() < 8 {
        return Err(Error::TooFewFrequencies { required: 8, found: pts.len() });
    }
    pts.sort_by(|a, b| a.norm.total_cmp(&b.norm).then_with(|| a.xi.cmp(&b.xi)));
    let xs: Vec<f64> = pts.iter().map(|m| math::ln1p(m.norm)).collect();
    let log_or_floor = |v: f64| if v > 0.0 { math::ln(v) } else { math::ln(f64::MIN_POSITIVE) };
    let ys: Vec<f64> = pts.iter().map(|m| log_or_floor(m.margin)).collect();
    let (m_hat, intercept) = envelope_fit(&xs, &ys);
    let y1: Vec<f64> = pts.iter().map(|m| log_or_floor(m.exp_margin1)).collect();
    let y2: Vec<f64> = pts.iter().map(|m| log_or_floor(m.exp_margin2)).collect();
    let e1 = envelope_fit(&xs, &y1).0;
    let e2 = envelope_fit(&xs, &y2).0;

    // bulk envelope through per-dyadic-shell medians
    let shell = |norm: f64| math::floor(math::ln1p(norm) / core::f64::consts::LN_2) as i64;
    let mut shells: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    while start < pts.len() {
        let s = shell(pts[start].norm);
        let mut end = start;
        while end < pts.len() && shell(pts[end].norm) == s {
            end += 1;
        }
        shells.push((start, end));
        start = end;
    }
    // sparse shells would let a single outlier set their median
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (a, b) in shells {
        match merged.last_mut() {
            Some(last) if last.1 - last.0 < MIN_SHELL || b - a < MIN_SHELL => last.1 = b,
            _ => merged.push((a, b)),
        }
    }
    if merged.len() >= 2 {
        let (a, b) = merged[merged.len() - 1];
        if b - a < MIN_SHELL {
            merged.pop();
            merged.last_mut().unwrap().1 = b;
        }
    }
    let (sx, sy): (Vec<f64>, Vec<f64>) =
        merged.iter().map(|&(a, b)| (median(&mut xs[a..b].to_vec()), median(&mut ys[a..b].to_vec()))).unzip();
    let (bs, bi) = if sx.len() >= 2 {
        let (s, i, _) = line_fit(&sx, &sy);
        (s, i)
    } else {
        (0.0, sy[0])
    };
    let cut = math::ln(cfg.offender_factor);
    let mut offenders: Vec<(f64, Offender)> = pts
        .iter()
        .zip(xs.iter().zip(&ys))
        .filter_map(|(m, (&x, &y))| {
            let env = bs * x + bi;
            (y < env - cut).then(|| {
                (env - y, Offender { xi: m.xi.clone(), margin: m.margin, envelope: math::exp(env) })
            })
        })
        .collect();
    offenders.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(DioOutcome::Fit(DioFit {
        c_hat: math::exp(intercept),
        m_hat,
        offenders: offenders.into_iter().map(|(_, o)| o).collect(),
        exp_exponents: (e1, e2),
        lemma_consistent: math::abs(e1 - m_hat) <= 1.0 && math::abs(e2 - m_hat) <= 1.0,
        points: pts.len(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Window length in grid steps, or `None` when `|ξ|^{-m} > 2π`.
pub fn window_steps(profile: &ModeProfile, order: f64) -> Result<Option<usize>> {
    let n = profile.len();
    if profile.norm < MIN_NORM {
        return Err(Error::FrequencyTooSmall { xi: profile.xi.clone() });
    }
    let delta = math::powf(profile.norm, -order);
    if delta > TAU {
        return Ok(None);
    }
    let h = TAU / n as f64;
    let w = math::ceil(delta / h - 1e-12) as usize;
    if w < 4 {
        return Err(Error::Resolution {
            xi: profile.xi.clone(),
            window: delta,
            nt: n,
            required_nt: resolving_nt(delta),
        });
    }
    Ok(Some(w))
}

/// Smallest even `n_t` whose step is at most a quarter of the window `delta`.
pub fn resolving_nt(delta: f64) -> usize {
    let required = math::ceil(4.0 * TAU / delta) as usize;
    required + required % 2
}

/// Smallest even `n_t` that resolves every non-vacuous window of the box
/// for order `m`; `None` when every window is vacuous.
pub fn required_nt(freq_box: &FrequencyBox, order: f64) -> Option<usize> {
    freq_box
        .freqs()
        .iter()
        .map(|xi| freq_norm(xi))
        .filter(|&r| r >= MIN_NORM)
        .map(|r| math::powf(r, -order))
        .filter(|&delta| delta <= TAU)
        .map(resolving_nt)
        .max()
}

fn lifted_b(profile: &ModeProfile) -> Vec<f64> {
    (0..2 * profile.len()).map(|i| profile.b_prim.lifted(i)).collect()
}

/// Per-node gaps `B(t) - min over windows of max B` for both signs, in
/// `B` units (not yet divided by `log|ξ|`).
struct AlphaGaps {
    plus: Vec<f64>,
    minus: Vec<f64>,
}

fn alpha_gaps(profile: &ModeProfile, w: usize) -> AlphaGaps {
    let n = profile.len();
    let l = lifted_b(profile);
    let win_max = sliding_max(&l, w);
    let m = sliding_min(&win_max, n - w);
    let plus = (0..n).map(|j| l[j] - m[j]).collect();
    let minus = (0..n).map(|j| l[j + n] - m[j]).collect();
    AlphaGaps { plus, minus }
}

fn max_gap(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |acc: f64, &x| acc.max(x))
}

/// Minimal `D ≥ 0` for which `(α)_D^{sign}` holds at `ξ` on the grid, and
/// whether the condition is vacuous (`|ξ|^{-m} > 2π`).
pub fn alpha_star(profile: &ModeProfile, sign: Sign, order: f64) -> Result<(f64, bool)> {
    let (p, m, vac) = alpha_pair(profile, order)?;
    Ok((if sign == Sign::Plus { p } else { m }, vac))
}

/// `(D⁺, D⁻, vacuous)`.
pub fn alpha_pair(profile: &ModeProfile, order: f64) -> Result<(f64, f64, bool)> {
    let Some(w) = window_steps(profile, order)? else {
        return Ok((0.0, 0.0, true));
    };
    let g = alpha_gaps(profile, w);
    let ln = math::ln(profile.norm);
    Ok((max_gap(&g.plus) / ln, max_gap(&g.minus) / ln, false))
}

/// A failing `(α)` configuration: the base point and a window of `w` steps
/// whose every node lies more than `gap` below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaWitness {
    pub sign: Sign,
    /// Lifted index of the base point (`j` for `+`, `j + n` for `-`).
    pub t: usize,
    /// First lifted node of the window.
    pub window_start: usize,
    pub w: usize,
    /// `B(t) - max_window B`.
    pub gap: f64,
}

/// The node and window realizing the largest `(α)^{sign}` gap, if positive.
pub fn alpha_witness(profile: &ModeProfile, sign: Sign, order: f64) -> Result<Option<AlphaWitness>> {
    let Some(w) = window_steps(profile, order)? else {
        return Ok(None);
    };
    let n = profile.len();
    let g = alpha_gaps(profile, w);
    let gaps = if sign == Sign::Plus { &g.plus } else { &g.minus };
    let mut j = 0;
    for (i, &v) in gaps.iter().enumerate() {
        if v > gaps[j] {
            j = i;
        }
    }
    if gaps[j] <= 0.0 {
        return Ok(None);
    }
    let l = lifted_b(profile);
    let win_max = sliding_max(&l, w);
    let mut tau = j;
    for k in j..=j + n - w {
        if win_max[k] < win_max[tau] {
            tau = k;
        }
    }
    let t = if sign == Sign::Plus { j } else { j + n };
    Ok(Some(AlphaWitness { sign, t, window_start: tau, w, gap: l[t] - win_max[tau] }))
}

/// Per-node `(β)` gaps on the two arcs, indexed by lifted `j' ∈ (p, p+n)`.
struct BetaGaps {
    p: usize,
    w: usize,
    l: Vec<f64>,
    win_max: Vec<f64>,
    // (gap on [t, t_ξ], gap on [t_ξ, t]); zero where the arc is too short
    gaps: Vec<(f64, f64)>,
}

fn beta_gaps(profile: &ModeProfile, w: usize) -> Result<BetaGaps> {
    let p = profile.t_max.ok_or_else(|| Error::NotResonant { xi: profile.xi.clone() })?;
    let n = profile.len();
    let l = lifted_b(profile);
    let win_max = sliding_max(&l, w);
    let hi = p + n - w;
    let mut suffix = vec![f64::INFINITY; n + 1];
    for tau in (p..=hi).rev() {
        suffix[tau - p] = win_max[tau].min(suffix[tau - p + 1]);
    }
    let mut prefix = vec![f64::INFINITY; n];
    let mut run = f64::INFINITY;
    for tau in p..=hi {
        run = run.min(win_max[tau]);
        prefix[tau - p] = run;
    }
    let gaps = (p + 1..p + n)
        .map(|j| {
            let a = if j <= hi { (l[j] - suffix[j - p]).max(0.0) } else { 0.0 };
            let b = if j >= p + w { (l[j] - prefix[j - w - p]).max(0.0) } else { 0.0 };
            (a, b)
        })
        .collect();
    Ok(BetaGaps { p, w, l, win_max, gaps })
}

/// Minimal `D ≥ 0` for which `(β)_D` holds at a resonant `ξ` on the grid.
/// Returns `(D, vacuous)`.
pub fn beta_star(profile: &ModeProfile, order: f64) -> Result<(f64, bool)> {
    if !profile.resonant {
        return Err(Error::NotResonant { xi: profile.xi.clone() });
    }
    let Some(w) = window_steps(profile, order)? else {
        return Ok((0.0, true));
    };
    let g = beta_gaps(profile, w)?;
    let best = g.gaps.iter().fold(0.0f64, |acc, &(a, b)| acc.max(a.min(b)));
    Ok((best / math::ln(profile.norm), false))
}

/// A failing `(β)` configuration at lifted node `t ∈ (p, p+n)`: windows
/// of `w` steps on both arcs, each lying more than the gap below `B(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaWitness {
    /// Node of the maximum of `B`.
    pub p: usize,
    pub t: usize,
    pub w: usize,
    /// Window start on the arc from `t` to `p + n`.
    pub window_a: usize,
    /// Window start on the arc from `p` to `t`.
    pub window_b: usize,
    pub gap: f64,
}

pub fn beta_witness(profile: &ModeProfile, order: f64) -> Result<Option<BetaWitness>> {
    if !profile.resonant {
        return Err(Error::NotResonant { xi: profile.xi.clone() });
    }
    let Some(w) = window_steps(profile, order)? else {
        return Ok(None);
    };
    let g = beta_gaps(profile, w)?;
    let n = profile.len();
    let mut best = 0;
    for (i, &(a, b)) in g.gaps.iter().enumerate() {
        let (ba, bb) = g.gaps[best];
        if a.min(b) > ba.min(bb) {
            best = i;
        }
    }
    let (a, b) = g.gaps[best];
    if a.min(b) <= 0.0 {
        return Ok(None);
    }
    let t = g.p + 1 + best;
    let argmin = |lo: usize, hi: usize| {
        let mut k = lo;
        for tau in lo..=hi {
            if g.win_max[tau] < g.win_max[k] {
                k = tau;
            }
        }
        k
    };
    let window_a = argmin(t, g.p + n - g.w);
    let window_b = argmin(g.p, t - g.w);
    let gap = (g.l[t] - g.win_max[window_a]).min(g.l[t] - g.win_max[window_b]);
    Ok(Some(BetaWitness { p: g.p, t, w: g.w, window_a, window_b, gap }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationConstants {
    pub xi: Vec<i64>,
    pub norm: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    /// Present iff `ξ` is resonant.
    pub d_beta: Option<f64>,
    pub vacuous: bool,
    /// `|ξ| < 2`: the constants are undefined and reported as zero.
    pub below_floor: bool,
}

impl OscillationConstants {
    /// The constant that matters for the verdict: `min(D⁺, D⁻)` off `𝒵`,
    /// `D_β` on it.
    pub fn governing(&self) -> f64 {
        match self.d_beta {
            Some(d) => d,
            None => self.d_plus.min(self.d_minus),
        }
    }
}

pub fn oscillation_constants(profile: &ModeProfile, order: f64) -> Result<OscillationConstants> {
    let mut out = OscillationConstants {
        xi: profile.xi.clone(),
        norm: profile.norm,
        d_plus: 0.0,
        d_minus: 0.0,
        d_beta: profile.resonant.then_some(0.0),
        vacuous: false,
        below_floor: profile.norm < MIN_NORM,
    };
    if out.below_floor {
        return Ok(out);
    }
    let (p, m, vac) = alpha_pair(profile, order)?;
    out.d_plus = p;
    out.d_minus = m;
    out.vacuous = vac;
    if profile.resonant {
        out.d_beta = Some(beta_star(profile, order)?.0);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRow {
    pub margin: DioMargin,
    pub constants: OscillationConstants,
}

/// Margins and constants for every profile, in input order.
pub fn condition_table(profiles: &[ModeProfile], order: f64) -> Result<Vec<ConditionRow>> {
    map_indexed(profiles.len(), |i| {
        let p = &profiles[i];
        Ok(ConditionRow { margin: dio_margin(p), constants: oscillation_constants(p, order)? })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateConfig {
    pub d_floor: f64,
    /// Largest envelope slope (against `log|ξ|`) still read as bounded.
    pub slope_tol: f64,
    pub dio: DioFitConfig,
}

impl Default for AggregateConfig {
    fn default() -> Self {
        Self { d_floor: 2.0, slope_tol: 0.05, dio: DioFitConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DioStatus {
    Vacuous,
    /// Fewer than 8 non-resonant frequencies; not assessable, treated as clean.
    Insufficient { found: usize },
    Fitted(DioFit),
}

impl DioStatus {
    pub fn is_clean(&self) -> bool {
        match self {
            DioStatus::Fitted(f) => f.offenders.is_empty(),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub cutoff: f64,
    pub dio: DioStatus,
    /// `sup` of the governing constants over `|ξ| ≥ D_floor`.
    pub sup_d: f64,
    pub sup_d_at: Option<Vec<i64>>,
    /// Slope of the running-max envelope of the governing constants
    /// against `log|ξ|`, fitted on the upper half of the `log|ξ|` range.
    pub growth_slope: f64,
    pub bounded: bool,
    pub solvable_at_cutoff: bool,
    pub table: Vec<ConditionRow>,
}

pub fn aggregate(table: Vec<ConditionRow>, cutoff: f64, cfg: AggregateConfig) -> Result<Verdict> {
    let margins: Vec<DioMargin> = table.iter().map(|r| r.margin.clone()).collect();
    let dio = match dio_fit(&margins, cfg.dio) {
        Ok(DioOutcome::Vacuous) => DioStatus::Vacuous,
        Ok(DioOutcome::Fit(f)) => DioStatus::Fitted(f),
        Err(Error::TooFewFrequencies { found, .. }) => DioStatus::Insufficient { found },
        Err(e) => return Err(e),
    };
    let floor = cfg.d_floor.max(MIN_NORM);
    let mut seq: Vec<(f64, f64, &[i64])> = table
        .iter()
        .filter(|r| r.constants.norm >= floor)
        .map(|r| (r.constants.norm, r.constants.governing(), r.constants.xi.as_slice()))
        .collect();
    seq.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut sup_d = 0.0;
    let mut sup_d_at = None;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut i = 0;
    while i < seq.len() {
        let norm = seq[i].0;
        while i < seq.len() && seq[i].0 == norm {
            if seq[i].1 > sup_d || sup_d_at.is_none() {
                sup_d = seq[i].1.max(sup_d);
                sup_d_at = Some(seq[i].2.to_vec());
            }
            i += 1;
        }
        xs.push(math::ln(norm));
        ys.push(sup_d);
    }
    // upper half of the log|ξ| range: a sup attained early is not growth
    let mid = match (xs.first(), xs.last()) {
        (Some(a), Some(b)) => 0.5 * (a + b),
        _ => 0.0,
    };
    let tail = xs.iter().position(|&x| x >= mid).unwrap_or(0);
    let tail = if xs.len() - tail >= 2 { tail } else { 0 };
    let growth_slope = if xs.len() >= 2 { line_fit(&xs[tail..], &ys[tail..]).0 } else { 0.0 };
    let bounded = sup_d.is_finite() && growth_slope <= cfg.slope_tol;
    let solvable_at_cutoff = dio.is_clean() && bounded;
    Ok(Verdict { cutoff, dio, sup_d, sup_d_at, growth_slope, bounded, solvable_at_cutoff, table })
}
