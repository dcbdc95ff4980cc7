//! Right-hand sides witnessing non-solvability: each is a partial sum
//! `f = Σ_k f̂(t, ξ_k) e^{ixξ_k}` built so that the corresponding solution
//! modes stay large while `f̂` decays, and the per-mode bounds can be
//! measured directly.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::conditions::{alpha_witness, beta_witness, dio_margin, Sign};
use crate::error::{Error, Result};
use crate::logcomplex::ScaledSum;
use crate::math::{self, TAU};
use crate::par::map_indexed;
use crate::solver::{solve_mode_nonresonant, SolveOptions};
use crate::spectral::{decay_fit, CircleGrid, DecayFit, FourierField, FrequencyBox};
use crate::symbol::ModeProfile;

pub const DEFAULT_PLATEAU: f64 = 0.6;

/// `ψ(x) = exp(1 - 1/(1 - x²))` for `|x| < 1`, written in terms of
/// `1 - x² = (1 - x)(1 + x)` to keep precision near the ends.
fn taper(one_minus_x_sq: f64) -> f64 {
    if one_minus_x_sq <= 0.0 {
        0.0
    } else {
        math::exp(1.0 - 1.0 / one_minus_x_sq)
    }
}

/// Smooth step from 0 at `y = 0` to 1 at `y = 1`, flat to all orders at
/// both ends, built from the exponential taper.
fn smooth_step(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let rise = taper(y * (2.0 - y)); // ψ(1 - y)
    let fall = taper((1.0 - y) * (1.0 + y)); // ψ(y)
    rise / (rise + fall)
}

/// A bump `0 ≤ φ ≤ 1` supported in the open interval `(start, end)` of the
/// universal cover, equal to 1 on the central `plateau` fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub start: f64,
    pub end: f64,
    pub plateau: f64,
}

impl BumpSpec {
    pub fn new(start: f64, end: f64, plateau: f64) -> Result<Self> {
        if !(start < end) || end - start > TAU || !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidArgument(format!("bump interval ({start}, {end}) is not a proper arc")));
        }
        if !(0.0..1.0).contains(&plateau) {
            return Err(Error::InvalidArgument(format!("plateau fraction {plateau} outside [0, 1)")));
        }
        Ok(Self { start, end, plateau })
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    /// `φ(start + x)`.
    pub fn at_offset(&self, x: f64) -> f64 {
        let len = self.len();
        if x <= 0.0 || x >= len {
            return 0.0;
        }
        let ramp = 0.5 * (1.0 - self.plateau) * len;
        smooth_step(x / ramp).min(smooth_step((len - x) / ramp))
    }

    /// `φ(t)` for `t` on the universal cover (no wrapping).
    pub fn eval(&self, t: f64) -> f64 {
        self.at_offset(t - self.start)
    }

    /// Periodized samples on the grid.
    pub fn samples(&self, grid: &CircleGrid) -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|&t| {
                let shift = math::ceil((self.start - t) / TAU);
                self.eval(t + shift * TAU)
            })
            .collect()
    }
}

/// A bump on `(start, end)` sampled on the grid. The interval must span more
/// than four grid steps.
pub fn bump(grid: &CircleGrid, start: f64, end: f64, plateau: f64) -> Result<(BumpSpec, Vec<f64>)> {
    let spec = BumpSpec::new(start, end, plateau)?;
    let h = grid.step();
    if spec.len() <= 4.0 * h {
        let mut required = math::ceil(4.0 * TAU / spec.len()) as usize + 1;
        required += required % 2;
        return Err(Error::Resolution { xi: Vec::new(), window: spec.len(), nt: grid.len(), required_nt: required });
    }
    let s = spec.samples(grid);
    Ok((spec, s))
}

/// Bump supported on the open node interval `(first, last)` of the lifted
/// grid, sampled by node offset so equal-length bumps have identical samples.
fn node_bump(h: f64, first: usize, last: usize, plateau: f64) -> (BumpSpec, Vec<f64>) {
    let spec = BumpSpec { start: first as f64 * h, end: last as f64 * h, plateau };
    let vals = (0..=last - first).map(|i| spec.at_offset(i as f64 * h)).collect();
    (spec, vals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForgeTag {
    Dc,
    Alpha,
    Beta,
}

impl ForgeTag {
    pub fn name(self) -> &'static str {
        match self {
            ForgeTag::Dc => "dc",
            ForgeTag::Alpha => "alpha",
            ForgeTag::Beta => "beta",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForgedMode {
    /// Position in the sequence, starting at 1.
    pub k: usize,
    pub xi: Vec<i64>,
    /// Node of the evaluation point `t_k`.
    pub t_k: usize,
    /// Bump supports: one for dc/alpha, `[φ⁺, φ⁻]` for beta.
    pub bumps: Vec<BumpSpec>,
    /// Multiplier in front of the kernel: `1 - e^{-2πi c₀}` or
    /// `e^{2πi c₀} - 1` for dc, 1 otherwise.
    pub prefactor: Complex64,
    /// `∫φ` (dc, alpha) or `∫φ⁻` (beta) on the grid.
    pub bump_integral: f64,
    /// `B(t_k) - max B` over the support; zero for dc.
    pub gap: f64,
    /// `sup_t |f̂(t, ξ_k)|`.
    pub rhs_sup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForgedRHS {
    pub tag: ForgeTag,
    pub order: f64,
    pub field: FourierField,
    pub modes: Vec<ForgedMode>,
    /// `[α, β]` for dc.
    pub interval: Option<(f64, f64)>,
    pub decay: Option<DecayFit>,
    /// Fitted decay exponent of `f` at least the configured floor.
    pub smooth: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForgeOptions {
    pub plateau: f64,
    pub decay_floor: f64,
}

impl Default for ForgeOptions {
    fn default() -> Self {
        Self { plateau: DEFAULT_PLATEAU, decay_floor: 4.0 }
    }
}

/// Which frequencies carry the terms of the partial sum.
#[derive(Debug, Clone, PartialEq)]
pub enum Sequence {
    /// `ξ_k` for `k = 1, 2, …` in the given order.
    Explicit(Vec<Vec<i64>>),
    /// Up to this many terms chosen from the box: for each `k`, the
    /// smallest unused `|ξ| ≥ max(k, 2)` with a witness at level `k`.
    Auto(usize),
}

/// Grid, box, per-frequency profiles (box order) and the symbol order.
#[derive(Debug, Clone, Copy)]
pub struct ForgeSetup<'a> {
    pub grid: &'a CircleGrid,
    pub freq_box: &'a FrequencyBox,
    pub profiles: &'a [ModeProfile],
    pub order: f64,
}

impl ForgeSetup<'_> {
    fn profile(&self, xi: &[i64]) -> Result<&ModeProfile> {
        let idx = self.freq_box.index_of(xi).ok_or_else(|| Error::MissingFrequency { xi: xi.to_vec() })?;
        Ok(&self.profiles[idx])
    }

    fn check(&self) -> Result<()> {
        if self.profiles.len() != self.freq_box.len() {
            return Err(Error::ShapeMismatch {
                context: "profiles per frequency",
                expected: self.freq_box.len(),
                found: self.profiles.len(),
            });
        }
        Ok(())
    }
}

fn check_distinct(seq: &[Vec<i64>]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for xi in seq {
        if !seen.insert(xi.clone()) {
            return Err(Error::SequenceRepeats { xi: xi.clone() });
        }
    }
    Ok(())
}

/// `e^{i(C(from) - C(to))}` at lifted nodes, as `(phase factor, log modulus)`.
fn kernel_between(p: &ModeProfile, from: usize, to: usize) -> (Complex64, f64) {
    let da = p.a_prim.lifted(from) - p.a_prim.lifted(to);
    let db = p.b_prim.lifted(from) - p.b_prim.lifted(to);
    (Complex64::new(math::cos(da), math::sin(da)), -db)
}

fn assemble(
    setup: &ForgeSetup<'_>,
    tag: ForgeTag,
    modes: Vec<ForgedMode>,
    slices: Vec<(usize, Vec<Complex64>)>,
    interval: Option<(f64, f64)>,
    opts: ForgeOptions,
) -> Result<ForgedRHS> {
    let mut field = FourierField::zeros(setup.grid, setup.freq_box);
    for (idx, s) in slices {
        field.slice_mut(idx).copy_from_slice(&s);
    }
    field.validate()?;
    let decay = decay_fit(&field, 0).ok();
    let smooth = decay.is_some_and(|d| d.exponent >= opts.decay_floor);
    Ok(ForgedRHS { tag, order: setup.order, field, modes, interval, decay, smooth })
}

/// Non-solvability witness for a violated diophantine condition.
///
/// `t_k` is the maximizer of `B(·, ξ_k)` on `[0, 2π)`. The bump lives on
/// `[α, β]`, which must avoid every `t_k` from one side; when `interval`
/// is `None` it is the middle 80% of the longer free side.
pub fn forge_dc(
    setup: &ForgeSetup<'_>,
    sequence: &[Vec<i64>],
    interval: Option<(f64, f64)>,
    opts: ForgeOptions,
) -> Result<ForgedRHS> {
    setup.check()?;
    if sequence.is_empty() {
        return Err(Error::NoWitness { tag: "DC" });
    }
    check_distinct(sequence)?;
    let grid = setup.grid;
    let n = grid.len();
    let h = grid.step();
    let mut chosen = Vec::with_capacity(sequence.len());
    for xi in sequence {
        let p = setup.profile(xi)?;
        if p.resonant {
            return Err(Error::Resonant { xi: xi.clone() });
        }
        chosen.push((setup.freq_box.index_of(xi).unwrap_or(0), p, p.b_prim.argmax()));
    }
    let lo = chosen.iter().map(|c| c.2).min().unwrap_or(0);
    let hi = chosen.iter().map(|c| c.2).max().unwrap_or(0);
    let (alpha, beta) = match interval {
        Some(iv) => iv,
        None => {
            let left = grid.node(lo);
            let right = TAU - grid.node(hi);
            let (a, b) = if left >= right { (0.0, left) } else { (grid.node(hi), TAU) };
            let pad = 0.1 * (b - a);
            (a + pad, b - pad)
        }
    };
    let (spec, phi) = bump(grid, alpha, beta, opts.plateau)?;
    if alpha < 0.0 || beta > TAU {
        return Err(Error::InvalidArgument(format!("interval [{alpha}, {beta}] must lie in [0, 2π]")));
    }
    let t_lo = grid.node(lo);
    let t_hi = grid.node(hi);
    let after = t_lo > beta; // every t_k > β
    let before = t_hi < alpha; // every t_k < α
    if !after && !before {
        return Err(Error::InvalidArgument(format!(
            "the maximizers t_k span [{t_lo:.4}, {t_hi:.4}] and are not all on one side of [{alpha}, {beta}]"
        )));
    }
    let integral = h * phi.iter().sum::<f64>();
    let built: Vec<(ForgedMode, (usize, Vec<Complex64>))> = map_indexed(chosen.len(), |k| {
        let (idx, p, tk) = chosen[k];
        let em1 = expm1_2pi_i(p.a0, p.b0);
        let prefactor = if after {
            // 1 - e^{-2πi c₀} = -(e^{-2πi c₀} - 1)
            -expm1_2pi_i(-p.a0, -p.b0)
        } else {
            em1
        };
        // f̂ = prefactor · e^{-i(C(t) - C(t_k))} φ(t) on [0, 2π)
        let slice: Vec<Complex64> = (0..n)
            .map(|j| {
                if phi[j] == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let (ph, lm) = kernel_between(p, tk, j);
                prefactor * ph * math::exp(lm) * phi[j]
            })
            .collect();
        let rhs_sup = slice.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mode = ForgedMode {
            k: k + 1,
            xi: p.xi.clone(),
            t_k: tk,
            bumps: vec![spec],
            prefactor,
            bump_integral: integral,
            gap: 0.0,
            rhs_sup,
        };
        (mode, (idx, slice))
    });
    let (modes, slices) = built.into_iter().unzip();
    assemble(setup, ForgeTag::Dc, modes, slices, Some((alpha, beta)), opts)
}

/// `e^{2πi x} e^{-2πy} - 1`, accurate near zero.
fn expm1_2pi_i(x: f64, y: f64) -> Complex64 {
    let x = x - math::round(x);
    let r = math::expm1(-TAU * y);
    let s = math::sin(math::PI * x);
    Complex64::new(r * math::cos(TAU * x) - 2.0 * s * s, (1.0 + r) * math::sin(TAU * x))
}

/// Grows `[first, last]` while neighbours stay below `thr`, within `(lo, hi)`.
fn extend_run(l: impl Fn(usize) -> f64, first: usize, last: usize, lo: usize, hi: usize, thr: f64) -> (usize, usize) {
    let (mut a, mut b) = (first, last);
    while a > lo + 1 && l(a - 1) < thr {
        a -= 1;
    }
    while b + 1 < hi && l(b + 1) < thr {
        b += 1;
    }
    (a, b)
}

struct AlphaPick {
    k: usize,
    idx: usize,
    sign: Sign,
    t: usize,
    run: (usize, usize),
    gap: f64,
}

fn alpha_pick(setup: &ForgeSetup<'_>, idx: usize, k: usize) -> Result<Option<AlphaPick>> {
    let p = &setup.profiles[idx];
    if p.resonant {
        return Err(Error::Resonant { xi: p.xi.clone() });
    }
    let sign = if p.b0 >= 0.0 { Sign::Plus } else { Sign::Minus };
    let Some(w) = alpha_witness(p, sign, setup.order)? else {
        return Ok(None);
    };
    let level = k as f64 * math::ln(p.norm);
    if !(w.gap > level) {
        return Ok(None);
    }
    let n = p.len();
    let thr = p.b_prim.lifted(w.t) - level;
    let (lo, hi) = match sign {
        Sign::Plus => (w.t, w.t + n),
        Sign::Minus => (w.t - n, w.t),
    };
    let run = extend_run(|i| p.b_prim.lifted(i), w.window_start, w.window_start + w.w, lo, hi, thr);
    let gap = p.b_prim.lifted(w.t) - (run.0..=run.1).map(|i| p.b_prim.lifted(i)).fold(f64::NEG_INFINITY, f64::max);
    Ok(Some(AlphaPick { k, idx, sign, t: w.t, run, gap }))
}

fn auto_candidates(setup: &ForgeSetup<'_>, resonant: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..setup.profiles.len())
        .filter(|&i| setup.profiles[i].resonant == resonant && setup.profiles[i].norm >= 2.0)
        .collect();
    idx.sort_by(|&a, &b| setup.profiles[a].norm.total_cmp(&setup.profiles[b].norm).then(a.cmp(&b)));
    idx
}

fn pick_sequence<T>(
    setup: &ForgeSetup<'_>,
    sequence: &Sequence,
    resonant: bool,
    tag: &'static str,
    pick: impl Fn(usize, usize) -> Result<Option<T>>,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    match sequence {
        Sequence::Explicit(seq) => {
            check_distinct(seq)?;
            for (k, xi) in seq.iter().enumerate() {
                let idx = setup.freq_box.index_of(xi).ok_or_else(|| Error::MissingFrequency { xi: xi.clone() })?;
                match pick(idx, k + 1)? {
                    Some(t) => out.push(t),
                    None => return Err(Error::NoWitness { tag }),
                }
            }
        }
        Sequence::Auto(terms) => {
            let cands = auto_candidates(setup, resonant);
            let mut used = BTreeSet::new();
            for k in 1..=*terms {
                let mut found = None;
                for &idx in &cands {
                    if used.contains(&idx) || setup.profiles[idx].norm < k as f64 {
                        continue;
                    }
                    if let Some(t) = pick(idx, k)? {
                        found = Some((idx, t));
                        break;
                    }
                }
                match found {
                    Some((idx, t)) => {
                        used.insert(idx);
                        out.push(t);
                    }
                    None => break,
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoWitness { tag });
    }
    Ok(out)
}

/// Non-solvability witness for failing `(α)`: at `ξ_k`, a point `t_k` and
/// an interval `I_k` of length at least `|ξ_k|^{-m}` on the side given by
/// the sign of `b₀`, with `B(t_k) - B(s) > k log|ξ_k|` on `I_k`.
pub fn forge_alpha(setup: &ForgeSetup<'_>, sequence: &Sequence, opts: ForgeOptions) -> Result<ForgedRHS> {
    setup.check()?;
    let picks = pick_sequence(setup, sequence, false, "alpha", |idx, k| alpha_pick(setup, idx, k))?;
    let n = setup.grid.len();
    let h = setup.grid.step();
    let built: Vec<(ForgedMode, (usize, Vec<Complex64>))> = map_indexed(picks.len(), |i| {
        let pk = &picks[i];
        let p = &setup.profiles[pk.idx];
        let (spec, vals) = node_bump(h, pk.run.0, pk.run.1, opts.plateau);
        let mut slice = vec![Complex64::new(0.0, 0.0); n];
        for (off, &phi) in vals.iter().enumerate() {
            if phi == 0.0 {
                continue;
            }
            let node = pk.run.0 + off;
            let (ph, lm) = kernel_between(p, pk.t, node);
            slice[node % n] = ph * math::exp(lm) * phi;
        }
        let rhs_sup = slice.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mode = ForgedMode {
            k: pk.k,
            xi: p.xi.clone(),
            t_k: pk.t % n,
            bumps: vec![spec],
            prefactor: Complex64::new(1.0, 0.0),
            bump_integral: h * vals.iter().sum::<f64>(),
            gap: pk.gap,
            rhs_sup,
        };
        let _ = pk.sign;
        (mode, (pk.idx, slice))
    });
    let (modes, slices) = built.into_iter().unzip();
    assemble(setup, ForgeTag::Alpha, modes, slices, None, opts)
}

struct BetaPick {
    k: usize,
    idx: usize,
    p: usize,
    t: usize,
    plus: (usize, usize),
    minus: (usize, usize),
    gap: f64,
}

fn trim_to(run: (usize, usize), window: usize, len: usize) -> (usize, usize) {
    let start = window.min(run.1 - len).max(run.0);
    (start, start + len)
}

fn beta_pick(setup: &ForgeSetup<'_>, idx: usize, k: usize) -> Result<Option<BetaPick>> {
    let p = &setup.profiles[idx];
    let Some(w) = beta_witness(p, setup.order)? else {
        return Ok(None);
    };
    let level = k as f64 * math::ln(p.norm);
    if !(w.gap > level) {
        return Ok(None);
    }
    let n = p.len();
    let l = |i: usize| p.b_prim.lifted(i);
    let thr = l(w.t) - level;
    // I⁺ on the arc from t_k to t_ξ, I⁻ on the arc from t_ξ to t_k
    let plus = extend_run(l, w.window_a, w.window_a + w.w, w.t, w.p + n, thr);
    let minus = extend_run(l, w.window_b, w.window_b + w.w, w.p, w.t, thr);
    let len = (plus.1 - plus.0).min(minus.1 - minus.0);
    let plus = trim_to(plus, w.window_a, len);
    let minus = trim_to(minus, w.window_b, len);
    let sup = (plus.0..=plus.1).chain(minus.0..=minus.1).map(l).fold(f64::NEG_INFINITY, f64::max);
    Ok(Some(BetaPick { k, idx, p: w.p, t: w.t, plus, minus, gap: l(w.t) - sup }))
}

/// Non-solvability witness for failing `(β)` at resonant `ξ_k`: bumps
/// `φ⁺` on `[t_k, t_ξ]` and `φ⁻` on `[t_ξ, t_k]` with equal integrals, so
/// the compatibility integral of `f̂ = e^{i(C(t_k) - C(t))}(φ⁺ - φ⁻)` vanishes.
pub fn forge_beta(setup: &ForgeSetup<'_>, sequence: &Sequence, opts: ForgeOptions) -> Result<ForgedRHS> {
    setup.check()?;
    let picks = pick_sequence(setup, sequence, true, "beta", |idx, k| {
        if !setup.profiles[idx].resonant {
            return Err(Error::NotResonant { xi: setup.profiles[idx].xi.clone() });
        }
        beta_pick(setup, idx, k)
    })?;
    let n = setup.grid.len();
    let h = setup.grid.step();
    let built: Vec<(ForgedMode, (usize, Vec<Complex64>))> = map_indexed(picks.len(), |i| {
        let pk = &picks[i];
        let p = &setup.profiles[pk.idx];
        let (spec_p, vals_p) = node_bump(h, pk.plus.0, pk.plus.1, opts.plateau);
        let (spec_m, vals_m) = node_bump(h, pk.minus.0, pk.minus.1, opts.plateau);
        let mut slice = vec![Complex64::new(0.0, 0.0); n];
        let mut put = |first: usize, vals: &[f64], sign: f64| {
            for (off, &phi) in vals.iter().enumerate() {
                if phi == 0.0 {
                    continue;
                }
                let node = first + off;
                let (ph, lm) = kernel_between(p, pk.t, node);
                slice[node % n] = ph * math::exp(lm) * (sign * phi);
            }
        };
        put(pk.plus.0, &vals_p, 1.0);
        put(pk.minus.0, &vals_m, -1.0);
        let rhs_sup = slice.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let _ = pk.p;
        let mode = ForgedMode {
            k: pk.k,
            xi: p.xi.clone(),
            t_k: pk.t % n,
            bumps: vec![spec_p, spec_m],
            prefactor: Complex64::new(1.0, 0.0),
            bump_integral: h * vals_m.iter().sum::<f64>(),
            gap: pk.gap,
            rhs_sup,
        };
        (mode, (pk.idx, slice))
    });
    let (modes, slices) = built.into_iter().unzip();
    assemble(setup, ForgeTag::Beta, modes, slices, None, opts)
}

/// Measured per-mode quantity against the proof's bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub k: usize,
    pub xi: Vec<i64>,
    /// dc: `|û(t_k)|`; alpha: `|û(t_k)|`; beta: `|∫_{[t_ξ, t_k]} e^{i(C(s)-C(t_k))} f̂(s) ds|`.
    pub measured: f64,
    /// dc: `∫φ` (an identity); alpha: `|ξ_k|^{-m}/4`; beta: `|ξ_k|^{-m}/2`.
    pub target: f64,
    pub holds: bool,
    /// alpha: `|e^{2πi c₀} - 1|` (`b₀ ≥ 0`) or `|1 - e^{-2πi c₀}|`, bounded by 2.
    pub divisor: Option<f64>,
    /// `|e^{-iC(t, ξ_k)}|` on the support with `C` based at `t_k`; at most 1 for dc.
    pub kernel_sup: Option<f64>,
    pub margin: f64,
}

/// Tolerance of the dc identity `|û(t_k)| = ∫φ`.
pub const DC_IDENTITY_TOL: f64 = 1e-8;

/// Solves (dc, alpha) or integrates (beta) each forged mode and compares
/// with the bound the construction guarantees.
pub fn measure_bounds(setup: &ForgeSetup<'_>, forged: &ForgedRHS, solve: SolveOptions) -> Result<Vec<BoundCheck>> {
    setup.check()?;
    let grid = setup.grid;
    let n = grid.len();
    let h = grid.step();
    map_indexed(forged.modes.len(), |i| {
        let m = &forged.modes[i];
        let p = setup.profile(&m.xi)?;
        let f = forged
            .field
            .slice_at(&m.xi)
            .ok_or_else(|| Error::MissingFrequency { xi: m.xi.clone() })?;
        let delta = math::powf(p.norm, -forged.order);
        let margin = dio_margin(p).margin;
        let check = match forged.tag {
            ForgeTag::Dc => {
                let sol = solve_mode_nonresonant(grid, p, f, solve)?;
                let measured = sol.u[m.t_k].norm();
                let kernel_sup = (0..n)
                    .filter(|&j| f[j].norm() > 0.0)
                    .map(|j| math::exp(kernel_between(p, m.t_k, j).1))
                    .fold(0.0, f64::max);
                BoundCheck {
                    k: m.k,
                    xi: m.xi.clone(),
                    measured,
                    target: m.bump_integral,
                    holds: math::abs(measured - m.bump_integral) <= DC_IDENTITY_TOL,
                    divisor: sol.divisor,
                    kernel_sup: Some(kernel_sup),
                    margin,
                }
            }
            ForgeTag::Alpha => {
                let sol = solve_mode_nonresonant(grid, p, f, solve)?;
                let measured = sol.u[m.t_k].norm();
                let target = delta / 4.0;
                BoundCheck {
                    k: m.k,
                    xi: m.xi.clone(),
                    measured,
                    target,
                    holds: measured >= target && sol.divisor.is_some_and(|d| d <= 2.0),
                    divisor: sol.divisor,
                    kernel_sup: None,
                    margin,
                }
            }
            ForgeTag::Beta => {
                let pmax = p.t_max.ok_or_else(|| Error::NotResonant { xi: p.xi.clone() })?;
                // lifted position of t_k in (p, p + n)
                let t = if m.t_k > pmax { m.t_k } else { m.t_k + n };
                let mut s = ScaledSum::ZERO;
                for i in pmax..=t {
                    let w = if i == pmax || i == t { 0.5 * h } else { h };
                    let (ph, lm) = kernel_between(p, i, t);
                    s.add_term(ph * f[i % n] * w, lm);
                }
                let measured = s.value().map_or(f64::INFINITY, |v| v.norm());
                let target = delta / 2.0;
                BoundCheck {
                    k: m.k,
                    xi: m.xi.clone(),
                    measured,
                    target,
                    holds: measured >= target,
                    divisor: None,
                    kernel_sup: None,
                    margin,
                }
            }
        };
        Ok(check)
    })
    .into_iter()
    .collect()
}
