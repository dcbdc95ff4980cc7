//! Per-mode solution of `(D_t + c(t, ξ)) u = f` and the global solve.
//!
//! Non-resonant modes use the periodic solution
//! `u(t) = i/(e^{2πi c₀} - 1) ∫₀^{2π} e^{i(C(t+s) - C(t))} f(t+s) ds`
//! (forward form, `b₀ ≥ 0`) or its mirror
//! `u(t) = i/(1 - e^{-2πi c₀}) ∫₀^{2π} e^{i(C(t-s) - C(t))} f(t-s) ds`
//! (backward form, `b₀ < 0`). Resonant modes use the particular solution
//! vanishing at the maximizer `t_ξ` of `B`.
//!
//! Quadrature is the trapezoid rule on the grid with Euler–Maclaurin
//! endpoint corrections. The integrand derivatives are
//! `∂ᵏ(e^{iC} f) = e^{iC} w_k` with `w₀ = f`, `w_{k+1} = w_k' + i c w_k`,
//! so the corrections never form an exponential of `C`. All kernel sums are
//! carried in log-scaled form; a sample whose modulus would exceed
//! `e^{709}` is reported as saturated and stored as zero.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::logcomplex::{ScaledSum, OVERFLOW_GUARD};
use crate::math::{self, PI, TAU};
use crate::par::map_indexed;
use crate::spectral::{self, decay_fit, CircleGrid, DecayFit, FourierField};
use crate::symbol::ModeProfile;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `B_{2k} / (2k)!` for `k = 1..=10`.
const EM_COEFFS: [f64; 10] = [
    (1.0 / 6.0) / 2.0,
    (-1.0 / 30.0) / 24.0,
    (1.0 / 42.0) / 720.0,
    (-1.0 / 30.0) / 40_320.0,
    (5.0 / 66.0) / 3_628_800.0,
    (-691.0 / 2730.0) / 479_001_600.0,
    (7.0 / 6.0) / 87_178_291_200.0,
    (-3617.0 / 510.0) / 20_922_789_888_000.0,
    (43_867.0 / 798.0) / 6_402_373_705_728_000.0,
    (-174_611.0 / 330.0) / 2_432_902_008_176_640_000.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Largest relative compatibility integral accepted on resonant modes.
    pub compat_tol: f64,
    /// Divisors `|e^{±2πi c₀} - 1|` below this are flagged as small.
    pub small_divisor_floor: f64,
    /// Maximum number of Euler–Maclaurin correction terms.
    pub em_terms: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { compat_tol: 1e-10, small_divisor_floor: 1e-12, em_terms: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    NonresonantForward,
    NonresonantBackward,
    Resonant,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::NonresonantForward => "nonresonant-forward",
            Branch::NonresonantBackward => "nonresonant-backward",
            Branch::Resonant => "resonant",
        }
    }
}

/// Which equivalent non-resonant formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub xi: Vec<i64>,
    pub u: Vec<Complex64>,
    pub branch: Branch,
    pub saturated: bool,
    pub saturated_nodes: usize,
    /// Largest `log|u(t_j)|`, including saturated nodes.
    pub peak_log_mag: f64,
    /// Over non-saturated nodes.
    pub sup_norm: f64,
    /// `|e^{2πi c₀} - 1|` or `|1 - e^{-2πi c₀}|`; absent on resonant modes.
    pub divisor: Option<f64>,
    pub small_divisor: bool,
}

impl ModeSolution {
    fn from_sums(xi: &[i64], sums: &[ScaledSum], branch: Branch, divisor: Option<f64>, floor: f64) -> Self {
        let mut u = Vec::with_capacity(sums.len());
        let mut saturated_nodes = 0;
        let mut peak = f64::NEG_INFINITY;
        let mut sup: f64 = 0.0;
        for s in sums {
            let la = s.log_abs();
            peak = peak.max(la);
            if la > OVERFLOW_GUARD || !la.is_finite() && la != f64::NEG_INFINITY {
                saturated_nodes += 1;
                u.push(ZERO);
            } else {
                let v = s.value_shifted(0.0);
                sup = sup.max(v.norm());
                u.push(v);
            }
        }
        Self {
            xi: xi.to_vec(),
            u,
            branch,
            saturated: saturated_nodes > 0,
            saturated_nodes,
            peak_log_mag: peak,
            sup_norm: sup,
            divisor,
            small_divisor: divisor.is_some_and(|d| d < floor),
        }
    }
}

fn check_mode(grid: &CircleGrid, profile: &ModeProfile, f: &[Complex64]) -> Result<()> {
    if profile.len() != grid.len() {
        return Err(Error::ShapeMismatch { context: "mode profile", expected: grid.len(), found: profile.len() });
    }
    if f.len() != grid.len() {
        return Err(Error::ShapeMismatch { context: "mode right-hand side", expected: grid.len(), found: f.len() });
    }
    if !f.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite { context: "mode right-hand side" });
    }
    Ok(())
}

/// `e^{2πi x} e^{-2πy} - 1` for `x` reduced mod 1, accurate near zero.
fn expm1_2pi_i(x: f64, y: f64) -> Complex64 {
    let x = x - math::round(x);
    let r = math::expm1(-TAU * y);
    let s = math::sin(PI * x);
    Complex64::new(r * math::cos(TAU * x) - 2.0 * s * s, (1.0 + r) * math::sin(TAU * x))
}

/// `e^{iA}` and `-B` at a lifted node.
#[inline]
fn kernel(profile: &ModeProfile, i: usize) -> (Complex64, f64) {
    let a = profile.a_prim.lifted(i);
    (Complex64::new(math::cos(a), math::sin(a)), -profile.b_prim.lifted(i))
}

/// `Σ_k β_k h^{2k} w_{2k-1}`, truncated at its smallest term.
fn em_correction(grid: &CircleGrid, profile: &ModeProfile, f: &[Complex64], max_terms: usize) -> Vec<Complex64> {
    let n = grid.len();
    let h = grid.step();
    let c: Vec<Complex64> = (0..n).map(|j| profile.symbol_at(j)).collect();
    let mut out = vec![ZERO; n];
    let mut w = f.to_vec();
    let mut last = f64::INFINITY;
    let mut hk = 1.0;
    let sup = |v: &[Complex64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let step = |w: &mut Vec<Complex64>| {
        let mut d = w.clone();
        spectral::derivative_in_place(grid, &mut d, 1);
        for ((wj, dj), cj) in w.iter_mut().zip(&d).zip(&c) {
            *wj = dj + I * cj * *wj;
        }
    };
    for (k, beta) in EM_COEFFS.iter().enumerate().take(max_terms) {
        // w_{2k+1} from w_{2k-1} (or from w_0 for the first term)
        step(&mut w);
        if k > 0 {
            step(&mut w);
        }
        hk *= h * h;
        let size = math::abs(*beta) * hk * sup(&w);
        if !size.is_finite() || size >= last || size == 0.0 {
            break;
        }
        last = size;
        for (o, wj) in out.iter_mut().zip(&w) {
            *o += *wj * (beta * hk);
        }
    }
    out
}

/// One of the two equivalent non-resonant formulas.
pub fn solve_mode_nonresonant_form(
    grid: &CircleGrid,
    profile: &ModeProfile,
    f: &[Complex64],
    form: Form,
    opts: SolveOptions,
) -> Result<ModeSolution> {
    check_mode(grid, profile, f)?;
    if profile.resonant {
        return Err(Error::Resonant { xi: profile.xi.clone() });
    }
    let n = grid.len();
    let h = grid.step();
    let mut pre = vec![ScaledSum::ZERO; n + 1];
    for i in 0..n {
        let (ea, lb) = kernel(profile, i);
        let mut s = pre[i];
        s.add_term(f[i] * ea, lb);
        pre[i + 1] = s;
    }
    let mut suf = vec![ScaledSum::ZERO; n + 1];
    for i in (0..n).rev() {
        let (ea, lb) = kernel(profile, i);
        let mut s = suf[i + 1];
        s.add_term(f[i] * ea, lb);
        suf[i] = s;
    }
    // E = e^{2πi c₀} = e^{iθ} e^{-2πb₀}
    let theta = TAU * (profile.a0 - math::round(profile.a0));
    let e_phase = Complex64::new(math::cos(theta), math::sin(theta));
    let e_log = -TAU * profile.b0;
    let em1 = expm1_2pi_i(profile.a0, profile.b0);
    let corr = em_correction(grid, profile, f, opts.em_terms);
    let (branch, divisor) = match form {
        Form::Forward => (Branch::NonresonantForward, em1),
        // 1 - E^{-1} = -(e^{-2πi c₀} - 1)
        Form::Backward => (Branch::NonresonantBackward, -expm1_2pi_i(-profile.a0, -profile.b0)),
    };
    let pref = I * h / divisor;
    let sums: Vec<ScaledSum> = (0..n)
        .map(|j| {
            let (ea, lb) = kernel(profile, j);
            let (s, half) = match form {
                Form::Forward => (suf[j].plus(pre[j].times(e_phase, e_log)), 0.5),
                Form::Backward => (pre[j + 1].plus(suf[j + 1].times(e_phase.conj(), -e_log)), -0.5),
            };
            let mut u = s.times(pref * ea.conj(), -lb);
            u.add_term(I * h * half * f[j] - I * corr[j], 0.0);
            u
        })
        .collect();
    Ok(ModeSolution::from_sums(
        &profile.xi,
        &sums,
        branch,
        Some(divisor.norm()),
        opts.small_divisor_floor,
    ))
}

/// The non-resonant solution, forward form when `b₀ ≥ 0`, backward otherwise.
pub fn solve_mode_nonresonant(
    grid: &CircleGrid,
    profile: &ModeProfile,
    f: &[Complex64],
    opts: SolveOptions,
) -> Result<ModeSolution> {
    let form = if profile.b0 >= 0.0 { Form::Forward } else { Form::Backward };
    solve_mode_nonresonant_form(grid, profile, f, form, opts)
}

/// Resonant solutions vanishing at `t_ξ`: `(anticlockwise, clockwise)`
/// arc forms, without the compatibility check.
///
/// The anticlockwise form integrates over `[t_ξ, t]`, the clockwise form
/// over `[t, t_ξ]`; they differ by `i e^{-iC(t)} ∮ e^{iC} f`.
pub fn resonant_forms(
    grid: &CircleGrid,
    profile: &ModeProfile,
    f: &[Complex64],
    opts: SolveOptions,
) -> Result<(ModeSolution, ModeSolution)> {
    let (acw, cw) = resonant_sums(grid, profile, f, opts)?;
    Ok((
        ModeSolution::from_sums(&profile.xi, &acw, Branch::Resonant, None, 0.0),
        ModeSolution::from_sums(&profile.xi, &cw, Branch::Resonant, None, 0.0),
    ))
}

fn resonant_sums(
    grid: &CircleGrid,
    profile: &ModeProfile,
    f: &[Complex64],
    opts: SolveOptions,
) -> Result<(Vec<ScaledSum>, Vec<ScaledSum>)> {
    check_mode(grid, profile, f)?;
    let p = profile.t_max.ok_or_else(|| Error::NotResonant { xi: profile.xi.clone() })?;
    let n = grid.len();
    let h = grid.step();
    // lifted nodes p..=p+n
    let q: Vec<(Complex64, f64)> = (p..=p + n)
        .map(|i| {
            let (ea, lb) = kernel(profile, i);
            (f[i % n] * ea, lb)
        })
        .collect();
    let mut acw = vec![ScaledSum::ZERO; n + 1];
    for l in 1..=n {
        let mut s = acw[l - 1];
        s.add_term(q[l - 1].0 * (0.5 * h), q[l - 1].1);
        s.add_term(q[l].0 * (0.5 * h), q[l].1);
        acw[l] = s;
    }
    let mut cw = vec![ScaledSum::ZERO; n + 1];
    for l in (0..n).rev() {
        let mut s = cw[l + 1];
        s.add_term(q[l].0 * (0.5 * h), q[l].1);
        s.add_term(q[l + 1].0 * (0.5 * h), q[l + 1].1);
        cw[l] = s;
    }
    let corr = em_correction(grid, profile, f, opts.em_terms);
    let (ea_p, lb_p) = kernel(profile, p);
    let (ea_pn, lb_pn) = kernel(profile, p + n);
    let mut out_acw = vec![ScaledSum::ZERO; n];
    let mut out_cw = vec![ScaledSum::ZERO; n];
    for l in 0..=n {
        let i = (p + l) % n;
        if l == 0 || l == n {
            continue;
        }
        let (ea, lb) = kernel(profile, p + l);
        // e^{i(C(p) - C(t))}, modulus e^{B(t) - B(p)} ≤ 1
        let back = ea_p * ea.conj() * math::exp(lb_p - lb);
        let fwd = ea_pn * ea.conj() * math::exp(lb_pn - lb);
        let mut a = acw[l].times(I * ea.conj(), -lb);
        a.add_term(-I * (corr[i] - back * corr[p]), 0.0);
        let mut c = cw[l].times(-I * ea.conj(), -lb);
        c.add_term(I * (fwd * corr[p] - corr[i]), 0.0);
        out_acw[i] = a;
        out_cw[i] = c;
    }
    Ok((out_acw, out_cw))
}

/// The resonant particular solution with `u(t_ξ) = 0`. At each node the
/// better-conditioned of the two equivalent arc forms is used.
pub fn solve_mode_resonant(
    grid: &CircleGrid,
    profile: &ModeProfile,
    f: &[Complex64],
    opts: SolveOptions,
) -> Result<ModeSolution> {
    let compat = compat_integral(profile, f)?;
    if compat.relative > opts.compat_tol {
        return Err(Error::Compatibility { xi: profile.xi.clone(), relative: compat.relative });
    }
    let (acw, cw) = resonant_sums(grid, profile, f, opts)?;
    let chosen: Vec<ScaledSum> = acw
        .into_iter()
        .zip(cw)
        .map(|(a, c)| if c.scale < a.scale { c } else { a })
        .collect();
    Ok(ModeSolution::from_sums(&profile.xi, &chosen, Branch::Resonant, None, 0.0))
}

/// Dispatches on the resonance class of the profile.
pub fn solve_mode(grid: &CircleGrid, profile: &ModeProfile, f: &[Complex64], opts: SolveOptions) -> Result<ModeSolution> {
    if profile.resonant {
        solve_mode_resonant(grid, profile, f, opts)
    } else {
        solve_mode_nonresonant(grid, profile, f, opts)
    }
}

/// `∫ e^{iC} f dt` over one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatIntegral {
    /// The integral divided by `e^{log_scale}`.
    pub normalized: Complex64,
    /// `-min B`, so `e^{log_scale} = max |e^{iC}|`.
    pub log_scale: f64,
    /// `|∫ e^{iC} f| / ∫ |e^{iC} f|`, zero when `f` vanishes.
    pub relative: f64,
}

impl CompatIntegral {
    /// The raw integral, `None` if it overflows.
    pub fn value(&self) -> Option<Complex64> {
        ScaledSum::term(self.normalized, self.log_scale).value()
    }
}

pub fn compat_integral(profile: &ModeProfile, f: &[Complex64]) -> Result<CompatIntegral> {
    if !profile.resonant {
        return Err(Error::NotResonant { xi: profile.xi.clone() });
    }
    let n = profile.len();
    if f.len() != n {
        return Err(Error::ShapeMismatch { context: "compatibility integrand", expected: n, found: f.len() });
    }
    let h = TAU / n as f64;
    let mut sum = ScaledSum::ZERO;
    let mut abs = ScaledSum::ZERO;
    let mut min_b = f64::INFINITY;
    for i in 0..n {
        let (ea, lb) = kernel(profile, i);
        sum.add_term(f[i] * ea * h, lb);
        abs.add_term(Complex64::new(f[i].norm() * h, 0.0), lb);
        min_b = min_b.min(-lb);
    }
    let relative = if abs.log_abs() == f64::NEG_INFINITY {
        0.0
    } else {
        math::exp(sum.log_abs() - abs.log_abs())
    };
    Ok(CompatIntegral { normalized: sum.value_shifted(-min_b), log_scale: -min_b, relative })
}

/// Removes the component of `f` that violates the compatibility
/// condition, along `conj(e^{iC}) / max|e^{iC}|`. Non-resonant profiles
/// return `f` unchanged.
pub fn project_admissible(profile: &ModeProfile, f: &[Complex64]) -> Result<Vec<Complex64>> {
    if !profile.resonant {
        return Ok(f.to_vec());
    }
    let n = profile.len();
    let min_b = profile.b_prim.samples.iter().copied().fold(f64::INFINITY, f64::min);
    // g = conj(e^{iC}) e^{-min B}, |g| ≤ 1
    let g: Vec<Complex64> = (0..n)
        .map(|i| {
            let (ea, lb) = kernel(profile, i);
            ea.conj() * math::exp(lb + min_b)
        })
        .collect();
    let num = compat_integral(profile, f)?;
    let den = compat_integral(profile, &g)?;
    let coef = num.normalized / den.normalized * math::exp(num.log_scale - den.log_scale);
    Ok(f.iter().zip(&g).map(|(fi, gi)| fi - coef * gi).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    pub member: bool,
    /// Resonant modes over the tolerance with their relative integrals,
    /// worst first.
    pub offenders: Vec<(Vec<i64>, f64)>,
    pub worst: Option<(Vec<i64>, f64)>,
}

fn check_profiles(field: &FourierField, profiles: &[ModeProfile]) -> Result<()> {
    let b = field.freq_box();
    if profiles.len() != b.len() {
        return Err(Error::ShapeMismatch { context: "profiles per frequency", expected: b.len(), found: profiles.len() });
    }
    if let Some(p) = profiles.iter().zip(b.freqs()).find(|(p, xi)| p.xi != **xi) {
        return Err(Error::InvalidArgument(alloc::format!(
            "profile for {:?} out of box order",
            p.0.xi
        )));
    }
    Ok(())
}

/// Whether every resonant mode of `field` passes the compatibility test.
pub fn closure_membership(field: &FourierField, profiles: &[ModeProfile], tol: f64) -> Result<ClosureReport> {
    check_profiles(field, profiles)?;
    let rel: Vec<Option<f64>> = map_indexed(profiles.len(), |i| {
        let p = &profiles[i];
        if !p.resonant || field.is_zero_slice(i) {
            return Ok(None);
        }
        compat_integral(p, field.slice(i)).map(|c| Some(c.relative))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut worst: Option<(Vec<i64>, f64)> = None;
    let mut offenders = Vec::new();
    for (p, r) in profiles.iter().zip(rel) {
        let Some(r) = r else { continue };
        if worst.as_ref().is_none_or(|w| r > w.1) {
            worst = Some((p.xi.clone(), r));
        }
        if !(r <= tol) {
            offenders.push((p.xi.clone(), r));
        }
    }
    offenders.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ClosureReport { member: offenders.is_empty(), offenders, worst })
}

/// `(D_t + c(t, ξ)) u` for one mode.
pub fn apply_p_mode(grid: &CircleGrid, profile: &ModeProfile, u: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = spectral::derivative(grid, u, 1)?;
    Ok(d.iter()
        .zip(u)
        .enumerate()
        .map(|(j, (dj, uj))| -I * dj + profile.symbol_at(j) * uj)
        .collect())
}

/// `P u` mode by mode.
pub fn apply_p(u: &FourierField, profiles: &[ModeProfile]) -> Result<FourierField> {
    check_profiles(u, profiles)?;
    u.validate()?;
    let grid = u.grid();
    let slices: Vec<Vec<Complex64>> = map_indexed(profiles.len(), |i| apply_p_mode(grid, &profiles[i], u.slice(i)))
        .into_iter()
        .collect::<Result<_>>()?;
    FourierField::from_slices(grid, u.freq_box(), slices)
}

/// `‖(D_t + c) u - f‖_∞` for one mode.
pub fn mode_residual(grid: &CircleGrid, profile: &ModeProfile, u: &[Complex64], f: &[Complex64]) -> Result<f64> {
    let pu = apply_p_mode(grid, profile, u)?;
    Ok(pu.iter().zip(f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeReport {
    pub xi: Vec<i64>,
    pub branch: Option<Branch>,
    pub saturated: bool,
    pub peak_log_mag: f64,
    pub sup_norm: f64,
    /// `‖(D_t + c) u - f‖_∞`; `None` for saturated or zero modes.
    pub residual: Option<f64>,
    pub divisor: Option<f64>,
    pub small_divisor: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSolution {
    pub u: FourierField,
    pub modes: Vec<ModeReport>,
    pub saturated: Vec<Vec<i64>>,
    pub small_divisors: Vec<Vec<i64>>,
    /// `max ‖Pu - f‖_∞` over non-saturated modes.
    pub residual: f64,
    pub f_sup: f64,
    /// Decay fits of `u` at derivative orders 0 and 1, when assessable.
    pub decay: [Option<DecayFit>; 2],
}

impl GlobalSolution {
    pub fn relative_residual(&self) -> f64 {
        if self.f_sup > 0.0 {
            self.residual / self.f_sup
        } else {
            self.residual
        }
    }
}

/// Solves `Pu = f` mode by mode after checking closure membership.
/// Zero slices give zero solutions.
pub fn solve_global(field: &FourierField, profiles: &[ModeProfile], opts: SolveOptions) -> Result<GlobalSolution> {
    field.validate()?;
    let closure = closure_membership(field, profiles, opts.compat_tol)?;
    if !closure.member {
        return Err(Error::ClosureViolation {
            worst_relative: closure.offenders[0].1,
            offenders: closure.offenders.into_iter().map(|(xi, _)| xi).collect(),
        });
    }
    let grid = field.grid();
    let solved: Vec<(Vec<Complex64>, ModeReport)> = map_indexed(profiles.len(), |i| {
        let p = &profiles[i];
        let f = field.slice(i);
        if field.is_zero_slice(i) {
            let report = ModeReport {
                xi: p.xi.clone(),
                branch: None,
                saturated: false,
                peak_log_mag: f64::NEG_INFINITY,
                sup_norm: 0.0,
                residual: None,
                divisor: None,
                small_divisor: false,
            };
            return Ok((vec![ZERO; grid.len()], report));
        }
        let sol = solve_mode(grid, p, f, opts)?;
        let residual = if sol.saturated { None } else { Some(mode_residual(grid, p, &sol.u, f)?) };
        let report = ModeReport {
            xi: p.xi.clone(),
            branch: Some(sol.branch),
            saturated: sol.saturated,
            peak_log_mag: sol.peak_log_mag,
            sup_norm: sol.sup_norm,
            residual,
            divisor: sol.divisor,
            small_divisor: sol.small_divisor,
        };
        Ok((sol.u, report))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut slices = Vec::with_capacity(solved.len());
    let mut modes = Vec::with_capacity(solved.len());
    for (u, r) in solved {
        slices.push(u);
        modes.push(r);
    }
    let u = FourierField::from_slices(grid, field.freq_box(), slices)?;
    let residual = modes.iter().filter_map(|m| m.residual).fold(0.0, f64::max);
    let saturated = modes.iter().filter(|m| m.saturated).map(|m| m.xi.clone()).collect();
    let small_divisors = modes.iter().filter(|m| m.small_divisor).map(|m| m.xi.clone()).collect();
    let decay = [decay_fit(&u, 0).ok(), decay_fit(&u, 1).ok()];
    Ok(GlobalSolution { u, modes, saturated, small_divisors, residual, f_sup: field.sup_norm(), decay })
}
