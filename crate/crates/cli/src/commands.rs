//! The three commands. Each one computes through `torsolv-core`, writes its
//! files into the output directory and returns what it found.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use torsolv_core::conditions::{aggregate, condition_table, dio_fit, dio_margin, DioOutcome, DioStatus, Verdict};
use torsolv_core::counterexample::{
    forge_alpha, forge_beta, forge_dc, measure_bounds, BoundCheck, ForgeSetup, ForgeTag, ForgedRHS, Sequence,
};
use torsolv_core::homogeneous::{corollary_verdict, perturbed_principal_check, CorollaryVerdict, PerturbedOutcome};
use torsolv_core::solver::{solve_global, GlobalSolution};
use torsolv_core::spectral::{line_fit, DecayFit};
use torsolv_core::symbol::{class_constants, evaluate, ModeProfile, SymbolVariant};
use torsolv_core::Error as CoreError;

use crate::config::{ConfigError, RunConfig};
use crate::error::CliError;
use crate::field_io::{read_field, write_field};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn xi_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("xi{i}")).collect()
}

fn xi_cells(xi: &[i64]) -> Vec<String> {
    xi.iter().map(i64::to_string).collect()
}

struct CsvOut {
    path: PathBuf,
    w: csv::Writer<fs::File>,
}

impl CsvOut {
    fn create(path: PathBuf, header: Vec<String>) -> Result<Self, CliError> {
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::output(&path, e))?;
        w.write_record(&header).map_err(|e| CliError::output(&path, e))?;
        Ok(Self { path, w })
    }

    fn row(&mut self, cells: Vec<String>) -> Result<(), CliError> {
        self.w.write_record(&cells).map_err(|e| CliError::output(&self.path, e))
    }

    fn finish(mut self) -> Result<PathBuf, CliError> {
        self.w.flush().map_err(|e| CliError::output(&self.path, e))?;
        Ok(self.path)
    }
}

fn write_toml<T: Serialize>(path: PathBuf, value: &T) -> Result<PathBuf, CliError> {
    let text = toml::to_string(value).map_err(|e| CliError::output(&path, e))?;
    fs::write(&path, text).map_err(|e| CliError::output(&path, e))?;
    Ok(path)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::output(&cfg.out, e))?;
    Ok(&cfg.out)
}

fn profiles(cfg: &RunConfig) -> Result<Vec<ModeProfile>, CliError> {
    Ok(evaluate(&cfg.symbol, &cfg.grid(), &cfg.freq_box(), cfg.eval_options())?)
}

#[derive(Debug, Serialize)]
struct DecaySummary {
    exponent: f64,
    constant: f64,
    residual: f64,
    points: usize,
}

impl From<&DecayFit> for DecaySummary {
    fn from(d: &DecayFit) -> Self {
        Self { exponent: d.exponent, constant: d.constant, residual: d.residual, points: d.points }
    }
}

// ---------------------------------------------------------------- analyze

#[derive(Debug)]
pub struct AnalyzeOutcome {
    pub solvable: bool,
    pub reasons: Vec<&'static str>,
    pub verdict: Verdict,
    pub corollary: Option<CorollaryVerdict>,
    pub perturbed: Option<PerturbedOutcome>,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    solvable: bool,
    reasons: &'a [&'static str],
    order: f64,
    nt: usize,
    cutoff: f64,
    class_constants: [f64; 3],
    conditions: ConditionsSummary,
    dc: DcSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    corollary: Option<CorollarySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    perturbed: Option<PerturbedSummary>,
}

#[derive(Serialize)]
struct ConditionsSummary {
    sup_d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup_d_at: Option<Vec<i64>>,
    growth_slope: f64,
    bounded: bool,
}

#[derive(Serialize)]
struct DcSummary {
    status: &'static str,
    clean: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lemma_consistent: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    offenders: Vec<Vec<i64>>,
}

impl From<&DioStatus> for DcSummary {
    fn from(d: &DioStatus) -> Self {
        let mut s = DcSummary {
            status: "",
            clean: d.is_clean(),
            m_hat: None,
            c_hat: None,
            lemma_consistent: None,
            points: None,
            offenders: Vec::new(),
        };
        match d {
            DioStatus::Vacuous => s.status = "vacuous",
            DioStatus::Insufficient { found } => {
                s.status = "insufficient";
                s.points = Some(*found);
            }
            DioStatus::Fitted(f) => {
                s.status = "fitted";
                s.m_hat = Some(f.m_hat);
                s.c_hat = Some(f.c_hat);
                s.lemma_consistent = Some(f.lemma_consistent);
                s.points = Some(f.points);
                s.offenders = f.offenders.iter().map(|o| o.xi.clone()).collect();
            }
        }
        s
    }
}

#[derive(Serialize)]
struct CorollarySummary {
    solvable: bool,
    agrees: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_failure: Option<String>,
}

#[derive(Serialize)]
struct PerturbedSummary {
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    principal_mean: Option<f64>,
}

/// Symbol, conditions and verdict; the homogeneous criteria run alongside
/// when they apply.
pub fn analyze(cfg: &RunConfig) -> Result<AnalyzeOutcome, CliError> {
    cfg.check_resolution()?;
    let grid = cfg.grid();
    let freq_box = cfg.freq_box();
    let order = cfg.symbol.order;
    let profiles = profiles(cfg)?;
    let class = class_constants(&grid, &profiles, order)?;
    let verdict = aggregate(condition_table(&profiles, order)?, cfg.cutoff, cfg.aggregate_config())?;
    let corollary = if cfg.symbol.is_homogeneous() && order > 0.0 {
        Some(corollary_verdict(&cfg.symbol, &grid, &freq_box, cfg.corollary_config())?)
    } else {
        None
    };
    let perturbed = if matches!(cfg.symbol.variant, SymbolVariant::HomogeneousPlusLower { .. }) {
        Some(perturbed_principal_check(&cfg.symbol, &grid, &freq_box, cfg.sign_tol, cfg.eps_z)?)
    } else {
        None
    };

    let mut reasons = Vec::new();
    if !verdict.dio.is_clean() {
        reasons.push("dc-offenders");
    }
    if !verdict.bounded {
        reasons.push("oscillation-growth");
    }
    if let Some(row) = corollary.as_ref().and_then(CorollaryVerdict::first_failure) {
        reasons.push(match row.reason {
            torsolv_core::homogeneous::CorollaryReason::SignChange { .. } => "sign-change",
            _ => "sublevel-disconnected",
        });
    }
    if matches!(perturbed, Some(PerturbedOutcome::NotSolvable { .. })) {
        reasons.push("principal-sign-change");
    }
    let solvable = verdict.solvable_at_cutoff;

    let dir = out_dir(cfg)?;
    let dim = cfg.dim;
    let mut files = Vec::new();

    let mut header = xi_header(dim);
    header.extend(
        [
            "norm", "resonant", "margin", "exp_margin1", "exp_margin2", "d_plus", "d_minus", "d_beta", "governing",
            "vacuous", "below_floor",
        ]
        .map(String::from),
    );
    let mut t = CsvOut::create(dir.join("conditions.csv"), header)?;
    for r in &verdict.table {
        let (m, c) = (&r.margin, &r.constants);
        let mut cells = xi_cells(&m.xi);
        cells.extend([
            num(m.norm),
            m.resonant.to_string(),
            num(m.margin),
            num(m.exp_margin1),
            num(m.exp_margin2),
            num(c.d_plus),
            num(c.d_minus),
            opt_num(c.d_beta),
            num(c.governing()),
            c.vacuous.to_string(),
            c.below_floor.to_string(),
        ]);
        t.row(cells)?;
    }
    files.push(t.finish()?);

    let mut t = CsvOut::create(dir.join("plot_margin.csv"), ["norm", "margin"].map(String::from).to_vec())?;
    for r in verdict.table.iter().filter(|r| !r.margin.resonant && r.margin.norm > 0.0) {
        t.row(vec![num(r.margin.norm), num(r.margin.margin)])?;
    }
    files.push(t.finish()?);

    let mut t = CsvOut::create(dir.join("plot_dstar.csv"), ["norm", "d_star"].map(String::from).to_vec())?;
    for r in verdict.table.iter().filter(|r| !r.constants.below_floor) {
        t.row(vec![num(r.constants.norm), num(r.constants.governing())])?;
    }
    files.push(t.finish()?);

    if let Some(cv) = &corollary {
        let mut header = xi_header(dim);
        header.extend(["resonant", "sign_change", "near_degenerate", "max_components", "reason"].map(String::from));
        let mut t = CsvOut::create(dir.join("corollary.csv"), header)?;
        for r in &cv.rows {
            let mut cells = xi_cells(&r.xi);
            cells.extend([
                r.resonant.to_string(),
                r.sign_change.changes.to_string(),
                r.sign_change.near_degenerate.to_string(),
                r.max_components.map(|c| c.to_string()).unwrap_or_default(),
                r.reason.describe(),
            ]);
            t.row(cells)?;
        }
        files.push(t.finish()?);
    }

    let summary = VerdictFile {
        solvable,
        reasons: &reasons,
        order,
        nt: cfg.nt,
        cutoff: cfg.cutoff,
        class_constants: class,
        conditions: ConditionsSummary {
            sup_d: verdict.sup_d,
            sup_d_at: verdict.sup_d_at.clone(),
            growth_slope: verdict.growth_slope,
            bounded: verdict.bounded,
        },
        dc: DcSummary::from(&verdict.dio),
        corollary: corollary.as_ref().map(|cv| CorollarySummary {
            solvable: cv.solvable,
            agrees: cv.solvable == solvable,
            first_failure: cv.first_failure().map(|r| r.reason.describe()),
        }),
        perturbed: perturbed.as_ref().map(|p| match p {
            PerturbedOutcome::NotSolvable { direction, principal_mean } => PerturbedSummary {
                outcome: "not-solvable",
                direction: Some(direction.clone()),
                principal_mean: Some(*principal_mean),
            },
            PerturbedOutcome::Inconclusive => {
                PerturbedSummary { outcome: "inconclusive", direction: None, principal_mean: None }
            }
        }),
    };
    files.push(write_toml(dir.join("verdict.toml"), &summary)?);

    Ok(AnalyzeOutcome { solvable, reasons, verdict, corollary, perturbed, files })
}

// ------------------------------------------------------------------ solve

#[derive(Debug)]
pub struct SolveOutcome {
    pub solution: GlobalSolution,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct SolveFile {
    residual: f64,
    f_sup: f64,
    relative_residual: f64,
    saturated: Vec<Vec<i64>>,
    small_divisors: Vec<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay_u: Option<DecaySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay_dt_u: Option<DecaySummary>,
}

/// Reads `f`, checks closure membership and solves `Pu = f`.
pub fn solve(cfg: &RunConfig, rhs: &Path) -> Result<SolveOutcome, CliError> {
    let f = read_field(rhs, &cfg.grid(), &cfg.freq_box()).map_err(CliError::Input)?;
    let profiles = profiles(cfg)?;
    let sol = solve_global(&f, &profiles, cfg.solve_options())?;

    let dir = out_dir(cfg)?;
    let mut files = Vec::new();
    let u_path = dir.join(format!("u.{}", cfg.format.extension()));
    write_field(&u_path, &sol.u, cfg.format).map_err(|e| CliError::output(&u_path, e))?;
    files.push(u_path);

    let mut header = xi_header(cfg.dim);
    header.extend(
        ["branch", "saturated", "peak_log_mag", "sup_norm", "residual", "divisor", "small_divisor"].map(String::from),
    );
    let mut t = CsvOut::create(dir.join("modes.csv"), header)?;
    for m in &sol.modes {
        let mut cells = xi_cells(&m.xi);
        cells.extend([
            m.branch.map_or("zero", |b| b.name()).to_string(),
            m.saturated.to_string(),
            num(m.peak_log_mag),
            num(m.sup_norm),
            opt_num(m.residual),
            opt_num(m.divisor),
            m.small_divisor.to_string(),
        ]);
        t.row(cells)?;
    }
    files.push(t.finish()?);

    let summary = SolveFile {
        residual: sol.residual,
        f_sup: sol.f_sup,
        relative_residual: sol.relative_residual(),
        saturated: sol.saturated.clone(),
        small_divisors: sol.small_divisors.clone(),
        decay_u: sol.decay[0].as_ref().map(DecaySummary::from),
        decay_dt_u: sol.decay[1].as_ref().map(DecaySummary::from),
    };
    files.push(write_toml(dir.join("solve.toml"), &summary)?);
    Ok(SolveOutcome { solution: sol, files })
}

// ------------------------------------------------------------------ forge

#[derive(Debug)]
pub struct ForgeOutcome {
    pub forged: ForgedRHS,
    pub checks: Vec<BoundCheck>,
    /// Fitted decay exponent of `sup_t |û(t, ξ_k)|` along the sequence.
    pub solution_decay: Option<f64>,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct ForgeFile {
    tag: &'static str,
    order: f64,
    smooth: bool,
    all_bounds_hold: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    interval: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay_f: Option<DecaySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solution_decay: Option<f64>,
    sequence: Vec<Vec<i64>>,
    mode: Vec<ForgedModeFile>,
}

#[derive(Serialize)]
struct ForgedModeFile {
    k: usize,
    xi: Vec<i64>,
    t_node: usize,
    t: f64,
    /// `[start, end, plateau]` per bump.
    bumps: Vec<[f64; 3]>,
    prefactor: [f64; 2],
    bump_integral: f64,
    gap: f64,
    rhs_sup: f64,
    measured: f64,
    target: f64,
    holds: bool,
    margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    divisor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kernel_sup: Option<f64>,
}

/// Frequencies flagged by the diophantine fit, smallest `|ξ|` first.
fn dc_sequence(profiles: &[ModeProfile], cfg: &RunConfig, terms: usize) -> Result<Vec<Vec<i64>>, CliError> {
    let margins: Vec<_> = profiles.iter().filter(|p| !p.is_zero_frequency()).map(dio_margin).collect();
    let mut offenders = match dio_fit(&margins, cfg.dio_config())? {
        DioOutcome::Fit(f) => f.offenders,
        DioOutcome::Vacuous => Vec::new(),
    };
    offenders.sort_by(|a, b| {
        let na: i64 = a.xi.iter().map(|c| c * c).sum();
        let nb: i64 = b.xi.iter().map(|c| c * c).sum();
        na.cmp(&nb).then_with(|| a.xi.cmp(&b.xi))
    });
    if offenders.is_empty() {
        return Err(CoreError::NoWitness { tag: "DC" }.into());
    }
    Ok(offenders.into_iter().take(terms).map(|o| o.xi).collect())
}

fn solution_decay(forged: &ForgedRHS, profiles: &[ModeProfile], cfg: &RunConfig) -> Option<f64> {
    if forged.modes.len() < 2 {
        return None;
    }
    let sol = solve_global(&forged.field, profiles, cfg.solve_options()).ok()?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for m in &forged.modes {
        let idx = forged.field.freq_box().index_of(&m.xi)?;
        let report = &sol.modes[idx];
        if report.saturated || report.sup_norm <= 0.0 {
            return None;
        }
        xs.push((1.0 + torsolv_core::spectral::freq_norm(&m.xi)).ln());
        ys.push(report.sup_norm.ln());
    }
    Some(-line_fit(&xs, &ys).0)
}

/// Builds the right-hand side for `tag`, measures the per-mode bounds and
/// writes the field, its sidecar and the bounds table.
pub fn forge(cfg: &RunConfig) -> Result<ForgeOutcome, CliError> {
    let tag = cfg.forge.tag.ok_or(ConfigError::Invalid {
        field: "tag",
        message: "choose a construction with --tag dc|alpha|beta or [forge] tag".into(),
    })?;
    cfg.check_resolution()?;
    let grid = cfg.grid();
    let freq_box = cfg.freq_box();
    let profiles = profiles(cfg)?;
    let setup = ForgeSetup { grid: &grid, freq_box: &freq_box, profiles: &profiles, order: cfg.symbol.order };
    let opts = cfg.forge.options;
    let forged = match tag {
        ForgeTag::Dc => {
            let seq = match &cfg.forge.sequence {
                Sequence::Explicit(s) => s.clone(),
                Sequence::Auto(n) => dc_sequence(&profiles, cfg, *n)?,
            };
            forge_dc(&setup, &seq, cfg.forge.interval, opts)?
        }
        ForgeTag::Alpha => forge_alpha(&setup, &cfg.forge.sequence, opts)?,
        ForgeTag::Beta => forge_beta(&setup, &cfg.forge.sequence, opts)?,
    };
    let checks = measure_bounds(&setup, &forged, cfg.solve_options())?;
    let decay = solution_decay(&forged, &profiles, cfg);

    let dir = out_dir(cfg)?;
    let mut files = Vec::new();
    let f_path = dir.join(format!("forged.{}", cfg.format.extension()));
    write_field(&f_path, &forged.field, cfg.format).map_err(|e| CliError::output(&f_path, e))?;
    files.push(f_path);

    let mut header = vec!["k".to_string()];
    header.extend(xi_header(cfg.dim));
    header.extend(["t", "measured", "target", "holds", "margin"].map(String::from));
    let mut t = CsvOut::create(dir.join("bounds.csv"), header)?;
    for (c, m) in checks.iter().zip(&forged.modes) {
        let mut cells = vec![c.k.to_string()];
        cells.extend(xi_cells(&c.xi));
        cells.extend([num(grid.node(m.t_k)), num(c.measured), num(c.target), c.holds.to_string(), num(c.margin)]);
        t.row(cells)?;
    }
    files.push(t.finish()?);

    let sidecar = ForgeFile {
        tag: forged.tag.name(),
        order: forged.order,
        smooth: forged.smooth,
        all_bounds_hold: checks.iter().all(|c| c.holds),
        interval: forged.interval.map(|(a, b)| [a, b]),
        decay_f: forged.decay.as_ref().map(DecaySummary::from),
        solution_decay: decay,
        sequence: forged.modes.iter().map(|m| m.xi.clone()).collect(),
        mode: checks
            .iter()
            .zip(&forged.modes)
            .map(|(c, m)| ForgedModeFile {
                k: m.k,
                xi: m.xi.clone(),
                t_node: m.t_k,
                t: grid.node(m.t_k),
                bumps: m.bumps.iter().map(|b| [b.start, b.end, b.plateau]).collect(),
                prefactor: [m.prefactor.re, m.prefactor.im],
                bump_integral: m.bump_integral,
                gap: m.gap,
                rhs_sup: m.rhs_sup,
                measured: c.measured,
                target: c.target,
                holds: c.holds,
                margin: c.margin,
                divisor: c.divisor,
                kernel_sup: c.kernel_sup,
            })
            .collect(),
    };
    files.push(write_toml(dir.join("forged.toml"), &sidecar)?);
    Ok(ForgeOutcome { forged, checks, solution_decay: decay, files })
}
