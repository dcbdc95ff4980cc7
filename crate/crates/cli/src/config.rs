//! Run configuration: a TOML file with `[symbol]`, `[run]` and `[forge]`
//! sections, merged with command-line and environment overrides.
//!
//! Precedence, lowest first: built-in defaults, the `[run]`/`[forge]`
//! sections, `TORSOLV_*` environment variables, flags.
//!
//! ```toml
//! [symbol]
//! order = 1
//! kind = "homogeneous"      # constant | separable | homogeneous | homogeneous-plus-lower | tabulated
//! a = "0"
//! b = "sin(t)"
//!
//! [run]
//! nt = 1024
//! cutoff = 32
//! ```

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;
use torsolv_core::conditions::{required_nt, AggregateConfig, DioFitConfig};
use torsolv_core::counterexample::{ForgeOptions, ForgeTag, Sequence};
use torsolv_core::homogeneous::{CorollaryConfig, DEFAULT_SIGN_TOL};
use torsolv_core::solver::SolveOptions;
use torsolv_core::spectral::{CircleGrid, FrequencyBox};
use torsolv_core::symbol::{
    EvalOptions, HomogeneousSpec, SymbolSpec, SymbolVariant, TrigPair, Weight, DEFAULT_EPS_Z,
};
use torsolv_core::Complex64;

use crate::expr::parse_trig;
use crate::field_io::{read_tabulated, FieldError, Format};

pub const DEFAULT_NT: usize = 1024;
pub const DEFAULT_CUTOFF: f64 = 32.0;
pub const DEFAULT_TERMS: usize = 6;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}:{line}: field `{field}`: {message}")]
    Field { path: PathBuf, line: usize, field: String, message: String },
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error(
        "n_t = {nt} cannot resolve the window |xi|^-m = {window:.4e} (order m = {order}, cutoff K = {cutoff}); \
         the grid step must be at most a quarter window, so use --nt {required} or larger"
    )]
    Resolution { nt: usize, required: usize, window: f64, order: f64, cutoff: f64 },
    #[error(transparent)]
    Table(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TagArg {
    Dc,
    Alpha,
    Beta,
}

impl From<TagArg> for ForgeTag {
    fn from(t: TagArg) -> Self {
        match t {
            TagArg::Dc => ForgeTag::Dc,
            TagArg::Alpha => ForgeTag::Alpha,
            TagArg::Beta => ForgeTag::Beta,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    symbol: SymbolSection,
    #[serde(default)]
    run: RunSection,
    #[serde(default)]
    forge: ForgeSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    Constant,
    Separable,
    Homogeneous,
    HomogeneousPlusLower,
    Tabulated,
}

type Expr = Spanned<String>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolSection {
    order: f64,
    #[serde(default = "one")]
    dim: usize,
    kind: Kind,
    value: Option<[f64; 2]>,
    a: Option<Expr>,
    b: Option<Expr>,
    weight_power: Option<f64>,
    #[serde(default)]
    direction: Vec<DirectionSection>,
    lower: Option<LowerSection>,
    table: Option<PathBuf>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectionSection {
    xi: Vec<i64>,
    a: Option<Expr>,
    b: Option<Expr>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LowerSection {
    order: f64,
    a: Option<Expr>,
    b: Option<Expr>,
    weight_power: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    nt: Option<usize>,
    cutoff: Option<f64>,
    eps_z: Option<f64>,
    d_floor: Option<f64>,
    basepoint: Option<usize>,
    compat_tol: Option<f64>,
    offender_factor: Option<f64>,
    slope_tol: Option<f64>,
    sign_tol: Option<f64>,
    threads: Option<usize>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForgeSection {
    tag: Option<TagArg>,
    terms: Option<usize>,
    sequence: Option<Vec<Vec<i64>>>,
    interval: Option<[f64; 2]>,
    plateau: Option<f64>,
    decay_floor: Option<f64>,
}

/// Values supplied on the command line or through the environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub nt: Option<usize>,
    pub cutoff: Option<f64>,
    pub eps_z: Option<f64>,
    pub d_floor: Option<f64>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub tag: Option<TagArg>,
    pub terms: Option<usize>,
    pub sequence: Option<Vec<Vec<i64>>>,
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForgeSettings {
    pub tag: Option<ForgeTag>,
    pub sequence: Sequence,
    pub interval: Option<(f64, f64)>,
    pub options: ForgeOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub symbol_path: PathBuf,
    pub symbol: SymbolSpec,
    pub dim: usize,
    pub nt: usize,
    pub cutoff: f64,
    pub eps_z: f64,
    pub d_floor: f64,
    pub basepoint: usize,
    pub compat_tol: f64,
    pub offender_factor: f64,
    pub slope_tol: f64,
    pub sign_tol: f64,
    /// `None`: one worker per available core.
    pub threads: Option<usize>,
    pub format: Format,
    pub out: PathBuf,
    pub forge: ForgeSettings,
}

/// 1-based line of a byte offset.
fn line_of(src: &str, span: &Range<usize>) -> usize {
    src[..span.start.min(src.len())].matches('\n').count() + 1
}

struct Ctx<'a> {
    path: &'a Path,
    src: &'a str,
}

impl Ctx<'_> {
    fn field_err(&self, span: &Range<usize>, field: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Field {
            path: self.path.to_path_buf(),
            line: line_of(self.src, span),
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn expr(&self, e: &Option<Expr>, field: &str) -> Result<Option<torsolv_core::trig::TrigPoly>, ConfigError> {
        let Some(e) = e else { return Ok(None) };
        parse_trig(e.get_ref())
            .map(Some)
            .map_err(|err| self.field_err(&e.span(), field, format!("`{}`: {err}", e.get_ref())))
    }

    fn pair(&self, a: &Option<Expr>, b: &Option<Expr>, section: &str) -> Result<Option<TrigPair>, ConfigError> {
        let re = self.expr(a, &format!("{section}.a"))?;
        let im = self.expr(b, &format!("{section}.b"))?;
        if re.is_none() && im.is_none() {
            return Ok(None);
        }
        Ok(Some(TrigPair::new(re.unwrap_or_default(), im.unwrap_or_default())))
    }

    fn missing(&self, field: &str, what: &str) -> ConfigError {
        ConfigError::Field { path: self.path.to_path_buf(), line: 1, field: field.to_string(), message: what.to_string() }
    }
}

fn homogeneous_part(ctx: &Ctx<'_>, s: &SymbolSection) -> Result<HomogeneousSpec, ConfigError> {
    let default = ctx.pair(&s.a, &s.b, "symbol")?;
    let mut directions = Vec::with_capacity(s.direction.len());
    for (i, d) in s.direction.iter().enumerate() {
        let section = format!("symbol.direction[{i}]");
        let p = ctx.pair(&d.a, &d.b, &section)?.ok_or_else(|| ctx.missing(&section, "needs `a` or `b`"))?;
        if d.xi.len() != s.dim {
            return Err(ctx.missing(&format!("{section}.xi"), &format!("must have {} components", s.dim)));
        }
        directions.push((d.xi.clone(), p));
    }
    if default.is_none() && directions.is_empty() {
        return Err(ctx.missing("symbol", "a homogeneous symbol needs `a`/`b` or [[symbol.direction]] entries"));
    }
    Ok(HomogeneousSpec { degree: s.order, default, directions })
}

fn build_symbol(ctx: &Ctx<'_>, s: &SymbolSection, nt: usize) -> Result<SymbolSpec, ConfigError> {
    let weight = Weight::NormPower(s.weight_power.unwrap_or(s.order));
    let variant = match s.kind {
        Kind::Constant => {
            let [re, im] = s.value.ok_or_else(|| ctx.missing("symbol.value", "constant symbols need `value = [re, im]`"))?;
            SymbolVariant::Constant { value: Complex64::new(re, im), weight }
        }
        Kind::Separable => {
            let profile = ctx.pair(&s.a, &s.b, "symbol")?.ok_or_else(|| ctx.missing("symbol", "needs `a` or `b`"))?;
            SymbolVariant::Separable { profile, weight }
        }
        Kind::Homogeneous => SymbolVariant::Homogeneous(homogeneous_part(ctx, s)?),
        Kind::HomogeneousPlusLower => {
            let lower = s.lower.as_ref().ok_or_else(|| ctx.missing("symbol.lower", "missing [symbol.lower] section"))?;
            let pair =
                ctx.pair(&lower.a, &lower.b, "symbol.lower")?.ok_or_else(|| ctx.missing("symbol.lower", "needs `a` or `b`"))?;
            SymbolVariant::HomogeneousPlusLower {
                principal: homogeneous_part(ctx, s)?,
                lower: pair,
                lower_weight: Weight::NormPower(lower.weight_power.unwrap_or(lower.order)),
                lower_order: lower.order,
            }
        }
        Kind::Tabulated => {
            let rel = s.table.as_ref().ok_or_else(|| ctx.missing("symbol.table", "tabulated symbols need `table = PATH`"))?;
            let path = ctx.path.parent().unwrap_or(Path::new(".")).join(rel);
            SymbolVariant::Tabulated(Box::new(read_tabulated(&path, nt, s.dim)?))
        }
    };
    let spec = SymbolSpec::new(s.order, variant);
    spec.validate().map_err(|e| ctx.missing("symbol", &e.to_string()))?;
    Ok(spec)
}

fn check(ok: bool, field: &'static str, message: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Invalid { field, message: message.to_string() })
    }
}

impl RunConfig {
    pub fn load(path: &Path, over: &Overrides) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_str(path, &src, over)
    }

    /// Parses `src` as if read from `path` (used for relative table paths
    /// and diagnostics).
    pub fn from_str(path: &Path, src: &str, over: &Overrides) -> Result<Self, ConfigError> {
        let file: ConfigFile =
            toml::from_str(src).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        let ctx = Ctx { path, src };
        let run = file.run;
        let forge = file.forge;

        let nt = over.nt.or(run.nt).unwrap_or(DEFAULT_NT);
        let cutoff = over.cutoff.or(run.cutoff).unwrap_or(DEFAULT_CUTOFF);
        let eps_z = over.eps_z.or(run.eps_z).unwrap_or(DEFAULT_EPS_Z);
        let d_floor = over.d_floor.or(run.d_floor).unwrap_or(AggregateConfig::default().d_floor);
        let threads = over.threads.or(run.threads);
        let basepoint = run.basepoint.unwrap_or(0);
        let compat_tol = run.compat_tol.unwrap_or(SolveOptions::default().compat_tol);
        let offender_factor = run.offender_factor.unwrap_or(DioFitConfig::default().offender_factor);
        let slope_tol = run.slope_tol.unwrap_or(AggregateConfig::default().slope_tol);
        let sign_tol = run.sign_tol.unwrap_or(DEFAULT_SIGN_TOL);

        CircleGrid::new(nt).map_err(|e| ConfigError::Invalid { field: "nt", message: e.to_string() })?;
        FrequencyBox::new(file.symbol.dim, cutoff).map_err(|e| ConfigError::Invalid { field: "cutoff", message: e.to_string() })?;
        check(eps_z.is_finite() && eps_z >= 0.0, "eps_z", "must be a finite non-negative number")?;
        check(d_floor.is_finite(), "d_floor", "must be finite")?;
        check(basepoint < nt, "run.basepoint", "must be a node index below n_t")?;
        check(compat_tol.is_finite() && compat_tol > 0.0, "run.compat_tol", "must be positive")?;
        check(offender_factor.is_finite() && offender_factor > 1.0, "run.offender_factor", "must exceed 1")?;
        check(slope_tol.is_finite() && slope_tol >= 0.0, "run.slope_tol", "must be non-negative")?;
        check(sign_tol.is_finite() && sign_tol >= 0.0, "run.sign_tol", "must be non-negative")?;
        check(threads != Some(0), "threads", "must be at least 1")?;

        let defaults = ForgeOptions::default();
        let options = ForgeOptions {
            plateau: forge.plateau.unwrap_or(defaults.plateau),
            decay_floor: forge.decay_floor.unwrap_or(defaults.decay_floor),
        };
        check(options.plateau > 0.0 && options.plateau < 1.0, "forge.plateau", "must lie in (0, 1)")?;
        let terms = over.terms.or(forge.terms).unwrap_or(DEFAULT_TERMS);
        check(terms >= 1, "terms", "must be at least 1")?;
        let sequence = match over.sequence.clone().or(forge.sequence) {
            Some(seq) => {
                check(!seq.is_empty(), "sequence", "must not be empty")?;
                check(seq.iter().all(|xi| xi.len() == file.symbol.dim), "sequence", "frequency dimension differs from symbol.dim")?;
                Sequence::Explicit(seq)
            }
            None => Sequence::Auto(terms),
        };
        let interval = over.interval.or(forge.interval.map(|[a, b]| (a, b)));

        let symbol = build_symbol(&ctx, &file.symbol, nt)?;
        Ok(Self {
            symbol_path: path.to_path_buf(),
            symbol,
            dim: file.symbol.dim,
            nt,
            cutoff,
            eps_z,
            d_floor,
            basepoint,
            compat_tol,
            offender_factor,
            slope_tol,
            sign_tol,
            threads,
            format: over.format.or(run.format).unwrap_or_default(),
            out: over.out.clone().or(run.out).unwrap_or_else(|| PathBuf::from("out")),
            forge: ForgeSettings { tag: over.tag.or(forge.tag).map(ForgeTag::from), sequence, interval, options },
        })
    }

    pub fn grid(&self) -> CircleGrid {
        CircleGrid::new(self.nt).expect("validated on load")
    }

    pub fn freq_box(&self) -> FrequencyBox {
        FrequencyBox::new(self.dim, self.cutoff).expect("validated on load")
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions { eps_z: self.eps_z, basepoint: self.basepoint }
    }

    pub fn aggregate_config(&self) -> AggregateConfig {
        AggregateConfig { d_floor: self.d_floor, slope_tol: self.slope_tol, dio: self.dio_config() }
    }

    pub fn dio_config(&self) -> DioFitConfig {
        DioFitConfig { offender_factor: self.offender_factor }
    }

    pub fn corollary_config(&self) -> CorollaryConfig {
        CorollaryConfig { sign_tol: self.sign_tol, dio: self.dio_config(), eval: self.eval_options() }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { compat_tol: self.compat_tol, ..SolveOptions::default() }
    }

    /// The window conditions need a grid step of at most a quarter of the
    /// shortest non-vacuous window `|ξ|^{-m}` in the box.
    pub fn check_resolution(&self) -> Result<(), ConfigError> {
        let freq_box = self.freq_box();
        match required_nt(&freq_box, self.symbol.order) {
            Some(required) if required > self.nt => {
                let window = freq_box
                    .freqs()
                    .iter()
                    .map(|xi| torsolv_core::spectral::freq_norm(xi))
                    .filter(|&r| r >= 2.0)
                    .map(|r| r.powf(-self.symbol.order))
                    .fold(f64::INFINITY, f64::min);
                Err(ConfigError::Resolution {
                    nt: self.nt,
                    required,
                    window,
                    order: self.symbol.order,
                    cutoff: self.cutoff,
                })
            }
            _ => Ok(()),
        }
    }
}
