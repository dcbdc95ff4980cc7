use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torsolv::field_io::{read_field, write_field, write_tabulated, Format};
use torsolv_core::solver::{apply_p, project_admissible};
use torsolv_core::spectral::{decay_fit, CircleGrid, FourierField, FrequencyBox};
use torsolv_core::symbol::{evaluate, EvalOptions, SymbolSpec, SymbolVariant, Tabulated, TrigPair, Weight};
use torsolv_core::Complex64;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_torsolv"));
    for (k, _) in std::env::vars() {
        if k.starts_with("TORSOLV_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn toml_at(path: &Path) -> toml::Table {
    fs::read_to_string(path).unwrap().parse().unwrap()
}

fn homogeneous_cfg(b: &str, nt: usize, cutoff: f64) -> String {
    format!("[symbol]\norder = 1\nkind = \"homogeneous\"\nb = \"{b}\"\n[run]\nnt = {nt}\ncutoff = {cutoff}\n")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_gallery_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let sine = write(dir.path(), "sine.toml", &homogeneous_cfg("sin(t)", 1024, 32.0));
    let out = dir.path().join("sine");
    let o = run(&["analyze", "--symbol", s(&sine), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = toml_at(&out.join("verdict.toml"));
    assert_eq!(v["solvable"].as_bool(), Some(true));
    assert_eq!(v["corollary"]["agrees"].as_bool(), Some(true));
    for f in ["conditions.csv", "plot_margin.csv", "plot_dstar.csv", "corollary.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let two = write(dir.path(), "two.toml", &homogeneous_cfg("cos(2t)", 1024, 32.0));
    let out = dir.path().join("two");
    let o = run(&["analyze", "--symbol", s(&two), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "not solvable is a verdict, not a failure");
    let v = toml_at(&out.join("verdict.toml"));
    assert_eq!(v["solvable"].as_bool(), Some(false));
    let reasons: Vec<&str> = v["reasons"].as_array().unwrap().iter().map(|r| r.as_str().unwrap()).collect();
    assert!(reasons.contains(&"oscillation-growth") && reasons.contains(&"sublevel-disconnected"), "{reasons:?}");
}

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[symbol]\norder = 1\nkind = \"homogeneous\"\nb = \"sin(t) * \"\n");
    let o = run(&["analyze", "--symbol", s(&bad), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.contains("bad.toml:4") && e.contains("symbol.b"), "{e}");

    let typo = write(dir.path(), "typo.toml", "[symbol]\norder = 1\nkind = \"homogenous\"\n");
    let o = run(&["analyze", "--symbol", s(&typo)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = run(&["analyze", "--symbol", s(&dir.path().join("missing.toml"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn resolution_rule_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &homogeneous_cfg("sin(t)", 128, 32.0));
    let o = run(&["analyze", "--symbol", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--nt 806"), "{}", stderr(&o));
}

#[test]
fn precedence_defaults_config_env_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &homogeneous_cfg("sin(t)", 512, 16.0));
    let nt_of = |extra_env: Option<&str>, flag: Option<&str>| {
        let out = dir.path().join("o");
        let mut c = bin();
        c.args(["analyze", "--symbol", s(&cfg), "--out", s(&out)]);
        if let Some(v) = extra_env {
            c.env("TORSOLV_NT", v);
        }
        if let Some(v) = flag {
            c.args(["--nt", v]);
        }
        let o = c.output().unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        toml_at(&out.join("verdict.toml"))["nt"].as_integer().unwrap()
    };
    assert_eq!(nt_of(None, None), 512);
    assert_eq!(nt_of(Some("1024"), None), 1024);
    assert_eq!(nt_of(Some("1024"), Some("2048")), 2048);

    // built-in default when neither file nor overrides give a value
    let bare = write(dir.path(), "bare.toml", "[symbol]\norder = 1\nkind = \"homogeneous\"\nb = \"sin(t)\"\n");
    let out = dir.path().join("bare");
    let o = bin().args(["analyze", "--symbol", s(&bare), "--out", s(&out), "--K", "8"]).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(toml_at(&out.join("verdict.toml"))["nt"].as_integer(), Some(1024));

    // symbol path itself from the environment
    let o = bin().args(["analyze", "--out", s(&out)]).env("TORSOLV_SYMBOL", s(&cfg)).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn outputs_are_bit_stable_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &homogeneous_cfg("cos(2t) + 0.3*sin(t)", 512, 16.0));
    let mut outs = Vec::new();
    for threads in ["1", "4", "4"] {
        let out = dir.path().join(format!("o{}", outs.len()));
        let o = run(&["analyze", "--symbol", s(&cfg), "--out", s(&out), "--threads", threads]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        outs.push(out);
    }
    for f in ["conditions.csv", "verdict.toml", "plot_dstar.csv", "corollary.csv"] {
        let a = fs::read(outs[0].join(f)).unwrap();
        for o in &outs[1..] {
            assert_eq!(a, fs::read(o.join(f)).unwrap(), "{f}");
        }
    }
}

// ------------------------------------------------------------------ solve

struct SolveCase {
    dir: tempfile::TempDir,
    cfg: PathBuf,
    grid: CircleGrid,
    freq_box: FrequencyBox,
    spec: SymbolSpec,
}

fn separable_case(re: &str, im: &str, nt: usize, cutoff: f64) -> SolveCase {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "[symbol]\norder = 1\nkind = \"separable\"\na = \"{re}\"\nb = \"{im}\"\n[run]\nnt = {nt}\ncutoff = {cutoff}\n"
    );
    let cfg = write(dir.path(), "c.toml", &text);
    let profile = TrigPair::new(torsolv::expr::parse_trig(re).unwrap(), torsolv::expr::parse_trig(im).unwrap());
    let spec = SymbolSpec::new(1.0, SymbolVariant::Separable { profile, weight: Weight::NormPower(1.0) });
    SolveCase {
        dir,
        cfg,
        grid: CircleGrid::new(nt).unwrap(),
        freq_box: FrequencyBox::new(1, cutoff).unwrap(),
        spec,
    }
}

fn smooth_field(case: &SolveCase, seed: u64) -> FourierField {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let coefs: Vec<(f64, f64, f64)> = (0..case.freq_box.len()).map(|_| (r.gen(), r.gen(), r.gen())).collect();
    FourierField::from_fn(&case.grid, &case.freq_box, |t, xi| {
        let idx = case.freq_box.index_of(xi).unwrap();
        let (a, b, c) = coefs[idx];
        let w = (-0.5 * xi[0].abs() as f64).exp();
        Complex64::new(a + (t + c).cos(), b * (2.0 * t).sin()) * w
    })
    .unwrap()
}

#[test]
fn solve_recovers_planted_solution() {
    // c₀(ξ) = 0.3|ξ| is an integer exactly when ξ ≡ 0 mod 10
    let case = separable_case("0.3", "0.4*sin(t)", 256, 20.0);
    let profiles = evaluate(&case.spec, &case.grid, &case.freq_box, EvalOptions::default()).unwrap();
    assert!(profiles.iter().any(|p| p.resonant) && profiles.iter().any(|p| !p.resonant));
    let u0 = smooth_field(&case, 5);
    let f = apply_p(&u0, &profiles).unwrap();
    let rhs = case.dir.path().join("f.csv");
    write_field(&rhs, &f, Format::Csv).unwrap();
    let out = case.dir.path().join("out");
    let o = run(&["solve", "--symbol", s(&case.cfg), "--rhs", s(&rhs), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = toml_at(&out.join("solve.toml"));
    assert!(summary["relative_residual"].as_float().unwrap() <= 1e-8, "{summary}");
    let u = read_field(&out.join("u.csv"), &case.grid, &case.freq_box).unwrap();
    let pu = apply_p(&u, &profiles).unwrap();
    let err = pu.data().iter().zip(f.data()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err <= 1e-8 * f.sup_norm(), "{err}");
    // off 𝒵 the solution is unique
    for (idx, p) in profiles.iter().enumerate() {
        if !p.resonant {
            let d = u.slice(idx).iter().zip(u0.slice(idx)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(d <= 1e-8, "{:?} {d}", p.xi);
        }
    }
}

#[test]
fn solve_zero_forcing_gives_zero() {
    let case = separable_case("0", "sin(t)", 64, 8.0);
    let rhs = case.dir.path().join("f.bin");
    write_field(&rhs, &FourierField::zeros(&case.grid, &case.freq_box), Format::Binary).unwrap();
    let out = case.dir.path().join("out");
    let o = run(&["solve", "--symbol", s(&case.cfg), "--rhs", s(&rhs), "--out", s(&out), "--format", "binary"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let u = read_field(&out.join("u.bin"), &case.grid, &case.freq_box).unwrap();
    assert_eq!(u.sup_norm(), 0.0);
}

#[test]
fn solve_sine_symbol_loses_at_most_one_power() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &homogeneous_cfg("sin(t)", 1024, 64.0));
    let grid = CircleGrid::new(1024).unwrap();
    let freq_box = FrequencyBox::new(1, 64.0).unwrap();
    let spec = torsolv::config::RunConfig::load(&cfg, &Default::default()).unwrap().symbol;
    let profiles = evaluate(&spec, &grid, &freq_box, EvalOptions::default()).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(17);
    let raw = FourierField::from_fn(&grid, &freq_box, |t, xi| {
        let w = (1.0 + xi[0].abs() as f64).powi(-6);
        let (a, b): (f64, f64) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        Complex64::new(a * t.cos() + 0.3, b * (3.0 * t).sin()) * w
    })
    .unwrap();
    let slices =
        profiles.iter().enumerate().map(|(i, p)| project_admissible(p, raw.slice(i)).unwrap()).collect::<Vec<_>>();
    let f = FourierField::from_slices(&grid, &freq_box, slices).unwrap();
    let rhs = dir.path().join("f.csv");
    write_field(&rhs, &f, Format::Csv).unwrap();
    let out = dir.path().join("out");
    let o = run(&["solve", "--symbol", s(&cfg), "--rhs", s(&rhs), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = toml_at(&out.join("solve.toml"));
    let u_exp = summary["decay_u"]["exponent"].as_float().unwrap();
    let f_exp = decay_fit(&f, 0).unwrap().exponent;
    assert!(u_exp >= f_exp - 1.0, "{u_exp} vs {f_exp}");
}

#[test]
fn solve_closure_violation_exits_3() {
    let case = separable_case("0", "sin(t)", 64, 4.0);
    // every ξ is resonant; a constant slice at ξ = 3 has a nonzero compatibility integral
    let mut f = FourierField::zeros(&case.grid, &case.freq_box);
    let idx = case.freq_box.index_of(&[3]).unwrap();
    f.slice_mut(idx).fill(Complex64::new(1.0, 0.0));
    let rhs = case.dir.path().join("f.csv");
    write_field(&rhs, &f, Format::Csv).unwrap();
    let o = run(&["solve", "--symbol", s(&case.cfg), "--rhs", s(&rhs), "--out", s(case.dir.path())]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("[3]"), "{}", stderr(&o));

    // a field from a different box is an input error
    let other = FourierField::zeros(&case.grid, &FrequencyBox::new(1, 6.0).unwrap());
    write_field(&rhs, &other, Format::Csv).unwrap();
    let o = run(&["solve", "--symbol", s(&case.cfg), "--rhs", s(&rhs), "--out", s(case.dir.path())]);
    assert_eq!(code(&o), 2);
}

// ------------------------------------------------------------------ forge

fn tabulated_cfg(dir: &Path, table: &Tabulated, nt: usize, cutoff: f64, forge: &str) -> PathBuf {
    write_tabulated(&dir.join("c.csv"), table).unwrap();
    write(
        dir,
        "c.toml",
        &format!(
            "[symbol]\norder = 1\nkind = \"tabulated\"\ntable = \"c.csv\"\n[run]\nnt = {nt}\ncutoff = {cutoff}\neps_z = 1e-14\n[forge]\n{forge}"
        ),
    )
}

fn bounds(out: &Path) -> Vec<toml::Value> {
    toml_at(&out.join("forged.toml"))["mode"].as_array().unwrap().clone()
}

#[test]
fn forge_dc_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let grid = CircleGrid::new(1024).unwrap();
    let freq_box = FrequencyBox::new(1, 16.0).unwrap();
    let table = Tabulated::from_fn(&grid, &freq_box, |t, xi| {
        let k = [2, 4, 8, 16].iter().position(|&p| p == xi[0]);
        let a = k.map_or(0.5, |k| 0.5 * (1.0 + xi[0] as f64).powi(-(k as i32 + 1)));
        Complex64::new(a, t.sin())
    });
    let cfg = tabulated_cfg(dir.path(), &table, 1024, 16.0, "tag = \"dc\"\nsequence = [[2], [4], [8], [16]]\n");
    let out = dir.path().join("out");
    let o = run(&["forge", "--symbol", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let modes = bounds(&out);
    assert_eq!(modes.len(), 4);
    for m in &modes {
        let (measured, target) = (m["measured"].as_float().unwrap(), m["target"].as_float().unwrap());
        assert!((measured - target).abs() <= 1e-8, "{m}");
    }
    let f = read_field(&out.join("forged.csv"), &grid, &freq_box).unwrap();
    assert!(f.slice_at(&[3]).unwrap().iter().all(|z| z.norm() == 0.0));
    let side = toml_at(&out.join("forged.toml"));
    assert!(side["solution_decay"].as_float().unwrap() <= 0.1);
    assert!(side["smooth"].as_bool().unwrap());
}

#[test]
fn forge_alpha_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let grid = CircleGrid::new(1024).unwrap();
    let freq_box = FrequencyBox::new(1, 16.0).unwrap();
    let table = Tabulated::from_fn(&grid, &freq_box, |t, xi| Complex64::new(0.5, t.cos() * xi[0].abs() as f64));
    let cfg = tabulated_cfg(dir.path(), &table, 1024, 16.0, "tag = \"alpha\"\n");
    let out = dir.path().join("out");
    let o = run(&["forge", "--symbol", s(&cfg), "--out", s(&out), "--xi", "2", "--xi", "4", "--xi", "8", "--xi", "16"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for m in bounds(&out) {
        let xi = m["xi"][0].as_integer().unwrap() as f64;
        assert!(m["measured"].as_float().unwrap() >= 0.25 / xi, "{m}");
        assert!(m["divisor"].as_float().unwrap() <= 2.0);
    }
}

#[test]
fn forge_beta_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &homogeneous_cfg("cos(2t)", 1024, 16.0));
    let out = dir.path().join("out");
    let o = run(&["forge", "--symbol", s(&cfg), "--out", s(&out), "--tag", "beta", "--terms", "4", "--format", "binary"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let modes = bounds(&out);
    assert_eq!(modes.len(), 4);
    for m in &modes {
        let xi = m["xi"][0].as_integer().unwrap() as f64;
        assert!(m["measured"].as_float().unwrap() >= 0.5 / xi, "{m}");
        assert_eq!(m["bumps"].as_array().unwrap().len(), 2);
    }
    assert!(out.join("forged.bin").exists());
    let table = fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn forge_without_witnesses_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &homogeneous_cfg("sin(t)", 1024, 16.0));
    let o = run(&["forge", "--symbol", s(&cfg), "--out", s(dir.path()), "--tag", "alpha"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).contains("no witnesses"));
    // golden-ratio margins plant no small divisors
    let golden = write(
        dir.path(),
        "g.toml",
        "[symbol]\norder = 1\nkind = \"homogeneous\"\na = \"1.618033988749895\"\nb = \"1 + 0.5*cos(t)\"\n[run]\nnt = 1024\ncutoff = 32\n",
    );
    let o = run(&["forge", "--symbol", s(&golden), "--out", s(dir.path()), "--tag", "dc"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    // the tag is required
    let o = run(&["forge", "--symbol", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
}
