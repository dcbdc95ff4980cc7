use std::f64::consts::PI;

use num_complex::Complex64;
use torsolv_core::counterexample::{
    bump, forge_alpha, forge_beta, forge_dc, measure_bounds, ForgeOptions, ForgeSetup, ForgeTag, ForgedRHS, Sequence,
};
use torsolv_core::solver::{closure_membership, solve_global, SolveOptions};
use torsolv_core::spectral::{analyze, decay_fit, line_fit, CircleGrid, FourierField, FrequencyBox};
use torsolv_core::symbol::{
    evaluate, EvalOptions, HomogeneousSpec, ModeProfile, SymbolSpec, SymbolVariant, Tabulated, TrigPair,
};
use torsolv_core::trig::TrigPoly;
use torsolv_core::Error;

fn dyadic(k_max: u32) -> Vec<Vec<i64>> {
    (1..=k_max).map(|k| vec![1i64 << k]).collect()
}

struct Case {
    grid: CircleGrid,
    freq_box: FrequencyBox,
    profiles: Vec<ModeProfile>,
    order: f64,
}

impl Case {
    fn new(nt: usize, cutoff: f64, spec: SymbolSpec, eps_z: f64) -> Self {
        let grid = CircleGrid::new(nt).unwrap();
        let freq_box = FrequencyBox::new(1, cutoff).unwrap();
        let opts = EvalOptions { eps_z, basepoint: 0 };
        let profiles = evaluate(&spec, &grid, &freq_box, opts).unwrap();
        Self { grid, freq_box, profiles, order: spec.order }
    }

    fn setup(&self) -> ForgeSetup<'_> {
        ForgeSetup { grid: &self.grid, freq_box: &self.freq_box, profiles: &self.profiles, order: self.order }
    }
}

/// `c(t, ξ) = ε(ξ) + i sin t` with `ε(2^k) = (1+2^k)^{-k}/2` and `ε = 1/2` elsewhere.
fn liouville_case() -> Case {
    let grid = CircleGrid::new(4096).unwrap();
    let freq_box = FrequencyBox::new(1, 64.0).unwrap();
    let planted = dyadic(6);
    let tab = Tabulated::from_fn(&grid, &freq_box, |t, xi| {
        let a = match planted.iter().position(|p| p.as_slice() == xi) {
            Some(i) => 0.5 * (1.0 + xi[0] as f64).powi(-(i as i32 + 1)),
            None => 0.5,
        };
        Complex64::new(a, t.sin())
    });
    Case::new(4096, 64.0, SymbolSpec::new(1.0, SymbolVariant::Tabulated(Box::new(tab))), 1e-14)
}

fn alpha_case() -> Case {
    let grid = CircleGrid::new(4096).unwrap();
    let freq_box = FrequencyBox::new(1, 64.0).unwrap();
    let tab = Tabulated::from_fn(&grid, &freq_box, |t, xi| Complex64::new(0.5, t.cos() * xi[0].unsigned_abs() as f64));
    Case::new(4096, 64.0, SymbolSpec::new(1.0, SymbolVariant::Tabulated(Box::new(tab))), 1e-9)
}

fn beta_case() -> Case {
    let h = HomogeneousSpec::isotropic(1.0, TrigPair::imaginary(TrigPoly::cos_k(2, 1.0)));
    Case::new(4096, 64.0, SymbolSpec::new(1.0, SymbolVariant::Homogeneous(h)), 1e-9)
}

fn solution_decay(case: &Case, forged: &ForgedRHS) -> f64 {
    let sol = solve_global(&forged.field, &case.profiles, SolveOptions::default()).unwrap();
    let xs: Vec<f64> = forged.modes.iter().map(|m| (1.0 + m.xi[0] as f64).ln()).collect();
    let ys: Vec<f64> = forged
        .modes
        .iter()
        .map(|m| {
            let idx = case.freq_box.index_of(&m.xi).unwrap();
            sol.u.slice_sup(idx).ln()
        })
        .collect();
    -line_fit(&xs, &ys).0
}

fn assert_admissible(case: &Case, forged: &ForgedRHS) {
    let report = closure_membership(&forged.field, &case.profiles, 1e-10).unwrap();
    assert!(report.member, "{:?}", report.worst);
    assert!(forged.smooth, "{:?}", forged.decay);
    for (idx, xi) in case.freq_box.freqs().iter().enumerate() {
        if !forged.modes.iter().any(|m| &m.xi == xi) {
            assert!(forged.field.is_zero_slice(idx));
        }
    }
}

#[test]
fn bump_coefficients_decay_fast() {
    let g = CircleGrid::new(1024).unwrap();
    let (_, s) = bump(&g, 0.0, PI, 0.5).unwrap();
    let z: Vec<Complex64> = s.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let spec = analyze(&g, &z).unwrap();
    // monotone majorant sup_{|j| ≥ κ} |φ̂_j| over the upper half of the spectrum
    let mag = |k: i64| spec.get(k).norm().max(spec.get(-k).norm());
    let (xs, ys): (Vec<f64>, Vec<f64>) = (256..512i64)
        .map(|k| ((k as f64).ln(), (k..512).map(mag).fold(0.0, f64::max).ln()))
        .unzip();
    let (slope, _, _) = line_fit(&xs, &ys);
    assert!(-slope >= 8.0, "fitted exponent {}", -slope);
}

#[test]
fn bump_integral_covers_plateau() {
    let g = CircleGrid::new(1024).unwrap();
    for &(a, b, p) in &[(0.0, PI, 0.5), (1.0, 4.0, 0.6), (5.0, 7.5, 0.2)] {
        let (spec, s) = bump(&g, a, b, p).unwrap();
        let integral: f64 = g.step() * s.iter().sum::<f64>();
        assert!(integral >= p * spec.len() - 1e-12);
        assert!(integral > 0.0);
    }
}

#[test]
fn dc_modes_reproduce_bump_integral() {
    let case = liouville_case();
    let setup = case.setup();
    let forged = forge_dc(&setup, &dyadic(6), None, ForgeOptions::default()).unwrap();
    assert_eq!(forged.tag, ForgeTag::Dc);
    assert_admissible(&case, &forged);
    let checks = measure_bounds(&setup, &forged, SolveOptions::default()).unwrap();
    assert_eq!(checks.len(), 6);
    for c in &checks {
        assert!((c.measured - c.target).abs() <= 1e-8, "{c:?}");
        assert!(c.kernel_sup.unwrap() <= 1.0 + 1e-12);
        assert!(c.margin <= (1.0 + c.xi[0] as f64).powi(-(c.k as i32)));
    }
    assert!(solution_decay(&case, &forged) <= 0.1);
}

#[test]
fn dc_rejects_interval_straddling_maxima() {
    let case = liouville_case();
    // every t_k sits at π
    let err = forge_dc(&case.setup(), &dyadic(3), Some((2.0, 4.0)), ForgeOptions::default()).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
    let err = forge_dc(&case.setup(), &[vec![2], vec![4], vec![2]], None, ForgeOptions::default()).unwrap_err();
    assert_eq!(err, Error::SequenceRepeats { xi: vec![2] });
}

#[test]
fn dc_explicit_interval_after_maxima() {
    let case = liouville_case();
    let setup = case.setup();
    let forged = forge_dc(&setup, &dyadic(4), Some((4.0, 5.5)), ForgeOptions::default()).unwrap();
    for c in measure_bounds(&setup, &forged, SolveOptions::default()).unwrap() {
        assert!((c.measured - c.target).abs() <= 1e-8, "{c:?}");
    }
}

#[test]
fn alpha_modes_stay_large() {
    let case = alpha_case();
    let setup = case.setup();
    let forged = forge_alpha(&setup, &Sequence::Explicit(dyadic(6)), ForgeOptions::default()).unwrap();
    assert_admissible(&case, &forged);
    let checks = measure_bounds(&setup, &forged, SolveOptions::default()).unwrap();
    assert_eq!(checks.len(), 6);
    for (c, m) in checks.iter().zip(&forged.modes) {
        assert!(c.measured >= c.target, "{c:?}");
        assert!(c.divisor.unwrap() <= 2.0);
        assert!(m.gap > m.k as f64 * (m.xi[0] as f64).ln());
        assert!(m.bumps[0].len() >= (m.xi[0] as f64).recip());
    }
    assert!(solution_decay(&case, &forged) <= case.order + 0.1);
}

#[test]
fn alpha_auto_sequence() {
    let case = alpha_case();
    let forged = forge_alpha(&case.setup(), &Sequence::Auto(4), ForgeOptions::default()).unwrap();
    assert_eq!(forged.modes.len(), 4);
    let norms: Vec<i64> = forged.modes.iter().map(|m| m.xi[0].abs()).collect();
    assert!(norms.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn alpha_without_witnesses() {
    // b ≥ 0 with zero-free mean: B is monotone, no window drops
    let case = Case::new(
        512,
        16.0,
        SymbolSpec::new(
            1.0,
            SymbolVariant::Separable {
                profile: TrigPair::new(TrigPoly::constant(0.25), TrigPoly::constant(1.0)),
                weight: torsolv_core::symbol::Weight::NormPower(1.0),
            },
        ),
        1e-9,
    );
    let err = forge_alpha(&case.setup(), &Sequence::Auto(3), ForgeOptions::default()).unwrap_err();
    assert_eq!(err, Error::NoWitness { tag: "alpha" });
}

#[test]
fn beta_arc_integrals_stay_large() {
    let case = beta_case();
    let setup = case.setup();
    let forged = forge_beta(&setup, &Sequence::Explicit(dyadic(6)), ForgeOptions::default()).unwrap();
    assert_admissible(&case, &forged);
    let checks = measure_bounds(&setup, &forged, SolveOptions::default()).unwrap();
    assert_eq!(checks.len(), 6);
    for (c, m) in checks.iter().zip(&forged.modes) {
        assert!(c.measured >= c.target, "{c:?}");
        assert!((c.measured - m.bump_integral).abs() <= 1e-10 * m.bump_integral.max(1.0), "{c:?} {m:?}");
    }
    assert!(solution_decay(&case, &forged) <= case.order + 0.1);
}

#[test]
fn beta_rejects_non_resonant() {
    let case = alpha_case();
    let err = forge_beta(&case.setup(), &Sequence::Explicit(dyadic(2)), ForgeOptions::default()).unwrap_err();
    assert!(matches!(err, Error::NotResonant { .. }));
}

#[test]
fn forged_fields_are_smooth_in_x() {
    let case = beta_case();
    let forged = forge_beta(&case.setup(), &Sequence::Explicit(dyadic(6)), ForgeOptions::default()).unwrap();
    let fit = decay_fit(&forged.field, 0).unwrap();
    assert!(fit.exponent >= 4.0);
    let zero = FourierField::zeros(&case.grid, &case.freq_box);
    assert_eq!(zero.sup_norm(), 0.0);
}
