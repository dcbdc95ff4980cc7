mod common;

use common::{profile, random_trig, rng, sample, GOLDEN};
use torsolv_core::conditions::{aggregate, condition_table, AggregateConfig};
use torsolv_core::homogeneous::{
    connected_all, corollary_verdict, corollary_verdict_unreduced, perturbed_principal_check, sign_change,
    strict_local_maxima, sublevel_components, CorollaryConfig, CorollaryReason, PerturbedOutcome,
};
use torsolv_core::spectral::{CircleGrid, FrequencyBox};
use torsolv_core::symbol::{
    evaluate, EvalOptions, HomogeneousSpec, SymbolSpec, SymbolVariant, TrigPair, Weight,
};
use torsolv_core::trig::TrigPoly;
use torsolv_core::Error;

fn homogeneous(re: TrigPoly, im: TrigPoly) -> SymbolSpec {
    SymbolSpec::new(1.0, SymbolVariant::Homogeneous(HomogeneousSpec::isotropic(1.0, TrigPair::new(re, im))))
}

/// Local maxima of the cyclic sequence after merging runs of equal values.
fn merged_maxima(b: &[f64]) -> usize {
    let mut v: Vec<f64> = Vec::new();
    for &x in b {
        if v.last() != Some(&x) {
            v.push(x);
        }
    }
    while v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    let m = v.len();
    if m < 2 {
        return 0;
    }
    (0..m).filter(|&i| v[i] > v[(i + m - 1) % m] && v[i] > v[(i + 1) % m]).count()
}

/// Largest component count over every midpoint between distinct samples.
fn brute_max_components(b: &[f64]) -> usize {
    let mut vals = b.to_vec();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    vals.windows(2)
        .map(|w| {
            let lambda = 0.5 * (w[0] + w[1]);
            let n = b.len();
            let below: Vec<bool> = b.iter().map(|&x| x < lambda).collect();
            (0..n).filter(|&i| below[i] && !below[(i + n - 1) % n]).count()
        })
        .max()
        .unwrap_or(0)
}

#[test]
fn sign_change_examples() {
    let g = CircleGrid::new(1024).unwrap();
    assert!(sign_change(&sample(&g, f64::sin), 1e-9).changes);
    assert!(!sign_change(&sample(&g, |t| 1.0 + 0.5 * t.cos()), 1e-9).changes);
    let grazing = sign_change(&sample(&g, |t| t.cos() - 0.999), 1e-6);
    assert!(grazing.changes && grazing.near_degenerate);
    let zero = sign_change(&vec![0.0; 16], 1e-9);
    assert!(!zero.changes && zero.degenerate);
}

#[test]
fn component_counts() {
    let g = CircleGrid::new(512).unwrap();
    let well = sample(&g, |t| -t.cos());
    let humps = sample(&g, |t| (2.0 * t).sin() / 2.0);
    assert_eq!(sublevel_components(&well, 0.0), 1);
    assert_eq!(sublevel_components(&humps, -0.25), 2);
    assert_eq!(sublevel_components(&well, -2.0), 0);
    assert_eq!(sublevel_components(&well, 2.0), 1);
}

#[test]
fn sweep_matches_local_maxima() {
    let g = CircleGrid::new(256).unwrap();
    let mut r = rng(11);
    for i in 0..40 {
        let b = random_trig(&mut r, 5, 1.0);
        let p = profile(&g, &[1], &TrigPoly::default(), &b, 1e-9, i);
        let scan = connected_all(&p);
        let samples = &p.b_prim.samples;
        assert_eq!(scan.connected_all, merged_maxima(samples) <= 1);
        assert_eq!(scan.max_components, brute_max_components(samples));
        assert_eq!(strict_local_maxima(samples), merged_maxima(samples));
    }
}

#[test]
fn corollary_gallery() {
    let g = CircleGrid::new(1024).unwrap();
    let b = FrequencyBox::new(1, 64.0).unwrap();
    let cfg = CorollaryConfig::default();
    let sine = corollary_verdict(&homogeneous(TrigPoly::default(), TrigPoly::sin_k(1, 1.0)), &g, &b, cfg).unwrap();
    assert!(sine.solvable);
    let two = corollary_verdict(&homogeneous(TrigPoly::default(), TrigPoly::cos_k(2, 1.0)), &g, &b, cfg).unwrap();
    assert!(!two.solvable);
    assert!(matches!(
        two.first_failure().unwrap().reason,
        CorollaryReason::SublevelDisconnected { components: 2, .. }
    ));
    let im = &TrigPoly::constant(1.0) + &TrigPoly::cos_k(1, 0.5);
    let golden = corollary_verdict(&homogeneous(TrigPoly::constant(GOLDEN), im), &g, &b, cfg).unwrap();
    assert!(golden.solvable);
    let drift = corollary_verdict(&homogeneous(TrigPoly::constant(GOLDEN), TrigPoly::sin_k(1, 1.0)), &g, &b, cfg)
        .unwrap();
    assert!(matches!(drift.first_failure().unwrap().reason, CorollaryReason::SignChange { .. }));
}

#[test]
fn reduction_to_primitive_directions() {
    let g = CircleGrid::new(256).unwrap();
    let b = FrequencyBox::new(2, 12.0).unwrap();
    let cfg = CorollaryConfig::default();
    let specs = [
        homogeneous(TrigPoly::default(), TrigPoly::sin_k(1, 1.0)),
        homogeneous(TrigPoly::default(), TrigPoly::cos_k(2, 1.0)),
        homogeneous(TrigPoly::constant(0.5), TrigPoly::sin_k(1, 1.0)),
        homogeneous(TrigPoly::constant(GOLDEN), &TrigPoly::constant(1.0) + &TrigPoly::cos_k(1, 0.5)),
    ];
    for s in &specs {
        let reduced = corollary_verdict(s, &g, &b, cfg).unwrap();
        let full = corollary_verdict_unreduced(s, &g, &b, cfg).unwrap();
        assert_eq!(reduced.solvable, full.solvable);
        for (x, y) in reduced.rows.iter().zip(&full.rows) {
            assert_eq!((x.resonant, x.reason.is_ok(), x.max_components), (y.resonant, y.reason.is_ok(), y.max_components));
        }
    }
}

#[test]
fn corollary_needs_positive_order() {
    let g = CircleGrid::new(64).unwrap();
    let b = FrequencyBox::new(1, 8.0).unwrap();
    let h = HomogeneousSpec::isotropic(-1.0, TrigPair::imaginary(TrigPoly::sin_k(1, 1.0)));
    let spec = SymbolSpec::new(-1.0, SymbolVariant::Homogeneous(h));
    let err = corollary_verdict(&spec, &g, &b, CorollaryConfig::default()).unwrap_err();
    assert!(matches!(err, Error::InvalidSymbol(_)));
}

fn perturbed(principal_im: TrigPoly, lower_im: TrigPoly) -> SymbolSpec {
    SymbolSpec::new(
        1.0,
        SymbolVariant::HomogeneousPlusLower {
            principal: HomogeneousSpec::isotropic(1.0, TrigPair::imaginary(principal_im)),
            lower: TrigPair::imaginary(lower_im),
            lower_weight: Weight::One,
            lower_order: 0.0,
        },
    )
}

#[test]
fn perturbed_principal_examples() {
    let g = CircleGrid::new(256).unwrap();
    let b = FrequencyBox::new(1, 16.0).unwrap();
    let zero_mean = perturbed(TrigPoly::sin_k(1, 1.0), TrigPoly::constant(0.1));
    assert_eq!(perturbed_principal_check(&zero_mean, &g, &b, 1e-9, 1e-9).unwrap(), PerturbedOutcome::Inconclusive);
    let shifted = perturbed(&TrigPoly::constant(0.2) + &TrigPoly::sin_k(1, 1.0), TrigPoly::cos_k(1, 1.0));
    match perturbed_principal_check(&shifted, &g, &b, 1e-9, 1e-9).unwrap() {
        PerturbedOutcome::NotSolvable { principal_mean, .. } => assert!((principal_mean - 0.2).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn perturbed_principal_through_general_conditions() {
    let g = CircleGrid::new(4096).unwrap();
    let b = FrequencyBox::new(1, 128.0).unwrap();
    let spec = perturbed(&TrigPoly::constant(0.2) + &TrigPoly::sin_k(1, 1.0), TrigPoly::cos_k(1, 1.0));
    let profiles = evaluate(&spec, &g, &b, EvalOptions::default()).unwrap();
    let v = aggregate(condition_table(&profiles, 1.0).unwrap(), 128.0, AggregateConfig::default()).unwrap();
    assert!(!v.bounded, "slope {}", v.growth_slope);
    assert!(!v.solvable_at_cutoff);
}
