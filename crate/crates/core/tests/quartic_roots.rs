mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use dualnls::quartic::DEFAULT_CLUSTER_TOL;
use dualnls::{build_quartic, classify_roots, derive_coefficients, find_roots, QuarticPoly, RootPattern};

/// Matches each root to the nearest unused oracle eigenvalue. Eigenvalues of
/// a `k`-fold root split by `O(ε^{1/k})`, but their mean is well conditioned,
/// so clusters are compared through their means.
fn max_oracle_gap(roots: &[Complex64; 4], oracle: &[Complex64]) -> f64 {
    let mut used = [false; 4];
    let mut pairs = Vec::new();
    for r in roots {
        let (j, _) = oracle
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|a, b| (a.1 - r).norm().total_cmp(&(b.1 - r).norm()))
            .unwrap();
        used[j] = true;
        pairs.push((*r, oracle[j]));
    }
    let mut gap = 0.0f64;
    for (r, _) in &pairs {
        let cluster: Vec<&(Complex64, Complex64)> = pairs.iter().filter(|(s, _)| s == r).collect();
        let mean = cluster.iter().map(|p| p.1).sum::<Complex64>() / cluster.len() as f64;
        gap = gap.max((mean - r).norm());
    }
    gap
}

#[test]
fn golden_roots_match_companion_oracle() {
    let p = common::golden();
    let q = build_quartic(&p, &derive_coefficients(&p).unwrap());
    let roots = find_roots(&q);
    let oracle = common::companion_roots([q.c3, q.c2, q.c1, q.c0]);
    let gap = max_oracle_gap(&roots, &oracle);
    assert!(gap < 1e-9, "{gap}");
}

#[test]
fn random_quartics_match_companion_oracle() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..200 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let q = QuarticPoly::new(c[0], c[1], c[2], c[3]);
        let roots = find_roots(&q);
        let oracle = common::companion_roots(c);
        assert!(max_oracle_gap(&roots, &oracle) < 1e-9, "{c:?}");
        let bound = 1e-12 * q.coeff_norm().max(1.0) * (1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max)).powi(4);
        for r in roots {
            assert!(q.eval(r).norm() < bound, "{c:?} {r}");
        }
    }
}

#[test]
fn spec_examples() {
    let quad = find_roots(&QuarticPoly::from_roots([2.0; 4]));
    let c = classify_roots(&quad, 1e-8).unwrap();
    assert_eq!(c.pattern, RootPattern::Quadruple { a1: 2.0 });

    let r = find_roots(&QuarticPoly::from_roots([4.0, 3.0, 2.0, 1.0]));
    let c = classify_roots(&r, 1e-8).unwrap();
    let RootPattern::FourDistinct { a1, a2, a3, a4 } = c.pattern else {
        panic!("{:?}", c.pattern)
    };
    assert!(a1 > a2 && a2 > a3 && a3 > a4);
    assert!((c.modulus_sq().unwrap() - 0.75).abs() < 1e-12);
}

/// Draws `n` distinct values in `[−3, 3]` at least `gap` apart.
fn distinct(rng: &mut impl Rng, n: usize, gap: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let ok = (0..n).all(|i| (0..i).all(|j| (v[i] - v[j]).abs() > gap));
        if ok {
            return v;
        }
    }
}

fn multiset_for(kind: usize, v: &[f64]) -> [f64; 4] {
    match kind {
        0 => [v[0]; 4],
        1 => [v[0], v[0], v[0], v[1]],
        2 => [v[0], v[0], v[1], v[1]],
        3 => [v[0], v[0], v[1], v[2]],
        _ => [v[0], v[1], v[2], v[3]],
    }
}

const PATTERN_NAMES: [&str; 5] = ["Quadruple", "TripleSimple", "DoubleDouble", "DoubleTwoSimple", "FourDistinct"];

/// Checks the classified multiset, its ordering and the coefficient
/// reconstruction for one constructed quartic.
fn check_constructed(kind: usize, v: &[f64]) -> Result<(), String> {
    let ms = multiset_for(kind, v);
    let q = QuarticPoly::from_roots(ms);
    let cls = classify_roots(&find_roots(&q), DEFAULT_CLUSTER_TOL).map_err(|e| e.to_string())?;
    if cls.pattern.name() != PATTERN_NAMES[kind] {
        return Err(format!("{ms:?} classified as {:?}", cls.pattern));
    }
    let got = cls.pattern.multiset().unwrap();
    let back = common::expand_roots(got);
    let rel = back.iter().zip(q.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / q.coeff_norm().max(1.0);
    if rel > 1e-8 {
        return Err(format!("{ms:?} reconstruction {rel:e}"));
    }
    let ordered = match cls.pattern {
        RootPattern::TripleSimple { .. } | RootPattern::Quadruple { .. } => true,
        RootPattern::DoubleDouble { a1, a2 } => a1 > a2,
        RootPattern::DoubleTwoSimple { a2, a3, .. } => a2 > a3,
        RootPattern::FourDistinct { a1, a2, a3, a4 } => {
            let l2 = cls.modulus_sq().unwrap();
            a1 > a2 && a2 > a3 && a3 > a4 && l2 > 0.0 && l2 < 1.0
        }
        RootPattern::Unsupported { .. } => false,
    };
    if !ordered {
        return Err(format!("{:?} not ordered", cls.pattern));
    }
    Ok(())
}

#[test]
fn thousand_constructed_quartics_classify() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    for i in 0..1000 {
        let kind = i % 5;
        let v = distinct(&mut rng, 4, 0.05);
        check_constructed(kind, &v).unwrap();
    }
}

#[test]
fn complex_roots_are_unsupported() {
    // (Γ² + 2Γ + 5)(Γ − 1)²
    let q = QuarticPoly::new(0.0, 2.0, -8.0, 5.0);
    let cls = classify_roots(&find_roots(&q), DEFAULT_CLUSTER_TOL).unwrap();
    assert!(matches!(cls.pattern, RootPattern::Unsupported { .. }), "{:?}", cls.pattern);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn find_roots_inverts_expansion(
        kind in 0usize..5,
        raw in proptest::collection::vec(-3.0f64..3.0, 4),
    ) {
        let ok = (0..4).all(|i| (0..i).all(|j| (raw[i] - raw[j]).abs() > 0.05));
        prop_assume!(ok);
        let ms = multiset_for(kind, &raw);
        let roots = find_roots(&QuarticPoly::from_roots(ms));
        let mut got: Vec<f64> = roots.iter().map(|z| z.re).collect();
        let mut want = ms.to_vec();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-6 * (1.0 + w.abs()), "{:?} vs {:?}", got, want);
        }
        prop_assert!(roots.iter().all(|z| z.im.abs() < 1e-6));
    }

    #[test]
    fn expanded_coefficients_agree_with_oracle(raw in proptest::collection::vec(-3.0f64..3.0, 4)) {
        let r = [raw[0], raw[1], raw[2], raw[3]];
        let q = QuarticPoly::from_roots(r);
        let want = common::expand_roots(r);
        for (g, w) in q.coeffs().iter().zip(want) {
            prop_assert!((g - w).abs() < 1e-12 * (1.0 + w.abs()));
        }
    }
}
