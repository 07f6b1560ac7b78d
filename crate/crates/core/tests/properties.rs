use hardy_bounds::cantor::cantor_cdf;
use hardy_bounds::constants::{compute_b, k_sharp, BConfig, Exponents};
use hardy_bounds::measure::{dominates, IntervalQuery, Measure, Transform};
use hardy_bounds::spec::{DensityPreset, MeasureSpec, PieceSpec, TailSpec, WeightSpec};
use hardy_bounds::variational::{oracle_p2q2, rayleigh, TestFunction};
use proptest::prelude::*;

/// Sorted distinct points in `[0, 1)` with weights in `(0, 1]`.
fn atoms(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::btree_map(0u32..1_000_000, 0.001f64..1.0, 1..max).prop_map(|m| {
        let points = m.keys().map(|&k| k as f64 / 1e6).collect();
        let weights = m.values().copied().collect();
        (points, weights)
    })
}

fn atomic(max: usize) -> impl Strategy<Value = Measure> {
    atoms(max).prop_map(|(p, w)| Measure::atoms(p, w).unwrap())
}

fn preset() -> impl Strategy<Value = DensityPreset> {
    prop_oneof![
        Just(DensityPreset::Lebesgue),
        (0.1f64..5.0).prop_map(|rate| DensityPreset::Exponential { rate }),
        (-2.0f64..2.0, 0.1f64..3.0).prop_map(|(mean, sd)| DensityPreset::Gaussian { mean, sd }),
        (0.1f64..4.0, -3.0f64..0.0).prop_map(|(coefficient, exponent)| DensityPreset::Power {
            coefficient,
            exponent,
            origin: 0.0
        }),
    ]
}

fn spec() -> impl Strategy<Value = MeasureSpec> {
    let leaf = prop_oneof![
        Just(MeasureSpec::Zero),
        atoms(8).prop_map(|(points, weights)| MeasureSpec::Atoms {
            points,
            weights,
            tail: None
        }),
        (1i64..5, 0.5f64..2.0, -3.0f64..0.0).prop_map(|(start, coefficient, exponent)| {
            MeasureSpec::Atoms {
                points: vec![],
                weights: vec![],
                tail: Some(TailSpec {
                    start,
                    coefficient,
                    exponent,
                    truncation: 1000,
                }),
            }
        }),
        (preset(), 1.0f64..2.0, 0.5f64..4.0).prop_map(|(density, lo, len)| MeasureSpec::Density {
            pieces: vec![PieceSpec {
                lo,
                hi: lo + len,
                density
            }],
        }),
    ];
    leaf.prop_recursive(2, 6, 1, |inner| {
        prop_oneof![
            (inner.clone(), -2.0f64..0.0).prop_map(|(b, exponent)| MeasureSpec::Weighted {
                base: Box::new(b),
                weight: WeightSpec::XPower { exponent },
            }),
            (inner.clone(), -3.0f64..3.0).prop_map(|(b, s)| MeasureSpec::Transform {
                base: Box::new(b),
                map: Transform::Shift(s),
            }),
            inner.prop_map(|b| MeasureSpec::Transform {
                base: Box::new(b),
                map: Transform::Reflect
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inverse_cdf_brackets_the_level(m in atomic(30), u in 0.0f64..1.0) {
        let total = m.total_mass().unwrap();
        let y = total * (1.0 - u);
        let x = m.inv_cdf(y).unwrap();
        let slack = 1e-12 * total;
        prop_assert!(m.cdf(x).unwrap() >= y - slack);
        prop_assert!(m.cdf_left(x).unwrap() <= y + slack);
    }

    #[test]
    fn cdf_pushes_forward_to_lebesgue(m in atomic(30), a in -0.1f64..1.1, b in -0.1f64..1.1) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let d = m.pushforward_check(&[IntervalQuery::left_open(lo, hi).unwrap()]).unwrap()[0];
        prop_assert!(d <= 1e-12, "discrepancy {d}");
    }

    #[test]
    fn left_shrunk_measures_are_dominated(
        (points, weights) in atoms(20),
        seeds in prop::collection::vec((0.0f64..0.2, 0.0f64..1.0), 20),
    ) {
        let big = Measure::atoms(points.clone(), weights.clone()).unwrap();
        let mut moved: Vec<(f64, f64)> = points
            .iter()
            .zip(&weights)
            .zip(&seeds)
            .map(|((&x, &w), &(dx, s))| (x - dx, w * s))
            .collect();
        moved.sort_by(|a, b| a.0.total_cmp(&b.0));
        moved.dedup_by(|a, b| {
            let same = a.0 == b.0;
            if same {
                b.1 += a.1;
            }
            same
        });
        let small = Measure::atoms(moved.iter().map(|p| p.0).collect(), moved.iter().map(|p| p.1).collect()).unwrap();
        let mut grid: Vec<f64> = points.iter().chain(moved.iter().map(|p| &p.0)).copied().collect();
        grid.push(-1.0);
        grid.sort_by(f64::total_cmp);
        prop_assert!(dominates(&small, &big, &grid).unwrap().holds);
    }

    #[test]
    fn quotient_is_scale_invariant(
        nu in atomic(12),
        mu in atomic(12),
        p in 1.2f64..4.0,
        dq in 0.0f64..3.0,
        cut in 0.0f64..1.0,
        c in 1e-3f64..1e3,
    ) {
        let e = Exponents::new(p, p + dq).unwrap();
        let f = TestFunction::PiecewiseConstant { breakpoints: vec![0.0, cut, 1.0], values: vec![1.0, 0.5] };
        if let Ok(base) = rayleigh(&f, &nu, &mu, &e, 1e-12) {
            let scaled = rayleigh(&f.scaled(c), &nu, &mu, &e, 1e-12).unwrap();
            prop_assert!((scaled.value - base.value).abs() <= 1e-12 * base.value.max(1e-300));
        }
    }

    #[test]
    fn spec_round_trips(s in spec()) {
        let text = s.to_json();
        let back = MeasureSpec::from_json(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_json(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn cantor_function_is_self_similar(x in 0.0f64..=1.0) {
        let l = cantor_cdf(x);
        prop_assert!((cantor_cdf(x / 3.0) - l / 2.0).abs() <= 2e-10);
        prop_assert!((cantor_cdf((x + 2.0) / 3.0) - 0.5 - l / 2.0).abs() <= 2e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// With `nu` and `mu` on disjoint supports, `B <= A <= k_{2,2} B`.
    #[test]
    fn oracle_lies_in_the_sandwich(
        nu_w in prop::collection::vec(0.01f64..1.0, 1..10),
        mu_w in prop::collection::vec(0.01f64..1.0, 1..10),
    ) {
        let nu = Measure::atoms((0..nu_w.len()).map(|i| i as f64).collect(), nu_w).unwrap();
        let mu = Measure::atoms((0..mu_w.len()).map(|i| i as f64 + 0.5).collect(), mu_w).unwrap();
        let e = Exponents::new(2.0, 2.0).unwrap();
        let b = compute_b(&nu, &mu, &e, &BConfig::default()).unwrap().value;
        let a = oracle_p2q2(&nu, &mu).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-9), "B {b} > A {a}");
        prop_assert!(a <= k_sharp(&e) * b * (1.0 + 1e-9), "A {a} > kB");
    }

    #[test]
    fn diagonal_factor_has_closed_form(p in 1.05f64..20.0) {
        let e = Exponents::new(p, p).unwrap();
        let ps = p / (p - 1.0);
        let closed = p.powf(1.0 / p) * ps.powf(1.0 / ps);
        prop_assert!((k_sharp(&e) - closed).abs() <= 1e-12 * closed);
    }
}
