use super::*;

fn three_atoms() -> Measure {
    Measure::atoms(vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 1.0]).unwrap()
}

#[test]
fn interval_mass_respects_endpoints() {
    let m = three_atoms();
    assert_eq!(
        m.interval_mass(&IntervalQuery::left_open(1.0, 3.0).unwrap())
            .unwrap(),
        2.0
    );
    assert_eq!(
        m.interval_mass(&IntervalQuery::closed(1.0, 3.0).unwrap())
            .unwrap(),
        3.0
    );
    assert_eq!(
        m.interval_mass(&IntervalQuery::open(1.0, 3.0).unwrap())
            .unwrap(),
        1.0
    );
    assert_eq!(
        m.interval_mass(&IntervalQuery::closed(2.0, 2.0).unwrap())
            .unwrap(),
        1.0
    );
    assert!(IntervalQuery::closed(3.0, 1.0).is_err());
}

#[test]
fn power_law_tail() {
    let m = Measure::power_density(1.0, -2.0, 0.0, 1.0, f64::INFINITY).unwrap();
    assert!((m.upper_tail_closed(2.0).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn integer_tail_bracket() {
    let m = Measure::integer_power_atoms(1, 1.0, -2.0, 10_000).unwrap();
    // with truncation below 10 the bracket is pure integral test
    let coarse = m.with_truncation(5);
    let b = coarse.mass_bracket(&IntervalQuery::from(10.0)).unwrap();
    assert!(b.lo >= 0.1 - 1e-15 && b.hi <= 1.0 / 9.0 + 1e-15, "{b:?}");
    let fine = m.mass_bracket(&IntervalQuery::from(10.0)).unwrap();
    assert!(fine.lo >= b.lo && fine.hi <= b.hi);
    let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
    let exact_tail: f64 = pi2_6 - (1..10).map(|n| 1.0 / (n * n) as f64).sum::<f64>();
    assert!(fine.lo <= exact_tail && exact_tail <= fine.hi);
}

#[test]
fn cdf_and_left_limit() {
    let m = Measure::atoms(vec![0.0], vec![5.0]).unwrap();
    assert_eq!(m.cdf(0.0).unwrap(), 5.0);
    assert_eq!(m.cdf_left(0.0).unwrap(), 0.0);
    let m = Measure::atoms(vec![1.0, 2.0], vec![1.0, 3.0]).unwrap();
    assert_eq!(m.cdf_left(2.0).unwrap(), 1.0);
    let leb = Measure::lebesgue(1.0, f64::INFINITY).unwrap();
    assert_eq!(leb.cdf(4.0).unwrap(), 3.0);
    assert_eq!(leb.cdf_left(4.0).unwrap(), 3.0);
    let c = Measure::cantor();
    assert!((c.cdf(1.0 / 3.0).unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn generalized_inverse() {
    let m = Measure::atoms(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
    assert_eq!(m.inv_cdf(1.5).unwrap(), 2.0);
    assert_eq!(m.inv_cdf(2.5).unwrap(), f64::INFINITY);
    assert!(m.inv_cdf(0.0).is_err());
    let leb = Measure::lebesgue(0.0, f64::INFINITY).unwrap();
    assert_eq!(leb.inv_cdf(7.0).unwrap(), 7.0);
    let c = Measure::cantor();
    assert!((c.inv_cdf(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    let finite = Measure::lebesgue(0.0, 2.0).unwrap();
    assert_eq!(finite.inv_cdf(3.0).unwrap(), f64::INFINITY);
    let shifted =
        Measure::transformed(Measure::lebesgue(0.0, 1.0).unwrap(), Transform::Shift(-5.0)).unwrap();
    assert!((shifted.inv_cdf(0.25).unwrap() + 4.75).abs() < 1e-12);
}

#[test]
fn integrals() {
    let m = three_atoms();
    assert_eq!(
        m.integrate(&|x| x * x, &IntervalQuery::everything(), DEFAULT_TOL)
            .unwrap(),
        14.0
    );
    let leb = Measure::lebesgue(0.0, 1.0).unwrap();
    let v = leb
        .integrate(
            &|_| 1.0,
            &IntervalQuery::left_open(0.0, 1.0).unwrap(),
            DEFAULT_TOL,
        )
        .unwrap();
    assert!((v - 1.0).abs() < 1e-14);
}

#[test]
fn cantor_weighted_tail_is_closed_form() {
    let mu = Measure::weighted(Measure::cantor(), Weight::CdfPower { exponent: -2.0 }).unwrap();
    for &x in &[1.0 / 3.0, 1.0 / 9.0, 1.5] {
        let expected = 1.0 / cantor::cantor_cdf(x);
        let got = mu.upper_tail_closed(x).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected, "x={x}");
    }
    // the quadrature path agrees
    let level = mu.with_cantor_quadrature(CantorQuadrature::Level(14));
    let q = level
        .integrate(&|_| 1.0, &IntervalQuery::from(1.0 / 3.0), 1e-8)
        .unwrap();
    assert!((q - 2.0).abs() < 1e-3, "{q}");
}

#[test]
fn pushforward_examples() {
    let m = Measure::atoms(vec![0.0, 1.0], vec![2.0, 3.0]).unwrap();
    let d = m
        .pushforward_check(&[IntervalQuery::left_open(0.0, 1.0).unwrap()])
        .unwrap();
    assert_eq!(d, vec![0.0]);
    let p = Measure::power_density(1.0, -2.0, 0.0, 1.0, f64::INFINITY).unwrap();
    let d = p
        .pushforward_check(&[IntervalQuery::left_open(1.0, 2.0).unwrap()])
        .unwrap();
    assert!(d[0] < 1e-15);
    assert!(p
        .pushforward_check(&[IntervalQuery::closed(1.0, 2.0).unwrap()])
        .is_err());
}

#[test]
fn domination() {
    let m2 = Measure::atoms(vec![0.0, 1.0, 2.0], vec![2.0, 2.0, 2.0]).unwrap();
    let m1 = Measure::atoms(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 1.0]).unwrap();
    let grid = [-1.0, 0.0, 0.5, 1.0, 1.5, 2.0];
    assert!(dominates(&m2, &m2, &grid).unwrap().holds);
    assert!(dominates(&m1, &m2, &grid).unwrap().holds);
    let heavy = Measure::atoms(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 3.0]).unwrap();
    let d = dominates(&heavy, &m2, &grid).unwrap();
    assert_eq!(
        d,
        Domination {
            holds: false,
            witness: Some(1.0)
        }
    );
    assert!(dominates(&m1, &m2, &[]).is_err());
}

#[test]
fn reflection_swaps_tails() {
    let m = three_atoms();
    let r = m.clone().reflect();
    assert_eq!(r.cdf(-2.0).unwrap(), m.upper_tail_closed(2.0).unwrap());
    assert_eq!(r.cdf_left(-2.0).unwrap(), m.upper_tail(2.0).unwrap());
}

#[test]
fn weights_and_scales() {
    let base = Measure::lebesgue(0.0, f64::INFINITY).unwrap();
    let w = Measure::weighted(base.clone(), Weight::XPower { exponent: -2.0 }).unwrap();
    let tail = w.upper_tail_closed(2.0).unwrap();
    assert!((tail - 0.5).abs() < 1e-9, "{tail}");
    let s =
        Measure::transformed(Measure::lebesgue(0.0, 1.0).unwrap(), Transform::Scale(3.0)).unwrap();
    assert!((s.cdf(1.5).unwrap() - 0.5).abs() < 1e-15);
    assert!(Measure::transformed(base.clone(), Transform::Scale(-1.0)).is_err());
    assert!(Measure::weighted(three_atoms(), Weight::CdfPower { exponent: 1.0 }).is_err());
}

#[test]
fn order_keys_are_monotone() {
    let xs = [
        f64::NEG_INFINITY,
        -3.0,
        -1e-300,
        -0.0,
        0.0,
        1e-300,
        2.0,
        f64::INFINITY,
    ];
    for w in xs.windows(2) {
        assert!(order_key(w[0]) <= order_key(w[1]));
        assert_eq!(from_order_key(order_key(w[1])).to_bits(), w[1].to_bits());
    }
}
