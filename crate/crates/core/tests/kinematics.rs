use hopfield::kinematics::{
    boost_vector, build_gitman_tyutin_basis, build_polarization_basis_p, minkowski_dot, Axis,
    Boost, FourVector,
};
use hopfield::{Complex64, Error};
use proptest::prelude::*;

fn vec4() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-3.0f64..3.0)
}

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

proptest! {
    #[test]
    fn boosts_preserve_the_interval(a in vec4(), b in vec4(), u in -0.99f64..0.99, ax in axis()) {
        let (x, y) = (FourVector::real(a), FourVector::real(b));
        let bo = Boost::new(u, ax, 1.0).unwrap();
        let before = minkowski_dot(&x, &y);
        let after = minkowski_dot(&boost_vector(&bo, &x), &boost_vector(&bo, &y));
        prop_assert!((before - after).norm() < 1e-11 * (1.0 + x.max_abs() * y.max_abs() / (1.0 - u * u)));
    }

    #[test]
    fn inverse_boost_undoes_the_boost(a in vec4(), u in -0.95f64..0.95, ax in axis()) {
        let x = FourVector::real(a);
        let bo = Boost::new(u, ax, 1.0).unwrap();
        let back = boost_vector(&bo.inverse(), &boost_vector(&bo, &x));
        for i in 0..4 {
            prop_assert!((back.0[i] - x.0[i]).norm() < 1e-12 * (1.0 + x.max_abs()) / (1.0 - u * u));
        }
    }

    #[test]
    fn polarization_tetrad_resolves_the_metric(
        k in prop::array::uniform3(-2.0f64..2.0), w in 0.1f64..3.0, u in -0.8f64..0.8,
    ) {
        prop_assume!(k.iter().map(|x| x * x).sum::<f64>() > 1e-2);
        let g = 1.0 / (1.0 - u * u).sqrt();
        let v = FourVector::real([g, g * u, 0.0, 0.0]);
        let p = FourVector::real([w, k[0], k[1], k[2]]);
        // skip p parallel to v, where the transverse pair is undefined
        let vp = minkowski_dot(&v, &p).re;
        let pp = minkowski_dot(&p, &p).re;
        prop_assume!((vp * vp - pp).abs() > 1e-3);
        let basis = build_polarization_basis_p(&v, &p, 1.0).unwrap();
        prop_assert!(basis.resolution_residual(&v) < 1e-10);
        for e in &basis.vectors[..2] {
            prop_assert!(minkowski_dot(&v, e).norm() < 1e-12);
            prop_assert!(minkowski_dot(&p, e).norm() < 1e-10);
            prop_assert!((minkowski_dot(e, e) + Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn null_tetrad_has_the_expected_gram_matrix() {
    let p = FourVector::real([(0.25f64 + 1.21 + 0.16).sqrt(), 0.5, -1.1, 0.4]);
    let b = build_gitman_tyutin_basis(&p).unwrap();
    let e = &b.vectors;
    let d = |i: usize, j: usize| minkowski_dot(&e[i], &e[j]).re;
    assert!(d(0, 0).abs() < 1e-14 && d(3, 3).abs() < 1e-14);
    assert!((d(0, 3) + 1.0).abs() < 1e-14);
    assert!((d(1, 1) + 1.0).abs() < 1e-14 && (d(2, 2) + 1.0).abs() < 1e-14);
    assert!(d(1, 2).abs() < 1e-14 && d(0, 1).abs() < 1e-14 && d(3, 2).abs() < 1e-14);
    let off_shell = FourVector::real([1.3, 0.5, -1.1, 0.4]);
    assert!(matches!(
        build_gitman_tyutin_basis(&off_shell),
        Err(Error::NonNullWavevector(_))
    ));
}

#[test]
fn superluminal_boost_is_rejected() {
    assert!(matches!(
        Boost::new(1.0, Axis::X, 1.0),
        Err(Error::SuperluminalBoost { .. })
    ));
    assert!(matches!(
        Boost::new(-3.0, Axis::Y, 2.0),
        Err(Error::SuperluminalBoost { .. })
    ));
}
