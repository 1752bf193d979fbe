use currentkit::algebra::{
    binomial, comass, frame_to_kvector, haar_frame_sample, mass, ComassMode, Frame, KCovector,
    KVector, MassMode,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vector(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, d)
}

fn kvector(d: usize, k: usize) -> impl Strategy<Value = KVector> {
    let n = binomial(d, k);
    prop::collection::vec(-2.0..2.0f64, n)
        .prop_map(move |c| KVector::from_coeffs(d, k, c).unwrap())
}

fn close(a: &KVector, b: &KVector, tol: f64) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #[test]
    fn wedge_is_associative(a in kvector(5, 1), b in kvector(5, 2), c in kvector(5, 1)) {
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-10));
    }

    #[test]
    fn graded_commutativity(a in kvector(5, 1), b in kvector(5, 2), c in kvector(5, 1)) {
        // a ∧ b = (-1)^{1·2} b ∧ a, a ∧ c = -c ∧ a
        prop_assert!(close(&a.wedge(&b).unwrap(), &b.wedge(&a).unwrap(), 1e-10));
        prop_assert!(close(&a.wedge(&c).unwrap(), &c.wedge(&a).unwrap().scale(-1.0), 1e-10));
    }

    #[test]
    fn vector_squares_vanish(v in vector(4)) {
        let v = KVector::from_components(&v).unwrap();
        prop_assert!(v.wedge(&v).unwrap().coeffs().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn wedge_is_bilinear(a in kvector(4, 1), b in kvector(4, 1), c in kvector(4, 2), s in -2.0..2.0f64) {
        let lhs = (&a.scale(s) + &b).wedge(&c).unwrap();
        let rhs = &a.wedge(&c).unwrap().scale(s) + &b.wedge(&c).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-10));
    }

    #[test]
    fn simple_vectors_have_euclidean_mass(u in vector(4), v in vector(4)) {
        let f = Frame::new(&[u, v]).unwrap();
        let xi = frame_to_kvector(&f).unwrap();
        let m = mass(&xi, MassMode::Exact).unwrap();
        prop_assert!((m.upper - xi.euclidean_norm()).abs() <= 1e-9 * (1.0 + m.upper));
        prop_assert!((xi.euclidean_norm() - f.volume()).abs() <= 1e-9 * (1.0 + f.volume()));
    }

    #[test]
    fn norm_ordering(xi in kvector(4, 2)) {
        // comass ≤ euclidean ≤ mass
        let e = xi.euclidean_norm();
        let m = mass(&xi, MassMode::Exact).unwrap().upper;
        let c = comass(&xi.to_covector(), ComassMode::Exact).unwrap().value;
        prop_assert!(c <= e + 1e-9 && e <= m + 1e-9);
    }

    #[test]
    fn mass_comass_duality(xi in kvector(4, 2), w in kvector(4, 2)) {
        let w = w.to_covector();
        let pairing = w.apply(&xi).unwrap().abs();
        let m = mass(&xi, MassMode::Exact).unwrap().upper;
        let c = comass(&w, ComassMode::Exact).unwrap().value;
        prop_assert!(pairing <= m * c + 1e-9);
    }

    #[test]
    fn comass_certificate_attains_value(w in kvector(4, 2)) {
        let w = w.to_covector();
        let r = comass(&w, ComassMode::Exact).unwrap();
        let attained = w.apply(&frame_to_kvector(&r.certificate).unwrap()).unwrap();
        prop_assert!((attained.abs() - r.value).abs() <= 1e-9 * (1.0 + r.value));
    }

    #[test]
    fn mass_is_a_norm(a in kvector(4, 2), b in kvector(4, 2), s in -3.0..3.0f64) {
        let ma = mass(&a, MassMode::Exact).unwrap().upper;
        let mb = mass(&b, MassMode::Exact).unwrap().upper;
        let mab = mass(&(&a + &b), MassMode::Exact).unwrap().upper;
        let msa = mass(&a.scale(s), MassMode::Exact).unwrap().upper;
        prop_assert!(mab <= ma + mb + 1e-9);
        prop_assert!((msa - s.abs() * ma).abs() <= 1e-9 * (1.0 + ma));
    }

    #[test]
    fn haar_frames_are_orthonormal(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = haar_frame_sample(4, k, &mut rng).unwrap();
        prop_assert!(f.is_orthonormal(1e-10));
        prop_assert!((frame_to_kvector(&f).unwrap().euclidean_norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn grade_one_covector_comass_is_euclidean() {
    let w = KCovector::from_components(&[1.0, 2.0, 2.0]).unwrap();
    assert!((comass(&w, ComassMode::Exact).unwrap().value - 3.0).abs() < 1e-12);
}
