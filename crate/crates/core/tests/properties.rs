//! Property tests over seeded random loops, matrices and gauges.

use holonomy_core::compiler::{compile, gate_distance, random_trig_loop, CompilerOptions, GateTarget};
use holonomy_core::linalg::{expm, hermitian_eigen, identity, max_abs_entry, unitarity_defect};
use holonomy_core::models::{cp_family, spin_family, CpModel};
use holonomy_core::scalar::{c, cf};
use holonomy_core::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Cm = CMatrix64;

fn hermitian(n: usize, raw: &[f64]) -> Cm {
    let mut h = DMatrix::from_element(n, n, cf(0.0, 0.0));
    let mut it = raw.iter().copied().cycle();
    for i in 0..n {
        h[(i, i)] = cf(it.next().unwrap(), 0.0);
        for j in i + 1..n {
            let z = c(it.next().unwrap(), it.next().unwrap());
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn unitary(n: usize, raw: &[f64]) -> Cm {
    expm(&(hermitian(n, raw) * cf::<f64>(0.0, 1.0)))
}

fn cp2() -> OrbitFamily64 {
    cp_family(&CpModel::new(3).unwrap()).unwrap()
}

fn trig_loop(seed: u64, dim: usize, amplitude: f64) -> Loop64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_trig_loop(&ControlPoint::origin(dim), amplitude, &mut rng).unwrap()
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn loops_close_and_refine(seed in any::<u64>(), k in 2usize..64) {
        let lp = trig_loop(seed, 4, 0.5);
        let coarse = lp.sample(k).unwrap();
        let fine = lp.sample(2 * k).unwrap();
        prop_assert!(coarse[0].distance(&coarse[k]) <= 2.0 * lp.closure_tol());
        for (i, p) in coarse.iter().enumerate() {
            prop_assert_eq!(p.coords(), fine[2 * i].coords());
        }
    }

    #[test]
    fn double_inversion_is_identity(seed in any::<u64>(), k in 2usize..64) {
        let lp = trig_loop(seed, 3, 0.7);
        let back = invert(&invert(&lp));
        for (a, b) in lp.sample(k).unwrap().iter().zip(back.sample(k).unwrap()) {
            // 1 − (1 − t) differs from t by one ulp
            prop_assert!(a.distance(&b) <= 1e-13);
        }
    }

    #[test]
    fn decomposition_projectors_resolve_identity(raw in coeffs(16), split in 1usize..4) {
        // eigenvalues 0 (multiplicity `split`) and 1 (4 − split), rotated
        let u = unitary(4, &raw);
        let mut d = DMatrix::from_element(4, 4, cf(0.0, 0.0));
        for i in split..4 {
            d[(i, i)] = cf(1.0, 0.0);
        }
        let h = &u * d * u.adjoint();
        let dec = decompose(&h, 1e-6).unwrap();
        prop_assert_eq!(dec.signature.multiplicities(), &[split, 4 - split][..]);
        let sum = dec.projectors.iter().fold(DMatrix::from_element(4, 4, cf(0.0, 0.0)), |acc, p| acc + p);
        prop_assert!(max_abs_entry(&(sum - identity::<f64>(4))) <= 1e-10);
        for (i, p) in dec.projectors.iter().enumerate() {
            for (j, q) in dec.projectors.iter().enumerate() {
                let want = if i == j { p.clone() } else { DMatrix::from_element(4, 4, cf(0.0, 0.0)) };
                prop_assert!(max_abs_entry(&(p * q - want)) <= 1e-10);
            }
        }
    }

    #[test]
    fn orbit_family_is_isospectral(seed in any::<u64>(), t in 0.0..1.0f64) {
        let fam = cp2();
        let lp = trig_loop(seed, 4, 1.0);
        let h = fam.hamiltonian(&lp.at(t)).unwrap();
        let (ev, _) = hermitian_eigen(&h);
        let want = [0.0, 0.0, 1.0];
        for (a, b) in ev.iter().zip(want) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn orbit_dimension_ignores_order(mut mult in prop::collection::vec(1usize..4, 1..5), eig in any::<bool>()) {
        let a = orbit_dimension(&DegeneracySignature::new(mult.clone()).unwrap(), eig);
        mult.reverse();
        let b = orbit_dimension(&DegeneracySignature::new(mult).unwrap(), eig);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn phase_invariant_distance_is_a_pseudometric(
        ra in coeffs(9), rb in coeffs(9), rc in coeffs(9), theta in -3.2..3.2f64
    ) {
        let (a, b, w) = (unitary(3, &ra), unitary(3, &rb), unitary(3, &rc));
        let d = |x: &Cm, y: &Cm| gate_distance(x, y, true).unwrap();
        let phase = cf::<f64>(theta.cos(), theta.sin());
        prop_assert!((d(&a, &b) - d(&(&a * phase), &b)).abs() <= 1e-12);
        prop_assert!((d(&a, &b) - d(&a, &(&b * phase))).abs() <= 1e-12);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-12);
        prop_assert!(d(&a, &w) <= d(&a, &b) + d(&b, &w) + 1e-12);
        prop_assert!(d(&a, &(&a * phase)) <= 1e-6);
    }

    #[test]
    fn inverse_word_inverts_product(raw1 in coeffs(4), raw2 in coeffs(4), signs in prop::collection::vec(prop::sample::select(vec![-2i8, -1, 1, 2]), 0..8)) {
        let letters = [
            Holonomy::from_raw(unitary(2, &raw1), 0, 1, Method::FrameTransport, identity::<f64>(2)),
            Holonomy::from_raw(unitary(2, &raw2), 0, 1, Method::FrameTransport, identity::<f64>(2)),
        ];
        let word = LoopWord::new(signs.iter().map(|&s| Letter::from_signed(s).unwrap()).collect());
        let forward = word_product(&word, &letters).unwrap();
        let backward = word_product(&word.inverse(), &letters).unwrap();
        prop_assert!(max_abs_entry(&(&backward.unitary * &forward.unitary - identity::<f64>(2))) <= 1e-12);
    }

    #[test]
    fn smooth_ramp_is_monotone(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(Ramp::Smooth.eval(lo) <= Ramp::Smooth.eval(hi));
        prop_assert_eq!(Ramp::Smooth.eval(0.0f64), 0.0);
        prop_assert_eq!(Ramp::Smooth.eval(1.0f64), 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn curvature_is_antisymmetric_and_gauge_covariant(seed in any::<u64>(), graw in coeffs(4)) {
        let fam = cp2();
        let at = trig_loop(seed, 4, 0.5).at(0.3);
        let frame = frame_at(&fam, &at, 0).unwrap();
        let g = unitary(2, &graw);
        let f = curvature_in_frame(&fam, &frame, 1e-4, CurvatureScheme::default()).unwrap();
        let fg = curvature_in_frame(&fam, &frame.regauged(&g), 1e-4, CurvatureScheme::default()).unwrap();
        for mu in 0..4 {
            for nu in 0..4 {
                prop_assert_eq!(f.get(mu, nu), &(-f.get(nu, mu)));
                let moved = g.adjoint() * f.get(mu, nu) * &g;
                prop_assert!(max_abs_entry(&(fg.get(mu, nu) - moved)) <= 1e-7);
            }
        }
        prop_assert_eq!(irreducibility_dimension(&f), irreducibility_dimension(&fg));
        let negated: Vec<Cm> = f.upper_components().into_iter().map(|m| -m).collect();
        let refs: Vec<&Cm> = negated.iter().collect();
        prop_assert_eq!(span_dimension(&refs, 2), irreducibility_dimension(&f));
    }

    #[test]
    fn connection_is_gauge_covariant(seed in any::<u64>(), graw in coeffs(4)) {
        let fam = cp2();
        let at = trig_loop(seed, 4, 0.5).at(0.6);
        let frame = frame_at(&fam, &at, 0).unwrap();
        let g = unitary(2, &graw);
        let a = connection_in_frame(&fam, &frame, 1e-4).unwrap();
        let ag = connection_in_frame(&fam, &frame.regauged(&g), 1e-4).unwrap();
        for (x, y) in a.components.iter().zip(&ag.components) {
            prop_assert!(max_abs_entry(&(y - g.adjoint() * x * &g)) <= 1e-8);
        }
    }

    #[test]
    fn holonomy_is_gauge_covariant_without_leakage(seed in any::<u64>(), graw in coeffs(4)) {
        let fam = cp2();
        let lp = trig_loop(seed, 4, 0.5);
        let hol = holonomy_frame(&fam, &lp, 0, 512).unwrap();
        let g = unitary(2, &graw);
        let moved = holonomy_frame_from(&fam, &lp, &(&hol.start_frame * &g), 0, 512).unwrap();
        prop_assert!(max_abs_entry(&(&moved.unitary - g.adjoint() * &hol.unitary * &g)) <= 1e-10);

        let e = hol.embedded();
        let p = &hol.start_frame * hol.start_frame.adjoint();
        prop_assert!(max_abs_entry(&((identity::<f64>(3) - &p) * &e * &p)) <= 1e-12);
        prop_assert!(max_abs_entry(&(&p * &e * &p - &e)) <= 1e-12);

        let inv = holonomy_frame(&fam, &invert(&lp), 0, 512).unwrap();
        prop_assert!((&inv.unitary - hol.unitary.adjoint()).norm() <= 1e-7);
    }

    #[test]
    fn comparison_ignores_a_common_gauge(phi in 0.0..6.2f64, graw in coeffs(1)) {
        // a tilted circle keeps the spin gap open
        let fam = spin_family();
        let lp = Loop::analytic(ControlPoint::from_f64(&[1.0, 0.0, 0.4]).unwrap(), |t: f64| {
            let th = 2.0 * std::f64::consts::PI * t;
            DVector::from_vec(vec![th.cos(), th.sin(), 0.4])
        }).unwrap();
        let ev = evolve(&fam, &AdiabaticSchedule::new(lp.clone(), 20.0).unwrap()).unwrap();
        prop_assert!(unitarity_defect(&ev.propagator) <= 1e-8);
        let hol = holonomy_frame(&fam, &lp, 0, 256).unwrap();
        let g = unitary(1, &graw);
        let moved = holonomy_frame_from(&fam, &lp, &(&hol.start_frame * &g), 0, 256).unwrap();
        let a = compare_holonomy(&ev, &hol, 0, ev.phases[0] + phi).unwrap();
        let b = compare_holonomy(&ev, &moved, 0, ev.phases[0] + phi).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn compiling_the_inverse_target_flips_the_word(raw1 in coeffs(4), raw2 in coeffs(4), traw in coeffs(4)) {
        let (u1, u2) = (unitary(2, &raw1), unitary(2, &raw2));
        let goal = unitary(2, &traw);
        let options = CompilerOptions::new(4);
        let forward = compile(&GateTarget::new(goal.clone(), 1e-12, true).unwrap(), &u1, &u2, &options).unwrap();
        let letters = [
            Holonomy::from_raw(u1, 0, 1, Method::LetterProduct, identity::<f64>(2)),
            Holonomy::from_raw(u2, 0, 1, Method::LetterProduct, identity::<f64>(2)),
        ];
        let flipped = word_product(&forward.word.inverse(), &letters).unwrap();
        let d = gate_distance(&flipped.unitary, &goal.adjoint(), true).unwrap();
        prop_assert!((d - forward.distance).abs() <= 1e-10);
        prop_assert!(forward.trace.windows(2).all(|w| w[1].1 <= w[0].1));
    }
}
