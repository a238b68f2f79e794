//! Frozen numbers from reference runs, and single-precision smoke tests.

use std::f64::consts::FRAC_PI_4;

use holonomy_core::compiler::{compile, generate_generic_loops, CompilerOptions, GateTarget, LETTER_STEPS};
use holonomy_core::linalg::{identity, max_abs_entry};
use holonomy_core::models::{cp_curvature_origin, cp_family, spin_equator_loop, spin_family, CpModel};
use holonomy_core::scalar::cf;
use holonomy_core::*;

fn cp2_letters() -> (CMatrix64, CMatrix64) {
    let fam = cp_family::<f64>(&CpModel::new(3).unwrap()).unwrap();
    let (g1, g2) = generate_generic_loops(&fam, &ControlPoint::origin(4), 0, 42).unwrap();
    (
        holonomy_frame(&fam, &g1, 0, LETTER_STEPS).unwrap().unitary,
        holonomy_frame(&fam, &g2, 0, LETTER_STEPS).unwrap().unitary,
    )
}

#[test]
fn cp2_seed_42_compile_distances() {
    let (u1, u2) = cp2_letters();
    let commutator = (&u1 * &u2 - &u2 * &u1).norm();
    assert!((commutator - 0.899).abs() < 1e-3, "{commutator}");

    let mut goal = identity::<f64>(2);
    goal[(1, 1)] = cf(FRAC_PI_4.cos(), FRAC_PI_4.sin());
    let target = GateTarget::new(goal, 1e-9, true).unwrap();
    let frozen = [
        (4, 2.751_124_757_435_859_4e-1, "[+2 +1 +2 -1]"),
        (8, 1.113_252_304_505_001_3e-1, "[-1 -1 -2 +1 -2 -1 -1 -1]"),
        (12, 2.196_132_882_111_076_1e-2, "[+2 +2 -1 -2 +1 +1 +1 +2 +1 -2]"),
    ];
    for (len, distance, word) in frozen {
        let r = compile(&target, &u1, &u2, &CompilerOptions::new(len)).unwrap();
        assert!((r.distance - distance).abs() < 1e-9, "length {len}: {}", r.distance);
        assert_eq!(r.word.to_string(), word);
    }
}

#[test]
fn spin_equator_in_single_precision() {
    let fam = spin_family();
    let lp = spin_equator_loop(1.0f32).unwrap();
    for level in 0..2 {
        let h = holonomy_frame(&fam, &lp, level, 512).unwrap();
        assert!((h.unitary[(0, 0)] + cf::<f32>(1.0, 0.0)).norm() < 1e-3);
    }
}

#[test]
fn cp_curvature_in_single_precision() {
    let fam = cp_family::<f32>(&CpModel::new(3).unwrap()).unwrap();
    let exact = cp_curvature_origin::<f32>(3).unwrap();
    let f = curvature_at(&fam, &ControlPoint::origin(4), 0, 1e-2f32).unwrap();
    for mu in 0..4 {
        for nu in 0..4 {
            assert!(max_abs_entry(&(f.get(mu, nu) - exact.get(mu, nu))) < 1e-3);
        }
    }
    assert_eq!(irreducibility_dimension(&f), (4, true));
}
