//! Persistence invariants: bit-exact round trips and deterministic bytes.

use hym_core::*;
use proptest::prelude::*;
use std::sync::Arc;

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("hymf_roundtrip_tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn t2() -> Arc<TorusGeometry> {
    TorusGeometry::square(1, 16, 1.0).unwrap()
}

#[test]
fn curvature_roundtrip() {
    let g = TorusGeometry::square(2, 8, 1.0).unwrap();
    let h = synth::random_positive_field(&g, 2, 61, 1, 0.3, 0.4);
    let rf = curvature_from_metric(&h).unwrap();
    let path = tmp("curv.hymf");
    io::write_curvature_field(&path, &rf).unwrap();
    let back = io::read_curvature_field(&path).unwrap();
    assert_eq!(back.kind(), CurvatureKind::Bundle);
    for (a, b) in rf.blocks().iter().zip(back.blocks()) {
        assert_eq!(a.data(), b.data());
    }
    assert_eq!(rf.fiber_metric().data(), back.fiber_metric().data());

    let kf = random_kahler_curvature(&g, 3, 1, 0.7).unwrap();
    let path = tmp("kahler.hymf");
    io::write_curvature_field(&path, &kf).unwrap();
    let back = io::read_curvature_field(&path).unwrap();
    assert_eq!(back.kind(), CurvatureKind::Kahler);
    for (a, b) in kf.blocks().iter().zip(back.blocks()) {
        assert_eq!(a.data(), b.data());
    }
}

#[test]
fn writes_are_bit_deterministic() {
    let g = t2();
    let m = synth::random_hermitian_field(&g, 2, 5, 2, 0.9);
    let p1 = tmp("det1.hymf");
    let p2 = tmp("det2.hymf");
    io::write_matrix_field(&p1, &m).unwrap();
    io::write_matrix_field(&p2, &m).unwrap();
    assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn field_roundtrip_is_exact(seed in 0u64..10_000, rank in 1usize..4) {
        let g = t2();
        let m = synth::random_hermitian_field(&g, rank, seed, 2, 1.0);
        let path = tmp(&format!("prop_{seed}_{rank}.hymf"));
        io::write_matrix_field(&path, &m).unwrap();
        let back = io::read_matrix_field(&path).unwrap();
        prop_assert_eq!(m.data(), back.data());
        prop_assert_eq!(back.rank(), rank);
        prop_assert!(back.geometry().same_grid(&g));
    }
}
