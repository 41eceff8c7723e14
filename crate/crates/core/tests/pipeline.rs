use hybrid_shadows::bounds::{memory_ratio, random_subset_factor};
use hybrid_shadows::ensembles::EnsembleKind;
use hybrid_shadows::qcore::{make_state, trace_norm_distance, PauliString, StateSpec};
use hybrid_shadows::shadows::{acquire_shadow, decode_snapshot_log, encode_snapshot_log, reconstruct_density, Protocol, Summary};
use proptest::prelude::*;

#[test]
fn acquire_store_reload_estimate() {
    let state = make_state(&StateSpec::HaarRandom { num_qubits: 5, seed: 21 }).unwrap();
    let obs = PauliString::parse("X2Z5", 5).unwrap();
    for protocol in [
        Protocol::local_clifford(),
        Protocol::global_haar(),
        Protocol::hybrid_fixed(EnsembleKind::LocalHaar, vec![3, 0]),
        Protocol::hybrid_random(EnsembleKind::LocalClifford, 2),
    ] {
        let shadow = acquire_shadow(&state, &protocol, 3000, 8).unwrap();
        let bytes = encode_snapshot_log(&shadow).unwrap();
        let back = decode_snapshot_log(&bytes).unwrap();
        let a = shadow.estimates(&obs).unwrap();
        let b = back.estimates(&obs).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()), "{protocol:?}");
        let s = Summary::from_values(&a).unwrap();
        let exact = state.expectation(&obs).unwrap();
        assert!((s.mean - exact).abs() < 4.0 * s.se_mean, "{protocol:?}: {} vs {exact}", s.mean);
    }
}

#[test]
fn larger_subsystems_reconstruct_better() {
    let state = make_state(&StateSpec::TfimGround { num_qubits: 4, field: 1.0 }).unwrap();
    let rho = state.to_density();
    let distance = |la: usize| {
        let shadow = acquire_shadow(&state, &Protocol::hybrid_fixed(EnsembleKind::LocalClifford, (0..la).collect()), 2000, 4).unwrap();
        trace_norm_distance(&reconstruct_density(&shadow).unwrap(), &rho).unwrap()
    };
    let d: Vec<f64> = (1..=4).map(distance).collect();
    assert!(d.windows(2).all(|p| p[0] < p[1]), "{d:?}");
}

#[test]
fn log_growth_matches_collapsed_state_size() {
    let (l, la, m) = (8, 2, 300);
    let state = make_state(&StateSpec::HaarRandom { num_qubits: l, seed: 2 }).unwrap();
    let bytes = |p: &Protocol| encode_snapshot_log(&acquire_shadow(&state, p, m, 1).unwrap()).unwrap().len() as f64;
    let local = bytes(&Protocol::local_clifford());
    let hybrid = bytes(&Protocol::hybrid_fixed(EnsembleKind::LocalClifford, (0..la).collect()));
    let r = memory_ratio(m as u64, la, None, l).unwrap();
    // 16 bytes per complex amplitude; per-site records differ by a few bytes
    let extra = (hybrid - local) / m as f64;
    assert!((extra - 16.0 * r.collapsed_size).abs() <= 4.0 * l as f64, "{extra}");
    assert!(r.vs_full_state > 1.0);
    // dense collapsed states never beat the full state; compressed ones can
    assert!(memory_ratio(10, la, None, 20).unwrap().vs_full_state > 1.0);
    assert!(memory_ratio(10, la, Some(18.0), 20).unwrap().vs_full_state < 1.0);
}

proptest! {
    #[test]
    fn subset_factor_is_bracketed(l in 1usize..=30, a in 0usize..30, b in 0usize..30) {
        let k = a % l + 1;
        let la = b % l + 1;
        let f = random_subset_factor(k, la, l).unwrap();
        prop_assert!(f >= 1.0 - 1e-12);
        prop_assert!(f <= 3f64.powi(k.min(la) as i32) * (1.0 + 1e-12));
        if la < l {
            prop_assert!(random_subset_factor(k, la + 1, l).unwrap() >= f);
        }
    }
}
