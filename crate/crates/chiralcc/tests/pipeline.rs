use chiralcc::codes::{build_chiral, build_xyz};
use chiralcc::decoder::{self, Decoder, NoiseModel, TrialOutcome};
use chiralcc::lattice;
use chiralcc::prepare::{PrepConfig, Preparer};
use chiralcc::topo::{check_metachecks, syndrome_of};
use std::sync::Arc;

#[test]
fn decode_zero_syndrome_is_identity() {
    let lat = Arc::new(lattice::build_torus(2, 2, 2).unwrap());
    let code = build_xyz(&lat).unwrap();
    let dec = Decoder::new(code).unwrap();
    let s = chiralcc::topo::SyndromeConfig::zeros(&lat, 2);
    let c = decoder::decode(&dec, &lat, &s).unwrap();
    assert_eq!(c.weight(), 0);
}

#[test]
fn decode_all_single_site_errors() {
    let lat = Arc::new(lattice::build_torus(2, 2, 2).unwrap());
    let code = build_xyz(&lat).unwrap();
    let dec = Decoder::new(code).unwrap();
    for v in (0..lat.n_vertices()).step_by(37) {
        for (x, z) in [(1i64, 0i64), (0, 1), (1, 1)] {
            let err = chiralcc::PauliOperator::single(2, lat.n_vertices(), v, x, z);
            let s = syndrome_of(&dec.code, &lat, &err);
            let c = decoder::decode(&dec, &lat, &s).unwrap_or_else(|e| panic!("v={} {:?}: {}", v, (x, z), e));
            let residual = c.multiply(&err).unwrap();
            assert!(
                dec.in_stabilizer_group(&residual),
                "v={} pauli {:?} residual weight {}",
                v, (x, z), residual.weight()
            );
        }
    }
}

#[test]
fn repair_single_flip_recovers() {
    let lat = Arc::new(lattice::build_torus(2, 2, 2).unwrap());
    let code = build_xyz(&lat).unwrap();
    // true syndrome zero; flip one face
    for f in (0..lat.faces.len()).step_by(101) {
        let mut measured = chiralcc::topo::SyndromeConfig::zeros(&lat, 2);
        measured.values[f] = 1;
        let repaired = decoder::repair_syndrome(&lat, &measured).unwrap();
        assert!(check_metachecks(&lat, &repaired).valid);
        // repaired must equal the true (zero) syndrome here: the minimal
        // repair of a single flip is to undo it
        assert!(repaired.is_zero(), "face {}", f);
    }
    let _ = code;
}

#[test]
fn experiment_p0_q0_never_fails() {
    let lat = Arc::new(lattice::build_torus(2, 2, 2).unwrap());
    let code = build_xyz(&lat).unwrap();
    let dec = Decoder::new(code).unwrap();
    let noise = NoiseModel::new(0.0, 0.0, 7).unwrap();
    let summary = decoder::run_experiment(&dec, &lat, &noise, 10);
    assert_eq!(summary.failures, 0);
    assert_eq!(summary.max_residual_weight, 0);
}

#[test]
fn experiment_small_noise_runs() {
    let lat = Arc::new(lattice::build_torus(2, 2, 2).unwrap());
    let code = build_xyz(&lat).unwrap();
    let dec = Decoder::new(code).unwrap();
    let noise = NoiseModel::new(0.002, 0.002, 11).unwrap();
    let summary = decoder::run_experiment(&dec, &lat, &noise, 200);
    assert_eq!(summary.decoder_failures, 0, "histogram {:?}", summary.residual_weight_histogram);
    // determinism: same seed, same outcome
    let summary2 = decoder::run_experiment(&dec, &lat, &noise, 200);
    assert_eq!(summary.failures, summary2.failures);
    assert_eq!(summary.residual_weight_histogram, summary2.residual_weight_histogram);
}

#[test]
fn trial_determinism_byte_for_byte() {
    let lat = Arc::new(lattice::build_torus(2, 2, 2).unwrap());
    let code = build_xyz(&lat).unwrap();
    let dec = Decoder::new(code).unwrap();
    let noise = NoiseModel::new(0.01, 0.01, 99).unwrap();
    let a = decoder::run_trial(&dec, &lat, &noise, 3);
    let b = decoder::run_trial(&dec, &lat, &noise, 3);
    assert_eq!(a.error, b.error);
    assert_eq!(a.measured_syndrome, b.measured_syndrome);
    assert_eq!(a.correction, b.correction);
    assert_eq!(a.outcome, b.outcome);
}

#[test]
fn prepare_torus_d3_zero_final_syndrome() {
    let lat = Arc::new(lattice::build_torus(2, 2, 2).unwrap());
    let code = build_chiral(&lat, 3, 1).unwrap();
    let prep = Preparer::new(&lat, code, PrepConfig::default()).unwrap();
    for seed in 0..5u64 {
        let t = prep.prepare(seed).unwrap();
        assert!(check_metachecks(&lat, &t.sampled).valid, "sampled syndrome obeys meta-checks");
        // AD and BC faces deterministic zero
        for (fi, f) in lat.faces.iter().enumerate() {
            use chiralcc::lattice::Color::*;
            if f.color == (A, D) || f.color == (B, C) {
                assert_eq!(t.sampled.values[fi], 0, "face {} sampled nonzero", fi);
            }
        }
        assert!(t.final_syndrome.is_zero(), "seed {}: residual {:?}", seed, t.final_syndrome.support());
    }
}

#[test]
fn prepare_zero_syndrome_gives_identity_corrections() {
    let lat = Arc::new(lattice::build_torus(2, 2, 2).unwrap());
    let code = build_chiral(&lat, 3, 1).unwrap();
    let prep = Preparer::new(&lat, code, PrepConfig::default()).unwrap();
    let zero = chiralcc::topo::SyndromeConfig::zeros(&lat, 3);
    let (stages, fin) = prep.correct(&zero).unwrap();
    for s in &stages {
        assert_eq!(s.weight(), 0);
    }
    assert!(fin.is_zero());
}

#[test]
fn prepare_rejects_even_d() {
    let lat = Arc::new(lattice::build_torus(2, 2, 2).unwrap());
    let code = build_chiral(&lat, 4, 1).unwrap();
    assert!(Preparer::new(&lat, code, PrepConfig::default()).is_err());
}

#[test]
fn failure_comparison_helper() {
    assert!(decoder::not_significantly_larger(0, 1000, 0, 1000));
    assert!(decoder::not_significantly_larger(5, 1000, 3, 1000));
    assert!(!decoder::not_significantly_larger(1, 10000, 100, 10000));
    let _ = TrialOutcome::Success;
}
