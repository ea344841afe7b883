//! Line-protocol integration: external calculators backed by real child
//! processes.

mod common;

use common::fixtures;
use mechsearch::geom::embed;
use mechsearch::pes::{CalcError, Calculator, ExternalCalculator, MorseSurrogate};
use std::time::Duration;

fn backend(mode: &str, pool: usize) -> ExternalCalculator {
    ExternalCalculator::spawn(
        env!("CARGO_BIN_EXE_mechsearch"),
        &["backend".into(), "--mode".into(), mode.into()],
        pool,
        Duration::from_secs(30),
    )
    .expect("spawn backend")
}

#[test]
fn zero_backend_returns_zero_for_any_geometry() {
    let calc = backend("zero", 1);
    let geom = embed(&fixtures::ch4(), 3).unwrap();
    let (e, g) = calc.energy_gradient(&geom).unwrap();
    assert_eq!(e, 0.0);
    assert!(g.iter().flatten().all(|&x| x == 0.0));
}

#[test]
fn morse_backend_mirrors_in_process_surrogate() {
    let external = backend("morse", 2);
    let reference = MorseSurrogate::default();
    for (seed, graph) in [
        (1, fixtures::ch4()),
        (2, fixtures::h2o()),
        (3, fixtures::h2_c2h4()),
    ] {
        let geom = embed(&graph, seed).unwrap();
        let (ee, ge) = external.energy_gradient(&geom).unwrap();
        let (er, gr) = reference.energy_gradient(&geom).unwrap();
        // binaries compiled at different opt levels may reorder float
        // reductions; agreement is to addend-rounding, not bitwise
        assert!((ee - er).abs() < 1e-9, "energy differs for seed {seed}: {ee} vs {er}");
        for (a, b) in ge.iter().flatten().zip(gr.iter().flatten()) {
            assert!((a - b).abs() < 1e-9, "gradient differs for seed {seed}");
        }
    }
}

#[test]
fn pipeline_results_identical_through_the_wire() {
    // differential test: the whole cascade produces the same survivors and
    // barriers whether the surrogate runs in-process or behind the protocol
    use mechsearch::pipeline::{
        evaluate_step, prepare_species, BondIncrementEstimator, Stage,
    };
    let reactant = fixtures::h2_c2h4();
    let key = reactant.canonical_key();
    let params = fixtures::fixture_params();

    let run = |calc: &dyn Calculator| {
        let species = prepare_species(&reactant, calc, 42, &params).unwrap();
        let eval = evaluate_step(
            &reactant,
            &key,
            &species,
            calc,
            &BondIncrementEstimator,
            &params,
            42,
        )
        .unwrap();
        let survivors: Vec<(String, Option<f64>)> = eval
            .candidates
            .iter()
            .filter(|c| c.stage == Stage::KineticPassed)
            .map(|c| (c.product_key.clone(), c.best_barrier()))
            .collect();
        (eval.audit.counts, survivors)
    };

    let in_process = run(&MorseSurrogate::default());
    let external = backend("morse", 2);
    let through_wire = run(&external);
    assert_eq!(in_process.0, through_wire.0, "funnel counts differ");
    assert_eq!(in_process.1.len(), through_wire.1.len());
    for ((ka, ba), (kb, bb)) in in_process.1.iter().zip(&through_wire.1) {
        assert_eq!(ka, kb);
        let (ba, bb) = (ba.unwrap(), bb.unwrap());
        assert!(
            (ba - bb).abs() < 1e-3,
            "barriers differ: {ba} vs {bb}"
        );
    }
}

#[test]
fn malformed_response_is_a_protocol_violation() {
    let calc = backend("malformed-once", 1);
    let geom = embed(&fixtures::h2(), 1).unwrap();
    match calc.energy(&geom) {
        Err(CalcError::ProtocolViolation(msg)) => {
            assert!(msg.contains("not a protocol line"), "payload missing: {msg}");
        }
        other => panic!("expected protocol violation, got {other:?}"),
    }
    // the lane recovers on the next call
    assert!(calc.energy(&geom).is_ok());
}

#[test]
fn dead_backend_reports_crash() {
    let calc = ExternalCalculator::spawn(
        "false",
        &[],
        1,
        Duration::from_secs(5),
    )
    .unwrap();
    let geom = embed(&fixtures::h2(), 1).unwrap();
    match calc.energy(&geom) {
        Err(CalcError::BackendCrashed(_)) | Err(CalcError::TimeoutExceeded(_)) => {}
        other => panic!("expected crash error, got {other:?}"),
    }
}

#[test]
fn unspawnable_command_is_an_error() {
    assert!(ExternalCalculator::spawn(
        "/definitely/not/a/real/command",
        &[],
        1,
        Duration::from_secs(1),
    )
    .is_err());
}
