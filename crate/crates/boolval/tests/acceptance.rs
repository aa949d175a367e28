//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with its runtime and asserting its budget. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use boolval::report::CheckReport;
use boolval::sweeps::{
    cross_oracle_sweep, elementarity_sweep, fullness_sweep, los_sweep, mixing_sweep,
    name_roundtrip_sweep, predicate_preservation_sweep, ro_completion_sweep, soundness_sweep,
    structure_axiom_sweep, ElementarityOptions, LosSweepOptions,
};

const SEED: u64 = 20240832;

fn finish(name: &str, report: &CheckReport, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    let status = if report.all_passed() && elapsed <= budget {
        "PASS"
    } else {
        "FAIL"
    };
    println!(
        "[{status}] {name}: {} checks in {elapsed:.2?} (budget {budget:?})",
        report.checks.len()
    );
    for failure in report.failures().take(5) {
        println!("        failed: {} {:?}", failure.name, failure.witness);
    }
    assert!(report.all_passed(), "{name}: checks failed");
    assert!(
        elapsed <= budget,
        "{name}: runtime {elapsed:?} exceeds budget {budget:?}"
    );
}

/// Criterion 1: every function-space structure in the family (both space
/// modes, up to three atoms, carriers of at most four functions) satisfies
/// the seven structure clauses with zero violations.
#[test]
fn criterion_01_structure_axioms() {
    let started = Instant::now();
    let report = structure_axiom_sweep(SEED);
    finish(
        "criterion 1 structure axioms",
        &report,
        started,
        Duration::from_secs(10),
    );
}

/// Criterion 2: exhaustive Łoś sweep. All formulas of depth <= 3 over one
/// binary relation symbol, all valuations and ultrafilters, on 50 seeded
/// random axiom-passing table structures with up to 3 atoms and 3 elements:
/// membership of the Boolean value in the ultrafilter coincides with truth
/// in the quotient, and the clause (ii) equivalences hold.
#[test]
fn criterion_02_los_sweep() {
    let started = Instant::now();
    let report = los_sweep(&LosSweepOptions {
        atoms: 3,
        domain: 3,
        depth: 3,
        structures: 50,
        seed: SEED,
    });
    finish(
        "criterion 2 Łoś sweep",
        &report,
        started,
        Duration::from_secs(60),
    );
}

/// Criterion 3: mixing along every antichain of every algebra with up to 4
/// atoms (seeded function families, at least 100 cases): each piece bounds
/// the equality with its function, and the default fills the complement.
#[test]
fn criterion_03_mixing() {
    let started = Instant::now();
    let report = mixing_sweep(SEED);
    finish(
        "criterion 3 mixing",
        &report,
        started,
        Duration::from_secs(5),
    );
}

/// Criterion 4: witness search attains the existential value exactly on 200
/// seeded depth-one cases over function-space structures with the closed
/// carrier as pool.
#[test]
fn criterion_04_fullness() {
    let started = Instant::now();
    let report = fullness_sweep(SEED, 200);
    finish(
        "criterion 4 fullness",
        &report,
        started,
        Duration::from_secs(30),
    );
}

/// Criterion 5: 1000 seeded functions over the complex-rational and
/// finite-discrete spaces round-trip exactly through names at an adequate
/// resolution bound, in both directions.
#[test]
fn criterion_05_name_round_trips() {
    let started = Instant::now();
    let report = name_roundtrip_sweep(SEED, 1000);
    finish(
        "criterion 5 name round trips",
        &report,
        started,
        Duration::from_secs(30),
    );
}

/// Criterion 6: lifting a Borel code on functions and lifting it on their
/// names give the same atom set, for all unary codes of depth <= 3 over a
/// ten-ball basis (plus a binary sample) over a three-element carrier.
#[test]
fn criterion_06_predicate_preservation() {
    let started = Instant::now();
    let report = predicate_preservation_sweep(SEED);
    finish(
        "criterion 6 predicate preservation",
        &report,
        started,
        Duration::from_secs(30),
    );
}

/// Criterion 7: for 500 seeded posets on up to 5 elements, the regular-open
/// completion is isomorphic to the powerset algebra on the minimal elements,
/// verified against the open-set-lattice oracle by an explicit isomorphism.
#[test]
fn criterion_07_ro_completion() {
    let started = Instant::now();
    let report = ro_completion_sweep(SEED, 500);
    finish(
        "criterion 7 regular-open completions",
        &report,
        started,
        Duration::from_secs(10),
    );
}

/// Criterion 8: the tautology suite (>= 20 schemata) evaluates to 1 on every
/// structure of the criterion-1 family.
#[test]
fn criterion_08_soundness() {
    let started = Instant::now();
    let report = soundness_sweep(SEED);
    finish(
        "criterion 8 soundness schemata",
        &report,
        started,
        Duration::from_secs(5),
    );
}

/// Criterion 9: finite-scale elementarity spot-check. For 200 seeded closed
/// sentences of depth <= 3 and every point of Stone spaces with up to 3
/// atoms, truth in the finite-discrete space (computed directly) coincides
/// with truth in the germ structure at the point (computed through codes).
/// The full set-theoretic elementarity theorem is explicitly not in scope.
#[test]
fn criterion_09_elementarity_spotcheck() {
    let started = Instant::now();
    let report = elementarity_sweep(&ElementarityOptions {
        sentences: 200,
        depth: 3,
        seed: SEED,
    });
    finish(
        "criterion 9 elementarity spot-check",
        &report,
        started,
        Duration::from_secs(30),
    );
}

/// Criterion 10: the germ quotient and the ultrafilter quotient agree on
/// every structure of the criterion 1 and criterion 9 families, at every
/// ultrafilter.
#[test]
fn criterion_10_cross_oracle() {
    let started = Instant::now();
    let report = cross_oracle_sweep(SEED);
    finish(
        "criterion 10 germ/quotient cross-oracle",
        &report,
        started,
        Duration::from_secs(30),
    );
}
