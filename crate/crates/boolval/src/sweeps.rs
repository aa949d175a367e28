//! Seeded generators and check harnesses. Every sweep is deterministic for
//! a given seed, records that seed in its report, and prints one check entry
//! per verified property, so the CLI and the acceptance suite share one code
//! path.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::algebra::{AlgElement, BooleanAlgebra, Mask};
use crate::bvm::{
    check_structure_axioms, eval_tarski, find_witness, los_check, quotient,
    soundness_suite, BValuedStructure, FirstOrderStructure,
};
use crate::fspace::{
    self, as_bvalued_structure, germ_agrees_with_quotient, lift_relation, CPlusFunction,
    FunctionSpaceOptions, FunctionSpaceStructure, SpaceRef,
};
use crate::logic::{Formula, Signature, Term, Valuation};
use crate::names::{
    adequate_resolution, function_from_name, lift_relation_on_names, name_from_function,
};
use crate::poset::FinitePoset;
use crate::report::{Check, CheckReport};
use crate::space::{
    subset_code, tuple_set_code, BorelCode, Operand, PolishPresentation, RationalPoint,
    MAX_BALL_INDEX,
};

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn atom_names(count: usize) -> Vec<String> {
    (0..count).map(|i| format!("a{i}")).collect()
}

// ---------------------------------------------------------------------------
// Random axiom-passing table structures

/// A random table structure that satisfies the seven clauses by
/// construction: per atom, equality is a random partition of the domain and
/// each relation is a random union of class products.
pub fn random_table_structure(
    rng: &mut ChaCha8Rng,
    algebra: &BooleanAlgebra,
    domain_size: usize,
    sig: &Signature,
) -> BValuedStructure {
    let domain: Vec<String> = (0..domain_size).map(|i| format!("t{i}")).collect();
    let mut s = BValuedStructure::from_identity_tables(algebra.clone(), sig.clone(), domain)
        .expect("nonempty fresh domain")
        .with_search_mixing();

    let atoms = algebra.atom_count();
    // Per-atom class labels.
    let mut classes: Vec<Vec<usize>> = Vec::with_capacity(atoms);
    for _ in 0..atoms {
        let mut labels = vec![0usize; domain_size];
        let mut next = 1;
        for i in 1..domain_size {
            // Join an existing class or start a new one.
            let pick = rng.gen_range(0..=next);
            if pick == next {
                labels[i] = next;
                next += 1;
            } else {
                labels[i] = labels[(0..i).find(|&j| labels[j] == pick).unwrap_or(0)];
                labels[i] = pick;
            }
        }
        classes.push(labels);
    }

    // Equality masks from the partitions.
    for i in 0..domain_size {
        for j in 0..domain_size {
            let mut mask: Mask = 0;
            for (atom, labels) in classes.iter().enumerate() {
                if labels[i] == labels[j] {
                    mask |= 1 << atom;
                }
            }
            let names: Vec<String> = vec![format!("t{i}"), format!("t{j}")];
            s.set_eq(&names[0], &names[1], &algebra.element_from_mask(mask))
                .expect("elements exist");
        }
    }

    // Relations: per atom, a random truth value per class tuple.
    for (symbol, &arity) in sig.relations().clone().iter() {
        let mut tuples = vec![Vec::new()];
        for _ in 0..arity {
            tuples = tuples
                .into_iter()
                .flat_map(|t: Vec<usize>| {
                    (0..domain_size).map(move |i| {
                        let mut t = t.clone();
                        t.push(i);
                        t
                    })
                })
                .collect();
        }
        // Truth per (atom, class vector).
        let mut decisions: BTreeMap<(usize, Vec<usize>), bool> = BTreeMap::new();
        for tuple in &tuples {
            let mut mask: Mask = 0;
            for atom in 0..atoms {
                let key_vec: Vec<usize> = tuple.iter().map(|&i| classes[atom][i]).collect();
                let value = *decisions
                    .entry((atom, key_vec))
                    .or_insert_with(|| rng.gen_bool(0.5));
                if value {
                    mask |= 1 << atom;
                }
            }
            let names: Vec<String> = tuple.iter().map(|&i| format!("t{i}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            s.set_rel(symbol, &refs, &algebra.element_from_mask(mask))
                .expect("valid tuple");
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Formula enumeration for the Łoś sweep

/// The deterministic formula family used by the exhaustive Łoś sweep.
///
/// Atoms are `x = y`, `R(x, y)`, `R(y, x)`, `R(x, x)`. Depth-`d+1` formulas
/// extend depth-`d` ones by negation, by a binary connective with an atom on
/// the right, and by quantifying either variable. The family of depth `d` is
/// the union of all levels up to `d`.
pub fn los_formula_family(depth: usize) -> Vec<Formula> {
    let atoms = vec![
        Formula::eq(Term::var("x"), Term::var("y")),
        Formula::rel("R", vec![Term::var("x"), Term::var("y")]),
        Formula::rel("R", vec![Term::var("y"), Term::var("x")]),
        Formula::rel("R", vec![Term::var("x"), Term::var("x")]),
    ];
    let mut family = atoms.clone();
    let mut level = atoms.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for f in &level {
            next.push(Formula::not(f.clone()));
            for atom in &atoms {
                next.push(Formula::and(f.clone(), atom.clone()));
                next.push(Formula::or(f.clone(), atom.clone()));
                next.push(Formula::implies(f.clone(), atom.clone()));
            }
            for var in ["x", "y"] {
                next.push(Formula::exists(var, f.clone()));
                next.push(Formula::forall(var, f.clone()));
            }
        }
        family.extend(next.iter().cloned());
        level = next;
    }
    family
}

#[derive(Clone, Debug)]
pub struct LosSweepOptions {
    pub atoms: usize,
    pub domain: usize,
    pub depth: usize,
    pub structures: usize,
    pub seed: u64,
}

impl Default for LosSweepOptions {
    fn default() -> Self {
        LosSweepOptions {
            atoms: 3,
            domain: 3,
            depth: 3,
            structures: 50,
            seed: 0,
        }
    }
}

/// Exhaustive Łoś sweep over seeded random axiom-passing table structures:
/// all formulas of the family, all valuations of `x, y`, all ultrafilters,
/// both theorem clauses.
pub fn los_sweep(opts: &LosSweepOptions) -> CheckReport {
    let mut report = CheckReport::new("los-sweep", Some(opts.seed));
    let mut rng = rng_for(opts.seed);
    let sig = Signature::of(&[("R", 2)], &[]);
    let formulas = los_formula_family(opts.depth);
    report.push(Check::pass(format!(
        "formula family of depth <= {}: {} formulas",
        opts.depth,
        formulas.len()
    )));

    for index in 0..opts.structures {
        let algebra = BooleanAlgebra::powerset(atom_names(1 + rng.gen_range(0..opts.atoms)))
            .expect("small algebra");
        let domain_size = 1 + rng.gen_range(0..opts.domain);
        let s = random_table_structure(&mut rng, &algebra, domain_size, &sig);

        let axioms = check_structure_axioms(&s);
        report.push(Check::of(
            format!("structure {index}: generated tables pass the seven clauses"),
            axioms.passed(),
            json!(axioms.violations),
        ));

        let valuations: Vec<Valuation> = (0..domain_size)
            .flat_map(|i| {
                (0..domain_size).map(move |j| {
                    Valuation::of(&[("x", &format!("t{i}")), ("y", &format!("t{j}"))])
                })
            })
            .collect();
        match los_check(&s, &formulas, &valuations) {
            Ok(los) => {
                report.push(Check::of(
                    format!(
                        "structure {index}: {} cases, {} mismatches",
                        los.cases,
                        los.mismatches.len()
                    ),
                    los.passed(),
                    json!(los.mismatches.iter().take(3).collect::<Vec<_>>()),
                ));
            }
            Err(err) => {
                report.push(Check::fail(
                    format!("structure {index}: sweep error"),
                    json!(err.to_string()),
                ));
            }
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Function-space structure family (axioms, soundness, cross-oracle)

/// The family of function-space structures used by the structure-axiom,
/// soundness, and cross-oracle sweeps: complex-rational and finite-discrete
/// modes, one to three atoms, seeded carriers of at most four functions.
pub fn criterion_structures(seed: u64) -> Vec<(String, FunctionSpaceStructure)> {
    let mut rng = rng_for(seed);
    let mut out = Vec::new();
    for atoms in 1..=3usize {
        for variant in 0..4usize {
            let algebra = BooleanAlgebra::powerset(atom_names(atoms)).expect("small algebra");
            out.push((
                format!("complex/{atoms}-atoms/{variant}"),
                complex_structure(&mut rng, &algebra),
            ));
            out.push((
                format!("discrete/{atoms}-atoms/{variant}"),
                discrete_structure(&mut rng, &algebra),
            ));
        }
    }
    out
}

/// Complex-rational structure: a unary ball relation, the binary relation
/// `x + y = 0`, and pointwise negation. Carriers come in symmetric pairs so
/// negation stays total after closure.
fn complex_structure(rng: &mut ChaCha8Rng, algebra: &BooleanAlgebra) -> FunctionSpaceStructure {
    let space: SpaceRef = Arc::new(PolishPresentation::complex_rational());
    let sig = Signature::of(&[("inball", 1), ("sumzero", 2)], &[("neg", 1)]);
    let mut rel_codes = BTreeMap::new();
    rel_codes.insert("inball".to_string(), BorelCode::ball(0));
    rel_codes.insert(
        "sumzero".to_string(),
        BorelCode::Arith {
            op: crate::space::ArithOp::Add,
            lhs: Operand::Coord(0),
            rhs: Operand::Coord(1),
            out: Operand::Const(RationalPoint::origin()),
        },
    );
    let mut fun_codes = BTreeMap::new();
    fun_codes.insert("neg".to_string(), BorelCode::negation_graph());

    let palette: Vec<RationalPoint> = vec![
        RationalPoint::from_integers(&[1]),
        RationalPoint::from_integers(&[2]),
        RationalPoint::from_integers(&[0, 1]),
        RationalPoint::from_integers(&[1, 1]),
    ];
    let atoms = algebra.atom_count();
    let random_fun = |rng: &mut ChaCha8Rng| {
        let values: Vec<RationalPoint> = (0..atoms)
            .map(|_| {
                let p = &palette[rng.gen_range(0..palette.len())];
                if rng.gen_bool(0.3) {
                    RationalPoint::origin()
                } else {
                    p.clone()
                }
            })
            .collect();
        CPlusFunction::from_points(algebra.clone(), space.clone(), values).expect("members")
    };
    let f1 = random_fun(rng);
    let f2 = random_fun(rng);
    let negate = |f: &CPlusFunction| {
        CPlusFunction::from_points(
            algebra.clone(),
            space.clone(),
            f.values()
                .iter()
                .map(|p| RationalPoint::new(vec![-p.coord(0), -p.coord(1)]))
                .collect(),
        )
        .expect("members")
    };
    let carrier = vec![negate(&f1), negate(&f2), f1, f2];
    as_bvalued_structure(
        algebra,
        &space,
        &sig,
        &rel_codes,
        &fun_codes,
        carrier,
        &FunctionSpaceOptions::default(),
    )
    .expect("valid structure")
}

/// Finite-discrete structure over up to four integer points: a random unary
/// subset, a random binary relation, and the binary minimum (whose graph is
/// closed under any palette).
fn discrete_structure(rng: &mut ChaCha8Rng, algebra: &BooleanAlgebra) -> FunctionSpaceStructure {
    let m = rng.gen_range(2..=4usize);
    let points: Vec<RationalPoint> = (0..m)
        .map(|i| RationalPoint::from_integers(&[i as i64]))
        .collect();
    let space: SpaceRef =
        Arc::new(PolishPresentation::finite_discrete(points.clone()).expect("nonempty"));

    let unary: Vec<RationalPoint> = points
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .cloned()
        .collect();
    let mut binary = Vec::new();
    for p in &points {
        for q in &points {
            if rng.gen_bool(0.4) {
                binary.push(vec![p.clone(), q.clone()]);
            }
        }
    }
    let mut min_graph = Vec::new();
    for p in &points {
        for q in &points {
            let min = if p.coord(0) <= q.coord(0) { p } else { q };
            min_graph.push(vec![p.clone(), q.clone(), min.clone()]);
        }
    }
    let sig = Signature::of(&[("u", 1), ("r", 2)], &[("min", 2)]);
    let mut rel_codes = BTreeMap::new();
    rel_codes.insert("u".to_string(), subset_code(&space, &unary).expect("points"));
    rel_codes.insert(
        "r".to_string(),
        tuple_set_code(&space, 2, &binary).expect("points"),
    );
    let mut fun_codes = BTreeMap::new();
    fun_codes.insert(
        "min".to_string(),
        tuple_set_code(&space, 3, &min_graph).expect("points"),
    );

    let atoms = algebra.atom_count();
    let carrier: Vec<CPlusFunction> = (0..4)
        .map(|_| {
            let values: Vec<RationalPoint> = (0..atoms)
                .map(|_| points[rng.gen_range(0..points.len())].clone())
                .collect();
            CPlusFunction::from_points(algebra.clone(), space.clone(), values).expect("members")
        })
        .collect();
    as_bvalued_structure(
        algebra,
        &space,
        &sig,
        &rel_codes,
        &fun_codes,
        carrier,
        &FunctionSpaceOptions::default(),
    )
    .expect("valid structure")
}

/// Criterion sweep: every generated function-space structure passes the
/// seven clauses with zero violations.
pub fn structure_axiom_sweep(seed: u64) -> CheckReport {
    let mut report = CheckReport::new("check-axioms-sweep", Some(seed));
    for (label, fss) in criterion_structures(seed) {
        let axioms = check_structure_axioms(fss.as_structure());
        report.push(Check::of(
            format!(
                "{label}: carrier {} passes clauses (i)-(vii)",
                fss.carrier().len()
            ),
            axioms.passed(),
            json!(axioms.violations),
        ));
    }
    report
}

/// Criterion sweep: the tautology suite evaluates to `1` on every structure
/// of the axiom sweep family.
pub fn soundness_sweep(seed: u64) -> CheckReport {
    let mut report = CheckReport::new("soundness-sweep", Some(seed));
    for (label, fss) in criterion_structures(seed) {
        let suite = soundness_suite(fss.as_structure());
        let failed: Vec<_> = suite.checks.iter().filter(|c| !c.pass).collect();
        report.push(Check::of(
            format!("{label}: {} schemata at value 1", suite.checks.len()),
            suite.passed(),
            json!(failed),
        ));
    }
    report
}

/// Criterion sweep: the germ quotient agrees with the ultrafilter quotient
/// on the axiom-sweep structures and the elementarity structures.
pub fn cross_oracle_sweep(seed: u64) -> CheckReport {
    let mut report = CheckReport::new("cross-oracle-sweep", Some(seed));
    for (label, fss) in criterion_structures(seed) {
        for g in fss.as_structure().algebra().ultrafilters() {
            let outcome = fss
                .germ_quotient(&g)
                .map_err(|e| e.to_string())
                .and_then(|germ| {
                    let q = quotient(fss.as_structure(), &g).map_err(|e| e.to_string())?;
                    germ_agrees_with_quotient(&germ, &q, fss.as_structure().signature())
                        .map_err(|e| e.to_string())
                });
            match outcome {
                Ok(agreement) => report.push(Check::of(
                    format!("{label} at G@{}", g.atom_name()),
                    agreement.agrees(),
                    json!(agreement),
                )),
                Err(err) => {
                    report.push(Check::fail(format!("{label} at G@{}", g.atom_name()), json!(err)))
                }
            }
        }
    }
    for (label, case) in elementarity_structures(seed) {
        for g in case.fss.as_structure().algebra().ultrafilters() {
            let outcome = case
                .fss
                .germ_quotient(&g)
                .map_err(|e| e.to_string())
                .and_then(|germ| {
                    let q = quotient(case.fss.as_structure(), &g).map_err(|e| e.to_string())?;
                    germ_agrees_with_quotient(&germ, &q, case.fss.as_structure().signature())
                        .map_err(|e| e.to_string())
                });
            match outcome {
                Ok(agreement) => report.push(Check::of(
                    format!("{label} at G@{}", g.atom_name()),
                    agreement.agrees(),
                    json!(agreement),
                )),
                Err(err) => {
                    report.push(Check::fail(format!("{label} at G@{}", g.atom_name()), json!(err)))
                }
            }
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Mixing sweep

/// Enumerates every antichain (family of pairwise-disjoint nonzero
/// elements) of the powerset algebra on `n` atoms, including the empty one.
pub fn all_antichains(algebra: &BooleanAlgebra) -> Vec<Vec<AlgElement>> {
    let full = algebra.full_mask();
    let mut out = vec![vec![]];
    // Partial partitions: choose the block containing the lowest remaining
    // atom, recurse on the rest; also allow dropping that atom entirely.
    fn recurse(algebra: &BooleanAlgebra, remaining: Mask, current: &mut Vec<Mask>, out: &mut Vec<Vec<AlgElement>>) {
        if remaining == 0 {
            if !current.is_empty() {
                out.push(
                    current
                        .iter()
                        .map(|&m| algebra.element_from_mask(m))
                        .collect(),
                );
            }
            return;
        }
        let low = remaining & remaining.wrapping_neg();
        let rest = remaining & !low;
        // Drop the lowest atom from the antichain's support.
        recurse(algebra, rest, current, out);
        // Or put it in a block with any subset of the rest.
        let mut subset = rest;
        loop {
            current.push(low | subset);
            recurse(algebra, rest & !subset, current, out);
            current.pop();
            if subset == 0 {
                break;
            }
            subset = (subset - 1) & rest;
        }
    }
    let mut current = Vec::new();
    recurse(algebra, full, &mut current, &mut out);
    out
}

/// Criterion sweep: mixing along every antichain of every algebra with up
/// to four atoms, with seeded function families. Verifies `a <= ⟦mix = f_a⟧`
/// through the lifted diagonal and the default value outside the union.
pub fn mixing_sweep(seed: u64) -> CheckReport {
    let mut report = CheckReport::new("mixing-sweep", Some(seed));
    let mut rng = rng_for(seed);
    let space: SpaceRef = Arc::new(PolishPresentation::complex_rational());
    let diagonal = crate::space::equality_code(&space).expect("complex mode");
    let default = RationalPoint::origin();
    let mut cases = 0;
    for atoms in 1..=4usize {
        let algebra = BooleanAlgebra::powerset(atom_names(atoms)).expect("small algebra");
        for antichain in all_antichains(&algebra) {
            for _family in 0..2 {
                cases += 1;
                let fs: Vec<CPlusFunction> = antichain
                    .iter()
                    .map(|_| {
                        let values: Vec<RationalPoint> = (0..atoms)
                            .map(|_| RationalPoint::from_integers(&[rng.gen_range(1..9)]))
                            .collect();
                        CPlusFunction::from_points(algebra.clone(), space.clone(), values)
                            .expect("members")
                    })
                    .collect();
                let mixed = match fspace::mix(&antichain, &fs, &default) {
                    Ok(m) => m,
                    Err(err) => {
                        report.push(Check::fail(
                            format!("{atoms} atoms, antichain {antichain:?}"),
                            json!(err.to_string()),
                        ));
                        continue;
                    }
                };
                let mut ok = true;
                let mut detail = String::new();
                for (a, f) in antichain.iter().zip(&fs) {
                    let eq = lift_relation(&diagonal, &[&mixed, f]).expect("same family");
                    if !a.leq(&eq).expect("same algebra") {
                        ok = false;
                        detail = format!("piece {a} not below ⟦mix = f_a⟧ = {eq}");
                        break;
                    }
                }
                let sup = algebra.sup(antichain.iter()).expect("same algebra");
                for atom in 0..atoms {
                    if !sup.contains_atom(atom) && mixed.value(atom) != &default {
                        ok = false;
                        detail = format!("default not taken outside the union at atom {atom}");
                        break;
                    }
                }
                if !ok {
                    report.push(Check::fail(
                        format!("{atoms} atoms, antichain of {}", antichain.len()),
                        json!(detail),
                    ));
                }
            }
        }
    }
    report.push(Check::pass(format!(
        "{cases} mixing cases verified exactly"
    )));
    report
}

// ---------------------------------------------------------------------------
// Fullness sweep

/// Random quantifier-free formula with free variables among `vars`, built
/// from the signature's relation symbols and equality.
fn random_body(rng: &mut ChaCha8Rng, sig: &Signature, vars: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.35) {
        // Atom.
        let rels: Vec<(&String, &usize)> = sig.relations().iter().collect();
        if !rels.is_empty() && rng.gen_bool(0.7) {
            let (symbol, &arity) = rels[rng.gen_range(0..rels.len())];
            let args = (0..arity)
                .map(|_| Term::var(vars[rng.gen_range(0..vars.len())]))
                .collect();
            return Formula::rel(symbol, args);
        }
        let l = Term::var(vars[rng.gen_range(0..vars.len())]);
        let r = Term::var(vars[rng.gen_range(0..vars.len())]);
        return Formula::eq(l, r);
    }
    match rng.gen_range(0..4) {
        0 => Formula::not(random_body(rng, sig, vars, depth - 1)),
        1 => Formula::and(
            random_body(rng, sig, vars, depth - 1),
            random_body(rng, sig, vars, depth - 1),
        ),
        2 => Formula::or(
            random_body(rng, sig, vars, depth - 1),
            random_body(rng, sig, vars, depth - 1),
        ),
        _ => Formula::implies(
            random_body(rng, sig, vars, depth - 1),
            random_body(rng, sig, vars, depth - 1),
        ),
    }
}

/// Criterion sweep: witness search attains the existential value exactly on
/// function-space structures when the pool is the whole (mixing-closed)
/// carrier. Bodies are seeded depth-one existentials with one parameter.
pub fn fullness_sweep(seed: u64, cases: usize) -> CheckReport {
    let mut report = CheckReport::new("fullness-sweep", Some(seed));
    let mut rng = rng_for(seed);
    let structures = criterion_structures(seed);
    let mut exact = 0;
    for index in 0..cases {
        let (label, fss) = &structures[index % structures.len()];
        let s = fss.as_structure();
        let body = random_body(&mut rng, s.signature(), &["x", "y"], 2);
        let pool: Vec<String> = s.domain().to_vec();
        let param = s.element_name(rng.gen_range(0..s.domain_size()));
        let valuation = Valuation::of(&[("y", param)]);
        match find_witness(s, "x", &body, &valuation, &pool) {
            Ok((_, result)) if result.exact => exact += 1,
            Ok((witness, result)) => report.push(Check::fail(
                format!("case {index} on {label}: inexact witness"),
                json!({
                    "witness": witness,
                    "target": result.target.atom_names_owned(),
                    "achieved": result.achieved.atom_names_owned(),
                    "body": body.to_string(),
                }),
            )),
            Err(err) => report.push(Check::fail(
                format!("case {index} on {label}: witness search failed"),
                json!(err.to_string()),
            )),
        }
    }
    report.push(Check::of(
        format!("{exact}/{cases} witness searches exact"),
        exact == cases,
        json!(null),
    ));
    report
}

// ---------------------------------------------------------------------------
// Name round-trip sweep

/// Criterion sweep: function -> name -> function is the identity, and
/// name -> function -> name matches on every index below the bound.
pub fn name_roundtrip_sweep(seed: u64, cases: usize) -> CheckReport {
    let mut report = CheckReport::new("name-roundtrip-sweep", Some(seed));
    let mut rng = rng_for(seed);
    let complex: SpaceRef = Arc::new(PolishPresentation::complex_rational());
    let discrete_points: Vec<RationalPoint> =
        (0..4).map(|i| RationalPoint::from_integers(&[i])).collect();
    let discrete: SpaceRef = Arc::new(
        PolishPresentation::finite_discrete(discrete_points.clone()).expect("nonempty"),
    );
    // Complex values on the half-integer lattice within [-2, 2]².
    let halves: Vec<RationalPoint> = {
        let mut v = Vec::new();
        for num_re in -4i64..=4 {
            for num_im in -4i64..=4 {
                v.push(
                    RationalPoint::parse(&[&format!("{num_re}/2"), &format!("{num_im}/2")])
                        .expect("rational"),
                );
            }
        }
        v
    };

    let mut failures = 0;
    for index in 0..cases {
        let complex_case = index % 5 < 3; // 3:2 split between the modes
        let (space, palette) = if complex_case {
            (&complex, &halves)
        } else {
            (&discrete, &discrete_points)
        };
        let atoms = 1 + rng.gen_range(0..3);
        let algebra = BooleanAlgebra::powerset(atom_names(atoms)).expect("small algebra");
        let values: Vec<RationalPoint> = (0..atoms)
            .map(|_| palette[rng.gen_range(0..palette.len())].clone())
            .collect();
        let f = CPlusFunction::from_points(algebra.clone(), space.clone(), values)
            .expect("palette points are members");

        let outcome = (|| -> Result<(), String> {
            let bound = adequate_resolution(f.values(), space, MAX_BALL_INDEX)
                .map_err(|e| e.to_string())?;
            let name = name_from_function(&f, bound).map_err(|e| e.to_string())?;
            let pool: Vec<RationalPoint> = f.values().to_vec();
            let back = function_from_name(&name, &pool).map_err(|e| e.to_string())?;
            if back.values() != f.values() {
                return Err(format!(
                    "realized function differs: {:?} vs {:?}",
                    back.values(),
                    f.values()
                ));
            }
            let name_again = name_from_function(&back, bound).map_err(|e| e.to_string())?;
            if name_again != name {
                return Err("name of realized function differs below the bound".into());
            }
            Ok(())
        })();
        if let Err(err) = outcome {
            failures += 1;
            report.push(Check::fail(format!("case {index}"), json!(err)));
        }
    }
    report.push(Check::of(
        format!("{} round trips exact", cases - failures),
        failures == 0,
        json!(null),
    ));
    report
}

// ---------------------------------------------------------------------------
// Predicate preservation sweep

/// All unary ball codes of the given depth over a basis prefix: atoms are
/// balls, each further level adds complements and two-element unions.
pub fn unary_code_family(balls: usize, depth: usize) -> Vec<BorelCode> {
    let mut family: Vec<BorelCode> = (0..balls).map(BorelCode::ball).collect();
    let mut level = family.clone();
    for _ in 1..depth {
        let mut next: Vec<BorelCode> = Vec::new();
        for f in &level {
            next.push(BorelCode::compl(f.clone()));
        }
        let pool = family.clone();
        for (i, f) in pool.iter().enumerate() {
            for g in &pool[i + 1..] {
                next.push(BorelCode::union(vec![f.clone(), g.clone()]));
            }
        }
        next.retain(|c| !family.contains(c));
        family.extend(next.iter().cloned());
        level = next;
    }
    family
}

/// Criterion sweep: lifting a predicate on functions agrees with lifting it
/// on their names, for every unary code of depth up to three over a ten-ball
/// basis and a binary sample, over a three-element carrier.
pub fn predicate_preservation_sweep(seed: u64) -> CheckReport {
    let mut report = CheckReport::new("predicate-preservation-sweep", Some(seed));
    let mut rng = rng_for(seed);
    let space: SpaceRef = Arc::new(PolishPresentation::complex_rational());
    let algebra = BooleanAlgebra::powerset(atom_names(3)).expect("small algebra");

    let palette: Vec<RationalPoint> = vec![
        RationalPoint::origin(),
        RationalPoint::from_integers(&[1]),
        RationalPoint::parse(&["1/2", "0"]).expect("rational"),
        RationalPoint::from_integers(&[0, 1]),
        RationalPoint::from_integers(&[-1, 1]),
    ];
    let carrier: Vec<CPlusFunction> = (0..3)
        .map(|_| {
            let values: Vec<RationalPoint> = (0..3)
                .map(|_| palette[rng.gen_range(0..palette.len())].clone())
                .collect();
            CPlusFunction::from_points(algebra.clone(), space.clone(), values).expect("members")
        })
        .collect();
    let all_values: Vec<RationalPoint> = {
        let mut v: Vec<RationalPoint> = Vec::new();
        for f in &carrier {
            for p in f.values() {
                if !v.contains(p) {
                    v.push(p.clone());
                }
            }
        }
        v
    };
    let bound = adequate_resolution(&all_values, &space, MAX_BALL_INDEX).expect("lattice values");
    let names: Vec<_> = carrier
        .iter()
        .map(|f| name_from_function(f, bound).expect("separated"))
        .collect();
    let realized: Vec<CPlusFunction> = names
        .iter()
        .map(|n| function_from_name(n, &all_values).expect("realizable"))
        .collect();

    // Unary codes, depth <= 3 over balls 0..10.
    let unary = unary_code_family(10, 3);
    let mut mismatches = 0;
    let mut compared = 0;
    for code in &unary {
        for (f, r) in carrier.iter().zip(&realized) {
            compared += 1;
            let direct = lift_relation(code, &[f]).expect("unary");
            let through = lift_relation(code, &[r]).expect("unary");
            if direct != through {
                mismatches += 1;
                if mismatches <= 3 {
                    report.push(Check::fail(
                        format!("unary code {code:?}"),
                        json!({
                            "direct": direct.atom_names_owned(),
                            "through-names": through.atom_names_owned(),
                        }),
                    ));
                }
            }
        }
    }
    report.push(Check::of(
        format!(
            "unary codes: {} comparisons over {} codes, {} mismatches",
            compared,
            unary.len(),
            mismatches
        ),
        mismatches == 0,
        json!(null),
    ));

    // The public names-route operation on the depth-one fragment.
    let mut op_mismatches = 0;
    for code in unary.iter().take(10) {
        for (f, n) in carrier.iter().zip(&names) {
            let direct = lift_relation(code, &[f]).expect("unary");
            let through =
                lift_relation_on_names(code, &[n], &all_values).expect("realizable names");
            if direct != through {
                op_mismatches += 1;
            }
        }
    }
    report.push(Check::of(
        format!("lift_relation_on_names agrees on the ball atoms ({op_mismatches} mismatches)"),
        op_mismatches == 0,
        json!(null),
    ));

    // Binary sample: equality, coordinate balls, and their combinations of
    // depth <= 2.
    let mut binary_atoms = vec![crate::space::equality_code(&space).expect("complex")];
    for coord in 0..2usize {
        for ball in 0..4usize {
            binary_atoms.push(BorelCode::ball_at(coord, ball));
        }
    }
    let mut binary = binary_atoms.clone();
    for f in &binary_atoms {
        binary.push(BorelCode::compl(f.clone()));
    }
    for (i, f) in binary_atoms.iter().enumerate() {
        for g in &binary_atoms[i + 1..] {
            binary.push(BorelCode::union(vec![f.clone(), g.clone()]));
        }
    }
    let mut binary_mismatches = 0;
    let mut binary_compared = 0;
    for code in &binary {
        for (i, (f, r)) in carrier.iter().zip(&realized).enumerate() {
            for (j, (g, s)) in carrier.iter().zip(&realized).enumerate() {
                let _ = (i, j);
                binary_compared += 1;
                let direct = lift_relation(code, &[f, g]).expect("binary");
                let through = lift_relation(code, &[r, s]).expect("binary");
                if direct != through {
                    binary_mismatches += 1;
                }
            }
        }
    }
    report.push(Check::of(
        format!(
            "binary codes: {binary_compared} comparisons over {} codes, {binary_mismatches} mismatches",
            binary.len()
        ),
        binary_mismatches == 0,
        json!(null),
    ));
    report
}

// ---------------------------------------------------------------------------
// Regular-open completion sweep

/// Random partial order on `n` elements: a random relation on `i < j`,
/// transitively closed (antisymmetry is free on an upper-triangular base).
pub fn random_poset(rng: &mut ChaCha8Rng, n: usize) -> FinitePoset {
    let mut leq = vec![false; n * n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.35) {
                leq[i * n + j] = true;
            }
        }
    }
    // Transitive closure.
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if leq[i * n + k] && leq[k * n + j] {
                    leq[i * n + j] = true;
                }
            }
        }
    }
    let elements: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if leq[i * n + j] {
                pairs.push((elements[i].clone(), elements[j].clone()));
            }
        }
    }
    FinitePoset::new(elements, &pairs).expect("transitively closed")
}

/// Independent regular-open oracle: computes interior and closure from the
/// explicit lattice of open (down-closed) sets, with no use of the int-
/// closure formula.
struct RoOracle {
    full: Mask,
    opens: Vec<Mask>,
}

impl RoOracle {
    fn new(poset: &FinitePoset) -> Self {
        let n = poset.len();
        let full = if n == 64 { Mask::MAX } else { (1 << n) - 1 };
        let opens = (0..=full)
            .filter(|&set| poset.is_down_closed(set))
            .collect();
        RoOracle { full, opens }
    }

    fn interior(&self, set: Mask) -> Mask {
        self.opens
            .iter()
            .filter(|&&v| v & !set == 0)
            .fold(0, |acc, &v| acc | v)
    }

    fn closure(&self, set: Mask) -> Mask {
        // Complement of the union of opens missing the set.
        let miss = self
            .opens
            .iter()
            .filter(|&&v| v & set == 0)
            .fold(0, |acc, &v| acc | v);
        self.full & !miss
    }

    fn regular_opens(&self) -> Vec<Mask> {
        self.opens
            .iter()
            .copied()
            .filter(|&v| self.interior(self.closure(v)) == v)
            .collect()
    }
}

/// Criterion sweep: the regular-open completion of every sampled poset is
/// isomorphic to the powerset of its minimal elements, verified against the
/// open-set-lattice oracle by an explicit isomorphism.
pub fn ro_completion_sweep(seed: u64, cases: usize) -> CheckReport {
    let mut report = CheckReport::new("ro-completion-sweep", Some(seed));
    let mut rng = rng_for(seed);
    let mut verified = 0;
    for index in 0..cases {
        let n = 1 + rng.gen_range(0..5);
        let poset = random_poset(&mut rng, n);
        let outcome = verify_ro_completion(&poset);
        match outcome {
            Ok(()) => verified += 1,
            Err(err) => report.push(Check::fail(
                format!("poset {index} ({n} elements)"),
                json!({ "poset": poset.to_literal(), "error": err }),
            )),
        }
    }
    report.push(Check::of(
        format!("{verified}/{cases} completions match the oracle"),
        verified == cases,
        json!(null),
    ));
    report
}

/// The explicit isomorphism check behind the sweep; also used directly by
/// unit tests.
pub fn verify_ro_completion(poset: &FinitePoset) -> Result<(), String> {
    let (algebra, embedding) = poset.ro_completion().map_err(|e| e.to_string())?;
    let oracle = RoOracle::new(poset);
    let regular = oracle.regular_opens();

    let minimal = poset.minimal_elements();
    let min_count = minimal.count_ones();
    if algebra.atom_count() != min_count as usize {
        return Err(format!(
            "completion has {} atoms, expected {} minimal elements",
            algebra.atom_count(),
            min_count
        ));
    }
    if regular.len() as u64 != algebra.element_count() {
        return Err(format!(
            "oracle finds {} regular-open sets, completion has {}",
            regular.len(),
            algebra.element_count()
        ));
    }

    // The isomorphism: an element of the completion (a set S of minimal
    // elements) maps to the down-set of points all of whose minimal
    // predecessors lie in S.
    let min_indices: Vec<usize> = (0..poset.len()).filter(|&p| minimal & (1 << p) != 0).collect();
    let to_down_set = |e: &AlgElement| -> Mask {
        let mut allowed: Mask = 0;
        for (bit, &m) in min_indices.iter().enumerate() {
            if e.mask() & (1 << bit) != 0 {
                allowed |= 1 << m;
            }
        }
        let mut set = 0;
        for p in 0..poset.len() {
            if poset.minimal_below(p) & !allowed == 0 {
                set |= 1 << p;
            }
        }
        set
    };

    let mut images = Vec::new();
    for e in algebra.elements() {
        let image = to_down_set(&e);
        if !regular.contains(&image) {
            return Err(format!("image of {e} is not regular open"));
        }
        if images.contains(&image) {
            return Err("isomorphism candidate is not injective".into());
        }
        images.push(image);
    }
    // Surjectivity follows from injectivity and equal cardinality, checked
    // above; verify the Boolean operations transfer.
    let sample: Vec<AlgElement> = algebra.elements().collect();
    for x in &sample {
        for y in &sample {
            let join_image = to_down_set(&x.join(y).map_err(|e| e.to_string())?);
            let oracle_join = oracle.interior(oracle.closure(to_down_set(x) | to_down_set(y)));
            if join_image != oracle_join {
                return Err(format!("join of {x} and {y} does not transfer"));
            }
            let meet_image = to_down_set(&x.meet(y).map_err(|e| e.to_string())?);
            if meet_image != to_down_set(x) & to_down_set(y) {
                return Err(format!("meet of {x} and {y} does not transfer"));
            }
        }
        let compl_image = to_down_set(&x.complement());
        let oracle_compl = oracle.interior(oracle.full & !to_down_set(x));
        if compl_image != oracle_compl {
            return Err(format!("complement of {x} does not transfer"));
        }
    }
    // The embedding is the int-closure of the cones and lands densely.
    for p in 0..poset.len() {
        let down = poset.down_set(p);
        let expected = oracle.interior(oracle.closure(down));
        if to_down_set(&embedding[p]) != expected {
            return Err(format!("embedding of point {p} differs from Int Cl of its cone"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Elementarity spot-check

pub struct ElementarityCase {
    pub space: SpaceRef,
    pub sig: Signature,
    /// The space itself as a two-valued structure, built directly from the
    /// chosen relation sets (not through codes).
    pub direct: FirstOrderStructure,
    pub fss: FunctionSpaceStructure,
}

fn elementarity_structures(seed: u64) -> Vec<(String, ElementarityCase)> {
    let mut rng = rng_for(seed ^ 0x9e37_79b9);
    let mut out = Vec::new();
    for atoms in 1..=3usize {
        for variant in 0..2usize {
            let algebra = BooleanAlgebra::powerset(atom_names(atoms)).expect("small algebra");
            let m = rng.gen_range(2..=4usize);
            let points: Vec<RationalPoint> = (0..m)
                .map(|i| RationalPoint::from_integers(&[i as i64]))
                .collect();
            let space: SpaceRef = Arc::new(
                PolishPresentation::finite_discrete(points.clone()).expect("nonempty"),
            );
            let unary: Vec<RationalPoint> = points
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .cloned()
                .collect();
            let mut binary = Vec::new();
            for p in &points {
                for q in &points {
                    if rng.gen_bool(0.4) {
                        binary.push(vec![p.clone(), q.clone()]);
                    }
                }
            }
            let sig = Signature::of(&[("u", 1), ("r", 2)], &[]);

            // Direct two-valued structure on the points.
            let elements: Vec<String> = points.iter().map(|p| p.to_string()).collect();
            let mut relations = BTreeMap::new();
            relations.insert(
                "u".to_string(),
                unary
                    .iter()
                    .map(|p| vec![points.iter().position(|q| q == p).unwrap()])
                    .collect(),
            );
            relations.insert(
                "r".to_string(),
                binary
                    .iter()
                    .map(|t| {
                        t.iter()
                            .map(|p| points.iter().position(|q| q == p).unwrap())
                            .collect()
                    })
                    .collect(),
            );
            let direct = FirstOrderStructure {
                elements,
                relations,
                functions: BTreeMap::new(),
                class_of: None,
            };

            // Function-space structure over the full constant carrier.
            let mut rel_codes = BTreeMap::new();
            rel_codes.insert("u".to_string(), subset_code(&space, &unary).expect("points"));
            rel_codes.insert(
                "r".to_string(),
                tuple_set_code(&space, 2, &binary).expect("points"),
            );
            let carrier: Vec<CPlusFunction> = points
                .iter()
                .map(|p| {
                    CPlusFunction::constant(algebra.clone(), space.clone(), p.clone())
                        .expect("member")
                })
                .collect();
            let fss = as_bvalued_structure(
                &algebra,
                &space,
                &sig,
                &rel_codes,
                &BTreeMap::new(),
                carrier,
                &FunctionSpaceOptions::default(),
            )
            .expect("valid structure");
            out.push((
                format!("elementarity/{atoms}-atoms/{m}-points/{variant}"),
                ElementarityCase {
                    space,
                    sig,
                    direct,
                    fss,
                },
            ));
        }
    }
    out
}

/// Random closed sentence of bounded connective depth: a random body whose
/// free variables are then universally quantified.
pub fn random_sentence(rng: &mut ChaCha8Rng, sig: &Signature, depth: usize) -> Formula {
    let body = random_quantified(rng, sig, &["x", "y"], depth);
    let mut sentence = body;
    for var in sentence.free_variables() {
        sentence = Formula::forall(&var, sentence);
    }
    sentence
}

fn random_quantified(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    vars: &[&str],
    depth: usize,
) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_body(rng, sig, vars, 0);
    }
    match rng.gen_range(0..6) {
        0 => Formula::not(random_quantified(rng, sig, vars, depth - 1)),
        1 => Formula::and(
            random_quantified(rng, sig, vars, depth - 1),
            random_quantified(rng, sig, vars, depth - 1),
        ),
        2 => Formula::or(
            random_quantified(rng, sig, vars, depth - 1),
            random_quantified(rng, sig, vars, depth - 1),
        ),
        3 => Formula::implies(
            random_quantified(rng, sig, vars, depth - 1),
            random_quantified(rng, sig, vars, depth - 1),
        ),
        4 => Formula::exists(
            vars[rng.gen_range(0..vars.len())],
            random_quantified(rng, sig, vars, depth - 1),
        ),
        _ => Formula::forall(
            vars[rng.gen_range(0..vars.len())],
            random_quantified(rng, sig, vars, depth - 1),
        ),
    }
}

#[derive(Clone, Debug)]
pub struct ElementarityOptions {
    pub sentences: usize,
    pub depth: usize,
    pub seed: u64,
}

impl Default for ElementarityOptions {
    fn default() -> Self {
        ElementarityOptions {
            sentences: 200,
            depth: 3,
            seed: 0,
        }
    }
}

/// Finite-scale elementarity spot-check: for every seeded closed sentence
/// and every point of the Stone space, truth in `Y` coincides with truth in
/// the germ structure at that point. At this scale the germ structure over
/// the full constant carrier is isomorphic to `Y`, so agreement must be
/// perfect; the check exercises the two independent evaluation routes, not
/// the metamathematical elementarity theorem, whose general form is out of
/// reach here.
pub fn elementarity_sweep(opts: &ElementarityOptions) -> CheckReport {
    let mut report = CheckReport::new("elementarity-spotcheck", Some(opts.seed));
    let mut rng = rng_for(opts.seed);
    let cases = elementarity_structures(opts.seed);
    report.push(Check::pass(
        "finite-scale reading: germ structure over the constant carrier is isomorphic to Y; \
         this checks the two evaluation routes, not the set-theoretic elementarity theorem",
    ));
    let empty = Valuation::new();
    let mut compared = 0;
    let mut mismatches = 0;
    for _ in 0..opts.sentences {
        let (label, case) = &cases[rng.gen_range(0..cases.len())];
        let sentence = random_sentence(&mut rng, &case.sig, opts.depth);
        let direct_truth = match eval_tarski(&case.direct, &sentence, &empty) {
            Ok(t) => t,
            Err(err) => {
                report.push(Check::fail(
                    format!("{label}: direct evaluation failed"),
                    json!(err.to_string()),
                ));
                continue;
            }
        };
        for g in case.fss.as_structure().algebra().ultrafilters() {
            compared += 1;
            let germ_truth = case
                .fss
                .germ_quotient(&g)
                .map_err(|e| e.to_string())
                .and_then(|germ| germ.to_first_order(&case.sig).map_err(|e| e.to_string()))
                .and_then(|fo| eval_tarski(&fo, &sentence, &empty).map_err(|e| e.to_string()));
            match germ_truth {
                Ok(t) if t == direct_truth => {}
                Ok(t) => {
                    mismatches += 1;
                    if mismatches <= 3 {
                        report.push(Check::fail(
                            format!("{label} at G@{}", g.atom_name()),
                            json!({
                                "sentence": sentence.to_string(),
                                "space": direct_truth,
                                "germ": t,
                            }),
                        ));
                    }
                }
                Err(err) => {
                    mismatches += 1;
                    report.push(Check::fail(
                        format!("{label} at G@{}", g.atom_name()),
                        json!(err),
                    ));
                }
            }
        }
    }
    report.push(Check::of(
        format!("{compared} sentence/point comparisons, {mismatches} mismatches"),
        mismatches == 0,
        json!(null),
    ));
    report
}

// ---------------------------------------------------------------------------
