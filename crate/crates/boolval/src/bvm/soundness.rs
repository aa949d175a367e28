//! A fixed suite of tautology and equality schemata, instantiated with
//! atomic formulas over the structure's own signature. In any structure
//! satisfying the seven clauses every instance evaluates to `1`, witnessing
//! soundness on these instances.

use serde::Serialize;

use crate::logic::{Formula, Term, Valuation};

use super::eval::eval_boolean;
use super::BValuedStructure;

#[derive(Clone, Debug, Serialize)]
pub struct SchemaCheck {
    pub name: String,
    pub instances: usize,
    pub pass: bool,
    /// First failing instance, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SoundnessReport {
    pub checks: Vec<SchemaCheck>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Atomic formulas used to instantiate the schema placeholders, drawn from
/// the structure's signature. Variables cycle through `x`, `y`, `z`.
fn atom_pool(s: &BValuedStructure) -> Vec<Formula> {
    const VARS: [&str; 3] = ["x", "y", "z"];
    let mut pool = Vec::new();
    for (symbol, &arity) in s.signature().relations() {
        let args: Vec<Term> = (0..arity).map(|i| Term::var(VARS[i % 3])).collect();
        pool.push(Formula::rel(symbol, args));
        if arity >= 2 {
            let mut rev: Vec<Term> = (0..arity).map(|i| Term::var(VARS[i % 3])).collect();
            rev.reverse();
            pool.push(Formula::rel(symbol, rev));
        }
    }
    pool.push(Formula::eq(Term::var("x"), Term::var("y")));
    pool.push(Formula::eq(Term::var("y"), Term::var("z")));
    pool.push(Formula::eq(Term::var("x"), Term::var("z")));
    pool
}

fn schemata(s: &BValuedStructure) -> Vec<(String, Formula)> {
    use Formula as F;
    let pool = atom_pool(s);
    let p = pool[0].clone();
    let q = pool[1 % pool.len()].clone();
    let r = pool[2 % pool.len()].clone();
    // Quantified placeholders: both mention x.
    let d1 = pool[0].clone();
    let d2 = pool
        .iter()
        .skip(1)
        .find(|f| f.free_variables().contains("x"))
        .cloned()
        .unwrap_or_else(|| pool[0].clone());

    let x = |t: &str| Term::var(t);
    let mut out: Vec<(String, Formula)> = Vec::new();
    let mut add = |name: &str, f: Formula| out.push((name.to_owned(), f));

    add("excluded-middle", F::or(p.clone(), F::not(p.clone())));
    add(
        "non-contradiction",
        F::not(F::and(p.clone(), F::not(p.clone()))),
    );
    add("identity", F::implies(p.clone(), p.clone()));
    add(
        "weakening",
        F::implies(p.clone(), F::implies(q.clone(), p.clone())),
    );
    add(
        "frege",
        F::implies(
            F::implies(p.clone(), F::implies(q.clone(), r.clone())),
            F::implies(
                F::implies(p.clone(), q.clone()),
                F::implies(p.clone(), r.clone()),
            ),
        ),
    );
    add(
        "contraposition",
        F::implies(
            F::implies(F::not(q.clone()), F::not(p.clone())),
            F::implies(p.clone(), q.clone()),
        ),
    );
    add(
        "syllogism",
        F::implies(
            F::implies(p.clone(), q.clone()),
            F::implies(
                F::implies(q.clone(), r.clone()),
                F::implies(p.clone(), r.clone()),
            ),
        ),
    );
    add("and-elim-left", F::implies(F::and(p.clone(), q.clone()), p.clone()));
    add("and-elim-right", F::implies(F::and(p.clone(), q.clone()), q.clone()));
    add("or-intro-left", F::implies(p.clone(), F::or(p.clone(), q.clone())));
    add("or-intro-right", F::implies(q.clone(), F::or(p.clone(), q.clone())));
    add(
        "or-elimination",
        F::implies(
            F::and(
                F::implies(p.clone(), r.clone()),
                F::implies(q.clone(), r.clone()),
            ),
            F::implies(F::or(p.clone(), q.clone()), r.clone()),
        ),
    );
    add(
        "distribute-and-over-or",
        F::implies(
            F::and(p.clone(), F::or(q.clone(), r.clone())),
            F::or(F::and(p.clone(), q.clone()), F::and(p.clone(), r.clone())),
        ),
    );
    add(
        "collect-and-over-or",
        F::implies(
            F::or(F::and(p.clone(), q.clone()), F::and(p.clone(), r.clone())),
            F::and(p.clone(), F::or(q.clone(), r.clone())),
        ),
    );
    add(
        "de-morgan-and",
        F::implies(
            F::not(F::and(p.clone(), q.clone())),
            F::or(F::not(p.clone()), F::not(q.clone())),
        ),
    );
    add(
        "de-morgan-or",
        F::implies(
            F::or(F::not(p.clone()), F::not(q.clone())),
            F::not(F::and(p.clone(), q.clone())),
        ),
    );
    add(
        "double-negation-elim",
        F::implies(F::not(F::not(p.clone())), p.clone()),
    );
    add(
        "double-negation-intro",
        F::implies(p.clone(), F::not(F::not(p.clone()))),
    );
    add(
        "peirce",
        F::implies(
            F::implies(F::implies(p.clone(), q.clone()), p.clone()),
            p.clone(),
        ),
    );

    add(
        "universal-instantiation",
        F::implies(
            F::forall("x", d1.clone()),
            d1.rename_free_variable("x", "w"),
        ),
    );
    add(
        "existential-generalization",
        F::implies(
            d1.rename_free_variable("x", "w"),
            F::exists("x", d1.clone()),
        ),
    );
    add(
        "universal-distribution",
        F::implies(
            F::forall("x", F::implies(d1.clone(), d2.clone())),
            F::implies(F::forall("x", d1.clone()), F::forall("x", d2.clone())),
        ),
    );
    add(
        "negated-existential",
        F::implies(
            F::not(F::exists("x", d1.clone())),
            F::forall("x", F::not(d1.clone())),
        ),
    );
    add(
        "negated-universal",
        F::implies(
            F::forall("x", F::not(d1.clone())),
            F::not(F::exists("x", d1.clone())),
        ),
    );
    add(
        "existential-over-or",
        F::iff(
            F::exists("x", F::or(d1.clone(), d2.clone())),
            F::or(F::exists("x", d1.clone()), F::exists("x", d2.clone())),
        ),
    );
    add(
        "equality-reflexive",
        F::forall("x", F::eq(x("x"), x("x"))),
    );
    add(
        "equality-symmetric",
        F::implies(F::eq(x("x"), x("y")), F::eq(x("y"), x("x"))),
    );
    add(
        "equality-transitive",
        F::implies(
            F::and(F::eq(x("x"), x("y")), F::eq(x("y"), x("z"))),
            F::eq(x("x"), x("z")),
        ),
    );
    add(
        "equality-congruence",
        F::implies(
            F::and(F::eq(x("x"), x("y")), d1.clone()),
            d1.rename_free_variable("x", "y"),
        ),
    );
    out
}

/// Runs the schema suite: every schema is instantiated over the structure's
/// domain (exhaustively when the valuation space is small, by a fixed
/// deterministic sample otherwise) and must evaluate to `1`.
pub fn soundness_suite(s: &BValuedStructure) -> SoundnessReport {
    let n = s.domain_size();
    let mut checks = Vec::new();
    for (name, formula) in schemata(s) {
        let vars: Vec<String> = formula.free_variables().into_iter().collect();
        let space: usize = n.checked_pow(vars.len() as u32).unwrap_or(usize::MAX);
        let valuations: Vec<Valuation> = if space <= 128 {
            let mut out = Vec::with_capacity(space);
            let mut counter = vec![0usize; vars.len()];
            loop {
                out.push(Valuation(
                    vars.iter()
                        .zip(&counter)
                        .map(|(v, &i)| (v.clone(), s.element_name(i).to_owned()))
                        .collect(),
                ));
                let mut pos = 0;
                loop {
                    if pos == vars.len() {
                        break;
                    }
                    counter[pos] += 1;
                    if counter[pos] < n {
                        break;
                    }
                    counter[pos] = 0;
                    pos += 1;
                }
                if pos == vars.len() {
                    break;
                }
            }
            out
        } else {
            // Deterministic stride sample over the valuation grid.
            (0..8)
                .map(|j| {
                    Valuation(
                        vars.iter()
                            .enumerate()
                            .map(|(i, v)| {
                                let idx = (j * 7 + i * 3) % n;
                                (v.clone(), s.element_name(idx).to_owned())
                            })
                            .collect(),
                    )
                })
                .collect()
        };

        let mut pass = true;
        let mut witness = None;
        let mut instances = 0;
        for valuation in &valuations {
            instances += 1;
            match eval_boolean(s, &formula, valuation) {
                Ok(value) if value.is_one() => {}
                Ok(value) => {
                    pass = false;
                    witness = Some(format!(
                        "valuation {:?} gives {value} instead of 1",
                        valuation.0
                    ));
                    break;
                }
                Err(err) => {
                    pass = false;
                    witness = Some(format!("evaluation error: {err}"));
                    break;
                }
            }
        }
        checks.push(SchemaCheck {
            name,
            instances,
            pass,
            witness,
        });
    }
    SoundnessReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BooleanAlgebra;
    use crate::bvm::BValuedStructure;
    use crate::logic::Signature;

    #[test]
    fn suite_has_at_least_twenty_schemata() {
        let b = BooleanAlgebra::powerset(["a"]).unwrap();
        let s = BValuedStructure::from_identity_tables(
            b,
            Signature::of(&[("R", 2)], &[]),
            vec!["t".into()],
        )
        .unwrap();
        assert!(schemata(&s).len() >= 20);
    }

    #[test]
    fn suite_passes_on_a_sound_structure() {
        let b = BooleanAlgebra::powerset(["a", "b"]).unwrap();
        let sig = Signature::of(&[("R", 1)], &[]);
        let mut s = BValuedStructure::from_identity_tables(
            b.clone(),
            sig,
            vec!["t".into(), "s".into()],
        )
        .unwrap();
        let a = b.element_from_atom_names(["a"]).unwrap();
        s.set_eq("t", "s", &a).unwrap();
        s.set_eq("s", "t", &a).unwrap();
        // R must respect the glued equality: give R the same value on both.
        s.set_rel("R", &["t"], &a).unwrap();
        s.set_rel("R", &["s"], &a).unwrap();
        let report = soundness_suite(&s);
        assert!(report.passed(), "{:#?}", report.checks);
    }

    /// The atomic clauses of the semantics smear values one equality hop,
    /// so a short equality defect is invisible; a three-hop chain is not.
    #[test]
    fn transitivity_schema_fails_on_a_chained_structure() {
        let b = BooleanAlgebra::powerset(["a", "b"]).unwrap();
        let sig = Signature::of(&[("R", 1)], &[]);
        let mut s = BValuedStructure::from_identity_tables(
            b.clone(),
            sig,
            vec!["t".into(), "s".into(), "u".into(), "v".into()],
        )
        .unwrap();
        let a = b.element_from_atom_names(["a"]).unwrap();
        // t ~ s ~ u ~ v at atom a, without the transitive closures.
        for (l, r) in [("t", "s"), ("s", "u"), ("u", "v")] {
            s.set_eq(l, r, &a).unwrap();
            s.set_eq(r, l, &a).unwrap();
        }
        let report = soundness_suite(&s);
        assert!(!report.passed());
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "equality-transitive" && !c.pass));
    }
}
