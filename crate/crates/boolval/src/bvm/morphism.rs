//! Classification of maps between Boolean-valued structures: morphism,
//! injective morphism, embedding, or isomorphism.
//!
//! A witness is a Boolean-algebra homomorphism (given by its atom images,
//! which must partition the target's unit) together with a relation between
//! the domains. The four clauses are inequalities between transported and
//! native values; each stronger class upgrades some inequalities to
//! equalities, and an isomorphism additionally needs a bijective
//! homomorphism and a surjective relation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::Mask;

use super::BValuedStructure;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MorphismError {
    #[error("atom image list has {found} entries, expected one per atom ({expected})")]
    WrongImageCount { expected: usize, found: usize },
    #[error("atom images do not form a homomorphism: {0}")]
    NotAHomomorphism(String),
    #[error("unknown element `{0}` in the relation")]
    UnknownElement(String),
    #[error("atom image belongs to the wrong algebra")]
    AlgebraMismatch,
    #[error("the two structures have different signatures")]
    SignatureMismatch,
}

/// Candidate morphism data: images of the source atoms in the target
/// algebra, and the relation `Phi` as element-name pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorphismWitness {
    pub atom_images: Vec<Vec<String>>,
    pub pairs: Vec<(String, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MorphismClass {
    NotMorphism,
    Morphism,
    InjectiveMorphism,
    Embedding,
    Isomorphism,
}

#[derive(Clone, Debug, Serialize)]
pub struct MorphismReport {
    pub class: MorphismClass,
    /// What failed at the first class boundary that did not hold.
    pub failures: Vec<String>,
}

struct Transport {
    images: Vec<Mask>,
}

impl Transport {
    fn apply(&self, mask: Mask) -> Mask {
        let mut out = 0;
        for (atom, image) in self.images.iter().enumerate() {
            if mask & (1 << atom) != 0 {
                out |= image;
            }
        }
        out
    }
}

/// Classifies `witness` as a map from `m` to `n`, checking the morphism
/// clauses over all related pairs.
pub fn check_morphism(
    m: &BValuedStructure,
    n: &BValuedStructure,
    witness: &MorphismWitness,
) -> Result<MorphismReport, MorphismError> {
    if m.signature() != n.signature() {
        return Err(MorphismError::SignatureMismatch);
    }
    let source_atoms = m.algebra().atom_count();
    if witness.atom_images.len() != source_atoms {
        return Err(MorphismError::WrongImageCount {
            expected: source_atoms,
            found: witness.atom_images.len(),
        });
    }
    let mut images = Vec::with_capacity(source_atoms);
    for names in &witness.atom_images {
        let e = n
            .algebra()
            .element_from_atom_names(names)
            .map_err(|_| MorphismError::AlgebraMismatch)?;
        images.push(e.mask());
    }
    // A homomorphism of finite powerset algebras is exactly a partition of
    // the target unit indexed by source atoms (empty cells allowed).
    for (i, a) in images.iter().enumerate() {
        for b in &images[i + 1..] {
            if a & b != 0 {
                return Err(MorphismError::NotAHomomorphism(
                    "atom images overlap".into(),
                ));
            }
        }
    }
    let covered: Mask = images.iter().fold(0, |acc, m| acc | m);
    if covered != n.algebra().full_mask() {
        return Err(MorphismError::NotAHomomorphism(
            "atom images do not cover the unit".into(),
        ));
    }
    let transport = Transport { images };

    let pairs: Vec<(usize, usize)> = witness
        .pairs
        .iter()
        .map(|(a, b)| {
            let i = m
                .element_index(a)
                .ok_or_else(|| MorphismError::UnknownElement(a.clone()))?;
            let j = n
                .element_index(b)
                .ok_or_else(|| MorphismError::UnknownElement(b.clone()))?;
            Ok((i, j))
        })
        .collect::<Result<_, MorphismError>>()?;

    let mut failures = Vec::new();

    // Clause 1: dom(Phi) = M.
    for i in 0..m.domain_size() {
        if !pairs.iter().any(|&(a, _)| a == i) {
            failures.push(format!(
                "clause 1: element `{}` is missing from the relation",
                m.element_name(i)
            ));
        }
    }
    if !failures.is_empty() {
        return Ok(MorphismReport {
            class: MorphismClass::NotMorphism,
            failures,
        });
    }

    let mut eq_strict = true; // equality holds in clause 2
    let mut rel_strict = true; // equality holds in clauses 3 and 4

    // Clause 2 over pairs of related pairs.
    for &(t1, s1) in &pairs {
        for &(t2, s2) in &pairs {
            let lhs = transport.apply(m.eq_mask(t1, t2));
            let rhs = n.eq_mask(s1, s2);
            if lhs & !rhs != 0 {
                failures.push(format!(
                    "clause 2: i(⟦{} = {}⟧) exceeds ⟦{} = {}⟧",
                    m.element_name(t1),
                    m.element_name(t2),
                    n.element_name(s1),
                    n.element_name(s2)
                ));
            }
            if lhs != rhs {
                eq_strict = false;
            }
        }
    }

    // Clauses 3 and 4 over tuples of related pairs.
    for (symbol, &arity) in m.signature().relations() {
        for combo in pair_tuples(&pairs, arity) {
            let tau: Vec<usize> = combo.iter().map(|&(a, _)| a).collect();
            let sigma: Vec<usize> = combo.iter().map(|&(_, b)| b).collect();
            let lhs = transport.apply(m.rel_mask(symbol, &tau));
            let rhs = n.rel_mask(symbol, &sigma);
            if lhs & !rhs != 0 {
                failures.push(format!("clause 3: i(⟦{symbol}(τ⃗)⟧) exceeds ⟦{symbol}(σ⃗)⟧"));
            }
            if lhs != rhs {
                rel_strict = false;
            }
        }
    }
    for (symbol, &arity) in m.signature().functions() {
        for combo in pair_tuples(&pairs, arity + 1) {
            let (out, args) = combo.split_last().expect("arity + 1 entries");
            let tau: Vec<usize> = args.iter().map(|&(a, _)| a).collect();
            let sigma: Vec<usize> = args.iter().map(|&(_, b)| b).collect();
            let lhs = transport.apply(m.fun_mask(symbol, &tau, out.0));
            let rhs = n.fun_mask(symbol, &sigma, out.1);
            if lhs & !rhs != 0 {
                failures.push(format!(
                    "clause 4: i(⟦{symbol}(τ⃗) = μ⟧) exceeds ⟦{symbol}(σ⃗) = ν⟧"
                ));
            }
            if lhs != rhs {
                rel_strict = false;
            }
        }
    }

    if !failures.is_empty() {
        return Ok(MorphismReport {
            class: MorphismClass::NotMorphism,
            failures,
        });
    }
    if !eq_strict {
        return Ok(MorphismReport {
            class: MorphismClass::Morphism,
            failures: vec!["clause 2 is an inequality, not an equality".into()],
        });
    }
    if !rel_strict {
        return Ok(MorphismReport {
            class: MorphismClass::InjectiveMorphism,
            failures: vec!["clauses 3/4 are inequalities, not equalities".into()],
        });
    }

    // Isomorphism: bijective homomorphism plus surjective relation.
    let mut failures = Vec::new();
    let bijective = transport.images.iter().all(|im| im.count_ones() == 1)
        && m.algebra().atom_count() == n.algebra().atom_count();
    if !bijective {
        failures.push("the algebra homomorphism is not bijective".into());
    }
    for j in 0..n.domain_size() {
        if !pairs.iter().any(|&(_, b)| b == j) {
            failures.push(format!(
                "element `{}` of the target is not hit by the relation",
                n.element_name(j)
            ));
        }
    }
    if failures.is_empty() {
        Ok(MorphismReport {
            class: MorphismClass::Isomorphism,
            failures,
        })
    } else {
        Ok(MorphismReport {
            class: MorphismClass::Embedding,
            failures,
        })
    }
}

fn pair_tuples(pairs: &[(usize, usize)], arity: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                pairs.iter().map(move |&p| {
                    let mut t = t.clone();
                    t.push(p);
                    t
                })
            })
            .collect();
    }
    out
}

/// The identity witness on a structure.
pub fn identity_witness(s: &BValuedStructure) -> MorphismWitness {
    MorphismWitness {
        atom_images: (0..s.algebra().atom_count())
            .map(|i| vec![s.algebra().atoms()[i].clone()])
            .collect(),
        pairs: s
            .domain()
            .iter()
            .map(|e| (e.clone(), e.clone()))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BooleanAlgebra;
    use crate::logic::Signature;

    fn structure() -> BValuedStructure {
        let b = BooleanAlgebra::powerset(["a", "b"]).unwrap();
        let sig = Signature::of(&[("R", 1)], &[]);
        let mut s = BValuedStructure::from_identity_tables(
            b.clone(),
            sig,
            vec!["t".into(), "s".into()],
        )
        .unwrap();
        s.set_rel("R", &["t"], &b.element_from_atom_names(["a"]).unwrap())
            .unwrap();
        s
    }

    #[test]
    fn identity_is_an_isomorphism() {
        let s = structure();
        let report = check_morphism(&s, &s, &identity_witness(&s)).unwrap();
        assert_eq!(report.class, MorphismClass::Isomorphism);
    }

    #[test]
    fn missing_domain_element_is_not_a_morphism() {
        let s = structure();
        let mut w = identity_witness(&s);
        w.pairs.retain(|(a, _)| a != "s");
        let report = check_morphism(&s, &s, &w).unwrap();
        assert_eq!(report.class, MorphismClass::NotMorphism);
        assert!(report.failures[0].contains("clause 1"));
    }

    #[test]
    fn bad_homomorphism_is_an_error() {
        let s = structure();
        let mut w = identity_witness(&s);
        w.atom_images = vec![vec!["a".into(), "b".into()], vec!["b".into()]];
        assert!(matches!(
            check_morphism(&s, &s, &w).unwrap_err(),
            MorphismError::NotAHomomorphism(_)
        ));
    }

    #[test]
    fn collapsing_map_is_a_morphism_but_not_injective() {
        let b = BooleanAlgebra::powerset(["a", "b"]).unwrap();
        let sig = Signature::empty();
        let mut m = BValuedStructure::from_identity_tables(
            b.clone(),
            sig.clone(),
            vec!["t".into(), "s".into()],
        )
        .unwrap();
        // ⟦t = s⟧ = {a} in the source.
        let a = b.element_from_atom_names(["a"]).unwrap();
        m.set_eq("t", "s", &a).unwrap();
        m.set_eq("s", "t", &a).unwrap();
        // Target identifies t and s completely.
        let mut n = BValuedStructure::from_identity_tables(
            b.clone(),
            sig,
            vec!["u".into()],
        )
        .unwrap();
        let _ = &mut n;
        let w = MorphismWitness {
            atom_images: vec![vec!["a".into()], vec!["b".into()]],
            pairs: vec![("t".into(), "u".into()), ("s".into(), "u".into())],
        };
        let report = check_morphism(&m, &n, &w).unwrap();
        assert_eq!(report.class, MorphismClass::Morphism);
    }
}
