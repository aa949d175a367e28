//! Finite posets with the down-set topology, the int-closure operator, and
//! regular-open completions.
//!
//! Opens are the downward-closed subsets; the basic open attached to `p` is
//! its cone `↓p`. Regularizing a down-set with `Int Cl` and collecting the
//! fixed points yields a complete Boolean algebra, which for a finite poset
//! is isomorphic to the powerset of the minimal elements.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgElement, AlgebraError, BooleanAlgebra};

/// Subset of poset elements as a bit mask.
pub type ElemSet = u64;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PosetError {
    #[error("poset has no elements")]
    Empty,
    #[error("poset has {0} elements, more than the supported 64")]
    TooLarge(usize),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}` in order pair")]
    UnknownElement(String),
    #[error("order is not antisymmetric: `{0}` and `{1}` are comparable both ways")]
    NotAntisymmetric(String, String),
    #[error("order is not transitive: `{0}` <= `{1}` <= `{2}` but not `{0}` <= `{2}`")]
    NotTransitive(String, String, String),
    #[error("subset is not downward closed: contains `{0}` but not `{1}` below it")]
    NotDownClosed(String, String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// JSON form of a poset: `{"elements":[...],"leq":[[x,y],...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PosetLiteral {
    pub elements: Vec<String>,
    pub leq: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
pub struct FinitePoset {
    elements: Vec<String>,
    // Row-major: leq[i * n + j] holds iff element i <= element j.
    leq: Vec<bool>,
}

impl FinitePoset {
    /// Builds a poset from element names and `<=` pairs. Reflexive pairs may
    /// be omitted; transitivity and antisymmetry are checked.
    pub fn new<S: Into<String>>(
        elements: impl IntoIterator<Item = S>,
        pairs: &[(String, String)],
    ) -> Result<Self, PosetError> {
        let elements: Vec<String> = elements.into_iter().map(Into::into).collect();
        if elements.is_empty() {
            return Err(PosetError::Empty);
        }
        if elements.len() > 64 {
            return Err(PosetError::TooLarge(elements.len()));
        }
        for (i, e) in elements.iter().enumerate() {
            if elements[..i].contains(e) {
                return Err(PosetError::DuplicateElement(e.clone()));
            }
        }
        let n = elements.len();
        let index = |name: &str| {
            elements
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| PosetError::UnknownElement(name.to_owned()))
        };
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for (x, y) in pairs {
            leq[index(x)? * n + index(y)?] = true;
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i * n + j] && leq[j * n + i] {
                    return Err(PosetError::NotAntisymmetric(
                        elements[i].clone(),
                        elements[j].clone(),
                    ));
                }
                for k in 0..n {
                    if leq[i * n + j] && leq[j * n + k] && !leq[i * n + k] {
                        return Err(PosetError::NotTransitive(
                            elements[i].clone(),
                            elements[j].clone(),
                            elements[k].clone(),
                        ));
                    }
                }
            }
        }
        Ok(FinitePoset { elements, leq })
    }

    pub fn from_literal(lit: &PosetLiteral) -> Result<Self, PosetError> {
        Self::new(lit.elements.iter().cloned(), &lit.leq)
    }

    pub fn to_literal(&self) -> PosetLiteral {
        let mut pairs = Vec::new();
        for i in 0..self.len() {
            for j in 0..self.len() {
                if i != j && self.le(i, j) {
                    pairs.push((self.elements[i].clone(), self.elements[j].clone()));
                }
            }
        }
        PosetLiteral {
            elements: self.elements.clone(),
            leq: pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty posets
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    /// `e_i <= e_j`.
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.len() + j]
    }

    /// The cone `↓p` as a set.
    pub fn down_set(&self, p: usize) -> ElemSet {
        let mut set = 0;
        for q in 0..self.len() {
            if self.le(q, p) {
                set |= 1 << q;
            }
        }
        set
    }

    pub fn is_down_closed(&self, set: ElemSet) -> bool {
        self.down_closure_witness(set).is_none()
    }

    fn down_closure_witness(&self, set: ElemSet) -> Option<(usize, usize)> {
        for p in 0..self.len() {
            if set & (1 << p) == 0 {
                continue;
            }
            for q in 0..self.len() {
                if self.le(q, p) && set & (1 << q) == 0 {
                    return Some((p, q));
                }
            }
        }
        None
    }

    pub fn minimal_elements(&self) -> ElemSet {
        let mut set = 0;
        for p in 0..self.len() {
            let minimal = (0..self.len()).all(|q| !self.le(q, p) || q == p);
            if minimal {
                set |= 1 << p;
            }
        }
        set
    }

    /// Minimal elements below `p`.
    pub fn minimal_below(&self, p: usize) -> ElemSet {
        self.minimal_elements() & self.down_set(p)
    }

    /// `Int Cl` in the down-set topology: sends a down-closed `U` to
    /// `{p : every q <= p has some r <= q with r ∈ U}`.
    pub fn int_closure(&self, set: ElemSet) -> Result<ElemSet, PosetError> {
        if let Some((p, q)) = self.down_closure_witness(set) {
            return Err(PosetError::NotDownClosed(
                self.elements[p].clone(),
                self.elements[q].clone(),
            ));
        }
        let mut out = 0;
        'points: for p in 0..self.len() {
            for q in 0..self.len() {
                if !self.le(q, p) {
                    continue;
                }
                let hit = (0..self.len()).any(|r| self.le(r, q) && set & (1 << r) != 0);
                if !hit {
                    continue 'points;
                }
            }
            out |= 1 << p;
        }
        Ok(out)
    }

    /// The regular-open completion: the algebra `RO(P)` presented as the
    /// powerset algebra on the minimal elements of `P`, together with the
    /// dense embedding `p ↦ Int Cl(↓p)`.
    pub fn ro_completion(&self) -> Result<(BooleanAlgebra, Vec<AlgElement>), PosetError> {
        let minimal = self.minimal_elements();
        let min_indices: Vec<usize> = (0..self.len()).filter(|p| minimal & (1 << p) != 0).collect();
        let algebra =
            BooleanAlgebra::powerset(min_indices.iter().map(|&p| self.elements[p].clone()))?;
        let embedding = (0..self.len())
            .map(|p| {
                let below = self.minimal_below(p);
                let mut mask = 0;
                for (bit, &m) in min_indices.iter().enumerate() {
                    if below & (1 << m) != 0 {
                        mask |= 1 << bit;
                    }
                }
                algebra.element_from_mask(mask)
            })
            .collect();
        Ok((algebra, embedding))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain2() -> FinitePoset {
        FinitePoset::new(["c0", "c1"], &[("c0".into(), "c1".into())]).unwrap()
    }

    #[test]
    fn construction_checks_order_axioms() {
        let bad = FinitePoset::new(
            ["a", "b"],
            &[("a".into(), "b".into()), ("b".into(), "a".into())],
        );
        assert!(matches!(bad.unwrap_err(), PosetError::NotAntisymmetric(..)));

        let bad = FinitePoset::new(
            ["a", "b", "c"],
            &[("a".into(), "b".into()), ("b".into(), "c".into())],
        );
        assert!(matches!(bad.unwrap_err(), PosetError::NotTransitive(..)));

        assert!(matches!(
            FinitePoset::new(Vec::<String>::new(), &[]).unwrap_err(),
            PosetError::Empty
        ));
    }

    #[test]
    fn int_closure_trivial_cases() {
        let p = chain2();
        assert_eq!(p.int_closure(0).unwrap(), 0);
        assert_eq!(p.int_closure(0b11).unwrap(), 0b11);
    }

    // Chain c0 < c1 with U = {c0}: every cone meets U, so Int Cl(U) is all of P.
    #[test]
    fn int_closure_fills_chain() {
        let p = chain2();
        assert_eq!(p.int_closure(0b01).unwrap(), 0b11);
    }

    #[test]
    fn int_closure_rejects_non_down_sets() {
        let p = chain2();
        // {c1} is open upward, not downward.
        assert!(matches!(
            p.int_closure(0b10).unwrap_err(),
            PosetError::NotDownClosed(..)
        ));
    }

    #[test]
    fn int_closure_idempotent_and_inflationary() {
        // A "V" poset: r above both a and b, plus an extra isolated point.
        let p = FinitePoset::new(
            ["a", "b", "r", "z"],
            &[("a".into(), "r".into()), ("b".into(), "r".into())],
        )
        .unwrap();
        for set in 0u64..16 {
            if !p.is_down_closed(set) {
                continue;
            }
            let once = p.int_closure(set).unwrap();
            assert_eq!(set & once, set, "inflationary on {set:#b}");
            assert_eq!(p.int_closure(once).unwrap(), once, "idempotent on {set:#b}");
        }
    }

    #[test]
    fn ro_completion_small_cases() {
        // Antichain of two points: four regular-open down-sets.
        let p = FinitePoset::new(["a", "b"], &[]).unwrap();
        let (algebra, embed) = p.ro_completion().unwrap();
        assert_eq!(algebra.element_count(), 4);
        assert_eq!(embed[0], algebra.element_from_atom_names(["a"]).unwrap());

        // Root above two incomparable points: completion is P({a, b}) and the
        // root lands on the top element.
        let p = FinitePoset::new(
            ["a", "b", "r"],
            &[("a".into(), "r".into()), ("b".into(), "r".into())],
        )
        .unwrap();
        let (algebra, embed) = p.ro_completion().unwrap();
        assert_eq!(algebra.atoms(), &["a".to_string(), "b".to_string()]);
        assert!(embed[2].is_one());

        // A single point gives the two-element algebra.
        let p = FinitePoset::new(["p"], &[]).unwrap();
        let (algebra, embed) = p.ro_completion().unwrap();
        assert_eq!(algebra.element_count(), 2);
        assert!(embed[0].is_one());
    }

    /// The embedding is dense: every nonzero element of the completion lies
    /// above the image of some point.
    #[test]
    fn ro_embedding_is_dense() {
        let p = FinitePoset::new(
            ["a", "b", "c", "r", "s"],
            &[
                ("a".into(), "r".into()),
                ("b".into(), "r".into()),
                ("b".into(), "s".into()),
                ("c".into(), "s".into()),
            ],
        )
        .unwrap();
        let (algebra, embed) = p.ro_completion().unwrap();
        for e in algebra.elements() {
            if e.is_zero() {
                continue;
            }
            assert!(
                embed.iter().any(|img| !img.is_zero() && img.leq(&e).unwrap()),
                "no point below {e:?}"
            );
        }
    }
}
