//! Finite complete Boolean algebras presented by their atom sets.
//!
//! Every finite complete Boolean algebra is the powerset of its atoms, so an
//! algebra here is just an ordered list of atom names and an element is a
//! subset of those atoms, stored as a bit mask. The Stone space of such an
//! algebra is finite and discrete: its points are the principal ultrafilters,
//! one per atom.

use std::fmt;
use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Subset of atoms as a bit mask (bit `i` = atom `i` of the owning algebra).
pub type Mask = u64;

/// Default cap on the number of atoms; keeps exhaustive sweeps tractable.
pub const DEFAULT_MAX_ATOMS: usize = 16;

/// Hard cap imposed by the mask representation.
pub const HARD_MAX_ATOMS: usize = 64;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("duplicate atom name `{0}`")]
    DuplicateAtom(String),
    #[error("atom list is empty")]
    EmptyAtomList,
    #[error("atom count {count} exceeds bound {bound}")]
    TooManyAtoms { count: usize, bound: usize },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("operands belong to different algebras")]
    MixedAlgebras,
}

#[derive(Debug)]
struct AlgebraInner {
    atoms: Vec<String>,
}

/// A finite complete Boolean algebra: the powerset algebra on `atoms`.
#[derive(Clone)]
pub struct BooleanAlgebra {
    inner: Arc<AlgebraInner>,
}

impl BooleanAlgebra {
    /// Builds the powerset algebra on the given atoms, with the default
    /// atom-count bound of [`DEFAULT_MAX_ATOMS`].
    pub fn powerset<S: Into<String>>(
        atom_names: impl IntoIterator<Item = S>,
    ) -> Result<Self, AlgebraError> {
        Self::powerset_bounded(atom_names, DEFAULT_MAX_ATOMS)
    }

    /// As [`powerset`](Self::powerset) with an explicit atom-count bound
    /// (at most [`HARD_MAX_ATOMS`]).
    pub fn powerset_bounded<S: Into<String>>(
        atom_names: impl IntoIterator<Item = S>,
        max_atoms: usize,
    ) -> Result<Self, AlgebraError> {
        let atoms: Vec<String> = atom_names.into_iter().map(Into::into).collect();
        if atoms.is_empty() {
            return Err(AlgebraError::EmptyAtomList);
        }
        let bound = max_atoms.min(HARD_MAX_ATOMS);
        if atoms.len() > bound {
            return Err(AlgebraError::TooManyAtoms {
                count: atoms.len(),
                bound,
            });
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].contains(a) {
                return Err(AlgebraError::DuplicateAtom(a.clone()));
            }
        }
        Ok(BooleanAlgebra {
            inner: Arc::new(AlgebraInner { atoms }),
        })
    }

    pub fn atom_count(&self) -> usize {
        self.inner.atoms.len()
    }

    pub fn atoms(&self) -> &[String] {
        &self.inner.atoms
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.inner.atoms.iter().position(|a| a == name)
    }

    /// Number of elements of the algebra (`2^atom_count`).
    pub fn element_count(&self) -> u64 {
        1u64 << self.atom_count()
    }

    pub fn full_mask(&self) -> Mask {
        if self.atom_count() == 64 {
            Mask::MAX
        } else {
            (1u64 << self.atom_count()) - 1
        }
    }

    pub fn bottom(&self) -> AlgElement {
        self.element_from_mask(0)
    }

    pub fn top(&self) -> AlgElement {
        self.element_from_mask(self.full_mask())
    }

    /// The atom at position `idx`, as an element.
    pub fn atom(&self, idx: usize) -> Option<AlgElement> {
        (idx < self.atom_count()).then(|| self.element_from_mask(1 << idx))
    }

    /// Wraps a raw mask as an element; bits beyond the atom count are dropped.
    pub fn element_from_mask(&self, mask: Mask) -> AlgElement {
        AlgElement {
            algebra: self.clone(),
            mask: mask & self.full_mask(),
        }
    }

    pub fn element_from_atom_names<S: AsRef<str>>(
        &self,
        names: impl IntoIterator<Item = S>,
    ) -> Result<AlgElement, AlgebraError> {
        let mut mask = 0;
        for name in names {
            let idx = self
                .atom_index(name.as_ref())
                .ok_or_else(|| AlgebraError::UnknownAtom(name.as_ref().to_owned()))?;
            mask |= 1 << idx;
        }
        Ok(self.element_from_mask(mask))
    }

    /// All elements, in mask order (so `0_B` first and `1_B` last).
    pub fn elements(&self) -> impl Iterator<Item = AlgElement> + '_ {
        (0..=self.full_mask()).map(move |m| self.element_from_mask(m))
    }

    fn check_owns(&self, e: &AlgElement) -> Result<(), AlgebraError> {
        if *self == e.algebra {
            Ok(())
        } else {
            Err(AlgebraError::MixedAlgebras)
        }
    }

    /// Supremum of a finite family; `sup(∅) = 0_B`.
    pub fn sup<'a>(
        &self,
        family: impl IntoIterator<Item = &'a AlgElement>,
    ) -> Result<AlgElement, AlgebraError> {
        let mut mask = 0;
        for e in family {
            self.check_owns(e)?;
            mask |= e.mask;
        }
        Ok(self.element_from_mask(mask))
    }

    /// Infimum of a finite family; `inf(∅) = 1_B`.
    pub fn inf<'a>(
        &self,
        family: impl IntoIterator<Item = &'a AlgElement>,
    ) -> Result<AlgElement, AlgebraError> {
        let mut mask = self.full_mask();
        for e in family {
            self.check_owns(e)?;
            mask &= e.mask;
        }
        Ok(self.element_from_mask(mask))
    }

    /// A family is an antichain when all pairwise meets are `0_B`.
    pub fn is_antichain(&self, family: &[AlgElement]) -> Result<bool, AlgebraError> {
        for e in family {
            self.check_owns(e)?;
        }
        for (i, x) in family.iter().enumerate() {
            for y in &family[i + 1..] {
                if x.mask & y.mask != 0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// A family is predense when its supremum is `1_B`.
    pub fn is_predense(&self, family: &[AlgElement]) -> Result<bool, AlgebraError> {
        Ok(self.sup(family)?.is_one())
    }

    /// Enumerates the Stone space: one principal ultrafilter per atom.
    pub fn ultrafilters(&self) -> Vec<Ultrafilter> {
        (0..self.atom_count())
            .map(|atom| Ultrafilter {
                algebra: self.clone(),
                atom,
            })
            .collect()
    }
}

impl PartialEq for BooleanAlgebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.atoms == other.inner.atoms
    }
}

impl Eq for BooleanAlgebra {}

impl std::hash::Hash for BooleanAlgebra {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.inner.atoms.hash(state);
    }
}

impl fmt::Debug for BooleanAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanAlgebra({:?})", self.inner.atoms)
    }
}

impl Serialize for BooleanAlgebra {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            atoms: &'a [String],
        }
        Repr {
            atoms: &self.inner.atoms,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BooleanAlgebra {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            atoms: Vec<String>,
        }
        let repr = Repr::deserialize(deserializer)?;
        BooleanAlgebra::powerset(repr.atoms).map_err(D::Error::custom)
    }
}

/// An element of a [`BooleanAlgebra`]: a subset of its atoms.
#[derive(Clone)]
pub struct AlgElement {
    algebra: BooleanAlgebra,
    mask: Mask,
}

impl AlgElement {
    pub fn algebra(&self) -> &BooleanAlgebra {
        &self.algebra
    }

    pub fn mask(&self) -> Mask {
        self.mask
    }

    pub fn is_zero(&self) -> bool {
        self.mask == 0
    }

    pub fn is_one(&self) -> bool {
        self.mask == self.algebra.full_mask()
    }

    pub fn contains_atom(&self, idx: usize) -> bool {
        idx < self.algebra.atom_count() && self.mask & (1 << idx) != 0
    }

    pub fn atom_names_owned(&self) -> Vec<String> {
        self.atom_names().into_iter().map(str::to_owned).collect()
    }

    /// Names of the atoms in this element, in algebra order.
    pub fn atom_names(&self) -> Vec<&str> {
        self.algebra
            .atoms()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.mask & (1 << i) != 0)
            .map(|(_, a)| a.as_str())
            .collect()
    }

    fn zip(&self, other: &AlgElement) -> Result<(Mask, Mask), AlgebraError> {
        self.algebra.check_owns(other)?;
        Ok((self.mask, other.mask))
    }

    pub fn join(&self, other: &AlgElement) -> Result<AlgElement, AlgebraError> {
        let (a, b) = self.zip(other)?;
        Ok(self.algebra.element_from_mask(a | b))
    }

    pub fn meet(&self, other: &AlgElement) -> Result<AlgElement, AlgebraError> {
        let (a, b) = self.zip(other)?;
        Ok(self.algebra.element_from_mask(a & b))
    }

    /// Relative complement `self ∧ ¬other`.
    pub fn minus(&self, other: &AlgElement) -> Result<AlgElement, AlgebraError> {
        let (a, b) = self.zip(other)?;
        Ok(self.algebra.element_from_mask(a & !b))
    }

    pub fn complement(&self) -> AlgElement {
        self.algebra.element_from_mask(!self.mask)
    }

    pub fn leq(&self, other: &AlgElement) -> Result<bool, AlgebraError> {
        let (a, b) = self.zip(other)?;
        Ok(a & !b == 0)
    }
}

impl PartialEq for AlgElement {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra && self.mask == other.mask
    }
}

impl Eq for AlgElement {}

impl std::hash::Hash for AlgElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.algebra.hash(state);
        self.mask.hash(state);
    }
}

impl fmt::Debug for AlgElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.atom_names().join(", "))
    }
}

impl fmt::Display for AlgElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else if self.is_one() {
            write!(f, "1")
        } else {
            write!(f, "{{{}}}", self.atom_names().join(","))
        }
    }
}

impl Serialize for AlgElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.atom_names().serialize(serializer)
    }
}

/// A point of the Stone space `St(B)`. For a finite algebra every ultrafilter
/// is principal, generated by a single atom, and meets every predense family.
#[derive(Clone, PartialEq, Eq)]
pub struct Ultrafilter {
    algebra: BooleanAlgebra,
    atom: usize,
}

impl Ultrafilter {
    pub fn at_atom(algebra: &BooleanAlgebra, atom: usize) -> Option<Ultrafilter> {
        (atom < algebra.atom_count()).then(|| Ultrafilter {
            algebra: algebra.clone(),
            atom,
        })
    }

    pub fn at_atom_name(algebra: &BooleanAlgebra, name: &str) -> Option<Ultrafilter> {
        algebra
            .atom_index(name)
            .and_then(|i| Self::at_atom(algebra, i))
    }

    pub fn algebra(&self) -> &BooleanAlgebra {
        &self.algebra
    }

    pub fn atom_index(&self) -> usize {
        self.atom
    }

    pub fn atom_name(&self) -> &str {
        &self.algebra.atoms()[self.atom]
    }

    /// The generating atom as an element.
    pub fn principal_element(&self) -> AlgElement {
        self.algebra.element_from_mask(1 << self.atom)
    }

    /// Membership `e ∈ G`: holds exactly when the principal atom lies in `e`.
    pub fn contains(&self, e: &AlgElement) -> Result<bool, AlgebraError> {
        self.algebra.check_owns(e)?;
        Ok(e.mask & (1 << self.atom) != 0)
    }
}

impl fmt::Debug for Ultrafilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G@{}", self.atom_name())
    }
}
