//! Finite-depth Borel codes and their exact pointwise evaluation.
//!
//! A code denotes a subset of `Y^n`. The serialized form keeps the unary
//! ball fragment compact: `{"basic":n}` is the enumerated ball `n` applied
//! to coordinate 0, `{"compl":c}` complements relative to `Y^n`, and
//! `{"union":[...]}` is a finite union. Codes over tuples may additionally
//! tag the coordinate (`{"basic":[i,n]}`), compare coordinates for equality
//! (`{"eq":[i,j]}`), or assert a complex-arithmetic identity
//! (`{"arith":{...}}`) -- the last form is what equality diagonals and
//! function graphs on the complex rationals are made of.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{PolishPresentation, RationalPoint, SpaceError, SpaceMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithOp {
    Add,
    Mul,
}

/// An argument of an arithmetic atom: a tuple coordinate or a constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operand {
    Coord(usize),
    Const(RationalPoint),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BorelCode {
    /// Coordinate `coord` lies in the enumerated ball `ball`.
    Ball { coord: usize, ball: usize },
    /// Coordinates `left` and `right` are the same point.
    EqCoords { left: usize, right: usize },
    /// `lhs op rhs = out` in complex-rational arithmetic.
    Arith {
        op: ArithOp,
        lhs: Operand,
        rhs: Operand,
        out: Operand,
    },
    Compl(Box<BorelCode>),
    Union(Vec<BorelCode>),
}

impl BorelCode {
    pub fn ball(index: usize) -> BorelCode {
        BorelCode::Ball {
            coord: 0,
            ball: index,
        }
    }

    pub fn ball_at(coord: usize, index: usize) -> BorelCode {
        BorelCode::Ball { coord, ball: index }
    }

    pub fn compl(code: BorelCode) -> BorelCode {
        BorelCode::Compl(Box::new(code))
    }

    pub fn union(codes: Vec<BorelCode>) -> BorelCode {
        BorelCode::Union(codes)
    }

    /// Intersection, spelled with complements and a union.
    pub fn intersection(codes: Vec<BorelCode>) -> BorelCode {
        BorelCode::compl(BorelCode::union(
            codes.into_iter().map(BorelCode::compl).collect(),
        ))
    }

    /// `x_i + x_j = x_k`.
    pub fn sum_graph(i: usize, j: usize, k: usize) -> BorelCode {
        BorelCode::Arith {
            op: ArithOp::Add,
            lhs: Operand::Coord(i),
            rhs: Operand::Coord(j),
            out: Operand::Coord(k),
        }
    }

    /// `x_i * x_j = x_k`.
    pub fn product_graph(i: usize, j: usize, k: usize) -> BorelCode {
        BorelCode::Arith {
            op: ArithOp::Mul,
            lhs: Operand::Coord(i),
            rhs: Operand::Coord(j),
            out: Operand::Coord(k),
        }
    }

    /// Graph of multiplicative inverse: `x_0 * x_1 = 1`.
    pub fn inverse_graph() -> BorelCode {
        BorelCode::Arith {
            op: ArithOp::Mul,
            lhs: Operand::Coord(0),
            rhs: Operand::Coord(1),
            out: Operand::Const(RationalPoint::from_integers(&[1])),
        }
    }

    /// Graph of negation: `x_0 + x_1 = 0`.
    pub fn negation_graph() -> BorelCode {
        BorelCode::Arith {
            op: ArithOp::Add,
            lhs: Operand::Coord(0),
            rhs: Operand::Coord(1),
            out: Operand::Const(RationalPoint::origin()),
        }
    }

    /// Number of coordinates the code mentions (at least 1).
    pub fn arity(&self) -> usize {
        fn operand_arity(op: &Operand) -> usize {
            match op {
                Operand::Coord(i) => i + 1,
                Operand::Const(_) => 0,
            }
        }
        match self {
            BorelCode::Ball { coord, .. } => coord + 1,
            BorelCode::EqCoords { left, right } => left.max(right) + 1,
            BorelCode::Arith { lhs, rhs, out, .. } => operand_arity(lhs)
                .max(operand_arity(rhs))
                .max(operand_arity(out))
                .max(1),
            BorelCode::Compl(inner) => inner.arity(),
            BorelCode::Union(codes) => codes.iter().map(BorelCode::arity).max().unwrap_or(1),
        }
        .max(1)
    }

    /// Tree depth: atoms have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            BorelCode::Ball { .. } | BorelCode::EqCoords { .. } | BorelCode::Arith { .. } => 1,
            BorelCode::Compl(inner) => 1 + inner.depth(),
            BorelCode::Union(codes) => 1 + codes.iter().map(BorelCode::depth).max().unwrap_or(0),
        }
    }
}

fn complex_add(a: &RationalPoint, b: &RationalPoint) -> RationalPoint {
    RationalPoint::new(vec![a.coord(0) + b.coord(0), a.coord(1) + b.coord(1)])
}

fn complex_mul(a: &RationalPoint, b: &RationalPoint) -> RationalPoint {
    let (ar, ai) = (a.coord(0), a.coord(1));
    let (br, bi) = (b.coord(0), b.coord(1));
    RationalPoint::new(vec![&ar * &br - &ai * &bi, ar * bi + ai * br])
}

/// Applies a complex-rational operation to two points of the space.
pub fn complex_apply(op: ArithOp, a: &RationalPoint, b: &RationalPoint) -> RationalPoint {
    match op {
        ArithOp::Add => complex_add(a, b),
        ArithOp::Mul => complex_mul(a, b),
    }
}

/// Evaluates `points ∈ code` relative to `space`. Every supplied point must
/// be a member of the space, and every referenced coordinate must be backed
/// by a point.
pub fn eval_borel(
    space: &PolishPresentation,
    code: &BorelCode,
    points: &[RationalPoint],
) -> Result<bool, SpaceError> {
    for p in points {
        if !space.contains(p) {
            return Err(SpaceError::NotInSpace(p.to_string()));
        }
    }
    eval_inner(space, code, points)
}

fn resolve<'a>(
    op: &'a Operand,
    points: &'a [RationalPoint],
) -> Result<&'a RationalPoint, SpaceError> {
    match op {
        Operand::Coord(i) => points.get(*i).ok_or(SpaceError::CoordOutOfRange {
            coord: *i,
            arity: points.len(),
        }),
        Operand::Const(p) => Ok(p),
    }
}

fn eval_inner(
    space: &PolishPresentation,
    code: &BorelCode,
    points: &[RationalPoint],
) -> Result<bool, SpaceError> {
    match code {
        BorelCode::Ball { coord, ball } => {
            let p = points.get(*coord).ok_or(SpaceError::CoordOutOfRange {
                coord: *coord,
                arity: points.len(),
            })?;
            space.ball_contains(*ball, p)
        }
        BorelCode::EqCoords { left, right } => {
            let l = points.get(*left).ok_or(SpaceError::CoordOutOfRange {
                coord: *left,
                arity: points.len(),
            })?;
            let r = points.get(*right).ok_or(SpaceError::CoordOutOfRange {
                coord: *right,
                arity: points.len(),
            })?;
            Ok(l == r)
        }
        BorelCode::Arith { op, lhs, rhs, out } => {
            if !matches!(space.mode(), SpaceMode::ComplexRational) {
                return Err(SpaceError::ArithmeticUnsupported);
            }
            let l = resolve(lhs, points)?;
            let r = resolve(rhs, points)?;
            let o = resolve(out, points)?;
            Ok(&complex_apply(*op, l, r) == o)
        }
        BorelCode::Compl(inner) => Ok(!eval_inner(space, inner, points)?),
        BorelCode::Union(codes) => {
            for c in codes {
                if eval_inner(space, c, points)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// A code for the equality diagonal of `Y²`, chosen per mode: coordinate
/// equality where arithmetic-style atoms are available, and an explicit
/// union of isolating ball products for finite-discrete spaces (staying in
/// the plain ball fragment).
pub fn equality_code(space: &PolishPresentation) -> Result<BorelCode, SpaceError> {
    match space.mode() {
        SpaceMode::FiniteDiscrete { points } => {
            let mut parts = Vec::new();
            for p in points {
                let ball = isolating_ball(space, p)?;
                parts.push(BorelCode::intersection(vec![
                    BorelCode::ball_at(0, ball),
                    BorelCode::ball_at(1, ball),
                ]));
            }
            Ok(BorelCode::union(parts))
        }
        _ => Ok(BorelCode::EqCoords { left: 0, right: 1 }),
    }
}

/// Index of an enumerated ball containing `p` and no other point of a
/// finite-discrete space.
pub fn isolating_ball(
    space: &PolishPresentation,
    p: &RationalPoint,
) -> Result<usize, SpaceError> {
    let points = space
        .finite_points()
        .ok_or(SpaceError::ArithmeticUnsupported)?;
    if !points.contains(p) {
        return Err(SpaceError::NotInSpace(p.to_string()));
    }
    let k = points.len();
    // Ball n mod k is centered at point n mod k with radius 1/(n/k + 1);
    // shrink until the other points fall outside.
    let pos = points.iter().position(|q| q == p).unwrap();
    for round in 0.. {
        let index = round * k + pos;
        let ball = space.ball(index)?;
        if points.iter().all(|q| q == p || !ball.contains(q)) {
            return Ok(index);
        }
    }
    unreachable!("radii shrink to zero");
}

/// A code denoting exactly the given subset of a finite-discrete space.
pub fn subset_code(
    space: &PolishPresentation,
    members: &[RationalPoint],
) -> Result<BorelCode, SpaceError> {
    let mut parts = Vec::new();
    for p in members {
        parts.push(BorelCode::ball(isolating_ball(space, p)?));
    }
    Ok(BorelCode::union(parts))
}

/// A code denoting exactly the given set of tuples over a finite-discrete
/// space.
pub fn tuple_set_code(
    space: &PolishPresentation,
    arity: usize,
    tuples: &[Vec<RationalPoint>],
) -> Result<BorelCode, SpaceError> {
    let mut parts = Vec::new();
    for tuple in tuples {
        assert_eq!(tuple.len(), arity, "tuple arity mismatch");
        let mut coords = Vec::new();
        for (i, p) in tuple.iter().enumerate() {
            coords.push(BorelCode::ball_at(i, isolating_ball(space, p)?));
        }
        parts.push(BorelCode::intersection(coords));
    }
    Ok(BorelCode::union(parts))
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BasicRepr {
    Plain(usize),
    Tagged(usize, usize),
}

#[derive(Serialize, Deserialize)]
struct ArithRepr {
    op: ArithOp,
    lhs: Operand,
    rhs: Operand,
    out: Operand,
}

#[derive(Default, Serialize, Deserialize)]
struct CodeRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    basic: Option<BasicRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eq: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    arith: Option<Box<ArithRepr>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    compl: Option<Box<CodeRepr>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    union: Option<Vec<CodeRepr>>,
}

impl From<&BorelCode> for CodeRepr {
    fn from(code: &BorelCode) -> Self {
        let mut repr = CodeRepr::default();
        match code {
            BorelCode::Ball { coord: 0, ball } => repr.basic = Some(BasicRepr::Plain(*ball)),
            BorelCode::Ball { coord, ball } => {
                repr.basic = Some(BasicRepr::Tagged(*coord, *ball));
            }
            BorelCode::EqCoords { left, right } => repr.eq = Some((*left, *right)),
            BorelCode::Arith { op, lhs, rhs, out } => {
                repr.arith = Some(Box::new(ArithRepr {
                    op: *op,
                    lhs: lhs.clone(),
                    rhs: rhs.clone(),
                    out: out.clone(),
                }));
            }
            BorelCode::Compl(inner) => repr.compl = Some(Box::new(CodeRepr::from(&**inner))),
            BorelCode::Union(codes) => {
                repr.union = Some(codes.iter().map(CodeRepr::from).collect());
            }
        }
        repr
    }
}

impl TryFrom<CodeRepr> for BorelCode {
    type Error = String;
    fn try_from(repr: CodeRepr) -> Result<Self, Self::Error> {
        let set = [
            repr.basic.is_some(),
            repr.eq.is_some(),
            repr.arith.is_some(),
            repr.compl.is_some(),
            repr.union.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if set != 1 {
            return Err("a code node needs exactly one of basic/eq/arith/compl/union".into());
        }
        if let Some(basic) = repr.basic {
            return Ok(match basic {
                BasicRepr::Plain(ball) => BorelCode::ball(ball),
                BasicRepr::Tagged(coord, ball) => BorelCode::ball_at(coord, ball),
            });
        }
        if let Some((left, right)) = repr.eq {
            return Ok(BorelCode::EqCoords { left, right });
        }
        if let Some(arith) = repr.arith {
            return Ok(BorelCode::Arith {
                op: arith.op,
                lhs: arith.lhs,
                rhs: arith.rhs,
                out: arith.out,
            });
        }
        if let Some(compl) = repr.compl {
            return Ok(BorelCode::compl(BorelCode::try_from(*compl)?));
        }
        let union = repr.union.expect("one field is set");
        Ok(BorelCode::union(
            union
                .into_iter()
                .map(BorelCode::try_from)
                .collect::<Result<_, _>>()?,
        ))
    }
}

impl Serialize for BorelCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CodeRepr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BorelCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = CodeRepr::deserialize(deserializer)?;
        BorelCode::try_from(repr).map_err(serde::de::Error::custom)
    }
}
