//! Desk-scale presentations of Polish spaces.
//!
//! Points are tuples of exact rationals with finitely many nonzero
//! coordinates. Each space mode fixes a decidable membership predicate and a
//! deterministic enumeration of a rational-ball basis, so ball indices are
//! stable across runs. All comparisons are exact: membership in a ball is a
//! strict comparison of squared distance against squared radius.

mod borel;

pub use borel::{
    complex_apply, equality_code, eval_borel, isolating_ball, subset_code, tuple_set_code,
    ArithOp, BorelCode, Operand,
};

use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest ball index the enumerations will materialize.
pub const MAX_BALL_INDEX: usize = 1 << 20;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SpaceError {
    #[error("cannot parse `{0}` as a rational (expected `p` or `p/q`)")]
    BadRational(String),
    #[error("rational denominator is zero in `{0}`")]
    ZeroDenominator(String),
    #[error("point {0} is not a member of the space")]
    NotInSpace(String),
    #[error("ball index {0} exceeds the enumeration bound {MAX_BALL_INDEX}")]
    BallIndexOutOfRange(usize),
    #[error("code references coordinate {coord} but only {arity} points were supplied")]
    CoordOutOfRange { coord: usize, arity: usize },
    #[error("arithmetic atoms require the complex-rational mode")]
    ArithmeticUnsupported,
    #[error("finite-discrete space needs at least one point")]
    EmptyFiniteSpace,
    #[error("the point at infinity is not a member of any space")]
    InfinityValue,
}

pub fn parse_rational(text: &str) -> Result<BigRational, SpaceError> {
    let bad = || SpaceError::BadRational(text.to_owned());
    match text.split_once('/') {
        Some((num, den)) => {
            let n: BigInt = num.trim().parse().map_err(|_| bad())?;
            let d: BigInt = den.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(SpaceError::ZeroDenominator(text.to_owned()));
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = text.trim().parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A point with rational coordinates, nonzero on finitely many of them.
/// Trailing zero coordinates are trimmed, so `(1/2, 0)` and `(1/2)` denote
/// the same point.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalPoint {
    coords: Vec<BigRational>,
}

impl RationalPoint {
    pub fn new(mut coords: Vec<BigRational>) -> Self {
        while coords.last().is_some_and(Zero::is_zero) {
            coords.pop();
        }
        RationalPoint { coords }
    }

    pub fn origin() -> Self {
        RationalPoint { coords: Vec::new() }
    }

    pub fn from_integers(coords: &[i64]) -> Self {
        Self::new(
            coords
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    /// Parses coordinates given as `p/q` strings.
    pub fn parse(coords: &[&str]) -> Result<Self, SpaceError> {
        Ok(Self::new(
            coords
                .iter()
                .map(|c| parse_rational(c))
                .collect::<Result<_, _>>()?,
        ))
    }

    /// Number of stored coordinates (position of the last nonzero one).
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Coordinate `i`, with zeros beyond the stored prefix.
    pub fn coord(&self, i: usize) -> BigRational {
        self.coords.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn squared_distance(&self, other: &RationalPoint) -> BigRational {
        let dim = self.dim().max(other.dim());
        let mut sum = BigRational::zero();
        for i in 0..dim {
            let d = self.coord(i) - other.coord(i);
            sum += &d * &d;
        }
        sum
    }
}

impl fmt::Debug for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rational(c))?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for RationalPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.coords
            .iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(deserializer)?;
        let coords = raw
            .iter()
            .map(|c| parse_rational(c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Ok(RationalPoint::new(coords))
    }
}

/// A point of the compactified space: either a genuine point of `Y` or the
/// distinguished marker at infinity. The marker is never a [`RationalPoint`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtendedPoint {
    Point(RationalPoint),
    Infinity,
}

impl Serialize for ExtendedPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedPoint::Point(p) => p.serialize(serializer),
            ExtendedPoint::Infinity => "inf".serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Marker(String),
            Point(RationalPoint),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Point(p) => Ok(ExtendedPoint::Point(p)),
            Repr::Marker(s) if s == "inf" => Ok(ExtendedPoint::Infinity),
            Repr::Marker(s) => Err(serde::de::Error::custom(format!(
                "expected a coordinate array or \"inf\", found `{s}`"
            ))),
        }
    }
}

/// An open metric ball from the fixed basis enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisBall {
    pub index: usize,
    pub center: RationalPoint,
    #[serde(serialize_with = "serialize_rational")]
    pub radius: BigRational,
}

fn serialize_rational<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    format_rational(r).serialize(s)
}

impl BasisBall {
    /// Strict membership: squared distance < squared radius.
    pub fn contains(&self, p: &RationalPoint) -> bool {
        p.squared_distance(&self.center) < &self.radius * &self.radius
    }

    /// Membership in the closed ball: squared distance <= squared radius.
    pub fn closed_contains(&self, p: &RationalPoint) -> bool {
        p.squared_distance(&self.center) <= &self.radius * &self.radius
    }

    /// Whether the closure of `self` is contained in the open ball `other`,
    /// decided as `dist(centers) + r_self < r_other` in rational arithmetic.
    pub fn closure_subset_of(&self, other: &BasisBall) -> bool {
        let gap = &other.radius - &self.radius;
        if !gap.is_positive() {
            return false;
        }
        self.center.squared_distance(&other.center) < &gap * &gap
    }

    /// Whether the closures of the two balls are disjoint, decided as
    /// `dist(centers) > r_self + r_other`.
    pub fn closure_disjoint(&self, other: &BasisBall) -> bool {
        let sum = &self.radius + &other.radius;
        self.center.squared_distance(&other.center) > &sum * &sum
    }
}

/// The supported space modes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SpaceMode {
    /// A finite list of rational points with the discrete topology.
    FiniteDiscrete { points: Vec<RationalPoint> },
    /// The natural numbers `0, 1, 2, ...` as a discrete subspace of the line.
    NaturalsDiscrete,
    /// The complex rationals: pairs of rationals with complex arithmetic.
    ComplexRational,
    /// The rational points of `[0,1]^dim`, a fragment of the Hilbert cube.
    HilbertFragment { dim: usize },
}

/// A Polish space presentation: a membership predicate plus a fixed,
/// documented enumeration of basis balls.
///
/// Ball enumerations, by mode (radii are `1/m` for `m = 1, 2, ...`):
///
/// - complex-rational: for each `m`, balls of radius `1/m` centered at
///   `(p/m, q/m)` with `|p|, |q| <= m²`, ordered by `(|p|+|q|, p, q)`;
/// - naturals-discrete: for each `m`, centers `0, 1, ..., m²`;
/// - hilbert-fragment(d): for each `m`, centers `(p_1/m, ..., p_d/m)` with
///   `0 <= p_i <= m`, ordered by `(Σ p_i, lexicographic)`;
/// - finite-discrete: ball `n` is centered at point `n mod k` with radius
///   `1/(n div k + 1)`, where `k` is the number of points.
///
/// Enumerations are prefix-stable: `basis_enumerate(k)` is a prefix of
/// `basis_enumerate(k + 1)`.
#[derive(Debug)]
pub struct PolishPresentation {
    mode: SpaceMode,
    cache: Mutex<Vec<BasisBall>>,
}

impl Clone for PolishPresentation {
    fn clone(&self) -> Self {
        PolishPresentation {
            mode: self.mode.clone(),
            cache: Mutex::new(self.cache.lock().unwrap().clone()),
        }
    }
}

impl PartialEq for PolishPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode
    }
}

impl Eq for PolishPresentation {}

impl Serialize for PolishPresentation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.mode.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolishPresentation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let mode = SpaceMode::deserialize(deserializer)?;
        PolishPresentation::new(mode).map_err(serde::de::Error::custom)
    }
}

impl PolishPresentation {
    pub fn new(mode: SpaceMode) -> Result<Self, SpaceError> {
        if let SpaceMode::FiniteDiscrete { points } = &mode {
            if points.is_empty() {
                return Err(SpaceError::EmptyFiniteSpace);
            }
        }
        Ok(PolishPresentation {
            mode,
            cache: Mutex::new(Vec::new()),
        })
    }

    pub fn finite_discrete(points: Vec<RationalPoint>) -> Result<Self, SpaceError> {
        Self::new(SpaceMode::FiniteDiscrete { points })
    }

    pub fn naturals() -> Self {
        Self::new(SpaceMode::NaturalsDiscrete).expect("mode needs no validation")
    }

    pub fn complex_rational() -> Self {
        Self::new(SpaceMode::ComplexRational).expect("mode needs no validation")
    }

    pub fn hilbert_fragment(dim: usize) -> Self {
        Self::new(SpaceMode::HilbertFragment { dim }).expect("mode needs no validation")
    }

    pub fn mode(&self) -> &SpaceMode {
        &self.mode
    }

    pub fn is_finite_discrete(&self) -> bool {
        matches!(self.mode, SpaceMode::FiniteDiscrete { .. })
    }

    /// The points of a finite-discrete space; `None` for the other modes.
    pub fn finite_points(&self) -> Option<&[RationalPoint]> {
        match &self.mode {
            SpaceMode::FiniteDiscrete { points } => Some(points),
            _ => None,
        }
    }

    /// Exact membership test for rational points.
    pub fn contains(&self, p: &RationalPoint) -> bool {
        match &self.mode {
            SpaceMode::FiniteDiscrete { points } => points.contains(p),
            SpaceMode::NaturalsDiscrete => {
                p.dim() <= 1 && p.coord(0).denom().is_one() && !p.coord(0).is_negative()
            }
            SpaceMode::ComplexRational => p.dim() <= 2,
            SpaceMode::HilbertFragment { dim } => {
                p.dim() <= *dim
                    && p.coords()
                        .iter()
                        .all(|c| !c.is_negative() && *c <= BigRational::one())
            }
        }
    }

    pub fn contains_extended(&self, p: &ExtendedPoint) -> bool {
        match p {
            ExtendedPoint::Point(p) => self.contains(p),
            ExtendedPoint::Infinity => false,
        }
    }

    /// A designated member used as the mixing default: the origin for the
    /// coordinate modes, the first listed point for finite-discrete spaces.
    pub fn default_point(&self) -> RationalPoint {
        match &self.mode {
            SpaceMode::FiniteDiscrete { points } => points[0].clone(),
            _ => RationalPoint::origin(),
        }
    }

    fn level_balls(&self, level: usize) -> Vec<(RationalPoint, BigRational)> {
        let m = level as i64;
        let radius = BigRational::new(BigInt::one(), m.into());
        let rat = |num: i64, den: i64| BigRational::new(num.into(), den.into());
        match &self.mode {
            SpaceMode::FiniteDiscrete { points } => points
                .iter()
                .map(|p| (p.clone(), radius.clone()))
                .collect(),
            SpaceMode::NaturalsDiscrete => (0..=m * m)
                .map(|c| (RationalPoint::new(vec![rat(c, 1)]), radius.clone()))
                .collect(),
            SpaceMode::ComplexRational => {
                let w = m * m;
                let mut centers: Vec<(i64, i64)> = ((-w)..=w)
                    .flat_map(|p| ((-w)..=w).map(move |q| (p, q)))
                    .collect();
                centers.sort_by_key(|&(p, q)| (p.abs() + q.abs(), p, q));
                centers
                    .into_iter()
                    .map(|(p, q)| {
                        (
                            RationalPoint::new(vec![rat(p, m), rat(q, m)]),
                            radius.clone(),
                        )
                    })
                    .collect()
            }
            SpaceMode::HilbertFragment { dim } => {
                let mut centers: Vec<Vec<i64>> = vec![vec![]];
                for _ in 0..*dim {
                    centers = centers
                        .into_iter()
                        .flat_map(|c| {
                            (0..=m).map(move |p| {
                                let mut c = c.clone();
                                c.push(p);
                                c
                            })
                        })
                        .collect();
                }
                centers.sort_by_key(|c| (c.iter().sum::<i64>(), c.clone()));
                centers
                    .into_iter()
                    .map(|c| {
                        (
                            RationalPoint::new(c.into_iter().map(|p| rat(p, m)).collect()),
                            radius.clone(),
                        )
                    })
                    .collect()
            }
        }
    }

    fn ensure_cached(&self, upto: usize) -> Result<(), SpaceError> {
        if upto > MAX_BALL_INDEX {
            return Err(SpaceError::BallIndexOutOfRange(upto));
        }
        let mut cache = self.cache.lock().unwrap();
        let mut level = 0;
        let mut produced = cache.len();
        // Levels already emitted are recomputed from the count; each level's
        // size depends only on the mode.
        while produced > 0 {
            level += 1;
            produced -= self.level_size(level).min(produced);
        }
        while cache.len() < upto {
            level += 1;
            for (center, radius) in self.level_balls(level) {
                let index = cache.len();
                cache.push(BasisBall {
                    index,
                    center,
                    radius,
                });
            }
        }
        Ok(())
    }

    fn level_size(&self, level: usize) -> usize {
        let m = level;
        match &self.mode {
            SpaceMode::FiniteDiscrete { points } => points.len(),
            SpaceMode::NaturalsDiscrete => m * m + 1,
            SpaceMode::ComplexRational => (2 * m * m + 1) * (2 * m * m + 1),
            SpaceMode::HilbertFragment { dim } => (m + 1).pow(*dim as u32),
        }
    }

    /// The ball at `index` in the fixed enumeration.
    pub fn ball(&self, index: usize) -> Result<BasisBall, SpaceError> {
        if index >= MAX_BALL_INDEX {
            return Err(SpaceError::BallIndexOutOfRange(index));
        }
        self.ensure_cached(index + 1)?;
        Ok(self.cache.lock().unwrap()[index].clone())
    }

    /// Strict membership in the enumerated ball without cloning it.
    pub fn ball_contains(&self, index: usize, p: &RationalPoint) -> Result<bool, SpaceError> {
        if index >= MAX_BALL_INDEX {
            return Err(SpaceError::BallIndexOutOfRange(index));
        }
        self.ensure_cached(index + 1)?;
        Ok(self.cache.lock().unwrap()[index].contains(p))
    }

    /// The first `k` balls of the enumeration.
    pub fn basis_enumerate(&self, k: usize) -> Result<Vec<BasisBall>, SpaceError> {
        self.ensure_cached(k)?;
        Ok(self.cache.lock().unwrap()[..k].to_vec())
    }

    /// Strict membership of `p` in the enumerated ball `b`, after checking
    /// that `p` is a point of the space.
    pub fn ball_membership(&self, p: &RationalPoint, b: &BasisBall) -> Result<bool, SpaceError> {
        if !self.contains(p) {
            return Err(SpaceError::NotInSpace(p.to_string()));
        }
        Ok(b.contains(p))
    }

    /// Index of the first ball containing exactly one of two distinct
    /// points, searched below `bound`.
    pub fn separating_index(
        &self,
        p: &RationalPoint,
        q: &RationalPoint,
        bound: usize,
    ) -> Result<Option<usize>, SpaceError> {
        for ball in self.basis_enumerate(bound)? {
            if ball.contains(p) != ball.contains(q) {
                return Ok(Some(ball.index));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/4").unwrap(), BigRational::new(3.into(), 4.into()));
        assert_eq!(parse_rational("-2").unwrap(), BigRational::from_integer((-2).into()));
        assert_eq!(format_rational(&parse_rational("6/8").unwrap()), "3/4");
        assert!(matches!(
            parse_rational("1/0").unwrap_err(),
            SpaceError::ZeroDenominator(_)
        ));
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn points_normalize_trailing_zeros() {
        let p = RationalPoint::parse(&["1/2", "0"]).unwrap();
        let q = RationalPoint::parse(&["1/2"]).unwrap();
        assert_eq!(p, q);
        assert_eq!(p.dim(), 1);
        assert_eq!(p.coord(5), BigRational::zero());
    }

    #[test]
    fn ball_membership_is_strict() {
        let space = PolishPresentation::complex_rational();
        let unit = BasisBall {
            index: 0,
            center: RationalPoint::origin(),
            radius: BigRational::one(),
        };
        let origin = RationalPoint::origin();
        let boundary = RationalPoint::from_integers(&[1, 0]);
        assert!(space.ball_membership(&origin, &unit).unwrap());
        assert!(!space.ball_membership(&boundary, &unit).unwrap());

        // (1/2, 1/2) against radius 3/4: 1/2 < 9/16, so inside.
        let p = RationalPoint::parse(&["1/2", "1/2"]).unwrap();
        let b = BasisBall {
            index: 0,
            center: RationalPoint::origin(),
            radius: parse_rational("3/4").unwrap(),
        };
        assert!(space.ball_membership(&p, &b).unwrap());
    }

    #[test]
    fn complex_enumeration_starts_at_unit_ball() {
        let space = PolishPresentation::complex_rational();
        let b0 = space.ball(0).unwrap();
        assert_eq!(b0.center, RationalPoint::origin());
        assert_eq!(b0.radius, BigRational::one());
        assert!(space.basis_enumerate(0).unwrap().is_empty());
    }

    #[test]
    fn enumeration_is_prefix_stable() {
        let space = PolishPresentation::complex_rational();
        let k10 = space.basis_enumerate(10).unwrap();
        let k25 = space.basis_enumerate(25).unwrap();
        assert_eq!(&k25[..10], &k10[..]);
        for (i, b) in k25.iter().enumerate() {
            assert_eq!(b.index, i);
        }
    }

    #[test]
    fn finite_discrete_enumeration_cycles_points() {
        let pts = vec![
            RationalPoint::from_integers(&[0]),
            RationalPoint::from_integers(&[1]),
        ];
        let space = PolishPresentation::finite_discrete(pts.clone()).unwrap();
        let balls = space.basis_enumerate(4).unwrap();
        assert_eq!(balls[0].center, pts[0]);
        assert_eq!(balls[1].center, pts[1]);
        assert_eq!(balls[2].center, pts[0]);
        assert_eq!(balls[2].radius, parse_rational("1/2").unwrap());
    }

    #[test]
    fn membership_per_mode() {
        let nat = PolishPresentation::naturals();
        assert!(nat.contains(&RationalPoint::from_integers(&[3])));
        assert!(!nat.contains(&RationalPoint::parse(&["1/2"]).unwrap()));
        assert!(!nat.contains(&RationalPoint::from_integers(&[-1])));

        let cube = PolishPresentation::hilbert_fragment(2);
        assert!(cube.contains(&RationalPoint::parse(&["1/2", "1"]).unwrap()));
        assert!(!cube.contains(&RationalPoint::from_integers(&[2])));
        assert!(!cube.contains(&RationalPoint::from_integers(&[0, 0, 1])));

        let c = PolishPresentation::complex_rational();
        assert!(c.contains(&RationalPoint::parse(&["-7/2", "22"]).unwrap()));
        assert!(!c.contains(&RationalPoint::from_integers(&[1, 1, 1])));
    }

    /// Distinct points are separated by an enumerated ball within a
    /// documented bound (here: denominators up to 2, coordinates up to 2, so
    /// level 4 of the complex enumeration is enough).
    #[test]
    fn separation_within_bound() {
        let space = PolishPresentation::complex_rational();
        let pts = [
            RationalPoint::origin(),
            RationalPoint::parse(&["1/2", "0"]).unwrap(),
            RationalPoint::parse(&["-1/2", "3/2"]).unwrap(),
            RationalPoint::from_integers(&[2, -2]),
        ];
        let bound = 2000;
        for p in &pts {
            for q in &pts {
                if p != q {
                    assert!(space.separating_index(p, q, bound).unwrap().is_some());
                }
            }
        }
    }

    #[test]
    fn closure_inclusion_and_disjointness() {
        let small = BasisBall {
            index: 0,
            center: RationalPoint::origin(),
            radius: parse_rational("1/4").unwrap(),
        };
        let big = BasisBall {
            index: 1,
            center: RationalPoint::origin(),
            radius: BigRational::one(),
        };
        let far = BasisBall {
            index: 2,
            center: RationalPoint::from_integers(&[10]),
            radius: BigRational::one(),
        };
        assert!(small.closure_subset_of(&big));
        assert!(!big.closure_subset_of(&small));
        // Equal radii never nest: the boundary would touch.
        assert!(!big.closure_subset_of(&big));
        assert!(small.closure_disjoint(&far));
        assert!(!small.closure_disjoint(&big));
    }

    #[test]
    fn space_json_round_trip() {
        let space = PolishPresentation::complex_rational();
        let json = serde_json::to_string(&space).unwrap();
        assert_eq!(json, r#"{"mode":"complex-rational"}"#);
        let back: PolishPresentation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, space);

        let fd: PolishPresentation =
            serde_json::from_str(r#"{"mode":"finite-discrete","points":[["0"],["1","1/2"]]}"#)
                .unwrap();
        assert_eq!(fd.finite_points().unwrap().len(), 2);
    }
}
