//! Completion of a countable metric space, copresented over formal balls
//! `B(a, r)` with `a` a point and `r` a positive rational.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::index::{BasicOpen, Index};
use crate::rational::{fmt_q, positive_at, qi, two_pow_neg, unpair, Q};

use super::{Copresentation, IndexDomain, IndexEnum, OpenCode, OpenFamily, Relation, RelationFamily};

/// A countable metric space with an exact rational metric.
pub trait MetricSpace: Send + Sync + fmt::Debug {
    /// Number of points; `None` when countably infinite.
    fn size(&self) -> Option<u32>;
    fn dist(&self, a: u32, b: u32) -> Q;
    /// Position on the real line, for subsets of `ℚ` with `|x - y|`.
    fn coordinate(&self, a: u32) -> Option<Q> {
        let _ = a;
        None
    }
    fn spec(&self) -> Value;
}

/// Finitely many rationals with the usual distance.
#[derive(Clone, Debug)]
pub struct LinePoints(pub Vec<Q>);

impl MetricSpace for LinePoints {
    fn size(&self) -> Option<u32> {
        Some(self.0.len() as u32)
    }

    fn dist(&self, a: u32, b: u32) -> Q {
        (&self.0[a as usize] - &self.0[b as usize]).abs()
    }

    fn coordinate(&self, a: u32) -> Option<Q> {
        self.0.get(a as usize).cloned()
    }

    fn spec(&self) -> Value {
        json!({"kind": "line_points", "points": self.0.iter().map(fmt_q).collect::<Vec<_>>()})
    }
}

/// Dyadic rationals in `[0, 1]`, ordered `0, 1, 1/2, 1/4, 3/4, 1/8, …`,
/// optionally capped at denominator `2^max_exp`.
#[derive(Clone, Copy, Debug)]
pub struct DyadicGrid {
    pub max_exp: Option<u32>,
}

/// The `n`-th dyadic rational of [`DyadicGrid`].
pub fn dyadic_at(n: u32) -> Q {
    match n {
        0 => qi(0),
        1 => qi(1),
        _ => {
            let m = n - 1;
            let e = 31 - m.leading_zeros();
            let k = m - (1 << e);
            Q::new((2 * k + 1).into(), (1u64 << (e + 1)).into())
        }
    }
}

/// Position of a dyadic rational in `[0, 1]`.
pub fn dyadic_position(x: &Q) -> Option<u32> {
    use num_traits::{One, ToPrimitive};
    if x.is_zero() {
        return Some(0);
    }
    if x.is_one() {
        return Some(1);
    }
    if x.is_negative() || x > &Q::one() {
        return None;
    }
    let d = x.denom().to_u64()?;
    if !d.is_power_of_two() {
        return None;
    }
    let e = d.trailing_zeros();
    let k = (x.numer().to_u64()? - 1) / 2;
    Some(1 + (1u32 << (e - 1)) + k as u32)
}

impl MetricSpace for DyadicGrid {
    fn size(&self) -> Option<u32> {
        self.max_exp.map(|e| (1 << e) + 1)
    }

    fn dist(&self, a: u32, b: u32) -> Q {
        (dyadic_at(a) - dyadic_at(b)).abs()
    }

    fn coordinate(&self, a: u32) -> Option<Q> {
        Some(dyadic_at(a))
    }

    fn spec(&self) -> Value {
        json!({"kind": "dyadic_grid", "max_exp": self.max_exp})
    }
}

type DistFn = dyn Fn(u32, u32) -> Q + Send + Sync;

/// A metric given by a closure.
#[derive(Clone)]
pub struct OracleMetric {
    pub size: Option<u32>,
    pub dist: Arc<DistFn>,
    pub name: String,
}

impl fmt::Debug for OracleMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OracleMetric({})", self.name)
    }
}

impl MetricSpace for OracleMetric {
    fn size(&self) -> Option<u32> {
        self.size
    }

    fn dist(&self, a: u32, b: u32) -> Q {
        (self.dist)(a, b)
    }

    fn spec(&self) -> Value {
        json!({"kind": "oracle", "name": self.name, "size": self.size})
    }
}

/// A formal ball.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ball {
    pub center: u32,
    pub radius: Q,
}

impl Ball {
    pub fn index(&self) -> Index {
        Index::Ball { center: self.center, radius: self.radius.clone() }
    }

    pub fn read(i: &Index) -> Option<Ball> {
        match i {
            Index::Ball { center, radius } => Some(Ball { center: *center, radius: radius.clone() }),
            _ => None,
        }
    }
}

/// `self ⊑ outer`: `d(a, b) + s ≤ r`; strict with `<`.
pub fn formally_inside(m: &dyn MetricSpace, inner: &Ball, outer: &Ball, strict: bool) -> bool {
    let lhs = m.dist(outer.center, inner.center) + &inner.radius;
    if strict {
        lhs < outer.radius
    } else {
        lhs <= outer.radius
    }
}

/// Balls enumerated by `pair(i, k) ↦ B(i, k-th positive rational)`.
#[derive(Clone, Debug)]
pub struct BallIndices {
    pub space: Arc<dyn MetricSpace>,
}

pub fn ball_at(space: &dyn MetricSpace, n: u64) -> Option<Ball> {
    let (i, k) = unpair(n);
    let i = u32::try_from(i).ok()?;
    if space.size().is_some_and(|s| i >= s) {
        return None;
    }
    Some(Ball { center: i, radius: positive_at(k) })
}

impl IndexEnum for BallIndices {
    fn index(&self, n: u64) -> Option<Index> {
        ball_at(self.space.as_ref(), n).map(|b| b.index())
    }

    fn contains(&self, i: &Index) -> bool {
        match i {
            Index::Ball { center, radius } => radius.is_positive() && self.space.size().is_none_or(|s| *center < s),
            _ => false,
        }
    }

    fn spec(&self) -> Value {
        json!({"kind": "balls", "metric": self.space.spec()})
    }
}

/// `⋃` of the balls formally inside every ball of `outer` (strictly if
/// `strict`) and of radius below `below`, when given.
#[derive(Clone, Debug)]
pub struct BallsWithin {
    pub space: Arc<dyn MetricSpace>,
    pub outer: Vec<Ball>,
    pub strict: bool,
    pub below: Option<Q>,
}

impl BallsWithin {
    fn admits(&self, b: &Ball) -> bool {
        self.below.as_ref().is_none_or(|r| &b.radius < r)
            && self.outer.iter().all(|o| formally_inside(self.space.as_ref(), b, o, self.strict))
    }
}

impl OpenFamily for BallsWithin {
    fn generator(&self, n: u64) -> Option<BasicOpen> {
        ball_at(self.space.as_ref(), n).filter(|b| self.admits(b)).map(|b| BasicOpen::single(b.index()))
    }

    fn find_in(&self, point: &BTreeSet<Index>) -> Option<BasicOpen> {
        // the smallest ball is the likeliest witness; try it first
        let smallest = point
            .iter()
            .filter_map(|i| match i {
                Index::Ball { radius, .. } => Some((radius, i)),
                _ => None,
            })
            .min_by(|a, b| a.0.cmp(b.0))
            .map(|(_, i)| i);
        smallest
            .into_iter()
            .chain(point.iter())
            .find(|i| Ball::read(i).is_some_and(|b| self.admits(&b)))
            .map(|i| BasicOpen::single(i.clone()))
    }

    fn describe(&self) -> String {
        let mut conds: Vec<String> = self
            .outer
            .iter()
            .map(|o| format!("{}B({};{})", if self.strict { "⋐" } else { "⊑" }, o.center, fmt_q(&o.radius)))
            .collect();
        if let Some(r) = &self.below {
            conds.push(format!("r<{}", fmt_q(r)));
        }
        format!("⋃{{B : {}}}", conds.join(", "))
    }

    fn spec(&self) -> Value {
        json!({
            "kind": "balls_within",
            "metric": self.space.spec(),
            "outer": self.outer.iter().map(|b| b.index().to_string()).collect::<Vec<_>>(),
            "strict": self.strict,
            "below": self.below.as_ref().map(fmt_q),
        })
    }
}

/// The relation families of the Cauchy-filter copresentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallFamily {
    /// `B(b,s) ⇒ B(a,r)` when `d(a,b) + s ≤ r`.
    Upward,
    /// `B₁ ∩ B₂ ⇒ ⋃{B : B ⊑ B₁, B ⊑ B₂}`.
    Directed,
    /// `⊤ ⇒ ⋃{B(a,r) : r < 1/2n}` for `n ≥ 1`.
    Small,
    /// `B(a,r) ⇒ ⋃{B(b,s) : d(a,b) + s < r}`.
    Inner,
}

impl BallFamily {
    pub const ALL: [BallFamily; 4] = [BallFamily::Upward, BallFamily::Directed, BallFamily::Small, BallFamily::Inner];

    pub fn key(self) -> &'static str {
        match self {
            BallFamily::Upward => "upward",
            BallFamily::Directed => "directed",
            BallFamily::Small => "small",
            BallFamily::Inner => "inner",
        }
    }

    pub fn parse(s: &str) -> Option<BallFamily> {
        Self::ALL.into_iter().find(|f| f.key() == s)
    }
}

/// A [`BallFamily`] over a given metric.
#[derive(Clone, Debug)]
pub struct MetricFamily {
    pub space: Arc<dyn MetricSpace>,
    pub family: BallFamily,
}

impl MetricFamily {
    fn within(&self, outer: Vec<Ball>, strict: bool, below: Option<Q>) -> OpenCode {
        OpenCode::family(Arc::new(BallsWithin { space: self.space.clone(), outer, strict, below }))
    }

    fn small(&self, n: u64) -> Relation {
        Relation::new(OpenCode::top(), self.within(vec![], false, Some(Q::new(1.into(), (2 * n).into()))))
    }

    fn inner(&self, b: Ball) -> Relation {
        Relation::new(OpenCode::single(b.index()), self.within(vec![b], true, None))
    }

    fn directed(&self, a: Ball, b: Ball) -> Relation {
        Relation::new(
            OpenCode::basic([a.index(), b.index()].into_iter().collect()),
            self.within(vec![a, b], false, None),
        )
    }

    fn upward(&self, inner: &Ball, outer: &Ball) -> Option<Relation> {
        (inner != outer && formally_inside(self.space.as_ref(), inner, outer, false))
            .then(|| Relation::new(OpenCode::single(inner.index()), OpenCode::single(outer.index())))
    }

    fn pool(&self, fuel: u64, point: &BTreeSet<Index>) -> Vec<Ball> {
        let mut pool: BTreeSet<Ball> = (0..fuel).filter_map(|n| ball_at(self.space.as_ref(), n)).collect();
        pool.extend(point.iter().filter_map(Ball::read));
        pool.into_iter().collect()
    }
}

impl RelationFamily for MetricFamily {
    fn name(&self) -> String {
        self.family.key().into()
    }

    fn instance(&self, n: u64) -> Option<Relation> {
        let m = self.space.as_ref();
        match self.family {
            BallFamily::Small => Some(self.small(n + 1)),
            BallFamily::Inner => ball_at(m, n).map(|b| self.inner(b)),
            BallFamily::Upward | BallFamily::Directed => {
                let (i, k) = unpair(n);
                let a = ball_at(m, i)?;
                let b = ball_at(m, k)?;
                if self.family == BallFamily::Upward {
                    self.upward(&b, &a)
                } else {
                    (i < k).then(|| self.directed(a, b))
                }
            }
        }
    }

    /// Instances whose antecedent can be confirmed by `point`, with
    /// parameters drawn from `point` and the first `fuel` balls.
    fn relevant(&self, fuel: u64, point: &BTreeSet<Index>) -> Vec<Relation> {
        let observed: Vec<Ball> = point.iter().filter_map(Ball::read).collect();
        match self.family {
            BallFamily::Small => (1..=fuel).map(|n| self.small(n)).collect(),
            BallFamily::Inner => observed.into_iter().map(|b| self.inner(b)).collect(),
            BallFamily::Directed => {
                let mut out = Vec::new();
                for (i, a) in observed.iter().enumerate() {
                    for b in &observed[i + 1..] {
                        out.push(self.directed(a.clone(), b.clone()));
                    }
                }
                out
            }
            BallFamily::Upward => {
                let pool = self.pool(fuel, point);
                observed.iter().flat_map(|b| pool.iter().filter_map(move |a| self.upward(b, a))).collect()
            }
        }
    }

    fn spec(&self) -> Value {
        json!({"kind": "ball", "family": self.family.key(), "metric": self.space.spec()})
    }
}

/// Number of points spot-checked for the metric axioms.
const METRIC_SAMPLE: u32 = 12;

pub fn check_metric(space: &dyn MetricSpace) -> Result<()> {
    let n = space.size().map_or(METRIC_SAMPLE, |s| s.min(METRIC_SAMPLE));
    for a in 0..n {
        if !space.dist(a, a).is_zero() {
            return Err(Error::MetricViolation(format!("d({a},{a}) ≠ 0")));
        }
        for b in 0..n {
            let d = space.dist(a, b);
            if d.is_negative() {
                return Err(Error::MetricViolation(format!("d({a},{b}) < 0")));
            }
            if d != space.dist(b, a) {
                return Err(Error::MetricViolation(format!("d({a},{b}) ≠ d({b},{a})")));
            }
            for c in 0..n {
                if d > space.dist(a, c) + space.dist(c, b) {
                    return Err(Error::MetricViolation(format!("triangle inequality fails at ({a},{c},{b})")));
                }
            }
        }
    }
    Ok(())
}

/// The completion of `space` as the space of Cauchy filters of formal balls.
pub fn metric_completion(space: Arc<dyn MetricSpace>) -> Result<Copresentation> {
    check_metric(space.as_ref())?;
    let families = BallFamily::ALL
        .iter()
        .map(|&family| Arc::new(MetricFamily { space: space.clone(), family }) as Arc<dyn RelationFamily>)
        .collect();
    Copresentation::new(
        IndexDomain::Countable(Arc::new(BallIndices { space: space.clone() })),
        vec![],
        families,
        vec![format!("metric_completion({})", space.spec())],
    )
}

/// Radius `2^{-n}`.
pub fn dyadic_radius(n: u32) -> Q {
    two_pow_neg(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn dyadic_enumeration() {
        let first: Vec<Q> = (0..7).map(dyadic_at).collect();
        assert_eq!(first, vec![qi(0), qi(1), q(1, 2), q(1, 4), q(3, 4), q(1, 8), q(3, 8)]);
        for n in 0..300 {
            assert_eq!(dyadic_position(&dyadic_at(n)), Some(n));
        }
        assert_eq!(DyadicGrid { max_exp: Some(6) }.size(), Some(65));
        assert_eq!(dyadic_at(64), q(63, 64));
    }

    #[test]
    fn bad_metric_is_rejected() {
        let m = OracleMetric {
            size: Some(3),
            dist: Arc::new(|a, b| {
                if a == b {
                    qi(0)
                } else if a + b == 1 {
                    qi(5)
                } else {
                    qi(1)
                }
            }),
            name: "bad".into(),
        };
        assert!(matches!(metric_completion(Arc::new(m)), Err(Error::MetricViolation(_))));
    }

    #[test]
    fn ball_inclusion_transfers() {
        let g: Arc<dyn MetricSpace> = Arc::new(DyadicGrid { max_exp: Some(4) });
        let fam = MetricFamily { space: g.clone(), family: BallFamily::Upward };
        for n in 0..400 {
            if let Some(r) = fam.instance(n) {
                let (i, k) = unpair(n);
                let outer = ball_at(g.as_ref(), i).unwrap();
                let inner = ball_at(g.as_ref(), k).unwrap();
                assert!(g.dist(outer.center, inner.center) + &inner.radius <= outer.radius);
                let pt: BTreeSet<Index> = [inner.index()].into_iter().collect();
                assert!(r.antecedent.holds_in(&pt));
            }
        }
    }
}
