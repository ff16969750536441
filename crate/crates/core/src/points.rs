//! Points as monotone streams of observed subbasic indices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::copres::metric::{ball_at, dyadic_position, Ball, DyadicGrid, LinePoints, MetricSpace};
use crate::copres::{Copresentation, OpenCode, Relation};
use crate::error::{Error, Result};
use crate::index::{BasicOpen, Index};
use crate::rational::{fmt_q, q, qi, rational_position, simplest_between, two_pow_neg, unpair, with_rationals, Q};

/// A point of `S^I` observed positively: step `d ≥ 1` emits finitely many
/// indices and the point is the union of all emissions. Observations up to
/// depth `d` are a pure function of `d`.
pub trait PointStream: Send + Sync {
    fn emit(&self, d: u64) -> Vec<Index>;
    fn describe(&self) -> String;
}

impl fmt::Debug for dyn PointStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

/// Everything a stream emitted up to a fuel bound, with first-seen depths.
#[derive(Clone, Debug, Default)]
pub struct Observation {
    first: BTreeMap<Index, u64>,
    fuel: u64,
}

impl Observation {
    pub fn run(p: &dyn PointStream, fuel: u64) -> Observation {
        let mut first = BTreeMap::new();
        for d in 1..=fuel {
            for i in p.emit(d) {
                first.entry(i).or_insert(d);
            }
        }
        Observation { first, fuel }
    }

    /// A finite point observed in full at depth 1.
    pub fn of_set(point: &BTreeSet<Index>) -> Observation {
        Observation { first: point.iter().map(|i| (i.clone(), 1)).collect(), fuel: 1 }
    }

    pub fn fuel(&self) -> u64 {
        self.fuel
    }

    pub fn at(&self, d: u64) -> BTreeSet<Index> {
        self.first.iter().filter(|(_, &k)| k <= d).map(|(i, _)| i.clone()).collect()
    }

    pub fn all(&self) -> BTreeSet<Index> {
        self.first.keys().cloned().collect()
    }

    pub fn first_seen(&self, i: &Index) -> Option<u64> {
        self.first.get(i).copied()
    }

    /// Least depth at which `↑s` is confirmed.
    pub fn depth_of_basic(&self, s: &BasicOpen) -> Option<u64> {
        s.indices().iter().try_fold(0, |m, i| Some(m.max(self.first_seen(i)?)))
    }

    /// Least depth at which some generator of `c` is confirmed.
    pub fn depth_of_code(&self, c: &OpenCode) -> Option<u64> {
        let finite = c.generators().iter().filter_map(|s| self.depth_of_basic(s)).min();
        let fam = if c.families().is_empty() || !c.holds_in(&self.all()) {
            None
        } else {
            // monotone in d: binary search the least confirming depth
            let (mut lo, mut hi) = (0, self.fuel);
            while lo < hi {
                let mid = (lo + hi) / 2;
                let pt = self.at(mid);
                if c.families().iter().any(|f| f.find_in(&pt).is_some()) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            Some(lo)
        };
        match (finite, fam) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

pub fn observed(p: &dyn PointStream, d: u64) -> BTreeSet<Index> {
    Observation::run(p, d).all()
}

/// Depth at which `↑s` is confirmed, if within `fuel`.
pub fn in_basic(p: &dyn PointStream, s: &BasicOpen, fuel: u64) -> Option<u64> {
    Observation::run(p, fuel).depth_of_basic(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Satisfied,
    Pending,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckEntry {
    pub source: String,
    pub relation: String,
    pub status: Status,
    /// Depth at which the antecedent was confirmed.
    pub depth: Option<u64>,
}

/// Per-relation verdicts. Satisfied relations are only counted; pending and
/// violated ones are listed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub fuel: u64,
    pub checked: usize,
    pub satisfied: usize,
    pub pending: usize,
    pub violated: usize,
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn is_clean(&self) -> bool {
        self.pending == 0 && self.violated == 0
    }

    fn record(&mut self, source: String, r: &Relation, obs: &Observation, all: &BTreeSet<Index>) {
        self.checked += 1;
        if !r.antecedent.holds_in(all) || r.consequent.holds_in(all) {
            self.satisfied += 1;
            return;
        }
        let Some(depth) = obs.depth_of_code(&r.antecedent) else {
            self.satisfied += 1;
            return;
        };
        let status = if r.consequent.is_empty_code() { Status::Violated } else { Status::Pending };
        match status {
            Status::Pending => self.pending += 1,
            _ => self.violated += 1,
        }
        self.entries.push(CheckEntry { source, relation: r.to_string(), status, depth: Some(depth) });
    }
}

/// Checks the explicit relations of `c` and, for every family, the slice
/// [`crate::copres::RelationFamily::relevant`] to the observation at `fuel`.
pub fn check_observation(obs: &Observation, c: &Copresentation) -> CheckReport {
    let all = obs.all();
    let mut rep = CheckReport { fuel: obs.fuel, ..Default::default() };
    for (k, r) in c.relations().iter().enumerate() {
        rep.record(format!("relation[{k}]"), r, obs, &all);
    }
    for f in c.families() {
        for r in f.relevant(obs.fuel, &all) {
            rep.record(f.name(), &r, obs, &all);
        }
    }
    rep
}

pub fn check_relations(p: &dyn PointStream, c: &Copresentation, fuel: u64) -> CheckReport {
    check_observation(&Observation::run(p, fuel), c)
}

/// Emits a fixed set at step 1.
#[derive(Clone, Debug)]
pub struct ConstantStream(pub BTreeSet<Index>);

impl PointStream for ConstantStream {
    fn emit(&self, d: u64) -> Vec<Index> {
        if d == 1 {
            self.0.iter().cloned().collect()
        } else {
            vec![]
        }
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        format!("constant {{{}}}", parts.join(","))
    }
}

/// Emits `steps[d-1]` at step `d`.
#[derive(Clone, Debug)]
pub struct ListStream(pub Vec<Vec<Index>>);

impl PointStream for ListStream {
    fn emit(&self, d: u64) -> Vec<Index> {
        self.0.get(d as usize - 1).cloned().unwrap_or_default()
    }

    fn describe(&self) -> String {
        format!("list of {} steps", self.0.len())
    }
}

/// Emits index `n` at step `n + 1` for every `n` with `pred(n)`.
pub struct PredicateStream {
    pub pred: Arc<dyn Fn(u32) -> bool + Send + Sync>,
    pub name: String,
}

impl PointStream for PredicateStream {
    fn emit(&self, d: u64) -> Vec<Index> {
        let n = (d - 1) as u32;
        if (self.pred)(n) {
            vec![Index::Nat(n)]
        } else {
            vec![]
        }
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

type ApproxFn = dyn Fn(u64) -> Q + Send + Sync;

/// The Dedekind cut of a real given by approximations `a_n` with
/// `|a_n - x| ≤ 1/n`. Step `d` emits `L_q` for `q < a_d - 1/d` and `R_q`
/// for `q > a_d + 1/d`, `q` among the first `d` rationals.
pub struct CutStream {
    approx: Arc<ApproxFn>,
    name: String,
}

pub fn real_to_stream(name: &str, approx: Arc<ApproxFn>) -> CutStream {
    CutStream { approx, name: name.into() }
}

impl PointStream for CutStream {
    fn emit(&self, d: u64) -> Vec<Index> {
        let a = (self.approx)(d);
        let eps = Q::new(BigInt::one(), BigInt::from(d));
        let lo = &a - &eps;
        let hi = &a + &eps;
        with_rationals(d, |rats| {
            let mut out = Vec::new();
            for x in rats {
                if x < &lo {
                    out.push(Index::Lower(x.clone()));
                } else if x > &hi {
                    out.push(Index::Upper(x.clone()));
                }
            }
            out
        })
    }

    fn describe(&self) -> String {
        format!("cut of {}", self.name)
    }
}

pub fn rational_stream(r: &Q) -> CutStream {
    let r2 = r.clone();
    real_to_stream(&fmt_q(r), Arc::new(move |_| r2.clone()))
}

/// `√k` to within `1/n` by Newton's method from above.
pub fn sqrt_approx(k: u64, n: u64) -> Q {
    let k = qi(k as i64);
    let mut x = k.clone().max(qi(1));
    let tol = Q::new(BigInt::from(2), BigInt::from(n));
    while &x * &x - &k > tol {
        x = (&x + &k / &x) / qi(2);
    }
    x
}

pub fn golden_approx(n: u64) -> Q {
    (qi(1) + sqrt_approx(5, n)) / qi(2)
}

/// Partial sums of `Σ 1/k!`, tail below `1/n`.
pub fn e_approx(n: u64) -> Q {
    let mut sum = Q::zero();
    let mut term = qi(1);
    let mut k = 0i64;
    let bound = Q::new(BigInt::one(), BigInt::from(2 * n));
    loop {
        sum += &term;
        k += 1;
        term /= qi(k);
        if term < bound {
            return sum;
        }
    }
}

fn arctan_inv(x: i64, terms: usize) -> Q {
    let mut sum = Q::zero();
    for k in 0..terms {
        let t = Q::new(BigInt::one(), BigInt::from(2 * k as i64 + 1) * BigInt::from(x).pow(2 * k as u32 + 1));
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
    }
    sum
}

/// `π = 16 arctan(1/5) − 4 arctan(1/239)`, tails bounded by the next terms.
pub fn pi_approx(n: u64) -> Q {
    let bound = Q::new(BigInt::one(), BigInt::from(n));
    let mut terms = 1;
    loop {
        let k = terms as i64;
        let tail = Q::new(BigInt::from(16), BigInt::from(2 * k + 1) * BigInt::from(5).pow(2 * k as u32 + 1))
            + Q::new(BigInt::from(4), BigInt::from(2 * k + 1) * BigInt::from(239).pow(2 * k as u32 + 1));
        if tail <= bound {
            return qi(16) * arctan_inv(5, terms) - qi(4) * arctan_inv(239, terms);
        }
        terms += 1;
    }
}

/// Named reals with certified approximations.
pub fn named_real(name: &str) -> Option<CutStream> {
    let f: Arc<ApproxFn> = match name {
        "sqrt2" => Arc::new(|n| sqrt_approx(2, n)),
        "golden" => Arc::new(|n| golden_approx(2 * n)),
        "e" => Arc::new(e_approx),
        "pi" => Arc::new(pi_approx),
        "one_third" => Arc::new(|_| q(1, 3)),
        _ => return None,
    };
    Some(real_to_stream(name, f))
}

pub const NAMED_REALS: [&str; 5] = ["sqrt2", "golden", "e", "pi", "one_third"];

/// How two distinct rationals are told apart: the simplest rational `q`
/// strictly between them, and the depth by which the smaller stream has
/// emitted `R_q` and the larger one `L_q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Separation {
    pub pivot: String,
    pub fuel: u64,
}

/// Exact fuel bound: `q` must be among the first `d` rationals and
/// `1/d < min(q − r, r' − q)`.
pub fn separation_fuel(r: &Q, s: &Q) -> Separation {
    let (lo, hi) = if r < s { (r, s) } else { (s, r) };
    let p = simplest_between(lo, hi);
    let gap = (&p - lo).min(hi - &p);
    let inv = (Q::one() / gap).floor().to_integer().to_u64().expect("small gap") + 1;
    Separation { pivot: fmt_q(&p), fuel: inv.max(rational_position(&p) + 1) }
}

/// Whether the two observations differ in some index.
pub fn separated(a: &dyn PointStream, b: &dyn PointStream, fuel: u64) -> bool {
    observed(a, fuel) != observed(b, fuel)
}

type NatFn = dyn Fn(u64) -> u64 + Send + Sync;

/// The open surjection `ℕ^ℕ → S^ℕ`: entry `t` of the input belongs to
/// substream `i` where `(i, k) = unpair(t)`, and index `i` is observed once
/// a nonzero entry of substream `i` has been read.
pub struct BaireStream {
    q: Arc<NatFn>,
    name: String,
}

pub fn baire_to_spower(name: &str, q: Arc<NatFn>) -> BaireStream {
    BaireStream { q, name: name.into() }
}

impl PointStream for BaireStream {
    fn emit(&self, d: u64) -> Vec<Index> {
        let t = d - 1;
        if (self.q)(t) != 0 {
            vec![Index::Nat(unpair(t).0 as u32)]
        } else {
            vec![]
        }
    }

    fn describe(&self) -> String {
        format!("baire image of {}", self.name)
    }
}

/// Finite prefix of a Baire-space point, zero beyond it.
pub fn prefix_sequence(prefix: Vec<u64>) -> Arc<NatFn> {
    Arc::new(move |t| prefix.get(t as usize).copied().unwrap_or(0))
}

/// Finds the grid point nearest to `x` at resolution `2^{-level}`.
pub(crate) fn nearest_center(space: &dyn MetricSpace, x: &Q, level: u32) -> Option<u32> {
    if let Some(size) = space.size() {
        if size <= 4096 && space.coordinate(0).is_some() && !is_dyadic_grid(space) {
            return (0..size).min_by_key(|&i| (space.coordinate(i).unwrap() - x).abs());
        }
    }
    let cap = grid_cap(space);
    let e = cap.unwrap_or(MAX_GRID_LEVEL).min(level);
    let scale = Q::from_integer(BigInt::one() << e);
    let c = (x * &scale).round() / scale;
    let c = c.max(Q::zero()).min(Q::one());
    dyadic_position(&c)
}

/// Finest level used for approximation centers on an unbounded grid.
const MAX_GRID_LEVEL: u32 = 30;

fn is_dyadic_grid(space: &dyn MetricSpace) -> bool {
    space.spec().get("kind").and_then(|k| k.as_str()) == Some("dyadic_grid")
}

fn grid_cap(space: &dyn MetricSpace) -> Option<u32> {
    space.spec().get("max_exp").and_then(|v| v.as_u64()).map(|v| v as u32)
}

/// Canonical stream of a point `x` of the completion of a subset of `ℚ`:
/// step `d` emits the `(d−1)`-th catalog ball if it contains `x`, and the
/// ball `B(c_d, |c_d − x| + 2^{-d})` around the nearest point `c_d`.
pub struct MetricStream {
    space: Arc<dyn MetricSpace>,
    x: Q,
}

impl MetricStream {
    pub fn new(space: Arc<dyn MetricSpace>, x: Q) -> Result<MetricStream> {
        if space.coordinate(0).is_none() {
            return Err(Error::Invalid("canonical streams need points on the real line".into()));
        }
        Ok(MetricStream { space, x })
    }

    pub fn dyadic(max_exp: Option<u32>, x: Q) -> MetricStream {
        MetricStream { space: Arc::new(DyadicGrid { max_exp }), x }
    }

    pub fn line(points: Vec<Q>, x: Q) -> MetricStream {
        MetricStream { space: Arc::new(LinePoints(points)), x }
    }
}

impl PointStream for MetricStream {
    fn emit(&self, d: u64) -> Vec<Index> {
        let m = self.space.as_ref();
        let mut out = Vec::new();
        if let Some(b) = ball_at(m, d - 1) {
            if (m.coordinate(b.center).unwrap() - &self.x).abs() < b.radius {
                out.push(b.index());
            }
        }
        let level = u32::try_from(d).unwrap_or(u32::MAX).min(1 << 16);
        if let Some(c) = nearest_center(m, &self.x, level) {
            let gap = (m.coordinate(c).unwrap() - &self.x).abs();
            out.push(Ball { center: c, radius: gap + two_pow_neg(level) }.index());
        }
        out
    }

    fn describe(&self) -> String {
        format!("canonical stream of {} in {}", fmt_q(&self.x), self.space.spec())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CauchyLimit {
    pub center: u32,
    pub radius: String,
    pub depth: u64,
}

/// A point of `D` within `1/2n` of the limit: the center of the earliest
/// observed ball of radius at most `1/2n`. The stream is first checked
/// against `c` at the same fuel.
pub fn cauchy_limit(p: &dyn PointStream, c: &Copresentation, n: u64, fuel: u64) -> Result<CauchyLimit> {
    let obs = Observation::run(p, fuel);
    let rep = check_observation(&obs, c);
    if let Some(e) = rep.entries.iter().find(|e| e.status == Status::Violated) {
        return Err(Error::RelationViolated(e.relation.clone()));
    }
    let bound = Q::new(BigInt::one(), BigInt::from(2 * n));
    let best = obs.first.iter().filter_map(|(i, &d)| Ball::read(i).filter(|b| b.radius <= bound).map(|b| (d, b))).min();
    match best {
        Some((depth, b)) => Ok(CauchyLimit { center: b.center, radius: fmt_q(&b.radius), depth }),
        None => Err(Error::InsufficientObservations { radius: fmt_q(&bound), fuel: fuel as usize }),
    }
}

/// Exact images of cylinders under [`baire_to_spower`], restricted to
/// indices below `m`: the observed set of the prefix, plus any superset.
/// Returns `(brute-force image, predicted up-set)` as sorted masks.
pub fn cylinder_image(prefix: &[u64], m: u32) -> (Vec<u64>, Vec<u64>) {
    let k = prefix.len() as u64;
    let base = prefix
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(t, _)| unpair(t as u64).0)
        .filter(|&i| i < m as u64)
        .fold(0u64, |acc, i| acc | 1 << i);
    // one free position beyond the prefix for each i < m
    let free: Vec<u64> =
        (0..m as u64).map(|i| (0..).map(|j| crate::rational::pair(i, j)).find(|&t| t >= k).unwrap()).collect();
    let len = free.iter().copied().max().unwrap_or(0).max(k) + 1;
    let mut image = BTreeSet::new();
    for choice in 0u64..(1 << m) {
        let mut seq: Vec<u64> = prefix.to_vec();
        seq.resize(len as usize, 0);
        for (i, &t) in free.iter().enumerate() {
            if choice & (1 << i) != 0 {
                seq[t as usize] = 1;
            }
        }
        let s = baire_to_spower("cylinder", prefix_sequence(seq));
        let obs = observed(&s, len);
        image.insert(
            obs.iter()
                .filter_map(|i| match i {
                    Index::Nat(n) if *n < m => Some(1u64 << n),
                    _ => None,
                })
                .fold(0, |a, b| a | b),
        );
    }
    let predicted: Vec<u64> = (0u64..(1 << m)).filter(|z| z & base == base).collect();
    (image.into_iter().collect(), predicted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copres::metric::metric_completion;
    use crate::copres::reals::reals_dedekind;
    use crate::copres::sierpinski_power;

    #[test]
    fn in_basic_semantics() {
        let p = ConstantStream([Index::Nat(0)].into_iter().collect());
        assert_eq!(in_basic(&p, &BasicOpen::top(), 0), Some(0));
        assert_eq!(in_basic(&p, &BasicOpen::single(Index::Nat(0)), 3), Some(1));
        let evens = PredicateStream { pred: Arc::new(|n| n % 2 == 0), name: "evens".into() };
        for fuel in [1, 10, 100] {
            assert_eq!(in_basic(&evens, &BasicOpen::single(Index::Nat(1)), fuel), None);
        }
    }

    #[test]
    fn rational_cut_and_pending() {
        let c = reals_dedekind();
        let rep = check_relations(&rational_stream(&q(1, 2)), &c, 50);
        assert_eq!(rep.violated, 0);
        let half: BTreeSet<Index> = [Index::Lower(q(1, 2)), Index::Upper(q(1, 2))].into_iter().collect();
        let rep = check_relations(&ConstantStream(half), &c, 5);
        assert!(rep.entries.iter().any(|e| e.status == Status::Violated && e.source == "disjoint"));
        let only = ConstantStream([Index::Lower(q(1, 2))].into_iter().collect());
        let rep = check_relations(&only, &c, 5);
        assert!(rep
            .entries
            .iter()
            .any(|e| e.status == Status::Pending && e.source == "round_lower" && e.relation.starts_with("↑{L1/2}")));
        let more = ListStream(vec![vec![Index::Lower(q(1, 2))], vec![Index::Lower(q(2, 3))]]);
        let rep = check_relations(&more, &c, 2);
        assert!(!rep.entries.iter().any(|e| e.source == "round_lower" && e.relation.starts_with("↑{L1/2}")));
    }

    #[test]
    fn exact_half_emits_lower_below() {
        let obs = observed(&rational_stream(&q(1, 2)), 60);
        for i in &obs {
            match i {
                Index::Lower(x) => assert!(x < &q(1, 2)),
                Index::Upper(x) => assert!(x > &q(1, 2)),
                _ => panic!(),
            }
        }
        assert!(obs.contains(&Index::Lower(qi(0))));
    }

    #[test]
    fn irrational_approximations() {
        for n in [1, 7, 50, 300] {
            let a = sqrt_approx(2, n);
            let tol = Q::new(BigInt::one(), BigInt::from(n));
            // a ≥ √2 and a² − 2 ≤ 2/n, so a − √2 ≤ 1/n
            assert!(&a * &a >= qi(2) && &a * &a - qi(2) <= qi(2) * &tol);
            let p = pi_approx(n);
            assert!((p - q(314159265, 100000000)).abs() <= &tol + q(1, 10000000));
            let e = e_approx(n);
            assert!((e - q(271828183, 100000000)).abs() <= &tol + q(1, 10000000));
        }
        let c = reals_dedekind();
        for name in NAMED_REALS {
            let rep = check_relations(&named_real(name).unwrap(), &c, 50);
            assert_eq!(rep.violated, 0, "{name}");
        }
    }

    #[test]
    fn rationals_are_separated() {
        for (a, b) in [(q(1, 3), q(1, 2)), (qi(0), q(1, 10)), (q(-7, 3), q(-9, 4))] {
            let s = separation_fuel(&a, &b);
            assert!(separated(&rational_stream(&a), &rational_stream(&b), s.fuel));
        }
        assert_eq!(separation_fuel(&q(1, 3), &q(2, 3)).pivot, "1/2");
    }

    #[test]
    fn baire_streams() {
        let zeros = baire_to_spower("zeros", Arc::new(|_| 0));
        assert!(observed(&zeros, 200).is_empty());
        let three = baire_to_spower("three", Arc::new(|t| u64::from(unpair(t).0 == 3)));
        assert_eq!(observed(&three, 200), [Index::Nat(3)].into_iter().collect());
        for prefix in [vec![], vec![0, 1], vec![1, 0, 0, 2, 0, 0, 5]] {
            let (img, pred) = cylinder_image(&prefix, 4);
            assert_eq!(img, pred);
        }
    }

    #[test]
    fn finite_membership_agrees() {
        let c = sierpinski_power(2)
            .pi02_subspace(vec![Relation::new(OpenCode::single(Index::Nat(0)), OpenCode::single(Index::Nat(1)))])
            .unwrap();
        let den = c.denotation().unwrap();
        for z in 0u64..4 {
            let set: BTreeSet<Index> = (0..2).filter(|i| z & (1 << i) != 0).map(Index::Nat).collect();
            let rep = check_relations(&ConstantStream(set), &c, 3);
            assert_eq!(rep.is_clean(), den.contains(&z));
        }
    }

    #[test]
    fn metric_streams_and_limits() {
        let grid: Arc<dyn MetricSpace> = Arc::new(DyadicGrid { max_exp: Some(6) });
        let c = metric_completion(grid.clone()).unwrap();
        let p = MetricStream::dyadic(Some(6), q(1, 4));
        let lim = cauchy_limit(&p, &c, 8, 50).unwrap();
        assert!((crate::copres::metric::dyadic_at(lim.center) - q(1, 4)).abs() <= q(1, 8));
        let third = MetricStream::dyadic(None, q(1, 3));
        let full = metric_completion(Arc::new(DyadicGrid { max_exp: None })).unwrap();
        assert_eq!(check_relations(&third, &full, 50).violated, 0);
        let single = metric_completion(Arc::new(LinePoints(vec![qi(0)]))).unwrap();
        let lim = cauchy_limit(&MetricStream::line(vec![qi(0)], qi(0)), &single, 3, 10).unwrap();
        assert_eq!((lim.center, lim.depth), (0, 3));
        let big = ConstantStream([Ball { center: 0, radius: qi(1) }.index()].into_iter().collect());
        assert!(matches!(cauchy_limit(&big, &c, 4, 20), Err(Error::InsufficientObservations { .. })));
    }
}
