//! The convergent strong Choquet game on finite spaces: referee, verdicts,
//! composite strategies for subspaces, products and open images,
//! normalization, and tree extraction. A formal-ball variant runs the
//! ball-shrinking strategy on a metric completion.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bits::{bit, bits, contains, is_subset};
use crate::copres::metric::{formally_inside, Ball, MetricSpace};
use crate::error::{Error, Result};
use crate::finite::{set_label, FiniteMap, FiniteSpace};
use crate::points::nearest_center;
use crate::rational::{fmt_q, qi, two_pow_neg, Q};

/// One round: I plays `(u, x)`, II answers `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Round {
    pub u: u64,
    pub x: usize,
    pub v: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IMove {
    pub u: u64,
    pub x: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Offense {
    pub player: u8,
    pub round: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GameHistory {
    pub rounds: Vec<Round>,
    /// The first illegal move; the game stops there.
    pub offense: Option<Offense>,
    /// I had no legal first move (the space is empty).
    pub no_move: bool,
}

impl GameHistory {
    pub fn require_legal(&self) -> Result<()> {
        match &self.offense {
            Some(o) => Err(Error::IllegalMove { player: o.player, round: o.round, reason: o.reason.clone() }),
            None => Ok(()),
        }
    }
}

pub trait StrategyI {
    /// `None` when no move is possible.
    fn play(&mut self, prior: &[Round]) -> Option<IMove>;
}

pub trait StrategyII {
    fn name(&self) -> String;
    /// II's answer to `(u, x)` after the rounds in `prior`.
    fn respond(&mut self, prior: &[Round], u: u64, x: usize) -> Result<u64>;
}

pub type StrategyFactory = Arc<dyn Fn() -> Box<dyn StrategyII> + Send + Sync>;

fn last_v(space: &FiniteSpace, prior: &[Round]) -> u64 {
    prior.last().map_or(space.full(), |r| r.v)
}

pub fn illegal_i(space: &FiniteSpace, prior: &[Round], m: IMove) -> Option<String> {
    if !space.is_open(m.u) {
        Some("U is not open".into())
    } else if m.x >= space.len() || !contains(m.u, m.x) {
        Some("x is not in U".into())
    } else if !is_subset(m.u, last_v(space, prior)) {
        Some("U is not inside the previous V".into())
    } else {
        None
    }
}

pub fn illegal_ii(space: &FiniteSpace, u: u64, x: usize, v: u64) -> Option<String> {
    if !space.is_open(v) {
        Some("V is not open".into())
    } else if !contains(v, x) {
        Some("x is not in V".into())
    } else if !is_subset(v, u) {
        Some("V is not inside U".into())
    } else {
        None
    }
}

/// Runs `rounds` rounds; an illegal move ends the game and is recorded.
pub fn play(
    space: &FiniteSpace,
    si: &mut dyn StrategyI,
    sii: &mut dyn StrategyII,
    rounds: usize,
) -> Result<GameHistory> {
    let mut h = GameHistory::default();
    if space.is_empty() {
        h.no_move = true;
        return Ok(h);
    }
    for k in 0..rounds {
        let Some(m) = si.play(&h.rounds) else {
            h.offense = Some(Offense { player: 1, round: k, reason: "no move".into() });
            break;
        };
        if let Some(reason) = illegal_i(space, &h.rounds, m) {
            h.offense = Some(Offense { player: 1, round: k, reason });
            break;
        }
        let v = sii.respond(&h.rounds, m.u, m.x)?;
        if let Some(reason) = illegal_ii(space, m.u, m.x, v) {
            h.offense = Some(Offense { player: 2, round: k, reason });
            break;
        }
        h.rounds.push(Round { u: m.u, x: m.x, v });
    }
    Ok(h)
}

/// Post hoc legality check of a recorded history.
pub fn referee(space: &FiniteSpace, h: &GameHistory) -> Option<Offense> {
    for (k, r) in h.rounds.iter().enumerate() {
        if let Some(reason) = illegal_i(space, &h.rounds[..k], IMove { u: r.u, x: r.x }) {
            return Some(Offense { player: 1, round: k, reason });
        }
        if let Some(reason) = illegal_ii(space, r.u, r.x, r.v) {
            return Some(Offense { player: 2, round: k, reason });
        }
    }
    h.offense.clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    IiWins,
    IWins,
    Undecided,
}

/// II's moves have stabilized once the last `STABLE_WINDOW` are equal.
pub const STABLE_WINDOW: usize = 2;

fn stabilized(h: &GameHistory) -> Option<u64> {
    let n = h.rounds.len();
    if n < STABLE_WINDOW {
        return None;
    }
    let v = h.rounds[n - 1].v;
    h.rounds[n - STABLE_WINDOW..].iter().all(|r| r.v == v).then_some(v)
}

fn by_legality(space: &FiniteSpace, h: &GameHistory) -> Option<Verdict> {
    if h.no_move || space.is_empty() {
        return Some(Verdict::IiWins);
    }
    referee(space, h).map(|o| if o.player == 1 { Verdict::IiWins } else { Verdict::IWins })
}

/// II wins when the play has stabilized at the minimal neighbourhood of a
/// point, which then has the played sets as a neighbourhood basis.
pub fn winner_convergent(space: &FiniteSpace, h: &GameHistory) -> Verdict {
    if let Some(v) = by_legality(space, h) {
        return v;
    }
    match stabilized(h) {
        None => Verdict::Undecided,
        Some(v) if (0..space.len()).any(|z| space.up(z) == v) => Verdict::IiWins,
        Some(_) => Verdict::IWins,
    }
}

/// II wins when the play has stabilized at a nonempty set.
pub fn winner_strong(space: &FiniteSpace, h: &GameHistory) -> Verdict {
    if let Some(v) = by_legality(space, h) {
        return v;
    }
    match stabilized(h) {
        None => Verdict::Undecided,
        Some(0) => Verdict::IWins,
        Some(_) => Verdict::IiWins,
    }
}

/// Label form of a history.
pub fn history_to_json(space: &FiniteSpace, h: &GameHistory) -> Value {
    let rounds: Vec<Value> = h
        .rounds
        .iter()
        .map(|r| json!({"U": set_label(space, r.u), "x": space.label(r.x), "V": set_label(space, r.v)}))
        .collect();
    json!({"rounds": rounds, "offense": h.offense, "no_move": h.no_move})
}

/// Plays `first`, then keeps its point with the previous `V` as open set.
pub struct RepeatI {
    pub first: IMove,
}

impl StrategyI for RepeatI {
    fn play(&mut self, prior: &[Round]) -> Option<IMove> {
        Some(match prior.last() {
            None => self.first,
            Some(r) => IMove { u: r.v, x: self.first.x },
        })
    }
}

/// Plays the listed points in turn (the last one forever), each with the
/// largest legal open set.
pub struct ScriptI {
    pub space: FiniteSpace,
    pub points: Vec<usize>,
}

impl StrategyI for ScriptI {
    fn play(&mut self, prior: &[Round]) -> Option<IMove> {
        let x = *self.points.get(prior.len()).or(self.points.last())?;
        Some(IMove { u: last_v(&self.space, prior), x })
    }
}

/// A random adversary: a random point of the previous `V` and a random open
/// set between its minimal neighbourhood and `V`. From round `settle` on it
/// keeps its point and plays the previous `V`.
pub struct RandomI {
    pub space: FiniteSpace,
    pub rng: ChaCha8Rng,
    pub settle: usize,
}

impl RandomI {
    /// Settles after `|X| + 2` rounds.
    pub fn seeded(space: &FiniteSpace, seed: u64) -> RandomI {
        RandomI { space: space.clone(), rng: ChaCha8Rng::seed_from_u64(seed), settle: space.len() + 2 }
    }
}

impl StrategyI for RandomI {
    fn play(&mut self, prior: &[Round]) -> Option<IMove> {
        let v = last_v(&self.space, prior);
        if let Some(r) = prior.last() {
            if prior.len() >= self.settle {
                return Some(IMove { u: v, x: r.x });
            }
        }
        let pts: Vec<usize> = bits(v).collect();
        if pts.is_empty() {
            return None;
        }
        let x = pts[self.rng.gen_range(0..pts.len())];
        let up = self.space.up(x);
        let choices: Vec<u64> =
            self.space.opens().iter().copied().filter(|&o| is_subset(up, o) && is_subset(o, v)).collect();
        let u = choices[self.rng.gen_range(0..choices.len())];
        Some(IMove { u, x })
    }
}

/// II answers with the minimal open neighbourhood of I's point.
#[derive(Clone, Debug)]
pub struct StratFinite {
    pub space: FiniteSpace,
}

pub fn strat_finite(space: &FiniteSpace) -> StratFinite {
    StratFinite { space: space.clone() }
}

impl StrategyII for StratFinite {
    fn name(&self) -> String {
        "finite".into()
    }

    fn respond(&mut self, _prior: &[Round], _u: u64, x: usize) -> Result<u64> {
        Ok(self.space.up(x))
    }
}

fn side_move(space: &FiniteSpace, rounds: &mut Vec<Round>, s: &mut dyn StrategyII, u: u64, x: usize) -> Result<u64> {
    if let Some(r) = illegal_i(space, rounds, IMove { u, x }) {
        return Err(Error::SideGameIllegal(format!("relayed move of I: {r}")));
    }
    let v = s.respond(rounds, u, x)?;
    if let Some(r) = illegal_ii(space, u, x, v) {
        return Err(Error::SideGameIllegal(format!("side strategy {}: {r}", s.name())));
    }
    rounds.push(Round { u, x, v });
    Ok(v)
}

fn check_sync(prior: &[Round], side: &[Round]) -> Result<()> {
    if prior.len() != side.len() {
        return Err(Error::SideGameIllegal("strategy used on a history it did not play".into()));
    }
    Ok(())
}

/// One relayed round of [`StratPi02`]: `(k, U'_k, [(n, U'_k ⊆ B_n)])` for
/// every `n ≤ k` with `x_k ∈ A_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pi02Step {
    pub round: usize,
    pub lifted: u64,
    pub inside: Vec<(usize, bool)>,
}

/// II on `Y = ⋂(¬A_n ∪ B_n)` by way of a side game in the ambient space:
/// I's `(U_k, x_k)` is relayed as `(U'_k, x_k)` with `U'_k` the largest open
/// set such that `U'_k ∩ Y ⊆ U_k`, `U'_k ⊆ V'_{k-1}` and `U'_k ⊆ B_n` for
/// every `n ≤ k` with `x_k ∈ A_n`; II answers `V'_k ∩ Y`.
pub struct StratPi02 {
    ambient: FiniteSpace,
    emb: Vec<usize>,
    y_mask: u64,
    rels: Vec<(u64, u64)>,
    side: Box<dyn StrategyII>,
    side_rounds: Vec<Round>,
    pub log: Vec<Pi02Step>,
}

/// The subspace `Y` and the strategy on it.
pub fn strat_pi02(
    ambient: &FiniteSpace,
    rels: &[(u64, u64)],
    side: Box<dyn StrategyII>,
) -> Result<(FiniteSpace, StratPi02)> {
    for &(a, b) in rels {
        if !ambient.is_open(a) || !ambient.is_open(b) {
            return Err(Error::Invalid("relation sides must be open".into()));
        }
    }
    let y_mask = (0..ambient.len())
        .filter(|&p| rels.iter().all(|&(a, b)| !contains(a, p) || contains(b, p)))
        .fold(0, |m, p| m | bit(p));
    let (y, emb) = ambient.subspace(y_mask);
    let s = StratPi02 {
        ambient: ambient.clone(),
        emb,
        y_mask,
        rels: rels.to_vec(),
        side,
        side_rounds: Vec::new(),
        log: Vec::new(),
    };
    Ok((y, s))
}

impl StrategyII for StratPi02 {
    fn name(&self) -> String {
        format!("pi02({})", self.side.name())
    }

    fn respond(&mut self, prior: &[Round], u: u64, x: usize) -> Result<u64> {
        check_sync(prior, &self.side_rounds)?;
        let k = prior.len();
        let xa = self.emb[x];
        let mut bound = (FiniteSpace::extend(u, &self.emb) | !self.y_mask) & self.ambient.full();
        bound &= last_v(&self.ambient, &self.side_rounds);
        let active: Vec<usize> = (0..self.rels.len().min(k + 1)).filter(|&n| contains(self.rels[n].0, xa)).collect();
        for &n in &active {
            bound &= self.rels[n].1;
        }
        let lifted = self.ambient.interior(bound);
        let v2 = side_move(&self.ambient, &mut self.side_rounds, self.side.as_mut(), lifted, xa)?;
        let inside = active.iter().map(|&n| (n, is_subset(lifted, self.rels[n].1))).collect();
        self.log.push(Pi02Step { round: k, lifted, inside });
        Ok(FiniteSpace::restrict(v2, &self.emb))
    }
}

/// II on a finite product `X_0 × … × X_{r-1}`, read as a countable product
/// padded with one-point factors. Round `k` picks `m_k > m_{k-1}` (at least
/// `r`), the largest box around `x^k` inside `U^k` built coordinate by
/// coordinate, relays each real coordinate to its side game, and answers
/// with the product of the replies. Side games on padding factors are
/// trivial and not run.
pub struct StratProduct {
    factors: Vec<FiniteSpace>,
    coords: Vec<Vec<usize>>,
    sides: Vec<(Box<dyn StrategyII>, Vec<Round>)>,
    pub m: Vec<usize>,
}

pub fn strat_product(parts: Vec<(FiniteSpace, Box<dyn StrategyII>)>) -> Result<(FiniteSpace, StratProduct)> {
    let factors: Vec<FiniteSpace> = parts.iter().map(|(s, _)| s.clone()).collect();
    let refs: Vec<&FiniteSpace> = factors.iter().collect();
    let (product, coords) = FiniteSpace::product(&refs)?;
    let sides = parts.into_iter().map(|(_, s)| (s, Vec::new())).collect();
    Ok((product, StratProduct { factors, coords, sides, m: Vec::new() }))
}

impl StratProduct {
    fn boxed(&self, opens: &[u64]) -> u64 {
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, c)| c.iter().zip(opens).all(|(&ci, &o)| contains(o, ci)))
            .fold(0, |m, (p, _)| m | bit(p))
    }
}

impl StrategyII for StratProduct {
    fn name(&self) -> String {
        let names: Vec<String> = self.sides.iter().map(|(s, _)| s.name()).collect();
        format!("product({})", names.join(","))
    }

    fn respond(&mut self, prior: &[Round], u: u64, x: usize) -> Result<u64> {
        if let Some((_, r)) = self.sides.first() {
            check_sync(prior, r)?;
        }
        let r = self.factors.len();
        let m = self.m.last().map_or(r.max(1), |&p| (p + 1).max(r));
        self.m.push(m);
        let xs = self.coords[x].clone();
        let mut opens: Vec<u64> = xs.iter().zip(&self.factors).map(|(&xi, f)| f.up(xi)).collect();
        for i in 0..r {
            let mut cands: Vec<u64> =
                self.factors[i].opens().iter().copied().filter(|&o| is_subset(opens[i], o)).collect();
            cands.sort_by_key(|o| (std::cmp::Reverse(o.count_ones()), *o));
            for o in cands {
                let mut trial = opens.clone();
                trial[i] = o;
                if is_subset(self.boxed(&trial), u) {
                    opens = trial;
                    break;
                }
            }
        }
        let mut replies = Vec::with_capacity(r);
        for i in 0..r {
            let (s, rounds) = &mut self.sides[i];
            replies.push(side_move(&self.factors[i], rounds, s.as_mut(), opens[i], xs[i])?);
        }
        Ok(self.boxed(&replies))
    }
}

/// II on `Y` through a side game on `X` along an open surjection `f`:
/// `(U_k, y_k)` is relayed as `(f⁻¹(U_k) ∩ V'_{k-1}, x_k)` with `x_k` the
/// least preimage of `y_k` in `V'_{k-1}`; II answers `f(V'_k)`.
pub struct StratOpenImage {
    f: FiniteMap,
    side: Box<dyn StrategyII>,
    side_rounds: Vec<Round>,
    /// `y_k ∈ V_k ⊆ U_k` per round.
    pub log: Vec<bool>,
}

pub fn strat_open_image(f: &FiniteMap, side: Box<dyn StrategyII>) -> Result<StratOpenImage> {
    f.require_continuous()?;
    f.require_open()?;
    if !f.is_surjective() {
        return Err(Error::NotSurjective);
    }
    Ok(StratOpenImage { f: f.clone(), side, side_rounds: Vec::new(), log: Vec::new() })
}

impl StrategyII for StratOpenImage {
    fn name(&self) -> String {
        format!("open-image({})", self.side.name())
    }

    fn respond(&mut self, prior: &[Round], u: u64, y: usize) -> Result<u64> {
        check_sync(prior, &self.side_rounds)?;
        let x_space = self.f.source();
        let prev = last_v(x_space, &self.side_rounds);
        let x = bits(self.f.fiber(y) & prev)
            .next()
            .ok_or_else(|| Error::SideGameIllegal("no preimage inside the previous side move".into()))?;
        let lifted = self.f.preimage(u) & prev;
        let v2 = side_move(x_space, &mut self.side_rounds, self.side.as_mut(), lifted, x)?;
        let v = self.f.image(v2);
        self.log.push(contains(v, y) && is_subset(v, u));
        Ok(v)
    }
}

/// The normalized form of a strategy `σ`: moves are shrunk to the least
/// basis set between I's point and `σ`'s answer, and earlier points are
/// replaced by the least points reproducing II's recorded answers, so the
/// reply depends only on the open sets played and I's current point.
pub struct Normalized {
    space: FiniteSpace,
    factory: StrategyFactory,
    basis: Vec<u64>,
}

pub fn normalize_strategy(space: &FiniteSpace, factory: StrategyFactory, basis: Option<Vec<u64>>) -> Normalized {
    let basis = basis.unwrap_or_else(|| space.minimal_basis());
    Normalized { space: space.clone(), factory, basis }
}

impl Normalized {
    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    fn shrink(&self, v: u64, x: usize) -> u64 {
        self.basis.iter().copied().find(|&b| contains(b, x) && is_subset(b, v)).unwrap_or(v)
    }

    /// Shrunk replies of a fresh `σ` along the given I-moves.
    fn replay(&self, moves: &[(u64, usize)]) -> Result<Vec<u64>> {
        let mut s = (self.factory)();
        let mut rounds: Vec<Round> = Vec::with_capacity(moves.len());
        for &(u, x) in moves {
            let v = self.shrink(s.respond(&rounds, u, x)?, x);
            rounds.push(Round { u, x, v });
        }
        Ok(rounds.into_iter().map(|r| r.v).collect())
    }
}

impl StrategyII for Normalized {
    fn name(&self) -> String {
        format!("normalize({})", (self.factory)().name())
    }

    fn respond(&mut self, prior: &[Round], u: u64, x: usize) -> Result<u64> {
        let mut moves: Vec<(u64, usize)> = Vec::with_capacity(prior.len() + 1);
        for r in prior {
            let mut found = None;
            for cand in bits(r.v) {
                moves.push((r.u, cand));
                if self.replay(&moves)?.last() == Some(&r.v) {
                    found = Some(cand);
                    break;
                }
                moves.pop();
            }
            if found.is_none() {
                return Err(Error::SideGameIllegal("no earlier point reproduces the recorded move".into()));
            }
        }
        moves.push((u, x));
        Ok(*self.replay(&moves)?.last().expect("nonempty"))
    }
}

pub const MAX_TREE_NODES: usize = 200_000;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TreeReport {
    pub depth: usize,
    pub nodes: usize,
    pub branches: usize,
    /// Branches whose last answer is the minimal neighbourhood of a point.
    pub assigned: usize,
    pub surjective: bool,
    /// `f(N_t)` equals the union of II's possible answers at every odd node.
    pub open_ok: bool,
    /// Every assigned point lies in every open set I played on its branch.
    pub continuous_ok: bool,
    /// Maximal branches as basis-index sequences with their points.
    pub branch_points: Vec<(Vec<usize>, Option<usize>)>,
}

impl TreeReport {
    pub fn passed(&self) -> bool {
        self.surjective && self.open_ok && self.continuous_ok
    }
}

/// The tree of basis-index sequences `(t_0, t_0', …)` that are legal runs of
/// `depth` rounds with II following `tau`, and the point each maximal branch
/// converges to.
pub fn extract_tree(tau: &mut Normalized, depth: usize) -> Result<TreeReport> {
    let space = tau.space.clone();
    let basis = tau.basis.clone();
    let mut rep = TreeReport { depth, ..Default::default() };
    // odd node → (basis indices of II's answers)
    let mut answers: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let mut stack: Vec<(Vec<usize>, Vec<Round>)> = vec![(vec![], vec![])];
    while let Some((seq, prior)) = stack.pop() {
        rep.nodes += 1;
        if rep.nodes > MAX_TREE_NODES {
            return Err(Error::TooLarge(rep.nodes, MAX_TREE_NODES));
        }
        if prior.len() == depth {
            let v = prior.last().map_or(space.full(), |r| r.v);
            let z = (0..space.len()).find(|&z| space.up(z) == v);
            rep.branch_points.push((seq, z));
            continue;
        }
        let prev = last_v(&space, &prior);
        for (t, &b) in basis.iter().enumerate() {
            if b == 0 || !is_subset(b, prev) {
                continue;
            }
            let mut odd = seq.clone();
            odd.push(t);
            rep.nodes += 1;
            let mut seen = Vec::new();
            for x in bits(b) {
                let v = tau.respond(&prior, b, x)?;
                let t2 = basis
                    .iter()
                    .position(|&c| c == v)
                    .ok_or_else(|| Error::SideGameIllegal("normalized strategy answered outside the basis".into()))?;
                if seen.contains(&t2) {
                    continue;
                }
                seen.push(t2);
                let mut even = odd.clone();
                even.push(t2);
                let mut next = prior.clone();
                next.push(Round { u: b, x, v });
                stack.push((even, next));
            }
            answers.insert(odd, seen);
        }
    }
    rep.branch_points.sort();
    rep.branches = rep.branch_points.len();
    rep.assigned = rep.branch_points.iter().filter(|(_, z)| z.is_some()).count();
    let hit = rep.branch_points.iter().filter_map(|(_, z)| *z).fold(0u64, |m, z| m | bit(z));
    rep.surjective = hit == space.full();
    rep.continuous_ok = rep.branch_points.iter().all(|(seq, z)| match z {
        Some(z) => seq.iter().step_by(2).all(|&t| contains(basis[t], *z)),
        None => true,
    });
    rep.open_ok = answers.iter().all(|(t, ms)| {
        let image = rep
            .branch_points
            .iter()
            .filter(|(seq, _)| seq.starts_with(t))
            .filter_map(|(_, z)| *z)
            .fold(0u64, |m, z| m | bit(z));
        image == ms.iter().fold(0, |m, &k| m | basis[k])
    });
    Ok(rep)
}

/// A composed strategy for II. Files named in a spec are loaded while
/// parsing, so evaluation is pure.
#[derive(Clone, Debug, PartialEq)]
pub enum StrategySpec {
    Finite,
    Normalize(Box<StrategySpec>),
    /// Relations `[{"A": [labels], "B": [labels]}, ...]` over the inner space.
    Pi02(Value, Box<StrategySpec>),
    Product(Vec<StrategySpec>),
    /// A map in the finite-space map format.
    OpenImage(Value, Box<StrategySpec>),
}

fn split_args(s: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Schema(format!("unbalanced parentheses in {s:?}")));
        }
    }
    if depth != 0 {
        return Err(Error::Schema(format!("unbalanced parentheses in {s:?}")));
    }
    out.push(s[start..].trim());
    Ok(out)
}

/// Parses `finite`, `normalize(S)`, `pi02(rels.json, S)`,
/// `product(S, ...)` and `open-image(f.json, S)`.
pub fn parse_strategy(spec: &str, load: &dyn Fn(&str) -> Result<String>) -> Result<StrategySpec> {
    let spec = spec.trim();
    if spec == "finite" {
        return Ok(StrategySpec::Finite);
    }
    let (head, rest) = spec.split_once('(').ok_or_else(|| Error::Schema(format!("unknown strategy {spec:?}")))?;
    let body = rest.strip_suffix(')').ok_or_else(|| Error::Schema(format!("missing ')' in {spec:?}")))?;
    let args = split_args(body)?;
    let file = |name: &str| -> Result<Value> {
        serde_json::from_str(&load(name)?).map_err(|e| Error::Schema(format!("{name}: {e}")))
    };
    let inner = |a: &str| parse_strategy(a, load).map(Box::new);
    match (head.trim(), args.as_slice()) {
        ("normalize", [a]) => Ok(StrategySpec::Normalize(inner(a)?)),
        ("pi02", [f, a]) => Ok(StrategySpec::Pi02(file(f)?, inner(a)?)),
        ("open-image", [f, a]) => Ok(StrategySpec::OpenImage(file(f)?, inner(a)?)),
        ("product", parts) if !parts.iter().any(|p| p.is_empty()) => {
            Ok(StrategySpec::Product(parts.iter().map(|p| parse_strategy(p, load)).collect::<Result<_>>()?))
        }
        _ => Err(Error::Schema(format!("bad strategy spec {spec:?}"))),
    }
}

fn label_set(space: &FiniteSpace, v: &Value) -> Result<u64> {
    v.as_array().ok_or_else(|| Error::Schema("relation sides are label lists".into()))?.iter().try_fold(0u64, |m, l| {
        let name = l.as_str().ok_or_else(|| Error::Schema("labels are strings".into()))?;
        let x = space.index_of(name).ok_or_else(|| Error::Schema(format!("unknown point {name:?}")))?;
        Ok(m | bit(x))
    })
}

/// The space the game is played on and II's strategy there. `x` is the
/// space for `finite`; products take one copy of `x` per factor.
pub fn build_strategy(spec: &StrategySpec, x: &FiniteSpace) -> Result<(FiniteSpace, Box<dyn StrategyII>)> {
    Ok(match spec {
        StrategySpec::Finite => (x.clone(), Box::new(strat_finite(x))),
        StrategySpec::Normalize(inner) => {
            let (y, _) = build_strategy(inner, x)?;
            let (inner, x2) = ((**inner).clone(), x.clone());
            let factory: StrategyFactory = Arc::new(move || build_strategy(&inner, &x2).expect("built once already").1);
            let s = normalize_strategy(&y, factory, None);
            (y, Box::new(s))
        }
        StrategySpec::Pi02(rels, inner) => {
            let (z, side) = build_strategy(inner, x)?;
            let list = rels.as_array().ok_or_else(|| Error::Schema("relations must be a list".into()))?;
            let masks = list
                .iter()
                .map(|r| {
                    let side = |k: &str| r.get(k).ok_or_else(|| Error::Schema(format!("relation misses {k:?}")));
                    Ok((label_set(&z, side("A")?)?, label_set(&z, side("B")?)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let (y, s) = strat_pi02(&z, &masks, side)?;
            (y, Box::new(s))
        }
        StrategySpec::Product(parts) => {
            let built = parts.iter().map(|p| build_strategy(p, x)).collect::<Result<Vec<_>>>()?;
            let (p, s) = strat_product(built)?;
            (p, Box::new(s))
        }
        StrategySpec::OpenImage(map, inner) => {
            let j: crate::finite::json::MapJson =
                serde_json::from_value(map.clone()).map_err(|e| Error::Schema(e.to_string()))?;
            let f = j.to_map(Some(x))?;
            let (src, side) = build_strategy(inner, f.source())?;
            if !src.is_homeomorphic(f.source()) {
                return Err(Error::Invalid("inner strategy does not play on the source of the map".into()));
            }
            let s = strat_open_image(&f, side)?;
            (f.target().clone(), Box::new(s))
        }
    })
}

/// Player I from a spec: `random:<seed>`, `repeat:<label>` or
/// `script:<label>,<label>,...`.
pub fn player_one(spec: &str, space: &FiniteSpace) -> Result<Box<dyn StrategyI>> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| Error::Schema(format!("bad player spec {spec:?}")))?;
    let point = |l: &str| space.index_of(l.trim()).ok_or_else(|| Error::Schema(format!("unknown point {l:?}")));
    Ok(match kind {
        "random" => {
            let seed = arg.parse().map_err(|_| Error::Schema(format!("bad seed {arg:?}")))?;
            Box::new(RandomI::seeded(space, seed))
        }
        "repeat" => Box::new(RepeatI { first: IMove { u: space.full(), x: point(arg)? } }),
        "script" => {
            Box::new(ScriptI { space: space.clone(), points: arg.split(',').map(point).collect::<Result<_>>()? })
        }
        _ => return Err(Error::Schema(format!("bad player spec {spec:?}"))),
    })
}

/// One round on a metric completion: I plays a formal ball and a point of
/// the line inside it, II a formal ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricRound {
    pub u: Ball,
    pub x: Q,
    pub v: Ball,
}

fn ball_contains(m: &dyn MetricSpace, b: &Ball, x: &Q) -> bool {
    m.coordinate(b.center).is_some_and(|c| (c - x).abs() < b.radius)
}

/// II answers `B(c', 2^{-j})` with `2^{-j} ≤ min(g/2, 2^{-n})`, where `g` is
/// the distance from `x` to the edge of I's ball, and `c'` within
/// `2^{-j-3}` of `x`.
#[derive(Clone, Debug)]
pub struct StratMetric {
    pub space: Arc<dyn MetricSpace>,
}

pub fn strat_metric(space: Arc<dyn MetricSpace>) -> StratMetric {
    StratMetric { space }
}

impl StratMetric {
    pub fn respond(&self, n: usize, u: &Ball, x: &Q) -> Result<Ball> {
        let m = self.space.as_ref();
        let c = m.coordinate(u.center).ok_or_else(|| Error::Invalid("balls need points on the line".into()))?;
        let gap = &u.radius - (c - x).abs();
        let target = (gap / qi(2)).min(two_pow_neg(n as u32));
        let mut j = 0u32;
        while two_pow_neg(j) > target {
            j += 1;
        }
        let center = nearest_center(m, x, j + 3)
            .filter(|&k| (m.coordinate(k).unwrap() - x).abs() <= two_pow_neg(j + 3))
            .ok_or_else(|| Error::Invalid(format!("no center within 2^-{} of {}", j + 3, fmt_q(x))))?;
        Ok(Ball { center, radius: two_pow_neg(j) })
    }
}

/// Random adversary on `[0, 1]`: the first ball is `B(c, 2)` around the
/// first grid point; later ones repeat II's ball, with a random point of
/// the form `c + kr/16` with `|k| ≤ 4`.
pub struct RandomMetricI {
    pub rng: ChaCha8Rng,
}

impl RandomMetricI {
    pub fn seeded(seed: u64) -> RandomMetricI {
        RandomMetricI { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn play(&mut self, m: &dyn MetricSpace, prior: &[MetricRound]) -> (Ball, Q) {
        let u = prior.last().map_or(Ball { center: 0, radius: qi(2) }, |r| r.v.clone());
        let c = m.coordinate(u.center).expect("line points");
        let step: i64 = self.rng.gen_range(0..=8);
        let x = &c + &u.radius * Q::new(BigInt::from(step - 4), BigInt::from(16));
        let x = if x < Q::from_integer(BigInt::from(0)) || x > Q::one() { c } else { x };
        (u, x)
    }
}

pub fn play_metric(
    space: Arc<dyn MetricSpace>,
    si: &mut RandomMetricI,
    sii: &StratMetric,
    rounds: usize,
) -> Result<Vec<MetricRound>> {
    let m = space.as_ref();
    let mut out: Vec<MetricRound> = Vec::new();
    for n in 0..rounds {
        let (u, x) = si.play(m, &out);
        let v = sii.respond(n, &u, &x)?;
        out.push(MetricRound { u, x, v });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetricCertificate {
    pub rounds: usize,
    /// Points inside balls and every ball formally inside the previous one.
    pub legal: bool,
    /// II's `n`-th radius is at most `2^{-n}`.
    pub radius_bound: bool,
    /// II's radius is at most half of I's.
    pub halving: bool,
    /// II's centers satisfy `d(c_n, c_m) ≤ 2^{-n}` for `n < m`.
    pub cauchy: bool,
}

impl MetricCertificate {
    pub fn passed(&self) -> bool {
        self.legal && self.radius_bound && self.halving && self.cauchy
    }
}

pub fn metric_certificate(space: &dyn MetricSpace, h: &[MetricRound]) -> MetricCertificate {
    let legal = h.iter().enumerate().all(|(n, r)| {
        ball_contains(space, &r.u, &r.x)
            && ball_contains(space, &r.v, &r.x)
            && formally_inside(space, &r.v, &r.u, false)
            && (n == 0 || formally_inside(space, &r.u, &h[n - 1].v, false))
    });
    let radius_bound = h.iter().enumerate().all(|(n, r)| r.v.radius <= two_pow_neg(n as u32));
    let halving = h.iter().all(|r| r.v.radius <= &r.u.radius / qi(2));
    let cauchy = (0..h.len())
        .all(|n| (n + 1..h.len()).all(|k| space.dist(h[n].v.center, h[k].v.center) <= two_pow_neg(n as u32)));
    MetricCertificate { rounds: h.len(), legal, radius_bound, halving, cauchy }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copres::metric::DyadicGrid;
    use crate::finite::enumerate::{open_surjections, random_space};

    fn random_i(space: &FiniteSpace, seed: u64) -> RandomI {
        RandomI::seeded(space, seed)
    }

    #[test]
    fn empty_space_and_referee() {
        let e = FiniteSpace::empty();
        let h = play(&e, &mut RepeatI { first: IMove { u: 0, x: 0 } }, &mut strat_finite(&e), 5).unwrap();
        assert!(h.no_move);
        assert_eq!(winner_convergent(&e, &h), Verdict::IiWins);
        let s = FiniteSpace::sierpinski();
        let h = play(&s, &mut random_i(&s, 1), &mut strat_finite(&s), 10).unwrap();
        assert!(referee(&s, &h).is_none() && h.rounds.len() == 10);
        let bad = GameHistory { rounds: vec![Round { u: 0b10, x: 0, v: 0b10 }], ..Default::default() };
        assert_eq!(referee(&s, &bad).unwrap().player, 1);
        assert_eq!(winner_convergent(&s, &bad), Verdict::IiWins);
        let bad2 = GameHistory { rounds: vec![Round { u: 0b11, x: 0, v: 0b10 }], ..Default::default() };
        assert_eq!(winner_convergent(&s, &bad2), Verdict::IWins);
    }

    #[test]
    fn finite_strategy_examples() {
        let s = FiniteSpace::sierpinski();
        let mut zero = RepeatI { first: IMove { u: 0b11, x: 0 } };
        let h = play(&s, &mut zero, &mut strat_finite(&s), 6).unwrap();
        assert!(h.rounds.iter().all(|r| r.v == 0b11));
        assert_eq!(winner_convergent(&s, &h), Verdict::IiWins);
        let mut switch = ScriptI { space: s.clone(), points: vec![0, 1] };
        let h = play(&s, &mut switch, &mut strat_finite(&s), 6).unwrap();
        assert_eq!(h.rounds.last().unwrap().v, 0b10);
        assert_eq!(winner_convergent(&s, &h), Verdict::IiWins);
        let d = FiniteSpace::discrete(3);
        let h = play(&d, &mut RepeatI { first: IMove { u: 0b111, x: 2 } }, &mut strat_finite(&d), 3).unwrap();
        assert_eq!(h.rounds[0].v, 0b100);
    }

    #[test]
    fn random_spaces_finite_wins() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..30 {
            let n = rng.gen_range(1..=8);
            let x = random_space(&mut rng, n);
            let h = play(&x, &mut random_i(&x, k), &mut strat_finite(&x), 3 * n + 4).unwrap();
            assert_eq!(winner_convergent(&x, &h), Verdict::IiWins);
            assert_eq!(winner_strong(&x, &h), Verdict::IiWins);
            let mut distinct: Vec<u64> = h.rounds.iter().map(|r| r.v).collect();
            distinct.dedup();
            assert!(distinct.len() <= n);
        }
    }

    #[test]
    fn pi02_strategy() {
        let s = FiniteSpace::sierpinski();
        let (y, mut st) = strat_pi02(&s, &[], Box::new(strat_finite(&s))).unwrap();
        assert_eq!(y.len(), 2);
        let h = play(&y, &mut random_i(&y, 3), &mut st, 6).unwrap();
        let h2 = play(&s, &mut random_i(&s, 3), &mut strat_finite(&s), 6).unwrap();
        assert_eq!(h.rounds, h2.rounds);
        // ⊤ ⇒ ↑{1}
        let (y, mut st) = strat_pi02(&s, &[(0b11, 0b10)], Box::new(strat_finite(&s))).unwrap();
        assert_eq!(y.len(), 1);
        for seed in 0..10 {
            let h = play(&y, &mut random_i(&y, seed), &mut st, 4).unwrap();
            assert_eq!(winner_convergent(&y, &h), Verdict::IiWins);
            st.side_rounds.clear();
        }
        assert!(st.log.iter().all(|s| s.inside.iter().all(|&(_, ok)| ok)));
    }

    #[test]
    fn product_and_image_strategies() {
        let s = FiniteSpace::sierpinski();
        let (p, mut st) = strat_product(vec![
            (s.clone(), Box::new(strat_finite(&s)) as Box<dyn StrategyII>),
            (s.clone(), Box::new(strat_finite(&s))),
        ])
        .unwrap();
        assert_eq!(p.len(), 4);
        let h = play(&p, &mut random_i(&p, 9), &mut st, 8).unwrap();
        assert_eq!(winner_convergent(&p, &h), Verdict::IiWins);
        assert!(st.m.windows(2).all(|w| w[0] < w[1]));
        let proj = FiniteMap::projection(&s, &s, 0).unwrap();
        let mut st = strat_open_image(&proj, Box::new(strat_finite(&proj.source().clone()))).unwrap();
        let h = play(&s, &mut random_i(&s, 2), &mut st, 6).unwrap();
        assert_eq!(winner_convergent(&s, &h), Verdict::IiWins);
        assert!(st.log.iter().all(|&b| b));
        let x = FiniteSpace::chain(3);
        for f in open_surjections(&x, &s) {
            let mut st = strat_open_image(&f, Box::new(strat_finite(&x))).unwrap();
            let h = play(&s, &mut random_i(&s, 4), &mut st, 6).unwrap();
            assert_eq!(winner_convergent(&s, &h), Verdict::IiWins);
        }
    }

    #[test]
    fn normalization() {
        let c = FiniteSpace::chain(3);
        let cc = c.clone();
        let factory: StrategyFactory = Arc::new(move || Box::new(strat_finite(&cc)));
        let mut tau = normalize_strategy(&c, factory, None);
        let h = play(&c, &mut random_i(&c, 8), &mut tau, 6).unwrap();
        assert_eq!(winner_convergent(&c, &h), Verdict::IiWins);
        // same opens, other earlier points: same answers
        for k in 0..h.rounds.len() {
            let mut alt = h.rounds[..k].to_vec();
            for r in &mut alt {
                r.x = bits(r.v).last().unwrap();
            }
            let a = tau.respond(&h.rounds[..k], h.rounds[k].u, h.rounds[k].x).unwrap();
            let b = tau.respond(&alt, h.rounds[k].u, h.rounds[k].x).unwrap();
            assert_eq!(a, b);
            assert!(tau.basis().contains(&a));
        }
    }

    #[test]
    fn trees() {
        for (x, depth) in [(FiniteSpace::point(), 2), (FiniteSpace::sierpinski(), 3)] {
            let xx = x.clone();
            let factory: StrategyFactory = Arc::new(move || Box::new(strat_finite(&xx)));
            let mut tau = normalize_strategy(&x, factory, None);
            let rep = extract_tree(&mut tau, depth).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert_eq!(rep.assigned, rep.branches);
        }
    }

    #[test]
    fn metric_game() {
        let grid: Arc<dyn MetricSpace> = Arc::new(DyadicGrid { max_exp: None });
        let st = strat_metric(grid.clone());
        for seed in 0..5 {
            let mut i = RandomMetricI::seeded(seed);
            let h = play_metric(grid.clone(), &mut i, &st, 12).unwrap();
            let cert = metric_certificate(grid.as_ref(), &h);
            assert!(cert.passed(), "{cert:?}");
        }
    }

    #[test]
    fn strategy_specs() {
        let s = FiniteSpace::sierpinski();
        let rels = r#"[{"A": ["(0)", "(1)"], "B": ["(1)"]}]"#;
        let load = |name: &str| -> Result<String> {
            match name {
                "rels.json" => Ok(rels.to_string()),
                _ => Err(Error::Schema(format!("no file {name}"))),
            }
        };
        let spec = parse_strategy("normalize(pi02(rels.json, product(finite)))", &load).unwrap();
        let (y, mut st) = build_strategy(&spec, &s).unwrap();
        assert_eq!(y.len(), 1);
        let mut i = player_one("random:4", &y).unwrap();
        let h = play(&y, i.as_mut(), st.as_mut(), 5).unwrap();
        assert_eq!(winner_convergent(&y, &h), Verdict::IiWins);
        let (p, _) = build_strategy(&parse_strategy("product(finite, finite)", &load).unwrap(), &s).unwrap();
        assert_eq!(p.len(), 4);
        for bad in ["nope", "product()", "pi02(missing.json, finite)", "normalize(finite"] {
            assert!(matches!(parse_strategy(bad, &load), Err(Error::Schema(_))), "{bad}");
        }
    }
}
