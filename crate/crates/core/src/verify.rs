//! Batch suites: seeded, exhaustive or randomized runs of every checkable
//! property, with a manifest that pins the inputs of a run.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bits::{bit, bits, contains, full, is_subset, submasks};
use crate::copres::metric::{dyadic_at, metric_completion, DyadicGrid, MetricSpace};
use crate::copres::reals::reals_dedekind;
use crate::copres::OpenCode;
use crate::error::{Error, Result};
use crate::finite::enumerate::{all_open_maps, continuous_maps, open_surjections, random_space, spaces_up_to};
use crate::finite::{
    down_map, is_baire_measurable, pi02_transfer, verify_bairequant_identities, verify_kuratowski_ulam, FiniteMap,
    FiniteSpace, TransferData, WChoice,
};
use crate::game::{
    extract_tree, metric_certificate, normalize_strategy, play, play_metric, strat_finite, strat_metric,
    strat_open_image, strat_pi02, strat_product, winner_convergent, winner_strong, GameHistory, RandomI, RandomMetricI,
    StrategyFactory, StrategyII, Verdict,
};
use crate::index::{BasicOpen, Index};
use crate::points::{
    cauchy_limit, check_relations, cylinder_image, named_real, rational_stream, ConstantStream, MetricStream,
    PointStream, Status, NAMED_REALS,
};
use crate::posite::{
    closed_oracle, default_budget, generic_point_bct, generic_prime_filter, ideal_to_open, open_to_ideal, pfilt_space,
    posite_from_copres, random_posite, Posite,
};
use crate::powerspace::{down_closed_sets, essential_check_via_powerspace, open_surj_embedding, powerspace};
use crate::rational::{fmt_q, q, simplest_between, Q};

pub const SUITES: [&str; 7] = ["oracle", "posite", "powerspace", "baire", "game", "reals", "completion"];

/// Explicit budgets of a run; unset fields take the suite defaults.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteParams {
    pub seed: u64,
    pub max_size: Option<usize>,
    pub instances: Option<usize>,
    pub fuel: Option<u64>,
    pub rounds: Option<usize>,
}

/// One checked property.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub counterexample: Option<Value>,
}

impl Assertion {
    fn new(name: &str) -> Self {
        Assertion { name: name.into(), passed: true, cases: 0, counterexample: None }
    }

    fn expect(&mut self, ok: bool, detail: impl FnOnce() -> Value) -> bool {
        self.cases += 1;
        if !ok && self.passed {
            self.passed = false;
            self.counterexample = Some(detail());
        }
        ok
    }

    /// Records an error as a failed case.
    fn ok<T>(&mut self, r: Result<T>, detail: impl FnOnce() -> Value) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.expect(false, || json!({"error": e.to_string(), "case": detail()}));
                None
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub assertions: usize,
    pub failed: usize,
    pub passed: bool,
}

/// Everything a run depends on, plus its outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub seed: u64,
    pub params: BTreeMap<String, Value>,
    pub outcome: Option<Outcome>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest { command: command.into(), inputs: BTreeMap::new(), seed, params: BTreeMap::new(), outcome: None }
    }

    pub fn input(&mut self, name: &str, bytes: &[u8]) {
        self.inputs.insert(name.into(), digest(bytes));
    }

    pub fn param(&mut self, name: &str, v: impl Serialize) {
        self.params.insert(name.into(), serde_json::to_value(v).expect("serializable"));
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub manifest: RunManifest,
    pub assertions: Vec<Assertion>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

struct Ctx {
    rng: ChaCha8Rng,
    max_size: usize,
    instances: usize,
    fuel: u64,
    rounds: Option<usize>,
}

/// Runs a suite. Unknown names give [`Error::UnknownSuite`].
pub fn run_suite(name: &str, params: &SuiteParams) -> Result<SuiteReport> {
    let (max_size, instances, fuel) = match name {
        "oracle" => (5, 0, 0),
        "posite" => (8, 200, 0),
        "powerspace" => (5, 0, 0),
        "baire" => (4, 100, 0),
        "game" => (8, 100, 0),
        "reals" => (0, 1000, 50),
        "completion" => (6, 0, 50),
        other => return Err(Error::UnknownSuite(other.into())),
    };
    let mut ctx = Ctx {
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        max_size: params.max_size.unwrap_or(max_size),
        instances: params.instances.unwrap_or(instances),
        fuel: params.fuel.unwrap_or(fuel),
        rounds: params.rounds,
    };
    let mut manifest = RunManifest::new(&format!("verify {name}"), params.seed);
    manifest.param("max_size", ctx.max_size);
    manifest.param("instances", ctx.instances);
    manifest.param("fuel", ctx.fuel);
    manifest.param("rounds", ctx.rounds);
    let assertions = match name {
        "oracle" => suite_oracle(&mut ctx),
        "posite" => suite_posite(&mut ctx),
        "powerspace" => suite_powerspace(&mut ctx),
        "baire" => suite_baire(&mut ctx),
        "game" => suite_game(&mut ctx),
        "reals" => suite_reals(&mut ctx),
        _ => suite_completion(&mut ctx),
    };
    let failed = assertions.iter().filter(|a| !a.passed).count();
    manifest.outcome = Some(Outcome { assertions: assertions.len(), failed, passed: failed == 0 });
    Ok(SuiteReport { suite: name.into(), manifest, assertions })
}

fn space_json(x: &FiniteSpace) -> Value {
    serde_json::from_str(&crate::finite::json::space_to_json(x)).expect("valid json")
}

fn map_json(f: &FiniteMap) -> Value {
    json!({"source": space_json(f.source()), "target": space_json(f.target()), "graph": f.graph()})
}

fn suite_oracle(ctx: &mut Ctx) -> Vec<Assertion> {
    let spaces = spaces_up_to(ctx.max_size);
    let small = spaces_up_to(ctx.max_size.min(4));
    let mut sober = Assertion::new("sober_bijection");
    for x in &spaces {
        let irr = x.irreducible_closed_sets();
        let Some(w) = sober.ok(x.sober_witness(), || space_json(x)) else { continue };
        let mut pts: Vec<usize> = w.iter().map(|&(_, p)| p).collect();
        pts.sort_unstable();
        let bij = w.len() == irr.len() && pts == (0..x.len()).collect::<Vec<_>>();
        let gen = w.iter().all(|&(f, p)| x.closure_of_point(p) == f);
        sober.expect(bij && gen, || space_json(x));
    }
    let mut transfer = Assertion::new("pi02_transfer");
    for x in &small {
        for y in submasks(x.full()) {
            for choice in [WChoice::Smallest, WChoice::Largest] {
                let case = || json!({"space": space_json(x), "Y": y, "choice": format!("{choice:?}")});
                let Some(data) = transfer.ok(TransferData::canonical(x, y, choice, x.minimal_basis()), case) else {
                    continue;
                };
                let Some(r) = transfer.ok(pi02_transfer(x, y, &data), case) else { continue };
                let comp = r.complement.eval(x);
                transfer.expect(r.set == y && comp == Ok(x.full() & !y), case);
            }
        }
    }
    let mut measurable = Assertion::new("baire_measurable");
    for x in &small {
        for a in submasks(x.full()) {
            measurable.expect(is_baire_measurable(x, a), || json!({"space": space_json(x), "A": a}));
        }
    }
    let mut down = Assertion::new("down_map_diamond");
    for x in &spaces {
        let Some((lp, f)) = down.ok(down_map(x), || space_json(x)) else { continue };
        for &u in x.opens() {
            down.expect(f.preimage(lp.diamond(u)) == u, || json!({"space": space_json(x), "U": u}));
        }
    }
    vec![sober, transfer, measurable, down]
}

/// A random basis of `x`: the minimal basis plus some other opens.
fn random_basis(rng: &mut ChaCha8Rng, x: &FiniteSpace) -> Vec<u64> {
    let mut basis = x.minimal_basis();
    for &o in x.opens() {
        if !basis.contains(&o) && rng.gen_bool(0.3) && basis.len() < 12 {
            basis.push(o);
        }
    }
    basis.sort_unstable();
    basis
}

fn posite_json(p: &Posite) -> Value {
    serde_json::from_str(&crate::posite::posite_to_json(p)).expect("valid json")
}

fn check_ideals(a: &mut Assertion, p: &Posite, expected_opens: Option<usize>) {
    let case = || posite_json(p);
    let Some(pts) = a.ok(pfilt_space(p).and_then(|c| c.denotation()), case) else { return };
    if pts.len() > 20 {
        return;
    }
    let ideals: Vec<u64> = submasks(p.full()).filter(|&i| p.is_ideal(i)).collect();
    let opens: Vec<u64> = submasks(full(pts.len())).filter(|&o| open_to_ideal(p, &pts, o).is_ok()).collect();
    a.expect(
        ideals.len() == opens.len() && expected_opens.is_none_or(|n| n == opens.len()),
        || json!({"posite": case(), "ideals": ideals.len(), "opens": opens.len()}),
    );
    for &i in &ideals {
        let back = ideal_to_open(p, &pts, i).and_then(|o| open_to_ideal(p, &pts, o));
        a.expect(back == Ok(i), || json!({"posite": case(), "ideal": i}));
    }
    for &o in &opens {
        let back = open_to_ideal(p, &pts, o).and_then(|i| ideal_to_open(p, &pts, i));
        a.expect(back == Ok(o), || json!({"posite": case(), "open": o}));
    }
}

fn suite_posite(ctx: &mut Ctx) -> Vec<Assertion> {
    let space_cap = ctx.max_size.min(5);
    let mut axioms = Assertion::new("basic_posite_axioms");
    for _ in 0..ctx.instances {
        let n = ctx.rng.gen_range(1..=space_cap.max(1));
        let x = random_space(&mut ctx.rng, n);
        let basis = random_basis(&mut ctx.rng, &x);
        let case = || json!({"space": space_json(&x), "basis": basis});
        let Some(bp) = axioms.ok(posite_from_copres(&x, &basis, None), case) else { continue };
        let rep = bp.posite.check_axioms();
        let Some(mut pts) = axioms.ok(pfilt_space(&bp.posite).and_then(|c| c.denotation()), case) else {
            continue;
        };
        let mut emb = bp.embedding(&x);
        pts.sort_unstable();
        emb.sort_unstable();
        axioms.expect(
            rep.passed() && bp.is_subcanonical() && pts == emb,
            || json!({"case": case(), "axioms": rep, "subcanonical": bp.is_subcanonical()}),
        );
    }
    let mut generic = Assertion::new("generic_prime_filter");
    let mut done = 0;
    while done < ctx.instances {
        let p = random_posite(&mut ctx.rng, ctx.max_size.max(1), 12);
        let a = p.coideal_interior(ctx.rng.gen::<u64>() & p.full());
        let members: Vec<usize> = bits(a).collect();
        let Some(&w) = members.choose(&mut ctx.rng) else { continue };
        done += 1;
        let case = || json!({"posite": posite_json(&p), "coideal": a, "W": w});
        let Some(g) = generic.ok(generic_prime_filter(&p, &|u| contains(a, u), w, default_budget(&p)), case) else {
            continue;
        };
        let Some(brute) = generic.ok(p.prime_filters_brute(), case) else { continue };
        let x = g.filter;
        let ok = p.is_filter(x) && p.is_coideal(x) && contains(x, w) && is_subset(x, a) && brute.contains(&x);
        generic.expect(ok, || json!({"case": case(), "filter": x}));
    }
    let mut ideals = Assertion::new("ideals_opens");
    for x in spaces_up_to(space_cap) {
        if let Some(bp) = ideals.ok(posite_from_copres(&x, &x.minimal_basis(), None), || space_json(&x)) {
            check_ideals(&mut ideals, &bp.posite, Some(x.opens().len()));
        }
    }
    for _ in 0..ctx.instances.min(100) {
        let p = random_posite(&mut ctx.rng, ctx.max_size.clamp(1, 6), 12);
        check_ideals(&mut ideals, &p, None);
    }
    vec![axioms, generic, ideals]
}

fn suite_powerspace(ctx: &mut Ctx) -> Vec<Assertion> {
    let spaces = spaces_up_to(ctx.max_size);
    let mut lattice = Assertion::new("powerspace_lattice");
    let mut down = Assertion::new("down_embedding");
    for x in &spaces {
        let Some(h) = lattice.ok(powerspace(x), || space_json(x)) else { continue };
        if let Some(rep) = lattice.ok(h.verify(), || space_json(x)) {
            lattice.expect(rep.passed(), || json!({"space": space_json(x), "report": rep}));
        }
        let irr = x.irreducible_closed_sets();
        let mut image: Vec<u64> = (0..x.len()).map(|p| x.closure_of_point(p)).collect();
        image.sort_unstable();
        image.dedup();
        if let Some(d) = down.ok(down_closed_sets(&h), || space_json(x)) {
            down.expect(d == irr && irr == image, || json!({"space": space_json(x), "denoted": d, "irreducible": irr}));
        }
    }
    let small = spaces_up_to(ctx.max_size.min(4));
    let mut surj = Assertion::new("open_surjections");
    for a in &small {
        for b in &small {
            for f in open_surjections(a, b) {
                if let Some(rep) = surj.ok(open_surj_embedding(&f), || map_json(&f)) {
                    surj.expect(rep.passed(), || json!({"map": map_json(&f), "report": rep}));
                }
            }
        }
    }
    let tiny = spaces_up_to(ctx.max_size.min(3));
    let mut essential = Assertion::new("essential_maps");
    for a in &tiny {
        for b in &tiny {
            for f in continuous_maps(a, b) {
                if let Some(rep) = essential.ok(essential_check_via_powerspace(&f), || map_json(&f)) {
                    essential.expect(rep.agree() && rep.direct, || map_json(&f));
                }
            }
        }
    }
    vec![lattice, down, surj, essential]
}

/// Dense opens of `F = ↓points` in `S^n`, as finite codes.
fn random_dense_open(rng: &mut ChaCha8Rng, n: usize, points: &[u64]) -> Option<OpenCode> {
    let f = closed_oracle(points.to_vec());
    for _ in 0..50 {
        let k = rng.gen_range(1..=4);
        let gens: Vec<u64> = (0..k).map(|_| rng.gen::<u64>() & full(n) & rng.gen::<u64>()).collect();
        // dense in F: every point of F lies below a point of F inside U
        let dense = submasks(full(n)).filter(|&s| f(s)).all(|s| gens.iter().any(|&t| f(s | t)));
        if dense {
            let basics = gens.iter().map(|&t| bits(t).map(|i| Index::Nat(i as u32)).collect::<BasicOpen>()).collect();
            return Some(OpenCode::finite(basics));
        }
    }
    None
}

fn code_masks(c: &OpenCode) -> Vec<u64> {
    c.generators()
        .iter()
        .map(|b| {
            b.indices().iter().fold(0, |m, i| match i {
                Index::Nat(k) => m | bit(*k as usize),
                _ => m,
            })
        })
        .collect()
}

fn suite_baire(ctx: &mut Ctx) -> Vec<Assertion> {
    let mut quant = Assertion::new("bairequant_identities");
    let mut ku = Assertion::new("kuratowski_ulam");
    let maps = all_open_maps(ctx.max_size).unwrap_or_default();
    for f in &maps {
        if let Some(r) = quant.ok(verify_bairequant_identities(f), || map_json(f)) {
            quant.expect(r.passed(), || json!({"map": map_json(f), "report": r}));
        }
        if let Some(r) = ku.ok(verify_kuratowski_ulam(f), || map_json(f)) {
            ku.expect(r.passed(), || json!({"map": map_json(f), "report": r}));
        }
    }
    let mut bct = Assertion::new("generic_point_bct");
    for _ in 0..ctx.instances {
        let n = ctx.rng.gen_range(1..=10);
        let k = ctx.rng.gen_range(1..=4);
        let points: Vec<u64> = (0..k).map(|_| ctx.rng.gen::<u64>() & full(n)).collect();
        let m = ctx.rng.gen_range(0..=20);
        let opens: Vec<OpenCode> = (0..m).filter_map(|_| random_dense_open(&mut ctx.rng, n, &points)).collect();
        let f = closed_oracle(points.clone());
        let masks: Vec<Vec<u64>> = opens.iter().map(code_masks).collect();
        let in_all = |x: u64| masks.iter().all(|g| g.iter().any(|&t| is_subset(t, x)));
        let brute = submasks(full(n)).any(|x| f(x) && in_all(x));
        let case = || json!({"n": n, "F": points, "opens": masks});
        match generic_point_bct(n, &f, &opens, opens.len()) {
            Ok(x) => bct.expect(brute && f(x) && in_all(x), || json!({"case": case(), "x": x})),
            Err(e) => bct.expect(!brute, || json!({"case": case(), "error": e.to_string()})),
        };
    }
    let mut cyl = Assertion::new("baire_cylinders");
    for _ in 0..ctx.instances.min(20) {
        let len = ctx.rng.gen_range(0..=6);
        let prefix: Vec<u64> = (0..len).map(|_| ctx.rng.gen_range(0..3)).collect();
        let (img, pred) = cylinder_image(&prefix, 4);
        cyl.expect(img == pred, || json!({"prefix": prefix, "image": img, "predicted": pred}));
    }
    vec![quant, ku, bct, cyl]
}

fn finite_factory(x: &FiniteSpace) -> StrategyFactory {
    let x = x.clone();
    Arc::new(move || Box::new(strat_finite(&x)))
}

fn random_i(ctx: &mut Ctx, x: &FiniteSpace) -> RandomI {
    RandomI { space: x.clone(), rng: ChaCha8Rng::seed_from_u64(ctx.rng.gen()), settle: x.len() + 2 }
}

fn rounds_for(ctx: &Ctx, x: &FiniteSpace) -> usize {
    ctx.rounds.unwrap_or(3 * x.len() + 4)
}

/// Plays one run and records the winning checks.
fn judge(
    win: &mut Assertion,
    implies: &mut Assertion,
    x: &FiniteSpace,
    s: &mut dyn StrategyII,
    i: &mut RandomI,
    rounds: usize,
) -> Option<GameHistory> {
    let h = win.ok(play(x, i, s, rounds), || space_json(x))?;
    let c = winner_convergent(x, &h);
    let st = winner_strong(x, &h);
    win.expect(c == Verdict::IiWins, || json!({"space": space_json(x), "strategy": s.name(), "history": h}));
    implies.expect(c != Verdict::IiWins || st == Verdict::IiWins, || json!({"space": space_json(x), "history": h}));
    Some(h)
}

fn suite_game(ctx: &mut Ctx) -> Vec<Assertion> {
    let mut finite = Assertion::new("finite_strategy");
    let mut implies = Assertion::new("convergent_implies_strong");
    for _ in 0..ctx.instances {
        let n = ctx.rng.gen_range(1..=ctx.max_size.max(1));
        let x = random_space(&mut ctx.rng, n);
        for _ in 0..10 {
            let mut i = random_i(ctx, &x);
            let rounds = rounds_for(ctx, &x);
            if let Some(h) = judge(&mut finite, &mut implies, &x, &mut strat_finite(&x), &mut i, rounds) {
                let mut vs: Vec<u64> = h.rounds.iter().map(|r| r.v).collect();
                vs.dedup();
                finite.expect(vs.len() <= x.len(), || json!({"space": space_json(&x), "distinct": vs}));
            }
        }
    }
    let mut product = Assertion::new("product_strategy");
    for _ in 0..ctx.instances.min(50) {
        let r = ctx.rng.gen_range(1..=3);
        let parts: Vec<(FiniteSpace, Box<dyn StrategyII>)> = (0..r)
            .map(|_| {
                let n = ctx.rng.gen_range(1..=2);
                let f = random_space(&mut ctx.rng, n);
                let s: Box<dyn StrategyII> = Box::new(strat_finite(&f));
                (f, s)
            })
            .collect();
        let Some((p, mut s)) = product.ok(strat_product(parts), || json!({"factors": r})) else { continue };
        let mut i = random_i(ctx, &p);
        let rounds = rounds_for(ctx, &p);
        judge(&mut product, &mut implies, &p, &mut s, &mut i, rounds);
        product.expect(s.m.windows(2).all(|w| w[0] < w[1]) && s.m.iter().all(|&m| m >= r), || json!({"m": s.m}));
    }
    let mut pi02 = Assertion::new("pi02_strategy");
    for _ in 0..ctx.instances.min(50) {
        let n = ctx.rng.gen_range(1..=ctx.max_size.clamp(1, 6));
        let x = random_space(&mut ctx.rng, n);
        let k = ctx.rng.gen_range(0..=3);
        let rels: Vec<(u64, u64)> = (0..k)
            .map(|_| {
                let a = *x.opens().choose(&mut ctx.rng).unwrap();
                let b = *x.opens().choose(&mut ctx.rng).unwrap();
                (a, b)
            })
            .collect();
        let Some((y, mut s)) = pi02.ok(strat_pi02(&x, &rels, Box::new(strat_finite(&x))), || space_json(&x)) else {
            continue;
        };
        let mut i = random_i(ctx, &y);
        let rounds = rounds_for(ctx, &y);
        judge(&mut pi02, &mut implies, &y, &mut s, &mut i, rounds);
        let inside = s.log.iter().all(|st| st.inside.iter().all(|&(_, ok)| ok));
        pi02.expect(inside, || json!({"space": space_json(&x), "relations": rels, "log": s.log}));
    }
    let mut image = Assertion::new("open_image_strategy");
    let small = spaces_up_to(ctx.max_size.min(4));
    let surj: Vec<FiniteMap> = small
        .iter()
        .flat_map(|a| small.iter().flat_map(move |b| open_surjections(a, b)))
        .filter(|f| !f.target().is_empty())
        .collect();
    for _ in 0..ctx.instances.min(50) {
        let Some(f) = surj.choose(&mut ctx.rng).cloned() else { break };
        let Some(mut s) = image.ok(strat_open_image(&f, Box::new(strat_finite(f.source()))), || map_json(&f)) else {
            continue;
        };
        let y = f.target().clone();
        let mut i = random_i(ctx, &y);
        let rounds = rounds_for(ctx, &y);
        judge(&mut image, &mut implies, &y, &mut s, &mut i, rounds);
        image.expect(s.log.iter().all(|&b| b), || json!({"map": map_json(&f), "log": s.log}));
    }
    let mut normal = Assertion::new("normalized_strategy");
    for _ in 0..ctx.instances.min(30) {
        let n = ctx.rng.gen_range(1..=ctx.max_size.clamp(1, 5));
        let x = random_space(&mut ctx.rng, n);
        let mut tau = normalize_strategy(&x, finite_factory(&x), None);
        let mut i = random_i(ctx, &x);
        let rounds = rounds_for(ctx, &x);
        let Some(h) = judge(&mut normal, &mut implies, &x, &mut tau, &mut i, rounds) else { continue };
        for k in 0..h.rounds.len() {
            let mut alt = h.rounds[..k].to_vec();
            for r in &mut alt {
                let pts: Vec<usize> = bits(r.v).collect();
                r.x = *pts.choose(&mut ctx.rng).unwrap();
            }
            let (u, x0) = (h.rounds[k].u, h.rounds[k].x);
            let a = tau.respond(&h.rounds[..k], u, x0);
            let b = tau.respond(&alt, u, x0);
            let basic = a.as_ref().is_ok_and(|v| tau.basis().contains(v));
            normal.expect(a.is_ok() && a == b && basic, || json!({"space": space_json(&x), "history": h, "round": k}));
        }
    }
    let mut trees = Assertion::new("tree_extraction");
    for (x, depth) in spaces_up_to(ctx.max_size.min(2))
        .into_iter()
        .map(|x| (x, 3))
        .chain(spaces_up_to(ctx.max_size.min(3)).into_iter().filter(|x| x.len() == 3).map(|x| (x, 2)))
    {
        if x.is_empty() {
            continue;
        }
        let mut tau = normalize_strategy(&x, finite_factory(&x), None);
        if let Some(rep) = trees.ok(extract_tree(&mut tau, depth), || space_json(&x)) {
            trees.expect(rep.passed(), || json!({"space": space_json(&x), "report": rep}));
        }
    }
    let mut metric = Assertion::new("metric_strategy");
    let grid: Arc<dyn MetricSpace> = Arc::new(DyadicGrid { max_exp: None });
    let sm = strat_metric(grid.clone());
    for _ in 0..ctx.instances.min(20) {
        let mut i = RandomMetricI::seeded(ctx.rng.gen());
        let rounds = ctx.rounds.unwrap_or(12).min(12);
        if let Some(h) = metric.ok(play_metric(grid.clone(), &mut i, &sm, rounds), || json!({})) {
            let cert = metric_certificate(grid.as_ref(), &h);
            metric.expect(cert.passed(), || json!({"certificate": cert}));
        }
    }
    vec![finite, product, pi02, image, normal, trees, metric, implies]
}

fn random_rational(rng: &mut ChaCha8Rng) -> Q {
    q(rng.gen_range(-60..=60), rng.gen_range(1..=20))
}

fn suite_reals(ctx: &mut Ctx) -> Vec<Assertion> {
    let c = reals_dedekind();
    let fuel = ctx.fuel;
    let rats: Vec<Q> = (0..ctx.instances).map(|_| random_rational(&mut ctx.rng)).collect();
    let mut streams = Assertion::new("rational_streams");
    for r in &rats {
        let rep = check_relations(&rational_stream(r), &c, fuel);
        streams.expect(rep.violated == 0, || json!({"rational": fmt_q(r), "report": rep}));
    }
    let mut named = Assertion::new("named_reals");
    for name in NAMED_REALS {
        let s = named_real(name).expect("known name");
        let rep = check_relations(&s, &c, fuel);
        named.expect(rep.violated == 0, || json!({"real": name, "report": rep}));
    }
    let mut sep = Assertion::new("rational_separation");
    for pair in rats.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a == b {
            continue;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let s = crate::points::separation_fuel(lo, hi);
        let p = simplest_between(lo, hi);
        // the step at the documented fuel already emits the pivot
        let ok = rational_stream(lo).emit(s.fuel).contains(&Index::Upper(p.clone()))
            && rational_stream(hi).emit(s.fuel).contains(&Index::Lower(p));
        sep.expect(ok, || json!({"a": fmt_q(lo), "b": fmt_q(hi), "separation": s}));
    }
    let mut disjoint = Assertion::new("disjointness_counterexample");
    let half = q(1, 2);
    let bad = ConstantStream([Index::Lower(half.clone()), Index::Upper(half)].into_iter().collect());
    let rep = check_relations(&bad, &c, 5);
    let found = rep.entries.iter().any(|e| e.status == Status::Violated && e.source == "disjoint");
    disjoint.expect(found, || json!({"report": rep}));
    vec![streams, named, sep, disjoint]
}

fn suite_completion(ctx: &mut Ctx) -> Vec<Assertion> {
    let max_exp = ctx.max_size.min(20) as u32;
    let grid: Arc<dyn MetricSpace> = Arc::new(DyadicGrid { max_exp: Some(max_exp) });
    let mut streams = Assertion::new("grid_streams");
    let mut limits = Assertion::new("cauchy_limits");
    let Some(c) = streams.ok(metric_completion(grid.clone()), || json!({"max_exp": max_exp})) else {
        return vec![streams, limits];
    };
    let denom = 1i64 << max_exp;
    for k in 0..=denom {
        let x = q(k, denom);
        let p = MetricStream::dyadic(Some(max_exp), x.clone());
        let rep = check_relations(&p, &c, ctx.fuel);
        streams.expect(rep.violated == 0, || json!({"point": fmt_q(&x), "report": rep}));
        let lim = cauchy_limit(&p, &c, 16, ctx.fuel);
        let ok = lim.as_ref().is_ok_and(|l| (dyadic_at(l.center) - &x).abs() <= q(1, 16));
        limits.expect(ok, || json!({"point": fmt_q(&x), "limit": format!("{lim:?}")}));
    }
    let mut off = Assertion::new("off_grid_streams");
    let line = metric_completion(Arc::new(DyadicGrid { max_exp: None }));
    if let Some(line) = off.ok(line, || json!({})) {
        for x in [q(1, 3), q(2, 7), q(5, 9)] {
            let rep = check_relations(&MetricStream::dyadic(None, x.clone()), &line, ctx.fuel);
            off.expect(rep.violated == 0, || json!({"point": fmt_q(&x), "report": rep}));
        }
    }
    vec![streams, limits, off]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert_eq!(run_suite("nope", &SuiteParams::default()).unwrap_err(), Error::UnknownSuite("nope".into()));
    }

    #[test]
    fn manifest_digest_is_stable() {
        assert_eq!(digest(b""), "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        let mut m = RunManifest::new("verify oracle", 1);
        m.input("space", b"{}");
        assert_eq!(m.inputs["space"], digest(b"{}"));
    }

    #[test]
    fn small_suites_pass_and_repeat() {
        let p = SuiteParams { seed: 3, max_size: Some(3), instances: Some(5), ..Default::default() };
        for s in ["oracle", "powerspace", "posite"] {
            let a = run_suite(s, &p).unwrap();
            assert!(a.passed(), "{}", a.to_json());
            assert_eq!(a.to_json(), run_suite(s, &p).unwrap().to_json());
        }
    }
}
