//! `qpolis game ...`.

use std::cell::RefCell;
use std::sync::Arc;

use clap::Subcommand;
use qpolis::copres::metric::{DyadicGrid, MetricSpace};
use qpolis::game::{
    build_strategy, extract_tree, history_to_json, metric_certificate, normalize_strategy, parse_strategy, play,
    play_metric, player_one, strat_metric, winner_convergent, winner_strong, RandomMetricI, StrategyFactory,
    StrategySpec, Verdict, MAX_TREE_NODES,
};
use qpolis::rational::fmt_q;
use qpolis::verify::{digest, RunManifest};
use qpolis::Error;
use serde_json::json;

use crate::io::{load_space, read, report, CliResult};

#[derive(Subcommand)]
pub enum GameCmd {
    /// Play II's strategy against player I and judge the run.
    Play {
        #[arg(long)]
        space: String,
        /// finite, normalize(S), pi02(rels.json, S), product(S, ...) or
        /// open-image(map.json, S).
        #[arg(long, default_value = "finite")]
        ii: String,
        /// random:<seed>, repeat:<label> or script:<label>,...
        #[arg(long, default_value = "random:0")]
        i: String,
        /// Defaults to 3|X| + 4.
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Extract the tree of a normalized strategy and check the map it defines.
    Tree {
        #[arg(long)]
        space: String,
        #[arg(long, default_value = "finite")]
        ii: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// II's ball strategy on the completion of the dyadic rationals.
    Metric {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        rounds: usize,
    },
}

fn spec(m: &mut RunManifest, text: &str) -> CliResult<StrategySpec> {
    let files = RefCell::new(Vec::new());
    let load = |p: &str| {
        let t = read(p).map_err(|e| Error::Schema(e.to_string()))?;
        files.borrow_mut().push((p.to_string(), digest(t.as_bytes())));
        Ok(t)
    };
    let s = parse_strategy(text, &load)?;
    for (k, (_, d)) in files.into_inner().into_iter().enumerate() {
        m.inputs.insert(format!("strategy{k}"), d);
    }
    m.param("ii", text);
    Ok(s)
}

pub fn run(c: &GameCmd) -> CliResult<bool> {
    match c {
        GameCmd::Play { space, ii, i, rounds } => {
            let mut m = RunManifest::new("game play", 0);
            let x = load_space(&mut m, space)?;
            let s = spec(&mut m, ii)?;
            let (y, mut sii) = build_strategy(&s, &x)?;
            let mut si = player_one(i, &y)?;
            let rounds = rounds.unwrap_or(3 * y.len() + 4);
            m.param("i", i);
            m.param("rounds", rounds);
            let h = play(&y, si.as_mut(), sii.as_mut(), rounds)?;
            let conv = winner_convergent(&y, &h);
            let strong = winner_strong(&y, &h);
            report(
                m,
                conv != Verdict::IWins,
                json!({
                    "strategy": sii.name(),
                    "points": y.labels(),
                    "convergent": conv,
                    "strong": strong,
                    "history": history_to_json(&y, &h),
                }),
            )
        }
        GameCmd::Tree { space, ii, depth } => {
            let mut m = RunManifest::new("game tree", 0);
            let x = load_space(&mut m, space)?;
            let s = spec(&mut m, ii)?;
            m.param("depth", depth);
            let (y, _) = build_strategy(&s, &x)?;
            let factory: StrategyFactory = {
                let (s, x) = (s.clone(), x.clone());
                Arc::new(move || build_strategy(&s, &x).expect("built once already").1)
            };
            let mut tau = normalize_strategy(&y, factory, None);
            let rep = extract_tree(&mut tau, *depth)?;
            let branches: Vec<_> = rep
                .branch_points
                .iter()
                .map(|(b, p)| json!({"branch": b, "point": p.map(|p| y.label(p).to_string())}))
                .collect();
            report(
                m,
                rep.passed(),
                json!({
                    "nodes": rep.nodes,
                    "branches": rep.branches,
                    "assigned": rep.assigned,
                    "surjective": rep.surjective,
                    "open_ok": rep.open_ok,
                    "continuous_ok": rep.continuous_ok,
                    "max_nodes": MAX_TREE_NODES,
                    "branch_points": branches,
                }),
            )
        }
        GameCmd::Metric { seed, rounds } => {
            let mut m = RunManifest::new("game metric", *seed);
            m.param("rounds", rounds);
            let grid: Arc<dyn MetricSpace> = Arc::new(DyadicGrid { max_exp: None });
            let mut si = RandomMetricI::seeded(*seed);
            let h = play_metric(grid.clone(), &mut si, &strat_metric(grid.clone()), *rounds)?;
            let cert = metric_certificate(grid.as_ref(), &h);
            let ball = |b: &qpolis::copres::metric::Ball| json!({"center": fmt_q(&grid.coordinate(b.center).expect("grid point")), "radius": fmt_q(&b.radius)});
            let hist: Vec<_> = h.iter().map(|r| json!({"U": ball(&r.u), "x": fmt_q(&r.x), "V": ball(&r.v)})).collect();
            report(m, cert.passed(), json!({"certificate": cert, "history": hist}))
        }
    }
}
