//! `qpolis demo <name>`: small fixed walkthroughs.

use std::sync::Arc;

use qpolis::copres::metric::{DyadicGrid, MetricSpace};
use qpolis::copres::reals::reals_dedekind;
use qpolis::finite::set_label;
use qpolis::game::{
    history_to_json, metric_certificate, play, play_metric, strat_finite, strat_metric, winner_convergent, RandomI,
    RandomMetricI,
};
use qpolis::points::{check_relations, named_real, rational_stream, separated, separation_fuel, NAMED_REALS};
use qpolis::posite::{default_budget, generic_prime_filter, three_element};
use qpolis::powerspace::powerspace;
use qpolis::rational::q;
use qpolis::verify::RunManifest;
use qpolis::{Error, FiniteSpace};
use serde_json::{json, Value};

use crate::io::{report, CliResult};

const FUEL: u64 = 40;

fn dedekind() -> (bool, Value) {
    let c = reals_dedekind();
    let mut ok = true;
    let reals: Vec<Value> = NAMED_REALS
        .iter()
        .map(|n| {
            let rep = check_relations(&named_real(n).expect("named"), &c, FUEL);
            ok &= rep.violated == 0;
            json!({"real": n, "checked": rep.checked, "pending": rep.pending, "violated": rep.violated})
        })
        .collect();
    let (a, b) = (q(1, 3), q(1, 2));
    let sep = separation_fuel(&a, &b);
    let apart = separated(&rational_stream(&a), &rational_stream(&b), sep.fuel);
    ok &= apart;
    (ok, json!({"fuel": FUEL, "reals": reals, "separation": {"a": "1/3", "b": "1/2", "found": apart, "witness": sep}}))
}

fn generic_filter() -> qpolis::Result<(bool, Value)> {
    let p = three_element();
    let top = 0;
    let g = generic_prime_filter(&p, &|_| true, top, default_budget(&p))?;
    let names = |s: u64| qpolis::bits::bits(s).map(|u| p.labels()[u].clone()).collect::<Vec<_>>();
    let prime = p.prime_filters_brute()?;
    let ok = prime.contains(&g.filter);
    Ok((
        ok,
        json!({
            "posite": p.labels(),
            "filter": names(g.filter),
            "pivots": g.pivots.iter().map(|&u| p.labels()[u].clone()).collect::<Vec<_>>(),
            "prime_filters": prime.iter().map(|&f| names(f)).collect::<Vec<_>>(),
        }),
    ))
}

fn lower_powerspace() -> qpolis::Result<(bool, Value)> {
    let x = FiniteSpace::chain(3);
    let h = powerspace(&x)?;
    let r = h.verify()?;
    let closed: Vec<String> = h.closed_sets()?.iter().map(|&c| set_label(&x, c)).collect();
    Ok((r.passed(), json!({"space": x.labels(), "closed_sets": closed, "report": r})))
}

fn choquet() -> qpolis::Result<(bool, Value)> {
    let x = FiniteSpace::chain(3);
    let mut i = RandomI::seeded(&x, 7);
    let mut ii = strat_finite(&x);
    let h = play(&x, &mut i, &mut ii, 3 * x.len() + 4)?;
    let verdict = winner_convergent(&x, &h);
    let grid: Arc<dyn MetricSpace> = Arc::new(DyadicGrid { max_exp: None });
    let runs = play_metric(grid.clone(), &mut RandomMetricI::seeded(7), &strat_metric(grid.clone()), 8)?;
    let cert = metric_certificate(grid.as_ref(), &runs);
    Ok((
        verdict == qpolis::game::Verdict::IiWins && cert.passed(),
        json!({"finite": {"verdict": verdict, "history": history_to_json(&x, &h)}, "metric": cert}),
    ))
}

pub fn run(name: &str) -> CliResult<bool> {
    let (ok, body) = match name {
        "dedekind" => dedekind(),
        "generic-filter" => generic_filter()?,
        "powerspace" => lower_powerspace()?,
        "choquet" => choquet()?,
        _ => return Err(Error::UnknownDemo(name.into()).into()),
    };
    report(RunManifest::new(&format!("demo {name}"), 0), ok, json!({"demo": name, "result": body}))
}
