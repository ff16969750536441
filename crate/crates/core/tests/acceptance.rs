//! Acceptance criteria, one pass/fail line each.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use qpolis::verify::{run_suite, SuiteParams, SuiteReport, SUITES};

const SEED: u64 = 20240611;

struct Run {
    report: SuiteReport,
    elapsed: Duration,
}

fn run_all() -> BTreeMap<&'static str, Run> {
    SUITES
        .iter()
        .map(|&s| {
            let start = Instant::now();
            let report = run_suite(s, &SuiteParams { seed: SEED, ..Default::default() }).expect("known suite");
            (s, Run { report, elapsed: start.elapsed() })
        })
        .collect()
}

fn holds(runs: &BTreeMap<&str, Run>, suite: &str, names: &[&str]) -> (bool, String) {
    let r = &runs[suite].report;
    let mut detail = Vec::new();
    let mut ok = true;
    for n in names {
        match r.assertion(n) {
            Some(a) => {
                ok &= a.passed && a.cases > 0;
                detail.push(format!("{n}: {} cases{}", a.cases, if a.passed { "" } else { " FAILED" }));
                if let Some(c) = &a.counterexample {
                    detail.push(format!("counterexample {c}"));
                }
            }
            None => {
                ok = false;
                detail.push(format!("{n}: missing"));
            }
        }
    }
    (ok, detail.join("; "))
}

#[test]
fn acceptance() {
    let runs = run_all();
    let mut results: Vec<(u32, &str, bool, String)> = Vec::new();
    let mut add = |n: u32, title: &'static str, (ok, d): (bool, String)| results.push((n, title, ok, d));

    // timed part of the posite suite: extraction over random spaces
    let t1 = Instant::now();
    let quick =
        run_suite("posite", &SuiteParams { seed: SEED, max_size: Some(5), instances: Some(200), ..Default::default() })
            .unwrap();
    let t1 = t1.elapsed();
    let (ok, d) = holds(&runs, "posite", &["basic_posite_axioms"]);
    let quick_ok = quick.assertion("basic_posite_axioms").is_some_and(|a| a.passed && a.cases >= 200);
    add(1, "posite axioms and extraction", (ok && quick_ok && t1 < Duration::from_secs(60), format!("{d}; {t1:?}")));
    add(2, "enough points", holds(&runs, "posite", &["generic_prime_filter"]));
    add(3, "ideals and opens", holds(&runs, "posite", &["ideals_opens"]));
    add(4, "lower powerspace", holds(&runs, "powerspace", &["powerspace_lattice", "down_embedding"]));
    add(5, "sobriety", holds(&runs, "oracle", &["sober_bijection"]));
    let (ok, d) = holds(&runs, "baire", &["generic_point_bct"]);
    let t6 = Instant::now();
    let bct = run_suite("baire", &SuiteParams { seed: SEED, max_size: Some(0), ..Default::default() }).unwrap();
    let t6 = t6.elapsed();
    let bct_ok = bct.assertion("generic_point_bct").is_some_and(|a| a.passed && a.cases == 100);
    add(6, "Baire category", (ok && bct_ok && t6 < Duration::from_secs(30), format!("{d}; {t6:?}")));
    add(7, "Pi02 transfer", holds(&runs, "oracle", &["pi02_transfer"]));
    add(8, "category quantifiers", holds(&runs, "baire", &["bairequant_identities", "kuratowski_ulam"]));
    add(
        9,
        "Dedekind reals",
        holds(
            &runs,
            "reals",
            &["rational_streams", "named_reals", "rational_separation", "disjointness_counterexample"],
        ),
    );
    add(10, "metric completion", holds(&runs, "completion", &["grid_streams", "cauchy_limits"]));
    add(
        11,
        "Choquet games",
        holds(
            &runs,
            "game",
            &[
                "finite_strategy",
                "product_strategy",
                "pi02_strategy",
                "open_image_strategy",
                "normalized_strategy",
                "convergent_implies_strong",
            ],
        ),
    );
    add(12, "open surjections", holds(&runs, "powerspace", &["open_surjections"]));
    let again = run_all();
    let same: Vec<&str> =
        SUITES.iter().copied().filter(|s| runs[s].report.to_json() != again[s].report.to_json()).collect();
    add(13, "determinism", (same.is_empty(), format!("differing suites: {same:?}")));

    // written to the process stdout directly so the lines show without --nocapture
    let mut out = std::io::stdout().lock();
    for (s, r) in &runs {
        writeln!(out, "suite {s}: {:?}", r.elapsed).unwrap();
    }
    let mut all = true;
    for (n, title, ok, d) in &results {
        writeln!(out, "criterion {n:>2} {}: {title} ({d})", if *ok { "PASS" } else { "FAIL" }).unwrap();
        all &= ok;
    }
    assert!(all, "some acceptance criteria failed");
}
