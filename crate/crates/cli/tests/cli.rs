use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn qpolis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpolis")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn ok(args: &[&str]) -> Value {
    let out = qpolis(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    json(&out)
}

fn err_kind(args: &[&str]) -> String {
    let out = qpolis(args);
    assert_eq!(out.status.code(), Some(2), "{args:?}");
    let e: Value = serde_json::from_slice(&out.stderr).expect("JSON error on stderr");
    e["error"].as_str().unwrap().to_string()
}

fn tmp(name: &str, contents: &Value) -> String {
    let dir = std::env::temp_dir().join(format!("qpolis-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents.to_string()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn oracle_checks_pass_on_small_inputs() {
    let vee = data("vee.json");
    let map = data("collapse.json");
    for args in [
        vec!["oracle", "sober", "--space", &vee],
        vec!["oracle", "specialization", "--space", &vee],
        vec!["oracle", "baire-measurable", "--space", &vee, "--set", "c"],
        vec!["oracle", "transfer", "--space", &vee, "--set", "a,b"],
        vec!["oracle", "powerspace", "--space", &vee],
        vec!["oracle", "bairequant", "--map", &map],
        vec!["oracle", "kuratowski-ulam", "--map", &map],
        vec!["oracle", "essential", "--map", &map],
        vec!["oracle", "fiber-closure", "--map", &map],
        vec!["oracle", "open-surjection", "--map", &map],
    ] {
        let v = ok(&args);
        assert_eq!(v["passed"], true, "{args:?}");
        assert!(v["manifest"]["inputs"].as_object().is_some_and(|m| !m.is_empty()));
    }
}

#[test]
fn transfer_recovers_the_subset() {
    let v = ok(&["oracle", "transfer", "--space", &data("chain3.json"), "--set", "0,2"]);
    for t in v["transfers"].as_array().unwrap() {
        assert_eq!(t["set"], serde_json::json!(["0", "2"]));
    }
}

#[test]
fn schema_and_usage_errors_exit_2() {
    assert_eq!(err_kind(&["oracle", "sober"]), "SCHEMA_ERROR");
    assert_eq!(err_kind(&["oracle", "sober", "--space", &data("notT0.json")]), "INVALID_INPUT");
    assert_eq!(err_kind(&["oracle", "sober", "--space", "/nonexistent.json"]), "IO_ERROR");
    assert_eq!(err_kind(&["verify", "nope"]), "UNKNOWN_SUITE");
    assert_eq!(err_kind(&["demo", "nope"]), "UNKNOWN_DEMO");
    assert_eq!(err_kind(&["game", "play", "--space", &data("vee.json"), "--ii", "bogus"]), "SCHEMA_ERROR");
    assert_eq!(qpolis(&["oracle", "no-such-check"]).status.code(), Some(2));
}

#[test]
fn failed_checks_exit_1() {
    let out = qpolis(&["posite", "check", &data("bad_posite.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
    // 7/5 and sqrt 2 agree on every rational of small height
    let out = qpolis(&["point", "separate", "--a", "sqrt2", "--b", "7/5", "--fuel", "30"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn space_round_trips_through_copresentation() {
    let vee = data("vee.json");
    let c = ok(&["space", "build", "--space", &vee]);
    let path = tmp("vee_copres.json", &c);
    let x = ok(&["convert", &path, "--from", "copresentation", "--to", "finite-space"]);
    assert_eq!(x["points"].as_array().unwrap().len(), 3);
    let d = ok(&["space", "denote", &path]);
    assert_eq!(d["points"].as_array().unwrap().len(), 3);
    let back = ok(&["convert", &vee, "--from", "finite-space", "--to", "copresentation"]);
    assert_eq!(back, c);
}

#[test]
fn conversions_between_formats() {
    let three = data("three.json");
    let x = ok(&["convert", &three, "--from", "posite", "--to", "finite-space"]);
    assert_eq!(x["points"], serde_json::json!(["{top,a}", "{top,b}"]));
    let c = ok(&["convert", &three, "--from", "posite", "--to", "copresentation"]);
    assert_eq!(c["indices"], 3);
    let p = ok(&["convert", &data("chain3.json"), "--from", "finite-space", "--to", "posite"]);
    assert_eq!(p["carrier"].as_array().unwrap().len(), 3);
    let reals = ok(&["space", "reals"]);
    let path = tmp("reals.json", &reals);
    assert_eq!(
        err_kind(&["convert", &path, "--from", "copresentation", "--to", "finite-space"]),
        "UNSUPPORTED_CONVERSION"
    );
}

#[test]
fn builders_denote_expected_sizes() {
    let two = data("two.json");
    let count = |c: &Value| {
        let p = tmp("built.json", c);
        ok(&["convert", &p, "--from", "copresentation", "--to", "finite-space"])["points"].as_array().unwrap().len()
    };
    assert_eq!(count(&ok(&["space", "product", &two, &two])), 9);
    assert_eq!(count(&ok(&["space", "union", &two, &two])), 6);
    assert_eq!(count(&ok(&["space", "lift", &two])), 4);
    assert_eq!(count(&ok(&["space", "glue", "--pieces", &two, &two, "--overlaps", &data("overlaps.json")])), 3);
    let adj = ok(&["space", "adjoin", &two, "--codes", &data("codes_pair.json")]);
    assert_eq!(count(&adj), 3);
    let adj_path = tmp("adjoined.json", &adj);
    let join = ok(&["space", "join", &two, "--finer", &adj_path, "--translation", &data("translation.json")]);
    assert_eq!(count(&join), 3);
    let refined = ok(&["space", "refine", &two, "--codes", &data("codes.json")]);
    let p = tmp("refined.json", &refined);
    let x = ok(&["convert", &p, "--from", "copresentation", "--to", "finite-space"]);
    // the complement of the top open set becomes open
    assert_eq!(x["opens"].as_array().unwrap().len(), 6);
}

#[test]
fn posite_commands() {
    let three = data("three.json");
    assert_eq!(ok(&["posite", "check", &three])["passed"], true);
    let s = ok(&["posite", "spaces", &three]);
    assert_eq!(s["spaces"]["pfilt"]["points"], 2);
    let g = ok(&["posite", "generic", &three, "--w", "top", "--coideal", "interior:top,b"]);
    assert_eq!(g["filter"], serde_json::json!(["top", "b"]));
    assert_eq!(err_kind(&["posite", "generic", &three, "--w", "top", "--coideal", "labels:top"]), "SCHEMA_ERROR");
    let p = ok(&["posite", "from-copres", "--space", &data("vee.json"), "--basis", "opens"]);
    assert_eq!(p["carrier"].as_array().unwrap().len(), 4);
}

#[test]
fn point_commands() {
    let v = ok(&["point", "check", "--real", "sqrt2", "--fuel", "20"]);
    assert_eq!(v["check"]["violated"], 0);
    let v = ok(&["point", "check", "--rational", "-3/4", "--fuel", "20"]);
    assert_eq!(v["check"]["violated"], 0);
    ok(&["point", "check", "--grid", "3/8", "--max-exp", "4", "--fuel", "20"]);
    ok(&["point", "check", "--copres", &data("two.json"), "--indices", "0,1"]);
    let s = ok(&["point", "separate", "--a", "1/3", "--b", "1/2"]);
    assert_eq!(s["pivot"], "2/5");
    let l = ok(&["point", "limit", "--x", "1/3", "--n", "4", "--fuel", "60"]);
    assert!(l["limit"]["depth"].as_u64().is_some());
    ok(&["point", "cylinder", "--prefix", "0,1,2", "--m", "3"]);
}

#[test]
fn violated_point_exits_1() {
    // {0} is not a point of `two.json`: 0 forces 1
    let mut c: Value = serde_json::from_str(&std::fs::read_to_string(data("two.json")).unwrap()).unwrap();
    c["relations"][0]["V"] = serde_json::json!([]);
    let p = tmp("no_zero.json", &c);
    let out = qpolis(&["point", "check", "--copres", &p, "--indices", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["check"]["violated"], 1);
}

#[test]
fn powerspace_commands() {
    let vee = data("vee.json");
    let f = ok(&["powerspace", "show", "--space", &vee]);
    assert_eq!(f["points"].as_array().unwrap().len(), 5);
    assert_eq!(ok(&["powerspace", "verify", "--space", &vee])["passed"], true);
    assert_eq!(ok(&["powerspace", "open-surj", "--map", &data("collapse.json")])["passed"], true);
    assert_eq!(ok(&["powerspace", "essential", "--map", &data("collapse.json")])["passed"], true);
}

#[test]
fn games_are_won_by_ii() {
    let chain = data("chain3.json");
    let sierpinski = data("sierpinski.json");
    let vee = data("vee.json");
    let pi02 = format!("pi02({}, finite)", data("rels.json"));
    let image = format!("open-image({}, finite)", data("collapse.json"));
    for (space, ii) in [
        (chain.as_str(), "finite"),
        (chain.as_str(), "normalize(finite)"),
        (chain.as_str(), pi02.as_str()),
        (sierpinski.as_str(), "product(finite, finite)"),
        (vee.as_str(), image.as_str()),
    ] {
        for seed in 0..5 {
            let i = format!("random:{seed}");
            let v = ok(&["game", "play", "--space", space, "--ii", ii, "--i", &i]);
            assert_eq!(v["convergent"], "ii_wins", "{ii} seed {seed}");
            assert_eq!(v["strong"], "ii_wins");
            assert!(!v["manifest"]["inputs"].as_object().unwrap().is_empty());
        }
    }
    let t = ok(&["game", "tree", "--space", &vee, "--depth", "3"]);
    assert_eq!(t["surjective"], true);
    let m = ok(&["game", "metric", "--seed", "3", "--rounds", "10"]);
    assert_eq!(m["certificate"]["cauchy"], true);
}

#[test]
fn verify_is_deterministic() {
    let a = qpolis(&["verify", "oracle", "--seed", "5", "--max-size", "3"]);
    let b = qpolis(&["verify", "oracle", "--seed", "5", "--max-size", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["suite"], "oracle");
}

#[test]
fn demos_pass() {
    for d in ["dedekind", "generic-filter", "powerspace", "choquet"] {
        assert_eq!(ok(&["demo", d])["passed"], true, "{d}");
    }
}
