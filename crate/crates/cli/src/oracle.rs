//! `qpolis oracle <check>`: brute-force checks on one finite space or map.

use clap::{Args, ValueEnum};
use qpolis::finite::{
    is_baire_measurable, pi02_transfer, set_label, verify_bairequant_identities, verify_kuratowski_ulam, FiniteMap,
    TransferData, VerifyReport, WChoice,
};
use qpolis::powerspace::{
    essential_check_via_powerspace, open_surj_embedding, openmap_fiber_closure_check, powerspace,
};
use qpolis::verify::RunManifest;
use serde_json::{json, Value};

use crate::io::{label_set, labels, load_map, load_space, report, CliError, CliResult};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Check {
    Sober,
    Specialization,
    BaireMeasurable,
    Transfer,
    Bairequant,
    KuratowskiUlam,
    Essential,
    FiberClosure,
    OpenSurjection,
    Powerspace,
}

#[derive(Args)]
pub struct OracleArgs {
    pub check: Check,
    /// Finite space JSON.
    #[arg(long)]
    pub space: Option<String>,
    /// Finite map JSON (map checks).
    #[arg(long)]
    pub map: Option<String>,
    /// Comma-separated labels of a subset of the space.
    #[arg(long)]
    pub set: Option<String>,
}

fn need<'a>(v: &'a Option<String>, flag: &str) -> CliResult<&'a str> {
    v.as_deref().ok_or_else(|| CliError::Core(qpolis::Error::Schema(format!("--{flag} is required"))))
}

fn verify_json(r: &VerifyReport) -> Value {
    json!({"check": r.check, "cases": r.cases, "counterexample": r.counterexample})
}

fn load_map_arg(m: &mut RunManifest, a: &OracleArgs) -> CliResult<FiniteMap> {
    let ambient = match &a.space {
        Some(p) => Some(load_space(m, p)?),
        None => None,
    };
    load_map(m, need(&a.map, "map")?, ambient.as_ref())
}

pub fn run(a: &OracleArgs) -> CliResult<bool> {
    let name = a.check.to_possible_value().expect("no skipped variants");
    let mut m = RunManifest::new(&format!("oracle {}", name.get_name()), 0);
    match a.check {
        Check::Sober => {
            let x = load_space(&mut m, need(&a.space, "space")?)?;
            match x.sober_witness() {
                Ok(w) => {
                    let pairs: Vec<Value> =
                        w.iter().map(|&(f, p)| json!({"closed": labels(&x, f), "generic": x.label(p)})).collect();
                    report(m, true, json!({"irreducible_closed": pairs}))
                }
                Err(e) => report(m, false, json!({"error": e.to_string()})),
            }
        }
        Check::Specialization => {
            let x = load_space(&mut m, need(&a.space, "space")?)?;
            let pairs: Vec<[&str; 2]> = x.specialization().iter().map(|&(p, q)| [x.label(p), x.label(q)]).collect();
            report(m, true, json!({"leq": pairs}))
        }
        Check::BaireMeasurable => {
            let x = load_space(&mut m, need(&a.space, "space")?)?;
            let s = label_set(&x, need(&a.set, "set")?)?;
            m.param("set", labels(&x, s));
            let ok = is_baire_measurable(&x, s);
            report(m, ok, json!({"baire_measurable": ok}))
        }
        Check::Transfer => {
            let x = load_space(&mut m, need(&a.space, "space")?)?;
            let y = label_set(&x, need(&a.set, "set")?)?;
            m.param("set", labels(&x, y));
            let mut results = Vec::new();
            let mut ok = true;
            for (choice, key) in [(WChoice::Smallest, "smallest"), (WChoice::Largest, "largest")] {
                let data = TransferData::canonical(&x, y, choice, x.minimal_basis())?;
                match pi02_transfer(&x, y, &data) {
                    Ok(r) => results.push(json!({
                        "w": key,
                        "A": labels(&x, r.a),
                        "B": r.b.iter().map(|&b| labels(&x, b)).collect::<Vec<_>>(),
                        "set": labels(&x, r.set),
                    })),
                    Err(e) => {
                        ok = false;
                        results.push(json!({"w": key, "error": e.to_string()}));
                    }
                }
            }
            report(m, ok, json!({"transfers": results}))
        }
        Check::Bairequant | Check::KuratowskiUlam => {
            let f = load_map_arg(&mut m, a)?;
            let r = match a.check {
                Check::Bairequant => verify_bairequant_identities(&f)?,
                _ => verify_kuratowski_ulam(&f)?,
            };
            report(m, r.passed(), verify_json(&r))
        }
        Check::Essential => {
            let f = load_map_arg(&mut m, a)?;
            let r = essential_check_via_powerspace(&f)?;
            report(m, r.agree() && r.direct, serde_json::to_value(r).expect("serializable"))
        }
        Check::FiberClosure => {
            let f = load_map_arg(&mut m, a)?;
            let r = openmap_fiber_closure_check(&f, true)?;
            let witness = r.witness.map(|y| f.target().label(y).to_string());
            report(m, r.holds, json!({"open": f.is_open_map(), "holds": r.holds, "witness": witness}))
        }
        Check::OpenSurjection => {
            let f = load_map_arg(&mut m, a)?;
            let r = open_surj_embedding(&f)?;
            report(m, r.passed(), serde_json::to_value(&r).expect("serializable"))
        }
        Check::Powerspace => {
            let x = load_space(&mut m, need(&a.space, "space")?)?;
            let h = powerspace(&x)?;
            let r = h.verify()?;
            let closed: Vec<String> = h.closed_sets()?.iter().map(|&c| set_label(&x, c)).collect();
            let basis: Vec<Vec<String>> = h.basis().iter().map(|&b| labels(&x, b)).collect();
            report(
                m,
                r.passed(),
                json!({
                    "basis": basis,
                    "closed_sets": closed,
                    "report": serde_json::to_value(&r).expect("serializable"),
                }),
            )
        }
    }
}
