//! `qpolis posite ...`.

use clap::{Subcommand, ValueEnum};
use qpolis::bits::bits;
use qpolis::copres::json::copres_to_value;
use qpolis::posite::{
    coidl_space, default_budget, filt_space, generic_prime_filter, pfilt_space, posite_from_copres, posite_to_json,
    upset_space, Posite,
};
use qpolis::verify::RunManifest;
use qpolis::Error;
use serde_json::{json, Map, Value};

use crate::io::{artifact, load_posite, load_space, report, CliResult};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BasisChoice {
    /// The minimal neighborhoods of points.
    Minimal,
    /// Every nonempty open set.
    Opens,
}

#[derive(Subcommand)]
pub enum PositeCmd {
    /// Check the posite axioms.
    Check { posite: String },
    /// Prime filters and the sizes of the derived spaces.
    Spaces {
        posite: String,
        /// Also print each derived copresentation.
        #[arg(long)]
        full: bool,
    },
    /// The basic posite of a finite space.
    FromCopres {
        #[arg(long)]
        space: String,
        #[arg(long, value_enum, default_value_t = BasisChoice::Minimal)]
        basis: BasisChoice,
    },
    /// Build a prime filter inside a coideal, starting from W.
    Generic {
        posite: String,
        #[arg(long)]
        w: String,
        /// `all`, `labels:a,b` (a coideal given by its elements) or
        /// `interior:a,b` (the largest coideal inside a set).
        #[arg(long, default_value = "all")]
        coideal: String,
        #[arg(long)]
        budget: Option<u64>,
    },
}

fn element(p: &Posite, l: &str) -> CliResult<usize> {
    p.labels().iter().position(|x| x == l).ok_or_else(|| Error::Schema(format!("unknown element {l:?}")).into())
}

fn element_set(p: &Posite, list: &str) -> CliResult<u64> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).try_fold(0u64, |m, l| Ok(m | 1 << element(p, l)?))
}

fn names(p: &Posite, set: u64) -> Vec<String> {
    bits(set).map(|u| p.labels()[u].clone()).collect()
}

fn coideal(p: &Posite, spec: &str) -> CliResult<u64> {
    if spec == "all" {
        return Ok(p.full());
    }
    if let Some(list) = spec.strip_prefix("labels:") {
        let a = element_set(p, list)?;
        if !p.is_coideal(a) {
            return Err(Error::Schema(format!("{:?} is not a coideal", names(p, a))).into());
        }
        return Ok(a);
    }
    if let Some(list) = spec.strip_prefix("interior:") {
        return Ok(p.coideal_interior(element_set(p, list)?));
    }
    Err(Error::Schema(format!("bad coideal spec {spec:?}")).into())
}

pub fn run(c: &PositeCmd) -> CliResult<bool> {
    match c {
        PositeCmd::Check { posite } => {
            let mut m = RunManifest::new("posite check", 0);
            let p = load_posite(&mut m, posite)?;
            let r = p.check_axioms();
            let pcpl = r.pcpl.map(|(c, v)| json!({"cover": c, "element": p.labels()[v]}));
            let stab =
                r.stability.as_ref().map(|(c, u, why)| json!({"cover": c, "element": p.labels()[*u], "reason": why}));
            report(m, r.passed(), json!({"size": p.len(), "covers": p.covers().len(), "pcpl": pcpl, "stability": stab}))
        }
        PositeCmd::Spaces { posite, full } => {
            let mut m = RunManifest::new("posite spaces", 0);
            let p = load_posite(&mut m, posite)?;
            let prime = p.prime_filters_brute()?;
            let mut spaces = Map::new();
            let mut ok = true;
            for (name, c) in [
                ("upset", upset_space(&p)?),
                ("filt", filt_space(&p)?),
                ("coidl", coidl_space(&p)?),
                ("pfilt", pfilt_space(&p)?),
            ] {
                let mut entry = Map::new();
                match c.denotation() {
                    Ok(d) => {
                        entry.insert("points".into(), json!(d.len()));
                        if name == "pfilt" {
                            ok &= d == prime;
                        }
                    }
                    Err(e) => {
                        entry.insert("error".into(), json!(e.to_string()));
                    }
                }
                if *full {
                    entry.insert("copresentation".into(), copres_to_value(&c));
                }
                spaces.insert(name.into(), Value::Object(entry));
            }
            let filters: Vec<Vec<String>> = prime.iter().map(|&f| names(&p, f)).collect();
            report(m, ok, json!({"prime_filters": filters, "spaces": spaces}))
        }
        PositeCmd::FromCopres { space, basis } => {
            let mut m = RunManifest::new("posite from-copres", 0);
            let x = load_space(&mut m, space)?;
            let b: Vec<u64> = match basis {
                BasisChoice::Minimal => x.minimal_basis(),
                BasisChoice::Opens => x.opens().iter().copied().filter(|&u| u != 0).collect(),
            };
            artifact(&posite_to_json(&posite_from_copres(&x, &b, None)?.posite))
        }
        PositeCmd::Generic { posite, w, coideal: spec, budget } => {
            let mut m = RunManifest::new("posite generic", 0);
            let p = load_posite(&mut m, posite)?;
            let a = coideal(&p, spec)?;
            let w = element(&p, w)?;
            let budget = budget.unwrap_or_else(|| default_budget(&p));
            m.param("w", &p.labels()[w]);
            m.param("coideal", names(&p, a));
            m.param("budget", budget);
            let g = generic_prime_filter(&p, &|u| a >> u & 1 == 1, w, budget)?;
            let ok = p.is_filter(g.filter)
                && g.filter & !a == 0
                && p.prime_filters_brute().is_ok_and(|f| f.contains(&g.filter));
            report(
                m,
                ok,
                json!({
                    "filter": names(&p, g.filter),
                    "pivots": g.pivots.iter().map(|&u| p.labels()[u].clone()).collect::<Vec<_>>(),
                    "visits": g.visits.len(),
                }),
            )
        }
    }
}
