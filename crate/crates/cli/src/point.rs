//! `qpolis point ...`: point streams against their copresentations.

use std::collections::BTreeSet;

use clap::{Args, Subcommand};
use qpolis::copres::metric::{metric_completion, DyadicGrid};
use qpolis::copres::reals::reals_dedekind;
use qpolis::index::Index;
use qpolis::points::{
    cauchy_limit, check_relations, cylinder_image, named_real, observed, rational_stream, separation_fuel,
    ConstantStream, MetricStream, PointStream, NAMED_REALS,
};
use qpolis::rational::{fmt_q, parse_q};
use qpolis::verify::RunManifest;
use qpolis::{Copresentation, Error};
use serde_json::json;

use crate::io::{load_copres, report, CliResult};

#[derive(Args)]
pub struct Which {
    /// A named real (sqrt2, golden, e, pi, one_third).
    #[arg(long, group = "point")]
    real: Option<String>,
    /// A rational such as -3/4, as a Dedekind real.
    #[arg(long, group = "point", allow_hyphen_values = true)]
    rational: Option<String>,
    /// A dyadic rational of [0, 1] in the metric completion.
    #[arg(long, group = "point", allow_hyphen_values = true)]
    grid: Option<String>,
    /// Comma-separated indices of a finite point of `--copres`.
    #[arg(long, group = "point", requires = "copres")]
    indices: Option<String>,
    #[arg(long)]
    copres: Option<String>,
    #[arg(long)]
    max_exp: Option<u32>,
}

#[derive(Subcommand)]
pub enum PointCmd {
    /// Check a point stream against every relation up to some fuel.
    Check {
        #[command(flatten)]
        which: Which,
        #[arg(long, default_value_t = 50)]
        fuel: u64,
    },
    /// Find where two reals differ. Each is a rational or a named real.
    Separate {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Needed unless both are rationals.
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// A grid point within 1/2n of the limit of a completion stream.
    Limit {
        #[arg(long)]
        x: String,
        #[arg(long)]
        max_exp: Option<u32>,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 50)]
        fuel: u64,
    },
    /// Image of a Baire-space cylinder in the Sierpinski power, below index m.
    Cylinder {
        /// Comma-separated naturals.
        #[arg(long, value_delimiter = ',')]
        prefix: Vec<u64>,
        #[arg(long)]
        m: u32,
    },
}

fn real_stream(s: &str) -> CliResult<(Box<dyn PointStream>, Option<qpolis::rational::Q>)> {
    if let Some(r) = named_real(s) {
        return Ok((Box::new(r), None));
    }
    let x = parse_q(s).map_err(|_| Error::Schema(format!("{s:?} is neither a rational nor one of {NAMED_REALS:?}")))?;
    Ok((Box::new(rational_stream(&x)), Some(x)))
}

fn stream(m: &mut RunManifest, w: &Which) -> CliResult<(Box<dyn PointStream>, Copresentation)> {
    if let Some(r) = &w.real {
        let s = named_real(r).ok_or_else(|| Error::Schema(format!("unknown real {r:?}; known: {NAMED_REALS:?}")))?;
        return Ok((Box::new(s), reals_dedekind()));
    }
    if let Some(r) = &w.rational {
        return Ok((Box::new(rational_stream(&parse_q(r)?)), reals_dedekind()));
    }
    if let Some(g) = &w.grid {
        let c = metric_completion(std::sync::Arc::new(DyadicGrid { max_exp: w.max_exp }))?;
        return Ok((Box::new(MetricStream::dyadic(w.max_exp, parse_q(g)?)), c));
    }
    if let (Some(list), Some(path)) = (&w.indices, &w.copres) {
        let c = load_copres(m, "copres", path)?;
        let point: BTreeSet<Index> =
            list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect::<qpolis::Result<_>>()?;
        return Ok((Box::new(ConstantStream(point)), c));
    }
    Err(Error::Schema("give one of --real, --rational, --grid or --indices".into()).into())
}

pub fn run(c: &PointCmd) -> CliResult<bool> {
    match c {
        PointCmd::Check { which, fuel } => {
            let mut m = RunManifest::new("point check", 0);
            m.param("fuel", fuel);
            let (p, copres) = stream(&mut m, which)?;
            let rep = check_relations(p.as_ref(), &copres, *fuel);
            let ok = rep.violated == 0;
            report(m, ok, json!({"stream": p.describe(), "check": rep}))
        }
        PointCmd::Separate { a, b, fuel } => {
            let mut m = RunManifest::new("point separate", 0);
            let (sa, qa) = real_stream(a)?;
            let (sb, qb) = real_stream(b)?;
            let (fuel, pivot) = match (qa, qb, fuel) {
                (_, _, Some(f)) => (*f, None),
                (Some(x), Some(y), None) if x != y => {
                    let s = separation_fuel(&x, &y);
                    (s.fuel, Some(s.pivot))
                }
                (Some(_), Some(_), None) => (0, None),
                _ => return Err(Error::Schema("--fuel is needed for named reals".into()).into()),
            };
            m.param("fuel", fuel);
            let oa = observed(sa.as_ref(), fuel);
            let ob = observed(sb.as_ref(), fuel);
            let only_a: Vec<String> = oa.difference(&ob).map(|i| i.to_string()).collect();
            let only_b: Vec<String> = ob.difference(&oa).map(|i| i.to_string()).collect();
            let ok = !only_a.is_empty() || !only_b.is_empty();
            report(m, ok, json!({"fuel": fuel, "pivot": pivot, "only_a": only_a, "only_b": only_b}))
        }
        PointCmd::Limit { x, max_exp, n, fuel } => {
            let mut m = RunManifest::new("point limit", 0);
            m.param("n", n);
            m.param("fuel", fuel);
            if *n == 0 {
                return Err(Error::Schema("n must be positive".into()).into());
            }
            let grid = std::sync::Arc::new(DyadicGrid { max_exp: *max_exp });
            let c = metric_completion(grid)?;
            let x = parse_q(x)?;
            let p = MetricStream::dyadic(*max_exp, x.clone());
            let lim = cauchy_limit(&p, &c, *n, *fuel)?;
            let center = qpolis::copres::metric::dyadic_at(lim.center);
            report(m, true, json!({"x": fmt_q(&x), "limit": lim, "center_value": fmt_q(&center)}))
        }
        PointCmd::Cylinder { prefix, m: below } => {
            let mut m = RunManifest::new("point cylinder", 0);
            m.param("prefix", prefix);
            m.param("m", below);
            if *below > 16 {
                return Err(Error::TooLarge(*below as usize, 16).into());
            }
            let (image, predicted) = cylinder_image(prefix, *below);
            let ok = image == predicted;
            report(m, ok, json!({"image": image, "predicted": predicted}))
        }
    }
}
