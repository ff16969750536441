//! `qpolis space ...`: copresentation constructions. Builders print the
//! resulting copresentation JSON as it is.

use std::collections::BTreeMap;
use std::sync::Arc;

use clap::Subcommand;
use qpolis::copres::json::{borel_from_json, copres_to_json, overlap_from_json};
use qpolis::copres::metric::{metric_completion, DyadicGrid};
use qpolis::copres::reals::reals_dedekind;
use qpolis::copres::{
    adjoin_delta02, disjoint_union, from_finite_space, glue, join_topologies, lift, mask_label, product, sigma_refine,
};
use qpolis::finite::json::space_to_json;
use qpolis::verify::RunManifest;
use qpolis::{Error, Index};
use serde_json::{json, Value};

use crate::io::{artifact, load_copres, load_space, parse_json, read_input, report, CliResult};

#[derive(Subcommand)]
pub enum SpaceCmd {
    /// Copresentation of a finite space.
    Build {
        #[arg(long)]
        space: String,
    },
    /// Finite product of copresentations.
    Product {
        #[arg(required = true, num_args = 1..)]
        parts: Vec<String>,
    },
    /// Disjoint union of copresentations.
    Union {
        #[arg(required = true, num_args = 1..)]
        parts: Vec<String>,
    },
    /// Adjoin a bottom point.
    Lift { copres: String },
    /// Glue open pieces along overlap data.
    Glue {
        #[arg(long, required = true, num_args = 1..)]
        pieces: Vec<String>,
        /// JSON list of overlaps.
        #[arg(long)]
        overlaps: String,
    },
    /// Make sets open, each given by level-2 codes for it and its complement.
    Adjoin {
        copres: String,
        /// JSON list of `[A, complement]` code pairs.
        #[arg(long)]
        codes: String,
    },
    /// Join finer topologies on a finite base.
    Join {
        base: String,
        #[arg(long, required = true)]
        finer: Vec<String>,
        /// One JSON object `{"base index": "finer index"}` per `--finer`.
        #[arg(long, required = true)]
        translation: Vec<String>,
    },
    /// Refine so that the given Borel codes become open.
    Refine {
        copres: String,
        /// JSON list of Borel codes.
        #[arg(long)]
        codes: String,
        /// Also write the index translation and the new open codes here.
        #[arg(long)]
        details: Option<String>,
    },
    /// Dedekind reals.
    Reals,
    /// Completion of the dyadic rationals in [0, 1].
    Completion {
        /// Cap the grid at denominator 2^max_exp.
        #[arg(long)]
        max_exp: Option<u32>,
    },
    /// Brute-force denotation of a finite copresentation.
    Denote { copres: String },
}

fn load_all(m: &mut RunManifest, paths: &[String]) -> CliResult<Vec<qpolis::Copresentation>> {
    paths.iter().enumerate().map(|(k, p)| load_copres(m, &format!("part{k}"), p)).collect()
}

fn json_list(text: &str, what: &str) -> CliResult<Vec<Value>> {
    match parse_json(text)? {
        Value::Array(v) => Ok(v),
        _ => Err(Error::Schema(format!("{what} must be a JSON list")).into()),
    }
}

pub fn run(c: &SpaceCmd) -> CliResult<bool> {
    let mut m = RunManifest::new("space denote", 0);
    let out = match c {
        SpaceCmd::Build { space } => from_finite_space(&load_space(&mut m, space)?)?.0,
        SpaceCmd::Product { parts } => product(&load_all(&mut m, parts)?)?,
        SpaceCmd::Union { parts } => disjoint_union(&load_all(&mut m, parts)?)?,
        SpaceCmd::Lift { copres } => lift(&load_copres(&mut m, "copres", copres)?)?,
        SpaceCmd::Glue { pieces, overlaps } => {
            let pieces = load_all(&mut m, pieces)?;
            let ov = json_list(&read_input(&mut m, "overlaps", overlaps)?, "overlaps")?
                .iter()
                .map(overlap_from_json)
                .collect::<qpolis::Result<Vec<_>>>()?;
            glue(&pieces, &ov)?
        }
        SpaceCmd::Adjoin { copres, codes } => {
            let base = load_copres(&mut m, "copres", copres)?;
            let pairs = json_list(&read_input(&mut m, "codes", codes)?, "codes")?
                .iter()
                .map(|p| match p.as_array().map(Vec::as_slice) {
                    Some([a, b]) => Ok((borel_from_json(a)?, borel_from_json(b)?)),
                    _ => Err(Error::Schema("each entry must be a pair [A, complement]".into())),
                })
                .collect::<qpolis::Result<Vec<_>>>()?;
            adjoin_delta02(&base, &pairs)?
        }
        SpaceCmd::Join { base, finer, translation } => {
            if finer.len() != translation.len() {
                return Err(Error::Schema("give one --translation per --finer".into()).into());
            }
            let base = load_copres(&mut m, "base", base)?;
            let mut parts = Vec::new();
            for (k, (f, t)) in finer.iter().zip(translation).enumerate() {
                let fc = load_copres(&mut m, &format!("finer{k}"), f)?;
                let tr: BTreeMap<String, String> =
                    serde_json::from_str(&read_input(&mut m, &format!("translation{k}"), t)?)
                        .map_err(|e| Error::Schema(e.to_string()))?;
                let tr = tr
                    .iter()
                    .map(|(a, b)| Ok((a.parse::<Index>()?, b.parse::<Index>()?)))
                    .collect::<qpolis::Result<BTreeMap<_, _>>>()?;
                parts.push((fc, tr));
            }
            join_topologies(&base, &parts)?
        }
        SpaceCmd::Refine { copres, codes, details } => {
            let base = load_copres(&mut m, "copres", copres)?;
            let codes = json_list(&read_input(&mut m, "codes", codes)?, "codes")?
                .iter()
                .map(borel_from_json)
                .collect::<qpolis::Result<Vec<_>>>()?;
            let r = sigma_refine(&base, &codes)?;
            if let Some(path) = details {
                let d = json!({
                    "translation": r.translation.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect::<BTreeMap<_, _>>(),
                    "opens": r.opens.iter().map(qpolis::copres::json::code_to_json).collect::<Vec<_>>(),
                });
                std::fs::write(path, serde_json::to_string_pretty(&d).expect("serializable"))
                    .map_err(|e| crate::io::CliError::Io(format!("{path}: {e}")))?;
            }
            r.copres
        }
        SpaceCmd::Reals => reals_dedekind(),
        SpaceCmd::Completion { max_exp } => metric_completion(Arc::new(DyadicGrid { max_exp: *max_exp }))?,
        SpaceCmd::Denote { copres } => {
            let c = load_copres(&mut m, "copres", copres)?;
            let d = c.denotation_space()?;
            let idx = c.indices().unwrap_or_default();
            let points: Vec<String> = d.points.iter().map(|&z| mask_label(idx, z)).collect();
            let space: Value = serde_json::from_str(&space_to_json(&d.space)).expect("valid JSON");
            return report(m, true, json!({"points": points, "space": space}));
        }
    };
    artifact(&copres_to_json(&out))
}
