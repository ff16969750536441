//! JSON form of copresentations.
//!
//! ```json
//! {"indices": 2, "relations": [{"U": [["0"]], "V": [["1"]]}]}
//! ```
//!
//! `indices` is a count (indices `0..n`), a list of index strings, or
//! `"countable"` together with a `domain` spec. Open codes are lists of
//! basic opens; codes with enumerable parts use
//! `{"finite": [...], "families": [...]}`. Enumerable relation families are
//! listed under `families` by their generator specs.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::borel::BorelCode;
use crate::error::{Error, Result};
use crate::index::{BasicOpen, Index};

use super::build::{LiftFlags, Overlap};
use super::metric::{Ball, BallFamily, BallIndices, BallsWithin, DyadicGrid, LinePoints, MetricFamily, MetricSpace};
use super::reals::{parse_opt_q, CutFamily, CutIndices, CutOpens, Side};
use super::{
    Copresentation, IndexDomain, Mapped, MeetBasic, MeetFamilies, Naturals, OpenCode, OpenFamily, Relation,
    RelationFamily, Retag, TaggedUnion,
};

fn schema(m: impl Into<String>) -> Error {
    Error::Schema(m.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| schema(format!("missing field {key:?}")))
}

fn kind(v: &Value) -> Result<&str> {
    field(v, "kind")?.as_str().ok_or_else(|| schema("kind must be a string"))
}

fn parse_index(v: &Value) -> Result<Index> {
    match v {
        Value::String(s) => s.parse(),
        Value::Number(n) => n
            .as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .map(Index::Nat)
            .ok_or_else(|| schema(format!("bad index {n}"))),
        _ => Err(schema("index must be a string or a natural number")),
    }
}

fn parse_basic(v: &Value) -> Result<BasicOpen> {
    v.as_array().ok_or_else(|| schema("basic open must be a list"))?.iter().map(parse_index).collect()
}

fn basic_json(b: &BasicOpen) -> Value {
    json!(b.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>())
}

fn u32_field(v: &Value, key: &str) -> Result<u32> {
    field(v, key)?
        .as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| schema(format!("{key} must be a natural number")))
}

pub fn metric_from_spec(v: &Value) -> Result<Arc<dyn MetricSpace>> {
    match kind(v)? {
        "dyadic_grid" => {
            let e = match v.get("max_exp") {
                None | Some(Value::Null) => None,
                Some(_) => Some(u32_field(v, "max_exp")?),
            };
            Ok(Arc::new(DyadicGrid { max_exp: e }))
        }
        "line_points" => {
            let pts = field(v, "points")?
                .as_array()
                .ok_or_else(|| schema("points must be a list"))?
                .iter()
                .map(|p| parse_opt_q(p)?.ok_or_else(|| schema("null point")))
                .collect::<Result<_>>()?;
            Ok(Arc::new(LinePoints(pts)))
        }
        k => Err(schema(format!("metric kind {k:?} cannot be read back"))),
    }
}

pub fn domain_from_spec(v: &Value) -> Result<IndexDomain> {
    match v {
        Value::Number(_) => {
            let n = v.as_u64().ok_or_else(|| schema("index count must be a natural number"))?;
            Ok(IndexDomain::Finite((0..n as u32).map(Index::Nat).collect()))
        }
        Value::Array(items) => Ok(IndexDomain::Finite(items.iter().map(parse_index).collect::<Result<_>>()?)),
        Value::Object(_) => match kind(v)? {
            "naturals" => Ok(IndexDomain::Countable(Arc::new(Naturals))),
            "cuts" => Ok(IndexDomain::Countable(Arc::new(CutIndices))),
            "balls" => {
                Ok(IndexDomain::Countable(Arc::new(BallIndices { space: metric_from_spec(field(v, "metric")?)? })))
            }
            "tagged_union" => {
                let parts = field(v, "parts")?
                    .as_array()
                    .ok_or_else(|| schema("parts must be a list"))?
                    .iter()
                    .map(|p| Ok((u32_field(p, "tag")?, domain_from_spec(field(p, "domain")?)?)))
                    .collect::<Result<_>>()?;
                Ok(TaggedUnion::new(parts).into_domain())
            }
            k => Err(schema(format!("unknown domain kind {k:?}"))),
        },
        _ => Err(schema("bad index domain")),
    }
}

pub fn open_family_from_spec(v: &Value) -> Result<Arc<dyn OpenFamily>> {
    Ok(match kind(v)? {
        "cut_opens" => {
            let side = field(v, "side")?.as_str().and_then(Side::parse).ok_or_else(|| schema("bad side"))?;
            Arc::new(CutOpens { side, beyond: parse_opt_q(v.get("beyond").unwrap_or(&Value::Null))? })
        }
        "balls_within" => {
            let outer = field(v, "outer")?
                .as_array()
                .ok_or_else(|| schema("outer must be a list"))?
                .iter()
                .map(|b| Ball::read(&parse_index(b)?).ok_or_else(|| schema("outer entries must be balls")))
                .collect::<Result<_>>()?;
            Arc::new(BallsWithin {
                space: metric_from_spec(field(v, "metric")?)?,
                outer,
                strict: field(v, "strict")?.as_bool().ok_or_else(|| schema("strict must be a boolean"))?,
                below: parse_opt_q(v.get("below").unwrap_or(&Value::Null))?,
            })
        }
        "meet_basic" => Arc::new(MeetBasic {
            inner: open_family_from_spec(field(v, "inner")?)?,
            with: parse_basic(field(v, "with")?)?,
        }),
        "meet" => Arc::new(MeetFamilies {
            left: open_family_from_spec(field(v, "left")?)?,
            right: open_family_from_spec(field(v, "right")?)?,
        }),
        "retag" => Arc::new(Retag { inner: open_family_from_spec(field(v, "inner")?)?, tag: u32_field(v, "tag")? }),
        k => Err(schema(format!("unknown open family {k:?}")))?,
    })
}

pub fn relation_family_from_spec(v: &Value) -> Result<Arc<dyn RelationFamily>> {
    Ok(match kind(v)? {
        "cut" => {
            let f = field(v, "family")?.as_str().and_then(CutFamily::parse).ok_or_else(|| schema("bad cut family"))?;
            Arc::new(f)
        }
        "ball" => {
            let f =
                field(v, "family")?.as_str().and_then(BallFamily::parse).ok_or_else(|| schema("bad ball family"))?;
            Arc::new(MetricFamily { space: metric_from_spec(field(v, "metric")?)?, family: f })
        }
        "mapped" => Arc::new(Mapped {
            inner: relation_family_from_spec(field(v, "inner")?)?,
            tag: match v.get("tag") {
                None | Some(Value::Null) => None,
                Some(_) => Some(u32_field(v, "tag")?),
            },
            guard: parse_basic(field(v, "guard")?)?,
        }),
        "lift_flags" => Arc::new(LiftFlags { domain: domain_from_spec(field(v, "domain")?)? }),
        k => Err(schema(format!("unknown relation family {k:?}")))?,
    })
}

pub fn code_to_json(c: &OpenCode) -> Value {
    let finite: Vec<Value> = c.generators().iter().map(basic_json).collect();
    if c.is_finite() {
        Value::Array(finite)
    } else {
        json!({"finite": finite, "families": c.families().iter().map(|f| f.spec()).collect::<Vec<_>>()})
    }
}

pub fn code_from_json(v: &Value) -> Result<OpenCode> {
    match v {
        Value::Array(items) => Ok(OpenCode::finite(items.iter().map(parse_basic).collect::<Result<_>>()?)),
        Value::Object(_) => {
            let finite = field(v, "finite")?
                .as_array()
                .ok_or_else(|| schema("finite must be a list"))?
                .iter()
                .map(parse_basic)
                .collect::<Result<_>>()?;
            let families = field(v, "families")?
                .as_array()
                .ok_or_else(|| schema("families must be a list"))?
                .iter()
                .map(open_family_from_spec)
                .collect::<Result<_>>()?;
            Ok(OpenCode::from_parts(finite, families))
        }
        _ => Err(schema("open code must be a list or an object")),
    }
}

pub fn relation_to_json(r: &Relation) -> Value {
    json!({"U": code_to_json(&r.antecedent), "V": code_to_json(&r.consequent)})
}

pub fn relation_from_json(v: &Value) -> Result<Relation> {
    Ok(Relation::new(code_from_json(field(v, "U")?)?, code_from_json(field(v, "V")?)?))
}

/// A level-1 code is an open code; higher levels are
/// `{"level": n, "union": [[A, B], ...]}` for `⋃ (A ∖ B)`.
pub fn borel_to_json(c: &BorelCode<OpenCode>) -> Value {
    match c {
        BorelCode::Open(u) => code_to_json(u),
        BorelCode::Union { level, pieces } => json!({
            "level": level,
            "union": pieces.iter().map(|(a, b)| json!([borel_to_json(a), borel_to_json(b)])).collect::<Vec<_>>(),
        }),
    }
}

pub fn borel_from_json(v: &Value) -> Result<BorelCode<OpenCode>> {
    let Some(u) = v.get("union") else { return Ok(BorelCode::Open(code_from_json(v)?)) };
    let level = field(v, "level")?.as_u64().ok_or_else(|| schema("level must be a natural number"))? as usize;
    let pieces = u
        .as_array()
        .ok_or_else(|| schema("union must be a list"))?
        .iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([a, b]) => Ok((borel_from_json(a)?, borel_from_json(b)?)),
            _ => Err(schema("union pieces are pairs")),
        })
        .collect::<Result<_>>()?;
    BorelCode::union(level, pieces).map_err(|e| schema(e.to_string()))
}

/// `{"from": k, "to": l, "region": code, "translate": {"j": code, ...}}`.
pub fn overlap_from_json(v: &Value) -> Result<Overlap> {
    let piece = |key: &str| -> Result<usize> {
        field(v, key)?.as_u64().map(|n| n as usize).ok_or_else(|| schema(format!("{key} must be a piece number")))
    };
    let translate = field(v, "translate")?
        .as_object()
        .ok_or_else(|| schema("translate must be an object"))?
        .iter()
        .map(|(k, c)| Ok((k.parse::<Index>()?, code_from_json(c)?)))
        .collect::<Result<_>>()?;
    Ok(Overlap { from: piece("from")?, to: piece("to")?, region: code_from_json(field(v, "region")?)?, translate })
}

pub fn copres_to_value(c: &Copresentation) -> Value {
    let mut m = Map::new();
    match c.domain() {
        IndexDomain::Finite(v) => {
            let plain = v.iter().enumerate().all(|(k, i)| *i == Index::Nat(k as u32));
            m.insert(
                "indices".into(),
                if plain { json!(v.len()) } else { json!(v.iter().map(|i| i.to_string()).collect::<Vec<_>>()) },
            );
        }
        IndexDomain::Countable(e) => {
            m.insert("indices".into(), json!("countable"));
            m.insert("domain".into(), e.spec());
        }
    }
    m.insert("relations".into(), Value::Array(c.relations().iter().map(relation_to_json).collect()));
    if !c.families().is_empty() {
        m.insert("families".into(), Value::Array(c.families().iter().map(|f| f.spec()).collect()));
    }
    m.insert("provenance".into(), json!(c.provenance()));
    Value::Object(m)
}

pub fn copres_to_json(c: &Copresentation) -> String {
    serde_json::to_string_pretty(&copres_to_value(c)).expect("serializable")
}

pub fn copres_from_value(v: &Value) -> Result<Copresentation> {
    let obj = v.as_object().ok_or_else(|| schema("copresentation must be an object"))?;
    for k in obj.keys() {
        if !["indices", "domain", "relations", "families", "provenance"].contains(&k.as_str()) {
            return Err(schema(format!("unknown field {k:?}")));
        }
    }
    let domain = match field(v, "indices")? {
        Value::String(s) if s == "countable" => domain_from_spec(field(v, "domain")?)?,
        other => domain_from_spec(other)?,
    };
    let relations = match v.get("relations") {
        None => vec![],
        Some(r) => r
            .as_array()
            .ok_or_else(|| schema("relations must be a list"))?
            .iter()
            .map(relation_from_json)
            .collect::<Result<_>>()?,
    };
    let families = match v.get("families") {
        None => vec![],
        Some(f) => f
            .as_array()
            .ok_or_else(|| schema("families must be a list"))?
            .iter()
            .map(relation_family_from_spec)
            .collect::<Result<_>>()?,
    };
    let provenance = match v.get("provenance") {
        None => vec!["json".into()],
        Some(p) => serde_json::from_value(p.clone()).map_err(|e| schema(e.to_string()))?,
    };
    Copresentation::new(domain, relations, families, provenance).map_err(|e| {
        if let Error::Invalid(m) = e {
            schema(m)
        } else {
            e
        }
    })
}

pub fn copres_from_json(text: &str) -> Result<Copresentation> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    copres_from_value(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copres::{lift, metric::metric_completion, product, reals::reals_dedekind, sierpinski_power};

    #[test]
    fn finite_roundtrip() {
        let c = sierpinski_power(2)
            .pi02_subspace(vec![Relation::new(OpenCode::single(Index::Nat(0)), OpenCode::single(Index::Nat(1)))])
            .unwrap();
        let l = lift(&c).unwrap();
        for c in [c, l] {
            let text = copres_to_json(&c);
            let back = copres_from_json(&text).unwrap();
            assert_eq!(back.denotation().unwrap(), c.denotation().unwrap());
            assert_eq!(copres_to_json(&back), text);
        }
    }

    #[test]
    fn family_roundtrip() {
        let g = metric_completion(Arc::new(DyadicGrid { max_exp: Some(3) })).unwrap();
        let p = product(&[reals_dedekind(), lift(&g).unwrap()]).unwrap();
        let text = copres_to_json(&p);
        let back = copres_from_json(&text).unwrap();
        assert_eq!(copres_to_json(&back), text);
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(copres_from_json("{"), Err(Error::Schema(_))));
        assert!(matches!(copres_from_json(r#"{"indices": 1, "bogus": 0}"#), Err(Error::Schema(_))));
        assert!(matches!(
            copres_from_json(r#"{"indices": 1, "relations": [{"U": [["5"]], "V": []}]}"#),
            Err(Error::Schema(_))
        ));
    }
}
