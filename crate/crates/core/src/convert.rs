//! Conversions between the finite-space, copresentation and posite JSON
//! formats.

use std::str::FromStr;

use crate::bits::bits;
use crate::copres::from_finite_space;
use crate::copres::json::{copres_from_json, copres_to_json};
use crate::copres::Copresentation;
use crate::error::{Error, Result};
use crate::finite::json::{space_from_json, space_to_json};
use crate::finite::FiniteSpace;
use crate::posite::{pfilt_space, posite_from_copres, posite_from_json, posite_to_json, Posite};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    FiniteSpace,
    Copresentation,
    Posite,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "finite-space" => Ok(Format::FiniteSpace),
            "copresentation" => Ok(Format::Copresentation),
            "posite" => Ok(Format::Posite),
            _ => Err(Error::Schema(format!("unknown format {s:?}"))),
        }
    }
}

/// The finite space a copresentation denotes.
pub fn denote(c: &Copresentation) -> Result<FiniteSpace> {
    if !c.is_finite() {
        return Err(Error::UnsupportedConversion("a countable copresentation has no finite-space form".into()));
    }
    Ok(c.denotation_space()?.space)
}

/// A copresentation of `x`, checked to denote a space homeomorphic to `x`.
pub fn to_copresentation(x: &FiniteSpace) -> Result<Copresentation> {
    let (c, _) = from_finite_space(x)?;
    if !denote(&c)?.is_homeomorphic(x) {
        return Err(Error::Invalid("copresentation does not denote the input space".into()));
    }
    Ok(c)
}

/// The basic posite on the minimal basis.
pub fn to_posite(x: &FiniteSpace) -> Result<Posite> {
    Ok(posite_from_copres(x, &x.minimal_basis(), None)?.posite)
}

/// Prime filters, each labelled by its elements.
pub fn prime_filter_space(p: &Posite) -> Result<FiniteSpace> {
    let d = pfilt_space(p)?.denotation_space()?;
    let labels = d
        .points
        .iter()
        .map(|&z| format!("{{{}}}", bits(z).map(|u| p.labels()[u].as_str()).collect::<Vec<_>>().join(",")))
        .collect();
    d.space.with_labels(labels)
}

pub fn convert(text: &str, from: Format, to: Format) -> Result<String> {
    use Format::*;
    Ok(match (from, to) {
        (FiniteSpace, FiniteSpace) => space_to_json(&space_from_json(text)?),
        (FiniteSpace, Copresentation) => copres_to_json(&to_copresentation(&space_from_json(text)?)?),
        (FiniteSpace, Posite) => posite_to_json(&to_posite(&space_from_json(text)?)?),
        (Copresentation, FiniteSpace) => space_to_json(&denote(&copres_from_json(text)?)?),
        (Copresentation, Copresentation) => copres_to_json(&copres_from_json(text)?),
        (Copresentation, Posite) => posite_to_json(&to_posite(&denote(&copres_from_json(text)?)?)?),
        (Posite, FiniteSpace) => space_to_json(&prime_filter_space(&posite_from_json(text)?)?),
        (Posite, Copresentation) => copres_to_json(&pfilt_space(&posite_from_json(text)?)?),
        (Posite, Posite) => posite_to_json(&posite_from_json(text)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::enumerate::spaces_up_to;

    #[test]
    fn finite_spaces_survive_every_round_trip() {
        for x in spaces_up_to(4) {
            let text = space_to_json(&x);
            for via in [Format::Copresentation, Format::Posite] {
                let there = convert(&text, Format::FiniteSpace, via).unwrap();
                let back = space_from_json(&convert(&there, via, Format::FiniteSpace).unwrap()).unwrap();
                assert!(back.is_homeomorphic(&x), "{text} via {via:?}");
            }
        }
    }

    #[test]
    fn countable_copresentations_do_not_convert() {
        let reals = copres_to_json(&crate::copres::reals::reals_dedekind());
        assert!(matches!(
            convert(&reals, Format::Copresentation, Format::FiniteSpace),
            Err(Error::UnsupportedConversion(_))
        ));
    }

    #[test]
    fn format_names() {
        assert_eq!("posite".parse::<Format>().unwrap(), Format::Posite);
        assert!("yaml".parse::<Format>().is_err());
    }
}
