//! `qpolis convert`: move between the three file formats.

use clap::{Args, ValueEnum};
use qpolis::convert::{convert, Format as CoreFormat};

use crate::io::{artifact, read, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    FiniteSpace,
    Copresentation,
    Posite,
}

impl From<Format> for CoreFormat {
    fn from(f: Format) -> CoreFormat {
        match f {
            Format::FiniteSpace => CoreFormat::FiniteSpace,
            Format::Copresentation => CoreFormat::Copresentation,
            Format::Posite => CoreFormat::Posite,
        }
    }
}

#[derive(Args)]
pub struct ConvertArgs {
    input: String,
    #[arg(long, value_enum)]
    from: Format,
    #[arg(long, value_enum)]
    to: Format,
}

pub fn run(a: &ConvertArgs) -> CliResult<bool> {
    artifact(&convert(&read(&a.input)?, a.from.into(), a.to.into())?)
}
