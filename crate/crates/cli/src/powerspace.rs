//! `qpolis powerspace ...`.

use clap::Subcommand;
use qpolis::finite::json::space_to_json;
use qpolis::finite::lower_powerspace;
use qpolis::verify::RunManifest;

use crate::io::{artifact, load_space, CliResult};
use crate::oracle::{self, Check, OracleArgs};

#[derive(Subcommand)]
pub enum PowerspaceCmd {
    /// Print the lower powerspace of a finite space as a finite space.
    Show {
        #[arg(long)]
        space: String,
    },
    /// Check the lower powerspace against its coideal presentation.
    Verify {
        #[arg(long)]
        space: String,
    },
    /// Embed the target of an open surjection into the powerspace of its source.
    OpenSurj {
        #[arg(long)]
        map: String,
        /// Source space, when the map file names only the graph.
        #[arg(long)]
        space: Option<String>,
    },
    /// Essentiality of a map, directly and through the powerspace.
    Essential {
        #[arg(long)]
        map: String,
        #[arg(long)]
        space: Option<String>,
    },
}

pub fn run(c: &PowerspaceCmd) -> CliResult<bool> {
    let (check, space, map) = match c {
        PowerspaceCmd::Show { space } => {
            let mut m = RunManifest::new("powerspace show", 0);
            let x = load_space(&mut m, space)?;
            return artifact(&space_to_json(&lower_powerspace(&x)?.space));
        }
        PowerspaceCmd::Verify { space } => (Check::Powerspace, Some(space), None),
        PowerspaceCmd::OpenSurj { map, space } => (Check::OpenSurjection, space.as_ref(), Some(map)),
        PowerspaceCmd::Essential { map, space } => (Check::Essential, space.as_ref(), Some(map)),
    };
    oracle::run(&OracleArgs { check, space: space.cloned(), map: map.cloned(), set: None })
}
