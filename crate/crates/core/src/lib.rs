//! Quasi-Polish spaces as finite syntactic data.

pub mod bits;
pub mod borel;
pub mod convert;
pub mod copres;
pub mod error;
pub mod finite;
pub mod game;
pub mod index;
pub mod points;
pub mod posite;
pub mod powerspace;
pub mod rational;
pub mod verify;

pub use borel::BorelCode;
pub use copres::{Copresentation, OpenCode, Relation};
pub use error::{Error, Result};
pub use finite::{FiniteMap, FiniteSpace};
pub use index::{BasicOpen, Index};
