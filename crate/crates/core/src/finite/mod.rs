//! Finite T₀ spaces: the exhaustive ground truth for everything else.

pub mod baire;
pub mod enumerate;
pub mod json;
mod lower;
mod map;
mod space;
pub mod transfer;

pub use baire::{
    cat_exists, cat_forall, is_baire_measurable, is_comeager, is_meager, verify_bairequant_identities,
    verify_kuratowski_ulam, VerifyReport,
};
pub use lower::{down_map, lower_powerspace, set_label, LowerPowerspace};
pub use map::FiniteMap;
pub use space::{FiniteSpace, MAX_OPENS};
pub use transfer::{pi02_transfer, TransferData, TransferResult, WChoice};
