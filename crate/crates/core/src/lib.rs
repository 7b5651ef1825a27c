//! Quantale-valued behavioural distances for finite transition systems.

pub mod error;
pub mod fixpoint;
pub mod flift;
mod lp;
pub mod quantale;
pub mod systems;
pub mod upto;
pub mod vrel;

pub use error::{Error, Result};
pub use quantale::{Quantale, QuantaleId, QuantaleValue};
pub use vrel::{Carrier, FiniteMap, Key, RelView, VPred, VRel};
