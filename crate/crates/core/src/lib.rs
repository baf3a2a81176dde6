pub mod blockdata;
pub mod broadcast;
pub mod crypto;
pub mod field_codec;
pub mod harness;
pub mod protocol;
pub mod simnet;
mod ids;

pub use ids::{ClientId, NodeId};
