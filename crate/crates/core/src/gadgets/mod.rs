//! Circuit gadgets. Each one synthesizes constraints and computes its witness
//! values in the same pass.

pub mod base64;
pub mod basic;
pub mod json;
pub mod rsa;
pub mod sha256;
pub mod slice;
pub mod sponge;

pub use base64::g_base64url_decode;
pub use basic::{Bit, ByteVar, GResult, OneHot};
pub use json::{g_json_claim, g_top_level, ClaimSpec, JsonClaim, ValueKind};
pub use rsa::{g_rs256_verify, BigNatVar};
pub use sha256::{g_sha256, Digest256};
pub use slice::{g_slice_naive, g_slice_packed};
pub use sponge::g_sponge_hash;
