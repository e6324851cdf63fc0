//! zkLogin: an R1CS circuit for OpenID JWT validation, the signature protocol
//! built on it, a mock OpenID provider, and executable security games.

pub mod csys;
pub mod fieldcore;
pub mod gadgets;
pub mod harness;
pub mod jwtkit;
pub mod proto;
pub mod zkjwt;
