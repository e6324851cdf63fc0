//! Out-of-circuit JWT machinery: Base64url, RS256 keys, token issue/verify,
//! claim spans, the JWK registry and a mock provider.

mod b64;
mod claims;
mod jwt;
mod registry;
pub mod rsakey;

pub use b64::{b64url_decode, b64url_encode, B64Error};
pub use claims::{claim_get, claim_get_payload, ClaimError, ClaimSpan};
pub use jwt::{
    jwt_issue, jwt_issue_raw, jwt_verify, serialize_claims, ClaimSet, ClaimValue, IssueOptions, Jwt, JwtError,
    JwtHeader, PayloadStyle, DEFAULT_L_MAX, MANDATORY_CLAIMS,
};
pub use registry::{random_kid, Jwk, JwkRegistry, MockProvider, RegistryError, DEFAULT_JWK_WINDOW};
pub use rsakey::{RsaPrivateKey, RsaPublicKey};
