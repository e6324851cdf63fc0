use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::{DecodeError, Engine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum B64Error {
    #[error("illegal character {byte:#04x} at offset {offset}")]
    IllegalCharacter { offset: usize, byte: u8 },
    #[error("invalid base64url length")]
    BadLength,
}

pub fn b64url_encode(bytes: &[u8]) -> String {
    URL_SAFE_NO_PAD.encode(bytes)
}

/// Strict unpadded decoding; non-canonical trailing bits are rejected.
pub fn b64url_decode(s: &str) -> Result<Vec<u8>, B64Error> {
    URL_SAFE_NO_PAD.decode(s).map_err(|e| match e {
        DecodeError::InvalidByte(offset, byte) => B64Error::IllegalCharacter { offset, byte },
        DecodeError::InvalidLastSymbol(offset, byte) => B64Error::IllegalCharacter { offset, byte },
        DecodeError::InvalidLength(_) => B64Error::BadLength,
        DecodeError::InvalidPadding => {
            let offset = s.find('=').unwrap_or(s.len());
            B64Error::IllegalCharacter { offset, byte: b'=' }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors() {
        assert_eq!(b64url_encode(b""), "");
        assert_eq!(b64url_encode(b"f"), "Zg");
        assert_eq!(b64url_encode(b"fo"), "Zm8");
        assert_eq!(b64url_encode(b"foobar"), "Zm9vYmFy");
        assert_eq!(b64url_encode(&[0xfb, 0xff]), "-_8");
    }

    #[test]
    fn errors() {
        assert_eq!(b64url_decode("!"), Err(B64Error::IllegalCharacter { offset: 0, byte: b'!' }));
        assert_eq!(b64url_decode("Zg=="), Err(B64Error::IllegalCharacter { offset: 2, byte: b'=' }));
        assert_eq!(b64url_decode("Z"), Err(B64Error::BadLength));
        assert!(matches!(b64url_decode("Zh"), Err(B64Error::IllegalCharacter { .. })));
        assert!(matches!(b64url_decode("ab+c"), Err(B64Error::IllegalCharacter { offset: 2, .. })));
    }
}
