//! Locating a top-level claim inside a decoded payload.

use super::jwt::{ClaimValue, Jwt};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClaimError {
    #[error("claim {0:?} absent")]
    ClaimAbsent(String),
    #[error("claim {0:?} only appears nested")]
    ClaimNested(String),
    #[error("claim {0:?} appears more than once")]
    DuplicateClaim(String),
    #[error("payload is not a JSON object: {0}")]
    Malformed(String),
}

/// A top-level member `"name" ws : ws value ws delim` starting at `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClaimSpan {
    pub value: ClaimValue,
    /// Raw value bytes: string contents without the quotes (escapes kept), or the literal.
    pub raw: Vec<u8>,
    /// Offset of the key's opening quote.
    pub i: usize,
    /// Length through the delimiter (`,` or `}`) inclusive.
    pub l: usize,
    /// Colon offset relative to `i`.
    pub j: usize,
    /// Value token offset relative to `i`.
    pub value_start: usize,
    /// Value token length (quotes included for strings).
    pub value_len: usize,
}

struct Member {
    key: String,
    i: usize,
    colon: usize,
    vstart: usize,
    vend: usize,
    delim: usize,
}

struct Scanner<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Scanner<'_> {
    fn ws(&mut self) {
        while self.pos < self.s.len() && matches!(self.s[self.pos], b' ' | b'\t' | b'\n' | b'\r') {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Option<()> {
        (self.peek()? == c).then(|| self.pos += 1)
    }

    /// Skips a string token starting at the current quote.
    fn string(&mut self) -> Option<()> {
        self.expect(b'"')?;
        loop {
            match self.peek()? {
                b'"' => {
                    self.pos += 1;
                    return Some(());
                }
                b'\\' => self.pos += 2,
                _ => self.pos += 1,
            }
        }
    }

    fn value(&mut self) -> Option<()> {
        match self.peek()? {
            b'"' => self.string(),
            b'{' | b'[' => {
                let mut depth = 0usize;
                loop {
                    match self.peek()? {
                        b'"' => {
                            self.string()?;
                            continue;
                        }
                        b'{' | b'[' => depth += 1,
                        b'}' | b']' => {
                            depth -= 1;
                            if depth == 0 {
                                self.pos += 1;
                                return Some(());
                            }
                        }
                        _ => {}
                    }
                    self.pos += 1;
                }
            }
            _ => {
                while !matches!(self.peek()?, b',' | b'}' | b']' | b' ' | b'\t' | b'\n' | b'\r') {
                    self.pos += 1;
                }
                Some(())
            }
        }
    }

    fn members(&mut self) -> Option<Vec<Member>> {
        self.ws();
        self.expect(b'{')?;
        let mut out = Vec::new();
        self.ws();
        if self.peek()? == b'}' {
            return Some(out);
        }
        loop {
            self.ws();
            let i = self.pos;
            self.string()?;
            let key: String = serde_json::from_slice(&self.s[i..self.pos]).ok()?;
            self.ws();
            let colon = self.pos;
            self.expect(b':')?;
            self.ws();
            let vstart = self.pos;
            self.value()?;
            let vend = self.pos;
            self.ws();
            let delim = self.pos;
            let d = self.peek()?;
            self.pos += 1;
            out.push(Member { key, i, colon, vstart, vend, delim });
            match d {
                b',' => continue,
                b'}' => return Some(out),
                _ => return None,
            }
        }
    }
}

fn contains_key(v: &serde_json::Value, name: &str) -> bool {
    match v {
        serde_json::Value::Object(m) => m.iter().any(|(k, v)| k == name || contains_key(v, name)),
        serde_json::Value::Array(a) => a.iter().any(|v| contains_key(v, name)),
        _ => false,
    }
}

pub fn claim_get_payload(payload: &[u8], name: &str) -> Result<ClaimSpan, ClaimError> {
    let parsed: serde_json::Value =
        serde_json::from_slice(payload).map_err(|e| ClaimError::Malformed(e.to_string()))?;
    if !parsed.is_object() {
        return Err(ClaimError::Malformed("not an object".into()));
    }
    let members = Scanner { s: payload, pos: 0 }
        .members()
        .ok_or_else(|| ClaimError::Malformed("unexpected layout".into()))?;
    let mut hits = members.iter().filter(|m| m.key == name);
    let Some(m) = hits.next() else {
        return Err(if contains_key(&parsed, name) {
            ClaimError::ClaimNested(name.to_string())
        } else {
            ClaimError::ClaimAbsent(name.to_string())
        });
    };
    if hits.next().is_some() {
        return Err(ClaimError::DuplicateClaim(name.to_string()));
    }
    let token = &payload[m.vstart..m.vend];
    let v: serde_json::Value =
        serde_json::from_slice(token).map_err(|e| ClaimError::Malformed(e.to_string()))?;
    let raw = if token.first() == Some(&b'"') { token[1..token.len() - 1].to_vec() } else { token.to_vec() };
    Ok(ClaimSpan {
        value: ClaimValue::from_json(v),
        raw,
        i: m.i,
        l: m.delim - m.i + 1,
        j: m.colon - m.i,
        value_start: m.vstart - m.i,
        value_len: m.vend - m.vstart,
    })
}

pub fn claim_get(jwt: &Jwt, name: &str) -> Result<ClaimSpan, ClaimError> {
    claim_get_payload(&jwt.payload, name)
}
