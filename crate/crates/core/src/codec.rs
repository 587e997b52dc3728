//! Canonical byte encoding.
//!
//! Integers are fixed-width big-endian, variable-length fields carry a
//! `u32` big-endian length prefix, optional fields a one-byte presence tag.
//! Every encoder in the crate writes through [`CanonicalWriter`] so the
//! rules live in one place.

use crate::address::Address;
use crate::amount::Amount;
use crate::crypto::PublicKey;

#[derive(Debug, Default)]
pub struct CanonicalWriter {
    buf: Vec<u8>,
}

impl CanonicalWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn bool(&mut self, v: bool) -> &mut Self {
        self.u8(u8::from(v))
    }

    pub fn amount(&mut self, v: Amount) -> &mut Self {
        self.u64(v.atoms())
    }

    pub fn raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn bytes(&mut self, bytes: &[u8]) -> &mut Self {
        let len = u32::try_from(bytes.len()).expect("field longer than u32::MAX bytes");
        self.u32(len).raw(bytes)
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.bytes(s.as_bytes())
    }

    /// Kind tag followed by the 20-byte body.
    pub fn address(&mut self, a: &Address) -> &mut Self {
        self.u8(a.kind().tag()).raw(a.body())
    }

    pub fn pubkey(&mut self, pk: &PublicKey) -> &mut Self {
        self.raw(pk.as_bytes())
    }

    pub fn option<T>(&mut self, v: Option<&T>, f: impl FnOnce(&mut Self, &T)) -> &mut Self {
        match v {
            None => self.u8(0),
            Some(inner) => {
                self.u8(1);
                f(self, inner);
                self
            }
        }
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}
