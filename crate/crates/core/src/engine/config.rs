use crate::error::{Error, Result};

/// Fixed-field-order byte encoding, so configurations can be hashed,
/// deduplicated and compared bit-exactly across runs and tools.
pub trait CanonicalState: Sized {
    fn write_canonical(&self, out: &mut Vec<u8>);
    fn read_canonical(input: &mut &[u8]) -> Result<Self>;
}

pub(crate) fn take_bytes<'a>(input: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if input.len() < n {
        return Err(Error::MalformedState(format!(
            "need {n} more bytes, {} available",
            input.len()
        )));
    }
    let (head, rest) = input.split_at(n);
    *input = rest;
    Ok(head)
}

pub(crate) fn read_u16(input: &mut &[u8]) -> Result<u16> {
    let b = take_bytes(input, 2)?;
    Ok(u16::from_le_bytes([b[0], b[1]]))
}

pub(crate) fn read_u8(input: &mut &[u8]) -> Result<u8> {
    Ok(take_bytes(input, 1)?[0])
}

pub(crate) fn read_bool(input: &mut &[u8]) -> Result<bool> {
    match read_u8(input)? {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(Error::MalformedState(format!("bad bool byte {other}"))),
    }
}

pub(crate) fn read_i8(input: &mut &[u8]) -> Result<i8> {
    Ok(read_u8(input)? as i8)
}

impl CanonicalState for super::Color {
    fn write_canonical(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.0.to_le_bytes());
    }

    fn read_canonical(input: &mut &[u8]) -> Result<Self> {
        Ok(super::Color(read_u16(input)?))
    }
}

/// The vector of all agents' states after `step` interactions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration<S> {
    pub states: Vec<S>,
    pub step: u64,
}

impl<S: CanonicalState> Configuration<S> {
    pub fn new(states: Vec<S>) -> Self {
        Self { states, step: 0 }
    }

    /// Canonical bytes of the state vector. The step counter is run metadata,
    /// not part of the configuration identity.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        states_canonical_bytes(&self.states)
    }

    pub fn canonical_hex(&self) -> String {
        hex::encode(self.canonical_bytes())
    }

    pub fn from_canonical_bytes(bytes: &[u8], n: usize) -> Result<Vec<S>> {
        let mut input = bytes;
        let mut states = Vec::with_capacity(n);
        for _ in 0..n {
            states.push(S::read_canonical(&mut input)?);
        }
        if !input.is_empty() {
            return Err(Error::MalformedState(format!(
                "{} trailing bytes after {n} states",
                input.len()
            )));
        }
        Ok(states)
    }

    pub fn from_canonical_hex(text: &str, n: usize) -> Result<Vec<S>> {
        let bytes =
            hex::decode(text).map_err(|e| Error::MalformedState(format!("bad hex: {e}")))?;
        Self::from_canonical_bytes(&bytes, n)
    }
}

pub fn states_canonical_bytes<S: CanonicalState>(states: &[S]) -> Vec<u8> {
    let mut out = Vec::new();
    for s in states {
        s.write_canonical(&mut out);
    }
    out
}

pub fn states_canonical_hex<S: CanonicalState>(states: &[S]) -> String {
    hex::encode(states_canonical_bytes(states))
}
