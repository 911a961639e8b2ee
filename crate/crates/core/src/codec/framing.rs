//! Byte streams to field symbols and back.
//!
//! Bytes are read as one MSB-first bit stream and cut into `m`-bit symbols of
//! GF(2^m), zero-padded at the end. Prime fields have no bit-exact mapping and
//! are rejected.

use thiserror::Error;

use crate::gf::{Field, FieldKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FramingError {
    #[error("{0} is a prime field; byte framing needs GF(2^m) (use symbol mode)")]
    PrimeField(String),
    #[error("symbol {value} does not fit in {bits} bits")]
    Symbol { value: u32, bits: u32 },
    #[error("{symbols} symbols hold fewer than {bytes} bytes")]
    TooShort { symbols: usize, bytes: usize },
}

fn bits_per_symbol(field: &Field) -> Result<u32, FramingError> {
    match field.kind() {
        FieldKind::Binary { m, .. } => Ok(m),
        FieldKind::Prime { .. } => Err(FramingError::PrimeField(field.descriptor())),
    }
}

/// Symbols carrying `bytes`, padded with zeros to a multiple of `chunk`.
pub fn bytes_to_symbols(
    field: &Field,
    bytes: &[u8],
    chunk: usize,
) -> Result<Vec<u32>, FramingError> {
    let m = bits_per_symbol(field)?;
    let total_bits = bytes.len() * 8;
    let count = total_bits.div_ceil(m as usize);
    let padded = count.div_ceil(chunk.max(1)) * chunk.max(1);
    let mut out = Vec::with_capacity(padded);
    let bit = |i: usize| -> u32 {
        if i < total_bits {
            u32::from(bytes[i / 8] >> (7 - i % 8) & 1)
        } else {
            0
        }
    };
    for s in 0..count {
        let mut v = 0u32;
        for b in 0..m as usize {
            v = v << 1 | bit(s * m as usize + b);
        }
        out.push(v);
    }
    out.resize(padded, 0);
    Ok(out)
}

/// Inverse of [`bytes_to_symbols`], keeping the first `len` bytes.
pub fn symbols_to_bytes(
    field: &Field,
    symbols: &[u32],
    len: usize,
) -> Result<Vec<u8>, FramingError> {
    let m = bits_per_symbol(field)?;
    if symbols.len() * (m as usize) < len * 8 {
        return Err(FramingError::TooShort {
            symbols: symbols.len(),
            bytes: len,
        });
    }
    let mut out = vec![0u8; len];
    for (s, &v) in symbols.iter().enumerate() {
        if v >> m != 0 {
            return Err(FramingError::Symbol { value: v, bits: m });
        }
        for b in 0..m as usize {
            let pos = s * m as usize + b;
            if pos >= len * 8 {
                return Ok(out);
            }
            if v >> (m as usize - 1 - b) & 1 == 1 {
                out[pos / 8] |= 0x80 >> (pos % 8);
            }
        }
    }
    Ok(out)
}
