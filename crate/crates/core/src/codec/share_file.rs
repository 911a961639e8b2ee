//! Per-node share files, in a hex text form and a packed binary form.
//!
//! Text:
//!
//! ```text
//! emsr-share v1
//! code <sha256 of the code spec>
//! node 4
//! alpha 3
//! width 1
//! bytes 11
//! stripes 2
//! 3 0 1
//! 2 2 0
//! ```
//!
//! `bytes L` is replaced by `symbols N` for data given as raw field symbols.
//! Each stripe line lists the node's `α` symbols in hex.
//!
//! Binary: the magic `EMSRSHR1`, the 32-byte code hash, node (u32), alpha
//! (u32), payload tag (u8: 0 bytes, 1 symbols), payload length (u64), stripe
//! count (u64), symbol width in bytes (u8), then every symbol big-endian.
//! Integers in the header are little-endian.

use crate::construct::{code_hash, MsrCode};
use crate::linalg::Vector;

use super::framing::{bytes_to_symbols, symbols_to_bytes};
use super::{check_node_set, dc_decode, encode, CodecError, Message, NodeShare};

pub const SHARE_TEXT_HEADER: &str = "emsr-share v1";
pub const SHARE_MAGIC: &[u8; 8] = b"EMSRSHR1";

/// What the stripes carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharePayload {
    /// A byte stream of this length, framed into GF(2^m) symbols.
    Bytes(u64),
    /// This many raw field symbols.
    Symbols(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareFile {
    pub code_hash: String,
    pub node: usize,
    pub alpha: usize,
    /// Bytes per symbol in the binary form.
    pub width: u8,
    pub payload: SharePayload,
    pub stripes: Vec<Vec<u32>>,
}

fn fmt_err(msg: impl Into<String>) -> CodecError {
    CodecError::ShareFormat(msg.into())
}

fn symbol_width(code: &MsrCode) -> u8 {
    code.field().symbol_bits().div_ceil(8) as u8
}

impl ShareFile {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{SHARE_TEXT_HEADER}\ncode {}\nnode {}\nalpha {}\nwidth {}\n",
            self.code_hash, self.node, self.alpha, self.width
        );
        match self.payload {
            SharePayload::Bytes(n) => out.push_str(&format!("bytes {n}\n")),
            SharePayload::Symbols(n) => out.push_str(&format!("symbols {n}\n")),
        }
        out.push_str(&format!("stripes {}\n", self.stripes.len()));
        for s in &self.stripes {
            let line: Vec<String> = s.iter().map(|v| format!("{v:x}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CodecError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(SHARE_TEXT_HEADER) {
            return Err(fmt_err(format!("missing {SHARE_TEXT_HEADER:?} header")));
        }
        let mut field = |name: &str| -> Result<String, CodecError> {
            let line = lines
                .next()
                .ok_or_else(|| fmt_err(format!("missing {name} line")))?;
            let (key, value) = line
                .trim()
                .split_once(' ')
                .ok_or_else(|| fmt_err(format!("malformed line {line:?}")))?;
            if key != name && !(name == "payload" && (key == "bytes" || key == "symbols")) {
                return Err(fmt_err(format!("expected {name}, got {key}")));
            }
            Ok(if name == "payload" {
                format!("{key} {value}")
            } else {
                value.to_string()
            })
        };
        let num = |s: String, what: &str| -> Result<u64, CodecError> {
            s.trim().parse().map_err(|_| fmt_err(format!("bad {what}")))
        };
        let code_hash = field("code")?;
        let node = num(field("node")?, "node")? as usize;
        let alpha = num(field("alpha")?, "alpha")? as usize;
        let width = num(field("width")?, "width")? as u8;
        let payload = field("payload")?;
        let (kind, len) = payload.split_once(' ').expect("joined above");
        let len = num(len.to_string(), "payload length")?;
        let payload = if kind == "bytes" {
            SharePayload::Bytes(len)
        } else {
            SharePayload::Symbols(len)
        };
        let count = num(field("stripes")?, "stripe count")? as usize;
        let mut stripes = Vec::with_capacity(count);
        for line in lines.by_ref().filter(|l| !l.trim().is_empty()) {
            let s: Result<Vec<u32>, _> = line
                .split_whitespace()
                .map(|h| u32::from_str_radix(h, 16))
                .collect();
            let s = s.map_err(|_| fmt_err(format!("bad symbol line {line:?}")))?;
            if s.len() != alpha {
                return Err(fmt_err(format!(
                    "stripe has {} symbols, alpha is {alpha}",
                    s.len()
                )));
            }
            stripes.push(s);
        }
        if stripes.len() != count {
            return Err(fmt_err(format!(
                "header says {count} stripes, found {}",
                stripes.len()
            )));
        }
        Ok(ShareFile {
            code_hash,
            node,
            alpha,
            width,
            payload,
            stripes,
        })
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(SHARE_MAGIC);
        let mut hash = hex::decode(&self.code_hash).unwrap_or_default();
        hash.resize(32, 0);
        out.extend_from_slice(&hash);
        out.extend_from_slice(&(self.node as u32).to_le_bytes());
        out.extend_from_slice(&(self.alpha as u32).to_le_bytes());
        let (tag, len) = match self.payload {
            SharePayload::Bytes(n) => (0u8, n),
            SharePayload::Symbols(n) => (1u8, n),
        };
        out.push(tag);
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&(self.stripes.len() as u64).to_le_bytes());
        out.push(self.width);
        let w = self.width as usize;
        for s in &self.stripes {
            for &v in s {
                out.extend_from_slice(&v.to_be_bytes()[4 - w..]);
            }
        }
        out
    }

    pub fn from_binary(data: &[u8]) -> Result<Self, CodecError> {
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8], CodecError> {
            let s = data
                .get(pos..pos + n)
                .ok_or_else(|| fmt_err("truncated binary share"))?;
            pos += n;
            Ok(s)
        };
        if take(8)? != SHARE_MAGIC {
            return Err(fmt_err("bad magic"));
        }
        let code_hash = hex::encode(take(32)?);
        let u32_le = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes"));
        let u64_le = |b: &[u8]| u64::from_le_bytes(b.try_into().expect("8 bytes"));
        let node = u32_le(take(4)?) as usize;
        let alpha = u32_le(take(4)?) as usize;
        let tag = take(1)?[0];
        let len = u64_le(take(8)?);
        let payload = match tag {
            0 => SharePayload::Bytes(len),
            1 => SharePayload::Symbols(len),
            t => return Err(fmt_err(format!("unknown payload tag {t}"))),
        };
        let count = u64_le(take(8)?) as usize;
        let width = take(1)?[0];
        if !(1..=4).contains(&width) {
            return Err(fmt_err(format!("bad symbol width {width}")));
        }
        let w = width as usize;
        let expected = count
            .checked_mul(alpha)
            .and_then(|x| x.checked_mul(w))
            .ok_or_else(|| fmt_err("header sizes overflow"))?;
        let body = take(expected)?;
        let mut stripes = Vec::with_capacity(count);
        for chunk in body.chunks(alpha * w) {
            stripes.push(
                chunk
                    .chunks(w)
                    .map(|b| b.iter().fold(0u32, |acc, &x| acc << 8 | u32::from(x)))
                    .collect(),
            );
        }
        if pos != data.len() {
            return Err(fmt_err("trailing bytes after payload"));
        }
        Ok(ShareFile {
            code_hash,
            node,
            alpha,
            width,
            payload,
            stripes,
        })
    }

    /// Accepts either form, detected by the binary magic.
    pub fn parse(data: &[u8]) -> Result<Self, CodecError> {
        if data.starts_with(SHARE_MAGIC) {
            return Self::from_binary(data);
        }
        let text = std::str::from_utf8(data).map_err(|_| fmt_err("not UTF-8 text"))?;
        Self::from_text(text)
    }

    /// Checks the share against a code: hash, node range, shape, symbol range.
    pub fn check_against(&self, code: &MsrCode) -> Result<(), CodecError> {
        if self.code_hash != code_hash(code) {
            return Err(fmt_err(format!(
                "share of node {} belongs to code {}, not {}",
                self.node,
                self.code_hash,
                code_hash(code)
            )));
        }
        check_node_set(code, &[self.node])?;
        if self.alpha != code.alpha() {
            return Err(fmt_err("alpha differs from code"));
        }
        for s in &self.stripes {
            if s.len() != self.alpha || s.iter().any(|&v| !code.field().contains(v)) {
                return Err(fmt_err("stripe symbols do not fit the code"));
            }
        }
        Ok(())
    }

    /// The node share held in stripe `index`.
    pub fn stripe_share(&self, code: &MsrCode, index: usize) -> Result<NodeShare, CodecError> {
        let s = self
            .stripes
            .get(index)
            .ok_or_else(|| fmt_err(format!("no stripe {index}")))?;
        Ok(NodeShare {
            node: self.node,
            symbols: Vector::new(code.field(), s.clone())?,
        })
    }
}

fn encode_stripes(
    code: &MsrCode,
    symbols: &[u32],
    payload: SharePayload,
) -> Result<Vec<ShareFile>, CodecError> {
    let hash = code_hash(code);
    let width = symbol_width(code);
    let mut files: Vec<ShareFile> = (1..=code.n())
        .map(|node| ShareFile {
            code_hash: hash.clone(),
            node,
            alpha: code.alpha(),
            width,
            payload,
            stripes: Vec::new(),
        })
        .collect();
    for chunk in symbols.chunks(code.k() * code.alpha()) {
        let msg = Message::from_symbols(code, chunk)?;
        for share in encode(code, &msg)? {
            files[share.node - 1].stripes.push(share.symbols.into_vec());
        }
    }
    Ok(files)
}

/// Frames bytes into stripes and encodes them; one file per node.
pub fn encode_bytes(code: &MsrCode, bytes: &[u8]) -> Result<Vec<ShareFile>, CodecError> {
    let symbols = bytes_to_symbols(code.field(), bytes, code.k() * code.alpha())?;
    encode_stripes(code, &symbols, SharePayload::Bytes(bytes.len() as u64))
}

/// Encodes raw field symbols, zero-padded to whole stripes.
pub fn encode_symbols(code: &MsrCode, symbols: &[u32]) -> Result<Vec<ShareFile>, CodecError> {
    if let Some(&v) = symbols.iter().find(|&&v| !code.field().contains(v)) {
        return Err(CodecError::Dimension(format!(
            "{v} is not an element of {}",
            code.field()
        )));
    }
    let stripe = code.k() * code.alpha();
    let mut padded = symbols.to_vec();
    padded.resize(symbols.len().div_ceil(stripe) * stripe, 0);
    encode_stripes(code, &padded, SharePayload::Symbols(symbols.len() as u64))
}

/// Decodes all stripes from exactly `k` share files; returns the padded
/// message symbols and the payload descriptor.
pub fn recover_symbols(
    code: &MsrCode,
    files: &[ShareFile],
) -> Result<(Vec<u32>, SharePayload), CodecError> {
    if files.len() != code.k() {
        return Err(CodecError::ShareCount {
            expected: code.k(),
            got: files.len(),
        });
    }
    for f in files {
        f.check_against(code)?;
    }
    let first = &files[0];
    if files
        .iter()
        .any(|f| f.payload != first.payload || f.stripes.len() != first.stripes.len())
    {
        return Err(fmt_err("share files disagree on payload or stripe count"));
    }
    let mut out = Vec::with_capacity(first.stripes.len() * code.k() * code.alpha());
    for s in 0..first.stripes.len() {
        let shares = files
            .iter()
            .map(|f| f.stripe_share(code, s))
            .collect::<Result<Vec<_>, _>>()?;
        out.extend(dc_decode(code, &shares)?.to_symbols());
    }
    Ok((out, first.payload))
}

/// Decodes the original bytes (byte payloads) or the symbol list rendered
/// one per line (symbol payloads).
pub fn decode_file(code: &MsrCode, files: &[ShareFile]) -> Result<Vec<u8>, CodecError> {
    let (symbols, payload) = recover_symbols(code, files)?;
    match payload {
        SharePayload::Bytes(n) => Ok(symbols_to_bytes(code.field(), &symbols, n as usize)?),
        SharePayload::Symbols(n) => {
            let n = n as usize;
            if symbols.len() < n {
                return Err(fmt_err("fewer symbols than recorded"));
            }
            let lines: Vec<String> = symbols[..n].iter().map(u32::to_string).collect();
            let mut text = lines.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            Ok(text.into_bytes())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{fixture_42_gf5, orthogonal_code};

    #[test]
    fn bytes_round_trip_through_any_k_nodes() {
        let code = orthogonal_code();
        let data = b"exact repair keeps every byte".to_vec();
        let files = encode_bytes(&code, &data).unwrap();
        assert_eq!(files.len(), 6);
        let picked = vec![files[2].clone(), files[3].clone(), files[4].clone()];
        assert_eq!(decode_file(&code, &picked).unwrap(), data);
    }

    #[test]
    fn text_and_binary_round_trip() {
        let code = orthogonal_code();
        let files = encode_bytes(&code, b"hello").unwrap();
        for f in &files {
            assert_eq!(&ShareFile::from_text(&f.to_text()).unwrap(), f);
            assert_eq!(&ShareFile::from_binary(&f.to_binary()).unwrap(), f);
            assert_eq!(&ShareFile::parse(&f.to_binary()).unwrap(), f);
            assert_eq!(&ShareFile::parse(f.to_text().as_bytes()).unwrap(), f);
        }
    }

    #[test]
    fn symbol_mode_for_prime_fields() {
        let code = fixture_42_gf5();
        let files = encode_symbols(&code, &[1, 2, 3, 4, 0, 1]).unwrap();
        assert_eq!(files[0].stripes.len(), 2);
        let picked = vec![files[1].clone(), files[3].clone()];
        assert_eq!(decode_file(&code, &picked).unwrap(), b"1\n2\n3\n4\n0\n1\n");
        assert!(encode_bytes(&code, b"x").is_err());
        assert!(encode_symbols(&code, &[5]).is_err());
    }

    #[test]
    fn mismatched_code_rejected() {
        let files = encode_bytes(&orthogonal_code(), b"abc").unwrap();
        let other = crate::construct::biorthogonal_code();
        assert!(files[0].check_against(&other).is_err());
        let mut truncated = files[0].to_binary();
        truncated.pop();
        assert!(ShareFile::from_binary(&truncated).is_err());
    }
}
