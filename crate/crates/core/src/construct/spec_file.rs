//! Line-oriented code-spec files.
//!
//! ```text
//! emsr-code v1
//! field gf(4,0b111)
//! params n=6 k=3 d=5
//! kind structured
//! seed.v 1,0,0;0,1,0;0,0,1
//! seed.u 2,2,2;2,3,1;2,1,3
//! seed.m 1,1,1;1,2,3;1,3,2
//! seed.kappa 3
//! enc 1 1 3,0,0;2,1,0;2,0,1
//! ...
//! ```
//!
//! `enc <parity> <unit> <matrix>` uses 1-based indices. Blank lines and lines
//! starting with `#` are ignored when parsing. Other kind lines:
//! `kind punctured parent=6,3,5 removed=3 pruned=1`,
//! `kind five-three alpha=1 beta=1`, `kind fixture name=...`,
//! `kind replication`.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::gf::Field;
use crate::linalg::Matrix;

use super::{CodeKind, CodeParams, ConstructError, ConstructionSeed, MsrCode, Provenance};

pub const SPEC_HEADER: &str = "emsr-code v1";

/// Canonical text form; parsing it yields an equal code.
pub fn write_code_spec(code: &MsrCode) -> String {
    let mut out = String::new();
    let p = code.params();
    out.push_str(SPEC_HEADER);
    out.push('\n');
    out.push_str(&format!("field {}\n", p.field.descriptor()));
    out.push_str(&format!("params n={} k={} d={}\n", p.n, p.k, p.d));
    let kind = match code.kind() {
        CodeKind::Structured => "structured".to_string(),
        CodeKind::Punctured(pr) => {
            let removed = if pr.removed_units.is_empty() {
                "-".to_string()
            } else {
                pr.removed_units
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            };
            format!(
                "punctured parent={},{},{} removed={} pruned={}",
                pr.parent_n, pr.parent_k, pr.parent_d, removed, pr.pruned
            )
        }
        CodeKind::FiveThree { alpha, beta } => format!("five-three alpha={alpha} beta={beta}"),
        CodeKind::Fixture { name } => format!("fixture name={name}"),
        CodeKind::Replication => "replication".to_string(),
    };
    out.push_str(&format!("kind {kind}\n"));
    if let Some(s) = code.seed() {
        out.push_str(&format!("seed.v {}\n", s.v.to_literal()));
        out.push_str(&format!("seed.u {}\n", s.u.to_literal()));
        out.push_str(&format!("seed.m {}\n", s.m.to_literal()));
        out.push_str(&format!("seed.kappa {}\n", s.kappa));
    }
    for i in 0..p.parity_count() {
        for l in 0..p.k {
            out.push_str(&format!(
                "enc {} {} {}\n",
                i + 1,
                l + 1,
                code.enc(i, l).to_literal()
            ));
        }
    }
    out
}

/// SHA-256 of the canonical spec text, hex encoded.
pub fn code_hash(code: &MsrCode) -> String {
    hex::encode(Sha256::digest(write_code_spec(code).as_bytes()))
}

fn spec_err(line: usize, msg: impl Into<String>) -> ConstructError {
    ConstructError::Spec(format!("line {line}: {}", msg.into()))
}

fn key_values(line: usize, parts: &[&str]) -> Result<BTreeMap<String, String>, ConstructError> {
    parts
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| spec_err(line, format!("expected key=value, got {p:?}")))
        })
        .collect()
}

fn take<T: std::str::FromStr>(
    line: usize,
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<T, ConstructError> {
    map.get(key)
        .ok_or_else(|| spec_err(line, format!("missing {key}=")))?
        .parse()
        .map_err(|_| spec_err(line, format!("invalid value for {key}")))
}

fn parse_usize_list(line: usize, s: &str) -> Result<Vec<usize>, ConstructError> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.parse()
                .map_err(|_| spec_err(line, format!("bad index list {s:?}")))
        })
        .collect()
}

/// Parses a code spec. Only shapes are validated; construction constraints
/// are left to the verifier so that modified codes can be inspected.
pub fn parse_code_spec(text: &str) -> Result<MsrCode, ConstructError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h == SPEC_HEADER => {}
        Some((n, h)) => return Err(spec_err(n, format!("expected {SPEC_HEADER:?}, got {h:?}"))),
        None => return Err(ConstructError::Spec("empty spec".into())),
    }
    let mut field: Option<Field> = None;
    let mut params: Option<CodeParams> = None;
    let mut kind: Option<CodeKind> = None;
    let mut seed_parts: BTreeMap<&'static str, Matrix> = BTreeMap::new();
    let mut kappa: Option<u32> = None;
    let mut enc: BTreeMap<(usize, usize), Matrix> = BTreeMap::new();

    for (ln, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let need_field = || {
            field
                .clone()
                .ok_or_else(|| spec_err(ln, "field must come first"))
        };
        match parts[0] {
            "field" if parts.len() == 2 => {
                field = Some(parts[1].parse().map_err(|e| spec_err(ln, format!("{e}")))?);
            }
            "params" => {
                let kv = key_values(ln, &parts[1..])?;
                params = Some(CodeParams::new(
                    take(ln, &kv, "n")?,
                    take(ln, &kv, "k")?,
                    take(ln, &kv, "d")?,
                    need_field()?,
                )?);
            }
            "kind" if parts.len() >= 2 => {
                let kv = key_values(ln, &parts[2..])?;
                kind = Some(match parts[1] {
                    "structured" => CodeKind::Structured,
                    "replication" => CodeKind::Replication,
                    "punctured" => {
                        let parent: Vec<usize> = parse_usize_list(
                            ln,
                            kv.get("parent")
                                .ok_or_else(|| spec_err(ln, "missing parent="))?,
                        )?;
                        if parent.len() != 3 {
                            return Err(spec_err(ln, "parent must be n,k,d"));
                        }
                        CodeKind::Punctured(Provenance {
                            parent_n: parent[0],
                            parent_k: parent[1],
                            parent_d: parent[2],
                            removed_units: parse_usize_list(
                                ln,
                                kv.get("removed")
                                    .ok_or_else(|| spec_err(ln, "missing removed="))?,
                            )?,
                            pruned: take(ln, &kv, "pruned")?,
                        })
                    }
                    "five-three" => CodeKind::FiveThree {
                        alpha: take(ln, &kv, "alpha")?,
                        beta: take(ln, &kv, "beta")?,
                    },
                    "fixture" => CodeKind::Fixture {
                        name: take(ln, &kv, "name")?,
                    },
                    other => return Err(spec_err(ln, format!("unknown kind {other:?}"))),
                });
            }
            key @ ("seed.v" | "seed.u" | "seed.m") if parts.len() == 2 => {
                let m = Matrix::parse_literal(&need_field()?, parts[1])
                    .map_err(|e| spec_err(ln, e.to_string()))?;
                let name = match key {
                    "seed.v" => "v",
                    "seed.u" => "u",
                    _ => "m",
                };
                seed_parts.insert(name, m);
            }
            "seed.kappa" if parts.len() == 2 => {
                let f = need_field()?;
                let v: u32 = parts[1].parse().map_err(|_| spec_err(ln, "bad kappa"))?;
                if !f.contains(v) {
                    return Err(spec_err(ln, "kappa is not a field element"));
                }
                kappa = Some(v);
            }
            "enc" if parts.len() == 4 => {
                let i: usize = parts[1]
                    .parse()
                    .map_err(|_| spec_err(ln, "bad parity index"))?;
                let l: usize = parts[2]
                    .parse()
                    .map_err(|_| spec_err(ln, "bad unit index"))?;
                if i == 0 || l == 0 {
                    return Err(spec_err(ln, "indices are 1-based"));
                }
                let m = Matrix::parse_literal(&need_field()?, parts[3])
                    .map_err(|e| spec_err(ln, e.to_string()))?;
                if enc.insert((i - 1, l - 1), m).is_some() {
                    return Err(spec_err(ln, format!("duplicate block ({i},{l})")));
                }
            }
            _ => return Err(spec_err(ln, format!("unrecognised line {line:?}"))),
        }
    }

    let params = params.ok_or_else(|| ConstructError::Spec("missing params line".into()))?;
    let kind = kind.ok_or_else(|| ConstructError::Spec("missing kind line".into()))?;
    let seed = match (seed_parts.len(), kappa) {
        (0, None) => None,
        (3, Some(kappa)) => Some(ConstructionSeed {
            v: seed_parts.remove("v").expect("present"),
            u: seed_parts.remove("u").expect("present"),
            m: seed_parts.remove("m").expect("present"),
            kappa,
        }),
        _ => return Err(ConstructError::Spec("seed needs v, u, m and kappa".into())),
    };
    let mut table = Vec::with_capacity(params.parity_count());
    for i in 0..params.parity_count() {
        let mut row = Vec::with_capacity(params.k);
        for l in 0..params.k {
            row.push(enc.remove(&(i, l)).ok_or_else(|| {
                ConstructError::Spec(format!("missing enc block ({},{})", i + 1, l + 1))
            })?);
        }
        table.push(row);
    }
    if let Some(((i, l), _)) = enc.into_iter().next() {
        return Err(ConstructError::Spec(format!(
            "enc block ({},{}) is outside the code",
            i + 1,
            l + 1
        )));
    }
    MsrCode::from_parts(params, kind, table, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{
        build_53, build_general, fixture_42_gf5, orthogonal_code, SeedOverrides,
    };

    #[test]
    fn round_trips() {
        let codes = vec![
            orthogonal_code(),
            fixture_42_gf5(),
            build_53(1, 2).unwrap(),
            build_general(7, 3, 5, None, &SeedOverrides::default()).unwrap(),
            build_general(2, 1, 1, None, &SeedOverrides::default()).unwrap(),
        ];
        for code in codes {
            let text = write_code_spec(&code);
            let back = parse_code_spec(&text).unwrap();
            assert_eq!(back, code);
            assert_eq!(write_code_spec(&back), text);
            assert_eq!(code_hash(&back), code_hash(&code));
        }
    }

    #[test]
    fn rejects_malformed_specs() {
        let good = write_code_spec(&fixture_42_gf5());
        assert!(parse_code_spec("").is_err());
        assert!(parse_code_spec(&good.replace("emsr-code v1", "emsr-code v9")).is_err());
        assert!(parse_code_spec(&good.replace("enc 2 2 1,0;0,1\n", "")).is_err());
        assert!(parse_code_spec(&good.replace("enc 2 2 1,0;0,1", "enc 2 2 1,0,0;0,1,0")).is_err());
        assert!(parse_code_spec(&format!("{good}enc 3 1 1,0;0,1\n")).is_err());
        assert!(parse_code_spec(&good.replace("kind fixture", "kind mystery")).is_err());
    }

    #[test]
    fn comments_are_ignored() {
        let text = format!("# generated\n\n{}", write_code_spec(&fixture_42_gf5()));
        assert_eq!(parse_code_spec(&text).unwrap(), fixture_42_gf5());
    }
}
