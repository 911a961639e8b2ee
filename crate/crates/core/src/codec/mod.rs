//! Encoding source stripes into node shares and decoding from any `k` nodes.
//!
//! Shares are row vectors `wᵗ N_f` where `N_f` is the node generator of
//! [`MsrCode::node_generator`]; decoding stacks the generators of the chosen
//! nodes and solves the transposed system.

mod framing;
mod share_file;

use rand::Rng;
use thiserror::Error;

use crate::construct::MsrCode;
use crate::linalg::{LinalgError, Matrix, Vector};

pub use framing::{bytes_to_symbols, symbols_to_bytes, FramingError};
pub use share_file::{
    decode_file, encode_bytes, encode_symbols, recover_symbols, ShareFile, SharePayload,
    SHARE_MAGIC, SHARE_TEXT_HEADER,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("node {node} is outside 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("node {0} appears more than once")]
    DuplicateNode(usize),
    #[error("need exactly {expected} shares, got {got}")]
    ShareCount { expected: usize, got: usize },
    #[error("MDS violation: nodes {nodes:?} do not determine the message")]
    MdsViolation { nodes: Vec<usize> },
    #[error("share file: {0}")]
    ShareFormat(String),
    #[error(transparent)]
    Framing(#[from] FramingError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One source stripe: `k` units of `α` symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    units: Vec<Vector>,
}

impl Message {
    pub fn new(code: &MsrCode, units: Vec<Vector>) -> Result<Self, CodecError> {
        if units.len() != code.k()
            || units
                .iter()
                .any(|u| u.len() != code.alpha() || u.field() != code.field())
        {
            return Err(CodecError::Dimension(format!(
                "a message needs {} units of {} symbols over {}",
                code.k(),
                code.alpha(),
                code.field()
            )));
        }
        Ok(Message { units })
    }

    /// Splits `k·α` symbols into consecutive units.
    pub fn from_symbols(code: &MsrCode, symbols: &[u32]) -> Result<Self, CodecError> {
        let a = code.alpha();
        if symbols.len() != code.k() * a {
            return Err(CodecError::Dimension(format!(
                "expected {} symbols, got {}",
                code.k() * a,
                symbols.len()
            )));
        }
        let units = symbols
            .chunks(a)
            .map(|c| Vector::new(code.field(), c.to_vec()))
            .collect::<Result<_, _>>()?;
        Ok(Message { units })
    }

    pub fn zeros(code: &MsrCode) -> Self {
        Message {
            units: (0..code.k())
                .map(|_| Vector::zeros(code.field(), code.alpha()))
                .collect(),
        }
    }

    pub fn random<R: Rng>(code: &MsrCode, rng: &mut R) -> Self {
        let q = code.field().order();
        let symbols: Vec<u32> = (0..code.k() * code.alpha())
            .map(|_| rng.gen_range(0..q))
            .collect();
        Self::from_symbols(code, &symbols).expect("sized to the code")
    }

    pub fn units(&self) -> &[Vector] {
        &self.units
    }

    /// `w = (w_1, .., w_k)` flattened.
    pub fn to_symbols(&self) -> Vec<u32> {
        self.units
            .iter()
            .flat_map(|u| u.as_slice().to_vec())
            .collect()
    }

    fn as_vector(&self) -> Vector {
        let f = self.units[0].field();
        Vector::new(f, self.to_symbols()).expect("valid symbols")
    }

    pub fn add(&self, other: &Message) -> Result<Message, CodecError> {
        let units = self
            .units
            .iter()
            .zip(&other.units)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        Ok(Message { units })
    }
}

/// The `α` symbols stored at one node (1-based id).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeShare {
    pub node: usize,
    pub symbols: Vector,
}

impl NodeShare {
    pub fn add(&self, other: &NodeShare) -> Result<NodeShare, CodecError> {
        Ok(NodeShare {
            node: self.node,
            symbols: self.symbols.add(&other.symbols)?,
        })
    }
}

/// Share of one node.
pub fn encode_node(code: &MsrCode, msg: &Message, node: usize) -> Result<NodeShare, CodecError> {
    check_node(code, node)?;
    let gen = code.node_generator(node);
    let symbols = gen.transpose().mul_vec(&msg.as_vector())?;
    Ok(NodeShare { node, symbols })
}

/// Shares of all `n` nodes, in node order.
pub fn encode(code: &MsrCode, msg: &Message) -> Result<Vec<NodeShare>, CodecError> {
    if msg.units.len() != code.k() || msg.units[0].field() != code.field() {
        return Err(CodecError::Dimension("message does not match code".into()));
    }
    (1..=code.n()).map(|n| encode_node(code, msg, n)).collect()
}

fn check_node(code: &MsrCode, node: usize) -> Result<(), CodecError> {
    if !(1..=code.n()).contains(&node) {
        return Err(CodecError::NodeOutOfRange { node, n: code.n() });
    }
    Ok(())
}

/// Checks that `nodes` are distinct and in range.
pub fn check_node_set(code: &MsrCode, nodes: &[usize]) -> Result<(), CodecError> {
    for (i, &n) in nodes.iter().enumerate() {
        check_node(code, n)?;
        if nodes[..i].contains(&n) {
            return Err(CodecError::DuplicateNode(n));
        }
    }
    Ok(())
}

/// Rebuilds the message from any `k` shares.
pub fn dc_decode(code: &MsrCode, shares: &[NodeShare]) -> Result<Message, CodecError> {
    if shares.len() != code.k() {
        return Err(CodecError::ShareCount {
            expected: code.k(),
            got: shares.len(),
        });
    }
    let nodes: Vec<usize> = shares.iter().map(|s| s.node).collect();
    check_node_set(code, &nodes)?;
    if shares.iter().any(|s| s.symbols.len() != code.alpha()) {
        return Err(CodecError::Dimension(
            "share length differs from alpha".into(),
        ));
    }
    let collector = code.collector_matrix(&nodes);
    let y: Vec<u32> = shares
        .iter()
        .flat_map(|s| s.symbols.as_slice().to_vec())
        .collect();
    let y = Vector::new(code.field(), y)?;
    match collector.transpose().solve(&y) {
        Ok(w) => Message::from_symbols(code, w.as_slice()),
        Err(LinalgError::Singular) => Err(CodecError::MdsViolation { nodes }),
        Err(e) => Err(e.into()),
    }
}

/// `kα × kα` decoding map for a node set, or an MDS violation.
pub fn decoding_matrix(code: &MsrCode, nodes: &[usize]) -> Result<Matrix, CodecError> {
    check_node_set(code, nodes)?;
    code.collector_matrix(nodes)
        .transpose()
        .inverse()
        .map_err(|_| CodecError::MdsViolation {
            nodes: nodes.to_vec(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_53, fixture_42_gf5, orthogonal_code};
    use crate::linalg::subsets;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_message_gives_zero_shares() {
        let code = orthogonal_code();
        for s in encode(&code, &Message::zeros(&code)).unwrap() {
            assert!(s.symbols.is_zero());
        }
    }

    #[test]
    fn fixture_parity_shares() {
        let code = fixture_42_gf5();
        let msg = Message::from_symbols(&code, &[1, 0, 0, 0]).unwrap();
        let shares = encode(&code, &msg).unwrap();
        assert_eq!(shares[2].symbols.as_slice(), &[1, 0]);
        assert_eq!(shares[3].symbols.as_slice(), &[2, 0]);
    }

    #[test]
    fn unit_messages_read_out_encoding_rows() {
        let code = orthogonal_code();
        for l in 0..3 {
            for r in 0..3 {
                let mut sym = vec![0u32; 9];
                sym[l * 3 + r] = 1;
                let shares = encode(&code, &Message::from_symbols(&code, &sym).unwrap()).unwrap();
                for i in 0..3 {
                    assert_eq!(shares[3 + i].symbols.as_slice(), code.enc(i, l).row(r));
                }
            }
        }
    }

    #[test]
    fn decode_from_every_subset() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for code in [orthogonal_code(), fixture_42_gf5(), build_53(2, 1).unwrap()] {
            let msg = Message::random(&code, &mut rng);
            let shares = encode(&code, &msg).unwrap();
            for set in subsets(code.n(), code.k()) {
                let picked: Vec<NodeShare> = set.iter().map(|&i| shares[i].clone()).collect();
                assert_eq!(dc_decode(&code, &picked).unwrap(), msg);
            }
        }
    }

    #[test]
    fn decode_errors() {
        let code = orthogonal_code();
        let shares = encode(&code, &Message::zeros(&code)).unwrap();
        assert!(matches!(
            dc_decode(&code, &shares[..2]),
            Err(CodecError::ShareCount { .. })
        ));
        let dup = vec![shares[0].clone(), shares[0].clone(), shares[1].clone()];
        assert_eq!(dc_decode(&code, &dup), Err(CodecError::DuplicateNode(1)));
        let broken = code
            .with_perturbed_entry(0, 0, 0, 0, 0)
            .unwrap()
            .with_perturbed_entry(0, 0, 1, 0, 0)
            .unwrap()
            .with_perturbed_entry(0, 0, 2, 0, 0)
            .unwrap();
        // parity 1 no longer sees the first symbol of unit 1
        let picked = vec![shares[1].clone(), shares[2].clone(), shares[3].clone()];
        let picked: Vec<NodeShare> = picked
            .into_iter()
            .map(|s| encode_node(&broken, &Message::zeros(&broken), s.node).unwrap())
            .collect();
        assert_eq!(
            dc_decode(&broken, &picked),
            Err(CodecError::MdsViolation {
                nodes: vec![2, 3, 4]
            })
        );
    }
}
