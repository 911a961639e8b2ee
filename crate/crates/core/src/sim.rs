//! Single-process storage cluster: ingest stripes, fail and repair nodes,
//! meter repair traffic and check durability.
//!
//! Scenario files hold one command per line; `#` starts a comment.
//!
//! ```text
//! ingest hex:48656c6c6f       # raw bytes (GF(2^m) only)
//! ingest text:hello world
//! ingest symbols 1,2,3,4
//! ingest random 18 seed=7     # 18 uniform field symbols
//! fail 1
//! repair 1 survivors=2,3,4,5,6
//! collect 3,4,5
//! assert
//! ```

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{
    bytes_to_symbols, check_node_set, dc_decode, encode, CodecError, Message, NodeShare,
};
use crate::construct::MsrCode;
use crate::linalg::subsets;
use crate::repair::{execute_repair, plan_repair, RepairError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("event {event}: scenario violation: {message}")]
    Violation { event: usize, message: String },
    #[error("event {event}: assertion failed: {witness}")]
    Assertion { event: usize, witness: String },
    #[error("event {event}: {source}")]
    Repair { event: usize, source: RepairError },
    #[error("event {event}: {source}")]
    Codec { event: usize, source: CodecError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestData {
    Bytes(Vec<u8>),
    Symbols(Vec<u32>),
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Ingest(IngestData),
    Fail(usize),
    /// `None` picks the `d` lowest-numbered live nodes.
    Repair {
        node: usize,
        survivors: Option<Vec<usize>>,
    },
    Collect(Vec<usize>),
    Assert,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Ingest(IngestData::Bytes(b)) => write!(f, "ingest hex:{}", hex::encode(b)),
            Event::Ingest(IngestData::Symbols(s)) => write!(f, "ingest symbols {}", join(s)),
            Event::Ingest(IngestData::Random { count, seed }) => {
                write!(f, "ingest random {count} seed={seed}")
            }
            Event::Fail(n) => write!(f, "fail {n}"),
            Event::Repair {
                node,
                survivors: None,
            } => write!(f, "repair {node}"),
            Event::Repair {
                node,
                survivors: Some(s),
            } => write!(f, "repair {node} survivors={}", join(s)),
            Event::Collect(nodes) => write!(f, "collect {}", join(nodes)),
            Event::Assert => write!(f, "assert"),
        }
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scenario {
    pub events: Vec<Event>,
}

fn parse_list<T: FromStr>(text: &str) -> Option<Vec<T>> {
    if text.is_empty() {
        return Some(Vec::new());
    }
    text.split(',').map(|x| x.trim().parse().ok()).collect()
}

fn parse_event(line: &str) -> Result<Event, String> {
    let (cmd, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let rest = rest.trim();
    let node = |s: &str| s.parse::<usize>().map_err(|_| format!("bad node id {s:?}"));
    match cmd {
        "ingest" => {
            if let Some(h) = rest.strip_prefix("hex:") {
                hex::decode(h.trim())
                    .map(|b| Event::Ingest(IngestData::Bytes(b)))
                    .map_err(|e| format!("bad hex: {e}"))
            } else if let Some(t) = rest.strip_prefix("text:") {
                Ok(Event::Ingest(IngestData::Bytes(t.as_bytes().to_vec())))
            } else if let Some(s) = rest.strip_prefix("symbols") {
                let s: String = s.split_whitespace().collect();
                parse_list(&s)
                    .map(|v| Event::Ingest(IngestData::Symbols(v)))
                    .ok_or_else(|| format!("bad symbol list {s:?}"))
            } else if let Some(r) = rest.strip_prefix("random") {
                let mut parts = r.split_whitespace();
                let count = parts
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or("random needs a symbol count")?;
                let seed = match parts.next() {
                    Some(p) => p
                        .strip_prefix("seed=")
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| format!("bad seed {p:?}"))?,
                    None => 0,
                };
                if parts.next().is_some() {
                    return Err("trailing tokens after random".into());
                }
                Ok(Event::Ingest(IngestData::Random { count, seed }))
            } else {
                Err("ingest expects hex:, text:, symbols or random".into())
            }
        }
        "fail" => Ok(Event::Fail(node(rest)?)),
        "repair" => {
            let mut parts = rest.split_whitespace();
            let n = node(parts.next().ok_or("repair needs a node id")?)?;
            let survivors = match parts.next() {
                Some(p) => Some(
                    p.strip_prefix("survivors=")
                        .and_then(parse_list)
                        .ok_or_else(|| format!("bad survivor list {p:?}"))?,
                ),
                None => None,
            };
            if parts.next().is_some() {
                return Err("trailing tokens after repair".into());
            }
            Ok(Event::Repair { node: n, survivors })
        }
        "collect" => {
            let s: String = rest.split_whitespace().collect();
            parse_list(&s)
                .filter(|v: &Vec<usize>| !v.is_empty())
                .map(Event::Collect)
                .ok_or_else(|| format!("bad node list {rest:?}"))
        }
        "assert" if rest.is_empty() => Ok(Event::Assert),
        _ => Err(format!("unknown command {line:?}")),
    }
}

impl FromStr for Scenario {
    type Err = SimError;

    fn from_str(text: &str) -> Result<Self, SimError> {
        let mut events = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            events.push(parse_event(line).map_err(|message| SimError::Parse {
                line: i + 1,
                message,
            })?);
        }
        Ok(Scenario { events })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Traffic of one repair event across all stripes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairRecord {
    pub node: usize,
    pub survivors: Vec<usize>,
    pub source: &'static str,
    pub stripes: usize,
    /// Symbols downloaded per stripe.
    pub symbols_per_stripe: usize,
    /// `k·α` symbols a full decode would move per stripe.
    pub naive_per_stripe: usize,
    /// Repaired share equals the original encoding on every stripe.
    pub exact: bool,
}

impl RepairRecord {
    pub fn symbols(&self) -> usize {
        self.symbols_per_stripe * self.stripes
    }

    pub fn naive_symbols(&self) -> usize {
        self.naive_per_stripe * self.stripes
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficSummary {
    pub repairs: usize,
    pub per_repair: Vec<usize>,
    pub symbols: usize,
    pub naive_symbols: usize,
    /// Naive over measured traffic; `None` before any traffic.
    pub savings_factor: Option<Ratio<u64>>,
}

#[derive(Debug, Clone)]
pub struct Cluster {
    code: MsrCode,
    /// Original encoding, `[node - 1][stripe]`.
    original: Vec<Vec<NodeShare>>,
    /// Current contents; `None` for a failed node.
    stored: Vec<Option<Vec<NodeShare>>>,
    messages: Vec<Message>,
    repairs: Vec<RepairRecord>,
    log: Vec<String>,
}

impl Cluster {
    pub fn new(code: MsrCode) -> Self {
        let n = code.n();
        Cluster {
            code,
            original: vec![Vec::new(); n],
            stored: vec![Some(Vec::new()); n],
            messages: Vec::new(),
            repairs: Vec::new(),
            log: Vec::new(),
        }
    }

    pub fn code(&self) -> &MsrCode {
        &self.code
    }

    pub fn stripes(&self) -> usize {
        self.messages.len()
    }

    pub fn failed(&self) -> Option<usize> {
        self.stored.iter().position(Option::is_none).map(|i| i + 1)
    }

    pub fn live_nodes(&self) -> Vec<usize> {
        (1..=self.code.n())
            .filter(|&n| self.stored[n - 1].is_some())
            .collect()
    }

    /// Stored shares of a node, `None` while it is failed.
    pub fn stored(&self, node: usize) -> Option<&[NodeShare]> {
        self.stored.get(node - 1)?.as_deref()
    }

    pub fn repairs(&self) -> &[RepairRecord] {
        &self.repairs
    }

    pub fn log(&self) -> &[String] {
        &self.log
    }

    fn symbols_for(&self, data: &IngestData) -> Result<Vec<u32>, CodecError> {
        let stripe = self.code.k() * self.code.alpha();
        let field = self.code.field();
        let mut symbols = match data {
            IngestData::Bytes(b) => bytes_to_symbols(field, b, stripe)?,
            IngestData::Symbols(s) => {
                if let Some(&v) = s.iter().find(|&&v| !field.contains(v)) {
                    return Err(CodecError::Dimension(format!("{v} is not in {field}")));
                }
                s.clone()
            }
            IngestData::Random { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| rng.gen_range(0..field.order()))
                    .collect()
            }
        };
        symbols.resize(symbols.len().div_ceil(stripe) * stripe, 0);
        Ok(symbols)
    }

    fn ingest(&mut self, data: &IngestData) -> Result<usize, CodecError> {
        let symbols = self.symbols_for(data)?;
        let stripe = self.code.k() * self.code.alpha();
        let mut added = 0;
        for chunk in symbols.chunks(stripe) {
            let msg = Message::from_symbols(&self.code, chunk)?;
            for share in encode(&self.code, &msg)? {
                let i = share.node - 1;
                self.original[i].push(share.clone());
                if let Some(s) = &mut self.stored[i] {
                    s.push(share);
                }
            }
            self.messages.push(msg);
            added += 1;
        }
        Ok(added)
    }

    /// Decodes every stripe from `nodes` and compares with the ingested data.
    fn collect(&self, nodes: &[usize]) -> Result<Option<String>, CodecError> {
        for (s, msg) in self.messages.iter().enumerate() {
            let shares: Vec<NodeShare> = nodes
                .iter()
                .map(|&n| self.stored[n - 1].as_ref().expect("live node")[s].clone())
                .collect();
            if &dc_decode(&self.code, &shares)? != msg {
                return Ok(Some(format!(
                    "stripe {s} decodes wrongly from nodes {nodes:?}"
                )));
            }
        }
        Ok(None)
    }

    /// Live shares equal the original encoding and every live `k`-subset
    /// decodes every stripe.
    fn durability_witness(&self) -> Option<String> {
        for node in self.live_nodes() {
            let stored = self.stored[node - 1].as_ref().expect("live node");
            if let Some(s) = (0..stored.len()).find(|&s| stored[s] != self.original[node - 1][s]) {
                return Some(format!(
                    "node {node} stripe {s} differs from its original encoding"
                ));
            }
        }
        let live = self.live_nodes();
        for set in subsets(live.len(), self.code.k()) {
            let nodes: Vec<usize> = set.iter().map(|&i| live[i]).collect();
            match self.collect(&nodes) {
                Ok(None) => {}
                Ok(Some(w)) => return Some(w),
                Err(e) => return Some(format!("nodes {nodes:?}: {e}")),
            }
        }
        None
    }

    fn repair(
        &mut self,
        node: usize,
        survivors: Option<&[usize]>,
    ) -> Result<RepairRecord, RepairError> {
        let default;
        let survivors = match survivors {
            Some(s) => s,
            None => {
                default = self
                    .live_nodes()
                    .into_iter()
                    .filter(|&s| s != node)
                    .take(self.code.d())
                    .collect::<Vec<_>>();
                &default
            }
        };
        let plan = plan_repair(&self.code, node, Some(survivors))?;
        let mut rebuilt = Vec::with_capacity(self.stripes());
        let mut per_stripe = 0;
        for s in 0..self.stripes() {
            let helpers: Vec<NodeShare> = plan
                .survivors
                .iter()
                .map(|&h| self.stored[h - 1].as_ref().expect("live survivor")[s].clone())
                .collect();
            let (share, bw) = execute_repair(&self.code, &plan, &helpers)?;
            per_stripe = bw.symbols;
            rebuilt.push(share);
        }
        let record = RepairRecord {
            node,
            survivors: plan.survivors.clone(),
            source: plan.source.label(),
            stripes: rebuilt.len(),
            symbols_per_stripe: if rebuilt.is_empty() { 0 } else { per_stripe },
            naive_per_stripe: self.code.k() * self.code.alpha(),
            exact: rebuilt == self.original[node - 1],
        };
        self.stored[node - 1] = Some(rebuilt);
        self.repairs.push(record.clone());
        Ok(record)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventOutcome {
    pub event: Event,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioReport {
    pub outcomes: Vec<EventOutcome>,
    pub repairs: Vec<RepairRecord>,
    pub traffic: TrafficSummary,
}

impl ScenarioReport {
    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, o) in self.outcomes.iter().enumerate() {
            let _ = writeln!(out, "event {} {}: {}", i + 1, o.event, o.detail);
        }
        let t = &self.traffic;
        let _ = writeln!(out, "repairs {}", t.repairs);
        let _ = writeln!(
            out,
            "traffic {} symbols (naive {})",
            t.symbols, t.naive_symbols
        );
        match t.savings_factor {
            Some(r) => {
                let _ = writeln!(out, "savings {r}");
            }
            None => out.push_str("savings n/a\n"),
        }
        out
    }
}

/// Aggregate repair traffic of a cluster.
pub fn traffic_summary(cluster: &Cluster) -> TrafficSummary {
    let per_repair: Vec<usize> = cluster.repairs.iter().map(RepairRecord::symbols).collect();
    let symbols: usize = per_repair.iter().sum();
    let naive_symbols: usize = cluster
        .repairs
        .iter()
        .map(RepairRecord::naive_symbols)
        .sum();
    TrafficSummary {
        repairs: per_repair.len(),
        per_repair,
        symbols,
        naive_symbols,
        savings_factor: (symbols > 0).then(|| Ratio::new(naive_symbols as u64, symbols as u64)),
    }
}

/// Executes the events in order, stopping at the first violation or failed
/// assertion.
pub fn run_scenario(
    cluster: &mut Cluster,
    scenario: &Scenario,
) -> Result<ScenarioReport, SimError> {
    let mut outcomes = Vec::with_capacity(scenario.events.len());
    for (idx, event) in scenario.events.iter().enumerate() {
        let event_no = idx + 1;
        let violation = |message: String| SimError::Violation {
            event: event_no,
            message,
        };
        let codec = |source: CodecError| SimError::Codec {
            event: event_no,
            source,
        };
        let detail = match event {
            Event::Ingest(data) => {
                if let Some(f) = cluster.failed() {
                    return Err(violation(format!("ingest while node {f} is failed")));
                }
                let added = cluster.ingest(data).map_err(codec)?;
                format!("{added} stripes ({} total)", cluster.stripes())
            }
            Event::Fail(node) => {
                check_node_set(&cluster.code, &[*node]).map_err(codec)?;
                if let Some(f) = cluster.failed() {
                    return Err(violation(format!(
                        "node {node} cannot fail while node {f} is failed"
                    )));
                }
                cluster.stored[node - 1] = None;
                format!("node {node} down")
            }
            Event::Repair { node, survivors } => {
                if cluster.failed() != Some(*node) {
                    return Err(violation(format!("node {node} is not failed")));
                }
                if let Some(s) = survivors {
                    check_node_set(&cluster.code, s).map_err(codec)?;
                    if let Some(dead) = s.iter().find(|&&x| cluster.stored[x - 1].is_none()) {
                        return Err(violation(format!("survivor {dead} is not live")));
                    }
                }
                let r = cluster
                    .repair(*node, survivors.as_deref())
                    .map_err(|source| SimError::Repair {
                        event: event_no,
                        source,
                    })?;
                format!(
                    "from {} via {}: {} symbols/stripe (naive {}), {} stripes, {}",
                    join(&r.survivors),
                    r.source,
                    r.symbols_per_stripe,
                    r.naive_per_stripe,
                    r.stripes,
                    if r.exact { "exact" } else { "NOT exact" }
                )
            }
            Event::Collect(nodes) => {
                if nodes.len() != cluster.code.k() {
                    return Err(violation(format!(
                        "collect needs {} nodes, got {}",
                        cluster.code.k(),
                        nodes.len()
                    )));
                }
                check_node_set(&cluster.code, nodes).map_err(codec)?;
                if let Some(dead) = nodes.iter().find(|&&x| cluster.stored[x - 1].is_none()) {
                    return Err(violation(format!("node {dead} is failed")));
                }
                if let Some(witness) = cluster.collect(nodes).map_err(codec)? {
                    return Err(SimError::Assertion {
                        event: event_no,
                        witness,
                    });
                }
                format!("{} stripes decoded", cluster.stripes())
            }
            Event::Assert => {
                if let Some(witness) = cluster.durability_witness() {
                    return Err(SimError::Assertion {
                        event: event_no,
                        witness,
                    });
                }
                format!("durable ({} live nodes)", cluster.live_nodes().len())
            }
        };
        cluster.log.push(format!("{event}: {detail}"));
        outcomes.push(EventOutcome {
            event: event.clone(),
            detail,
        });
    }
    Ok(ScenarioReport {
        outcomes,
        repairs: cluster.repairs.clone(),
        traffic: traffic_summary(cluster),
    })
}
