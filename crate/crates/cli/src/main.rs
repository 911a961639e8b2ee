use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use emsr_core::codec::{decode_file, encode_bytes, encode_symbols, ShareFile, SHARE_MAGIC};
use emsr_core::construct::{
    build_53, build_general, code_hash, named_code, parse_code_spec, write_code_spec,
    ConstructError, MsrCode, SeedOverrides, NAMED_CODES,
};
use emsr_core::gf::Field;
use emsr_core::linalg::Matrix;
use emsr_core::repair::{
    bruteforce_plan_search, execute_repair, plan_repair, write_plan, BandwidthReport,
};
use emsr_core::sim::{run_scenario, Cluster, Scenario};
use emsr_core::verify::{
    verify_all, verify_construction, Status, DEFAULT_SAMPLES, DEFAULT_SAMPLE_SEED,
};

/// Exact-repair MSR codes: construction, encoding, repair and verification.
#[derive(Parser)]
#[command(name = "emsr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code and write its spec file.
    Construct(ConstructArgs),
    /// Print a summary of a code spec.
    Inspect { spec: PathBuf },
    /// Encode a file into one share file per node.
    Encode(EncodeArgs),
    /// Decode the original data from k share files.
    Collect(CollectArgs),
    /// Mark a node as failed by renaming its share file to `*.failed`.
    Fail {
        /// Directory holding `node-<i>.share` files.
        #[arg(long)]
        dir: PathBuf,
        node: usize,
    },
    /// Regenerate a failed node's share from d survivors.
    Repair(RepairArgs),
    /// Run the verification suite on one or more code specs.
    Verify(VerifyArgs),
    /// Run a scenario file against a simulated cluster.
    Simulate { spec: PathBuf, scenario: PathBuf },
}

#[derive(Args)]
struct ConstructArgs {
    n: Option<usize>,
    k: Option<usize>,
    d: Option<usize>,
    /// Field, e.g. `gf(7)`, `gf(8)` or `gf(4,0b111)`.
    #[arg(long)]
    field: Option<String>,
    /// Basis matrix V as a literal `a,b;c,d`.
    #[arg(long)]
    v: Option<String>,
    /// Coefficient matrix M as a literal.
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    kappa: Option<u32>,
    /// α and β of the (5,3,4) code, each 1 or 2.
    #[arg(long)]
    alpha: Option<u32>,
    #[arg(long)]
    beta: Option<u32>,
    /// A bundled code instead of (n, k, d).
    #[arg(long, conflicts_with_all = ["n", "field", "v", "m", "kappa", "alpha", "beta"])]
    fixture: Option<String>,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    spec: PathBuf,
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Input is whitespace-separated field symbols instead of raw bytes.
    #[arg(long)]
    symbols: bool,
    /// Write binary share files instead of text.
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct CollectArgs {
    spec: PathBuf,
    #[arg(long)]
    dir: PathBuf,
    /// Nodes to decode from; the first k live nodes when omitted.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RepairArgs {
    spec: PathBuf,
    #[arg(long)]
    dir: PathBuf,
    node: usize,
    /// Helper nodes; the d lowest-numbered live nodes when omitted.
    #[arg(long, value_delimiter = ',')]
    survivors: Option<Vec<usize>>,
    /// Search projections exhaustively instead of using the structural plan.
    #[arg(long)]
    brute_force: bool,
    /// Also write the plan to this path.
    #[arg(long)]
    plan_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(required = true)]
    specs: Vec<PathBuf>,
    /// Random messages per node for end-to-end repair checks.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_SEED)]
    seed: u64,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Write the JSON report(s) here.
    #[arg(long)]
    report: Option<PathBuf>,
}

enum Failure {
    /// Verification or runtime failure.
    Failed(anyhow::Error),
    Usage(String),
    Unsupported(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Failed(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct(a) => construct(a),
        Command::Inspect { spec } => inspect(&spec),
        Command::Encode(a) => encode(a),
        Command::Collect(a) => collect(a),
        Command::Fail { dir, node } => fail(&dir, node),
        Command::Repair(a) => repair(a),
        Command::Verify(a) => verify(a),
        Command::Simulate { spec, scenario } => simulate(&spec, &scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Failed(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Unsupported(m)) => {
            eprintln!("unsupported: {m}");
            ExitCode::from(3)
        }
    }
}

fn load_code(path: &Path) -> Result<MsrCode, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_code_spec(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn share_path(dir: &Path, node: usize) -> PathBuf {
    dir.join(format!("node-{node}.share"))
}

fn read_share(code: &MsrCode, dir: &Path, node: usize) -> Result<(ShareFile, bool), Failure> {
    let path = share_path(dir, node);
    let data = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let share = ShareFile::parse(&data).with_context(|| format!("parsing {}", path.display()))?;
    share
        .check_against(code)
        .with_context(|| format!("checking {}", path.display()))?;
    if share.node != node {
        return Err(Failure::Failed(anyhow!(
            "{} holds node {}",
            path.display(),
            share.node
        )));
    }
    Ok((share, data.starts_with(SHARE_MAGIC)))
}

fn live_nodes(code: &MsrCode, dir: &Path) -> Vec<usize> {
    (1..=code.n())
        .filter(|&i| share_path(dir, i).is_file())
        .collect()
}

fn write_output(out: Option<&Path>, data: &[u8]) -> CmdResult {
    match out {
        Some(p) => fs::write(p, data).with_context(|| format!("writing {}", p.display()))?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(data)
                .context("writing stdout")?;
        }
    }
    Ok(())
}

fn parse_field(s: &str) -> Result<Field, Failure> {
    s.parse::<Field>()
        .map_err(|e| Failure::Usage(format!("--field {s}: {e}")))
}

fn parse_matrix(field: &Field, flag: &str, s: &str) -> Result<Matrix, Failure> {
    Matrix::parse_literal(field, s).map_err(|e| Failure::Usage(format!("--{flag}: {e}")))
}

const OPEN_REGION: &str =
    "supported parameters are n >= 2k with 2k-1 <= d <= n-1, the (5,3,4) code, \
     and bundled fixtures; other low-rate cases (n < 2k) have no known construction here";

fn construct(a: ConstructArgs) -> CmdResult {
    let code = match &a.fixture {
        Some(name) => named_code(name).ok_or_else(|| {
            Failure::Usage(format!(
                "unknown fixture {name:?}; known: {}",
                NAMED_CODES.join(", ")
            ))
        })?,
        None => {
            let (Some(n), Some(k), Some(d)) = (a.n, a.k, a.d) else {
                return Err(Failure::Usage("construct needs N K D or --fixture".into()));
            };
            construct_params(&a, n, k, d)?
        }
    };
    let check = verify_construction(&code);
    eprintln!(
        "{} {} code, hash {}",
        code.params(),
        code.kind().label(),
        code_hash(&code)
    );
    if check.status == Status::Fail {
        for v in &check.violations {
            eprintln!("violation: {v}");
        }
        return Err(Failure::Failed(anyhow!(
            "construction constraints violated"
        )));
    }
    write_output(a.out.as_deref(), write_code_spec(&code).as_bytes())
}

fn construct_params(a: &ConstructArgs, n: usize, k: usize, d: usize) -> Result<MsrCode, Failure> {
    if (n, k, d) == (5, 3, 4) {
        if a.v.is_some() || a.m.is_some() || a.kappa.is_some() {
            return Err(Failure::Usage(
                "the (5,3,4) code takes --alpha/--beta only".into(),
            ));
        }
        if let Some(f) = &a.field {
            let field = parse_field(f)?;
            if field.order() != 3 {
                return Err(Failure::Unsupported(format!(
                    "the (5,3,4) code is defined over GF(3), not {field}"
                )));
            }
        }
        return build_53(a.alpha.unwrap_or(1), a.beta.unwrap_or(1))
            .map_err(|e| Failure::Usage(e.to_string()));
    }
    if a.alpha.is_some() || a.beta.is_some() {
        return Err(Failure::Usage(
            "--alpha/--beta apply to (5,3,4) only".into(),
        ));
    }
    let field = a.field.as_deref().map(parse_field).transpose()?;
    let seed_field = match &field {
        Some(f) => f.clone(),
        None => emsr_core::construct::default_field(n.saturating_sub(k))
            .map_err(|e| Failure::Unsupported(e.to_string()))?,
    };
    let overrides = SeedOverrides {
        v: a.v
            .as_deref()
            .map(|s| parse_matrix(&seed_field, "v", s))
            .transpose()?,
        m: a.m
            .as_deref()
            .map(|s| parse_matrix(&seed_field, "m", s))
            .transpose()?,
        kappa: a.kappa,
    };
    build_general(n, k, d, Some(&seed_field), &overrides).map_err(|e| match e {
        ConstructError::Params(m) => Failure::Unsupported(format!("{m}; {OPEN_REGION}")),
        ConstructError::FieldTooSmall { .. } | ConstructError::NoKappa(_) => {
            Failure::Unsupported(e.to_string())
        }
        other => Failure::Failed(anyhow!(other)),
    })
}

fn inspect(spec: &Path) -> CmdResult {
    let code = load_code(spec)?;
    let (k, d, a) = (code.k(), code.d(), code.alpha());
    println!("params      {}", code.params());
    println!("kind        {}", code.kind().label());
    println!("hash        {}", code_hash(&code));
    println!("alpha       {a}");
    println!("stripe      {} symbols", k * a);
    println!("repair      {d} symbols from {d} nodes (naive {})", k * a);
    println!(
        "savings     {}",
        BandwidthReport {
            links: d,
            symbols: d,
            naive: k * a
        }
        .savings_factor()
    );
    for i in 0..code.n() - k {
        for l in 0..k {
            println!("enc p{} u{}  {}", i + 1, l + 1, code.enc(i, l).to_literal());
        }
    }
    let check = verify_construction(&code);
    if check.violations.is_empty() {
        println!("constraints ok");
    }
    for v in &check.violations {
        println!("violation   {v}");
    }
    Ok(())
}

fn encode(a: EncodeArgs) -> CmdResult {
    let code = load_code(&a.spec)?;
    let data = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let files = if a.symbols {
        let text = String::from_utf8(data)
            .map_err(|_| Failure::Usage("symbol input is not text".into()))?;
        let symbols = text
            .split_whitespace()
            .map(|t| t.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Usage(format!("bad symbol: {e}")))?;
        encode_symbols(&code, &symbols).context("encoding")?
    } else {
        encode_bytes(&code, &data).context("encoding")?
    };
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for f in &files {
        let path = share_path(&a.out_dir, f.node);
        let bytes = if a.binary {
            f.to_binary()
        } else {
            f.to_text().into_bytes()
        };
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "wrote {} shares of {} stripes to {}",
        files.len(),
        files.first().map_or(0, |f| f.stripes.len()),
        a.out_dir.display()
    );
    Ok(())
}

fn collect(a: CollectArgs) -> CmdResult {
    let code = load_code(&a.spec)?;
    let nodes = match a.nodes {
        Some(n) => n,
        None => live_nodes(&code, &a.dir)
            .into_iter()
            .take(code.k())
            .collect(),
    };
    if nodes.len() != code.k() {
        return Err(Failure::Usage(format!(
            "need {} nodes, got {}",
            code.k(),
            nodes.len()
        )));
    }
    let files = nodes
        .iter()
        .map(|&n| read_share(&code, &a.dir, n).map(|(f, _)| f))
        .collect::<Result<Vec<_>, _>>()?;
    let data = decode_file(&code, &files).context("decoding")?;
    eprintln!("decoded from nodes {nodes:?}");
    write_output(a.out.as_deref(), &data)
}

fn fail(dir: &Path, node: usize) -> CmdResult {
    let from = share_path(dir, node);
    if !from.is_file() {
        return Err(Failure::Usage(format!("{} does not exist", from.display())));
    }
    let to = from.with_extension("share.failed");
    fs::rename(&from, &to).with_context(|| format!("renaming {}", from.display()))?;
    println!("node {node} failed: {}", to.display());
    Ok(())
}

fn repair(a: RepairArgs) -> CmdResult {
    let code = load_code(&a.spec)?;
    if !(1..=code.n()).contains(&a.node) {
        return Err(Failure::Usage(format!(
            "node {} outside 1..={}",
            a.node,
            code.n()
        )));
    }
    let live = live_nodes(&code, &a.dir);
    if live.contains(&a.node) {
        return Err(Failure::Usage(format!("node {} is not failed", a.node)));
    }
    let survivors = match a.survivors {
        Some(s) => s,
        None => live.iter().copied().take(code.d()).collect(),
    };
    if let Some(missing) = survivors.iter().find(|s| !live.contains(s)) {
        return Err(Failure::Usage(format!(
            "survivor {missing} has no share file"
        )));
    }
    let plan = if a.brute_force {
        bruteforce_plan_search(&code, a.node, &survivors)
    } else {
        plan_repair(&code, a.node, Some(&survivors))
    }
    .map_err(|e| Failure::Failed(anyhow!("planning repair of node {}: {e}", a.node)))?;
    let shares = plan
        .survivors
        .iter()
        .map(|&s| read_share(&code, &a.dir, s))
        .collect::<Result<Vec<_>, _>>()?;
    let binary = shares[0].1;
    let template = &shares[0].0;
    let stripes = template.stripes.len();
    if shares
        .iter()
        .any(|(f, _)| f.stripes.len() != stripes || f.payload != template.payload)
    {
        return Err(Failure::Failed(anyhow!(
            "survivor shares disagree on stripes"
        )));
    }
    let mut rebuilt = Vec::with_capacity(stripes);
    let mut report = None;
    for s in 0..stripes {
        let helpers = shares
            .iter()
            .map(|(f, _)| f.stripe_share(&code, s))
            .collect::<Result<Vec<_>, _>>()
            .context("reading stripes")?;
        let (share, bw) = execute_repair(&code, &plan, &helpers).context("repairing")?;
        rebuilt.push(share.symbols.as_slice().to_vec());
        report = Some(bw);
    }
    let out = ShareFile {
        code_hash: template.code_hash.clone(),
        node: a.node,
        alpha: template.alpha,
        width: template.width,
        payload: template.payload,
        stripes: rebuilt,
    };
    let path = share_path(&a.dir, a.node);
    let bytes = if binary {
        out.to_binary()
    } else {
        out.to_text().into_bytes()
    };
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    let plan_text = write_plan(&plan);
    if let Some(p) = &a.plan_out {
        fs::write(p, &plan_text).with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{plan_text}");
    let bw = report.unwrap_or(BandwidthReport {
        links: plan.survivors.len(),
        symbols: plan.survivors.len(),
        naive: code.k() * code.alpha(),
    });
    println!(
        "bandwidth {} symbols/stripe from {} nodes, naive {}, savings {}, total {} symbols over {stripes} stripes",
        bw.symbols,
        bw.links,
        bw.naive,
        bw.savings_factor(),
        bw.symbols * stripes
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn verify(a: VerifyArgs) -> CmdResult {
    let mut all_passed = true;
    let mut json = Vec::new();
    for spec in &a.specs {
        let code = load_code(spec)?;
        let report = verify_all(&code, a.samples, a.seed);
        all_passed &= report.passed;
        if a.json {
            println!("{}", report.to_json());
        } else {
            print_report(spec, &report);
        }
        json.push(report.to_json());
    }
    if let Some(p) = &a.report {
        let body = if json.len() == 1 {
            json.remove(0)
        } else {
            format!("[\n{}\n]", json.join(",\n"))
        };
        fs::write(p, body + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    if all_passed {
        Ok(())
    } else {
        Err(Failure::Failed(anyhow!("verification failed")))
    }
}

fn status(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skipped => "SKIP",
    }
}

fn print_report(spec: &Path, r: &emsr_core::verify::VerificationReport) {
    println!(
        "{}: {} {} ({})",
        spec.display(),
        r.params,
        r.kind,
        r.code_hash
    );
    println!(
        "  mds         {} ({} subsets)",
        status(r.mds.status),
        r.mds.subsets_checked
    );
    for w in &r.mds.failing {
        println!("    singular collector {w:?}");
    }
    if let Some(note) = &r.mds.note {
        println!("    {note}");
    }
    println!("  repair      {}", status(r.repair.status));
    for n in &r.repair.nodes {
        println!(
            "    node {} {} via {} from {:?}, {}/{} samples{}",
            n.node,
            status(n.status),
            n.source.as_deref().unwrap_or("-"),
            n.survivors,
            n.samples_passed,
            n.samples,
            n.error
                .as_ref()
                .map(|e| format!(": {e}"))
                .unwrap_or_default()
        );
    }
    println!("  constraints {}", status(r.constraints.status));
    for v in &r.constraints.violations {
        println!("    {v}");
    }
    println!("  dual        {}", status(r.dual.status));
    for w in r.dual.witnesses.iter().chain(&r.dual.note) {
        println!("    {w}");
    }
    println!(
        "  bandwidth   {} (savings {}, expected {})",
        status(r.bandwidth.status),
        r.bandwidth.savings_factor,
        r.bandwidth.expected_savings_factor
    );
    for w in &r.bandwidth.witnesses {
        println!("    {w}");
    }
    println!("  result      {}", if r.passed { "PASS" } else { "FAIL" });
}

fn simulate(spec: &Path, scenario: &Path) -> CmdResult {
    let code = load_code(spec)?;
    let text =
        fs::read_to_string(scenario).with_context(|| format!("reading {}", scenario.display()))?;
    let scenario: Scenario = text.parse().map_err(|e| Failure::Usage(format!("{e}")))?;
    let mut cluster = Cluster::new(code);
    let report = run_scenario(&mut cluster, &scenario).map_err(|e| {
        for line in cluster.log() {
            println!("{line}");
        }
        Failure::Failed(anyhow!(e))
    })?;
    print!("{}", report.to_text());
    Ok(())
}
