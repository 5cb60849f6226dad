//! Command-line front end. `run` never panics and returns the process exit code:
//! 0 success, 1 computed but failed verification, 2 input error.

use crate::catalog;
use crate::dtn::{dtn_map, verify_partition, Partition};
use crate::io::{self, IoError};
use crate::spectral::{eigenvalues_with, index_nullity_with, sigma_trace, ScanOptions, SpectralProblem};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "geonet", version, about = "Index, nullity and D-N maps of geodesic networks on the sphere")]
struct Cli {
    /// Output file (JSON); printed to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress informational output and warnings.
    #[arg(long, global = true)]
    quiet: bool,
    /// Seed recorded in reports.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override the eigenvalue declaration tolerance (sigma_min / sigma_max).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Include wall time in reports.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List or build catalog networks.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Eigenvalues and eigenfunctions in a window.
    Spectrum(SpectrumArgs),
    /// Morse index and nullity.
    Index(IndexArgs),
    /// Dirichlet-to-Neumann map at lambda = 0 on a set of boundary vertices.
    Dtn(DtnArgs),
    /// Check the index and nullity decompositions on a partition.
    Verify(VerifyArgs),
    /// Split an arc at fraction t.
    Refine(RefineArgs),
    /// Reverse the orientation of an arc.
    Flip(FlipArgs),
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    List,
    Build {
        name: String,
        /// Also write the standard partition (the net is then refined at the cut points).
        #[arg(long)]
        partition: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct NetArg {
    #[arg(long)]
    net: PathBuf,
    /// Constant potential d on every arc.
    #[arg(long)]
    d: Option<f64>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    net: NetArg,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true, required = true)]
    window: Vec<f64>,
    /// CSV of sigma_min samples.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-2)]
    step: f64,
}

#[derive(Args, Debug)]
struct IndexArgs {
    #[command(flatten)]
    net: NetArg,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct DtnArgs {
    #[command(flatten)]
    net: NetArg,
    /// Boundary vertex ids; defaults to every boundary vertex of the net.
    #[arg(long, value_delimiter = ',')]
    boundary: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    net: NetArg,
    #[arg(long)]
    partition: PathBuf,
}

#[derive(Args, Debug)]
struct RefineArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    arc: usize,
    #[arg(long)]
    t: f64,
}

#[derive(Args, Debug)]
struct FlipArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    arc: usize,
}

enum Failure {
    Input(String),
    Verification(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

struct Ctx<'a> {
    cli: &'a Cli,
    args: Vec<String>,
    hashes: BTreeMap<String, String>,
    started: Instant,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn say(&mut self, line: &str) {
        let _ = writeln!(self.out, "{line}");
    }

    fn warn(&mut self, warnings: &[String]) {
        if !self.cli.quiet {
            for w in warnings {
                let _ = writeln!(self.err, "warning: {w}");
            }
        }
    }

    fn read_net(&mut self, path: &Path) -> Result<crate::network::Network, Failure> {
        let text = io::read_text(path)?;
        self.hashes.insert(path.display().to_string(), io::sha256_hex(text.as_bytes()));
        let j: io::NetworkJson = serde_json::from_str(&text).map_err(IoError::from)?;
        Ok(io::network_from_json(&j)?)
    }

    fn problem(&mut self, a: &NetArg) -> Result<SpectralProblem, Failure> {
        let net = self.read_net(&a.net)?;
        match a.d {
            None => Ok(SpectralProblem::new(net)),
            Some(d) => {
                let n = net.num_arcs();
                SpectralProblem::with_potential(net, vec![d; n]).map_err(|e| Failure::Input(e.to_string()))
            }
        }
    }

    fn opts(&self) -> ScanOptions {
        let mut o = ScanOptions::default();
        if let Some(t) = self.cli.tol {
            o.declare_tol = t;
        }
        o
    }

    /// Writes `value` to `--out` or stdout.
    fn emit<T: serde::Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        let text = io::to_canonical(value)?;
        match &self.cli.out {
            Some(p) => io::write_atomic(p, &text)?,
            None => {
                let _ = self.out.write_all(text.as_bytes());
            }
        }
        Ok(())
    }

    fn report(&self, results: Value) -> Value {
        let mut r = json!({
            "command": self.args,
            "input_hashes": self.hashes,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.cli.seed,
            "results": results,
        });
        if self.cli.timing {
            r["wall_time_s"] = json!(self.started.elapsed().as_secs_f64());
        }
        r
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    if let Some(n) = std::env::var("GEONET_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut ctx = Ctx { cli: &cli, args: echo, hashes: BTreeMap::new(), started: Instant::now(), out, err };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| dispatch(&mut ctx)));
    match result {
        Ok(Ok(code)) => code,
        Ok(Err(Failure::Input(m))) => {
            let _ = writeln!(ctx.err, "error: {m}");
            2
        }
        Ok(Err(Failure::Verification(m))) => {
            let _ = writeln!(ctx.err, "error: {m}");
            1
        }
        Err(_) => {
            let _ = writeln!(ctx.err, "error: internal failure");
            2
        }
    }
}

fn dispatch(ctx: &mut Ctx) -> Outcome {
    match &ctx.cli.command {
        Command::Catalog(c) => cmd_catalog(ctx, c),
        Command::Spectrum(a) => cmd_spectrum(ctx, a),
        Command::Index(a) => cmd_index(ctx, a),
        Command::Dtn(a) => cmd_dtn(ctx, a),
        Command::Verify(a) => cmd_verify(ctx, a),
        Command::Refine(a) => {
            let net = ctx.read_net(&a.net)?;
            let r = net.refine(a.arc, a.t).map_err(|e| Failure::Input(e.to_string()))?;
            ctx.emit(&io::network_to_json(&r))?;
            Ok(0)
        }
        Command::Flip(a) => {
            let net = ctx.read_net(&a.net)?;
            let r = net.flip_orientation(a.arc).map_err(|e| Failure::Input(e.to_string()))?;
            ctx.emit(&io::network_to_json(&r))?;
            Ok(0)
        }
    }
}

fn cmd_catalog(ctx: &mut Ctx, c: &CatalogCmd) -> Outcome {
    match c {
        CatalogCmd::List => {
            for e in catalog::entries() {
                let (v, ed, f) = e.counts;
                ctx.say(&format!("{:<20} V={v:<3} E={ed:<3} F={f}", e.name));
            }
            Ok(0)
        }
        CatalogCmd::Build { name, partition } => {
            if catalog::find(name).is_none() {
                return Err(Failure::Input(format!("unknown catalog entry {name:?}")));
            }
            let fail = |e: catalog::CatalogError| Failure::Verification(e.to_string());
            let net = match partition {
                None => catalog::build(name).map_err(fail)?,
                Some(p) => {
                    let (net, cut) = catalog::standard_cut(name).map_err(fail)?;
                    let part = Partition::from_cut(&net, &cut).map_err(|e| Failure::Input(e.to_string()))?;
                    io::write_atomic(p, &io::to_canonical(&io::partition_to_json(&part))?)?;
                    net
                }
            };
            ctx.emit(&io::network_to_json(&net))?;
            Ok(0)
        }
    }
}

fn window(w: &[f64]) -> Result<(f64, f64), Failure> {
    match w {
        [a, b] if a.is_finite() && b.is_finite() && a < b => Ok((*a, *b)),
        _ => Err(Failure::Input(format!("bad window {w:?}"))),
    }
}

fn cmd_spectrum(ctx: &mut Ctx, a: &SpectrumArgs) -> Outcome {
    let prob = ctx.problem(&a.net)?;
    let (lo, hi) = window(&a.window)?;
    if !(a.step > 0.0) {
        return Err(Failure::Input("step must be positive".into()));
    }
    let mut opts = ctx.opts();
    opts.step = a.step;
    let spec = eigenvalues_with(&prob, lo, hi, &opts).map_err(|e| Failure::Verification(e.to_string()))?;
    ctx.warn(&spec.warnings);
    if let Some(path) = &a.trace {
        let start = lo.max(prob.floor() - 1e-9);
        let mut csv = String::from("lambda,sigma_min,ratio\n");
        for (x, s, r) in sigma_trace(&prob, start, hi, a.step) {
            csv.push_str(&format!("{x:.16e},{s:.16e},{r:.16e}\n"));
        }
        io::write_atomic(path, &csv)?;
    }
    if !ctx.cli.quiet && ctx.cli.out.is_some() {
        for e in &spec.eigenvalues {
            ctx.say(&format!("lambda={:.12} multiplicity={}", e.lambda, e.multiplicity));
        }
    }
    ctx.emit(&io::spectrum_to_json(&prob.net, &spec))?;
    Ok(0)
}

fn cmd_index(ctx: &mut Ctx, a: &IndexArgs) -> Outcome {
    let prob = ctx.problem(&a.net)?;
    let (lo, hi) = match &a.window {
        Some(w) => window(w)?,
        None if !prob.net.is_closed() => {
            return Err(Failure::Input("open network needs --window".into()));
        }
        None => (prob.floor() - 1e-9, 0.5),
    };
    let r = index_nullity_with(&prob, lo, hi, &ctx.opts()).map_err(|e| Failure::Verification(e.to_string()))?;
    ctx.warn(&r.warnings);
    let mut line = format!("Ind={} Nul={}", r.index, r.nullity);
    let mut results = json!({"index": r.index, "nullity": r.nullity});
    let mut code = 0;
    if prob.net.is_closed() && triple_up_to_refinement(&prob.net) {
        let f = prob.net.euler_counts().map(|c| c.2).map_err(|e| Failure::Input(e.to_string()))?;
        let pass = r.index + 1 == f && r.nullity == 3;
        line.push_str(if pass { " PASS" } else { " FAIL" });
        results["faces"] = json!(f);
        results["pass"] = json!(pass);
        code = if pass { 0 } else { 1 };
    }
    ctx.say(&line);
    if ctx.cli.out.is_some() {
        let rep = ctx.report(results);
        ctx.emit(&rep)?;
    }
    Ok(code)
}

fn cmd_dtn(ctx: &mut Ctx, a: &DtnArgs) -> Outcome {
    let mut prob = ctx.problem(&a.net)?;
    let q: Vec<usize> = match &a.boundary {
        None => prob.net.boundary().collect(),
        Some(ids) => {
            if ids.iter().collect::<std::collections::BTreeSet<_>>().len() != ids.len() {
                return Err(Failure::Input("duplicate boundary id".into()));
            }
            let net = prob.net.with_boundary(ids).map_err(|e| Failure::Input(e.to_string()))?;
            prob = SpectralProblem::with_potential(net, prob.d.clone()).map_err(|e| Failure::Input(e.to_string()))?;
            ids.iter().map(|&id| prob.net.vertex_index(id).expect("checked by with_boundary")).collect()
        }
    };
    let t = dtn_map(&prob, &q).map_err(|e| match e {
        crate::dtn::DtnError::Asymmetric(_) | crate::dtn::DtnError::Spectral(_) => Failure::Verification(e.to_string()),
        _ => Failure::Input(e.to_string()),
    })?;
    ctx.emit(&io::dtn_to_json(&prob.net, &q, &t))?;
    Ok(0)
}

fn cmd_verify(ctx: &mut Ctx, a: &VerifyArgs) -> Outcome {
    let prob = ctx.problem(&a.net)?;
    let text = io::read_text(&a.partition)?;
    ctx.hashes.insert(a.partition.display().to_string(), io::sha256_hex(text.as_bytes()));
    let j: io::PartitionJson = serde_json::from_str(&text).map_err(IoError::from)?;
    let part = io::partition_from_json(&prob.net, &j)?;
    let r = verify_partition(&part, &prob).map_err(|e| match e {
        crate::dtn::DtnError::Partition(_) | crate::dtn::DtnError::Network(_) => Failure::Input(e.to_string()),
        _ => Failure::Verification(e.to_string()),
    })?;
    ctx.warn(&r.warnings);
    let mark = |b: bool| if b { "PASS" } else { "FAIL" };
    if !ctx.cli.quiet {
        let (i, n, c) = (&r.index, &r.nullity, &r.corollary);
        ctx.say(&format!(
            "index: {} = {} + {} + {} {}",
            i.lhs, i.sum_piece_index, i.tbar_index, i.dim_f1, mark(i.pass)
        ));
        ctx.say(&format!("nullity: {} = {} + {} + {} {}", n.lhs, n.tbar_nullity, n.dim_f2, n.sum_i0, mark(n.pass)));
        ctx.say(&format!(
            "sum: {} = {} + {} + {} {}",
            c.lhs, c.sum_piece, c.tbar_index, c.tbar_nullity, mark(c.pass)
        ));
    }
    let mut results = serde_json::to_value(&r).map_err(IoError::from)?;
    results["pass"] = json!(r.pass());
    let rep = ctx.report(results);
    if ctx.cli.out.is_some() {
        ctx.emit(&rep)?;
    }
    Ok(if r.pass() { 0 } else { 1 })
}

/// Triple-junction net, allowing straight degree-2 vertices left by refinement.
fn triple_up_to_refinement(net: &crate::network::Network) -> bool {
    let mut any = false;
    for v in 0..net.num_vertices() {
        match net.degree(v) {
            3 => any = true,
            2 if net.balance_residual(v) < 1e-8 => {}
            _ => return false,
        }
    }
    any
}
