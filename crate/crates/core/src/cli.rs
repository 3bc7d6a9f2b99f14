//! Command-line front end. Every command prints one JSON document on
//! standard output, `{"command", "config", "result"}`, and a short summary
//! on standard error.
//!
//! Exit codes: 0 success, 1 negative verdict, 2 input or budget error.

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::faces::{boundary_graph, euler_d3, total_faces};
use crate::graph::{random_colored_graph, random_melonic, sample_connected_graph, ColoredGraph};
use crate::io::{graph_to_text, parse_graph, parse_matching, parse_perfect_matching};
use crate::montecarlo::{
    counterexample_search, cycle_distribution, threshold_report, verify_expectation_bound, CycleMode,
};
use crate::numeric::{mc_cumulant, mc_moment, orthogonal_invariance_check};
use crate::poly::Exponent;
use crate::rng::seeded_rng;
use crate::wick::{
    cumulant_poly, default_nu, expectation_poly, factorization_verdict, max_scaling, parse_nu, subadditivity_check,
    PruneBound, SearchConfig,
};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "gtensor",
    version,
    about = "Wick combinatorics and Monte Carlo checks for Gaussian random tensors"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Graph file (JSON or text line); "-" reads standard input. Repeatable.
    #[arg(long, global = true, env = "GTENSOR_GRAPH")]
    pub graph: Vec<PathBuf>,
    /// Graph given directly on the command line. Repeatable.
    #[arg(long, global = true, env = "GTENSOR_INLINE")]
    pub inline: Vec<String>,
    /// Number of colors.
    #[arg(long, global = true, env = "GTENSOR_D")]
    pub d: Option<usize>,
    /// Number of vertex pairs.
    #[arg(long, global = true, env = "GTENSOR_N")]
    pub n: Option<usize>,
    /// Covariance exponent, an integer or fraction; defaults to D - 1.
    #[arg(long, global = true, env = "GTENSOR_NU")]
    pub nu: Option<String>,
    #[arg(long, global = true, env = "GTENSOR_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, env = "GTENSOR_SAMPLES")]
    pub samples: Option<u64>,
    /// Restrict to pairings whose graph G(M0, M) is connected.
    #[arg(long, global = true, env = "GTENSOR_CONNECTED_ONLY")]
    pub connected_only: bool,
    /// Largest vertex count for exhaustive enumeration and exact search.
    #[arg(long, global = true, env = "GTENSOR_BUDGET", default_value_t = 20)]
    pub budget: usize,
    /// Stop the exact search after this many nodes (result becomes a lower bound).
    #[arg(long, global = true, env = "GTENSOR_NODE_LIMIT")]
    pub node_limit: Option<u64>,
    /// Prune with the plain D-per-pair bound only.
    #[arg(long, global = true, env = "GTENSOR_SIMPLE_BOUND")]
    pub simple_bound: bool,
    #[arg(long, global = true, env = "GTENSOR_THREADS")]
    pub threads: Option<usize>,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true, env = "GTENSOR_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a random graph.
    Gen {
        /// Build by random melon insertions starting from the dipole.
        #[arg(long)]
        melonic: bool,
        #[arg(long, default_value_t = 1)]
        insertions: usize,
        /// Resample until the graph is connected.
        #[arg(long)]
        connected: bool,
    },
    /// Melonic recognition by dipole contraction.
    Melonic,
    /// Boundary graph of a partial pairing.
    Boundary {
        /// Pairs such as "4-1,0-2".
        #[arg(long)]
        pairs: String,
    },
    /// Face counts and degree for a given Wick pairing.
    Faces {
        #[arg(long)]
        pairs: String,
    },
    /// Exact maximum face count over Wick pairings.
    Scaling,
    /// Gaussian expectation of the product of the input invariants.
    Expect,
    /// Joint cumulant of the input invariants.
    Cumulant,
    /// Strict subadditivity of the Gaussian scaling over the input graphs.
    Subadd,
    /// Large-N factorization verdict for a connected graph.
    Factorize,
    /// Euler characteristic and planarity of a three-colored graph.
    Euler3,
    /// Cycle statistics of a uniformly random matching.
    McCycles {
        /// Enumerate all matchings instead of sampling.
        #[arg(long)]
        exact: bool,
    },
    /// The moment bound E[m^F] <= C(m+n-1, m-1).
    McBound {
        /// Defaults to 2n.
        #[arg(long)]
        m: Option<u64>,
    },
    /// Size thresholds of the large-n existence argument.
    Thresholds {
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
    },
    /// Random graphs solved exactly, looking for small scaling.
    Search {
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Also write the F_max distribution as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Monte Carlo moment (or joint cumulant) of the input invariants.
    McMoment {
        /// Tensor dimension N.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        cumulant: bool,
    },
    /// Relative change of an invariant under random orthogonal rotations.
    Invariance {
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen { .. } => "gen",
            Command::Melonic => "melonic",
            Command::Boundary { .. } => "boundary",
            Command::Faces { .. } => "faces",
            Command::Scaling => "scaling",
            Command::Expect => "expect",
            Command::Cumulant => "cumulant",
            Command::Subadd => "subadd",
            Command::Factorize => "factorize",
            Command::Euler3 => "euler3",
            Command::McCycles { .. } => "mc-cycles",
            Command::McBound { .. } => "mc-bound",
            Command::Thresholds { .. } => "thresholds",
            Command::Search { .. } => "search",
            Command::McMoment { .. } => "mc-moment",
            Command::Invariance { .. } => "invariance",
        }
    }
}

/// Process outcome: exit code, standard output, standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Outcome {
    result: Value,
    summary: String,
    negative: bool,
    /// Effective values filled in after defaults are resolved.
    resolved: Vec<(&'static str, Value)>,
}

impl Outcome {
    fn ok(result: impl Serialize, summary: String) -> Result<Self> {
        Ok(Self {
            result: to_value(result)?,
            summary,
            negative: false,
            resolved: Vec::new(),
        })
    }

    fn verdict(mut self, negative: bool) -> Self {
        self.negative = negative;
        self
    }

    fn resolve(mut self, key: &'static str, v: impl Serialize) -> Self {
        self.resolved
            .push((key, serde_json::to_value(v).unwrap_or(Value::Null)));
        self
    }
}

fn to_value(v: impl Serialize) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Parse(format!("serializing report: {e}")))
}

fn ratio_value(r: Exponent) -> Value {
    json!([r.numer(), r.denom()])
}

/// Parses `args` (including the program name) and runs one command,
/// reading `-` graph inputs from `stdin`.
pub fn run_with_stdin<I, S>(args: I, stdin: &mut dyn Read) -> RunOutput
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                RunOutput {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                RunOutput {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match execute(&cli, stdin) {
        Ok((doc, outcome)) => {
            let mut stdout = serde_json::to_string(&doc).expect("report serializes");
            stdout.push('\n');
            let mut stderr = outcome.summary.clone();
            stderr.push('\n');
            if let Some(path) = &cli.common.out {
                if let Err(e) = std::fs::write(path, &stdout) {
                    return input_error(Error::InvalidParameter(format!("writing {}: {e}", path.display())));
                }
                stdout.clear();
            }
            RunOutput {
                code: if outcome.negative { 1 } else { 0 },
                stdout,
                stderr,
            }
        }
        Err(e) => input_error(e),
    }
}

fn input_error(e: Error) -> RunOutput {
    RunOutput {
        code: 2,
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    }
}

/// [`run_with_stdin`] reading the process's standard input.
pub fn run<I, S>(args: I) -> RunOutput
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with_stdin(args, &mut std::io::stdin())
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<(Value, Outcome)> {
    let threads = cli.common.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let mut input = Vec::new();
    if cli.common.graph.iter().any(|p| p.as_os_str() == "-") {
        stdin
            .read_to_end(&mut input)
            .map_err(|e| Error::Parse(format!("reading standard input: {e}")))?;
    }
    let outcome = pool.install(|| dispatch(cli, &mut input.as_slice()))?;
    let mut config = to_value(&cli.common)?;
    if let Value::Object(map) = &mut config {
        map.insert("threads".into(), json!(pool.current_num_threads()));
        if let Value::Object(sub) = to_value(&cli.command)? {
            for (_, v) in sub {
                if let Value::Object(fields) = v {
                    map.extend(fields);
                }
            }
        }
        for (k, v) in &outcome.resolved {
            map.insert((*k).into(), v.clone());
        }
    }
    let doc = json!({
        "command": cli.command.name(),
        "config": config,
        "result": outcome.result,
    });
    Ok((doc, outcome))
}

fn load_graphs(common: &Common, stdin: &mut &[u8]) -> Result<Vec<ColoredGraph>> {
    let mut out = Vec::new();
    for p in &common.graph {
        let text = if p.as_os_str() == "-" {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| Error::Parse(format!("reading standard input: {e}")))?;
            s
        } else {
            std::fs::read_to_string(p).map_err(|e| Error::Parse(format!("reading {}: {e}", p.display())))?
        };
        out.push(parse_graph(&text)?);
    }
    for s in &common.inline {
        out.push(parse_graph(s)?);
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter(
            "no input graph; use --graph PATH or --inline STR".into(),
        ));
    }
    Ok(out)
}

fn one_graph(common: &Common, stdin: &mut &[u8]) -> Result<ColoredGraph> {
    let mut gs = load_graphs(common, stdin)?;
    if gs.len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "expected one input graph, got {}",
            gs.len()
        )));
    }
    Ok(gs.pop().expect("one graph"))
}

fn union(gs: &[ColoredGraph]) -> Result<ColoredGraph> {
    ColoredGraph::disjoint_union_all(gs)
}

fn search_config(common: &Common) -> SearchConfig {
    SearchConfig {
        max_histogram_vertices: common.budget,
        max_scaling_vertices: common.budget,
        node_limit: common.node_limit,
        bound: if common.simple_bound {
            PruneBound::Simple
        } else {
            PruneBound::Degree
        },
        parallel: true,
    }
}

fn nu_for(common: &Common, colors: usize) -> Result<Exponent> {
    match &common.nu {
        Some(s) => parse_nu(s),
        None => Ok(default_nu(colors)),
    }
}

fn dispatch(cli: &Cli, stdin: &mut &[u8]) -> Result<Outcome> {
    let c = &cli.common;
    let cfg = search_config(c);
    match &cli.command {
        Command::Gen {
            melonic,
            insertions,
            connected,
        } => {
            let d = c.d.unwrap_or(3);
            let (g, n) = if *melonic {
                (random_melonic(d, *insertions, c.seed)?, None)
            } else {
                let n = c.n.unwrap_or(2);
                let g = if *connected {
                    sample_connected_graph(d, n, &mut seeded_rng(c.seed))?
                } else {
                    random_colored_graph(d, n, c.seed)?
                };
                (g, Some(n))
            };
            let summary = format!(
                "generated D={} graph on {} vertices: {}",
                d,
                g.vertex_count(),
                graph_to_text(&g)
            );
            let result = json!({
                "graph": g,
                "text": graph_to_text(&g),
                "connected": g.is_connected(),
            });
            Ok(Outcome::ok(result, summary)?
                .resolve("d", d)
                .resolve("n", n.unwrap_or(g.half_order())))
        }
        Command::Melonic => {
            let g = one_graph(c, stdin)?;
            let r = g.is_melonic()?;
            let summary = format!("melonic: {}", r.is_melonic);
            Outcome::ok(r, summary)
        }
        Command::Boundary { pairs } => {
            let g = one_graph(c, stdin)?;
            let partial = parse_matching(pairs, g.vertex_count())?;
            let b = boundary_graph(&g, &partial)?;
            let summary = format!(
                "boundary graph on {} vertices: {}",
                b.graph.vertex_count(),
                graph_to_text(&b.graph)
            );
            Outcome::ok(b, summary)
        }
        Command::Faces { pairs } => {
            let g = one_graph(c, stdin)?;
            let m0 = parse_perfect_matching(pairs, g.vertex_count())?;
            let f = total_faces(&m0, &g)?;
            let summary = format!("F = {} per color {:?}, omega {:?}", f.total, f.per_color, f.omega);
            Outcome::ok(f, summary)
        }
        Command::Scaling => {
            let g = one_graph(c, stdin)?;
            let r = max_scaling(&g, c.connected_only, &cfg)?;
            let summary = format!(
                "F_max = {} attained by {} pairings{}",
                r.f_max,
                r.num_optimal,
                if r.exact { "" } else { " (lower bound: node limit hit)" }
            );
            Outcome::ok(r, summary)
        }
        Command::Expect | Command::Cumulant => {
            let gs = load_graphs(c, stdin)?;
            let g = union(&gs)?;
            let nu = nu_for(c, g.colors())?;
            let p = if matches!(cli.command, Command::Expect) {
                expectation_poly(&g, nu, &cfg)?
            } else {
                cumulant_poly(&g, nu, &cfg)?
            };
            let summary = format!("{}", p.poly);
            Ok(Outcome::ok(p, summary)?.resolve("nu", ratio_value(nu)))
        }
        Command::Subadd => {
            let gs = load_graphs(c, stdin)?;
            let r = subadditivity_check(&gs, &cfg)?;
            let summary = format!(
                "connected scaling {} vs sum {}: {}",
                r.lhs,
                r.rhs,
                if r.strict_subadditive {
                    "strictly subadditive"
                } else {
                    "NOT strictly subadditive"
                }
            );
            let negative = !r.strict_subadditive;
            Ok(Outcome::ok(r, summary)?.verdict(negative))
        }
        Command::Factorize => {
            let g = one_graph(c, stdin)?;
            let nu = nu_for(c, g.colors())?;
            let r = factorization_verdict(&g, nu, &cfg)?;
            let summary = format!(
                "cumulant exponent {} vs twice {}: {}",
                r.cumulant_leading_exponent,
                r.expectation_leading_exponent,
                if r.factorizes {
                    "factorizes"
                } else {
                    "does NOT factorize"
                }
            );
            let negative = !r.factorizes;
            Ok(Outcome::ok(r, summary)?
                .verdict(negative)
                .resolve("nu", ratio_value(nu)))
        }
        Command::Euler3 => {
            let g = one_graph(c, stdin)?;
            let r = euler_d3(&g)?;
            let summary = format!("faces {} chi {} planar {}", r.total_faces, r.chi, r.is_planar);
            Outcome::ok(r, summary)
        }
        Command::McCycles { exact } => {
            let n = c.n.unwrap_or(2);
            let mode = match (exact, c.samples) {
                (true, _) | (false, None) => CycleMode::Exact,
                (false, Some(count)) => CycleMode::Sample { count, seed: c.seed },
            };
            let d = cycle_distribution(n, mode)?;
            let summary = format!("{} outcomes, face histogram {:?}", d.total(), d.face_histogram);
            let p_hat: Vec<f64> = (1..=n).map(|k| d.p_hat(k)).collect();
            let p_closed: Vec<String> = (1..=n)
                .map(|k| crate::montecarlo::cycle_length_probability(n, k).to_string())
                .collect();
            let mut v = to_value(&d)?;
            v["p_hat"] = json!(p_hat);
            v["p_closed_form"] = json!(p_closed);
            Ok(Outcome::ok(v, summary)?.resolve("n", n))
        }
        Command::McBound { m } => {
            let n = c.n.unwrap_or(2);
            let m = m.unwrap_or(2 * n as u64);
            let r = verify_expectation_bound(n, m)?;
            let summary = format!("E[m^F] = {} vs bound {}: {}", r.expectation, r.bound, r.holds);
            let negative = !(r.holds && r.central_le_seven_pow && r.central_le_27_over_4_pow);
            Ok(Outcome::ok(r, summary)?
                .verdict(negative)
                .resolve("n", n)
                .resolve("m", m))
        }
        Command::Thresholds { epsilon } => {
            let d = c.d.unwrap_or(3);
            let r = threshold_report(d, *epsilon)?;
            let summary = format!("n_epsilon {} n_gap {:?}", r.n_epsilon, r.n_gap);
            Ok(Outcome::ok(r, summary)?.resolve("d", d))
        }
        Command::Search { trials, csv } => {
            let d = c.d.unwrap_or(3);
            let n = c.n.unwrap_or(4);
            let r = counterexample_search(d, n, *trials, c.seed, &cfg)?;
            if let Some(path) = csv {
                std::fs::write(path, r.distribution_csv())
                    .map_err(|e| Error::InvalidParameter(format!("writing {}: {e}", path.display())))?;
            }
            let summary = format!(
                "{} trials, F_max distribution {:?}, {} violators",
                r.trials,
                r.distribution,
                r.lemma_violators.len()
            );
            Ok(Outcome::ok(r, summary)?.resolve("d", d).resolve("n", n))
        }
        Command::McMoment { dim, cumulant } => {
            let gs = load_graphs(c, stdin)?;
            let nu = nu_for(c, gs[0].colors())?;
            let samples = c.samples.unwrap_or(1_000_000);
            let out = if *cumulant {
                let r = mc_cumulant(&gs, *dim, nu, samples, c.seed)?;
                let s = format!("cumulant {} ± {}", r.cumulant, r.standard_error);
                Outcome::ok(r, s)?
            } else {
                let r = mc_moment(&gs, *dim, nu, samples, c.seed)?;
                let s = format!("moment {} ± {}", r.mean, r.standard_error);
                Outcome::ok(r, s)?
            };
            Ok(out.resolve("nu", ratio_value(nu)).resolve("samples", samples))
        }
        Command::Invariance { dim } => {
            let g = one_graph(c, stdin)?;
            let r = orthogonal_invariance_check(&g, *dim, c.seed)?;
            let summary = format!("relative deviation {:e}", r.deviation);
            Outcome::ok(r, summary)
        }
    }
}
