//! Command-line front end. [`run`] parses arguments, dispatches to a
//! subcommand and returns the process exit code: 0 on success, 1 on data or
//! numerical errors, 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{alpha_sweep, bayes_factor, log_grid, me_prefer, regularity_check};
use crate::dataset::{builtin_examples, BuiltinExample, Dataset};
use crate::entropy::{
    empirical_entropy, entropy_report, marginal_posterior_entropy, me_score,
    posterior_expected_entropy, RowMask,
};
use crate::error::Error;
use crate::graph::{names_in_text, same_equivalence_class, Dag};
use crate::learn::{hill_climb, HillClimbOptions, DEFAULT_MAX_ITER, DEFAULT_MAX_PARENTS};
use crate::scores::{
    alpha_table, local_log_score, total_score, AlphaSpec, BicPenalty, PriorKind, Score,
    DEFAULT_BDLA_LEVELS,
};

#[derive(Debug, Parser)]
#[command(
    name = "bdscore",
    version,
    about = "Bayesian Dirichlet scores, posterior entropies and structure learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Total and per-node log scores of a DAG.
    #[command(after_help = "CSV columns (--out): node,parents,log_score")]
    Score(ScoreCmd),
    /// Entropy diagnostics for every node of a DAG.
    #[command(
        after_help = "CSV columns (--out): node,parents,empirical,marginal_posterior,expected_posterior,lemma1_bias,log_bd,me_score"
    )]
    Entropy(EntropyCmd),
    /// Bayes factor between two DAGs that differ in one parent set.
    #[command(
        after_help = "CSV columns (--out): score_name,alpha,log_bf,bf,me_preference,regular"
    )]
    Bf(PairCmd),
    /// Bayes factors and entropy differences over a grid of imaginary sample sizes.
    #[command(
        after_help = "CSV columns: alpha,score_name,log_bf,log_bf_reverse,ee_minus,ee_plus,me_minus,me_plus\nlog_bf is ln BD(G-) - ln BD(G+); log_bf_reverse is its negation."
    )]
    Sweep(SweepCmd),
    /// Greedy hill-climbing structure learning.
    #[command(
        after_help = "Learned DAG (--out): one `Parent -> Child` line per arc\nMove log columns (--move-log): iteration,move,delta"
    )]
    Learn(LearnCmd),
    /// Skeleton, v-structures and Markov equivalence.
    Cpdag(CpdagCmd),
    /// Recompute the two worked examples and their α sweeps.
    #[command(
        after_help = "Files written to --out: checks.csv (check,computed,printed,tolerance,kind,pass) and\n<example>_<score>.csv sweep curves with the `sweep` columns."
    )]
    Repro(ReproCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScoreName {
    Bdeu,
    Bds,
    Bdj,
    K2,
    Bdla,
    Bic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MaskArg {
    Observed,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PenaltyArg {
    Literal,
    Effective,
}

#[derive(Debug, Args)]
struct DataOpts {
    /// Categorical data, one column per variable.
    #[arg(long)]
    data: PathBuf,
    /// The first CSV line is data, not variable names.
    #[arg(long)]
    no_header: bool,
}

#[derive(Debug, Args)]
struct ScoreOpts {
    /// Score family.
    #[arg(long, value_enum, default_value = "bdeu")]
    score: ScoreName,
    /// Imaginary sample size.
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    alpha: f64,
    /// BDla grid half-width L.
    #[arg(long = "bdla-L", default_value_t = DEFAULT_BDLA_LEVELS, value_parser = clap::value_parser!(u32).range(1..))]
    bdla_levels: u32,
    /// BIC dimension: `literal` is q(r-1), `effective` counts observed levels and configurations only.
    #[arg(long, value_enum, default_value = "literal")]
    bic_penalty: PenaltyArg,
}

#[derive(Debug, Args)]
struct ScoreCmd {
    #[command(flatten)]
    data: DataOpts,
    /// DAG in `Parent -> Child` text format.
    #[arg(long)]
    dag: PathBuf,
    #[command(flatten)]
    score: ScoreOpts,
    /// Per-node CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EntropyCmd {
    #[command(flatten)]
    data: DataOpts,
    /// DAG in `Parent -> Child` text format.
    #[arg(long)]
    dag: PathBuf,
    #[command(flatten)]
    score: ScoreOpts,
    /// Parent configurations the marginal posterior entropy sums over.
    #[arg(long, value_enum, default_value = "observed")]
    row_mask: MaskArg,
    /// Per-node CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PairCmd {
    #[command(flatten)]
    data: DataOpts,
    /// The DAG with the smaller parent set.
    #[arg(long)]
    minus: PathBuf,
    /// The DAG with the larger parent set.
    #[arg(long)]
    plus: PathBuf,
    #[command(flatten)]
    score: ScoreOpts,
    /// One-row CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepCmd {
    #[command(flatten)]
    data: DataOpts,
    /// The DAG with the smaller parent set.
    #[arg(long)]
    minus: PathBuf,
    /// The DAG with the larger parent set.
    #[arg(long)]
    plus: PathBuf,
    /// Prior families, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "bdeu,bds")]
    score: Vec<ScoreName>,
    /// BDla grid half-width L.
    #[arg(long = "bdla-L", default_value_t = DEFAULT_BDLA_LEVELS, value_parser = clap::value_parser!(u32).range(1..))]
    bdla_levels: u32,
    /// `lo,hi,points`, log-spaced.
    #[arg(long, value_parser = parse_grid, default_value = "1e-4,1e4,201")]
    grid: (f64, f64, usize),
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LearnCmd {
    #[command(flatten)]
    data: DataOpts,
    #[command(flatten)]
    score: ScoreOpts,
    /// Upper bound on the parent-set size.
    #[arg(long, default_value_t = DEFAULT_MAX_PARENTS)]
    max_parents: usize,
    /// Upper bound on accepted moves.
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Learned DAG in text format.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV log of accepted moves.
    #[arg(long)]
    move_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CpdagCmd {
    /// DAG in `Parent -> Child` text format.
    #[arg(long)]
    dag: PathBuf,
    /// Second DAG to test for Markov equivalence.
    #[arg(long)]
    other: Option<PathBuf>,
    /// Data file supplying the variable names; otherwise names come from the DAG files.
    #[arg(long)]
    data: Option<PathBuf>,
    /// The first CSV line of --data is data, not variable names.
    #[arg(long)]
    no_header: bool,
    /// Report output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReproCmd {
    /// Output directory.
    #[arg(long, default_value = "repro")]
    out: PathBuf,
    /// Also write the example datasets and DAG files.
    #[arg(long)]
    dump_data: bool,
    /// `lo,hi,points`, log-spaced.
    #[arg(long, value_parser = parse_grid, default_value = "1e-4,1e4,201")]
    grid: (f64, f64, usize),
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be finite and positive, got {s}"))
    }
}

fn parse_grid(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [lo, hi, points] = parts.as_slice() else {
        return Err(format!("expected lo,hi,points, got `{s}`"));
    };
    let lo = positive_f64(lo)?;
    let hi = positive_f64(hi)?;
    let points: usize = points.parse().map_err(|e| format!("`{points}`: {e}"))?;
    if hi <= lo || points < 2 {
        return Err("need lo < hi and at least 2 points".into());
    }
    Ok((lo, hi, points))
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Format(format!("writing output: {e}")))
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Score(c) => cmd_score(c, out),
        Command::Entropy(c) => cmd_entropy(c, out),
        Command::Bf(c) => cmd_bf(c, out),
        Command::Sweep(c) => cmd_sweep(c, out),
        Command::Learn(c) => cmd_learn(c, out),
        Command::Cpdag(c) => cmd_cpdag(c, out),
        Command::Repro(c) => cmd_repro(c, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// Formats with four significant digits.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("{:.*}", (3 - exp).max(0) as usize, x)
    } else {
        format!("{x:.3e}")
    }
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> crate::error::Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Argument(format!("`{}` is not a file path", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn load_data(opts: &DataOpts) -> crate::error::Result<Dataset> {
    Dataset::load_csv(&opts.data, !opts.no_header)
}

fn load_dag(path: &Path, names: &[&str]) -> crate::error::Result<Dag> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dag::parse_text(&text, names)
}

fn build_score(opts: &ScoreOpts) -> Score {
    let kind = match opts.score {
        ScoreName::Bdeu => PriorKind::BDeu,
        ScoreName::Bds => PriorKind::BDs,
        ScoreName::Bdj => PriorKind::BDJ,
        ScoreName::K2 => PriorKind::K2,
        ScoreName::Bdla => PriorKind::BDla,
        ScoreName::Bic => {
            return Score::Bic(match opts.bic_penalty {
                PenaltyArg::Literal => BicPenalty::Literal,
                PenaltyArg::Effective => BicPenalty::Effective,
            })
        }
    };
    Score::Bd(AlphaSpec {
        bdla_levels: opts.bdla_levels,
        ..AlphaSpec::new(kind, opts.alpha)
    })
}

fn bd_spec(opts: &ScoreOpts, what: &str) -> std::result::Result<AlphaSpec, Failure> {
    match build_score(opts) {
        Score::Bd(spec) => Ok(spec),
        Score::Bic(_) => Err(Failure::Usage(format!(
            "{what} needs a Bayesian Dirichlet score, not BIC"
        ))),
    }
}

fn parent_names(dag: &Dag, node: usize, names: &[&str]) -> String {
    dag.parents(node)
        .iter()
        .map(|&p| names[p])
        .collect::<Vec<_>>()
        .join(" ")
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> crate::error::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format(format!("writing CSV: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    w.into_inner()
        .map_err(|e| Error::Format(format!("writing CSV: {e}")))
}

fn cmd_score(c: ScoreCmd, out: &mut dyn Write) -> CmdResult {
    let data = load_data(&c.data)?;
    let names = data.names();
    let dag = load_dag(&c.dag, &names)?;
    let score = build_score(&c.score);
    let total = total_score(&data, &dag, &score)?;
    writeln!(out, "score: {}", score.name())?;
    writeln!(
        out,
        "{:<12} {:<24} {:>12} {:>12}",
        "node", "parents", "log score", "score"
    )?;
    let mut rows = Vec::new();
    for (i, &v) in total.per_node.iter().enumerate() {
        let parents = parent_names(&dag, i, &names);
        writeln!(
            out,
            "{:<12} {:<24} {:>12} {:>12}",
            names[i],
            parents,
            sig4(v),
            sig4(v.exp())
        )?;
        rows.push(vec![names[i].to_owned(), parents, format!("{v:e}")]);
    }
    writeln!(out, "total log score: {}", sig4(total.total))?;
    if let Some(path) = &c.out {
        write_atomic(path, &csv_bytes(&["node", "parents", "log_score"], &rows)?)?;
    }
    Ok(())
}

fn cmd_entropy(c: EntropyCmd, out: &mut dyn Write) -> CmdResult {
    let spec = bd_spec(&c.score, "entropy")?;
    if spec.kind == PriorKind::BDla {
        return Err(Failure::Usage(
            "entropy needs a single-table prior; BDla is a mixture".into(),
        ));
    }
    let mask = match c.row_mask {
        MaskArg::Observed => RowMask::Observed,
        MaskArg::All => RowMask::All,
    };
    let data = load_data(&c.data)?;
    let names = data.names();
    let dag = load_dag(&c.dag, &names)?;
    if dag.node_count() != data.n_vars() {
        return Err(
            Error::Argument("DAG and data disagree on the number of variables".into()).into(),
        );
    }
    writeln!(out, "score: {}, row mask: {:?}", spec.kind, mask)?;
    writeln!(
        out,
        "{:<12} {:>10} {:>10} {:>10} {:>10} {:>12}",
        "node", "empirical", "marginal", "expected", "bias", "ME score"
    )?;
    let mut rows = Vec::new();
    for i in 0..dag.node_count() {
        let counts = data.counts(i, dag.parents(i))?;
        let table = alpha_table(&spec, &counts)?;
        let r = entropy_report(&counts, &table, mask)?;
        writeln!(
            out,
            "{:<12} {:>10} {:>10} {:>10} {:>10} {:>12}",
            names[i],
            sig4(r.empirical),
            sig4(r.marginal_posterior),
            sig4(r.expected_posterior),
            sig4(r.lemma1_bias),
            sig4(r.me_score)
        )?;
        rows.push(vec![
            names[i].to_owned(),
            parent_names(&dag, i, &names),
            format!("{:e}", r.empirical),
            format!("{:e}", r.marginal_posterior),
            format!("{:e}", r.expected_posterior),
            format!("{:e}", r.lemma1_bias),
            format!("{:e}", r.log_bd),
            format!("{:e}", r.me_score),
        ]);
    }
    if let Some(path) = &c.out {
        let header = [
            "node",
            "parents",
            "empirical",
            "marginal_posterior",
            "expected_posterior",
            "lemma1_bias",
            "log_bd",
            "me_score",
        ];
        write_atomic(path, &csv_bytes(&header, &rows)?)?;
    }
    Ok(())
}

fn cmd_bf(c: PairCmd, out: &mut dyn Write) -> CmdResult {
    let spec = bd_spec(&c.score, "bf")?;
    let data = load_data(&c.data)?;
    let names = data.names();
    let minus = load_dag(&c.minus, &names)?;
    let plus = load_dag(&c.plus, &names)?;
    let log_bf = bayes_factor(&data, &minus, &plus, &spec)?;
    let me = me_prefer(&data, &minus, &plus, &spec)?;
    let regular = regularity_check(&data, &minus, &plus, &spec)
        .map(|r| r.regular)
        .ok();
    writeln!(out, "score: {}, alpha: {}", spec.kind, sig4(spec.alpha))?;
    writeln!(out, "log BF (G- over G+): {}", sig4(log_bf))?;
    writeln!(out, "BF (G- over G+): {}", sig4(log_bf.exp()))?;
    writeln!(
        out,
        "ME: G- {} vs G+ {} -> {}",
        sig4(me.log_me_minus.exp()),
        sig4(me.log_me_plus.exp()),
        me.preference
    )?;
    if let Some(regular) = regular {
        writeln!(out, "regular: {regular}")?;
    }
    if let Some(path) = &c.out {
        let row = vec![
            spec.kind.name().to_owned(),
            format!("{:e}", spec.alpha),
            format!("{log_bf:e}"),
            format!("{:e}", log_bf.exp()),
            me.preference.to_string(),
            regular.map_or_else(String::new, |r| r.to_string()),
        ];
        let header = [
            "score_name",
            "alpha",
            "log_bf",
            "bf",
            "me_preference",
            "regular",
        ];
        write_atomic(path, &csv_bytes(&header, &[row])?)?;
    }
    Ok(())
}

fn sweep_specs(scores: &[ScoreName], levels: u32) -> std::result::Result<Vec<AlphaSpec>, Failure> {
    scores
        .iter()
        .map(|s| {
            let kind = match s {
                ScoreName::Bdeu => PriorKind::BDeu,
                ScoreName::Bds => PriorKind::BDs,
                ScoreName::Bdj => PriorKind::BDJ,
                ScoreName::K2 => PriorKind::K2,
                ScoreName::Bdla => PriorKind::BDla,
                ScoreName::Bic => {
                    return Err(Failure::Usage(
                        "BIC has no imaginary sample size to sweep".into(),
                    ))
                }
            };
            Ok(AlphaSpec {
                bdla_levels: levels,
                ..AlphaSpec::new(kind, 1.0)
            })
        })
        .collect()
}

fn cmd_sweep(c: SweepCmd, out: &mut dyn Write) -> CmdResult {
    let specs = sweep_specs(&c.score, c.bdla_levels)?;
    let data = load_data(&c.data)?;
    let names = data.names();
    let minus = load_dag(&c.minus, &names)?;
    let plus = load_dag(&c.plus, &names)?;
    let grid = log_grid(c.grid.0, c.grid.1, c.grid.2)?;
    let curve = alpha_sweep(&data, &minus, &plus, &specs, &grid)?;
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    match &c.out {
        Some(path) => {
            write_atomic(path, &buf)?;
            writeln!(
                out,
                "wrote {} records to {}",
                curve.records.len(),
                path.display()
            )?;
        }
        None => out.write_all(&buf)?,
    }
    Ok(())
}

fn cmd_learn(c: LearnCmd, out: &mut dyn Write) -> CmdResult {
    let data = load_data(&c.data)?;
    let names = data.names();
    let score = build_score(&c.score);
    let options = HillClimbOptions {
        max_parents: c.max_parents,
        max_iter: c.max_iter,
    };
    let result = hill_climb(&data, &score, options)?;
    let text = result.dag.to_text(&names);
    writeln!(out, "score: {}", score.name())?;
    write!(out, "{text}")?;
    writeln!(
        out,
        "total log score: {} after {} moves{}",
        sig4(result.score),
        result.iterations,
        if result.converged {
            ""
        } else {
            " (iteration limit reached)"
        }
    )?;
    if let Some(path) = &c.out {
        write_atomic(path, text.as_bytes())?;
    }
    if let Some(path) = &c.move_log {
        let mut buf = Vec::new();
        result.write_move_log(&mut buf, &names)?;
        write_atomic(path, &buf)?;
    }
    Ok(())
}

fn cmd_cpdag(c: CpdagCmd, out: &mut dyn Write) -> CmdResult {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
    let first = read(&c.dag)?;
    let second = c.other.as_deref().map(read).transpose()?;
    let names: Vec<String> = match &c.data {
        Some(path) => Dataset::load_csv(path, !c.no_header)?
            .names()
            .into_iter()
            .map(str::to_owned)
            .collect(),
        None => {
            let mut names = names_in_text(&first);
            for n in second.as_deref().map(names_in_text).unwrap_or_default() {
                if !names.contains(&n) {
                    names.push(n);
                }
            }
            names
        }
    };
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let g = Dag::parse_text(&first, &names)?;
    let mut text = String::new();
    for (a, b) in g.skeleton() {
        text.push_str(&format!("edge {} -- {}\n", names[a], names[b]));
    }
    for (a, c2, b) in g.v_structures() {
        text.push_str(&format!(
            "v-structure {} -> {} <- {}\n",
            names[a], names[c2], names[b]
        ));
    }
    if let Some(second) = &second {
        let h = Dag::parse_text(second, &names)?;
        text.push_str(&format!("equivalent {}\n", same_equivalence_class(&g, &h)?));
    }
    write!(out, "{text}")?;
    if let Some(path) = &c.out {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}

/// How a reproduced value is compared with the printed one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Relative(f64),
    Absolute(f64),
}

impl Tolerance {
    pub fn accepts(self, computed: f64, printed: f64) -> bool {
        match self {
            Tolerance::Relative(t) => ((computed - printed) / printed).abs() <= t,
            Tolerance::Absolute(t) => (computed - printed).abs() <= t,
        }
    }
}

/// One reproduced number next to its printed value.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub printed: f64,
    pub tolerance: Tolerance,
}

impl Check {
    pub fn passes(&self) -> bool {
        self.tolerance.accepts(self.computed, self.printed)
    }
}

/// Printed values: `(BDeu G-, BDeu G+, BDs, empirical, marginal G-,
/// marginal G+, expected G-, expected G+, ME G-, ME G+)`.
const PRINTED: [[f64; 10]; 2] = [
    [
        0.0326, 0.0441, 0.0326, 0.0, 0.652, 0.392, 0.3931, 0.5707, 0.0128, 0.0252,
    ],
    [
        3.906e-7, 3.721e-8, 3.906e-7, 2.546, 2.580, 2.564, 2.066, 4.069, 8.071e-7, 1.514e-7,
    ],
];

/// The twenty reproduced example values (BDeu, α = 1, observed-row mask).
pub fn example_checks() -> crate::error::Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (ex, printed) in builtin_examples().iter().zip(PRINTED) {
        let child = BuiltinExample::CHILD;
        let minus = ex.data.counts(child, ex.g_minus.parents(child))?;
        let plus = ex.data.counts(child, ex.g_plus.parents(child))?;
        let bdeu = AlphaSpec::bdeu(1.0);
        let bds = AlphaSpec::bds(1.0);
        let (tm, tp) = (alpha_table(&bdeu, &minus)?, alpha_table(&bdeu, &plus)?);
        let bds_minus = local_log_score(&minus, &bds)?.exp();
        let bds_plus = local_log_score(&plus, &bds)?.exp();
        let values = [
            (
                "BDeu G-",
                local_log_score(&minus, &bdeu)?.exp(),
                Tolerance::Relative(1e-2),
            ),
            (
                "BDeu G+",
                local_log_score(&plus, &bdeu)?.exp(),
                Tolerance::Relative(1e-2),
            ),
            // Both DAGs must match; report the one further from the printed value.
            (
                "BDs G-/G+",
                if (bds_minus - printed[2]).abs() >= (bds_plus - printed[2]).abs() {
                    bds_minus
                } else {
                    bds_plus
                },
                Tolerance::Relative(1e-2),
            ),
            (
                "empirical entropy G-/G+",
                empirical_entropy(&minus).max(empirical_entropy(&plus)),
                Tolerance::Absolute(2e-3),
            ),
            (
                "marginal posterior entropy G-",
                marginal_posterior_entropy(&minus, &tm, RowMask::Observed)?,
                Tolerance::Absolute(2e-3),
            ),
            (
                "marginal posterior entropy G+",
                marginal_posterior_entropy(&plus, &tp, RowMask::Observed)?,
                Tolerance::Absolute(2e-3),
            ),
            (
                "expected posterior entropy G-",
                posterior_expected_entropy(&minus, &tm)?,
                Tolerance::Absolute(5e-3),
            ),
            (
                "expected posterior entropy G+",
                posterior_expected_entropy(&plus, &tp)?,
                Tolerance::Absolute(5e-3),
            ),
            (
                "ME score G-",
                me_score(&minus, &bdeu)?,
                Tolerance::Relative(2e-2),
            ),
            (
                "ME score G+",
                me_score(&plus, &bdeu)?,
                Tolerance::Relative(2e-2),
            ),
        ];
        for ((label, computed, tolerance), printed) in values.into_iter().zip(printed) {
            checks.push(Check {
                name: format!("{} {label}", ex.name),
                computed,
                printed,
                tolerance,
            });
        }
    }
    Ok(checks)
}

fn cmd_repro(c: ReproCmd, out: &mut dyn Write) -> CmdResult {
    fs::create_dir_all(&c.out).map_err(|e| Error::io(&c.out, e))?;
    let checks = example_checks()?;
    writeln!(
        out,
        "{:<46} {:>11} {:>11} {:>6}",
        "check", "computed", "printed", ""
    )?;
    let mut rows = Vec::new();
    for chk in &checks {
        let status = if chk.passes() { "ok" } else { "MISS" };
        writeln!(
            out,
            "{:<46} {:>11} {:>11} {:>6}",
            chk.name,
            sig4(chk.computed),
            sig4(chk.printed),
            status
        )?;
        let (kind, tol) = match chk.tolerance {
            Tolerance::Relative(t) => ("relative", t),
            Tolerance::Absolute(t) => ("absolute", t),
        };
        rows.push(vec![
            chk.name.clone(),
            format!("{:e}", chk.computed),
            format!("{:e}", chk.printed),
            format!("{tol:e}"),
            kind.to_owned(),
            chk.passes().to_string(),
        ]);
    }
    let passed = checks.iter().filter(|c| c.passes()).count();
    writeln!(out, "{passed}/{} values within tolerance", checks.len())?;
    write_atomic(
        &c.out.join("checks.csv"),
        &csv_bytes(
            &["check", "computed", "printed", "tolerance", "kind", "pass"],
            &rows,
        )?,
    )?;

    let grid = log_grid(c.grid.0, c.grid.1, c.grid.2)?;
    for ex in builtin_examples() {
        for spec in [AlphaSpec::bdeu(1.0), AlphaSpec::bds(1.0)] {
            let curve = alpha_sweep(
                &ex.data,
                &ex.g_minus,
                &ex.g_plus,
                std::slice::from_ref(&spec),
                &grid,
            )?;
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            let path = c.out.join(format!("{}_{}.csv", ex.name, spec.kind.name()));
            write_atomic(&path, &buf)?;
        }
        if c.dump_data {
            let names = ex.data.names();
            let mut buf = Vec::new();
            ex.data.write_csv(&mut buf)?;
            write_atomic(&c.out.join(format!("{}.csv", ex.name)), &buf)?;
            write_atomic(
                &c.out.join("g_minus.dag"),
                ex.g_minus.to_text(&names).as_bytes(),
            )?;
            write_atomic(
                &c.out.join("g_plus.dag"),
                ex.g_plus.to_text(&names).as_bytes(),
            )?;
        }
    }
    writeln!(out, "sweep curves written to {}", c.out.display())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_significant_digits() {
        assert_eq!(sig4(0.032625390625), "0.03263");
        assert_eq!(sig4(3.906e-7), "3.906e-7");
        assert_eq!(sig4(2.5458), "2.546");
        assert_eq!(sig4(-29.420460), "-29.42");
        assert_eq!(sig4(1234.4), "1234");
        assert_eq!(sig4(0.0), "0");
    }

    #[test]
    fn grid_parser() {
        assert_eq!(parse_grid("1e-4,1e4,201"), Ok((1e-4, 1e4, 201)));
        assert!(parse_grid("1,0.5,3").is_err());
        assert!(parse_grid("0,1,3").is_err());
        assert!(parse_grid("1,2").is_err());
    }

    #[test]
    fn twenty_checks_with_two_known_misses() {
        let checks = example_checks().unwrap();
        assert_eq!(checks.len(), 20);
        let missed: Vec<&str> = checks
            .iter()
            .filter(|c| !c.passes())
            .map(|c| c.name.as_str())
            .collect();
        assert_eq!(
            missed,
            vec![
                "example2 expected posterior entropy G+",
                "example2 ME score G+"
            ]
        );
    }

    #[test]
    fn usage_errors_exit_with_two() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run(["bdscore"], &mut out, &mut err), 2);
        assert_eq!(
            run(["bdscore", "score", "--alpha", "-1"], &mut out, &mut err),
            2
        );
        assert_eq!(run(["bdscore", "--help"], &mut out, &mut err), 0);
    }
}
