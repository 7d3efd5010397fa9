//! Bayesian Dirichlet scores, BIC, and the diagnostics that explain how the
//! imaginary sample size interacts with sparse counts.
//!
//! Every score is a natural-log value; nothing is exponentiated here.

use std::fmt;
use std::str::FromStr;

use crate::dataset::{Dataset, LocalCounts};
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::specfun::lgamma;

/// Default BDla level `L`, giving `S_L = {2^-5, ..., 2^5}`.
pub const DEFAULT_BDLA_LEVELS: u32 = 5;

/// Which Dirichlet prior the score uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PriorKind {
    /// `α_ijk = α / (r_i q_i)`.
    BDeu,
    /// `α_ijk = α / (r_i q̃_i)` on observed configurations, zero elsewhere.
    BDs,
    /// `α_ijk = 1/2`.
    BDJ,
    /// `α_ijk = 1`.
    K2,
    /// Uniform mixture of BDeu scores over `α·s`, `s ∈ {2^-L, ..., 2^L}`.
    BDla,
    /// Caller-supplied table.
    Custom,
}

impl PriorKind {
    pub fn name(self) -> &'static str {
        match self {
            PriorKind::BDeu => "bdeu",
            PriorKind::BDs => "bds",
            PriorKind::BDJ => "bdj",
            PriorKind::K2 => "k2",
            PriorKind::BDla => "bdla",
            PriorKind::Custom => "custom",
        }
    }
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bdeu" => Ok(PriorKind::BDeu),
            "bds" => Ok(PriorKind::BDs),
            "bdj" => Ok(PriorKind::BDJ),
            "k2" => Ok(PriorKind::K2),
            "bdla" => Ok(PriorKind::BDla),
            other => Err(Error::Argument(format!("unknown prior `{other}`"))),
        }
    }
}

/// A prior choice together with its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSpec {
    pub kind: PriorKind,
    /// Imaginary sample size; ignored by BDJ and K2.
    pub alpha: f64,
    /// BDla level `L`.
    pub bdla_levels: u32,
    pub custom: Option<AlphaTable>,
}

impl AlphaSpec {
    pub fn new(kind: PriorKind, alpha: f64) -> Self {
        AlphaSpec {
            kind,
            alpha,
            bdla_levels: DEFAULT_BDLA_LEVELS,
            custom: None,
        }
    }

    pub fn bdeu(alpha: f64) -> Self {
        AlphaSpec::new(PriorKind::BDeu, alpha)
    }

    pub fn bds(alpha: f64) -> Self {
        AlphaSpec::new(PriorKind::BDs, alpha)
    }

    pub fn bdj() -> Self {
        AlphaSpec::new(PriorKind::BDJ, 1.0)
    }

    pub fn k2() -> Self {
        AlphaSpec::new(PriorKind::K2, 1.0)
    }

    pub fn bdla(alpha: f64, levels: u32) -> Self {
        AlphaSpec {
            bdla_levels: levels,
            ..AlphaSpec::new(PriorKind::BDla, alpha)
        }
    }

    pub fn custom(table: AlphaTable) -> Self {
        AlphaSpec {
            custom: Some(table),
            ..AlphaSpec::new(PriorKind::Custom, 1.0)
        }
    }

    /// Same prior family at a different imaginary sample size.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        AlphaSpec {
            alpha,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Argument(format!(
                "imaginary sample size must be positive, got {}",
                self.alpha
            )));
        }
        match self.kind {
            PriorKind::BDla if self.bdla_levels < 1 => {
                Err(Error::Argument("BDla needs L >= 1".into()))
            }
            PriorKind::Custom if self.custom.is_none() => Err(Error::Argument(
                "custom prior needs an explicit table".into(),
            )),
            _ => Ok(()),
        }
    }

    /// The BDla grid `α·2^l`, `l = -L..=L`.
    pub fn bdla_grid(&self) -> Vec<f64> {
        let l = self.bdla_levels as i32;
        (-l..=l).map(|e| self.alpha * 2f64.powi(e)).collect()
    }
}

/// A `q × r` table of prior weights `α_ijk`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    r: usize,
    q: usize,
    cells: Vec<f64>,
}

impl AlphaTable {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.first().map(Vec::len).unwrap_or(0);
        if r == 0 || rows.iter().any(|row| row.len() != r) {
            return Err(Error::Argument(
                "alpha table rows must be non-empty and equally long".into(),
            ));
        }
        if rows.iter().flatten().any(|&a| !(a.is_finite() && a >= 0.0)) {
            return Err(Error::Argument(
                "alpha table entries must be finite and non-negative".into(),
            ));
        }
        Ok(AlphaTable {
            r,
            q: rows.len(),
            cells: rows.iter().flatten().copied().collect(),
        })
    }

    fn uniform(q: usize, r: usize, value: f64) -> Self {
        AlphaTable {
            r,
            q,
            cells: vec![value; q * r],
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.cells[j * self.r..(j + 1) * self.r]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.cells.chunks_exact(self.r)
    }

    /// `α_ij`.
    pub fn row_sum(&self, j: usize) -> f64 {
        self.row(j).iter().sum()
    }

    /// Total prior weight of the node, `α_i`.
    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }
}

/// Materialises `α_ijk` for one family. BDla is a mixture and has no single table.
pub fn alpha_table(spec: &AlphaSpec, counts: &LocalCounts) -> Result<AlphaTable> {
    spec.validate()?;
    let (q, r) = (counts.q(), counts.r());
    match spec.kind {
        PriorKind::BDeu => Ok(AlphaTable::uniform(q, r, spec.alpha / (r * q) as f64)),
        PriorKind::BDJ => Ok(AlphaTable::uniform(q, r, 0.5)),
        PriorKind::K2 => Ok(AlphaTable::uniform(q, r, 1.0)),
        PriorKind::BDs => {
            let q_tilde = counts.q_tilde();
            let mut table = AlphaTable::uniform(q, r, 0.0);
            if q_tilde > 0 {
                let cell = spec.alpha / (r * q_tilde) as f64;
                for (j, &n) in counts.n_ij().iter().enumerate() {
                    if n > 0 {
                        table.cells[j * r..(j + 1) * r].fill(cell);
                    }
                }
            }
            Ok(table)
        }
        PriorKind::BDla => Err(Error::Argument(
            "BDla is a mixture of BDeu tables; score it with local_log_bdla".into(),
        )),
        PriorKind::Custom => {
            let table = spec
                .custom
                .clone()
                .ok_or_else(|| Error::Argument("custom prior needs an explicit table".into()))?;
            if table.q != q || table.r != r {
                return Err(Error::Argument(format!(
                    "custom table is {}x{}, counts are {q}x{r}",
                    table.q, table.r
                )));
            }
            Ok(table)
        }
    }
}

/// Log BD marginal likelihood of one node (prequential form, no multinomial coefficient).
///
/// Rows with `α_ij = 0` and `n_ij = 0` cancel and are skipped; observed
/// counts on a zero-weight row or cell are outside the prior's support.
pub fn local_log_bd(counts: &LocalCounts, table: &AlphaTable) -> Result<f64> {
    check_shape(counts, table)?;
    let mut total = 0.0;
    for (j, (n_row, a_row)) in counts.rows().zip(table.rows()).enumerate() {
        let n_ij: u64 = n_row.iter().sum();
        let a_ij: f64 = a_row.iter().sum();
        if n_ij == 0 {
            continue;
        }
        if a_ij <= 0.0 {
            return Err(Error::PriorSupport(format!(
                "configuration {j} has {n_ij} observations but zero prior weight"
            )));
        }
        let mut row = lgamma(a_ij) - lgamma(a_ij + n_ij as f64);
        for (k, (&n, &a)) in n_row.iter().zip(a_row).enumerate() {
            if n == 0 {
                continue;
            }
            if a <= 0.0 {
                return Err(Error::PriorSupport(format!(
                    "cell ({j}, {k}) has {n} observations but zero prior weight"
                )));
            }
            row += lgamma(a + n as f64) - lgamma(a);
        }
        total += row;
    }
    Ok(total)
}

fn check_shape(counts: &LocalCounts, table: &AlphaTable) -> Result<()> {
    if counts.q() != table.q || counts.r() != table.r {
        return Err(Error::Argument(format!(
            "alpha table is {}x{}, counts are {}x{}",
            table.q,
            table.r,
            counts.q(),
            counts.r()
        )));
    }
    Ok(())
}

/// `ln Σ exp(x_i) - ln n`, shifted by the maximum.
pub(crate) fn log_mean_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + (sum / values.len() as f64).ln()
}

/// BDla: the log of the average BDeu marginal likelihood over the grid `α·2^l`.
pub fn local_log_bdla(counts: &LocalCounts, alpha: f64, levels: u32) -> Result<f64> {
    let spec = AlphaSpec::bdla(alpha, levels);
    spec.validate()?;
    let scores = spec
        .bdla_grid()
        .into_iter()
        .map(|s| local_log_bd(counts, &alpha_table(&AlphaSpec::bdeu(s), counts)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(log_mean_exp(&scores))
}

/// Log score of one node under any BD prior, including the BDla mixture.
pub fn local_log_score(counts: &LocalCounts, spec: &AlphaSpec) -> Result<f64> {
    match spec.kind {
        PriorKind::BDla => local_log_bdla(counts, spec.alpha, spec.bdla_levels),
        _ => local_log_bd(counts, &alpha_table(spec, counts)?),
    }
}

/// How the BIC penalty counts parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BicPenalty {
    /// `q_i (r_i - 1)`.
    #[default]
    Literal,
    /// The effective parameter count `Σ_j r̃_ij - q̃_i`.
    Effective,
}

impl FromStr for BicPenalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(BicPenalty::Literal),
            "effective" => Ok(BicPenalty::Effective),
            other => Err(Error::Argument(format!("unknown BIC penalty `{other}`"))),
        }
    }
}

/// Maximised log-likelihood `Σ n_ijk ln(n_ijk / n_ij)`, with `0 ln 0 = 0`.
pub fn log_likelihood(counts: &LocalCounts) -> f64 {
    counts
        .rows()
        .map(|row| {
            let n_ij: u64 = row.iter().sum();
            row.iter()
                .filter(|&&n| n > 0)
                .map(|&n| n as f64 * (n as f64 / n_ij as f64).ln())
                .sum::<f64>()
        })
        .sum()
}

pub fn local_bic(counts: &LocalCounts, penalty: BicPenalty) -> f64 {
    let n = counts.n();
    let dims = match penalty {
        BicPenalty::Literal => (counts.q() * (counts.r() - 1)) as f64,
        BicPenalty::Effective => effective_dims(counts) as f64,
    };
    let weight = if n > 0 { (n as f64).ln() / 2.0 } else { 0.0 };
    log_likelihood(counts) - weight * dims
}

/// A network score: a BD marginal likelihood or BIC.
#[derive(Debug, Clone, PartialEq)]
pub enum Score {
    Bd(AlphaSpec),
    Bic(BicPenalty),
}

impl Score {
    pub fn name(&self) -> String {
        match self {
            Score::Bd(spec) => spec.kind.name().to_owned(),
            Score::Bic(BicPenalty::Literal) => "bic".to_owned(),
            Score::Bic(BicPenalty::Effective) => "bic-effective".to_owned(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Score::Bd(spec) => spec.validate(),
            Score::Bic(_) => Ok(()),
        }
    }

    pub fn local(&self, counts: &LocalCounts) -> Result<f64> {
        match self {
            Score::Bd(spec) => local_log_score(counts, spec),
            Score::Bic(penalty) => Ok(local_bic(counts, *penalty)),
        }
    }
}

/// Total score with its per-node decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalScore {
    pub total: f64,
    pub per_node: Vec<f64>,
}

/// Sum of local scores over every node of `dag`.
pub fn total_score(data: &Dataset, dag: &Dag, score: &Score) -> Result<TotalScore> {
    if dag.node_count() != data.n_vars() {
        return Err(Error::Argument(format!(
            "DAG has {} nodes but the data has {} variables",
            dag.node_count(),
            data.n_vars()
        )));
    }
    score.validate()?;
    let per_node = (0..dag.node_count())
        .map(|i| score.local(&data.counts(i, dag.parents(i))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(TotalScore {
        total: per_node.iter().sum(),
        per_node,
    })
}

/// Effective number of parameters `Σ_j r̃_ij - q̃_i`.
pub fn effective_dims(counts: &LocalCounts) -> i64 {
    let r_tilde: usize = counts.r_tilde().iter().sum();
    r_tilde as i64 - counts.q_tilde() as i64
}

/// Effective degrees of freedom of a nested pair, `d_EP(plus) - d_EP(minus)`.
pub fn d_edf(minus: &LocalCounts, plus: &LocalCounts) -> i64 {
    effective_dims(plus) - effective_dims(minus)
}

/// Imaginary sample size left after unobserved BDeu rows cancel: `α q̃ / q`.
pub fn effective_iss(counts: &LocalCounts, alpha: f64) -> f64 {
    alpha * counts.q_tilde() as f64 / counts.q() as f64
}

/// Split of the log BDeu score into a data-free prior term and a likelihood term,
/// together with their closed-form approximations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermDecomposition {
    /// `Σ_j [ln Γ(α_ij) - Σ_k ln Γ(α_ijk)]`.
    pub prior: f64,
    /// `Σ_j [Σ_k ln Γ(α_ijk + n_ijk) - ln Γ(α_ij + n_ij)]`.
    pub likelihood: f64,
    /// `q (r - 1) ln α_ijk`, for `α_ijk < 1`.
    pub approx_prior_small: f64,
    /// `α ln r + ½ q (r - 1) ln(α_ijk / 2π)`, for `α_ijk > 1`.
    pub approx_prior_large: f64,
    /// `-q (r - 1) ln α_ijk`, for small `α + n`.
    pub approx_likelihood_sparse: f64,
}

pub fn bdeu_term_decomposition(counts: &LocalCounts, alpha: f64) -> Result<TermDecomposition> {
    let table = alpha_table(&AlphaSpec::bdeu(alpha), counts)?;
    let (q, r) = (counts.q() as f64, counts.r() as f64);
    let cell = table.row(0)[0];
    let a_ij = r * cell;
    let mut prior = 0.0;
    let mut likelihood = 0.0;
    for n_row in counts.rows() {
        let n_ij: u64 = n_row.iter().sum();
        prior += lgamma(a_ij) - r * lgamma(cell);
        likelihood += n_row.iter().map(|&n| lgamma(cell + n as f64)).sum::<f64>()
            - lgamma(a_ij + n_ij as f64);
    }
    let dims = q * (r - 1.0);
    Ok(TermDecomposition {
        prior,
        likelihood,
        approx_prior_small: dims * cell.ln(),
        approx_prior_large: alpha * r.ln()
            + 0.5 * dims * (cell / (2.0 * std::f64::consts::PI)).ln(),
        approx_likelihood_sparse: -dims * cell.ln(),
    })
}
