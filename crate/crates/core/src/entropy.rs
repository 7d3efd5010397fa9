//! Bayesian entropy estimators for one node given its parents.
//!
//! All values are in nats and follow `0 ln 0 = 0`. A row (parent
//! configuration) with no posterior mass, `α_ij + n_ij = 0`, contributes
//! nothing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::dataset::LocalCounts;
use crate::error::{Error, Result};
use crate::scores::{alpha_table, local_log_bd, AlphaSpec, AlphaTable, PriorKind};
use crate::specfun::psi;

/// Which rows the marginal posterior entropy sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowMask {
    /// Only configurations with `n_ij > 0`.
    #[default]
    Observed,
    /// Every configuration with `α_ij + n_ij > 0`.
    All,
}

impl std::str::FromStr for RowMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "observed" => Ok(RowMask::Observed),
            "all" => Ok(RowMask::All),
            other => Err(Error::Argument(format!("unknown row mask `{other}`"))),
        }
    }
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

fn check_shape(counts: &LocalCounts, table: &AlphaTable) -> Result<()> {
    if counts.q() != table.q() || counts.r() != table.r() {
        return Err(Error::Argument(format!(
            "alpha table is {}x{}, counts are {}x{}",
            table.q(),
            table.r(),
            counts.q(),
            counts.r()
        )));
    }
    Ok(())
}

/// Rows with positive posterior mass, as `(counts, alphas, α_ij + n_ij)`.
fn augmented_rows<'a>(
    counts: &'a LocalCounts,
    table: &'a AlphaTable,
) -> impl Iterator<Item = (&'a [u64], &'a [f64], f64)> + 'a {
    counts
        .rows()
        .zip(table.rows())
        .filter_map(|(n_row, a_row)| {
            let mass = n_row.iter().sum::<u64>() as f64 + a_row.iter().sum::<f64>();
            (mass > 0.0).then_some((n_row, a_row, mass))
        })
}

/// Plug-in conditional entropy of the relative frequencies, summed over observed rows.
pub fn empirical_entropy(counts: &LocalCounts) -> f64 {
    counts
        .rows()
        .map(|row| {
            let n_ij: u64 = row.iter().sum();
            if n_ij == 0 {
                return 0.0;
            }
            0.0 - row
                .iter()
                .map(|&n| plogp(n as f64 / n_ij as f64))
                .sum::<f64>()
        })
        .sum()
}

/// Entropy of the posterior-mean probabilities `(α_ijk + n_ijk) / (α_ij + n_ij)`.
pub fn marginal_posterior_entropy(
    counts: &LocalCounts,
    table: &AlphaTable,
    mask: RowMask,
) -> Result<f64> {
    check_shape(counts, table)?;
    Ok(augmented_rows(counts, table)
        .filter(|(n_row, _, _)| mask == RowMask::All || n_row.iter().any(|&n| n > 0))
        .map(|(n_row, a_row, mass)| {
            0.0 - n_row
                .iter()
                .zip(a_row)
                .map(|(&n, &a)| plogp((a + n as f64) / mass))
                .sum::<f64>()
        })
        .sum())
}

/// Posterior expectation of the conditional entropy under the Dirichlet posterior:
/// `Σ_j [ψ(α_ij + n_ij + 1) - Σ_k p_jk ψ(α_ijk + n_ijk + 1)]`.
pub fn posterior_expected_entropy(counts: &LocalCounts, table: &AlphaTable) -> Result<f64> {
    check_shape(counts, table)?;
    Ok(augmented_rows(counts, table)
        .map(|(n_row, a_row, mass)| {
            let weighted: f64 = n_row
                .iter()
                .zip(a_row)
                .map(|(&n, &a)| a + n as f64)
                .filter(|&m| m > 0.0)
                .map(|m| m / mass * psi(m + 1.0))
                .sum();
            psi(mass + 1.0) - weighted
        })
        .sum())
}

/// `Σ_j (r - 1) / (2 (α_ij + n_ij))` over rows with positive mass.
pub fn lemma1_bias(counts: &LocalCounts, table: &AlphaTable) -> Result<f64> {
    check_shape(counts, table)?;
    let r = counts.r() as f64;
    Ok(augmented_rows(counts, table)
        .map(|(_, _, mass)| (r - 1.0) / (2.0 * mass))
        .sum())
}

/// Marginal posterior entropy (all rows) minus the bias: the large-count
/// approximation of [`posterior_expected_entropy`].
pub fn lemma1_approx(counts: &LocalCounts, table: &AlphaTable) -> Result<f64> {
    Ok(marginal_posterior_entropy(counts, table, RowMask::All)? - lemma1_bias(counts, table)?)
}

/// The entropy diagnostics reported for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub empirical: f64,
    pub marginal_posterior: f64,
    pub expected_posterior: f64,
    pub lemma1_bias: f64,
    /// `expected_posterior × exp(log BD)`.
    pub me_score: f64,
    pub log_bd: f64,
}

pub fn entropy_report(
    counts: &LocalCounts,
    table: &AlphaTable,
    mask: RowMask,
) -> Result<EntropyReport> {
    let expected_posterior = posterior_expected_entropy(counts, table)?;
    let log_bd = local_log_bd(counts, table)?;
    Ok(EntropyReport {
        empirical: empirical_entropy(counts),
        marginal_posterior: marginal_posterior_entropy(counts, table, mask)?,
        expected_posterior,
        lemma1_bias: lemma1_bias(counts, table)?,
        me_score: expected_posterior * log_bd.exp(),
        log_bd,
    })
}

/// `(expected entropy, log BD)` for every prior component of `spec`: one pair
/// for a single-table prior, one per grid point for BDla.
pub fn me_components(counts: &LocalCounts, spec: &AlphaSpec) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    let specs = match spec.kind {
        PriorKind::BDla => spec.bdla_grid().into_iter().map(AlphaSpec::bdeu).collect(),
        _ => vec![spec.clone()],
    };
    specs
        .iter()
        .map(|s| {
            let table = alpha_table(s, counts)?;
            Ok((
                posterior_expected_entropy(counts, &table)?,
                local_log_bd(counts, &table)?,
            ))
        })
        .collect()
}

/// Log of the ME score `E(H | D, α) · BD`, averaged over the BDla grid when
/// applicable. Returns `-inf` when the expected entropy is zero.
pub fn log_me_score(counts: &LocalCounts, spec: &AlphaSpec) -> Result<f64> {
    let logs: Vec<f64> = me_components(counts, spec)?
        .into_iter()
        .map(|(ee, log_bd)| ee.ln() + log_bd)
        .collect();
    Ok(crate::scores::log_mean_exp(&logs))
}

/// The ME score `E(H | D, α) · BD` (BDla: the grid average of the products).
pub fn me_score(counts: &LocalCounts, spec: &AlphaSpec) -> Result<f64> {
    Ok(log_me_score(counts, spec)?.exp())
}

/// Posterior-weighted expected entropy `Σ_s EE_s BD_s / Σ_s BD_s`; equals the
/// plain expected entropy for single-table priors.
pub fn mixture_expected_entropy(counts: &LocalCounts, spec: &AlphaSpec) -> Result<f64> {
    let comps = me_components(counts, spec)?;
    let max = comps.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let (num, den) = comps.iter().fold((0.0, 0.0), |(num, den), &(ee, lbd)| {
        let w = (lbd - max).exp();
        (num + w * ee, den + w)
    });
    Ok(num / den)
}

/// Contribution of `unobserved` prior-only rows to the expected entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnobservedTerm {
    /// `(q - q̃) [ψ(r α_ijk + 1) - ψ(α_ijk + 1)]`.
    pub exact: f64,
    /// `(q - q̃) [ln r - (r - 1) / (2 α_ij)]`.
    pub approx: f64,
}

pub fn unobserved_config_term(
    r: usize,
    alpha_ijk: f64,
    unobserved: usize,
) -> Result<UnobservedTerm> {
    if !(alpha_ijk.is_finite() && alpha_ijk >= 0.0) || r == 0 {
        return Err(Error::Argument(format!(
            "need r >= 1 and a finite non-negative cell weight, got r = {r}, α_ijk = {alpha_ijk}"
        )));
    }
    if alpha_ijk == 0.0 {
        // ψ(1) - ψ(1)
        return Ok(UnobservedTerm {
            exact: 0.0,
            approx: 0.0,
        });
    }
    let rf = r as f64;
    let count = unobserved as f64;
    let a_ij = rf * alpha_ijk;
    Ok(UnobservedTerm {
        exact: count * (psi(a_ij + 1.0) - psi(alpha_ijk + 1.0)),
        approx: count * (rf.ln() - (rf - 1.0) / (2.0 * a_ij)),
    })
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

const MC_CHUNK: usize = 4096;

/// Draws conditional-probability tables from the Dirichlet posterior and
/// averages their plug-in conditional entropy.
///
/// Sampling is split into fixed-size chunks, each with its own ChaCha stream,
/// and partial sums are combined in chunk order, so the result depends only
/// on `seed` and `samples`.
pub fn mc_expected_entropy(
    counts: &LocalCounts,
    table: &AlphaTable,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_shape(counts, table)?;
    if samples < 1000 {
        return Err(Error::Argument(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    // Posterior parameters per row with positive mass; zero-weight cells are dropped.
    let rows: Vec<Vec<Gamma<f64>>> = augmented_rows(counts, table)
        .map(|(n_row, a_row, _)| {
            n_row
                .iter()
                .zip(a_row)
                .map(|(&n, &a)| a + n as f64)
                .filter(|&m| m > 0.0)
                .map(|m| Gamma::new(m, 1.0).map_err(|e| Error::Argument(e.to_string())))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let len = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut draws = Vec::new();
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..len {
                let mut h = 0.0;
                for row in &rows {
                    draws.clear();
                    draws.extend(row.iter().map(|g| g.sample(&mut rng)));
                    let total: f64 = draws.iter().sum();
                    if total > 0.0 {
                        h -= draws.iter().map(|&d| plogp(d / total)).sum::<f64>();
                    }
                }
                sum += h;
                sum_sq += h * h;
            }
            (sum, sum_sq)
        })
        .collect();

    let (sum, sum_sq) = partials
        .iter()
        .fold((0.0, 0.0), |(s, ss), &(a, b)| (s + a, ss + b));
    let n = samples as f64;
    let mean = sum / n;
    let variance = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (variance / n).sqrt(),
    })
}
