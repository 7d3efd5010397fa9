//! Comparisons of two DAGs that differ in a single parent set: Bayes
//! factors, sweeps over the imaginary sample size, ME decisions and the
//! regularity check.

use std::io::Write;

use rayon::prelude::*;

use crate::dataset::{Dataset, LocalCounts};
use crate::entropy::{empirical_entropy, log_me_score, mixture_expected_entropy};
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::scores::{local_log_score, AlphaSpec};

/// Relative tolerance on log quantities below which two DAGs are tied.
pub const INDIFFERENCE_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_GRID: (f64, f64, usize) = (1e-4, 1e4, 201);

/// The single node whose parent set differs, or `None` for identical DAGs.
pub fn differing_node(g_minus: &Dag, g_plus: &Dag) -> Result<Option<usize>> {
    if g_minus.node_count() != g_plus.node_count() {
        return Err(Error::Argument(format!(
            "DAGs have {} and {} nodes",
            g_minus.node_count(),
            g_plus.node_count()
        )));
    }
    let differing: Vec<usize> = (0..g_minus.node_count())
        .filter(|&i| g_minus.parents(i) != g_plus.parents(i))
        .collect();
    match differing.as_slice() {
        [] => Ok(None),
        [node] => Ok(Some(*node)),
        _ => Err(Error::Argument(format!(
            "DAGs differ at {} nodes; compare total scores instead",
            differing.len()
        ))),
    }
}

fn check_nodes(data: &Dataset, dag: &Dag) -> Result<()> {
    if dag.node_count() != data.n_vars() {
        return Err(Error::Argument(format!(
            "DAG has {} nodes but the data has {} variables",
            dag.node_count(),
            data.n_vars()
        )));
    }
    Ok(())
}

/// Local counts of the differing node under both DAGs.
fn family_pair(
    data: &Dataset,
    g_minus: &Dag,
    g_plus: &Dag,
) -> Result<Option<(LocalCounts, LocalCounts)>> {
    check_nodes(data, g_minus)?;
    check_nodes(data, g_plus)?;
    match differing_node(g_minus, g_plus)? {
        None => Ok(None),
        Some(node) => Ok(Some((
            data.counts(node, g_minus.parents(node))?,
            data.counts(node, g_plus.parents(node))?,
        ))),
    }
}

/// `ln BD(G-) - ln BD(G+)`; positive values favour `G-`.
pub fn bayes_factor(data: &Dataset, g_minus: &Dag, g_plus: &Dag, spec: &AlphaSpec) -> Result<f64> {
    spec.validate()?;
    match family_pair(data, g_minus, g_plus)? {
        None => Ok(0.0),
        Some((minus, plus)) => Ok(local_log_score(&minus, spec)? - local_log_score(&plus, spec)?),
    }
}

/// `points` values evenly spaced in log scale from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        return Err(Error::Argument(format!(
            "grid needs 0 < lo < hi and at least 2 points, got ({lo}, {hi}, {points})"
        )));
    }
    let (a, b) = (lo.log10(), hi.log10());
    let step = (b - a) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points)
        .map(|i| 10f64.powf(a + step * i as f64))
        .collect();
    grid[0] = lo;
    grid[points - 1] = hi;
    Ok(grid)
}

/// One sweep point for one prior family.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub alpha: f64,
    pub score_name: String,
    /// `ln BD(G-) - ln BD(G+)`.
    pub log_bf: f64,
    pub ee_minus: f64,
    pub ee_plus: f64,
    pub log_me_minus: f64,
    pub log_me_plus: f64,
}

impl SweepRecord {
    pub fn bf(&self) -> f64 {
        self.log_bf.exp()
    }

    pub fn me_minus(&self) -> f64 {
        self.log_me_minus.exp()
    }

    pub fn me_plus(&self) -> f64 {
        self.log_me_plus.exp()
    }
}

/// Records ordered by grid index, then by prior family in the order given.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub child: usize,
    pub grid: Vec<f64>,
    pub records: Vec<SweepRecord>,
}

impl SweepCurve {
    pub fn for_score<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a SweepRecord> + 'a {
        self.records.iter().filter(move |r| r.score_name == name)
    }

    /// Columns `alpha, score_name, log_bf, log_bf_reverse, ee_minus, ee_plus, me_minus, me_plus`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Format(format!("writing sweep CSV: {e}"));
        w.write_record([
            "alpha",
            "score_name",
            "log_bf",
            "log_bf_reverse",
            "ee_minus",
            "ee_plus",
            "me_minus",
            "me_plus",
        ])
        .map_err(io)?;
        for r in &self.records {
            w.write_record([
                format!("{:e}", r.alpha),
                r.score_name.clone(),
                format!("{:e}", r.log_bf),
                format!("{:e}", -r.log_bf),
                format!("{:e}", r.ee_minus),
                format!("{:e}", r.ee_plus),
                format!("{:e}", r.me_minus()),
                format!("{:e}", r.me_plus()),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::Format(format!("writing sweep CSV: {e}")))
    }
}

fn sweep_point(minus: &LocalCounts, plus: &LocalCounts, spec: &AlphaSpec) -> Result<SweepRecord> {
    Ok(SweepRecord {
        alpha: spec.alpha,
        score_name: spec.kind.name().to_owned(),
        log_bf: local_log_score(minus, spec)? - local_log_score(plus, spec)?,
        ee_minus: mixture_expected_entropy(minus, spec)?,
        ee_plus: mixture_expected_entropy(plus, spec)?,
        log_me_minus: log_me_score(minus, spec)?,
        log_me_plus: log_me_score(plus, spec)?,
    })
}

/// Evaluates every prior family in `specs` at every α of `grid`; the α of
/// each spec is replaced by the grid value.
pub fn alpha_sweep(
    data: &Dataset,
    g_minus: &Dag,
    g_plus: &Dag,
    specs: &[AlphaSpec],
    grid: &[f64],
) -> Result<SweepCurve> {
    if grid.is_empty() || grid.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::Argument(
            "grid values must be finite and positive".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("grid must be strictly increasing".into()));
    }
    check_nodes(data, g_minus)?;
    let child = differing_node(g_minus, g_plus)?.unwrap_or(0);
    let minus = data.counts(child, g_minus.parents(child))?;
    let plus = data.counts(child, g_plus.parents(child))?;
    for spec in specs {
        spec.validate()?;
    }
    let per_alpha: Vec<Vec<SweepRecord>> = grid
        .par_iter()
        .map(|&alpha| {
            specs
                .iter()
                .map(|spec| sweep_point(&minus, &plus, &spec.with_alpha(alpha)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(SweepCurve {
        child,
        grid: grid.to_vec(),
        records: per_alpha.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    PreferMinus,
    PreferPlus,
    Indifferent,
}

impl std::fmt::Display for Preference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Preference::PreferMinus => "prefer G-",
            Preference::PreferPlus => "prefer G+",
            Preference::Indifferent => "indifferent",
        })
    }
}

/// ME decision together with the logs of the two products it compares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeDecision {
    pub preference: Preference,
    pub log_me_minus: f64,
    pub log_me_plus: f64,
}

fn compare_logs(minus: f64, plus: f64) -> Preference {
    let scale = minus.abs().max(plus.abs()).max(1.0);
    if minus == plus || (minus - plus).abs() <= INDIFFERENCE_TOLERANCE * scale {
        Preference::Indifferent
    } else if minus > plus {
        Preference::PreferMinus
    } else {
        Preference::PreferPlus
    }
}

/// Compares `E(H | D) · BD` of the differing node under both DAGs.
pub fn me_prefer(
    data: &Dataset,
    g_minus: &Dag,
    g_plus: &Dag,
    spec: &AlphaSpec,
) -> Result<MeDecision> {
    spec.validate()?;
    let (log_me_minus, log_me_plus) = match family_pair(data, g_minus, g_plus)? {
        None => {
            let counts = data.counts(0, g_minus.parents(0))?;
            let v = log_me_score(&counts, spec)?;
            (v, v)
        }
        Some((minus, plus)) => (log_me_score(&minus, spec)?, log_me_score(&plus, spec)?),
    };
    Ok(MeDecision {
        preference: compare_logs(log_me_minus, log_me_plus),
        log_me_minus,
        log_me_plus,
    })
}

/// Outcome of the regularity check with the quantities behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    /// `false` when the smaller parent set has no higher empirical entropy
    /// yet receives a lower score.
    pub regular: bool,
    pub entropy_minus: f64,
    pub entropy_plus: f64,
    pub log_bd_minus: f64,
    pub log_bd_plus: f64,
}

/// Requires the parents of the differing node in `g_minus` to be a subset of those in `g_plus`.
pub fn regularity_check(
    data: &Dataset,
    g_minus: &Dag,
    g_plus: &Dag,
    spec: &AlphaSpec,
) -> Result<RegularityReport> {
    spec.validate()?;
    let (minus, plus) = match family_pair(data, g_minus, g_plus)? {
        Some(pair) => pair,
        None => {
            let c = data.counts(0, g_minus.parents(0))?;
            (c.clone(), c)
        }
    };
    if !minus.parents().iter().all(|p| plus.parents().contains(p)) {
        return Err(Error::Argument(
            "parent set in G- must be contained in the parent set in G+".into(),
        ));
    }
    let entropy_minus = empirical_entropy(&minus);
    let entropy_plus = empirical_entropy(&plus);
    let log_bd_minus = local_log_score(&minus, spec)?;
    let log_bd_plus = local_log_score(&plus, spec)?;
    let no_more_entropy = entropy_minus <= entropy_plus + 1e-12;
    let violation =
        no_more_entropy && compare_logs(log_bd_minus, log_bd_plus) == Preference::PreferPlus;
    Ok(RegularityReport {
        regular: !violation,
        entropy_minus,
        entropy_plus,
        log_bd_minus,
        log_bd_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::builtin_examples;
    use crate::scores::{alpha_table, local_log_bd};

    #[test]
    fn bayes_factors_of_the_examples() {
        let ex = builtin_examples();
        let e1 = &ex[0];
        let bf = bayes_factor(&e1.data, &e1.g_minus, &e1.g_plus, &AlphaSpec::bdeu(1.0)).unwrap();
        assert!((bf.exp() - 0.739).abs() < 1e-3);
        for alpha in [1e-3, 1.0, 50.0] {
            let bf =
                bayes_factor(&e1.data, &e1.g_minus, &e1.g_plus, &AlphaSpec::bds(alpha)).unwrap();
            assert_eq!(bf, 0.0);
        }
        let same = bayes_factor(&e1.data, &e1.g_plus, &e1.g_plus, &AlphaSpec::bdeu(1.0)).unwrap();
        assert_eq!(same, 0.0);
    }

    #[test]
    fn bayes_factor_matches_score_ratio() {
        for ex in builtin_examples() {
            let spec = AlphaSpec::bdeu(2.5);
            let bf = bayes_factor(&ex.data, &ex.g_minus, &ex.g_plus, &spec).unwrap();
            let local = |g: &Dag| {
                let c = ex.data.counts(0, g.parents(0)).unwrap();
                local_log_bd(&c, &alpha_table(&spec, &c).unwrap())
                    .unwrap()
                    .exp()
            };
            let ratio = local(&ex.g_minus) / local(&ex.g_plus);
            assert!((bf.exp() / ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_dags_differing_at_two_nodes() {
        let ex = &builtin_examples()[0];
        let other = ex.g_plus.with_arc(3, 1).unwrap();
        let err = bayes_factor(&ex.data, &ex.g_minus, &other, &AlphaSpec::bdeu(1.0));
        assert!(matches!(err, Err(Error::Argument(_))));
    }

    #[test]
    fn grid() {
        let g = log_grid(1e-4, 1e4, 201).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!((g[0], g[100], g[200]), (1e-4, 1.0, 1e4));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(log_grid(0.0, 1.0, 5).is_err());
        assert!(log_grid(2.0, 1.0, 5).is_err());
        assert!(log_grid(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn sweep_ranges() {
        let ex = builtin_examples();
        let grid = log_grid(1e-4, 1e4, 201).unwrap();
        let specs = [AlphaSpec::bdeu(1.0), AlphaSpec::bds(1.0)];
        let c1 = alpha_sweep(&ex[0].data, &ex[0].g_minus, &ex[0].g_plus, &specs, &grid).unwrap();
        assert_eq!(c1.records.len(), 402);
        let reverse: Vec<f64> = c1.for_score("bdeu").map(|r| (-r.log_bf).exp()).collect();
        assert!(reverse.iter().all(|&b| (0.98..=2.55).contains(&b)));
        assert!((reverse[0] - 1.0).abs() < 0.05 && (reverse[200] - 1.0).abs() < 0.05);
        for r in c1.for_score("bds") {
            assert!(r.log_bf.abs() <= 1e-9);
            assert_eq!(r.ee_minus, r.ee_plus);
            assert_eq!(r.log_me_minus, r.log_me_plus);
        }

        let c2 = alpha_sweep(&ex[1].data, &ex[1].g_minus, &ex[1].g_plus, &specs, &grid).unwrap();
        let reverse: Vec<f64> = c2.for_score("bdeu").map(|r| (-r.log_bf).exp()).collect();
        assert!(
            reverse.iter().all(|&b| (0.045..=1.05).contains(&b)),
            "{reverse:?}"
        );
    }

    #[test]
    fn sweep_csv_is_deterministic() {
        let ex = &builtin_examples()[1];
        let grid = log_grid(0.1, 10.0, 5).unwrap();
        let specs = [AlphaSpec::bdeu(1.0), AlphaSpec::bdla(1.0, 2)];
        let render = || {
            let curve = alpha_sweep(&ex.data, &ex.g_minus, &ex.g_plus, &specs, &grid).unwrap();
            let mut buf = Vec::new();
            curve.write_csv(&mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render();
        assert_eq!(a, render());
        assert_eq!(a.lines().count(), 11);
        assert!(a.starts_with("alpha,score_name,log_bf,log_bf_reverse,"));
    }

    #[test]
    fn me_decisions() {
        let ex = builtin_examples();
        let d = |i: usize, spec: AlphaSpec| {
            me_prefer(&ex[i].data, &ex[i].g_minus, &ex[i].g_plus, &spec)
                .unwrap()
                .preference
        };
        assert_eq!(d(0, AlphaSpec::bdeu(1.0)), Preference::PreferPlus);
        assert_eq!(d(1, AlphaSpec::bdeu(1.0)), Preference::PreferMinus);
        assert_eq!(d(0, AlphaSpec::bds(1.0)), Preference::Indifferent);
        assert_eq!(d(1, AlphaSpec::bds(1.0)), Preference::Indifferent);
    }

    #[test]
    fn regularity() {
        let ex = builtin_examples();
        let e1 = &ex[0];
        let r = regularity_check(&e1.data, &e1.g_minus, &e1.g_plus, &AlphaSpec::bdeu(1.0)).unwrap();
        assert!(!r.regular);
        assert_eq!((r.entropy_minus, r.entropy_plus), (0.0, 0.0));
        let r = regularity_check(&e1.data, &e1.g_minus, &e1.g_plus, &AlphaSpec::bds(1.0)).unwrap();
        assert!(r.regular);
        let r = regularity_check(&e1.data, &e1.g_plus, &e1.g_plus, &AlphaSpec::bdeu(1.0)).unwrap();
        assert!(r.regular);
        let swapped = regularity_check(&e1.data, &e1.g_plus, &e1.g_minus, &AlphaSpec::bdeu(1.0));
        assert!(matches!(swapped, Err(Error::Argument(_))));
    }
}
