//! Greedy hill climbing over DAGs with a cache of local scores, and an
//! exhaustive search for small networks.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::{is_acyclic, Arc, Dag};
use crate::scores::Score;

pub const DEFAULT_MAX_PARENTS: usize = 5;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Largest network [`exhaustive_best`] accepts.
pub const EXHAUSTIVE_MAX_NODES: usize = 5;

/// Score gains at or below this are treated as rounding noise.
pub const IMPROVEMENT_TOLERANCE: f64 = 1e-9;

/// A single-arc change. The derived order (kind, then `from`, then `to`)
/// is the order in which neighbours are examined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Add(usize, usize),
    Delete(usize, usize),
    Reverse(usize, usize),
}

impl Move {
    pub fn apply(&self, g: &Dag) -> Result<Dag> {
        match *self {
            Move::Add(from, to) => g.with_arc(from, to),
            Move::Delete(from, to) => g.without_arc(from, to),
            Move::Reverse(from, to) => g.with_reversed(from, to),
        }
    }

    /// Nodes whose parent sets change.
    fn touched(&self) -> Vec<usize> {
        match *self {
            Move::Add(_, to) | Move::Delete(_, to) => vec![to],
            Move::Reverse(from, to) => vec![from, to],
        }
    }

    pub fn describe(&self, names: &[&str]) -> String {
        match *self {
            Move::Add(f, t) => format!("add {} -> {}", names[f], names[t]),
            Move::Delete(f, t) => format!("delete {} -> {}", names[f], names[t]),
            Move::Reverse(f, t) => format!("reverse {} -> {}", names[f], names[t]),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Move::Add(a, b) => write!(f, "add {a}->{b}"),
            Move::Delete(a, b) => write!(f, "delete {a}->{b}"),
            Move::Reverse(a, b) => write!(f, "reverse {a}->{b}"),
        }
    }
}

/// Every legal single-arc move from `g`, sorted.
pub fn neighbors(g: &Dag, max_parents: usize) -> Vec<Move> {
    let n = g.node_count();
    let mut moves = Vec::new();
    for from in 0..n {
        for to in 0..n {
            if from == to {
                continue;
            }
            if g.has_arc(from, to) {
                moves.push(Move::Delete(from, to));
                if g.parents(from).len() < max_parents && !reversal_creates_cycle(g, from, to) {
                    moves.push(Move::Reverse(from, to));
                }
            } else if !g.has_arc(to, from)
                && g.parents(to).len() < max_parents
                && !g.has_path(to, from)
            {
                moves.push(Move::Add(from, to));
            }
        }
    }
    moves.sort_unstable();
    moves
}

/// Reversing `from -> to` is cyclic iff another directed path `from ~> to` exists.
fn reversal_creates_cycle(g: &Dag, from: usize, to: usize) -> bool {
    g.without_arc(from, to)
        .map(|h| h.has_path(from, to))
        .unwrap_or(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HillClimbOptions {
    pub max_parents: usize,
    pub max_iter: usize,
}

impl Default for HillClimbOptions {
    fn default() -> Self {
        HillClimbOptions {
            max_parents: DEFAULT_MAX_PARENTS,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// One accepted move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveRecord {
    pub iteration: usize,
    pub mv: Move,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnResult {
    pub dag: Dag,
    pub score: f64,
    pub moves: Vec<MoveRecord>,
    /// Number of accepted moves.
    pub iterations: usize,
    /// `false` when the search stopped at `max_iter` with an improving move left.
    pub converged: bool,
    pub cache_size: usize,
}

impl LearnResult {
    /// Columns `iteration, move, delta`.
    pub fn write_move_log<W: Write>(&self, writer: W, names: &[&str]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Format(format!("writing move log: {e}"));
        w.write_record(["iteration", "move", "delta"])
            .map_err(err)?;
        for m in &self.moves {
            w.write_record([
                m.iteration.to_string(),
                m.mv.describe(names),
                format!("{:e}", m.delta),
            ])
            .map_err(err)?;
        }
        w.flush()
            .map_err(|e| Error::Format(format!("writing move log: {e}")))
    }
}

type FamilyKey = (usize, Vec<usize>);

struct FamilyCache<'a> {
    data: &'a Dataset,
    score: &'a Score,
    entries: HashMap<FamilyKey, f64>,
}

impl<'a> FamilyCache<'a> {
    fn new(data: &'a Dataset, score: &'a Score) -> Self {
        FamilyCache {
            data,
            score,
            entries: HashMap::new(),
        }
    }

    /// Scores every family in `keys` that is not cached yet.
    fn fill(&mut self, keys: Vec<FamilyKey>) -> Result<()> {
        let mut missing: Vec<FamilyKey> = keys
            .into_iter()
            .filter(|k| !self.entries.contains_key(k))
            .collect();
        missing.sort_unstable();
        missing.dedup();
        let (data, score) = (self.data, self.score);
        let scored: Vec<(FamilyKey, f64)> = missing
            .into_par_iter()
            .map(|key| {
                let value = score.local(&data.counts(key.0, &key.1)?)?;
                Ok((key, value))
            })
            .collect::<Result<_>>()?;
        self.entries.extend(scored);
        Ok(())
    }

    fn get(&self, child: usize, parents: &[usize]) -> f64 {
        self.entries[&(child, parents.to_vec())]
    }
}

/// Greedy ascent from the empty graph. Each iteration applies the best
/// improving neighbour, taking the first in neighbour order on ties, and
/// stops when no move gains more than [`IMPROVEMENT_TOLERANCE`].
pub fn hill_climb(data: &Dataset, score: &Score, options: HillClimbOptions) -> Result<LearnResult> {
    if data.n_rows() == 0 {
        return Err(Error::Argument("cannot learn from an empty dataset".into()));
    }
    score.validate()?;
    let n = data.n_vars();
    let mut cache = FamilyCache::new(data, score);
    let mut current = Dag::empty(n);
    cache.fill((0..n).map(|i| (i, Vec::new())).collect())?;
    let mut current_score: f64 = (0..n).map(|i| cache.get(i, &[])).sum();
    let mut moves = Vec::new();
    let mut converged = false;

    for iteration in 1..=options.max_iter {
        let candidates: Vec<(Move, Dag)> = neighbors(&current, options.max_parents)
            .into_iter()
            .map(|m| Ok((m, m.apply(&current)?)))
            .collect::<Result<_>>()?;
        cache.fill(
            candidates
                .iter()
                .flat_map(|(m, g)| m.touched().into_iter().map(|v| (v, g.parents(v).to_vec())))
                .collect(),
        )?;
        let mut best: Option<(Move, &Dag, f64)> = None;
        for (m, g) in &candidates {
            let delta: f64 = m
                .touched()
                .into_iter()
                .map(|v| cache.get(v, g.parents(v)) - cache.get(v, current.parents(v)))
                .sum();
            if delta > IMPROVEMENT_TOLERANCE && best.is_none_or(|(_, _, d)| delta > d) {
                best = Some((*m, g, delta));
            }
        }
        match best {
            Some((mv, g, delta)) => {
                current = g.clone();
                current_score += delta;
                moves.push(MoveRecord {
                    iteration,
                    mv,
                    delta,
                });
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    Ok(LearnResult {
        dag: current,
        score: current_score,
        iterations: moves.len(),
        moves,
        converged,
        cache_size: cache.entries.len(),
    })
}

/// All DAGs on `n <= 5` labelled nodes, in a fixed order.
pub fn enumerate_dags(n: usize) -> Result<Vec<Dag>> {
    if n > EXHAUSTIVE_MAX_NODES {
        return Err(Error::Size(format!(
            "exhaustive enumeration supports at most {EXHAUSTIVE_MAX_NODES} nodes, got {n}"
        )));
    }
    let pairs: Vec<Arc> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut dags = Vec::new();
    let mut arcs = Vec::with_capacity(pairs.len());
    // Each unordered pair is absent, a -> b, or b -> a.
    for code in 0..total {
        arcs.clear();
        let mut c = code;
        for &(a, b) in &pairs {
            match c % 3 {
                1 => arcs.push((a, b)),
                2 => arcs.push((b, a)),
                _ => {}
            }
            c /= 3;
        }
        if is_acyclic(n, &arcs) {
            dags.push(Dag::from_arcs(n, &arcs)?);
        }
    }
    Ok(dags)
}

/// Global maximiser over all DAGs; ties (within [`IMPROVEMENT_TOLERANCE`])
/// go to fewer arcs, then to the lexicographically smaller arc list.
pub fn exhaustive_best(data: &Dataset, score: &Score) -> Result<(Dag, f64)> {
    let n = data.n_vars();
    let dags = enumerate_dags(n)?;
    score.validate()?;
    let mut cache = FamilyCache::new(data, score);
    cache.fill(
        dags.iter()
            .flat_map(|g| (0..n).map(move |v| (v, g.parents(v).to_vec())))
            .collect(),
    )?;
    let mut best: Option<(Dag, f64, Vec<Arc>)> = None;
    for g in dags {
        let s: f64 = (0..n).map(|v| cache.get(v, g.parents(v))).sum();
        let arcs = g.arcs();
        let better = match &best {
            None => true,
            Some((_, bs, barcs)) => {
                if s > bs + IMPROVEMENT_TOLERANCE {
                    true
                } else if s < bs - IMPROVEMENT_TOLERANCE {
                    false
                } else {
                    (arcs.len(), &arcs) < (barcs.len(), barcs)
                }
            }
        };
        if better {
            best = Some((g, s, arcs));
        }
    }
    let (g, s, _) = best.expect("at least the empty DAG exists");
    Ok((g, s))
}
