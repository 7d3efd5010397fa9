//! Complete categorical data and the contingency counts derived from it.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Dag;

/// Upper bound on `q_i * r_i` for a single contingency table.
pub const MAX_TABLE_CELLS: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub levels: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, levels: Vec<String>) -> Self {
        Variable {
            name: name.into(),
            levels,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.levels.len()
    }
}

/// A complete discrete sample: one level index per variable per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    variables: Vec<Variable>,
    /// Row-major level indices, `n_rows * variables.len()` entries.
    cells: Vec<u32>,
    n_rows: usize,
}

impl Dataset {
    /// Builds a dataset from level-encoded rows, validating every cell.
    pub fn new(variables: Vec<Variable>, rows: &[Vec<usize>]) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::Argument(
                "dataset needs at least one variable".into(),
            ));
        }
        for v in &variables {
            if v.levels.is_empty() {
                return Err(Error::Argument(format!(
                    "variable {} has no levels",
                    v.name
                )));
            }
        }
        let width = variables.len();
        let mut cells = Vec::with_capacity(rows.len() * width);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Format(format!(
                    "row {r} has {} cells, expected {width}",
                    row.len()
                )));
            }
            for (c, &level) in row.iter().enumerate() {
                if level >= variables[c].cardinality() {
                    return Err(Error::Argument(format!(
                        "row {r}, column {c}: level {level} out of range for {}",
                        variables[c].name
                    )));
                }
                cells.push(level as u32);
            }
        }
        Ok(Dataset {
            variables,
            cells,
            n_rows: rows.len(),
        })
    }

    /// Convenience constructor for integer-coded data: levels are `"0".."r-1"`.
    pub fn from_codes(
        names: &[&str],
        cardinalities: &[usize],
        rows: &[Vec<usize>],
    ) -> Result<Self> {
        if names.len() != cardinalities.len() {
            return Err(Error::Argument(
                "names and cardinalities differ in length".into(),
            ));
        }
        let variables = names
            .iter()
            .zip(cardinalities)
            .map(|(name, &r)| Variable::new(*name, (0..r).map(|l| l.to_string()).collect()))
            .collect();
        Dataset::new(variables, rows)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn names(&self) -> Vec<&str> {
        self.variables.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn cardinality(&self, var: usize) -> usize {
        self.variables[var].cardinality()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn row(&self, r: usize) -> &[u32] {
        let w = self.variables.len();
        &self.cells[r * w..(r + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.cells.chunks_exact(self.variables.len())
    }

    /// Contingency table of `child` against the joint configurations of `parents`.
    ///
    /// Parents are sorted and deduplicated first so that a parent set always
    /// maps to the same configuration order; the first (lowest-index) parent
    /// is the most significant digit of the configuration index.
    pub fn counts(&self, child: usize, parents: &[usize]) -> Result<LocalCounts> {
        let n_vars = self.n_vars();
        if child >= n_vars {
            return Err(Error::Argument(format!("child index {child} out of range")));
        }
        let mut parents = parents.to_vec();
        parents.sort_unstable();
        parents.dedup();
        if let Some(&bad) = parents.iter().find(|&&p| p >= n_vars) {
            return Err(Error::Argument(format!("parent index {bad} out of range")));
        }
        if parents.contains(&child) {
            return Err(Error::Argument(format!(
                "variable {child} cannot be its own parent"
            )));
        }

        let r = self.cardinality(child);
        let mut q = 1usize;
        for &p in &parents {
            q = q
                .checked_mul(self.cardinality(p))
                .filter(|q| q.saturating_mul(r) <= MAX_TABLE_CELLS)
                .ok_or_else(|| {
                    Error::Size(format!(
                        "parent set {parents:?} of variable {child} has too many configurations"
                    ))
                })?;
        }

        let mut table = vec![0u64; q * r];
        for row in self.rows() {
            let mut j = 0usize;
            for &p in &parents {
                j = j * self.cardinality(p) + row[p] as usize;
            }
            table[j * r + row[child] as usize] += 1;
        }
        Ok(LocalCounts::from_parts(child, parents, r, q, table))
    }

    /// Reads a comma-separated file; see [`Dataset::from_reader`].
    pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Dataset::from_reader(file, has_header)
    }

    /// Parses CSV text. Levels are recorded in order of first appearance.
    pub fn from_reader<R: Read>(reader: R, has_header: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let mut names: Option<Vec<String>> = None;
        let mut levels: Vec<Vec<String>> = Vec::new();
        let mut lookup: Vec<HashMap<String, usize>> = Vec::new();
        let mut rows: Vec<Vec<usize>> = Vec::new();
        let mut width: Option<usize> = None;

        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Format(e.to_string()))?;
            let w = *width.get_or_insert(record.len());
            if record.len() != w {
                return Err(Error::Format(format!(
                    "line {} has {} fields, expected {w}",
                    line + 1,
                    record.len()
                )));
            }
            if has_header && names.is_none() {
                names = Some(record.iter().map(str::to_owned).collect());
                continue;
            }
            if levels.is_empty() {
                levels = vec![Vec::new(); w];
                lookup = vec![HashMap::new(); w];
            }
            let mut row = Vec::with_capacity(w);
            for (c, field) in record.iter().enumerate() {
                if field.is_empty() {
                    return Err(Error::MissingData {
                        row: rows.len(),
                        column: c,
                    });
                }
                let next = levels[c].len();
                let idx = *lookup[c].entry(field.to_owned()).or_insert_with(|| {
                    levels[c].push(field.to_owned());
                    next
                });
                row.push(idx);
            }
            rows.push(row);
        }

        let width = width.ok_or_else(|| Error::Format("empty file".into()))?;
        if width == 0 {
            return Err(Error::Format("no columns".into()));
        }
        if rows.is_empty() {
            return Err(Error::Format("no data rows".into()));
        }
        let names = names.unwrap_or_else(|| (1..=width).map(|i| format!("V{i}")).collect());
        let variables = names
            .into_iter()
            .zip(levels)
            .map(|(name, levels)| Variable { name, levels })
            .collect();
        Dataset::new(variables, &rows)
    }

    /// Writes the dataset as CSV with a header row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(self.variables.iter().map(|v| v.name.as_str()))
            .map_err(csv_err)?;
        for row in self.rows() {
            w.write_record(
                row.iter()
                    .zip(&self.variables)
                    .map(|(&l, v)| v.levels[l as usize].as_str()),
            )
            .map_err(csv_err)?;
        }
        w.flush()
            .map_err(|e| Error::Format(format!("flushing csv: {e}")))?;
        Ok(())
    }
}

/// The `n_ijk` table for one child given one parent set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalCounts {
    child: usize,
    parents: Vec<usize>,
    r: usize,
    q: usize,
    table: Vec<u64>,
    row_totals: Vec<u64>,
}

impl LocalCounts {
    fn from_parts(child: usize, parents: Vec<usize>, r: usize, q: usize, table: Vec<u64>) -> Self {
        let row_totals = table.chunks_exact(r).map(|row| row.iter().sum()).collect();
        LocalCounts {
            child,
            parents,
            r,
            q,
            table,
            row_totals,
        }
    }

    /// Builds counts directly from a `q × r` table, detached from any dataset.
    pub fn from_table(rows: &[Vec<u64>]) -> Result<Self> {
        let r = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Argument("count table needs at least one row".into()))?;
        if r == 0 || rows.iter().any(|row| row.len() != r) {
            return Err(Error::Argument(
                "count table rows must be non-empty and equally long".into(),
            ));
        }
        let table = rows.iter().flatten().copied().collect();
        Ok(LocalCounts::from_parts(0, Vec::new(), r, rows.len(), table))
    }

    pub fn child(&self) -> usize {
        self.child
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    /// Number of child levels `r_i`.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of parent configurations `q_i`.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn row(&self, j: usize) -> &[u64] {
        &self.table[j * self.r..(j + 1) * self.r]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> + '_ {
        self.table.chunks_exact(self.r)
    }

    pub fn n_ijk(&self, j: usize, k: usize) -> u64 {
        self.table[j * self.r + k]
    }

    /// Per-configuration totals `n_ij`.
    pub fn n_ij(&self) -> &[u64] {
        &self.row_totals
    }

    pub fn n(&self) -> u64 {
        self.row_totals.iter().sum()
    }

    /// Number of configurations with `n_ij > 0`.
    pub fn q_tilde(&self) -> usize {
        self.row_totals.iter().filter(|&&n| n > 0).count()
    }

    /// Per-configuration number of positive cells.
    pub fn r_tilde(&self) -> Vec<usize> {
        self.rows()
            .map(|row| row.iter().filter(|&&n| n > 0).count())
            .collect()
    }

    /// The table as nested rows, mainly for printing and tests.
    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.rows().map(<[u64]>::to_vec).collect()
    }

    /// Multiplies every count by `factor`.
    pub fn scaled(&self, factor: u64) -> LocalCounts {
        let table = self.table.iter().map(|&n| n * factor).collect();
        LocalCounts::from_parts(self.child, self.parents.clone(), self.r, self.q, table)
    }
}

/// One of the two worked examples: a dataset over `X, Y, Z, W` with the
/// nested DAG pair `G- = {Z→X, W→X}` and `G+ = G- ∪ {Y→X}`.
#[derive(Debug, Clone)]
pub struct BuiltinExample {
    pub name: &'static str,
    pub data: Dataset,
    pub g_minus: Dag,
    pub g_plus: Dag,
}

impl BuiltinExample {
    /// Index of `X`, the only node whose parents differ between the two DAGs.
    pub const CHILD: usize = 0;
}

/// Each entry is `(count, x, y, z, w)`.
const D1_PATTERN: [(usize, usize, usize, usize, usize); 4] = [
    (3, 0, 0, 0, 0),
    (3, 1, 0, 1, 0),
    (3, 1, 0, 0, 1),
    (3, 0, 1, 1, 1),
];

const D2_PATTERN: [(usize, usize, usize, usize, usize); 8] = [
    (2, 0, 0, 0, 0),
    (1, 1, 0, 0, 0),
    (1, 0, 0, 1, 0),
    (2, 1, 0, 1, 0),
    (1, 0, 0, 0, 1),
    (2, 1, 0, 0, 1),
    (2, 0, 1, 1, 1),
    (1, 1, 1, 1, 1),
];

fn expand(pattern: &[(usize, usize, usize, usize, usize)]) -> Dataset {
    let rows: Vec<Vec<usize>> = pattern
        .iter()
        .flat_map(|&(times, x, y, z, w)| std::iter::repeat_n(vec![x, y, z, w], times))
        .collect();
    Dataset::from_codes(&["X", "Y", "Z", "W"], &[2, 2, 2, 2], &rows)
        .expect("builtin example data is valid")
}

/// The two 12-row example datasets with their DAG pair.
pub fn builtin_examples() -> Vec<BuiltinExample> {
    // X=0, Y=1, Z=2, W=3
    let g_minus = Dag::from_arcs(4, &[(2, 0), (3, 0)]).expect("acyclic");
    let g_plus = Dag::from_arcs(4, &[(1, 0), (2, 0), (3, 0)]).expect("acyclic");
    vec![
        BuiltinExample {
            name: "example1",
            data: expand(&D1_PATTERN),
            g_minus: g_minus.clone(),
            g_plus: g_plus.clone(),
        },
        BuiltinExample {
            name: "example2",
            data: expand(&D2_PATTERN),
            g_minus,
            g_plus,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1() -> Dataset {
        builtin_examples().remove(0).data
    }

    #[test]
    fn example_one_counts() {
        let data = d1();
        assert_eq!(data.n_rows(), 12);
        let c = data.counts(0, &[2, 3]).unwrap();
        assert_eq!(
            c.to_rows(),
            vec![vec![3, 0], vec![0, 3], vec![0, 3], vec![3, 0]]
        );
        assert_eq!(c.q_tilde(), 4);
        assert_eq!(c.r_tilde(), vec![1, 1, 1, 1]);

        let c = data.counts(0, &[3, 1, 2]).unwrap();
        assert_eq!(c.parents(), &[1, 2, 3]);
        assert_eq!(c.q(), 8);
        assert_eq!(c.n_ij().iter().filter(|&&n| n == 0).count(), 4);
        assert_eq!(c.q_tilde(), 4);
    }

    #[test]
    fn example_two_counts() {
        let data = builtin_examples().remove(1).data;
        let c = data.counts(0, &[2, 3]).unwrap();
        assert_eq!(
            c.to_rows(),
            vec![vec![2, 1], vec![1, 2], vec![1, 2], vec![2, 1]]
        );
        let c = data.counts(0, &[1, 2, 3]).unwrap();
        assert_eq!(c.q_tilde(), 4);
        assert_eq!(c.n(), 12);
    }

    #[test]
    fn no_parents_is_one_configuration() {
        let c = d1().counts(1, &[]).unwrap();
        assert_eq!(c.q(), 1);
        assert_eq!(c.n_ij(), &[12]);
        assert_eq!(c.to_rows(), vec![vec![9, 3]]);
    }

    #[test]
    fn child_among_parents_is_rejected() {
        assert!(matches!(d1().counts(0, &[0, 2]), Err(Error::Argument(_))));
        assert!(matches!(d1().counts(7, &[]), Err(Error::Argument(_))));
    }

    #[test]
    fn csv_with_header() {
        let text = "X,Y\na,b\nc,b\na,d\n";
        let data = Dataset::from_reader(text.as_bytes(), true).unwrap();
        assert_eq!(data.names(), vec!["X", "Y"]);
        assert_eq!(data.n_rows(), 3);
        assert_eq!(data.variables()[0].levels, vec!["a", "c"]);
        assert_eq!(data.variables()[1].levels, vec!["b", "d"]);
        assert_eq!(data.row(2), &[0, 1]);
    }

    #[test]
    fn csv_minimal_without_header() {
        let data = Dataset::from_reader("a\n".as_bytes(), false).unwrap();
        assert_eq!(data.n_rows(), 1);
        assert_eq!(data.names(), vec!["V1"]);
        assert_eq!(data.cardinality(0), 1);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            Dataset::from_reader("a,b\nc\n".as_bytes(), false),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            Dataset::from_reader("a,b\nc,\n".as_bytes(), false),
            Err(Error::MissingData { row: 1, column: 1 })
        ));
        assert!(matches!(
            Dataset::from_reader("".as_bytes(), false),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn csv_roundtrip_of_examples() {
        for ex in builtin_examples() {
            let mut buf = Vec::new();
            ex.data.write_csv(&mut buf).unwrap();
            let back = Dataset::from_reader(buf.as_slice(), true).unwrap();
            assert_eq!(back, ex.data);
        }
    }

    #[test]
    fn load_csv_reads_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d1.csv");
        let mut f = File::create(&path).unwrap();
        d1().write_csv(&mut f).unwrap();
        drop(f);
        let data = Dataset::load_csv(&path, true).unwrap();
        assert_eq!(data.n_rows(), 12);
        assert!((0..4).all(|v| data.cardinality(v) == 2));
        assert!(matches!(
            Dataset::load_csv(dir.path().join("missing.csv"), true),
            Err(Error::Io { .. })
        ));
    }
}
