//! Directed acyclic graphs and equivalence-class comparison.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// An arc `(parent, child)`.
pub type Arc = (usize, usize);

/// A DAG over nodes `0..n`. Values are immutable; mutators return new graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    /// Sorted parent list per node.
    parents: Vec<Vec<usize>>,
}

/// True iff the arcs over `n` nodes contain no directed cycle (self-loops count as cycles).
pub fn is_acyclic(n: usize, arcs: &[Arc]) -> bool {
    let mut children = vec![Vec::new(); n];
    for &(from, to) in arcs {
        if from >= n || to >= n {
            return false;
        }
        children[from].push(to);
    }
    topological_sort(&children).is_some()
}

/// Kahn's algorithm over a child adjacency list.
fn topological_sort(children: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = children.len();
    let mut indegree = vec![0usize; n];
    for list in children {
        for &c in list {
            indegree[c] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..n).rev().filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = stack.pop() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                stack.push(c);
            }
        }
    }
    (order.len() == n).then_some(order)
}

impl Dag {
    /// The empty graph on `n` nodes.
    pub fn empty(n: usize) -> Self {
        Dag {
            parents: vec![Vec::new(); n],
        }
    }

    pub fn from_arcs(n: usize, arcs: &[Arc]) -> Result<Self> {
        let mut parents = vec![Vec::new(); n];
        for &(from, to) in arcs {
            if from >= n || to >= n {
                return Err(Error::Argument(format!(
                    "arc {from}->{to} out of range for {n} nodes"
                )));
            }
            if from == to {
                return Err(Error::Argument(format!("self-loop on node {from}")));
            }
            if parents[to].contains(&from) {
                return Err(Error::Argument(format!("duplicate arc {from}->{to}")));
            }
            parents[to].push(from);
        }
        for list in &mut parents {
            list.sort_unstable();
        }
        let dag = Dag { parents };
        if dag.topological_order().is_none() {
            return Err(Error::Argument("graph contains a directed cycle".into()));
        }
        Ok(dag)
    }

    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn arc_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.parents[to].binary_search(&from).is_ok()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_arc(a, b) || self.has_arc(b, a)
    }

    /// Arcs sorted by `(parent, child)`.
    pub fn arcs(&self) -> Vec<Arc> {
        let mut arcs: Vec<Arc> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(child, ps)| ps.iter().map(move |&p| (p, child)))
            .collect();
        arcs.sort_unstable();
        arcs
    }

    fn children_lists(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.node_count()];
        for (child, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(child);
            }
        }
        children
    }

    pub fn topological_order(&self) -> Option<Vec<usize>> {
        topological_sort(&self.children_lists())
    }

    /// True if `to` can be reached from `from` along directed arcs.
    pub fn has_path(&self, from: usize, to: usize) -> bool {
        let children = self.children_lists();
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(children[v].iter().copied().filter(|&c| !seen[c]));
        }
        false
    }

    pub fn with_arc(&self, from: usize, to: usize) -> Result<Dag> {
        let mut arcs = self.arcs();
        arcs.push((from, to));
        Dag::from_arcs(self.node_count(), &arcs)
    }

    pub fn without_arc(&self, from: usize, to: usize) -> Result<Dag> {
        if !self.has_arc(from, to) {
            return Err(Error::Argument(format!("no arc {from}->{to} to remove")));
        }
        let mut next = self.clone();
        next.parents[to].retain(|&p| p != from);
        Ok(next)
    }

    pub fn with_reversed(&self, from: usize, to: usize) -> Result<Dag> {
        self.without_arc(from, to)?.with_arc(to, from)
    }

    /// Replaces the parent set of one node, rejecting cycles.
    pub fn with_parents(&self, node: usize, parents: &[usize]) -> Result<Dag> {
        let mut arcs: Vec<Arc> = self
            .arcs()
            .into_iter()
            .filter(|&(_, c)| c != node)
            .collect();
        arcs.extend(parents.iter().map(|&p| (p, node)));
        Dag::from_arcs(self.node_count(), &arcs)
    }

    /// Undirected edges `{a, b}` stored as `(min, max)`.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.arcs()
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect()
    }

    /// Unshielded colliders `j → i ← k` as `(j, i, k)` with `j < k`.
    pub fn v_structures(&self) -> BTreeSet<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for (i, ps) in self.parents.iter().enumerate() {
            for (a, &j) in ps.iter().enumerate() {
                for &k in &ps[a + 1..] {
                    if !self.adjacent(j, k) {
                        out.insert((j, i, k));
                    }
                }
            }
        }
        out
    }

    /// Renders the graph as `Parent -> Child` lines using `names`.
    pub fn to_text(&self, names: &[&str]) -> String {
        let mut out = String::new();
        for (p, c) in self.arcs() {
            let _ = writeln!(out, "{} -> {}", names[p], names[c]);
        }
        out
    }

    /// Graphviz DOT rendering.
    pub fn to_dot(&self, names: &[&str]) -> String {
        let mut out = String::from("digraph G {\n");
        for name in names {
            let _ = writeln!(out, "  \"{name}\";");
        }
        for (p, c) in self.arcs() {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", names[p], names[c]);
        }
        out.push_str("}\n");
        out
    }

    /// Parses the `Parent -> Child` text format; `#` starts a comment.
    pub fn parse_text(text: &str, names: &[&str]) -> Result<Dag> {
        let mut arcs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (from, to) = line.split_once("->").ok_or_else(|| {
                Error::Format(format!("line {}: expected `Parent -> Child`", lineno + 1))
            })?;
            let lookup = |name: &str| {
                let name = name.trim();
                names.iter().position(|n| *n == name).ok_or_else(|| {
                    Error::Format(format!("line {}: unknown variable `{name}`", lineno + 1))
                })
            };
            arcs.push((lookup(from)?, lookup(to)?));
        }
        Dag::from_arcs(names.len(), &arcs)
    }
}

/// Node names mentioned in DAG text, in order of first appearance.
pub fn names_in_text(text: &str) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some((a, b)) = line.split_once("->") {
            for n in [a.trim(), b.trim()] {
                if !n.is_empty() && !names.iter().any(|x| x == n) {
                    names.push(n.to_owned());
                }
            }
        }
    }
    names
}

/// Same skeleton and same v-structures.
pub fn same_equivalence_class(g1: &Dag, g2: &Dag) -> Result<bool> {
    if g1.node_count() != g2.node_count() {
        return Err(Error::Argument(format!(
            "node counts differ: {} vs {}",
            g1.node_count(),
            g2.node_count()
        )));
    }
    Ok(g1.skeleton() == g2.skeleton() && g1.v_structures() == g2.v_structures())
}

/// An arc `u → v` is covered when `pa(v) = pa(u) ∪ {u}`; reversing it keeps the class.
pub fn is_covered(g: &Dag, from: usize, to: usize) -> bool {
    if !g.has_arc(from, to) {
        return false;
    }
    let mut expected: Vec<usize> = g.parents(from).to_vec();
    expected.push(from);
    expected.sort_unstable();
    expected == g.parents(to)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // X=0, Y=1, Z=2, W=3
    fn g_minus() -> Dag {
        Dag::from_arcs(4, &[(2, 0), (3, 0)]).unwrap()
    }

    fn g_plus() -> Dag {
        Dag::from_arcs(4, &[(2, 0), (3, 0), (1, 0)]).unwrap()
    }

    #[test]
    fn acyclicity() {
        assert!(is_acyclic(4, &[(2, 0), (3, 0), (1, 0)]));
        assert!(is_acyclic(3, &[]));
        assert!(!is_acyclic(2, &[(0, 1), (1, 0)]));
        assert!(!is_acyclic(1, &[(0, 0)]));
        assert!(Dag::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]).is_err());
        assert!(Dag::from_arcs(2, &[(0, 1), (0, 1)]).is_err());
    }

    #[test]
    fn skeletons() {
        let expected: BTreeSet<_> = [(0, 1), (0, 2), (0, 3)].into_iter().collect();
        assert_eq!(g_plus().skeleton(), expected);
        assert!(Dag::empty(3).skeleton().is_empty());
        let chain = Dag::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(chain.skeleton(), [(0, 1), (1, 2)].into_iter().collect());
    }

    #[test]
    fn v_structures() {
        assert_eq!(g_minus().v_structures(), [(2, 0, 3)].into_iter().collect());
        let chain = Dag::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(chain.v_structures().is_empty());
        let shielded = Dag::from_arcs(3, &[(0, 1), (2, 1), (0, 2)]).unwrap();
        assert!(shielded.v_structures().is_empty());
    }

    #[test]
    fn equivalence() {
        let chain = Dag::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let fork = Dag::from_arcs(3, &[(1, 0), (1, 2)]).unwrap();
        let collider = Dag::from_arcs(3, &[(0, 1), (2, 1)]).unwrap();
        assert!(same_equivalence_class(&chain, &fork).unwrap());
        assert!(!same_equivalence_class(&collider, &chain).unwrap());
        assert!(!same_equivalence_class(&g_minus(), &g_plus()).unwrap());
        assert!(same_equivalence_class(&chain, &Dag::empty(4)).is_err());
    }

    #[test]
    fn text_format() {
        let names = ["X", "Y", "Z", "W"];
        let text = "# G+\nZ -> X\n\nW -> X  # second\nY->X\n";
        let g = Dag::parse_text(text, &names).unwrap();
        assert_eq!(g, g_plus());
        assert_eq!(Dag::parse_text(&g.to_text(&names), &names).unwrap(), g);
        assert!(matches!(
            Dag::parse_text("Q -> X", &names),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            Dag::parse_text("X Y", &names),
            Err(Error::Format(_))
        ));
        assert!(g.to_dot(&names).contains("\"Y\" -> \"X\";"));
        assert_eq!(names_in_text(text), vec!["Z", "X", "W", "Y"]);
    }

    #[test]
    fn mutations_keep_acyclicity() {
        let chain = Dag::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(chain.with_arc(2, 0).is_err());
        assert!(chain.with_reversed(1, 2).is_ok());
        assert!(chain.without_arc(0, 2).is_err());
        assert!(chain.has_path(0, 2));
        assert!(!chain.has_path(2, 0));
    }

    fn arb_dag(max_nodes: usize) -> impl Strategy<Value = Dag> {
        (1..=max_nodes).prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                proptest::collection::vec(any::<bool>(), pairs),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            )
                .prop_map(|(n, bits, order)| {
                    let mut arcs = Vec::new();
                    let mut idx = 0;
                    for a in 0..n {
                        for b in a + 1..n {
                            if bits[idx] {
                                arcs.push((order[a], order[b]));
                            }
                            idx += 1;
                        }
                    }
                    Dag::from_arcs(n, &arcs).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn equivalence_is_reflexive_and_symmetric(g1 in arb_dag(5), g2 in arb_dag(5)) {
            prop_assert!(same_equivalence_class(&g1, &g1).unwrap());
            if g1.node_count() == g2.node_count() {
                prop_assert_eq!(
                    same_equivalence_class(&g1, &g2).unwrap(),
                    same_equivalence_class(&g2, &g1).unwrap()
                );
            }
        }

        #[test]
        fn equivalence_is_transitive(a in arb_dag(4), b in arb_dag(4), c in arb_dag(4)) {
            if a.node_count() == b.node_count() && b.node_count() == c.node_count()
                && same_equivalence_class(&a, &b).unwrap()
                && same_equivalence_class(&b, &c).unwrap()
            {
                prop_assert!(same_equivalence_class(&a, &c).unwrap());
            }
        }

        #[test]
        fn covered_reversal_preserves_class(g in arb_dag(5)) {
            for (from, to) in g.arcs() {
                if is_covered(&g, from, to) {
                    let r = g.with_reversed(from, to).unwrap();
                    prop_assert!(same_equivalence_class(&g, &r).unwrap());
                }
            }
        }

        #[test]
        fn skeleton_size_matches_arc_count(g in arb_dag(6)) {
            prop_assert_eq!(g.skeleton().len(), g.arc_count());
            prop_assert!(g.topological_order().is_some());
        }
    }
}
