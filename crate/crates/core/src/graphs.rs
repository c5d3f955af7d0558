//! Small labeled simple graphs: the 9-vertex base graph, line graphs,
//! perfect-matching search, independent triples, cliques, and DOT/JSON output.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Edges of the 9-vertex base graph; each one names a ray of the 18-ray set.
pub const BASE_GRAPH_EDGES: [(u8, u8); 18] = [
    (1, 2),
    (1, 6),
    (1, 8),
    (1, 7),
    (2, 8),
    (6, 7),
    (4, 5),
    (2, 3),
    (4, 8),
    (2, 9),
    (5, 8),
    (3, 9),
    (3, 4),
    (3, 7),
    (4, 7),
    (5, 6),
    (5, 9),
    (6, 9),
];

/// Simple undirected graph over unique string labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

impl Graph {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let n = labels.len();
        Ok(Self {
            labels,
            index,
            adjacency: vec![vec![false; n]; n],
        })
    }

    pub fn from_edges<S: Into<String>>(labels: impl IntoIterator<Item = S>, edges: &[(&str, &str)]) -> Result<Self> {
        let mut g = Self::new(labels)?;
        for (a, b) in edges {
            g.connect(a, b)?;
        }
        Ok(g)
    }

    /// Cycle `1 - 2 - ... - n - 1`, for `n >= 3`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a simple cycle needs at least 3 vertices");
        let mut g = Self::new((1..=n).map(|i| i.to_string())).expect("unique labels");
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new((1..=n).map(|i| i.to_string())).expect("unique labels");
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    /// Adds the edge `a - b`. Self-loops are rejected.
    pub fn connect(&mut self, a: &str, b: &str) -> Result<()> {
        let i = self.index_of(a).ok_or_else(|| Error::UnknownLabel(a.to_string()))?;
        let j = self.index_of(b).ok_or_else(|| Error::UnknownLabel(b.to_string()))?;
        if i == j {
            return Err(Error::Malformed(format!("self-loop on {a:?}")));
        }
        self.add_edge(i, j);
        Ok(())
    }

    pub(crate) fn add_edge(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        self.adjacency[i][j] = true;
        self.adjacency[j][i] = true;
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].iter().filter(|&&b| b).count()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i]
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
    }

    /// Edges as index pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).filter(move |&j| self.adjacency[i][j]).map(move |j| (i, j)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn is_symmetric_irreflexive(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| !self.adjacency[i][i] && (0..n).all(|j| self.adjacency[i][j] == self.adjacency[j][i]))
    }

    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        let mut g = Self::new(self.labels.iter().map(|l| f(l)))?;
        g.adjacency = self.adjacency.clone();
        Ok(g)
    }

    /// All `k`-cliques as ascending index lists, in lexicographic order.
    pub fn cliques(&self, k: usize) -> Vec<Vec<usize>> {
        fn extend(g: &Graph, k: usize, current: &mut Vec<usize>, candidates: &[usize], out: &mut Vec<Vec<usize>>) {
            if current.len() == k {
                out.push(current.clone());
                return;
            }
            let needed = k - current.len();
            for (pos, &v) in candidates.iter().enumerate() {
                if candidates.len() - pos < needed {
                    break;
                }
                let next: Vec<usize> = candidates[pos + 1..]
                    .iter()
                    .copied()
                    .filter(|&w| g.adjacent(v, w))
                    .collect();
                current.push(v);
                extend(g, k, current, &next, out);
                current.pop();
            }
        }
        let mut out = Vec::new();
        if k == 0 {
            return out;
        }
        let all: Vec<usize> = (0..self.len()).collect();
        extend(self, k, &mut Vec::with_capacity(k), &all, &mut out);
        out
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.labels.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|(i, j)| [self.labels[i].clone(), self.labels[j].clone()])
                .collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let mut g = Self::new(json.vertices.iter().cloned())?;
        for [a, b] in &json.edges {
            g.connect(a, b)?;
        }
        Ok(g)
    }
}

/// The 9-vertex graph whose 18 edges carry the 18-ray set.
pub fn base_graph_9() -> Graph {
    let mut g = Graph::new((1..=9).map(|i| i.to_string())).expect("unique labels");
    for (a, b) in BASE_GRAPH_EDGES {
        g.add_edge(usize::from(a) - 1, usize::from(b) - 1);
    }
    g
}

/// Vertices are the edges of `g`, labeled by concatenating their endpoint
/// labels in vertex order ("12", "16", ...); adjacent iff the edges meet.
/// Multi-character vertex labels are joined with `-` to keep labels unique.
pub fn line_graph(g: &Graph) -> Graph {
    let edges = g.edges();
    let sep = if g.labels().iter().all(|l| l.chars().count() == 1) {
        ""
    } else {
        "-"
    };
    let labels = edges.iter().map(|&(i, j)| format!("{}{sep}{}", g.label(i), g.label(j)));
    let mut lg = Graph::new(labels).expect("edge labels are unique");
    for a in 0..edges.len() {
        for b in a + 1..edges.len() {
            let (i, j) = edges[a];
            let (k, l) = edges[b];
            if i == k || i == l || j == k || j == l {
                lg.add_edge(a, b);
            }
        }
    }
    lg
}

/// Perfect matching existence by exhaustive backtracking. The branching vertex
/// is the uncovered one with the fewest uncovered neighbors.
pub fn disjoint_edge_cover_exists(g: &Graph) -> bool {
    fn search(g: &Graph, covered: &mut [bool]) -> bool {
        let pick = (0..g.len())
            .filter(|&v| !covered[v])
            .min_by_key(|&v| g.neighbors(v).filter(|&w| !covered[w]).count());
        let Some(v) = pick else {
            return true;
        };
        covered[v] = true;
        let partners: Vec<usize> = g.neighbors(v).filter(|&w| !covered[w]).collect();
        for w in partners {
            covered[w] = true;
            if search(g, covered) {
                return true;
            }
            covered[w] = false;
        }
        covered[v] = false;
        false
    }
    search(g, &mut vec![false; g.len()])
}

/// All 3-subsets without an internal edge, lexicographic by index.
pub fn independent_triples(g: &Graph) -> Vec<[usize; 3]> {
    let n = g.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if g.adjacent(a, b) {
                continue;
            }
            for c in b + 1..n {
                if !g.adjacent(a, c) && !g.adjacent(b, c) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

pub fn export_dot(g: &Graph) -> String {
    let mut out = String::from("graph {\n");
    for l in g.labels() {
        let _ = writeln!(out, "  {l:?};");
    }
    for (i, j) in g.edges() {
        let _ = writeln!(out, "  {:?} -- {:?};", g.label(i), g.label(j));
    }
    out.push_str("}\n");
    out
}
