//! Bases (contexts) of a ray set and the search for KS value assignments:
//! 0/1 valuations with no two orthogonal rays both 1 and exactly one 1 in
//! every basis.

use serde::Serialize;

use crate::bounds::{BoundResult, Method, ScaledForm};
use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::quadform::{Assignment, QuadForm};
use crate::ray_sets::{orthogonality_graph, RaySet};

/// `d` mutually orthogonal rays of a `d`-dimensional set, labels sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Basis {
    pub rays: Vec<String>,
}

impl Basis {
    pub fn new(mut rays: Vec<String>) -> Self {
        rays.sort();
        Self { rays }
    }
}

/// All `d`-cliques of the orthogonality graph, sorted by label.
pub fn enumerate_bases(s: &RaySet) -> Vec<Basis> {
    let g = orthogonality_graph(s);
    let mut bases: Vec<Basis> = g
        .cliques(s.dimension())
        .into_iter()
        .map(|c| Basis::new(c.into_iter().map(|i| g.label(i).to_string()).collect()))
        .collect();
    bases.sort();
    bases
}

/// The four rays of the 18-ray set whose base-graph edges meet `vertex`.
pub fn vertex_basis_18(vertex: &str) -> Basis {
    Basis::new(
        crate::ray_sets::RAYS_18
            .iter()
            .filter(|(label, _)| label[1..].contains(vertex))
            .map(|(label, _)| label.to_string())
            .collect(),
    )
}

/// Exclusivity graph plus the bases on which completeness is imposed.
#[derive(Clone, Debug)]
pub struct KSConstraints {
    exclusivity: Graph,
    completeness: Vec<Basis>,
}

impl KSConstraints {
    /// Every completeness basis must be a clique of the exclusivity graph.
    pub fn new(exclusivity: Graph, completeness: Vec<Basis>) -> Result<Self> {
        for b in &completeness {
            let idx = b
                .rays
                .iter()
                .map(|l| exclusivity.index_of(l).ok_or_else(|| Error::UnknownLabel(l.clone())))
                .collect::<Result<Vec<_>>>()?;
            for (a, &i) in idx.iter().enumerate() {
                for &j in &idx[a + 1..] {
                    if !exclusivity.adjacent(i, j) {
                        return Err(Error::Malformed(format!(
                            "basis {:?} is not a clique of the exclusivity graph",
                            b.rays
                        )));
                    }
                }
            }
        }
        Ok(Self {
            exclusivity,
            completeness,
        })
    }

    /// Full orthogonality graph with completeness on all bases.
    pub fn full(s: &RaySet) -> Self {
        Self::new(orthogonality_graph(s), enumerate_bases(s)).expect("bases are cliques")
    }

    /// Full orthogonality graph with completeness only on the given bases.
    pub fn partial(s: &RaySet, bases: Vec<Basis>) -> Result<Self> {
        Self::new(orthogonality_graph(s), bases)
    }

    pub fn exclusivity(&self) -> &Graph {
        &self.exclusivity
    }

    pub fn completeness(&self) -> &[Basis] {
        &self.completeness
    }
}

/// Backtracking with unit propagation. Variables are ray positions of `s`.
struct Search {
    order: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
    bases: Vec<Vec<usize>>,
    bases_of: Vec<Vec<usize>>,
    value: Vec<Option<bool>>,
    trail: Vec<usize>,
    nodes: u64,
    stopped: bool,
}

impl Search {
    fn new(s: &RaySet, c: &KSConstraints) -> Result<Self> {
        let n = s.len();
        let pos = |label: &str| s.position(label).ok_or_else(|| Error::UnknownLabel(label.to_string()));
        let g = c.exclusivity();
        let mut neighbors = vec![Vec::new(); n];
        for (i, j) in g.edges() {
            let (a, b) = (pos(g.label(i))?, pos(g.label(j))?);
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        let bases = c
            .completeness()
            .iter()
            .map(|b| b.rays.iter().map(|l| pos(l)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut bases_of = vec![Vec::new(); n];
        for (k, b) in bases.iter().enumerate() {
            for &i in b {
                bases_of[i].push(k);
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(neighbors[i].len()), i));
        Ok(Self {
            order,
            neighbors,
            bases,
            bases_of,
            value: vec![None; n],
            trail: Vec::new(),
            nodes: 0,
            stopped: false,
        })
    }

    /// Assigns and propagates; `false` on conflict. Undo with [`Search::undo_to`].
    fn assign(&mut self, var: usize, one: bool) -> bool {
        let mut queue = vec![(var, one)];
        while let Some((i, v)) = queue.pop() {
            match self.value[i] {
                Some(existing) if existing == v => continue,
                Some(_) => return false,
                None => {}
            }
            self.value[i] = Some(v);
            self.trail.push(i);
            if v {
                for &j in &self.neighbors[i] {
                    match self.value[j] {
                        Some(true) => return false,
                        Some(false) => {}
                        None => queue.push((j, false)),
                    }
                }
            } else {
                for &k in &self.bases_of[i] {
                    let mut open = None;
                    let mut open_count = 0;
                    let mut has_one = false;
                    for &j in &self.bases[k] {
                        match self.value[j] {
                            Some(true) => has_one = true,
                            Some(false) => {}
                            None => {
                                open_count += 1;
                                open = Some(j);
                            }
                        }
                    }
                    if has_one {
                        continue;
                    }
                    match open_count {
                        0 => return false,
                        1 => queue.push((open.expect("one open"), true)),
                        _ => {}
                    }
                }
            }
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let i = self.trail.pop().expect("nonempty");
            self.value[i] = None;
        }
    }

    /// Visits every satisfying assignment in search order until `visit` returns false.
    fn run(&mut self, visit: &mut dyn FnMut(&[bool]) -> bool) {
        self.nodes += 1;
        let Some(var) = self.order.iter().copied().find(|&i| self.value[i].is_none()) else {
            let bits: Vec<bool> = self.value.iter().map(|v| v == &Some(true)).collect();
            self.stopped = !visit(&bits);
            return;
        };
        for one in [true, false] {
            let mark = self.trail.len();
            if self.assign(var, one) {
                self.run(visit);
            }
            self.undo_to(mark);
            if self.stopped {
                return;
            }
        }
    }
}

/// Satisfying bit vectors (indexed like `s.rays()`) of the given constraints,
/// up to `limit`, sorted.
pub fn find_assignments(s: &RaySet, c: &KSConstraints, limit: Option<usize>) -> Result<Vec<Vec<bool>>> {
    let mut search = Search::new(s, c)?;
    let mut found = Vec::new();
    if limit == Some(0) {
        return Ok(found);
    }
    search.run(&mut |bits| {
        found.push(bits.to_vec());
        limit.is_none_or(|l| found.len() < l)
    });
    found.sort();
    Ok(found)
}

/// KS value assignments of `s` (completeness on every basis).
pub fn find_ks_assignments(s: &RaySet, limit: Option<usize>) -> Vec<Assignment> {
    let labels: Vec<String> = s.labels().into_iter().map(String::from).collect();
    find_assignments(s, &KSConstraints::full(s), limit)
        .expect("constraints come from the set itself")
        .into_iter()
        .map(|bits| Assignment::from_bits(&labels, &bits))
        .collect()
}

/// Checks both constraint families directly on an assignment of `s`.
pub fn satisfies(s: &RaySet, c: &KSConstraints, a: &Assignment) -> Result<bool> {
    let value = |l: &str| -> Result<bool> {
        let canonical = s.canonical_label(l).ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
        Ok(a.get(canonical)
            .ok_or_else(|| Error::MissingVariable(canonical.to_string()))?
            .is_one_value())
    };
    let g = c.exclusivity();
    for (i, j) in g.edges() {
        if value(g.label(i))? && value(g.label(j))? {
            return Ok(false);
        }
    }
    for b in c.completeness() {
        let ones = b
            .rays
            .iter()
            .map(|l| value(l))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|&x| x)
            .count();
        if ones != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

trait IsOneValue {
    fn is_one_value(&self) -> bool;
}

impl IsOneValue for crate::exact_linalg::Rational {
    fn is_one_value(&self) -> bool {
        num::One::is_one(self)
    }
}

/// Exact maximum of `f` over assignments of `s` satisfying `c`; `None` when
/// no assignment is feasible.
pub fn max_over_constrained(f: &QuadForm, s: &RaySet, c: &KSConstraints) -> Result<Option<BoundResult>> {
    let positions = f
        .variables()
        .iter()
        .map(|v| s.position(v).ok_or_else(|| Error::UnknownLabel(v.clone())))
        .collect::<Result<Vec<_>>>()?;
    let form = ScaledForm::new(f)?;
    let mut search = Search::new(s, c)?;
    let mut best: Option<(i64, Vec<bool>)> = None;
    let mut local = vec![false; f.len()];
    search.run(&mut |bits| {
        for (slot, &p) in local.iter_mut().zip(&positions) {
            *slot = bits[p];
        }
        let v = form.evaluate(&local);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, local.clone()));
        }
        true
    });
    Ok(best.map(|(v, bits)| BoundResult {
        maximum: form.unscale(v),
        argmax: Assignment::from_bits(f.variables(), &bits),
        method: Method::ConstrainedSearch,
        evaluations: search.nodes,
    }))
}
