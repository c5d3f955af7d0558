//! Ray families: the 13-ray qutrit set, the 18-ray ququart set, the 25-ray
//! set in five dimensions, and block-diagonal compositions for `d >= 6`.

use std::collections::BTreeMap;

use num::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::{format_rational, inner_product, parse_rational, RatMatrix, Rational, RayVec};
use crate::graphs::{Graph, BASE_GRAPH_EDGES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Qutrit,
    Ququart,
}

impl BlockKind {
    pub fn width(self) -> usize {
        match self {
            BlockKind::Qutrit => 3,
            BlockKind::Ququart => 4,
        }
    }

    pub fn ray_count(self) -> usize {
        match self {
            BlockKind::Qutrit => 13,
            BlockKind::Ququart => 18,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub offset: usize,
}

/// Direct-sum layout of `d = 3m + 4n` coordinates into qutrit and ququart blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LayoutJson", into = "LayoutJson")]
pub struct BlockLayout {
    blocks: Vec<Block>,
    m: usize,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct LayoutJson {
    blocks: Vec<Block>,
}

impl TryFrom<LayoutJson> for BlockLayout {
    type Error = Error;

    fn try_from(json: LayoutJson) -> Result<Self> {
        BlockLayout::new(json.blocks)
    }
}

impl From<BlockLayout> for LayoutJson {
    fn from(layout: BlockLayout) -> Self {
        LayoutJson { blocks: layout.blocks }
    }
}

impl BlockLayout {
    /// Blocks must tile `0..d` contiguously in the given order.
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        let mut next = 0;
        for b in &blocks {
            if b.offset != next {
                return Err(Error::Malformed(format!(
                    "block at offset {} leaves a gap or overlap (expected {next})",
                    b.offset
                )));
            }
            next += b.kind.width();
        }
        let m = blocks.iter().filter(|b| b.kind == BlockKind::Qutrit).count();
        let n = blocks.len() - m;
        Ok(Self { blocks, m, n })
    }

    /// Qutrit blocks first, then ququart blocks.
    pub fn canonical(m: usize, n: usize) -> Self {
        let kinds = std::iter::repeat_n(BlockKind::Qutrit, m).chain(std::iter::repeat_n(BlockKind::Ququart, n));
        let mut offset = 0;
        let blocks = kinds
            .map(|kind| {
                let b = Block { kind, offset };
                offset += kind.width();
                b
            })
            .collect();
        Self { blocks, m, n }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn qutrit_count(&self) -> usize {
        self.m
    }

    pub fn ququart_count(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        3 * self.m + 4 * self.n
    }

    /// Zero-based block index encoded in a `b{k}:` label prefix (k is one-based).
    pub fn block_of_label(&self, label: &str) -> Option<usize> {
        let (prefix, _) = label.split_once(':')?;
        let k: usize = prefix.strip_prefix('b')?.parse().ok()?;
        (1..=self.blocks.len()).contains(&k).then(|| k - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub label: String,
    pub vector: RayVec,
}

/// Labeled, pairwise non-parallel rays of one dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RaySet {
    dimension: usize,
    rays: Vec<Ray>,
    aliases: BTreeMap<String, String>,
    layout: Option<BlockLayout>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RayJson {
    pub label: String,
    pub coords: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RaySetJson {
    pub dimension: usize,
    pub rays: Vec<RayJson>,
    #[serde(default)]
    pub aliases: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<BlockLayout>,
}

impl RaySet {
    pub fn new(dimension: usize, rays: Vec<Ray>) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (i, r) in rays.iter().enumerate() {
            if r.vector.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: r.vector.dimension(),
                });
            }
            if seen.insert(r.label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(r.label.clone()));
            }
        }
        for i in 0..rays.len() {
            for j in i + 1..rays.len() {
                if rays[i].vector.is_parallel(&rays[j].vector) {
                    return Err(Error::ParallelRays(rays[i].label.clone(), rays[j].label.clone()));
                }
            }
        }
        Ok(Self {
            dimension,
            rays,
            aliases: BTreeMap::new(),
            layout: None,
        })
    }

    /// Keeps the first of every group of parallel rays; later labels become aliases.
    pub fn from_union_dedup(dimension: usize, candidates: Vec<Ray>) -> Result<Self> {
        let mut kept: Vec<Ray> = Vec::new();
        let mut aliases = BTreeMap::new();
        for cand in candidates {
            match kept.iter().find(|k| k.vector.is_parallel(&cand.vector)) {
                Some(k) => {
                    aliases.insert(cand.label, k.label.clone());
                }
                None => kept.push(cand),
            }
        }
        let mut set = Self::new(dimension, kept)?;
        for (alias, target) in aliases {
            set.add_alias(&alias, &target)?;
        }
        Ok(set)
    }

    pub fn add_alias(&mut self, alias: &str, target: &str) -> Result<()> {
        if self.rays.iter().any(|r| r.label == alias) || self.aliases.contains_key(alias) {
            return Err(Error::DuplicateLabel(alias.to_string()));
        }
        if self.position(target).is_none() {
            return Err(Error::UnknownLabel(target.to_string()));
        }
        let canonical = self.canonical_label(target).expect("checked above").to_string();
        self.aliases.insert(alias.to_string(), canonical);
        Ok(())
    }

    pub fn with_layout(mut self, layout: BlockLayout) -> Result<Self> {
        if layout.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: layout.dimension(),
            });
        }
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn labels(&self) -> Vec<&str> {
        self.rays.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn aliases(&self) -> &BTreeMap<String, String> {
        &self.aliases
    }

    pub fn layout(&self) -> Option<&BlockLayout> {
        self.layout.as_ref()
    }

    pub fn canonical_label<'a>(&'a self, label: &'a str) -> Option<&'a str> {
        if self.rays.iter().any(|r| r.label == label) {
            return Some(label);
        }
        self.aliases.get(label).map(String::as_str)
    }

    /// Index of a ray by label or alias.
    pub fn position(&self, label: &str) -> Option<usize> {
        let canonical = self.canonical_label(label)?;
        self.rays.iter().position(|r| r.label == canonical)
    }

    pub fn ray(&self, label: &str) -> Option<&RayVec> {
        self.position(label).map(|i| &self.rays[i].vector)
    }

    pub fn orthogonal(&self, i: usize, j: usize) -> bool {
        inner_product(&self.rays[i].vector, &self.rays[j].vector)
            .map(|x| x.is_zero())
            .unwrap_or(false)
    }

    pub fn to_json(&self) -> RaySetJson {
        RaySetJson {
            dimension: self.dimension,
            rays: self
                .rays
                .iter()
                .map(|r| RayJson {
                    label: r.label.clone(),
                    coords: r.vector.coords().iter().map(format_rational).collect(),
                })
                .collect(),
            aliases: self.aliases.clone(),
            layout: self.layout.clone(),
        }
    }

    pub fn from_json(json: &RaySetJson) -> Result<Self> {
        let rays = json
            .rays
            .iter()
            .map(|r| {
                let coords = r.coords.iter().map(|c| parse_rational(c)).collect::<Result<Vec<_>>>()?;
                Ok(Ray {
                    label: r.label.clone(),
                    vector: RayVec::new(coords)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut set = Self::new(json.dimension, rays)?;
        for (alias, target) in &json.aliases {
            set.add_alias(alias, target)?;
        }
        match &json.layout {
            Some(layout) => set.with_layout(layout.clone()),
            None => Ok(set),
        }
    }
}

fn ray(label: impl Into<String>, coords: &[i64]) -> Ray {
    Ray {
        label: label.into(),
        vector: RayVec::from_ints(coords).expect("constructed rays are nonzero"),
    }
}

/// The 13 rays `z_k`, `y_k^±`, `h_α` in three dimensions, in that order.
pub fn build_13ray() -> RaySet {
    RaySet::new(3, rays_13(false)).expect("13-ray set is valid")
}

/// 13-ray vectors; `upper` switches to the uppercase labels used for the
/// second copy inside the 25-ray set.
fn rays_13(upper: bool) -> Vec<Ray> {
    let name = |s: &str| if upper { s.to_uppercase() } else { s.to_string() };
    let mut rays = Vec::with_capacity(13);
    for k in 0..3 {
        let mut c = [0; 3];
        c[k] = 1;
        rays.push(ray(name(&format!("z{}", k + 1)), &c));
    }
    for k in 0..3 {
        // {i, j, k} = {1, 2, 3} with i < j
        let (i, j) = match k {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for (sign, tag) in [(1, '+'), (-1, '-')] {
            let mut c = [0; 3];
            c[i] = 1;
            c[j] = sign;
            rays.push(ray(name(&format!("y{}{tag}", k + 1)), &c));
        }
    }
    for alpha in 0..4 {
        let c: Vec<i64> = (1..=3).map(|k| if k == alpha { -1 } else { 1 }).collect();
        rays.push(ray(name(&format!("h{alpha}")), &c));
    }
    rays
}

pub const RAYS_18: [(&str, [i64; 4]); 18] = [
    ("v12", [1, 0, 0, 0]),
    ("v16", [0, 0, 1, -1]),
    ("v17", [0, 0, 1, 1]),
    ("v18", [0, 1, 0, 0]),
    ("v23", [0, 1, -1, 0]),
    ("v28", [0, 0, 0, 1]),
    ("v29", [0, 1, 1, 0]),
    ("v34", [-1, 1, 1, 1]),
    ("v37", [1, 1, 1, -1]),
    ("v39", [1, 0, 0, 1]),
    ("v45", [0, 1, 0, -1]),
    ("v47", [1, 1, -1, 1]),
    ("v48", [1, 0, 1, 0]),
    ("v56", [1, 1, 1, 1]),
    ("v58", [1, 0, -1, 0]),
    ("v59", [1, -1, 1, -1]),
    ("v67", [1, -1, 0, 0]),
    ("v69", [1, 1, -1, -1]),
];

/// The 18 ququart rays, one per base-graph edge, labeled `v{ij}` and ordered
/// like the vertices of `line_graph(base_graph_9())`.
pub fn build_18ray() -> RaySet {
    debug_assert_eq!(RAYS_18.len(), BASE_GRAPH_EDGES.len());
    RaySet::new(4, RAYS_18.iter().map(|(l, c)| ray(*l, c)).collect()).expect("18-ray set is valid")
}

/// Two 13-ray copies on coordinates 1..3 (lowercase) and 3..5 (uppercase).
/// The common ray `z3 = Z1` is stored once, with `Z1` as an alias.
pub fn build_25ray() -> RaySet {
    let mut rays: Vec<Ray> = rays_13(false)
        .into_iter()
        .map(|r| Ray {
            vector: r.vector.embed(5, 0).expect("fits"),
            label: r.label,
        })
        .collect();
    rays.extend(rays_13(true).into_iter().filter(|r| r.label != "Z1").map(|r| Ray {
        vector: r.vector.embed(5, 2).expect("fits"),
        label: r.label,
    }));
    let mut set = RaySet::new(5, rays).expect("25-ray set is valid");
    set.add_alias("Z1", "z3").expect("z3 exists");
    set
}

/// Labels of the lower (`V+`) or upper (`V-`) 13-ray copy inside the 25-ray set.
pub fn labels_25_half(upper: bool) -> Vec<String> {
    rays_13(upper).into_iter().map(|r| r.label).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub m: usize,
    pub n: usize,
    pub count: usize,
}

/// `d = 3m + 4n` with the fewest rays `13m + 18n`.
pub fn optimal_decomposition(d: usize) -> Result<Decomposition> {
    if d < 6 {
        return Err(Error::UnsupportedDimension(d, 6));
    }
    let third = d / 3;
    let m = 4 * third - d;
    let n = d - 3 * third;
    let count = 13 * m + 18 * n;
    debug_assert_eq!(count, 5 * d - 2 * third);
    Ok(Decomposition { m, n, count })
}

/// Block-diagonal composition: `m` qutrit 13-ray blocks then `n` ququart
/// 18-ray blocks. Labels are `b{k}:{local label}` with one-based `k`.
pub fn build_general(d: usize, decomposition: Option<(usize, usize)>) -> Result<RaySet> {
    if d < 6 {
        return Err(Error::UnsupportedDimension(d, 6));
    }
    let (m, n) = match decomposition {
        Some((m, n)) if 3 * m + 4 * n == d => (m, n),
        Some((m, n)) => return Err(Error::InvalidDecomposition { d, m, n }),
        None => {
            let dec = optimal_decomposition(d)?;
            (dec.m, dec.n)
        }
    };
    let layout = BlockLayout::canonical(m, n);
    let base13 = build_13ray();
    let base18 = build_18ray();
    let mut rays = Vec::with_capacity(13 * m + 18 * n);
    for (k, block) in layout.blocks().iter().enumerate() {
        let local = match block.kind {
            BlockKind::Qutrit => &base13,
            BlockKind::Ququart => &base18,
        };
        for r in local.rays() {
            rays.push(Ray {
                label: format!("b{}:{}", k + 1, r.label),
                vector: r.vector.embed(d, block.offset)?,
            });
        }
    }
    RaySet::new(d, rays)?.with_layout(layout)
}

/// Ray set used for dimension `d`: 13, 18, 25 rays for d = 3, 4, 5, and the
/// optimal block composition above.
pub fn build_for_dimension(d: usize) -> Result<RaySet> {
    match d {
        3 => Ok(build_13ray()),
        4 => Ok(build_18ray()),
        5 => Ok(build_25ray()),
        d if d >= 6 => build_general(d, None),
        d => Err(Error::UnsupportedDimension(d, 3)),
    }
}

/// Tabulated ray count of the construction (`r2` column of the comparison table).
pub fn tabulated_ray_count(d: usize) -> Option<usize> {
    let floor3 = |x: usize| x / 3;
    match d {
        3 => Some(13),
        4 => Some(18),
        5 => Some(25),
        d if d % 4 == 0 => {
            let m = d / 4;
            Some(18 * m - 2 * floor3(m))
        }
        d if d >= 9 && d % 4 == 1 => {
            let m = (d - 5) / 4;
            Some(18 * m + 23 - 2 * floor3(m + 2))
        }
        d if d % 4 == 2 => {
            let m = (d - 6) / 4;
            Some(18 * m + 26 - 2 * floor3(m))
        }
        d if d % 4 == 3 && d >= 7 => {
            let m = (d - 7) / 4;
            Some(18 * m + 31 - 2 * floor3(m + 1))
        }
        _ => None,
    }
}

/// Smallest previously known ray count for comparison (`r_d` column).
pub fn tabulated_prior_count(d: usize) -> Option<usize> {
    match d {
        3 => Some(31),
        5 => Some(29),
        d if d >= 4 && d % 4 == 0 => Some(18 * (d / 4)),
        d if d >= 9 && d % 4 == 1 => Some(18 * ((d - 5) / 4) + 25),
        d if d >= 6 && d % 4 == 2 => Some(18 * ((d - 6) / 4) + 31),
        d if d >= 7 && d % 4 == 3 => Some(18 * ((d - 7) / 4) + 34),
        _ => None,
    }
}

/// Vertices are ray labels, adjacent iff the inner product vanishes.
pub fn orthogonality_graph(s: &RaySet) -> Graph {
    let mut g = Graph::new(s.labels()).expect("ray labels are unique");
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if s.orthogonal(i, j) {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// Squared normalized overlaps `(u.v)^2 / ((u.u)(v.v))`, indexed like `s.rays()`.
pub fn gram_signature(s: &RaySet) -> RatMatrix {
    let n = s.len();
    let norms: Vec<Rational> = s.rays().iter().map(|r| r.vector.norm_sq()).collect();
    let mut g = RatMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let ip = inner_product(&s.rays()[i].vector, &s.rays()[j].vector).expect("same dimension");
            let value = &ip * &ip / (&norms[i] * &norms[j]);
            g.set(i, j, value.clone());
            g.set(j, i, value);
        }
    }
    g
}
