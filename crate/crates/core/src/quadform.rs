//! Quadratic pseudo-Boolean forms over ray-labeled binary variables, the
//! noncontextuality expressions built on the ray sets, exact evaluation, and
//! the operator obtained by substituting projectors for variables.

use std::collections::{BTreeMap, HashMap};

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_linalg::{format_rational, int, parse_rational, projector, rat, RatMatrix, Rational};
use crate::graphs::{base_graph_9, line_graph};
use crate::ray_sets::{
    build_18ray, build_25ray, build_general, labels_25_half, orthogonality_graph, BlockKind, RaySet,
};

/// Quantum value of the 13-ray expression.
pub fn q3() -> Rational {
    rat(11, 3)
}

/// Classical bound of the 13-ray expression.
pub fn c3() -> Rational {
    rat(7, 2)
}

/// Quantum value of the 18-ray expression.
pub fn q4() -> Rational {
    rat(9, 2)
}

/// `constant + sum linear_i x_i + sum_{i<j} quadratic_ij x_i x_j` with squares folded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadForm {
    name: String,
    variables: Vec<String>,
    index: HashMap<String, usize>,
    constant: Rational,
    linear: Vec<Rational>,
    quadratic: BTreeMap<(usize, usize), Rational>,
    classical_bound: Rational,
    quantum_value: Rational,
    requires_ks_constraints: bool,
}

impl QuadForm {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    /// Linear coefficients indexed like [`QuadForm::variables`].
    pub fn linear(&self) -> &[Rational] {
        &self.linear
    }

    /// Pair coefficients keyed by variable indices `(i, j)`, `i < j`.
    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), Rational> {
        &self.quadratic
    }

    pub fn linear_coefficient(&self, label: &str) -> Rational {
        self.index_of(label)
            .map(|i| self.linear[i].clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn quadratic_coefficient(&self, a: &str, b: &str) -> Rational {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) if i != j => {
                let key = (i.min(j), i.max(j));
                self.quadratic.get(&key).cloned().unwrap_or_else(Rational::zero)
            }
            _ => Rational::zero(),
        }
    }

    pub fn classical_bound(&self) -> &Rational {
        &self.classical_bound
    }

    pub fn quantum_value(&self) -> &Rational {
        &self.quantum_value
    }

    /// Set when the claimed classical bound holds only for KS value assignments.
    pub fn requires_ks_constraints(&self) -> bool {
        self.requires_ks_constraints
    }

    /// Exact value at an assignment indexed like the variables.
    pub fn evaluate_slice(&self, values: &[Rational]) -> Rational {
        let mut total = self.constant.clone();
        for (c, x) in self.linear.iter().zip(values) {
            if !x.is_zero() {
                total += c * x;
            }
        }
        for (&(i, j), c) in &self.quadratic {
            if !values[i].is_zero() && !values[j].is_zero() {
                total += c * &values[i] * &values[j];
            }
        }
        total
    }

    /// Exact value at a binary point given by variable-indexed bits.
    pub fn evaluate_bits(&self, bits: &[bool]) -> Rational {
        let mut total = self.constant.clone();
        for (c, &b) in self.linear.iter().zip(bits) {
            if b {
                total += c;
            }
        }
        for (&(i, j), c) in &self.quadratic {
            if bits[i] && bits[j] {
                total += c;
            }
        }
        total
    }

    pub fn to_json(&self) -> InequalityJson {
        InequalityJson {
            name: Some(self.name.clone()),
            variables: self.variables.clone(),
            constant: format_rational(&self.constant),
            linear: self
                .variables
                .iter()
                .zip(&self.linear)
                .filter(|(_, c)| !c.is_zero())
                .map(|(v, c)| (v.clone(), format_rational(c)))
                .collect(),
            quadratic: self
                .quadratic
                .iter()
                .map(|(&(i, j), c)| [self.variables[i].clone(), self.variables[j].clone(), format_rational(c)])
                .collect(),
            classical_bound: format_rational(&self.classical_bound),
            quantum_value: format_rational(&self.quantum_value),
            requires_ks_constraints: self.requires_ks_constraints,
        }
    }

    pub fn from_json(json: &InequalityJson) -> Result<Self> {
        let mut b = FormBuilder::new(json.name.clone().unwrap_or_default(), json.variables.iter().cloned())?;
        b.constant = parse_rational(&json.constant)?;
        for (label, c) in &json.linear {
            b.add_linear_existing(label, parse_rational(c)?)?;
        }
        for [x, y, c] in &json.quadratic {
            b.add_product_existing(x, y, parse_rational(c)?)?;
        }
        Ok(b.finish(
            parse_rational(&json.classical_bound)?,
            parse_rational(&json.quantum_value)?,
            json.requires_ks_constraints,
        ))
    }
}

/// Serialized inequality; coefficients use the rational string format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InequalityJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub variables: Vec<String>,
    pub constant: String,
    pub linear: BTreeMap<String, String>,
    pub quadratic: Vec<[String; 3]>,
    pub classical_bound: String,
    pub quantum_value: String,
    pub requires_ks_constraints: bool,
}

/// Accumulates terms, folding `x*x` into `x` and merging repeated pairs.
#[derive(Clone, Debug)]
pub struct FormBuilder {
    name: String,
    variables: Vec<String>,
    index: HashMap<String, usize>,
    constant: Rational,
    linear: Vec<Rational>,
    quadratic: BTreeMap<(usize, usize), Rational>,
}

impl FormBuilder {
    pub fn new(name: impl Into<String>, variables: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut b = Self {
            name: name.into(),
            variables: Vec::new(),
            index: HashMap::new(),
            constant: Rational::zero(),
            linear: Vec::new(),
            quadratic: BTreeMap::new(),
        };
        for v in variables {
            if b.index.contains_key(&v) {
                return Err(Error::DuplicateLabel(v));
            }
            b.var(&v);
        }
        Ok(b)
    }

    fn var(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.variables.len();
        self.variables.push(label.to_string());
        self.index.insert(label.to_string(), i);
        self.linear.push(Rational::zero());
        i
    }

    fn existing(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn add_constant(&mut self, c: Rational) {
        self.constant += c;
    }

    pub fn add_linear(&mut self, label: &str, c: Rational) {
        let i = self.var(label);
        self.linear[i] += c;
    }

    fn add_linear_existing(&mut self, label: &str, c: Rational) -> Result<()> {
        let i = self.existing(label)?;
        self.linear[i] += c;
        Ok(())
    }

    fn add_index_product(&mut self, i: usize, j: usize, c: Rational) {
        if i == j {
            self.linear[i] += c;
        } else {
            *self
                .quadratic
                .entry((i.min(j), i.max(j)))
                .or_insert_with(Rational::zero) += c;
        }
    }

    /// Adds `c * a * b`; `a == b` folds into the linear term.
    pub fn add_product(&mut self, a: &str, b: &str, c: Rational) {
        let (i, j) = (self.var(a), self.var(b));
        self.add_index_product(i, j, c);
    }

    fn add_product_existing(&mut self, a: &str, b: &str, c: Rational) -> Result<()> {
        let (i, j) = (self.existing(a)?, self.existing(b)?);
        self.add_index_product(i, j, c);
        Ok(())
    }

    /// Adds `c * (sum left) * (sum right)`.
    pub fn add_sum_product<A: AsRef<str>, B: AsRef<str>>(&mut self, left: &[A], right: &[B], c: &Rational) {
        for a in left {
            for b in right {
                self.add_product(a.as_ref(), b.as_ref(), c.clone());
            }
        }
    }

    pub fn finish(self, classical_bound: Rational, quantum_value: Rational, requires_ks_constraints: bool) -> QuadForm {
        let quadratic = self.quadratic.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        QuadForm {
            name: self.name,
            variables: self.variables,
            index: self.index,
            constant: self.constant,
            linear: self.linear,
            quadratic,
            classical_bound,
            quantum_value,
            requires_ks_constraints,
        }
    }
}

/// Adds `weight * L4` for the 18-ray copy whose labels are `{prefix}v{ij}`.
fn add_l4(b: &mut FormBuilder, prefix: &str, weight: &Rational) {
    let lg = line_graph(&base_graph_9());
    let name = |i: usize| format!("{prefix}v{}", lg.label(i));
    for i in 0..lg.len() {
        b.add_linear(&name(i), weight.clone());
    }
    for (i, j) in lg.edges() {
        b.add_product(&name(i), &name(j), -weight);
    }
}

/// Coefficient of a 13-ray label in the linear part of L3: 1 for `y`/`z`, 1/2 for `h`.
fn l3_linear_weight(label: &str) -> Option<Rational> {
    let local = label.rsplit(':').next().unwrap_or(label);
    match local.chars().next()?.to_ascii_lowercase() {
        'y' | 'z' => Some(Rational::one()),
        'h' => Some(rat(1, 2)),
        _ => None,
    }
}

/// Adds `weight * L3` over the 13 rays of `set` named by `labels` (aliases
/// allowed). The quadratic part runs over every orthogonal pair among them.
fn add_l3(b: &mut FormBuilder, set: &RaySet, labels: &[String], weight: &Rational) -> Result<()> {
    if labels.len() != 13 {
        return Err(Error::Malformed(format!(
            "13-ray expression needs 13 rays, got {}",
            labels.len()
        )));
    }
    let mut positions = Vec::with_capacity(13);
    for l in labels {
        let pos = set.position(l).ok_or_else(|| Error::UnknownLabel(l.clone()))?;
        let lin = l3_linear_weight(l).ok_or_else(|| Error::UnknownLabel(l.clone()))?;
        let canonical = set.rays()[pos].label.clone();
        b.add_linear(&canonical, lin * weight);
        positions.push((pos, canonical));
    }
    for a in 0..positions.len() {
        for c in a + 1..positions.len() {
            if set.orthogonal(positions[a].0, positions[c].0) {
                b.add_product(&positions[a].1, &positions[c].1, -weight);
            }
        }
    }
    Ok(())
}

/// 18-ray expression: every edge ray with weight 1, and `-1` on every pair of
/// rays whose edges meet at a vertex. Bound 4, quantum value 9/2.
#[allow(non_snake_case)]
pub fn build_L4() -> QuadForm {
    let set = build_18ray();
    let mut b = FormBuilder::new("L4", set.labels().into_iter().map(String::from)).expect("unique");
    add_l4(&mut b, "", &Rational::one());
    b.finish(int(4), q4(), false)
}

/// 13-ray expression `y + h/2 + z - sum over orthogonal pairs`. Labels may carry
/// a `b{k}:` block prefix. Bound 7/2, quantum value 11/3.
#[allow(non_snake_case)]
pub fn build_L3(set13: &RaySet) -> Result<QuadForm> {
    let labels: Vec<String> = set13.labels().into_iter().map(String::from).collect();
    let mut b = FormBuilder::new("L3", labels.iter().cloned())?;
    add_l3(&mut b, set13, &labels, &Rational::one())?;
    Ok(b.finish(c3(), q3(), false))
}

/// Five-dimensional expression over the 25-ray set. Bound 43/6, quantum value 22/3.
#[allow(non_snake_case)]
pub fn build_L5() -> QuadForm {
    let set = build_25ray();
    let lower = labels_25_half(false);
    let upper = labels_25_half(true);
    let upper_canonical: Vec<String> = upper
        .iter()
        .map(|l| set.canonical_label(l).expect("label exists").to_string())
        .collect();
    let mut b = FormBuilder::new("L5", set.labels().into_iter().map(String::from)).expect("unique");
    let one = Rational::one();
    add_l3(&mut b, &set, &lower, &one).expect("lower copy");
    add_l3(&mut b, &set, &upper, &one).expect("upper copy");

    // (11/3) z'(2 - z') with z' = z1 + z2 + Z2 + Z3
    let zp = ["z1", "z2", "Z2", "Z3"];
    for z in zp {
        b.add_linear(z, int(2) * q3());
    }
    b.add_sum_product(&zp, &zp, &-q3());

    b.add_sum_product(&["z1", "z2"], &upper_canonical, &-&one);
    b.add_sum_product(&["Z2", "Z3"], &lower, &-&one);
    b.finish(rat(43, 6), rat(22, 3), false)
}

/// Dimension `d >= 6` expression over `build_general(d)`. Bound `c3/q3 = 21/22`,
/// quantum value 1.
#[allow(non_snake_case)]
pub fn build_Ld(d: usize) -> Result<QuadForm> {
    let set = build_general(d, None)?;
    let layout = set.layout().expect("general sets carry a layout").clone();
    let mut b = FormBuilder::new(format!("L{d}"), set.labels().into_iter().map(String::from))?;
    let inv_q3 = Rational::one() / q3();
    let inv_q4 = Rational::one() / q4();

    let mut members: Vec<Vec<String>> = vec![Vec::new(); layout.blocks().len()];
    for r in set.rays() {
        let k = layout.block_of_label(&r.label).expect("block prefix");
        members[k].push(r.label.clone());
    }

    for (k, block) in layout.blocks().iter().enumerate() {
        match block.kind {
            BlockKind::Qutrit => add_l3(&mut b, &set, &members[k], &inv_q3)?,
            BlockKind::Ququart => add_l4(&mut b, &format!("b{}:", k + 1), &inv_q4),
        }
    }

    let kinds: Vec<BlockKind> = layout.blocks().iter().map(|b| b.kind).collect();
    for k in 0..kinds.len() {
        for l in k + 1..kinds.len() {
            let coefficient = match (kinds[k], kinds[l]) {
                (BlockKind::Qutrit, BlockKind::Qutrit) => -&inv_q3,
                (BlockKind::Ququart, BlockKind::Ququart) => -&inv_q4,
                _ => -Rational::one(),
            };
            b.add_sum_product(&members[k], &members[l], &coefficient);
        }
    }
    Ok(b.finish(c3() / q3(), Rational::one(), false))
}

/// Sum of the six 18-ray variables whose base-graph edges avoid the
/// independent vertex triple. Bound 1 (under KS constraints), quantum value 3/2.
pub fn build_hexagon(triple: [&str; 3]) -> Result<QuadForm> {
    let g = base_graph_9();
    let not_independent = || Error::NotIndependent(triple.map(String::from));
    let mut idx = [0usize; 3];
    for (slot, label) in idx.iter_mut().zip(triple) {
        *slot = g
            .index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
    }
    if idx[0] == idx[1] || idx[0] == idx[2] || idx[1] == idx[2] {
        return Err(not_independent());
    }
    if g.adjacent(idx[0], idx[1]) || g.adjacent(idx[0], idx[2]) || g.adjacent(idx[1], idx[2]) {
        return Err(not_independent());
    }
    let labels: Vec<String> = g
        .edges()
        .into_iter()
        .filter(|&(i, j)| !idx.contains(&i) && !idx.contains(&j))
        .map(|(i, j)| format!("v{}{}", g.label(i), g.label(j)))
        .collect();
    let mut b = FormBuilder::new(format!("hexagon{}", triple.concat()), labels.iter().cloned())?;
    for l in &labels {
        b.add_linear(l, Rational::one());
    }
    Ok(b.finish(Rational::one(), rat(3, 2), true))
}

/// Twelve-projector expression over the 25-ray set valid for KS value
/// assignments. Bound 7/6, quantum value 4/3.
#[allow(non_snake_case)]
pub fn build_L5prime() -> QuadForm {
    let hs = ["h0", "h1", "h2", "h3", "H0", "H1", "H2", "H3"];
    let zs = ["z1", "z2", "Z2", "Z3"];
    let mut b = FormBuilder::new("L5prime", hs.iter().chain(&zs).map(|s| s.to_string())).expect("unique");
    for h in hs {
        b.add_linear(h, rat(1, 2));
    }
    for z in zs {
        b.add_linear(z, rat(2, 3));
    }
    b.finish(rat(7, 6), rat(4, 3), true)
}

/// Values for a form's variables, in `[0, 1]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<String, Rational>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(variables: &[String], bits: &[bool]) -> Self {
        Self {
            values: variables
                .iter()
                .zip(bits)
                .map(|(v, &b)| (v.clone(), if b { Rational::one() } else { Rational::zero() }))
                .collect(),
        }
    }

    pub fn uniform(variables: &[String], value: Rational) -> Self {
        Self {
            values: variables.iter().map(|v| (v.clone(), value.clone())).collect(),
        }
    }

    pub fn set(&mut self, label: impl Into<String>, value: Rational) {
        self.values.insert(label.into(), value);
    }

    pub fn get(&self, label: &str) -> Option<&Rational> {
        self.values.get(label)
    }

    pub fn values(&self) -> &BTreeMap<String, Rational> {
        &self.values
    }

    pub fn is_binary(&self) -> bool {
        self.values.values().all(|v| v.is_zero() || v.is_one())
    }

    /// Values in the form's variable order.
    pub fn for_form(&self, f: &QuadForm) -> Result<Vec<Rational>> {
        f.variables()
            .iter()
            .map(|v| {
                self.values
                    .get(v)
                    .cloned()
                    .ok_or_else(|| Error::MissingVariable(v.clone()))
            })
            .collect()
    }

    pub fn bits_for(&self, variables: &[String]) -> Result<Vec<bool>> {
        variables
            .iter()
            .map(|v| {
                let x = self.values.get(v).ok_or_else(|| Error::MissingVariable(v.clone()))?;
                Ok(x.is_one())
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AssignmentValue {
    Bit(u8),
    Text(String),
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.values.len()))?;
        for (k, v) in &self.values {
            if v.is_zero() {
                map.serialize_entry(k, &0u8)?;
            } else if v.is_one() {
                map.serialize_entry(k, &1u8)?;
            } else {
                map.serialize_entry(k, &format_rational(v))?;
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, AssignmentValue>::deserialize(d)?;
        let mut values = BTreeMap::new();
        for (k, v) in raw {
            let value = match v {
                AssignmentValue::Bit(b) if b <= 1 => int(i64::from(b)),
                AssignmentValue::Bit(b) => return Err(serde::de::Error::custom(format!("value {b} outside [0, 1]"))),
                AssignmentValue::Text(t) => parse_rational(&t).map_err(serde::de::Error::custom)?,
            };
            values.insert(k, value);
        }
        Ok(Self { values })
    }
}

pub fn evaluate(f: &QuadForm, a: &Assignment) -> Result<Rational> {
    Ok(f.evaluate_slice(&a.for_form(f)?))
}

/// `constant * I + sum linear_i * projector(ray_i)`. Every quadratic pair must
/// be orthogonal, since the product of orthogonal projectors vanishes.
pub fn quantum_operator(f: &QuadForm, s: &RaySet) -> Result<RatMatrix> {
    let positions = f
        .variables()
        .iter()
        .map(|v| s.position(v).ok_or_else(|| Error::UnknownLabel(v.clone())))
        .collect::<Result<Vec<_>>>()?;
    let og = orthogonality_graph(s);
    for &(i, j) in f.quadratic().keys() {
        if !og.adjacent(positions[i], positions[j]) {
            return Err(Error::NonOrthogonalPair(
                f.variables()[i].clone(),
                f.variables()[j].clone(),
            ));
        }
    }
    let mut m = RatMatrix::scalar(f.constant().clone(), s.dimension());
    for (c, &pos) in f.linear().iter().zip(&positions) {
        if !c.is_zero() {
            m.add_scaled(c, &projector(&s.rays()[pos].vector)?)?;
        }
    }
    Ok(m)
}
