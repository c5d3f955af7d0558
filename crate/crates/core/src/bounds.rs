//! Exact maximization of quadratic pseudo-Boolean forms over `{0,1}^n`.
//!
//! Three independent routes: Gray-code enumeration, depth-first branch and
//! bound, and a block-sum dynamic program for block-structured forms. All
//! inner loops run on integers after multiplying every coefficient by the
//! least common denominator; results are divided back exactly.
//!
//! The continuous-relaxation probe and mixture averaging live here as well.

use std::sync::atomic::{AtomicI64, Ordering};

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_linalg::{rational_to_f64, Rational};
use crate::exec::{map_indices, Execution};
use crate::quadform::{Assignment, QuadForm};
use crate::ray_sets::BlockLayout;

/// Hard cap on the number of variables accepted by [`max_exhaustive`].
pub const EXHAUSTIVE_CAP: usize = 26;

/// High-order variables fixed per work chunk in the exhaustive walk.
const CHUNK_BITS: usize = 8;

/// Variables fixed per root subtree in branch and bound.
const SPLIT_DEPTH: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    BranchBound,
    BlockDp,
    ConstrainedSearch,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::BranchBound => "branch_bound",
            Method::BlockDp => "block_dp",
            Method::ConstrainedSearch => "constrained_search",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundResult {
    #[serde(with = "crate::exact_linalg::rational_serde")]
    pub maximum: Rational,
    pub argmax: Assignment,
    pub method: Method,
    /// Assignments (exhaustive), search nodes (branch and bound, constrained
    /// search) or block-sum tuples (block DP) visited.
    pub evaluations: u64,
}

/// Integer copy of a form: every coefficient times `scale`.
#[derive(Clone, Debug)]
pub struct ScaledForm {
    scale: BigInt,
    constant: i64,
    linear: Vec<i64>,
    neighbors: Vec<Vec<(usize, i64)>>,
}

fn to_scaled(value: &Rational, scale: &BigInt) -> Result<i64> {
    let scaled = value * Rational::from_integer(scale.clone());
    debug_assert!(scaled.is_integer());
    scaled
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::Malformed("coefficient overflows the integer range".into()))
}

impl ScaledForm {
    pub fn new(f: &QuadForm) -> Result<Self> {
        let scale = std::iter::once(f.constant())
            .chain(f.linear())
            .chain(f.quadratic().values())
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let constant = to_scaled(f.constant(), &scale)?;
        let linear = f
            .linear()
            .iter()
            .map(|c| to_scaled(c, &scale))
            .collect::<Result<Vec<_>>>()?;
        let mut neighbors = vec![Vec::new(); f.len()];
        for (&(i, j), c) in f.quadratic() {
            let q = to_scaled(c, &scale)?;
            neighbors[i].push((j, q));
            neighbors[j].push((i, q));
        }
        Ok(Self {
            scale,
            constant,
            linear,
            neighbors,
        })
    }

    pub fn len(&self) -> usize {
        self.linear.len()
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty()
    }

    /// The least common denominator used for scaling.
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn unscale(&self, value: i64) -> Rational {
        Rational::new(BigInt::from(value), self.scale.clone())
    }

    pub fn evaluate(&self, bits: &[bool]) -> i64 {
        let mut total = self.constant;
        for i in 0..self.len() {
            if bits[i] {
                total += self.linear[i];
                for &(j, q) in &self.neighbors[i] {
                    if j > i && bits[j] {
                        total += q;
                    }
                }
            }
        }
        total
    }

    fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }
}

/// Incremental Gray-code walk over the low `free` variables, with the rest
/// held at their starting values. Step `k` flips variable `trailing_zeros(k)`.
pub struct GrayWalker<'a> {
    form: &'a ScaledForm,
    bits: Vec<bool>,
    /// `field[i] = linear_i + sum of couplings to variables currently set`.
    field: Vec<i64>,
    value: i64,
    step: u64,
    steps: u64,
}

impl<'a> GrayWalker<'a> {
    pub fn new(form: &'a ScaledForm, start: Vec<bool>, free: usize) -> Self {
        assert_eq!(start.len(), form.len());
        assert!(free <= form.len() && free < 64);
        let mut field = form.linear.clone();
        for (i, &b) in start.iter().enumerate() {
            if b {
                for &(j, q) in &form.neighbors[i] {
                    field[j] += q;
                }
            }
        }
        let value = form.evaluate(&start);
        Self {
            form,
            bits: start,
            field,
            value,
            step: 0,
            steps: 1u64 << free,
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Current scaled value.
    pub fn value(&self) -> i64 {
        self.value
    }

    /// Moves to the next Gray-code neighbor; `false` once the walk is complete.
    pub fn advance(&mut self) -> bool {
        self.step += 1;
        if self.step >= self.steps {
            return false;
        }
        let i = self.step.trailing_zeros() as usize;
        self.flip(i);
        true
    }

    fn flip(&mut self, i: usize) {
        if self.bits[i] {
            self.bits[i] = false;
            for &(j, q) in &self.form.neighbors[i] {
                self.field[j] -= q;
            }
            self.value -= self.field[i];
        } else {
            self.value += self.field[i];
            self.bits[i] = true;
            for &(j, q) in &self.form.neighbors[i] {
                self.field[j] += q;
            }
        }
    }
}

fn check_cap(f: &QuadForm) -> Result<()> {
    if f.len() > EXHAUSTIVE_CAP {
        return Err(Error::TooManyVariables {
            found: f.len(),
            cap: EXHAUSTIVE_CAP,
        });
    }
    Ok(())
}

pub fn max_exhaustive(f: &QuadForm) -> Result<BoundResult> {
    max_exhaustive_with(f, Execution::default())
}

/// Exhaustive maximum. The top `min(n, 8)` variables select a chunk; each chunk
/// walks the remaining variables in Gray-code order. Ties go to the first
/// maximizer in (chunk, Gray step) order, for every execution mode.
pub fn max_exhaustive_with(f: &QuadForm, exec: Execution) -> Result<BoundResult> {
    check_cap(f)?;
    let form = ScaledForm::new(f)?;
    let n = form.len();
    let fixed = n.min(CHUNK_BITS);
    let free = n - fixed;
    let chunk_best = map_indices(exec, 1usize << fixed, |chunk| {
        let mut start = vec![false; n];
        for b in 0..fixed {
            start[free + b] = chunk >> b & 1 == 1;
        }
        let mut walker = GrayWalker::new(&form, start, free);
        let mut best = walker.value();
        let mut best_bits = walker.bits().to_vec();
        while walker.advance() {
            if walker.value() > best {
                best = walker.value();
                best_bits.copy_from_slice(walker.bits());
            }
        }
        (best, best_bits)
    });
    let (best, bits) = chunk_best
        .into_iter()
        .reduce(|acc, x| if x.0 > acc.0 { x } else { acc })
        .expect("at least one chunk");
    Ok(BoundResult {
        maximum: form.unscale(best),
        argmax: Assignment::from_bits(f.variables(), &bits),
        method: Method::Exhaustive,
        evaluations: 1u64 << n,
    })
}

struct BranchState<'a> {
    form: &'a ScaledForm,
    order: &'a [usize],
    /// Per variable: `None` while free.
    value: Vec<Option<bool>>,
    /// `linear_i + sum of couplings to variables fixed at 1`.
    field: Vec<i64>,
    /// Sum of positive couplings to free variables.
    positive_free: Vec<i64>,
    fixed_value: i64,
    nodes: u64,
}

impl<'a> BranchState<'a> {
    fn new(form: &'a ScaledForm, order: &'a [usize]) -> Self {
        let positive_free = (0..form.len())
            .map(|i| form.neighbors[i].iter().map(|&(_, q)| q.max(0)).sum())
            .collect();
        Self {
            form,
            order,
            value: vec![None; form.len()],
            field: form.linear.clone(),
            positive_free,
            fixed_value: form.constant,
            nodes: 0,
        }
    }

    fn assign(&mut self, i: usize, one: bool) {
        self.value[i] = Some(one);
        if one {
            self.fixed_value += self.field[i];
        }
        for &(j, q) in &self.form.neighbors[i] {
            if q > 0 {
                self.positive_free[j] -= q;
            }
            if one {
                self.field[j] += q;
            }
        }
    }

    fn unassign(&mut self, i: usize) {
        let one = self.value[i] == Some(true);
        for &(j, q) in &self.form.neighbors[i] {
            if q > 0 {
                self.positive_free[j] += q;
            }
            if one {
                self.field[j] -= q;
            }
        }
        if one {
            self.fixed_value -= self.field[i];
        }
        self.value[i] = None;
    }

    /// Fixed part plus, for each free variable, the best it could add if set:
    /// its field (linear plus couplings to fixed ones) plus every positive
    /// coupling to another free variable.
    fn upper_bound(&self, depth: usize) -> i64 {
        self.fixed_value
            + self.order[depth..]
                .iter()
                .map(|&i| (self.field[i] + self.positive_free[i]).max(0))
                .sum::<i64>()
    }

    fn search(&mut self, depth: usize, best: &mut Option<(i64, Vec<bool>)>, shared: &AtomicI64) {
        self.nodes += 1;
        if depth == self.order.len() {
            if best.as_ref().is_none_or(|(b, _)| self.fixed_value > *b) {
                let bits = self.value.iter().map(|v| v == &Some(true)).collect();
                *best = Some((self.fixed_value, bits));
                shared.fetch_max(self.fixed_value, Ordering::Relaxed);
            }
            return;
        }
        let bound = self.upper_bound(depth);
        if best.as_ref().is_some_and(|(b, _)| bound <= *b) || bound < shared.load(Ordering::Relaxed) {
            return;
        }
        let var = self.order[depth];
        for one in [true, false] {
            self.assign(var, one);
            self.search(depth + 1, best, shared);
            self.unassign(var);
        }
    }
}

pub fn max_branch_bound(f: &QuadForm) -> Result<BoundResult> {
    max_branch_bound_with(f, Execution::default())
}

/// Depth-first branch and bound over variables in descending degree order,
/// value 1 first. The first `min(n, 6)` variables are split into independent
/// subtrees; an incumbent shared between subtrees prunes only nodes whose bound
/// is strictly below it, so the reported argmax does not depend on the schedule.
pub fn max_branch_bound_with(f: &QuadForm, exec: Execution) -> Result<BoundResult> {
    let form = ScaledForm::new(f)?;
    let n = form.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(form.degree(i)), i));
    let split = n.min(SPLIT_DEPTH);
    let shared = AtomicI64::new(i64::MIN);
    let results = map_indices(exec, 1usize << split, |prefix| {
        let mut state = BranchState::new(&form, &order);
        // prefix 0 is the all-ones branch, matching the 1-first DFS order
        for (d, &var) in order.iter().enumerate().take(split) {
            let one = prefix >> (split - 1 - d) & 1 == 0;
            state.assign(var, one);
        }
        let mut best = None;
        state.search(split, &mut best, &shared);
        (best, state.nodes)
    });
    let evaluations = results.iter().map(|(_, nodes)| nodes).sum();
    let (maximum, bits) = results
        .into_iter()
        .filter_map(|(best, _)| best)
        .reduce(|acc, x| if x.0 > acc.0 { x } else { acc })
        .expect("the first subtree always reaches a leaf");
    Ok(BoundResult {
        maximum: form.unscale(maximum),
        argmax: Assignment::from_bits(f.variables(), &bits),
        method: Method::BranchBound,
        evaluations,
    })
}

/// Per block: best within-block value for each block sum, with its argmax bits.
struct BlockTable {
    vars: Vec<usize>,
    best: Vec<Option<(i64, u64)>>,
}

fn block_table(form: &ScaledForm, vars: &[usize]) -> BlockTable {
    let k = vars.len();
    let local: std::collections::HashMap<usize, usize> = vars.iter().enumerate().map(|(a, &v)| (v, a)).collect();
    let linear: Vec<i64> = vars.iter().map(|&v| form.linear[v]).collect();
    let neighbors: Vec<Vec<(usize, i64)>> = vars
        .iter()
        .map(|&v| {
            form.neighbors[v]
                .iter()
                .filter_map(|&(w, q)| local.get(&w).map(|&b| (b, q)))
                .collect()
        })
        .collect();
    let sub = ScaledForm {
        scale: form.scale.clone(),
        constant: 0,
        linear,
        neighbors,
    };
    let mut best: Vec<Option<(i64, u64)>> = vec![None; k + 1];
    let mut walker = GrayWalker::new(&sub, vec![false; k], k);
    let mut mask = 0u64;
    let mut ones = 0usize;
    loop {
        let slot = &mut best[ones];
        if slot.is_none_or(|(v, _)| walker.value() > v) {
            *slot = Some((walker.value(), mask));
        }
        let before = walker.step;
        if !walker.advance() {
            break;
        }
        let flipped = (before + 1).trailing_zeros();
        mask ^= 1 << flipped;
        ones = mask.count_ones() as usize;
    }
    BlockTable {
        vars: vars.to_vec(),
        best,
    }
}

pub fn max_block_dp(f: &QuadForm, layout: &BlockLayout) -> Result<BoundResult> {
    max_block_dp_with(f, layout, Execution::default())
}

/// Block-sum dynamic program. Requires every cross-block coupling between
/// blocks `A` and `B` to be one constant `c_AB`, so the cross part equals
/// `sum c_AB s_A s_B` in the block sums. Each block is enumerated once; the
/// block-sum tuples are then scanned exhaustively.
pub fn max_block_dp_with(f: &QuadForm, layout: &BlockLayout, exec: Execution) -> Result<BoundResult> {
    let form = ScaledForm::new(f)?;
    if !form.constant.is_zero() {
        return Err(Error::NotBlockSeparable("nonzero constant term".into()));
    }
    let blocks = layout.blocks().len();
    let mut members = vec![Vec::new(); blocks];
    let mut block_of = Vec::with_capacity(f.len());
    for (i, v) in f.variables().iter().enumerate() {
        let b = layout
            .block_of_label(v)
            .ok_or_else(|| Error::NotBlockSeparable(format!("variable {v:?} has no block")))?;
        members[b].push(i);
        block_of.push(b);
    }
    if let Some(b) = members.iter().position(|m| m.len() >= 63) {
        return Err(Error::NotBlockSeparable(format!(
            "block {} is too large to enumerate",
            b + 1
        )));
    }

    // cross[a][b]: the common coupling, verified over all |A||B| pairs
    let mut cross_sum = vec![vec![Vec::new(); blocks]; blocks];
    for i in 0..f.len() {
        for &(j, q) in &form.neighbors[i] {
            let (a, b) = (block_of[i], block_of[j]);
            if a < b {
                cross_sum[a][b].push(q);
            }
        }
    }
    let mut cross = vec![vec![0i64; blocks]; blocks];
    for a in 0..blocks {
        for b in a + 1..blocks {
            let terms = &cross_sum[a][b];
            let full = members[a].len() * members[b].len();
            let c = terms.first().copied().unwrap_or(0);
            let uniform = terms.iter().all(|&q| q == c) && (terms.is_empty() || terms.len() == full);
            if !uniform {
                return Err(Error::NotBlockSeparable(format!(
                    "couplings between blocks {} and {} are not constant",
                    a + 1,
                    b + 1
                )));
            }
            cross[a][b] = c;
        }
    }

    let tables = map_indices(exec, blocks, |b| block_table(&form, &members[b]));
    let choices: Vec<Vec<usize>> = tables
        .iter()
        .map(|t| (0..t.best.len()).filter(|&s| t.best[s].is_some()).collect())
        .collect();

    let mut sums = vec![0usize; blocks];
    let mut best: Option<(i64, Vec<usize>)> = None;
    let mut tuples = 0u64;
    scan_tuples(&tables, &choices, &cross, 0, 0, &mut sums, &mut best, &mut tuples);
    let (maximum, best_sums) = best.unwrap_or((0, vec![0; blocks]));

    let mut bits = vec![false; f.len()];
    for (t, &s) in tables.iter().zip(&best_sums) {
        let (_, mask) = t.best[s].expect("chosen sums are feasible");
        for (a, &v) in t.vars.iter().enumerate() {
            bits[v] = mask >> a & 1 == 1;
        }
    }
    debug_assert_eq!(form.evaluate(&bits), maximum);
    Ok(BoundResult {
        maximum: form.unscale(maximum),
        argmax: Assignment::from_bits(f.variables(), &bits),
        method: Method::BlockDp,
        evaluations: tuples,
    })
}

#[allow(clippy::too_many_arguments)]
fn scan_tuples(
    tables: &[BlockTable],
    choices: &[Vec<usize>],
    cross: &[Vec<i64>],
    block: usize,
    partial: i64,
    sums: &mut Vec<usize>,
    best: &mut Option<(i64, Vec<usize>)>,
    tuples: &mut u64,
) {
    if block == tables.len() {
        *tuples += 1;
        if best.as_ref().is_none_or(|(b, _)| partial > *b) {
            *best = Some((partial, sums.clone()));
        }
        return;
    }
    for &s in &choices[block] {
        let (inner, _) = tables[block].best[s].expect("feasible");
        let coupling: i64 = (0..block).map(|a| cross[a][block] * (sums[a] * s) as i64).sum();
        sums[block] = s;
        scan_tuples(
            tables,
            choices,
            cross,
            block + 1,
            partial + inner + coupling,
            sums,
            best,
            tuples,
        );
    }
    sums[block] = 0;
}

/// Coordinate ascent to a binary local maximum. The first sweep works on the
/// continuous start point; later sweeps use exact integer gradients, setting a
/// coordinate only when that strictly improves the value.
pub fn ascend_from(f: &QuadForm, start: &[f64]) -> Result<Vec<bool>> {
    let form = ScaledForm::new(f)?;
    Ok(ascend_scaled(&form, start))
}

fn ascend_scaled(form: &ScaledForm, start: &[f64]) -> Vec<bool> {
    let n = form.len();
    let mut x = start.to_vec();
    for i in 0..n {
        let grad = form.linear[i] as f64 + form.neighbors[i].iter().map(|&(j, q)| q as f64 * x[j]).sum::<f64>();
        x[i] = if grad > 0.0 {
            1.0
        } else if grad < 0.0 {
            0.0
        } else {
            x[i].round()
        };
    }
    let mut bits: Vec<bool> = x.iter().map(|&v| v > 0.5).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            let grad = form.linear[i]
                + form.neighbors[i]
                    .iter()
                    .filter(|&&(j, _)| bits[j])
                    .map(|&(_, q)| q)
                    .sum::<i64>();
            let want = if grad > 0 {
                true
            } else if grad < 0 {
                false
            } else {
                bits[i]
            };
            if want != bits[i] {
                bits[i] = want;
                changed = true;
            }
        }
        if !changed {
            return bits;
        }
    }
}

pub fn continuous_probe(f: &QuadForm, samples: usize, seed: u64) -> Result<Rational> {
    continuous_probe_with(f, samples, seed, Execution::default())
}

/// Best exact value over `samples` uniform points of `[0,1]^n`, each pushed to
/// a local maximum by coordinate ascent. Sample `i` draws from ChaCha stream
/// `i` of `seed`, so the result does not depend on the thread count.
pub fn continuous_probe_with(f: &QuadForm, samples: usize, seed: u64, exec: Execution) -> Result<Rational> {
    if samples == 0 {
        return Err(Error::Malformed("continuous probe needs at least one sample".into()));
    }
    let form = ScaledForm::new(f)?;
    let n = form.len();
    let values = map_indices(exec, samples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let start: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        form.evaluate(&ascend_scaled(&form, &start))
    });
    let best = values.into_iter().max().expect("samples >= 1");
    Ok(form.unscale(best))
}

/// Float value of a form at a continuous point, for diagnostics.
pub fn evaluate_f64(f: &QuadForm, x: &[f64]) -> f64 {
    let mut total = rational_to_f64(f.constant());
    for (c, v) in f.linear().iter().zip(x) {
        total += rational_to_f64(c) * v;
    }
    for (&(i, j), c) in f.quadratic() {
        total += rational_to_f64(c) * x[i] * x[j];
    }
    total
}

/// `sum w_k * f(a_k)` over a probability mixture of assignments.
pub fn mixture_value(f: &QuadForm, weighted: &[(Rational, Assignment)]) -> Result<Rational> {
    if weighted.is_empty() {
        return Err(Error::InvalidMixture("empty mixture".into()));
    }
    if weighted.iter().any(|(w, _)| w.is_negative()) {
        return Err(Error::InvalidMixture("negative weight".into()));
    }
    let total: Rational = weighted.iter().map(|(w, _)| w.clone()).sum();
    if !total.is_one() {
        return Err(Error::InvalidMixture(format!("weights sum to {total}")));
    }
    let mut value = Rational::zero();
    for (w, a) in weighted {
        value += w * crate::quadform::evaluate(f, a)?;
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linalg::{int, rat};
    use crate::quadform::{build_L3, build_L4, build_Ld, FormBuilder};
    use crate::ray_sets::{build_13ray, build_general, Block, BlockKind};
    use rand::seq::SliceRandom;

    fn random_form(seed: u64, n: usize) -> QuadForm {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let mut b = FormBuilder::new("random", vars.iter().cloned()).unwrap();
        b.add_constant(rat(rng.gen_range(-3..3), 2));
        for v in &vars {
            b.add_linear(v, rat(rng.gen_range(-6..7), rng.gen_range(1..4)));
        }
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.4) {
                    b.add_product(&vars[i], &vars[j], rat(rng.gen_range(-6..7), rng.gen_range(1..4)));
                }
            }
        }
        b.finish(int(0), int(0), false)
    }

    fn brute_max(f: &QuadForm) -> Rational {
        (0u64..1 << f.len())
            .map(|m| {
                let bits: Vec<bool> = (0..f.len()).map(|i| m >> i & 1 == 1).collect();
                f.evaluate_bits(&bits)
            })
            .max()
            .unwrap()
    }

    #[test]
    fn exhaustive_bounds_of_small_forms() {
        let l4 = max_exhaustive(&build_L4()).unwrap();
        assert_eq!(l4.maximum, int(4));
        assert_eq!(l4.evaluations, 1 << 18);
        assert_eq!(crate::quadform::evaluate(&build_L4(), &l4.argmax).unwrap(), int(4));
        let l3 = build_L3(&build_13ray()).unwrap();
        assert_eq!(max_exhaustive(&l3).unwrap().maximum, rat(7, 2));
    }

    #[test]
    fn exhaustive_cap() {
        let f = build_Ld(7).unwrap();
        assert_eq!(max_exhaustive(&f), Err(Error::TooManyVariables { found: 31, cap: 26 }));
    }

    #[test]
    fn scaling_denominators() {
        assert_eq!(ScaledForm::new(&build_L4()).unwrap().scale(), &BigInt::from(1));
        assert_eq!(
            ScaledForm::new(&build_L3(&build_13ray()).unwrap()).unwrap().scale(),
            &BigInt::from(2)
        );
        assert_eq!(
            ScaledForm::new(&crate::quadform::build_L5()).unwrap().scale(),
            &BigInt::from(6)
        );
        assert_eq!(
            ScaledForm::new(&build_Ld(6).unwrap()).unwrap().scale(),
            &BigInt::from(22)
        );
        assert_eq!(
            ScaledForm::new(&build_Ld(7).unwrap()).unwrap().scale(),
            &BigInt::from(198)
        );
    }

    #[test]
    fn solvers_agree_with_brute_force_on_random_forms() {
        for seed in 0..40 {
            let n = 1 + (seed as usize % 14);
            let f = random_form(seed, n);
            let expected = brute_max(&f);
            for exec in [Execution::Sequential, Execution::Parallel] {
                let ex = max_exhaustive_with(&f, exec).unwrap();
                let bb = max_branch_bound_with(&f, exec).unwrap();
                assert_eq!(ex.maximum, expected, "seed {seed}");
                assert_eq!(bb.maximum, expected, "seed {seed}");
                assert_eq!(crate::quadform::evaluate(&f, &bb.argmax).unwrap(), expected);
                assert_eq!(crate::quadform::evaluate(&f, &ex.argmax).unwrap(), expected);
            }
        }
    }

    #[test]
    fn argmax_is_schedule_independent() {
        let f = build_L4();
        let a = max_exhaustive_with(&f, Execution::Sequential).unwrap();
        let b = max_exhaustive_with(&f, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let a = max_branch_bound_with(&f, Execution::Sequential).unwrap();
        let b = max_branch_bound_with(&f, Execution::Parallel).unwrap();
        assert_eq!(a.argmax, b.argmax);
    }

    #[test]
    fn branch_bound_linear_only() {
        let vars: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mut b = FormBuilder::new("lin", vars).unwrap();
        b.add_linear("a", rat(3, 2));
        b.add_linear("b", int(-1));
        b.add_linear("c", rat(1, 3));
        let f = b.finish(int(0), int(0), false);
        assert_eq!(max_branch_bound(&f).unwrap().maximum, rat(11, 6));
    }

    #[test]
    fn gray_walk_matches_direct_evaluation() {
        let f = random_form(7, 16);
        let form = ScaledForm::new(&f).unwrap();
        let mut walker = GrayWalker::new(&form, vec![false; 16], 16);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checkpoints: Vec<u64> = (0..1u64 << 16).collect();
        checkpoints.shuffle(&mut rng);
        checkpoints.truncate(200);
        checkpoints.sort();
        let mut step = 0u64;
        for cp in checkpoints {
            while step < cp {
                assert!(walker.advance());
                step += 1;
            }
            let exact = f.evaluate_bits(walker.bits());
            assert_eq!(form.unscale(walker.value()), exact);
        }
    }

    #[test]
    fn block_dp_matches_exhaustive() {
        let f = build_Ld(6).unwrap();
        let layout = build_general(6, None).unwrap().layout().unwrap().clone();
        let dp = max_block_dp(&f, &layout).unwrap();
        assert_eq!(dp.maximum, rat(21, 22));
        assert_eq!(crate::quadform::evaluate(&f, &dp.argmax).unwrap(), dp.maximum);
    }

    #[test]
    fn block_dp_single_block() {
        let single = build_general(6, None).unwrap();
        let rays: Vec<_> = single.rays()[..13]
            .iter()
            .map(|r| crate::ray_sets::Ray {
                label: r.label.clone(),
                vector: r.vector.clone(),
            })
            .collect();
        // first block only, re-embedded in three dimensions
        let rays3: Vec<_> = rays
            .into_iter()
            .map(|r| crate::ray_sets::Ray {
                label: r.label,
                vector: crate::exact_linalg::RayVec::new(r.vector.coords()[..3].to_vec()).unwrap(),
            })
            .collect();
        let set = crate::ray_sets::RaySet::new(3, rays3).unwrap();
        let f = build_L3(&set).unwrap();
        let layout = BlockLayout::new(vec![Block {
            kind: BlockKind::Qutrit,
            offset: 0,
        }])
        .unwrap();
        assert_eq!(
            max_block_dp(&f, &layout).unwrap().maximum,
            max_exhaustive(&f).unwrap().maximum
        );
    }

    #[test]
    fn block_dp_rejects_non_separable_forms() {
        let f = build_Ld(6).unwrap();
        let mut json = f.to_json();
        json.quadratic.retain(|[a, b, _]| !(a == "b1:z1" && b == "b2:z1"));
        let broken = QuadForm::from_json(&json).unwrap();
        let layout = build_general(6, None).unwrap().layout().unwrap().clone();
        assert!(matches!(
            max_block_dp(&broken, &layout),
            Err(Error::NotBlockSeparable(_))
        ));
    }

    #[test]
    fn probe_examples() {
        let l4 = build_L4();
        let v = continuous_probe(&l4, 500, 0).unwrap();
        assert!(v <= int(4));
        assert_eq!(
            continuous_probe_with(&l4, 64, 9, Execution::Sequential).unwrap(),
            continuous_probe_with(&l4, 64, 9, Execution::Parallel).unwrap()
        );

        let l3 = build_L3(&build_13ray()).unwrap();
        let best = max_exhaustive(&l3).unwrap();
        let start: Vec<f64> = best
            .argmax
            .bits_for(l3.variables())
            .unwrap()
            .iter()
            .map(|&b| b as u8 as f64)
            .collect();
        let bits = ascend_from(&l3, &start).unwrap();
        assert_eq!(l3.evaluate_bits(&bits), rat(7, 2));

        // from any binary point the ascent never loses value
        let f = random_form(11, 12);
        for m in [0u32, 5, 77, 4095] {
            let start: Vec<bool> = (0..12).map(|i| m >> i & 1 == 1).collect();
            let x: Vec<f64> = start.iter().map(|&b| b as u8 as f64).collect();
            let end = ascend_from(&f, &x).unwrap();
            assert!(f.evaluate_bits(&end) >= f.evaluate_bits(&start));
        }
        assert!(continuous_probe(&l4, 0, 0).is_err());
    }

    #[test]
    fn mixture_examples() {
        let f = build_L4();
        let best = max_exhaustive(&f).unwrap();
        let zeros = Assignment::uniform(f.variables(), int(0));
        assert_eq!(mixture_value(&f, &[(int(1), best.argmax.clone())]).unwrap(), int(4));
        let half = rat(1, 2);
        assert_eq!(
            mixture_value(
                &f,
                &[(half.clone(), zeros.clone()), (half.clone(), best.argmax.clone())]
            )
            .unwrap(),
            int(2)
        );
        assert!(mixture_value(&f, &[(half, zeros.clone())]).is_err());
        assert!(mixture_value(&f, &[(int(2), zeros.clone()), (int(-1), zeros)]).is_err());
        assert!(mixture_value(&f, &[]).is_err());
    }
}
