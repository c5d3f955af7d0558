//! Exact rational scalars, ray vectors and dense square matrices.
//!
//! Every quantum-side identity in this crate is checked here with exact
//! arithmetic: projectors are assembled from integer rays and compared
//! against `q * I` entry by entry.

use std::fmt;
use std::ops::{Add, Mul};

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction, always kept in lowest terms.
pub type Rational = BigRational;

/// Shorthand for `numer / denom`.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Parses `"p/q"` or `"p"`, with an optional leading `-` or `−`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::ParseRational(text.to_string());
    let trimmed = text.trim();
    let (negative, body) = if let Some(rest) = trimmed.strip_prefix('-') {
        (true, rest)
    } else if let Some(rest) = trimmed.strip_prefix('\u{2212}') {
        (true, rest)
    } else {
        (false, trimmed)
    };
    if body.is_empty() || body.starts_with(['-', '+']) {
        return Err(bad());
    }
    let (numer, denom) = match body.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (body, "1"),
    };
    let numer: BigInt = numer.parse().map_err(|_| bad())?;
    let denom: BigInt = denom.parse().map_err(|_| bad())?;
    if denom.is_zero() || denom.is_negative() {
        return Err(bad());
    }
    let value = Rational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

pub fn rational_to_f64(value: &Rational) -> f64 {
    num::ToPrimitive::to_f64(value).unwrap_or(f64::NAN)
}

/// Serde adapter storing a [`Rational`] as its string form.
pub mod rational_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// A nonzero rational vector of dimension at least 3. Never normalized in storage.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RayVec {
    coords: Vec<Rational>,
}

impl RayVec {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        if coords.iter().all(Zero::is_zero) {
            return Err(Error::ZeroRay);
        }
        Ok(Self { coords })
    }

    pub fn from_ints(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn norm_sq(&self) -> Rational {
        self.coords.iter().map(|c| c * c).fold(Rational::zero(), |a, b| a + b)
    }

    /// `c * self`; fails for `c = 0`.
    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        Self::new(self.coords.iter().map(|x| x * c).collect())
    }

    /// Zero-pads into `dimension` coordinates starting at `offset`.
    pub fn embed(&self, dimension: usize, offset: usize) -> Result<Self> {
        if offset + self.dimension() > dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: offset + self.dimension(),
            });
        }
        let mut coords = vec![Rational::zero(); dimension];
        coords[offset..offset + self.dimension()].clone_from_slice(&self.coords);
        Self::new(coords)
    }

    /// Exact test for `self = c * other`, using the ratio at the first nonzero
    /// coordinate and cross-multiplying the rest.
    pub fn is_parallel(&self, other: &RayVec) -> bool {
        if self.dimension() != other.dimension() {
            return false;
        }
        let Some(pivot) = self.coords.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        if other.coords[pivot].is_zero() {
            return false;
        }
        let (a, b) = (&self.coords[pivot], &other.coords[pivot]);
        self.coords.iter().zip(&other.coords).all(|(x, y)| x * b == y * a)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(rational_to_f64).collect()
    }
}

impl fmt::Display for RayVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub fn inner_product(u: &RayVec, v: &RayVec) -> Result<Rational> {
    if u.dimension() != v.dimension() {
        return Err(Error::DimensionMismatch {
            expected: u.dimension(),
            found: v.dimension(),
        });
    }
    Ok(u.coords
        .iter()
        .zip(&v.coords)
        .map(|(a, b)| a * b)
        .fold(Rational::zero(), |acc, x| acc + x))
}

/// Dense square matrix of rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    dim: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Rational::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(Rational::one(), dim)
    }

    pub fn scalar(q: Rational, dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = q.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(Self { dim, entries })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Rational) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn trace(&self) -> Rational {
        (0..self.dim).fold(Rational::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|x| x * c).collect(),
        }
    }

    /// Adds `c * other` in place.
    pub fn add_scaled(&mut self, c: &Rational, other: &RatMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        for (x, y) in self.entries.iter_mut().zip(&other.entries) {
            *x += c * y;
        }
        Ok(())
    }

    pub fn apply(&self, v: &RayVec) -> Result<RayVec> {
        if v.dimension() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dimension(),
            });
        }
        let coords = (0..self.dim)
            .map(|i| (0..self.dim).fold(Rational::zero(), |acc, j| acc + self.get(i, j) * &v.coords()[j]))
            .collect();
        RayVec::new(coords)
    }

    /// Determinant by fraction-exact Gaussian elimination.
    pub fn determinant(&self) -> Rational {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col].clone();
            det *= &p;
            for r in col + 1..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let factor = &a[r * n + col] / &p;
                for k in col..n {
                    let sub = &factor * &a[col * n + k];
                    a[r * n + k] -= sub;
                }
            }
        }
        det
    }
}

impl Add for &RatMatrix {
    type Output = RatMatrix;

    fn add(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        RatMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Mul for &RatMatrix {
    type Output = RatMatrix;

    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = RatMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Rank-one projector `v v^T / (v . v)`.
pub fn projector(v: &RayVec) -> Result<RatMatrix> {
    let norm = v.norm_sq();
    if norm.is_zero() {
        return Err(Error::ZeroRay);
    }
    let n = v.dimension();
    let mut m = RatMatrix::zeros(n);
    for i in 0..n {
        if v.coords[i].is_zero() {
            continue;
        }
        for j in 0..n {
            if !v.coords[j].is_zero() {
                m.set(i, j, &v.coords[i] * &v.coords[j] / &norm);
            }
        }
    }
    Ok(m)
}

/// `sum_k c_k * projector(v_k)`.
pub fn weighted_operator<'a, I>(terms: I, dimension: usize) -> Result<RatMatrix>
where
    I: IntoIterator<Item = (&'a Rational, &'a RayVec)>,
{
    let mut acc = RatMatrix::zeros(dimension);
    for (c, v) in terms {
        if v.dimension() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: v.dimension(),
            });
        }
        acc.add_scaled(c, &projector(v)?)?;
    }
    Ok(acc)
}

/// Returns `q` when `m = q * I` exactly.
pub fn scalar_identity_check(m: &RatMatrix) -> Option<Rational> {
    let n = m.dimension();
    if n == 0 {
        return Some(Rational::zero());
    }
    let q = m.get(0, 0).clone();
    for i in 0..n {
        for j in 0..n {
            let entry = m.get(i, j);
            let ok = if i == j { *entry == q } else { entry.is_zero() };
            if !ok {
                return None;
            }
        }
    }
    Some(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ray(c: &[i64]) -> RayVec {
        RayVec::from_ints(c).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(inner_product(&ray(&[1, 0, 0, 0]), &ray(&[0, 1, 0, 0])).unwrap(), int(0));
        // v34 . v37
        assert_eq!(
            inner_product(&ray(&[-1, 1, 1, 1]), &ray(&[1, 1, 1, -1])).unwrap(),
            int(0)
        );
        // h0 . h1
        assert_eq!(inner_product(&ray(&[1, 1, 1]), &ray(&[-1, 1, 1])).unwrap(), int(1));
        assert!(matches!(
            inner_product(&ray(&[1, 0, 0]), &ray(&[1, 0, 0, 0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn projector_examples() {
        let p = projector(&ray(&[1, 0, 0, 0])).unwrap();
        let mut expected = RatMatrix::zeros(4);
        expected.set(0, 0, int(1));
        assert_eq!(p, expected);

        let p = projector(&ray(&[1, 1, 1, 1])).unwrap();
        assert!((0..4).all(|i| (0..4).all(|j| *p.get(i, j) == rat(1, 4))));

        let p = projector(&ray(&[0, 1, 0, -1])).unwrap();
        let mut expected = RatMatrix::zeros(4);
        expected.set(1, 1, rat(1, 2));
        expected.set(3, 3, rat(1, 2));
        expected.set(1, 3, rat(-1, 2));
        expected.set(3, 1, rat(-1, 2));
        assert_eq!(p, expected);
    }

    #[test]
    fn zero_and_short_vectors_rejected() {
        assert_eq!(RayVec::from_ints(&[0, 0, 0]), Err(Error::ZeroRay));
        assert_eq!(RayVec::from_ints(&[1, 0]), Err(Error::DimensionTooSmall(2)));
    }

    #[test]
    fn weighted_operator_on_basis_is_identity() {
        let basis = [ray(&[1, 0, 0]), ray(&[0, 1, 0]), ray(&[0, 0, 1])];
        let one = int(1);
        let m = weighted_operator(basis.iter().map(|v| (&one, v)), 3).unwrap();
        assert_eq!(m, RatMatrix::identity(3));
        assert!(weighted_operator([(&one, &basis[0])], 4).is_err());
    }

    #[test]
    fn scalar_identity_examples() {
        assert_eq!(scalar_identity_check(&RatMatrix::scalar(rat(9, 2), 4)), Some(rat(9, 2)));
        let mut m = RatMatrix::identity(3);
        m.set(0, 2, int(1));
        assert_eq!(scalar_identity_check(&m), None);
        assert_eq!(scalar_identity_check(&RatMatrix::zeros(3)), Some(int(0)));
    }

    #[test]
    fn rational_strings() {
        assert_eq!(format_rational(&rat(-7, 2)), "-7/2");
        assert_eq!(format_rational(&rat(4, 2)), "2");
        assert_eq!(parse_rational("\u{2212}7/2").unwrap(), rat(-7, 2));
        assert_eq!(parse_rational(" 6/4 ").unwrap(), rat(3, 2));
        for bad in ["", "1/0", "a", "--1", "1/-2", "/3"] {
            assert!(parse_rational(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn determinant_small() {
        let m = RatMatrix::from_int_rows(&[&[2, 1, 0], &[1, 3, 0], &[0, 0, 4]]).unwrap();
        assert_eq!(m.determinant(), int(20));
        let singular = RatMatrix::from_int_rows(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]).unwrap();
        assert_eq!(singular.determinant(), int(0));
    }

    fn small_ray(dim: usize) -> impl Strategy<Value = RayVec> {
        proptest::collection::vec(-4i64..=4, dim)
            .prop_filter("nonzero", |c| c.iter().any(|&x| x != 0))
            .prop_map(|c| RayVec::from_ints(&c).unwrap())
    }

    proptest! {
        #[test]
        fn rationals_are_canonical(n in -1000i64..1000, d in 1i64..1000) {
            let r = rat(n, d);
            let g = num::integer::gcd(r.numer().clone(), r.denom().clone());
            prop_assert!(r.denom() > &BigInt::zero());
            prop_assert!(g.is_one());
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }

        #[test]
        fn projector_is_idempotent_with_unit_trace(v in small_ray(4)) {
            let p = projector(&v).unwrap();
            prop_assert_eq!(&(&p * &p), &p);
            prop_assert_eq!(p.trace(), int(1));
            prop_assert!(p.is_symmetric());
        }

        #[test]
        fn projector_ignores_scale(v in small_ray(5), n in 1i64..9, d in 1i64..9, neg: bool) {
            let c = rat(if neg { -n } else { n }, d);
            prop_assert_eq!(projector(&v.scaled(&c).unwrap()).unwrap(), projector(&v).unwrap());
        }

        #[test]
        fn weighted_operator_is_linear(
            rays in proptest::collection::vec(small_ray(3), 1..8),
            weights in proptest::collection::vec(-5i64..5, 8),
            split in 0usize..8,
        ) {
            let ws: Vec<Rational> = weights.iter().map(|&w| rat(w, 3)).collect();
            let terms: Vec<(&Rational, &RayVec)> = ws.iter().zip(&rays).collect();
            let split = split.min(terms.len());
            let whole = weighted_operator(terms.iter().copied(), 3).unwrap();
            let left = weighted_operator(terms[..split].iter().copied(), 3).unwrap();
            let right = weighted_operator(terms[split..].iter().copied(), 3).unwrap();
            prop_assert_eq!(whole, &left + &right);
        }
    }
}
