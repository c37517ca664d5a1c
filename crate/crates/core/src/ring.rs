//! Exact arithmetic in `Q[u, u^-1]` with the involution `u -> u^-1`, and
//! square matrices over that ring.
//!
//! The variable is always understood to lie on the unit circle, so `star`
//! models complex conjugation: a Laurent polynomial `p` satisfies
//! `star(p)(e^{ia}) = conj(p(e^{ia}))`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::NumMatrix;

/// Laurent polynomial with rational coefficients in one unit-modulus
/// variable. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct StarLaurent {
    coeffs: BTreeMap<i64, BigRational>,
}

impl StarLaurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// The variable `u`.
    pub fn var() -> Self {
        Self::monomial(1, BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, c)
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn monomial(exp: i64, c: BigRational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(exp, c);
        }
        Self { coeffs }
    }

    /// Builds `sum num/den * u^exp` from `(exp, num, den)` triples. Repeated
    /// exponents are summed.
    pub fn from_terms(terms: &[(i64, i64, i64)]) -> Self {
        let mut p = Self::zero();
        for &(exp, num, den) in terms {
            assert!(den != 0, "zero denominator");
            let c = BigRational::new(BigInt::from(num), BigInt::from(den));
            p.add_term(exp, &c);
        }
        p
    }

    fn add_term(&mut self, exp: i64, c: &BigRational) {
        if c.is_zero() {
            return;
        }
        let remove = match self.coeffs.get_mut(&exp) {
            Some(existing) => {
                *existing += c;
                existing.is_zero()
            }
            None => {
                self.coeffs.insert(exp, c.clone());
                false
            }
        };
        if remove {
            self.coeffs.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0).is_some_and(|c| c.is_one())
    }

    /// True if the polynomial has no non-constant terms.
    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|&k| k == 0)
    }

    pub fn coeff(&self, exp: i64) -> BigRational {
        self.coeffs
            .get(&exp)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.coeffs.iter().map(|(&k, c)| (k, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// The involution `u -> u^-1` (complex conjugation on the unit circle).
    pub fn star(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&k, c)| (-k, c.clone())).collect(),
        }
    }

    /// True if `star(p) == p`, i.e. `p` is real-valued on the unit circle.
    pub fn is_self_star(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(&k, c)| self.coeffs.get(&-k).is_some_and(|d| d == c))
    }

    /// Units of `Q[u, u^-1]` are exactly the nonzero monomials.
    pub fn is_unit(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn unit_inverse(&self) -> Option<Self> {
        if !self.is_unit() {
            return None;
        }
        let (&k, c) = self.coeffs.iter().next()?;
        Some(Self::monomial(-k, c.recip()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(&k, v)| (k, v * c)).collect(),
        }
    }

    /// Multiplies by `u^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&e, c)| (e + k, c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Exact quotient `self / divisor`, or `None` if the division leaves a
    /// remainder (or the divisor is zero).
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (d_lo, d_hi) = (divisor.min_exp()?, divisor.max_exp()?);
        let d_lead = divisor.coeffs[&d_hi].clone();
        let q_lo = self.min_exp()? - d_lo;
        let mut rem = self.clone();
        let mut quotient = Self::zero();
        while let Some(r_hi) = rem.max_exp() {
            let shift = r_hi - d_hi;
            if shift < q_lo {
                return None;
            }
            let c = &rem.coeffs[&r_hi] / &d_lead;
            let term = Self::monomial(shift, c);
            rem = &rem - &(&term * divisor);
            quotient = &quotient + &term;
        }
        Some(quotient)
    }

    /// Exact value at `u = 1`, as a constant.
    pub fn at_unity(&self) -> Self {
        let sum = self
            .coeffs
            .values()
            .fold(BigRational::zero(), |acc, c| acc + c);
        Self::constant(sum)
    }

    /// Value at `u = z`.
    pub fn eval_at(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&k, c)| z.powi(k as i32) * rational_to_f64(c))
            .sum()
    }

    /// Value at `u = e^{i alpha}`.
    pub fn eval_angle(&self, alpha: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&k, c)| Complex64::from_polar(rational_to_f64(c), k as f64 * alpha))
            .sum()
    }
}

pub(crate) fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

impl<'a> Add<&'a StarLaurent> for &'a StarLaurent {
    type Output = StarLaurent;
    fn add(self, rhs: &StarLaurent) -> StarLaurent {
        let mut out = self.clone();
        for (&k, c) in &rhs.coeffs {
            out.add_term(k, c);
        }
        out
    }
}

impl<'a> Sub<&'a StarLaurent> for &'a StarLaurent {
    type Output = StarLaurent;
    fn sub(self, rhs: &StarLaurent) -> StarLaurent {
        let mut out = self.clone();
        for (&k, c) in &rhs.coeffs {
            out.add_term(k, &-c);
        }
        out
    }
}

impl<'a> Mul<&'a StarLaurent> for &'a StarLaurent {
    type Output = StarLaurent;
    fn mul(self, rhs: &StarLaurent) -> StarLaurent {
        let mut out = StarLaurent::zero();
        for (&a, ca) in &self.coeffs {
            for (&b, cb) in &rhs.coeffs {
                out.add_term(a + b, &(ca * cb));
            }
        }
        out
    }
}

impl Neg for &StarLaurent {
    type Output = StarLaurent;
    fn neg(self) -> StarLaurent {
        StarLaurent {
            coeffs: self.coeffs.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<StarLaurent> for StarLaurent {
            type Output = StarLaurent;
            fn $method(self, rhs: StarLaurent) -> StarLaurent {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a StarLaurent> for StarLaurent {
            type Output = StarLaurent;
            fn $method(self, rhs: &StarLaurent) -> StarLaurent {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for StarLaurent {
    type Output = StarLaurent;
    fn neg(self) -> StarLaurent {
        -&self
    }
}

impl From<i64> for StarLaurent {
    fn from(c: i64) -> Self {
        Self::from_int(c)
    }
}

impl fmt::Display for StarLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (&k, c)) in self.coeffs.iter().rev().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if k == 0 {
                write!(f, "{abs}")?;
                continue;
            }
            if !abs.is_one() {
                write!(f, "{abs}*")?;
            }
            match k {
                1 => write!(f, "u")?,
                _ => write!(f, "u^{k}")?,
            }
        }
        Ok(())
    }
}

// JSON form: {"exp": "p/q", ...} with exponents as signed integer keys in
// ascending order.
impl Serialize for StarLaurent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.coeffs.len()))?;
        for (k, c) in &self.coeffs {
            map.serialize_entry(&k.to_string(), &c.to_string())?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for StarLaurent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct LaurentVisitor;

        impl<'de> Visitor<'de> for LaurentVisitor {
            type Value = StarLaurent;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a map from integer exponents to rational strings")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<StarLaurent, A::Error> {
                let mut p = StarLaurent::zero();
                while let Some((key, value)) = access.next_entry::<String, String>()? {
                    let exp: i64 = key
                        .trim()
                        .parse()
                        .map_err(|_| de::Error::custom(format!("bad exponent {key:?}")))?;
                    let c = parse_rational(&value).map_err(de::Error::custom)?;
                    p.add_term(exp, &c);
                }
                Ok(p)
            }
        }

        deserializer.deserialize_map(LaurentVisitor)
    }
}

/// Square matrix over [`StarLaurent`], stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingMatrix {
    dim: usize,
    entries: Vec<StarLaurent>,
}

impl RingMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![StarLaurent::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = StarLaurent::one();
        }
        m
    }

    pub fn diagonal(diag: Vec<StarLaurent>) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, d) in diag.into_iter().enumerate() {
            m.entries[i * dim + i] = d;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<StarLaurent>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidInput(
                "matrix must have positive dimension".into(),
            ));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Ok(Self { dim, entries })
    }

    /// Matrix with constant integer entries.
    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&c| StarLaurent::from_int(c)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &StarLaurent {
        assert!(
            i < self.dim && j < self.dim,
            "index ({i},{j}) out of range for dim {}",
            self.dim
        );
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: StarLaurent) {
        assert!(
            i < self.dim && j < self.dim,
            "index ({i},{j}) out of range for dim {}",
            self.dim
        );
        self.entries[i * self.dim + j] = value;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[StarLaurent]> {
        self.entries.chunks(self.dim)
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.entries[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.entries[k * n + j];
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a * b;
                    let slot = &mut out.entries[i * n + j];
                    *slot = &*slot + &prod;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: &StarLaurent) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * c).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].clone();
            }
        }
        out
    }

    /// Entrywise involution (complex conjugate on the unit circle).
    pub fn star_entries(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(StarLaurent::star).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn star_transpose(&self) -> Self {
        self.transpose().star_entries()
    }

    pub fn trace(&self) -> StarLaurent {
        (0..self.dim).fold(StarLaurent::zero(), |acc, i| &acc + self.get(i, i))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.dim);
        for _ in 0..k {
            acc = acc.mul(self).expect("same dimension");
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(StarLaurent::is_zero)
    }

    /// Exact substitution `u = 1` in every entry.
    pub fn at_unity(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(StarLaurent::at_unity).collect(),
        }
    }

    /// True if no entry involves the variable.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(StarLaurent::is_constant)
    }

    fn minor(&self, row: usize, col: usize) -> Self {
        let n = self.dim;
        let mut entries = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != row) {
            for j in (0..n).filter(|&j| j != col) {
                entries.push(self.entries[i * n + j].clone());
            }
        }
        Self {
            dim: n - 1,
            entries,
        }
    }

    /// Exact determinant: Laplace expansion up to dimension 5, Bareiss
    /// fraction-free elimination above.
    pub fn det(&self) -> StarLaurent {
        if self.dim <= 5 {
            self.det_laplace()
        } else {
            self.det_bareiss()
        }
    }

    pub(crate) fn det_laplace(&self) -> StarLaurent {
        match self.dim {
            0 => StarLaurent::one(),
            1 => self.entries[0].clone(),
            2 => &(&self.entries[0] * &self.entries[3]) - &(&self.entries[1] * &self.entries[2]),
            n => {
                let mut acc = StarLaurent::zero();
                for j in 0..n {
                    let a = &self.entries[j];
                    if a.is_zero() {
                        continue;
                    }
                    let term = a * &self.minor(0, j).det_laplace();
                    acc = if j % 2 == 0 {
                        &acc + &term
                    } else {
                        &acc - &term
                    };
                }
                acc
            }
        }
    }

    pub(crate) fn det_bareiss(&self) -> StarLaurent {
        let n = self.dim;
        if n == 0 {
            return StarLaurent::one();
        }
        let mut m: Vec<Vec<StarLaurent>> = self.rows().map(|r| r.to_vec()).collect();
        let mut negate = false;
        let mut prev = StarLaurent::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(i, k);
                        negate = !negate;
                    }
                    None => return StarLaurent::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                    m[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
                }
                m[i][k] = StarLaurent::zero();
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        if negate {
            -d
        } else {
            d
        }
    }

    pub fn adjugate(&self) -> Self {
        let n = self.dim;
        if n == 1 {
            return Self::identity(1);
        }
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let c = self.minor(i, j).det();
                out.entries[j * n + i] = if (i + j) % 2 == 0 { c } else { -c };
            }
        }
        out
    }

    /// Exact inverse; requires the determinant to be a unit (a nonzero
    /// monomial).
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        let inv_det = det.unit_inverse().ok_or(Error::NotInvertible)?;
        Ok(self.adjugate().scale(&inv_det))
    }

    /// Substitutes `u = e^{i alpha}`.
    pub fn evaluate(&self, alpha: f64) -> NumMatrix {
        NumMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j).eval_angle(alpha))
    }

    pub fn evaluate_at(&self, z: Complex64) -> NumMatrix {
        NumMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j).eval_at(z))
    }

    pub fn apply(&self, v: &[StarLaurent]) -> Result<Vec<StarLaurent>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: v.len(),
            });
        }
        Ok(self
            .rows()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(StarLaurent::zero(), |acc, (a, b)| &acc + &(a * b))
            })
            .collect())
    }
}

impl fmt::Display for RingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RingMatrixRepr {
    dim: usize,
    entries: Vec<Vec<StarLaurent>>,
}

impl Serialize for RingMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RingMatrixRepr {
            dim: self.dim,
            entries: self.rows().map(|r| r.to_vec()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RingMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = RingMatrixRepr::deserialize(deserializer)?;
        if repr.entries.len() != repr.dim {
            return Err(de::Error::custom(format!(
                "expected {} rows, found {}",
                repr.dim,
                repr.entries.len()
            )));
        }
        RingMatrix::from_rows(repr.entries).map_err(de::Error::custom)
    }
}
