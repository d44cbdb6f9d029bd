//! Exact arithmetic in the Picard lattice of a rational surface.
//!
//! A plane blown up `n` times has Picard lattice `Z^{1+n}` with basis
//! `h, e1, ..., en` and the diagonal form `<+1, -1, ..., -1>`. Divisor classes
//! carry exact rational coordinates so that pullbacks of canonical classes of
//! singular models live in the same space.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg;

/// Exact rational scalar used throughout the crate.
pub type Rational = BigRational;

/// Builds a rational from an integer.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Builds the rational `n / d`. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, LatticeError> {
    let t = s.trim();
    let bad = || LatticeError::BadRational(s.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => BigInt::from_str(t).map(Rational::from_integer).map_err(|_| bad()),
    }
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Converts an integral rational to `i64`.
pub fn to_i64(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        r.numer().to_i64()
    } else {
        None
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("basis mismatch: label {0} is not part of this lattice")]
    BasisMismatch(BasisLabel),
    #[error("class {0} has non-integral coordinates; divisibility needs an integral class")]
    NonIntegral(String),
    #[error("divisor must be a positive integer, got {0}")]
    InvalidDivisor(i64),
    #[error("invalid basis label {0:?}")]
    BadLabel(String),
    #[error("invalid rational {0:?}")]
    BadRational(String),
    #[error("duplicate basis label {0}")]
    DuplicateLabel(BasisLabel),
}

/// Basis vector of the lattice: the pulled-back line class `h` or the total
/// transform `e<k>` of the `k`-th exceptional divisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisLabel {
    H,
    E(u32),
}

impl BasisLabel {
    /// `+1` for `h`, `-1` for exceptional labels.
    pub fn square(self) -> i64 {
        match self {
            BasisLabel::H => 1,
            BasisLabel::E(_) => -1,
        }
    }

    pub fn is_label(s: &str) -> bool {
        s.parse::<BasisLabel>().is_ok()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::H => write!(f, "h"),
            BasisLabel::E(k) => write!(f, "e{k}"),
        }
    }
}

impl FromStr for BasisLabel {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "h" {
            return Ok(BasisLabel::H);
        }
        let digits = s
            .strip_prefix('e')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) && !d.starts_with('0'))
            .ok_or_else(|| LatticeError::BadLabel(s.to_string()))?;
        digits
            .parse::<u32>()
            .map(BasisLabel::E)
            .map_err(|_| LatticeError::BadLabel(s.to_string()))
    }
}

/// A divisor class with exact rational coordinates. Absent labels have
/// coefficient zero; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DivisorClass {
    coords: BTreeMap<BasisLabel, Rational>,
}

impl DivisorClass {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(label: BasisLabel) -> Self {
        Self::from_coords([(label, Rational::one())])
    }

    pub fn from_coords<I>(coords: I) -> Self
    where
        I: IntoIterator<Item = (BasisLabel, Rational)>,
    {
        let mut out = Self::zero();
        for (label, value) in coords {
            out.add_term(label, &value);
        }
        out
    }

    /// Integer coordinates, e.g. `[(H, 3), (E(1), -1)]`.
    pub fn from_ints<I>(coords: I) -> Self
    where
        I: IntoIterator<Item = (BasisLabel, i64)>,
    {
        Self::from_coords(coords.into_iter().map(|(l, v)| (l, int(v))))
    }

    fn add_term(&mut self, label: BasisLabel, value: &Rational) {
        if value.is_zero() {
            return;
        }
        let slot = self.coords.entry(label).or_insert_with(Rational::zero);
        *slot += value;
        if slot.is_zero() {
            self.coords.remove(&label);
        }
    }

    pub fn coeff(&self, label: BasisLabel) -> Rational {
        self.coords.get(&label).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coords(&self) -> impl Iterator<Item = (&BasisLabel, &Rational)> {
        self.coords.iter()
    }

    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        self.coords.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        self.coords.values().all(|v| v.is_integer())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self {
            coords: self.coords.iter().map(|(l, v)| (*l, v * k)).collect(),
        }
    }

    /// Drops the coordinate of `label` (push-forward under blowing down `label`).
    pub fn without(&self, label: BasisLabel) -> Self {
        let mut coords = self.coords.clone();
        coords.remove(&label);
        Self { coords }
    }

    /// Intersection number under the diagonal form.
    pub fn intersect(&self, other: &DivisorClass) -> Rational {
        let (small, large) = if self.coords.len() <= other.coords.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = Rational::zero();
        for (label, a) in &small.coords {
            if let Some(b) = large.coords.get(label) {
                acc += a * b * int(label.square());
            }
        }
        acc
    }

    pub fn square(&self) -> Rational {
        self.intersect(self)
    }

    /// Returns `L` with `self = k * L`, or `None` when some coordinate is not
    /// divisible by `k`.
    pub fn divide(&self, k: i64) -> Result<Option<DivisorClass>, LatticeError> {
        if k < 1 {
            return Err(LatticeError::InvalidDivisor(k));
        }
        if !self.is_integral() {
            return Err(LatticeError::NonIntegral(self.to_string()));
        }
        let k = BigInt::from(k);
        let mut out = BTreeMap::new();
        for (label, v) in &self.coords {
            let (q, r) = v.numer().div_rem(&k);
            if !r.is_zero() {
                return Ok(None);
            }
            out.insert(*label, Rational::from_integer(q));
        }
        Ok(Some(DivisorClass { coords: out }))
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0");
        }
        for (i, (label, v)) in self.coords.iter().enumerate() {
            let neg = v.is_negative();
            let mag = v.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if mag.is_one() {
                write!(f, "{label}")?;
            } else {
                write!(f, "{}{label}", fmt_rational(&mag))?;
            }
        }
        Ok(())
    }
}

impl Add for &DivisorClass {
    type Output = DivisorClass;

    fn add(self, rhs: &DivisorClass) -> DivisorClass {
        let mut out = self.clone();
        for (l, v) in &rhs.coords {
            out.add_term(*l, v);
        }
        out
    }
}

impl Sub for &DivisorClass {
    type Output = DivisorClass;

    fn sub(self, rhs: &DivisorClass) -> DivisorClass {
        self + &(-rhs)
    }
}

impl Neg for &DivisorClass {
    type Output = DivisorClass;

    fn neg(self) -> DivisorClass {
        DivisorClass {
            coords: self.coords.iter().map(|(l, v)| (*l, -v)).collect(),
        }
    }
}

impl Mul<&DivisorClass> for &Rational {
    type Output = DivisorClass;

    fn mul(self, rhs: &DivisorClass) -> DivisorClass {
        rhs.scale(self)
    }
}

/// An ordered basis `h, e_i, ...`; the ambient lattice for a surface model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    basis: Vec<BasisLabel>,
}

impl Lattice {
    /// The Picard lattice of the plane: basis `[h]`.
    pub fn plane() -> Self {
        Self {
            basis: vec![BasisLabel::H],
        }
    }

    pub fn new(basis: Vec<BasisLabel>) -> Result<Self, LatticeError> {
        let mut seen = std::collections::BTreeSet::new();
        for l in &basis {
            if !seen.insert(*l) {
                return Err(LatticeError::DuplicateLabel(*l));
            }
        }
        Ok(Self { basis })
    }

    pub fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, label: BasisLabel) -> bool {
        self.basis.contains(&label)
    }

    pub(crate) fn push(&mut self, label: BasisLabel) -> Result<(), LatticeError> {
        if self.contains(label) {
            return Err(LatticeError::DuplicateLabel(label));
        }
        self.basis.push(label);
        Ok(())
    }

    pub(crate) fn remove(&mut self, label: BasisLabel) {
        self.basis.retain(|l| *l != label);
    }

    pub fn check(&self, d: &DivisorClass) -> Result<(), LatticeError> {
        match d.labels().find(|l| !self.contains(*l)) {
            Some(l) => Err(LatticeError::BasisMismatch(l)),
            None => Ok(()),
        }
    }

    pub fn intersect(&self, a: &DivisorClass, b: &DivisorClass) -> Result<Rational, LatticeError> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.intersect(b))
    }

    pub fn is_equal(&self, a: &DivisorClass, b: &DivisorClass) -> Result<bool, LatticeError> {
        self.check(a)?;
        self.check(b)?;
        Ok(a == b)
    }

    pub fn divide_class(&self, d: &DivisorClass, k: i64) -> Result<Option<DivisorClass>, LatticeError> {
        self.check(d)?;
        d.divide(k)
    }

    /// Gram matrix of the basis.
    pub fn gram(&self) -> Vec<Vec<Rational>> {
        let vecs: Vec<DivisorClass> = self.basis.iter().map(|l| DivisorClass::basis(*l)).collect();
        vecs.iter()
            .map(|a| vecs.iter().map(|b| a.intersect(b)).collect())
            .collect()
    }

    pub fn gram_determinant(&self) -> Rational {
        linalg::determinant(&self.gram())
    }
}
