//! Cyclic quotient singularities `1/m(1,q)`, their Hirzebruch-Jung chains,
//! and recognition of class T.
//!
//! Class T is taken with `0 < a < n`, so `1/4(1,1)` (the chain `[4]`) is the
//! basic Wahl singularity.

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CyclicError {
    #[error("invalid cyclic quotient 1/{m}(1,{q}): need m >= 2, 1 <= q < m, gcd(m,q) = 1")]
    InvalidQuotient { m: u64, q: u64 },
    #[error("chain entries must all be >= 2 and the chain nonempty, got {0:?}")]
    InvalidChain(Vec<u64>),
    #[error("invalid Wahl data (n={n}, a={a}): need n >= 2, 0 < a < n, gcd(n,a) = 1")]
    InvalidWahl { n: u64, a: u64 },
    #[error("singularity is not of class T")]
    NotClassT,
    #[error("arithmetic overflow in continued fraction")]
    Overflow,
}

/// The singularity `1/m(1,q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicQuotient {
    m: u64,
    q: u64,
}

impl CyclicQuotient {
    pub fn new(m: u64, q: u64) -> Result<Self, CyclicError> {
        if m < 2 || q < 1 || q >= m || m.gcd(&q) != 1 {
            return Err(CyclicError::InvalidQuotient { m, q });
        }
        Ok(Self { m, q })
    }

    /// `A_k = 1/(k+1)(1,k)`.
    pub fn a(k: u64) -> Result<Self, CyclicError> {
        Self::new(k + 1, k)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// The same singularity with the chain read backwards: `q q' = 1 mod m`.
    pub fn dual(&self) -> Self {
        let q = modinv(self.q, self.m).expect("q is a unit mod m");
        Self { m: self.m, q }
    }
}

impl fmt::Display for CyclicQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}(1,{})", self.m, self.q)
    }
}

/// A chain `[b1, ..., bk]` of rational curves with `C_i^2 = -b_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chain(Vec<u64>);

impl Chain {
    pub fn new(b: Vec<u64>) -> Result<Self, CyclicError> {
        if b.is_empty() || b.iter().any(|&x| x < 2) {
            return Err(CyclicError::InvalidChain(b));
        }
        Ok(Self(b))
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Chain {
        Chain(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|b| format!("-{b}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Class-T recognition result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TClassification {
    /// Rational double point `A_k`.
    RdpA(u64),
    /// `1/n^2(1, na-1)`, i.e. class T with `d = 1`.
    Wahl { n: u64, a: u64 },
    /// `1/(dn^2)(1, dna-1)` with `d >= 2`.
    T { d: u64, n: u64, a: u64 },
    NotT,
}

impl TClassification {
    pub fn is_class_t(&self) -> bool {
        !matches!(self, TClassification::NotT)
    }
}

impl fmt::Display for TClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TClassification::RdpA(k) => write!(f, "A{k}"),
            TClassification::Wahl { n, a } => write!(f, "Wahl({n},{a})"),
            TClassification::T { d, n, a } => write!(f, "T({d},{n},{a})"),
            TClassification::NotT => write!(f, "NotT"),
        }
    }
}

/// Hirzebruch-Jung expansion `m/q = b1 - 1/(b2 - 1/(... - 1/bk))`.
pub fn hj_expand(s: CyclicQuotient) -> Chain {
    let (mut num, mut den) = (s.m, s.q);
    let mut out = Vec::new();
    while den != 0 {
        let b = num.div_ceil(den);
        out.push(b);
        // b*den - num < den, no overflow: b*den < num + den.
        let next = b * den - num;
        num = den;
        den = next;
    }
    Chain(out)
}

/// Inverse of [`hj_expand`].
pub fn chain_to_mq(c: &Chain) -> Result<CyclicQuotient, CyclicError> {
    let (mut num, mut den) = (1u64, 0u64);
    for &b in c.0.iter().rev() {
        let n = b
            .checked_mul(num)
            .and_then(|x| x.checked_sub(den))
            .ok_or(CyclicError::Overflow)?;
        den = num;
        num = n;
    }
    CyclicQuotient::new(num, den)
}

pub fn classify_t(s: CyclicQuotient) -> TClassification {
    let (m, q) = (s.m, s.q);
    if q == m - 1 {
        return TClassification::RdpA(m - 1);
    }
    // m = d n^2 and q + 1 = d n a force n/a = m/(q+1) in lowest terms.
    let g = m.gcd(&(q + 1));
    let (n, a) = (m / g, (q + 1) / g);
    let nn = n.checked_mul(n).filter(|nn| m % nn == 0);
    if let (true, Some(nn)) = (n >= 2 && a < n, nn) {
        let d = m / nn;
        return if d == 1 {
            TClassification::Wahl { n, a }
        } else {
            TClassification::T { d, n, a }
        };
    }
    TClassification::NotT
}

pub fn wahl_chain(n: u64, a: u64) -> Result<Chain, CyclicError> {
    if n < 2 || a == 0 || a >= n || n.gcd(&a) != 1 {
        return Err(CyclicError::InvalidWahl { n, a });
    }
    let m = n.checked_mul(n).ok_or(CyclicError::Overflow)?;
    Ok(hj_expand(CyclicQuotient::new(m, n * a - 1)?))
}

pub fn milnor_number(t: TClassification) -> Result<u64, CyclicError> {
    match t {
        TClassification::RdpA(k) => Ok(k),
        TClassification::Wahl { .. } => Ok(0),
        TClassification::T { d, .. } => Ok(d - 1),
        TClassification::NotT => Err(CyclicError::NotClassT),
    }
}

/// Dimension of the local Q-Gorenstein deformation space.
pub fn local_qg_t1_dim(t: TClassification) -> Result<u64, CyclicError> {
    match t {
        TClassification::RdpA(k) => Ok(k),
        TClassification::Wahl { .. } => Ok(1),
        TClassification::T { d, .. } => Ok(d),
        TClassification::NotT => Err(CyclicError::NotClassT),
    }
}

fn modinv(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u64)
}
