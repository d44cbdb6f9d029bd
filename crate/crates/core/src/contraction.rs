//! Numerical contraction of negative-definite chains.
//!
//! Contracting a chain `C_1, ..., C_k` on a smooth surface `Z` gives a cyclic
//! quotient singularity. The pullback of the canonical class of the
//! contracted surface is `K_Z + sum a_i C_i`, where the `a_i` are the unique
//! rationals with `(K_Z + sum a_j C_j) . C_i = 0` for every contracted `C_i`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::blowup::{BlowupError, CurveConfig, SurfaceModel};
use crate::cyclic::{
    chain_to_mq, classify_t, local_qg_t1_dim, milnor_number, Chain, CyclicError, CyclicQuotient,
    TClassification,
};
use crate::linalg;
use crate::qlattice::{int, DivisorClass, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContractionError {
    #[error(transparent)]
    Blowup(#[from] BlowupError),
    #[error(transparent)]
    Cyclic(#[from] CyclicError),
    #[error("configuration {0:?} is empty")]
    EmptyConfig(String),
    #[error("curve {curve:?} appears in both {first:?} and {second:?}")]
    Overlap {
        curve: String,
        first: String,
        second: String,
    },
    #[error("configurations {first:?} and {second:?} meet ({a} . {b} = {value})")]
    Meets {
        first: String,
        second: String,
        a: String,
        b: String,
        value: String,
    },
    #[error("intersection matrix of {0:?} is not negative definite")]
    NotNegativeDefinite(String),
    #[error("{0:?} is a non-cyclic (D/E type) configuration of (-2)-curves; only A-type chains are supported")]
    NonCyclicRdp(String),
    #[error("dual graph of {0:?} is not a linear chain")]
    NotAChain(String),
    #[error("configuration {config:?} is not of class T ({classification})")]
    NotClassT {
        config: String,
        classification: TClassification,
    },
    #[error("curve {0:?} is contracted and cannot be used as a test curve")]
    ContractedTestCurve(String),
    #[error("inconsistent dimension count: {total} available, local terms need {needed}")]
    Inconsistent { total: i64, needed: i64 },
}

/// One contracted chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularityRecord {
    /// Members in chain order.
    pub config: CurveConfig,
    pub chain: Chain,
    pub sing: CyclicQuotient,
    pub classification: TClassification,
    pub s_p: u64,
    /// `None` when the singularity is not of class T.
    pub mu_p: Option<u64>,
    pub pullback_coeffs: Vec<Rational>,
}

impl SingularityRecord {
    /// `0 <= a_i < 1` for every coefficient, and all vanish exactly for a
    /// rational double point.
    pub fn discrepancies_in_range(&self) -> bool {
        let in_range = self
            .pullback_coeffs
            .iter()
            .all(|a| !a.is_negative() && *a < Rational::one());
        let all_zero = self.pullback_coeffs.iter().all(Zero::is_zero);
        in_range && all_zero == matches!(self.classification, TClassification::RdpA(_))
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.config.members.iter().map(String::as_str).zip(&self.pullback_coeffs)
    }
}

/// A smooth model together with the chains it contracts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularSurface {
    pub base: SurfaceModel,
    pub records: Vec<SingularityRecord>,
    pub k_pullback: DivisorClass,
    pub k_squared: Rational,
}

impl SingularSurface {
    pub fn contracted_curves(&self) -> impl Iterator<Item = &str> {
        self.records
            .iter()
            .flat_map(|r| r.config.members.iter().map(String::as_str))
    }

    pub fn is_contracted(&self, name: &str) -> bool {
        self.contracted_curves().any(|c| c == name)
    }

    /// `K_base^2 + sum a_i (K_base . C_i)`.
    pub fn k_squared_via_discrepancies(&self) -> Rational {
        let k = self.base.canonical();
        let mut acc = k.square();
        for r in &self.records {
            for (name, a) in r.coefficients() {
                let c = self.base.curve(name).expect("validated on contraction");
                acc += a * k.intersect(c);
            }
        }
        acc
    }
}

pub fn contract(s: &SurfaceModel, configs: &[CurveConfig]) -> Result<SingularSurface, ContractionError> {
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for cfg in configs {
        if cfg.members.is_empty() {
            return Err(ContractionError::EmptyConfig(cfg.name.clone()));
        }
        for m in &cfg.members {
            s.curve(m)?;
            if let Some(first) = owner.insert(m, &cfg.name) {
                return Err(ContractionError::Overlap {
                    curve: m.clone(),
                    first: first.to_string(),
                    second: cfg.name.clone(),
                });
            }
        }
    }
    for (i, ci) in configs.iter().enumerate() {
        for cj in &configs[i + 1..] {
            for a in &ci.members {
                for b in &cj.members {
                    let v = s.intersect_curves(a, b)?;
                    if !v.is_zero() {
                        return Err(ContractionError::Meets {
                            first: ci.name.clone(),
                            second: cj.name.clone(),
                            a: a.clone(),
                            b: b.clone(),
                            value: v.to_string(),
                        });
                    }
                }
            }
        }
    }

    let mut records = Vec::with_capacity(configs.len());
    let mut k_pullback = s.canonical().clone();
    for cfg in configs {
        let rec = contract_chain(s, cfg)?;
        for (name, a) in rec.coefficients() {
            k_pullback = &k_pullback + &s.curve(name)?.scale(a);
        }
        records.push(rec);
    }
    let k_squared = k_pullback.square();
    Ok(SingularSurface {
        base: s.clone(),
        records,
        k_pullback,
        k_squared,
    })
}

fn contract_chain(s: &SurfaceModel, cfg: &CurveConfig) -> Result<SingularityRecord, ContractionError> {
    let classes: Vec<&DivisorClass> = cfg.members.iter().map(|m| s.curve(m)).collect::<Result<_, _>>()?;
    let gram: Vec<Vec<Rational>> = classes
        .iter()
        .map(|a| classes.iter().map(|b| a.intersect(b)).collect())
        .collect();
    if !linalg::is_negative_definite(&gram) {
        return Err(ContractionError::NotNegativeDefinite(cfg.name.clone()));
    }
    let graph = s.dual_graph(&cfg.members)?;
    let Some(order) = graph.path_order() else {
        let all_minus_two = graph.nodes.iter().all(|(_, w)| *w == -2);
        let tree = graph.edges.len() + 1 == graph.nodes.len() && graph.edges.iter().all(|e| e.2 == 1);
        return Err(if all_minus_two && tree {
            ContractionError::NonCyclicRdp(cfg.name.clone())
        } else {
            ContractionError::NotAChain(cfg.name.clone())
        });
    };
    let members: Vec<String> = order.iter().map(|&i| cfg.members[i].clone()).collect();
    let chain = Chain::new(order.iter().map(|&i| (-graph.nodes[i].1) as u64).collect())?;
    let sing = chain_to_mq(&chain)?;
    let classification = classify_t(sing);
    let mu_p = milnor_number(classification).ok();

    let ordered: Vec<&DivisorClass> = order.iter().map(|&i| classes[i]).collect();
    let matrix: Vec<Vec<Rational>> = ordered
        .iter()
        .map(|a| ordered.iter().map(|b| a.intersect(b)).collect())
        .collect();
    let rhs: Vec<Rational> = ordered.iter().map(|c| -s.canonical().intersect(c)).collect();
    let pullback_coeffs = linalg::solve(&matrix, &rhs).expect("negative definite matrices are invertible");

    Ok(SingularityRecord {
        config: CurveConfig {
            name: cfg.name.clone(),
            members,
        },
        s_p: chain.len() as u64,
        chain,
        sing,
        classification,
        mu_p,
        pullback_coeffs,
    })
}

/// `K_base^2 + sum (s_p - mu_p)`; every singularity must be of class T.
pub fn k_squared_via_formula(s: &SingularSurface) -> Result<Rational, ContractionError> {
    let mut acc = s.base.k_squared();
    for r in &s.records {
        let mu = r.mu_p.ok_or_else(|| ContractionError::NotClassT {
            config: r.config.name.clone(),
            classification: r.classification,
        })?;
        acc += int(r.s_p as i64 - mu as i64);
    }
    Ok(acc)
}

/// Outcome of comparing a printed expression for the canonical pullback with
/// the computed one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisplayCheck {
    pub lattice_equal: bool,
    /// Contracted curves with nonzero intersection against the display.
    pub non_orthogonal: Vec<(String, Rational)>,
    pub square: Rational,
    pub square_matches: bool,
}

impl DisplayCheck {
    pub fn passed(&self) -> bool {
        self.lattice_equal && self.non_orthogonal.is_empty() && self.square_matches
    }
}

pub fn verify_pullback_display(s: &SingularSurface, display: &DivisorClass) -> Result<DisplayCheck, ContractionError> {
    s.base.lattice().check(display).map_err(BlowupError::from)?;
    let mut non_orthogonal = Vec::new();
    for name in s.contracted_curves() {
        let v = display.intersect(s.base.curve(name)?);
        if !v.is_zero() {
            non_orthogonal.push((name.to_string(), v));
        }
    }
    let square = display.square();
    Ok(DisplayCheck {
        lattice_equal: *display == s.k_pullback,
        non_orthogonal,
        square_matches: square == s.k_squared,
        square,
    })
}

/// Values of the canonical pullback against a list of curves. Positivity on
/// the list is all this certifies; excluding other curves `G` with
/// `G . K = 0` needs a geometric argument and is recorded as an assumption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NefReport {
    pub values: Vec<(String, Rational)>,
}

impl NefReport {
    pub fn nef_on_list(&self) -> bool {
        self.values.iter().all(|(_, v)| !v.is_negative())
    }

    pub fn positive_on_list(&self) -> bool {
        self.values.iter().all(|(_, v)| v.is_positive())
    }

    pub fn verdict(&self) -> &'static str {
        if self.positive_on_list() {
            "positive on list"
        } else if self.nef_on_list() {
            "nef on list"
        } else {
            "not nef"
        }
    }

    pub const MANUAL_ASSUMPTION: &'static str =
        "no curve outside the list has zero intersection with the canonical pullback (geometric argument, not computed)";
}

pub fn nef_ample_check(s: &SingularSurface, test_curves: &[String]) -> Result<NefReport, ContractionError> {
    let mut values = Vec::with_capacity(test_curves.len());
    for name in test_curves {
        if s.is_contracted(name) {
            return Err(ContractionError::ContractedTestCurve(name.clone()));
        }
        values.push((name.clone(), s.k_pullback.intersect(s.base.curve(name)?)));
    }
    Ok(NefReport { values })
}

/// `h^1(T) - h^2(T) = 10 chi - 2 K^2` for a surface of general type.
pub fn moduli_dim(chi: i64, k2: i64) -> i64 {
    10 * chi - 2 * k2
}

/// `total_dim - sum local_qg_t1_dim`.
pub fn global_h1_budget(total_dim: i64, records: &[SingularityRecord]) -> Result<i64, ContractionError> {
    let mut needed = 0i64;
    for r in records {
        let d = local_qg_t1_dim(r.classification).map_err(|_| ContractionError::NotClassT {
            config: r.config.name.clone(),
            classification: r.classification,
        })?;
        needed += d as i64;
    }
    let left = total_dim - needed;
    if total_dim < 0 || left < 0 {
        return Err(ContractionError::Inconsistent { total: total_dim, needed });
    }
    Ok(left)
}
