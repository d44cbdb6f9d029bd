//! Surfaces as iterated blow-ups of the projective plane.
//!
//! A [`SurfaceModel`] keeps the lattice basis, the canonical class and a table
//! of named curves. Curves keep their names across blow-ups; a blow-up with
//! centre `[(C, m), ...]` replaces every listed class `C` by `C - m e_new`.
//! Infinitely near points are handled by putting a previous exceptional curve
//! into the centre.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::{ClassExpr, Symbol};
use crate::qlattice::{int, to_i64, BasisLabel, DivisorClass, Lattice, LatticeError, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlowupError {
    #[error("unknown curve {0:?}")]
    UnknownCurve(String),
    #[error("multiplicity of {curve:?} in blow-up centre must be positive, got {mult}")]
    BadMultiplicity { curve: String, mult: i64 },
    #[error("curve {0:?} already exists")]
    DuplicateCurve(String),
    #[error("curve {0:?} listed twice in one blow-up centre")]
    RepeatedCentre(String),
    #[error("curve {name:?} cannot be blown down: its class {class} is not a single exceptional label")]
    NotContractible { name: String, class: String },
    #[error("curve {name:?} has non-integral class {class}")]
    NonIntegralCurve { name: String, class: String },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// One blow-up step: the fresh label and the curves through the centre.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowUpRecord {
    pub new_label: BasisLabel,
    pub curve_name: String,
    pub center: Vec<(String, u32)>,
}

/// An ordered list of curve names (a candidate chain or any configuration).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveConfig {
    pub name: String,
    pub members: Vec<String>,
}

impl CurveConfig {
    pub fn new<S: Into<String>>(name: impl Into<String>, members: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            members: members.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceModel {
    lattice: Lattice,
    canonical: DivisorClass,
    curves: BTreeMap<String, DivisorClass>,
    blowup_log: Vec<BlowUpRecord>,
    blown_down: Vec<(String, BasisLabel)>,
    next_index: u32,
}

impl Default for SurfaceModel {
    fn default() -> Self {
        Self::plane()
    }
}

impl SurfaceModel {
    /// The projective plane: basis `[h]`, `K = -3h`, no curves.
    pub fn plane() -> Self {
        Self {
            lattice: Lattice::plane(),
            canonical: DivisorClass::from_ints([(BasisLabel::H, -3)]),
            curves: BTreeMap::new(),
            blowup_log: Vec::new(),
            blown_down: Vec::new(),
            next_index: 1,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn canonical(&self) -> &DivisorClass {
        &self.canonical
    }

    pub fn k_squared(&self) -> Rational {
        self.canonical.square()
    }

    pub fn blowup_log(&self) -> &[BlowUpRecord] {
        &self.blowup_log
    }

    pub fn curves(&self) -> impl Iterator<Item = (&str, &DivisorClass)> {
        self.curves.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn has_curve(&self, name: &str) -> bool {
        self.curves.contains_key(name)
    }

    pub fn curve(&self, name: &str) -> Result<&DivisorClass, BlowupError> {
        self.curves
            .get(name)
            .ok_or_else(|| BlowupError::UnknownCurve(name.to_string()))
    }

    /// Adds a plane curve of the given degree (class `degree * h`). Only
    /// meaningful before the first blow-up.
    pub fn with_plane_curve(&self, name: &str, degree: u32) -> Result<Self, BlowupError> {
        self.with_curve(name, DivisorClass::from_ints([(BasisLabel::H, i64::from(degree))]))
    }

    /// Adds a curve with an explicit integral class.
    pub fn with_curve(&self, name: &str, class: DivisorClass) -> Result<Self, BlowupError> {
        if self.curves.contains_key(name) {
            return Err(BlowupError::DuplicateCurve(name.to_string()));
        }
        self.lattice.check(&class)?;
        if !class.is_integral() {
            return Err(BlowupError::NonIntegralCurve {
                name: name.to_string(),
                class: class.to_string(),
            });
        }
        let mut out = self.clone();
        out.curves.insert(name.to_string(), class);
        Ok(out)
    }

    /// The label the next blow-up will use when none is given.
    pub fn next_label(&self) -> BasisLabel {
        BasisLabel::E(self.next_index)
    }

    /// Blows up a point lying on the listed curves with the given
    /// multiplicities. An empty centre is a general point. The exceptional
    /// curve is named `curve_name`, or `exc_<label>` when not given.
    pub fn blow_up(
        &self,
        center: &[(&str, i64)],
        label: Option<BasisLabel>,
        curve_name: Option<&str>,
    ) -> Result<Self, BlowupError> {
        let label = label.unwrap_or_else(|| self.next_label());
        if label == BasisLabel::H {
            return Err(LatticeError::DuplicateLabel(label).into());
        }
        let name = curve_name
            .map(str::to_string)
            .unwrap_or_else(|| format!("exc_{label}"));
        if self.curves.contains_key(&name) {
            return Err(BlowupError::DuplicateCurve(name));
        }
        let mut seen = Vec::new();
        for (c, m) in center {
            if !self.curves.contains_key(*c) {
                return Err(BlowupError::UnknownCurve(c.to_string()));
            }
            if *m < 1 {
                return Err(BlowupError::BadMultiplicity {
                    curve: c.to_string(),
                    mult: *m,
                });
            }
            if seen.contains(c) {
                return Err(BlowupError::RepeatedCentre(c.to_string()));
            }
            seen.push(*c);
        }

        let mut out = self.clone();
        out.lattice.push(label)?;
        let e = DivisorClass::basis(label);
        for (c, m) in center {
            let cls = out.curves.get_mut(*c).expect("checked above");
            *cls = &*cls - &e.scale(&int(*m));
        }
        out.canonical = &out.canonical + &e;
        out.curves.insert(name.clone(), e);
        if let BasisLabel::E(k) = label {
            out.next_index = out.next_index.max(k + 1);
        }
        out.blowup_log.push(BlowUpRecord {
            new_label: label,
            curve_name: name,
            center: center.iter().map(|(c, m)| (c.to_string(), *m as u32)).collect(),
        });
        Ok(out)
    }

    /// Blows down a (-1)-curve whose class is a bare exceptional label `e_k`
    /// (the last blow-up of its tower). Every other class is pushed forward
    /// by dropping its `e_k` coordinate.
    pub fn blow_down(&self, name: &str) -> Result<Self, BlowupError> {
        let class = self.curve(name)?;
        let mut coords = class.coords();
        let label = match (coords.next(), coords.next()) {
            (Some((l @ BasisLabel::E(_), v)), None) if v.is_one() => *l,
            _ => {
                return Err(BlowupError::NotContractible {
                    name: name.to_string(),
                    class: class.to_string(),
                })
            }
        };
        let mut out = self.clone();
        out.curves.remove(name);
        for cls in out.curves.values_mut() {
            *cls = cls.without(label);
        }
        out.canonical = out.canonical.without(label);
        out.lattice.remove(label);
        out.blown_down.push((name.to_string(), label));
        Ok(out)
    }

    /// Evaluates a formal expression in this model.
    pub fn eval(&self, e: &ClassExpr) -> Result<DivisorClass, BlowupError> {
        let mut acc = DivisorClass::zero();
        for (coef, sym) in &e.terms {
            let cls = match sym {
                Symbol::Canonical => self.canonical.clone(),
                Symbol::Basis(l) => {
                    if !self.lattice.contains(*l) {
                        return Err(LatticeError::BasisMismatch(*l).into());
                    }
                    DivisorClass::basis(*l)
                }
                Symbol::Curve(c) => self.curve(c)?.clone(),
            };
            acc = &acc + &cls.scale(coef);
        }
        Ok(acc)
    }

    pub fn intersect_curves(&self, a: &str, b: &str) -> Result<Rational, BlowupError> {
        Ok(self.curve(a)?.intersect(self.curve(b)?))
    }

    pub fn self_intersection(&self, name: &str) -> Result<i64, BlowupError> {
        let v = self.curve(name)?.square();
        Ok(to_i64(&v).expect("curve classes are integral"))
    }

    /// `C.C` for each member, in order.
    pub fn self_intersections(&self, config: &CurveConfig) -> Result<Vec<i64>, BlowupError> {
        config.members.iter().map(|m| self.self_intersection(m)).collect()
    }

    /// `K.C` for a named curve.
    pub fn canonical_degree(&self, name: &str) -> Result<Rational, BlowupError> {
        Ok(self.canonical.intersect(self.curve(name)?))
    }

    /// Arithmetic genus `1 + (C.C + K.C)/2`; zero for smooth rational curves.
    pub fn arithmetic_genus(&self, name: &str) -> Result<Rational, BlowupError> {
        let c = self.curve(name)?;
        Ok(Rational::one() + (c.square() + self.canonical.intersect(c)) / int(2))
    }

    /// Whether the formal sum `lhs` equals the class `rhs` in the lattice.
    pub fn verify_lineqv(&self, lhs: &ClassExpr, rhs: &DivisorClass) -> Result<bool, BlowupError> {
        let l = self.eval(lhs)?;
        Ok(self.lattice.is_equal(&l, rhs)?)
    }

    pub fn dual_graph(&self, names: &[String]) -> Result<DualGraph, BlowupError> {
        let classes: Vec<&DivisorClass> = names.iter().map(|n| self.curve(n)).collect::<Result<_, _>>()?;
        let nodes = names
            .iter()
            .zip(&classes)
            .map(|(n, c)| (n.clone(), to_i64(&c.square()).expect("integral")))
            .collect();
        let mut edges = Vec::new();
        for i in 0..classes.len() {
            for j in i + 1..classes.len() {
                let w = classes[i].intersect(classes[j]);
                if !w.is_zero() {
                    edges.push((i, j, to_i64(&w).expect("integral")));
                }
            }
        }
        Ok(DualGraph { nodes, edges })
    }
}

/// Weighted dual graph: node weights are self-intersections, edge weights are
/// intersection numbers (zero edges omitted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGraph {
    pub nodes: Vec<(String, i64)>,
    pub edges: Vec<(usize, usize, i64)>,
}

impl DualGraph {
    fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|(a, b, _)| *a == v || *b == v).count()
    }

    /// When the graph is a path with unit edges, returns its vertices in path
    /// order, starting from the endpoint with the smaller index.
    pub fn path_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        if n == 0 {
            return None;
        }
        if n == 1 {
            return Some(vec![0]);
        }
        if self.edges.len() != n - 1 || self.edges.iter().any(|(_, _, w)| *w != 1) {
            return None;
        }
        if (0..n).any(|v| self.degree(v) > 2) {
            return None;
        }
        let start = (0..n).find(|&v| self.degree(v) == 1)?;
        let mut order = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while order.len() < n {
            let next = self.edges.iter().find_map(|(a, b, _)| {
                if *a == cur && *b != prev {
                    Some(*b)
                } else if *b == cur && *a != prev {
                    Some(*a)
                } else {
                    None
                }
            })?;
            prev = cur;
            cur = next;
            order.push(cur);
        }
        Some(order)
    }

    /// DOT text: node label `"name (self-int)"`, edge label only when the
    /// intersection number exceeds one.
    pub fn to_dot(&self, graph_name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph \"{}\" {{", escape(graph_name));
        for (name, w) in &self.nodes {
            let n = escape(name);
            let _ = writeln!(out, "  \"{n}\" [label=\"{n} ({w})\"];");
        }
        for (a, b, w) in &self.edges {
            let (na, nb) = (escape(&self.nodes[*a].0), escape(&self.nodes[*b].0));
            if *w > 1 {
                let _ = writeln!(out, "  \"{na}\" -- \"{nb}\" [label=\"{w}\"];");
            } else {
                let _ = writeln!(out, "  \"{na}\" -- \"{nb}\";");
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
