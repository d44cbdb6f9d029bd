//! Python bindings. Rationals cross the boundary as `"p/q"` strings and
//! divisor classes as their text form, e.g. `"3h - e1 - e2"`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use surfcalc::contraction;
use surfcalc::cover;
use surfcalc::cyclic::{self, Chain, CyclicQuotient};
use surfcalc::qlattice::{fmt_rational, parse_rational, BasisLabel};
use surfcalc::scenario::{self as sc, ReportFormat};
use surfcalc::{ClassExpr, CurveConfig};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn quotient(m: u64, q: u64) -> PyResult<CyclicQuotient> {
    CyclicQuotient::new(m, q).map_err(err)
}

#[pyfunction]
fn hj_expand(m: u64, q: u64) -> PyResult<Vec<u64>> {
    Ok(cyclic::hj_expand(quotient(m, q)?).entries().to_vec())
}

#[pyfunction]
fn chain_to_mq(chain: Vec<u64>) -> PyResult<(u64, u64)> {
    let s = Chain::new(chain).and_then(|c| cyclic::chain_to_mq(&c)).map_err(err)?;
    Ok((s.m(), s.q()))
}

#[pyfunction]
fn classify_t(m: u64, q: u64) -> PyResult<String> {
    Ok(cyclic::classify_t(quotient(m, q)?).to_string())
}

#[pyfunction]
fn wahl_chain(n: u64, a: u64) -> PyResult<Vec<u64>> {
    Ok(cyclic::wahl_chain(n, a).map_err(err)?.entries().to_vec())
}

/// `(milnor number, local Q-Gorenstein dimension)` of a class-T point.
#[pyfunction]
fn local_invariants(m: u64, q: u64) -> PyResult<(u64, u64)> {
    let t = cyclic::classify_t(quotient(m, q)?);
    Ok((
        cyclic::milnor_number(t).map_err(err)?,
        cyclic::local_qg_t1_dim(t).map_err(err)?,
    ))
}

#[pyfunction]
fn moduli_dim(chi: i64, k2: i64) -> i64 {
    contraction::moduli_dim(chi, k2)
}

#[pyfunction]
fn invariant_deformation_dim(total: i64, branch_components: i64) -> PyResult<i64> {
    cover::invariant_deformation_dim(total, branch_components).map_err(err)
}

#[pyfunction]
fn branch_at_nodes(k2_base: &str) -> PyResult<String> {
    Ok(fmt_rational(&cover::branch_at_nodes(&parse_rational(k2_base).map_err(err)?)))
}

/// A blown-up plane with named curves.
#[pyclass(name = "Surface", module = "surfcalc", frozen)]
struct PySurface(surfcalc::SurfaceModel);

#[pymethods]
impl PySurface {
    #[new]
    fn new() -> Self {
        Self(surfcalc::SurfaceModel::plane())
    }

    fn with_plane_curve(&self, name: &str, degree: u32) -> PyResult<Self> {
        Ok(Self(self.0.with_plane_curve(name, degree).map_err(err)?))
    }

    fn with_curve(&self, name: &str, class_expr: &str) -> PyResult<Self> {
        let c = self.eval_class(class_expr)?;
        Ok(Self(self.0.with_curve(name, c).map_err(err)?))
    }

    #[pyo3(signature = (center, label=None, name=None))]
    fn blow_up(&self, center: Vec<(String, i64)>, label: Option<&str>, name: Option<&str>) -> PyResult<Self> {
        let label = label.map(str::parse::<BasisLabel>).transpose().map_err(err)?;
        let center: Vec<(&str, i64)> = center.iter().map(|(c, m)| (c.as_str(), *m)).collect();
        Ok(Self(self.0.blow_up(&center, label, name).map_err(err)?))
    }

    fn blow_down(&self, name: &str) -> PyResult<Self> {
        Ok(Self(self.0.blow_down(name).map_err(err)?))
    }

    fn curve(&self, name: &str) -> PyResult<String> {
        Ok(self.0.curve(name).map_err(err)?.to_string())
    }

    fn curve_names(&self) -> Vec<String> {
        self.0.curves().map(|(n, _)| n.to_string()).collect()
    }

    fn canonical(&self) -> String {
        self.0.canonical().to_string()
    }

    fn k_squared(&self) -> String {
        fmt_rational(&self.0.k_squared())
    }

    fn rank(&self) -> usize {
        self.0.lattice().rank()
    }

    /// Intersection number of two class expressions.
    fn intersect(&self, a: &str, b: &str) -> PyResult<String> {
        Ok(fmt_rational(&self.eval_class(a)?.intersect(&self.eval_class(b)?)))
    }

    fn eval(&self, expr: &str) -> PyResult<String> {
        Ok(self.eval_class(expr)?.to_string())
    }

    fn lineqv(&self, lhs: &str, rhs: &str) -> PyResult<bool> {
        Ok(self.eval_class(lhs)? == self.eval_class(rhs)?)
    }

    /// `expr / k` if it is an integral class, else `None`.
    fn divide(&self, expr: &str, k: i64) -> PyResult<Option<String>> {
        let c = self.eval_class(expr)?;
        let d = self.0.lattice().divide_class(&c, k).map_err(err)?;
        Ok(d.map(|x| x.to_string()))
    }

    /// Contracts the given `(name, members)` chains.
    fn contract(&self, configs: Vec<(String, Vec<String>)>) -> PyResult<PySingularSurface> {
        let cfgs: Vec<CurveConfig> = configs.into_iter().map(|(n, m)| CurveConfig::new(n, m)).collect();
        Ok(PySingularSurface(contraction::contract(&self.0, &cfgs).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "Surface(rank={}, K^2={}, curves={})",
            self.0.lattice().rank(),
            fmt_rational(&self.0.k_squared()),
            self.0.curves().count()
        )
    }
}

impl PySurface {
    fn eval_class(&self, expr: &str) -> PyResult<surfcalc::DivisorClass> {
        let e = ClassExpr::parse(expr).map_err(err)?;
        self.0.eval(&e).map_err(err)
    }
}

/// A record of one contracted chain, as plain Python values.
#[pyclass(name = "Singularity", module = "surfcalc", frozen, get_all)]
struct PySingularity {
    name: String,
    members: Vec<String>,
    chain: Vec<u64>,
    m: u64,
    q: u64,
    classification: String,
    coefficients: Vec<String>,
}

#[pymethods]
impl PySingularity {
    fn __repr__(&self) -> String {
        format!("Singularity({}: 1/{}({},{}) {})", self.name, self.m, 1, self.q, self.classification)
    }
}

#[pyclass(name = "SingularSurface", module = "surfcalc", frozen)]
struct PySingularSurface(surfcalc::SingularSurface);

#[pymethods]
impl PySingularSurface {
    fn k_squared(&self) -> String {
        fmt_rational(&self.0.k_squared)
    }

    /// `K^2` from `K_base^2 + sum (s_p - mu_p)`.
    fn k_squared_via_formula(&self) -> PyResult<String> {
        Ok(fmt_rational(&contraction::k_squared_via_formula(&self.0).map_err(err)?))
    }

    fn k_pullback(&self) -> String {
        self.0.k_pullback.to_string()
    }

    fn singularities(&self) -> Vec<PySingularity> {
        self.0
            .records
            .iter()
            .map(|r| PySingularity {
                name: r.config.name.clone(),
                members: r.config.members.clone(),
                chain: r.chain.entries().to_vec(),
                m: r.sing.m(),
                q: r.sing.q(),
                classification: r.classification.to_string(),
                coefficients: r.pullback_coeffs.iter().map(fmt_rational).collect(),
            })
            .collect()
    }

    /// `(curve, K . curve)` for each test curve.
    fn nef_values(&self, curves: Vec<String>) -> PyResult<Vec<(String, String)>> {
        let r = contraction::nef_ample_check(&self.0, &curves).map_err(err)?;
        Ok(r.values.iter().map(|(n, v)| (n.clone(), fmt_rational(v))).collect())
    }

    fn h1_budget(&self, total: i64) -> PyResult<i64> {
        contraction::global_h1_budget(total, &self.0.records).map_err(err)
    }
}

#[pyclass(name = "Report", module = "surfcalc", frozen)]
struct PyReport(sc::Report);

#[pymethods]
impl PyReport {
    #[getter]
    fn scenario(&self) -> String {
        self.0.scenario.clone()
    }

    #[getter]
    fn passed(&self) -> usize {
        self.0.summary.passed
    }

    #[getter]
    fn total(&self) -> usize {
        self.0.summary.total
    }

    fn all_passed(&self) -> bool {
        self.0.all_passed()
    }

    /// `(kind, target, expected, computed, pass)` per assertion.
    fn verdicts(&self) -> Vec<(String, String, String, String, bool)> {
        self.0
            .assertions
            .iter()
            .map(|v| (v.kind.clone(), v.target.clone(), v.expected.clone(), v.computed.clone(), v.pass))
            .collect()
    }

    #[pyo3(signature = (format="text"))]
    fn render(&self, format: &str) -> PyResult<String> {
        let f: ReportFormat = format.parse().map_err(err)?;
        Ok(String::from_utf8_lossy(&sc::emit_report(&self.0, f)).into_owned())
    }
}

#[pyfunction]
fn run_scenario(path: &str) -> PyResult<PyReport> {
    let s = sc::load_scenario(path).map_err(err)?;
    Ok(PyReport(sc::run_scenario(&s).map_err(err)?))
}

#[pymodule]
#[pyo3(name = "surfcalc")]
fn surfcalc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(hj_expand, m)?)?;
    m.add_function(wrap_pyfunction!(chain_to_mq, m)?)?;
    m.add_function(wrap_pyfunction!(classify_t, m)?)?;
    m.add_function(wrap_pyfunction!(wahl_chain, m)?)?;
    m.add_function(wrap_pyfunction!(local_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(moduli_dim, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_deformation_dim, m)?)?;
    m.add_function(wrap_pyfunction!(branch_at_nodes, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_class::<PySurface>()?;
    m.add_class::<PySingularSurface>()?;
    m.add_class::<PySingularity>()?;
    m.add_class::<PyReport>()?;
    Ok(())
}
