//! Declarative scenario files and the assertion runner.
//!
//! A scenario replays a blow-up script from the plane, names curve
//! configurations, contracts some of them and checks a list of typed
//! assertions. All rationals are written as `"p/q"` strings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blowup::{BlowupError, CurveConfig, SurfaceModel};
use crate::contraction::{
    contract, global_h1_budget, k_squared_via_formula, moduli_dim, nef_ample_check, verify_pullback_display,
    ContractionError, SingularSurface,
};
use crate::cover::{branch_at_nodes, double_cover_invariants, invariant_deformation_dim, make_cover};
use crate::expr::{is_valid_curve_name, ClassExpr, ExprError};
use crate::qlattice::{fmt_rational, parse_rational, BasisLabel, DivisorClass, LatticeError, Rational};

pub const SCHEMA_VERSION: u32 = 1;
/// Name of the model reached after the last script step.
pub const FINAL_STAGE: &str = "final";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("script step {step}: {source}")]
    Script { step: usize, source: BlowupError },
    #[error("invalid curve name {0:?}")]
    InvalidName(String),
    #[error("stage {0:?} defined twice")]
    DuplicateStage(String),
    #[error("{kind} {name:?} defined twice")]
    Duplicate { kind: &'static str, name: String },
    #[error("{context}: unresolved name {name:?}")]
    Unresolved { context: String, name: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("{context}: non-integral curve class {class}")]
    NonIntegral { context: String, class: String },
    #[error("curve {curve:?} at stage {stage:?}: script gives {script}, file gives {given}")]
    ClassMismatch {
        curve: String,
        stage: String,
        script: String,
        given: String,
    },
    #[error("{context}: {message}")]
    BadValue { context: String, message: String },
    #[error("unknown report format {0:?} (expected json or text)")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub script: Script,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub configs: Vec<ConfigDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contractions: Vec<ContractionDef>,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Script {
    #[serde(default)]
    pub plane_curves: Vec<PlaneCurve>,
    #[serde(default)]
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneCurve {
    pub name: String,
    pub degree: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Blowup(BlowupStep),
    Blowdown(String),
    /// Snapshot of the current model under a stage name.
    Mark(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupStep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
    #[serde(default)]
    pub center: Vec<Incidence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Incidence {
    pub curve: String,
    #[serde(default = "one")]
    pub mult: i64,
}

fn one() -> i64 {
    1
}

/// An explicit class. If the script already has the curve at this stage
/// the two must agree; otherwise the curve is added to that stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDef {
    pub name: String,
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDef {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionDef {
    pub name: String,
    pub configs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoverMode {
    #[default]
    Smooth,
    Nodes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimQuantity {
    Moduli,
    H1Budget,
    Invariant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Assertion {
    /// `lhs` and `rhs` are the same class.
    Lineqv {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stage: Option<String>,
        lhs: String,
        rhs: String,
    },
    SelfInts {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stage: Option<String>,
        config: String,
        expected: Vec<i64>,
    },
    /// Contracts one configuration on its own and compares whichever
    /// fields are given.
    ChainSing {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stage: Option<String>,
        config: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chain: Option<Vec<u64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        singularity: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        classification: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coefficients: Option<Vec<String>>,
    },
    /// `K^2` of a stage, or of a contraction by three independent routes.
    K2 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stage: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        contraction: Option<String>,
        expected: String,
    },
    PullbackDisplay { contraction: String, display: String },
    NefList {
        contraction: String,
        curves: Vec<String>,
        #[serde(default)]
        strict: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<String>>,
    },
    /// `expected: null` asserts the class is not divisible.
    Divisibility {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stage: Option<String>,
        class: String,
        by: i64,
        expected: Option<String>,
    },
    CoverInvariants {
        #[serde(default)]
        mode: CoverMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stage: Option<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        branch: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chi_base: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k2_base: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        contraction: Option<String>,
        expected_k2: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expected_chi: Option<String>,
    },
    Dims {
        quantity: DimQuantity,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chi: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k2: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        total: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        contraction: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        branch_count: Option<i64>,
        expected: i64,
    },
}

impl Assertion {
    pub fn kind(&self) -> &'static str {
        match self {
            Assertion::Lineqv { .. } => "lineqv",
            Assertion::SelfInts { .. } => "self_ints",
            Assertion::ChainSing { .. } => "chain_sing",
            Assertion::K2 { .. } => "k2",
            Assertion::PullbackDisplay { .. } => "pullback_display",
            Assertion::NefList { .. } => "nef_list",
            Assertion::Divisibility { .. } => "divisibility",
            Assertion::CoverInvariants { .. } => "cover_invariants",
            Assertion::Dims { .. } => "dims",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: String,
    pub target: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub assertions: Vec<Verdict>,
    pub summary: Summary,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            _ => Err(ScenarioError::UnknownFormat(s.to_string())),
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    prepare(&s)?;
    Ok(s)
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text)
}

pub fn to_json(s: &Scenario) -> String {
    serde_json::to_string_pretty(s).expect("scenario serializes")
}

/// Replayed stages and computed contractions of a validated scenario.
#[derive(Debug, Clone)]
pub struct Prepared {
    stage_order: Vec<String>,
    stages: BTreeMap<String, SurfaceModel>,
    configs: BTreeMap<String, CurveConfig>,
    contractions: BTreeMap<String, Result<SingularSurface, ContractionError>>,
}

impl Prepared {
    pub fn stage_names(&self) -> &[String] {
        &self.stage_order
    }

    pub fn stage(&self, name: &str) -> Option<&SurfaceModel> {
        self.stages.get(name)
    }

    pub fn config(&self, name: &str) -> Option<&CurveConfig> {
        self.configs.get(name)
    }

    pub fn contraction(&self, name: &str) -> Option<&Result<SingularSurface, ContractionError>> {
        self.contractions.get(name)
    }

    pub fn contractions(&self) -> impl Iterator<Item = (&str, &Result<SingularSurface, ContractionError>)> {
        self.contractions.iter().map(|(k, v)| (k.as_str(), v))
    }
}

fn stage_of(stage: &Option<String>) -> &str {
    stage.as_deref().unwrap_or(FINAL_STAGE)
}

fn unresolved(context: impl Into<String>, e: BlowupError) -> ScenarioError {
    let context = context.into();
    match e {
        BlowupError::UnknownCurve(name) => ScenarioError::Unresolved { context, name },
        BlowupError::Lattice(LatticeError::BasisMismatch(l)) => ScenarioError::Unresolved {
            context,
            name: l.to_string(),
        },
        other => ScenarioError::BadValue {
            context,
            message: other.to_string(),
        },
    }
}

fn rational(context: &str, s: &str) -> Result<Rational, ScenarioError> {
    parse_rational(s).map_err(|e| ScenarioError::BadValue {
        context: context.to_string(),
        message: e.to_string(),
    })
}

/// Replays the script and checks that every name resolves.
pub fn prepare(s: &Scenario) -> Result<Prepared, ScenarioError> {
    if s.schema != SCHEMA_VERSION {
        return Err(ScenarioError::Schema(s.schema));
    }
    let mut stage_order = Vec::new();
    let mut stages = BTreeMap::new();
    let mut model = SurfaceModel::plane();
    for pc in &s.script.plane_curves {
        check_name(&pc.name)?;
        model = model
            .with_plane_curve(&pc.name, pc.degree)
            .map_err(|source| ScenarioError::Script { step: 0, source })?;
    }
    for (i, step) in s.script.steps.iter().enumerate() {
        let step_no = i + 1;
        let wrap = |source| ScenarioError::Script { step: step_no, source };
        match step {
            Step::Blowup(b) => {
                let label = match &b.label {
                    Some(l) => Some(l.parse::<BasisLabel>().map_err(|e| ScenarioError::BadValue {
                        context: format!("script step {step_no}"),
                        message: e.to_string(),
                    })?),
                    None => None,
                };
                if let Some(c) = &b.curve {
                    check_name(c)?;
                }
                let center: Vec<(&str, i64)> = b.center.iter().map(|c| (c.curve.as_str(), c.mult)).collect();
                model = model.blow_up(&center, label, b.curve.as_deref()).map_err(wrap)?;
            }
            Step::Blowdown(name) => model = model.blow_down(name).map_err(wrap)?,
            Step::Mark(name) => {
                if name == FINAL_STAGE || stages.contains_key(name) {
                    return Err(ScenarioError::DuplicateStage(name.clone()));
                }
                stage_order.push(name.clone());
                stages.insert(name.clone(), model.clone());
            }
        }
    }
    stage_order.push(FINAL_STAGE.to_string());
    stages.insert(FINAL_STAGE.to_string(), model);

    for cd in &s.curves {
        check_name(&cd.name)?;
        let st = stage_of(&cd.stage);
        let context = format!("curve {}", cd.name);
        let m = stages.get(st).ok_or_else(|| ScenarioError::Unresolved {
            context: context.clone(),
            name: st.to_string(),
        })?;
        let class = m
            .eval(&ClassExpr::parse(&cd.class)?)
            .map_err(|e| unresolved(context.clone(), e))?;
        if !class.is_integral() {
            return Err(ScenarioError::NonIntegral {
                context,
                class: class.to_string(),
            });
        }
        let updated = match m.curve(&cd.name) {
            Ok(existing) if *existing == class => None,
            Ok(existing) => {
                return Err(ScenarioError::ClassMismatch {
                    curve: cd.name.clone(),
                    stage: st.to_string(),
                    script: existing.to_string(),
                    given: class.to_string(),
                })
            }
            Err(_) => Some(m.with_curve(&cd.name, class).map_err(|e| unresolved(context, e))?),
        };
        if let Some(u) = updated {
            stages.insert(st.to_string(), u);
        }
    }

    let mut configs = BTreeMap::new();
    for c in &s.configs {
        if configs.insert(c.name.clone(), CurveConfig::new(&c.name, &c.members)).is_some() {
            return Err(ScenarioError::Duplicate {
                kind: "config",
                name: c.name.clone(),
            });
        }
    }

    let mut p = Prepared {
        stage_order,
        stages,
        configs,
        contractions: BTreeMap::new(),
    };
    for c in &s.contractions {
        let context = format!("contraction {}", c.name);
        let m = p.model(&context, stage_of(&c.stage))?;
        let mut cfgs = Vec::new();
        for name in &c.configs {
            let cfg = p.config_at(&context, name, m)?;
            cfgs.push(cfg.clone());
        }
        let result = contract(m, &cfgs);
        if p.contractions.insert(c.name.clone(), result).is_some() {
            return Err(ScenarioError::Duplicate {
                kind: "contraction",
                name: c.name.clone(),
            });
        }
    }
    for (i, a) in s.assertions.iter().enumerate() {
        p.check_assertion(&format!("assertion {} ({})", i + 1, a.kind()), a)?;
    }
    Ok(p)
}

fn check_name(name: &str) -> Result<(), ScenarioError> {
    if is_valid_curve_name(name) {
        Ok(())
    } else {
        Err(ScenarioError::InvalidName(name.to_string()))
    }
}

impl Prepared {
    fn model(&self, context: &str, stage: &str) -> Result<&SurfaceModel, ScenarioError> {
        self.stages.get(stage).ok_or_else(|| ScenarioError::Unresolved {
            context: context.to_string(),
            name: stage.to_string(),
        })
    }

    fn config_at(&self, context: &str, name: &str, m: &SurfaceModel) -> Result<&CurveConfig, ScenarioError> {
        let cfg = self.configs.get(name).ok_or_else(|| ScenarioError::Unresolved {
            context: context.to_string(),
            name: name.to_string(),
        })?;
        for member in &cfg.members {
            m.curve(member).map_err(|e| unresolved(format!("{context}, config {name}"), e))?;
        }
        Ok(cfg)
    }

    fn contraction_def(&self, context: &str, name: &str) -> Result<(), ScenarioError> {
        if self.contractions.contains_key(name) {
            Ok(())
        } else {
            Err(ScenarioError::Unresolved {
                context: context.to_string(),
                name: name.to_string(),
            })
        }
    }

    fn contraction_model(&self, name: &str) -> &SurfaceModel {
        match &self.contractions[name] {
            Ok(s) => &s.base,
            // A failed contraction still resolves names against the final model.
            Err(_) => &self.stages[FINAL_STAGE],
        }
    }

    fn check_expr(&self, context: &str, m: &SurfaceModel, e: &str) -> Result<DivisorClass, ScenarioError> {
        m.eval(&ClassExpr::parse(e)?).map_err(|err| unresolved(context, err))
    }

    fn check_assertion(&self, ctx: &str, a: &Assertion) -> Result<(), ScenarioError> {
        match a {
            Assertion::Lineqv { stage, lhs, rhs } => {
                let m = self.model(ctx, stage_of(stage))?;
                self.check_expr(ctx, m, lhs)?;
                self.check_expr(ctx, m, rhs)?;
            }
            Assertion::SelfInts { stage, config, .. } => {
                self.config_at(ctx, config, self.model(ctx, stage_of(stage))?)?;
            }
            Assertion::ChainSing {
                stage,
                config,
                coefficients,
                ..
            } => {
                self.config_at(ctx, config, self.model(ctx, stage_of(stage))?)?;
                for c in coefficients.iter().flatten() {
                    rational(ctx, c)?;
                }
            }
            Assertion::K2 {
                stage,
                contraction,
                expected,
            } => {
                rational(ctx, expected)?;
                match contraction {
                    Some(c) => self.contraction_def(ctx, c)?,
                    None => {
                        self.model(ctx, stage_of(stage))?;
                    }
                }
            }
            Assertion::PullbackDisplay { contraction, display } => {
                self.contraction_def(ctx, contraction)?;
                self.check_expr(ctx, self.contraction_model(contraction), display)?;
            }
            Assertion::NefList {
                contraction,
                curves,
                values,
                ..
            } => {
                self.contraction_def(ctx, contraction)?;
                let m = self.contraction_model(contraction);
                for c in curves {
                    m.curve(c).map_err(|e| unresolved(ctx, e))?;
                }
                if let Some(v) = values {
                    if v.len() != curves.len() {
                        return Err(ScenarioError::BadValue {
                            context: ctx.to_string(),
                            message: "values and curves differ in length".into(),
                        });
                    }
                    for x in v {
                        rational(ctx, x)?;
                    }
                }
            }
            Assertion::Divisibility {
                stage,
                class,
                by,
                expected,
            } => {
                if *by < 1 {
                    return Err(ScenarioError::BadValue {
                        context: ctx.to_string(),
                        message: format!("divisor must be positive, got {by}"),
                    });
                }
                let m = self.model(ctx, stage_of(stage))?;
                self.check_expr(ctx, m, class)?;
                if let Some(e) = expected {
                    self.check_expr(ctx, m, e)?;
                }
            }
            Assertion::CoverInvariants {
                mode,
                stage,
                branch,
                chi_base,
                k2_base,
                contraction,
                expected_k2,
                expected_chi,
            } => {
                rational(ctx, expected_k2)?;
                for v in [chi_base, k2_base, expected_chi].into_iter().flatten() {
                    rational(ctx, v)?;
                }
                if let Some(c) = contraction {
                    self.contraction_def(ctx, c)?;
                }
                let need = |what: &str| ScenarioError::BadValue {
                    context: ctx.to_string(),
                    message: format!("{what} is required"),
                };
                match mode {
                    CoverMode::Smooth => {
                        let m = self.model(ctx, stage_of(stage))?;
                        for b in branch {
                            m.curve(b).map_err(|e| unresolved(ctx, e))?;
                        }
                        chi_base.as_ref().ok_or_else(|| need("chi_base"))?;
                        expected_chi.as_ref().ok_or_else(|| need("expected_chi"))?;
                    }
                    CoverMode::Nodes => {
                        if k2_base.is_none() && contraction.is_none() {
                            return Err(need("k2_base or contraction"));
                        }
                    }
                }
            }
            Assertion::Dims {
                quantity,
                chi,
                k2,
                total,
                contraction,
                branch_count,
                ..
            } => {
                let need = |what: &str| ScenarioError::BadValue {
                    context: ctx.to_string(),
                    message: format!("{what} is required"),
                };
                match quantity {
                    DimQuantity::Moduli => {
                        chi.ok_or_else(|| need("chi"))?;
                        k2.ok_or_else(|| need("k2"))?;
                    }
                    DimQuantity::H1Budget => {
                        total.ok_or_else(|| need("total"))?;
                        let c = contraction.as_ref().ok_or_else(|| need("contraction"))?;
                        self.contraction_def(ctx, c)?;
                    }
                    DimQuantity::Invariant => {
                        total.ok_or_else(|| need("total"))?;
                        branch_count.ok_or_else(|| need("branch_count"))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// DOT text for each configuration, drawn on the stage of the first
    /// contraction using it (the final stage otherwise).
    pub fn dot_graphs(&self, s: &Scenario) -> Result<Vec<(String, String)>, ScenarioError> {
        let mut out = Vec::new();
        for c in &s.configs {
            let stage = s
                .contractions
                .iter()
                .find(|k| k.configs.contains(&c.name))
                .map(|k| stage_of(&k.stage))
                .unwrap_or(FINAL_STAGE);
            let m = self.model(&c.name, stage)?;
            let g = m
                .dual_graph(&c.members)
                .map_err(|e| unresolved(format!("config {}", c.name), e))?;
            out.push((c.name.clone(), g.to_dot(&c.name)));
        }
        Ok(out)
    }
}

fn err_text(e: impl std::fmt::Display) -> String {
    format!("error: {e}")
}

fn join_rationals<'a>(v: impl IntoIterator<Item = &'a Rational>) -> String {
    v.into_iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
}

fn verdict(kind: &str, target: String, expected: String, computed: String, pass: bool) -> Verdict {
    Verdict {
        kind: kind.to_string(),
        target,
        expected,
        computed,
        pass,
    }
}

impl Prepared {
    fn surface(&self, name: &str) -> Result<&SingularSurface, String> {
        match &self.contractions[name] {
            Ok(s) => Ok(s),
            Err(e) => Err(err_text(e)),
        }
    }

    fn evaluate(&self, a: &Assertion) -> Verdict {
        let kind = a.kind();
        match a {
            Assertion::Lineqv { stage, lhs, rhs } => {
                let m = &self.stages[stage_of(stage)];
                let l = m.eval(&ClassExpr::parse(lhs).expect("validated"));
                let r = m.eval(&ClassExpr::parse(rhs).expect("validated"));
                match (l, r) {
                    (Ok(l), Ok(r)) => {
                        let pass = l == r;
                        verdict(kind, format!("{lhs} == {rhs}"), r.to_string(), l.to_string(), pass)
                    }
                    (Err(e), _) | (_, Err(e)) => verdict(kind, lhs.clone(), rhs.clone(), err_text(e), false),
                }
            }
            Assertion::SelfInts { stage, config, expected } => {
                let m = &self.stages[stage_of(stage)];
                let want = format!("{expected:?}");
                match m.self_intersections(&self.configs[config]) {
                    Ok(v) => verdict(kind, config.clone(), want, format!("{v:?}"), v == *expected),
                    Err(e) => verdict(kind, config.clone(), want, err_text(e), false),
                }
            }
            Assertion::ChainSing {
                stage,
                config,
                chain,
                singularity,
                classification,
                coefficients,
            } => {
                let m = &self.stages[stage_of(stage)];
                let mut expected = Vec::new();
                if let Some(c) = chain {
                    expected.push(format!("chain {c:?}"));
                }
                if let Some(s) = singularity {
                    expected.push(s.clone());
                }
                if let Some(c) = classification {
                    expected.push(c.clone());
                }
                if let Some(c) = coefficients {
                    let parsed: Vec<Rational> = c.iter().map(|x| parse_rational(x).expect("validated")).collect();
                    expected.push(format!("coefficients [{}]", join_rationals(&parsed)));
                }
                let expected = expected.join("; ");
                let rec = match contract(m, std::slice::from_ref(&self.configs[config])) {
                    Ok(s) => s.records.into_iter().next().expect("one config"),
                    Err(e) => return verdict(kind, config.clone(), expected, err_text(e), false),
                };
                let mut computed = Vec::new();
                let mut pass = true;
                if let Some(c) = chain {
                    pass &= rec.chain.entries() == c.as_slice();
                    computed.push(format!("chain {:?}", rec.chain.entries()));
                }
                if let Some(s) = singularity {
                    let got = rec.sing.to_string();
                    pass &= got == *s;
                    computed.push(got);
                }
                if let Some(c) = classification {
                    let got = rec.classification.to_string();
                    pass &= got == *c;
                    computed.push(got);
                }
                if let Some(c) = coefficients {
                    let want: Vec<Rational> = c.iter().map(|x| parse_rational(x).expect("validated")).collect();
                    pass &= want == rec.pullback_coeffs;
                    computed.push(format!("coefficients [{}]", join_rationals(&rec.pullback_coeffs)));
                }
                verdict(kind, config.clone(), expected, computed.join("; "), pass)
            }
            Assertion::K2 {
                stage,
                contraction,
                expected,
            } => {
                let want = parse_rational(expected).expect("validated");
                match contraction {
                    None => {
                        let st = stage_of(stage);
                        let got = self.stages[st].k_squared();
                        verdict(kind, st.to_string(), fmt_rational(&want), fmt_rational(&got), got == want)
                    }
                    Some(c) => {
                        let s = match self.surface(c) {
                            Ok(s) => s,
                            Err(e) => return verdict(kind, c.clone(), fmt_rational(&want), e, false),
                        };
                        let by_formula = match k_squared_via_formula(s) {
                            Ok(v) => v,
                            Err(e) => return verdict(kind, c.clone(), fmt_rational(&want), err_text(e), false),
                        };
                        let by_pullback = s.k_squared.clone();
                        let by_discrepancy = s.k_squared_via_discrepancies();
                        let agree = by_formula == by_pullback && by_pullback == by_discrepancy;
                        let computed = if agree {
                            fmt_rational(&by_formula)
                        } else {
                            format!(
                                "formula {}, pullback {}, discrepancies {}",
                                fmt_rational(&by_formula),
                                fmt_rational(&by_pullback),
                                fmt_rational(&by_discrepancy)
                            )
                        };
                        verdict(kind, c.clone(), fmt_rational(&want), computed, agree && by_formula == want)
                    }
                }
            }
            Assertion::PullbackDisplay { contraction, display } => {
                let expected = "equal to K + sum a_i C_i, orthogonal to contracted curves, square K^2".to_string();
                let s = match self.surface(contraction) {
                    Ok(s) => s,
                    Err(e) => return verdict(kind, contraction.clone(), expected, e, false),
                };
                let d = s.base.eval(&ClassExpr::parse(display).expect("validated"));
                let check = d
                    .map_err(ContractionError::from)
                    .and_then(|d| verify_pullback_display(s, &d));
                match check {
                    Ok(c) => {
                        let mut computed = format!(
                            "lattice_equal {}, square {}, non-orthogonal [",
                            c.lattice_equal,
                            fmt_rational(&c.square)
                        );
                        let parts: Vec<String> = c
                            .non_orthogonal
                            .iter()
                            .map(|(n, v)| format!("{n}: {}", fmt_rational(v)))
                            .collect();
                        computed.push_str(&parts.join(", "));
                        computed.push(']');
                        verdict(kind, contraction.clone(), expected, computed, c.passed())
                    }
                    Err(e) => verdict(kind, contraction.clone(), expected, err_text(e), false),
                }
            }
            Assertion::NefList {
                contraction,
                curves,
                strict,
                values,
            } => {
                let mut expected = if *strict { "all > 0" } else { "all >= 0" }.to_string();
                let want: Option<Vec<Rational>> = values
                    .as_ref()
                    .map(|v| v.iter().map(|x| parse_rational(x).expect("validated")).collect());
                if let Some(w) = &want {
                    let parts: Vec<String> = curves
                        .iter()
                        .zip(w)
                        .map(|(n, v)| format!("{n}: {}", fmt_rational(v)))
                        .collect();
                    let _ = write!(expected, " [{}]", parts.join(", "));
                }
                let s = match self.surface(contraction) {
                    Ok(s) => s,
                    Err(e) => return verdict(kind, contraction.clone(), expected, e, false),
                };
                match nef_ample_check(s, curves) {
                    Ok(r) => {
                        let mut pass = if *strict { r.positive_on_list() } else { r.nef_on_list() };
                        if let Some(w) = &want {
                            pass &= r.values.iter().map(|(_, v)| v).eq(w.iter());
                        }
                        let parts: Vec<String> = r
                            .values
                            .iter()
                            .map(|(n, v)| format!("{n}: {}", fmt_rational(v)))
                            .collect();
                        let computed = format!("{} [{}]", r.verdict(), parts.join(", "));
                        verdict(kind, contraction.clone(), expected, computed, pass)
                    }
                    Err(e) => verdict(kind, contraction.clone(), expected, err_text(e), false),
                }
            }
            Assertion::Divisibility {
                stage,
                class,
                by,
                expected,
            } => {
                let m = &self.stages[stage_of(stage)];
                let target = format!("({class}) / {by}");
                let want = match expected {
                    Some(e) => match m.eval(&ClassExpr::parse(e).expect("validated")) {
                        Ok(c) => Some(c),
                        Err(err) => return verdict(kind, target, e.clone(), err_text(err), false),
                    },
                    None => None,
                };
                let want_text = want
                    .as_ref()
                    .map(ToString::to_string)
                    .unwrap_or_else(|| "not divisible".into());
                let got = m
                    .eval(&ClassExpr::parse(class).expect("validated"))
                    .map_err(|e| e.to_string())
                    .and_then(|c| m.lattice().divide_class(&c, *by).map_err(|e| e.to_string()));
                match got {
                    Ok(g) => {
                        let text = g
                            .as_ref()
                            .map(ToString::to_string)
                            .unwrap_or_else(|| "not divisible".into());
                        verdict(kind, target, want_text, text, g == want)
                    }
                    Err(e) => verdict(kind, target, want_text, err_text(e), false),
                }
            }
            Assertion::CoverInvariants {
                mode,
                stage,
                branch,
                chi_base,
                k2_base,
                contraction,
                expected_k2,
                expected_chi,
            } => {
                let k2_want = parse_rational(expected_k2).expect("validated");
                let chi_want = expected_chi.as_ref().map(|c| parse_rational(c).expect("validated"));
                let expected = match &chi_want {
                    Some(c) => format!("K^2 {}, chi {}", fmt_rational(&k2_want), fmt_rational(c)),
                    None => format!("K^2 {}", fmt_rational(&k2_want)),
                };
                match mode {
                    CoverMode::Nodes => {
                        let target = contraction.clone().unwrap_or_else(|| "nodes".into());
                        let base = match (k2_base, contraction) {
                            (Some(k), _) => parse_rational(k).expect("validated"),
                            (None, Some(c)) => match self.surface(c) {
                                Ok(s) => s.k_squared.clone(),
                                Err(e) => return verdict(kind, target, expected, e, false),
                            },
                            (None, None) => unreachable!("validated"),
                        };
                        let got = branch_at_nodes(&base);
                        let computed = format!("K^2 {}", fmt_rational(&got));
                        verdict(kind, target, expected, computed, got == k2_want)
                    }
                    CoverMode::Smooth => {
                        let st = stage_of(stage);
                        let m = &self.stages[st];
                        let target = format!("{st}: branch {}", branch.join(" + "));
                        let spec = match make_cover(m, branch) {
                            Ok(s) => s,
                            Err(e) => return verdict(kind, target, expected, err_text(e), false),
                        };
                        let k2 = k2_base
                            .as_ref()
                            .map(|k| parse_rational(k).expect("validated"))
                            .unwrap_or_else(|| m.k_squared());
                        let chi = parse_rational(chi_base.as_ref().expect("validated")).expect("validated");
                        let inv = double_cover_invariants(&k2, &chi, &spec, m.canonical());
                        let computed = format!(
                            "K^2 {}, chi {}",
                            fmt_rational(&inv.k2_cover),
                            fmt_rational(&inv.chi_cover)
                        );
                        let pass = inv.k2_cover == k2_want && Some(&inv.chi_cover) == chi_want.as_ref();
                        verdict(kind, target, expected, computed, pass)
                    }
                }
            }
            Assertion::Dims {
                quantity,
                chi,
                k2,
                total,
                contraction,
                branch_count,
                expected,
            } => {
                let (target, got) = match quantity {
                    DimQuantity::Moduli => {
                        let (c, k) = (chi.expect("validated"), k2.expect("validated"));
                        (format!("moduli_dim({c}, {k})"), Ok(moduli_dim(c, k)))
                    }
                    DimQuantity::H1Budget => {
                        let t = total.expect("validated");
                        let c = contraction.as_ref().expect("validated");
                        let got = self
                            .surface(c)
                            .and_then(|s| global_h1_budget(t, &s.records).map_err(err_text));
                        (format!("global_h1_budget({t}, {c})"), got)
                    }
                    DimQuantity::Invariant => {
                        let (t, b) = (total.expect("validated"), branch_count.expect("validated"));
                        let got = invariant_deformation_dim(t, b).map_err(err_text);
                        (format!("invariant_deformation_dim({t}, {b})"), got)
                    }
                };
                match got {
                    Ok(v) => verdict(kind, target, expected.to_string(), v.to_string(), v == *expected),
                    Err(e) => verdict(kind, target, expected.to_string(), e, false),
                }
            }
        }
    }
}

/// Validates and runs every assertion. Assertion failures are verdicts, not
/// errors; an error means the scenario itself is invalid.
pub fn run_scenario(s: &Scenario) -> Result<Report, ScenarioError> {
    let p = prepare(s)?;
    Ok(run_prepared(s, &p))
}

pub fn run_prepared(s: &Scenario, p: &Prepared) -> Report {
    let assertions: Vec<Verdict> = s.assertions.iter().map(|a| p.evaluate(a)).collect();
    let passed = assertions.iter().filter(|v| v.pass).count();
    Report {
        scenario: s.name.clone(),
        summary: Summary {
            total: assertions.len(),
            passed,
            failed: assertions.len() - passed,
        },
        assertions,
    }
}

pub fn emit_report(r: &Report, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serializes");
            s.push('\n');
            s.into_bytes()
        }
        ReportFormat::Text => {
            let mut s = format!("scenario {}\n", r.scenario);
            for v in &r.assertions {
                let status = if v.pass { "PASS" } else { "FAIL" };
                let _ = writeln!(s, "{status} {:<16} {}", v.kind, v.target);
                if v.pass {
                    let _ = writeln!(s, "     = {}", v.computed);
                } else {
                    let _ = writeln!(s, "     expected {}", v.expected);
                    let _ = writeln!(s, "     computed {}", v.computed);
                }
            }
            let _ = writeln!(s, "{}/{} assertions passed", r.summary.passed, r.summary.total);
            s.into_bytes()
        }
    }
}

/// [`emit_report`] with the format given by name.
pub fn emit_report_named(r: &Report, format: &str) -> Result<Vec<u8>, ScenarioError> {
    Ok(emit_report(r, format.parse()?))
}
