//! Reports and the three CLI commands: `analyze`, `sweep`, `selftest`.

use std::fmt::Write as _;
use std::str::FromStr;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::GeometryFlags;
use crate::exterior4::Side;
use crate::identities::{run_identity_suite, IdentityOutcome, SuiteOptions};
use crate::killing::{build_killing_connection, classify_theorem_main, Classification, KillingError, BUNDLE_ORDERING};
use crate::liealg::{abelian, gab, type2, type3, type4, type6, AlgebraInput, LieAlgebraError, MetricLieAlgebra, ScalarKind};
use crate::linalg::Matrix;
use crate::scalar::{parse_rational, try_exact, Rational, Scalar, Tolerance};

/// Failure classes with distinct exit statuses.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

/// Exit status when a float rank decision was close to the tolerance.
pub const EXIT_CONFIDENCE: i32 = 4;

impl From<LieAlgebraError> for CliError {
    fn from(e: LieAlgebraError) -> Self {
        match e {
            LieAlgebraError::Range(_) => CliError::Validation(e.to_string()),
            other => CliError::Parse(other.to_string()),
        }
    }
}

impl From<KillingError> for CliError {
    fn from(e: KillingError) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Abelian,
    Type2,
    Type3,
    Type4,
    Type6,
    Gab,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::Abelian, Family::Type2, Family::Type3, Family::Type4, Family::Type6, Family::Gab];

    pub fn name(self) -> &'static str {
        match self {
            Family::Abelian => "abelian",
            Family::Type2 => "type2",
            Family::Type3 => "type3",
            Family::Type4 => "type4",
            Family::Type6 => "type6",
            Family::Gab => "gab",
        }
    }

    /// Parameter names in the order they are read.
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            Family::Abelian | Family::Type6 => &[],
            Family::Type2 => &["c"],
            Family::Type3 => &["alpha"],
            Family::Type4 | Family::Gab => &["a", "b"],
        }
    }
}

impl FromStr for Family {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| CliError::Parse(format!("unknown family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendChoice {
    /// Exact when every input is rational.
    #[default]
    Auto,
    Rational,
    Float,
}

impl FromStr for BackendChoice {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "auto" => Ok(BackendChoice::Auto),
            "rational" => Ok(BackendChoice::Rational),
            "float" => Ok(BackendChoice::Float),
            _ => Err(CliError::Parse(format!("unknown backend `{s}`"))),
        }
    }
}

/// A family member with parameter literals, e.g. `gab` with `a = "1/2"`, `b = "1"`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub params: Vec<(String, String)>,
}

impl FamilySpec {
    pub fn new(family: Family, params: &[(&str, &str)]) -> Self {
        FamilySpec { family, params: params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() }
    }

    fn literal(&self, name: &str) -> Result<&str, CliError> {
        self.params
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| CliError::Parse(format!("family {} needs --{name}", self.family.name())))
    }

    fn is_rational(&self) -> bool {
        self.family.parameters().iter().all(|p| self.literal(p).is_ok_and(|v| try_exact(v).is_some()))
    }

    pub fn build<S: Scalar>(&self) -> Result<MetricLieAlgebra<S>, CliError> {
        let get = |name: &str| -> Result<S, CliError> {
            let lit = self.literal(name)?;
            S::parse_literal(lit).map_err(|e| CliError::Parse(format!("--{name}: {e}")))
        };
        Ok(match self.family {
            Family::Abelian => abelian(),
            Family::Type2 => type2(get("c")?)?,
            Family::Type3 => type3(get("alpha")?)?,
            Family::Type4 => type4(get("a")?, get("b")?),
            Family::Type6 => type6(),
            Family::Gab => gab(get("a")?, get("b")?),
        })
    }
}

/// Where an algebra comes from.
#[derive(Debug, Clone)]
pub enum AlgebraSource {
    Family(FamilySpec),
    Json(AlgebraInput),
}

impl AlgebraSource {
    pub fn from_json_text(text: &str) -> Result<Self, CliError> {
        Ok(AlgebraSource::Json(AlgebraInput::from_json(text)?))
    }

    pub fn is_rational(&self) -> bool {
        match self {
            AlgebraSource::Family(f) => f.is_rational(),
            AlgebraSource::Json(j) => j.scalars == ScalarKind::Rational && j.is_rational(),
        }
    }

    pub fn build<S: Scalar>(&self) -> Result<MetricLieAlgebra<S>, CliError> {
        match self {
            AlgebraSource::Family(f) => f.build(),
            AlgebraSource::Json(j) => Ok(j.build()?),
        }
    }

    /// Resolves `Auto` and rejects exact requests on inexact input.
    pub fn backend(&self, choice: BackendChoice) -> Result<&'static str, CliError> {
        match (choice, self.is_rational()) {
            (BackendChoice::Float, _) | (BackendChoice::Auto, false) => Ok(f64::BACKEND),
            (_, true) => Ok(Rational::BACKEND),
            (BackendChoice::Rational, false) => {
                Err(CliError::Parse("rational backend requested but some input is not a rational literal".into()))
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub backend: BackendChoice,
    pub tol: Tolerance,
    /// Include the Killing connection matrices.
    pub matrices: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: String,
}

/// One Weyl block with its exact characteristic polynomial and approximate spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylBlock {
    pub matrix: Vec<Vec<String>>,
    pub is_zero: bool,
    /// `[c0, c1, c2]` with `det(t - W) = t³ + c2 t² + c1 t + c0`, for the block in side coordinates.
    pub char_poly: [String; 3],
    /// Eigenvalues, ascending.
    pub eigenvalues_approx: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomySummary {
    pub parallel_dim: usize,
    pub algebra_dim: usize,
    pub iterations: usize,
    pub invariant_subspace_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CkDimsReport {
    pub plus: usize,
    pub minus: usize,
    /// Descending pair, independent of orientation.
    pub unordered: [usize; 2],
    pub weyl_zero_sides: Vec<Side>,
    pub holonomy_plus: HolonomySummary,
    pub holonomy_minus: HolonomySummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LckEntry {
    pub j: Vec<Vec<String>>,
    pub omega_side: Option<Side>,
    pub lee_form: Option<[String; 4]>,
    pub is_kahler: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillingMatrices {
    pub plus: Vec<Vec<Vec<String>>>,
    pub minus: Vec<Vec<Vec<String>>>,
}

/// Machine-readable result of `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub label: String,
    pub backend: String,
    pub parameters: Vec<NamedValue>,
    pub flags: GeometryFlags,
    pub scalar_curvature: String,
    pub weyl_plus: WeylBlock,
    pub weyl_minus: WeylBlock,
    pub ck_dims: CkDimsReport,
    pub theorem_case: Option<u8>,
    pub lck: Vec<LckEntry>,
    pub prop_sd_holds: bool,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    pub bundle_ordering: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub killing_matrices: Option<KillingMatrices>,
}

impl ClassificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn has_confidence_warning(&self) -> bool {
        !self.warnings.is_empty()
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "## {}\n", self.label);
        let _ = writeln!(s, "| quantity | value |\n|---|---|");
        let _ = writeln!(s, "| backend | {} |", self.backend);
        for p in &self.parameters {
            let _ = writeln!(s, "| {} | {} |", p.name, p.value);
        }
        let _ = writeln!(s, "| S | {} |", self.scalar_curvature);
        let f = &self.flags;
        let _ = writeln!(
            s,
            "| flat / Einstein / conf. flat | {} / {} / {} |",
            f.is_flat, f.is_einstein, f.is_conf_flat
        );
        let _ = writeln!(s, "| W+ = 0 / W- = 0 | {} / {} |", f.is_half_cf_plus, f.is_half_cf_minus);
        let _ = writeln!(s, "| W+ char poly [c0,c1,c2] | {} |", self.weyl_plus.char_poly.join(", "));
        let _ = writeln!(s, "| W- char poly [c0,c1,c2] | {} |", self.weyl_minus.char_poly.join(", "));
        let _ = writeln!(s, "| dim CK+ / CK- | {} / {} |", self.ck_dims.plus, self.ck_dims.minus);
        let case = self.theorem_case.map_or("none".to_string(), |c| c.to_string());
        let _ = writeln!(s, "| case | {case} |");
        let _ = writeln!(s, "| lcK structures found | {} |", self.lck.len());
        let _ = writeln!(s, "| dim >= 2 only where Weyl = 0 | {} |", self.prop_sd_holds);
        for n in self.notes.iter().chain(&self.warnings) {
            let _ = writeln!(s, "\n- {n}");
        }
        s
    }
}

fn render_matrix<S: Scalar>(m: &Matrix<S>) -> Vec<Vec<String>> {
    (0..m.rows()).map(|r| m.row(r).iter().map(ToString::to_string).collect()).collect()
}

fn det3<S: Scalar>(m: &Matrix<S>) -> S {
    let a = |r: usize, c: usize| m[(r, c)].clone();
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

fn char_poly3<S: Scalar>(m: &Matrix<S>) -> [S; 3] {
    let a = |r: usize, c: usize| m[(r, c)].clone();
    let minors = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0) + a(1, 1) * a(2, 2)
        - a(1, 2) * a(2, 1);
    [-det3(m), minors, -m.trace()]
}

/// Eigenvalues of a symmetric 3×3 matrix (trigonometric form), ascending.
pub fn symmetric_eigenvalues3(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let mut out = if p1 == 0.0 {
        [m[0][0], m[1][1], m[2][2]]
    } else {
        let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b: [[f64; 3]; 3] =
            std::array::from_fn(|r| std::array::from_fn(|c| (m[r][c] - if r == c { q } else { 0.0 }) / p));
        let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [e1, 3.0 * q - e1 - e3, e3]
    };
    out.sort_by(f64::total_cmp);
    // normalise -0.0 so output is stable
    out.map(|x| if x == 0.0 { 0.0 } else { x })
}

fn weyl_block<S: Scalar>(m: &Matrix<S>, is_zero: bool) -> WeylBlock {
    let f: [[f64; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)].to_f64()));
    WeylBlock {
        matrix: render_matrix(m),
        is_zero,
        char_poly: char_poly3(m).map(|x| x.to_string()),
        eigenvalues_approx: symmetric_eigenvalues3(&f),
    }
}

fn holonomy_summary<S: Scalar>(h: &crate::killing::HolonomyResult<S>) -> HolonomySummary {
    HolonomySummary {
        parallel_dim: h.parallel_dim,
        algebra_dim: h.algebra_dim,
        iterations: h.iterations,
        invariant_subspace_dim: h.invariant_dim,
    }
}

fn build_report<S: Scalar>(
    mla: &MetricLieAlgebra<S>,
    cls: &Classification<S>,
    opts: &AnalyzeOptions,
) -> ClassificationReport {
    let cd = &cls.curvature;
    let fl = cls.flags;
    let (plus, minus) = cls.ck.dims();
    let mut warnings = Vec::new();
    if cls.ck.marginal() {
        warnings.push(format!(
            "rank decision within 10x of the tolerance {:e}; dimensions may be unreliable",
            opts.tol.rel
        ));
    }
    let killing_matrices = opts.matrices.then(|| {
        let render = |side| {
            build_killing_connection(mla, cd, side).gamma.iter().map(render_matrix).collect::<Vec<_>>()
        };
        KillingMatrices { plus: render(Side::Plus), minus: render(Side::Minus) }
    });
    ClassificationReport {
        label: mla.label().to_string(),
        backend: S::BACKEND.to_string(),
        parameters: mla.params().iter().map(|(n, v)| NamedValue { name: n.clone(), value: v.to_string() }).collect(),
        flags: fl,
        scalar_curvature: cd.scalar.to_string(),
        weyl_plus: weyl_block(&cd.w_plus, fl.is_half_cf_plus),
        weyl_minus: weyl_block(&cd.w_minus, fl.is_half_cf_minus),
        ck_dims: CkDimsReport {
            plus,
            minus,
            unordered: cls.ck.unordered(),
            weyl_zero_sides: Side::both().into_iter().filter(|&s| fl.half_cf(s)).collect(),
            holonomy_plus: holonomy_summary(&cls.ck.plus),
            holonomy_minus: holonomy_summary(&cls.ck.minus),
        },
        theorem_case: cls.case.map(|c| c.number()),
        lck: cls
            .lck
            .iter()
            .map(|e| LckEntry {
                j: render_matrix(e.j.matrix()),
                omega_side: e.omega_side,
                lee_form: e.report.lee_form.as_ref().map(|t| t.0.clone().map(|x| x.to_string())),
                is_kahler: e.report.is_kahler,
            })
            .collect(),
        prop_sd_holds: cls.prop_sd_holds,
        notes: cls.notes.clone(),
        warnings,
        bundle_ordering: BUNDLE_ORDERING.to_string(),
        killing_matrices,
    }
}

fn analyze_with<S: Scalar>(source: &AlgebraSource, opts: &AnalyzeOptions) -> Result<ClassificationReport, CliError> {
    let mla = source.build::<S>()?;
    let violations = mla.validate(&opts.tol);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(CliError::Validation(list.join("; ")));
    }
    let cls = classify_theorem_main(&mla, &opts.tol)?;
    Ok(build_report(&mla, &cls, opts))
}

/// Runs the full pipeline on one algebra.
pub fn cmd_analyze(source: &AlgebraSource, opts: &AnalyzeOptions) -> Result<ClassificationReport, CliError> {
    if source.backend(opts.backend)? == Rational::BACKEND {
        analyze_with::<Rational>(source, opts)
    } else {
        analyze_with::<f64>(source, opts)
    }
}

/// Parses a grid axis: `v1,v2,...` or `lo:step:hi` with rational entries; empty means no values.
pub fn parse_axis(spec: &str) -> Result<Vec<String>, CliError> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(vec![]);
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.len() {
        1 => Ok(spec.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()),
        3 => {
            let q = |s: &str| parse_rational(s).map_err(|e| CliError::Parse(format!("grid `{spec}`: {e}")));
            let (lo, step, hi) = (q(parts[0])?, q(parts[1])?, q(parts[2])?);
            if step <= <Rational as Zero>::zero() {
                return Err(CliError::Parse(format!("grid `{spec}`: step must be positive")));
            }
            let mut out = Vec::new();
            let mut x = lo;
            while x <= hi {
                out.push(x.to_string());
                x = x + step.clone();
            }
            Ok(out)
        }
        _ => Err(CliError::Parse(format!("grid `{spec}`: expected a list or lo:step:hi"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub parameters: Vec<NamedValue>,
    pub flags: Option<GeometryFlags>,
    pub ck_dims: Option<[usize; 2]>,
    pub weyl_zero_sides: Vec<Side>,
    pub theorem_case: Option<u8>,
    pub prop_sd_holds: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub family: String,
    pub parameter_names: Vec<String>,
    pub rows: Vec<SweepRow>,
    /// Rows where a side of dimension ≥ 2 has a nonzero Weyl block.
    pub prop_sd_violations: usize,
    pub warnings: Vec<String>,
}

impl SweepTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let mut header = vec!["#".to_string()];
        header.extend(self.parameter_names.iter().cloned());
        header.extend(["W+=0", "W-=0", "Einstein", "dim CK+", "dim CK-", "case"].map(String::from));
        let _ = writeln!(s, "| {} |", header.join(" | "));
        let _ = writeln!(s, "|{}", "---|".repeat(header.len()));
        for r in &self.rows {
            let mut cells = vec![r.index.to_string()];
            cells.extend(r.parameters.iter().map(|p| p.value.clone()));
            match (&r.flags, &r.ck_dims, &r.error) {
                (Some(f), Some(d), None) => {
                    cells.extend([
                        f.is_half_cf_plus.to_string(),
                        f.is_half_cf_minus.to_string(),
                        f.is_einstein.to_string(),
                        d[0].to_string(),
                        d[1].to_string(),
                        r.theorem_case.map_or("none".into(), |c| c.to_string()),
                    ]);
                }
                _ => cells.push(format!("error: {}", r.error.clone().unwrap_or_default())),
            }
            let _ = writeln!(s, "| {} |", cells.join(" | "));
        }
        let verdict = if self.prop_sd_violations == 0 { "holds" } else { "VIOLATED" };
        let _ = writeln!(
            s,
            "\ndim >= 2 only on Weyl-flat sides: {verdict} ({} violation(s) over {} row(s))",
            self.prop_sd_violations,
            self.rows.len()
        );
        for w in &self.warnings {
            let _ = writeln!(s, "- {w}");
        }
        s
    }
}

/// Runs `analyze` over the Cartesian product of parameter axes.
pub fn cmd_sweep(family: Family, axes: &[(String, Vec<String>)], opts: &AnalyzeOptions) -> SweepTable {
    let mut grid: Vec<Vec<(String, String)>> = vec![vec![]];
    for (name, values) in axes {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push((name.clone(), v.clone()));
                    p
                })
            })
            .collect();
    }
    if axes.iter().any(|(_, v)| v.is_empty()) {
        grid.clear();
    }
    let rows: Vec<(SweepRow, bool)> = grid
        .into_par_iter()
        .enumerate()
        .map(|(index, params)| {
            let parameters = params.iter().map(|(n, v)| NamedValue { name: n.clone(), value: v.clone() }).collect();
            let spec = FamilySpec { family, params };
            match cmd_analyze(&AlgebraSource::Family(spec), opts) {
                Ok(r) => {
                    let warn = r.has_confidence_warning();
                    let row = SweepRow {
                        index,
                        parameters,
                        flags: Some(r.flags),
                        ck_dims: Some([r.ck_dims.plus, r.ck_dims.minus]),
                        weyl_zero_sides: r.ck_dims.weyl_zero_sides,
                        theorem_case: r.theorem_case,
                        prop_sd_holds: Some(r.prop_sd_holds),
                        error: None,
                    };
                    (row, warn)
                }
                Err(e) => {
                    let row = SweepRow {
                        index,
                        parameters,
                        flags: None,
                        ck_dims: None,
                        weyl_zero_sides: vec![],
                        theorem_case: None,
                        prop_sd_holds: None,
                        error: Some(e.to_string()),
                    };
                    (row, false)
                }
            }
        })
        .collect();
    let mut warnings = Vec::new();
    for (row, warn) in &rows {
        if *warn {
            warnings.push(format!("row {}: rank decision close to tolerance", row.index));
        }
    }
    let rows: Vec<SweepRow> = rows.into_iter().map(|(r, _)| r).collect();
    let prop_sd_violations = rows.iter().filter(|r| r.prop_sd_holds == Some(false)).count();
    SweepTable {
        family: family.name().to_string(),
        parameter_names: axes.iter().map(|(n, _)| n.clone()).collect(),
        rows,
        prop_sd_violations,
        warnings,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestSummary {
    pub backend: String,
    pub outcomes: Vec<IdentityOutcome>,
    pub notes: Vec<String>,
}

impl SelftestSummary {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(IdentityOutcome::passed)
    }

    pub fn failed_names(&self) -> Vec<&'static str> {
        self.outcomes.iter().filter(|o| !o.passed()).map(|o| o.name).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for o in &self.outcomes {
            let verdict = if o.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(
                s,
                "{verdict} {:<24} trials={:<4} failures={:<4} max_residual={:e}",
                o.name, o.trials, o.failures, o.max_residual
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "{}", if self.passed() { "selftest passed" } else { "selftest FAILED" });
        s
    }
}

/// Runs the identity suites. `Auto` uses the exact backend.
pub fn cmd_selftest(backend: BackendChoice, suite: &SuiteOptions, tol: &Tolerance) -> SelftestSummary {
    let mut notes = Vec::new();
    let outcomes = if backend == BackendChoice::Float {
        notes.push("inputs are rational; the exact backend is preferred and used by default".to_string());
        run_identity_suite::<f64>(suite, tol)
    } else {
        run_identity_suite::<Rational>(suite, tol)
    };
    if suite.flip_ricci_term {
        notes.push("sign of the trace-free Ricci term was flipped on purpose".to_string());
    }
    let backend = if backend == BackendChoice::Float { f64::BACKEND } else { Rational::BACKEND };
    SelftestSummary { backend: backend.to_string(), outcomes, notes }
}



#[cfg(test)]
mod tests {
    use super::*;

    fn gab_spec(a: &str, b: &str) -> AlgebraSource {
        AlgebraSource::Family(FamilySpec::new(Family::Gab, &[("a", a), ("b", b)]))
    }

    #[test]
    fn analyze_complex_hyperbolic() {
        let r = cmd_analyze(&gab_spec("1/2", "1"), &AnalyzeOptions::default()).unwrap();
        assert_eq!(r.theorem_case, Some(2));
        assert_eq!(r.ck_dims.unordered, [8, 1]);
        assert_eq!(r.backend, "rational");
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn report_round_trips_and_is_deterministic() {
        let opts = AnalyzeOptions { matrices: true, ..Default::default() };
        let r = cmd_analyze(&gab_spec("2", "1"), &opts).unwrap();
        let text = r.to_json();
        assert_eq!(ClassificationReport::from_json(&text).unwrap(), r);
        assert_eq!(cmd_analyze(&gab_spec("2", "1"), &opts).unwrap().to_json(), text);
        let f = cmd_analyze(&gab_spec("2", "1"), &AnalyzeOptions { backend: BackendChoice::Float, ..opts }).unwrap();
        assert_eq!(ClassificationReport::from_json(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn float_input_selects_float_backend() {
        let src = gab_spec("2e0", "1");
        assert_eq!(src.backend(BackendChoice::Auto).unwrap(), "float");
        assert!(src.backend(BackendChoice::Rational).is_err());
        let r = cmd_analyze(&src, &AnalyzeOptions::default()).unwrap();
        assert_eq!(r.ck_dims.unordered, [1, 1]);
    }

    #[test]
    fn missing_parameter_is_a_parse_error() {
        let src = AlgebraSource::Family(FamilySpec::new(Family::Gab, &[("a", "1")]));
        assert_eq!(cmd_analyze(&src, &AnalyzeOptions::default()).unwrap_err().exit_code(), 2);
        let src = AlgebraSource::Family(FamilySpec::new(Family::Type2, &[("c", "0")]));
        assert_eq!(cmd_analyze(&src, &AnalyzeOptions::default()).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn axis_parsing() {
        assert_eq!(parse_axis("-1, 0,1/2").unwrap(), vec!["-1", "0", "1/2"]);
        assert_eq!(parse_axis("0:1/2:3/2").unwrap(), vec!["0", "1/2", "1", "3/2"]);
        assert!(parse_axis("").unwrap().is_empty());
        assert!(parse_axis("0:0:1").is_err());
    }

    #[test]
    fn sweep_orders_rows_and_handles_empty_grid() {
        let axes = vec![("alpha".to_string(), vec!["0".into(), "1".into(), "3/2".into()])];
        let t = cmd_sweep(Family::Type3, &axes, &AnalyzeOptions::default());
        assert_eq!(t.rows.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(t.rows.iter().all(|r| r.theorem_case == Some(1)));
        assert_eq!(t.prop_sd_violations, 0);
        let empty = cmd_sweep(Family::Gab, &[("a".into(), vec![]), ("b".into(), vec!["0".into()])], &AnalyzeOptions::default());
        assert!(empty.rows.is_empty());
        assert!(empty.to_markdown().contains("0 row(s)"));
    }

    #[test]
    fn eigenvalues_of_diagonal_and_rank_one() {
        assert_eq!(symmetric_eigenvalues3(&[[2.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]), [-1.0, -1.0, 2.0]);
        let e = symmetric_eigenvalues3(&[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]]);
        assert!((e[0]).abs() < 1e-7 && (e[1]).abs() < 1e-7 && (e[2] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn selftest_detects_injected_flip() {
        let suite = SuiteOptions { trials: 8, ..Default::default() };
        assert!(cmd_selftest(BackendChoice::Auto, &suite, &Tolerance::default()).passed());
        let bad = SuiteOptions { flip_ricci_term: true, ..suite };
        let s = cmd_selftest(BackendChoice::Auto, &bad, &Tolerance::default());
        assert_eq!(s.failed_names(), vec!["curvature-decomposition"]);
        let f = cmd_selftest(BackendChoice::Float, &suite, &Tolerance::default());
        assert!(f.passed() && !f.notes.is_empty());
    }
}
