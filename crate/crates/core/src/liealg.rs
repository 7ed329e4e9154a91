//! Four-dimensional metric Lie algebras given by structure constants on an
//! orthonormal, oriented frame `e1..e4`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior4::{wedge, Bivector, Endo4, Form, Vector4, GRADE_DIMS};
use crate::linalg::Matrix;
use crate::scalar::{ParseScalarError, Rational, Scalar, Tolerance};

#[derive(Debug, Error)]
pub enum LieAlgebraError {
    #[error("bracket pair ({0}, {1}) must satisfy 1 <= i < j <= 4")]
    InvalidPair(usize, usize),
    #[error("bracket pair ({0}, {1}) given twice")]
    DuplicatePair(usize, usize),
    #[error("bracket ({i}, {j}) must have 4 components, got {len}")]
    WrongLength { i: usize, j: usize, len: usize },
    #[error("bad scalar in bracket ({i}, {j}): {source}")]
    Scalar { i: usize, j: usize, source: ParseScalarError },
    #[error("bad parameter `{name}`: {source}")]
    Parameter { name: String, source: ParseScalarError },
    #[error("invalid JSON input: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown scalars backend `{0}` (expected `rational` or `float`)")]
    Backend(String),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("matrix is not an orthogonal almost complex structure: {0}")]
    NotComplexStructure(&'static str),
}

/// A Lie algebra with an inner product, stored by its brackets on an orthonormal frame.
#[derive(Clone, PartialEq)]
pub struct MetricLieAlgebra<S: Scalar> {
    label: String,
    params: Vec<(String, S)>,
    // brackets[i][j] = [e_i, e_j], antisymmetric
    brackets: [[Vector4<S>; 4]; 4],
}

impl<S: Scalar> fmt::Debug for MetricLieAlgebra<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetricLieAlgebra({}", self.label)?;
        for (i, j, v) in self.nonzero_brackets() {
            write!(f, ", [e{},e{}]={:?}", i + 1, j + 1, v)?;
        }
        write!(f, ")")
    }
}

/// One failed Jacobi triple (1-based labels) with its defect vector.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiViolation<S: Scalar> {
    pub triple: (usize, usize, usize),
    pub defect: Vector4<S>,
}

impl<S: Scalar> fmt::Display for JacobiViolation<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j, k) = self.triple;
        write!(f, "Jacobi fails on (e{i}, e{j}, e{k}): defect {:?}", self.defect)
    }
}

impl<S: Scalar> MetricLieAlgebra<S> {
    /// Builds an algebra from brackets `[e_i, e_j] = v` with 1-based `i < j`. Omitted pairs are zero.
    pub fn new(
        label: impl Into<String>,
        params: Vec<(String, S)>,
        brackets: Vec<(usize, usize, Vector4<S>)>,
    ) -> Result<Self, LieAlgebraError> {
        let mut table: [[Vector4<S>; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| Vector4::zero()));
        let mut seen = [[false; 4]; 4];
        for (i, j, v) in brackets {
            if !(1 <= i && i < j && j <= 4) {
                return Err(LieAlgebraError::InvalidPair(i, j));
            }
            let (a, b) = (i - 1, j - 1);
            if seen[a][b] {
                return Err(LieAlgebraError::DuplicatePair(i, j));
            }
            seen[a][b] = true;
            table[b][a] = v.scale(&-S::one());
            table[a][b] = v;
        }
        Ok(MetricLieAlgebra { label: label.into(), params, brackets: table })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> &[(String, S)] {
        &self.params
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `[e_i, e_j]` for 0-based frame indices.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &Vector4<S> {
        &self.brackets[i][j]
    }

    /// Structure constant `c_ij^k = <[e_i, e_j], e_k>` (0-based).
    pub fn structure_const(&self, i: usize, j: usize, k: usize) -> S {
        self.brackets[i][j].0[k].clone()
    }

    pub fn bracket(&self, x: &Vector4<S>, y: &Vector4<S>) -> Vector4<S> {
        let mut out = Vector4::zero();
        for i in 0..4 {
            if x.0[i].is_exact_zero() {
                continue;
            }
            for j in 0..4 {
                if i == j || y.0[j].is_exact_zero() {
                    continue;
                }
                out = out.add(&self.brackets[i][j].scale(&(x.0[i].clone() * y.0[j].clone())));
            }
        }
        out
    }

    /// Nonzero brackets `(i, j, [e_i, e_j])` with 0-based `i < j`.
    pub fn nonzero_brackets(&self) -> Vec<(usize, usize, Vector4<S>)> {
        let mut out = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                if !self.brackets[i][j].is_exact_zero() {
                    out.push((i, j, self.brackets[i][j].clone()));
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.brackets.iter().flatten().flat_map(|v| v.0.iter()).map(Scalar::abs_f64).fold(0.0, f64::max)
    }

    /// Checks the Jacobi identity on every frame triple; an empty list means valid.
    pub fn validate(&self, tol: &Tolerance) -> Vec<JacobiViolation<S>> {
        let scale = self.max_abs().powi(2);
        let mut out = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                for k in j + 1..4 {
                    let (ei, ej, ek) = (Vector4::basis(i), Vector4::basis(j), Vector4::basis(k));
                    let defect = self
                        .bracket(&self.bracket(&ei, &ej), &ek)
                        .add(&self.bracket(&self.bracket(&ej, &ek), &ei))
                        .add(&self.bracket(&self.bracket(&ek, &ei), &ej));
                    if !tol.all_zero(defect.0.iter(), scale) {
                        out.push(JacobiViolation { triple: (i + 1, j + 1, k + 1), defect });
                    }
                }
            }
        }
        out
    }

    /// Chevalley–Eilenberg differential of a left-invariant form.
    ///
    /// `dα(X0..Xk) = Σ_{a<b} (-1)^{a+b} α([Xa,Xb], X0..^a..^b..Xk)`; a 4-form maps to zero.
    pub fn ce_d(&self, alpha: &Form<S>) -> Form<S> {
        let k = alpha.grade();
        if k == 4 {
            return Form::zero(4);
        }
        let blades = frame_blades(k + 1);
        let comps = blades
            .iter()
            .map(|idx| {
                let mut acc = S::zero();
                for a in 0..idx.len() {
                    for b in a + 1..idx.len() {
                        let br = &self.brackets[idx[a]][idx[b]];
                        let rest: Vec<usize> =
                            idx.iter().enumerate().filter(|&(p, _)| p != a && p != b).map(|(_, &v)| v).collect();
                        let sign = if (a + b) % 2 == 0 { S::one() } else { -S::one() };
                        for m in 0..4 {
                            if br.0[m].is_exact_zero() {
                                continue;
                            }
                            let mut args = vec![m];
                            args.extend_from_slice(&rest);
                            let val = alpha.eval_on_frame(&args);
                            if !val.is_exact_zero() {
                                acc = acc + sign.clone() * br.0[m].clone() * val;
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        Form::new(k + 1, comps).expect("grade in range")
    }

    /// Nijenhuis tensor values `N(e_i, e_j)` for all frame pairs.
    pub fn nijenhuis(&self, j: &AlmostComplexStructure<S>) -> NijenhuisTensor<S> {
        let jm = j.matrix();
        let values = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let x = Vector4::basis(a);
                let y = Vector4::basis(b);
                let jx = Vector4::apply(jm, &x);
                let jy = Vector4::apply(jm, &y);
                let t1 = self.bracket(&jx, &jy);
                let t2 = Vector4::apply(jm, &self.bracket(&jx, &y));
                let t3 = Vector4::apply(jm, &self.bracket(&x, &jy));
                let t4 = self.bracket(&x, &y);
                t1.sub(&t2).sub(&t3).sub(&t4)
            })
        });
        NijenhuisTensor { values }
    }

    /// Integrability, fundamental form and Lee form of `j`.
    pub fn lck_check(&self, j: &AlmostComplexStructure<S>, tol: &Tolerance) -> LckReport<S> {
        let omega = j.fundamental_form();
        let d_omega = self.ce_d(&omega.to_form());
        let scale = self.max_abs();
        let integrable = self.nijenhuis(j).is_zero(tol, scale * scale);
        if !integrable {
            return LckReport {
                integrable,
                fundamental_form: omega,
                d_omega,
                lee_form: None,
                lee_closed: false,
                is_lck: false,
                is_kahler: false,
            };
        }
        // θ ↦ θ∧Ω is invertible Λ¹ → Λ³ for nondegenerate Ω
        let cols: Vec<Vec<S>> =
            (0..4).map(|m| wedge(&Vector4::basis(m).to_form(), &omega.to_form()).comps().to_vec()).collect();
        let lefschetz = Matrix::from_columns(&cols);
        let lee = lefschetz.solve(d_omega.comps(), tol).map(|v| Vector4::from_slice(&v));
        let lee_closed = lee
            .as_ref()
            .is_some_and(|t| self.ce_d(&t.to_form()).is_zero_tol(tol, scale * t.0.iter().map(Scalar::abs_f64).fold(0.0, f64::max)));
        let is_kahler = d_omega.is_zero_tol(tol, scale);
        LckReport {
            integrable,
            fundamental_form: omega,
            d_omega,
            lee_form: lee,
            lee_closed,
            is_lck: lee_closed,
            is_kahler,
        }
    }

    /// Same algebra in the rotated orthonormal frame `e'_i = Σ_k rot[k][i] e_k`.
    pub fn rotated(&self, rot: &Matrix<S>) -> Self {
        let rt = rot.transpose();
        let mut brackets = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                let ei = Vector4::from_slice(&rot.column(i));
                let ej = Vector4::from_slice(&rot.column(j));
                let v = Vector4::from_slice(&rt.mul_vec(&self.bracket(&ei, &ej).0));
                brackets.push((i + 1, j + 1, v));
            }
        }
        MetricLieAlgebra::new(format!("{} (rotated)", self.label), self.params.clone(), brackets)
            .expect("pairs are in range")
    }

    /// Converts to another backend.
    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MetricLieAlgebra<T> {
        MetricLieAlgebra {
            label: self.label.clone(),
            params: self.params.iter().map(|(n, v)| (n.clone(), f(v))).collect(),
            brackets: std::array::from_fn(|i| {
                std::array::from_fn(|j| Vector4(std::array::from_fn(|k| f(&self.brackets[i][j].0[k]))))
            }),
        }
    }
}

/// All increasing index tuples of length `k` (0-based), in blade order.
pub fn frame_blades(k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u8..16)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..4).filter(|i| m & (1 << i) != 0).collect())
        .collect();
    out.sort();
    debug_assert_eq!(out.len(), GRADE_DIMS[k]);
    out
}

/// Values of the Nijenhuis tensor on frame pairs (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct NijenhuisTensor<S: Scalar> {
    pub values: [[Vector4<S>; 4]; 4],
}

impl<S: Scalar> NijenhuisTensor<S> {
    pub fn is_zero(&self, tol: &Tolerance, scale: f64) -> bool {
        self.values.iter().flatten().all(|v| tol.all_zero(v.0.iter(), scale))
    }
}

/// Orthogonal almost complex structure `J` (`J² = -Id`, `JᵀJ = Id`).
#[derive(Debug, Clone, PartialEq)]
pub struct AlmostComplexStructure<S: Scalar> {
    j: Endo4<S>,
}

impl<S: Scalar> AlmostComplexStructure<S> {
    pub fn new(j: Endo4<S>, tol: &Tolerance) -> Result<Self, LieAlgebraError> {
        if j.rows() != 4 || j.cols() != 4 {
            return Err(LieAlgebraError::NotComplexStructure("not 4x4"));
        }
        let id = Matrix::identity(4);
        if !(&j.matmul(&j) + &id).is_zero_tol(tol, 1.0) {
            return Err(LieAlgebraError::NotComplexStructure("J^2 != -Id"));
        }
        if !(&j.transpose().matmul(&j) - &id).is_zero_tol(tol, 1.0) {
            return Err(LieAlgebraError::NotComplexStructure("J is not orthogonal"));
        }
        Ok(AlmostComplexStructure { j })
    }

    /// The structure whose fundamental form `<J·,·>` is `omega`.
    pub fn from_fundamental_form(omega: &Bivector<S>, tol: &Tolerance) -> Result<Self, LieAlgebraError> {
        Self::new(omega.to_endo(), tol)
    }

    /// `J e1 = e4`, `J e2 = ε e3` (fundamental form `e14 + ε e23`).
    pub fn j_eps(eps: i64) -> Self {
        let mut omega = Bivector::zero();
        omega.0[2] = S::one();
        omega.0[3] = S::from_i64(eps.signum());
        AlmostComplexStructure { j: omega.to_endo() }
    }

    pub fn matrix(&self) -> &Endo4<S> {
        &self.j
    }

    /// `Ω(X, Y) = <JX, Y>`.
    pub fn fundamental_form(&self) -> Bivector<S> {
        Bivector::from_endo(&self.j)
    }

    /// The 12 structures with `J e1 ∈ {±e2, ±e3, ±e4}` completed orthogonally on the remaining plane.
    pub fn frame_candidates() -> Vec<Self> {
        let mut out = Vec::new();
        for partner in 1..4 {
            let rest: Vec<usize> = (1..4).filter(|&k| k != partner).collect();
            for s1 in [1i64, -1] {
                for s2 in [1i64, -1] {
                    let mut m = Matrix::zeros(4, 4);
                    m[(partner, 0)] = S::from_i64(s1);
                    m[(0, partner)] = S::from_i64(-s1);
                    m[(rest[1], rest[0])] = S::from_i64(s2);
                    m[(rest[0], rest[1])] = S::from_i64(-s2);
                    out.push(AlmostComplexStructure { j: m });
                }
            }
        }
        out
    }
}

/// Outcome of [`MetricLieAlgebra::lck_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct LckReport<S: Scalar> {
    pub integrable: bool,
    pub fundamental_form: Bivector<S>,
    pub d_omega: Form<S>,
    /// Solution of `dΩ = θ∧Ω`, when integrable.
    pub lee_form: Option<Vector4<S>>,
    pub lee_closed: bool,
    pub is_lck: bool,
    pub is_kahler: bool,
}

// ---------------------------------------------------------------------------
// Families

fn v4<S: Scalar>(c: [S; 4]) -> Vector4<S> {
    Vector4(c)
}

fn p<S: Scalar>(name: &str, v: &S) -> (String, S) {
    (name.to_string(), v.clone())
}

/// Abelian `R^4`.
pub fn abelian<S: Scalar>() -> MetricLieAlgebra<S> {
    MetricLieAlgebra::new("abelian", vec![], vec![]).expect("valid")
}

/// `R × su(2)`: `e1` central, `[e2,e3] = c e4`, `[e3,e4] = c e2`, `[e4,e2] = c e3`.
pub fn type2<S: Scalar>(c: S) -> Result<MetricLieAlgebra<S>, LieAlgebraError> {
    if c.is_exact_zero() {
        return Err(LieAlgebraError::Range("type2 requires c != 0".into()));
    }
    let z = S::zero;
    Ok(MetricLieAlgebra::new(
        format!("type2(c={c})"),
        vec![p("c", &c)],
        vec![
            (2, 3, v4([z(), z(), z(), c.clone()])),
            (3, 4, v4([z(), c.clone(), z(), z()])),
            (2, 4, v4([z(), z(), -c.clone(), z()])),
        ],
    )
    .expect("valid"))
}

/// `R e0 ⋉ R^3` with `B = I + α J`, frame `(e0,e1,e2,e3) → (e1,e2,e3,e4)`.
pub fn type3<S: Scalar>(alpha: S) -> Result<MetricLieAlgebra<S>, LieAlgebraError> {
    if alpha.to_f64() < 0.0 {
        return Err(LieAlgebraError::Range("type3 requires alpha >= 0".into()));
    }
    let (z, o) = (S::zero, S::one);
    Ok(MetricLieAlgebra::new(
        format!("type3(alpha={alpha})"),
        vec![p("alpha", &alpha)],
        vec![
            (1, 2, v4([z(), o(), alpha.clone(), z()])),
            (1, 3, v4([z(), -alpha.clone(), o(), z()])),
            (1, 4, v4([z(), z(), z(), o()])),
        ],
    )
    .expect("valid"))
}

/// `R^2 ⋉ R^2`, frame `(e1,e2,f1,f2) → (e1,e2,e3,e4)`.
pub fn type4<S: Scalar>(a: S, b: S) -> MetricLieAlgebra<S> {
    let (z, o) = (S::zero, S::one);
    MetricLieAlgebra::new(
        format!("type4(a={a}, b={b})"),
        vec![p("a", &a), p("b", &b)],
        vec![
            (1, 3, v4([z(), z(), o(), a.clone()])),
            (1, 4, v4([z(), z(), -a.clone(), o()])),
            (2, 3, v4([z(), z(), z(), b.clone()])),
            (2, 4, v4([z(), z(), -b.clone(), z()])),
        ],
    )
    .expect("valid")
}

/// The flat algebra `R × e(2)`, frame `(e0,e1,e2,e3) → (e1,e2,e3,e4)`.
pub fn type6<S: Scalar>() -> MetricLieAlgebra<S> {
    let (z, o) = (S::zero, S::one);
    MetricLieAlgebra::new(
        "type6",
        vec![],
        vec![(2, 3, v4([z(), z(), z(), o()])), (2, 4, v4([z(), z(), -o(), z()]))],
    )
    .expect("valid")
}

/// The family `g(a, b)`.
pub fn gab<S: Scalar>(a: S, b: S) -> MetricLieAlgebra<S> {
    let (z, o) = (S::zero, S::one);
    let two_a = a.clone() + a.clone();
    MetricLieAlgebra::new(
        format!("gab(a={a}, b={b})"),
        vec![p("a", &a), p("b", &b)],
        vec![
            (1, 2, v4([z(), a.clone(), -b.clone(), z()])),
            (1, 3, v4([z(), b.clone(), a.clone(), z()])),
            (1, 4, v4([z(), z(), z(), two_a])),
            (2, 3, v4([z(), z(), z(), -o()])),
        ],
    )
    .expect("valid")
}

// ---------------------------------------------------------------------------
// JSON ingestion

/// Requested scalar backend of a JSON input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    #[default]
    Rational,
    Float,
}

/// One bracket entry `[e_i, e_j] = v` of the input schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub v: Vec<String>,
}

/// The JSON input schema: `{ "label", "scalars", "brackets": [{ "i", "j", "v" }] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraInput {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub scalars: ScalarKind,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
}

impl AlgebraInput {
    pub fn from_json(text: &str) -> Result<Self, LieAlgebraError> {
        Ok(serde_json::from_str(text)?)
    }

    /// True when every component parses exactly as a rational.
    pub fn is_rational(&self) -> bool {
        self.brackets.iter().flat_map(|b| &b.v).all(|s| crate::scalar::try_exact(s).is_some())
    }

    pub fn build<S: Scalar>(&self) -> Result<MetricLieAlgebra<S>, LieAlgebraError> {
        let mut brackets = Vec::new();
        for b in &self.brackets {
            if b.v.len() != 4 {
                return Err(LieAlgebraError::WrongLength { i: b.i, j: b.j, len: b.v.len() });
            }
            let mut comps = Vec::with_capacity(4);
            for s in &b.v {
                comps.push(S::parse_literal(s).map_err(|source| LieAlgebraError::Scalar { i: b.i, j: b.j, source })?);
            }
            brackets.push((b.i, b.j, Vector4::from_slice(&comps)));
        }
        let label = if self.label.is_empty() { "user".to_string() } else { self.label.clone() };
        MetricLieAlgebra::new(label, vec![], brackets)
    }

    pub fn from_algebra(mla: &MetricLieAlgebra<Rational>) -> Self {
        AlgebraInput {
            label: mla.label().to_string(),
            scalars: ScalarKind::Rational,
            brackets: mla
                .nonzero_brackets()
                .into_iter()
                .map(|(i, j, v)| BracketEntry { i: i + 1, j: j + 1, v: v.0.iter().map(|x| x.to_string()).collect() })
                .collect(),
        }
    }
}
