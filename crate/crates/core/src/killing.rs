//! Killing connections for conformal Killing 2-forms and their parallel sections.
//!
//! For each orientation side the connection lives on the rank-10 bundle
//! `Λ²_side ⊕ T ⊕ Λ²_opp`. Sections are stacked as
//!
//! ```text
//! index 0..3   omega  side coordinates of Λ²_side
//! index 3..7   theta  components on e1..e4
//! index 7..10  sigma  side coordinates of Λ²_opp
//! ```
//!
//! In the left-invariant trivialisation `∇^K_{e_i} s = e_i(s) + Γ^K_i s`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{cov_deriv_endo, cov_deriv_side, flags, riemann, CurvatureData, GeometryFlags};
use crate::exterior4::{apply3, Bivector, Endo4, Side, SideCoords, Vector4};
use crate::liealg::{AlmostComplexStructure, LckReport, MetricLieAlgebra};
use crate::linalg::{Matrix, Span};
use crate::scalar::{Scalar, Tolerance};

/// Human-readable description of the rank-10 section layout.
pub const BUNDLE_ORDERING: &str =
    "[omega_1, omega_2, omega_3, theta_1, theta_2, theta_3, theta_4, sigma_1, sigma_2, sigma_3]; \
     omega in side coordinates, sigma in opposite-side coordinates; \
     Λ²+ basis (e12+e34, e13-e24, e14+e23), Λ²- basis (e12-e34, e13+e24, e14-e23)";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KillingError {
    #[error("Jacobi identity fails on {} triple(s), first at {first:?}", .count)]
    Jacobi { count: usize, first: (usize, usize, usize) },
}

/// Failed hypothesis of the rank-8 construction.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TsdError {
    #[error("Jacobi identity fails")]
    InvalidAlgebra,
    #[error("metric is not Einstein")]
    NotEinstein,
    #[error("fundamental form of J is not purely self-dual or anti-self-dual")]
    MixedFundamentalForm,
    #[error("Weyl block on the {0} side does not vanish")]
    WeylNonzero(Side),
    #[error("J is not integrable")]
    NotIntegrable,
    #[error("J is not Kähler (dΩ != 0)")]
    NotKahler,
}

/// A section `(ω, θ, σ)` of the rank-10 bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct CkSection<S: Scalar> {
    pub omega: SideCoords<S>,
    pub theta: Vector4<S>,
    pub sigma: SideCoords<S>,
}

impl<S: Scalar> CkSection<S> {
    pub fn zero() -> Self {
        CkSection { omega: zero3(), theta: Vector4::zero(), sigma: zero3() }
    }

    pub fn from_slice(v: &[S]) -> Self {
        assert_eq!(v.len(), 10);
        CkSection {
            omega: std::array::from_fn(|k| v[k].clone()),
            theta: Vector4::from_slice(&v[3..7]),
            sigma: std::array::from_fn(|k| v[7 + k].clone()),
        }
    }

    pub fn to_vec(&self) -> Vec<S> {
        self.omega.iter().chain(self.theta.0.iter()).chain(self.sigma.iter()).cloned().collect()
    }
}

fn zero3<S: Scalar>() -> SideCoords<S> {
    std::array::from_fn(|_| S::zero())
}

fn sub3<S: Scalar>(a: &SideCoords<S>, b: &SideCoords<S>) -> SideCoords<S> {
    std::array::from_fn(|k| a[k].clone() - b[k].clone())
}

/// Split Killing connection on one side.
#[derive(Debug, Clone)]
pub struct KillingConnection<S: Scalar> {
    pub side: Side,
    pub gamma: [Matrix<S>; 4],
    pub structure: MetricLieAlgebra<S>,
}

impl<S: Scalar> KillingConnection<S> {
    /// `K_ij = [Γ^K_i, Γ^K_j] - Σ_k c_ij^k Γ^K_k` for `i < j`.
    pub fn curvature_endos(&self) -> Vec<((usize, usize), Matrix<S>)> {
        curvature_endos(&self.gamma, &self.structure)
    }

    pub fn apply(&self, i: usize, s: &CkSection<S>) -> CkSection<S> {
        CkSection::from_slice(&self.gamma[i].mul_vec(&s.to_vec()))
    }
}

fn curvature_endos<S: Scalar>(gamma: &[Matrix<S>; 4], mla: &MetricLieAlgebra<S>) -> Vec<((usize, usize), Matrix<S>)> {
    let mut out = Vec::with_capacity(6);
    for i in 0..4 {
        for j in i + 1..4 {
            let mut k = gamma[i].commutator(&gamma[j]);
            for (l, g) in gamma.iter().enumerate() {
                let c = mla.structure_const(i, j, l);
                if !c.is_exact_zero() {
                    k = &k - &g.scale(&c);
                }
            }
            out.push(((i, j), k));
        }
    }
    out
}

/// Precomputed curvature inputs shared by all four directions.
struct KillingTerms<'a, S: Scalar> {
    cd: &'a CurvatureData<S>,
    side: Side,
    d_ric0: [Endo4<S>; 4],
    d_weyl: [Matrix<S>; 4],
    side_action: [Matrix<S>; 4],
    opp_action: [Matrix<S>; 4],
}

impl<'a, S: Scalar> KillingTerms<'a, S> {
    fn new(cd: &'a CurvatureData<S>, side: Side) -> Self {
        let conn = &cd.connection;
        KillingTerms {
            cd,
            side,
            d_ric0: cov_deriv_endo(&cd.ric0, conn),
            d_weyl: cov_deriv_side(cd.weyl(side), conn, side),
            side_action: std::array::from_fn(|i| conn.side_action(i, side)),
            opp_action: std::array::from_fn(|i| conn.side_action(i, side.opposite())),
        }
    }

    /// The bracketed expression `B_i(ω, θ)` whose opposite-side part drives `∇_{e_i} σ`, before projection.
    fn sigma_source(&self, i: usize, omega: &Bivector<S>, theta: &Vector4<S>) -> Bivector<S> {
        let cd = self.cd;
        let side = self.side;
        let x = Vector4::basis(i);
        let w = omega.to_endo();
        let mut b = Bivector::zero();
        for j in 0..4 {
            let ej = Vector4::basis(j);
            let t1 = Vector4::apply(&self.d_ric0[j].commutator(&w), &x);
            let ejt = Bivector::wedge(&ej, theta).project(side).to_endo();
            let t2 = Vector4::apply(&cd.ric0.commutator(&ejt), &x);
            b = b.add(&Bivector::wedge(&ej, &t1.add(&t2)));
        }
        let two = S::from_i64(2);
        b = b.add(&Bivector::from_endo(&cd.r_xy(&x, theta)).scale(&two));
        let xt = Bivector::wedge(&x, theta).side_coords(side);
        let s6 = cd.scalar.clone() / S::from_i64(6);
        b = b.add(&Bivector::from_side_coords(side, &xt).scale(&s6));
        let dw = apply3(&self.d_weyl[i], &omega.side_coords(side));
        b = b.sub(&Bivector::from_side_coords(side, &dw));
        let wxt = cd.weyl_apply(side, &xt);
        b.sub(&Bivector::from_side_coords(side, &wxt))
    }

    /// `Γ^K_i s` for a constant section `s`.
    fn apply(&self, i: usize, s: &CkSection<S>) -> CkSection<S> {
        let cd = self.cd;
        let side = self.side;
        let conn = &cd.connection;
        let x = Vector4::basis(i);
        let omega = Bivector::from_side_coords(side, &s.omega);
        let sigma = Bivector::from_side_coords(side.opposite(), &s.sigma);
        let half = S::half();

        let xt = Bivector::wedge(&x, &s.theta).side_coords(side);
        let row1 = sub3(&apply3(&self.side_action[i], &s.omega), &xt);

        let w = omega.to_endo();
        let comm = Vector4::apply(&cd.ric0.commutator(&w), &x);
        let s6 = cd.scalar.clone() / S::from_i64(6);
        let wo = Bivector::from_side_coords(side, &cd.weyl_apply(side, &s.omega));
        let zeroth = wo.sub(&omega.scale(&s6)).apply(&x);
        let row2 = conn
            .apply(i, &s.theta)
            .sub(&comm.add(&zeroth).add(&sigma.apply(&x)).scale(&half));

        let src = self.sigma_source(i, &omega, &s.theta).side_coords(side.opposite());
        let row3 = sub3(&apply3(&self.opp_action[i], &s.sigma), &src);

        CkSection { omega: row1, theta: row2, sigma: row3 }
    }
}

fn basis10<S: Scalar>(k: usize) -> CkSection<S> {
    let mut v = vec![S::zero(); 10];
    v[k] = S::one();
    CkSection::from_slice(&v)
}

/// Builds `Γ^K_i` (10×10) for the given side.
pub fn build_killing_connection<S: Scalar>(
    mla: &MetricLieAlgebra<S>,
    cd: &CurvatureData<S>,
    side: Side,
) -> KillingConnection<S> {
    let terms = KillingTerms::new(cd, side);
    let gamma = std::array::from_fn(|i| {
        let cols: Vec<Vec<S>> = (0..10).map(|k| terms.apply(i, &basis10(k)).to_vec()).collect();
        Matrix::from_columns(&cols)
    });
    KillingConnection { side, gamma, structure: mla.clone() }
}

/// Same-side component of the unprojected `∇σ` source, per direction, for a section.
///
/// It vanishes identically when the metric is Einstein with zero Weyl block on `side`;
/// in general it is nonzero and the connection keeps only the opposite-side part.
pub fn sigma_source_side_defect<S: Scalar>(cd: &CurvatureData<S>, side: Side, s: &CkSection<S>) -> Vec<SideCoords<S>> {
    let terms = KillingTerms::new(cd, side);
    let omega = Bivector::from_side_coords(side, &s.omega);
    (0..4).map(|i| terms.sigma_source(i, &omega, &s.theta).side_coords(side)).collect()
}

/// Outcome of the holonomy closure.
#[derive(Debug, Clone)]
pub struct HolonomyResult<S: Scalar> {
    /// Curvature endomorphisms `K_ij`, `i < j`.
    pub generators: Vec<Matrix<S>>,
    /// Dimension of the closed span.
    pub algebra_dim: usize,
    /// Closure rounds until no new direction appeared.
    pub iterations: usize,
    pub parallel_dim: usize,
    /// Basis of the joint kernel.
    pub kernel: Vec<Vec<S>>,
    /// Dimension of the largest `Γ`-invariant subspace inside `∩ ker K_ij`, computed independently.
    pub invariant_dim: usize,
    /// Float backend: some rank decision was close to the tolerance.
    pub marginal: bool,
}

impl<S: Scalar> HolonomyResult<S> {
    pub fn methods_agree(&self) -> bool {
        self.parallel_dim == self.invariant_dim
    }
}

fn flatten<S: Scalar>(m: &Matrix<S>) -> Vec<S> {
    m.as_slice().to_vec()
}

/// Parallel sections of a left-invariant connection `Γ` over the simply connected group of `mla`.
pub fn holonomy_of<S: Scalar>(gamma: &[Matrix<S>; 4], mla: &MetricLieAlgebra<S>, tol: &Tolerance) -> HolonomyResult<S> {
    let n = gamma[0].rows();
    let generators: Vec<Matrix<S>> = curvature_endos(gamma, mla).into_iter().map(|(_, k)| k).collect();

    let mut span = Span::new(n * n);
    let mut elements = Vec::new();
    let mut frontier = Vec::new();
    for k in &generators {
        if span.insert(&flatten(k), tol) {
            frontier.push(k.clone());
        }
    }
    elements.extend(frontier.iter().cloned());
    let mut iterations = 0;
    while !frontier.is_empty() {
        iterations += 1;
        assert!(iterations <= n * n + 1, "holonomy closure failed to stabilise");
        let mut next = Vec::new();
        for a in &frontier {
            for g in gamma {
                let c = g.commutator(a);
                if span.insert(&flatten(&c), tol) {
                    next.push(c);
                }
            }
        }
        elements.extend(next.iter().cloned());
        frontier = next;
    }

    let mut rows = Span::new(n);
    for a in &elements {
        for r in 0..n {
            if rows.len() == n {
                break;
            }
            rows.insert(&a.row(r), tol);
        }
    }
    let kernel = if rows.is_empty() {
        (0..n).map(|k| (0..n).map(|c| if c == k { S::one() } else { S::zero() }).collect()).collect()
    } else {
        Matrix::from_rows(rows.vectors().cloned().collect()).nullspace(tol)
    };

    let (invariant_dim, inv_marginal) = invariant_kernel_dim(gamma, &generators, tol);
    HolonomyResult {
        algebra_dim: span.len(),
        iterations,
        parallel_dim: kernel.len(),
        kernel,
        invariant_dim,
        marginal: span.marginal || rows.marginal || inv_marginal,
        generators,
    }
}

/// Largest subspace of `∩ ker K` invariant under every `Γ_l`, via its annihilator.
fn invariant_kernel_dim<S: Scalar>(gamma: &[Matrix<S>; 4], generators: &[Matrix<S>], tol: &Tolerance) -> (usize, bool) {
    let n = gamma[0].rows();
    let mut ann = Span::new(n);
    let mut frontier = Vec::new();
    for k in generators {
        for r in 0..n {
            let row = k.row(r);
            if ann.insert(&row, tol) {
                frontier.push(row);
            }
        }
    }
    // w ∈ W' iff a·w = 0 and a·Γ_l w = 0 for all annihilating rows a
    while !frontier.is_empty() && ann.len() < n {
        let mut next = Vec::new();
        for a in &frontier {
            for g in gamma {
                let row = g.transpose().mul_vec(a);
                if ann.insert(&row, tol) {
                    next.push(row);
                }
            }
        }
        frontier = next;
    }
    (n - ann.len(), ann.marginal)
}

pub fn holonomy_parallel_dim<S: Scalar>(kc: &KillingConnection<S>, tol: &Tolerance) -> HolonomyResult<S> {
    holonomy_of(&kc.gamma, &kc.structure, tol)
}

/// Holonomy results on both sides.
#[derive(Debug, Clone)]
pub struct CkDims<S: Scalar> {
    pub plus: HolonomyResult<S>,
    pub minus: HolonomyResult<S>,
}

impl<S: Scalar> CkDims<S> {
    pub fn side(&self, side: Side) -> &HolonomyResult<S> {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.plus.parallel_dim, self.minus.parallel_dim)
    }

    /// Dimensions sorted descending, for orientation-free comparison.
    pub fn unordered(&self) -> [usize; 2] {
        let (p, m) = self.dims();
        [p.max(m), p.min(m)]
    }

    pub fn marginal(&self) -> bool {
        self.plus.marginal || self.minus.marginal
    }
}

fn check_jacobi<S: Scalar>(mla: &MetricLieAlgebra<S>, tol: &Tolerance) -> Result<(), KillingError> {
    let v = mla.validate(tol);
    match v.first() {
        None => Ok(()),
        Some(first) => Err(KillingError::Jacobi { count: v.len(), first: first.triple }),
    }
}

/// Dimensions of conformal Killing 2-forms on each side, from precomputed curvature.
pub fn ck_dims_with<S: Scalar>(mla: &MetricLieAlgebra<S>, cd: &CurvatureData<S>, tol: &Tolerance) -> CkDims<S> {
    let (plus, minus) = rayon::join(
        || holonomy_parallel_dim(&build_killing_connection(mla, cd, Side::Plus), tol),
        || holonomy_parallel_dim(&build_killing_connection(mla, cd, Side::Minus), tol),
    );
    CkDims { plus, minus }
}

pub fn ck_dims<S: Scalar>(mla: &MetricLieAlgebra<S>, tol: &Tolerance) -> Result<CkDims<S>, KillingError> {
    check_jacobi(mla, tol)?;
    let cd = riemann(mla);
    Ok(ck_dims_with(mla, &cd, tol))
}

/// Left-invariant solutions `(ω, θ)` of `∇_{e_i} ω = (e_i∧θ)_side`.
#[derive(Debug, Clone)]
pub struct InvariantCkSolutions<S: Scalar> {
    pub side: Side,
    pub solutions: Vec<(SideCoords<S>, Vector4<S>)>,
}

impl<S: Scalar> InvariantCkSolutions<S> {
    pub fn all_theta_zero(&self, tol: &Tolerance) -> bool {
        self.solutions.iter().all(|(w, t)| {
            let scale = w.iter().map(Scalar::abs_f64).fold(0.0, f64::max);
            tol.all_zero(t.0.iter(), scale)
        })
    }
}

pub fn invariant_ck_solve<S: Scalar>(cd: &CurvatureData<S>, side: Side, tol: &Tolerance) -> InvariantCkSolutions<S> {
    let conn = &cd.connection;
    let actions: [Matrix<S>; 4] = std::array::from_fn(|i| conn.side_action(i, side));
    // unknowns (ω_1..3, θ_1..4); 3 equations per direction
    let image = |x: &[S]| -> Vec<S> {
        let omega: SideCoords<S> = std::array::from_fn(|k| x[k].clone());
        let theta = Vector4::from_slice(&x[3..7]);
        (0..4)
            .flat_map(|i| {
                let xt = Bivector::wedge(&Vector4::basis(i), &theta).side_coords(side);
                sub3(&apply3(&actions[i], &omega), &xt)
            })
            .collect()
    };
    let cols: Vec<Vec<S>> = (0..7)
        .map(|k| image(&(0..7).map(|c| if c == k { S::one() } else { S::zero() }).collect::<Vec<_>>()))
        .collect();
    let solutions = Matrix::from_columns(&cols)
        .nullspace(tol)
        .into_iter()
        .map(|v| (std::array::from_fn(|k| v[k].clone()), Vector4::from_slice(&v[3..7])))
        .collect();
    InvariantCkSolutions { side, solutions }
}

/// Rank-8 connection on `Λ²_side ⊕ T ⊕ R` for a self-dual-side-flat Kähler–Einstein metric.
#[derive(Debug, Clone)]
pub struct TsdConnection<S: Scalar> {
    /// Side carrying `ω` (the side with vanishing Weyl block).
    pub side: Side,
    pub gamma8: [Matrix<S>; 4],
}

#[derive(Debug, Clone)]
pub struct TsdReport<S: Scalar> {
    pub connection: TsdConnection<S>,
    pub curvature: Vec<Matrix<S>>,
    pub is_flat: bool,
    pub parallel_dim: usize,
    /// Set when the metric itself is flat, where the 8-dimensional count does not apply.
    pub degenerate_note: Option<String>,
}

/// Side whose projection reproduces `b`, if `b` lies in one of `Λ²±`.
pub fn pure_side<S: Scalar>(b: &Bivector<S>, tol: &Tolerance) -> Option<Side> {
    let scale = b.max_abs();
    Side::both().into_iter().find(|&s| b.sub(&b.project(s)).is_zero_tol(tol, scale) && !b.is_zero_tol(tol, scale))
}

pub fn tsd_connection<S: Scalar>(
    mla: &MetricLieAlgebra<S>,
    j: &AlmostComplexStructure<S>,
    tol: &Tolerance,
) -> Result<TsdReport<S>, TsdError> {
    if !mla.validate(tol).is_empty() {
        return Err(TsdError::InvalidAlgebra);
    }
    let cd = riemann(mla);
    let fl = flags(&cd, tol);
    if !fl.is_einstein {
        return Err(TsdError::NotEinstein);
    }
    let big_omega = j.fundamental_form();
    let kahler_side = pure_side(&big_omega, tol).ok_or(TsdError::MixedFundamentalForm)?;
    let side = kahler_side.opposite();
    if !fl.half_cf(side) {
        return Err(TsdError::WeylNonzero(side));
    }
    let lck = mla.lck_check(j, tol);
    if !lck.integrable {
        return Err(TsdError::NotIntegrable);
    }
    if !lck.is_kahler {
        return Err(TsdError::NotKahler);
    }

    let conn = &cd.connection;
    let s = cd.scalar.clone();
    let s12 = s.clone() / S::from_i64(12);
    let s4 = s.clone() / S::from_i64(4);
    let half = S::half();
    let jm = j.matrix();
    let gamma8 = std::array::from_fn(|i| {
        let x = Vector4::basis(i);
        let action = conn.side_action(i, side);
        let jx = Vector4::apply(jm, &x);
        let cols: Vec<Vec<S>> = (0..8)
            .map(|k| {
                let mut v = vec![S::zero(); 8];
                v[k] = S::one();
                let omega: SideCoords<S> = std::array::from_fn(|c| v[c].clone());
                let theta = Vector4::from_slice(&v[3..7]);
                let f = v[7].clone();
                let w = Bivector::from_side_coords(side, &omega);
                let row1 = sub3(&apply3(&action, &omega), &Bivector::wedge(&x, &theta).side_coords(side));
                let row2 = conn
                    .apply(i, &theta)
                    .add(&w.apply(&x).scale(&s12))
                    .sub(&jx.scale(&(f * half.clone())));
                let row3 = big_omega.eval(&x, &theta) * s4.clone();
                row1.into_iter().chain(row2.0).chain([row3]).collect()
            })
            .collect();
        Matrix::from_columns(&cols)
    });
    let curvature: Vec<Matrix<S>> = curvature_endos(&gamma8, mla).into_iter().map(|(_, k)| k).collect();
    let scale = cd.scale();
    let is_flat = curvature.iter().all(|k| k.is_zero_tol(tol, scale * scale));
    let hol = holonomy_of(&gamma8, mla, tol);
    let degenerate_note = fl
        .is_flat
        .then(|| "metric is flat (S = 0): the rank-8 count does not describe conformal Killing forms".to_string());
    Ok(TsdReport {
        connection: TsdConnection { side, gamma8 },
        curvature,
        is_flat,
        parallel_dim: hol.parallel_dim,
        degenerate_note,
    })
}

/// Result of testing `W(ω) = λω` with the remaining spectrum `{-λ/2, -λ/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylEigenReport<S: Scalar> {
    pub side: Side,
    pub is_eigenvector: bool,
    pub lambda: Option<S>,
    /// `W + (λ/2) Id - (3λ/2) ω ωᵀ / |ω|²` vanishes.
    pub complement_matches: bool,
}

impl<S: Scalar> WeylEigenReport<S> {
    pub fn holds(&self) -> bool {
        self.is_eigenvector && self.complement_matches
    }
}

pub fn weyl_eigenstructure_check<S: Scalar>(
    cd: &CurvatureData<S>,
    side: Side,
    omega: &SideCoords<S>,
    tol: &Tolerance,
) -> WeylEigenReport<S> {
    let w = cd.weyl(side);
    let scale = cd.scale();
    let norm2 = omega.iter().fold(S::zero(), |acc, x| acc + x.clone() * x.clone());
    if norm2.is_exact_zero() {
        return WeylEigenReport { side, is_eigenvector: false, lambda: None, complement_matches: false };
    }
    let wo = apply3(w, omega);
    let lambda = wo.iter().zip(omega).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone()) / norm2.clone();
    let resid: Vec<S> = wo.iter().zip(omega).map(|(a, b)| a.clone() - lambda.clone() * b.clone()).collect();
    let is_eigenvector = tol.all_zero(resid.iter(), scale);
    let half = S::half();
    let three_half = S::from_ratio(3, 2);
    let proj = Matrix::from_fn(3, 3, |r, c| omega[r].clone() * omega[c].clone() / norm2.clone());
    let model = &Matrix::identity(3).scale(&(lambda.clone() * half)) - &proj.scale(&(lambda.clone() * three_half));
    let complement_matches = (w + &model).is_zero_tol(tol, scale);
    WeylEigenReport { side, is_eigenvector, lambda: Some(lambda), complement_matches }
}

/// Which alternative of the main classification an instance falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremCase {
    /// Conformally flat; both sides 10-dimensional.
    ConformallyFlat,
    /// Exactly one Weyl half vanishes and conformal Killing forms exist.
    HalfConformallyFlat,
    /// Both Weyl halves nonzero; forms come from invariant lcK structures.
    InvariantLck,
}

impl TheoremCase {
    pub fn number(self) -> u8 {
        match self {
            TheoremCase::ConformallyFlat => 1,
            TheoremCase::HalfConformallyFlat => 2,
            TheoremCase::InvariantLck => 3,
        }
    }
}

/// An invariant lcK structure found among the frame candidates.
#[derive(Debug, Clone)]
pub struct LckEvidence<S: Scalar> {
    pub j: AlmostComplexStructure<S>,
    /// Side containing the fundamental form.
    pub omega_side: Option<Side>,
    pub report: LckReport<S>,
}

#[derive(Debug, Clone)]
pub struct Classification<S: Scalar> {
    pub curvature: CurvatureData<S>,
    pub flags: GeometryFlags,
    pub ck: CkDims<S>,
    pub case: Option<TheoremCase>,
    pub lck: Vec<LckEvidence<S>>,
    /// Side dimension ≥ 2 only where that side's Weyl block vanishes.
    pub prop_sd_holds: bool,
    /// Both holonomy methods agree on both sides.
    pub methods_agree: bool,
    pub notes: Vec<String>,
}

/// Scans the frame candidates for invariant lcK structures.
pub fn lck_scan<S: Scalar>(mla: &MetricLieAlgebra<S>, tol: &Tolerance) -> Vec<LckEvidence<S>> {
    AlmostComplexStructure::frame_candidates()
        .into_iter()
        .filter_map(|j| {
            let report = mla.lck_check(&j, tol);
            report.is_lck.then(|| LckEvidence { omega_side: pure_side(&report.fundamental_form, tol), j, report })
        })
        .collect()
}

pub fn classify_theorem_main<S: Scalar>(
    mla: &MetricLieAlgebra<S>,
    tol: &Tolerance,
) -> Result<Classification<S>, KillingError> {
    check_jacobi(mla, tol)?;
    let cd = riemann(mla);
    let fl = flags(&cd, tol);
    let ck = ck_dims_with(mla, &cd, tol);
    let (p, m) = ck.dims();
    let mut notes = Vec::new();

    let case = if fl.is_conf_flat {
        Some(TheoremCase::ConformallyFlat)
    } else if p == 0 && m == 0 {
        None
    } else if fl.is_strictly_half_cf() {
        Some(TheoremCase::HalfConformallyFlat)
    } else {
        Some(TheoremCase::InvariantLck)
    };
    let lck = lck_scan(mla, tol);

    if case == Some(TheoremCase::ConformallyFlat) && (p, m) != (10, 10) {
        notes.push(format!("conformally flat but dimensions are ({p}, {m}), expected (10, 10)"));
    }
    if case == Some(TheoremCase::HalfConformallyFlat) && fl.is_einstein && cd.scalar.to_f64() < 0.0 {
        notes.push("Einstein, half conformally flat, S < 0: complex hyperbolic plane".to_string());
    }
    if case == Some(TheoremCase::InvariantLck) {
        for side in Side::both() {
            let found = lck.iter().any(|e| e.omega_side == Some(side));
            let d = ck.side(side).parallel_dim;
            if found && d != 1 {
                notes.push(format!("invariant lcK structure on the {side} side but dimension {d}"));
            }
            if d > 1 {
                notes.push(format!("dimension {d} > 1 on the {side} side without vanishing Weyl block"));
            }
        }
    }

    let prop_sd_holds = Side::both().into_iter().all(|s| ck.side(s).parallel_dim < 2 || fl.half_cf(s));
    let methods_agree = ck.plus.methods_agree() && ck.minus.methods_agree();
    if !methods_agree {
        notes.push("holonomy closure and invariant-subspace counts disagree".to_string());
    }
    Ok(Classification { curvature: cd, flags: fl, ck, case, lck, prop_sd_holds, methods_agree, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{abelian, gab, type3, type6};
    use crate::scalar::Rational;

    type Q = Rational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn distinguished_side(cd: &CurvatureData<Q>) -> Side {
        let fl = flags(cd, &tol());
        Side::both().into_iter().find(|&s| fl.half_cf(s)).expect("one Weyl half vanishes")
    }

    #[test]
    fn abelian_connection_has_only_constant_couplings() {
        let mla = abelian::<Q>();
        let cd = riemann(&mla);
        for side in Side::both() {
            let kc = build_killing_connection(&mla, &cd, side);
            for (_, k) in kc.curvature_endos() {
                assert!(k.is_exact_zero());
            }
            // ω column block is zero; θ feeds ω; σ feeds θ
            for g in &kc.gamma {
                assert!(g.block(0, 0, 10, 3).is_exact_zero());
                assert!(!g.block(0, 3, 3, 4).is_exact_zero());
                assert!(g.block(7, 0, 3, 10).is_exact_zero());
            }
            let h = holonomy_parallel_dim(&kc, &tol());
            assert_eq!(h.parallel_dim, 10);
            assert_eq!(h.invariant_dim, 10);
        }
    }

    #[test]
    fn sigma_row_reduces_to_einstein_form_on_distinguished_side() {
        for b in [0, 1, -2] {
            let mla = gab(q(1, 2), Q::from_i64(b));
            let cd = riemann(&mla);
            let side = distinguished_side(&cd);
            let opp = side.opposite();
            let kc = build_killing_connection(&mla, &cd, side);
            let s6 = cd.scalar.clone() / Q::from_i64(6);
            for i in 0..4 {
                let g = &kc.gamma[i];
                assert!(g.block(7, 0, 3, 3).is_exact_zero(), "no ω dependence in the σ row");
                assert_eq!(g.block(7, 7, 3, 3), cd.connection.side_action(i, opp));
                for t in 0..4 {
                    let xt = Bivector::wedge(&Vector4::basis(i), &Vector4::basis(t)).side_coords(opp);
                    let w2 = apply3(&cd.weyl(opp).scale(&Q::from_i64(2)), &xt);
                    let expect: Vec<Q> = (0..3).map(|k| xt[k].clone() * s6.clone() + w2[k].clone()).collect();
                    assert_eq!(g.column(3 + t)[7..10].to_vec(), expect);
                }
            }
        }
    }

    #[test]
    fn sigma_source_side_part() {
        let s = CkSection::from_slice(&(1..=10).map(|k| q(k * k - 3, k + 1)).collect::<Vec<_>>());
        let cd = riemann(&gab(q(1, 2), Q::one()));
        let side = distinguished_side(&cd);
        assert!(sigma_source_side_defect(&cd, side, &s).iter().flatten().all(Scalar::is_exact_zero));
        let cd = riemann(&gab(Q::from_i64(2), Q::one()));
        assert!(!sigma_source_side_defect(&cd, Side::Plus, &s).iter().flatten().all(Scalar::is_exact_zero));
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let mla = gab(q(1, 2), Q::one());
        let cd = riemann(&mla);
        for side in Side::both() {
            let h = holonomy_parallel_dim(&build_killing_connection(&mla, &cd, side), &tol());
            for v in &h.kernel {
                for g in &h.generators {
                    assert!(g.mul_vec(v).iter().all(Scalar::is_exact_zero));
                }
            }
            assert!(h.methods_agree());
        }
    }

    #[test]
    fn complex_hyperbolic_dims() {
        let d = ck_dims(&gab(q(1, 2), Q::one()), &tol()).unwrap();
        assert_eq!(d.unordered(), [8, 1]);
    }

    #[test]
    fn flat_and_conformally_flat_dims() {
        assert_eq!(ck_dims(&type6::<Q>(), &tol()).unwrap().dims(), (10, 10));
        assert_eq!(ck_dims(&type3(Q::one()).unwrap(), &tol()).unwrap().dims(), (10, 10));
    }

    #[test]
    fn invariant_solutions() {
        let cd = riemann(&abelian::<Q>());
        let sol = invariant_ck_solve(&cd, Side::Plus, &tol());
        assert_eq!(sol.solutions.len(), 3);
        assert!(sol.all_theta_zero(&tol()));
        for mla in [gab(Q::from_i64(2), Q::one()), type3(Q::one()).unwrap()] {
            let cd = riemann(&mla);
            for side in Side::both() {
                assert!(invariant_ck_solve(&cd, side, &tol()).all_theta_zero(&tol()));
            }
        }
    }

    #[test]
    fn weyl_eigen_probe() {
        let cd = riemann(&gab(Q::from_i64(2), Q::one()));
        let fundamental = [Q::zero(), Q::zero(), Q::one()];
        assert!(weyl_eigenstructure_check(&cd, Side::Plus, &fundamental, &tol()).holds());
        let other = [Q::zero(), Q::one(), Q::zero()];
        assert!(!weyl_eigenstructure_check(&cd, Side::Plus, &other, &tol()).holds());
        let flat = riemann(&abelian::<Q>());
        let r = weyl_eigenstructure_check(&flat, Side::Plus, &other, &tol());
        assert!(r.holds());
        assert_eq!(r.lambda, Some(Q::zero()));
    }

    #[test]
    fn rank8_connection_is_flat_on_kahler_einstein() {
        let mla = gab(q(1, 2), Q::one());
        let j = lck_scan(&mla, &tol()).into_iter().find(|e| e.report.is_kahler).expect("Kähler candidate").j;
        let r = tsd_connection(&mla, &j, &tol()).unwrap();
        assert!(r.is_flat);
        assert_eq!(r.parallel_dim, 8);
        assert!(r.degenerate_note.is_none());
    }

    #[test]
    fn rank8_preconditions_are_typed() {
        let j = AlmostComplexStructure::<Q>::j_eps(1);
        assert_eq!(tsd_connection(&gab(Q::from_i64(2), Q::one()), &j, &tol()).unwrap_err(), TsdError::NotEinstein);
        let r = tsd_connection(&abelian::<Q>(), &j, &tol()).unwrap();
        assert!(r.is_flat);
        assert!(r.degenerate_note.is_some());
    }

    #[test]
    fn classification_cases() {
        let c = classify_theorem_main(&type6::<Q>(), &tol()).unwrap();
        assert_eq!(c.case, Some(TheoremCase::ConformallyFlat));
        let c = classify_theorem_main(&gab(q(1, 2), Q::zero()), &tol()).unwrap();
        assert_eq!(c.case, Some(TheoremCase::HalfConformallyFlat));
        assert!(c.notes.iter().any(|n| n.contains("complex hyperbolic")));
        let c = classify_theorem_main(&gab(Q::from_i64(2), Q::one()), &tol()).unwrap();
        assert_eq!(c.case, Some(TheoremCase::InvariantLck));
        assert_eq!(c.ck.dims(), (1, 1));
        assert!(c.prop_sd_holds && c.methods_agree);
        assert_eq!(c.lck.iter().filter_map(|e| e.omega_side).collect::<std::collections::BTreeSet<_>>().len(), 2);
    }

    #[test]
    fn sign_reversal_swaps_sides() {
        // e1 -> -e1 maps g(a,b) to g(-a,-b) and reverses orientation
        let a = classify_theorem_main(&gab(Q::from_i64(-1), Q::one()), &tol()).unwrap();
        let b = classify_theorem_main(&gab(Q::one(), Q::from_i64(-1)), &tol()).unwrap();
        assert_eq!(a.case, Some(TheoremCase::HalfConformallyFlat));
        assert_eq!(a.ck.dims(), (b.ck.dims().1, b.ck.dims().0));
        assert_eq!(a.flags.is_half_cf_plus, b.flags.is_half_cf_minus);
    }
}
