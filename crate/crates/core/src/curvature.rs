//! Levi-Civita connection and curvature of a left-invariant metric.
//!
//! Conventions: `R_{X,Y} = [∇_X, ∇_Y] - ∇_{[X,Y]}`, `R(X,Y,Z,V) = <R_{X,Y}Z, V>`,
//! `Ric(X,Y) = Σ_i R(e_i, X, Y, e_i)` and the curvature operator is defined by
//! `<𝓡(X∧Y), Z∧V> = R(Y, X, Z, V)`, so that the round sphere has `𝓡 = Id`.

use serde::{Deserialize, Serialize};

use crate::exterior4::{
    apply3, lambda2_matrix, side_block, tilde_map, Bivector, Endo4, Side, SideCoords, Vector4, PAIRS,
};
use crate::liealg::MetricLieAlgebra;
use crate::linalg::Matrix;
use crate::scalar::{Scalar, Tolerance};

/// `Γ_i e_j = ∇_{e_i} e_j`, stored as `gamma[i][(k, j)] = <∇_{e_i} e_j, e_k>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoeffs<S: Scalar> {
    pub gamma: [Endo4<S>; 4],
}

impl<S: Scalar> ConnectionCoeffs<S> {
    /// `Γ_i` viewed as a bivector (each `Γ_i` is skew).
    pub fn bivector(&self, i: usize) -> Bivector<S> {
        Bivector::from_endo(&self.gamma[i])
    }

    /// `∇_{e_i}` on a constant-component vector.
    pub fn apply(&self, i: usize, v: &Vector4<S>) -> Vector4<S> {
        Vector4::apply(&self.gamma[i], v)
    }

    /// `∇_{e_i}` on a constant-component bivector: `β ↦ [Γ_i, β]`.
    pub fn apply_bivector(&self, i: usize, b: &Bivector<S>) -> Bivector<S> {
        Bivector::from_endo(&self.gamma[i].commutator(&b.to_endo()))
    }

    /// `∇_{e_i}` on `Λ²_side` in side coordinates (3×3).
    pub fn side_action(&self, i: usize, side: Side) -> Matrix<S> {
        let m6 = lambda2_matrix(|b| self.apply_bivector(i, b));
        side_block(&m6, side, side)
    }

    /// `Γ_i e_j - Γ_j e_i - [e_i, e_j]` over all pairs; zero for a torsion-free connection.
    pub fn torsion_defect(&self, mla: &MetricLieAlgebra<S>) -> Vec<Vector4<S>> {
        let mut out = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                let t = self
                    .apply(i, &Vector4::basis(j))
                    .sub(&self.apply(j, &Vector4::basis(i)))
                    .sub(mla.bracket_basis(i, j));
                out.push(t);
            }
        }
        out
    }

    /// `Γ_i + Γ_iᵀ`; zero when the connection is metric.
    pub fn metric_defect(&self) -> Vec<Endo4<S>> {
        self.gamma.iter().map(|g| g + &g.transpose()).collect()
    }
}

/// Levi-Civita connection by Koszul: `2<∇_x y, z> = <[x,y],z> - <[y,z],x> + <[z,x],y>`.
pub fn levi_civita<S: Scalar>(mla: &MetricLieAlgebra<S>) -> ConnectionCoeffs<S> {
    let c = |a: usize, b: usize, k: usize| mla.structure_const(a, b, k);
    let half = S::half();
    let gamma = std::array::from_fn(|i| {
        Matrix::from_fn(4, 4, |k, j| (c(i, j, k) - c(j, k, i) + c(k, i, j)) * half.clone())
    });
    ConnectionCoeffs { gamma }
}

/// `(∇_{e_i} A) = [Γ_i, A]` for a constant-component endomorphism `A`.
pub fn cov_deriv_endo<S: Scalar>(a: &Endo4<S>, conn: &ConnectionCoeffs<S>) -> [Endo4<S>; 4] {
    std::array::from_fn(|i| conn.gamma[i].commutator(a))
}

/// Covariant derivative of a constant endomorphism of `Λ²_side` given in side coordinates.
pub fn cov_deriv_side<S: Scalar>(w: &Matrix<S>, conn: &ConnectionCoeffs<S>, side: Side) -> [Matrix<S>; 4] {
    std::array::from_fn(|i| conn.side_action(i, side).commutator(w))
}

/// Full curvature data of a metric Lie algebra.
#[derive(Debug, Clone)]
pub struct CurvatureData<S: Scalar> {
    pub connection: ConnectionCoeffs<S>,
    /// `R(i,j,k,l) = <R_{e_i,e_j} e_k, e_l>` at index `((i*4 + j)*4 + k)*4 + l`.
    pub riemann: Vec<S>,
    /// Curvature operator on `e12, e13, e14, e23, e24, e34`.
    pub curv_op: Matrix<S>,
    pub ricci: Endo4<S>,
    pub scalar: S,
    pub ric0: Endo4<S>,
    /// Self-dual Weyl block in `Λ²+` coordinates.
    pub w_plus: Matrix<S>,
    /// Anti-self-dual Weyl block in `Λ²-` coordinates.
    pub w_minus: Matrix<S>,
    r_endo: Vec<Endo4<S>>,
}

impl<S: Scalar> CurvatureData<S> {
    pub fn r(&self, i: usize, j: usize, k: usize, l: usize) -> S {
        self.riemann[((i * 4 + j) * 4 + k) * 4 + l].clone()
    }

    /// `R_{e_i, e_j}` as an endomorphism.
    pub fn r_endo(&self, i: usize, j: usize) -> &Endo4<S> {
        &self.r_endo[i * 4 + j]
    }

    /// `R_{X,Y}` as a (skew) endomorphism.
    pub fn r_xy(&self, x: &Vector4<S>, y: &Vector4<S>) -> Endo4<S> {
        let mut out = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                let f = x.0[i].clone() * y.0[j].clone();
                if !f.is_exact_zero() {
                    out = &out + &self.r_endo(i, j).scale(&f);
                }
            }
        }
        out
    }

    /// `𝓡(b)`.
    pub fn curv_op_apply(&self, b: &Bivector<S>) -> Bivector<S> {
        Bivector::from_slice(&self.curv_op.mul_vec(&b.0))
    }

    pub fn weyl(&self, side: Side) -> &Matrix<S> {
        match side {
            Side::Plus => &self.w_plus,
            Side::Minus => &self.w_minus,
        }
    }

    /// `W^side` applied to side coordinates.
    pub fn weyl_apply(&self, side: Side, c: &SideCoords<S>) -> SideCoords<S> {
        apply3(self.weyl(side), c)
    }

    /// Largest entry magnitude of the curvature operator, used to scale float zero tests.
    pub fn scale(&self) -> f64 {
        self.curv_op.max_abs().max(self.scalar.abs_f64())
    }

    /// `W^+ ⊕ W^-` as a 6×6 endomorphism of `Λ²`.
    pub fn weyl_operator(&self) -> Matrix<S> {
        lambda2_matrix(|b| {
            let p = Bivector::from_side_coords(Side::Plus, &self.weyl_apply(Side::Plus, &b.side_coords(Side::Plus)));
            let m =
                Bivector::from_side_coords(Side::Minus, &self.weyl_apply(Side::Minus, &b.side_coords(Side::Minus)));
            p.add(&m)
        })
    }

    /// `𝓡 - (S/12 Id + ½ Ric0~ + W+ ⊕ W-)`.
    pub fn decomposition_defect(&self, tol: &Tolerance) -> Matrix<S> {
        let s12 = Matrix::identity(6).scale(&(self.scalar.clone() / S::from_i64(12)));
        let tilde = tilde_map(&self.ric0, tol).expect("Ric0 is symmetric").scale(&S::half());
        &(&(&self.curv_op - &s12) - &tilde) - &self.weyl_operator()
    }

    /// First Bianchi defects `R(X,Y,Z,·) + R(Y,Z,X,·) + R(Z,X,Y,·)` over frame triples.
    pub fn bianchi_defect(&self) -> Vec<S> {
        let mut out = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        out.push(self.r(i, j, k, l) + self.r(j, k, i, l) + self.r(k, i, j, l));
                    }
                }
            }
        }
        out
    }

    /// `R(i,j,k,l) - R(k,l,i,j)`.
    pub fn pair_symmetry_defect(&self) -> Vec<S> {
        let mut out = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        out.push(self.r(i, j, k, l) - self.r(k, l, i, j));
                    }
                }
            }
        }
        out
    }

    /// Checks `R_{X,Y} = -𝓡(X∧Y)` as endomorphisms on all frame pairs.
    pub fn sign_convention_defect(&self) -> Vec<Endo4<S>> {
        let mut out = Vec::new();
        for (i, j) in PAIRS {
            let b = Bivector::wedge(&Vector4::basis(i), &Vector4::basis(j));
            out.push(self.r_endo(i, j) + &self.curv_op_apply(&b).to_endo());
        }
        out
    }
}

/// Computes the curvature tensor and its decomposition.
pub fn riemann<S: Scalar>(mla: &MetricLieAlgebra<S>) -> CurvatureData<S> {
    let conn = levi_civita(mla);
    let mut r_endo = vec![Matrix::zeros(4, 4); 16];
    for i in 0..4 {
        for j in i + 1..4 {
            let mut m = conn.gamma[i].commutator(&conn.gamma[j]);
            for k in 0..4 {
                let c = mla.structure_const(i, j, k);
                if !c.is_exact_zero() {
                    m = &m - &conn.gamma[k].scale(&c);
                }
            }
            r_endo[j * 4 + i] = m.scale(&-S::one());
            r_endo[i * 4 + j] = m;
        }
    }
    let mut riemann = Vec::with_capacity(256);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    riemann.push(r_endo[i * 4 + j][(l, k)].clone());
                }
            }
        }
    }
    let r = |i: usize, j: usize, k: usize, l: usize| riemann[((i * 4 + j) * 4 + k) * 4 + l].clone();

    let curv_op = Matrix::from_fn(6, 6, |row, col| {
        let (a, b) = PAIRS[col];
        let (c, d) = PAIRS[row];
        r(b, a, c, d)
    });
    let ricci = Matrix::from_fn(4, 4, |x, y| (0..4).fold(S::zero(), |acc, i| acc + r(i, x, y, i)));
    let scalar = ricci.trace();
    let ric0 = &ricci - &Matrix::identity(4).scale(&(scalar.clone() / S::from_i64(4)));

    let mut cd = CurvatureData {
        connection: conn,
        riemann,
        curv_op,
        ricci,
        scalar,
        ric0,
        w_plus: Matrix::zeros(3, 3),
        w_minus: Matrix::zeros(3, 3),
        r_endo,
    };
    let (wp, wm) = weyl_blocks(&cd);
    cd.w_plus = wp;
    cd.w_minus = wm;
    cd
}

/// `W± = P± 𝓡 P± - (S/12) Id` in the fixed side coordinates.
pub fn weyl_blocks<S: Scalar>(cd: &CurvatureData<S>) -> (Matrix<S>, Matrix<S>) {
    let s12 = Matrix::identity(3).scale(&(cd.scalar.clone() / S::from_i64(12)));
    let wp = &side_block(&cd.curv_op, Side::Plus, Side::Plus) - &s12;
    let wm = &side_block(&cd.curv_op, Side::Minus, Side::Minus) - &s12;
    (wp, wm)
}

/// Thresholded geometric predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometryFlags {
    pub is_flat: bool,
    pub is_einstein: bool,
    pub is_conf_flat: bool,
    pub is_half_cf_plus: bool,
    pub is_half_cf_minus: bool,
}

impl GeometryFlags {
    pub fn half_cf(&self, side: Side) -> bool {
        match side {
            Side::Plus => self.is_half_cf_plus,
            Side::Minus => self.is_half_cf_minus,
        }
    }

    /// Exactly one Weyl half vanishes.
    pub fn is_strictly_half_cf(&self) -> bool {
        self.is_half_cf_plus != self.is_half_cf_minus
    }
}

pub fn flags<S: Scalar>(cd: &CurvatureData<S>, tol: &Tolerance) -> GeometryFlags {
    let scale = cd.scale();
    let is_flat = tol.all_zero(cd.riemann.iter(), scale);
    // Einstein: ||Ric0|| against max(1, |S|)
    let is_einstein = cd.ric0.is_zero_tol(tol, cd.scalar.abs_f64());
    let is_half_cf_plus = cd.w_plus.is_zero_tol(tol, scale);
    let is_half_cf_minus = cd.w_minus.is_zero_tol(tol, scale);
    GeometryFlags {
        is_flat,
        is_einstein,
        is_conf_flat: is_half_cf_plus && is_half_cf_minus,
        is_half_cf_plus,
        is_half_cf_minus,
    }
}

/// Residual of `∇_X dθ = 2(d^∇Q)(X) + 2R_{X,θ}` for a constant-component `θ`, per frame vector `X = e_i`.
///
/// Here `Q` is the symmetric part of `∇θ` and `(d^∇Q)(X) = Σ_j e_j ∧ (∇_{e_j}Q)(X)`.
pub fn nabla_dtheta_defect<S: Scalar>(cd: &CurvatureData<S>, theta: &Vector4<S>) -> Vec<Bivector<S>> {
    let conn = &cd.connection;
    // column i of N is ∇_{e_i} θ; as an endomorphism X ↦ ∇_X θ
    let n = Matrix::from_columns(&(0..4).map(|i| conn.apply(i, theta).0.to_vec()).collect::<Vec<_>>());
    let q = (&n + &n.transpose()).scale(&S::half());
    let dtheta = Bivector::from_endo(&(&n - &n.transpose()));
    let dq = cov_deriv_endo(&q, conn);
    (0..4)
        .map(|i| {
            let lhs = conn.apply_bivector(i, &dtheta);
            let mut dnabla_q = Bivector::zero();
            for (j, dqj) in dq.iter().enumerate() {
                let col = Vector4::from_slice(&dqj.column(i));
                dnabla_q = dnabla_q.add(&Bivector::wedge(&Vector4::basis(j), &col));
            }
            let r = Bivector::from_endo(&cd.r_xy(&Vector4::basis(i), theta));
            let two = S::from_i64(2);
            lhs.sub(&dnabla_q.scale(&two)).sub(&r.scale(&two))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{abelian, gab, type2, type3, type4, type6};
    use crate::scalar::Rational;

    type Q = Rational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    #[test]
    fn abelian_connection_vanishes() {
        let conn = levi_civita(&abelian::<Q>());
        assert!(conn.gamma.iter().all(Matrix::is_exact_zero));
    }

    #[test]
    fn gab_connection_entries() {
        let (a, b) = (q(5, 3), q(-1, 2));
        let conn = levi_civita(&gab(a.clone(), b));
        // ∇_{e2} e2 = a e1
        assert_eq!(conn.apply(1, &Vector4::basis(1)), Vector4::basis(0).scale(&a));
        assert!(conn.apply(0, &Vector4::basis(0)).is_exact_zero());
    }

    #[test]
    fn levi_civita_is_torsion_free_and_metric() {
        for g in [gab(q(2, 1), q(1, 1)), type4(q(1, 1), q(-1, 1)), type2(q(3, 1)).unwrap()] {
            let conn = levi_civita(&g);
            assert!(conn.torsion_defect(&g).iter().all(Vector4::is_exact_zero));
            assert!(conn.metric_defect().iter().all(Matrix::is_exact_zero));
        }
    }

    #[test]
    fn flat_type6() {
        let cd = riemann(&type6::<Q>());
        assert!(cd.riemann.iter().all(Scalar::is_exact_zero));
        assert!(flags(&cd, &Tolerance::default()).is_flat);
    }

    #[test]
    fn type3_is_conformally_flat() {
        for alpha in [q(0, 1), q(1, 1), q(3, 2)] {
            let cd = riemann(&type3(alpha).unwrap());
            assert!(cd.w_plus.is_exact_zero() && cd.w_minus.is_exact_zero());
            assert!(!cd.riemann.iter().all(Scalar::is_exact_zero));
        }
    }

    #[test]
    fn round_sphere_factor_has_expected_scalar_curvature() {
        // su(2) with [e_i,e_j] = c e_k has sectional curvature c²/4, so S = 6 c²/4 on R × S³
        let c = q(2, 1);
        let cd = riemann(&type2(c.clone()).unwrap());
        assert_eq!(cd.scalar, Q::from_i64(6) * c.clone() * c / Q::from_i64(4));
        assert!(flags(&cd, &Tolerance::default()).is_conf_flat);
    }

    #[test]
    fn complex_hyperbolic_member_is_einstein() {
        for b in [q(0, 1), q(1, 1), q(-2, 1)] {
            let cd = riemann(&gab(q(1, 2), b));
            let f = flags(&cd, &Tolerance::default());
            assert!(cd.ric0.is_exact_zero());
            assert!(!cd.scalar.is_exact_zero());
            assert!(f.is_einstein && f.is_strictly_half_cf());
        }
    }

    #[test]
    fn weyl_block_examples() {
        let (wp, wm) = weyl_blocks(&riemann(&abelian::<Q>()));
        assert!(wp.is_exact_zero() && wm.is_exact_zero());
        let f = flags(&riemann(&gab(q(1, 1), q(1, 1))), &Tolerance::default());
        assert!(f.is_strictly_half_cf());
        let cd = riemann(&gab(q(2, 1), q(1, 1)));
        assert!(!cd.w_plus.is_exact_zero() && !cd.w_minus.is_exact_zero());
        assert!(!flags(&riemann(&gab(q(3, 1), q(0, 1))), &Tolerance::default()).is_conf_flat);
        assert!(flags(&riemann(&type2(q(1, 1)).unwrap()), &Tolerance::default()).is_conf_flat);
    }

    #[test]
    fn structural_identities_hold() {
        let tol = Tolerance::default();
        for g in [gab(q(2, 3), q(-5, 4)), type4(q(1, 2), q(3, 1)), type2(q(1, 1)).unwrap()] {
            let cd = riemann(&g);
            assert!(cd.bianchi_defect().iter().all(Scalar::is_exact_zero));
            assert!(cd.pair_symmetry_defect().iter().all(Scalar::is_exact_zero));
            assert!(cd.curv_op.is_symmetric(&tol));
            assert!(cd.decomposition_defect(&tol).is_exact_zero());
            assert!(cd.sign_convention_defect().iter().all(Matrix::is_exact_zero));
            assert_eq!(cd.ric0.trace(), Q::zero());
            assert_eq!(cd.w_plus.trace(), Q::zero());
            assert_eq!(cd.w_minus.trace(), Q::zero());
            assert!(cd.w_plus.is_symmetric(&tol) && cd.w_minus.is_symmetric(&tol));
        }
    }

    #[test]
    fn cov_deriv_trivial_cases() {
        let conn = levi_civita(&gab(q(1, 1), q(2, 1)));
        assert!(cov_deriv_endo(&Matrix::<Q>::identity(4), &conn).iter().all(Matrix::is_exact_zero));
        let flat = levi_civita(&abelian::<Q>());
        let a = Matrix::from_fn(4, 4, |r, c| Q::from_i64((r * 4 + c) as i64));
        assert!(cov_deriv_endo(&a, &flat).iter().all(Matrix::is_exact_zero));
    }

    #[test]
    fn cov_deriv_matches_numerical_parallel_transport() {
        // oracle: transport along the e2 integral curve solves v' = -Γ_2 v (midpoint rule),
        // and ∇_{e2}A = d/dt|0 P_t⁻¹ A P_t by central differences.
        let g = gab(1.0_f64, 0.0);
        let cd = riemann(&g);
        let gamma2 = &cd.connection.gamma[1];
        let transport = |t: f64| -> Matrix<f64> {
            let steps = 2000;
            let h = t / steps as f64;
            let mut p = Matrix::identity(4);
            for _ in 0..steps {
                let k1 = (&-gamma2).matmul(&p);
                let mid = &p + &k1.scale(&(h / 2.0));
                let k2 = (&-gamma2).matmul(&mid);
                p = &p + &k2.scale(&h);
            }
            p
        };
        let conj = |t: f64| {
            let p = transport(t);
            // P is orthogonal, so P⁻¹ = Pᵀ up to integration error
            p.transpose().matmul(&cd.ric0).matmul(&p)
        };
        let h = 1e-3;
        let fd = (&conj(h) - &conj(-h)).scale(&(1.0 / (2.0 * h)));
        let exact = &cov_deriv_endo(&cd.ric0, &cd.connection)[1];
        assert!(!exact.is_zero_tol(&Tolerance::new(1e-6), 1.0));
        assert!((&fd - exact).max_abs() < 1e-5, "fd {fd:?} vs {exact:?}");
    }

    #[test]
    fn nabla_dtheta_on_random_theta() {
        let theta = Vector4([q(1, 2), q(-3, 1), q(2, 5), q(7, 1)]);
        for g in [gab(q(3, 2), q(-1, 3)), type4(q(2, 1), q(1, 1)), type3(q(1, 1)).unwrap()] {
            let cd = riemann(&g);
            assert!(nabla_dtheta_defect(&cd, &theta).iter().all(Bivector::is_exact_zero));
        }
    }
}
