//! Exterior algebra of oriented Euclidean 4-space in the orthonormal basis `e1..e4`.
//!
//! Orientation is fixed by `vol = e1∧e2∧e3∧e4`. Bivectors are identified with
//! skew-symmetric endomorphisms through `(X∧Y)(Z) = <X,Z>Y - <Y,Z>X`, and a
//! 2-form is evaluated on vectors as `β(X, Y) = <β(X), Y>`.
//!
//! Self-dual and anti-self-dual coordinates always refer to the unnormalised
//! bases
//!
//! ```text
//! Λ²+ : e12 + e34,  e13 - e24,  e14 + e23
//! Λ²- : e12 - e34,  e13 + e24,  e14 - e23
//! ```
//!
//! whose Gram matrices are `2·Id`. Keeping them unnormalised keeps every
//! coordinate rational.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::{Scalar, Tolerance};

/// A 4×4 matrix acting on column vectors in the frame `e1..e4`.
pub type Endo4<S> = Matrix<S>;

/// Component count of each grade.
pub const GRADE_DIMS: [usize; 5] = [1, 4, 6, 4, 1];

/// Blades of each grade as bit masks (bit `i` is `e_{i+1}`), in lexicographic order.
const BLADES: [&[u8]; 5] = [
    &[0b0000],
    &[0b0001, 0b0010, 0b0100, 0b1000],
    &[0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100],
    &[0b0111, 0b1011, 0b1101, 0b1110],
    &[0b1111],
];

/// Index pairs of the bivector basis `e12, e13, e14, e23, e24, e34` (0-based).
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExteriorError {
    #[error("endomorphism is not symmetric")]
    NotSymmetric,
    #[error("expected a 4x4 matrix, got {0}x{1}")]
    Shape(usize, usize),
    #[error("grade {0} is out of range 0..=4")]
    Grade(usize),
}

fn blade_index(grade: usize, mask: u8) -> usize {
    BLADES[grade].iter().position(|&m| m == mask).expect("mask has the stated grade")
}

/// Sign of `e_A ∧ e_B` relative to the sorted blade `e_{A∪B}`; zero if they overlap.
fn wedge_sign(a: u8, b: u8) -> i64 {
    if a & b != 0 {
        return 0;
    }
    let mut swaps = 0;
    for i in 0..4 {
        if a & (1 << i) != 0 {
            // count elements of b below i
            swaps += (b & ((1u8 << i) - 1)).count_ones();
        }
    }
    if swaps % 2 == 0 { 1 } else { -1 }
}

/// Sign of the permutation sorting `indices`; zero on repeats.
pub fn permutation_sign(indices: &[usize]) -> i64 {
    let mut sign = 1;
    for i in 0..indices.len() {
        for j in i + 1..indices.len() {
            if indices[i] == indices[j] {
                return 0;
            }
            if indices[i] > indices[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Homogeneous element of `Λ^k` with components on increasing multi-indices.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Form<S> {
    grade: usize,
    comps: Vec<S>,
}

impl<S: Scalar> fmt::Debug for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<S: Scalar> fmt::Display for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (c, &mask) in self.comps.iter().zip(BLADES[self.grade]) {
            if c.is_exact_zero() {
                continue;
            }
            let label: String = (0..4).filter(|i| mask & (1 << i) != 0).map(|i| (b'1' + i) as char).collect();
            terms.push(if label.is_empty() { format!("{c}") } else { format!("({c})e{label}") });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl<S: Scalar> Form<S> {
    pub fn zero(grade: usize) -> Self {
        assert!(grade <= 4, "grade out of range");
        Form { grade, comps: vec![S::zero(); GRADE_DIMS[grade]] }
    }

    pub fn new(grade: usize, comps: Vec<S>) -> Result<Self, ExteriorError> {
        if grade > 4 {
            return Err(ExteriorError::Grade(grade));
        }
        assert_eq!(comps.len(), GRADE_DIMS[grade], "component count does not match grade");
        Ok(Form { grade, comps })
    }

    pub fn scalar(s: S) -> Self {
        Form { grade: 0, comps: vec![s] }
    }

    pub fn vol() -> Self {
        Form { grade: 4, comps: vec![S::one()] }
    }

    /// The blade `e_{i1} ∧ ... ∧ e_{ik}` for 1-based labels, with sign from sorting.
    pub fn e(labels: &[usize]) -> Self {
        let idx: Vec<usize> = labels.iter().map(|&l| l - 1).collect();
        Self::blade(&idx)
    }

    /// The blade for 0-based frame indices.
    pub fn blade(indices: &[usize]) -> Self {
        let grade = indices.len();
        let mut f = Self::zero(grade);
        let sign = permutation_sign(indices);
        if sign == 0 {
            return f;
        }
        let mask = indices.iter().fold(0u8, |m, &i| m | (1 << i));
        f.comps[blade_index(grade, mask)] = S::from_i64(sign);
        f
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn comps(&self) -> &[S] {
        &self.comps
    }

    pub fn is_exact_zero(&self) -> bool {
        self.comps.iter().all(Scalar::is_exact_zero)
    }

    pub fn is_zero_tol(&self, tol: &Tolerance, scale: f64) -> bool {
        tol.all_zero(self.comps.iter(), scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(Scalar::abs_f64).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.grade, other.grade, "adding forms of different grade");
        Form {
            grade: self.grade,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, k: &S) -> Self {
        Form { grade: self.grade, comps: self.comps.iter().map(|c| c.clone() * k.clone()).collect() }
    }

    /// Component on the blade with the given bit mask.
    pub fn component(&self, mask: u8) -> S {
        self.comps[blade_index(self.grade, mask)].clone()
    }

    /// Value of the form on frame vectors `e_{i0}, ..., e_{ik}` (0-based), determinant convention.
    pub fn eval_on_frame(&self, indices: &[usize]) -> S {
        assert_eq!(indices.len(), self.grade);
        let sign = permutation_sign(indices);
        if sign == 0 {
            return S::zero();
        }
        let mask = indices.iter().fold(0u8, |m, &i| m | (1 << i));
        self.component(mask) * S::from_i64(sign)
    }

    /// Pointwise inner product; the blades form an orthonormal basis.
    pub fn inner(&self, other: &Self) -> S {
        assert_eq!(self.grade, other.grade);
        self.comps.iter().zip(&other.comps).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }
}

/// Exterior product; grades summing past 4 give the zero 4-form.
pub fn wedge<S: Scalar>(a: &Form<S>, b: &Form<S>) -> Form<S> {
    let grade = a.grade + b.grade;
    if grade > 4 {
        return Form::zero(4);
    }
    let mut out: Form<S> = Form::zero(grade);
    for (ca, &ma) in a.comps.iter().zip(BLADES[a.grade]) {
        if ca.is_exact_zero() {
            continue;
        }
        for (cb, &mb) in b.comps.iter().zip(BLADES[b.grade]) {
            let sign = wedge_sign(ma, mb);
            if sign == 0 || cb.is_exact_zero() {
                continue;
            }
            let k = blade_index(grade, ma | mb);
            out.comps[k] = out.comps[k].clone() + S::from_i64(sign) * ca.clone() * cb.clone();
        }
    }
    out
}

/// Interior product `x ⌟ a`, the adjoint of `x ∧ ·`. Grade-0 input gives zero.
pub fn interior<S: Scalar>(x: &Vector4<S>, a: &Form<S>) -> Form<S> {
    if a.grade == 0 {
        return Form::zero(0);
    }
    let mut out: Form<S> = Form::zero(a.grade - 1);
    for (ca, &ma) in a.comps.iter().zip(BLADES[a.grade]) {
        if ca.is_exact_zero() {
            continue;
        }
        for i in 0..4 {
            let bit = 1u8 << i;
            if ma & bit == 0 || x.0[i].is_exact_zero() {
                continue;
            }
            // e_i ⌟ e_I = (-1)^{position of i in I} e_{I \ i}
            let pos = (ma & (bit - 1)).count_ones();
            let sign = if pos % 2 == 0 { S::one() } else { -S::one() };
            let k = blade_index(a.grade - 1, ma & !bit);
            out.comps[k] = out.comps[k].clone() + sign * x.0[i].clone() * ca.clone();
        }
    }
    out
}

/// Hodge star, defined by `a ∧ *b = <a, b> vol`.
pub fn hodge<S: Scalar>(a: &Form<S>) -> Form<S> {
    let grade = 4 - a.grade;
    let mut out: Form<S> = Form::zero(grade);
    for (ca, &ma) in a.comps.iter().zip(BLADES[a.grade]) {
        let mc = !ma & 0b1111;
        let sign = wedge_sign(ma, mc);
        let k = blade_index(grade, mc);
        out.comps[k] = S::from_i64(sign) * ca.clone();
    }
    out
}

/// A vector (equivalently a 1-form) in the orthonormal frame.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector4<S>(pub [S; 4]);

impl<S: Scalar> fmt::Debug for Vector4<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

impl<S: Scalar> Vector4<S> {
    pub fn zero() -> Self {
        Vector4(std::array::from_fn(|_| S::zero()))
    }

    /// Frame vector `e_{i+1}` (0-based index).
    pub fn basis(i: usize) -> Self {
        Vector4(std::array::from_fn(|k| if k == i { S::one() } else { S::zero() }))
    }

    pub fn from_slice(v: &[S]) -> Self {
        Vector4(std::array::from_fn(|k| v[k].clone()))
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn to_form(&self) -> Form<S> {
        Form { grade: 1, comps: self.0.to_vec() }
    }

    pub fn from_form(f: &Form<S>) -> Self {
        assert_eq!(f.grade, 1);
        Self::from_slice(&f.comps)
    }

    pub fn dot(&self, other: &Self) -> S {
        (0..4).fold(S::zero(), |acc, i| acc + self.0[i].clone() * other.0[i].clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        Vector4(std::array::from_fn(|i| self.0[i].clone() + other.0[i].clone()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Vector4(std::array::from_fn(|i| self.0[i].clone() - other.0[i].clone()))
    }

    pub fn scale(&self, k: &S) -> Self {
        Vector4(std::array::from_fn(|i| self.0[i].clone() * k.clone()))
    }

    pub fn apply(m: &Endo4<S>, v: &Self) -> Self {
        Self::from_slice(&m.mul_vec(&v.0))
    }

    pub fn is_exact_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_exact_zero)
    }
}

/// Orientation side of `Λ²`: self-dual (`Plus`) or anti-self-dual (`Minus`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    /// Hodge eigenvalue of this side.
    pub fn sign(self) -> i64 {
        match self {
            Side::Plus => 1,
            Side::Minus => -1,
        }
    }

    pub fn both() -> [Side; 2] {
        [Side::Plus, Side::Minus]
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        })
    }
}

/// Coordinates on one side's fixed basis.
pub type SideCoords<S> = [S; 3];

/// Bivector with components on `e12, e13, e14, e23, e24, e34`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Bivector<S>(pub [S; 6]);

impl<S: Scalar> fmt::Debug for Bivector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_form())
    }
}

impl<S: Scalar> Bivector<S> {
    pub fn zero() -> Self {
        Bivector(std::array::from_fn(|_| S::zero()))
    }

    /// Basis bivector `k` in the order `e12, e13, e14, e23, e24, e34`.
    pub fn basis(k: usize) -> Self {
        Bivector(std::array::from_fn(|i| if i == k { S::one() } else { S::zero() }))
    }

    pub fn from_slice(v: &[S]) -> Self {
        Bivector(std::array::from_fn(|k| v[k].clone()))
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn wedge(x: &Vector4<S>, y: &Vector4<S>) -> Self {
        Bivector(std::array::from_fn(|k| {
            let (i, j) = PAIRS[k];
            x.0[i].clone() * y.0[j].clone() - x.0[j].clone() * y.0[i].clone()
        }))
    }

    pub fn to_form(&self) -> Form<S> {
        Form { grade: 2, comps: self.0.to_vec() }
    }

    pub fn from_form(f: &Form<S>) -> Self {
        assert_eq!(f.grade, 2);
        Self::from_slice(&f.comps)
    }

    pub fn add(&self, other: &Self) -> Self {
        Bivector(std::array::from_fn(|k| self.0[k].clone() + other.0[k].clone()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Bivector(std::array::from_fn(|k| self.0[k].clone() - other.0[k].clone()))
    }

    pub fn scale(&self, s: &S) -> Self {
        Bivector(std::array::from_fn(|k| self.0[k].clone() * s.clone()))
    }

    pub fn inner(&self, other: &Self) -> S {
        (0..6).fold(S::zero(), |acc, k| acc + self.0[k].clone() * other.0[k].clone())
    }

    pub fn hodge(&self) -> Self {
        let [b12, b13, b14, b23, b24, b34] = self.0.clone();
        Bivector([b34, -b24, b23, b14, -b13, b12])
    }

    pub fn is_exact_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_exact_zero)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(Scalar::abs_f64).fold(0.0, f64::max)
    }

    pub fn is_zero_tol(&self, tol: &Tolerance, scale: f64) -> bool {
        tol.all_zero(self.0.iter(), scale)
    }

    /// The skew endomorphism `Z ↦ Σ b_ij (<e_i,Z> e_j - <e_j,Z> e_i)`.
    pub fn to_endo(&self) -> Endo4<S> {
        let mut m = Matrix::zeros(4, 4);
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            m[(j, i)] = self.0[k].clone();
            m[(i, j)] = -self.0[k].clone();
        }
        m
    }

    /// Reads the bivector off the lower triangle of a (skew) endomorphism.
    pub fn from_endo(m: &Endo4<S>) -> Self {
        Bivector(std::array::from_fn(|k| {
            let (i, j) = PAIRS[k];
            m[(j, i)].clone()
        }))
    }

    /// Action as an endomorphism: `β(X)`.
    pub fn apply(&self, x: &Vector4<S>) -> Vector4<S> {
        Vector4::apply(&self.to_endo(), x)
    }

    /// `β(X, Y) = <β(X), Y>`.
    pub fn eval(&self, x: &Vector4<S>, y: &Vector4<S>) -> S {
        self.apply(x).dot(y)
    }

    /// Coordinates of the projection onto `side` in that side's fixed basis.
    pub fn side_coords(&self, side: Side) -> SideCoords<S> {
        let h = S::half();
        let [b12, b13, b14, b23, b24, b34] = self.0.clone();
        match side {
            Side::Plus => [(b12 + b34) * h.clone(), (b13 - b24) * h.clone(), (b14 + b23) * h],
            Side::Minus => [(b12 - b34) * h.clone(), (b13 + b24) * h.clone(), (b14 - b23) * h],
        }
    }

    pub fn from_side_coords(side: Side, c: &SideCoords<S>) -> Self {
        let [x, y, z] = c.clone();
        match side {
            Side::Plus => Bivector([x.clone(), y.clone(), z.clone(), z, -y, x]),
            Side::Minus => Bivector([x.clone(), y.clone(), z.clone(), -z, y, -x]),
        }
    }

    /// Orthogonal projection `½(1 ± *)`.
    pub fn project(&self, side: Side) -> Self {
        Self::from_side_coords(side, &self.side_coords(side))
    }

    /// Commutator of the endomorphism images, pulled back to a bivector.
    pub fn commutator(&self, other: &Self) -> Self {
        Self::from_endo(&self.to_endo().commutator(&other.to_endo()))
    }
}

/// The fixed basis of `Λ²±`.
pub fn side_basis<S: Scalar>(side: Side) -> [Bivector<S>; 3] {
    std::array::from_fn(|k| {
        let mut c: SideCoords<S> = std::array::from_fn(|_| S::zero());
        c[k] = S::one();
        Bivector::from_side_coords(side, &c)
    })
}

/// Splits `b` into self-dual and anti-self-dual coordinates.
pub fn sd_asd_split<S: Scalar>(b: &Bivector<S>) -> (SideCoords<S>, SideCoords<S>) {
    (b.side_coords(Side::Plus), b.side_coords(Side::Minus))
}

pub fn bivector_to_endo<S: Scalar>(b: &Bivector<S>) -> Endo4<S> {
    b.to_endo()
}

pub fn bivector_commutator<S: Scalar>(a: &Bivector<S>, b: &Bivector<S>) -> Bivector<S> {
    a.commutator(b)
}

/// The endomorphism `Ã(X∧Y) = A(X)∧Y + X∧A(Y)` of `Λ²` as a 6×6 matrix on `e12..e34`.
pub fn tilde_map<S: Scalar>(a: &Endo4<S>, tol: &Tolerance) -> Result<Matrix<S>, ExteriorError> {
    if a.rows() != 4 || a.cols() != 4 {
        return Err(ExteriorError::Shape(a.rows(), a.cols()));
    }
    if !a.is_symmetric(tol) {
        return Err(ExteriorError::NotSymmetric);
    }
    let cols: Vec<Vec<S>> = (0..6)
        .map(|k| {
            let b = Bivector::<S>::basis(k).to_endo();
            Bivector::from_endo(&(&a.matmul(&b) + &b.matmul(a))).0.to_vec()
        })
        .collect();
    Ok(Matrix::from_columns(&cols))
}

/// Matrix of a linear map `f: Λ² → Λ²` given by its action on bivectors.
pub fn lambda2_matrix<S: Scalar>(f: impl Fn(&Bivector<S>) -> Bivector<S>) -> Matrix<S> {
    let cols: Vec<Vec<S>> = (0..6).map(|k| f(&Bivector::basis(k)).0.to_vec()).collect();
    Matrix::from_columns(&cols)
}

/// Block of a `Λ²` endomorphism (6×6 on `e12..e34`) between two sides, in side coordinates.
///
/// Entry `(k, l)` is the `k`-th coordinate on `row_side` of the image of the
/// `l`-th basis element of `col_side`.
pub fn side_block<S: Scalar>(m: &Matrix<S>, row_side: Side, col_side: Side) -> Matrix<S> {
    let basis = side_basis::<S>(col_side);
    let cols: Vec<Vec<S>> = basis
        .iter()
        .map(|b| Bivector::from_slice(&m.mul_vec(&b.0)).side_coords(row_side).to_vec())
        .collect();
    Matrix::from_columns(&cols)
}

/// Applies a 3×3 side-coordinate matrix to side coordinates.
pub fn apply3<S: Scalar>(m: &Matrix<S>, c: &SideCoords<S>) -> SideCoords<S> {
    let v = m.mul_vec(c);
    std::array::from_fn(|k| v[k].clone())
}
