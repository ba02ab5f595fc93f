//! Square roots of −Id inside finite isometry groups, their conjugacy classes,
//! the orthonormal canonical form of an orthogonal complex structure, and the
//! projections attached to two commuting structures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::FiniteMatrixGroup;
use crate::linalg::{self, serde_rows, serde_rows_vec, Matrix, Vector};
use crate::norm::NormObject;

const ROOT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexStructureReport {
    /// Indices into the group's element list.
    pub roots: Vec<usize>,
    #[serde(with = "serde_rows_vec")]
    pub matrices: Vec<Matrix>,
    /// Partition of `roots` (as group indices) under conjugation by the group.
    pub classes: Vec<Vec<usize>>,
    /// Canonical orthonormal bases for the orthogonal roots, in root order.
    #[serde(with = "serde_rows_vec")]
    pub bases: Vec<Matrix>,
}

pub fn find_square_roots_of_minus_id(group: &FiniteMatrixGroup) -> Vec<usize> {
    let n = group.dim();
    let minus = -Matrix::identity(n, n);
    (0..group.order()).filter(|&i| linalg::max_abs_diff(&(&group.elements[i] * &group.elements[i]), &minus) <= ROOT_TOL).collect()
}

/// Orbits of `subset` under g·J·g⁻¹, as sorted index lists ordered by first member.
pub fn conjugacy_classes(group: &FiniteMatrixGroup, subset: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; subset.len()];
    let mut classes = Vec::new();
    for (a, &j) in subset.iter().enumerate() {
        if seen[a] {
            continue;
        }
        let mut class: Vec<usize> = (0..group.order()).map(|g| group.table[group.table[g][j]][group.inverse[g]]).collect();
        class.sort_unstable();
        class.dedup();
        for (b, s) in subset.iter().enumerate() {
            if class.contains(s) {
                seen[b] = true;
            }
        }
        classes.push(class);
    }
    classes
}

pub fn complex_structures(group: &FiniteMatrixGroup) -> Result<ComplexStructureReport> {
    let roots = find_square_roots_of_minus_id(group);
    let matrices: Vec<Matrix> = roots.iter().map(|&i| group.elements[i].clone()).collect();
    let classes = conjugacy_classes(group, &roots);
    let bases = matrices.iter().filter_map(|a| l2_canonical_form(a).ok()).collect();
    Ok(ComplexStructureReport { roots, matrices, classes, bases })
}

/// Orthonormal U with A u_{2m} = u_{2m+1} and A u_{2m+1} = −u_{2m} (0-based pairs).
pub fn l2_canonical_form(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    if n == 0 || n % 2 == 1 || a.ncols() != n {
        return Err(Error::arg("canonical form needs a square matrix of even dimension"));
    }
    let id = Matrix::identity(n, n);
    let orth = linalg::max_abs_diff(&(a.transpose() * a), &id);
    if orth > 1e-9 {
        return Err(Error::arg(format!("matrix is not orthogonal (residual {orth:e})")));
    }
    let sq = linalg::max_abs_diff(&(a * a), &(-&id));
    if sq > 1e-9 {
        return Err(Error::arg(format!("matrix does not square to −Id (residual {sq:e})")));
    }
    let mut us: Vec<Vector> = Vec::with_capacity(n);
    let project_out = |v: &Vector, us: &[Vector]| us.iter().fold(v.clone(), |acc, u| &acc - u * u.dot(v));
    while us.len() < n {
        // pivot: basis vector with largest residual off the invariant subspace so far
        let (x, r) = (0..n)
            .map(|i| {
                let v = project_out(&linalg::basis(n, i), &us);
                let r = v.norm();
                (v, r)
            })
            .fold((Vector::zeros(n), -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if r < 1e-8 {
            return Err(Error::arg("invariant subspace stalled"));
        }
        let u1 = x / r;
        let u1 = project_out(&u1, &us).normalize();
        let u2 = project_out(&(a * &u1), &us);
        let u2 = (&u2 - &u1 * u1.dot(&u2)).normalize();
        us.push(u1);
        us.push(u2);
    }
    Ok(Matrix::from_columns(&us))
}

/// Reorders an interleaved canonical basis to (u_0, u_2, …, u_1, u_3, …), in which
/// A has matrix [[0, −I], [I, 0]].
pub fn split_basis(u: &Matrix) -> Matrix {
    let n = u.ncols();
    let cols: Vec<Vector> = (0..n).step_by(2).chain((1..n).step_by(2)).map(|i| u.column(i).into_owned()).collect();
    Matrix::from_columns(&cols)
}

/// The standard structure [[0, −I], [I, 0]] on R^{2m}.
pub fn standard_j(n: usize) -> Matrix {
    let m = n / 2;
    let mut j = Matrix::zeros(n, n);
    for i in 0..m {
        j[(i, m + i)] = -1.0;
        j[(m + i, i)] = 1.0;
    }
    j
}

/// max|UᵀU − I| and max|UᵀAU − J_std| for a canonical basis.
pub fn canonical_residual(a: &Matrix, u: &Matrix) -> (f64, f64) {
    let n = a.nrows();
    let s = split_basis(u);
    (linalg::max_abs_diff(&(u.transpose() * u), &Matrix::identity(n, n)), linalg::max_abs_diff(&(s.transpose() * a * &s), &standard_j(n)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KaltonProjections {
    #[serde(with = "serde_rows")]
    pub p: Matrix,
    #[serde(with = "serde_rows")]
    pub q: Matrix,
    pub residuals: KaltonResiduals,
}

/// Max-entry residuals of the projection identities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KaltonResiduals {
    pub p_idempotent: f64,
    pub q_idempotent: f64,
    pub sum_identity: f64,
    pub commute_a: f64,
    pub commute_b: f64,
    /// max|(A + B)P|: A = −B on the range of P.
    pub anti_on_p: f64,
    /// max|(A − B)Q|: A = B on the range of Q.
    pub equal_on_q: f64,
}

impl KaltonResiduals {
    pub fn max(&self) -> f64 {
        [self.p_idempotent, self.q_idempotent, self.sum_identity, self.commute_a, self.commute_b, self.anti_on_p, self.equal_on_q]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn kalton_projections(a: &Matrix, b: &Matrix) -> Result<KaltonProjections> {
    let n = a.nrows();
    if a.shape() != (n, n) || b.shape() != (n, n) {
        return Err(Error::arg("A and B must be square of equal size"));
    }
    let id = Matrix::identity(n, n);
    if linalg::max_abs_diff(&(a * a), &(-&id)) > 1e-9 || linalg::max_abs_diff(&(b * b), &(-&id)) > 1e-9 {
        return Err(Error::arg("A and B must square to −Id"));
    }
    if linalg::max_abs_diff(&(a * b), &(b * a)) > 1e-9 {
        return Err(Error::arg("A and B do not commute"));
    }
    let ab = a * b;
    let p = (&id + &ab) * 0.5;
    let q = (&id - &ab) * 0.5;
    let residuals = KaltonResiduals {
        p_idempotent: linalg::max_abs_diff(&(&p * &p), &p),
        q_idempotent: linalg::max_abs_diff(&(&q * &q), &q),
        sum_identity: linalg::max_abs_diff(&(&p + &q), &id),
        commute_a: linalg::max_abs_diff(&(&p * a), &(a * &p)),
        commute_b: linalg::max_abs_diff(&(&p * b), &(b * &p)),
        anti_on_p: linalg::max_abs(&((a + b) * &p)),
        equal_on_q: linalg::max_abs(&((a - b) * &q)),
    };
    Ok(KaltonProjections { p, q, residuals })
}

/// The ℓ2-pair norm sqrt(base(y)² + base(z)²) on R^{2n}, its structure J(y,z) = (−z,y)
/// and the conjugation c(y,z) = (y,−z).
pub fn complexify_norm(base: &NormObject) -> (NormObject, Matrix, Matrix) {
    let n = base.dim;
    let mut first = Matrix::zeros(n, 2 * n);
    let mut second = Matrix::zeros(n, 2 * n);
    for i in 0..n {
        first[(i, i)] = 1.0;
        second[(i, n + i)] = 1.0;
    }
    let norm = NormObject::sum_squares(vec![NormObject::pullback(base.clone(), first), NormObject::pullback(base.clone(), second)]);
    let mut c = Matrix::identity(2 * n, 2 * n);
    for i in n..2 * n {
        c[(i, i)] = -1.0;
    }
    (norm, standard_j(2 * n), c)
}
