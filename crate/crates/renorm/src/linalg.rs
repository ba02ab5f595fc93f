//! Dense helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::RCOND_MIN;
use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;
pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vector(xs: &[f64]) -> Vector {
    DVector::from_column_slice(xs)
}

/// Row-major constructor.
pub fn matrix(n: usize, m: usize, rows: &[f64]) -> Matrix {
    DMatrix::from_row_slice(n, m, rows)
}

pub fn basis(n: usize, i: usize) -> Vector {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

pub fn rotation2(theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    matrix(2, 2, &[c, -s, s, c])
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Reciprocal 2-norm condition number.
pub fn rcond(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

pub fn check_invertible(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::arg(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let rc = rcond(m);
    if rc < RCOND_MIN {
        return Err(Error::arg(format!("matrix is singular (rcond {rc:.3e})")));
    }
    Ok(())
}

pub fn check_dim(expected: usize, x: &Vector) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Dimension { expected, got: x.len() });
    }
    Ok(())
}

pub fn gaussian(rng: &mut Rng64, n: usize) -> Vector {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_matrix(rng: &mut Rng64, n: usize) -> Matrix {
    let v = gaussian(rng, n * n);
    Matrix::from_column_slice(n, n, v.as_slice())
}

pub fn unit_gaussian(rng: &mut Rng64, n: usize) -> Vector {
    loop {
        let v = gaussian(rng, n);
        let r = v.norm();
        if r > 1e-8 {
            return v / r;
        }
    }
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal(rng: &mut Rng64, n: usize) -> Matrix {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col.neg_mut();
        }
    }
    q
}

/// Uniformly random signed permutation matrix.
pub fn random_signed_permutation(rng: &mut Rng64, n: usize) -> Matrix {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, &p) in perm.iter().enumerate() {
        m[(p, i)] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    m
}

/// Orthonormal basis of the column span (Gram-Schmidt with threshold).
pub fn orthonormal_span(vs: &[Vector], tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        let r = w.norm();
        if r > tol * v.norm().max(1.0) {
            out.push(w / r);
        }
    }
    out
}

pub fn rank(vs: &[Vector], tol: f64) -> usize {
    orthonormal_span(vs, tol).len()
}

/// Serde adapters: matrices travel as row-major nested arrays, vectors as flat arrays.
pub mod serde_rows {
    use super::Matrix;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Matrix, String> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err("ragged matrix rows".into());
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Ok(Matrix::from_row_slice(n, m, &flat))
    }

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        from_rows(Vec::<Vec<f64>>::deserialize(d)?).map_err(D::Error::custom)
    }

    pub mod option {
        use super::{from_rows, to_rows, Matrix};
        use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(m: &Option<Matrix>, s: S) -> Result<S::Ok, S::Error> {
            m.as_ref().map(to_rows).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Matrix>, D::Error> {
            Option::<Vec<Vec<f64>>>::deserialize(d)?.map(|r| from_rows(r).map_err(D::Error::custom)).transpose()
        }
    }
}

pub mod serde_rows_vec {
    use super::{serde_rows, Matrix};
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(ms: &[Matrix], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<_> = ms.iter().map(serde_rows::to_rows).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Matrix>, D::Error> {
        Vec::<Vec<Vec<f64>>>::deserialize(d)?.into_iter().map(|r| serde_rows::from_rows(r).map_err(D::Error::custom)).collect()
    }
}

pub mod serde_vec {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        Ok(Vector::from_vec(Vec::<f64>::deserialize(d)?))
    }

    pub mod option {
        use super::Vector;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<Vector>, s: S) -> Result<S::Ok, S::Error> {
            v.as_ref().map(|v| v.as_slice().to_vec()).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vector>, D::Error> {
            Ok(Option::<Vec<f64>>::deserialize(d)?.map(Vector::from_vec))
        }
    }
}

pub mod serde_vecs {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(vs: &[Vector], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vector>, D::Error> {
        Ok(Vec::<Vec<f64>>::deserialize(d)?.into_iter().map(Vector::from_vec).collect())
    }
}
