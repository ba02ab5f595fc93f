//! Abstract finite groups by multiplication table, and their signed-permutation
//! representations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::FiniteMatrixGroup;
use crate::linalg::Matrix;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GroupTable {
    pub name: String,
    /// `table[a][b]` is the index of a·b.
    pub table: Vec<Vec<usize>>,
    #[serde(skip_deserializing)]
    pub identity: usize,
    #[serde(skip_deserializing)]
    pub inverse: Vec<usize>,
}

impl GroupTable {
    /// Checks the group axioms exactly and fills identity and inverses.
    pub fn new(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let m = table.len();
        if m == 0 || table.iter().any(|r| r.len() != m || r.iter().any(|&x| x >= m)) {
            return Err(Error::Group("table must be a square array of element indices".into()));
        }
        let identity = (0..m)
            .find(|&e| (0..m).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::Group("no identity element".into()))?;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::Group(format!("associativity fails at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        let inverse = (0..m)
            .map(|a| (0..m).find(|&b| table[a][b] == identity).ok_or_else(|| Error::Group(format!("{a} has no inverse"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupTable { name: name.into(), table, identity, inverse })
    }

    /// Re-validates a deserialized table.
    pub fn revalidated(self) -> Result<Self> {
        GroupTable::new(self.name, self.table)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn cyclic(n: usize) -> Self {
        let t = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        GroupTable::new(format!("cyclic{n}"), t).expect("cyclic table")
    }

    /// Symmetries of the n-gon, order 2n; index a + n·b stands for r^a s^b.
    pub fn dihedral(n: usize) -> Self {
        let idx = |a: usize, b: usize| a + n * b;
        let mut t = vec![vec![0; 2 * n]; 2 * n];
        for a in 0..n {
            for b in 0..2 {
                for c in 0..n {
                    for d in 0..2 {
                        let rot = if b == 0 { (a + c) % n } else { (a + n - c) % n };
                        t[idx(a, b)][idx(c, d)] = idx(rot, (b + d) % 2);
                    }
                }
            }
        }
        GroupTable::new(format!("dihedral{n}"), t).expect("dihedral table")
    }

    /// Quaternion units in the order 1, −1, i, −i, j, −j, k, −k.
    pub fn quaternion8() -> Self {
        // unit = (sign, axis) with axis 0..4 for 1, i, j, k
        let unit = |e: usize| (if e.is_multiple_of(2) { 1i8 } else { -1 }, e / 2);
        let axis_mul = |a: usize, b: usize| -> (i8, usize) {
            match (a, b) {
                (0, x) | (x, 0) => (1, x),
                (x, y) if x == y => (-1, 0),
                (1, 2) => (1, 3),
                (2, 3) => (1, 1),
                (3, 1) => (1, 2),
                (2, 1) => (-1, 3),
                (3, 2) => (-1, 1),
                (1, 3) => (-1, 2),
                _ => unreachable!(),
            }
        };
        let t = (0..8)
            .map(|a| {
                (0..8)
                    .map(|b| {
                        let (sa, xa) = unit(a);
                        let (sb, xb) = unit(b);
                        let (s, x) = axis_mul(xa, xb);
                        let sign = sa * sb * s;
                        2 * x + usize::from(sign < 0)
                    })
                    .collect()
            })
            .collect();
        GroupTable::new("quaternion8", t).expect("quaternion table")
    }

    pub fn direct_product(a: &GroupTable, b: &GroupTable) -> Self {
        let (m, n) = (a.order(), b.order());
        let t = (0..m * n).map(|x| (0..m * n).map(|y| a.table[x / n][y / n] * n + b.table[x % n][y % n]).collect()).collect();
        GroupTable::new(format!("{}x{}", a.name, b.name), t).expect("product table")
    }

    pub fn klein4() -> Self {
        let mut g = Self::direct_product(&Self::cyclic(2), &Self::cyclic(2));
        g.name = "klein4".into();
        g
    }

    /// Named presets: cyclicN, dihedralN, quaternion8, klein4, z2xz4.
    pub fn preset(name: &str) -> Result<Self> {
        let num = |p: &str| name.strip_prefix(p).and_then(|s| s.parse::<usize>().ok()).filter(|&n| n >= 1);
        if let Some(n) = num("cyclic") {
            return Ok(Self::cyclic(n));
        }
        if let Some(n) = num("dihedral").filter(|&n| n >= 3) {
            return Ok(Self::dihedral(n));
        }
        match name {
            "quaternion8" | "quaternion" => Ok(Self::quaternion8()),
            "klein4" => Ok(Self::klein4()),
            "z2xz4" => {
                let mut g = Self::direct_product(&Self::cyclic(2), &Self::cyclic(4));
                g.name = "z2xz4".into();
                Ok(g)
            }
            _ => Err(Error::arg(format!("unknown group preset {name:?}"))),
        }
    }

    pub fn of_matrices(name: impl Into<String>, g: &FiniteMatrixGroup) -> Self {
        GroupTable::new(name, g.table.clone()).expect("matrix group table is a group")
    }
}

pub fn central_involutions(t: &GroupTable) -> Vec<usize> {
    let m = t.order();
    (0..m).filter(|&g| g != t.identity && t.mul(g, g) == t.identity && (0..m).all(|h| t.mul(g, h) == t.mul(h, g))).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CosetSplit {
    pub j: usize,
    /// Representatives G' in scan order; contains the identity.
    pub reps: Vec<usize>,
    /// ε_g = 1 on G', −1 on jG'.
    pub sign: Vec<i8>,
    /// |g| ∈ G' with g = |g| or g = j|g|.
    pub proj: Vec<usize>,
}

pub fn coset_split(t: &GroupTable, j: usize) -> Result<CosetSplit> {
    if !central_involutions(t).contains(&j) {
        return Err(Error::arg(format!("{j} is not a central involution")));
    }
    let m = t.order();
    let mut reps = Vec::new();
    let mut sign = vec![0i8; m];
    let mut proj = vec![0usize; m];
    for g in 0..m {
        if sign[g] != 0 {
            continue;
        }
        reps.push(g);
        sign[g] = 1;
        proj[g] = g;
        let jg = t.mul(j, g);
        sign[jg] = -1;
        proj[jg] = g;
    }
    Ok(CosetSplit { j, reps, sign, proj })
}

/// T_g(y)_h = ε_{g⁻¹h} y_{|g⁻¹h|} for h ∈ G', one matrix per group element.
pub fn classical_rep(t: &GroupTable, split: &CosetSplit) -> Vec<Matrix> {
    let d = split.reps.len();
    let pos = |h: usize| split.reps.iter().position(|&r| r == h).expect("representative");
    (0..t.order())
        .map(|g| {
            let mut m = Matrix::zeros(d, d);
            for (row, &h) in split.reps.iter().enumerate() {
                let x = t.mul(t.inverse[g], h);
                m[(row, pos(split.proj[x]))] = f64::from(split.sign[x]);
            }
            m
        })
        .collect()
}

/// Images of (ε, g) ∈ {±1} × G on R^{|G| + extra}: ε·(e_h ↦ e_{gh}) ⊕ ε·Id.
/// Index 2·g + (ε = −1) in the returned list.
pub fn fini_rep(t: &GroupTable, extra: usize) -> Vec<Matrix> {
    let m = t.order();
    let mut out = Vec::with_capacity(2 * m);
    for g in 0..m {
        for eps in [1.0, -1.0] {
            let mut a = Matrix::zeros(m + extra, m + extra);
            for h in 0..m {
                a[(t.mul(g, h), h)] = eps;
            }
            for i in 0..extra {
                a[(m + i, m + i)] = eps;
            }
            out.push(a);
        }
    }
    out
}

/// Table of {±1} × G in the indexing used by [`fini_rep`].
pub fn fini_table(t: &GroupTable) -> GroupTable {
    let m = t.order();
    let table = (0..2 * m).map(|x| (0..2 * m).map(|y| 2 * t.mul(x / 2, y / 2) + ((x % 2) ^ (y % 2))).collect()).collect();
    GroupTable::new(format!("pm1x{}", t.name), table).expect("product table")
}

/// Largest |A_a A_b − A_{ab}| over the table; zero means an exact homomorphism.
pub fn homomorphism_defect(t: &GroupTable, images: &[Matrix]) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..t.order() {
        for b in 0..t.order() {
            let d = crate::linalg::max_abs_diff(&(&images[a] * &images[b]), &images[t.mul(a, b)]);
            worst = worst.max(d);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isometry::groups_isomorphic;

    #[test]
    fn presets_valid() {
        for n in ["cyclic1", "cyclic4", "dihedral4", "quaternion8", "klein4", "z2xz4", "cyclic16"] {
            GroupTable::preset(n).unwrap();
        }
        assert!(GroupTable::preset("nope").is_err());
        assert!(!groups_isomorphic(&GroupTable::quaternion8().table, &GroupTable::dihedral(4).table));
    }

    #[test]
    fn involution_examples() {
        assert_eq!(central_involutions(&GroupTable::cyclic(4)), vec![2]);
        assert_eq!(central_involutions(&GroupTable::quaternion8()), vec![1]);
        assert!(central_involutions(&GroupTable::cyclic(3)).is_empty());
    }

    #[test]
    fn split_examples() {
        let s = coset_split(&GroupTable::cyclic(4), 2).unwrap();
        assert_eq!(s.reps, vec![0, 1]);
        assert_eq!(s.sign, vec![1, 1, -1, -1]);
        assert_eq!((s.proj[2], s.proj[3]), (0, 1));
        let q = coset_split(&GroupTable::quaternion8(), 1).unwrap();
        assert_eq!(q.reps, vec![0, 2, 4, 6]);
        assert_eq!(coset_split(&GroupTable::cyclic(2), 1).unwrap().reps, vec![0]);
        assert!(coset_split(&GroupTable::cyclic(4), 1).is_err());
    }

    #[test]
    fn classical_z4() {
        let t = GroupTable::cyclic(4);
        let r = classical_rep(&t, &coset_split(&t, 2).unwrap());
        assert_eq!(r[1], crate::linalg::matrix(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        assert_eq!(r[2], -Matrix::identity(2, 2));
        assert_eq!(homomorphism_defect(&t, &r), 0.0);
    }

    #[test]
    fn fini_z2() {
        let t = GroupTable::cyclic(2);
        let r = fini_rep(&t, 0);
        assert_eq!(r[3], crate::linalg::matrix(2, 2, &[0.0, -1.0, -1.0, 0.0]));
        assert_eq!(r[1], -Matrix::identity(2, 2));
        assert_eq!(homomorphism_defect(&fini_table(&t), &r), 0.0);
    }
}
