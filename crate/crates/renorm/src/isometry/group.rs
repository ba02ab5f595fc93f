use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::config::GROUP_TOL;
use crate::error::{Error, Result};
use crate::linalg::{self, serde_rows_vec, Matrix};

/// A closed finite set of invertible matrices with its multiplication table.
/// `table[a][b]` is the index of `elements[a] * elements[b]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiniteMatrixGroup {
    #[serde(with = "serde_rows_vec")]
    pub elements: Vec<Matrix>,
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    pub inverse: Vec<usize>,
    pub contains_minus_id: bool,
}

/// Hash key for approximate matrix lookup: entries rounded to a coarse grid.
fn key(m: &Matrix) -> Vec<i64> {
    m.iter().map(|x| (x * 1e6).round() as i64).collect()
}

struct Index {
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl Index {
    fn new() -> Self {
        Index { buckets: HashMap::new() }
    }

    fn find(&self, elems: &[Matrix], m: &Matrix) -> Option<usize> {
        // rounding can split near-equal matrices across buckets: probe exact key then scan fallback
        if let Some(b) = self.buckets.get(&key(m)) {
            for &i in b {
                if linalg::max_abs_diff(&elems[i], m) <= GROUP_TOL {
                    return Some(i);
                }
            }
        }
        None
    }

    fn insert(&mut self, m: &Matrix, i: usize) {
        self.buckets.entry(key(m)).or_default().push(i);
    }
}

fn find_slow(elems: &[Matrix], m: &Matrix) -> Option<usize> {
    elems.iter().position(|e| linalg::max_abs_diff(e, m) <= GROUP_TOL)
}

impl FiniteMatrixGroup {
    pub fn dim(&self) -> usize {
        self.elements.first().map_or(0, |m| m.nrows())
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Build from a full element list, checking closure and computing the table.
    pub fn from_elements(elements: Vec<Matrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Group("empty element list".into()));
        }
        let n = elements[0].nrows();
        for m in &elements {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Group("elements must be square of a common size".into()));
            }
            linalg::check_invertible(m)?;
        }
        for (i, a) in elements.iter().enumerate() {
            if elements[..i].iter().any(|b| linalg::max_abs_diff(a, b) <= GROUP_TOL) {
                return Err(Error::Group(format!("element {i} is duplicated")));
            }
        }
        let mut index = Index::new();
        for (i, m) in elements.iter().enumerate() {
            index.insert(m, i);
        }
        let lookup = |m: &Matrix| index.find(&elements, m).or_else(|| find_slow(&elements, m));
        let k = elements.len();
        let mut table = vec![vec![0; k]; k];
        for a in 0..k {
            for b in 0..k {
                let p = &elements[a] * &elements[b];
                table[a][b] = lookup(&p).ok_or_else(|| Error::Group(format!("not closed: product of {a} and {b}")))?;
            }
        }
        let id = Matrix::identity(n, n);
        let identity = lookup(&id).ok_or_else(|| Error::Group("identity missing".into()))?;
        let inverse: Vec<usize> = (0..k)
            .map(|a| (0..k).find(|&b| table[a][b] == identity).ok_or_else(|| Error::Group(format!("no inverse for {a}"))))
            .collect::<Result<_>>()?;
        let contains_minus_id = lookup(&(-id)).is_some();
        Ok(FiniteMatrixGroup { elements, table, identity, inverse, contains_minus_id })
    }

    pub fn trivial(n: usize) -> Self {
        Self::from_elements(vec![Matrix::identity(n, n)]).expect("identity group")
    }

    pub fn plus_minus_id(n: usize) -> Self {
        let id = Matrix::identity(n, n);
        Self::from_elements(vec![id.clone(), -id]).expect("{±Id}")
    }

    /// Cyclic rotation group of order k on R².
    pub fn rotations(k: usize) -> Self {
        group_closure(&[linalg::rotation2(std::f64::consts::TAU / k as f64)], 4 * k + 4).expect("rotation group")
    }

    pub fn index_of(&self, m: &Matrix) -> Option<usize> {
        find_slow(&self.elements, m)
    }

    /// Distance (max-abs entry) from `m` to the nearest element.
    pub fn distance(&self, m: &Matrix) -> f64 {
        self.elements.iter().map(|e| linalg::max_abs_diff(e, m)).fold(f64::INFINITY, f64::min)
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.table[x][a];
            k += 1;
        }
        k
    }
}

/// Closure of a generating set by repeated right multiplication, with
/// de-duplication at `GROUP_TOL`.
pub fn group_closure(generators: &[Matrix], cap: usize) -> Result<FiniteMatrixGroup> {
    let n = generators.first().map(|g| g.nrows()).ok_or_else(|| Error::arg("no generators"))?;
    for g in generators {
        linalg::check_invertible(g)?;
        if g.nrows() != n {
            return Err(Error::arg("generators must share a dimension"));
        }
    }
    let mut elems = vec![Matrix::identity(n, n)];
    let mut index = Index::new();
    index.insert(&elems[0], 0);
    let mut frontier = 0;
    while frontier < elems.len() {
        let cur = elems[frontier].clone();
        frontier += 1;
        for g in generators {
            let p = &cur * g;
            if index.find(&elems, &p).or_else(|| find_slow(&elems, &p)).is_none() {
                elems.push(p.clone());
                index.insert(&p, elems.len() - 1);
                if elems.len() > cap {
                    return Err(Error::Group(format!("closure exceeded {cap} elements; group likely infinite")));
                }
            }
        }
    }
    FiniteMatrixGroup::from_elements(elems)
}

/// Search for an isomorphism between two multiplication tables.
pub fn groups_isomorphic(a: &[Vec<usize>], b: &[Vec<usize>]) -> bool {
    isomorphism(a, b).is_some()
}

fn identity_of(t: &[Vec<usize>]) -> Option<usize> {
    (0..t.len()).find(|&e| (0..t.len()).all(|x| t[e][x] == x && t[x][e] == x))
}

fn orders(t: &[Vec<usize>], e: usize) -> Vec<usize> {
    (0..t.len())
        .map(|a| {
            let mut x = a;
            let mut k = 1;
            while x != e && k <= t.len() {
                x = t[x][a];
                k += 1;
            }
            k
        })
        .collect()
}

/// Returns a bijection `phi` with `phi[a·b] = phi[a]·phi[b]`, if any.
pub fn isomorphism(a: &[Vec<usize>], b: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = a.len();
    if n != b.len() || n == 0 {
        return None;
    }
    let (ea, eb) = (identity_of(a)?, identity_of(b)?);
    let (oa, ob) = (orders(a, ea), orders(b, eb));
    let mut pa = oa.clone();
    let mut pb = ob.clone();
    pa.sort_unstable();
    pb.sort_unstable();
    if pa != pb {
        return None;
    }
    // greedy generating set of a
    let mut gens: Vec<usize> = Vec::new();
    let mut span = vec![ea];
    let close = |gens: &[usize]| -> Vec<usize> {
        let mut seen = vec![false; n];
        let mut out = vec![ea];
        seen[ea] = true;
        let mut i = 0;
        while i < out.len() {
            for &g in gens {
                let p = a[out[i]][g];
                if !seen[p] {
                    seen[p] = true;
                    out.push(p);
                }
            }
            i += 1;
        }
        out
    };
    let mut by_order: Vec<usize> = (0..n).collect();
    by_order.sort_by_key(|&x| std::cmp::Reverse(oa[x]));
    while span.len() < n {
        let g = *by_order.iter().find(|x| !span.contains(x)).expect("element outside span");
        gens.push(g);
        span = close(&gens);
    }

    fn extend(a: &[Vec<usize>], b: &[Vec<usize>], gens: &[usize], imgs: &[usize], ea: usize, eb: usize) -> Option<Vec<usize>> {
        let n = a.len();
        let mut phi = vec![usize::MAX; n];
        phi[ea] = eb;
        let mut queue = vec![ea];
        let mut i = 0;
        while i < queue.len() {
            let x = queue[i];
            i += 1;
            for (g, &h) in gens.iter().zip(imgs) {
                let p = a[x][*g];
                let q = b[phi[x]][h];
                if phi[p] == usize::MAX {
                    phi[p] = q;
                    queue.push(p);
                } else if phi[p] != q {
                    return None;
                }
            }
        }
        let mut hit = vec![false; n];
        for &v in &phi {
            if v == usize::MAX || hit[v] {
                return None;
            }
            hit[v] = true;
        }
        for x in 0..n {
            for y in 0..n {
                if phi[a[x][y]] != b[phi[x]][phi[y]] {
                    return None;
                }
            }
        }
        Some(phi)
    }

    let cands: Vec<Vec<usize>> = gens.iter().map(|&g| (0..n).filter(|&h| ob[h] == oa[g]).collect()).collect();
    let mut choice = vec![0usize; gens.len()];
    loop {
        let imgs: Vec<usize> = choice.iter().zip(&cands).map(|(&c, cs)| cs[c]).collect();
        if let Some(phi) = extend(a, b, &gens, &imgs, ea, eb) {
            return Some(phi);
        }
        let mut k = 0;
        loop {
            if k == gens.len() {
                return None;
            }
            choice[k] += 1;
            if choice[k] < cands[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic(n: usize) -> Vec<Vec<usize>> {
        (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect()
    }

    fn klein() -> Vec<Vec<usize>> {
        (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect()
    }

    #[test]
    fn closure_examples() {
        assert_eq!(group_closure(&[linalg::rotation2(std::f64::consts::FRAC_PI_2)], 100).unwrap().order(), 4);
        assert_eq!(group_closure(&[-Matrix::identity(3, 3)], 100).unwrap().order(), 2);
        assert!(group_closure(&[linalg::rotation2(1.0)], 10000).is_err());
    }

    #[test]
    fn isomorphism_examples() {
        assert!(groups_isomorphic(&cyclic(4), &cyclic(4)));
        assert!(!groups_isomorphic(&cyclic(4), &klein()));
        assert!(!groups_isomorphic(&cyclic(4), &cyclic(5)));
    }

    #[test]
    fn c4_table() {
        let g = FiniteMatrixGroup::rotations(4);
        assert!(g.contains_minus_id);
        assert!(groups_isomorphic(&g.table, &cyclic(4)));
    }
}
