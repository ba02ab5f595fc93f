//! Exact-geometry oracle for planar specs: the convex polygon spanned by a
//! dense sample of the base sphere and the tips.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::norm::gauge_from_membership;

use super::PimpleSpec;

pub struct PolygonOracle {
    /// Hull vertices in counter-clockwise order, starting at the smallest angle.
    verts: Vec<[f64; 2]>,
    angles: Vec<f64>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl PolygonOracle {
    pub fn new(spec: &PimpleSpec, resolution: usize) -> Result<Self> {
        if spec.dim() != 2 {
            return Err(Error::arg("polygon oracle needs a planar spec"));
        }
        let mut pts = Vec::with_capacity(resolution + 16);
        for j in 0..resolution {
            let t = std::f64::consts::TAU * j as f64 / resolution as f64;
            let v = Vector::from_vec(vec![t.cos(), t.sin()]);
            let s = spec.base.eval(&v)?;
            pts.push([v[0] / s, v[1] / s]);
        }
        for t in spec.tips() {
            pts.push([t[0], t[1]]);
        }
        let mut verts = hull(pts);
        let angles0: Vec<f64> = verts.iter().map(|v| v[1].atan2(v[0])).collect();
        let start = (0..verts.len()).min_by(|&a, &b| angles0[a].total_cmp(&angles0[b])).unwrap_or(0);
        verts.rotate_left(start);
        let angles = verts.iter().map(|v| v[1].atan2(v[0])).collect();
        Ok(PolygonOracle { verts, angles })
    }

    pub fn contains(&self, q: &Vector) -> bool {
        let m = self.verts.len();
        let a = q[1].atan2(q[0]);
        // last vertex whose angle is ≤ a, cyclically
        let i = match self.angles.partition_point(|&x| x <= a) {
            0 => m - 1,
            p => p - 1,
        };
        let j = (i + 1) % m;
        cross(self.verts[i], self.verts[j], [q[0], q[1]]) >= 0.0
    }

    pub fn gauge(&self, y: &Vector) -> Result<f64> {
        gauge_from_membership(|q| self.contains(q), y, 1e-13)
    }
}
