//! End-to-end construction: abstract group → signed-permutation representation →
//! separated point family → pimple norm → isometry group recovery.

use serde::{Deserialize, Serialize};

use crate::complex::{complex_structures, ComplexStructureReport};
use crate::error::{Error, Result};
use crate::isometry::{
    enumerate_tip_candidates, falsify_search, groups_isomorphic, FalsifyConfig, FiniteMatrixGroup, IsometryGroupReport, KnownSet,
};
use crate::linalg::{self, Matrix};
use crate::norm::NormObject;
use crate::orbit::{build_point_family, PointFamily};
use crate::pimple::{schedule_parameters, PimpleSpec, ScheduleConfig};
use crate::rep::{central_involutions, classical_rep, coset_split, GroupTable};

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum BaseChoice {
    /// ℓ4: strictly convex and invariant only under signed permutations.
    #[default]
    L4,
    Euclidean,
}

impl BaseChoice {
    pub fn build(self, dim: usize) -> NormObject {
        match self {
            BaseChoice::L4 => NormObject::lp(dim, 4.0),
            BaseChoice::Euclidean => NormObject::euclidean(dim),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepresentConfig {
    pub dim: usize,
    pub base: BaseChoice,
    pub schedule: ScheduleConfig,
    pub falsify: FalsifyConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepresentReport {
    pub group: GroupTable,
    pub involution: usize,
    pub representation_dim: usize,
    pub homomorphism_defect: f64,
    pub family: PointFamily,
    pub spec: PimpleSpec,
    pub isometries: IsometryGroupReport,
    pub complex_structures: ComplexStructureReport,
}

/// Block-diagonal copies of each matrix.
fn replicate(ms: &[Matrix], copies: usize) -> Vec<Matrix> {
    ms.iter()
        .map(|m| {
            let d = m.nrows();
            let mut out = Matrix::zeros(d * copies, d * copies);
            for c in 0..copies {
                out.view_mut((c * d, c * d), (d, d)).copy_from(m);
            }
            out
        })
        .collect()
}

/// Recovers the isometry group of a pimple norm and compares it to `target`.
pub fn recover_group(spec: &PimpleSpec, target: &GroupTable, falsify: &FalsifyConfig) -> Result<IsometryGroupReport> {
    let cands = enumerate_tip_candidates(spec, falsify.seed)?;
    let found = FiniteMatrixGroup::from_elements(cands.maps.clone())?;
    let contains_given_group = spec.group.elements.iter().all(|g| found.distance(g) < 1e-7);
    let norm = NormObject::pimple(spec.clone());
    let falsifier = falsify_search(&norm, &KnownSet::Finite(found.clone()), falsify)?;
    Ok(IsometryGroupReport {
        order: found.order(),
        isomorphic_to_target: groups_isomorphic(&found.table, &target.table),
        table: found.table.clone(),
        elements: found.elements,
        target: target.name.clone(),
        contains_given_group,
        tip_stats: cands.stats,
        falsifier,
    })
}

pub fn represent(group: &GroupTable, cfg: &RepresentConfig) -> Result<RepresentReport> {
    let j = *central_involutions(group).first().ok_or_else(|| Error::arg(format!("{} has no central involution", group.name)))?;
    let split = coset_split(group, j)?;
    let d = split.reps.len();
    if cfg.dim == 0 || !cfg.dim.is_multiple_of(d) {
        return Err(Error::arg(format!("dimension must be a positive multiple of {d}")));
    }
    let images = replicate(&classical_rep(group, &split), cfg.dim / d);
    let defect = crate::rep::homomorphism_defect(group, &images);
    let g = FiniteMatrixGroup::from_elements(images)?;
    if g.order() != group.order() {
        return Err(Error::Group("representation is not faithful".into()));
    }
    let base = cfg.base.build(cfg.dim);
    let x0 = linalg::basis(cfg.dim, 0);
    let family = build_point_family(&g, &base, &x0)?;
    let spec = schedule_parameters(&base, &g, &family.vectors(), &cfg.schedule)?;
    let isometries = recover_group(&spec, group, &cfg.falsify)?;
    let found = FiniteMatrixGroup::from_elements(isometries.elements.clone())?;
    let complex_structures = complex_structures(&found)?;
    Ok(RepresentReport {
        group: group.clone(),
        involution: j,
        representation_dim: cfg.dim,
        homomorphism_defect: defect,
        family,
        spec,
        isometries,
        complex_structures,
    })
}
