//! Complete polyhedral fans: construction from hyperplane arrangements and
//! ReLU networks, walls with provenance, and structural validation.

mod build;
mod geometry;

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_math::linalg::rank_lattice;
use crate::exact_math::{normalize_primitive, LatticeVector, RationalVector};
use crate::network::NeuronId;

pub use build::{arrangement_fan, build_relu_fan, central_fan};

use geometry::{angular_cmp, cross2, extreme_rays, facets_from_rays, ray_sum};

/// Where a hyperplane of the arrangement came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HyperplaneSource {
    /// First-layer neurons whose rows span this hyperplane.
    Neurons(Vec<NeuronId>),
    /// Coordinate hyperplane added to make the arrangement essential.
    Synthetic,
    /// Span of a wall of a function's nonlinear locus.
    Extended,
    /// Difference of two arguments of a maximum in an expression.
    MaxArguments,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperplane {
    /// Primitive, first nonzero coordinate positive.
    pub normal: LatticeVector,
    pub source: HyperplaneSource,
}

impl Hyperplane {
    /// Normalizes `normal` to its primitive sign-canonical form.
    pub fn new(normal: &LatticeVector, source: HyperplaneSource) -> Result<Self> {
        let (p, _) = normalize_primitive(normal)?;
        Ok(Hyperplane { normal: p.sign_canonical(), source })
    }

    pub fn is_synthetic(&self) -> bool {
        self.source == HyperplaneSource::Synthetic
    }
}

/// A maximal cone. Rays are indices into [`Fan::rays`]; in the plane they
/// are stored counterclockwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    rays: Vec<usize>,
    facets: Vec<LatticeVector>,
}

impl Cone {
    pub fn ray_ids(&self) -> &[usize] {
        &self.rays
    }

    /// Inward facet covectors: the cone is `{x : <c, x> >= 0}`.
    pub fn facets(&self) -> &[LatticeVector] {
        &self.facets
    }

    pub fn contains(&self, x: &RationalVector) -> bool {
        self.facets.iter().all(|c| !x.pair(c).is_negative())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WallProvenance {
    /// Lies in `Fan::hyperplanes()[i]`.
    Hyperplane(usize),
    /// Piece of the bent hyperplane of a neuron in layer 2 or deeper.
    Bent(NeuronId),
    Unlabeled,
}

/// A codimension-one cone shared by two maximal cones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub rays: Vec<usize>,
    /// Incident maximal cones, lower index first.
    pub cones: [usize; 2],
    /// Primitive sign-canonical normal of the span.
    pub normal: LatticeVector,
    pub provenance: WallProvenance,
}

/// Walls sharing one hyperplane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallGroup {
    pub normal: LatticeVector,
    pub walls: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    dim: usize,
    rays: Vec<LatticeVector>,
    cones: Vec<Cone>,
    walls: Vec<Wall>,
    hyperplanes: Vec<Hyperplane>,
    degenerate: Vec<NeuronId>,
}

impl Fan {
    /// Fan from explicit rays and maximal cones given as ray index lists.
    /// The input order is kept; call [`validate_fan`] to check the result.
    pub fn from_cones(dim: usize, rays: Vec<LatticeVector>, cones: Vec<Vec<usize>>) -> Result<Fan> {
        let mut prim = Vec::with_capacity(rays.len());
        for r in &rays {
            if r.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.dim() });
            }
            prim.push(normalize_primitive(r)?.0);
        }
        let mut built = Vec::with_capacity(cones.len());
        for ids in cones {
            if let Some(&bad) = ids.iter().find(|&&i| i >= prim.len()) {
                return Err(Error::InvalidFan(format!("ray index {bad} out of range")));
            }
            let vs: Vec<LatticeVector> = ids.iter().map(|&i| prim[i].clone()).collect();
            built.push(Cone { rays: ids, facets: facets_from_rays(&vs, dim) });
        }
        let mut fan =
            Fan { dim, rays: prim, cones: built, walls: Vec::new(), hyperplanes: Vec::new(), degenerate: Vec::new() };
        fan.walls = fan.match_walls();
        Ok(fan)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn cone(&self, i: usize) -> &Cone {
        &self.cones[i]
    }

    pub fn cone_rays(&self, i: usize) -> Vec<&LatticeVector> {
        self.cones[i].rays.iter().map(|&r| &self.rays[r]).collect()
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    /// Neurons whose pre-activation vanished identically on some cone
    /// during refinement.
    pub fn degenerate_neurons(&self) -> &[NeuronId] {
        &self.degenerate
    }

    pub fn wall_generators(&self, w: usize) -> Vec<LatticeVector> {
        self.walls[w].rays.iter().map(|&r| self.rays[r].clone()).collect()
    }

    /// Sum of the cone's rays, a lattice point in its interior.
    pub fn interior_point(&self, cone: usize) -> LatticeVector {
        ray_sum(&self.cone_rays(cone), self.dim)
    }

    pub fn is_synthetic_wall(&self, w: usize) -> bool {
        matches!(self.walls[w].provenance, WallProvenance::Hyperplane(h) if self.hyperplanes[h].is_synthetic())
    }

    /// Every facet keyed by (normal, tight rays), with its incident cones.
    fn facet_incidence(&self) -> BTreeMap<(LatticeVector, Vec<usize>), Vec<usize>> {
        let mut map: BTreeMap<(LatticeVector, Vec<usize>), Vec<usize>> = BTreeMap::new();
        for (ci, cone) in self.cones.iter().enumerate() {
            for f in &cone.facets {
                let mut tight: Vec<usize> =
                    cone.rays.iter().copied().filter(|&r| f.dot(&self.rays[r]).is_zero()).collect();
                tight.sort_unstable();
                map.entry((f.clone().sign_canonical(), tight)).or_default().push(ci);
            }
        }
        map
    }

    fn match_walls(&self) -> Vec<Wall> {
        let mut walls: Vec<Wall> = self
            .facet_incidence()
            .into_iter()
            .filter(|(_, cones)| cones.len() == 2)
            .map(|((normal, rays), cones)| {
                let provenance = self
                    .hyperplanes
                    .iter()
                    .position(|h| h.normal == normal)
                    .map_or(WallProvenance::Unlabeled, WallProvenance::Hyperplane);
                Wall { rays, cones: [cones[0].min(cones[1]), cones[0].max(cones[1])], normal, provenance }
            })
            .collect();
        walls.sort_by(|a, b| a.rays.cmp(&b.rays).then_with(|| a.cones.cmp(&b.cones)));
        walls
    }
}

/// A cell produced during construction, before global ray indexing.
#[derive(Clone, Debug)]
pub(crate) struct RawCell {
    pub facets: Vec<LatticeVector>,
    pub rays: Vec<LatticeVector>,
}

/// Index rays and cones canonically. Returns the fan and, for each cone,
/// the index of the cell it came from.
pub(crate) fn assemble(dim: usize, cells: &[RawCell], hyperplanes: Vec<Hyperplane>) -> (Fan, Vec<usize>) {
    let mut rays: Vec<LatticeVector> = cells
        .iter()
        .flat_map(|c| c.rays.iter().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if dim == 2 {
        rays.sort_by(angular_cmp);
    } else {
        rays.reverse();
    }
    let index: BTreeMap<&LatticeVector, usize> = rays.iter().enumerate().map(|(i, r)| (r, i)).collect();

    let mut cones: Vec<(Vec<i8>, Cone, usize)> = cells
        .iter()
        .enumerate()
        .map(|(ci, cell)| {
            let mut ids: Vec<usize> = cell.rays.iter().map(|r| index[r]).collect();
            ids.sort_unstable();
            if dim == 2 && ids.len() == 2 && cross2(&rays[ids[0]], &rays[ids[1]]).is_negative() {
                ids.swap(0, 1);
            }
            let refs: Vec<&LatticeVector> = cell.rays.iter().collect();
            let p = ray_sum(&refs, dim);
            let signs: Vec<i8> = hyperplanes
                .iter()
                .map(|h| {
                    let v = h.normal.dot(&p);
                    if v.is_positive() {
                        0
                    } else if v.is_zero() {
                        1
                    } else {
                        2
                    }
                })
                .collect();
            (signs, Cone { rays: ids, facets: cell.facets.clone() }, ci)
        })
        .collect();
    if dim == 2 {
        cones.sort_by(|a, b| a.1.rays.cmp(&b.1.rays));
    } else {
        cones.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| sorted(&a.1.rays).cmp(&sorted(&b.1.rays))));
    }
    let origin = cones.iter().map(|c| c.2).collect();
    let mut fan = Fan {
        dim,
        rays,
        cones: cones.into_iter().map(|c| c.1).collect(),
        walls: Vec::new(),
        hyperplanes,
        degenerate: Vec::new(),
    };
    fan.walls = fan.match_walls();
    (fan, origin)
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

pub fn enumerate_walls(fan: &Fan) -> &[Wall] {
    fan.walls()
}

/// Walls grouped by the hyperplane containing them, ordered by normal.
pub fn wall_groups(fan: &Fan) -> Vec<WallGroup> {
    let mut map: BTreeMap<LatticeVector, Vec<usize>> = BTreeMap::new();
    for (i, w) in fan.walls.iter().enumerate() {
        map.entry(w.normal.clone()).or_default().push(i);
    }
    map.into_iter().map(|(normal, walls)| WallGroup { normal, walls }).collect()
}

/// Lowest-index maximal cone containing `x`.
pub fn cone_containing(fan: &Fan, x: &RationalVector) -> Option<usize> {
    fan.cones.iter().position(|c| c.contains(x))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FanViolation {
    NotFullDimensional {
        cone: usize,
    },
    NotStronglyConvex {
        cone: usize,
    },
    FaceProperty {
        cones: [usize; 2],
    },
    /// A facet of `cone` with this normal is shared by `count` maximal cones.
    FacetIncidence {
        cone: usize,
        normal: LatticeVector,
        count: usize,
    },
    RaysDoNotSpan,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FanReport {
    pub violations: Vec<FanViolation>,
}

impl FanReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        !self.violations.iter().any(|v| matches!(v, FanViolation::FacetIncidence { .. } | FanViolation::RaysDoNotSpan))
    }
}

/// Structural checks: strong convexity, pairwise intersection in common
/// faces, two cones on every facet, and rays positively spanning.
pub fn validate_fan(fan: &Fan) -> FanReport {
    let mut violations = Vec::new();
    let n = fan.dim;
    let mut pointed = vec![true; fan.cones.len()];
    for (i, cone) in fan.cones.iter().enumerate() {
        let rays: Vec<LatticeVector> = fan.cone_rays(i).into_iter().cloned().collect();
        if rank_lattice(&rays) < n {
            violations.push(FanViolation::NotFullDimensional { cone: i });
            pointed[i] = false;
        } else if rank_lattice(&cone.facets) < n {
            violations.push(FanViolation::NotStronglyConvex { cone: i });
            pointed[i] = false;
        }
    }

    for a in 0..fan.cones.len() {
        for b in a + 1..fan.cones.len() {
            if pointed[a] && pointed[b] && !meet_in_face(fan, a, b) {
                violations.push(FanViolation::FaceProperty { cones: [a, b] });
            }
        }
    }

    for ((normal, _), cones) in fan.facet_incidence() {
        if cones.len() != 2 {
            violations.push(FanViolation::FacetIncidence { cone: cones[0], normal, count: cones.len() });
        }
    }

    if rank_lattice(&fan.rays) < n || !extreme_rays(&fan.rays, n).is_empty() {
        violations.push(FanViolation::RaysDoNotSpan);
    }
    FanReport { violations }
}

/// True when the intersection of cones `a` and `b` is a face of both.
fn meet_in_face(fan: &Fan, a: usize, b: usize) -> bool {
    let (ca, cb) = (&fan.cones[a], &fan.cones[b]);
    let mut all = ca.facets.clone();
    all.extend(cb.facets.iter().cloned());
    let meet = extreme_rays(&all, fan.dim);
    let is_face_of = |cone: &Cone, other: &Cone| {
        let tight: Vec<&LatticeVector> =
            cone.facets.iter().filter(|f| meet.iter().all(|r| f.dot(r).is_zero())).collect();
        cone.rays.iter().all(|&r| {
            let ray = &fan.rays[r];
            !tight.iter().all(|f| f.dot(ray).is_zero()) || other.contains(&ray.to_rational())
        })
    };
    is_face_of(ca, cb) && is_face_of(cb, ca)
}
