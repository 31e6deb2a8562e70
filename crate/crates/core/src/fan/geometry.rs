//! Cone primitives on integer H- and V-representations.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::exact_math::linalg::rank_lattice;
use crate::exact_math::{combinations, kernel_normal, normalize_primitive, LatticeVector};

/// Extreme rays of the pointed cone `{x : <c, x> >= 0 for all c}`.
pub(crate) fn extreme_rays(constraints: &[LatticeVector], dim: usize) -> Vec<LatticeVector> {
    let mut found = BTreeSet::new();
    let unique: Vec<LatticeVector> = constraints
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| normalize_primitive(c).unwrap().0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for subset in combinations(unique.len(), dim - 1) {
        let gens: Vec<LatticeVector> = subset.iter().map(|&i| unique[i].clone()).collect();
        let Ok(k) = kernel_normal(&gens, dim) else {
            continue;
        };
        for cand in [k.clone(), k.neg()] {
            if unique.iter().all(|c| !c.dot(&cand).is_negative()) {
                found.insert(cand);
            }
        }
    }
    found.into_iter().collect()
}

/// The constraints that are facets of the cone with the given rays, as
/// deduplicated primitive covectors.
pub(crate) fn prune_facets(constraints: &[LatticeVector], rays: &[LatticeVector], dim: usize) -> Vec<LatticeVector> {
    let mut out = BTreeSet::new();
    for c in constraints.iter().filter(|c| !c.is_zero()) {
        let c = normalize_primitive(c).unwrap().0;
        let tight: Vec<LatticeVector> = rays.iter().filter(|r| c.dot(r).is_zero()).cloned().collect();
        if rank_lattice(&tight) + 1 == dim {
            out.insert(c);
        }
    }
    out.into_iter().collect()
}

/// Facet covectors of the cone generated by `rays`. Only meaningful for a
/// full-dimensional cone; a cone with lineality gets fewer than `dim`
/// independent facets.
pub(crate) fn facets_from_rays(rays: &[LatticeVector], dim: usize) -> Vec<LatticeVector> {
    let mut out = BTreeSet::new();
    for subset in combinations(rays.len(), dim - 1) {
        let gens: Vec<LatticeVector> = subset.iter().map(|&i| rays[i].clone()).collect();
        let Ok(k) = kernel_normal(&gens, dim) else {
            continue;
        };
        let vals: Vec<BigInt> = rays.iter().map(|r| k.dot(r)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            out.insert(k);
        } else if vals.iter().all(|v| !v.is_positive()) {
            out.insert(k.neg());
        }
    }
    out.into_iter().collect()
}

pub(crate) fn ray_sum(rays: &[&LatticeVector], dim: usize) -> LatticeVector {
    rays.iter().fold(LatticeVector::zero(dim), |acc, r| acc.add(r))
}

/// Counterclockwise angular order in the plane starting at the positive
/// x-axis.
pub(crate) fn angular_cmp(a: &LatticeVector, b: &LatticeVector) -> Ordering {
    let half = |v: &LatticeVector| {
        let (x, y) = (&v.coords()[0], &v.coords()[1]);
        if y.is_positive() || (y.is_zero() && x.is_positive()) {
            0
        } else {
            1
        }
    };
    half(a).cmp(&half(b)).then_with(|| {
        let cross = &a.coords()[0] * &b.coords()[1] - &a.coords()[1] * &b.coords()[0];
        BigInt::zero().cmp(&cross)
    })
}

pub(crate) fn cross2(a: &LatticeVector, b: &LatticeVector) -> BigInt {
    &a.coords()[0] * &b.coords()[1] - &a.coords()[1] * &b.coords()[0]
}
