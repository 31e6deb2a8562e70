use num_traits::{Signed, Zero};

use super::geometry::{extreme_rays, prune_facets, ray_sum};
use super::{assemble, Fan, Hyperplane, HyperplaneSource, RawCell, WallProvenance};
use crate::error::{Error, Result};
use crate::exact_math::linalg::rank_lattice;
use crate::exact_math::{primitive_of_rational, LatticeVector, Rational, RationalVector};
use crate::network::{NeuronId, ValidatedNetwork};

/// Merge hyperplanes with equal normals, keeping first-seen order.
fn dedupe(hyperplanes: &[Hyperplane]) -> Vec<Hyperplane> {
    let mut out: Vec<Hyperplane> = Vec::new();
    for h in hyperplanes {
        let h = Hyperplane::new(&h.normal, h.source.clone()).expect("hyperplane normal is nonzero");
        match out.iter_mut().find(|o| o.normal == h.normal) {
            Some(o) => {
                if let (HyperplaneSource::Neurons(a), HyperplaneSource::Neurons(b)) = (&mut o.source, &h.source) {
                    a.extend(b.iter().copied());
                }
            }
            None => out.push(h),
        }
    }
    out
}

/// Add coordinate hyperplanes until the normals span the space.
fn augment(mut hyperplanes: Vec<Hyperplane>, dim: usize) -> Vec<Hyperplane> {
    let mut normals: Vec<LatticeVector> = hyperplanes.iter().map(|h| h.normal.clone()).collect();
    let mut rank = rank_lattice(&normals);
    for i in 0..dim {
        if rank == dim {
            break;
        }
        normals.push(LatticeVector::unit(dim, i));
        let r = rank_lattice(&normals);
        if r > rank {
            rank = r;
            hyperplanes.push(Hyperplane { normal: LatticeVector::unit(dim, i), source: HyperplaneSource::Synthetic });
        } else {
            normals.pop();
        }
    }
    hyperplanes
}

fn make_cell(constraints: Vec<LatticeVector>, dim: usize) -> RawCell {
    let rays = extreme_rays(&constraints, dim);
    let facets = prune_facets(&constraints, &rays, dim);
    RawCell { facets, rays }
}

/// Split a cell by `{<c, x> = 0}` when `c` takes both signs on its rays.
fn split(cell: &RawCell, c: &LatticeVector, dim: usize) -> Option<[RawCell; 2]> {
    let pos = cell.rays.iter().any(|r| c.dot(r).is_positive());
    let neg = cell.rays.iter().any(|r| c.dot(r).is_negative());
    if !(pos && neg) {
        return None;
    }
    let side = |c: LatticeVector| {
        let mut cons = cell.facets.clone();
        cons.push(c);
        make_cell(cons, dim)
    };
    Some([side(c.clone()), side(c.neg())])
}

fn arrangement_cells(normals: &[LatticeVector], dim: usize) -> Vec<RawCell> {
    let mut basis: Vec<usize> = Vec::new();
    let mut chosen: Vec<LatticeVector> = Vec::new();
    for (i, n) in normals.iter().enumerate() {
        chosen.push(n.clone());
        if rank_lattice(&chosen) == chosen.len() {
            basis.push(i);
        } else {
            chosen.pop();
        }
        if basis.len() == dim {
            break;
        }
    }
    let mut cells: Vec<RawCell> = (0..1usize << dim)
        .map(|mask| {
            let cons = basis
                .iter()
                .enumerate()
                .map(|(b, &i)| if mask >> b & 1 == 0 { normals[i].clone() } else { normals[i].neg() })
                .collect();
            make_cell(cons, dim)
        })
        .collect();
    for (i, n) in normals.iter().enumerate() {
        if basis.contains(&i) {
            continue;
        }
        cells = cells
            .into_iter()
            .flat_map(|cell| match split(&cell, n, dim) {
                Some(parts) => parts.to_vec(),
                None => vec![cell],
            })
            .collect();
    }
    cells
}

/// Fan of a central hyperplane arrangement.
pub fn central_fan(hyperplanes: &[Hyperplane], dim: usize) -> Result<Fan> {
    if let Some(h) = hyperplanes.iter().find(|h| h.normal.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: h.normal.dim() });
    }
    let hyperplanes = dedupe(hyperplanes);
    let normals: Vec<LatticeVector> = hyperplanes.iter().map(|h| h.normal.clone()).collect();
    let rank = rank_lattice(&normals);
    if rank < dim {
        return Err(Error::NotEssential { rank, dim });
    }
    let cells = arrangement_cells(&normals, dim);
    Ok(assemble(dim, &cells, hyperplanes).0)
}

/// Fan of the arrangement of the given normals, padded with synthetic
/// coordinate hyperplanes when the normals do not span. Zero normals are
/// skipped.
pub fn arrangement_fan(normals: &[LatticeVector], dim: usize, source: HyperplaneSource) -> Result<Fan> {
    let mut hs = Vec::new();
    for n in normals.iter().filter(|n| !n.is_zero()) {
        hs.push(Hyperplane::new(n, source.clone())?);
    }
    central_fan(&augment(dedupe(&hs), dim), dim)
}

struct Cell {
    raw: RawCell,
    /// Pre-activation covectors per layer, valid on the whole cell.
    pre: Vec<Vec<RationalVector>>,
    post: Vec<Vec<RationalVector>>,
}

impl Cell {
    fn interior(&self, dim: usize) -> RationalVector {
        let refs: Vec<&LatticeVector> = self.raw.rays.iter().collect();
        ray_sum(&refs, dim).to_rational()
    }

    fn activate(&self, pre: &[RationalVector], dim: usize) -> Vec<RationalVector> {
        let p = self.interior(dim);
        pre.iter().map(|z| if z.dot(&p).is_positive() { z.clone() } else { RationalVector::zero(dim) }).collect()
    }
}

fn compose(layer: &[Vec<Rational>], post: &[RationalVector], dim: usize) -> Vec<RationalVector> {
    layer
        .iter()
        .map(|row| row.iter().zip(post).fold(RationalVector::zero(dim), |acc, (w, v)| acc.add(&v.scale(w))))
        .collect()
}

/// The ReLU fan: the layer-one arrangement refined cone by cone along the
/// bent hyperplanes of every deeper hidden layer.
pub fn build_relu_fan(net: &ValidatedNetwork) -> Result<Fan> {
    if !net.is_unbiased() {
        return Err(Error::Biased);
    }
    let dim = net.input_dim();
    let rows: Vec<RationalVector> = net.layer(1).iter().map(|r| RationalVector::new(r.clone())).collect();
    let mut hs = Vec::new();
    for (j, row) in rows.iter().enumerate() {
        if !row.is_zero() {
            let normal = primitive_of_rational(row)?;
            hs.push(Hyperplane::new(&normal, HyperplaneSource::Neurons(vec![NeuronId::new(1, j + 1)]))?);
        }
    }
    let hyperplanes = augment(dedupe(&hs), dim);
    let normals: Vec<LatticeVector> = hyperplanes.iter().map(|h| h.normal.clone()).collect();

    let mut cells: Vec<Cell> = arrangement_cells(&normals, dim)
        .into_iter()
        .map(|raw| {
            let mut cell = Cell { raw, pre: vec![rows.clone()], post: Vec::new() };
            cell.post.push(cell.activate(&rows, dim));
            cell
        })
        .collect();

    let mut degenerate = Vec::new();
    for layer in 2..=net.hidden_layers() {
        for cell in cells.iter_mut() {
            let pre = compose(net.layer(layer), cell.post.last().unwrap(), dim);
            cell.pre.push(pre);
        }
        for j in 0..net.architecture()[layer] {
            let mut next = Vec::with_capacity(cells.len());
            for cell in cells {
                let z = &cell.pre[layer - 1][j];
                if z.is_zero() {
                    degenerate.push(NeuronId::new(layer, j + 1));
                    next.push(cell);
                    continue;
                }
                let c = primitive_of_rational(z)?;
                match split(&cell.raw, &c, dim) {
                    Some([a, b]) => {
                        next.push(Cell { raw: a, pre: cell.pre.clone(), post: cell.post.clone() });
                        next.push(Cell { raw: b, pre: cell.pre, post: cell.post });
                    }
                    None => next.push(cell),
                }
            }
            cells = next;
        }
        for cell in cells.iter_mut() {
            let post = cell.activate(&cell.pre[layer - 1], dim);
            cell.post.push(post);
        }
    }

    let raws: Vec<RawCell> = cells.iter().map(|c| c.raw.clone()).collect();
    let (mut fan, origin) = assemble(dim, &raws, hyperplanes);
    for w in 0..fan.walls.len() {
        if fan.walls[w].provenance != WallProvenance::Unlabeled {
            continue;
        }
        let gens = fan.wall_generators(w);
        let cell = &cells[origin[fan.walls[w].cones[0]]];
        let bent = cell.pre.iter().enumerate().skip(1).find_map(|(l, zs)| {
            zs.iter()
                .position(|z| !z.is_zero() && gens.iter().all(|g| z.pair(g).is_zero()))
                .map(|j| NeuronId::new(l + 1, j + 1))
        });
        if let Some(id) = bent {
            fan.walls[w].provenance = WallProvenance::Bent(id);
        }
    }
    degenerate.sort_unstable();
    degenerate.dedup();
    fan.degenerate = degenerate;
    Ok(fan)
}
