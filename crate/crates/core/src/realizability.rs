//! Deciding whether a homogeneous CPWL function is computed by an unbiased
//! one-hidden-layer network, and building such a network when it is.
//!
//! The bend locus of the function is extended to full hyperplanes; the
//! function is shallow-realizable exactly when every wall inside one such
//! hyperplane carries the same intersection number.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::divisor::{extract_support, intersection_number, wall_curve, wall_numbers, SupportFunction};
use crate::error::{Error, Result};
use crate::exact_math::{LatticeVector, Rational, RationalVector};
use crate::expr::{compile_expression, Expr};
use crate::fan::{arrangement_fan, build_relu_fan, Fan, Hyperplane, HyperplaneSource};
use crate::network::{validate, NetworkSpec, ValidatedNetwork};

/// The ways a function can be handed to the classifier.
#[derive(Clone, Debug)]
pub enum CpwlInput {
    Support(SupportFunction),
    Network(ValidatedNetwork),
    Expression { expr: Expr, dim: usize },
}

impl CpwlInput {
    pub fn to_support(&self) -> Result<SupportFunction> {
        match self {
            CpwlInput::Support(s) => Ok(s.clone()),
            CpwlInput::Network(net) => {
                let fan = Arc::new(build_relu_fan(net)?);
                extract_support(net, fan)
            }
            CpwlInput::Expression { expr, dim } => compile_expression(expr, *dim),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallNumber {
    /// Index into the walls of the report's fan.
    pub wall: usize,
    pub number: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperplaneGroup {
    pub normal: LatticeVector,
    pub walls: Vec<WallNumber>,
}

impl HyperplaneGroup {
    pub fn passes(&self) -> bool {
        self.walls.windows(2).all(|w| w[0].number == w[1].number)
    }

    pub fn spread(&self) -> Rational {
        let min = self.walls.iter().map(|w| &w.number).min();
        let max = self.walls.iter().map(|w| &w.number).max();
        match (min, max) {
            (Some(a), Some(b)) => b - a,
            _ => Rational::zero(),
        }
    }
}

/// A hyperplane carrying two walls with different intersection numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub normal: LatticeVector,
    pub walls: [WallNumber; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Synthesis {
    pub network: NetworkSpec,
    /// `f = f_network + <correction, x>`.
    pub correction: RationalVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizabilityReport {
    pub realizable: bool,
    /// Arrangement of the extended bend hyperplanes, padded if needed.
    pub fan: Arc<Fan>,
    pub support: SupportFunction,
    pub groups: Vec<HyperplaneGroup>,
    pub witness: Option<Witness>,
    pub synthesis: Option<Synthesis>,
}

impl RealizabilityReport {
    pub fn failing_groups(&self) -> impl Iterator<Item = &HyperplaneGroup> {
        self.groups.iter().filter(|g| !g.passes())
    }
}

/// Spans of the walls with nonzero intersection number, ascending by
/// normal.
pub fn nonlinear_locus_hyperplanes(s: &SupportFunction) -> Result<Vec<Hyperplane>> {
    let numbers = wall_numbers(s)?;
    let mut normals: Vec<LatticeVector> =
        s.fan().walls().iter().zip(&numbers).filter(|(_, n)| !n.is_zero()).map(|(w, _)| w.normal.clone()).collect();
    normals.sort();
    normals.dedup();
    normals.into_iter().map(|n| Hyperplane::new(&n, HyperplaneSource::Extended)).collect()
}

/// Check the criterion on the arrangement of the function's extended bend
/// hyperplanes. Synthetic padding walls are left out of the groups.
pub fn criterion_check(s: &SupportFunction) -> Result<RealizabilityReport> {
    let hs = nonlinear_locus_hyperplanes(s)?;
    let normals: Vec<LatticeVector> = hs.into_iter().map(|h| h.normal).collect();
    criterion_check_on(s, &normals)
}

/// As [`criterion_check`], with the extended hyperplanes given explicitly
/// in the order the arrangement should be built from.
pub fn criterion_check_on(s: &SupportFunction, normals: &[LatticeVector]) -> Result<RealizabilityReport> {
    let fan = Arc::new(arrangement_fan(normals, s.dim(), HyperplaneSource::Extended)?);
    let support = s.restrict_to(fan.clone())?;

    let mut by_normal: BTreeMap<LatticeVector, Vec<WallNumber>> = BTreeMap::new();
    let mut numbers = Vec::with_capacity(fan.walls().len());
    for w in 0..fan.walls().len() {
        let number = intersection_number(&support, &wall_curve(&fan, w)?);
        numbers.push(number.clone());
        if !fan.is_synthetic_wall(w) {
            by_normal.entry(fan.walls()[w].normal.clone()).or_default().push(WallNumber { wall: w, number });
        }
    }
    let groups: Vec<HyperplaneGroup> =
        by_normal.into_iter().map(|(normal, walls)| HyperplaneGroup { normal, walls }).collect();

    // The first bent wall, in wall order, that lies in a failing group.
    let witness = (0..fan.walls().len()).filter(|&w| !numbers[w].is_zero()).find_map(|w| {
        let g = groups.iter().find(|g| g.walls.iter().any(|x| x.wall == w))?;
        let first = g.walls.iter().find(|x| x.wall == w)?;
        let other = g.walls.iter().find(|x| x.number != first.number)?;
        Some(Witness { normal: g.normal.clone(), walls: [first.clone(), other.clone()] })
    });

    Ok(RealizabilityReport {
        realizable: witness.is_none() && groups.iter().all(HyperplaneGroup::passes),
        fan,
        support,
        groups,
        witness,
        synthesis: None,
    })
}

/// One neuron per extended hyperplane: first-layer rows are the normals and
/// output weights are the negated common wall numbers.
pub fn synthesize_shallow(s: &SupportFunction) -> Result<Synthesis> {
    let report = criterion_check(s)?;
    synthesize_from_report(&report)
}

fn synthesize_from_report(report: &RealizabilityReport) -> Result<Synthesis> {
    if !report.realizable {
        return Err(Error::CriterionFailed);
    }
    let dim = report.fan.dim();
    let groups: Vec<&HyperplaneGroup> =
        report.groups.iter().filter(|g| g.walls.first().is_some_and(|w| !w.number.is_zero())).collect();
    let l1: Vec<Vec<Rational>> = groups.iter().map(|g| g.normal.to_rational().into_coords()).collect();
    let l2: Vec<Rational> = groups.iter().map(|g| -g.walls[0].number.clone()).collect();
    let network = NetworkSpec { architecture: vec![dim, groups.len(), 1], layers: vec![l1, vec![l2]], biases: None };
    let (equal, correction) = verify_up_to_linear(&report.support, &network)?;
    if !equal {
        return Err(Error::CriterionFailed);
    }
    Ok(Synthesis { network, correction })
}

/// Criterion check followed by synthesis when it passes.
pub fn realize(s: &SupportFunction) -> Result<RealizabilityReport> {
    let mut report = criterion_check(s)?;
    if report.realizable {
        report.synthesis = Some(synthesize_from_report(&report)?);
    }
    Ok(report)
}

/// Compare `f` with the network's function on a common refinement. Returns
/// whether they differ by a linear function, and the difference `g` fitted
/// on the first cone (`f = f_net + g` when equal).
pub fn verify_up_to_linear(f: &SupportFunction, net: &NetworkSpec) -> Result<(bool, RationalVector)> {
    let net = validate(net.clone())?;
    if net.input_dim() != f.dim() {
        return Err(Error::FanMismatch);
    }
    let s_net = extract_support(&net, Arc::new(build_relu_fan(&net)?))?;
    let mut normals: Vec<LatticeVector> = f.fan().walls().iter().map(|w| w.normal.clone()).collect();
    normals.extend(s_net.fan().walls().iter().map(|w| w.normal.clone()));
    normals.sort();
    normals.dedup();
    let common = Arc::new(arrangement_fan(&normals, f.dim(), HyperplaneSource::Extended)?);
    let a = f.restrict_to(common.clone())?;
    let b = s_net.restrict_to(common)?;
    let g = a.slopes()[0].sub(&b.slopes()[0]);
    let equal = a.slopes().iter().zip(b.slopes()).all(|(x, y)| *x == y.add(&g));
    Ok((equal, g))
}

/// `true` when the only wall numbers are zero, so the function is linear.
pub fn is_linear(s: &SupportFunction) -> Result<bool> {
    Ok(wall_numbers(s)?.iter().all(Zero::is_zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_math::int;
    use crate::expr::compile_str;
    use crate::network::tests::golden_network;

    fn lv(c: &[i64]) -> LatticeVector {
        LatticeVector::from_i64(c)
    }

    pub(crate) const SIX_PIECE: &str =
        "max(2*x1+3*x2, x1+4*x2, -2*x1+x2, -2*x1, 2*x1-4*x2) - max(x1+x2,-x1-x2) - max(x1-x2,x2-x1)";

    #[test]
    fn six_piece_function_is_not_realizable() {
        let s = compile_str(SIX_PIECE, 2).unwrap();
        let hs = nonlinear_locus_hyperplanes(&s).unwrap();
        let normals: Vec<LatticeVector> = hs.iter().map(|h| h.normal.clone()).collect();
        assert_eq!(normals, vec![lv(&[0, 1]), lv(&[1, -1]), lv(&[1, 1])]);
        let report = criterion_check(&s).unwrap();
        assert!(!report.realizable);
        let w = report.witness.as_ref().unwrap();
        assert_eq!(w.normal, lv(&[0, 1]));
        assert_eq!([w.walls[0].number.clone(), w.walls[1].number.clone()], [int(-7), int(-1)]);
        assert_eq!(report.failing_groups().count(), 3);
        assert!(matches!(synthesize_shallow(&s), Err(Error::CriterionFailed)));
    }

    #[test]
    fn max_zero_x_y_fails_on_the_diagonal() {
        let s = CpwlInput::Network(golden_network()).to_support().unwrap();
        let normals: Vec<LatticeVector> =
            nonlinear_locus_hyperplanes(&s).unwrap().into_iter().map(|h| h.normal).collect();
        assert_eq!(normals, vec![lv(&[0, 1]), lv(&[1, -1]), lv(&[1, 0])]);
        let report = criterion_check(&s).unwrap();
        assert!(!report.realizable);
        let w = report.witness.as_ref().unwrap();
        assert_eq!(w.normal, lv(&[1, -1]));
        assert_eq!([w.walls[0].number.clone(), w.walls[1].number.clone()], [int(-1), int(0)]);
    }

    #[test]
    fn two_neuron_combination_synthesizes() {
        let s = compile_str("3*max(0,x1) - 2*max(0,x2)", 2).unwrap();
        let report = realize(&s).unwrap();
        assert!(report.realizable);
        let numbers: Vec<(LatticeVector, Vec<Rational>)> = report
            .groups
            .iter()
            .map(|g| (g.normal.clone(), g.walls.iter().map(|w| w.number.clone()).collect()))
            .collect();
        assert_eq!(numbers, vec![(lv(&[0, 1]), vec![int(2), int(2)]), (lv(&[1, 0]), vec![int(-3), int(-3)])]);
        let syn = report.synthesis.unwrap();
        assert_eq!(syn.network.layers[0], vec![vec![int(0), int(1)], vec![int(1), int(0)]]);
        assert_eq!(syn.network.layers[1], vec![vec![int(-2), int(3)]]);
        assert!(syn.correction.is_zero());
    }

    #[test]
    fn opposite_orientation_goes_into_the_correction() {
        let s = compile_str("max(0, -x1)", 2).unwrap();
        let syn = synthesize_shallow(&s).unwrap();
        assert_eq!(syn.network.layers[0], vec![vec![int(1), int(0)]]);
        assert_eq!(syn.network.layers[1], vec![vec![int(1)]]);
        assert_eq!(syn.correction, RationalVector::from_i64(&[-1, 0]));

        let s = compile_str("max(0, x1+x2) + max(0, x1-x2)", 2).unwrap();
        let syn = synthesize_shallow(&s).unwrap();
        assert_eq!(syn.network.layers[1], vec![vec![int(1), int(1)]]);
    }

    #[test]
    fn linear_functions_need_no_neurons() {
        let s = compile_str("2*x1 - x2", 2).unwrap();
        let report = realize(&s).unwrap();
        assert!(report.realizable && report.groups.is_empty());
        let syn = report.synthesis.unwrap();
        assert_eq!(syn.network.architecture, vec![2, 0, 1]);
        assert_eq!(syn.correction, RationalVector::from_i64(&[2, -1]));
    }

    #[test]
    fn verify_detects_mismatch() {
        let f = compile_str("max(0, x1)", 2).unwrap();
        let net = NetworkSpec::from_layers(vec![vec![vec![int(-1), int(0)]], vec![vec![int(1)]]]);
        assert_eq!(verify_up_to_linear(&f, &net).unwrap(), (true, RationalVector::from_i64(&[1, 0])));
        let xy = CpwlInput::Network(golden_network()).to_support().unwrap();
        let net = NetworkSpec::from_layers(vec![vec![vec![int(1), int(0)]], vec![vec![int(1)]]]);
        assert!(!verify_up_to_linear(&xy, &net).unwrap().0);
    }
}
