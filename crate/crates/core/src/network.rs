//! Feedforward ReLU networks with exact rational weights.
//!
//! A network of architecture `(n_0, n_1, ..., n_k; 1)` is stored as `k + 1`
//! weight matrices with optional bias vectors. Hidden layers apply
//! `max{0, .}` coordinatewise; the output layer has no activation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_math::{Rational, RationalVector};

pub type Matrix = Vec<Vec<Rational>>;

/// Unvalidated network description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSpec {
    /// `(n_0, n_1, ..., n_k, 1)`.
    pub architecture: Vec<usize>,
    /// `layers[i]` has shape `n_{i+1} x n_i`.
    pub layers: Vec<Matrix>,
    pub biases: Option<Vec<Vec<Rational>>>,
}

impl NetworkSpec {
    /// Unbiased spec whose architecture is read off the matrix shapes.
    pub fn from_layers(layers: Vec<Matrix>) -> Self {
        let mut architecture = Vec::new();
        if let Some(first) = layers.first() {
            architecture.push(first.first().map_or(0, Vec::len));
        }
        architecture.extend(layers.iter().map(Vec::len));
        NetworkSpec { architecture, layers, biases: None }
    }
}

/// Identifies a neuron: `layer` in `1..=k+1` and a 1-based `index` within
/// the layer, so `NeuronId::new(1, 3)` is the third neuron of the first
/// hidden layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NeuronId {
    pub layer: usize,
    pub index: usize,
}

impl NeuronId {
    pub fn new(layer: usize, index: usize) -> Self {
        NeuronId { layer, index }
    }
}

/// `x -> <slope, x> + constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineFunctional {
    pub slope: RationalVector,
    pub constant: Rational,
}

impl AffineFunctional {
    pub fn linear(slope: RationalVector) -> Self {
        AffineFunctional { slope, constant: Rational::zero() }
    }

    pub fn eval(&self, x: &RationalVector) -> Rational {
        self.slope.dot(x) + &self.constant
    }
}

/// A network whose shapes have been checked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidatedNetwork {
    spec: NetworkSpec,
}

pub fn validate(spec: NetworkSpec) -> Result<ValidatedNetwork> {
    if spec.layers.is_empty() {
        return Err(Error::ShapeMismatch { layer: 1, detail: "no layers".into() });
    }
    let arch = &spec.architecture;
    if arch.len() != spec.layers.len() + 1 {
        return Err(Error::ShapeMismatch {
            layer: arch.len().min(spec.layers.len() + 1),
            detail: format!("architecture has {} entries for {} layers", arch.len(), spec.layers.len()),
        });
    }
    if arch.len() < 3 {
        return Err(Error::ShapeMismatch { layer: 1, detail: "at least one hidden layer required".into() });
    }
    if arch[0] == 0 {
        return Err(Error::ShapeMismatch { layer: 1, detail: "input dimension is zero".into() });
    }
    if *arch.last().unwrap() != 1 {
        return Err(Error::ShapeMismatch { layer: spec.layers.len(), detail: "output layer must have width 1".into() });
    }
    for (i, layer) in spec.layers.iter().enumerate() {
        let (rows, cols) = (arch[i + 1], arch[i]);
        if layer.len() != rows || layer.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch { layer: i + 1, detail: format!("expected a {rows} x {cols} matrix") });
        }
    }
    if let Some(biases) = &spec.biases {
        if biases.len() != spec.layers.len() {
            return Err(Error::ShapeMismatch {
                layer: biases.len().min(spec.layers.len()) + 1,
                detail: "one bias vector per layer required".into(),
            });
        }
        for (i, b) in biases.iter().enumerate() {
            if b.len() != arch[i + 1] {
                return Err(Error::ShapeMismatch {
                    layer: i + 1,
                    detail: format!("bias must have length {}", arch[i + 1]),
                });
            }
        }
    }
    Ok(ValidatedNetwork { spec })
}

fn relu(x: Rational) -> Rational {
    if x.is_negative() {
        Rational::zero()
    } else {
        x
    }
}

fn apply(m: &Matrix, bias: Option<&Vec<Rational>>, x: &[Rational]) -> Vec<Rational> {
    m.iter()
        .enumerate()
        .map(|(i, row)| {
            let s: Rational = row.iter().zip(x).map(|(a, b)| a * b).sum();
            match bias {
                Some(b) => s + &b[i],
                None => s,
            }
        })
        .collect()
}

impl ValidatedNetwork {
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn into_spec(self) -> NetworkSpec {
        self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.spec.architecture[0]
    }

    pub fn architecture(&self) -> &[usize] {
        &self.spec.architecture
    }

    /// Number of hidden layers `k`.
    pub fn hidden_layers(&self) -> usize {
        self.spec.layers.len() - 1
    }

    /// Weight matrix of layer `i` (1-based, `1..=k+1`).
    pub fn layer(&self, i: usize) -> &Matrix {
        &self.spec.layers[i - 1]
    }

    pub fn layers(&self) -> &[Matrix] {
        &self.spec.layers
    }

    pub fn bias(&self, i: usize) -> Option<&Vec<Rational>> {
        self.spec.biases.as_ref().map(|b| &b[i - 1])
    }

    /// True when there are no biases or all of them are zero.
    pub fn is_unbiased(&self) -> bool {
        self.spec.biases.as_ref().is_none_or(|bs| bs.iter().flatten().all(Zero::is_zero))
    }

    fn check_input(&self, x: &RationalVector) -> Result<()> {
        if x.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: x.dim() });
        }
        Ok(())
    }

    /// Post-activation values of every hidden layer, followed by the output.
    fn forward(&self, x: &RationalVector) -> Vec<Vec<Rational>> {
        let k = self.hidden_layers();
        let mut values = Vec::with_capacity(k + 1);
        let mut h = x.coords().to_vec();
        for i in 1..=k {
            h = apply(self.layer(i), self.bias(i), &h).into_iter().map(relu).collect();
            values.push(h.clone());
        }
        values.push(apply(self.layer(k + 1), self.bias(k + 1), &h));
        values
    }

    pub fn evaluate(&self, x: &RationalVector) -> Result<Rational> {
        self.check_input(x)?;
        Ok(self.forward(x).pop().unwrap().swap_remove(0))
    }

    /// Post-activation value of a hidden neuron, or the output value for
    /// the output neuron.
    pub fn neuron_value(&self, id: NeuronId, x: &RationalVector) -> Result<Rational> {
        self.check_input(x)?;
        let layers = self.spec.layers.len();
        if id.layer == 0 || id.layer > layers || id.index == 0 || id.index > self.spec.architecture[id.layer] {
            return Err(Error::BadNeuronId { layer: id.layer, index: id.index });
        }
        Ok(self.forward(x)[id.layer - 1][id.index - 1].clone())
    }
}

fn positive_multiple(base: &[Rational], other: &[Rational]) -> Option<Rational> {
    let c = base.iter().position(|x| !x.is_zero())?;
    let k = &other[c] / &base[c];
    (k.is_positive() && base.iter().zip(other).all(|(b, o)| &(b * &k) == o)).then_some(k)
}

/// Normal form of a shallow unbiased network: zero rows deleted, positively
/// parallel rows merged, and first-layer rows scaled to primitive integer
/// vectors with the scale pushed into the output weights.
pub fn reduce_shallow(net: &ValidatedNetwork) -> Result<ValidatedNetwork> {
    if net.hidden_layers() != 1 {
        return Err(Error::NotShallow { hidden: net.hidden_layers() });
    }
    if !net.is_unbiased() {
        return Err(Error::Biased);
    }
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut weights: Vec<Rational> = Vec::new();
    for (row, w) in net.layer(1).iter().zip(&net.layer(2)[0]) {
        if row.iter().all(Zero::is_zero) {
            continue;
        }
        rows.push(row.clone());
        weights.push(w.clone());
    }

    let mut i = 0;
    while i < rows.len() {
        let mut j = i + 1;
        while j < rows.len() {
            if let Some(k) = positive_multiple(&rows[i], &rows[j]) {
                // row_j = k * row_i: b_i <- b_i + k * b_j
                let merged = &weights[i] + &k * &weights[j];
                weights[i] = merged;
                rows.remove(j);
                weights.remove(j);
            } else {
                j += 1;
            }
        }
        i += 1;
    }

    let l = rows.iter().flatten().fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
    let lq = Rational::from_integer(l.clone());
    for (row, w) in rows.iter_mut().zip(weights.iter_mut()) {
        let li = row.iter().fold(BigInt::zero(), |g, a| g.gcd(&(a * &lq).to_integer()));
        let factor = &lq / Rational::from_integer(li);
        for a in row.iter_mut() {
            *a *= &factor;
        }
        *w /= factor;
    }

    let n0 = net.input_dim();
    validate(NetworkSpec { architecture: vec![n0, rows.len(), 1], layers: vec![rows, vec![weights]], biases: None })
}

/// Which of the four reduced-representation conditions hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReducedCheck {
    pub no_zero_rows: bool,
    pub integral: bool,
    pub primitive_rows: bool,
    pub no_positive_parallel: bool,
}

impl ReducedCheck {
    pub fn all(&self) -> bool {
        self.no_zero_rows && self.integral && self.primitive_rows && self.no_positive_parallel
    }
}

pub fn check_reduced(net: &ValidatedNetwork) -> ReducedCheck {
    let rows = net.layer(1);
    let no_zero_rows = rows.iter().all(|r| r.iter().any(|a| !a.is_zero()));
    let integral = rows.iter().flatten().all(Rational::is_integer);
    let primitive_rows =
        integral && rows.iter().all(|r| r.iter().fold(BigInt::zero(), |g, a| g.gcd(&a.to_integer())).is_one());
    let mut no_positive_parallel = true;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if positive_multiple(&rows[i], &rows[j]).is_some() {
                no_positive_parallel = false;
            }
        }
    }
    ReducedCheck { no_zero_rows, integral, primitive_rows, no_positive_parallel }
}

/// Network of the same depth computing `f + g`: each hidden layer gains two
/// neurons carrying `max{0, g}` and `max{0, -g}`, and the output adds their
/// difference.
pub fn affine_shift(net: &ValidatedNetwork, g: &AffineFunctional) -> Result<ValidatedNetwork> {
    let n0 = net.input_dim();
    if g.slope.dim() != n0 {
        return Err(Error::DimensionMismatch { expected: n0, found: g.slope.dim() });
    }
    let k = net.hidden_layers();
    let zero = Rational::zero;
    let mut layers = Vec::with_capacity(k + 1);
    let mut biases: Vec<Vec<Rational>> = Vec::with_capacity(k + 1);
    let old_bias =
        |i: usize| -> Vec<Rational> { net.bias(i).cloned().unwrap_or_else(|| vec![zero(); net.architecture()[i]]) };

    let mut first = net.layer(1).clone();
    first.push(g.slope.coords().to_vec());
    first.push(g.slope.neg().into_coords());
    let mut b1 = old_bias(1);
    b1.push(g.constant.clone());
    b1.push(-g.constant.clone());
    layers.push(first);
    biases.push(b1);

    for j in 2..=k {
        let width_in = net.architecture()[j - 1];
        let mut m: Matrix = net
            .layer(j)
            .iter()
            .map(|row| {
                let mut r = row.clone();
                r.extend([zero(), zero()]);
                r
            })
            .collect();
        let mut carry_pos = vec![zero(); width_in + 2];
        carry_pos[width_in] = Rational::one();
        let mut carry_neg = vec![zero(); width_in + 2];
        carry_neg[width_in + 1] = Rational::one();
        m.push(carry_pos);
        m.push(carry_neg);
        let mut b = old_bias(j);
        b.extend([zero(), zero()]);
        layers.push(m);
        biases.push(b);
    }

    let mut last = net.layer(k + 1).clone();
    last[0].extend([Rational::one(), -Rational::one()]);
    layers.push(last);
    biases.push(old_bias(k + 1));

    let mut architecture = net.architecture().to_vec();
    for w in architecture[1..=k].iter_mut() {
        *w += 2;
    }
    let unbiased = net.is_unbiased() && g.constant.is_zero();
    validate(NetworkSpec { architecture, layers, biases: (!unbiased).then_some(biases) })
}
