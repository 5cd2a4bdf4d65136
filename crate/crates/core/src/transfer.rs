//! Coding vectors and transfer-matrix evaluation by forward propagation.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElement};
use crate::netgraph::{
    ExtendedNetwork, PairId, RatioKind, ETA_DENOMINATOR, ETA_NUMERATOR, SESSIONS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TransferError {
    #[error("{0} has a zero denominator at this point; resample")]
    ZeroDenominator(&'static str),
}

/// One value per adjacent edge pair of an extended network, indexed by [`PairId`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodingVector {
    field: Field,
    values: Vec<FieldElement>,
}

impl CodingVector {
    pub fn new(field: Field, values: Vec<FieldElement>) -> CodingVector {
        CodingVector { field, values }
    }

    /// Every coefficient set to one.
    pub fn ones(field: Field, xnet: &ExtendedNetwork) -> CodingVector {
        CodingVector::new(field, vec![FieldElement::ONE; xnet.pair_count()])
    }

    /// Independent uniform draws from the whole field, zero included.
    pub fn sample<R: Rng + ?Sized>(
        xnet: &ExtendedNetwork,
        field: Field,
        rng: &mut R,
    ) -> CodingVector {
        let values = (0..xnet.pair_count()).map(|_| field.random(rng)).collect();
        CodingVector { field, values }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.values
    }

    pub fn get(&self, pair: PairId) -> FieldElement {
        self.values[pair]
    }

    pub fn set(&mut self, pair: PairId, value: FieldElement) {
        self.values[pair] = value;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pushes one symbol per sender through the network and returns what each
    /// receiver edge carries.
    pub fn propagate(
        &self,
        xnet: &ExtendedNetwork,
        symbols: [FieldElement; SESSIONS],
    ) -> [FieldElement; SESSIONS] {
        let f = self.field;
        let mut carried = vec![FieldElement::ZERO; xnet.edges().len()];
        for (j, &x) in symbols.iter().enumerate() {
            carried[xnet.sigma(j)] = x;
        }
        for &e in xnet.edge_order() {
            let pairs = xnet.in_pairs(e);
            if pairs.is_empty() {
                continue;
            }
            carried[e] = pairs
                .iter()
                .map(|&k| f.mul(self.values[k], carried[xnet.pairs()[k].0]))
                .sum();
        }
        std::array::from_fn(|i| carried[xnet.tau(i)])
    }
}

/// `m[i][j]` is the transfer function from sender `j` to receiver `i` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, schemars::JsonSchema)]
pub struct TransferMatrix {
    pub m: [[FieldElement; SESSIONS]; SESSIONS],
}

impl TransferMatrix {
    pub fn get(&self, receiver: usize, sender: usize) -> FieldElement {
        self.m[receiver][sender]
    }

    pub fn all_nonzero(&self) -> bool {
        self.m.iter().flatten().all(|x| !x.is_zero())
    }

    fn product(&self, f: &Field, entries: &[(usize, usize)]) -> FieldElement {
        entries
            .iter()
            .fold(FieldElement::ONE, |acc, &(i, j)| f.mul(acc, self.m[i][j]))
    }

    /// Numerator and denominator of a ratio function, evaluated separately.
    pub fn ratio_parts(&self, f: &Field, kind: RatioKind) -> (FieldElement, FieldElement) {
        match kind.quad() {
            Some(q) => (
                self.product(f, &q.numerator()),
                self.product(f, &q.denominator()),
            ),
            None => (
                self.product(f, &ETA_NUMERATOR),
                self.product(f, &ETA_DENOMINATOR),
            ),
        }
    }

    pub fn ratio(&self, f: &Field, kind: RatioKind) -> Result<FieldElement, TransferError> {
        let (num, den) = self.ratio_parts(f, kind);
        f.div(num, den)
            .map_err(|_| TransferError::ZeroDenominator(kind.name()))
    }

    /// `m31 m12 m23 - m21 m32 m13`, zero exactly when `eta` is one here.
    pub fn eta_difference(&self, f: &Field) -> FieldElement {
        let (num, den) = self.ratio_parts(f, RatioKind::Eta);
        num - den
    }

    /// The cross-multiplied mixed condition for session `i` (0-based):
    ///
    /// * `m11 m23 m32 + m21 m13 m32 + m31 m12 m23`
    /// * `m22 m31 m13 + m32 m21 m13 + m12 m23 m31`
    /// * `m33 m12 m21 + m13 m32 m21 + m23 m31 m12`
    pub fn mixed_form(&self, f: &Field, i: usize) -> FieldElement {
        MIXED_TERMS[i]
            .iter()
            .map(|term| self.product(f, term))
            .sum()
    }
}

/// `(receiver, sender)` factors of the three terms of each mixed condition.
pub const MIXED_TERMS: [[[(usize, usize); 3]; 3]; SESSIONS] = [
    [
        [(0, 0), (1, 2), (2, 1)],
        [(1, 0), (0, 2), (2, 1)],
        [(2, 0), (0, 1), (1, 2)],
    ],
    [
        [(1, 1), (2, 0), (0, 2)],
        [(2, 1), (1, 0), (0, 2)],
        [(0, 1), (1, 2), (2, 0)],
    ],
    [
        [(2, 2), (0, 1), (1, 0)],
        [(0, 2), (2, 1), (1, 0)],
        [(1, 2), (2, 0), (0, 1)],
    ],
];

/// Forward propagation of length-3 coefficient vectors in topological order.
pub fn eval_transfer_matrix(xnet: &ExtendedNetwork, cv: &CodingVector) -> TransferMatrix {
    let f = cv.field();
    let mut c = vec![[FieldElement::ZERO; SESSIONS]; xnet.edges().len()];
    for j in 0..SESSIONS {
        c[xnet.sigma(j)][j] = FieldElement::ONE;
    }
    for &e in xnet.edge_order() {
        for &k in xnet.in_pairs(e) {
            let x = cv.get(k);
            if x.is_zero() {
                continue;
            }
            let upstream = c[xnet.pairs()[k].0];
            for (acc, u) in c[e].iter_mut().zip(upstream) {
                *acc += f.mul(x, u);
            }
        }
    }
    TransferMatrix {
        m: std::array::from_fn(|i| c[xnet.tau(i)]),
    }
}
