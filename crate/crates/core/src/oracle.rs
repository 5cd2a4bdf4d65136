//! Exact transfer polynomials by path enumeration.
//!
//! Every path monomial has coefficient one, so polynomials are stored over
//! GF(2) as sets of monomials and addition is symmetric difference. This is
//! exact for all identities checked here, whatever the evaluation field.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::field::{Field, FieldElement};
use crate::netgraph::{
    EdgeIdx, ExtendedNetwork, PairId, Quad, ETA_DENOMINATOR, ETA_NUMERATOR, SESSIONS,
};
use crate::transfer::{CodingVector, MIXED_TERMS};

/// Default bound on path pairs per product (and on paths per transfer function).
pub const DEFAULT_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle scale exceeded: {what} needs {count} > {cap}; use randomized checking")]
    ScaleExceeded {
        what: String,
        count: usize,
        cap: usize,
    },
    #[error("transfer function m{}{} is identically zero; use the regime classifier", .receiver + 1, .sender + 1)]
    ZeroTransfer { receiver: usize, sender: usize },
}

/// Product of coding variables, as `(pair id, exponent)` sorted by pair id.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(PairId, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn from_vars(vars: impl IntoIterator<Item = PairId>) -> Monomial {
        vars.into_iter()
            .fold(Monomial::one(), |m, v| m.mul(&Monomial(vec![(v, 1)])))
    }

    pub fn exponents(&self) -> &[(PairId, u32)] {
        &self.0
    }

    pub fn exponent(&self, var: PairId) -> u32 {
        self.0
            .binary_search_by_key(&var, |&(v, _)| v)
            .map_or(0, |k| self.0[k].1)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// The monomial with `var` removed entirely.
    fn without(&self, var: PairId) -> Monomial {
        Monomial(self.0.iter().copied().filter(|&(v, _)| v != var).collect())
    }

    pub fn eval(&self, f: &Field, cv: &CodingVector) -> FieldElement {
        self.0.iter().fold(FieldElement::ONE, |acc, &(v, e)| {
            f.mul(acc, f.pow(cv.get(v), u64::from(e)))
        })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, &(v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "x{v}")?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Multivariate polynomial with GF(2) coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SparsePoly {
    terms: BTreeSet<Monomial>,
}

impl SparsePoly {
    pub fn zero() -> SparsePoly {
        SparsePoly::default()
    }

    pub fn one() -> SparsePoly {
        SparsePoly::from_terms([Monomial::one()])
    }

    /// Sums the given monomials; repeated ones cancel in pairs.
    pub fn from_terms(terms: impl IntoIterator<Item = Monomial>) -> SparsePoly {
        let mut p = SparsePoly::zero();
        for t in terms {
            p.toggle(t);
        }
        p
    }

    fn toggle(&mut self, t: Monomial) {
        if !self.terms.remove(&t) {
            self.terms.insert(t);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.iter()
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        SparsePoly {
            terms: self
                .terms
                .symmetric_difference(&other.terms)
                .cloned()
                .collect(),
        }
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero();
        for a in &self.terms {
            for b in &other.terms {
                out.toggle(a.mul(b));
            }
        }
        out
    }

    /// Product that refuses to expand more than `cap` term pairs.
    pub fn mul_capped(
        &self,
        other: &SparsePoly,
        cap: usize,
        what: &str,
    ) -> Result<SparsePoly, OracleError> {
        let count = self.term_count().saturating_mul(other.term_count());
        if count > cap {
            return Err(OracleError::ScaleExceeded {
                what: what.to_string(),
                count,
                cap,
            });
        }
        Ok(self.mul(other))
    }

    /// Coefficient polynomial of `var^2`: terms with that exact exponent, stripped of it.
    pub fn square_coefficient(&self, var: PairId) -> SparsePoly {
        SparsePoly::from_terms(
            self.terms
                .iter()
                .filter(|t| t.exponent(var) == 2)
                .map(|t| t.without(var)),
        )
    }

    pub fn eval(&self, f: &Field, cv: &CodingVector) -> FieldElement {
        self.terms.iter().map(|t| t.eval(f, cv)).sum()
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// All paths from `sigma_sender` to `tau_receiver`, as edge lists.
pub fn enum_edge_paths(
    xnet: &ExtendedNetwork,
    sender: usize,
    receiver: usize,
    cap: usize,
) -> Result<Vec<Vec<EdgeIdx>>, OracleError> {
    let target = xnet.tau(receiver);
    // Edges from which the target is reachable, found by a reverse sweep.
    let mut live = vec![false; xnet.edges().len()];
    live[target] = true;
    for &e in xnet.edge_order().iter().rev() {
        if !live[e] {
            live[e] = xnet.out_edges(xnet.edge(e).head).iter().any(|&n| live[n]);
        }
    }
    let mut paths = Vec::new();
    let start = xnet.sigma(sender);
    if !live[start] {
        return Ok(paths);
    }
    let mut stack: Vec<(EdgeIdx, usize)> = vec![(start, 0)];
    while let Some(&mut (e, ref mut next)) = stack.last_mut() {
        if e == target {
            paths.push(stack.iter().map(|&(e, _)| e).collect());
            if paths.len() > cap {
                return Err(OracleError::ScaleExceeded {
                    what: format!(
                        "paths from sender {} to receiver {}",
                        sender + 1,
                        receiver + 1
                    ),
                    count: paths.len(),
                    cap,
                });
            }
            stack.pop();
            continue;
        }
        let outs = xnet.out_edges(xnet.edge(e).head);
        match outs[*next..].iter().position(|&n| live[n]) {
            Some(offset) => {
                let n = outs[*next + offset];
                *next += offset + 1;
                stack.push((n, 0));
            }
            None => {
                stack.pop();
            }
        }
    }
    Ok(paths)
}

/// `t(P)`: product of the consecutive-pair variables along a path.
pub fn path_monomial(xnet: &ExtendedNetwork, path: &[EdgeIdx]) -> Monomial {
    Monomial::from_vars(path.windows(2).map(|w| {
        xnet.pair_id(w[0], w[1])
            .expect("consecutive path edges are adjacent")
    }))
}

/// One monomial per path from `sigma_sender` to `tau_receiver`.
pub fn enum_paths(
    xnet: &ExtendedNetwork,
    sender: usize,
    receiver: usize,
    cap: usize,
) -> Result<Vec<Monomial>, OracleError> {
    Ok(enum_edge_paths(xnet, sender, receiver, cap)?
        .iter()
        .map(|p| path_monomial(xnet, p))
        .collect())
}

pub fn transfer_poly(
    xnet: &ExtendedNetwork,
    receiver: usize,
    sender: usize,
    cap: usize,
) -> Result<SparsePoly, OracleError> {
    Ok(SparsePoly::from_terms(enum_paths(
        xnet, sender, receiver, cap,
    )?))
}

/// The nine transfer polynomials of one network, each computed independently
/// so that one oversized entry does not block checks that avoid it.
#[derive(Debug, Clone)]
pub struct Oracle {
    cap: usize,
    polys: [[Result<SparsePoly, OracleError>; SESSIONS]; SESSIONS],
}

impl Oracle {
    pub fn new(xnet: &ExtendedNetwork, cap: usize) -> Oracle {
        Oracle {
            cap,
            polys: std::array::from_fn(|i| std::array::from_fn(|j| transfer_poly(xnet, i, j, cap))),
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn poly(&self, receiver: usize, sender: usize) -> Result<&SparsePoly, OracleError> {
        self.polys[receiver][sender].as_ref().map_err(Clone::clone)
    }

    fn product(&self, entries: &[(usize, usize)]) -> Result<SparsePoly, OracleError> {
        let mut acc = SparsePoly::one();
        for &(i, j) in entries {
            let what = format!("product with m{}{}", i + 1, j + 1);
            acc = acc.mul_capped(self.poly(i, j)?, self.cap, &what)?;
        }
        Ok(acc)
    }

    fn require_nonzero(&self, entries: &[(usize, usize)]) -> Result<(), OracleError> {
        for &(i, j) in entries {
            if self.poly(i, j)?.is_zero() {
                return Err(OracleError::ZeroTransfer {
                    receiver: i,
                    sender: j,
                });
            }
        }
        Ok(())
    }

    /// `(m_ab * m_pq, m_aq * m_pb)` expanded.
    pub fn products(&self, quad: Quad) -> Result<(SparsePoly, SparsePoly), OracleError> {
        Ok((
            self.product(&quad.numerator())?,
            self.product(&quad.denominator())?,
        ))
    }

    /// Whether `m_ab * m_pq = m_aq * m_pb` identically.
    pub fn product_identity_holds(&self, quad: Quad) -> Result<bool, OracleError> {
        let (num, den) = self.products(quad)?;
        Ok(num == den)
    }

    /// Coefficients of `var^2` in both products of `quad`.
    pub fn square_terms(
        &self,
        quad: Quad,
        var: PairId,
    ) -> Result<(SparsePoly, SparsePoly), OracleError> {
        let (num, den) = self.products(quad)?;
        Ok((num.square_coefficient(var), den.square_coefficient(var)))
    }

    pub fn square_term_equal(&self, quad: Quad, var: PairId) -> Result<bool, OracleError> {
        let (a, b) = self.square_terms(quad, var)?;
        Ok(a == b)
    }

    /// Whether `m31 m12 m23 = m21 m32 m13`, i.e. `eta` is identically one.
    pub fn eta_identity_holds(&self) -> Result<bool, OracleError> {
        Ok(self.product(&ETA_NUMERATOR)? == self.product(&ETA_DENOMINATOR)?)
    }

    /// The cross-multiplied mixed condition polynomial for session `i`.
    pub fn mixed_poly(&self, i: usize) -> Result<SparsePoly, OracleError> {
        let mut needed = vec![(i, i)];
        needed.extend(ETA_NUMERATOR);
        needed.extend(ETA_DENOMINATOR);
        self.require_nonzero(&needed)?;
        let mut sum = SparsePoly::zero();
        for term in &MIXED_TERMS[i] {
            sum = sum.add(&self.product(term)?);
        }
        Ok(sum)
    }

    pub fn triple_identity_zero(&self, i: usize) -> Result<bool, OracleError> {
        Ok(self.mixed_poly(i)?.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{GraphFile, Network, RatioKind};
    use crate::transfer::eval_transfer_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn xnet(nodes: &[&str], edges: &[(&str, &str)], sessions: &[(&str, &str)]) -> ExtendedNetwork {
        ExtendedNetwork::new(
            &Network::from_file(&GraphFile::from_edge_list(nodes, edges, sessions)).unwrap(),
        )
    }

    fn bottleneck() -> ExtendedNetwork {
        xnet(
            &["s1", "s2", "s3", "u", "v", "d1", "d2", "d3"],
            &[
                ("s1", "u"),
                ("s2", "u"),
                ("s3", "u"),
                ("u", "v"),
                ("v", "d1"),
                ("v", "d2"),
                ("v", "d3"),
            ],
            &[("s1", "d1"), ("s2", "d2"), ("s3", "d3")],
        )
    }

    #[test]
    fn path_enumeration_basics() {
        // sigma1, a->b, tau1: three edges, two pair variables.
        let x = xnet(
            &["a", "b", "c"],
            &[("a", "b"), ("b", "c")],
            &[("a", "b"), ("a", "c"), ("b", "c")],
        );
        let monos = enum_paths(&x, 0, 0, 10).unwrap();
        assert_eq!(monos.len(), 1);
        assert_eq!(monos[0].degree(), 2);

        let diamond = xnet(
            &["s", "a", "b", "t"],
            &[("s", "a"), ("s", "b"), ("a", "t"), ("b", "t")],
            &[("s", "t"), ("s", "a"), ("b", "t")],
        );
        let monos = enum_paths(&diamond, 0, 0, 10).unwrap();
        assert_eq!(monos.len(), 2);
        assert_ne!(monos[0], monos[1]);
        assert_eq!(transfer_poly(&diamond, 0, 0, 10).unwrap().term_count(), 2);
        assert!(transfer_poly(&diamond, 1, 2, 10).unwrap().is_zero());
    }

    #[test]
    fn path_cap_is_a_soft_error() {
        let diamond = xnet(
            &["s", "a", "b", "t"],
            &[("s", "a"), ("s", "b"), ("a", "t"), ("b", "t")],
            &[("s", "t"), ("s", "a"), ("a", "t")],
        );
        assert!(matches!(
            enum_paths(&diamond, 0, 0, 1),
            Err(OracleError::ScaleExceeded { .. })
        ));
    }

    #[test]
    fn bottleneck_products_coincide() {
        let x = bottleneck();
        let oracle = Oracle::new(&x, DEFAULT_CAP);
        for quad in Quad::all() {
            assert!(oracle.product_identity_holds(quad).unwrap(), "{quad}");
        }
        assert!(oracle.eta_identity_holds().unwrap());
        // Three equal terms sum to one copy of the term.
        for i in 0..3 {
            assert!(!oracle.triple_identity_zero(i).unwrap());
        }
    }

    #[test]
    fn disjoint_session_paths_break_the_identity() {
        // s1->d1 and s2->d2 disjoint; cross links give m12 and m21.
        let x = xnet(
            &["s1", "s2", "d1", "d2"],
            &[("s1", "d1"), ("s2", "d2"), ("s1", "d2"), ("s2", "d1")],
            &[("s1", "d1"), ("s2", "d2"), ("s1", "d2")],
        );
        let oracle = Oracle::new(&x, DEFAULT_CAP);
        let quad = Quad::new(0, 0, 1, 1).unwrap();
        assert!(!oracle.product_identity_holds(quad).unwrap());
    }

    #[test]
    fn triple_identity_requires_nonzero_entries() {
        let x = xnet(
            &["s1", "s2", "s3", "d1", "d2", "d3"],
            &[("s1", "d1"), ("s2", "d2"), ("s3", "d3")],
            &[("s1", "d1"), ("s2", "d2"), ("s3", "d3")],
        );
        let oracle = Oracle::new(&x, DEFAULT_CAP);
        assert!(matches!(
            oracle.triple_identity_zero(0),
            Err(OracleError::ZeroTransfer { .. })
        ));
    }

    #[test]
    fn square_term_with_shared_consecutive_edges() {
        // Both numerator paths run through u->v->w, doubling the (u->v, v->w) variable.
        let x = xnet(
            &["s1", "s2", "u", "v", "w", "d1", "d2"],
            &[
                ("s1", "u"),
                ("s2", "u"),
                ("u", "v"),
                ("v", "w"),
                ("w", "d1"),
                ("w", "d2"),
            ],
            &[("s1", "d1"), ("s2", "d2"), ("s1", "d2")],
        );
        let oracle = Oracle::new(&x, DEFAULT_CAP);
        let var = x.pair_id(2, 3).unwrap();
        let quad = Quad::new(0, 0, 1, 1).unwrap();
        let (a, b) = oracle.square_terms(quad, var).unwrap();
        assert!(!a.is_zero());
        assert_eq!(a, b);
        // A variable that no path pair doubles.
        let sigma_var = x.pair_id(x.sigma(0), 0).unwrap();
        let (a, b) = oracle.square_terms(quad, sigma_var).unwrap();
        assert!(a.is_zero() && b.is_zero());
    }

    #[test]
    fn evaluation_matches_propagation() {
        let x = xnet(
            &["s1", "s2", "s3", "a", "b", "d1", "d2", "d3"],
            &[
                ("s1", "a"),
                ("s2", "a"),
                ("s2", "b"),
                ("s3", "b"),
                ("a", "b"),
                ("a", "d1"),
                ("b", "d2"),
                ("b", "d3"),
            ],
            &[("s1", "d1"), ("s2", "d2"), ("s3", "d3")],
        );
        let oracle = Oracle::new(&x, DEFAULT_CAP);
        let f = Field::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let cv = CodingVector::sample(&x, f, &mut rng);
            let tm = eval_transfer_matrix(&x, &cv);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(oracle.poly(i, j).unwrap().eval(&f, &cv), tm.get(i, j));
                }
            }
        }
    }

    #[test]
    fn product_evaluation_is_multiplicative() {
        let x = bottleneck();
        let oracle = Oracle::new(&x, DEFAULT_CAP);
        let f = Field::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let quad = RatioKind::P1.quad().unwrap();
        let (num, _) = oracle.products(quad).unwrap();
        for _ in 0..20 {
            let cv = CodingVector::sample(&x, f, &mut rng);
            let expect = f.mul(
                oracle.poly(2, 0).unwrap().eval(&f, &cv),
                oracle.poly(0, 1).unwrap().eval(&f, &cv),
            );
            assert_eq!(num.eval(&f, &cv), expect);
        }
    }

    #[test]
    fn addition_cancels_in_characteristic_two() {
        let p = SparsePoly::from_terms([Monomial::from_vars([1, 2]), Monomial::from_vars([3])]);
        assert!(p.add(&p).is_zero());
        let sq = p.mul(&p);
        // (a + b)^2 = a^2 + b^2 over GF(2).
        let expect = SparsePoly::from_terms([
            Monomial::from_vars([1, 1, 2, 2]),
            Monomial::from_vars([3, 3]),
        ]);
        assert_eq!(sq, expect);
        assert_eq!(sq.square_coefficient(3), SparsePoly::one());
    }

    #[test]
    fn product_cap_is_a_soft_error() {
        let p = SparsePoly::from_terms((0..10).map(|v| Monomial::from_vars([v])));
        assert!(p.mul_capped(&p, 99, "test").is_err());
        assert!(p.mul_capped(&p, 100, "test").is_ok());
    }
}
