//! Exact oracle sweeps: product identities, square terms and path listings.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use pbna_core::feasibility::{variable_names, ConditionId, ConditionKind};
use pbna_core::netgraph::{ExtendedNetwork, Quad, RatioKind, SESSIONS};
use pbna_core::oracle::{enum_edge_paths, Oracle, OracleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum What {
    Identities,
    SquareTerm,
    Paths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RatioIdentity {
    pub ratio: String,
    /// `(a, b, p, q)`, 1-based.
    pub quadruple: [usize; 4],
    pub expression: String,
    /// `m_ab m_pq = m_aq m_pb` identically; absent when a factor is zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_holds: Option<bool>,
    /// Edge-disjoint path pair found by max-flow; absent when a factor is zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disjoint_pair: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct TripleIdentity {
    pub session: usize,
    pub label: String,
    /// Cross-multiplied condition polynomial is zero; absent when an entry is zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identically_zero: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct IdentitySweep {
    pub ratios: Vec<RatioIdentity>,
    pub eta: RatioIdentity,
    pub triple: Vec<TripleIdentity>,
    /// Every defined ratio verdict is the negation of its disjoint-pair verdict.
    pub flow_agreement: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SquareTermFailure {
    pub quadruple: [usize; 4],
    pub variable: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SquareTermSweep {
    pub quadruples_checked: usize,
    /// Quadruples with an identically zero factor.
    pub quadruples_skipped: usize,
    pub variables: usize,
    pub checks: usize,
    pub all_equal: bool,
    pub failures: Vec<SquareTermFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct PathListing {
    /// 1-based.
    pub receiver: usize,
    pub sender: usize,
    pub paths: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct OracleReport {
    pub cap: usize,
    /// Monomial count of `m_ij`, row = receiver.
    pub term_counts: [[usize; SESSIONS]; SESSIONS],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentitySweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub square_terms: Option<SquareTermSweep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<PathListing>>,
}

fn one_based(q: Quad) -> [usize; 4] {
    [q.a + 1, q.b + 1, q.p + 1, q.q + 1]
}

fn factors_nonzero(
    oracle: &Oracle,
    entries: impl IntoIterator<Item = (usize, usize)>,
) -> Result<bool, OracleError> {
    for (i, j) in entries {
        if oracle.poly(i, j)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn quad_nonzero(oracle: &Oracle, q: Quad) -> Result<bool, OracleError> {
    factors_nonzero(oracle, q.numerator().into_iter().chain(q.denominator()))
}

fn ratio_identity(
    xnet: &ExtendedNetwork,
    oracle: &Oracle,
    kind: RatioKind,
) -> Result<RatioIdentity, OracleError> {
    let q = kind.quad().expect("p and q ratios have quadruples");
    let defined = quad_nonzero(oracle, q)?;
    Ok(RatioIdentity {
        ratio: kind.name().to_string(),
        quadruple: one_based(q),
        expression: q.to_string(),
        identity_holds: if defined {
            Some(oracle.product_identity_holds(q)?)
        } else {
            None
        },
        disjoint_pair: if defined {
            Some(xnet.disjoint_pair_exists(q).expect("factors are nonzero"))
        } else {
            None
        },
    })
}

pub fn identity_sweep(
    xnet: &ExtendedNetwork,
    oracle: &Oracle,
) -> Result<IdentitySweep, OracleError> {
    let ratios = RatioKind::P
        .iter()
        .chain(&RatioKind::Q)
        .map(|&k| ratio_identity(xnet, oracle, k))
        .collect::<Result<Vec<_>, _>>()?;
    let eta_defined = factors_nonzero(
        oracle,
        pbna_core::netgraph::ETA_NUMERATOR
            .into_iter()
            .chain(pbna_core::netgraph::ETA_DENOMINATOR),
    )?;
    let eta = RatioIdentity {
        ratio: RatioKind::Eta.name().to_string(),
        quadruple: [0; 4],
        expression: "m31*m12*m23/(m21*m32*m13)".to_string(),
        identity_holds: if eta_defined {
            Some(oracle.eta_identity_holds()?)
        } else {
            None
        },
        disjoint_pair: None,
    };
    let mut triple = Vec::with_capacity(SESSIONS);
    for i in 0..SESSIONS {
        let label = ConditionId::new(i, ConditionKind::Mixed).to_string();
        let (identically_zero, terms) = match oracle.mixed_poly(i) {
            Ok(p) => (Some(p.is_zero()), Some(p.term_count())),
            Err(OracleError::ZeroTransfer { .. }) => (None, None),
            Err(e) => return Err(e),
        };
        triple.push(TripleIdentity {
            session: i + 1,
            label,
            identically_zero,
            terms,
        });
    }
    let flow_agreement = ratios
        .iter()
        .all(|r| match (r.identity_holds, r.disjoint_pair) {
            (Some(h), Some(d)) => h != d,
            _ => true,
        });
    Ok(IdentitySweep {
        ratios,
        eta,
        triple,
        flow_agreement,
    })
}

pub fn square_term_sweep(
    xnet: &ExtendedNetwork,
    oracle: &Oracle,
) -> Result<SquareTermSweep, OracleError> {
    let names = variable_names(xnet);
    let mut sweep = SquareTermSweep {
        quadruples_checked: 0,
        quadruples_skipped: 0,
        variables: names.len(),
        checks: 0,
        all_equal: true,
        failures: Vec::new(),
    };
    for q in Quad::all() {
        if !quad_nonzero(oracle, q)? {
            sweep.quadruples_skipped += 1;
            continue;
        }
        sweep.quadruples_checked += 1;
        let (num, den) = oracle.products(q)?;
        for (var, name) in names.iter().enumerate() {
            sweep.checks += 1;
            if num.square_coefficient(var) != den.square_coefficient(var) {
                sweep.all_equal = false;
                sweep.failures.push(SquareTermFailure {
                    quadruple: one_based(q),
                    variable: name.clone(),
                });
            }
        }
    }
    Ok(sweep)
}

pub fn path_listing(xnet: &ExtendedNetwork, cap: usize) -> Result<Vec<PathListing>, OracleError> {
    let mut out = Vec::with_capacity(SESSIONS * SESSIONS);
    for i in 0..SESSIONS {
        for j in 0..SESSIONS {
            let paths = enum_edge_paths(xnet, j, i, cap)?;
            out.push(PathListing {
                receiver: i + 1,
                sender: j + 1,
                paths: paths.iter().map(|p| xnet.edge_ids(p)).collect(),
            });
        }
    }
    Ok(out)
}

/// Runs the selected sweeps; `None` runs identities and square terms.
pub fn oracle_report(
    xnet: &ExtendedNetwork,
    cap: usize,
    what: Option<What>,
) -> Result<OracleReport, OracleError> {
    let oracle = Oracle::new(xnet, cap);
    let mut term_counts = [[0; SESSIONS]; SESSIONS];
    for (i, row) in term_counts.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = oracle.poly(i, j)?.term_count();
        }
    }
    let want = |w: What| what.map_or(w != What::Paths, |x| x == w);
    Ok(OracleReport {
        cap,
        term_counts,
        identities: want(What::Identities)
            .then(|| identity_sweep(xnet, &oracle))
            .transpose()?,
        square_terms: want(What::SquareTerm)
            .then(|| square_term_sweep(xnet, &oracle))
            .transpose()?,
        paths: want(What::Paths)
            .then(|| path_listing(xnet, cap))
            .transpose()?,
    })
}
