//! The feasibility decision.
//!
//! With all nine transfer functions nonzero, alignment at `n > 1` symbol
//! extensions is feasible iff, for each session `i`,
//! `p_i` avoids `1`, `eta` and `eta/(1+eta)` (session 1) or `1+eta`
//! (sessions 2, 3). The first two are graph properties decided by max-flow;
//! the third is tested at random points, or exactly by the oracle on request.
//! When `eta` is constant only `p_i != 1` matters.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElement, FieldError};
use crate::netgraph::{ExtendedNetwork, NetError, Pairing, RatioKind, SESSIONS};
use crate::oracle::{Oracle, OracleError, DEFAULT_CAP};
use crate::transfer::{eval_transfer_matrix, CodingVector};

#[derive(Debug, Error)]
pub enum FeasibilityError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("n must be at least 2 when eta is not constant, got {0}")]
    BadN(usize),
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// Oracle decides `eta` constancy when within its cap; everything else is randomized.
    #[default]
    Auto,
    /// Oracle decides `eta` and the mixed conditions; exceeding the cap is an error.
    Force,
    /// No oracle.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct CheckParams {
    pub m: u32,
    pub trials: u32,
    pub seed: u64,
    pub n: usize,
    pub oracle: OracleMode,
    pub oracle_cap: usize,
}

impl CheckParams {
    pub fn new(seed: u64) -> CheckParams {
        CheckParams {
            m: 16,
            trials: 32,
            seed,
            n: 2,
            oracle: OracleMode::Auto,
            oracle_cap: DEFAULT_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    EtaConstant,
    General,
    ZeroInterference,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    /// `p_i != 1`
    PNotOne,
    /// `p_i != eta`, tested as `q_i != 1`
    PNotEta,
    /// `p_1 != eta/(1+eta)`, `p_2, p_3 != 1+eta`
    Mixed,
}

/// One member of the finite condition set; `session` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConditionId {
    pub session: usize,
    pub kind: ConditionKind,
}

impl ConditionId {
    pub const fn new(session: usize, kind: ConditionKind) -> ConditionId {
        ConditionId { session, kind }
    }

    /// All nine, session-major.
    pub fn all() -> impl Iterator<Item = ConditionId> {
        (0..SESSIONS).flat_map(|i| {
            [
                ConditionKind::PNotOne,
                ConditionKind::PNotEta,
                ConditionKind::Mixed,
            ]
            .into_iter()
            .map(move |k| ConditionId::new(i, k))
        })
    }

    /// The `(a_i, b_i)` selecting this condition in
    /// `m_ii != a_i * (first fraction) + b_i * (second fraction)`.
    pub fn coefficients(&self) -> (u8, u8) {
        match (self.kind, self.session) {
            (ConditionKind::Mixed, _) => (1, 1),
            (ConditionKind::PNotOne, 0) | (ConditionKind::PNotEta, 1 | 2) => (0, 1),
            _ => (1, 0),
        }
    }

    /// Ratio whose non-identity is tested by max-flow, for the two single conditions.
    pub fn ratio(&self) -> Option<RatioKind> {
        match self.kind {
            ConditionKind::PNotOne => Some(RatioKind::P[self.session]),
            ConditionKind::PNotEta => Some(RatioKind::Q[self.session]),
            ConditionKind::Mixed => None,
        }
    }

    fn stream(&self) -> u64 {
        let kind = match self.kind {
            ConditionKind::PNotOne => 0,
            ConditionKind::PNotEta => 1,
            ConditionKind::Mixed => 2,
        };
        1 + (self.session as u64) * 3 + kind
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = self.session + 1;
        match (self.kind, self.session) {
            (ConditionKind::PNotOne, _) => write!(f, "p{i} != 1"),
            (ConditionKind::PNotEta, _) => write!(f, "p{i} != eta"),
            (ConditionKind::Mixed, 0) => write!(f, "p{i} != eta/(1+eta)"),
            (ConditionKind::Mixed, _) => write!(f, "p{i} != 1+eta"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Maxflow,
    Randomized,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    /// Two edge-disjoint paths realising one of the two products of a ratio.
    DisjointPaths {
        ratio: String,
        /// `(a, b, p, q)`, 1-based.
        quadruple: [usize; 4],
        pairing: Pairing,
        paths: [Vec<String>; 2],
    },
    /// A coding vector (ordered as the report's `variables`) where the tested
    /// polynomial is nonzero.
    Witness {
        trial: u32,
        point: Vec<FieldElement>,
        value: FieldElement,
    },
    /// Exact expansion; `terms` is the number of surviving monomials.
    Polynomial { terms: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ConditionRecord {
    /// 1-based.
    pub session: usize,
    pub kind: ConditionKind,
    pub label: String,
    pub coefficients: [u8; 2],
    pub method: Method,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials_used: Option<u32>,
    /// Probability that a `violated` verdict is wrong; zero for exact methods.
    pub error_probability: f64,
}

impl ConditionRecord {
    pub fn id(&self) -> ConditionId {
        ConditionId::new(self.session - 1, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct EtaDecision {
    pub constant: bool,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials_used: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Certificate>,
    /// Probability that `constant: true` is wrong; zero for exact methods.
    pub error_probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Feasible,
    Infeasible,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ErrorModel {
    /// `1 - (1 - 3/2^m)^L_dist`, the per-trial miss probability.
    pub per_trial: f64,
    /// `per_trial^T`.
    pub per_condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct FeasibilityReport {
    pub regime: Regime,
    pub outcome: Outcome,
    pub feasible: bool,
    pub params: CheckParams,
    /// `nonzero[i][j]`: some path joins sender `j+1` to receiver `i+1`.
    pub nonzero: [[bool; SESSIONS]; SESSIONS],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<EtaDecision>,
    pub conditions: Vec<ConditionRecord>,
    /// Upper bound on the probability that any randomized verdict in this report is wrong.
    pub error_bound: f64,
    pub error_model: ErrorModel,
    pub max_distance: usize,
    pub max_in_degree: usize,
    pub session_min_cuts: [usize; SESSIONS],
    /// Coding variables as `upstream>downstream` edge ids, in witness order.
    pub variables: Vec<String>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

impl FeasibilityReport {
    pub fn condition(&self, id: ConditionId) -> Option<&ConditionRecord> {
        self.conditions.iter().find(|c| c.id() == id)
    }

    pub fn violated(&self) -> impl Iterator<Item = &ConditionRecord> {
        self.conditions
            .iter()
            .filter(|c| c.verdict == Verdict::Violated)
    }
}

/// Independent generator for trial `trial` of the check identified by `stream`.
pub fn trial_rng(seed: u64, stream: u64, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 32) | u64::from(trial));
    rng
}

const ETA_STREAM: u64 = 0;

pub fn variable_names(xnet: &ExtendedNetwork) -> Vec<String> {
    xnet.pairs()
        .iter()
        .map(|&(u, e)| format!("{}>{}", xnet.edge(u).id, xnet.edge(e).id))
        .collect()
}

/// Max-flow test of `p_i != 1` or `q_i != 1`.
pub fn check_single_condition(
    xnet: &ExtendedNetwork,
    cond: ConditionId,
) -> Result<(Verdict, Option<Certificate>), NetError> {
    let ratio = cond.ratio().expect("single conditions have a ratio");
    let quad = ratio.quad().expect("p and q ratios have quadruples");
    Ok(match xnet.disjoint_pair(quad)? {
        Some(pair) => (
            Verdict::Holds,
            Some(Certificate::DisjointPaths {
                ratio: ratio.name().to_string(),
                quadruple: [quad.a + 1, quad.b + 1, quad.p + 1, quad.q + 1],
                pairing: pair.pairing,
                paths: pair.paths.map(|p| xnet.edge_ids(&p)),
            }),
        ),
        None => (Verdict::Violated, None),
    })
}

/// Outcome of a randomized non-identity test.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedOutcome {
    pub nonzero: bool,
    pub trials_used: u32,
    pub witness: Option<Certificate>,
}

fn randomized_nonzero(
    xnet: &ExtendedNetwork,
    field: Field,
    trials: u32,
    seed: u64,
    stream: u64,
    eval: impl Fn(&crate::transfer::TransferMatrix) -> FieldElement,
) -> RandomizedOutcome {
    for t in 0..trials {
        let cv = CodingVector::sample(xnet, field, &mut trial_rng(seed, stream, t));
        let value = eval(&eval_transfer_matrix(xnet, &cv));
        if !value.is_zero() {
            return RandomizedOutcome {
                nonzero: true,
                trials_used: t + 1,
                witness: Some(Certificate::Witness {
                    trial: t,
                    point: cv.values().to_vec(),
                    value,
                }),
            };
        }
    }
    RandomizedOutcome {
        nonzero: false,
        trials_used: trials,
        witness: None,
    }
}

/// Randomized test of the mixed condition for session `session` (0-based) on
/// its cross-multiplied form. A nonzero evaluation proves the condition holds.
pub fn check_mixed_condition(
    xnet: &ExtendedNetwork,
    field: Field,
    session: usize,
    trials: u32,
    seed: u64,
) -> RandomizedOutcome {
    let stream = ConditionId::new(session, ConditionKind::Mixed).stream();
    randomized_nonzero(xnet, field, trials, seed, stream, |tm| {
        tm.mixed_form(&field, session)
    })
}

/// Randomized test of `m31 m12 m23 != m21 m32 m13`.
pub fn check_eta_randomized(
    xnet: &ExtendedNetwork,
    field: Field,
    trials: u32,
    seed: u64,
) -> RandomizedOutcome {
    randomized_nonzero(xnet, field, trials, seed, ETA_STREAM, |tm| {
        tm.eta_difference(&field)
    })
}

/// Regime and, for the two full-interference regimes, how `eta` was judged.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeDecision {
    pub regime: Regime,
    pub eta: Option<EtaDecision>,
}

pub fn classify_regime(
    xnet: &ExtendedNetwork,
    field: Field,
    params: &CheckParams,
    oracle: Option<&Oracle>,
) -> Result<RegimeDecision, FeasibilityError> {
    let diag_empty = (0..SESSIONS).any(|i| !xnet.has_path(i, i));
    if diag_empty {
        return Ok(RegimeDecision {
            regime: Regime::Degenerate,
            eta: None,
        });
    }
    let off_empty = (0..SESSIONS).any(|i| (0..SESSIONS).any(|j| i != j && !xnet.has_path(i, j)));
    if off_empty {
        return Ok(RegimeDecision {
            regime: Regime::ZeroInterference,
            eta: None,
        });
    }

    let mut fallback_note = None;
    if let Some(oracle) = oracle {
        match oracle.eta_identity_holds() {
            Ok(constant) => {
                return Ok(RegimeDecision {
                    regime: if constant {
                        Regime::EtaConstant
                    } else {
                        Regime::General
                    },
                    eta: Some(EtaDecision {
                        constant,
                        method: Method::Oracle,
                        trials_used: None,
                        witness: None,
                        error_probability: 0.0,
                        note: None,
                    }),
                });
            }
            Err(e) if params.oracle == OracleMode::Force => return Err(e.into()),
            Err(e) => fallback_note = Some(format!("{e}; eta judged by randomized testing")),
        }
    }

    let outcome = check_eta_randomized(xnet, field, params.trials, params.seed);
    let constant = !outcome.nonzero;
    let error_probability = if constant {
        field
            .vanishing_bound(xnet.max_distance())
            .powi(params.trials as i32)
    } else {
        0.0
    };
    Ok(RegimeDecision {
        regime: if constant {
            Regime::EtaConstant
        } else {
            Regime::General
        },
        eta: Some(EtaDecision {
            constant,
            method: Method::Randomized,
            trials_used: Some(outcome.trials_used),
            witness: outcome.witness,
            error_probability,
            note: fallback_note,
        }),
    })
}

fn single_record(xnet: &ExtendedNetwork, cond: ConditionId) -> Result<ConditionRecord, NetError> {
    let (verdict, certificate) = check_single_condition(xnet, cond)?;
    let (a, b) = cond.coefficients();
    Ok(ConditionRecord {
        session: cond.session + 1,
        kind: cond.kind,
        label: cond.to_string(),
        coefficients: [a, b],
        method: Method::Maxflow,
        verdict,
        certificate,
        trials_used: None,
        error_probability: 0.0,
    })
}

fn pattern_string(nonzero: &[[bool; SESSIONS]; SESSIONS]) -> String {
    let zeros: Vec<String> = (0..SESSIONS)
        .flat_map(|i| (0..SESSIONS).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && !nonzero[i][j])
        .map(|(i, j)| format!("m{}{}", i + 1, j + 1))
        .collect();
    zeros.join(", ")
}

pub fn check_feasibility(
    xnet: &ExtendedNetwork,
    params: CheckParams,
) -> Result<FeasibilityReport, FeasibilityError> {
    let field = Field::new(params.m)?;
    if params.trials == 0 {
        return Err(FeasibilityError::NoTrials);
    }
    let nonzero: [[bool; SESSIONS]; SESSIONS] =
        std::array::from_fn(|i| std::array::from_fn(|j| xnet.has_path(i, j)));
    let max_distance = xnet.max_distance();
    let per_trial = field.vanishing_bound(max_distance);
    let per_condition = per_trial.powi(params.trials as i32);
    let session_min_cuts: [usize; SESSIONS] = std::array::from_fn(|i| xnet.session_min_cut(i));

    let mut warnings = Vec::new();
    for (i, &cut) in session_min_cuts.iter().enumerate() {
        if cut > 1 {
            warnings.push(format!(
                "session {} has min cut {cut} between source and sink; the unit min-cut model assumption does not hold",
                i + 1
            ));
        }
    }

    let oracle = match params.oracle {
        OracleMode::Off => None,
        _ => Some(Oracle::new(xnet, params.oracle_cap)),
    };
    let decision = classify_regime(xnet, field, &params, oracle.as_ref())?;
    let mut notes = Vec::new();
    let mut conditions = Vec::new();
    let mut outcome = Outcome::Feasible;

    match decision.regime {
        Regime::Degenerate => {
            for i in (0..SESSIONS).filter(|&i| !nonzero[i][i]) {
                notes.push(format!(
                    "sink of session {0} is unreachable from its source (m{0}{0} = 0)",
                    i + 1
                ));
            }
            outcome = Outcome::Infeasible;
        }
        Regime::ZeroInterference => {
            let pattern = pattern_string(&nonzero);
            let only_m23 = (0..SESSIONS)
                .flat_map(|i| (0..SESSIONS).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j && !nonzero[i][j])
                .eq([(1, 2)]);
            if only_m23 {
                notes.push("m23 = 0: alignment at receiver 2 is vacuous, V1 is unconstrained; feasible iff every p_i is non-constant".into());
                for i in 0..SESSIONS {
                    conditions.push(single_record(
                        xnet,
                        ConditionId::new(i, ConditionKind::PNotOne),
                    )?);
                }
            } else {
                outcome = Outcome::Unsupported;
                notes.push(format!(
                    "unsupported zero pattern: {pattern} identically zero"
                ));
                if (0..SESSIONS).all(|i| (0..SESSIONS).all(|j| i == j || !nonzero[i][j])) {
                    notes.push("no interference reaches any receiver; plain routing serves every session and alignment is not needed".into());
                } else {
                    notes.push("only the single pattern m23 = 0 is decided".into());
                }
            }
        }
        Regime::EtaConstant => {
            notes.push("eta is identically one: the two-slot scheme applies and feasibility requires every p_i != 1; p_i != eta coincides with it".into());
            for i in 0..SESSIONS {
                for kind in [ConditionKind::PNotOne, ConditionKind::PNotEta] {
                    conditions.push(single_record(xnet, ConditionId::new(i, kind))?);
                }
            }
        }
        Regime::General => {
            if params.n < 2 {
                return Err(FeasibilityError::BadN(params.n));
            }
            for i in 0..SESSIONS {
                for kind in [ConditionKind::PNotOne, ConditionKind::PNotEta] {
                    conditions.push(single_record(xnet, ConditionId::new(i, kind))?);
                }
                conditions.push(mixed_record(
                    xnet,
                    field,
                    i,
                    &params,
                    oracle.as_ref(),
                    per_condition,
                )?);
            }
        }
    }

    if conditions.iter().any(|c| c.verdict == Verdict::Violated) {
        outcome = Outcome::Infeasible;
    }
    let eta_error = decision.eta.as_ref().map_or(0.0, |e| e.error_probability);
    let error_bound =
        (conditions.iter().map(|c| c.error_probability).sum::<f64>() + eta_error).min(1.0);

    Ok(FeasibilityReport {
        regime: decision.regime,
        outcome,
        feasible: outcome == Outcome::Feasible,
        params,
        nonzero,
        eta: decision.eta,
        conditions,
        error_bound,
        error_model: ErrorModel {
            per_trial,
            per_condition,
        },
        max_distance,
        max_in_degree: xnet.max_in_degree(),
        session_min_cuts,
        variables: variable_names(xnet),
        warnings,
        notes,
    })
}

fn mixed_record(
    xnet: &ExtendedNetwork,
    field: Field,
    session: usize,
    params: &CheckParams,
    oracle: Option<&Oracle>,
    per_condition: f64,
) -> Result<ConditionRecord, FeasibilityError> {
    let id = ConditionId::new(session, ConditionKind::Mixed);
    let (a, b) = id.coefficients();
    let mut record = ConditionRecord {
        session: session + 1,
        kind: id.kind,
        label: id.to_string(),
        coefficients: [a, b],
        method: Method::Randomized,
        verdict: Verdict::Holds,
        certificate: None,
        trials_used: None,
        error_probability: 0.0,
    };
    if let (Some(oracle), OracleMode::Force) = (oracle, params.oracle) {
        let poly = oracle.mixed_poly(session)?;
        record.method = Method::Oracle;
        if poly.is_zero() {
            record.verdict = Verdict::Violated;
        } else {
            record.certificate = Some(Certificate::Polynomial {
                terms: poly.term_count(),
            });
        }
        return Ok(record);
    }
    let outcome = check_mixed_condition(xnet, field, session, params.trials, params.seed);
    record.trials_used = Some(outcome.trials_used);
    record.certificate = outcome.witness;
    if !outcome.nonzero {
        record.verdict = Verdict::Violated;
        record.error_probability = per_condition;
    }
    Ok(record)
}
