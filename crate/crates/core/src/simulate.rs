//! End-to-end runs of the alignment scheme.
//!
//! Each network use ("slot") draws its own coding vector, so every `M_ij` is
//! diagonal over slots. Senders 2 and 3 derive their precoders from `V1` via
//! the alignment conditions; receivers fold the aligned interference into a
//! single block and solve one square system each.

use std::fmt;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schemars::gen::SchemaGenerator;
use schemars::schema::Schema;
use schemars::JsonSchema;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::feasibility::{FeasibilityReport, Regime};
use crate::field::{Field, FieldElement, FieldError};
use crate::linalg::{rank_and_solve, Matrix};
use crate::netgraph::{ExtendedNetwork, RatioKind, SESSIONS};
use crate::precode::{PrecodeError, PrecodingSet};
use crate::transfer::{eval_transfer_matrix, CodingVector, TransferMatrix};

pub const DEFAULT_MAX_RESAMPLES: u32 = 64;

const SIM_STREAM: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("n must be at least 2 for the alignment scheme, got {0}")]
    BadN(usize),
    #[error("refusing to simulate: {0}")]
    Refused(String),
    #[error("cannot simulate: {0}")]
    Unsupported(String),
    #[error("slot {slot}: no acceptable coding vector after {attempts} draws ({check}){hint}", hint = if *.suspicious { "; suspicious: possible small-field coincidence, rerun with larger m" } else { "" })]
    ResampleExhausted {
        slot: usize,
        attempts: u32,
        check: &'static str,
        suspicious: bool,
    },
    #[error(transparent)]
    Precode(#[from] PrecodeError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// An exact rate, serialized as `"num/den"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate(pub Ratio<u64>);

impl Rate {
    pub fn new(num: u64, den: u64) -> Rate {
        Rate(Ratio::new(num, den))
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let parse = || -> Option<Rate> {
            let (n, den) = s.split_once('/')?;
            let (n, den) = (n.parse().ok()?, den.parse().ok()?);
            (den != 0).then(|| Rate::new(n, den))
        };
        parse().ok_or_else(|| serde::de::Error::custom(format!("invalid rate {s:?}")))
    }
}

impl JsonSchema for Rate {
    fn schema_name() -> String {
        "Rate".to_string()
    }

    fn json_schema(_: &mut SchemaGenerator) -> Schema {
        schemars::schema::SchemaObject {
            instance_type: Some(schemars::schema::InstanceType::String.into()),
            string: Some(Box::new(schemars::schema::StringValidation {
                pattern: Some("^[0-9]+/[1-9][0-9]*$".to_string()),
                ..Default::default()
            })),
            ..Default::default()
        }
        .into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `2n+1` slots, `V1 = V1*`, canonical `A`, `B`, `C`.
    Alignment,
    /// Two slots, `V1 = (theta1, theta2)^T`, `A = B = C = 1`; for constant `eta`.
    TwoSlot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct SimParams {
    pub n: usize,
    pub m: u32,
    pub seed: u64,
    pub max_resamples: u32,
}

impl SimParams {
    pub fn new(n: usize, m: u32, seed: u64) -> SimParams {
        SimParams {
            n,
            m,
            seed,
            max_resamples: DEFAULT_MAX_RESAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Slot {
    pub coding_vector: Vec<FieldElement>,
    pub transfer: TransferMatrix,
    pub eta: FieldElement,
    /// Draws rejected before this one was accepted.
    pub rejected: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct AlignmentChecks {
    /// `M12 V2 = M13 V3 A`
    pub a1: bool,
    /// `M23 V3 = M21 V1 B`
    pub a2: bool,
    /// `M32 V2 = M31 V1 C`
    pub a3: bool,
    /// `diag(eta) V1 C = V1 B A`
    pub condensed: bool,
}

impl AlignmentChecks {
    pub fn all(&self) -> bool {
        self.a1 && self.a2 && self.a3 && self.condensed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct PsiCheck {
    /// 1-based.
    pub receiver: usize,
    pub rank: usize,
    pub full_rank: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SimResult {
    pub scheme: Scheme,
    pub params: SimParams,
    pub field: Field,
    pub forced: bool,
    pub l1: usize,
    pub l2: usize,
    pub l: usize,
    pub slots: Vec<Slot>,
    pub precoding: PrecodingSet,
    pub v2: Matrix,
    pub v3: Matrix,
    pub v1_rank: usize,
    pub alignment: AlignmentChecks,
    pub psi_checks: [PsiCheck; SESSIONS],
    pub sources: [Vec<FieldElement>; SESSIONS],
    pub received: [Vec<FieldElement>; SESSIONS],
    pub decoded: [Option<Vec<FieldElement>>; SESSIONS],
    pub rates: [Rate; SESSIONS],
    pub success: bool,
    pub warnings: Vec<String>,
}

/// Per-slot diagonal `M_ij`.
fn slot_diag(slots: &[Slot], i: usize, j: usize) -> Matrix {
    let d: Vec<FieldElement> = slots.iter().map(|s| s.transfer.get(i, j)).collect();
    Matrix::diag(&d)
}

fn diag_inverse(f: &Field, m: &Matrix) -> Matrix {
    let d: Vec<FieldElement> = (0..m.rows())
        .map(|k| {
            f.inv(m.get(k, k))
                .expect("slot acceptance guarantees nonzero transfer")
        })
        .collect();
    Matrix::diag(&d)
}

/// Draws coding vectors for `count` slots, rejecting zero transfer entries
/// and anything `accept` refuses given the slots taken so far.
fn draw_slots(
    xnet: &ExtendedNetwork,
    f: Field,
    count: usize,
    max_resamples: u32,
    rng: &mut ChaCha8Rng,
    accept: impl Fn(&[Slot], &TransferMatrix, FieldElement) -> Result<(), &'static str>,
    suspicious: bool,
) -> Result<Vec<Slot>, SimError> {
    let mut slots: Vec<Slot> = Vec::with_capacity(count);
    for slot in 0..count {
        let mut last_check = "nonzero transfer functions";
        let mut taken = None;
        for attempt in 0..max_resamples {
            let cv = CodingVector::sample(xnet, f, rng);
            let tm = eval_transfer_matrix(xnet, &cv);
            if !tm.all_nonzero() {
                last_check = "nonzero transfer functions";
                continue;
            }
            let eta = tm.ratio(&f, RatioKind::Eta).expect("nonzero entries");
            match accept(&slots, &tm, eta) {
                Ok(()) => {
                    taken = Some(Slot {
                        coding_vector: cv.values().to_vec(),
                        transfer: tm,
                        eta,
                        rejected: attempt,
                    });
                    break;
                }
                Err(check) => last_check = check,
            }
        }
        match taken {
            Some(s) => slots.push(s),
            None => {
                return Err(SimError::ResampleExhausted {
                    slot,
                    attempts: max_resamples,
                    check: last_check,
                    suspicious,
                })
            }
        }
    }
    Ok(slots)
}

/// Runs the scheme dictated by `report`. With `force`, infeasible networks
/// are run through the alignment scheme anyway and the failing decodability
/// checks are recorded.
pub fn run_pbna(
    xnet: &ExtendedNetwork,
    report: &FeasibilityReport,
    params: SimParams,
    force: bool,
) -> Result<SimResult, SimError> {
    match report.regime {
        Regime::Degenerate | Regime::ZeroInterference => {
            return Err(SimError::Unsupported(format!(
                "the {} regime has identically zero transfer functions; simulation needs all nine nonzero",
                match report.regime {
                    Regime::Degenerate => "degenerate",
                    _ => "zero_interference",
                }
            )))
        }
        Regime::General | Regime::EtaConstant => {}
    }
    if !report.feasible && !force {
        let violated: Vec<&str> = report.violated().map(|c| c.label.as_str()).collect();
        return Err(SimError::Refused(format!(
            "the feasibility report is negative (violated: {}); pass --force to run anyway",
            violated.join("; ")
        )));
    }
    let forced = !report.feasible;
    let scheme = if report.regime == Regime::EtaConstant && !forced {
        Scheme::TwoSlot
    } else {
        Scheme::Alignment
    };
    if scheme == Scheme::Alignment && params.n < 2 {
        return Err(SimError::BadN(params.n));
    }

    let f = Field::new(params.m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(SIM_STREAM);
    let suspicious = !forced;

    let (slots, precoding) = match scheme {
        Scheme::Alignment => {
            let n = params.n;
            // Distinct eta values make V1* a full-rank Vandermonde matrix; a
            // forced run on an infeasible network cannot insist on them.
            let distinct = report.regime == Regime::General;
            let slots = draw_slots(
                xnet,
                f,
                2 * n + 1,
                params.max_resamples,
                &mut rng,
                |taken, _, eta| {
                    if distinct && taken.iter().any(|s| s.eta == eta) {
                        Err("pairwise distinct eta values")
                    } else {
                        Ok(())
                    }
                },
                suspicious,
            )?;
            let etas: Vec<FieldElement> = slots.iter().map(|s| s.eta).collect();
            let set = PrecodingSet::canonical(&f, &etas, n)?;
            (slots, set)
        }
        Scheme::TwoSlot => {
            // psi_i = theta1 theta2 (p_i(x^1) - p_i(x^2)) must be nonzero for every i.
            let slots = draw_slots(
                xnet,
                f,
                2,
                params.max_resamples,
                &mut rng,
                |taken, tm, _| {
                    let Some(first) = taken.first() else {
                        return Ok(());
                    };
                    let collide = RatioKind::P.iter().any(|&p| {
                        first.transfer.ratio(&f, p).expect("nonzero entries")
                            == tm.ratio(&f, p).expect("nonzero entries")
                    });
                    if collide {
                        Err("distinct p_i values across the two slots")
                    } else {
                        Ok(())
                    }
                },
                suspicious,
            )?;
            let theta1 = f.random_nonzero(&mut rng);
            let theta2 = loop {
                let t = f.random_nonzero(&mut rng);
                if t != theta1 {
                    break t;
                }
            };
            let one = Matrix::identity(1);
            let set = PrecodingSet {
                n: 1,
                v1: Matrix::from_fn(2, 1, |r, _| if r == 0 { theta1 } else { theta2 }),
                a: one.clone(),
                b: one.clone(),
                c: one,
                eta_values: slots.iter().map(|s| s.eta).collect(),
            };
            (slots, set)
        }
    };

    let l = slots.len();
    let (l1, l2) = (precoding.v1.cols(), precoding.a.cols());
    let m = |i: usize, j: usize| slot_diag(&slots, i, j);
    let v1 = &precoding.v1;

    // A'2 and A'1 define V3 and V2.
    let v3 = diag_inverse(&f, &m(1, 2))
        .mul(&f, &m(1, 0))
        .mul(&f, v1)
        .mul(&f, &precoding.b);
    let v2 = diag_inverse(&f, &m(0, 1))
        .mul(&f, &m(0, 2))
        .mul(&f, &v3)
        .mul(&f, &precoding.a);

    let alignment = AlignmentChecks {
        a1: m(0, 1).mul(&f, &v2) == m(0, 2).mul(&f, &v3).mul(&f, &precoding.a),
        a2: m(1, 2).mul(&f, &v3) == m(1, 0).mul(&f, v1).mul(&f, &precoding.b),
        a3: m(2, 1).mul(&f, &v2) == m(2, 0).mul(&f, v1).mul(&f, &precoding.c),
        condensed: precoding.alignment_holds(&f),
    };
    let mut warnings = Vec::new();
    if !alignment.all() {
        if forced {
            warnings.push("alignment identities fail on this forced run".into());
        } else {
            return Err(SimError::Internal(format!(
                "alignment identities fail: {alignment:?}"
            )));
        }
    }

    // Decoding systems: desired block next to the single aligned interference block.
    let systems = [
        m(0, 0).mul(&f, v1).hcat(&m(0, 1).mul(&f, &v2)),
        m(1, 0).mul(&f, v1).hcat(&m(1, 1).mul(&f, &v2)),
        m(2, 0).mul(&f, v1).hcat(&m(2, 2).mul(&f, &v3)),
    ];
    let psi_checks: [PsiCheck; SESSIONS] = std::array::from_fn(|i| {
        let rank = systems[i].rank(&f);
        PsiCheck {
            receiver: i + 1,
            rank,
            full_rank: rank == l,
        }
    });

    let sources: [Vec<FieldElement>; SESSIONS] = [
        (0..l1).map(|_| f.random(&mut rng)).collect(),
        (0..l2).map(|_| f.random(&mut rng)).collect(),
        (0..l2).map(|_| f.random(&mut rng)).collect(),
    ];
    let precoders = [v1, &v2, &v3];
    let sent: Vec<Vec<FieldElement>> = (0..SESSIONS)
        .map(|j| precoders[j].mul_vec(&f, &sources[j]))
        .collect();

    // Symbols pushed through the network slot by slot, independently of the M_ij matrices.
    let mut received: [Vec<FieldElement>; SESSIONS] = Default::default();
    for (k, slot) in slots.iter().enumerate() {
        let cv = CodingVector::new(f, slot.coding_vector.clone());
        let out = cv.propagate(xnet, [sent[0][k], sent[1][k], sent[2][k]]);
        for i in 0..SESSIONS {
            received[i].push(out[i]);
        }
    }
    for (i, z) in received.iter().enumerate() {
        let model: Vec<FieldElement> = (0..l)
            .map(|k| {
                (0..SESSIONS)
                    .map(|j| f.mul(slots[k].transfer.get(i, j), sent[j][k]))
                    .sum()
            })
            .collect();
        if *z != model {
            return Err(SimError::Internal(format!(
                "receiver {} output disagrees with the transfer matrix",
                i + 1
            )));
        }
    }

    let decoded: [Option<Vec<FieldElement>>; SESSIONS] = std::array::from_fn(|i| {
        let (_, x) = rank_and_solve(&f, &systems[i], Some(&received[i])).ok()?;
        let x = x?;
        Some(match i {
            0 => x[..l1].to_vec(),
            _ => x[l1..].to_vec(),
        })
    });

    let success = alignment.all()
        && psi_checks.iter().all(|p| p.full_rank)
        && decoded
            .iter()
            .zip(&sources)
            .all(|(d, s)| d.as_ref() == Some(s));
    if !forced && !success {
        return Err(SimError::Internal(
            "decoding failed on a network reported feasible".into(),
        ));
    }

    let lu = l as u64;
    Ok(SimResult {
        scheme,
        params,
        field: f,
        forced,
        l1,
        l2,
        l,
        v1_rank: v1.rank(&f),
        slots,
        precoding,
        v2,
        v3,
        alignment,
        psi_checks,
        sources,
        received,
        decoded,
        rates: [
            Rate::new(l1 as u64, lu),
            Rate::new(l2 as u64, lu),
            Rate::new(l2 as u64, lu),
        ],
        success,
        warnings,
    })
}
