//! Solution, policy and ledger documents (canonical JSON).
//!
//! A solution dump lists, per step and in canonical encoding order, every
//! reached state with its value, per-action values and chosen action; it
//! doubles as a policy file (the quantizer travels with approximate
//! solutions so the policy can track its state online). Values are written
//! as `f64`; exact-scalar solutions additionally carry display strings.

use crate::approx::{
    quantizer_from_representatives, ApproxKey, ApproxSolution, QuantizationScheme, SigmaMode,
    StepQuantizer, Variant,
};
use crate::bounds::{BoundLedger, MeasurementRecord, Provenance};
use crate::error::{Error, Result};
use crate::exact::{InfostateSolution, MemorySolution};
use crate::io::canonical_json_bytes;
use crate::model::SystemModel;
use crate::rollout::RuntimePolicy;
use crate::scalar::Scalar;
use crate::space::PointSet;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

pub const SOLUTION_SCHEMA: &str = "minimax-is/solution/v1";
pub const LEDGER_SCHEMA: &str = "minimax-is/ledger/v1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
pub struct EncodingDump {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obs: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acts: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryDump {
    pub encoding: EncodingDump,
    pub v: f64,
    pub q: Vec<f64>,
    pub action: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantizerDump {
    pub gamma: Vec<f64>,
    pub representatives: Vec<Vec<u32>>,
    pub radius: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootDump {
    pub y0: u32,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionDump {
    pub schema: String,
    /// "memory" | "infostate" | "approx".
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
    pub model_digest: String,
    pub roots: Vec<RootDump>,
    /// Per step, sorted by encoding.
    pub steps: Vec<Vec<EntryDump>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantizer: Option<QuantizerDump>,
}

fn variant_strings(variant: Variant) -> (Option<String>, Option<String>) {
    match variant {
        Variant::PerfectlyObserved => (Some("perfect".into()), None),
        Variant::PartiallyObserved { sigma, pin_y0 } => {
            let v = if pin_y0 { "gridworld" } else { "partial" };
            let s = match sigma {
                SigmaMode::Recursive => "recursive",
                SigmaMode::QuantizeExact => "quantize-exact",
            };
            (Some(v.into()), Some(s.into()))
        }
    }
}

fn sorted_entries(mut entries: Vec<EntryDump>) -> Vec<EntryDump> {
    entries.sort_by(|a, b| a.encoding.cmp(&b.encoding));
    entries
}

pub fn dump_infostate<S: Scalar>(
    solution: &InfostateSolution<S>,
    model_digest: &str,
) -> SolutionDump {
    let steps = (0..=solution.horizon)
        .map(|t| {
            sorted_entries(
                solution.states[t]
                    .iter()
                    .enumerate()
                    .map(|(sid, range)| EntryDump {
                        encoding: EncodingDump {
                            y0: None,
                            members: Some(range.members().to_vec()),
                            obs: None,
                            acts: None,
                        },
                        v: solution.v[t][sid].to_f64_value(),
                        q: solution.q[t][sid].iter().map(Scalar::to_f64_value).collect(),
                        action: solution.policy[t][sid],
                    })
                    .collect(),
            )
        })
        .collect();
    SolutionDump {
        schema: SOLUTION_SCHEMA.into(),
        method: "infostate".into(),
        variant: None,
        sigma: None,
        model_digest: model_digest.into(),
        roots: solution
            .roots
            .iter()
            .map(|&(y0, sid)| RootDump {
                y0,
                value: solution.v[0][sid as usize].to_f64_value(),
            })
            .collect(),
        steps,
        quantizer: None,
    }
}

pub fn dump_approx<S: Scalar>(solution: &ApproxSolution<S>, model_digest: &str) -> SolutionDump {
    let (variant, sigma) = variant_strings(solution.variant);
    let steps = (0..=solution.horizon)
        .map(|t| {
            sorted_entries(
                solution.states[t]
                    .iter()
                    .enumerate()
                    .map(|(sid, key)| EntryDump {
                        encoding: EncodingDump {
                            y0: key.y0,
                            members: Some(key.members.members().to_vec()),
                            obs: None,
                            acts: None,
                        },
                        v: solution.v[t][sid].to_f64_value(),
                        q: solution.q[t][sid].iter().map(Scalar::to_f64_value).collect(),
                        action: solution.policy[t][sid],
                    })
                    .collect(),
            )
        })
        .collect();
    SolutionDump {
        schema: SOLUTION_SCHEMA.into(),
        method: "approx".into(),
        variant,
        sigma,
        model_digest: model_digest.into(),
        roots: solution
            .roots
            .iter()
            .map(|&(y0, sid)| RootDump {
                y0,
                value: solution.v[0][sid as usize].to_f64_value(),
            })
            .collect(),
        steps,
        quantizer: Some(QuantizerDump {
            gamma: solution
                .scheme
                .steps
                .iter()
                .map(|s| s.gamma.to_f64_value())
                .collect(),
            representatives: solution
                .scheme
                .steps
                .iter()
                .map(|s| s.representatives.members().to_vec())
                .collect(),
            radius: solution
                .scheme
                .steps
                .iter()
                .map(|s| s.radius.to_f64_value())
                .collect(),
        }),
    }
}

pub fn dump_memory<S: Scalar>(solution: &MemorySolution<S>, model_digest: &str) -> SolutionDump {
    let steps = (0..=solution.tree.horizon)
        .map(|t| {
            sorted_entries(
                (0..solution.tree.nodes[t].len())
                    .map(|id| {
                        let node = solution.tree.memory_node(t, id as u32);
                        EntryDump {
                            encoding: EncodingDump {
                                y0: None,
                                members: None,
                                obs: Some(node.observations),
                                acts: Some(node.actions),
                            },
                            v: solution.v[t][id].to_f64_value(),
                            q: solution.q[t][id].iter().map(Scalar::to_f64_value).collect(),
                            action: solution.policy[t][id],
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    SolutionDump {
        schema: SOLUTION_SCHEMA.into(),
        method: "memory".into(),
        variant: None,
        sigma: None,
        model_digest: model_digest.into(),
        roots: solution
            .tree
            .roots
            .iter()
            .map(|&(y0, id)| RootDump {
                y0,
                value: solution.v[0][id as usize].to_f64_value(),
            })
            .collect(),
        steps,
        quantizer: None,
    }
}

pub fn write_solution(dump: &SolutionDump, path: &Path) -> Result<()> {
    std::fs::write(path, canonical_json_bytes(dump)?)?;
    Ok(())
}

pub fn read_solution(path: &Path) -> Result<SolutionDump> {
    let bytes = std::fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Rebuilds an executable policy from a solution dump, checking that it was
/// produced for this exact model.
pub fn policy_from_dump(
    model: &SystemModel<f64>,
    dump: &SolutionDump,
) -> Result<RuntimePolicy<f64>> {
    let digest = crate::io::model_digest(model)?;
    if digest != dump.model_digest {
        return Err(Error::PolicyMismatch(format!(
            "model digest {digest} does not match the policy's {}",
            dump.model_digest
        )));
    }
    match dump.method.as_str() {
        "infostate" => {
            let mut actions: Vec<HashMap<PointSet, u32>> = Vec::with_capacity(dump.steps.len());
            for step in &dump.steps {
                let mut level = HashMap::with_capacity(step.len());
                for entry in step {
                    let members = entry.encoding.members.clone().ok_or_else(|| Error::Schema {
                        field: "encoding".into(),
                        detail: "info-state entry without members".into(),
                    })?;
                    level.insert(PointSet::new(members), entry.action);
                }
                actions.push(level);
            }
            Ok(RuntimePolicy::Infostate { actions })
        }
        "approx" => {
            let q = dump.quantizer.as_ref().ok_or_else(|| Error::Schema {
                field: "quantizer".into(),
                detail: "approximate policy without a quantizer".into(),
            })?;
            if q.gamma.len() != model.horizon + 1 {
                return Err(Error::Schema {
                    field: "quantizer".into(),
                    detail: "quantizer step count does not match the horizon".into(),
                });
            }
            let mut steps: Vec<StepQuantizer<f64>> = Vec::with_capacity(q.gamma.len());
            for t in 0..q.gamma.len() {
                steps.push(quantizer_from_representatives(
                    &model.state_metrics[t],
                    PointSet::new(q.representatives[t].clone()),
                    q.gamma[t],
                )?);
            }
            let scheme = QuantizationScheme { steps };
            let sigma = match dump.sigma.as_deref() {
                Some("quantize-exact") => SigmaMode::QuantizeExact,
                _ => SigmaMode::Recursive,
            };
            let variant = match dump.variant.as_deref() {
                Some("perfect") => Variant::PerfectlyObserved,
                Some("gridworld") => Variant::PartiallyObserved {
                    sigma,
                    pin_y0: true,
                },
                _ => Variant::PartiallyObserved {
                    sigma,
                    pin_y0: false,
                },
            };
            let mut actions: Vec<HashMap<ApproxKey, u32>> = Vec::with_capacity(dump.steps.len());
            for step in &dump.steps {
                let mut level = HashMap::with_capacity(step.len());
                for entry in step {
                    let members = entry.encoding.members.clone().ok_or_else(|| Error::Schema {
                        field: "encoding".into(),
                        detail: "approximate entry without members".into(),
                    })?;
                    level.insert(
                        ApproxKey {
                            members: PointSet::new(members),
                            y0: entry.encoding.y0,
                        },
                        entry.action,
                    );
                }
                actions.push(level);
            }
            Ok(RuntimePolicy::Approx {
                actions,
                scheme,
                variant,
            })
        }
        "memory" => {
            let mut actions: Vec<HashMap<Vec<u32>, u32>> = Vec::with_capacity(dump.steps.len());
            for step in &dump.steps {
                let mut level = HashMap::with_capacity(step.len());
                for entry in step {
                    let (obs, acts) = match (&entry.encoding.obs, &entry.encoding.acts) {
                        (Some(o), Some(a)) => (o, a),
                        _ => {
                            return Err(Error::Schema {
                                field: "encoding".into(),
                                detail: "memory entry without obs/acts".into(),
                            })
                        }
                    };
                    let mut enc = Vec::with_capacity(obs.len() + acts.len());
                    for i in 0..obs.len() {
                        enc.push(obs[i]);
                        if i < acts.len() {
                            enc.push(acts[i]);
                        }
                    }
                    level.insert(enc, entry.action);
                }
                actions.push(level);
            }
            Ok(RuntimePolicy::Memory { actions })
        }
        other => Err(Error::Schema {
            field: "method".into(),
            detail: format!("unknown solution method `{other}`"),
        }),
    }
}

// ---------------------------------------------------------------------------
// Ledger documents
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessDump {
    pub t: usize,
    pub subject: String,
    pub action: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableLipschitzDump {
    pub terminal_cost: f64,
    pub dynamics: Vec<f64>,
    pub observation: Vec<f64>,
    pub range_transition: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerDump {
    pub schema: String,
    /// "measured" | "theoretical".
    pub provenance: String,
    pub gamma: Vec<f64>,
    pub epsilon_terminal: f64,
    pub deltas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub value_lipschitz: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_lipschitz: Option<TableLipschitzDump>,
    /// Exact renderings of the scalar entries (meaningful for rational
    /// scalars; mirrors the f64 fields otherwise).
    pub epsilon_terminal_exact: String,
    pub deltas_exact: Vec<String>,
    pub alphas_exact: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_witness: Option<WitnessDump>,
    pub delta_witnesses: Vec<Option<WitnessDump>>,
}

pub fn dump_ledger<S: Scalar>(ledger: &BoundLedger<S>) -> LedgerDump {
    let witness = |w: &crate::bounds::GapWitness| WitnessDump {
        t: w.t,
        subject: w.subject.clone(),
        action: w.action,
    };
    LedgerDump {
        schema: LEDGER_SCHEMA.into(),
        provenance: match ledger.provenance {
            Provenance::Measured => "measured".into(),
            Provenance::Theoretical => "theoretical".into(),
        },
        gamma: ledger.gamma.iter().map(Scalar::to_f64_value).collect(),
        epsilon_terminal: ledger.epsilon_terminal.to_f64_value(),
        deltas: ledger.deltas.iter().map(Scalar::to_f64_value).collect(),
        alphas: ledger.alphas.iter().map(Scalar::to_f64_value).collect(),
        value_lipschitz: ledger
            .value_lipschitz
            .iter()
            .map(Scalar::to_f64_value)
            .collect(),
        table_lipschitz: ledger.table_lipschitz.as_ref().map(|t| TableLipschitzDump {
            terminal_cost: t.terminal_cost.to_f64_value(),
            dynamics: t.dynamics.iter().map(Scalar::to_f64_value).collect(),
            observation: t.observation.iter().map(Scalar::to_f64_value).collect(),
            range_transition: t
                .range_transition
                .iter()
                .map(Scalar::to_f64_value)
                .collect(),
        }),
        epsilon_terminal_exact: ledger.epsilon_terminal.to_string(),
        deltas_exact: ledger.deltas.iter().map(ToString::to_string).collect(),
        alphas_exact: ledger.alphas.iter().map(ToString::to_string).collect(),
        epsilon_witness: ledger.epsilon_witness.as_ref().map(witness),
        delta_witnesses: ledger
            .delta_witnesses
            .iter()
            .map(|w| w.as_ref().map(witness))
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementRecordDump {
    pub t: usize,
    pub subject: String,
    pub action: u32,
    pub k_next: Vec<String>,
    pub k_hat_next: Vec<String>,
    pub gap: f64,
}

pub fn dump_records<S: Scalar>(records: &[MeasurementRecord<S>]) -> Vec<MeasurementRecordDump> {
    records
        .iter()
        .map(|r| MeasurementRecordDump {
            t: r.t,
            subject: r.subject.clone(),
            action: r.action,
            k_next: r.k_next.clone(),
            k_hat_next: r.k_hat_next.clone(),
            gap: r.gap.to_f64_value(),
        })
        .collect()
}

pub fn write_ledger(dump: &LedgerDump, path: &Path) -> Result<()> {
    std::fs::write(path, canonical_json_bytes(dump)?)?;
    Ok(())
}
