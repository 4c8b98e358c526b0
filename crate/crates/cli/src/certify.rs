//! Exhaustive certification commands: stabilization certificates and the
//! indistinguishability (common reachable configuration) search.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::json;

use popsim_core::analysis::{
    check_ordering_snapshot, common_reachable, stabilization_certificate, CertificateVerdict,
    ColorCensus, CommonReachOutcome,
};
use popsim_core::coupled::{CliqueProtocol, GeneralProtocol};
use popsim_core::engine::{states_canonical_hex, Instance, InstanceSpec};
use popsim_core::ordering::OrderingProtocol;
use popsim_core::plurality_core::{FourStateMajority, VoterProtocol};

use crate::CertifyProtocol;

fn load(path: &Path) -> Result<Instance> {
    let file =
        InstanceSpec::from_path(path).with_context(|| format!("loading {}", path.display()))?;
    file.build_instance()
        .map_err(|e| anyhow::anyhow!("instance: {e}"))
}

/// Process exit code: 0 certified, 1 refuted, 2 inconclusive.
pub fn stabilization(path: &Path, protocol: CertifyProtocol, cap: usize) -> Result<i32> {
    let instance = load(path)?;
    let census = ColorCensus::from_instance(&instance);
    let plurality = census
        .plurality_set()
        .map_err(|e| anyhow::anyhow!("census: {e}"))?;

    let (verdict, configs) = match protocol {
        CertifyProtocol::Ordering => {
            let p = OrderingProtocol::new(instance.k);
            let k = instance.k;
            let (v, r) = stabilization_certificate(
                &p,
                &instance.graph,
                &instance.initial_states(&p),
                cap,
                |states| check_ordering_snapshot(states, k).verdict,
            );
            (v, r.len())
        }
        CertifyProtocol::Baseline4 => {
            if instance.k != 2 {
                bail!(
                    "baseline4 is a k = 2 protocol, instance has k = {}",
                    instance.k
                );
            }
            let p = FourStateMajority;
            let (v, r) = stabilization_certificate(
                &p,
                &instance.graph,
                &instance.initial_states(&p),
                cap,
                |states| {
                    let out = states[0].output();
                    states.iter().all(|s| s.output() == out) && plurality.contains(&out)
                },
            );
            (v, r.len())
        }
        CertifyProtocol::Voter => {
            let p = VoterProtocol;
            let (v, r) = stabilization_certificate(
                &p,
                &instance.graph,
                &instance.initial_states(&p),
                cap,
                |states| {
                    let out = states[0];
                    states.iter().all(|&s| s == out) && plurality.contains(&out)
                },
            );
            (v, r.len())
        }
        CertifyProtocol::Clique | CertifyProtocol::General => {
            let correct = |states: &[popsim_core::coupled::CoupledState]| {
                let ans = states[0].ans;
                states.iter().all(|s| s.ans == ans) && plurality.contains(&ans)
            };
            if protocol == CertifyProtocol::Clique {
                if !instance.graph.is_complete() {
                    bail!("the clique protocol requires a complete graph");
                }
                let p = CliqueProtocol::new(instance.k);
                let (v, r) = stabilization_certificate(
                    &p,
                    &instance.graph,
                    &instance.initial_states(&p),
                    cap,
                    correct,
                );
                (v, r.len())
            } else {
                let p = GeneralProtocol::new(instance.k);
                let (v, r) = stabilization_certificate(
                    &p,
                    &instance.graph,
                    &instance.initial_states(&p),
                    cap,
                    correct,
                );
                (v, r.len())
            }
        }
    };

    let (name, code) = match verdict {
        CertificateVerdict::Certified => ("certified", 0),
        CertificateVerdict::Refuted { .. } => ("refuted", 1),
        CertificateVerdict::Inconclusive => ("inconclusive", 2),
    };
    println!(
        "{}",
        json!({ "verdict": name, "configs": configs, "cap": cap })
    );
    Ok(code)
}

/// Process exit code: 0 conclusive (witness or disjoint), 2 inconclusive.
pub fn indistinguishability(
    path_a: &Path,
    path_b: &Path,
    protocol: CertifyProtocol,
    cap: usize,
) -> Result<i32> {
    let a = load(path_a)?;
    let b = load(path_b)?;
    let outcome = match protocol {
        CertifyProtocol::Ordering => {
            wrap(common_reachable(&OrderingProtocol::new(a.k), &a, &b, cap))?
        }
        CertifyProtocol::Baseline4 => wrap(common_reachable(&FourStateMajority, &a, &b, cap))?,
        CertifyProtocol::Voter => wrap(common_reachable(&VoterProtocol, &a, &b, cap))?,
        CertifyProtocol::Clique => wrap(common_reachable(&CliqueProtocol::new(a.k), &a, &b, cap))?,
        CertifyProtocol::General => {
            wrap(common_reachable(&GeneralProtocol::new(a.k), &a, &b, cap))?
        }
    };
    let (line, code) = match outcome {
        Wrapped::Witness(hex) => (json!({ "outcome": "witness", "config": hex }), 0),
        Wrapped::Disjoint => (json!({ "outcome": "disjoint" }), 0),
        Wrapped::Inconclusive => (json!({ "outcome": "inconclusive" }), 2),
    };
    println!("{line}");
    Ok(code)
}

enum Wrapped {
    Witness(String),
    Disjoint,
    Inconclusive,
}

fn wrap<S: popsim_core::engine::CanonicalState>(
    outcome: popsim_core::Result<CommonReachOutcome<S>>,
) -> Result<Wrapped> {
    match outcome.map_err(|e| anyhow::anyhow!("{e}"))? {
        CommonReachOutcome::Witness(states) => Ok(Wrapped::Witness(states_canonical_hex(&states))),
        CommonReachOutcome::Disjoint => Ok(Wrapped::Disjoint),
        CommonReachOutcome::Inconclusive => Ok(Wrapped::Inconclusive),
    }
}
