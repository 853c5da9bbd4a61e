//! Abstract controller synthesis on finite simple systems: safety via the
//! maximal controlled-invariant fixed point, reachability via worst-case
//! value iteration. Nondeterminism is resolved demonically in both.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{FiniteSystem, GeneralSystem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Specification {
    Safety { safe: BTreeSet<usize> },
    Reach { target: BTreeSet<usize>, bound: usize },
}

/// A set-valued static controller over its controllable domain.
///
/// `map` keeps every admissible input at each domain state; concretization
/// narrows the choice. A reach controller leaves target states with no
/// available inputs unconstrained (empty entry): the trace predicate only
/// constrains the prefix up to target entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticController {
    pub spec: Specification,
    pub domain: BTreeSet<usize>,
    pub map: BTreeMap<usize, BTreeSet<usize>>,
}

/// Synthesis returns infeasibility as data, not as an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum Synthesis {
    Controller(StaticController),
    Infeasible { reason: String },
}

impl Synthesis {
    pub fn controller(self) -> Result<StaticController> {
        match self {
            Synthesis::Controller(c) => Ok(c),
            Synthesis::Infeasible { reason } => Err(Error::InvalidArgument(format!(
                "controller is infeasible: {reason}"
            ))),
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Synthesis::Controller(_))
    }
}

fn check_subset(s2: &FiniteSystem, set: &BTreeSet<usize>, what: &'static str) -> Result<()> {
    for &x in set {
        if x >= s2.states.len() {
            return Err(Error::IndexOutOfRange {
                context: what,
                index: x,
                size: s2.states.len(),
            });
        }
    }
    Ok(())
}

/// Maximal controlled-invariant subset of `safe`; `map(x)` keeps every input
/// whose successor set is nonempty and stays in the domain.
pub fn synthesize_safety(s2: &FiniteSystem, safe: &BTreeSet<usize>) -> Result<Synthesis> {
    check_subset(s2, safe, "safe set element")?;
    let mut domain = safe.clone();
    loop {
        let next: BTreeSet<usize> = domain
            .iter()
            .copied()
            .filter(|&x| {
                (0..s2.inputs.len()).any(|u| {
                    let f = s2.successors(x, u);
                    !f.is_empty() && f.iter().all(|t| domain.contains(t))
                })
            })
            .collect();
        if next == domain {
            break;
        }
        domain = next;
    }
    if domain.is_empty() {
        return Ok(Synthesis::Infeasible {
            reason: "the maximal controlled-invariant subset of the safe set is empty".into(),
        });
    }
    let map = domain
        .iter()
        .map(|&x| {
            let us: BTreeSet<usize> = (0..s2.inputs.len())
                .filter(|&u| {
                    let f = s2.successors(x, u);
                    !f.is_empty() && f.iter().all(|t| domain.contains(t))
                })
                .collect();
            (x, us)
        })
        .collect();
    Ok(Synthesis::Controller(StaticController {
        spec: Specification::Safety { safe: safe.clone() },
        domain,
        map,
    }))
}

/// Worst-case distance-to-target values; `usize::MAX` encodes unreachable.
fn reach_values(s2: &FiniteSystem, target: &BTreeSet<usize>) -> Vec<usize> {
    let n = s2.states.len();
    let mut val = vec![usize::MAX; n];
    for &x in target {
        val[x] = 0;
    }
    loop {
        let mut changed = false;
        for x in 0..n {
            if target.contains(&x) {
                continue;
            }
            let best = (0..s2.inputs.len())
                .filter_map(|u| {
                    let f = s2.successors(x, u);
                    if f.is_empty() {
                        return None;
                    }
                    let worst = f.iter().map(|&t| val[t]).max().unwrap();
                    worst.checked_add(1)
                })
                .min()
                .unwrap_or(usize::MAX);
            if best < val[x] {
                val[x] = best;
                changed = true;
            }
        }
        if !changed {
            return val;
        }
    }
}

/// Reach controller: domain is the sublevel set `value ≤ bound`; outside the
/// target, `map(x)` keeps every input whose worst-case successor value
/// strictly decreases; on the target, every available input.
pub fn synthesize_reach(
    s2: &FiniteSystem,
    target: &BTreeSet<usize>,
    bound: usize,
) -> Result<Synthesis> {
    check_subset(s2, target, "target set element")?;
    let val = reach_values(s2, target);
    let domain: BTreeSet<usize> = (0..s2.states.len())
        .filter(|&x| val[x] != usize::MAX && val[x] <= bound)
        .collect();
    if domain.is_empty() {
        return Ok(Synthesis::Infeasible {
            reason: "no state reaches the target within the bound".into(),
        });
    }
    let map = domain
        .iter()
        .map(|&x| {
            let us: BTreeSet<usize> = if target.contains(&x) {
                s2.available_inputs(x).unwrap()
            } else {
                (0..s2.inputs.len())
                    .filter(|&u| {
                        let f = s2.successors(x, u);
                        !f.is_empty()
                            && f.iter().map(|&t| val[t]).max().unwrap() < val[x]
                    })
                    .collect()
            };
            (x, us)
        })
        .collect();
    Ok(Synthesis::Controller(StaticController {
        spec: Specification::Reach {
            target: target.clone(),
            bound,
        },
        domain,
        map,
    }))
}

/// Packages a static controller as a static system: it reads the plant state
/// as its input and emits the admissible plant inputs.
pub fn controller_as_system(sc: &StaticController, s2: &FiniteSystem) -> GeneralSystem {
    let mut table = vec![BTreeSet::new(); s2.states.len()];
    for (&x, us) in &sc.map {
        table[x] = us.clone();
    }
    GeneralSystem::static_system(s2.states.clone(), s2.inputs.clone(), &table)
}
