//! Textual wire formats: JSON for systems, relations, interfaces,
//! controllers and abstractions, plus CSV for traces and cardinality
//! benchmarks. All serialization is deterministic (sorted keys, index order).

use crate::concretize::ClosedLoopTrace;
use crate::error::{Error, Result};
use crate::grid::{format_point, ContinuousVerdict, GridAbstraction};
use crate::interface::{signature, InterfaceSpec};
use crate::relation::BinaryRelation;
use crate::synthesis::{Specification, StaticController};
use crate::system::{FiniteSystem, GeneralSystem, Termination};
use serde_json::{json, Map, Value};
use std::collections::{BTreeMap, BTreeSet};

/// A parsed system file: simple when the `H`/`outputs` blocks are absent.
pub enum SystemFile {
    Simple(FiniteSystem),
    General(GeneralSystem),
}

impl SystemFile {
    pub fn simple(self) -> Result<FiniteSystem> {
        match self {
            SystemFile::Simple(s) => Ok(s),
            SystemFile::General(_) => Err(Error::Parse(
                "expected a simple system (no internal/outputs/H blocks)".to_string(),
            )),
        }
    }

    pub fn general(self) -> GeneralSystem {
        match self {
            SystemFile::Simple(s) => s.to_general(),
            SystemFile::General(s) => s,
        }
    }
}

fn labels(v: &Value, key: &str) -> Result<Vec<String>> {
    let arr = v
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse(format!("missing or non-array `{key}`")))?;
    arr.iter()
        .map(|s| {
            s.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("`{key}` entries must be strings")))
        })
        .collect()
}

fn index_of(labels: &[String], label: &str, context: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::Parse(format!("unknown {context} label `{label}`")))
}

fn str_field<'a>(entry: &'a Value, key: &str) -> Result<&'a str> {
    entry
        .get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse(format!("transition entry missing string `{key}`")))
}

pub fn parse_system(text: &str) -> Result<SystemFile> {
    let v: Value = serde_json::from_str(text)?;
    let states = labels(&v, "states")?;
    let inputs = labels(&v, "inputs")?;
    let general = v.get("H").is_some() || v.get("outputs").is_some();
    if !general {
        let mut sys = FiniteSystem::empty(states, inputs);
        for entry in v.get("F").and_then(Value::as_array).unwrap_or(&Vec::new()) {
            let x = index_of(&sys.states, str_field(entry, "x")?, "state")?;
            let u = index_of(&sys.inputs, str_field(entry, "v")?, "input")?;
            for t in entry.get("to").and_then(Value::as_array).unwrap_or(&Vec::new()) {
                let t = t
                    .as_str()
                    .ok_or_else(|| Error::Parse("`to` entries must be strings".to_string()))?;
                let t = index_of(&sys.states, t, "state")?;
                sys.add_transition(x, u, t);
            }
        }
        return Ok(SystemFile::Simple(sys));
    }
    let internal = if v.get("internal").is_some() {
        labels(&v, "internal")?
    } else {
        inputs.clone()
    };
    let outputs = if v.get("outputs").is_some() {
        labels(&v, "outputs")?
    } else {
        states.clone()
    };
    let mut sys = GeneralSystem::empty(states, inputs, internal, outputs);
    for entry in v.get("F").and_then(Value::as_array).unwrap_or(&Vec::new()) {
        let x = index_of(&sys.states, str_field(entry, "x")?, "state")?;
        let iv = index_of(&sys.internal, str_field(entry, "v")?, "internal input")?;
        for t in entry.get("to").and_then(Value::as_array).unwrap_or(&Vec::new()) {
            let t = t
                .as_str()
                .ok_or_else(|| Error::Parse("`to` entries must be strings".to_string()))?;
            let t = index_of(&sys.states, t, "state")?;
            sys.add_transition(x, iv, t);
        }
    }
    for entry in v.get("H").and_then(Value::as_array).unwrap_or(&Vec::new()) {
        let x = index_of(&sys.states, str_field(entry, "x")?, "state")?;
        let u = index_of(&sys.inputs, str_field(entry, "u")?, "input")?;
        for yv in entry.get("yv").and_then(Value::as_array).unwrap_or(&Vec::new()) {
            let pair = yv
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Parse("`yv` entries must be [y, v] pairs".to_string()))?;
            let y = pair[0]
                .as_str()
                .ok_or_else(|| Error::Parse("`yv` labels must be strings".to_string()))?;
            let vv = pair[1]
                .as_str()
                .ok_or_else(|| Error::Parse("`yv` labels must be strings".to_string()))?;
            let y = index_of(&sys.outputs, y, "output")?;
            let vv = index_of(&sys.internal, vv, "internal input")?;
            sys.add_output(x, u, y, vv);
        }
    }
    Ok(SystemFile::General(sys))
}

pub fn simple_to_json(sys: &FiniteSystem) -> Value {
    let mut f = Vec::new();
    for x in 0..sys.states.len() {
        for u in 0..sys.inputs.len() {
            let to = sys.successors(x, u);
            if to.is_empty() {
                continue;
            }
            f.push(json!({
                "x": sys.states[x],
                "v": sys.inputs[u],
                "to": to.iter().map(|&t| sys.states[t].clone()).collect::<Vec<_>>(),
            }));
        }
    }
    json!({
        "states": sys.states,
        "inputs": sys.inputs,
        "F": f,
        "flags": ["simple"],
    })
}

pub fn general_to_json(sys: &GeneralSystem) -> Value {
    let mut f = Vec::new();
    for x in 0..sys.states.len() {
        for v in 0..sys.internal.len() {
            let to = sys.successors(x, v);
            if to.is_empty() {
                continue;
            }
            f.push(json!({
                "x": sys.states[x],
                "v": sys.internal[v],
                "to": to.iter().map(|&t| sys.states[t].clone()).collect::<Vec<_>>(),
            }));
        }
    }
    let mut h = Vec::new();
    for x in 0..sys.states.len() {
        for u in 0..sys.inputs.len() {
            let yv = sys.outputs_of(x, u);
            if yv.is_empty() {
                continue;
            }
            let pairs: Vec<Value> = yv
                .iter()
                .map(|&(y, v)| json!([sys.outputs[y], sys.internal[v]]))
                .collect();
            h.push(json!({"x": sys.states[x], "u": sys.inputs[u], "yv": pairs}));
        }
    }
    let mut flags = Vec::new();
    if sys.is_static() {
        flags.push("static");
    }
    if sys.is_autonomous() {
        flags.push("autonomous");
    }
    json!({
        "states": sys.states,
        "inputs": sys.inputs,
        "internal": sys.internal,
        "outputs": sys.outputs,
        "F": f,
        "H": h,
        "flags": flags,
    })
}

pub fn parse_relation(
    text: &str,
    s1_states: &[String],
    s2_states: &[String],
) -> Result<BinaryRelation> {
    let v: Value = serde_json::from_str(text)?;
    let arr = v
        .get("pairs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing or non-array `pairs`".to_string()))?;
    let mut pairs = BTreeSet::new();
    for p in arr {
        let pair = p
            .as_array()
            .filter(|q| q.len() == 2)
            .ok_or_else(|| Error::Parse("`pairs` entries must be [x1, x2]".to_string()))?;
        let a = pair[0]
            .as_str()
            .ok_or_else(|| Error::Parse("relation labels must be strings".to_string()))?;
        let b = pair[1]
            .as_str()
            .ok_or_else(|| Error::Parse("relation labels must be strings".to_string()))?;
        pairs.insert((
            index_of(s1_states, a, "left state")?,
            index_of(s2_states, b, "right state")?,
        ));
    }
    BinaryRelation::new(s1_states.len(), s2_states.len(), pairs)
}

pub fn relation_to_json(
    r: &BinaryRelation,
    s1_states: &[String],
    s2_states: &[String],
) -> Value {
    let pairs: Vec<Value> = r
        .pairs()
        .iter()
        .map(|&(a, b)| json!([s1_states[a], s2_states[b]]))
        .collect();
    json!({ "pairs": pairs })
}

fn table_to_json(table: &BTreeMap<Vec<usize>, BTreeSet<usize>>) -> Value {
    let rows: Vec<Value> = table
        .iter()
        .map(|(k, v)| json!({"key": k, "value": v.iter().collect::<Vec<_>>()}))
        .collect();
    Value::Array(rows)
}

/// Interface dump: signature, label spaces, and the `h1`/`h2` tables keyed
/// by index tuples in signature order. `R~` triples are label-rendered.
pub fn interface_to_json(iface: &InterfaceSpec) -> Value {
    let sig = signature(iface.relation_type);
    let rt: Vec<Value> = iface
        .rt
        .iter()
        .map(|&((x1, z1), x2)| {
            json!([
                iface.x1_labels[x1],
                iface.z_labels[z1],
                iface.x2_labels[x2]
            ])
        })
        .collect();
    json!({
        "relation_type": iface.relation_type,
        "signature": sig,
        "z": iface.z_labels,
        "x1": iface.x1_labels,
        "x2": iface.x2_labels,
        "u2": iface.u2_labels,
        "h1": table_to_json(&iface.h1),
        "h2": table_to_json(&iface.h2),
        "rt": rt,
    })
}

fn spec_to_json(spec: &Specification, states: &[String]) -> Value {
    match spec {
        Specification::Safety { safe } => json!({
            "kind": "safety",
            "safe": safe.iter().map(|&x| states[x].clone()).collect::<Vec<_>>(),
        }),
        Specification::Reach { target, bound } => json!({
            "kind": "reach",
            "target": target.iter().map(|&x| states[x].clone()).collect::<Vec<_>>(),
            "bound": bound,
        }),
    }
}

pub fn controller_to_json(c: &StaticController, s2: &FiniteSystem) -> Value {
    let mut map = Map::new();
    for (&x, us) in &c.map {
        map.insert(
            s2.states[x].clone(),
            Value::Array(
                us.iter()
                    .map(|&u| Value::String(s2.inputs[u].clone()))
                    .collect(),
            ),
        );
    }
    json!({
        "spec": spec_to_json(&c.spec, &s2.states),
        "domain": c.domain.iter().map(|&x| s2.states[x].clone()).collect::<Vec<_>>(),
        "map": Value::Object(map),
    })
}

pub fn parse_controller(text: &str, s2: &FiniteSystem) -> Result<StaticController> {
    let v: Value = serde_json::from_str(text)?;
    let spec_v = v
        .get("spec")
        .ok_or_else(|| Error::Parse("missing `spec`".to_string()))?;
    let kind = str_field(spec_v, "kind")?;
    let states_of = |key: &str| -> Result<BTreeSet<usize>> {
        labels(spec_v, key)?
            .iter()
            .map(|l| index_of(&s2.states, l, "state"))
            .collect()
    };
    let spec = match kind {
        "safety" => Specification::Safety {
            safe: states_of("safe")?,
        },
        "reach" => Specification::Reach {
            target: states_of("target")?,
            bound: spec_v
                .get("bound")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("reach spec needs a numeric `bound`".to_string()))?
                as usize,
        },
        other => return Err(Error::Parse(format!("unknown spec kind `{other}`"))),
    };
    let domain: BTreeSet<usize> = labels(&v, "domain")?
        .iter()
        .map(|l| index_of(&s2.states, l, "state"))
        .collect::<Result<_>>()?;
    let obj = v
        .get("map")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Parse("missing or non-object `map`".to_string()))?;
    let mut map = BTreeMap::new();
    for (state, us) in obj {
        let x = index_of(&s2.states, state, "state")?;
        let us = us
            .as_array()
            .ok_or_else(|| Error::Parse("controller map values must be arrays".to_string()))?;
        let mut set = BTreeSet::new();
        for u in us {
            let u = u
                .as_str()
                .ok_or_else(|| Error::Parse("input labels must be strings".to_string()))?;
            set.insert(index_of(&s2.inputs, u, "input")?);
        }
        map.insert(x, set);
    }
    Ok(StaticController { spec, domain, map })
}

/// Abstraction dump: the simple-system JSON plus the construction metadata.
pub fn abstraction_to_json(abs: &GridAbstraction) -> Value {
    let mut v = simple_to_json(&abs.system);
    let meta = serde_json::to_value(&abs.metadata).expect("metadata serializes");
    v.as_object_mut()
        .expect("system JSON is an object")
        .insert("metadata".to_string(), meta);
    v
}

/// CSV of per-pair transition cardinalities, for benchmarking.
pub fn cardinality_csv(sys: &FiniteSystem) -> String {
    let mut out = String::from("x2,u2,count\n");
    for x in 0..sys.states.len() {
        for u in 0..sys.inputs.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                sys.states[x],
                sys.inputs[u],
                sys.successors(x, u).len()
            ));
        }
    }
    out
}

const TRACE_HEADER: &str = "k,x1,u1,z1,x2,u2,blocked_flag\n";

/// Closed-loop traces of the finite simulator, one row per step; `k` resets
/// at each trace and `blocked_flag` marks the last step of a blocked trace.
pub fn finite_trace_csv(
    traces: &[ClosedLoopTrace],
    s1: &FiniteSystem,
    iface: &InterfaceSpec,
) -> String {
    let mut out = String::from(TRACE_HEADER);
    for trace in traces {
        let last = trace.steps.len().saturating_sub(1);
        for (k, step) in trace.steps.iter().enumerate() {
            let blocked = k == last && trace.termination == Termination::Blocked;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                k,
                s1.states[step.x1],
                s1.inputs[step.u1],
                iface.z_labels[step.z1],
                iface.x2_labels[step.x2],
                iface.u2_labels[step.u2],
                blocked as u8
            ));
        }
    }
    out
}

/// Continuous closed-loop trace; the shadow cell doubles as `z1`.
pub fn continuous_trace_csv(verdict: &ContinuousVerdict, abs: &GridAbstraction) -> String {
    let mut out = String::from(TRACE_HEADER);
    let last = verdict.steps.len().saturating_sub(1);
    for (k, step) in verdict.steps.iter().enumerate() {
        let blocked = k == last && !verdict.ok;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            k,
            format_point(&step.x1),
            format_point(&step.u1),
            abs.system.states[step.x2],
            abs.system.states[step.x2],
            abs.system.inputs[step.u2],
            blocked as u8
        ));
    }
    out
}

/// Deterministic pretty rendering with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}
