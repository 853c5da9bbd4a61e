//! Concretized controllers: connect an abstract controller to an interface,
//! run the closed loop against the concrete plant, and verify that every
//! concrete closed-loop trace reproduces a related abstract one.
//!
//! The controller state space depends on the relation type: the alternating
//! type registers the previous quantizer state and abstract input, the
//! predictive and feedforward types register the quantizer state, and the
//! memoryless and refinement types carry only the abstract controller state.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interface::InterfaceSpec;
use crate::relation::{BinaryRelation, Bindings, CheckReport, Counterexample, RelationType};
use crate::system::{
    behavior, feedback_compose, feedback_composable, pair_index, pair_label, unpair_index,
    FiniteSystem, GeneralSystem, Termination,
};

/// A relation packaged as a static quantizer system: it reads an input from
/// the left index space and emits every related right-side label.
pub fn relation_quantizer(
    forward: &[BTreeSet<usize>],
    in_labels: &[String],
    out_labels: &[String],
) -> GeneralSystem {
    let table: Vec<BTreeSet<usize>> = forward.to_vec();
    let mut sys = GeneralSystem::empty(
        vec!["0".to_string()],
        in_labels.to_vec(),
        vec!["0".to_string()],
        out_labels.to_vec(),
    );
    sys.add_transition(0, 0, 0);
    for (i, ys) in table.iter().enumerate() {
        for &y in ys {
            sys.add_output(0, i, y, 0);
        }
    }
    sys
}

fn rtilde_quantizer(iface: &InterfaceSpec, s1: &FiniteSystem) -> GeneralSystem {
    let nz = iface.z_labels.len();
    let mut in_labels = Vec::with_capacity(s1.states.len() * nz);
    let mut forward = vec![BTreeSet::new(); s1.states.len() * nz];
    for x1 in 0..s1.states.len() {
        for z1 in 0..nz {
            in_labels.push(pair_label(&s1.states[x1], &iface.z_labels[z1]));
        }
    }
    for &((x1, z1), x2) in &iface.rt {
        forward[pair_index(x1, z1, nz)].insert(x2);
    }
    relation_quantizer(&forward, &in_labels, &iface.x2_labels)
}

/// A concretized controller: the explicit product system together with the
/// pieces needed to simulate the closed loop.
#[derive(Debug, Clone)]
pub struct ConcretizedController {
    pub relation_type: RelationType,
    pub iface: InterfaceSpec,
    pub c2: GeneralSystem,
    /// `C̃1 = C2 ∘ R~`, the abstract controller behind the quantizer.
    pub c1tilde: GeneralSystem,
    /// The explicit controller sextuple; its inputs are concrete states and
    /// its outputs concrete inputs.
    pub system: GeneralSystem,
}

fn u2_of_output(c2: &GeneralSystem, iface: &InterfaceSpec) -> Vec<Option<usize>> {
    c2.outputs
        .iter()
        .map(|l| iface.u2_labels.iter().position(|m| m == l))
        .collect()
}

/// Builds the concretized controller of type `t` from an interface and an
/// abstract controller feedback composable with `s2`.
pub fn concretize(
    t: RelationType,
    iface: &InterfaceSpec,
    c2: &GeneralSystem,
    s1: &FiniteSystem,
    s2: &FiniteSystem,
) -> Result<ConcretizedController> {
    if t != iface.relation_type {
        return Err(Error::InvalidArgument(format!(
            "interface was built for {} but concretization requested {t}",
            iface.relation_type
        )));
    }
    let check = feedback_composable(c2, &s2.to_general());
    if !check.composable {
        return Err(Error::NotFeedbackComposable {
            reason: check.violation.unwrap_or_default(),
        });
    }

    let rtsys = rtilde_quantizer(iface, s1);
    let c1tilde = crate::system::serial_compose(&rtsys, c2)?;
    let system = build_product(t, iface, &c1tilde, s1);
    Ok(ConcretizedController {
        relation_type: t,
        iface: iface.clone(),
        c2: c2.clone(),
        c1tilde,
        system,
    })
}

/// The explicit controller sextuple: registers are folded into the state
/// and internal spaces, and the output map evaluates the per-type chain.
fn build_product(
    t: RelationType,
    iface: &InterfaceSpec,
    c1tilde: &GeneralSystem,
    s1: &FiniteSystem,
) -> GeneralSystem {
    let nc = c1tilde.states.len();
    let mv = c1tilde.internal.len();
    let nz = iface.z_labels.len();
    let nu2 = iface.u2_labels.len();
    let n1 = s1.states.len();
    let u2_of_y = u2_of_output(c1tilde, iface);
    let aug_in = |x1: usize, z1: usize| pair_index(x1, z1, nz);

    let triple = |a: &str, b: &str, c: &str| format!("({a},{b},{c})");

    match t {
        RelationType::Asr => {
            // States (x_C̃1, z1^-, u2^-); internal (v_C̃1, z1, u2).
            let mut states = Vec::with_capacity(nc * nz * nu2);
            for xc in &c1tilde.states {
                for z in &iface.z_labels {
                    for u2 in &iface.u2_labels {
                        states.push(triple(xc, z, u2));
                    }
                }
            }
            let mut internal = Vec::with_capacity(mv * nz * nu2);
            for vc in &c1tilde.internal {
                for z in &iface.z_labels {
                    for u2 in &iface.u2_labels {
                        internal.push(triple(vc, z, u2));
                    }
                }
            }
            let sidx = |xc: usize, z: usize, u2: usize| (xc * nz + z) * nu2 + u2;
            let vidx = |vc: usize, z: usize, u2: usize| (vc * nz + z) * nu2 + u2;
            let mut sys =
                GeneralSystem::empty(states, s1.states.clone(), internal, s1.inputs.clone());
            for xc in 0..nc {
                for zm in 0..nz {
                    for u2m in 0..nu2 {
                        let x = sidx(xc, zm, u2m);
                        for x1 in 0..n1 {
                            for &z1 in iface.h2_at(&[zm, u2m, x1]) {
                                for &(y, vc) in c1tilde.outputs_of(xc, aug_in(x1, z1)) {
                                    let Some(u2) = u2_of_y[y] else { continue };
                                    for &u1 in iface.h1_at(&[z1, u2, x1]) {
                                        sys.add_output(x, x1, u1, vidx(vc, z1, u2));
                                    }
                                }
                            }
                        }
                        for vc in 0..mv {
                            for z1 in 0..nz {
                                for u2 in 0..nu2 {
                                    for &xcp in c1tilde.successors(xc, vc) {
                                        sys.add_transition(
                                            x,
                                            vidx(vc, z1, u2),
                                            sidx(xcp, z1, u2),
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
            sys
        }
        RelationType::Asrb | RelationType::Asrbb => {
            // States (x_C̃1, z1); internal (v_C̃1, z1+).
            let mut states = Vec::with_capacity(nc * nz);
            for xc in &c1tilde.states {
                for z in &iface.z_labels {
                    states.push(pair_label(xc, z));
                }
            }
            let mut internal = Vec::with_capacity(mv * nz);
            for vc in &c1tilde.internal {
                for z in &iface.z_labels {
                    internal.push(pair_label(vc, z));
                }
            }
            let mut sys =
                GeneralSystem::empty(states, s1.states.clone(), internal, s1.inputs.clone());
            for xc in 0..nc {
                for z1 in 0..nz {
                    let x = pair_index(xc, z1, nz);
                    for x1 in 0..n1 {
                        for &(y, vc) in c1tilde.outputs_of(xc, aug_in(x1, z1)) {
                            let Some(u2) = u2_of_y[y] else { continue };
                            if t == RelationType::Asrb {
                                for &u1 in iface.h1_at(&[z1, u2, x1]) {
                                    for &z1p in iface.h2_at(&[z1, u2, x1, u1]) {
                                        sys.add_output(x, x1, u1, pair_index(vc, z1p, nz));
                                    }
                                }
                            } else {
                                for &z1p in iface.h2_at(&[z1, u2]) {
                                    for &u1 in iface.h1_at(&[z1, u2, x1, z1p]) {
                                        sys.add_output(x, x1, u1, pair_index(vc, z1p, nz));
                                    }
                                }
                            }
                        }
                    }
                    for vc in 0..mv {
                        for z1p in 0..nz {
                            for &xcp in c1tilde.successors(xc, vc) {
                                sys.add_transition(
                                    x,
                                    pair_index(vc, z1p, nz),
                                    pair_index(xcp, z1p, nz),
                                );
                            }
                        }
                    }
                }
            }
            sys
        }
        RelationType::Mcr | RelationType::Frr => {
            // Register-free: states and internal space of C̃1 itself.
            let mut sys = GeneralSystem::empty(
                c1tilde.states.clone(),
                s1.states.clone(),
                c1tilde.internal.clone(),
                s1.inputs.clone(),
            );
            for xc in 0..nc {
                for x1 in 0..n1 {
                    for &z1 in iface.h2_at(&[x1]) {
                        for &(y, vc) in c1tilde.outputs_of(xc, aug_in(x1, z1)) {
                            let Some(u2) = u2_of_y[y] else { continue };
                            let key: Vec<usize> = if t == RelationType::Frr {
                                vec![u2]
                            } else {
                                vec![z1, u2, x1]
                            };
                            for &u1 in iface.h1_at(&key) {
                                sys.add_output(xc, x1, u1, vc);
                            }
                        }
                    }
                }
                for vc in 0..mv {
                    for &xcp in c1tilde.successors(xc, vc) {
                        sys.add_transition(xc, vc, xcp);
                    }
                }
            }
            sys
        }
    }
}

/// One step of a closed-loop trace, recorded at output time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClosedLoopStep {
    pub x1: usize,
    pub u1: usize,
    pub z1: usize,
    pub x2: usize,
    pub u2: usize,
    pub xc2: usize,
    pub vc2: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClosedLoopTrace {
    pub steps: Vec<ClosedLoopStep>,
    pub termination: Termination,
}

impl ClosedLoopTrace {
    pub fn x1_sequence(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.x1).collect()
    }

    pub fn x2_sequence(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.x2).collect()
    }
}

#[derive(Clone, Copy)]
enum Reg {
    Init,
    AsrPrev { z1: usize, u2: usize },
    Plain,
    Z(usize),
}

struct LoopCtx<'a> {
    cc: &'a ConcretizedController,
    s1: &'a FiniteSystem,
    horizon: usize,
    c2in_of_x2: Vec<Option<usize>>,
    u2_of_y: Vec<Option<usize>>,
}

/// Enumerates all closed-loop traces of the concretized controller against
/// the plant, from the given initial plant states and over every abstract
/// controller state.
///
/// The quantizer state starts free: any `z1` with a nonempty `R~`-image of
/// the initial plant state. A joint state with no admissible chain option is
/// reported as a blocked trace; an initial state with none yields no trace.
pub fn closed_loop_run(
    cc: &ConcretizedController,
    s1: &FiniteSystem,
    x1_0: &BTreeSet<usize>,
    horizon: usize,
) -> Result<Vec<ClosedLoopTrace>> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    for &x in x1_0 {
        if x >= s1.states.len() {
            return Err(Error::IndexOutOfRange {
                context: "initial state",
                index: x,
                size: s1.states.len(),
            });
        }
    }
    let ctx = LoopCtx {
        cc,
        s1,
        horizon,
        c2in_of_x2: cc
            .iface
            .x2_labels
            .iter()
            .map(|l| cc.c2.input_index(l))
            .collect(),
        u2_of_y: u2_of_output(&cc.c2, &cc.iface),
    };
    let mut out = BTreeSet::new();
    let mut steps = Vec::new();
    for &x1 in x1_0 {
        for xc in 0..cc.c2.states.len() {
            explore(&ctx, x1, xc, Reg::Init, &mut steps, &mut out);
        }
    }
    Ok(out.into_iter().collect())
}

fn z1_options(ctx: &LoopCtx<'_>, x1: usize, reg: Reg) -> BTreeSet<usize> {
    let iface = &ctx.cc.iface;
    match reg {
        Reg::Init => (0..iface.z_labels.len())
            .filter(|&z| !iface.rt_image(x1, z).is_empty())
            .collect(),
        Reg::AsrPrev { z1, u2 } => iface.h2_at(&[z1, u2, x1]).clone(),
        Reg::Plain => iface.h2_at(&[x1]).clone(),
        Reg::Z(z) => BTreeSet::from([z]),
    }
}

fn explore(
    ctx: &LoopCtx<'_>,
    x1: usize,
    xc: usize,
    reg: Reg,
    steps: &mut Vec<ClosedLoopStep>,
    out: &mut BTreeSet<ClosedLoopTrace>,
) {
    let cc = ctx.cc;
    let iface = &cc.iface;
    // Options: (step record, z1+ when committed at output time).
    let mut options: Vec<(ClosedLoopStep, Option<usize>)> = Vec::new();
    for z1 in z1_options(ctx, x1, reg) {
        for x2 in iface.rt_image(x1, z1) {
            let Some(c2in) = ctx.c2in_of_x2[x2] else { continue };
            for &(y, vc2) in cc.c2.outputs_of(xc, c2in) {
                let Some(u2) = ctx.u2_of_y[y] else { continue };
                let step = |u1: usize| ClosedLoopStep {
                    x1,
                    u1,
                    z1,
                    x2,
                    u2,
                    xc2: xc,
                    vc2,
                };
                match cc.relation_type {
                    RelationType::Asr | RelationType::Mcr | RelationType::Frr => {
                        let key: Vec<usize> = if cc.relation_type == RelationType::Frr {
                            vec![u2]
                        } else {
                            vec![z1, u2, x1]
                        };
                        for &u1 in iface.h1_at(&key) {
                            options.push((step(u1), None));
                        }
                    }
                    RelationType::Asrb => {
                        for &u1 in iface.h1_at(&[z1, u2, x1]) {
                            for &z1p in iface.h2_at(&[z1, u2, x1, u1]) {
                                options.push((step(u1), Some(z1p)));
                            }
                        }
                    }
                    RelationType::Asrbb => {
                        for &z1p in iface.h2_at(&[z1, u2]) {
                            for &u1 in iface.h1_at(&[z1, u2, x1, z1p]) {
                                options.push((step(u1), Some(z1p)));
                            }
                        }
                    }
                }
            }
        }
    }

    if options.is_empty() {
        if !steps.is_empty() {
            out.insert(ClosedLoopTrace {
                steps: steps.clone(),
                termination: Termination::Blocked,
            });
        }
        return;
    }
    for (step, z1p) in options {
        steps.push(step.clone());
        if steps.len() == ctx.horizon {
            out.insert(ClosedLoopTrace {
                steps: steps.clone(),
                termination: Termination::Truncated,
            });
        } else {
            let f1 = ctx.s1.successors(step.x1, step.u1);
            let fc = cc.c2.successors(step.xc2, step.vc2);
            if f1.is_empty() || fc.is_empty() {
                out.insert(ClosedLoopTrace {
                    steps: steps.clone(),
                    termination: Termination::Blocked,
                });
            } else {
                let next_reg = match cc.relation_type {
                    RelationType::Asr => Reg::AsrPrev {
                        z1: step.z1,
                        u2: step.u2,
                    },
                    RelationType::Mcr | RelationType::Frr => Reg::Plain,
                    RelationType::Asrb | RelationType::Asrbb => Reg::Z(z1p.unwrap()),
                };
                for &x1p in f1 {
                    for &xcp in fc {
                        explore(ctx, x1p, xcp, next_reg, steps, out);
                    }
                }
            }
        }
        steps.pop();
    }
}

/// Checks the reproducibility inclusion: every concrete closed-loop trace
/// must have a related abstract closed-loop trace with the same length and
/// termination status, pointwise `(x1(k), x2(k)) ∈ R`. Exact set inclusion.
pub fn verify_reproducibility(
    cc: &ConcretizedController,
    s1: &FiniteSystem,
    s2: &FiniteSystem,
    r: &BinaryRelation,
    horizon: usize,
) -> Result<CheckReport> {
    let closed = feedback_compose(&cc.c2, &s2.to_general())?;
    let abstract_behavior = behavior(&closed, &closed.all_states(), horizon)?;
    // Closed-loop outputs are (u2, x2) pairs; keep the x2 component.
    let abs: BTreeSet<(Vec<usize>, Termination)> = abstract_behavior
        .map_outputs(|y| unpair_index(y, s2.states.len()).1)
        .traces;

    let all_x1: BTreeSet<usize> = (0..s1.states.len()).collect();
    let traces = closed_loop_run(cc, s1, &all_x1, horizon)?;

    let mut witness: Option<Bindings> = None;
    for trace in &traces {
        let x1s = trace.x1_sequence();
        let found = abs.iter().any(|(x2s, term)| {
            *term == trace.termination
                && x2s.len() == x1s.len()
                && x1s.iter().zip(x2s).all(|(&a, &b)| r.contains(a, b))
        });
        let render = |seq: &[usize]| {
            seq.iter()
                .map(|&x| s1.states[x].clone())
                .collect::<Vec<_>>()
                .join(",")
        };
        if !found {
            return Ok(CheckReport {
                relation_type: cc.relation_type,
                holds: false,
                witness: None,
                counterexample: Some(Counterexample {
                    bindings: vec![
                        ("x1_trace".to_string(), render(&x1s)),
                        (
                            "termination".to_string(),
                            format!("{:?}", trace.termination),
                        ),
                    ],
                    reason: "no related abstract closed-loop trace with matching termination"
                        .into(),
                }),
            });
        }
        if witness.is_none() {
            witness = Some(vec![("x1_trace".to_string(), render(&x1s))]);
        }
    }
    Ok(CheckReport {
        relation_type: cc.relation_type,
        holds: true,
        witness: Some(witness.unwrap_or_default()),
        counterexample: None,
    })
}
