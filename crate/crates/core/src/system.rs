//! Finite transition systems: simple systems `(X, U, F)`, general sextuples
//! `(X, U, V, Y, F, H)`, serial and feedback composition, and bounded-horizon
//! behavior enumeration.
//!
//! Transition and output maps are total set-valued maps; an empty set encodes
//! both "input unavailable" and deadlock. Cross-system identification (for
//! composability conditions such as `Y1 ⊆ U2`) is always by string label,
//! never by index.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Builds the canonical label of a product element.
pub fn pair_label(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

/// Pair-lexicographic index of `(i, j)` where the second component ranges
/// over `m` values.
pub fn pair_index(i: usize, j: usize, m: usize) -> usize {
    i * m + j
}

/// Inverse of [`pair_index`].
pub fn unpair_index(k: usize, m: usize) -> (usize, usize) {
    (k / m, k % m)
}

fn product_labels(a: &[String], b: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for la in a {
        for lb in b {
            out.push(pair_label(la, lb));
        }
    }
    out
}

/// A simple system `(X, U, F)` with set-valued transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSystem {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    /// Indexed by `x * |U| + u`.
    trans: Vec<BTreeSet<usize>>,
}

impl FiniteSystem {
    /// Creates a system with all-empty transitions.
    pub fn empty(states: Vec<String>, inputs: Vec<String>) -> Self {
        let trans = vec![BTreeSet::new(); states.len() * inputs.len()];
        FiniteSystem {
            states,
            inputs,
            trans,
        }
    }

    pub fn new(
        states: Vec<String>,
        inputs: Vec<String>,
        entries: &[(usize, usize, Vec<usize>)],
    ) -> Result<Self> {
        let mut sys = Self::empty(states, inputs);
        for (x, u, to) in entries {
            sys.check_state(*x)?;
            sys.check_input(*u)?;
            for t in to {
                sys.check_state(*t)?;
            }
            sys.trans[pair_index(*x, *u, sys.inputs.len())].extend(to.iter().copied());
        }
        Ok(sys)
    }

    fn check_state(&self, x: usize) -> Result<()> {
        if x >= self.states.len() {
            return Err(Error::IndexOutOfRange {
                context: "state",
                index: x,
                size: self.states.len(),
            });
        }
        Ok(())
    }

    fn check_input(&self, u: usize) -> Result<()> {
        if u >= self.inputs.len() {
            return Err(Error::IndexOutOfRange {
                context: "input",
                index: u,
                size: self.inputs.len(),
            });
        }
        Ok(())
    }

    pub fn add_transition(&mut self, x: usize, u: usize, to: usize) {
        let m = self.inputs.len();
        self.trans[pair_index(x, u, m)].insert(to);
    }

    pub fn successors(&self, x: usize, u: usize) -> &BTreeSet<usize> {
        &self.trans[pair_index(x, u, self.inputs.len())]
    }

    /// `U_S(x) = { u | F(x, u) ≠ ∅ }`.
    pub fn available_inputs(&self, x: usize) -> Result<BTreeSet<usize>> {
        self.check_state(x)?;
        Ok((0..self.inputs.len())
            .filter(|&u| !self.successors(x, u).is_empty())
            .collect())
    }

    /// True iff `F(x, u)` is empty or a singleton everywhere.
    pub fn is_deterministic(&self) -> bool {
        self.trans.iter().all(|s| s.len() <= 1)
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    pub fn input_index(&self, label: &str) -> Option<usize> {
        self.inputs.iter().position(|s| s == label)
    }

    /// The simple-system sextuple `(X, U, U, X, F, I_{X×U})`.
    pub fn to_general(&self) -> GeneralSystem {
        let n = self.states.len();
        let m = self.inputs.len();
        let mut h = vec![BTreeSet::new(); n * m];
        for x in 0..n {
            for u in 0..m {
                h[pair_index(x, u, m)].insert((x, u));
            }
        }
        GeneralSystem {
            states: self.states.clone(),
            inputs: self.inputs.clone(),
            internal: self.inputs.clone(),
            outputs: self.states.clone(),
            trans: self.trans.clone(),
            output_map: h,
        }
    }
}

/// A system sextuple `(X, U, V, Y, F, H)` with `F : X×V → 2^X` and
/// `H : X×U → 2^{Y×V}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralSystem {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub internal: Vec<String>,
    pub outputs: Vec<String>,
    /// Indexed by `x * |V| + v`.
    trans: Vec<BTreeSet<usize>>,
    /// Indexed by `x * |U| + u`; elements are `(y, v)` index pairs.
    output_map: Vec<BTreeSet<(usize, usize)>>,
}

impl GeneralSystem {
    pub fn empty(
        states: Vec<String>,
        inputs: Vec<String>,
        internal: Vec<String>,
        outputs: Vec<String>,
    ) -> Self {
        let trans = vec![BTreeSet::new(); states.len() * internal.len()];
        let output_map = vec![BTreeSet::new(); states.len() * inputs.len()];
        GeneralSystem {
            states,
            inputs,
            internal,
            outputs,
            trans,
            output_map,
        }
    }

    /// A static system `({0}, U, {0}, Y, F, H)` given `H̄ : U → 2^Y`.
    pub fn static_system(inputs: Vec<String>, outputs: Vec<String>, table: &[BTreeSet<usize>]) -> Self {
        assert_eq!(table.len(), inputs.len());
        let mut sys = Self::empty(
            vec!["0".to_string()],
            inputs,
            vec!["0".to_string()],
            outputs,
        );
        sys.trans[0].insert(0);
        for (u, ys) in table.iter().enumerate() {
            for &y in ys {
                sys.output_map[u].insert((y, 0));
            }
        }
        sys
    }

    pub fn add_transition(&mut self, x: usize, v: usize, to: usize) {
        let m = self.internal.len();
        self.trans[pair_index(x, v, m)].insert(to);
    }

    pub fn add_output(&mut self, x: usize, u: usize, y: usize, v: usize) {
        let m = self.inputs.len();
        self.output_map[pair_index(x, u, m)].insert((y, v));
    }

    pub fn successors(&self, x: usize, v: usize) -> &BTreeSet<usize> {
        &self.trans[pair_index(x, v, self.internal.len())]
    }

    pub fn outputs_of(&self, x: usize, u: usize) -> &BTreeSet<(usize, usize)> {
        &self.output_map[pair_index(x, u, self.inputs.len())]
    }

    pub fn is_static(&self) -> bool {
        self.states.len() == 1
            && self.internal.len() == 1
            && self.trans[0].contains(&0)
    }

    pub fn is_autonomous(&self) -> bool {
        self.inputs.len() == 1
    }

    pub fn input_index(&self, label: &str) -> Option<usize> {
        self.inputs.iter().position(|s| s == label)
    }

    pub fn all_states(&self) -> BTreeSet<usize> {
        (0..self.states.len()).collect()
    }
}

/// Serial composition `S2 ∘ S1`; requires `Y1 ⊆ U2` label-wise.
pub fn serial_compose(s1: &GeneralSystem, s2: &GeneralSystem) -> Result<GeneralSystem> {
    // Map each output of s1 to the input index of s2 carrying the same label.
    let mut y1_to_u2 = Vec::with_capacity(s1.outputs.len());
    for y in &s1.outputs {
        match s2.input_index(y) {
            Some(u) => y1_to_u2.push(u),
            None => {
                return Err(Error::NotSerialComposable { label: y.clone() });
            }
        }
    }

    let n2 = s2.states.len();
    let m2 = s2.internal.len();
    let mut out = GeneralSystem::empty(
        product_labels(&s1.states, &s2.states),
        s1.inputs.clone(),
        product_labels(&s1.internal, &s2.internal),
        s2.outputs.clone(),
    );

    for x1 in 0..s1.states.len() {
        for x2 in 0..n2 {
            let x = pair_index(x1, x2, n2);
            for v1 in 0..s1.internal.len() {
                for v2 in 0..m2 {
                    let v = pair_index(v1, v2, m2);
                    for &t1 in s1.successors(x1, v1) {
                        for &t2 in s2.successors(x2, v2) {
                            out.add_transition(x, v, pair_index(t1, t2, n2));
                        }
                    }
                }
            }
            for u1 in 0..s1.inputs.len() {
                for &(y1, v1) in s1.outputs_of(x1, u1) {
                    for &(y2, v2) in s2.outputs_of(x2, y1_to_u2[y1]) {
                        out.add_output(x, u1, y2, pair_index(v1, v2, m2));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Result of the feedback-composability check, naming the first violated
/// clause when the systems do not compose.
#[derive(Debug, Clone)]
pub struct FeedbackCheck {
    pub composable: bool,
    pub violation: Option<String>,
}

impl FeedbackCheck {
    fn fail(reason: String) -> Self {
        FeedbackCheck {
            composable: false,
            violation: Some(reason),
        }
    }
}

/// Checks whether `ctrl` is feedback composable with `plant`.
pub fn feedback_composable(ctrl: &GeneralSystem, plant: &GeneralSystem) -> FeedbackCheck {
    // Y2 ⊆ U1 and Y1 ⊆ U2 (labels).
    for y in &plant.outputs {
        if ctrl.input_index(y).is_none() {
            return FeedbackCheck::fail(format!(
                "plant output `{y}` is not an input of the controller (Y2 ⊄ U1)"
            ));
        }
    }
    for y in &ctrl.outputs {
        if plant.input_index(y).is_none() {
            return FeedbackCheck::fail(format!(
                "controller output `{y}` is not an input of the plant (Y1 ⊄ U2)"
            ));
        }
    }

    // Clause (i): V2 = U2 and H2(x2, u2) = H2'(x2) × {u2}.
    let u2_set: BTreeSet<&String> = plant.inputs.iter().collect();
    let v2_set: BTreeSet<&String> = plant.internal.iter().collect();
    if u2_set != v2_set {
        return FeedbackCheck::fail("clause (i): plant internal set V2 differs from U2".into());
    }
    let u2_to_v2: Vec<usize> = plant
        .inputs
        .iter()
        .map(|l| plant.internal.iter().position(|v| v == l).unwrap())
        .collect();
    // H2'(x2): outputs reachable under some input.
    let mut h2_prime: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); plant.states.len()];
    for x2 in 0..plant.states.len() {
        for u2 in 0..plant.inputs.len() {
            for &(y2, _) in plant.outputs_of(x2, u2) {
                h2_prime[x2].insert(y2);
            }
        }
        for u2 in 0..plant.inputs.len() {
            let expected: BTreeSet<(usize, usize)> = h2_prime[x2]
                .iter()
                .map(|&y2| (y2, u2_to_v2[u2]))
                .collect();
            if *plant.outputs_of(x2, u2) != expected {
                return FeedbackCheck::fail(format!(
                    "clause (i): H2({}, {}) is not H2'(x2) × {{u2}}",
                    plant.states[x2], plant.inputs[u2]
                ));
            }
        }
    }

    // Clause (ii): blocking must propagate from the plant to the controller.
    for x1 in 0..ctrl.states.len() {
        for x2 in 0..plant.states.len() {
            for &y2 in &h2_prime[x2] {
                let u1 = ctrl.input_index(&plant.outputs[y2]).unwrap();
                for &(y1, v1) in ctrl.outputs_of(x1, u1) {
                    let u2 = plant.input_index(&ctrl.outputs[y1]).unwrap();
                    for &(y2b, v2) in plant.outputs_of(x2, u2) {
                        if y2b != y2 {
                            continue;
                        }
                        if plant.successors(x2, v2).is_empty()
                            && !ctrl.successors(x1, v1).is_empty()
                        {
                            return FeedbackCheck::fail(format!(
                                "clause (ii): F2({}, {}) = ∅ but F1({}, {}) ≠ ∅",
                                plant.states[x2],
                                plant.internal[v2],
                                ctrl.states[x1],
                                ctrl.internal[v1]
                            ));
                        }
                    }
                }
            }
        }
    }

    FeedbackCheck {
        composable: true,
        violation: None,
    }
}

/// Feedback composition `C × S`; the result is autonomous with output space
/// `Y1 × Y2`.
pub fn feedback_compose(ctrl: &GeneralSystem, plant: &GeneralSystem) -> Result<GeneralSystem> {
    let check = feedback_composable(ctrl, plant);
    if !check.composable {
        return Err(Error::NotFeedbackComposable {
            reason: check.violation.unwrap_or_default(),
        });
    }

    let n2 = plant.states.len();
    let m2 = plant.internal.len();
    let my2 = plant.outputs.len();
    let mut out = GeneralSystem::empty(
        product_labels(&ctrl.states, &plant.states),
        vec!["0".to_string()],
        product_labels(&ctrl.internal, &plant.internal),
        product_labels(&ctrl.outputs, &plant.outputs),
    );

    let mut h2_prime: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n2];
    for x2 in 0..n2 {
        for u2 in 0..plant.inputs.len() {
            for &(y2, _) in plant.outputs_of(x2, u2) {
                h2_prime[x2].insert(y2);
            }
        }
    }

    for x1 in 0..ctrl.states.len() {
        for x2 in 0..n2 {
            let x = pair_index(x1, x2, n2);
            for v1 in 0..ctrl.internal.len() {
                for v2 in 0..m2 {
                    let v = pair_index(v1, v2, m2);
                    for &t1 in ctrl.successors(x1, v1) {
                        for &t2 in plant.successors(x2, v2) {
                            out.add_transition(x, v, pair_index(t1, t2, n2));
                        }
                    }
                }
            }
            for &y2 in &h2_prime[x2] {
                let u1 = ctrl.input_index(&plant.outputs[y2]).unwrap();
                for &(y1, v1) in ctrl.outputs_of(x1, u1) {
                    let u2 = plant.input_index(&ctrl.outputs[y1]).unwrap();
                    for &(y2b, v2) in plant.outputs_of(x2, u2) {
                        if y2b == y2 {
                            out.add_output(
                                x,
                                0,
                                pair_index(y1, y2, my2),
                                pair_index(v1, v2, m2),
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Why a finite trace ends.
#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    serde::Serialize,
    serde::Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// No admissible continuation exists (deadlock or dead-end output map).
    Blocked,
    /// The trace reached the enumeration horizon.
    Truncated,
}

/// One step `(u, v, x, y)` of a trajectory.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Step {
    pub input: usize,
    pub internal: usize,
    pub state: usize,
    pub output: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Trace {
    pub steps: Vec<Step>,
    pub termination: Termination,
}

/// A deduplicated set of output traces up to a horizon.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BehaviorSet {
    pub traces: BTreeSet<(Vec<usize>, Termination)>,
}

impl BehaviorSet {
    /// Applies an output re-indexing (e.g. a projection of product outputs).
    pub fn map_outputs(&self, f: impl Fn(usize) -> usize) -> BehaviorSet {
        BehaviorSet {
            traces: self
                .traces
                .iter()
                .map(|(seq, t)| (seq.iter().map(|&y| f(y)).collect(), *t))
                .collect(),
        }
    }

    pub fn truncated(&self) -> BTreeSet<Vec<usize>> {
        self.traces
            .iter()
            .filter(|(_, t)| *t == Termination::Truncated)
            .map(|(s, _)| s.clone())
            .collect()
    }
}

/// Enumerates every maximal trajectory of `sys` from the states in `x0`,
/// up to `horizon` output steps.
///
/// A branch that cannot take an output step at a reached state is reported
/// as blocked; this covers both `F(x, v) = ∅` deadlocks and dead-end output
/// maps arising in compositions.
pub fn trajectories(
    sys: &GeneralSystem,
    x0: &BTreeSet<usize>,
    horizon: usize,
) -> Result<Vec<Trace>> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    for &x in x0 {
        if x >= sys.states.len() {
            return Err(Error::IndexOutOfRange {
                context: "initial state",
                index: x,
                size: sys.states.len(),
            });
        }
    }
    let mut out = Vec::new();
    let mut steps: Vec<Step> = Vec::new();
    for &x in x0 {
        explore(sys, x, horizon, &mut steps, &mut out);
    }
    Ok(out)
}

fn explore(sys: &GeneralSystem, x: usize, horizon: usize, steps: &mut Vec<Step>, out: &mut Vec<Trace>) {
    let mut any = false;
    for u in 0..sys.inputs.len() {
        for &(y, v) in sys.outputs_of(x, u) {
            any = true;
            steps.push(Step {
                input: u,
                internal: v,
                state: x,
                output: y,
            });
            if steps.len() == horizon {
                out.push(Trace {
                    steps: steps.clone(),
                    termination: Termination::Truncated,
                });
            } else {
                let succ = sys.successors(x, v);
                if succ.is_empty() {
                    out.push(Trace {
                        steps: steps.clone(),
                        termination: Termination::Blocked,
                    });
                } else {
                    for &t in succ {
                        explore(sys, t, horizon, steps, out);
                    }
                }
            }
            steps.pop();
        }
    }
    if !any && !steps.is_empty() {
        out.push(Trace {
            steps: steps.clone(),
            termination: Termination::Blocked,
        });
    }
}

/// The bounded-horizon behavior `B(S)`: output traces of maximal
/// trajectories, with truncation flags.
pub fn behavior(sys: &GeneralSystem, x0: &BTreeSet<usize>, horizon: usize) -> Result<BehaviorSet> {
    let mut set = BehaviorSet::default();
    for trace in trajectories(sys, x0, horizon)? {
        set.traces.insert((
            trace.steps.iter().map(|s| s.output).collect(),
            trace.termination,
        ));
    }
    Ok(set)
}
