//! Binary relations between state spaces, the five simulation-relation
//! checkers, extended relations, interface input maps, and the relation
//! hierarchy.
//!
//! All checkers evaluate the exact quantifier structure of their defining
//! formula by exhaustive search. Counterexamples are the lexicographically
//! first violated quantifier instance; witnesses record the existential
//! choices made for the first universally-quantified instance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::FiniteSystem;

/// A relation `R ⊆ X1 × X2` with precomputed forward and inverse maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryRelation {
    pub n_left: usize,
    pub n_right: usize,
    pairs: BTreeSet<(usize, usize)>,
    forward: Vec<BTreeSet<usize>>,
    inverse: Vec<BTreeSet<usize>>,
}

impl BinaryRelation {
    pub fn new(n_left: usize, n_right: usize, pairs: BTreeSet<(usize, usize)>) -> Result<Self> {
        let mut forward = vec![BTreeSet::new(); n_left];
        let mut inverse = vec![BTreeSet::new(); n_right];
        for &(a, b) in &pairs {
            if a >= n_left {
                return Err(Error::IndexOutOfRange {
                    context: "relation left element",
                    index: a,
                    size: n_left,
                });
            }
            if b >= n_right {
                return Err(Error::IndexOutOfRange {
                    context: "relation right element",
                    index: b,
                    size: n_right,
                });
            }
            forward[a].insert(b);
            inverse[b].insert(a);
        }
        Ok(BinaryRelation {
            n_left,
            n_right,
            pairs,
            forward,
            inverse,
        })
    }

    /// Builds a relation from state labels of two systems.
    pub fn from_labels(
        s1: &FiniteSystem,
        s2: &FiniteSystem,
        pairs: &[(&str, &str)],
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            let x1 = s1
                .state_index(a)
                .ok_or_else(|| Error::Parse(format!("unknown state label `{a}`")))?;
            let x2 = s2
                .state_index(b)
                .ok_or_else(|| Error::Parse(format!("unknown state label `{b}`")))?;
            set.insert((x1, x2));
        }
        Self::new(s1.states.len(), s2.states.len(), set)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, n, (0..n).map(|i| (i, i)).collect()).unwrap()
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn contains(&self, x1: usize, x2: usize) -> bool {
        self.pairs.contains(&(x1, x2))
    }

    /// `R(x1)`.
    pub fn forward(&self, x1: usize) -> &BTreeSet<usize> {
        &self.forward[x1]
    }

    /// `R^{-1}(x2)`.
    pub fn inverse(&self, x2: usize) -> &BTreeSet<usize> {
        &self.inverse[x2]
    }

    /// True iff `R(x1) ≠ ∅` for every `x1` (tested, not assumed).
    pub fn is_strict(&self) -> bool {
        self.forward.iter().all(|s| !s.is_empty())
    }

    /// True iff `|R(x1)| ≤ 1` for every `x1`.
    pub fn is_deterministic(&self) -> bool {
        self.forward.iter().all(|s| s.len() <= 1)
    }
}

/// The five relation types, ordered by the notation used throughout.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum RelationType {
    Asr,
    Asrb,
    Asrbb,
    Mcr,
    Frr,
}

impl RelationType {
    pub const ALL: [RelationType; 5] = [
        RelationType::Asr,
        RelationType::Asrb,
        RelationType::Asrbb,
        RelationType::Mcr,
        RelationType::Frr,
    ];
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelationType::Asr => "ASR",
            RelationType::Asrb => "ASRB",
            RelationType::Asrbb => "ASRBB",
            RelationType::Mcr => "MCR",
            RelationType::Frr => "FRR",
        };
        f.write_str(s)
    }
}

impl FromStr for RelationType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "asr" => Ok(RelationType::Asr),
            "asrb" => Ok(RelationType::Asrb),
            "asrbb" => Ok(RelationType::Asrbb),
            "mcr" => Ok(RelationType::Mcr),
            "frr" => Ok(RelationType::Frr),
            other => Err(Error::InvalidArgument(format!(
                "unknown relation type `{other}` (expected asr, asrb, asrbb, mcr or frr)"
            ))),
        }
    }
}

/// Variable bindings `(name, label)` of a quantifier instance.
pub type Bindings = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub bindings: Bindings,
    pub reason: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = self
            .bindings
            .iter()
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        write!(f, "({}): {}", vars.join(", "), self.reason)
    }
}

/// Outcome of one relation check. Exactly one of `witness` and
/// `counterexample` is populated; a vacuously true check carries an empty
/// witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub relation_type: RelationType,
    pub holds: bool,
    pub witness: Option<Bindings>,
    pub counterexample: Option<Counterexample>,
}

impl CheckReport {
    fn holds(t: RelationType, witness: Bindings) -> Self {
        CheckReport {
            relation_type: t,
            holds: true,
            witness: Some(witness),
            counterexample: None,
        }
    }

    fn fails(t: RelationType, bindings: Bindings, reason: String) -> Self {
        CheckReport {
            relation_type: t,
            holds: false,
            witness: None,
            counterexample: Some(Counterexample { bindings, reason }),
        }
    }
}

fn check_dims(s1: &FiniteSystem, s2: &FiniteSystem, r: &BinaryRelation) -> Result<()> {
    if r.n_left != s1.states.len() || r.n_right != s2.states.len() {
        return Err(Error::InvalidArgument(format!(
            "relation over {}x{} states does not match systems with {} and {} states",
            r.n_left,
            r.n_right,
            s1.states.len(),
            s2.states.len()
        )));
    }
    Ok(())
}

fn bind(s1: &FiniteSystem, s2: &FiniteSystem, items: &[(&str, Side, usize)]) -> Bindings {
    items
        .iter()
        .map(|(name, side, idx)| {
            let label = match side {
                Side::State1 => s1.states[*idx].clone(),
                Side::Input1 => s1.inputs[*idx].clone(),
                Side::State2 => s2.states[*idx].clone(),
                Side::Input2 => s2.inputs[*idx].clone(),
            };
            (name.to_string(), label)
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Side {
    State1,
    Input1,
    State2,
    Input2,
}

/// Checks whether `R` is a relation of type `t` from `s1` to `s2`.
pub fn check_relation(
    t: RelationType,
    s1: &FiniteSystem,
    s2: &FiniteSystem,
    r: &BinaryRelation,
) -> Result<CheckReport> {
    check_dims(s1, s2, r)?;
    Ok(match t {
        RelationType::Asr => check_asr(s1, s2, r),
        RelationType::Asrb => check_asrb(s1, s2, r),
        RelationType::Asrbb => check_asrbb(s1, s2, r),
        RelationType::Mcr => check_mcr(s1, s2, r),
        RelationType::Frr => check_frr(s1, s2, r),
    })
}

/// `∀(x1,x2)∈R ∀u2∈U_{S2}(x2) ∃u1∈U_{S1}(x1) ∀x1+∈F1(x1,u1):
/// R(x1+) ∩ F2(x2,u2) ≠ ∅`.
fn check_asr(s1: &FiniteSystem, s2: &FiniteSystem, r: &BinaryRelation) -> CheckReport {
    let mut witness: Option<Bindings> = None;
    for &(x1, x2) in r.pairs() {
        for u2 in s2.available_inputs(x2).unwrap() {
            let f2 = s2.successors(x2, u2);
            let chosen = s1.available_inputs(x1).unwrap().into_iter().find(|&u1| {
                s1.successors(x1, u1)
                    .iter()
                    .all(|&x1p| r.forward(x1p).iter().any(|x2p| f2.contains(x2p)))
            });
            match chosen {
                Some(u1) => {
                    if witness.is_none() {
                        witness = Some(bind(
                            s1,
                            s2,
                            &[
                                ("x1", Side::State1, x1),
                                ("x2", Side::State2, x2),
                                ("u2", Side::Input2, u2),
                                ("u1", Side::Input1, u1),
                            ],
                        ));
                    }
                }
                None => {
                    return CheckReport::fails(
                        RelationType::Asr,
                        bind(
                            s1,
                            s2,
                            &[
                                ("x1", Side::State1, x1),
                                ("x2", Side::State2, x2),
                                ("u2", Side::Input2, u2),
                            ],
                        ),
                        "no available u1 makes every F1-successor related to some F2-successor"
                            .into(),
                    );
                }
            }
        }
    }
    CheckReport::holds(RelationType::Asr, witness.unwrap_or_default())
}

/// `∀(x1,x2)∈R ∀u2∈U_{S2}(x2) ∃u1∈U_{S1}(x1) ∃x2+∈F2(x2,u2)
/// ∀x1+∈F1(x1,u1): (x1+,x2+)∈R`.
fn check_asrb(s1: &FiniteSystem, s2: &FiniteSystem, r: &BinaryRelation) -> CheckReport {
    let mut witness: Option<Bindings> = None;
    for &(x1, x2) in r.pairs() {
        for u2 in s2.available_inputs(x2).unwrap() {
            let mut chosen = None;
            'search: for u1 in s1.available_inputs(x1).unwrap() {
                for &x2p in s2.successors(x2, u2) {
                    if s1
                        .successors(x1, u1)
                        .iter()
                        .all(|&x1p| r.contains(x1p, x2p))
                    {
                        chosen = Some((u1, x2p));
                        break 'search;
                    }
                }
            }
            match chosen {
                Some((u1, x2p)) => {
                    if witness.is_none() {
                        witness = Some(bind(
                            s1,
                            s2,
                            &[
                                ("x1", Side::State1, x1),
                                ("x2", Side::State2, x2),
                                ("u2", Side::Input2, u2),
                                ("u1", Side::Input1, u1),
                                ("x2+", Side::State2, x2p),
                            ],
                        ));
                    }
                }
                None => {
                    return CheckReport::fails(
                        RelationType::Asrb,
                        bind(
                            s1,
                            s2,
                            &[
                                ("x1", Side::State1, x1),
                                ("x2", Side::State2, x2),
                                ("u2", Side::Input2, u2),
                            ],
                        ),
                        "no (u1, x2+) pair predicts every F1-successor inside R".into(),
                    );
                }
            }
        }
    }
    CheckReport::holds(RelationType::Asrb, witness.unwrap_or_default())
}

/// `∀x2∈X2 ∀u2∈U_{S2}(x2) ∃x2+∈F2(x2,u2) ∀x1∈R^{-1}(x2)
/// ∃u1∈U_{S1}(x1) ∀x1+∈F1(x1,u1): (x1+,x2+)∈R`.
fn check_asrbb(s1: &FiniteSystem, s2: &FiniteSystem, r: &BinaryRelation) -> CheckReport {
    let mut witness: Option<Bindings> = None;
    for x2 in 0..s2.states.len() {
        for u2 in s2.available_inputs(x2).unwrap() {
            let chosen = s2.successors(x2, u2).iter().copied().find(|&x2p| {
                r.inverse(x2).iter().all(|&x1| {
                    s1.available_inputs(x1).unwrap().into_iter().any(|u1| {
                        s1.successors(x1, u1)
                            .iter()
                            .all(|&x1p| r.contains(x1p, x2p))
                    })
                })
            });
            match chosen {
                Some(x2p) => {
                    if witness.is_none() {
                        witness = Some(bind(
                            s1,
                            s2,
                            &[
                                ("x2", Side::State2, x2),
                                ("u2", Side::Input2, u2),
                                ("x2+", Side::State2, x2p),
                            ],
                        ));
                    }
                }
                None => {
                    return CheckReport::fails(
                        RelationType::Asrbb,
                        bind(s1, s2, &[("x2", Side::State2, x2), ("u2", Side::Input2, u2)]),
                        "no F2-successor works uniformly for every x1 related to x2".into(),
                    );
                }
            }
        }
    }
    CheckReport::holds(RelationType::Asrbb, witness.unwrap_or_default())
}

/// `∀(x1,x2)∈R ∀u2∈U_{S2}(x2) ∃u1∈U_{S1}(x1) ∀x1+∈F1(x1,u1):
/// R(x1+) ≠ ∅ ∧ R(x1+) ⊆ F2(x2,u2)`.
fn check_mcr(s1: &FiniteSystem, s2: &FiniteSystem, r: &BinaryRelation) -> CheckReport {
    let mut witness: Option<Bindings> = None;
    for &(x1, x2) in r.pairs() {
        for u2 in s2.available_inputs(x2).unwrap() {
            let f2 = s2.successors(x2, u2);
            let chosen = s1.available_inputs(x1).unwrap().into_iter().find(|&u1| {
                s1.successors(x1, u1).iter().all(|&x1p| {
                    let img = r.forward(x1p);
                    !img.is_empty() && img.iter().all(|x2p| f2.contains(x2p))
                })
            });
            match chosen {
                Some(u1) => {
                    if witness.is_none() {
                        witness = Some(bind(
                            s1,
                            s2,
                            &[
                                ("x1", Side::State1, x1),
                                ("x2", Side::State2, x2),
                                ("u2", Side::Input2, u2),
                                ("u1", Side::Input1, u1),
                            ],
                        ));
                    }
                }
                None => {
                    return CheckReport::fails(
                        RelationType::Mcr,
                        bind(
                            s1,
                            s2,
                            &[
                                ("x1", Side::State1, x1),
                                ("x2", Side::State2, x2),
                                ("u2", Side::Input2, u2),
                            ],
                        ),
                        "no available u1 keeps the full relation image of every F1-successor \
                         inside F2(x2,u2)"
                            .into(),
                    );
                }
            }
        }
    }
    CheckReport::holds(RelationType::Mcr, witness.unwrap_or_default())
}

/// `∀(x1,x2)∈R`: (i) every available abstract input is available (by label)
/// at `x1`; (ii) `∀u2 ∀x1+∈F1(x1,u2): R(x1+) ≠ ∅ ∧ R(x1+) ⊆ F2(x2,u2)`.
fn check_frr(s1: &FiniteSystem, s2: &FiniteSystem, r: &BinaryRelation) -> CheckReport {
    let mut witness: Option<Bindings> = None;
    for &(x1, x2) in r.pairs() {
        for u2 in s2.available_inputs(x2).unwrap() {
            let label = &s2.inputs[u2];
            let u1 = s1
                .input_index(label)
                .filter(|&u1| !s1.successors(x1, u1).is_empty());
            let Some(u1) = u1 else {
                return CheckReport::fails(
                    RelationType::Frr,
                    bind(
                        s1,
                        s2,
                        &[
                            ("x1", Side::State1, x1),
                            ("x2", Side::State2, x2),
                            ("u2", Side::Input2, u2),
                        ],
                    ),
                    format!("input `{label}` is not available at x1 (U_S2(x2) ⊄ U_S1(x1))"),
                );
            };
            let f2 = s2.successors(x2, u2);
            for &x1p in s1.successors(x1, u1) {
                let img = r.forward(x1p);
                if img.is_empty() || !img.iter().all(|x2p| f2.contains(x2p)) {
                    return CheckReport::fails(
                        RelationType::Frr,
                        bind(
                            s1,
                            s2,
                            &[
                                ("x1", Side::State1, x1),
                                ("x2", Side::State2, x2),
                                ("u2", Side::Input2, u2),
                                ("x1+", Side::State1, x1p),
                            ],
                        ),
                        "relation image of a successor is empty or escapes F2(x2,u2)".into(),
                    );
                }
            }
            if witness.is_none() {
                witness = Some(bind(
                    s1,
                    s2,
                    &[
                        ("x1", Side::State1, x1),
                        ("x2", Side::State2, x2),
                        ("u2", Side::Input2, u2),
                        ("u1", Side::Input1, u1),
                    ],
                ));
            }
        }
    }
    CheckReport::holds(RelationType::Frr, witness.unwrap_or_default())
}

/// The per-type extended relation `R_e^T` over index tuples.
///
/// Tuple layout: `(x2, u2, x1, u1)` for ASR/ASRB/MCR, `(x2, u2, x1)` for
/// FRR, `(x2, u2, x1, u1, x2+)` for the feedforward type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedRelation {
    pub relation_type: RelationType,
    pub tuples: BTreeSet<Vec<usize>>,
}

impl ExtendedRelation {
    pub fn arity(&self) -> usize {
        match self.relation_type {
            RelationType::Frr => 3,
            RelationType::Asrbb => 5,
            _ => 4,
        }
    }
}

/// True iff `tuple` satisfies the defining formula of `t` (guards included).
pub fn tuple_satisfies(
    t: RelationType,
    s1: &FiniteSystem,
    s2: &FiniteSystem,
    r: &BinaryRelation,
    tuple: &[usize],
) -> bool {
    match t {
        RelationType::Frr => {
            let [x2, u2, x1] = tuple else { return false };
            r.contains(*x1, *x2) && !s2.successors(*x2, *u2).is_empty()
        }
        RelationType::Asr => {
            let [x2, u2, x1, u1] = tuple else { return false };
            let f2 = s2.successors(*x2, *u2);
            r.contains(*x1, *x2)
                && !f2.is_empty()
                && !s1.successors(*x1, *u1).is_empty()
                && s1
                    .successors(*x1, *u1)
                    .iter()
                    .all(|&x1p| r.forward(x1p).iter().any(|x2p| f2.contains(x2p)))
        }
        RelationType::Asrb => {
            let [x2, u2, x1, u1] = tuple else { return false };
            let f2 = s2.successors(*x2, *u2);
            r.contains(*x1, *x2)
                && !f2.is_empty()
                && !s1.successors(*x1, *u1).is_empty()
                && f2.iter().any(|&x2p| {
                    s1.successors(*x1, *u1)
                        .iter()
                        .all(|&x1p| r.contains(x1p, x2p))
                })
        }
        RelationType::Mcr => {
            let [x2, u2, x1, u1] = tuple else { return false };
            let f2 = s2.successors(*x2, *u2);
            r.contains(*x1, *x2)
                && !f2.is_empty()
                && !s1.successors(*x1, *u1).is_empty()
                && s1.successors(*x1, *u1).iter().all(|&x1p| {
                    let img = r.forward(x1p);
                    !img.is_empty() && img.iter().all(|x2p| f2.contains(x2p))
                })
        }
        RelationType::Asrbb => {
            let [x2, u2, x1, u1, x2p] = tuple else {
                return false;
            };
            r.contains(*x1, *x2)
                && s2.successors(*x2, *u2).contains(x2p)
                && !s1.successors(*x1, *u1).is_empty()
                && s1
                    .successors(*x1, *u1)
                    .iter()
                    .all(|&x1p| r.contains(x1p, *x2p))
        }
    }
}

/// Enumerates every tuple of `R_e^T` by exhaustive search.
pub fn extended_relation(
    t: RelationType,
    s1: &FiniteSystem,
    s2: &FiniteSystem,
    r: &BinaryRelation,
) -> Result<ExtendedRelation> {
    check_dims(s1, s2, r)?;
    let mut tuples = BTreeSet::new();
    for &(x1, x2) in r.pairs() {
        for u2 in s2.available_inputs(x2).unwrap() {
            match t {
                RelationType::Frr => {
                    let tuple = vec![x2, u2, x1];
                    if tuple_satisfies(t, s1, s2, r, &tuple) {
                        tuples.insert(tuple);
                    }
                }
                RelationType::Asrbb => {
                    for u1 in 0..s1.inputs.len() {
                        for &x2p in s2.successors(x2, u2) {
                            let tuple = vec![x2, u2, x1, u1, x2p];
                            if tuple_satisfies(t, s1, s2, r, &tuple) {
                                tuples.insert(tuple);
                            }
                        }
                    }
                }
                _ => {
                    for u1 in 0..s1.inputs.len() {
                        let tuple = vec![x2, u2, x1, u1];
                        if tuple_satisfies(t, s1, s2, r, &tuple) {
                            tuples.insert(tuple);
                        }
                    }
                }
            }
        }
    }
    Ok(ExtendedRelation {
        relation_type: t,
        tuples,
    })
}

/// `I_R^T`: the `u1`-slice of the extended relation at `query`.
///
/// Query arity: `(u2)` for FRR, `(x2, u2, x1)` for ASR/ASRB/MCR,
/// `(x2, u2, x1, x2+)` for the feedforward type.
pub fn interface_input_map(ext: &ExtendedRelation, query: &[usize]) -> Result<BTreeSet<usize>> {
    let expect = match ext.relation_type {
        RelationType::Frr => 1,
        RelationType::Asrbb => 4,
        _ => 3,
    };
    if query.len() != expect {
        return Err(Error::InvalidArgument(format!(
            "interface input map for {} expects {} query components, got {}",
            ext.relation_type,
            expect,
            query.len()
        )));
    }
    Ok(match ext.relation_type {
        RelationType::Frr => BTreeSet::from([query[0]]),
        RelationType::Asrbb => ext
            .tuples
            .iter()
            .filter(|t| {
                t[0] == query[0] && t[1] == query[1] && t[2] == query[2] && t[4] == query[3]
            })
            .map(|t| t[3])
            .collect(),
        _ => ext
            .tuples
            .iter()
            .filter(|t| t[0] == query[0] && t[1] == query[1] && t[2] == query[2])
            .map(|t| t[3])
            .collect(),
    })
}

/// Runs all five checkers and asserts the result hierarchy; an inconsistent
/// outcome is a checker bug and aborts.
pub fn classify(
    s1: &FiniteSystem,
    s2: &FiniteSystem,
    r: &BinaryRelation,
) -> Result<BTreeMap<RelationType, CheckReport>> {
    let mut out = BTreeMap::new();
    for t in RelationType::ALL {
        out.insert(t, check_relation(t, s1, s2, r)?);
    }
    let holds = |t: RelationType| out[&t].holds;

    let implications = [
        (RelationType::Asrbb, RelationType::Asrb),
        (RelationType::Asrb, RelationType::Asr),
        (RelationType::Frr, RelationType::Mcr),
        (RelationType::Mcr, RelationType::Asr),
    ];
    for (stronger, weaker) in implications {
        assert!(
            !holds(stronger) || holds(weaker),
            "checker inconsistency: {stronger} holds but {weaker} does not"
        );
    }
    if s2.is_deterministic() {
        assert_eq!(
            holds(RelationType::Asr),
            holds(RelationType::Asrbb),
            "checker inconsistency: deterministic abstraction but ASR and ASRBB disagree"
        );
    }
    if r.is_deterministic() {
        assert_eq!(
            holds(RelationType::Asr),
            holds(RelationType::Mcr),
            "checker inconsistency: deterministic relation but ASR and MCR disagree"
        );
    }
    // Every memoryless concrete input coincides (by label) with its abstract
    // input: then MCR and FRR agree.
    let ext = extended_relation(RelationType::Mcr, s1, s2, r)?;
    let labels_agree = ext
        .tuples
        .iter()
        .all(|t| s1.inputs[t[3]] == s2.inputs[t[1]]);
    if labels_agree {
        assert_eq!(
            holds(RelationType::Mcr),
            holds(RelationType::Frr),
            "checker inconsistency: label-identical interface but MCR and FRR disagree"
        );
    }
    Ok(out)
}
