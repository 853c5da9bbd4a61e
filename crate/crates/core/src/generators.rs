//! Seeded random instance generators for self-tests and property checks.
//!
//! All generators take an explicit RNG so that every produced instance is
//! reproducible from a seed. Concrete and abstract systems share an input
//! label pool `u0..`, which keeps label-based conditions (feedback
//! refinement clause (i), input-identity hypotheses) reachable.

use std::collections::BTreeSet;

use rand::Rng;

use crate::relation::{check_relation, BinaryRelation, RelationType};
use crate::system::FiniteSystem;

fn input_labels(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("u{i}")).collect()
}

fn state_labels(n: usize, prefix: &str) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// A system with each transition set filled independently at `density`.
pub fn random_system(
    rng: &mut impl Rng,
    n: usize,
    m: usize,
    density: f64,
    prefix: &str,
) -> FiniteSystem {
    let mut sys = FiniteSystem::empty(state_labels(n, prefix), input_labels(m));
    for x in 0..n {
        for u in 0..m {
            for t in 0..n {
                if rng.gen_bool(density) {
                    sys.add_transition(x, u, t);
                }
            }
        }
    }
    sys
}

/// A random `(s1, s2, R)` triple over small state spaces with shared input
/// labels.
pub fn random_instance(rng: &mut impl Rng) -> (FiniteSystem, FiniteSystem, BinaryRelation) {
    let n1 = rng.gen_range(1..=5);
    let n2 = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=3);
    let s1 = random_system(rng, n1, m, 0.35, "x");
    let s2 = random_system(rng, n2, m, 0.35, "y");
    let mut pairs = BTreeSet::new();
    for a in 0..n1 {
        for b in 0..n2 {
            if rng.gen_bool(0.4) {
                pairs.insert((a, b));
            }
        }
    }
    let r = BinaryRelation::new(n1, n2, pairs).unwrap();
    (s1, s2, r)
}

/// A random instance whose abstract system is deterministic.
pub fn deterministic_abstract_instance(
    rng: &mut impl Rng,
) -> (FiniteSystem, FiniteSystem, BinaryRelation) {
    let (s1, s2, r) = random_instance(rng);
    // Thin every F2 cell to at most one successor.
    let mut thinned = FiniteSystem::empty(s2.states.clone(), s2.inputs.clone());
    for x in 0..s2.states.len() {
        for u in 0..s2.inputs.len() {
            if let Some(&t) = s2.successors(x, u).iter().next() {
                if rng.gen_bool(0.8) {
                    thinned.add_transition(x, u, t);
                }
            }
        }
    }
    debug_assert!(thinned.is_deterministic());
    (s1, thinned, r)
}

/// A random instance whose relation is a partial function.
pub fn deterministic_relation_instance(
    rng: &mut impl Rng,
) -> (FiniteSystem, FiniteSystem, BinaryRelation) {
    let (s1, s2, _) = random_instance(rng);
    let n1 = s1.states.len();
    let n2 = s2.states.len();
    let mut pairs = BTreeSet::new();
    for a in 0..n1 {
        if rng.gen_bool(0.7) {
            pairs.insert((a, rng.gen_range(0..n2)));
        }
    }
    let r = BinaryRelation::new(n1, n2, pairs).unwrap();
    (s1, s2, r)
}

/// A quotient instance: `s1` follows block dynamics `g : X2 × U → X2` under
/// a random surjection `q`, `s2` is the induced block system, and
/// `R = graph(q)`, with `F2` enlarged at random.
///
/// All five relation types hold on the result by construction: every
/// concrete successor set lies inside the single block `g(q(x1), u)`, so the
/// block successor works uniformly for the whole class.
pub fn quotient_instance(rng: &mut impl Rng) -> (FiniteSystem, FiniteSystem, BinaryRelation) {
    let n2 = rng.gen_range(1..=4);
    let n1 = rng.gen_range(n2..=6);
    let m = rng.gen_range(1..=3);

    // Surjective quotient map and its preimage classes.
    let mut q = vec![0usize; n1];
    for (x2, slot) in q.iter_mut().take(n2).enumerate() {
        *slot = x2;
    }
    for slot in q.iter_mut().skip(n2) {
        *slot = rng.gen_range(0..n2);
    }
    let mut class = vec![Vec::new(); n2];
    for (x1, &x2) in q.iter().enumerate() {
        class[x2].push(x1);
    }

    // Block dynamics g and class-confined, total concrete dynamics.
    let g: Vec<usize> = (0..n2 * m).map(|_| rng.gen_range(0..n2)).collect();
    let mut s1 = FiniteSystem::empty(state_labels(n1, "x"), input_labels(m));
    for x1 in 0..n1 {
        for u in 0..m {
            let block = &class[g[q[x1] * m + u]];
            s1.add_transition(x1, u, block[rng.gen_range(0..block.len())]);
            for &t in block {
                if rng.gen_bool(0.3) {
                    s1.add_transition(x1, u, t);
                }
            }
        }
    }

    let mut s2 = FiniteSystem::empty(state_labels(n2, "y"), input_labels(m));
    for x2 in 0..n2 {
        for u in 0..m {
            s2.add_transition(x2, u, g[x2 * m + u]);
        }
    }
    // Enlarging already-nonempty cells preserves every relation type.
    for x2 in 0..n2 {
        for u in 0..m {
            if !s2.successors(x2, u).is_empty() {
                for t in 0..n2 {
                    if rng.gen_bool(0.2) {
                        s2.add_transition(x2, u, t);
                    }
                }
            }
        }
    }

    let pairs: BTreeSet<(usize, usize)> = q.iter().enumerate().map(|(x1, &x2)| (x1, x2)).collect();
    let r = BinaryRelation::new(n1, n2, pairs).unwrap();
    (s1, s2, r)
}

/// A random instance on which `check_relation(t)` holds and `R` is nonempty.
///
/// Rejection-samples generic instances first for variety, then falls back to
/// a quotient instance, which passes every type.
pub fn passing_instance(
    rng: &mut impl Rng,
    t: RelationType,
) -> (FiniteSystem, FiniteSystem, BinaryRelation) {
    for _ in 0..100 {
        let (s1, s2, r) = random_instance(rng);
        if r.pairs().is_empty() {
            continue;
        }
        if check_relation(t, &s1, &s2, &r).unwrap().holds {
            return (s1, s2, r);
        }
    }
    quotient_instance(rng)
}
