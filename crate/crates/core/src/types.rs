//! Core value types shared by the optimizer, the baselines and the metrics.
//!
//! Decision vectors live in the normalized unit box [0, 1]^P everywhere
//! inside the algorithms; raw problem coordinates appear only at the
//! evaluation boundary.

use serde::{Deserialize, Serialize};

/// A point in normalized decision space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionVector(pub Vec<f64>);

impl DecisionVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// True when every coordinate lies in the closed unit interval.
    pub fn in_unit_box(&self) -> bool {
        self.0.iter().all(|&v| (0.0..=1.0).contains(&v))
    }
}

impl std::ops::Deref for DecisionVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// An objective vector; all problems in the suite minimize every component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(pub Vec<f64>);

impl ObjectiveVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Deref for ObjectiveVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// One candidate solution: a decision vector plus, once truly evaluated, its
/// objective vector and the global index of that evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub x: DecisionVector,
    pub objectives: Option<ObjectiveVector>,
    pub eval_index: Option<u64>,
    /// Set when the objective function signalled failure; the stored
    /// objectives are then the +1e30 penalty vector.
    pub eval_failed: bool,
}

impl Individual {
    pub fn unevaluated(x: DecisionVector) -> Self {
        Self {
            x,
            objectives: None,
            eval_index: None,
            eval_failed: false,
        }
    }

    pub fn is_evaluated(&self) -> bool {
        self.objectives.is_some()
    }

    /// Panics when called on an unevaluated individual; selection operates
    /// only on evaluated populations.
    pub fn objectives(&self) -> &ObjectiveVector {
        self.objectives
            .as_ref()
            .expect("individual has not been evaluated")
    }
}

/// An ordered multiset of individuals with a nominal capacity N.
///
/// Duplicates are permitted: the optimizer's survivor sets routinely carry
/// repeated points and downstream code (crowding, model fitting) handles
/// them explicitly rather than deduplicating here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub members: Vec<Individual>,
    pub capacity: usize,
}

impl Population {
    pub fn new(members: Vec<Individual>, capacity: usize) -> Self {
        Self { members, capacity }
    }

    pub fn empty(capacity: usize) -> Self {
        Self {
            members: Vec::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Objective vectors of all members, in member order.
    pub fn objective_vectors(&self) -> Vec<ObjectiveVector> {
        self.members.iter().map(|m| m.objectives().clone()).collect()
    }
}

/// Monotone counter of true objective evaluations for one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvalCounter(u64);

impl EvalCounter {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn count(&self) -> u64 {
        self.0
    }

    /// Reserves and returns the next evaluation index.
    pub fn next(&mut self) -> u64 {
        let idx = self.0;
        self.0 += 1;
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_counter_is_monotone_and_gapless() {
        let mut counter = EvalCounter::new();
        assert_eq!(counter.count(), 0);
        for expect in 0..100 {
            assert_eq!(counter.next(), expect);
        }
        assert_eq!(counter.count(), 100);
    }

    #[test]
    fn decision_vector_unit_box_check() {
        assert!(DecisionVector(vec![0.0, 0.5, 1.0]).in_unit_box());
        assert!(!DecisionVector(vec![0.0, 1.0 + 1e-12]).in_unit_box());
        assert!(!DecisionVector(vec![-0.1, 0.5]).in_unit_box());
    }

    #[test]
    fn population_roundtrips_through_json() {
        let pop = Population::new(
            vec![
                Individual {
                    x: DecisionVector(vec![0.25, 0.75]),
                    objectives: Some(ObjectiveVector(vec![1.0, 2.0])),
                    eval_index: Some(0),
                    eval_failed: false,
                },
                Individual::unevaluated(DecisionVector(vec![0.5, 0.5])),
            ],
            8,
        );
        let json = serde_json::to_string(&pop).unwrap();
        let back: Population = serde_json::from_str(&json).unwrap();
        assert_eq!(pop, back);
    }
}
