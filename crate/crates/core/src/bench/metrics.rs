//! Quality measures for a set of counterfactuals.

use serde::{Deserialize, Serialize};

use crate::diverse::ExplanationSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    CfSparse,
    CfDiv,
    CfDist,
    Recall,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::CfSparse, Metric::CfDiv, Metric::CfDist, Metric::Recall];

    pub fn higher_is_better(self) -> bool {
        self == Metric::Recall
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::CfSparse => "CfSparse",
            Metric::CfDiv => "CfDiv",
            Metric::CfDist => "CfDist",
            Metric::Recall => "Recall",
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Mean fraction of features changed per member.
pub fn metric_cf_sparse(es: &ExplanationSet) -> f64 {
    let d = es.request.dim() as f64;
    mean(es.members.iter().map(|m| m.changed_features.len() as f64 / d))
}

/// Mean distance between achieved and requested mappings (grid distance for SOM).
pub fn metric_cf_dist(es: &ExplanationSet) -> f64 {
    mean(es.members.iter().map(|m| m.map_error))
}

/// Mean number of shared changed features over unordered member pairs;
/// 0 for fewer than two members.
pub fn metric_cf_div(es: &ExplanationSet) -> f64 {
    mean(es.pairs().map(|(_, _, v)| v as f64))
}

/// Fraction of `perturbed` features changed by at least one member.
pub fn metric_recall(es: &ExplanationSet, perturbed: &[usize]) -> f64 {
    if perturbed.is_empty() {
        return 0.0;
    }
    let hit = perturbed
        .iter()
        .filter(|j| es.members.iter().any(|m| m.changed_features.contains(j)))
        .count();
    hit as f64 / perturbed.len() as f64
}
