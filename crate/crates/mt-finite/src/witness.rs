//! Witness trees: the backward-history certificates behind the expected
//! resample bound.

use lll_core::types::{DependencyGraph, EventId, FiniteInstance};
use lll_core::{event_probability, Rational};
use num_traits::One;

use crate::error::MtError;
use crate::log::ExecutionLog;

/// A rooted tree of event labels. Children of a vertex are always labeled by
/// events in the closed neighborhood (the event itself or a neighbor) of the
/// parent's label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessTree {
    /// Vertex labels; vertex 0 is the root.
    pub labels: Vec<EventId>,
    /// Children of each vertex, in creation order.
    pub children: Vec<Vec<usize>>,
    /// Depth of each vertex (root 0).
    pub depths: Vec<usize>,
}

impl WitnessTree {
    pub fn root_label(&self) -> EventId {
        self.labels[0]
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    /// Canonical encoding treating children as an unordered multiset: two
    /// trees are the same witness tree iff their encodings are equal.
    pub fn canonical(&self) -> String {
        self.canon_vertex(0)
    }

    fn canon_vertex(&self, u: usize) -> String {
        let mut kids: Vec<String> = self.children[u]
            .iter()
            .map(|&c| self.canon_vertex(c))
            .collect();
        kids.sort();
        format!("({}{})", self.labels[u], kids.concat())
    }
}

/// Reconstruct the witness tree for the resample at 1-based `step`.
///
/// The root is that step's event. Scanning earlier records backwards, each
/// event that lies in the closed neighborhood of some current vertex's label
/// is attached as a child of the deepest such vertex (ties broken toward the
/// most recently added); events touching no vertex are skipped.
pub fn build_witness_tree(
    log: &ExecutionLog,
    graph: &DependencyGraph,
    step: u64,
) -> Result<WitnessTree, MtError> {
    let len = log.records.len();
    if step == 0 || step as usize > len {
        return Err(MtError::StepOutOfRange { step, len });
    }
    let idx = step as usize - 1;
    let mut tree = WitnessTree {
        labels: vec![log.records[idx].event],
        children: vec![Vec::new()],
        depths: vec![0],
    };
    for record in log.records[..idx].iter().rev() {
        let event = record.event;
        let mut best: Option<usize> = None;
        for (u, &label) in tree.labels.iter().enumerate() {
            if graph.in_closed_neighborhood(label, event) {
                let better = match best {
                    None => true,
                    Some(b) => tree.depths[u] > tree.depths[b],
                };
                // Vertices are scanned in creation order, so on equal depth
                // the later-created vertex (larger u) wins.
                if better || best.is_some_and(|b| tree.depths[u] == tree.depths[b] && u > b) {
                    best = Some(u);
                }
            }
        }
        if let Some(parent) = best {
            tree.labels.push(event);
            tree.depths.push(tree.depths[parent] + 1);
            tree.children.push(Vec::new());
            let new = tree.labels.len() - 1;
            tree.children[parent].push(new);
        }
    }
    Ok(tree)
}

/// Product over all vertices of the probability of the vertex's event.
pub fn tree_weight(tree: &WitnessTree, instance: &FiniteInstance) -> Result<Rational, MtError> {
    let mut weight = Rational::one();
    for &label in &tree.labels {
        let event = instance
            .event(label)
            .ok_or_else(|| MtError::Invalid(format!("unknown event {label} in tree")))?;
        weight *= event_probability(event, &instance.variables)?;
    }
    Ok(weight)
}
