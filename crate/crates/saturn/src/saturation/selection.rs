//! Clause selection: age/weight queues inside each view, and the
//! layered two-view dispatch on top.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::derivation::NodeId;

/// Where a pick came from: the model-positive view, the full view, or
/// the full view because the positive view was empty on an A-turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PickSource {
    A,
    B,
    Fallback,
}

impl PickSource {
    pub fn as_str(self) -> &'static str {
        match self {
            PickSource::A => "A",
            PickSource::B => "B",
            PickSource::Fallback => "fallback",
        }
    }
}

/// Age and weight heaps over one view of the passive set. Entries are
/// pruned lazily; membership is decided by the caller's `alive` test.
struct ViewQueues {
    by_age: BinaryHeap<Reverse<NodeId>>,
    by_weight: BinaryHeap<Reverse<(u32, NodeId)>>,
    ratio: (u32, u32),
    tick: u64,
}

impl ViewQueues {
    fn new(ratio: (u32, u32)) -> Self {
        assert!(ratio.0 + ratio.1 > 0, "age/weight ratio must have a positive component");
        ViewQueues {
            by_age: BinaryHeap::new(),
            by_weight: BinaryHeap::new(),
            ratio,
            tick: 0,
        }
    }

    fn push(&mut self, id: NodeId, weight: u32) {
        self.by_age.push(Reverse(id));
        self.by_weight.push(Reverse((weight, id)));
    }

    /// Next clause by the age/weight alternation; ties inside each heap
    /// break toward the lowest clause id. Advances the alternation only
    /// on a successful pick.
    fn pop(&mut self, alive: &dyn Fn(NodeId) -> bool) -> Option<NodeId> {
        let (age_share, weight_share) = self.ratio;
        let age_turn = (self.tick % (age_share + weight_share) as u64) < age_share as u64;
        let picked = if age_turn {
            Self::prune_pop(&mut self.by_age, alive, |Reverse(id)| *id)
        } else {
            Self::prune_pop(&mut self.by_weight, alive, |Reverse((_, id))| *id)
        };
        if picked.is_some() {
            self.tick += 1;
        }
        picked
    }

    fn prune_pop<T: Ord>(
        heap: &mut BinaryHeap<T>,
        alive: &dyn Fn(NodeId) -> bool,
        id_of: impl Fn(&T) -> NodeId,
    ) -> Option<NodeId> {
        while let Some(top) = heap.pop() {
            let id = id_of(&top);
            if alive(id) {
                return Some(id);
            }
        }
        None
    }
}

/// The layered selector. View B holds every passive clause; view A,
/// present only under guidance, the passive clauses the model classed
/// positive. The second-level ratio alternates between the views, with
/// a fallback to B when A is empty on an A-turn (the ratio counter
/// still advances).
pub struct LayeredSelector {
    view_a: Option<ViewQueues>,
    view_b: ViewQueues,
    second_level_ratio: (u32, u32),
    tick: u64,
}

impl LayeredSelector {
    pub fn new(age_weight_ratio: (u32, u32), second_level_ratio: (u32, u32), guided: bool) -> Self {
        assert!(
            second_level_ratio.0 + second_level_ratio.1 > 0,
            "second-level ratio must have a positive component"
        );
        LayeredSelector {
            view_a: guided.then(|| ViewQueues::new(age_weight_ratio)),
            view_b: ViewQueues::new(age_weight_ratio),
            second_level_ratio,
            tick: 0,
        }
    }

    /// Registers a retained clause with both views (view A only if the
    /// model classed it positive).
    pub fn insert(&mut self, id: NodeId, weight: u32, positive: bool) {
        if positive {
            if let Some(a) = &mut self.view_a {
                a.push(id, weight);
            }
        }
        self.view_b.push(id, weight);
    }

    /// Picks the next given clause, or `None` when the passive set is
    /// exhausted.
    pub fn select(
        &mut self,
        passive: &HashSet<NodeId>,
        positives: &HashSet<NodeId>,
    ) -> Option<(NodeId, PickSource)> {
        let alive_b = |id: NodeId| passive.contains(&id);
        let alive_a = |id: NodeId| passive.contains(&id) && positives.contains(&id);
        let (a_share, b_share) = self.second_level_ratio;
        let a_turn = self.view_a.is_some()
            && (self.tick % (a_share + b_share) as u64) < a_share as u64;
        let picked = if a_turn {
            match self.view_a.as_mut().unwrap().pop(&alive_a) {
                Some(id) => Some((id, PickSource::A)),
                None => self.view_b.pop(&alive_b).map(|id| (id, PickSource::Fallback)),
            }
        } else {
            self.view_b.pop(&alive_b).map(|id| (id, PickSource::B))
        };
        if picked.is_some() {
            self.tick += 1;
        }
        picked
    }
}
