//! Sweep strategies behind the compaction modes.
//!
//! A strategy decides how far up the layer stack the sweep climbs and
//! whether it bails out at the first layer that yields no merges. New
//! variants register themselves in [`strategies`] and become selectable
//! by name from configuration or the command line.

/// Policy knobs for one compaction sweep.
pub trait CompactionStrategy: Sync {
    /// Registry and command-line name.
    fn name(&self) -> &'static str;

    /// Highest layer the sweep may visit, given the tree depth and the
    /// deepest populated layer.
    fn last_layer(&self, depth: usize, deepest: usize) -> usize;

    /// Whether the sweep halts at the first layer whose refined cells are
    /// all singletons.
    fn stops_at_fixpoint(&self) -> bool;
}

/// Climbs until a layer produces no merges: once that happens, no higher
/// layer can merge either, so the sweep is already done.
pub struct OptimalStop;

impl CompactionStrategy for OptimalStop {
    fn name(&self) -> &'static str {
        "optimal"
    }

    fn last_layer(&self, _depth: usize, deepest: usize) -> usize {
        deepest
    }

    fn stops_at_fixpoint(&self) -> bool {
        true
    }
}

/// Visits every layer below the root unconditionally, the behaviour of
/// classic layered merge passes; useful as a reference point.
pub struct FullSweep;

impl CompactionStrategy for FullSweep {
    fn name(&self) -> &'static str {
        "baseline"
    }

    fn last_layer(&self, depth: usize, _deepest: usize) -> usize {
        depth.saturating_sub(1)
    }

    fn stops_at_fixpoint(&self) -> bool {
        false
    }
}

static REGISTRY: [&dyn CompactionStrategy; 2] = [&OptimalStop, &FullSweep];

/// All registered strategies.
pub fn strategies() -> &'static [&'static dyn CompactionStrategy] {
    &REGISTRY
}

/// Looks a strategy up by its registry name.
pub fn strategy_by_name(name: &str) -> Option<&'static dyn CompactionStrategy> {
    strategies().iter().copied().find(|s| s.name() == name)
}

/// The two built-in sweep modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompactionMode {
    Optimal,
    Baseline,
}

impl CompactionMode {
    pub fn strategy(self) -> &'static dyn CompactionStrategy {
        match self {
            CompactionMode::Optimal => &OptimalStop,
            CompactionMode::Baseline => &FullSweep,
        }
    }

    pub fn name(self) -> &'static str {
        self.strategy().name()
    }
}
