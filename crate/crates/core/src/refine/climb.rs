use crate::distances::DistanceMatrix;
use crate::error::Result;

use super::{CostState, FeatureGridMap};

pub const DEFAULT_MAX_PASSES: usize = 100;

/// Neighbor offsets `(dr, dc)` in the fixed order N, NE, E, SE, S, SW, W, NW.
pub const NEIGHBOR_OFFSETS: [(isize, isize); 8] =
    [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)];

/// Improvements smaller than this are treated as ties with the status quo.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClimbOptions {
    pub max_passes: usize,
    /// Only exchange features; never move into a vacant pixel.
    pub strict_swaps: bool,
}

impl Default for ClimbOptions {
    fn default() -> Self {
        ClimbOptions { max_passes: DEFAULT_MAX_PASSES, strict_swaps: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClimbResult {
    pub map: FeatureGridMap,
    pub initial_cost: f64,
    /// Cost after each completed pass.
    pub cost_history: Vec<f64>,
    /// Whether the last pass made no change.
    pub converged: bool,
}

/// Greedy local search over swaps and moves between adjacent pixels.
///
/// Each pass visits pixels row-major. For the feature at a visited pixel every
/// in-grid neighbor is scored, and the single best strict improvement is
/// applied, earlier neighbors winning ties. Passes repeat until one makes no
/// change or `max_passes` is reached.
pub fn hill_climb(m: &FeatureGridMap, delta_hat: &DistanceMatrix, opts: ClimbOptions) -> Result<ClimbResult> {
    let mut state = CostState::new(m, delta_hat)?;
    let g = m.grid_size() as isize;
    let initial_cost = state.cost();
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_passes {
        let mut changed = false;
        for r in 0..g {
            for c in 0..g {
                let Some(j) = state.occupant((r as usize, c as usize)) else {
                    continue;
                };
                let mut best: Option<((usize, usize), f64)> = None;
                for (dr, dc) in NEIGHBOR_OFFSETS {
                    let (nr, nc) = (r + dr, c + dc);
                    if nr < 0 || nc < 0 || nr >= g || nc >= g {
                        continue;
                    }
                    let target = (nr as usize, nc as usize);
                    if opts.strict_swaps && state.occupant(target).is_none() {
                        continue;
                    }
                    let d = state.delta(j, target);
                    if d < -MIN_GAIN && best.is_none_or(|(_, b)| d < b) {
                        best = Some((target, d));
                    }
                }
                if let Some((target, d)) = best {
                    state.apply(j, target, d);
                    changed = true;
                }
            }
        }
        history.push(state.refresh());
        log::debug!("hill climb pass {}: cost {}", history.len(), state.cost());
        if !changed {
            converged = true;
            break;
        }
    }
    let map = FeatureGridMap::new(m.grid_size(), state.assignment().to_vec(), m.labels().to_vec())?;
    Ok(ClimbResult { map, initial_cost, cost_history: history, converged })
}
