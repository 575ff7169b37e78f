use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};

use super::{check_labels, FeatureGridMap, Pixel};

/// Incremental evaluator of the map cost.
///
/// Pixel distances are integer squared offsets, so the normalizing maximum is
/// tracked exactly with a histogram of squared distances over all pairs. A
/// candidate whose move leaves the maximum unchanged costs `O(p)`; one that
/// changes it falls back to a full `O(p^2)` evaluation.
#[derive(Debug, Clone)]
pub struct CostState {
    g: usize,
    p: usize,
    pos: Vec<Pixel>,
    occ: Vec<Option<usize>>,
    delta_hat: Vec<f64>,
    hist: Vec<u64>,
    root: Vec<f64>,
    max_sq: usize,
    cost: f64,
}

fn sq(a: Pixel, b: Pixel) -> usize {
    let dr = a.0.abs_diff(b.0);
    let dc = a.1.abs_diff(b.1);
    dr * dr + dc * dc
}

impl CostState {
    pub fn new(m: &FeatureGridMap, delta_hat: &DistanceMatrix) -> Result<Self> {
        check_labels(m, delta_hat)?;
        let g = m.grid_size();
        let p = m.len();
        let top = 2 * g.saturating_sub(1) * g.saturating_sub(1);
        let mut hist = vec![0u64; top + 1];
        let pos = m.assignment().to_vec();
        for j in 0..p {
            for k in j + 1..p {
                hist[sq(pos[j], pos[k])] += 1;
            }
        }
        let max_sq = (0..=top).rev().find(|&s| hist[s] > 0).unwrap_or(0);
        let mut state = CostState {
            g,
            p,
            occ: m.occupancy(),
            pos,
            delta_hat: delta_hat.values().iter().copied().collect(),
            hist,
            root: (0..=top).map(|s| (s as f64).sqrt()).collect(),
            max_sq,
            cost: 0.0,
        };
        state.cost = state.full_cost(&state.pos, max_sq);
        Ok(state)
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn grid_size(&self) -> usize {
        self.g
    }

    pub fn position(&self, j: usize) -> Pixel {
        self.pos[j]
    }

    pub fn occupant(&self, px: Pixel) -> Option<usize> {
        self.occ[px.0 * self.g + px.1]
    }

    fn full_cost(&self, pos: &[Pixel], max_sq: usize) -> f64 {
        if max_sq == 0 {
            return 0.0;
        }
        let inv = 1.0 / self.root[max_sq];
        let mut total = 0.0;
        for j in 0..self.p {
            let row = &self.delta_hat[j * self.p..(j + 1) * self.p];
            for k in j + 1..self.p {
                total += (self.root[sq(pos[j], pos[k])] * inv - row[k]).abs();
            }
        }
        total
    }

    /// Recomputes the cost from scratch, clearing accumulated rounding.
    pub fn refresh(&mut self) -> f64 {
        self.cost = self.full_cost(&self.pos, self.max_sq);
        self.cost
    }

    /// Squared-distance changes `(old, new)` for every pair touched by moving
    /// `j` to `target`, with `k` the displaced occupant.
    fn for_each_change(&self, j: usize, target: Pixel, k: Option<usize>, mut f: impl FnMut(usize, usize, usize, usize)) {
        let from = self.pos[j];
        for i in 0..self.p {
            if i == j || Some(i) == k {
                continue;
            }
            let pi = self.pos[i];
            f(j, i, sq(from, pi), sq(target, pi));
            if let Some(k) = k {
                f(k, i, sq(target, pi), sq(from, pi));
            }
        }
    }

    /// Largest squared distance after the move, without mutating.
    fn max_after(&mut self, j: usize, target: Pixel, k: Option<usize>) -> usize {
        let cur = self.max_sq;
        let mut new_max = 0;
        let mut removed_at_max = 0u64;
        let mut added_at_max = 0u64;
        self.for_each_change(j, target, k, |_, _, old, new| {
            new_max = new_max.max(new);
            if old == cur {
                removed_at_max += 1;
            }
            if new == cur {
                added_at_max += 1;
            }
        });
        if new_max > cur {
            return new_max;
        }
        if self.hist[cur] + added_at_max > removed_at_max {
            return cur;
        }
        // The maximum drops: apply, scan down, revert.
        let mut changes = Vec::with_capacity(2 * self.p);
        self.for_each_change(j, target, k, |_, _, old, new| changes.push((old, new)));
        for &(old, new) in &changes {
            self.hist[old] -= 1;
            self.hist[new] += 1;
        }
        let found = (0..cur).rev().find(|&s| self.hist[s] > 0).unwrap_or(0);
        for &(old, new) in &changes {
            self.hist[new] -= 1;
            self.hist[old] += 1;
        }
        found
    }

    /// Cost change from moving feature `j` to `target`, swapping with any
    /// occupant. Exact up to floating-point rounding.
    pub fn delta(&mut self, j: usize, target: Pixel) -> f64 {
        let from = self.pos[j];
        if from == target {
            return 0.0;
        }
        let k = self.occupant(target);
        let new_max = self.max_after(j, target, k);
        if new_max != self.max_sq {
            let mut pos = self.pos.clone();
            pos[j] = target;
            if let Some(k) = k {
                pos[k] = from;
            }
            return self.full_cost(&pos, new_max) - self.cost;
        }
        let inv = 1.0 / self.root[self.max_sq];
        let mut change = 0.0;
        let (root, dh, p) = (&self.root, &self.delta_hat, self.p);
        self.for_each_change(j, target, k, |a, i, old, new| {
            let d = dh[a * p + i];
            change += (root[new] * inv - d).abs() - (root[old] * inv - d).abs();
        });
        change
    }

    /// Applies the move scored by `delta`.
    pub fn apply(&mut self, j: usize, target: Pixel, delta: f64) {
        let from = self.pos[j];
        if from == target {
            return;
        }
        let k = self.occupant(target);
        let mut changes = Vec::with_capacity(2 * self.p);
        self.for_each_change(j, target, k, |_, _, old, new| changes.push((old, new)));
        for (old, new) in changes {
            self.hist[old] -= 1;
            self.hist[new] += 1;
        }
        self.max_sq = (0..self.hist.len()).rev().find(|&s| self.hist[s] > 0).unwrap_or(0);
        let g = self.g;
        self.occ[from.0 * g + from.1] = k;
        self.occ[target.0 * g + target.1] = Some(j);
        self.pos[j] = target;
        if let Some(k) = k {
            self.pos[k] = from;
        }
        self.cost += delta;
    }

    pub fn assignment(&self) -> &[Pixel] {
        &self.pos
    }
}

/// `map_cost(after) - map_cost(before)` for moving feature `j` to `target`.
pub fn cost_delta(m: &FeatureGridMap, j: usize, target: Pixel, delta_hat: &DistanceMatrix) -> Result<f64> {
    let g = m.grid_size();
    if target.0 >= g || target.1 >= g {
        return Err(Error::Format(format!("pixel {target:?} outside a {g}x{g} grid")));
    }
    if j >= m.len() {
        return Err(Error::Dimension(format!("feature {j} of {}", m.len())));
    }
    Ok(CostState::new(m, delta_hat)?.delta(j, target))
}
