//! Local extrema on periodic grids.
//!
//! A node is a local minimum when its value is `<=` every neighbor and `<` at
//! least one. Connected runs of equal values are treated as one plateau: the
//! plateau counts when no neighbor of any member is smaller and some neighbor
//! is larger, and it is reported once at its lexicographically smallest node.

use std::collections::VecDeque;

/// Local minima of a `res × res` row-major grid with periodic wrap and 8 neighbors.
pub fn local_minima_2d(values: &[f64], res: usize) -> Vec<(usize, usize)> {
    assert_eq!(values.len(), res * res, "grid size mismatch");
    let idx = |i: usize, j: usize| i * res + j;
    let neighbors = |i: usize, j: usize| {
        let mut out = [(0usize, 0usize); 8];
        let mut k = 0;
        for di in [res - 1, 0, 1] {
            for dj in [res - 1, 0, 1] {
                if di == 0 && dj == 0 {
                    continue;
                }
                out[k] = ((i + di) % res, (j + dj) % res);
                k += 1;
            }
        }
        out
    };
    let mut seen = vec![false; res * res];
    let mut minima = Vec::new();
    for i0 in 0..res {
        for j0 in 0..res {
            if seen[idx(i0, j0)] {
                continue;
            }
            let v = values[idx(i0, j0)];
            seen[idx(i0, j0)] = true;
            let mut queue = VecDeque::from([(i0, j0)]);
            let (mut lowest, mut any_lower, mut any_higher) = ((i0, j0), false, false);
            while let Some((i, j)) = queue.pop_front() {
                lowest = lowest.min((i, j));
                for (a, b) in neighbors(i, j) {
                    let w = values[idx(a, b)];
                    if w < v {
                        any_lower = true;
                    } else if w > v {
                        any_higher = true;
                    } else if !seen[idx(a, b)] {
                        seen[idx(a, b)] = true;
                        queue.push_back((a, b));
                    }
                }
            }
            if !any_lower && any_higher {
                minima.push(lowest);
            }
        }
    }
    minima.sort_unstable();
    minima
}

/// Local maxima of a periodic 1D sequence with 2 neighbors.
pub fn local_maxima_1d(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut seen = vec![false; n];
    let mut maxima = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let v = values[start];
        seen[start] = true;
        let mut stack = vec![start];
        let (mut lowest, mut any_higher, mut any_lower) = (start, false, false);
        while let Some(i) = stack.pop() {
            lowest = lowest.min(i);
            for k in [(i + n - 1) % n, (i + 1) % n] {
                let w = values[k];
                if w > v {
                    any_higher = true;
                } else if w < v {
                    any_lower = true;
                } else if !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        if !any_higher && any_lower {
            maxima.push(lowest);
        }
    }
    maxima.sort_unstable();
    maxima
}
