//! Variance-reduction regression tree used by the forest.

use serde::Serialize;

use crate::distributions::StreamRng;

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        column: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    column,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*column] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

pub struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub mtry: usize,
}

/// Row accessor: (row index, column) -> value.
pub struct Grower<'a> {
    pub x: &'a dyn Fn(usize, usize) -> f64,
    pub y: &'a [f64],
    pub n_cols: usize,
    pub params: GrowParams,
}

struct BestSplit {
    column: usize,
    threshold: f64,
    gain: f64,
}

impl<'a> Grower<'a> {
    pub fn grow(&self, rows: Vec<usize>, rng: &mut StreamRng) -> Tree {
        let mut nodes = Vec::new();
        self.grow_node(rows, 0, rng, &mut nodes);
        Tree { nodes }
    }

    fn leaf(&self, rows: &[usize], nodes: &mut Vec<Node>) -> usize {
        let mean = rows.iter().map(|&r| self.y[r]).sum::<f64>() / rows.len() as f64;
        nodes.push(Node::Leaf { value: mean });
        nodes.len() - 1
    }

    fn grow_node(
        &self,
        mut rows: Vec<usize>,
        depth: usize,
        rng: &mut StreamRng,
        nodes: &mut Vec<Node>,
    ) -> usize {
        let n = rows.len();
        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if depth_capped || n < 2 * self.params.min_leaf || self.is_constant(&rows) {
            return self.leaf(&rows, nodes);
        }
        // Candidate columns are drawn even when the node turns into a leaf
        // further down; what matters is that the draw order is a pure
        // function of the tree's stream.
        let candidates = self.sample_columns(rng);
        let Some(best) = self.best_split(&rows, &candidates) else {
            return self.leaf(&rows, nodes);
        };
        let split_at = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 }); // placeholder, patched below
        let right_rows: Vec<usize> = rows
            .iter()
            .copied()
            .filter(|&r| (self.x)(r, best.column) > best.threshold)
            .collect();
        rows.retain(|&r| (self.x)(r, best.column) <= best.threshold);
        let left = self.grow_node(rows, depth + 1, rng, nodes);
        let right = self.grow_node(right_rows, depth + 1, rng, nodes);
        nodes[split_at] = Node::Split {
            column: best.column,
            threshold: best.threshold,
            left,
            right,
        };
        split_at
    }

    fn is_constant(&self, rows: &[usize]) -> bool {
        let first = self.y[rows[0]];
        rows.iter().all(|&r| self.y[r] == first)
    }

    /// `mtry` distinct columns by partial Fisher-Yates, returned sorted so the
    /// lowest-index column wins gain ties.
    fn sample_columns(&self, rng: &mut StreamRng) -> Vec<usize> {
        let p = self.n_cols;
        let m = self.params.mtry.min(p);
        if m == p {
            return (0..p).collect();
        }
        let mut pool: Vec<usize> = (0..p).collect();
        for i in 0..m {
            let j = i + rng.next_u64_below((p - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut chosen = pool[..m].to_vec();
        chosen.sort_unstable();
        chosen
    }

    fn best_split(&self, rows: &[usize], candidates: &[usize]) -> Option<BestSplit> {
        let n = rows.len();
        let min_leaf = self.params.min_leaf;
        let total: f64 = rows.iter().map(|&r| self.y[r]).sum();
        let mut best: Option<BestSplit> = None;
        let mut sorted = rows.to_vec();
        for &col in candidates {
            sorted.copy_from_slice(rows);
            sorted.sort_unstable_by(|&a, &b| (self.x)(a, col).total_cmp(&(self.x)(b, col)));
            let mut sum_left = 0.0;
            for i in 1..n {
                sum_left += self.y[sorted[i - 1]];
                let v_prev = (self.x)(sorted[i - 1], col);
                let v_next = (self.x)(sorted[i], col);
                if v_prev >= v_next || i < min_leaf || n - i < min_leaf {
                    continue;
                }
                // Maximizing sum_l^2/n_l + sum_r^2/n_r minimizes the summed
                // within-child squared error.
                let sum_right = total - sum_left;
                let gain = sum_left * sum_left / i as f64 + sum_right * sum_right / (n - i) as f64;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit {
                        column: col,
                        threshold: 0.5 * (v_prev + v_next),
                        gain,
                    });
                }
            }
        }
        best
    }
}
