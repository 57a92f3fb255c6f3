//! CART trees over feature rows, used three ways: alone as a classifier
//! (Gini splits, leaf = positive fraction), bagged into a forest, and as
//! the regression stage inside gradient boosting (variance splits, leaf =
//! mean target). Split search scans sorted feature columns with prefix
//! sums, so choosing a split is O(n log n) per feature. All tiebreaks are
//! fixed (first feature, lowest threshold), making fits deterministic.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::MlError;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> TreeConfig {
        TreeConfig { max_depth: 6, min_samples_split: 2, min_samples_leaf: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitCriterion {
    /// Binary 0/1 targets; node impurity 2p(1-p).
    Gini,
    /// Arbitrary targets; node impurity is the variance.
    Variance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    n_features: usize,
}

struct FitContext<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    cfg: TreeConfig,
    criterion: SplitCriterion,
    /// Features considered per node; `None` means all of them.
    subsample: Option<(usize, &'a mut ChaCha8Rng)>,
    n_features: usize,
}

fn impurity(sum: f64, sum_sq: f64, n: f64, criterion: SplitCriterion) -> f64 {
    let mean = sum / n;
    match criterion {
        SplitCriterion::Gini => 2.0 * mean * (1.0 - mean),
        SplitCriterion::Variance => (sum_sq / n) - mean * mean,
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn find_split(ctx: &mut FitContext<'_>, rows: &[usize]) -> Option<BestSplit> {
    let n = rows.len() as f64;
    let features: Vec<usize> = match &mut ctx.subsample {
        None => (0..ctx.n_features).collect(),
        Some((m, rng)) => {
            // partial Fisher-Yates over the feature indices; sorted after
            // so the scan order stays deterministic for a given draw
            let mut pool: Vec<usize> = (0..ctx.n_features).collect();
            let m = (*m).clamp(1, ctx.n_features);
            for i in 0..m {
                let j = rng.random_range(i..pool.len());
                pool.swap(i, j);
            }
            pool.truncate(m);
            pool.sort_unstable();
            pool
        }
    };

    let total_sum: f64 = rows.iter().map(|&r| ctx.y[r]).sum();
    let total_sq: f64 = rows.iter().map(|&r| ctx.y[r] * ctx.y[r]).sum();
    let parent = impurity(total_sum, total_sq, n, ctx.criterion);
    if parent <= 1e-15 {
        return None;
    }

    let mut best: Option<BestSplit> = None;
    let mut order: Vec<usize> = Vec::with_capacity(rows.len());
    for feature in features {
        order.clear();
        order.extend_from_slice(rows);
        order.sort_by(|&a, &b| {
            ctx.x[a][feature]
                .partial_cmp(&ctx.x[b][feature])
                .expect("finite feature values")
                .then(a.cmp(&b))
        });

        let (mut lsum, mut lsq) = (0.0, 0.0);
        for i in 0..order.len() - 1 {
            let yv = ctx.y[order[i]];
            lsum += yv;
            lsq += yv * yv;
            let (va, vb) = (ctx.x[order[i]][feature], ctx.x[order[i + 1]][feature]);
            if va == vb {
                continue;
            }
            let left_n = (i + 1) as f64;
            let right_n = n - left_n;
            if (i + 1) < ctx.cfg.min_samples_leaf || (rows.len() - i - 1) < ctx.cfg.min_samples_leaf
            {
                continue;
            }
            // any valid candidate beats no split: a zero-gain cut (think
            // XOR's first level) can still unlock pure children below
            let score = left_n * impurity(lsum, lsq, left_n, ctx.criterion)
                + right_n * impurity(total_sum - lsum, total_sq - lsq, right_n, ctx.criterion);
            let improves = match &best {
                None => true,
                Some(b) => score < b.score - 1e-12,
            };
            if improves {
                best = Some(BestSplit { feature, threshold: (va + vb) / 2.0, score });
            }
        }
    }
    best
}

fn grow(ctx: &mut FitContext<'_>, rows: &[usize], depth: usize, nodes: &mut Vec<Node>) -> usize {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|&r| ctx.y[r]).sum::<f64>() / n;
    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf { value: mean });
        nodes.len() - 1
    };
    if depth >= ctx.cfg.max_depth || rows.len() < ctx.cfg.min_samples_split {
        return make_leaf(nodes);
    }
    let Some(split) = find_split(ctx, rows) else {
        return make_leaf(nodes);
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| ctx.x[r][split.feature] <= split.threshold);

    let id = nodes.len();
    nodes.push(Node::Leaf { value: mean }); // placeholder until children exist
    let left = grow(ctx, &left_rows, depth + 1, nodes);
    let right = grow(ctx, &right_rows, depth + 1, nodes);
    nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
    id
}

impl Tree {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[f64],
        cfg: TreeConfig,
        criterion: SplitCriterion,
        subsample: Option<(usize, &mut ChaCha8Rng)>,
    ) -> Result<Tree, MlError> {
        if x.is_empty() {
            return Err(MlError::Empty("tree training set"));
        }
        if x.len() != y.len() {
            return Err(MlError::BadInput(format!("{} rows against {} targets", x.len(), y.len())));
        }
        let n_features = x[0].len();
        if x.iter().any(|r| r.len() != n_features) {
            return Err(MlError::BadInput("ragged feature rows".into()));
        }
        let rows: Vec<usize> = (0..x.len()).collect();
        let mut ctx = FitContext { x, y, cfg, criterion, subsample, n_features };
        let mut nodes = Vec::new();
        let root = grow(&mut ctx, &rows, 0, &mut nodes);
        debug_assert_eq!(root, 0);
        Ok(Tree { nodes, n_features })
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Rebuilds a tree from its serialized node list, validating that
    /// child links form a proper in-bounds structure.
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize) -> Result<Tree, MlError> {
        if nodes.is_empty() {
            return Err(MlError::Empty("tree node list"));
        }
        for node in &nodes {
            if let Node::Split { feature, left, right, .. } = node {
                if *feature >= n_features || *left >= nodes.len() || *right >= nodes.len() {
                    return Err(MlError::BadInput("tree node links out of bounds".into()));
                }
            }
        }
        Ok(Tree { nodes, n_features })
    }
}
