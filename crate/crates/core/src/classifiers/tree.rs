//! Decision trees over sparse rows.
//!
//! Absent sparse entries are zeros, so for every feature a node's samples
//! split into an implicit zero group plus the explicit non-zero entries.
//! Splits send `x[feature] <= threshold` to the left child.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::features::SparseVec;
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node<F, L> {
    Leaf(L),
    Split {
        feature: usize,
        threshold: F,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<F, L> {
    pub nodes: Vec<Node<F, L>>,
}

impl<F: Scalar, L> Tree<F, L> {
    pub fn leaf(&self, x: &SparseVec<F>) -> &L {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(l) => return l,
                Node::Split { feature, threshold, left, right } => {
                    let v = x.get(*feature).unwrap_or_else(F::zero);
                    i = if v <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<F, L>(nodes: &[Node<F, L>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

/// Classification tree; leaves hold a class index.
pub type ClassTree<F> = Tree<F, usize>;
/// Regression tree; leaves hold an additive score.
pub type RegressionTree<F> = Tree<F, F>;

fn midpoint<F: Scalar>(a: F, b: F) -> F {
    let m = a + (b - a) / F::lit(2.0);
    if m >= b {
        a
    } else {
        m
    }
}

// ---------------------------------------------------------------------------
// CART classification (Gini impurity)

#[derive(Debug, Clone)]
pub(crate) struct GiniParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: usize,
}

struct GiniSplit<F> {
    feature: usize,
    threshold: F,
    score: f64,
}

/// Class-weight histogram helper.
fn gini_score(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        0.0
    } else {
        counts.iter().map(|c| c * c).sum::<f64>() / total
    }
}

/// Best split of one feature. `entries` are the node's non-zero
/// `(value, sample)` pairs for this feature, sorted by value.
fn best_gini_threshold<F: Scalar>(
    entries: &[(F, usize)],
    y: &[usize],
    weight: &[u32],
    node_counts: &[f64],
    node_total: f64,
    zero_rows: usize,
) -> Option<(F, f64)> {
    let k = node_counts.len();
    let mut nz_counts = vec![0.0; k];
    for &(_, s) in entries {
        nz_counts[y[s]] += weight[s] as f64;
    }
    let zero_counts: Vec<f64> = node_counts.iter().zip(&nz_counts).map(|(a, b)| a - b).collect();
    let zero_total: f64 = zero_counts.iter().sum();

    let mut left = vec![0.0; k];
    let mut left_total = 0.0;
    let mut last: Option<F> = None;
    let mut best: Option<(F, f64)> = None;
    let mut zero_done = zero_rows == 0;

    let consider = |left: &[f64], left_total: f64, a: F, b: F, best: &mut Option<(F, f64)>| {
        let right: Vec<f64> = node_counts.iter().zip(left).map(|(n, l)| n - l).collect();
        let right_total = node_total - left_total;
        if left_total <= 0.0 || right_total <= 0.0 {
            return;
        }
        let score = gini_score(left, left_total) + gini_score(&right, right_total);
        if best.as_ref().is_none_or(|(_, s)| score > *s) {
            *best = Some((midpoint(a, b), score));
        }
    };

    for &(v, s) in entries {
        if !zero_done && v > F::zero() {
            if let Some(a) = last {
                consider(&left, left_total, a, F::zero(), &mut best);
            }
            for (l, z) in left.iter_mut().zip(&zero_counts) {
                *l += z;
            }
            left_total += zero_total;
            last = Some(F::zero());
            zero_done = true;
        }
        if let Some(a) = last {
            if v != a {
                consider(&left, left_total, a, v, &mut best);
            }
        }
        left[y[s]] += weight[s] as f64;
        left_total += weight[s] as f64;
        last = Some(v);
    }
    if !zero_done {
        if let Some(a) = last {
            consider(&left, left_total, a, F::zero(), &mut best);
        }
    }
    best
}

struct GiniGrower<'a, F> {
    rows: &'a [SparseVec<F>],
    y: &'a [usize],
    weight: &'a [u32],
    n_classes: usize,
    params: &'a GiniParams,
    pool: Vec<usize>,
    mark: Vec<u32>,
    stamp: u32,
}

impl<'a, F: Scalar> GiniGrower<'a, F> {
    /// Groups the node's non-zero entries by feature (restricted to marked
    /// features when `only_marked`), sorted by value within each feature.
    fn gather(&self, samples: &[usize], only_marked: bool) -> Vec<(usize, F, usize)> {
        let mut out = Vec::new();
        for &s in samples {
            for (f, v) in self.rows[s].iter() {
                if v != F::zero() && (!only_marked || self.mark[f] == self.stamp) {
                    out.push((f, v, s));
                }
            }
        }
        out.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
                .then(a.2.cmp(&b.2))
        });
        out
    }

    fn evaluate(
        &self,
        entries: &[(usize, F, usize)],
        samples: &[usize],
        counts: &[f64],
        total: f64,
        only: Option<usize>,
    ) -> Option<GiniSplit<F>> {
        let mut best: Option<GiniSplit<F>> = None;
        let mut start = 0;
        while start < entries.len() {
            let f = entries[start].0;
            let end = start + entries[start..].iter().take_while(|e| e.0 == f).count();
            if only.is_none_or(|o| o == f) {
                let group: Vec<(F, usize)> = entries[start..end].iter().map(|e| (e.1, e.2)).collect();
                let zero_rows = samples.len() - group.len();
                if let Some((threshold, score)) = best_gini_threshold(&group, self.y, self.weight, counts, total, zero_rows) {
                    if best.as_ref().is_none_or(|b| score > b.score) {
                        best = Some(GiniSplit { feature: f, threshold, score });
                    }
                }
            }
            start = end;
        }
        best
    }

    fn find_split(&mut self, samples: &[usize], counts: &[f64], total: f64, rng: &mut Rng) -> Option<GiniSplit<F>> {
        let dim = self.pool.len();
        let m = self.params.features_per_split.min(dim);
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|v| *v = 0);
            self.stamp = 1;
        }
        for i in 0..m {
            let j = rng.gen_range(i..dim);
            self.pool.swap(i, j);
            let f = self.pool[i];
            self.mark[f] = self.stamp;
        }
        let entries = self.gather(samples, true);
        if let Some(split) = self.evaluate(&entries, samples, counts, total, None) {
            return Some(split);
        }
        // None of the drawn features separates the node: keep drawing, which
        // amounts to picking a uniformly random non-constant feature.
        let entries = self.gather(samples, false);
        let mut candidates = Vec::new();
        let mut start = 0;
        while start < entries.len() {
            let f = entries[start].0;
            let end = start + entries[start..].iter().take_while(|e| e.0 == f).count();
            let non_constant = end - start < samples.len() || entries[start..end].iter().any(|e| e.1 != entries[start].1);
            if non_constant && self.mark[f] != self.stamp {
                candidates.push(f);
            }
            start = end;
        }
        if candidates.is_empty() {
            return None;
        }
        let f = candidates[rng.gen_range(0..candidates.len())];
        self.evaluate(&entries, samples, counts, total, Some(f))
    }
}

fn majority(counts: &[f64]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Grows a CART tree on the samples with non-zero `weight` (bootstrap
/// multiplicities), to purity or the configured limits.
pub(crate) fn grow_class_tree<F: Scalar>(
    rows: &[SparseVec<F>],
    y: &[usize],
    weight: &[u32],
    n_classes: usize,
    params: &GiniParams,
    rng: &mut Rng,
) -> ClassTree<F> {
    let dim = rows.first().map_or(0, |r| r.dim());
    let mut g = GiniGrower {
        rows,
        y,
        weight,
        n_classes,
        params,
        pool: (0..dim).collect(),
        mark: vec![0; dim],
        stamp: 0,
    };
    let root: Vec<usize> = (0..rows.len()).filter(|&i| weight[i] > 0).collect();
    let mut nodes: Vec<Node<F, usize>> = vec![Node::Leaf(0)];
    let mut stack = vec![(0usize, root, 0usize)];
    while let Some((id, samples, depth)) = stack.pop() {
        let mut counts = vec![0.0; g.n_classes];
        for &s in &samples {
            counts[y[s]] += weight[s] as f64;
        }
        let total: f64 = counts.iter().sum();
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        let depth_reached = params.max_depth.is_some_and(|d| depth >= d);
        let split = if pure || depth_reached || samples.len() < params.min_samples_split {
            None
        } else {
            g.find_split(&samples, &counts, total, rng)
        };
        match split {
            None => nodes[id] = Node::Leaf(majority(&counts)),
            Some(split) => {
                let (left, right): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&s| {
                    rows[s].get(split.feature).unwrap_or_else(F::zero) <= split.threshold
                });
                let l = nodes.len();
                nodes.push(Node::Leaf(0));
                nodes.push(Node::Leaf(0));
                nodes[id] = Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left: l,
                    right: l + 1,
                };
                stack.push((l + 1, right, depth + 1));
                stack.push((l, left, depth + 1));
            }
        }
    }
    Tree { nodes }
}

// ---------------------------------------------------------------------------
// Least-squares regression trees for gradient boosting

/// All non-zero training entries sorted by (feature, value, row). Built once
/// per boosting fit and shared by every tree.
pub struct ColumnIndex<F> {
    entries: Vec<(usize, F, usize)>,
}

impl<F: Scalar> ColumnIndex<F> {
    pub fn new(rows: &[SparseVec<F>]) -> Self {
        let mut entries: Vec<(usize, F, usize)> = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().filter(|(_, v)| *v != F::zero()).map(move |(f, v)| (f, v, r)))
            .collect();
        entries.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
                .then(a.2.cmp(&b.2))
        });
        ColumnIndex { entries }
    }
}

struct OpenNode<F> {
    id: usize,
    rows: Vec<usize>,
    sum: F,
    sum_sq: F,
}

struct Sweep<F> {
    nz_sum: F,
    nz_cnt: usize,
    left_sum: F,
    left_cnt: usize,
    last: Option<F>,
    zero_done: bool,
    best: Option<(F, usize, F)>, // (gain score, feature, threshold)
}

impl<F: Scalar> Sweep<F> {
    fn new() -> Self {
        Sweep {
            nz_sum: F::zero(),
            nz_cnt: 0,
            left_sum: F::zero(),
            left_cnt: 0,
            last: None,
            zero_done: false,
            best: None,
        }
    }

    fn reset_feature(&mut self) {
        self.nz_sum = F::zero();
        self.nz_cnt = 0;
        self.left_sum = F::zero();
        self.left_cnt = 0;
        self.last = None;
        self.zero_done = false;
    }

    fn consider(&mut self, node: &OpenNode<F>, feature: usize, a: F, b: F) {
        let n = node.rows.len();
        if self.left_cnt == 0 || self.left_cnt >= n {
            return;
        }
        let right_sum = node.sum - self.left_sum;
        let score = self.left_sum * self.left_sum / F::from_count(self.left_cnt)
            + right_sum * right_sum / F::from_count(n - self.left_cnt);
        if self.best.is_none_or(|(s, _, _)| score > s) {
            self.best = Some((score, feature, midpoint(a, b)));
        }
    }

    fn add_zero_group(&mut self, node: &OpenNode<F>, feature: usize) {
        let zero_cnt = node.rows.len() - self.nz_cnt;
        if zero_cnt > 0 {
            if let Some(a) = self.last {
                self.consider(node, feature, a, F::zero());
            }
            self.left_sum += node.sum - self.nz_sum;
            self.left_cnt += zero_cnt;
            self.last = Some(F::zero());
        }
        self.zero_done = true;
    }
}

/// Fits a depth-limited least-squares tree to `residual`. Leaf values are
/// `leaf_scale · Σ residual / Σ hessian` over the leaf's rows (0 when the
/// hessian sum vanishes).
pub(crate) fn grow_regression_tree<F: Scalar>(
    rows: &[SparseVec<F>],
    index: &ColumnIndex<F>,
    residual: &[F],
    hessian: &[F],
    max_depth: usize,
    leaf_scale: F,
) -> RegressionTree<F> {
    const NONE: usize = usize::MAX;
    let n = rows.len();
    let mut nodes: Vec<Node<F, F>> = vec![Node::Leaf(F::zero())];
    let leaf_value = |rs: &[usize]| {
        let g: F = rs.iter().map(|&r| residual[r]).sum();
        let h: F = rs.iter().map(|&r| hessian[r]).sum();
        if h > F::epsilon() {
            leaf_scale * g / h
        } else {
            F::zero()
        }
    };
    let open_node = |id: usize, rs: Vec<usize>| {
        let sum = rs.iter().map(|&r| residual[r]).sum();
        let sum_sq = rs.iter().map(|&r| residual[r] * residual[r]).sum();
        OpenNode { id, rows: rs, sum, sum_sq }
    };
    let mut level = vec![open_node(0, (0..n).collect())];
    let mut slot = vec![NONE; n];
    let tol = F::epsilon() * F::lit(1e4);

    for _depth in 0..max_depth {
        if level.is_empty() {
            break;
        }
        slot.iter_mut().for_each(|s| *s = NONE);
        for (j, node) in level.iter().enumerate() {
            for &r in &node.rows {
                slot[r] = j;
            }
        }
        let mut sweeps: Vec<Sweep<F>> = level.iter().map(|_| Sweep::new()).collect();
        let entries = &index.entries;
        let mut start = 0;
        while start < entries.len() {
            let f = entries[start].0;
            let end = start + entries[start..].iter().take_while(|e| e.0 == f).count();
            let block = &entries[start..end];
            sweeps.iter_mut().for_each(Sweep::reset_feature);
            for &(_, _, r) in block {
                let j = slot[r];
                if j != NONE {
                    sweeps[j].nz_sum += residual[r];
                    sweeps[j].nz_cnt += 1;
                }
            }
            for &(_, v, r) in block {
                let j = slot[r];
                if j == NONE {
                    continue;
                }
                let (sw, node) = (&mut sweeps[j], &level[j]);
                if !sw.zero_done && v > F::zero() {
                    sw.add_zero_group(node, f);
                }
                if let Some(a) = sw.last {
                    if v != a {
                        sw.consider(node, f, a, v);
                    }
                }
                sw.left_sum += residual[r];
                sw.left_cnt += 1;
                sw.last = Some(v);
            }
            for (sw, node) in sweeps.iter_mut().zip(&level) {
                if sw.nz_cnt > 0 && !sw.zero_done {
                    sw.add_zero_group(node, f);
                }
            }
            start = end;
        }

        let mut next = Vec::new();
        for (node, sw) in level.into_iter().zip(sweeps) {
            let base = node.sum * node.sum / F::from_count(node.rows.len());
            let split = sw.best.filter(|(score, _, _)| *score - base > tol * node.sum_sq.max(F::min_positive_value()));
            match split {
                Some((_, feature, threshold)) => {
                    let (l, r): (Vec<usize>, Vec<usize>) = node
                        .rows
                        .iter()
                        .partition(|&&row| rows[row].get(feature).unwrap_or_else(F::zero) <= threshold);
                    let li = nodes.len();
                    nodes.push(Node::Leaf(F::zero()));
                    nodes.push(Node::Leaf(F::zero()));
                    nodes[node.id] = Node::Split { feature, threshold, left: li, right: li + 1 };
                    next.push(open_node(li, l));
                    next.push(open_node(li + 1, r));
                }
                None => nodes[node.id] = Node::Leaf(leaf_value(&node.rows)),
            }
        }
        level = next;
    }
    for node in level {
        nodes[node.id] = Node::Leaf(leaf_value(&node.rows));
    }
    Tree { nodes }
}
