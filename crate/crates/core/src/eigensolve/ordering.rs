//! Fill-reducing orderings for sparse factorization.
//!
//! Nested dissection on the adjacency graph: a breadth-first level structure
//! from a pseudo-peripheral vertex is cut at its median level, the level set
//! becomes the separator, and both sides are ordered recursively before it.

use std::collections::VecDeque;

use crate::sparse::SparseSymMatrix;

const LEAF_SIZE: usize = 48;

/// `perm[new] = old`, `inverse[old] = new`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ordering {
    pub perm: Vec<usize>,
    pub inverse: Vec<usize>,
}

impl Ordering {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect(), inverse: (0..n).collect() }
    }

    pub fn from_perm(perm: Vec<usize>) -> Self {
        let mut inverse = vec![usize::MAX; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        debug_assert!(inverse.iter().all(|&v| v != usize::MAX));
        Self { perm, inverse }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }
}

struct Graph<'a> {
    a: &'a SparseSymMatrix,
}

impl Graph<'_> {
    fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let r = self.a.row_ptr()[v]..self.a.row_ptr()[v + 1];
        self.a.col_idx()[r].iter().copied().filter(move |&u| u != v)
    }
}

pub fn nested_dissection(a: &SparseSymMatrix) -> Ordering {
    let n = a.dim();
    let g = Graph { a };
    // `part[v]` labels the subgraph currently containing `v`; vertices already
    // ordered are labelled usize::MAX.
    let mut part = vec![0usize; n];
    let mut level = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut next_label = 1usize;
    // Stack of (label, vertices, separator-to-emit-after).
    enum Task {
        Split(usize, Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Task::Split(0, (0..n).collect())];
    while let Some(task) = stack.pop() {
        let (label, verts) = match task {
            Task::Emit(sep) => {
                for &v in &sep {
                    part[v] = usize::MAX;
                }
                order.extend(sep);
                continue;
            }
            Task::Split(l, v) => (l, v),
        };
        if verts.len() <= LEAF_SIZE {
            for &v in &verts {
                part[v] = usize::MAX;
            }
            order.extend(verts);
            continue;
        }
        let start = pseudo_peripheral(&g, verts[0], label, &part, &mut level);
        let levels = bfs_levels(&g, start, label, &part, &mut level);
        let reached: usize = levels.iter().map(Vec::len).sum();
        if reached < verts.len() {
            // Disconnected: peel off the reached component and handle the rest separately.
            let (comp, rest): (Vec<usize>, Vec<usize>) = verts.iter().partition(|&&v| level[v] != usize::MAX);
            for &v in &verts {
                level[v] = usize::MAX;
            }
            let (la, lb) = (next_label, next_label + 1);
            next_label += 2;
            for &v in &comp {
                part[v] = la;
            }
            for &v in &rest {
                part[v] = lb;
            }
            stack.push(Task::Split(lb, rest));
            stack.push(Task::Split(la, comp));
            continue;
        }
        for &v in &verts {
            level[v] = usize::MAX;
        }
        if levels.len() < 3 {
            for &v in &verts {
                part[v] = usize::MAX;
            }
            order.extend(verts);
            continue;
        }
        let half = verts.len() / 2;
        let mut acc = 0;
        let mut cut = 1;
        for (i, l) in levels.iter().enumerate() {
            acc += l.len();
            if acc >= half {
                cut = i.clamp(1, levels.len() - 2);
                break;
            }
        }
        let (la, lb) = (next_label, next_label + 1);
        next_label += 2;
        let lower: Vec<usize> = levels[..cut].concat();
        let upper: Vec<usize> = levels[cut + 1..].concat();
        let sep = levels[cut].clone();
        for &v in &lower {
            part[v] = la;
        }
        for &v in &upper {
            part[v] = lb;
        }
        for &v in &sep {
            part[v] = usize::MAX - 1;
        }
        stack.push(Task::Emit(sep));
        stack.push(Task::Split(lb, upper));
        stack.push(Task::Split(la, lower));
    }
    Ordering::from_perm(order)
}

fn bfs_levels(g: &Graph, start: usize, label: usize, part: &[usize], level: &mut [usize]) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![start]];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let lv = level[v];
        for u in g.neighbors(v) {
            if part[u] == label && level[u] == usize::MAX {
                level[u] = lv + 1;
                if levels.len() <= lv + 1 {
                    levels.push(Vec::new());
                }
                levels[lv + 1].push(u);
                queue.push_back(u);
            }
        }
    }
    levels
}

fn pseudo_peripheral(g: &Graph, mut start: usize, label: usize, part: &[usize], level: &mut [usize]) -> usize {
    let mut depth = 0;
    for _ in 0..8 {
        let levels = bfs_levels(g, start, label, part, level);
        for l in &levels {
            for &v in l {
                level[v] = usize::MAX;
            }
        }
        let last = levels.last().expect("start vertex is always reached");
        if levels.len() <= depth {
            break;
        }
        depth = levels.len();
        let min_deg = last
            .iter()
            .copied()
            .min_by_key(|&v| g.neighbors(v).filter(|&u| part[u] == label).count())
            .expect("levels are non-empty");
        start = min_deg;
    }
    start
}
