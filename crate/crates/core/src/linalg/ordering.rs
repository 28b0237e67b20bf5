//! Fill-reducing orderings computed from the symmetrized sparsity graph.

use std::collections::VecDeque;

/// Elimination order used for the columns of the factorization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Ordering {
    Natural,
    ReverseCuthillMcKee,
    #[default]
    NestedDissection,
}

const LEAF_SIZE: usize = 48;

impl Ordering {
    /// Returns `perm` with `perm[k]` the original index eliminated at step `k`.
    pub fn compute(self, adj: &[Vec<usize>]) -> Vec<usize> {
        match self {
            Ordering::Natural => (0..adj.len()).collect(),
            Ordering::ReverseCuthillMcKee => reverse_cuthill_mckee(adj),
            Ordering::NestedDissection => nested_dissection(adj),
        }
    }
}

/// Breadth-first search restricted to nodes with `part[v] == id`.
struct Bfs {
    level: Vec<usize>,
    mark: Vec<u64>,
    stamp: u64,
    order: Vec<usize>,
}

impl Bfs {
    fn new(n: usize) -> Self {
        Self {
            level: vec![0; n],
            mark: vec![0; n],
            stamp: 0,
            order: Vec::new(),
        }
    }

    /// Fills `order` with the visited nodes and returns the last one.
    fn run(&mut self, adj: &[Vec<usize>], part: &[u32], id: u32, root: usize) -> usize {
        self.stamp += 1;
        self.order.clear();
        self.level[root] = 0;
        self.mark[root] = self.stamp;
        self.order.push(root);
        let mut head = 0;
        while head < self.order.len() {
            let v = self.order[head];
            head += 1;
            for &w in &adj[v] {
                if part[w] == id && self.mark[w] != self.stamp {
                    self.mark[w] = self.stamp;
                    self.level[w] = self.level[v] + 1;
                    self.order.push(w);
                }
            }
        }
        *self.order.last().unwrap()
    }
}

pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let part = vec![0u32; n];
    let mut bfs = Bfs::new(n);
    for start in 0..n {
        if visited[start] {
            continue;
        }
        // pseudo-peripheral root of this component
        let far = bfs.run(adj, &part, 0, start);
        let root = bfs.run(adj, &part, 0, far);
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            perm.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (adj[w].len(), w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    perm.reverse();
    perm
}

/// Level-structure nested dissection: split each connected piece at the
/// middle BFS level from a pseudo-peripheral node, order both halves
/// recursively and the separator last.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut part = vec![0u32; n];
    let mut next_id = 1u32;
    let mut bfs = Bfs::new(n);
    let mut perm = Vec::with_capacity(n);
    // work items: (nodes, id); output is assembled from a post-order
    enum Item {
        Split(Vec<usize>, u32),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Item::Split((0..n).collect(), 0)];
    while let Some(item) = stack.pop() {
        let (nodes, id) = match item {
            Item::Emit(v) => {
                perm.extend(v);
                continue;
            }
            Item::Split(nodes, id) => (nodes, id),
        };
        if nodes.len() <= LEAF_SIZE {
            perm.extend(nodes);
            continue;
        }
        // components
        let far = bfs.run(adj, &part, id, nodes[0]);
        if bfs.order.len() < nodes.len() {
            let comp_id = next_id;
            next_id += 1;
            let comp: Vec<usize> = bfs.order.clone();
            for &v in &comp {
                part[v] = comp_id;
            }
            let rest_id = next_id;
            next_id += 1;
            let rest: Vec<usize> = nodes.iter().copied().filter(|&v| part[v] == id).collect();
            for &v in &rest {
                part[v] = rest_id;
            }
            stack.push(Item::Split(rest, rest_id));
            stack.push(Item::Split(comp, comp_id));
            continue;
        }
        bfs.run(adj, &part, id, far);
        let level = &bfs.level;
        let max_level = bfs.order.iter().map(|&v| level[v]).max().unwrap();
        if max_level < 2 {
            perm.extend(nodes);
            continue;
        }
        // separator level: first level where the cumulative count passes half
        let mut counts = vec![0usize; max_level + 1];
        for &v in &bfs.order {
            counts[level[v]] += 1;
        }
        let half = nodes.len() / 2;
        let mut acc = 0;
        let mut sep_level = 1;
        for (l, &c) in counts.iter().enumerate() {
            acc += c;
            if acc >= half {
                sep_level = l.clamp(1, max_level - 1);
                break;
            }
        }
        let (a_id, b_id) = (next_id, next_id + 1);
        next_id += 2;
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut sep = Vec::new();
        for &v in &bfs.order {
            let l = level[v];
            if l < sep_level {
                part[v] = a_id;
                a.push(v);
            } else if l > sep_level {
                part[v] = b_id;
                b.push(v);
            } else {
                part[v] = u32::MAX;
                sep.push(v);
            }
        }
        a.sort_unstable();
        b.sort_unstable();
        sep.sort_unstable();
        stack.push(Item::Emit(sep));
        stack.push(Item::Split(b, b_id));
        stack.push(Item::Split(a, a_id));
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_graph(m: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); m * m];
        for i in 0..m {
            for j in 0..m {
                let v = i * m + j;
                if i + 1 < m {
                    adj[v].push(v + m);
                    adj[v + m].push(v);
                }
                if j + 1 < m {
                    adj[v].push(v + 1);
                    adj[v + 1].push(v);
                }
            }
        }
        adj
    }

    fn is_permutation(p: &[usize], n: usize) -> bool {
        let mut s = p.to_vec();
        s.sort_unstable();
        s == (0..n).collect::<Vec<_>>()
    }

    #[test]
    fn orderings_are_permutations() {
        let adj = grid_graph(30);
        for o in [
            Ordering::Natural,
            Ordering::ReverseCuthillMcKee,
            Ordering::NestedDissection,
        ] {
            assert!(is_permutation(&o.compute(&adj), 900), "{o:?}");
        }
        // disconnected pieces
        let mut adj = grid_graph(10);
        adj.extend(vec![Vec::new(); 70]);
        assert!(is_permutation(&nested_dissection(&adj), 170));
    }
}
