//! Fill-reducing ordering by nested dissection with level-set separators.

use std::collections::VecDeque;

/// Pieces at or below this size are ordered breadth-first without further splitting.
const LEAF: usize = 64;
const DONE: usize = usize::MAX;
const VISITING: usize = usize::MAX - 1;

/// Symmetric adjacency lists (no self loops) from a square sparsity pattern.
pub fn adjacency(n: usize, indptr: &[usize], indices: &[usize]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for &j in &indices[indptr[i]..indptr[i + 1]] {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

/// Returns `perm` with `perm[k]` the original index eliminated at step `k`.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut d = Dissector {
        adj,
        part: vec![0; n],
        level: vec![0; n],
        next_part: 0,
        order: Vec::with_capacity(n),
    };
    d.dissect((0..n).collect(), 0);
    debug_assert_eq!(d.order.len(), n);
    d.order
}

struct Dissector<'a> {
    adj: &'a [Vec<usize>],
    /// Subset id of each vertex still to be ordered; `DONE` once placed.
    part: Vec<usize>,
    level: Vec<usize>,
    next_part: usize,
    order: Vec<usize>,
}

impl Dissector<'_> {
    fn fresh(&mut self) -> usize {
        self.next_part += 1;
        self.next_part
    }

    /// Breadth-first search inside subset `id`; records levels, returns visit order.
    fn bfs(&mut self, start: usize, id: usize) -> Vec<usize> {
        let mut seen = vec![start];
        self.level[start] = 0;
        self.part[start] = VISITING;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if self.part[w] == id {
                    self.part[w] = VISITING;
                    self.level[w] = self.level[v] + 1;
                    seen.push(w);
                    queue.push_back(w);
                }
            }
        }
        for &v in &seen {
            self.part[v] = id;
        }
        seen
    }

    fn place(&mut self, verts: &[usize]) {
        for &v in verts {
            self.part[v] = DONE;
        }
        self.order.extend_from_slice(verts);
    }

    fn dissect(&mut self, verts: Vec<usize>, id: usize) {
        for &v in &verts {
            if self.part[v] != id {
                continue;
            }
            let comp = self.bfs(v, id);
            let cid = self.fresh();
            for &w in &comp {
                self.part[w] = cid;
            }
            self.component(comp, cid);
        }
    }

    fn component(&mut self, comp: Vec<usize>, id: usize) {
        if comp.len() <= LEAF {
            self.place(&comp);
            return;
        }
        let mut start = comp[0];
        let mut layers = self.bfs(start, id);
        let mut depth = self.level[*layers.last().unwrap()];
        for _ in 0..4 {
            let cand = *layers.last().unwrap();
            let trial = self.bfs(cand, id);
            let d2 = self.level[*trial.last().unwrap()];
            if d2 <= depth {
                break;
            }
            start = cand;
            layers = trial;
            depth = d2;
        }
        // Levels must correspond to `layers` (the last BFS may have been a rejected trial).
        layers = self.bfs(start, id);
        if depth < 2 {
            self.place(&layers);
            return;
        }
        let mid = self.level[layers[layers.len() / 2]].clamp(1, depth - 1);
        let (a_id, b_id) = (self.fresh(), self.fresh());
        let (mut a, mut b, mut sep) = (Vec::new(), Vec::new(), Vec::new());
        for &v in &layers {
            match self.level[v].cmp(&mid) {
                std::cmp::Ordering::Less => a.push(v),
                std::cmp::Ordering::Greater => b.push(v),
                std::cmp::Ordering::Equal => sep.push(v),
            }
        }
        for &v in &a {
            self.part[v] = a_id;
        }
        for &v in &b {
            self.part[v] = b_id;
        }
        for &v in &sep {
            self.part[v] = DONE;
        }
        self.dissect(a, a_id);
        self.dissect(b, b_id);
        self.order.extend(sep);
    }
}
