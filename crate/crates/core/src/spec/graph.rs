//! Small directed-graph utilities over named nodes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Directed graph where an edge `(u, v)` means `u` must finish before `v`.
#[derive(Debug, Clone)]
pub struct Dag {
    names: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(names: Vec<String>, edges: &[(usize, usize)]) -> Self {
        let n = names.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(u, v) in edges {
            parents[v].push(u);
            children[u].push(v);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Self { names, parents, children }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.children.iter().enumerate().flat_map(|(u, cs)| cs.iter().map(move |&v| (u, v)))
    }

    /// Kahn's algorithm; among ready nodes the lexicographically smallest
    /// name goes first. On a cycle, returns one cycle as a name path whose
    /// first and last entries coincide.
    pub fn topological_order(&self) -> Result<Vec<usize>, Vec<String>> {
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<(&str, usize)>> = indegree
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == 0)
            .map(|(i, _)| Reverse((self.names[i].as_str(), i)))
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(Reverse((_, u))) = ready.pop() {
            order.push(u);
            for &v in &self.children[u] {
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    ready.push(Reverse((self.names[v].as_str(), v)));
                }
            }
        }
        if order.len() == self.len() {
            Ok(order)
        } else {
            Err(self.find_cycle().expect("Kahn's algorithm stalled, so a cycle exists"))
        }
    }

    /// Finds one cycle by depth-first search, visiting roots and children in
    /// lexicographic name order.
    pub fn find_cycle(&self) -> Option<Vec<String>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            OnStack,
            Done,
        }
        let mut by_name: Vec<usize> = (0..self.len()).collect();
        by_name.sort_by(|&a, &b| self.names[a].cmp(&self.names[b]));
        let sorted_children: Vec<Vec<usize>> = self
            .children
            .iter()
            .map(|cs| {
                let mut cs = cs.clone();
                cs.sort_by(|&a, &b| self.names[a].cmp(&self.names[b]));
                cs
            })
            .collect();

        let mut mark = vec![Mark::New; self.len()];
        for &root in &by_name {
            if mark[root] != Mark::New {
                continue;
            }
            // Explicit stack of (node, next child position).
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            mark[root] = Mark::OnStack;
            while let Some(&mut (u, ref mut pos)) = stack.last_mut() {
                if let Some(&v) = sorted_children[u].get(*pos) {
                    *pos += 1;
                    match mark[v] {
                        Mark::New => {
                            mark[v] = Mark::OnStack;
                            stack.push((v, 0));
                        }
                        Mark::OnStack => {
                            let start = stack.iter().position(|&(w, _)| w == v).unwrap();
                            let mut path: Vec<String> = stack[start..].iter().map(|&(w, _)| self.names[w].clone()).collect();
                            path.push(self.names[v].clone());
                            return Some(path);
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[u] = Mark::Done;
                    stack.pop();
                }
            }
        }
        None
    }

    /// All nodes from which `target` is reachable (excluding `target`).
    pub fn ancestors(&self, target: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![target];
        while let Some(u) = stack.pop() {
            for &p in &self.parents[u] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// All nodes reachable from `source` (excluding `source`).
    pub fn descendants(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![source];
        while let Some(u) = stack.pop() {
            for &c in &self.children[u] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        seen
    }

    /// Every simple path from `from` to `to`, in lexicographic DFS order.
    pub fn paths(&self, from: usize, to: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = vec![from];
        self.paths_rec(to, &mut path, &mut out);
        out
    }

    fn paths_rec(&self, to: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if u == to {
            out.push(path.clone());
            return;
        }
        let mut cs = self.children[u].clone();
        cs.sort_by(|&a, &b| self.names[a].cmp(&self.names[b]));
        for v in cs {
            if !path.contains(&v) {
                path.push(v);
                self.paths_rec(to, path, out);
                path.pop();
            }
        }
    }
}
