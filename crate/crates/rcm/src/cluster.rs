//! Connected components of positive-conductance edges.
//!
//! Percolation experiments work on the largest or crossing component as the
//! finite-volume stand-in for the infinite cluster; vertices with pi = 0 stay
//! unlabeled.

use crate::env::Environment;
use crate::error::{RcmError, Result};
use std::collections::HashMap;

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]]; // path halving
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Per-vertex component ids. A label is the smallest vertex index of its
/// component; vertices with no positive incident edge carry `None`.
#[derive(Debug, Clone)]
pub struct ClusterLabeling {
    pub label: Vec<Option<usize>>,
    /// component label -> size
    pub sizes: HashMap<usize, usize>,
    pub largest: Option<usize>,
    /// label of a component touching both faces in direction 0, if any
    /// (meaningful on non-periodic boxes only)
    pub crossing: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterPolicy {
    Largest,
    Crossing,
    Containing(usize),
}

pub fn label_clusters(env: &Environment) -> ClusterLabeling {
    let dom = env.domain();
    let n = dom.num_vertices();
    let mut uf = UnionFind::new(n);
    for (e, &w) in env.edge_values().iter().enumerate() {
        if w > 0.0 {
            let (v, u, _) = dom.edge_endpoints(e);
            uf.union(v, u);
        }
    }
    // canonical label: smallest vertex index per component
    let mut canon: HashMap<usize, usize> = HashMap::new();
    let mut label = vec![None; n];
    for v in 0..n {
        if env.pi(v) <= 0.0 {
            continue;
        }
        let root = uf.find(v);
        let lab = *canon.entry(root).or_insert(v); // first visit is the minimum
        label[v] = Some(lab);
    }
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for lab in label.iter().flatten() {
        *sizes.entry(*lab).or_insert(0) += 1;
    }
    let largest = sizes
        .iter()
        .max_by_key(|&(lab, sz)| (*sz, std::cmp::Reverse(*lab)))
        .map(|(lab, _)| *lab);

    let crossing = if dom.is_periodic() {
        None
    } else {
        let side0 = dom.sides()[0] as i64;
        let mut lo: Vec<usize> = Vec::new();
        let mut hi: Vec<usize> = Vec::new();
        for v in 0..n {
            if let Some(lab) = label[v] {
                let c0 = dom.to_coords(v)[0];
                if c0 == 0 {
                    lo.push(lab);
                }
                if c0 == side0 - 1 {
                    hi.push(lab);
                }
            }
        }
        lo.sort_unstable();
        lo.dedup();
        hi.sort_unstable();
        hi.dedup();
        let mut best: Option<usize> = None;
        for lab in &lo {
            if hi.binary_search(lab).is_ok() {
                let sz = sizes[lab];
                if best.map_or(true, |b| sz > sizes[&b]) {
                    best = Some(*lab);
                }
            }
        }
        best
    };

    ClusterLabeling {
        label,
        sizes,
        largest,
        crossing,
    }
}

/// Vertex set of the selected component, sorted ascending.
pub fn working_cluster(labeling: &ClusterLabeling, policy: ClusterPolicy) -> Result<Vec<usize>> {
    let target = match policy {
        ClusterPolicy::Largest => labeling
            .largest
            .ok_or_else(|| RcmError::Selection("no labeled component".into()))?,
        ClusterPolicy::Crossing => labeling
            .crossing
            .ok_or_else(|| RcmError::Selection("no crossing component".into()))?,
        ClusterPolicy::Containing(v) => labeling
            .label
            .get(v)
            .copied()
            .flatten()
            .ok_or_else(|| RcmError::Selection(format!("vertex {v} is unlabeled")))?,
    };
    Ok(labeling
        .label
        .iter()
        .enumerate()
        .filter_map(|(v, &lab)| (lab == Some(target)).then_some(v))
        .collect())
}

/// Labeling as vertex -> component id JSON.
pub fn labeling_to_json(labeling: &ClusterLabeling) -> String {
    let map: HashMap<String, Option<usize>> = labeling
        .label
        .iter()
        .enumerate()
        .map(|(v, lab)| (v.to_string(), *lab))
        .collect();
    serde_json::to_string(&map).expect("labeling json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BoundaryMode, LatticeDomain};
    use crate::env::{build_environment, Environment, EnvironmentLaw};

    /// breadth-first components, the oracle for union-find
    fn bfs_components(env: &Environment) -> Vec<Option<usize>> {
        let dom = env.domain();
        let n = dom.num_vertices();
        let mut label = vec![None; n];
        for start in 0..n {
            if label[start].is_some() || env.pi(start) <= 0.0 {
                continue;
            }
            let mut queue = std::collections::VecDeque::from([start]);
            label[start] = Some(start);
            while let Some(v) = queue.pop_front() {
                for (w, _) in env.weighted_neighbors(v) {
                    if label[w].is_none() {
                        label[w] = Some(start);
                        queue.push_back(w);
                    }
                }
            }
        }
        label
    }

    #[test]
    fn all_ones_single_component() {
        let dom = LatticeDomain::torus(vec![4, 4]).unwrap();
        let env = build_environment(&EnvironmentLaw::Constant { value: 1.0 }, &dom, 0).unwrap();
        let lab = label_clusters(&env);
        assert_eq!(lab.sizes.len(), 1);
        assert_eq!(lab.sizes[&0], 16);
        assert_eq!(working_cluster(&lab, ClusterPolicy::Largest).unwrap().len(), 16);
    }

    #[test]
    fn all_zeros_unlabeled() {
        let dom = LatticeDomain::torus(vec![3, 3]).unwrap();
        let env = build_environment(&EnvironmentLaw::Constant { value: 0.0 }, &dom, 0).unwrap();
        let lab = label_clusters(&env);
        assert!(lab.label.iter().all(|l| l.is_none()));
        assert!(working_cluster(&lab, ClusterPolicy::Largest).is_err());
    }

    #[test]
    fn handcrafted_two_components_match_bfs() {
        // 3x3 free box, two horizontal segments
        let dom = LatticeDomain::new(vec![3, 3], BoundaryMode::Free).unwrap();
        let mut cond = vec![0.0; dom.num_edges()];
        let a = dom.from_coords(&[0, 0]);
        let b = dom.from_coords(&[0, 1]);
        let c = dom.from_coords(&[2, 1]);
        cond[dom.edge_index(a, 1).unwrap()] = 1.0; // (0,0)-(0,1)
        cond[dom.edge_index(b, 1).unwrap()] = 1.0; // (0,1)-(0,2)
        cond[dom.edge_index(c, 1).unwrap()] = 2.0; // (2,1)-(2,2)
        let env = Environment::from_edge_values(dom, cond).unwrap();
        let lab = label_clusters(&env);
        assert_eq!(lab.label, bfs_components(&env));
        assert_eq!(lab.sizes.len(), 2);
        let sizes: Vec<usize> = {
            let mut s: Vec<usize> = lab.sizes.values().copied().collect();
            s.sort_unstable();
            s
        };
        assert_eq!(sizes, vec![2, 3]);
    }

    #[test]
    fn union_find_equals_bfs_on_percolation_samples() {
        for seed in 0..5 {
            let dom = LatticeDomain::new(vec![12, 12], BoundaryMode::Free).unwrap();
            let env =
                build_environment(&EnvironmentLaw::Percolation { p: 0.45 }, &dom, seed).unwrap();
            let lab = label_clusters(&env);
            assert_eq!(lab.label, bfs_components(&env));
            let total: usize = lab.sizes.values().sum();
            let labeled = lab.label.iter().filter(|l| l.is_some()).count();
            assert_eq!(total, labeled);
        }
    }

    /// components counted with isolated (pi = 0) vertices as singletons
    fn component_count(env: &Environment) -> usize {
        let lab = label_clusters(env);
        let unlabeled = lab.label.iter().filter(|l| l.is_none()).count();
        lab.sizes.len() + unlabeled
    }

    #[test]
    fn adding_edge_never_increases_component_count() {
        let dom = LatticeDomain::new(vec![6, 6], BoundaryMode::Free).unwrap();
        let env = build_environment(&EnvironmentLaw::Percolation { p: 0.4 }, &dom, 3).unwrap();
        let before = component_count(&env);
        let mut cond = env.edge_values().to_vec();
        for e in 0..cond.len() {
            if cond[e] == 0.0 {
                cond[e] = 1.0;
                let bumped = Environment::from_edge_values(dom.clone(), cond.clone()).unwrap();
                assert!(component_count(&bumped) <= before);
                cond[e] = 0.0;
            }
        }
    }

    #[test]
    fn supercritical_sample_density_against_bfs() {
        // 50x50 at p = 0.65: the largest-component fraction is close to the
        // supercritical cluster density, and the BFS count agrees exactly
        let dom = LatticeDomain::new(vec![50, 50], BoundaryMode::Free).unwrap();
        let env = build_environment(&EnvironmentLaw::Percolation { p: 0.65 }, &dom, 13).unwrap();
        let lab = label_clusters(&env);
        let largest_label = lab.largest.unwrap();
        let uf_count = lab.sizes[&largest_label];
        // BFS oracle on the same sample
        let bfs = bfs_components(&env);
        let bfs_count = bfs.iter().filter(|&&l| l == Some(largest_label)).count();
        assert_eq!(uf_count, bfs_count);
        let fraction = uf_count as f64 / dom.num_vertices() as f64;
        assert!(
            (0.85..1.0).contains(&fraction),
            "largest-component fraction {fraction}"
        );
    }

    #[test]
    fn crossing_cluster_selection() {
        let dom = LatticeDomain::new(vec![5, 5], BoundaryMode::Free).unwrap();
        // a single horizontal line crossing in direction 0
        let mut cond = vec![0.0; dom.num_edges()];
        for x in 0..4 {
            let v = dom.from_coords(&[x, 2]);
            cond[dom.edge_index(v, 0).unwrap()] = 1.0;
        }
        let env = Environment::from_edge_values(dom, cond).unwrap();
        let lab = label_clusters(&env);
        assert!(lab.crossing.is_some());
        let cluster = working_cluster(&lab, ClusterPolicy::Crossing).unwrap();
        assert_eq!(cluster.len(), 5);
        assert!(working_cluster(&lab, ClusterPolicy::Containing(0)).is_err());
    }
}
