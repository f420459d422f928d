//! Exact Wasserstein-1 transport between finitely-supported measures on an
//! encoded tree.
//!
//! The production solver is the tree edge-cut identity: W1 equals the sum
//! over edges of edge length times the absolute net mass crossing the edge,
//! computed in one post-order pass. A successive-shortest-path min-cost
//! flow oracle stays in the crate permanently as an independent route for
//! small instances.

use crate::error::{Error, Result};
use crate::excursion::cast;
use crate::tree::{MetricTree, TreePoint};
use num_traits::Float;

/// Cap on `|mu| * |nu|` for the flow oracle.
pub const ORACLE_PAIR_CAP: usize = 10_000;

const MASS_TOL: f64 = 1e-12;

/// Finitely many `(grid index, mass)` atoms summing to one. Duplicate
/// indices are merged on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    atoms: Vec<(usize, T)>,
}

impl<T: Float> DiscreteMeasure<T> {
    /// Builds a measure from atoms that already sum to one (within 1e-12).
    pub fn new(mut atoms: Vec<(usize, T)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        for &(_, m) in &atoms {
            if !(m > T::zero()) {
                return Err(Error::NonpositiveMass(m.to_f64().unwrap_or(f64::NAN)));
            }
        }
        atoms.sort_unstable_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(atoms.len());
        for (i, m) in atoms {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc = *acc + m,
                _ => merged.push((i, m)),
            }
        }
        let total = merged.iter().fold(T::zero(), |acc, &(_, m)| acc + m);
        if (total - T::one()).abs() > cast(MASS_TOL) {
            return Err(Error::MassNotNormalized(total.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(DiscreteMeasure { atoms: merged })
    }

    /// Builds a measure from positive weights, normalizing their sum to one.
    pub fn from_weights(weights: Vec<(usize, T)>) -> Result<Self> {
        let total = weights.iter().fold(T::zero(), |acc, &(_, m)| acc + m);
        if !(total > T::zero()) {
            return Err(Error::NonpositiveMass(total.to_f64().unwrap_or(f64::NAN)));
        }
        Self::new(weights.into_iter().map(|(i, m)| (i, m / total)).collect())
    }

    pub fn point_mass(index: usize) -> Self {
        DiscreteMeasure {
            atoms: vec![(index, T::one())],
        }
    }

    pub fn atoms(&self) -> &[(usize, T)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().fold(T::zero(), |acc, &(_, m)| acc + m)
    }
}

/// Which route produced a transport cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    EdgeCut,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportResult<T> {
    pub cost: T,
    pub method: Method,
}

/// The uniform probability measure on the open ball of radius `delta`
/// around `x`: mass `1 / |ball|` on every ball index.
pub fn uniform_ball_measure<T: Float>(
    tree: &MetricTree<T>,
    x: &TreePoint<T>,
    delta: T,
) -> Result<DiscreteMeasure<T>> {
    let ball = tree.ball(x, delta)?;
    if ball.indices.is_empty() {
        return Err(Error::EmptyBall {
            radius: delta.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mass = T::one() / cast::<T>(ball.indices.len() as f64);
    DiscreteMeasure::new(ball.indices.into_iter().map(|i| (i, mass)).collect())
}

fn check_atoms<T: Float>(tree: &MetricTree<T>, m: &DiscreteMeasure<T>) -> Result<()> {
    let max = tree.n();
    for &(i, _) in m.atoms() {
        if i > max {
            return Err(Error::AtomOffGrid { index: i, max });
        }
    }
    Ok(())
}

/// Exact W1 on the tree metric via the edge-cut formula, O(nodes) per call.
pub fn w1_edge_cut<T: Float>(
    tree: &MetricTree<T>,
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
) -> Result<TransportResult<T>> {
    check_atoms(tree, mu)?;
    check_atoms(tree, nu)?;
    let mut net = vec![T::zero(); tree.node_count()];
    for &(i, m) in mu.atoms() {
        let v = tree.grid_node(i);
        net[v] = net[v] + m;
    }
    for &(i, m) in nu.atoms() {
        let v = tree.grid_node(i);
        net[v] = net[v] - m;
    }
    let cost = tree.edge_cut_cost(&mut net);
    Ok(TransportResult {
        cost,
        method: Method::EdgeCut,
    })
}

/// Exact W1 by successive-shortest-path min-cost flow on the complete
/// bipartite cost matrix of pairwise tree distances. Small instances only.
pub fn w1_oracle<T: Float>(
    tree: &MetricTree<T>,
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
) -> Result<TransportResult<T>> {
    check_atoms(tree, mu)?;
    check_atoms(tree, nu)?;
    let p = mu.atoms().len();
    let q = nu.atoms().len();
    if p * q > ORACLE_PAIR_CAP {
        return Err(Error::OracleTooLarge {
            size: p * q,
            cap: ORACLE_PAIR_CAP,
        });
    }

    let mut flow = MinCostFlow::new(p + q + 2);
    let source = 0usize;
    let sink = p + q + 1;
    for (i, &(_, m)) in mu.atoms().iter().enumerate() {
        flow.add_edge(source, 1 + i, m, T::zero());
    }
    for (j, &(_, m)) in nu.atoms().iter().enumerate() {
        flow.add_edge(1 + p + j, sink, m, T::zero());
    }
    for (i, &(a, _)) in mu.atoms().iter().enumerate() {
        for (j, &(b, _)) in nu.atoms().iter().enumerate() {
            let d = tree.grid_distance(a, b);
            flow.add_edge(1 + i, 1 + p + j, T::infinity(), d);
        }
    }
    let cost = flow.run(source, sink);
    Ok(TransportResult {
        cost,
        method: Method::Oracle,
    })
}

/// Kantorovich functional `mu(f) - nu(f)` for the 1-Lipschitz witness
/// `f_{x,y}`; a lower bound on `w1_edge_cut(mu, nu)` by duality.
pub fn kantorovich_gap<T: Float>(
    tree: &MetricTree<T>,
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    x: &TreePoint<T>,
    y: &TreePoint<T>,
) -> Result<T> {
    check_atoms(tree, mu)?;
    check_atoms(tree, nu)?;
    let mut gap = T::zero();
    for &(i, m) in mu.atoms() {
        gap = gap + m * tree.lipschitz_witness(x, y, &TreePoint::Grid(i))?;
    }
    for &(i, m) in nu.atoms() {
        gap = gap - m * tree.lipschitz_witness(x, y, &TreePoint::Grid(i))?;
    }
    Ok(gap)
}

struct Edge<T> {
    to: u32,
    cap: T,
    cost: T,
}

/// Successive shortest paths with Dijkstra over Johnson potentials. All arc
/// costs are tree distances, hence non-negative, so zero initial potentials
/// are valid. Capacities are real; every augmentation saturates a source or
/// sink arc, so at most `p + q` augmentations run.
struct MinCostFlow<T> {
    adj: Vec<Vec<u32>>,
    edges: Vec<Edge<T>>,
}

impl<T: Float> MinCostFlow<T> {
    fn new(nodes: usize) -> Self {
        MinCostFlow {
            adj: vec![Vec::new(); nodes],
            edges: Vec::new(),
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: T, cost: T) {
        let id = self.edges.len() as u32;
        self.edges.push(Edge {
            to: to as u32,
            cap,
            cost,
        });
        self.adj[from].push(id);
        self.edges.push(Edge {
            to: from as u32,
            cap: T::zero(),
            cost: -cost,
        });
        self.adj[to].push(id + 1);
    }

    fn run(&mut self, source: usize, sink: usize) -> T {
        let n = self.adj.len();
        let mut potential = vec![T::zero(); n];
        let mut total_cost = T::zero();
        let eps = cast::<T>(1e-15);
        loop {
            // Dijkstra on reduced costs, run to completion so every reached
            // node carries its final distance: potentials stay valid and no
            // finalized predecessor is ever rewritten.
            let mut dist = vec![T::infinity(); n];
            let mut prev: Vec<Option<u32>> = vec![None; n];
            let mut done = vec![false; n];
            dist[source] = T::zero();
            loop {
                let mut u = None;
                let mut best = T::infinity();
                for v in 0..n {
                    if !done[v] && dist[v] < best {
                        best = dist[v];
                        u = Some(v);
                    }
                }
                let Some(u) = u else { break };
                done[u] = true;
                for &eid in &self.adj[u] {
                    let e = &self.edges[eid as usize];
                    if e.cap <= eps {
                        continue;
                    }
                    let v = e.to as usize;
                    if done[v] {
                        continue;
                    }
                    let nd = dist[u] + e.cost + potential[u] - potential[v];
                    if nd < dist[v] {
                        dist[v] = nd;
                        prev[v] = Some(eid);
                    }
                }
            }
            if prev[sink].is_none() {
                break;
            }
            for v in 0..n {
                if dist[v] < T::infinity() {
                    potential[v] = potential[v] + dist[v];
                }
            }
            // Bottleneck and true cost along the path.
            let mut bottleneck = T::infinity();
            let mut path_cost = T::zero();
            let mut v = sink;
            while v != source {
                let eid = prev[v].unwrap() as usize;
                bottleneck = bottleneck.min(self.edges[eid].cap);
                path_cost = path_cost + self.edges[eid].cost;
                v = self.edges[eid ^ 1].to as usize;
            }
            let mut v = sink;
            while v != source {
                let eid = prev[v].unwrap() as usize;
                self.edges[eid].cap = self.edges[eid].cap - bottleneck;
                let back = eid ^ 1;
                self.edges[back].cap = self.edges[back].cap + bottleneck;
                v = self.edges[back].to as usize;
            }
            total_cost = total_cost + bottleneck * path_cost;
        }
        total_cost
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::excursion::{sample_excursion, Excursion, SamplerConfig};
    use crate::tree::MetricTree;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w_shape() -> MetricTree<f64> {
        MetricTree::encode(Excursion::from_values(vec![0.0, 1.0, 0.2, 1.0, 0.0], 1.0).unwrap())
    }

    #[test]
    fn point_masses_cost_the_distance() {
        let t = w_shape();
        let mu = DiscreteMeasure::point_mass(1);
        let nu = DiscreteMeasure::point_mass(3);
        let d = t.grid_distance(1, 3);
        let ec = w1_edge_cut(&t, &mu, &nu).unwrap();
        let or = w1_oracle(&t, &mu, &nu).unwrap();
        assert!((ec.cost - d).abs() < 1e-12);
        assert!((or.cost - d).abs() < 1e-12);
        assert_eq!(ec.method, Method::EdgeCut);
        assert_eq!(or.method, Method::Oracle);
    }

    #[test]
    fn identical_measures_cost_nothing() {
        let t = w_shape();
        let mu = DiscreteMeasure::from_weights(vec![(0, 1.0), (1, 2.0), (3, 1.0)]).unwrap();
        assert_eq!(w1_edge_cut(&t, &mu, &mu).unwrap().cost, 0.0);
        assert!(w1_oracle(&t, &mu, &mu).unwrap().cost.abs() < 1e-15);
    }

    #[test]
    fn split_mass_to_saddle() {
        // half mass at each peak, all moved to the saddle joining them
        let t = w_shape();
        let mu = DiscreteMeasure::new(vec![(1, 0.5), (3, 0.5)]).unwrap();
        let nu = DiscreteMeasure::point_mass(2);
        let want = 0.5 * t.grid_distance(1, 2) + 0.5 * t.grid_distance(3, 2);
        assert!((w1_edge_cut(&t, &mu, &nu).unwrap().cost - want).abs() < 1e-12);
        assert!((w1_oracle(&t, &mu, &nu).unwrap().cost - want).abs() < 1e-12);
    }

    #[test]
    fn duplicate_atoms_merge_and_wrap_index_shares_a_node() {
        let t = w_shape();
        let m = DiscreteMeasure::new(vec![(1, 0.25), (1, 0.25), (3, 0.5)]).unwrap();
        assert_eq!(m.atoms().len(), 2);
        // indices 0 and n are the same tree point: transport between them is free
        let mu = DiscreteMeasure::point_mass(0);
        let nu = DiscreteMeasure::point_mass(t.n());
        assert_eq!(w1_edge_cut(&t, &mu, &nu).unwrap().cost, 0.0);
    }

    #[test]
    fn oracle_equivalence_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for round in 0..40 {
            let cfg = SamplerConfig::new(256, 1000 + round, 0).unwrap();
            let t = MetricTree::encode(sample_excursion::<f64>(&cfg));
            let atoms = |rng: &mut ChaCha8Rng| {
                let k = rng.gen_range(1..=10);
                let w: Vec<(usize, f64)> = (0..k)
                    .map(|_| (rng.gen_range(0..=t.n()), rng.gen_range(0.1..1.0)))
                    .collect();
                DiscreteMeasure::from_weights(w).unwrap()
            };
            let mu = atoms(&mut rng);
            let nu = atoms(&mut rng);
            let a = w1_edge_cut(&t, &mu, &nu).unwrap().cost;
            let b = w1_oracle(&t, &mu, &nu).unwrap().cost;
            assert!(
                (a - b).abs() <= 1e-9,
                "round {round}: edge-cut {a} oracle {b}"
            );
            let c = w1_oracle(&t, &nu, &mu).unwrap().cost;
            assert!((b - c).abs() <= 1e-12, "oracle symmetry");
        }
    }

    #[test]
    fn kantorovich_gap_two_points_is_tight() {
        let t = w_shape();
        let (x, y) = (
            crate::tree::TreePoint::Grid(1),
            crate::tree::TreePoint::Grid(3),
        );
        let mu = DiscreteMeasure::point_mass(1);
        let nu = DiscreteMeasure::point_mass(3);
        let gap = kantorovich_gap(&t, &mu, &nu, &x, &y).unwrap();
        assert!((gap - t.grid_distance(1, 3)).abs() < 1e-12);
    }

    #[test]
    fn whole_tree_ball_measure_and_empty_ball() {
        let t = w_shape();
        // radius above the diameter: uniform atoms on all n + 1 indices
        let m = uniform_ball_measure(&t, &crate::tree::TreePoint::Grid(0), 10.0).unwrap();
        assert_eq!(m.atoms().len(), t.n() + 1);
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
        // a geodesic point farther than the radius from every grid atom
        let mid = crate::tree::TreePoint::Geodesic {
            a: 1,
            b: 3,
            offset: 0.4,
        };
        let err = uniform_ball_measure(&t, &mid, 1e-9);
        assert!(matches!(err, Err(Error::EmptyBall { .. })));
    }

    #[test]
    fn oracle_cap_enforced() {
        let t = w_shape();
        let all: Vec<(usize, f64)> = (0..=t.n()).map(|i| (i, 1.0)).collect();
        let mu = DiscreteMeasure::from_weights(all.clone()).unwrap();
        let nu = DiscreteMeasure::from_weights(all).unwrap();
        // 5 x 5 = 25 atoms is fine; the cap triggers only for big instances
        assert!(w1_oracle(&t, &mu, &nu).is_ok());
        let err = Error::OracleTooLarge { size: 1, cap: 1 };
        assert!(format!("{err}").contains("oracle"));
    }
}
