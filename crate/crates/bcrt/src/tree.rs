//! Metric trees encoded by excursions: O(1) distance queries, geodesic and
//! meet arithmetic, balls and their ancestry/offspring decomposition.
//!
//! The tree of an excursion `E` is the Kolmogorov quotient of grid times
//! under the pseudometric `rho(s, t) = E(s) + E(t) - 2 min E[s, t]`. Range
//! minima are taken over the refined path (grid vertices plus per-cell
//! minima), so the quotient is a genuine finite real tree and every identity
//! below holds pointwise up to rounding.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::excursion::{cast, Excursion};
use crate::rmq::SparseTable;
use num_traits::Float;

/// Absolute tolerance for geodesic membership and additivity tests.
pub const GEO_TOL: f64 = 1e-9;

/// A point of the encoded tree: either the image of a grid vertex, or the
/// unique point of the geodesic `[[a, b]]` at a prescribed distance from
/// `a` (synthesized, never snapped to the grid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreePoint<T> {
    Grid(usize),
    Geodesic { a: usize, b: usize, offset: T },
}

impl<T: Float> TreePoint<T> {
    fn push_anchors(&self, out: &mut Vec<usize>) {
        match self {
            TreePoint::Grid(i) => out.push(*i),
            TreePoint::Geodesic { a, b, .. } => {
                out.push(*a);
                out.push(*b);
            }
        }
    }
}

/// An open metric ball: the grid indices strictly inside, plus the volume
/// under the normalized Lebesgue pushforward (indices `0..n` carry mass
/// `1/n` each; index `n` is the same tree point as index `0` and carries
/// none).
#[derive(Debug, Clone)]
pub struct Ball<T> {
    pub indices: Vec<usize>,
    pub volume: T,
}

/// Partition of a ball around `x` by the component of the tree minus `x`
/// containing the reference point `y`: `ancestry` lies toward `y`,
/// `offspring` is everything else (including the center itself). Volumes
/// follow the same mass convention as [`Ball`].
#[derive(Debug, Clone)]
pub struct BallSplit<T> {
    pub ancestry: Vec<usize>,
    pub offspring: Vec<usize>,
    pub ancestry_volume: T,
    pub offspring_volume: T,
}

#[derive(Debug, Clone)]
struct Node<T> {
    parent: u32,
    edge_len: T,
    height: T,
}

const NO_PARENT: u32 = u32::MAX;

/// Excursion plus query structures: a sparse-table RMQ over the refined
/// path for O(1) pairwise distances, and an explicit edge tree (grid leaves
/// plus interval-minimum branch nodes) built by a single stack pass, used by
/// the edge-cut Wasserstein formula.
#[derive(Debug, Clone)]
pub struct MetricTree<T> {
    excursion: Excursion<T>,
    rmq: SparseTable<T>,
    nodes: Vec<Node<T>>,
    grid_node: Vec<u32>,
    topo: Vec<u32>,
}

impl<T: Float> MetricTree<T> {
    /// Encodes an excursion as a metric tree.
    pub fn encode(excursion: Excursion<T>) -> Self {
        let path = excursion.refined_path();
        let rmq = SparseTable::new(&path);
        let n = excursion.n();

        let mut nodes: Vec<Node<T>> = Vec::with_capacity(path.len() + path.len() / 2);
        let mut grid_node = vec![0u32; n + 1];
        nodes.push(Node {
            parent: NO_PARENT,
            edge_len: T::zero(),
            height: T::zero(),
        });
        let mut stack: Vec<(T, u32)> = vec![(T::zero(), 0)];

        for k in 1..path.len() {
            let h = path[k];
            let h_prev = path[k - 1];
            let current = if h > h_prev {
                let id = nodes.len() as u32;
                let &(_, top) = stack.last().unwrap();
                nodes.push(Node {
                    parent: top,
                    edge_len: h - h_prev,
                    height: h,
                });
                stack.push((h, id));
                id
            } else if h == h_prev {
                stack.last().unwrap().1
            } else {
                let mut last_popped = None;
                while stack.last().unwrap().0 > h {
                    last_popped = Some(stack.pop().unwrap());
                }
                let &(top_h, top_id) = stack.last().unwrap();
                if top_h == h {
                    top_id
                } else {
                    // Splice a branch node into the edge between the stack
                    // top and the just-popped child.
                    let id = nodes.len() as u32;
                    nodes.push(Node {
                        parent: top_id,
                        edge_len: h - top_h,
                        height: h,
                    });
                    let (child_h, child_id) = last_popped.expect("down-move pops at least one");
                    nodes[child_id as usize].parent = id;
                    nodes[child_id as usize].edge_len = child_h - h;
                    stack.push((h, id));
                    id
                }
            };
            if k % 2 == 0 {
                grid_node[k / 2] = current;
            }
        }

        // Children before parents: parent heights are strictly smaller, so
        // descending height is a valid evaluation order for subtree sums.
        let mut topo: Vec<u32> = (0..nodes.len() as u32).collect();
        topo.sort_by(|&a, &b| {
            nodes[b as usize]
                .height
                .partial_cmp(&nodes[a as usize].height)
                .expect("finite heights")
        });

        MetricTree {
            excursion,
            rmq,
            nodes,
            grid_node,
            topo,
        }
    }

    pub fn excursion(&self) -> &Excursion<T> {
        &self.excursion
    }

    /// Number of grid cells of the underlying excursion.
    pub fn n(&self) -> usize {
        self.excursion.n()
    }

    pub fn root(&self) -> TreePoint<T> {
        TreePoint::Grid(0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_edge_length(&self) -> T {
        self.nodes.iter().fold(T::zero(), |acc, v| acc + v.edge_len)
    }

    /// Node carrying grid vertex `i` in the edge tree.
    pub fn grid_node(&self, i: usize) -> usize {
        self.grid_node[i] as usize
    }

    /// Pairwise distance between grid vertices:
    /// `values[i] + values[j] - 2 min` over the refined path between them.
    #[inline]
    pub fn grid_distance(&self, i: usize, j: usize) -> T {
        if i == j {
            return T::zero();
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let vals = self.excursion.values();
        let m = self.rmq.min(2 * lo, 2 * hi);
        let two = cast::<T>(2.0);
        (vals[i] + vals[j] - two * m).max(T::zero())
    }

    #[inline]
    fn point_to_grid(&self, p: &TreePoint<T>, i: usize) -> T {
        match *p {
            TreePoint::Grid(a) => self.grid_distance(a, i),
            TreePoint::Geodesic { a, b, offset } => {
                let dab = self.grid_distance(a, b);
                let dai = self.grid_distance(a, i);
                let dbi = self.grid_distance(b, i);
                let two = cast::<T>(2.0);
                let m = (dai + dab - dbi) / two;
                ((offset - m).abs() + dai - m).max(T::zero())
            }
        }
    }

    /// Tree distance between two points (grid or synthesized geodesic).
    pub fn distance(&self, p: &TreePoint<T>, q: &TreePoint<T>) -> T {
        match *q {
            TreePoint::Grid(j) => self.point_to_grid(p, j),
            TreePoint::Geodesic { a, b, offset } => {
                let dab = self.grid_distance(a, b);
                let da = self.point_to_grid(p, a);
                let db = self.point_to_grid(p, b);
                let two = cast::<T>(2.0);
                let m = (da + dab - db) / two;
                ((offset - m).abs() + da - m).max(T::zero())
            }
        }
    }

    /// True iff `z` lies on the geodesic `[[x, y]]` within [`GEO_TOL`].
    pub fn on_geodesic(&self, x: &TreePoint<T>, y: &TreePoint<T>, z: &TreePoint<T>) -> bool {
        let slack = self.distance(x, z) + self.distance(z, y) - self.distance(x, y);
        slack.abs() <= cast(GEO_TOL)
    }

    /// The meet `Lambda(x y z)`: the unique point where the three geodesics
    /// of the triangle branch, realized on `[[x, y]]` at distance
    /// `(rho(x,y) + rho(x,z) - rho(y,z)) / 2` from `x`.
    pub fn meet(&self, x: &TreePoint<T>, y: &TreePoint<T>, z: &TreePoint<T>) -> TreePoint<T> {
        let dxy = self.distance(x, y);
        if dxy == T::zero() {
            return *x;
        }
        let dxz = self.distance(x, z);
        let dyz = self.distance(y, z);
        let two = cast::<T>(2.0);
        let m = ((dxy + dxz - dyz) / two).max(T::zero()).min(dxy);
        self.point_on_geodesic_at(x, y, m)
            .expect("meet offset lies within the geodesic by construction")
    }

    /// The unique point of `[[x, y]]` at distance `d` from `x`.
    pub fn point_on_geodesic_at(
        &self,
        x: &TreePoint<T>,
        y: &TreePoint<T>,
        d: T,
    ) -> Result<TreePoint<T>> {
        let ell = self.distance(x, y);
        let slack = cast::<T>(1e-12);
        if d < -slack || d > ell + slack {
            return Err(Error::OffsetOutOfRange {
                offset: d.to_f64().unwrap_or(f64::NAN),
                length: ell.to_f64().unwrap_or(f64::NAN),
            });
        }
        let d = d.max(T::zero()).min(ell);
        if ell == T::zero() {
            return Ok(*x);
        }
        if let (TreePoint::Grid(i), TreePoint::Grid(j)) = (x, y) {
            return Ok(TreePoint::Geodesic {
                a: *i,
                b: *j,
                offset: d,
            });
        }

        // The target lies on the subtree spanned by the grid anchors of x
        // and y; pick the anchor pair whose geodesic carries it.
        let mut anchors = Vec::with_capacity(4);
        x.push_anchors(&mut anchors);
        y.push_anchors(&mut anchors);
        anchors.sort_unstable();
        anchors.dedup();

        let two = cast::<T>(2.0);
        let to_target: Vec<T> = anchors
            .iter()
            .map(|&u| {
                let dxu = self.point_to_grid(x, u);
                let dyu = self.point_to_grid(y, u);
                let m = ((dxu + ell - dyu) / two).max(T::zero()).min(ell);
                ((d - m).abs() + dxu - m).max(T::zero())
            })
            .collect();

        let mut best: Option<(T, usize, usize)> = None;
        for i in 0..anchors.len() {
            for j in (i + 1)..anchors.len() {
                let duv = self.grid_distance(anchors[i], anchors[j]);
                let residual = (to_target[i] + to_target[j] - duv).abs();
                if best.is_none_or(|(r, _, _)| residual < r) {
                    best = Some((residual, i, j));
                }
            }
        }
        let (_, i, j) = best.expect("at least two distinct anchors when ell > 0");
        let duv = self.grid_distance(anchors[i], anchors[j]);
        Ok(TreePoint::Geodesic {
            a: anchors[i],
            b: anchors[j],
            offset: to_target[i].min(duv),
        })
    }

    /// Open ball of radius `delta` around `x`, as grid indices and volume.
    pub fn ball(&self, x: &TreePoint<T>, delta: T) -> Result<Ball<T>> {
        if !(delta > T::zero()) {
            return Err(Error::NonpositiveRadius(delta.to_f64().unwrap_or(f64::NAN)));
        }
        let n = self.n();
        let mut indices = Vec::new();
        let mut count = 0usize;
        for i in 0..=n {
            if self.point_to_grid(x, i) < delta {
                if i < n {
                    count += 1;
                }
                indices.push(i);
            }
        }
        let volume = cast::<T>(count as f64) / cast::<T>(n as f64);
        Ok(Ball { indices, volume })
    }

    /// Splits `ball(x, delta)` by the component of the tree minus `x`
    /// containing `y`: an index lands in `ancestry` iff `x` does not lie on
    /// its geodesic to `y`.
    pub fn split_ball(&self, x: &TreePoint<T>, y: &TreePoint<T>, delta: T) -> Result<BallSplit<T>> {
        if !(delta > T::zero()) {
            return Err(Error::NonpositiveRadius(delta.to_f64().unwrap_or(f64::NAN)));
        }
        let ell = self.distance(x, y);
        if ell == T::zero() {
            return Err(Error::CoincidentCenters);
        }
        let n = self.n();
        let tol = cast::<T>(GEO_TOL);
        let mut ancestry = Vec::new();
        let mut offspring = Vec::new();
        let (mut count_a, mut count_o) = (0usize, 0usize);
        for i in 0..=n {
            let dxi = self.point_to_grid(x, i);
            if dxi < delta {
                let dyi = self.point_to_grid(y, i);
                // x on [[i, y]] <=> rho(i, x) + rho(x, y) = rho(i, y)
                if (dxi + ell - dyi).abs() <= tol {
                    if i < n {
                        count_o += 1;
                    }
                    offspring.push(i);
                } else {
                    if i < n {
                        count_a += 1;
                    }
                    ancestry.push(i);
                }
            }
        }
        let nf = cast::<T>(n as f64);
        Ok(BallSplit {
            ancestry,
            offspring,
            ancestry_volume: cast::<T>(count_a as f64) / nf,
            offspring_volume: cast::<T>(count_o as f64) / nf,
        })
    }

    /// Center and radius of the intersection of two overlapping balls:
    /// `ball(x, delta) ∩ ball(y, eps) = ball(v, r)` with
    /// `r = (delta + eps - ell) / 2` and `v` on `[[x, y]]` at distance
    /// `(ell - eps + delta) / 2` from `x`.
    pub fn ball_intersection_center(
        &self,
        x: &TreePoint<T>,
        y: &TreePoint<T>,
        delta: T,
        eps: T,
    ) -> Result<(TreePoint<T>, T)> {
        if !(delta > T::zero()) || !(eps > T::zero()) {
            return Err(Error::NonpositiveRadius(
                delta.min(eps).to_f64().unwrap_or(f64::NAN),
            ));
        }
        let ell = self.distance(x, y);
        if delta + eps <= ell {
            return Err(Error::EmptyOverlap {
                sum: (delta + eps).to_f64().unwrap_or(f64::NAN),
                ell: ell.to_f64().unwrap_or(f64::NAN),
            });
        }
        if delta > ell || eps > ell {
            return Err(Error::DegenerateOverlap {
                ell: ell.to_f64().unwrap_or(f64::NAN),
            });
        }
        let two = cast::<T>(2.0);
        let r = (delta + eps - ell) / two;
        let v = self.point_on_geodesic_at(x, y, (ell - eps + delta) / two)?;
        Ok((v, r))
    }

    /// The 1-Lipschitz witness `f_{x,y}` evaluated at `sigma`:
    /// `+rho(sigma, y)` when `sigma` lies in the component of the tree minus
    /// `y` containing `x`, `-rho(sigma, y)` otherwise.
    pub fn lipschitz_witness(
        &self,
        x: &TreePoint<T>,
        y: &TreePoint<T>,
        sigma: &TreePoint<T>,
    ) -> Result<T> {
        let ell = self.distance(x, y);
        if ell == T::zero() {
            return Err(Error::CoincidentCenters);
        }
        let dsy = self.distance(sigma, y);
        let dsx = self.distance(sigma, x);
        // y on [[sigma, x]] <=> rho(sigma, y) + rho(y, x) = rho(sigma, x)
        if (dsy + ell - dsx).abs() <= cast(GEO_TOL) {
            Ok(-dsy)
        } else {
            Ok(dsy)
        }
    }

    /// Distance between grid vertices measured along the explicit edge
    /// tree; a cross-check for the RMQ route.
    pub fn distance_via_edges(&self, i: usize, j: usize) -> T {
        let mut a = self.grid_node[i] as usize;
        let mut b = self.grid_node[j] as usize;
        let mut total = T::zero();
        while a != b {
            let (ha, hb) = (self.nodes[a].height, self.nodes[b].height);
            if ha >= hb {
                total = total + self.nodes[a].edge_len;
                a = self.nodes[a].parent as usize;
            } else {
                total = total + self.nodes[b].edge_len;
                b = self.nodes[b].parent as usize;
            }
        }
        total
    }

    /// Edge-cut transport cost for a signed node mass vector: one pass over
    /// the tree accumulating `edge length x |net mass below the edge|`.
    pub(crate) fn edge_cut_cost(&self, net: &mut [T]) -> T {
        let mut cost = T::zero();
        for &v in &self.topo {
            let node = &self.nodes[v as usize];
            if node.parent == NO_PARENT {
                continue;
            }
            let flow = net[v as usize];
            cost = cost + node.edge_len * flow.abs();
            net[node.parent as usize] = net[node.parent as usize] + flow;
        }
        cost
    }

    /// Writes the edge list as `node_id parent_id edge_length` lines, root
    /// first with parent `-1`.
    pub fn write_edge_list<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (id, node) in self.nodes.iter().enumerate() {
            if node.parent == NO_PARENT {
                writeln!(out, "{} -1 0", id)?;
            } else {
                writeln!(
                    out,
                    "{} {} {}",
                    id,
                    node.parent,
                    node.edge_len.to_f64().unwrap_or(f64::NAN)
                )?;
            }
        }
        Ok(())
    }
}

/// Convenience free function mirroring the construction verb.
pub fn encode<T: Float>(excursion: Excursion<T>) -> MetricTree<T> {
    MetricTree::encode(excursion)
}
