//! Fisher decoration of the open square lattice and its Kasteleyn orientation.
//!
//! Each site carries two triangles joined by a connector edge: half A holds
//! the north and east legs, half B the south and west legs. Lattice bonds join
//! `A_E` to the east neighbour's `B_W` and `A_N` to the north neighbour's `B_S`.
//! A dimer on a bond edge means the bond is absent from the high-temperature
//! even subgraph, so bond edges carry weight `coth K` and all others weight 1.
//! Legs without a neighbour (open boundary) are dropped.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{contract, LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    AN,
    AE,
    AC,
    BS,
    BW,
    BC,
}

impl NodeKind {
    pub const ALL: [NodeKind; 6] = [NodeKind::AN, NodeKind::AE, NodeKind::AC, NodeKind::BS, NodeKind::BW, NodeKind::BC];

    fn offset(self) -> (f64, f64) {
        match self {
            NodeKind::AN => (0.1, 0.3),
            NodeKind::AE => (0.3, 0.1),
            NodeKind::AC => (0.1, 0.1),
            NodeKind::BS => (-0.1, -0.3),
            NodeKind::BW => (-0.3, -0.1),
            NodeKind::BC => (-0.1, -0.1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
}

/// Bond from `site` to its east (horizontal) or north (vertical) neighbour.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BondObservable {
    pub site: (usize, usize),
    pub direction: Direction,
}

impl BondObservable {
    pub fn other_end(&self) -> (usize, usize) {
        match self.direction {
            Direction::Horizontal => (self.site.0 + 1, self.site.1),
            Direction::Vertical => (self.site.0, self.site.1 + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Internal,
    Bond(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
}

/// Decorated graph with nodes numbered row by row (`y`), then site (`x`), then kind.
#[derive(Clone, Debug)]
pub struct FisherGraph {
    pub l: usize,
    pub positions: Vec<(f64, f64)>,
    pub node_kind: Vec<(usize, usize, NodeKind)>,
    node_index: Vec<[usize; 6]>,
    pub edges: Vec<Edge>,
    pub bonds: Vec<BondObservable>,
    /// Edge carrying each bond.
    pub bond_edge: Vec<usize>,
    /// `row_start[y]..row_start[y + 1]` are the nodes of lattice row `y`.
    pub row_start: Vec<usize>,
}

const ABSENT: usize = usize::MAX;

impl FisherGraph {
    pub fn new(l: usize) -> Result<Self> {
        contract!(l >= 2, "lattice side must be at least 2, got {l}");
        let mut positions = Vec::new();
        let mut node_kind = Vec::new();
        let mut node_index = vec![[ABSENT; 6]; l * l];
        let mut row_start = Vec::with_capacity(l + 1);
        for y in 0..l {
            row_start.push(positions.len());
            for x in 0..l {
                for (k, kind) in NodeKind::ALL.into_iter().enumerate() {
                    let present = match kind {
                        NodeKind::AN => y + 1 < l,
                        NodeKind::AE => x + 1 < l,
                        NodeKind::BS => y > 0,
                        NodeKind::BW => x > 0,
                        NodeKind::AC | NodeKind::BC => true,
                    };
                    if present {
                        let (dx, dy) = kind.offset();
                        node_index[y * l + x][k] = positions.len();
                        positions.push((x as f64 + dx, y as f64 + dy));
                        node_kind.push((x, y, kind));
                    }
                }
            }
        }
        row_start.push(positions.len());

        let mut g = FisherGraph {
            l,
            positions,
            node_kind,
            node_index,
            edges: Vec::new(),
            bonds: Vec::new(),
            bond_edge: Vec::new(),
            row_start,
        };
        for y in 0..l {
            for x in 0..l {
                let idx = g.node_index[y * l + x];
                let tri = |a: usize, b: usize, c: usize| [(a, b), (a, c), (b, c)];
                for (a, b) in tri(0, 1, 2).into_iter().chain(tri(3, 4, 5)) {
                    if idx[a] != ABSENT && idx[b] != ABSENT {
                        g.edges.push(Edge {
                            a: idx[a],
                            b: idx[b],
                            kind: EdgeKind::Internal,
                        });
                    }
                }
                g.edges.push(Edge {
                    a: idx[2],
                    b: idx[5],
                    kind: EdgeKind::Internal,
                });
                if x + 1 < l {
                    let b = g.bonds.len();
                    g.bonds.push(BondObservable {
                        site: (x, y),
                        direction: Direction::Horizontal,
                    });
                    g.bond_edge.push(g.edges.len());
                    g.edges.push(Edge {
                        a: idx[1],
                        b: g.node_index[y * l + x + 1][4],
                        kind: EdgeKind::Bond(b),
                    });
                }
                if y + 1 < l {
                    let b = g.bonds.len();
                    g.bonds.push(BondObservable {
                        site: (x, y),
                        direction: Direction::Vertical,
                    });
                    g.bond_edge.push(g.edges.len());
                    g.edges.push(Edge {
                        a: idx[0],
                        b: g.node_index[(y + 1) * l + x][3],
                        kind: EdgeKind::Bond(b),
                    });
                }
            }
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn node(&self, site: (usize, usize), kind: NodeKind) -> Option<usize> {
        let k = NodeKind::ALL.iter().position(|&n| n == kind).unwrap();
        let v = self.node_index[site.1 * self.l + site.0][k];
        (v != ABSENT).then_some(v)
    }

    pub fn bond_index(&self, bond: &BondObservable) -> Option<usize> {
        let (x, y) = bond.site;
        let (ex, ey) = bond.other_end();
        if x >= self.l || y >= self.l || ex >= self.l || ey >= self.l {
            return None;
        }
        // per row of 2L - 1 bonds: each site contributes its horizontal bond
        // (if any) then its vertical bond; the last row has horizontal bonds only
        let row = y * (2 * self.l - 1);
        let idx = if y + 1 < self.l {
            let base = row + 2 * x;
            match bond.direction {
                Direction::Horizontal => base,
                Direction::Vertical => base + usize::from(x + 1 < self.l),
            }
        } else {
            row + x
        };
        debug_assert_eq!(self.bonds[idx], *bond);
        Some(idx)
    }

    /// Bonds incident to a site, in the order E, N, W, S (absent ones skipped).
    pub fn incident_bonds(&self, site: (usize, usize)) -> Vec<BondObservable> {
        let (x, y) = site;
        let mut out = Vec::with_capacity(4);
        if x + 1 < self.l {
            out.push(BondObservable { site, direction: Direction::Horizontal });
        }
        if y + 1 < self.l {
            out.push(BondObservable { site, direction: Direction::Vertical });
        }
        if x > 0 {
            out.push(BondObservable { site: (x - 1, y), direction: Direction::Horizontal });
        }
        if y > 0 {
            out.push(BondObservable { site: (x, y - 1), direction: Direction::Vertical });
        }
        out
    }
}

/// Faces of the straight-line embedding, as cycles of directed half-edges `(edge, forward)`.
struct Faces {
    faces: Vec<Vec<(usize, bool)>>,
    outer: usize,
    /// Face on each side of every edge: `[face of a->b, face of b->a]`.
    edge_faces: Vec<[usize; 2]>,
}

fn trace_faces(g: &FisherGraph) -> Faces {
    let n = g.node_count();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, edge) in g.edges.iter().enumerate() {
        adj[edge.a].push((edge.b, e));
        adj[edge.b].push((edge.a, e));
    }
    let angle = |from: usize, to: usize| {
        let (x0, y0) = g.positions[from];
        let (x1, y1) = g.positions[to];
        (y1 - y0).atan2(x1 - x0)
    };
    for (v, list) in adj.iter_mut().enumerate() {
        list.sort_by(|p, q| angle(v, p.0).total_cmp(&angle(v, q.0)));
    }
    // position of each edge in the rotation of each endpoint
    let mut slot = vec![[0usize; 2]; g.edges.len()];
    for (v, list) in adj.iter().enumerate() {
        for (k, &(_, e)) in list.iter().enumerate() {
            let side = if g.edges[e].a == v { 0 } else { 1 };
            slot[e][side] = k;
        }
    }
    let mut edge_faces = vec![[usize::MAX; 2]; g.edges.len()];
    let mut faces = Vec::new();
    for e0 in 0..g.edges.len() {
        for side0 in 0..2 {
            if edge_faces[e0][side0] != usize::MAX {
                continue;
            }
            let f = faces.len();
            let mut cycle = Vec::new();
            let (mut e, mut side) = (e0, side0);
            loop {
                edge_faces[e][side] = f;
                cycle.push((e, side == 0));
                let edge = g.edges[e];
                let (tail, head) = if side == 0 { (edge.a, edge.b) } else { (edge.b, edge.a) };
                // next half-edge: clockwise neighbour of `tail` around `head`
                let list = &adj[head];
                let k = slot[e][if side == 0 { 1 } else { 0 }];
                let (_, ne) = list[(k + list.len() - 1) % list.len()];
                debug_assert!(g.edges[ne].a == head || g.edges[ne].b == head);
                let _ = tail;
                e = ne;
                side = if g.edges[ne].a == head { 0 } else { 1 };
                if e == e0 && side == side0 {
                    break;
                }
            }
            faces.push(cycle);
        }
    }
    let area = |cycle: &Vec<(usize, bool)>| -> f64 {
        cycle
            .iter()
            .map(|&(e, fwd)| {
                let edge = g.edges[e];
                let (p, q) = if fwd { (edge.a, edge.b) } else { (edge.b, edge.a) };
                let (x0, y0) = g.positions[p];
                let (x1, y1) = g.positions[q];
                0.5 * (x0 * y1 - x1 * y0)
            })
            .sum()
    };
    let outer = (0..faces.len())
        .max_by(|&i, &j| area(&faces[i]).abs().total_cmp(&area(&faces[j]).abs()))
        .unwrap_or(0);
    let faces_signed: Vec<Vec<(usize, bool)>> = faces
        .into_iter()
        .map(|mut c| {
            // store every face as a clockwise cycle (negative signed area)
            if area(&c) > 0.0 {
                c.reverse();
                c.iter_mut().for_each(|h| h.1 = !h.1);
            }
            c
        })
        .collect();
    Faces {
        faces: faces_signed,
        outer,
        edge_faces,
    }
}

/// Skew-symmetric weighted adjacency matrix of the oriented Fisher graph.
#[derive(Clone, Debug)]
pub struct KasteleynMatrix {
    pub graph: FisherGraph,
    /// `+1` when edge `e` is oriented `a -> b`.
    pub orientation: Vec<i8>,
    pub beta_j: f64,
    /// Bond-edge weight `coth K`.
    pub bond_weight: f64,
}

impl KasteleynMatrix {
    pub fn new(graph: FisherGraph, beta_j: f64) -> Result<Self> {
        contract!(beta_j > 0.0 && beta_j.is_finite(), "betaJ must be positive and finite, got {beta_j}");
        let orientation = kasteleyn_orientation(&graph)?;
        let m = KasteleynMatrix {
            graph,
            orientation,
            beta_j,
            bond_weight: 1.0 / beta_j.tanh(),
        };
        m.check_orientation()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_weight(&self, e: usize) -> f64 {
        match self.graph.edges[e].kind {
            EdgeKind::Internal => 1.0,
            EdgeKind::Bond(_) => self.bond_weight,
        }
    }

    /// `(row, col, value)` for both triangles of the matrix.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.graph.edges.iter().enumerate().flat_map(move |(e, edge)| {
            let v = self.orientation[e] as f64 * self.edge_weight(e);
            [(edge.a, edge.b, v), (edge.b, edge.a, -v)]
        })
    }

    /// Endpoints `(p, q)` of the bond edge with `A_pq = +coth K`.
    pub fn oriented_bond(&self, bond: usize) -> (usize, usize) {
        let e = self.bond_edge(bond);
        let edge = self.graph.edges[e];
        if self.orientation[e] > 0 {
            (edge.a, edge.b)
        } else {
            (edge.b, edge.a)
        }
    }

    fn bond_edge(&self, bond: usize) -> usize {
        self.graph.bond_edge[bond]
    }

    /// Every inner face must have an odd number of edges oriented clockwise.
    pub fn check_orientation(&self) -> Result<()> {
        let faces = trace_faces(&self.graph);
        for (f, cycle) in faces.faces.iter().enumerate() {
            if f == faces.outer {
                continue;
            }
            let clockwise = cycle
                .iter()
                .filter(|&&(e, fwd)| (self.orientation[e] > 0) == fwd)
                .count();
            if clockwise % 2 == 0 {
                return Err(LabError::Construction(format!(
                    "face {f} of length {} has {clockwise} clockwise edges",
                    cycle.len()
                )));
            }
        }
        Ok(())
    }

    pub fn dense(&self) -> crate::linalg::Dense {
        let mut d = crate::linalg::Dense::zeros(self.dim());
        for (i, j, v) in self.entries() {
            d.add(i, j, v);
        }
        d
    }
}

/// Spanning tree oriented arbitrarily, then inner faces fixed one at a time
/// along the dual tree so that each has an odd number of clockwise edges.
fn kasteleyn_orientation(g: &FisherGraph) -> Result<Vec<i8>> {
    let n = g.node_count();
    let mut orientation = vec![0i8; g.edges.len()];
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, edge) in g.edges.iter().enumerate() {
        adj[edge.a].push((edge.b, e));
        adj[edge.b].push((edge.a, e));
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                orientation[e] = 1;
                queue.push_back(w);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(LabError::Construction("decorated graph is not connected".into()));
    }

    let faces = trace_faces(g);
    let mut unset: Vec<usize> = faces
        .faces
        .iter()
        .map(|c| c.iter().filter(|&&(e, _)| orientation[e] == 0).count())
        .collect();
    let mut stack: Vec<usize> = (0..faces.faces.len())
        .filter(|&f| f != faces.outer && unset[f] == 1)
        .collect();
    while let Some(f) = stack.pop() {
        if unset[f] != 1 {
            continue;
        }
        let cycle = &faces.faces[f];
        let mut clockwise = 0;
        let mut free = None;
        for &(e, fwd) in cycle {
            if orientation[e] == 0 {
                free = Some((e, fwd));
            } else if (orientation[e] > 0) == fwd {
                clockwise += 1;
            }
        }
        let (e, fwd) = free.expect("one unset edge");
        // make the free edge clockwise iff the others are even
        let want_clockwise = clockwise % 2 == 0;
        orientation[e] = if want_clockwise == fwd { 1 } else { -1 };
        for &other in &faces.edge_faces[e] {
            if other != usize::MAX {
                unset[other] -= 1;
                if other != faces.outer && unset[other] == 1 {
                    stack.push(other);
                }
            }
        }
    }
    if orientation.iter().any(|&o| o == 0) {
        return Err(LabError::Construction("orientation left edges undetermined".into()));
    }
    Ok(orientation)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_and_edge_counts() {
        let l = 6;
        let g = FisherGraph::new(l).unwrap();
        // 6 per site minus one per missing leg
        assert_eq!(g.node_count(), 6 * l * l - 4 * l);
        assert_eq!(g.bonds.len(), 2 * l * (l - 1));
        for y in 0..l {
            assert_eq!((g.row_start[y + 1] - g.row_start[y]) % 2, 0);
        }
        let faces = trace_faces(&g);
        // Euler: V - E + F = 2
        assert_eq!(g.node_count() as i64 - g.edges.len() as i64 + faces.faces.len() as i64, 2);
    }

    #[test]
    fn orientation_is_clockwise_odd() {
        for l in [2, 3, 4, 8] {
            let k = KasteleynMatrix::new(FisherGraph::new(l).unwrap(), 0.4).unwrap();
            k.check_orientation().unwrap();
            assert!(k.dense().max_asymmetry_skew() == 0.0);
        }
    }

    #[test]
    fn flipping_one_edge_breaks_orientation() {
        let mut k = KasteleynMatrix::new(FisherGraph::new(3).unwrap(), 0.4).unwrap();
        k.orientation[5] = -k.orientation[5];
        assert!(matches!(k.check_orientation(), Err(LabError::Construction(_))));
    }

    #[test]
    fn bond_index_is_position() {
        for l in [2, 3, 6] {
            let g = FisherGraph::new(l).unwrap();
            for (k, b) in g.bonds.iter().enumerate() {
                assert_eq!(g.bond_index(b), Some(k));
            }
            let outside = BondObservable { site: (l - 1, 0), direction: Direction::Horizontal };
            assert_eq!(g.bond_index(&outside), None);
        }
    }

    #[test]
    fn incident_bonds_of_corner_and_bulk() {
        let g = FisherGraph::new(4).unwrap();
        assert_eq!(g.incident_bonds((0, 0)).len(), 2);
        assert_eq!(g.incident_bonds((1, 2)).len(), 4);
        for b in g.incident_bonds((1, 2)) {
            assert!(g.bond_index(&b).is_some());
        }
    }
}
