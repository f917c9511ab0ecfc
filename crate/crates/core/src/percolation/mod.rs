//! Bond-percolation view of measurement configurations.
//!
//! A monitored circuit maps to a diagonally tilted bond lattice: one vertex
//! per gate, one edge per measurement site, the edge open iff the site is
//! unmeasured. Rectangular windows of Z^2 are also provided for the
//! classical crossing results the circuit estimates are compared against.

mod maxflow;
mod mc;
mod unionfind;

pub use mc::{mc_estimate, wilson_interval, LatticeFamily, McEstimate};

use std::collections::HashMap;

use rand::Rng;

use crate::circuit::{BrickwallLayout, MeasurementConfiguration};
use crate::error::Error;
use crate::stream::StreamKey;
use crate::Result;

use maxflow::Dinic;
use unionfind::UnionFind;

/// What a lattice vertex stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    /// Two-qubit gate, by placement id.
    Gate(usize),
    /// Degree-2 wire vertex where a boundary qubit skips an even layer.
    PassThrough { q: usize, layer: usize },
    VirtualLeft,
    VirtualRight,
    /// Rectangular lattice point.
    Point { x: usize, y: usize },
    /// Per-qubit terminal stub behind the final-time leg (cluster graph only).
    Terminal { q: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Horizontal rectangle edge (x, y)-(x+1, y).
    RectH { x: usize, y: usize },
    /// Vertical rectangle edge (x, y)-(x, y+1).
    RectV { x: usize, y: usize },
    /// Circuit leg carrying the measurement site (q, tau).
    Site { q: usize, tau: usize },
    /// Always-open initial leg of qubit `q` (virtual boundary, no site).
    Structural { q: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub open: bool,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    RectangularZ2 { a: usize, b: usize },
    CircuitTilted { n: usize, t: usize },
}

/// Open/closed-edge graph with labeled boundaries.
#[derive(Debug, Clone)]
pub struct BondLattice {
    vertices: Vec<VertexKind>,
    edges: Vec<Edge>,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub top: Vec<usize>,
    pub bottom: Vec<usize>,
    pub provenance: Provenance,
}

impl BondLattice {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, v: usize) -> VertexKind {
        self.vertices[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn open_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.open).count()
    }

    /// Edges that represent measurement sites or rectangle bonds, i.e.
    /// everything except virtual-boundary attachments.
    pub fn site_edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| !matches!(e.kind, EdgeKind::Structural { .. }))
    }

    pub fn set_open(&mut self, e: usize, open: bool) {
        self.edges[e].open = open;
    }

    fn adjacency(&self, open_only: bool) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (id, e) in self.edges.iter().enumerate() {
            if open_only && !e.open {
                continue;
            }
            adj[e.u].push((id, e.v));
            adj[e.v].push((id, e.u));
        }
        adj
    }

    /// Edge-list CSV `u,v,open` plus a boundary-label block, one file.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "u,v,open")?;
        for e in &self.edges {
            writeln!(w, "{},{},{}", e.u, e.v, u8::from(e.open))?;
        }
        writeln!(w, "# boundary left: {:?}", self.left)?;
        writeln!(w, "# boundary right: {:?}", self.right)?;
        writeln!(w, "# boundary top: {:?}", self.top)?;
        writeln!(w, "# boundary bottom: {:?}", self.bottom)?;
        Ok(())
    }
}

/// Rectangle `[0, a] x [0, b]` (height `a`, width `b`): vertices at integer
/// points, every edge independently open with probability `q`. Crossings
/// run left (x=0) to right (x=b).
pub fn rectangular_lattice(a: usize, b: usize, q: f64, stream: &StreamKey) -> BondLattice {
    let mut rng = stream.rng();
    rectangular_from_uniforms(a, b, q, &mut std::iter::repeat_with(move || rng.random::<f64>()))
}

/// Same lattice geometry with the per-edge uniforms supplied by the caller,
/// so that different `q` values can share one coupled sample.
pub fn rectangular_from_uniforms(
    a: usize,
    b: usize,
    q: f64,
    uniforms: &mut dyn Iterator<Item = f64>,
) -> BondLattice {
    let vid = |x: usize, y: usize| y * (b + 1) + x;
    let mut vertices = Vec::with_capacity((a + 1) * (b + 1));
    for y in 0..=a {
        for x in 0..=b {
            vertices.push(VertexKind::Point { x, y });
        }
    }
    let mut edges = Vec::new();
    // Horizontal then vertical, row-major; the uniform stream consumption
    // order is part of the reproducibility contract.
    for y in 0..=a {
        for x in 0..b {
            let open = uniforms.next().expect("uniform stream") < q;
            edges.push(Edge { u: vid(x, y), v: vid(x + 1, y), open, kind: EdgeKind::RectH { x, y } });
        }
    }
    for y in 0..a {
        for x in 0..=b {
            let open = uniforms.next().expect("uniform stream") < q;
            edges.push(Edge { u: vid(x, y), v: vid(x, y + 1), open, kind: EdgeKind::RectV { x, y } });
        }
    }
    let left = (0..=a).map(|y| vid(0, y)).collect();
    let right = (0..=a).map(|y| vid(b, y)).collect();
    let bottom = (0..=b).map(|x| vid(x, 0)).collect();
    let top = (0..=b).map(|x| vid(x, a)).collect();
    BondLattice {
        vertices,
        edges,
        left,
        right,
        top,
        bottom,
        provenance: Provenance::RectangularZ2 { a, b },
    }
}

/// Number of uniforms one rectangle draw consumes.
pub fn rectangle_edge_count(a: usize, b: usize) -> usize {
    (a + 1) * b + a * (b + 1)
}

/// The tilted bond lattice of a measurement configuration (one vertex per
/// gate, one edge per site, open iff unmeasured). Virtual left/right
/// vertices attach through always-open initial legs and through the
/// final-time site edges respectively.
pub fn circuit_to_bond_lattice(config: &MeasurementConfiguration) -> BondLattice {
    let n = config.n();
    let t = config.t();
    let layout = BrickwallLayout::new(n, t).expect("config dims are valid");

    // Vertex ids: gates, then pass-throughs, then virtual left/right.
    let mut vertices: Vec<VertexKind> = layout
        .placements()
        .iter()
        .enumerate()
        .map(|(id, _)| VertexKind::Gate(id))
        .collect();
    let mut pass_ids = HashMap::new();
    for layer in (2..=t).step_by(2) {
        for q in [1, n] {
            pass_ids.insert((q, layer), vertices.len());
            vertices.push(VertexKind::PassThrough { q, layer });
        }
    }
    let vleft = vertices.len();
    vertices.push(VertexKind::VirtualLeft);
    let vright = vertices.len();
    vertices.push(VertexKind::VirtualRight);

    let on_wire = |q: usize, layer: usize| -> usize {
        if layer == t + 1 {
            return vright;
        }
        layout
            .gate_at(layer, q)
            .unwrap_or_else(|| pass_ids[&(q, layer)])
    };

    let mut edges = Vec::new();
    for q in 1..=n {
        edges.push(Edge { u: vleft, v: on_wire(q, 1), open: true, kind: EdgeKind::Structural { q } });
    }
    for tau in 1..=t {
        for q in 1..=n {
            edges.push(Edge {
                u: on_wire(q, tau),
                v: on_wire(q, tau + 1),
                open: !config.status(q, tau).is_measured(),
                kind: EdgeKind::Site { q, tau },
            });
        }
    }

    let top = (0..vertices.len())
        .filter(|&v| match vertices[v] {
            VertexKind::Gate(id) => layout.placement(id).pair.0 == 1,
            VertexKind::PassThrough { q, .. } => q == 1,
            _ => false,
        })
        .collect();
    let bottom = (0..vertices.len())
        .filter(|&v| match vertices[v] {
            VertexKind::Gate(id) => layout.placement(id).pair.1 == n,
            VertexKind::PassThrough { q, .. } => q == n,
            _ => false,
        })
        .collect();

    BondLattice {
        vertices,
        edges,
        left: vec![vleft],
        right: vec![vright],
        top,
        bottom,
        provenance: Provenance::CircuitTilted { n, t },
    }
}

/// True iff an open path connects the left boundary to the right boundary.
pub fn left_right_crossing(lattice: &BondLattice) -> bool {
    let adj = lattice.adjacency(true);
    let mut seen = vec![false; lattice.vertex_count()];
    let mut stack: Vec<usize> = lattice.left.clone();
    for &v in &stack {
        seen[v] = true;
    }
    while let Some(u) = stack.pop() {
        for &(_, v) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    lattice.right.iter().any(|&v| seen[v])
}

/// Max number of edge-disjoint left-right crossings with the explicit paths.
#[derive(Debug, Clone)]
pub struct CrossingReport {
    pub exists: bool,
    pub count: usize,
    /// Edge-id sequences of pairwise edge-disjoint open crossings.
    pub paths: Vec<Vec<usize>>,
}

/// Unit-capacity max flow from a super-source over the left boundary to a
/// super-sink over the right boundary; by Menger's theorem the value is the
/// crossing count, and an integral decomposition yields the paths.
pub fn max_edge_disjoint_crossings(lattice: &BondLattice) -> CrossingReport {
    let base = lattice.vertex_count();
    let s = base;
    let t = base + 1;
    let mut dinic = Dinic::new(base + 2);
    let big = (lattice.edges.len() + 2) as i32;
    for &v in &lattice.left {
        dinic.add_arc(s, v, big, None);
    }
    for &v in &lattice.right {
        dinic.add_arc(v, t, big, None);
    }
    for (id, e) in lattice.edges.iter().enumerate() {
        if e.open {
            dinic.add_undirected_unit(e.u, e.v, id);
        }
    }
    let count = dinic.max_flow(s, t) as usize;
    let mut paths = dinic.decompose_paths(s, t);
    paths.sort_by_key(|p| path_sort_key(lattice, p));
    CrossingReport { exists: count >= 1, count, paths }
}

fn path_sort_key(lattice: &BondLattice, path: &[usize]) -> (usize, usize) {
    let first = path.first().copied().unwrap_or(usize::MAX);
    let start = match path.first().map(|&e| lattice.edge(e).kind) {
        Some(EdgeKind::Site { q, .. }) | Some(EdgeKind::Structural { q }) => q,
        Some(EdgeKind::RectH { y, .. }) | Some(EdgeKind::RectV { y, .. }) => y,
        None => usize::MAX,
    };
    (start, first)
}

/// Dual lattice: one node per face (plus TOP and BOTTOM), one edge per
/// interior primal edge, traversable iff the primal edge is closed.
#[derive(Debug, Clone)]
pub struct DualLattice {
    pub node_count: usize,
    pub top: usize,
    pub bottom: usize,
    /// (face, face, primal edge id)
    pub edges: Vec<(usize, usize, usize)>,
}

pub fn dual_lattice(lattice: &BondLattice) -> DualLattice {
    match lattice.provenance {
        Provenance::RectangularZ2 { a, b } => rect_dual(lattice, a, b),
        Provenance::CircuitTilted { n, t } => tilted_dual(lattice, n, t),
    }
}

fn rect_dual(lattice: &BondLattice, a: usize, b: usize) -> DualLattice {
    let face = |x: usize, y: usize| y * b + x;
    let top = a * b;
    let bottom = a * b + 1;
    let mut edges = Vec::new();
    for (id, e) in lattice.edges.iter().enumerate() {
        match e.kind {
            EdgeKind::RectH { x, y } => {
                let above = if y == a { top } else { face(x, y) };
                let below = if y == 0 { bottom } else { face(x, y - 1) };
                edges.push((above, below, id));
            }
            EdgeKind::RectV { x, y } => {
                // Boundary verticals touch the left/right exterior: no dual
                // edge for a top-bottom cut.
                if x > 0 && x < b {
                    edges.push((face(x - 1, y), face(x, y), id));
                }
            }
            _ => {}
        }
    }
    DualLattice { node_count: a * b + 2, top, bottom, edges }
}

/// Face regions of the tilted lattice for pair-row `j` (between qubits `j`
/// and `j+1`): the open region before the row's first gate, the diamonds
/// between consecutive gates, and the open region after the last gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Region {
    Before(usize),
    Between(usize, usize), // (row, left gate layer)
    After(usize),
}

fn row_region(j: usize, tau: usize, t: usize) -> Region {
    // Gate layers on pair (j, j+1) have the parity of j.
    let first = if j % 2 == 1 { 1 } else { 2 };
    let last = if j % 2 == 1 { t - 1 } else { t };
    if tau < first {
        return Region::Before(j);
    }
    let t0 = if tau % 2 == first % 2 { tau } else { tau - 1 };
    if t0 >= last {
        Region::After(j)
    } else {
        Region::Between(j, t0)
    }
}

fn tilted_dual(lattice: &BondLattice, n: usize, t: usize) -> DualLattice {
    let mut ids: HashMap<Region, usize> = HashMap::new();
    let mut next = 2usize; // 0 = top, 1 = bottom
    let intern = |r: Region, next: &mut usize, ids: &mut HashMap<Region, usize>| -> usize {
        *ids.entry(r).or_insert_with(|| {
            let id = *next;
            *next += 1;
            id
        })
    };
    let mut edges = Vec::new();
    for (id, e) in lattice.edges.iter().enumerate() {
        let EdgeKind::Site { q, tau } = e.kind else { continue };
        let above = if q == 1 {
            0
        } else {
            intern(row_region(q - 1, tau, t), &mut next, &mut ids)
        };
        let below = if q == n {
            1
        } else {
            intern(row_region(q, tau, t), &mut next, &mut ids)
        };
        edges.push((above, below, id));
    }
    DualLattice { node_count: next, top: 0, bottom: 1, edges }
}

/// Searches for a top-bottom path of closed primal edges in the dual.
/// Returns the closed primal edges of the found crossing. `tau_min`
/// restricts a tilted search to sites with `tau >= tau_min` (pass 1 for no
/// restriction; rectangles ignore it).
pub fn dual_top_bottom_cut(lattice: &BondLattice, tau_min: usize) -> (bool, Vec<usize>) {
    let dual = dual_lattice(lattice);
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); dual.node_count];
    for &(f1, f2, primal) in &dual.edges {
        if lattice.edge(primal).open {
            continue;
        }
        if let EdgeKind::Site { tau, .. } = lattice.edge(primal).kind {
            if tau < tau_min {
                continue;
            }
        }
        adj[f1].push((primal, f2));
        adj[f2].push((primal, f1));
    }
    // BFS with parent tracking to recover the wall.
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; dual.node_count];
    let mut seen = vec![false; dual.node_count];
    let mut queue = std::collections::VecDeque::new();
    seen[dual.top] = true;
    queue.push_back(dual.top);
    while let Some(u) = queue.pop_front() {
        if u == dual.bottom {
            break;
        }
        for &(primal, v) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some((u, primal));
                queue.push_back(v);
            }
        }
    }
    if !seen[dual.bottom] {
        return (false, Vec::new());
    }
    let mut cut = Vec::new();
    let mut cur = dual.bottom;
    while let Some((prev, primal)) = parent[cur] {
        cut.push(primal);
        cur = prev;
    }
    cut.reverse();
    (true, cut)
}

/// One open cluster touching the final-time boundary.
#[derive(Debug, Clone)]
pub struct Cluster {
    /// Open site edges of the component, final-time legs included.
    pub edges: Vec<usize>,
    /// Edge count excluding final-time legs; a lone open final leg is a
    /// size-0 cluster.
    pub size: usize,
    /// Qubits whose final-time legs belong to this cluster.
    pub final_qubits: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ClusterReport {
    pub clusters: Vec<Cluster>,
}

impl ClusterReport {
    pub fn count(&self) -> usize {
        self.clusters.len()
    }

    pub fn max_size(&self) -> usize {
        self.clusters.iter().map(|c| c.size).max().unwrap_or(0)
    }
}

/// Connected open components touching the final-time legs. Virtual
/// boundary vertices are excluded; each final leg attaches to its own
/// terminal stub so distinct clusters do not merge through the boundary.
pub fn final_time_clusters(config: &MeasurementConfiguration) -> ClusterReport {
    let lattice = circuit_to_bond_lattice(config);
    final_time_clusters_of(&lattice)
}

pub fn final_time_clusters_of(lattice: &BondLattice) -> ClusterReport {
    let Provenance::CircuitTilted { n, t } = lattice.provenance else {
        panic!("final-time clusters are defined for circuit lattices");
    };
    let base = lattice.vertex_count();
    let mut uf = UnionFind::new(base + n); // + per-qubit terminal stubs
    let mut edge_home: Vec<Option<usize>> = vec![None; lattice.edges.len()];
    for (id, e) in lattice.edges.iter().enumerate() {
        let EdgeKind::Site { q, tau } = e.kind else { continue };
        if !e.open {
            continue;
        }
        if tau == t {
            uf.union(e.u, base + q - 1);
        } else {
            uf.union(e.u, e.v);
        }
        edge_home[id] = Some(e.u);
    }
    // Group final legs by component root.
    let mut by_root: HashMap<usize, (Vec<usize>, Vec<usize>)> = HashMap::new();
    for (id, e) in lattice.edges.iter().enumerate() {
        let EdgeKind::Site { q, tau } = e.kind else { continue };
        if tau == t && e.open {
            let root = uf.find(e.u);
            by_root.entry(root).or_default().1.push(q);
            let _ = id;
        }
    }
    for (id, home) in edge_home.iter().enumerate() {
        if let Some(u) = home {
            let root = uf.find(*u);
            if let Some(entry) = by_root.get_mut(&root) {
                entry.0.push(id);
            }
        }
    }
    let mut clusters: Vec<Cluster> = by_root
        .into_values()
        .map(|(edges, mut final_qubits)| {
            final_qubits.sort_unstable();
            let finals = final_qubits.len();
            let size = edges.len() - finals;
            Cluster { edges, size, final_qubits }
        })
        .collect();
    clusters.sort_by_key(|c| c.final_qubits[0]);
    ClusterReport { clusters }
}

/// Gate vertices inside final-time clusters: a witness upper bound on the
/// size of a post-selected circuit preparing the output.
pub fn effective_gate_count(config: &MeasurementConfiguration) -> usize {
    let lattice = circuit_to_bond_lattice(config);
    effective_gates_of(&lattice).len()
}

/// Placement ids of the gates in final-time clusters.
pub fn effective_gates_of(lattice: &BondLattice) -> Vec<usize> {
    let Provenance::CircuitTilted { n, t } = lattice.provenance else {
        panic!("effective gates are defined for circuit lattices");
    };
    let base = lattice.vertex_count();
    let mut uf = UnionFind::new(base + n);
    for e in lattice.edges.iter() {
        let EdgeKind::Site { q, tau } = e.kind else { continue };
        if !e.open {
            continue;
        }
        if tau == t {
            uf.union(e.u, base + q - 1);
        } else {
            uf.union(e.u, e.v);
        }
    }
    let roots: std::collections::HashSet<usize> = lattice
        .edges
        .iter()
        .filter(|e| matches!(e.kind, EdgeKind::Site { tau, .. } if tau == t) && e.open)
        .map(|e| uf.find(e.u))
        .collect();
    (0..lattice.vertex_count())
        .filter(|&v| matches!(lattice.vertex(v), VertexKind::Gate(_)))
        .filter(|&v| roots.contains(&uf.find(v)))
        .collect()
}

/// One crossing as a leg sequence, ordered from the initial to the final
/// boundary.
#[derive(Debug, Clone)]
pub struct LatticePath {
    /// Edge ids along the path, starting with the structural initial leg.
    pub edges: Vec<usize>,
    /// Qubit of the initial-time leg.
    pub start_qubit: usize,
}

/// `k` edge-disjoint measurement-free left-right paths of the circuit
/// lattice, ordered top-to-bottom by starting leg.
pub fn measurement_free_paths(
    config: &MeasurementConfiguration,
    k: usize,
) -> Result<Vec<LatticePath>> {
    let lattice = circuit_to_bond_lattice(config);
    measurement_free_paths_of(&lattice, k)
}

pub fn measurement_free_paths_of(lattice: &BondLattice, k: usize) -> Result<Vec<LatticePath>> {
    let report = max_edge_disjoint_crossings(lattice);
    if report.count < k {
        return Err(Error::InsufficientPaths { want: k, have: report.count });
    }
    let mut paths: Vec<LatticePath> = report
        .paths
        .into_iter()
        .map(|edges| {
            let start_qubit = match edges.first().map(|&e| lattice.edge(e).kind) {
                Some(EdgeKind::Structural { q }) | Some(EdgeKind::Site { q, .. }) => q,
                _ => usize::MAX,
            };
            LatticePath { edges, start_qubit }
        })
        .collect();
    paths.sort_by_key(|p| p.start_qubit);
    paths.truncate(k);
    Ok(paths)
}
