//! Hamiltonian-cycle machinery for 4-connected triangulations.
//!
//! Every 4-connected planar triangulation is Hamiltonian (Whitney's
//! theorem). This module makes the classical proof constructive in the
//! shape the canonicalization pipeline needs:
//!
//! * [`whitney_path`] — Whitney's path lemma: given a cycle whose chosen
//!   side has no chord joining two vertices of the same arc, produce a path
//!   between two cycle vertices that covers the cycle and everything
//!   strictly on that side exactly once.
//! * [`hamiltonian_cycle_through`] — for an edge `(u, v)`, a Hamiltonian
//!   cycle using `(u, v)` such that every non-cycle edge at `u` lies on one
//!   side and every non-cycle edge at `v` on the other. The cycle is built
//!   exactly as in the classical argument: walk the ring of neighbours of
//!   `u` and `v` through the two apexes of `(u, v)`, find a Whitney path
//!   across the far side of that ring, and close it through `u` and `v`.
//! * [`pick_apex_pair`] — selection of adjacent high-degree vertices (with
//!   an optional preparatory flip) that the canonical-form transformation
//!   fans out from.
//!
//! All side bookkeeping runs through [`cycle_sides`], which classifies
//! non-cycle edges and vertices into the two discs a cycle bounds on the
//! sphere; independent validators ([`verify_whitney_path`],
//! [`verify_cycle_decomposition`], [`verify_side_separation`]) re-check the
//! constructions from definitions.

use std::collections::{BTreeSet, HashMap, HashSet};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::embedding::{Edge, FlipRecord, Triangulation, VertexId};
use crate::septri::enumerate_separating_triangles;

/// One of the two discs a cycle bounds on the sphere.
///
/// For a cycle `c₀, c₁, …` the *inside* is, by convention, the disc
/// containing the face `(c₀, c₁, apex(c₀, c₁))`; the *outside* is the
/// other disc. Rotating or reversing the cycle listing changes which disc
/// each name denotes, so callers that care fix the cycle's orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Inside => Side::Outside,
            Side::Outside => Side::Inside,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum HamiltonianError {
    /// A chord on the chosen side joins two vertices of the same arc, so
    /// the path lemma's hypothesis does not hold.
    #[error("chord {chord} joins two vertices of one arc on the chosen side")]
    HypothesisViolated { chord: Edge },
    /// The exhaustive search failed although the hypothesis held. The path
    /// lemma guarantees existence, so this indicates an implementation bug.
    #[error("no covering path found despite a chord-free arc split")]
    NotFound,
    /// The triangulation has a separating triangle.
    #[error("the triangulation is not 4-connected")]
    NotFourConnected,
    /// Below the size threshold for the requested operation.
    #[error("needs at least {min} vertices, got {n}")]
    TooSmall { n: usize, min: usize },
    /// Every candidate preparatory flip destroyed 4-connectivity.
    #[error("no preparatory flip preserves 4-connectivity")]
    NoValidPair,
}

/// Everything not on a given cycle, classified into the two discs the
/// cycle bounds. Vertex lists are sorted.
#[derive(Clone, Debug)]
pub struct CycleSides {
    pub inside_edges: BTreeSet<Edge>,
    pub outside_edges: BTreeSet<Edge>,
    pub inside_vertices: Vec<VertexId>,
    pub outside_vertices: Vec<VertexId>,
}

impl CycleSides {
    pub fn edges(&self, side: Side) -> &BTreeSet<Edge> {
        match side {
            Side::Inside => &self.inside_edges,
            Side::Outside => &self.outside_edges,
        }
    }

    pub fn vertices(&self, side: Side) -> &[VertexId] {
        match side {
            Side::Inside => &self.inside_vertices,
            Side::Outside => &self.outside_vertices,
        }
    }
}

/// A Hamiltonian cycle together with the split of all non-cycle edges into
/// the two sides of the cycle.
///
/// Invariants: `cycle` visits every vertex exactly once with consecutive
/// (cyclic) pairs adjacent; `inside_edges` and `outside_edges` are disjoint
/// and together cover every non-cycle edge; each non-cycle edge's two
/// incident faces lie in the disc its set names. Checked by
/// [`verify_cycle_decomposition`].
#[derive(Clone, Debug)]
pub struct CycleDecomposition {
    pub cycle: Vec<VertexId>,
    pub inside_edges: BTreeSet<Edge>,
    pub outside_edges: BTreeSet<Edge>,
}

/// Splits everything not on `cycle` across the two discs it bounds.
///
/// Faces are flood-filled from the face on the inside of the directed edge
/// `cycle[0] → cycle[1]`, crossing only non-cycle edges. A non-cycle edge
/// or vertex then inherits the side of the faces it touches; that side is
/// well defined exactly because the cycle separates the sphere, which is
/// asserted.
///
/// Panics if `cycle` is not a simple cycle of the triangulation.
pub fn cycle_sides(t: &Triangulation, cycle: &[VertexId]) -> CycleSides {
    let n = t.n();
    let len = cycle.len();
    assert!(len >= 3, "a cycle has at least 3 vertices");
    let mut on_cycle = vec![false; n];
    for &c in cycle {
        assert!(!on_cycle[c.idx()], "cycle visits {c} twice");
        on_cycle[c.idx()] = true;
    }
    let mut cycle_edges = BTreeSet::new();
    for i in 0..len {
        let (p, q) = (cycle[i], cycle[(i + 1) % len]);
        assert!(t.is_edge(p, q), "cycle step {p}–{q} is not an edge");
        cycle_edges.insert(Edge::new(p, q));
    }

    let faces = t.faces();
    let mut face_at: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (i, f) in faces.iter().enumerate() {
        for k in 0..3 {
            face_at.entry(Edge::new(f[k], f[(k + 1) % 3])).or_default().push(i);
        }
    }

    let seed = {
        let mut f = t.face_of(cycle[0], cycle[1]);
        while !(f[0] < f[1] && f[0] < f[2]) {
            f.rotate_left(1);
        }
        faces.binary_search(&f).expect("face_of returns a face")
    };
    let mut inside_face = vec![false; faces.len()];
    inside_face[seed] = true;
    let mut queue = vec![seed];
    while let Some(i) = queue.pop() {
        let f = faces[i];
        for k in 0..3 {
            let e = Edge::new(f[k], f[(k + 1) % 3]);
            if cycle_edges.contains(&e) {
                continue;
            }
            for &j in &face_at[&e] {
                if !inside_face[j] {
                    inside_face[j] = true;
                    queue.push(j);
                }
            }
        }
    }

    let mut sides = CycleSides {
        inside_edges: BTreeSet::new(),
        outside_edges: BTreeSet::new(),
        inside_vertices: Vec::new(),
        outside_vertices: Vec::new(),
    };
    for (&e, fs) in &face_at {
        if cycle_edges.contains(&e) {
            continue;
        }
        assert_eq!(
            inside_face[fs[0]], inside_face[fs[1]],
            "faces of non-cycle edge {e} straddle the cycle"
        );
        if inside_face[fs[0]] {
            sides.inside_edges.insert(e);
        } else {
            sides.outside_edges.insert(e);
        }
    }
    let mut vertex_side = vec![None; n];
    for (i, f) in faces.iter().enumerate() {
        for &w in f {
            if on_cycle[w.idx()] {
                continue;
            }
            let prev = vertex_side[w.idx()].replace(inside_face[i]);
            assert!(
                prev.map_or(true, |p| p == inside_face[i]),
                "vertex {w} touches both sides of the cycle"
            );
        }
    }
    for w in t.vertices() {
        match vertex_side[w.idx()] {
            Some(true) => sides.inside_vertices.push(w),
            Some(false) => sides.outside_vertices.push(w),
            None => debug_assert!(on_cycle[w.idx()]),
        }
    }
    sides
}

/// Whitney's path lemma, constructively: a path from `a` to `b` that
/// visits every vertex on `cycle` and strictly on the chosen side exactly
/// once, using only cycle edges and chosen-side edges.
///
/// Hypothesis (checked): `a` and `b` split the cycle into two arcs, and no
/// chosen-side chord joins two vertices of the same arc. Under it a
/// covering path always exists; the search is a depth-first search over
/// (position, visited set) with failed states memoized and dead-end
/// pruning, which the existence guarantee keeps honest — [`NotFound`] is
/// an implementation bug, not an input condition.
///
/// Panics if `cycle` is not a simple cycle or `a`, `b` do not lie on it.
///
/// [`NotFound`]: HamiltonianError::NotFound
pub fn whitney_path(
    t: &Triangulation,
    cycle: &[VertexId],
    a: VertexId,
    b: VertexId,
    side: Side,
) -> Result<Vec<VertexId>, HamiltonianError> {
    assert_ne!(a, b, "path endpoints must differ");
    let len = cycle.len();
    let pa = cycle.iter().position(|&c| c == a).expect("a must lie on the cycle");
    let pb = cycle.iter().position(|&c| c == b).expect("b must lie on the cycle");
    let sides = cycle_sides(t, cycle);

    // arc membership: bit 1 for the a→b arc, bit 2 for the b→a arc (the
    // endpoints a and b belong to both)
    let mut arc = vec![0u8; t.n()];
    let mut i = pa;
    loop {
        arc[cycle[i].idx()] |= 1;
        if i == pb {
            break;
        }
        i = (i + 1) % len;
    }
    let mut i = pb;
    loop {
        arc[cycle[i].idx()] |= 2;
        if i == pa {
            break;
        }
        i = (i + 1) % len;
    }
    for &e in sides.edges(side) {
        let (p, q) = e.endpoints();
        if arc[p.idx()] & arc[q.idx()] != 0 {
            // only cycle vertices carry arc bits, so p and q are a chord's
            // endpoints sharing an arc
            return Err(HamiltonianError::HypothesisViolated { chord: e });
        }
    }

    let mut targets = Vec::new();
    let mut is_target = FixedBitSet::with_capacity(t.n());
    for &c in cycle.iter().chain(sides.vertices(side)) {
        targets.push(c);
        is_target.insert(c.idx());
    }
    let total = targets.len();

    let mut permitted: Vec<Vec<VertexId>> = vec![Vec::new(); t.n()];
    let allow = |e: Edge, permitted: &mut Vec<Vec<VertexId>>| {
        let (p, q) = e.endpoints();
        permitted[p.idx()].push(q);
        permitted[q.idx()].push(p);
    };
    for i in 0..len {
        allow(Edge::new(cycle[i], cycle[(i + 1) % len]), &mut permitted);
    }
    for &e in sides.edges(side) {
        allow(e, &mut permitted);
    }
    for l in &mut permitted {
        l.sort();
    }

    // Backtracking over a heavy-tailed search space: restart with a doubled
    // node budget and a reseeded tie-break whenever a round overruns. Failed
    // positions stay memoized across rounds (they are recorded only when
    // fully explored), so the rounds converge towards an exhaustive search
    // and a budget-respecting round proves absence.
    let mut search = PathSearch {
        permitted: &permitted,
        targets: &targets,
        b,
        total,
        memo: HashMap::new(),
        nodes: 0,
        budget: 0,
        jitter: 0,
    };
    let mut budget = 1u64 << 16;
    for round in 0u64.. {
        search.nodes = 0;
        search.budget = budget;
        search.jitter = round;
        let mut visited = FixedBitSet::with_capacity(t.n());
        visited.insert(a.idx());
        let mut path = vec![a];
        match search.dfs(a, &mut visited, &mut path) {
            Outcome::Found => return Ok(path),
            Outcome::Exhausted => return Err(HamiltonianError::NotFound),
            Outcome::Cut => budget = budget.saturating_mul(2),
        }
    }
    unreachable!("the search either finds a path or exhausts the state space")
}

/// SplitMix64 finalizer: a fixed, deterministic scrambler for restart
/// tie-breaking.
fn mix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    /// A spanning path reached `b`.
    Found,
    /// Every continuation was explored and none works.
    Exhausted,
    /// The node budget ran out before the position was settled.
    Cut,
}

struct PathSearch<'a> {
    permitted: &'a [Vec<VertexId>],
    targets: &'a [VertexId],
    b: VertexId,
    total: usize,
    /// Exhaustively failed positions, keyed by visited set; the value lists
    /// the tips that failed from it.
    memo: HashMap<FixedBitSet, Vec<VertexId>>,
    nodes: u64,
    budget: u64,
    jitter: u64,
}

impl PathSearch<'_> {
    /// Failed (tip, visited) states are cached; the cache is only an
    /// accelerator, so it is cleared rather than grown without bound.
    const MEMO_CAP: usize = 1 << 20;

    fn dfs(
        &mut self,
        cur: VertexId,
        visited: &mut FixedBitSet,
        path: &mut Vec<VertexId>,
    ) -> Outcome {
        if cur == self.b {
            return if path.len() == self.total { Outcome::Found } else { Outcome::Exhausted };
        }
        if self.memo.get(visited).is_some_and(|tips| tips.contains(&cur)) {
            return Outcome::Exhausted;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Outcome::Cut;
        }
        let mut cut = false;
        if !self.pruned(cur, visited, path.len()) {
            for y in self.ordered_moves(cur, visited, path.len()) {
                visited.insert(y.idx());
                path.push(y);
                let out = self.dfs(y, visited, path);
                if out == Outcome::Found {
                    return Outcome::Found;
                }
                cut |= out == Outcome::Cut;
                path.pop();
                visited.remove(y.idx());
            }
        }
        if cut {
            // unexplored continuations remain, so the failure is not a fact
            return Outcome::Cut;
        }
        if self.memo.len() >= Self::MEMO_CAP {
            self.memo.clear();
        }
        self.memo.entry(visited.clone()).or_default().push(cur);
        Outcome::Exhausted
    }

    /// Candidate next vertices from `cur`, fewest onward exits first.
    ///
    /// A candidate other than `b` whose only unvisited neighbour is its exit
    /// must be taken now — once `cur` is left behind, that candidate can
    /// never again be entered *and* left. One such candidate preempts all
    /// others; two doom the whole position.
    fn ordered_moves(
        &self,
        cur: VertexId,
        visited: &FixedBitSet,
        path_len: usize,
    ) -> Vec<VertexId> {
        let mut cands: Vec<(usize, u64, VertexId)> = Vec::new();
        for &y in &self.permitted[cur.idx()] {
            if visited.contains(y.idx()) || (y == self.b && path_len + 1 != self.total) {
                continue;
            }
            let avail = self
                .permitted[y.idx()]
                .iter()
                .filter(|z| !visited.contains(z.idx()))
                .count();
            let tie = if self.jitter == 0 { y.idx() as u64 } else { mix(y.idx() as u64 ^ (self.jitter << 32)) };
            cands.push((avail, tie, y));
        }
        let mut forced = cands.iter().filter(|&&(avail, _, y)| avail <= 1 && y != self.b);
        if let Some(&(avail, _, y)) = forced.next() {
            if avail == 0 || forced.next().is_some() {
                return Vec::new();
            }
            return vec![y];
        }
        cands.sort();
        cands.into_iter().map(|(_, _, y)| y).collect()
    }

    /// The remaining path must run from the tip through every unvisited
    /// vertex to `b`, so the tip needs an unvisited exit, `b` needs one
    /// available neighbour and every other unvisited vertex two (of which
    /// one may be the tip), and the unvisited subgraph must admit a
    /// spanning path from a neighbour of the tip to `b` at all.
    fn pruned(&self, cur: VertexId, visited: &FixedBitSet, path_len: usize) -> bool {
        if !self.permitted[cur.idx()].iter().any(|&z| !visited.contains(z.idx())) {
            return true;
        }
        for &w in self.targets {
            if visited.contains(w.idx()) {
                continue;
            }
            let need = if w == self.b { 1 } else { 2 };
            let mut avail = 0;
            for &z in &self.permitted[w.idx()] {
                if z == cur || !visited.contains(z.idx()) {
                    avail += 1;
                    if avail == need {
                        break;
                    }
                }
            }
            if avail < need {
                return true;
            }
        }
        self.blockcut_pruned(cur, visited, path_len)
    }

    /// Necessary conditions for a Hamiltonian path of the unvisited
    /// subgraph starting next to the tip and ending at `b`:
    ///
    /// * the subgraph is connected;
    /// * its block-cut tree is a path (at most two leaf blocks), since a
    ///   spanning path crosses each cut vertex exactly once;
    /// * `b` is not a cut vertex, and with two leaf blocks it lies in one
    ///   of them while some non-cut neighbour of the tip lies in the other.
    fn blockcut_pruned(&self, cur: VertexId, visited: &FixedBitSet, path_len: usize) -> bool {
        let n = self.permitted.len();
        let remaining = self.total - path_len;
        if remaining <= 2 {
            return false; // the per-vertex degree conditions already decide
        }

        const NONE: u32 = u32::MAX;
        let root = self.b.idx();
        let mut disc = vec![NONE; n];
        let mut low = vec![0u32; n];
        let mut parent = vec![NONE; n];
        let mut next_edge = vec![0u32; n];
        let mut is_cut = FixedBitSet::with_capacity(n);
        let mut edge_stack: Vec<(u32, u32)> = Vec::new();
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        let mut stack: Vec<u32> = vec![root as u32];
        disc[root] = 0;
        let mut clock = 1u32;
        let mut reached = 1usize;
        let mut root_children = 0u32;

        while let Some(&v) = stack.last() {
            let vu = v as usize;
            let mut descended = false;
            while (next_edge[vu] as usize) < self.permitted[vu].len() {
                let w = self.permitted[vu][next_edge[vu] as usize];
                next_edge[vu] += 1;
                let wu = w.idx();
                if visited.contains(wu) {
                    continue;
                }
                if disc[wu] == NONE {
                    parent[wu] = v;
                    disc[wu] = clock;
                    low[wu] = clock;
                    clock += 1;
                    reached += 1;
                    if vu == root {
                        root_children += 1;
                    }
                    edge_stack.push((v, wu as u32));
                    stack.push(wu as u32);
                    descended = true;
                    break;
                } else if disc[wu] < disc[vu] && parent[vu] != wu as u32 {
                    edge_stack.push((v, wu as u32));
                    low[vu] = low[vu].min(disc[wu]);
                }
            }
            if descended {
                continue;
            }
            stack.pop();
            let p = parent[vu];
            if p != NONE {
                let pu = p as usize;
                low[pu] = low[pu].min(low[vu]);
                if low[vu] >= disc[pu] {
                    // pu closes a biconnected component here
                    if pu != root {
                        is_cut.insert(pu);
                    }
                    let mut blk = Vec::new();
                    while let Some(&(x, y)) = edge_stack.last() {
                        edge_stack.pop();
                        blk.push(x);
                        blk.push(y);
                        if (x, y) == (p, v) {
                            break;
                        }
                    }
                    blocks.push(blk);
                }
            }
        }

        if reached != remaining {
            return true; // the unvisited subgraph is disconnected
        }
        if root_children >= 2 {
            return true; // b is a cut vertex
        }

        // classify blocks; a vertex is stamped with the last block touching
        // it, which for a non-cut vertex is its unique block
        let mut stamp = vec![NONE; n];
        let mut leaves: Vec<u32> = Vec::new();
        let mut b_block = NONE;
        for (id, blk) in blocks.iter().enumerate() {
            let id = id as u32;
            let mut cuts = 0;
            for &x in blk {
                let xu = x as usize;
                if stamp[xu] == id {
                    continue;
                }
                stamp[xu] = id;
                if is_cut.contains(xu) {
                    cuts += 1;
                }
                if xu == root {
                    b_block = id;
                }
            }
            if cuts <= 1 {
                leaves.push(id);
            }
        }
        match leaves.len() {
            0 | 1 => false,
            2 => {
                if b_block != leaves[0] && b_block != leaves[1] {
                    return true; // b sits in a middle block
                }
                let far = if b_block == leaves[0] { leaves[1] } else { leaves[0] };
                // the path's other endpoint must enter the far leaf block
                !self.permitted[cur.idx()].iter().any(|&y| {
                    !visited.contains(y.idx())
                        && !is_cut.contains(y.idx())
                        && stamp[y.idx()] == far
                })
            }
            _ => true, // three leaf blocks cannot all host an endpoint
        }
    }
}

/// Independent re-check of a [`whitney_path`] output against the lemma's
/// postcondition: endpoints, simplicity, exact coverage of the cycle plus
/// the chosen side, and per-step edge permissions.
pub fn verify_whitney_path(
    t: &Triangulation,
    cycle: &[VertexId],
    a: VertexId,
    b: VertexId,
    side: Side,
    path: &[VertexId],
) -> Result<(), String> {
    let sides = cycle_sides(t, cycle);
    if path.first() != Some(&a) || path.last() != Some(&b) {
        return Err(format!("path must run from {a} to {b}"));
    }
    let mut seen = HashSet::new();
    for &w in path {
        if !seen.insert(w) {
            return Err(format!("path visits {w} twice"));
        }
    }
    let mut required: BTreeSet<VertexId> = cycle.iter().copied().collect();
    required.extend(sides.vertices(side));
    let covered: BTreeSet<VertexId> = path.iter().copied().collect();
    if covered != required {
        return Err(format!(
            "path covers {} vertices, the cycle and its {side:?} hold {}",
            covered.len(),
            required.len()
        ));
    }
    let mut allowed = sides.edges(side).clone();
    for i in 0..cycle.len() {
        allowed.insert(Edge::new(cycle[i], cycle[(i + 1) % cycle.len()]));
    }
    for w in path.windows(2) {
        let e = Edge::new(w[0], w[1]);
        if !allowed.contains(&e) {
            return Err(format!("step {e} is not a cycle or {side:?} edge"));
        }
    }
    Ok(())
}

/// The ring of neighbours of `u` and `v` through the two apexes of edge
/// `(u, v)`: with `x = apex(u → v)`, `y = apex(v → u)`, the returned cycle
/// is `x, u₁, …, u_k, y, v₁, …, v_m` where `v, x, u₁, …, u_k, y` are the
/// neighbours of `u` in counter-clockwise order and `y, v₁, …, v_m, x, u`
/// those of `v`. In a 4-connected triangulation these vertices are
/// pairwise distinct (a repeat would be a vertex adjacent to both `u` and
/// `v` besides the apexes — a separating triangle), which is asserted.
pub fn neighbour_cycle(t: &Triangulation, u: VertexId, v: VertexId) -> Vec<VertexId> {
    assert!(t.is_edge(u, v), "({u}, {v}) must be an edge");
    let ring_u = ccw_from(t, u, v);
    let ring_v = ccw_from(t, v, u);
    let x = t.apex(u, v);
    let y = t.apex(v, u);
    assert_eq!(ring_u[1], x, "apex of (u → v) follows v counter-clockwise at u");
    assert_eq!(*ring_u.last().unwrap(), y, "apex of (v → u) precedes v counter-clockwise at u");
    assert_eq!(ring_v[1], y);
    assert_eq!(*ring_v.last().unwrap(), x);

    let mut cycle = Vec::with_capacity(ring_u.len() + ring_v.len() - 4);
    cycle.push(x);
    cycle.extend_from_slice(&ring_u[2..ring_u.len() - 1]);
    cycle.push(y);
    cycle.extend_from_slice(&ring_v[2..ring_v.len() - 1]);
    let distinct: HashSet<VertexId> = cycle.iter().copied().collect();
    assert_eq!(distinct.len(), cycle.len(), "a repeated neighbour would form a separating triangle");
    assert!(!distinct.contains(&u) && !distinct.contains(&v));
    cycle
}

/// Neighbours of `w` in counter-clockwise order starting at `start`.
fn ccw_from(t: &Triangulation, w: VertexId, start: VertexId) -> Vec<VertexId> {
    let rot = t.neighbors(w);
    let d = rot.len();
    let p = rot.iter().position(|&x| x == start).expect("start must neighbour w");
    (0..d).map(|i| rot[(p + d - i) % d]).collect()
}

/// Two non-consecutive neighbours of `w` joined by an edge would close a
/// non-facial triangle through `w`; 4-connectivity forbids it.
fn assert_no_neighbour_chords(t: &Triangulation, w: VertexId) {
    let rot = t.neighbors(w);
    let d = rot.len();
    for i in 0..d {
        for j in i + 1..d {
            if j == i + 1 || (i == 0 && j == d - 1) {
                continue;
            }
            assert!(
                !t.is_edge(rot[i], rot[j]),
                "non-consecutive neighbours {} and {} of {w} are adjacent: separating triangle",
                rot[i],
                rot[j]
            );
        }
    }
}

/// A Hamiltonian cycle through edge `(u, v)` whose non-cycle edges at `u`
/// all lie inside and whose non-cycle edges at `v` all lie outside (the
/// deterministic orientation of the classical side-separation lemma).
///
/// Construction: take the [`neighbour_cycle`] of `(u, v)` through the
/// apexes `x` and `y`; its side away from `(u, v)` satisfies the Whitney
/// hypothesis because neighbour chords of `u` or `v` would be separating
/// triangles; find the Whitney path `x → y` across that side and close it
/// with the edges `(y, u)`, `(u, v)`, `(v, x)`.
///
/// Panics if `n < 6` or `(u, v)` is not an edge (preconditions); returns
/// [`NotFourConnected`] when a separating triangle exists.
///
/// [`NotFourConnected`]: HamiltonianError::NotFourConnected
pub fn hamiltonian_cycle_through(
    t: &Triangulation,
    u: VertexId,
    v: VertexId,
) -> Result<CycleDecomposition, HamiltonianError> {
    assert!(t.n() >= 6, "needs at least 6 vertices, got {}", t.n());
    assert!(t.is_edge(u, v), "({u}, {v}) must be an edge");
    if !enumerate_separating_triangles(t).is_empty() {
        return Err(HamiltonianError::NotFourConnected);
    }
    assert_no_neighbour_chords(t, u);
    assert_no_neighbour_chords(t, v);

    let cycle = neighbour_cycle(t, u, v);
    let x = cycle[0];
    let y = t.apex(v, u);
    let sides = cycle_sides(t, &cycle);
    let uv_inside = sides.inside_vertices.contains(&u);
    let held = sides.vertices(if uv_inside { Side::Inside } else { Side::Outside });
    debug_assert_eq!(
        held,
        if u < v { [u, v] } else { [v, u] },
        "only u and v live on the (u, v) side of their neighbour ring"
    );
    let whitney_side = if uv_inside { Side::Outside } else { Side::Inside };

    let mut ham = whitney_path(t, &cycle, x, y, whitney_side)?;
    ham.push(u);
    ham.push(v);
    assert_eq!(ham.len(), t.n(), "the path covers everything but u and v");

    let hs = cycle_sides(t, &ham);
    debug_assert!(hs.inside_vertices.is_empty() && hs.outside_vertices.is_empty());
    // orient the decomposition so that u's chords are the inside
    let (inside_edges, outside_edges) = if hs.inside_edges.contains(&Edge::new(u, x)) {
        (hs.inside_edges, hs.outside_edges)
    } else {
        (hs.outside_edges, hs.inside_edges)
    };
    let decomp = CycleDecomposition { cycle: ham, inside_edges, outside_edges };
    verify_side_separation(t, &decomp, u, v)
        .expect("construction puts u's chords inside and v's outside");
    Ok(decomp)
}

/// Checks the [`CycleDecomposition`] invariants: Hamiltonicity of the
/// cycle and a side assignment that matches the embedding (each non-cycle
/// edge lies in the disc its set names, under either naming of the two
/// discs).
pub fn verify_cycle_decomposition(t: &Triangulation, d: &CycleDecomposition) -> Result<(), String> {
    if d.cycle.len() != t.n() {
        return Err(format!("cycle visits {} of {} vertices", d.cycle.len(), t.n()));
    }
    let mut seen = vec![false; t.n()];
    for &w in &d.cycle {
        if seen[w.idx()] {
            return Err(format!("cycle visits {w} twice"));
        }
        seen[w.idx()] = true;
    }
    for i in 0..d.cycle.len() {
        let (p, q) = (d.cycle[i], d.cycle[(i + 1) % d.cycle.len()]);
        if !t.is_edge(p, q) {
            return Err(format!("cycle step {p}–{q} is not an edge"));
        }
    }
    if let Some(e) = d.inside_edges.intersection(&d.outside_edges).next() {
        return Err(format!("edge {e} is assigned to both sides"));
    }
    // equality with the recomputed split also forces the union to be
    // exactly the non-cycle edges
    let sides = cycle_sides(t, &d.cycle);
    let straight =
        d.inside_edges == sides.inside_edges && d.outside_edges == sides.outside_edges;
    let swapped =
        d.inside_edges == sides.outside_edges && d.outside_edges == sides.inside_edges;
    if !straight && !swapped {
        return Err("side assignment does not match the embedding".into());
    }
    Ok(())
}

/// Checks the side-separation property of a decomposition built through
/// `(u, v)`: the edge is on the cycle, `u`'s non-cycle edges are all
/// inside, and `v`'s are all outside.
pub fn verify_side_separation(
    t: &Triangulation,
    d: &CycleDecomposition,
    u: VertexId,
    v: VertexId,
) -> Result<(), String> {
    let n = d.cycle.len();
    let pu = d.cycle.iter().position(|&w| w == u).ok_or(format!("{u} is not on the cycle"))?;
    let succ = d.cycle[(pu + 1) % n];
    let pred = d.cycle[(pu + n - 1) % n];
    if succ != v && pred != v {
        return Err(format!("({u}, {v}) is not a cycle edge"));
    }
    for (w, own) in [(u, &d.inside_edges), (v, &d.outside_edges)] {
        let pw = d.cycle.iter().position(|&z| z == w).unwrap();
        let cycle_nbs = [d.cycle[(pw + 1) % n], d.cycle[(pw + n - 1) % n]];
        for &z in t.neighbors(w) {
            if !cycle_nbs.contains(&z) && !own.contains(&Edge::new(w, z)) {
                return Err(format!("non-cycle edge {} strays to the wrong side", Edge::new(w, z)));
            }
        }
    }
    Ok(())
}

/// Selects the vertex pair the canonical-form transformation fans out
/// from: `x` of maximum degree (or one more after the preparatory flip)
/// and an adjacent `y` of degree at least 6 after any flip.
///
/// Branches, scanning in index order throughout:
///
/// * some maximum-degree vertex has a degree-≥6 neighbour — return the
///   pair, no flip;
/// * otherwise flip an edge of `x`'s link to connect `x` to a vertex of
///   degree ≥ 5 beyond it (degree ≥ 6 once connected), which exists for
///   `n ≥ 13`;
/// * if the maximum degree is 6 and `n ≥ 19`, instead connect two
///   degree-6 vertices by one flip (both end at degree 7), which that size
///   guarantees.
///
/// Each candidate flip is applied to a scratch copy and kept only if the
/// result stays 4-connected — the classical argument leaves this
/// preservation implicit, so it is checked at runtime and
/// [`NoValidPair`] reported if every candidate fails.
///
/// Panics if the input has a separating triangle (precondition).
///
/// [`NoValidPair`]: HamiltonianError::NoValidPair
pub fn pick_apex_pair(
    t: &Triangulation,
) -> Result<(VertexId, VertexId, Option<FlipRecord>), HamiltonianError> {
    let n = t.n();
    if n < 13 {
        return Err(HamiltonianError::TooSmall { n, min: 13 });
    }
    assert!(
        enumerate_separating_triangles(t).is_empty(),
        "pick_apex_pair requires a 4-connected triangulation"
    );
    let delta = t.max_degree();

    if delta == 6 && n >= 19 {
        let mut edges = t.edges();
        edges.sort();
        for e in edges {
            let (c, d) = t.apexes(e);
            if t.degree(c) == 6 && t.degree(d) == 6 && !t.is_edge(c, d) {
                if let Some(rec) = flip_keeping_4connected(t, e) {
                    let (x, y) = if c < d { (c, d) } else { (d, c) };
                    return Ok((x, y, Some(rec)));
                }
            }
        }
        return Err(HamiltonianError::NoValidPair);
    }

    let x = t.vertices().find(|&w| t.degree(w) == delta).expect("some vertex attains Δ");
    let mut nbrs = t.neighbors(x).to_vec();
    nbrs.sort();
    if let Some(&y) = nbrs.iter().find(|&&w| t.degree(w) >= 6) {
        return Ok((x, y, None));
    }
    // flipping a link edge of x inserts (x, w) for the far apex w
    let rot = t.neighbors(x);
    let mut candidates: Vec<(Edge, VertexId)> = (0..rot.len())
        .map(|i| {
            let e = Edge::new(rot[i], rot[(i + 1) % rot.len()]);
            let (c, d) = t.apexes(e);
            debug_assert!(c == x || d == x, "x is an apex of its link edges");
            (e, if c == x { d } else { c })
        })
        .collect();
    candidates.sort();
    for (e, w) in candidates {
        if !t.is_edge(x, w) && t.degree(w) >= 5 {
            if let Some(rec) = flip_keeping_4connected(t, e) {
                debug_assert_eq!(rec.inserted, Edge::new(x, w));
                return Ok((x, w, Some(rec)));
            }
        }
    }
    Err(HamiltonianError::NoValidPair)
}

/// Flips `e` on a scratch copy; returns the record only if the flip is
/// legal and the result has no separating triangle.
fn flip_keeping_4connected(t: &Triangulation, e: Edge) -> Option<FlipRecord> {
    let mut s = t.clone();
    let rec = s.flip(e).ok()?;
    enumerate_separating_triangles(&s).is_empty().then_some(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::four_connect::make_4_connected;
    use crate::generators::{gen_canonical, gen_random, gen_stacked};

    fn v(i: usize) -> VertexId {
        VertexId(i)
    }

    fn e(a: usize, b: usize) -> Edge {
        Edge::new(v(a), v(b))
    }

    /// Octahedron with poles 0 and 5, equator 1-2-4-3; outer face (0, 1, 2).
    fn octahedron() -> Triangulation {
        let rots: &[&[usize]] = &[
            &[2, 1, 3, 4],
            &[0, 2, 5, 3],
            &[0, 4, 5, 1],
            &[0, 1, 5, 4],
            &[0, 3, 5, 2],
            &[2, 4, 3, 1],
        ];
        Triangulation::build(
            rots.iter().map(|r| r.iter().map(|&x| v(x)).collect()).collect(),
            [v(0), v(1), v(2)],
        )
        .unwrap()
    }

    /// A tower of antiprisms: `k + 1` rings of `s` vertices between two
    /// apexes, every band triangulated. Apexes have degree `s`, boundary
    /// rings 5, interior rings 6, so towers provide 4-connected instances
    /// with controlled maximum degree: `tower(4, k)` and `tower(6, k)`
    /// have Δ = 6, `tower(8, 1)` has two degree-8 apexes whose neighbours
    /// all have degree 5.
    fn tower(s: usize, k: usize) -> Triangulation {
        assert!(s >= 4 && k >= 1);
        let n = s * (k + 1) + 2;
        let apex_a = 0usize;
        let apex_b = n - 1;
        let ring = |i: usize, j: usize| 1 + s * i + (j % s);
        let angle = |i: usize, j: usize| {
            2.0 * std::f64::consts::PI * (j as f64 + 0.5 * (i % 2) as f64) / s as f64
        };
        let xy = |i: usize, j: usize| {
            let r = 2.0_f64.powi(i as i32 + 1);
            (r * angle(i, j).cos(), r * angle(i, j).sin())
        };

        let mut adj = vec![Vec::new(); n];
        let mut connect = |p: usize, q: usize| {
            adj[p].push(q);
            adj[q].push(p);
        };
        for j in 0..s {
            connect(apex_a, ring(0, j));
            connect(apex_b, ring(k, j));
        }
        for i in 0..=k {
            for j in 0..s {
                connect(ring(i, j), ring(i, j + 1));
            }
        }
        for i in 0..k {
            for j in 0..s {
                // the two angularly nearest vertices of the next ring
                let (lo, hi) = if i % 2 == 0 { (j + s - 1, j) } else { (j, j + 1) };
                connect(ring(i, j), ring(i + 1, lo));
                connect(ring(i, j), ring(i + 1, hi));
            }
        }

        // rotations by angular sort around each drawn vertex; the far apex
        // sees the last ring from outside, i.e. in reverse angular order,
        // and is itself seen radially outward by last-ring vertices
        let pos = |p: usize| -> (f64, f64) {
            if p == apex_a { (0.0, 0.0) } else { xy((p - 1) / s, (p - 1) % s) }
        };
        let mut rotations = Vec::with_capacity(n);
        for p in 0..n {
            let mut nb = adj[p].clone();
            if p == apex_b {
                nb.sort_by(|&a, &b| {
                    angle(k, (b - 1) % s).partial_cmp(&angle(k, (a - 1) % s)).unwrap()
                });
            } else {
                let (px, py) = pos(p);
                let theta = |q: usize| {
                    if q == apex_b {
                        py.atan2(px)
                    } else {
                        let (qx, qy) = pos(q);
                        (qy - py).atan2(qx - px)
                    }
                };
                nb.sort_by(|&a, &b| theta(a).partial_cmp(&theta(b)).unwrap());
            }
            rotations.push(nb.into_iter().map(v).collect::<Vec<_>>());
        }
        let outer = [v(apex_b), v(ring(k, 0)), v(ring(k, 1))];
        Triangulation::build(rotations.clone(), outer)
            .or_else(|_| Triangulation::build(rotations, [v(apex_b), v(ring(k, 1)), v(ring(k, 0))]))
            .unwrap()
    }

    /// A random 4-connected instance: scramble, then remove all separating
    /// triangles and replay the sequence.
    fn random_4connected(n: usize, seed: u64) -> Triangulation {
        let mut t = gen_random(n, 10 * n, seed).unwrap();
        let (seq, _) = make_4_connected(&t, false).unwrap();
        seq.replay(&mut t).unwrap();
        assert!(enumerate_separating_triangles(&t).is_empty());
        t
    }

    #[test]
    fn towers_are_4connected_with_the_advertised_degrees() {
        for (s, k) in [(4, 3), (4, 4), (6, 2), (8, 1)] {
            let t = tower(s, k);
            assert_eq!(t.n(), s * (k + 1) + 2);
            assert!(enumerate_separating_triangles(&t).is_empty(), "tower({s}, {k})");
            assert_eq!(t.degree(v(0)), s);
            assert_eq!(t.degree(v(t.n() - 1)), s);
            assert_eq!(t.max_degree(), s.max(6));
        }
    }

    #[test]
    fn whitney_on_a_facial_triangle() {
        let t = octahedron();
        // the face (0, 1, 2) is the inside of the cycle 0-1-2: nothing
        // strictly on that side, so the path just walks the triangle
        let c = [v(0), v(1), v(2)];
        assert_eq!(whitney_path(&t, &c, v(0), v(1), Side::Inside).unwrap(), [v(0), v(2), v(1)]);
        assert_eq!(whitney_path(&t, &c, v(0), v(2), Side::Inside).unwrap(), [v(0), v(1), v(2)]);
    }

    #[test]
    fn whitney_across_the_octahedron_equator() {
        let t = octahedron();
        // the equator 2-4-3-1 has pole 0 on one side and pole 5 on the
        // other; a path from 2 to 3 must weave through the enclosed pole
        let c = [v(2), v(4), v(3), v(1)];
        let sides = cycle_sides(&t, &c);
        assert_eq!(sides.inside_vertices, [v(0)]);
        assert_eq!(sides.outside_vertices, [v(5)]);
        let path = whitney_path(&t, &c, v(2), v(3), Side::Inside).unwrap();
        assert_eq!(path, [v(2), v(1), v(0), v(4), v(3)]);
        verify_whitney_path(&t, &c, v(2), v(3), Side::Inside, &path).unwrap();
        let outer = whitney_path(&t, &c, v(2), v(3), Side::Outside).unwrap();
        verify_whitney_path(&t, &c, v(2), v(3), Side::Outside, &outer).unwrap();
    }

    #[test]
    fn whitney_rejects_a_same_arc_chord() {
        let t = octahedron();
        // neighbour ring of the edge (0, 1): its far side holds the chord
        // (4, 5); splitting at 4 and 5 puts that chord inside one arc
        let c = [v(2), v(4), v(3), v(5)];
        let err = whitney_path(&t, &c, v(4), v(5), Side::Outside).unwrap_err();
        assert_eq!(err, HamiltonianError::HypothesisViolated { chord: e(4, 5) });
        // splitting at 2 and 3 separates the chord's endpoints: fine
        let path = whitney_path(&t, &c, v(2), v(3), Side::Outside).unwrap();
        verify_whitney_path(&t, &c, v(2), v(3), Side::Outside, &path).unwrap();
    }

    #[test]
    fn octahedron_cycle_through_an_edge_is_fully_determined() {
        let t = octahedron();
        let d = hamiltonian_cycle_through(&t, v(0), v(1)).unwrap();
        assert_eq!(d.cycle, [v(2), v(4), v(5), v(3), v(0), v(1)]);
        assert_eq!(d.inside_edges, [e(0, 2), e(0, 4), e(3, 4)].into());
        assert_eq!(d.outside_edges, [e(1, 3), e(1, 5), e(2, 5)].into());
        verify_cycle_decomposition(&t, &d).unwrap();
        verify_side_separation(&t, &d, v(0), v(1)).unwrap();
    }

    #[test]
    fn rejects_triangulations_with_separating_triangles() {
        let t = gen_stacked(8, 11).unwrap();
        let edge = t.edges()[0];
        let (a, b) = edge.endpoints();
        assert_eq!(
            hamiltonian_cycle_through(&t, a, b).unwrap_err(),
            HamiltonianError::NotFourConnected
        );
    }

    #[test]
    fn random_cycles_pass_both_validators() {
        for (n, seed) in [(20, 1u64), (30, 2), (40, 3), (50, 4)] {
            let t = random_4connected(n, seed);
            let mut edges = t.edges();
            edges.sort();
            for &edge in [edges[0], edges[edges.len() / 2], edges[edges.len() - 1]].iter() {
                let (u, w) = edge.endpoints();
                let d = hamiltonian_cycle_through(&t, u, w).unwrap();
                verify_cycle_decomposition(&t, &d).unwrap();
                verify_side_separation(&t, &d, u, w).unwrap();
                let pu = d.cycle.iter().position(|&z| z == u).unwrap();
                let next = d.cycle[(pu + 1) % d.cycle.len()];
                assert_eq!(next, w, "cycle runs … u, v, …");
            }
        }
    }

    #[test]
    fn whitney_paths_validate_on_neighbour_cycles() {
        let t = random_4connected(30, 9);
        let mut edges = t.edges();
        edges.sort();
        let (u, w) = edges[0].endpoints();
        let c = neighbour_cycle(&t, u, w);
        let sides = cycle_sides(&t, &c);
        let side =
            if sides.inside_vertices.contains(&u) { Side::Outside } else { Side::Inside };
        let x = t.apex(u, w);
        let y = t.apex(w, u);
        let path = whitney_path(&t, &c, x, y, side).unwrap();
        verify_whitney_path(&t, &c, x, y, side, &path).unwrap();
        // the far side of the ring holds everything except u and v
        assert_eq!(path.len(), t.n() - 2);
    }

    #[test]
    fn apex_pair_on_small_instances_is_refused() {
        assert_eq!(
            pick_apex_pair(&octahedron()).unwrap_err(),
            HamiltonianError::TooSmall { n: 6, min: 13 }
        );
        let t = random_4connected(12, 5);
        assert_eq!(
            pick_apex_pair(&t).unwrap_err(),
            HamiltonianError::TooSmall { n: 12, min: 13 }
        );
    }

    #[test]
    #[should_panic(expected = "4-connected")]
    fn apex_pair_panics_on_separating_triangles() {
        let _ = pick_apex_pair(&gen_canonical(20).unwrap());
    }

    #[test]
    fn apex_pair_takes_an_adjacent_high_degree_pair_without_flipping() {
        // interior ring vertices of a Δ = 6 tower have degree-6 ring mates
        let t = tower(4, 3);
        let (x, y, prep) = pick_apex_pair(&t).unwrap();
        assert_eq!((x, y), (v(5), v(6)));
        assert!(prep.is_none());
        assert_eq!(t.degree(x), 6);
        assert_eq!(t.degree(y), 6);
    }

    #[test]
    fn apex_pair_flips_towards_a_distant_high_degree_vertex() {
        // both apexes of tower(8, 1) have degree 8 but only degree-5
        // neighbours, forcing the preparatory link flip
        let t = tower(8, 1);
        let (x, y, prep) = pick_apex_pair(&t).unwrap();
        assert_eq!(x, v(0));
        let rec = prep.expect("a flip is needed");
        assert_eq!(rec.inserted, Edge::new(x, y));
        let mut s = t.clone();
        s.flip(rec.removed).unwrap();
        assert!(enumerate_separating_triangles(&s).is_empty());
        assert_eq!(s.degree(x), 9);
        assert!(s.degree(y) >= 6);
        assert!(s.is_edge(x, y));
    }

    #[test]
    fn apex_pair_joins_two_degree_6_vertices_when_the_maximum_is_6() {
        let t = tower(6, 2);
        assert_eq!(t.max_degree(), 6);
        let (x, y, prep) = pick_apex_pair(&t).unwrap();
        let rec = prep.expect("Δ = 6 always flips");
        assert_eq!(t.degree(x), 6);
        assert_eq!(t.degree(y), 6);
        assert_eq!(rec.inserted, Edge::new(x, y));
        let mut s = t.clone();
        s.flip(rec.removed).unwrap();
        assert!(enumerate_separating_triangles(&s).is_empty());
        assert_eq!(s.degree(x), 7);
        assert_eq!(s.degree(y), 7);
    }

    #[test]
    fn apex_pair_post_conditions_hold_on_random_instances() {
        for seed in [21u64, 22, 23] {
            let t = random_4connected(30, seed);
            let delta = t.max_degree();
            let (x, y, prep) = pick_apex_pair(&t).unwrap();
            let mut s = t.clone();
            if let Some(rec) = prep {
                s.flip(rec.removed).unwrap();
                assert!(enumerate_separating_triangles(&s).is_empty());
                assert_eq!(s.degree(x), delta + 1);
            } else {
                assert_eq!(s.degree(x), delta);
            }
            assert!(s.is_edge(x, y));
            assert!(s.degree(y) >= 6);
        }
    }
}
