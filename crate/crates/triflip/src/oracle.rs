//! Brute-force ground truth at small scale.
//!
//! Everything here is deliberately naive: breadth-first search over the
//! flip graph (triangulations up to isomorphism, keyed by canonical code),
//! exact flip distances, the exact minimum number of flips to reach
//! 4-connectivity, an independent vertex-connectivity computation by
//! max-flow, and an exhaustive checker for the structural facts about
//! separating triangles that the production algorithms rely on. The fast
//! paths elsewhere in the crate are tested against these oracles.
//!
//! Flip graphs are connected, so breadth-first search from the double wheel
//! reaches every class; the sizes are kept small by explicit caps that
//! return [`OracleError::TooLarge`] instead of grinding.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::embedding::{CanonicalCode, FlipSequence, Triangulation, VertexId};
use crate::generators::gen_canonical;
use crate::septri::{enumerate_separating_triangles, free_edges_at, ContainmentIndex};

/// Largest `n` for which class enumeration is allowed.
pub const MAX_ENUMERATE: usize = 10;
/// Largest `n` for exact distance queries.
pub const MAX_DISTANCE: usize = 9;
/// Largest `n` for the exhaustive lemma suite.
pub const MAX_LEMMA_SUITE: usize = 8;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("TooLarge: n = {n} exceeds the oracle cap of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("SizeMismatch: triangulations have {n1} and {n2} vertices")]
    SizeMismatch { n1: usize, n2: usize },
    #[error("Unreachable: no triangulation on this vertex count satisfies the goal")]
    Unreachable,
}

/// One concrete representative per isomorphism class on `n` vertices,
/// discovered by breadth-first search in the flip graph from the double
/// wheel. The list is ordered by canonical code.
pub fn enumerate_classes(n: usize) -> Result<Vec<Triangulation>, OracleError> {
    if !(4..=MAX_ENUMERATE).contains(&n) {
        return Err(OracleError::TooLarge { n, max: MAX_ENUMERATE });
    }
    let start = gen_canonical(n).expect("n >= 4");
    let mut seen: HashMap<CanonicalCode, Triangulation> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(start.canonical_code(), start.clone());
    queue.push_back(start);
    while let Some(t) = queue.pop_front() {
        for e in t.edges() {
            if t.is_flippable(e) == Ok(true) {
                let mut next = t.clone();
                next.flip(e).unwrap();
                let code = next.canonical_code();
                if !seen.contains_key(&code) {
                    seen.insert(code, next.clone());
                    queue.push_back(next);
                }
            }
        }
    }
    let mut classes: Vec<(CanonicalCode, Triangulation)> = seen.into_iter().collect();
    classes.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(classes.into_iter().map(|(_, t)| t).collect())
}

/// The canonical codes of all triangulation classes on `n` vertices,
/// sorted. (1, 1, 2, 5, 14, 50, 233 classes for n = 4..10.)
pub fn enumerate_all(n: usize) -> Result<Vec<CanonicalCode>, OracleError> {
    Ok(enumerate_classes(n)?.iter().map(Triangulation::canonical_code).collect())
}

/// Breadth-first search from concrete `start` until `goal` holds for some
/// class; returns a replayable shortest flip sequence (in `start`'s vertex
/// labels). `None` when the search space is exhausted.
fn bfs_path(
    start: &Triangulation,
    mut goal: impl FnMut(&Triangulation) -> bool,
) -> Option<FlipSequence> {
    // per class: the first concrete representative reached, plus the flip
    // sequence (indices into `arena`) that got there
    struct Node {
        t: Triangulation,
        parent: usize,
        via: Option<crate::embedding::FlipRecord>,
    }
    let mut arena: Vec<Node> = Vec::new();
    let mut seen: HashMap<CanonicalCode, usize> = HashMap::new();
    let initial = start.serialize();
    arena.push(Node { t: start.clone(), parent: usize::MAX, via: None });
    seen.insert(start.canonical_code(), 0);
    let mut queue = VecDeque::from([0usize]);
    let unwind = |arena: &Vec<Node>, mut i: usize| {
        let mut records = Vec::new();
        while let Some(rec) = arena[i].via {
            records.push(rec);
            i = arena[i].parent;
        }
        records.reverse();
        FlipSequence { initial: initial.clone(), records }
    };
    if goal(start) {
        return Some(unwind(&arena, 0));
    }
    while let Some(i) = queue.pop_front() {
        let t = arena[i].t.clone();
        for e in t.edges() {
            if t.is_flippable(e) == Ok(true) {
                let mut next = t.clone();
                let rec = next.flip(e).unwrap();
                let code = next.canonical_code();
                if seen.contains_key(&code) {
                    continue;
                }
                let j = arena.len();
                seen.insert(code, j);
                let done = goal(&next);
                arena.push(Node { t: next, parent: i, via: Some(rec) });
                if done {
                    return Some(unwind(&arena, j));
                }
                queue.push_back(j);
            }
        }
    }
    None
}

/// A shortest flip sequence from `t1` to the isomorphism class of `t2`,
/// replayable on `t1`. No size cap beyond available patience; intended for
/// small instances.
pub fn shortest_flip_path(
    t1: &Triangulation,
    t2: &Triangulation,
) -> Result<FlipSequence, OracleError> {
    if t1.n() != t2.n() {
        return Err(OracleError::SizeMismatch { n1: t1.n(), n2: t2.n() });
    }
    let target = t2.canonical_code();
    bfs_path(t1, |t| t.canonical_code() == target).ok_or(OracleError::Unreachable)
}

/// Exact flip distance between the classes of `t1` and `t2` (n ≤ 9).
pub fn exact_flip_distance(t1: &Triangulation, t2: &Triangulation) -> Result<usize, OracleError> {
    if t1.n() != t2.n() {
        return Err(OracleError::SizeMismatch { n1: t1.n(), n2: t2.n() });
    }
    if t1.n() > MAX_DISTANCE {
        return Err(OracleError::TooLarge { n: t1.n(), max: MAX_DISTANCE });
    }
    Ok(shortest_flip_path(t1, t2)?.len())
}

/// Exact minimum number of flips until no separating triangle remains
/// (n ≤ 9). The 5-vertex triangulation is alone in its flip graph and never
/// qualifies: that is [`OracleError::Unreachable`].
pub fn exact_min_flips_to_4connected(t: &Triangulation) -> Result<usize, OracleError> {
    if t.n() > MAX_DISTANCE {
        return Err(OracleError::TooLarge { n: t.n(), max: MAX_DISTANCE });
    }
    bfs_path(t, |x| enumerate_separating_triangles(x).is_empty())
        .map(|seq| seq.len())
        .ok_or(OracleError::Unreachable)
}

/// Unit-capacity max flow (Edmonds–Karp) on a dense capacity matrix.
fn max_flow(cap: &mut [Vec<i32>], s: usize, t: usize) -> usize {
    let n = cap.len();
    let mut flow = 0;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut q = VecDeque::from([s]);
        'bfs: while let Some(u) = q.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    if v == t {
                        break 'bfs;
                    }
                    q.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return flow;
        }
        let mut v = t;
        while v != s {
            let u = parent[v];
            cap[u][v] -= 1;
            cap[v][u] += 1;
            v = u;
        }
        flow += 1;
    }
}

/// Minimum vertex cut, computed independently of any triangulation theory:
/// split every vertex into an in/out pair joined by a unit arc and take the
/// smallest max-flow over all non-adjacent pairs (`n − 1` for complete
/// graphs). For n ≥ 5 the result is ≥ 4 exactly when no separating
/// triangle exists; that equivalence is asserted on every call.
pub fn vertex_connectivity(t: &Triangulation) -> usize {
    let n = t.n();
    let mut best = n - 1; // complete-graph answer; also a valid upper bound
    let inf = n as i32;
    for s in 0..n {
        for d in s + 1..n {
            if t.is_edge(VertexId(s), VertexId(d)) {
                continue;
            }
            // v_in = 2v, v_out = 2v + 1; connectivity paths enter at _in
            let mut cap = vec![vec![0i32; 2 * n]; 2 * n];
            for v in 0..n {
                cap[2 * v][2 * v + 1] = 1;
            }
            for e in t.edges() {
                let (a, b) = e.endpoints();
                cap[2 * a.idx() + 1][2 * b.idx()] = inf;
                cap[2 * b.idx() + 1][2 * a.idx()] = inf;
            }
            best = best.min(max_flow(&mut cap, 2 * s + 1, 2 * d));
        }
    }
    if n >= 5 {
        let no_septri = enumerate_separating_triangles(t).is_empty();
        assert_eq!(
            best >= 4,
            no_septri,
            "connectivity {best} disagrees with the separating-triangle criterion"
        );
    }
    best
}

/// Outcome of [`lemma_suite`]: what was checked and every violation found.
#[derive(Clone, Debug, Default)]
pub struct LemmaReport {
    pub classes: usize,
    pub configurations: usize,
    pub checks: usize,
    pub violations: Vec<String>,
}

impl LemmaReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustively verifies, over every triangulation class on `n ≤ 8`
/// vertices and every choice of outer face, the structural facts underlying
/// the 4-connectivity algorithm:
///
/// 1. a 3-cycle is separating exactly when it is not a face;
/// 2. a contained triangle has a vertex inside its container and none
///    outside;
/// 3. a vertex inside a triangle forces containment;
/// 4. a triangle shares at most one edge with its containers;
/// 5. with no such shared edge, at most one vertex touches a container;
/// 6. with such a shared edge, the opposite vertex touches no container;
/// 7. a triangle containing `A` but not edge-sharing partner `B` uses the
///    shared edge;
/// 8. a triangle on an outer edge is contained only in triangles using
///    that edge;
/// 9. every vertex of a separating triangle has a free edge inside it;
/// 10. (n ≥ 6) flipping a separating triangle's edge is always legal and
///     removes it, and removes *every* triangle on that edge; if the edge
///     was on several triangles, or no edge of the triangle was shared, no
///     new separating triangle appears.
pub fn lemma_suite(n: usize) -> Result<LemmaReport, OracleError> {
    if n > MAX_LEMMA_SUITE {
        return Err(OracleError::TooLarge { n, max: MAX_LEMMA_SUITE });
    }
    let classes = enumerate_classes(n)?;
    let mut report = LemmaReport { classes: classes.len(), ..Default::default() };
    for class in &classes {
        for face in class.faces() {
            let t = class.with_outer(face).expect("faces() yields walk-order orbits");
            report.configurations += 1;
            check_one(&t, &mut report);
        }
    }
    Ok(report)
}

fn note(report: &mut LemmaReport, cond: bool, msg: impl FnOnce() -> String) {
    report.checks += 1;
    if !cond {
        report.violations.push(msg());
    }
}

fn check_one(t: &Triangulation, report: &mut LemmaReport) {
    macro_rules! check {
        ($cond:expr, $($fmt:tt)*) => {
            note(report, $cond, || format!($($fmt)*))
        };
    }
    let ctx = || format!("outer {:?}: ", t.outer_face());
    let index = ContainmentIndex::from_triangulation(t);
    let tris = index.triangles.clone();
    let k = tris.len();

    // 1: facial / separating dichotomy over all 3-cycles
    for u in t.vertices() {
        for v in t.vertices().filter(|&v| v > u && t.is_edge(u, v)) {
            for w in t.vertices().filter(|&w| w > v && t.is_edge(u, w) && t.is_edge(v, w)) {
                let separating = index.position([u, v, w]).is_some();
                check!(
                    t.is_face([u, v, w]) != separating,
                    "{}cycle {u} {v} {w} must be facial xor separating",
                    ctx()
                );
            }
        }
    }

    for d in 0..k {
        let tri = &tris[d];
        // 2: position of a contained triangle relative to its container
        for &a in index.containers(d) {
            let at = &tris[a];
            check!(
                tri.vertices.iter().any(|&x| at.interior_contains(x)),
                "{}no vertex of {:?} inside container {:?}",
                ctx(),
                tri.vertices,
                at.vertices
            );
            check!(
                tri.vertices.iter().all(|&x| at.closure_contains(x)),
                "{}vertex of {:?} outside container {:?}",
                ctx(),
                tri.vertices,
                at.vertices
            );
        }
        // 3: interior vertex forces containment
        for a in 0..k {
            if a != d && tri.vertices.iter().any(|&x| tris[a].interior_contains(x)) {
                check!(
                    index.contains(a, d),
                    "{}{:?} pokes into {:?} without containment",
                    ctx(),
                    tri.vertices,
                    tris[a].vertices
                );
            }
        }
        // 4–6: edge/vertex sharing with containers
        let container_edges: Vec<_> = tri
            .edges()
            .into_iter()
            .filter(|&e| index.containers(d).iter().any(|&a| tris[a].has_edge(e)))
            .collect();
        check!(
            container_edges.len() <= 1,
            "{}{:?} shares {} edges with containers",
            ctx(),
            tri.vertices,
            container_edges.len()
        );
        match container_edges.first() {
            None => {
                let on = tri
                    .vertices
                    .iter()
                    .filter(|&&x| index.containers(d).iter().any(|&a| tris[a].has_vertex(x)))
                    .count();
                check!(
                    on <= 1,
                    "{}{:?} shares {on} vertices with containers",
                    ctx(),
                    tri.vertices
                );
            }
            Some(&e) => {
                let z = tri.vertex_off_edge(e);
                check!(
                    index.containers(d).iter().all(|&a| !tris[a].has_vertex(z)),
                    "{}off-edge vertex {z} of {:?} touches a container",
                    ctx(),
                    tri.vertices
                );
            }
        }
        // 8: triangles on an outer edge are contained only through it
        for e in t.outer_edges() {
            if tri.has_edge(e) {
                for &a in index.containers(d) {
                    check!(
                        tris[a].has_edge(e),
                        "{}container {:?} of outer-edge triangle {:?} avoids {e}",
                        ctx(),
                        tris[a].vertices,
                        tri.vertices
                    );
                }
            }
        }
        // 9: free edges inside at every vertex (free_edges_at panics on violation)
        report.checks += 1;
        free_edges_at(t, tri);
    }

    // 7: containment across an edge-sharing pair goes through the edge
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            let shared = tris[a].edges().into_iter().find(|&e| tris[b].has_edge(e));
            if let Some(e) = shared {
                for c in 0..k {
                    if index.contains(c, a) && !index.contains(c, b) && c != b {
                        check!(
                            tris[c].has_edge(e),
                            "{}{:?} contains {:?} but not {:?} and avoids shared {e}",
                            ctx(),
                            tris[c].vertices,
                            tris[a].vertices,
                            tris[b].vertices
                        );
                    }
                }
            }
        }
    }

    // 10: effect of flipping an edge of a separating triangle
    if t.n() >= 6 {
        let pre: Vec<[VertexId; 3]> = tris.iter().map(|s| s.vertices).collect();
        for d in 0..k {
            for e in tris[d].edges() {
                let on_edge = index.using_edge(e).len();
                let d_shares_none =
                    tris[d].edges().iter().all(|&f| index.using_edge(f).len() == 1);
                check!(
                    t.is_flippable(e) == Ok(true),
                    "{}edge {e} of {:?} is not flippable",
                    ctx(),
                    tris[d].vertices
                );
                let mut flipped = t.clone();
                flipped.flip(e).unwrap();
                let post: Vec<[VertexId; 3]> =
                    enumerate_separating_triangles(&flipped).iter().map(|s| s.vertices).collect();
                check!(
                    !post.contains(&tris[d].vertices),
                    "{}flipping {e} left {:?} separating",
                    ctx(),
                    tris[d].vertices
                );
                for i in index.using_edge(e) {
                    check!(
                        !post.contains(&tris[i].vertices),
                        "{}flipping {e} left co-edge triangle {:?}",
                        ctx(),
                        tris[i].vertices
                    );
                }
                if on_edge >= 2 || d_shares_none {
                    for s in &post {
                        check!(
                            pre.contains(s),
                            "{}safe flip of {e} created new triangle {s:?}",
                            ctx()
                        );
                    }
                }
            }
        }
    }
}
