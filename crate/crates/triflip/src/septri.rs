//! Separating triangles: detection, interiors, containment order, depth,
//! deepest-triangle selection, and free edges.
//!
//! In a triangulation every 3-cycle is either a face or a *separating
//! triangle*: deleting its three vertices splits the graph, with the side
//! containing outer-face vertices called the exterior and the other side the
//! interior. Triangle `A` *contains* `B` when `B`'s interior is a strictly
//! smaller part of `A`'s interior; the number of containers of a triangle is
//! its *depth*. A triangulation is 4-connected precisely when it has no
//! separating triangle (and more than four vertices), so everything the
//! 4-connectivity algorithm does is phrased in terms of the structures
//! computed here.
//!
//! An edge is *free* if it lies on no separating triangle. Every vertex of a
//! separating triangle has at least one free edge leading into the
//! triangle's interior; the coin-auditing story of
//! [`crate::four_connect`] leans on that guarantee, so [`free_edges_at`]
//! asserts it.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::embedding::{Edge, Triangulation, VertexId};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SeptriError {
    #[error("NoSeparatingTriangle: the triangulation is already free of separating triangles")]
    NoSeparatingTriangle,
}

/// A non-facial 3-cycle together with the vertex set strictly inside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatingTriangle {
    /// The triple, sorted ascending.
    pub vertices: [VertexId; 3],
    /// Vertices strictly inside: the side of the cycle away from the outer
    /// face. Always nonempty.
    pub interior: FixedBitSet,
}

impl SeparatingTriangle {
    /// The three edges of the triple, in lexicographic order.
    pub fn edges(&self) -> [Edge; 3] {
        let [a, b, c] = self.vertices;
        [Edge::new(a, b), Edge::new(a, c), Edge::new(b, c)]
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        let (u, v) = e.endpoints();
        self.has_vertex(u) && self.has_vertex(v)
    }

    pub fn interior_contains(&self, v: VertexId) -> bool {
        self.interior.contains(v.idx())
    }

    pub fn interior_size(&self) -> usize {
        self.interior.count_ones(..)
    }

    /// Triple vertices plus interior.
    pub fn closure_contains(&self, v: VertexId) -> bool {
        self.has_vertex(v) || self.interior_contains(v)
    }

    /// The vertex of the triple that is not on `e`.
    pub fn vertex_off_edge(&self, e: Edge) -> VertexId {
        debug_assert!(self.has_edge(e));
        *self
            .vertices
            .iter()
            .find(|&&v| !e.has_endpoint(v))
            .expect("a triangle edge leaves one vertex uncovered")
    }

    /// Does the triple use an edge of the current outer face?
    pub fn uses_outer_edge(&self, t: &Triangulation) -> bool {
        t.outer_edges().iter().any(|&e| self.has_edge(e))
    }
}

/// Vertices strictly inside the 3-cycle `triple`: delete the triple and
/// flood from an outer-face vertex off the triple; whatever is not reached
/// is the interior. (The outer face always has such a vertex because the
/// triple, being non-facial, cannot equal the outer face.)
fn interior_of(t: &Triangulation, triple: [VertexId; 3]) -> FixedBitSet {
    let n = t.n();
    let mut reached = FixedBitSet::with_capacity(n);
    for v in triple {
        reached.insert(v.idx()); // treat the triple as already visited
    }
    let start = t
        .outer_face()
        .into_iter()
        .find(|v| !triple.contains(v))
        .expect("outer face is never a separating triple");
    let mut stack = vec![start];
    reached.insert(start.idx());
    while let Some(v) = stack.pop() {
        for &w in t.neighbors(v) {
            if !reached.contains(w.idx()) {
                reached.insert(w.idx());
                stack.push(w);
            }
        }
    }
    let mut interior = FixedBitSet::with_capacity(n);
    for v in 0..n {
        if !reached.contains(v) {
            interior.insert(v);
        }
    }
    interior
}

/// All separating triangles, sorted by vertex triple.
///
/// Every 3-cycle of a triangulation is either one of the `2n − 4` faces or
/// separating, so it suffices to enumerate triangles (via common neighbours
/// of each edge) and drop the facial ones.
pub fn enumerate_separating_triangles(t: &Triangulation) -> Vec<SeparatingTriangle> {
    let mut out = Vec::new();
    for e in t.edges() {
        let (u, v) = e.endpoints();
        for &w in t.neighbors(u) {
            // each sorted triple u < v < w exactly once
            if w > v && t.is_edge(v, w) && !t.is_face([u, v, w]) {
                let triple = [u, v, w];
                let interior = interior_of(t, triple);
                debug_assert!(interior.count_ones(..) > 0, "non-facial 3-cycle must separate");
                out.push(SeparatingTriangle { vertices: triple, interior });
            }
        }
    }
    out.sort_by_key(|s| s.vertices);
    out
}

/// The strict containment order over a triangulation's separating triangles.
#[derive(Clone, Debug)]
pub struct ContainmentIndex {
    pub triangles: Vec<SeparatingTriangle>,
    /// containers[i] = indices of the triangles strictly containing triangle i.
    containers: Vec<Vec<usize>>,
}

/// Does `a` strictly contain `b`? Characterised by vertex membership:
/// `b`'s triple lies in `a`'s triple-plus-interior and `b`'s interior is
/// strictly smaller.
fn contains_triangle(a: &SeparatingTriangle, b: &SeparatingTriangle) -> bool {
    b.vertices.iter().all(|&v| a.closure_contains(v)) && b.interior_size() < a.interior_size()
}

pub fn build_containment_index(
    t: &Triangulation,
    triangles: Vec<SeparatingTriangle>,
) -> ContainmentIndex {
    let _ = t; // the relation is fully determined by the precomputed interiors
    let k = triangles.len();
    let mut containers = vec![Vec::new(); k];
    for b in 0..k {
        for a in 0..k {
            if a != b && contains_triangle(&triangles[a], &triangles[b]) {
                containers[b].push(a);
            }
        }
    }
    let index = ContainmentIndex { triangles, containers };
    debug_assert!(index.verify_partial_order());
    index
}

impl ContainmentIndex {
    pub fn from_triangulation(t: &Triangulation) -> ContainmentIndex {
        build_containment_index(t, enumerate_separating_triangles(t))
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Does triangle `a` strictly contain triangle `b` (by index)?
    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.containers[b].contains(&a)
    }

    /// Indices of the triangles strictly containing `i`, ascending.
    pub fn containers(&self, i: usize) -> &[usize] {
        &self.containers[i]
    }

    pub fn depth(&self, i: usize) -> usize {
        self.containers[i].len()
    }

    pub fn triangle(&self, i: usize) -> &SeparatingTriangle {
        &self.triangles[i]
    }

    pub fn position(&self, triple: [VertexId; 3]) -> Option<usize> {
        let mut key = triple;
        key.sort();
        self.triangles.binary_search_by_key(&key, |s| s.vertices).ok()
    }

    /// Indices of triangles whose triple uses edge `e`, ascending.
    pub fn using_edge(&self, e: Edge) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.triangles[i].has_edge(e)).collect()
    }

    /// Index of the triangle of maximum depth; among those, triangles that
    /// avoid outer-face edges are preferred, and remaining ties go to the
    /// smallest vertex triple.
    pub fn deepest(&self, t: &Triangulation) -> Option<usize> {
        (0..self.len()).min_by_key(|&i| {
            (
                std::cmp::Reverse(self.depth(i)),
                self.triangles[i].uses_outer_edge(t),
                self.triangles[i].vertices,
            )
        })
    }

    fn verify_partial_order(&self) -> bool {
        let k = self.len();
        for a in 0..k {
            assert!(!self.contains(a, a), "containment must be irreflexive");
            for b in 0..k {
                if self.contains(a, b) {
                    assert!(!self.contains(b, a), "containment must be antisymmetric");
                    assert!(
                        self.depth(b) >= self.depth(a) + 1,
                        "depth must grow along containment"
                    );
                    for c in 0..k {
                        if self.contains(b, c) {
                            assert!(self.contains(a, c), "containment must be transitive");
                        }
                    }
                }
            }
        }
        true
    }
}

/// See [`ContainmentIndex::deepest`]; errors when there is nothing to find.
pub fn deepest_triangle<'a>(
    t: &Triangulation,
    index: &'a ContainmentIndex,
) -> Result<&'a SeparatingTriangle, SeptriError> {
    index
        .deepest(t)
        .map(|i| &index.triangles[i])
        .ok_or(SeptriError::NoSeparatingTriangle)
}

/// Is `e` on no separating triangle? Local test: every triangle through an
/// edge is spanned by a common neighbour of its endpoints, so `e` is free
/// iff each such triangle is a face.
pub fn is_free_edge(t: &Triangulation, e: Edge) -> bool {
    let (u, v) = e.endpoints();
    t.neighbors(u)
        .iter()
        .all(|&w| !t.is_edge(v, w) || t.is_face([u, v, w]))
}

/// For each vertex `v` of `D`: the free edges from `v` into `D`'s interior,
/// sorted. Each of the three sets is guaranteed nonempty; this function
/// asserts that rather than making callers cope with an impossibility.
pub fn free_edges_at(
    t: &Triangulation,
    d: &SeparatingTriangle,
) -> BTreeMap<VertexId, Vec<Edge>> {
    let mut map = BTreeMap::new();
    for &v in &d.vertices {
        let mut edges: Vec<Edge> = t
            .neighbors(v)
            .iter()
            .filter(|&&x| d.interior_contains(x))
            .map(|&x| Edge::new(v, x))
            .filter(|&e| is_free_edge(t, e))
            .collect();
        edges.sort();
        assert!(
            !edges.is_empty(),
            "vertex {v} of separating triangle {:?} has no free edge inside",
            d.vertices
        );
        map.insert(v, edges);
    }
    map
}

/// How one edge of a profiled triangle is shared with other triangles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedEdge {
    pub edge: Edge,
    /// Triangles using this edge that contain the profiled triangle.
    pub containing: Vec<usize>,
    /// Triangles using this edge that do not contain it.
    pub non_containing: Vec<usize>,
}

impl SharedEdge {
    pub fn is_shared(&self) -> bool {
        !self.containing.is_empty() || !self.non_containing.is_empty()
    }
}

/// Classification of the three edges of triangle `d` (an index into
/// `index.triangles`).
#[derive(Clone, Debug)]
pub struct EdgeProfile {
    pub triangle: usize,
    /// One entry per edge of the triple, in lexicographic edge order.
    pub edges: [SharedEdge; 3],
}

impl EdgeProfile {
    /// The edges shared with at least one other separating triangle.
    pub fn shared_edges(&self) -> Vec<Edge> {
        self.edges.iter().filter(|s| s.is_shared()).map(|s| s.edge).collect()
    }

    /// The edge shared with a containing triangle, if any. At most one edge
    /// qualifies (asserted in [`shared_edge_profile`]).
    pub fn containing_edge(&self) -> Option<Edge> {
        self.edges.iter().find(|s| !s.containing.is_empty()).map(|s| s.edge)
    }
}

/// Profiles how `d`'s edges are shared, tagging each sharer as containing
/// or non-containing. Asserts that at most one edge of `d` is shared with
/// containing triangles — a structural guarantee of triangulations that the
/// flip-selection logic relies on.
pub fn shared_edge_profile(
    t: &Triangulation,
    index: &ContainmentIndex,
    d: usize,
) -> EdgeProfile {
    let _ = t;
    let tri = &index.triangles[d];
    let edges = tri.edges().map(|edge| {
        let mut containing = Vec::new();
        let mut non_containing = Vec::new();
        for other in index.using_edge(edge) {
            if other == d {
                continue;
            }
            if index.contains(other, d) {
                containing.push(other);
            } else {
                non_containing.push(other);
            }
        }
        SharedEdge { edge, containing, non_containing }
    });
    let profile = EdgeProfile { triangle: d, edges };
    let with_containing =
        profile.edges.iter().filter(|s| !s.containing.is_empty()).count();
    assert!(
        with_containing <= 1,
        "triangle {:?} shares {with_containing} edges with containing triangles",
        tri.vertices
    );
    profile
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_canonical, gen_sierpinski, gen_stacked};

    fn v(i: usize) -> VertexId {
        VertexId(i)
    }

    fn triple(a: usize, b: usize, c: usize) -> [VertexId; 3] {
        [v(a), v(b), v(c)]
    }

    fn interiors(t: &Triangulation) -> Vec<([VertexId; 3], Vec<usize>)> {
        enumerate_separating_triangles(t)
            .iter()
            .map(|s| (s.vertices, s.interior.ones().collect()))
            .collect()
    }

    #[test]
    fn octahedron_has_none() {
        // flipping the hub edge of the 6-vertex double wheel yields the
        // octahedron: all degrees 4, no separating triangles
        let mut t = gen_canonical(6).unwrap();
        t.flip(Edge::new(v(0), v(1))).unwrap();
        assert_eq!(t.max_degree(), 4);
        assert!(enumerate_separating_triangles(&t).is_empty());
    }

    #[test]
    fn double_wheel_chain() {
        let n = 10;
        let t = gen_canonical(n).unwrap();
        let found = interiors(&t);
        // triples {0, 1, r} for the interior rim vertices, interior = the
        // rim tail past r
        let expected: Vec<([VertexId; 3], Vec<usize>)> =
            (3..=n - 2).map(|r| (triple(0, 1, r), (r + 1..n).collect())).collect();
        assert_eq!(found, expected);

        let index = ContainmentIndex::from_triangulation(&t);
        assert_eq!(index.len(), n - 4);
        // {0, 1, 3} ⊃ {0, 1, 4} ⊃ ... ⊃ {0, 1, n−2}
        for i in 0..index.len() {
            assert_eq!(index.depth(i), i);
            for j in 0..index.len() {
                assert_eq!(index.contains(i, j), i < j);
            }
        }
        let deepest = deepest_triangle(&t, &index).unwrap();
        assert_eq!(deepest.vertices, triple(0, 1, n - 2));
    }

    #[test]
    fn sierpinski_depth_1_structure() {
        let t = gen_sierpinski(1, 0).unwrap();
        let tris = enumerate_separating_triangles(&t);
        assert_eq!(tris.len(), 4);
        let triples: Vec<_> = tris.iter().map(|s| s.vertices).collect();
        assert_eq!(
            triples,
            vec![triple(0, 1, 2), triple(0, 4, 5), triple(1, 3, 5), triple(2, 3, 4)]
        );
        // the subdivided outer triangle holds everything interior
        assert_eq!(tris[0].interior_size(), 6);
        for s in &tris[1..] {
            assert_eq!(s.interior_size(), 1, "stacked corners hold one vertex");
        }

        let index = build_containment_index(&t, tris);
        let depths: Vec<_> = (0..4).map(|i| index.depth(i)).collect();
        assert_eq!(depths, vec![0, 1, 1, 1]);
        assert_eq!(
            deepest_triangle(&t, &index).unwrap().vertices,
            triple(0, 4, 5),
            "lexicographic tie-break among the three depth-1 corners"
        );
        // the family is pairwise edge-disjoint
        for a in 0..4 {
            for b in a + 1..4 {
                for e in index.triangles[a].edges() {
                    assert!(!index.triangles[b].has_edge(e), "{a} and {b} share {e}");
                }
            }
        }
    }

    #[test]
    fn sierpinski_depth_2_counts() {
        let t = gen_sierpinski(2, 0).unwrap();
        let index = ContainmentIndex::from_triangulation(&t);
        assert_eq!(index.len(), 13);
        let mut by_depth = [0usize; 3];
        for i in 0..index.len() {
            by_depth[index.depth(i)] += 1;
        }
        assert_eq!(by_depth, [1, 3, 9]);
    }

    #[test]
    fn free_edges_go_to_stacked_vertices() {
        // double wheel + one vertex stacked into the face {0, 2, 3}
        let mut t = gen_canonical(5).unwrap();
        t.insert_vertex_in_face([v(0), v(3), v(2)]);
        let tris = enumerate_separating_triangles(&t);
        assert_eq!(tris.len(), 2); // {0, 1, 3} and the new {0, 2, 3}
        for d in &tris {
            let free = free_edges_at(&t, d);
            for (vtx, edges) in &free {
                assert!(!edges.is_empty());
                for e in edges {
                    assert!(is_free_edge(&t, *e));
                    assert!(e.has_endpoint(*vtx));
                    assert!(d.interior_contains(e.other(*vtx)));
                }
            }
        }
        // {0, 2, 3} has one interior vertex 5: all three spokes are free
        let d = tris.iter().find(|s| s.vertices == triple(0, 2, 3)).unwrap();
        let free = free_edges_at(&t, d);
        assert_eq!(free[&v(0)], vec![Edge::new(v(0), v(5))]);
        assert_eq!(free[&v(2)], vec![Edge::new(v(2), v(5))]);
        assert_eq!(free[&v(3)], vec![Edge::new(v(3), v(5))]);
    }

    #[test]
    fn profile_tags_non_containing_sharer() {
        // stack into two faces sharing the edge (2, 3)
        let mut t = gen_canonical(5).unwrap();
        t.insert_vertex_in_face([v(0), v(3), v(2)]);
        t.insert_vertex_in_face([v(1), v(2), v(3)]);
        // triangles, sorted: {0,1,3} (the wheel's own), {0,2,3}, {1,2,3}
        let index = ContainmentIndex::from_triangulation(&t);
        let w = index.position(triple(0, 1, 3)).unwrap();
        let a = index.position(triple(0, 2, 3)).unwrap();
        let b = index.position(triple(1, 2, 3)).unwrap();
        assert!(!index.contains(a, b) && !index.contains(b, a));
        let profile = shared_edge_profile(&t, &index, a);
        // edges of {0,2,3} in order: (0,2) unshared, (0,3) shared with the
        // wheel triangle, (2,3) shared with the sibling stack
        assert!(!profile.edges[0].is_shared());
        assert_eq!(profile.edges[1].non_containing, vec![w]);
        assert_eq!(profile.edges[2].non_containing, vec![b]);
        assert!(profile.edges.iter().all(|s| s.containing.is_empty()));
        assert_eq!(profile.containing_edge(), None);
        assert_eq!(
            profile.shared_edges(),
            vec![Edge::new(v(0), v(3)), Edge::new(v(2), v(3))]
        );
    }

    #[test]
    fn profile_tags_containing_sharer() {
        // stack s1 = 5 into {0, 2, 3}, then s2 = 6 into the face {0, 2, 5}:
        // D = {0, 2, 5} sits inside A = {0, 2, 3} and shares the edge (0, 2)
        let mut t = gen_canonical(5).unwrap();
        t.insert_vertex_in_face([v(0), v(3), v(2)]);
        let f = t
            .faces()
            .into_iter()
            .find(|f| f.contains(&v(0)) && f.contains(&v(2)) && f.contains(&v(5)))
            .unwrap();
        t.insert_vertex_in_face(f);
        let index = ContainmentIndex::from_triangulation(&t);
        let a = index.position(triple(0, 2, 3)).unwrap();
        let d = index.position(triple(0, 2, 5)).unwrap();
        assert!(index.contains(a, d));
        assert_eq!(index.depth(d), 1);
        let profile = shared_edge_profile(&t, &index, d);
        assert_eq!(profile.containing_edge(), Some(Edge::new(v(0), v(2))));
        let deepest = deepest_triangle(&t, &index).unwrap();
        assert_eq!(deepest.vertices, triple(0, 2, 5));
    }

    #[test]
    fn deepest_prefers_triangles_off_the_outer_face() {
        // double wheel on 6 vertices: triangles {0,1,3} ⊃ {0,1,4}, both using
        // the outer edge (0,1) — preference cannot avoid the outer face, and
        // depth dominates anyway
        let t = gen_canonical(6).unwrap();
        let index = ContainmentIndex::from_triangulation(&t);
        let d = deepest_triangle(&t, &index).unwrap();
        assert!(d.uses_outer_edge(&t));
        assert_eq!(d.vertices, triple(0, 1, 4));

        // two sibling triangles at depth 1 inside the 5-wheel's own {0,1,3}:
        // {0,1,4} touches the outer face, {0,3,4} does not; the preference
        // overrides the {0,1,4} lexicographic advantage
        let mut t2 = gen_canonical(5).unwrap();
        for want in [[0, 3, 4], [0, 1, 4]] {
            let f = t2
                .faces()
                .into_iter()
                .find(|f| want.iter().all(|&x| f.contains(&v(x))))
                .unwrap();
            t2.insert_vertex_in_face(f);
        }
        let index2 = ContainmentIndex::from_triangulation(&t2);
        assert_eq!(index2.len(), 3);
        let depths: Vec<_> = (0..3).map(|i| index2.depth(i)).collect();
        assert_eq!(depths, vec![0, 1, 1]); // {0,1,3} then {0,1,4}, {0,3,4}
        let d2 = deepest_triangle(&t2, &index2).unwrap();
        assert!(!d2.uses_outer_edge(&t2));
        assert_eq!(d2.vertices, triple(0, 3, 4));
    }

    #[test]
    fn no_triangles_means_error() {
        // the 4-connected octahedron: built via a flip away from the wheel
        let mut t = gen_canonical(6).unwrap();
        t.flip(Edge::new(v(0), v(1))).unwrap();
        let index = ContainmentIndex::from_triangulation(&t);
        assert!(index.is_empty());
        assert_eq!(
            deepest_triangle(&t, &index).unwrap_err(),
            SeptriError::NoSeparatingTriangle
        );
    }

    #[test]
    fn structural_lemmas_on_random_stacked_instances() {
        for seed in 0..8 {
            let t = gen_stacked(14, seed).unwrap();
            let index = ContainmentIndex::from_triangulation(&t);
            let k = index.len();
            assert!(k >= 1, "stacked instances always carry separating triangles");
            for d in 0..k {
                let tri = index.triangle(d);
                // vertices of a contained triangle never lie in the exterior
                for &a in index.containers(d) {
                    let at = index.triangle(a);
                    let inside =
                        tri.vertices.iter().filter(|&&x| at.interior_contains(x)).count();
                    assert!(inside >= 1, "a contained triangle reaches into the interior");
                    for &x in &tri.vertices {
                        assert!(at.closure_contains(x), "no vertex may fall outside");
                    }
                }
                // a vertex in the interior of A forces containment
                for a in 0..k {
                    if a == d {
                        continue;
                    }
                    let at = index.triangle(a);
                    if tri.vertices.iter().any(|&x| at.interior_contains(x)) {
                        assert!(index.contains(a, d));
                    }
                }
                let profile = shared_edge_profile(&t, &index, d); // asserts ≤ 1 containing edge
                match profile.containing_edge() {
                    Some(e) => {
                        // ... and the vertex off that edge touches no container
                        let z = tri.vertex_off_edge(e);
                        for &a in index.containers(d) {
                            assert!(!index.triangle(a).has_vertex(z));
                        }
                    }
                    None => {
                        // no containing edge: at most one vertex on containers
                        let on: Vec<_> = tri
                            .vertices
                            .iter()
                            .filter(|&&x| {
                                index.containers(d).iter().any(|&a| index.triangle(a).has_vertex(x))
                            })
                            .collect();
                        assert!(on.len() <= 1);
                    }
                }
                // free-edge guarantee at every vertex
                free_edges_at(&t, tri);
            }
        }
    }
}
