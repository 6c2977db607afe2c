//! Combinatorial triangulations as rotation systems, and the edge flip.
//!
//! A triangulation on `n ≥ 4` vertices is stored as one clockwise neighbour
//! cycle per vertex plus a designated outer face. Faces are never stored;
//! they are walked on demand using a fixed convention:
//!
//! > from the directed edge `(u → v)`, the next directed edge of the same
//! > face is `(v → w)` where `w` is the neighbour immediately clockwise
//! > after `u` in `v`'s rotation.
//!
//! With clockwise rotations this walk traverses every face once per incident
//! directed edge, and a rotation system is accepted iff every walk closes
//! after exactly three steps and the edge count is `3n − 6`. By Euler's
//! formula those two checks together force genus zero, so validity really
//! does mean "triangulation of the sphere". All other modules build on this
//! one and may assume validity.
//!
//! Flipping an edge `(a, b)` replaces it by the opposite diagonal `(c, d)`
//! of the quadrilateral formed by the two incident faces `(a, b, c)` and
//! `(b, a, d)`; the flip is legal iff `c` and `d` are not already adjacent.
//! When the flipped edge lies on the outer face, the outer face moves to the
//! new face `(x, c, d)` where `x` is the smaller endpoint of the removed
//! edge — an arbitrary but fixed choice that keeps flip logs replayable.

use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

/// Index of a vertex; valid ids are `0 .. n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Undirected edge, stored with the smaller endpoint first so that edges
/// order lexicographically and deterministic tie-breaks are just `min`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(VertexId, VertexId);

impl Edge {
    pub fn new(u: VertexId, v: VertexId) -> Edge {
        debug_assert_ne!(u, v, "no loops");
        if u < v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    #[inline]
    pub fn endpoints(self) -> (VertexId, VertexId) {
        (self.0, self.1)
    }

    pub fn has_endpoint(self, v: VertexId) -> bool {
        self.0 == v || self.1 == v
    }

    /// The endpoint that is not `v`. Panics if `v` is not an endpoint.
    pub fn other(self, v: VertexId) -> VertexId {
        if self.0 == v {
            self.1
        } else {
            assert_eq!(self.1, v, "vertex {v} not on edge {self}");
            self.0
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.0, self.1)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("TooSmall: a triangulation needs at least 4 vertices, got {0}")]
    TooSmall(usize),
    #[error("NonSimple: vertex {0} has a loop or repeated neighbour")]
    NonSimple(VertexId),
    #[error("AsymmetricAdjacency: {0} lists {1} as neighbour but not vice versa")]
    AsymmetricAdjacency(VertexId, VertexId),
    #[error("WrongEdgeCount: expected {expected} edges for n = {n}, found {found}")]
    WrongEdgeCount { n: usize, expected: usize, found: usize },
    #[error("NonTriangularFace: the face walk from ({0} -> {1}) does not close after 3 steps")]
    NonTriangularFace(VertexId, VertexId),
    #[error("BadOuterFace: ({0}, {1}, {2}) is not a face orbit in walk order")]
    BadOuterFace(VertexId, VertexId, VertexId),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FlipError {
    #[error("NotAnEdge: {0} is not an edge of the triangulation")]
    NotAnEdge(Edge),
    #[error("IllegalFlip: the apexes of {0} are already adjacent")]
    IllegalFlip(Edge),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("SyntaxError: line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Invalid(#[from] BuildError),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("replay start does not match the sequence's initial code")]
    WrongStart,
    #[error("replay step {step}: {source}")]
    Illegal { step: usize, source: FlipError },
    #[error("replay step {step}: recorded {expected}, flip produced {found}")]
    Mismatch { step: usize, expected: String, found: String },
}

/// One executed flip: enough to replay it and to invert it.
///
/// `removed` and `inserted` are the two diagonals of one quadrilateral.
/// `new_outer` is present exactly when the flip touched the outer face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlipRecord {
    pub removed: Edge,
    pub inserted: Edge,
    pub new_outer: Option<[VertexId; 3]>,
}

impl fmt::Display for FlipRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "flip {} -> {}", self.removed, self.inserted)?;
        if let Some([a, b, c]) = self.new_outer {
            write!(f, " outer {a} {b} {c}")?;
        }
        Ok(())
    }
}

impl FlipRecord {
    /// Parses a line in the format produced by `Display`.
    pub fn parse_line(line: &str) -> Result<FlipRecord, String> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map(VertexId).map_err(|e| e.to_string());
        match toks.as_slice() {
            ["flip", a, b, "->", c, d] => Ok(FlipRecord {
                removed: Edge::new(num(a)?, num(b)?),
                inserted: Edge::new(num(c)?, num(d)?),
                new_outer: None,
            }),
            ["flip", a, b, "->", c, d, "outer", x, y, z] => Ok(FlipRecord {
                removed: Edge::new(num(a)?, num(b)?),
                inserted: Edge::new(num(c)?, num(d)?),
                new_outer: Some([num(x)?, num(y)?, num(z)?]),
            }),
            _ => Err(format!("not a flip record: {line:?}")),
        }
    }
}

/// A replayable sequence of flips, anchored to the serialized form of the
/// triangulation it starts from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlipSequence {
    /// The [`Triangulation::serialize`] text of the starting triangulation.
    /// [`FlipSequence::replay`] refuses any other starting point: the
    /// records name concrete vertex labels, so even a relabelled copy of
    /// the same triangulation would misapply them.
    pub initial: String,
    pub records: Vec<FlipRecord>,
}

impl FlipSequence {
    pub fn new(start: &Triangulation) -> FlipSequence {
        FlipSequence { initial: start.serialize(), records: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Applies every record to `t` in order, checking each against what the
    /// flip actually produced.
    pub fn replay(&self, t: &mut Triangulation) -> Result<(), ReplayError> {
        if t.serialize() != self.initial {
            return Err(ReplayError::WrongStart);
        }
        for (step, rec) in self.records.iter().enumerate() {
            let got = t
                .flip(rec.removed)
                .map_err(|source| ReplayError::Illegal { step, source })?;
            if got != *rec {
                return Err(ReplayError::Mismatch {
                    step,
                    expected: rec.to_string(),
                    found: got.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Renders the sequence as a flip log, one record per line.
    pub fn to_log(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        s
    }
}

/// Label- and reflection-invariant identifier of a triangulation.
///
/// Two triangulations get equal codes iff they are isomorphic as graphs:
/// triangulations are 3-connected, so by Whitney's theorem the graph
/// determines the embedding up to reflection and choice of outer face, and
/// the code minimises over all starting edges and both orientations while
/// ignoring the outer face.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(Vec<u8>);

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

const CODE_SEP: u16 = u16::MAX;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Orient {
    Cw,
    Ccw,
}

/// A triangulation of the sphere with a designated outer face.
///
/// The struct cannot be constructed in an invalid state: [`Triangulation::build`]
/// validates everything and mutation is only possible through [`flip`]
/// (and crate-internal helpers), each of which preserves validity.
///
/// [`flip`]: Triangulation::flip
#[derive(Clone, Debug)]
pub struct Triangulation {
    /// Clockwise neighbour cycle per vertex.
    rotations: Vec<Vec<VertexId>>,
    /// Outer face as a walk-order orbit, rotated so the smallest id is first.
    outer: [VertexId; 3],
    /// Adjacency rows, kept in sync with `rotations`.
    adj: Vec<FixedBitSet>,
}

impl Triangulation {
    /// Validates a rotation system and outer-face choice.
    pub fn build(
        rotations: Vec<Vec<VertexId>>,
        outer: [VertexId; 3],
    ) -> Result<Triangulation, BuildError> {
        let n = rotations.len();
        if n < 4 {
            return Err(BuildError::TooSmall(n));
        }
        let mut adj = vec![FixedBitSet::with_capacity(n); n];
        let mut degree_sum = 0usize;
        for (u, rot) in rotations.iter().enumerate() {
            let u = VertexId(u);
            for &v in rot {
                if v == u || v.idx() >= n || adj[u.idx()].contains(v.idx()) {
                    return Err(BuildError::NonSimple(u));
                }
                adj[u.idx()].insert(v.idx());
            }
            degree_sum += rot.len();
        }
        for u in 0..n {
            for v in adj[u].ones() {
                if !adj[v].contains(u) {
                    return Err(BuildError::AsymmetricAdjacency(VertexId(u), VertexId(v)));
                }
            }
        }
        let expected = 3 * n - 6;
        if degree_sum != 2 * expected {
            return Err(BuildError::WrongEdgeCount { n, expected, found: degree_sum / 2 });
        }
        let t = Triangulation { rotations, outer, adj };
        t.check_faces()?;
        let mut t = t;
        t.outer = t.normalize_outer(outer)?;
        Ok(t)
    }

    /// Every directed edge must lie on a closed 3-step face walk.
    fn check_faces(&self) -> Result<(), BuildError> {
        for u in 0..self.n() {
            let u = VertexId(u);
            for &v in &self.rotations[u.idx()] {
                let w = self.apex(u, v);
                if w == u || w == v {
                    return Err(BuildError::NonTriangularFace(u, v));
                }
                // walk (u -> v) -> (v -> w) -> (w -> ?) must return to u, and
                // the step after that must bring back v.
                if self.apex(v, w) != u || self.apex(w, u) != v {
                    return Err(BuildError::NonTriangularFace(u, v));
                }
            }
        }
        Ok(())
    }

    /// Checks that `[a, b, c]` is a face orbit in walk order and returns it
    /// rotated so the smallest vertex comes first.
    fn normalize_outer(&self, f: [VertexId; 3]) -> Result<[VertexId; 3], BuildError> {
        let [a, b, c] = f;
        let distinct = a != b && b != c && a != c;
        if !distinct
            || f.iter().any(|x| x.idx() >= self.n())
            || !self.is_edge(a, b)
            || self.apex(a, b) != c
        {
            return Err(BuildError::BadOuterFace(a, b, c));
        }
        let mut orbit = f;
        while !(orbit[0] < orbit[1] && orbit[0] < orbit[2]) {
            orbit.rotate_left(1);
        }
        Ok(orbit)
    }

    /// Returns a copy with a different outer face (same rotation system).
    pub fn with_outer(&self, f: [VertexId; 3]) -> Result<Triangulation, BuildError> {
        let mut t = self.clone();
        t.outer = self.normalize_outer(f)?;
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.rotations.len()
    }

    /// Edge count; always `3n − 6`.
    pub fn m(&self) -> usize {
        3 * self.n() - 6
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.rotations[v.idx()].len()
    }

    pub fn max_degree(&self) -> usize {
        self.rotations.iter().map(Vec::len).max().unwrap()
    }

    /// Clockwise neighbour cycle of `v`.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.rotations[v.idx()]
    }

    pub fn is_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u.idx()].contains(v.idx())
    }

    pub fn outer_face(&self) -> [VertexId; 3] {
        self.outer
    }

    /// The three outer-face edges.
    pub fn outer_edges(&self) -> [Edge; 3] {
        let [a, b, c] = self.outer;
        [Edge::new(a, b), Edge::new(b, c), Edge::new(c, a)]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n()).map(VertexId)
    }

    /// All edges in lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.m());
        for u in 0..self.n() {
            for v in self.adj[u].ones() {
                if u < v {
                    out.push(Edge(VertexId(u), VertexId(v)));
                }
            }
        }
        out
    }

    /// Position of `x` in `v`'s rotation.
    fn pos(&self, v: VertexId, x: VertexId) -> usize {
        self.rotations[v.idx()]
            .iter()
            .position(|&y| y == x)
            .unwrap_or_else(|| panic!("{x} not a neighbour of {v}"))
    }

    /// Neighbour immediately clockwise after `x` in `v`'s rotation.
    pub fn next_in_rotation(&self, v: VertexId, x: VertexId) -> VertexId {
        let rot = &self.rotations[v.idx()];
        rot[(self.pos(v, x) + 1) % rot.len()]
    }

    /// Neighbour immediately counter-clockwise after `x` in `v`'s rotation.
    pub fn prev_in_rotation(&self, v: VertexId, x: VertexId) -> VertexId {
        let rot = &self.rotations[v.idx()];
        rot[(self.pos(v, x) + rot.len() - 1) % rot.len()]
    }

    /// Apex of the face on the walk side of directed edge `(u → v)`:
    /// the face is `(u, v, apex(u, v))`.
    pub fn apex(&self, u: VertexId, v: VertexId) -> VertexId {
        self.next_in_rotation(v, u)
    }

    /// The two apexes of undirected edge `e = (a, b)` with `a < b`:
    /// first the apex of `(a → b)`, then the apex of `(b → a)`.
    pub fn apexes(&self, e: Edge) -> (VertexId, VertexId) {
        let (a, b) = e.endpoints();
        (self.apex(a, b), self.apex(b, a))
    }

    /// Face orbit of directed edge `(u → v)` in walk order.
    pub fn face_of(&self, u: VertexId, v: VertexId) -> [VertexId; 3] {
        [u, v, self.apex(u, v)]
    }

    /// Is the vertex set `{a, b, c}` a face? In a triangulation a 3-cycle is
    /// a face iff the third vertex is an apex of one of its edges.
    pub fn is_face(&self, mut t: [VertexId; 3]) -> bool {
        t.sort();
        let [a, b, c] = t;
        self.is_edge(a, b) && (self.apex(a, b) == c || self.apex(b, a) == c)
    }

    /// All `2n − 4` faces, each as a walk-order orbit rotated to its smallest
    /// vertex, sorted lexicographically.
    pub fn faces(&self) -> Vec<[VertexId; 3]> {
        let mut out = Vec::with_capacity(2 * self.n() - 4);
        for u in self.vertices() {
            for &v in &self.rotations[u.idx()] {
                let w = self.apex(u, v);
                // emit each orbit once: from its smallest starting vertex
                if u < v && u < w {
                    out.push([u, v, w]);
                }
            }
        }
        out.sort();
        debug_assert_eq!(out.len(), 2 * self.n() - 4);
        out
    }

    /// Would `flip(e)` succeed?
    pub fn is_flippable(&self, e: Edge) -> Result<bool, FlipError> {
        let (a, b) = e.endpoints();
        if !self.is_edge(a, b) {
            return Err(FlipError::NotAnEdge(e));
        }
        let (c, d) = self.apexes(e);
        Ok(!self.is_edge(c, d))
    }

    /// Flips edge `e = (a, b)` to the opposite diagonal `(c, d)`.
    ///
    /// Around the quadrilateral the clockwise orders were `… c, b, d …` at
    /// `a` and `… d, a, c …` at `b`; removing the diagonal and inserting the
    /// other one keeps both new faces `(a, d, c)` and `(b, c, d)` triangular.
    /// If `(a, b)` was an outer-face edge, the outer face becomes the new
    /// face containing `min(a, b)`.
    pub fn flip(&mut self, e: Edge) -> Result<FlipRecord, FlipError> {
        let (a, b) = e.endpoints();
        if !self.is_edge(a, b) {
            return Err(FlipError::NotAnEdge(e));
        }
        let c = self.apex(a, b);
        let d = self.apex(b, a);
        if self.is_edge(c, d) {
            return Err(FlipError::IllegalFlip(e));
        }
        let outer_hit = self.outer.contains(&a) && self.outer.contains(&b);

        let pa = self.pos(a, b);
        self.rotations[a.idx()].remove(pa);
        let pb = self.pos(b, a);
        self.rotations[b.idx()].remove(pb);
        let pc = self.pos(c, b) + 1; // d goes immediately clockwise after b
        self.rotations[c.idx()].insert(pc, d);
        let pd = self.pos(d, a) + 1; // c goes immediately clockwise after a
        self.rotations[d.idx()].insert(pd, c);
        self.adj[a.idx()].set(b.idx(), false);
        self.adj[b.idx()].set(a.idx(), false);
        self.adj[c.idx()].insert(d.idx());
        self.adj[d.idx()].insert(c.idx());

        let new_outer = if outer_hit {
            let orbit = if a < b { [a, d, c] } else { [b, c, d] };
            let orbit = self
                .normalize_outer(orbit)
                .expect("replacement outer face is a face");
            self.outer = orbit;
            Some(orbit)
        } else {
            None
        };
        debug_assert!(self.check_faces().is_ok());
        Ok(FlipRecord { removed: e, inserted: Edge::new(c, d), new_outer })
    }

    /// Splits face `f` by a new vertex adjacent to its three corners.
    /// Grows `n` by one and returns the new vertex's id.
    ///
    /// Used by generators; if `f` is the outer face, the outer face moves to
    /// the lexicographically smallest of the three replacement faces.
    pub(crate) fn insert_vertex_in_face(&mut self, f: [VertexId; 3]) -> VertexId {
        let [p, q, r] = self
            .normalize_outer(f)
            .expect("insert_vertex_in_face: not a face orbit");
        let was_outer = [p, q, r] == self.outer;
        let s = VertexId(self.n());
        // At each corner the new spoke sits between the two face edges:
        // for the orbit (p → q → r), q is clockwise-next after r at p.
        let pp = self.pos(p, r) + 1;
        self.rotations[p.idx()].insert(pp, s);
        let pq = self.pos(q, p) + 1;
        self.rotations[q.idx()].insert(pq, s);
        let pr = self.pos(r, q) + 1;
        self.rotations[r.idx()].insert(pr, s);
        self.rotations.push(vec![p, r, q]);
        for row in &mut self.adj {
            row.grow(self.rotations.len());
        }
        let mut row = FixedBitSet::with_capacity(self.rotations.len());
        for v in [p, q, r] {
            self.adj[v.idx()].insert(s.idx());
            row.insert(v.idx());
        }
        self.adj.push(row);
        if was_outer {
            let mut triples = [[p, q, s], [q, r, s], [r, p, s]];
            triples.iter_mut().for_each(|t| t.sort());
            triples.sort();
            let [x, y, _] = triples[0];
            // recover walk order for the chosen face
            let orbit = if self.apex(x, y) == triples[0][2] {
                [x, y, self.apex(x, y)]
            } else {
                [x, self.apex(y, x), y]
            };
            self.outer = self.normalize_outer(orbit).expect("split face exists");
        }
        debug_assert!(self.check_faces().is_ok());
        s
    }

    /// Same rotation system (up to cyclic rotation of the lists) and same
    /// outer face. This is labelled equality, not isomorphism.
    pub fn same_embedding(&self, other: &Triangulation) -> bool {
        if self.n() != other.n() || self.outer != other.outer {
            return false;
        }
        self.vertices().all(|v| {
            let a = &self.rotations[v.idx()];
            let b = &other.rotations[v.idx()];
            a.len() == b.len()
                && (a.is_empty() || {
                    match b.iter().position(|&x| x == a[0]) {
                        None => false,
                        Some(p) => (0..a.len()).all(|i| a[i] == b[(p + i) % b.len()]),
                    }
                })
        })
    }

    /// Applies a vertex relabelling: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Triangulation {
        assert_eq!(perm.len(), self.n());
        let mut rotations = vec![Vec::new(); self.n()];
        for v in self.vertices() {
            rotations[perm[v.idx()]] =
                self.rotations[v.idx()].iter().map(|&x| VertexId(perm[x.idx()])).collect();
        }
        let outer = self.outer.map(|v| VertexId(perm[v.idx()]));
        Triangulation::build(rotations, outer).expect("relabelling preserves validity")
    }

    /// The mirror image: every rotation reversed. The outer face keeps its
    /// vertex set (its walk order reverses).
    pub fn mirrored(&self) -> Triangulation {
        let rotations = self
            .rotations
            .iter()
            .map(|rot| rot.iter().rev().copied().collect())
            .collect();
        let [a, b, c] = self.outer;
        Triangulation::build(rotations, [a, c, b]).expect("mirror preserves validity")
    }

    fn rotation_from(&self, v: VertexId, start: VertexId, orient: Orient) -> Vec<VertexId> {
        let rot = &self.rotations[v.idx()];
        let p = self.pos(v, start);
        let deg = rot.len();
        (0..deg)
            .map(|i| match orient {
                Orient::Cw => rot[(p + i) % deg],
                Orient::Ccw => rot[(p + deg - i) % deg],
            })
            .collect()
    }

    /// Breadth-first code for one root edge and orientation. Vertices are
    /// labelled in discovery order; each vertex emits its neighbour cycle
    /// (started at the neighbour it was discovered from) as labels.
    fn bfs_code(&self, u: VertexId, v: VertexId, orient: Orient) -> (Vec<u16>, Vec<usize>) {
        let n = self.n();
        const UNSET: usize = usize::MAX;
        let mut label = vec![UNSET; n];
        let mut ref_nb = vec![VertexId(0); n];
        let mut order = Vec::with_capacity(n);
        label[u.idx()] = 0;
        ref_nb[u.idx()] = v;
        order.push(u);
        let mut next = 1usize;
        let mut out = Vec::with_capacity(2 * self.m() + n);
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            for nb in self.rotation_from(x, ref_nb[x.idx()], orient) {
                if label[nb.idx()] == UNSET {
                    label[nb.idx()] = next;
                    next += 1;
                    ref_nb[nb.idx()] = x;
                    order.push(nb);
                }
                out.push(label[nb.idx()] as u16);
            }
            out.push(CODE_SEP);
        }
        debug_assert_eq!(next, n, "triangulations are connected");
        (out, label)
    }

    /// See [`CanonicalCode`]. Minimises the BFS code over all `2m` directed
    /// root edges and both orientations.
    pub fn canonical_code(&self) -> CanonicalCode {
        self.canonical_code_with_labeling().0
    }

    /// Canonical code together with one labelling that achieves it
    /// (`labeling[v]` = canonical label of vertex `v`).
    pub fn canonical_code_with_labeling(&self) -> (CanonicalCode, Vec<usize>) {
        let mut best: Option<(Vec<u16>, Vec<usize>)> = None;
        for orient in [Orient::Cw, Orient::Ccw] {
            for u in self.vertices() {
                for &v in &self.rotations[u.idx()] {
                    let cand = self.bfs_code(u, v, orient);
                    if best.as_ref().map_or(true, |b| cand.0 < b.0) {
                        best = Some(cand);
                    }
                }
            }
        }
        let (code, labeling) = best.unwrap();
        let mut bytes = Vec::with_capacity(code.len() * 2);
        for s in code {
            bytes.extend_from_slice(&s.to_be_bytes());
        }
        (CanonicalCode(bytes), labeling)
    }

    /// Serialises in the `tri` text format:
    ///
    /// ```text
    /// tri 1
    /// n <count>
    /// <v>: <c1> <c2> ... <ck>    # one line per vertex, clockwise
    /// outer <a> <b> <c>          # a face orbit, in walk order
    /// ```
    ///
    /// Rotations are cyclic, so each is emitted starting from its smallest
    /// neighbour; `deserialize ∘ serialize` is the identity and
    /// `serialize ∘ deserialize` is the identity on such normalised input.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        s.push_str("tri 1\n");
        s.push_str(&format!("n {}\n", self.n()));
        for v in self.vertices() {
            let rot = &self.rotations[v.idx()];
            let min_pos =
                rot.iter().enumerate().min_by_key(|(_, x)| **x).map(|(i, _)| i).unwrap();
            s.push_str(&format!("{v}:"));
            for i in 0..rot.len() {
                s.push_str(&format!(" {}", rot[(min_pos + i) % rot.len()]));
            }
            s.push('\n');
        }
        let [a, b, c] = self.outer;
        s.push_str(&format!("outer {a} {b} {c}\n"));
        s
    }

    /// Parses the `tri` text format. Blank lines and `#` comments are
    /// allowed; vertex lines may appear in any order but each vertex must
    /// appear exactly once.
    pub fn deserialize(input: &str) -> Result<Triangulation, ParseError> {
        let syntax = |line: usize, msg: String| ParseError::Syntax { line, msg };
        let mut lines = input
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (ln, header) = lines.next().ok_or_else(|| syntax(0, "empty input".into()))?;
        if header != "tri 1" {
            return Err(syntax(ln, format!("expected `tri 1`, got {header:?}")));
        }
        let (ln, nline) =
            lines.next().ok_or_else(|| syntax(ln, "missing `n <count>` line".into()))?;
        let n: usize = match nline.strip_prefix("n ") {
            Some(rest) => rest
                .trim()
                .parse()
                .map_err(|e| syntax(ln, format!("bad vertex count: {e}")))?,
            None => return Err(syntax(ln, format!("expected `n <count>`, got {nline:?}"))),
        };

        let mut rotations: Vec<Option<Vec<VertexId>>> = vec![None; n];
        let mut outer = None;
        let mut last_ln = ln;
        for (ln, line) in lines {
            last_ln = ln;
            if let Some(rest) = line.strip_prefix("outer ") {
                let ids = parse_ids(rest).map_err(|e| syntax(ln, e))?;
                match <[VertexId; 3]>::try_from(ids) {
                    Ok(f) if outer.is_none() => outer = Some(f),
                    Ok(_) => return Err(syntax(ln, "duplicate `outer` line".into())),
                    Err(_) => return Err(syntax(ln, "outer face needs 3 vertices".into())),
                }
                continue;
            }
            let (head, tail) = line
                .split_once(':')
                .ok_or_else(|| syntax(ln, format!("expected `<v>: ...`, got {line:?}")))?;
            let v: usize = head
                .trim()
                .parse()
                .map_err(|e| syntax(ln, format!("bad vertex id: {e}")))?;
            if v >= n {
                return Err(syntax(ln, format!("vertex {v} out of range (n = {n})")));
            }
            if rotations[v].is_some() {
                return Err(syntax(ln, format!("vertex {v} listed twice")));
            }
            rotations[v] = Some(parse_ids(tail).map_err(|e| syntax(ln, e))?);
        }
        let outer =
            outer.ok_or_else(|| syntax(last_ln, "missing `outer <a> <b> <c>` line".into()))?;
        let mut rots = Vec::with_capacity(n);
        for (v, r) in rotations.into_iter().enumerate() {
            rots.push(r.ok_or_else(|| syntax(last_ln, format!("vertex {v} missing")))?);
        }
        Ok(Triangulation::build(rots, outer)?)
    }

    /// Output in DOT format (adjacency only).
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph {\n");
        for e in self.edges() {
            let (a, b) = e.endpoints();
            s.push_str(&format!("  {a} -- {b};\n"));
        }
        s.push_str("}\n");
        s
    }
}

fn parse_ids(s: &str) -> Result<Vec<VertexId>, String> {
    s.split_whitespace()
        .map(|t| t.parse::<usize>().map(VertexId).map_err(|e| format!("bad vertex id {t:?}: {e}")))
        .collect()
}

/// Searches for a vertex bijection `T1 → T2` that maps the rotation system of
/// one onto the other (allowing reflection) and returns it as `perm` with
/// `perm[v1] = v2`. This walks the embedding from every anchor edge of `T2`,
/// so it is quadratic and intended for composing flip sequences and for
/// cross-checking [`Triangulation::canonical_code`] — not for bulk use.
pub fn find_isomorphism(t1: &Triangulation, t2: &Triangulation) -> Option<Vec<usize>> {
    if t1.n() != t2.n() {
        return None;
    }
    let n = t1.n();
    // anchor in t1: the directed edge (u0 -> v0)
    let u0 = VertexId(0);
    let v0 = t1.rotations[0][0];
    for orient in [Orient::Cw, Orient::Ccw] {
        for u in t2.vertices() {
            'cand: for &v in &t2.rotations[u.idx()] {
                let mut map = vec![usize::MAX; n];
                map[u0.idx()] = u.idx();
                map[v0.idx()] = v.idx();
                // tasks: align a1's rotation (anchored at neighbour b1) with
                // a2's rotation anchored at b2
                let mut stack = vec![(u0, v0, u, v)];
                let mut aligned = vec![false; n];
                while let Some((a1, b1, a2, b2)) = stack.pop() {
                    if std::mem::replace(&mut aligned[a1.idx()], true) {
                        continue;
                    }
                    if t1.degree(a1) != t2.degree(a2) {
                        continue 'cand;
                    }
                    let r1 = t1.rotation_from(a1, b1, Orient::Cw);
                    let r2 = t2.rotation_from(a2, b2, orient);
                    for (x1, x2) in r1.iter().zip(r2.iter()) {
                        let slot = &mut map[x1.idx()];
                        if *slot == usize::MAX {
                            *slot = x2.idx();
                        } else if *slot != x2.idx() {
                            continue 'cand;
                        }
                        stack.push((*x1, a1, *x2, a2));
                    }
                }
                if map.iter().all(|&x| x != usize::MAX) {
                    let t = t1.relabel(&map);
                    let rots_match = t.vertices().all(|v| {
                        let a = &t.rotations[v.idx()];
                        let b = &t2.rotations[v.idx()];
                        a.len() == b.len() && {
                            let rev: Vec<VertexId>;
                            let b: &[VertexId] = if orient == Orient::Cw {
                                b
                            } else {
                                rev = b.iter().rev().copied().collect();
                                &rev
                            };
                            b.iter()
                                .position(|&x| x == a[0])
                                .map_or(false, |p| (0..a.len()).all(|i| a[i] == b[(p + i) % b.len()]))
                        }
                    });
                    if rots_match {
                        return Some(map);
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use proptest::prelude::*;

    pub fn v(i: usize) -> VertexId {
        VertexId(i)
    }

    fn rots(lists: &[&[usize]]) -> Vec<Vec<VertexId>> {
        lists.iter().map(|l| l.iter().map(|&x| v(x)).collect()).collect()
    }

    /// Octahedron with poles 0 and 5, equator 1-2-4-3; outer face (0, 1, 2).
    pub fn octahedron() -> Triangulation {
        Triangulation::build(
            rots(&[
                &[2, 1, 3, 4],
                &[0, 2, 5, 3],
                &[0, 4, 5, 1],
                &[0, 1, 5, 4],
                &[0, 3, 5, 2],
                &[2, 4, 3, 1],
            ]),
            [v(0), v(1), v(2)],
        )
        .unwrap()
    }

    pub fn k4() -> Triangulation {
        Triangulation::build(
            rots(&[&[1, 2, 3], &[0, 3, 2], &[0, 1, 3], &[0, 2, 1]]),
            [v(0), v(2), v(1)],
        )
        .unwrap()
    }

    #[test]
    fn k4_is_valid() {
        let t = k4();
        assert_eq!(t.n(), 4);
        assert_eq!(t.m(), 6);
        assert_eq!(t.faces().len(), 4);
    }

    #[test]
    fn octahedron_shape() {
        let t = octahedron();
        assert_eq!(t.m(), 12);
        assert_eq!(t.faces().len(), 8);
        assert!(t.vertices().all(|x| t.degree(x) == 4));
        assert!(t.is_face([v(0), v(1), v(2)]));
        assert!(!t.is_face([v(0), v(1), v(5)]));
    }

    #[test]
    fn build_rejects_small_and_broken_input() {
        let err = Triangulation::build(rots(&[&[1], &[0]]), [v(0), v(1), v(0)]).unwrap_err();
        assert_eq!(err, BuildError::TooSmall(2));
        // 1 lists 0 but not vice versa
        let err = Triangulation::build(
            rots(&[&[2, 3], &[0, 3, 2], &[0, 1, 3], &[0, 2, 1]]),
            [v(0), v(1), v(2)],
        )
        .unwrap_err();
        assert_eq!(err, BuildError::AsymmetricAdjacency(v(1), v(0)));
        // repeated neighbour
        let err = Triangulation::build(
            rots(&[&[1, 2, 3, 1], &[0, 3, 2], &[0, 1, 3], &[0, 2, 1]]),
            [v(0), v(1), v(2)],
        )
        .unwrap_err();
        assert_eq!(err, BuildError::NonSimple(v(0)));
        // octahedron minus an edge: wrong count
        let err = Triangulation::build(
            rots(&[&[2, 1, 3, 4], &[0, 2, 5, 3], &[0, 4, 5, 1], &[0, 1, 5, 4], &[0, 3, 5], &[2, 4, 3, 1]]),
            [v(0), v(1), v(2)],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            BuildError::AsymmetricAdjacency(..) | BuildError::WrongEdgeCount { .. }
        ));
        // valid rotations, non-face outer triple
        let err = Triangulation::build(
            rots(&[
                &[2, 1, 3, 4],
                &[0, 2, 5, 3],
                &[0, 4, 5, 1],
                &[0, 1, 5, 4],
                &[0, 3, 5, 2],
                &[2, 4, 3, 1],
            ]),
            [v(0), v(1), v(5)],
        )
        .unwrap_err();
        assert_eq!(err, BuildError::BadOuterFace(v(0), v(1), v(5)));
        // right face set, wrong walk order
        let err = Triangulation::build(
            rots(&[
                &[2, 1, 3, 4],
                &[0, 2, 5, 3],
                &[0, 4, 5, 1],
                &[0, 1, 5, 4],
                &[0, 3, 5, 2],
                &[2, 4, 3, 1],
            ]),
            [v(0), v(2), v(1)],
        )
        .unwrap_err();
        assert_eq!(err, BuildError::BadOuterFace(v(0), v(2), v(1)));
    }

    #[test]
    fn scrambled_rotation_is_not_a_sphere_embedding() {
        // swap two entries in one rotation of the octahedron: adjacency stays
        // intact but some face walk no longer closes in three steps
        let r = Triangulation::build(
            rots(&[
                &[2, 1, 3, 4],
                &[0, 2, 5, 3],
                &[0, 4, 5, 1],
                &[0, 1, 5, 4],
                &[3, 0, 5, 2],
                &[2, 4, 3, 1],
            ]),
            [v(0), v(1), v(2)],
        );
        assert!(matches!(r, Err(BuildError::NonTriangularFace(..))));
    }

    #[test]
    fn k4_has_no_legal_flips() {
        let t = k4();
        for e in t.edges() {
            assert_eq!(t.is_flippable(e), Ok(false));
        }
        let mut t = t;
        let e = Edge::new(v(0), v(1));
        assert_eq!(t.flip(e), Err(FlipError::IllegalFlip(e)));
    }

    #[test]
    fn octahedron_every_edge_flippable() {
        let t = octahedron();
        for e in t.edges() {
            assert_eq!(t.is_flippable(e), Ok(true), "{e}");
        }
    }

    #[test]
    fn flip_not_an_edge() {
        let mut t = octahedron();
        let e = Edge::new(v(0), v(5));
        assert_eq!(t.flip(e), Err(FlipError::NotAnEdge(e)));
    }

    #[test]
    fn flip_and_flip_back_restores_embedding() {
        let orig = octahedron();
        let mut t = orig.clone();
        let rec = t.flip(Edge::new(v(0), v(1))).unwrap();
        assert_eq!(rec.inserted, Edge::new(v(2), v(3)));
        assert_ne!(t.canonical_code(), orig.canonical_code());
        let back = t.flip(rec.inserted).unwrap();
        assert_eq!(back.inserted, rec.removed);
        assert!(t.same_embedding(&orig));
    }

    #[test]
    fn flipping_outer_edge_moves_outer_face() {
        let mut t = octahedron();
        // (0, 1) lies on the outer face (0, 1, 2); apexes are 2 and 3, so the
        // new outer face is the new face containing min(0, 1) = 0.
        let rec = t.flip(Edge::new(v(0), v(1))).unwrap();
        let f = rec.new_outer.expect("outer face must move");
        assert!(f.contains(&v(0)) && f.contains(&v(2)) && f.contains(&v(3)));
        assert_eq!(t.outer_face(), f);
        // interior flip leaves it alone
        let mut t2 = octahedron();
        let rec2 = t2.flip(Edge::new(v(3), v(5))).unwrap();
        assert_eq!(rec2.new_outer, None);
        assert_eq!(t2.outer_face(), [v(0), v(1), v(2)]);
    }

    #[test]
    fn canonical_code_invariants() {
        let t = octahedron();
        let code = t.canonical_code();
        // relabelling
        let perm = vec![3, 5, 0, 4, 1, 2];
        assert_eq!(t.relabel(&perm).canonical_code(), code);
        // reflection
        assert_eq!(t.mirrored().canonical_code(), code);
        // outer-face choice (faces() yields walk-order orbits)
        for f in t.faces() {
            assert_eq!(t.with_outer(f).unwrap().canonical_code(), code);
        }
        // a different 6-vertex triangulation
        let mut stacked = t.clone();
        stacked.flip(Edge::new(v(0), v(1))).unwrap();
        assert_ne!(stacked.canonical_code(), code);
    }

    #[test]
    fn serialize_roundtrip() {
        for t in [k4(), octahedron(), generators::gen_canonical(9).unwrap()] {
            let s = t.serialize();
            let back = Triangulation::deserialize(&s).unwrap();
            assert!(back.same_embedding(&t));
            assert_eq!(back.serialize(), s, "serialized form is normalised");
        }
    }

    #[test]
    fn deserialize_errors_carry_line_numbers() {
        let bad = "tri 1\nn 4\n0: 1 2 3\n1: 0 3 2\n2: 0 1 3\nbogus\nouter 0 2 1\n";
        match Triangulation::deserialize(bad) {
            Err(ParseError::Syntax { line: 6, .. }) => {}
            other => panic!("expected syntax error on line 6, got {other:?}"),
        }
        // {0, 1, 2} is a face here, but its walk order is (0 -> 2 -> 1)
        let bad_outer = "tri 1\nn 4\n0: 1 2 3\n1: 0 3 2\n2: 0 1 3\n3: 0 2 1\nouter 0 1 2\n";
        match Triangulation::deserialize(bad_outer) {
            Err(ParseError::Invalid(BuildError::BadOuterFace(..))) => {}
            other => panic!("expected BadOuterFace, got {other:?}"),
        }
    }

    #[test]
    fn deserialize_allows_comments_and_any_vertex_order() {
        let s = "# a tetrahedron\ntri 1\nn 4\n\n3: 0 2 1\n0: 1 2 3  # hub\n2: 0 1 3\n1: 0 3 2\nouter 0 2 1\n";
        let t = Triangulation::deserialize(s).unwrap();
        assert!(t.same_embedding(&k4()));
    }

    #[test]
    fn insert_vertex_in_face_grows_by_one() {
        let mut t = k4();
        let s = t.insert_vertex_in_face([v(0), v(1), t.apex(v(0), v(1))]);
        assert_eq!(t.n(), 5);
        assert_eq!(t.degree(s), 3);
        assert_eq!(t.m(), 9);
        // splitting the outer face relocates it onto the new vertex
        let mut t2 = k4();
        let [a, b, c] = t2.outer_face();
        let s2 = t2.insert_vertex_in_face([a, b, c]);
        assert!(t2.outer_face().contains(&s2));
    }

    #[test]
    fn flip_sequence_replay_checks_records() {
        let start = octahedron();
        let mut t = start.clone();
        let mut seq = FlipSequence::new(&start);
        for e in [Edge::new(v(0), v(1)), Edge::new(v(2), v(3))] {
            seq.records.push(t.flip(e).unwrap());
        }
        let mut fresh = start.clone();
        seq.replay(&mut fresh).unwrap();
        assert!(fresh.same_embedding(&t));
        // tamper with a record: replay must notice
        let mut broken = seq.clone();
        broken.records[1].inserted = Edge::new(v(0), v(5));
        let mut fresh = start.clone();
        assert!(matches!(broken.replay(&mut fresh), Err(ReplayError::Mismatch { step: 1, .. })));
        // wrong start
        let mut wrong = generators::gen_canonical(6).unwrap();
        assert_eq!(seq.replay(&mut wrong), Err(ReplayError::WrongStart));
    }

    #[test]
    fn flip_record_log_roundtrip() {
        let mut t = octahedron();
        let rec = t.flip(Edge::new(v(0), v(1))).unwrap();
        assert!(rec.new_outer.is_some());
        let line = rec.to_string();
        assert_eq!(FlipRecord::parse_line(&line), Ok(rec));
        // interior flip: record without an outer-face clause
        let rec2 = t.flip(Edge::new(v(2), v(5))).unwrap();
        assert!(rec2.new_outer.is_none());
        assert_eq!(FlipRecord::parse_line(&rec2.to_string()), Ok(rec2));
        assert!(FlipRecord::parse_line("flip 1 2 > 3 4").is_err());
    }

    #[test]
    fn find_isomorphism_maps_relabelled_copies() {
        let t = octahedron();
        let perm = vec![2, 0, 4, 5, 1, 3];
        let t2 = t.relabel(&perm);
        let found = find_isomorphism(&t, &t2).expect("isomorphic");
        assert!(t.relabel(&found).canonical_code() == t2.canonical_code());
        // mirrored copies are also matched
        assert!(find_isomorphism(&t, &t2.mirrored()).is_some());
        // non-isomorphic pair
        let mut other = t.clone();
        other.flip(Edge::new(v(0), v(1))).unwrap();
        assert!(find_isomorphism(&t, &other).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Random flip walks keep the structure a valid triangulation and
        /// the canonical code invariant under relabelling.
        #[test]
        fn random_flip_walks_stay_valid(seed in 0u64..1000, steps in 1usize..30) {
            let t = generators::gen_random(12, steps, seed).unwrap();
            prop_assert_eq!(t.m(), 30);
            prop_assert_eq!(t.faces().len(), 20);
            let mut perm: Vec<usize> = (0..12).collect();
            perm.rotate_left((seed % 11 + 1) as usize);
            prop_assert_eq!(t.relabel(&perm).canonical_code(), t.canonical_code());
            let s = t.serialize();
            prop_assert!(Triangulation::deserialize(&s).unwrap().same_embedding(&t));
        }
    }
}
