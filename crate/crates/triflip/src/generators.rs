//! Constructors for triangulation families used throughout the crate.
//!
//! * [`gen_canonical`] — the double wheel over a path: two dominating hub
//!   vertices plus a path of rim vertices. This is the normal form that
//!   [`crate::canonicalize`] reduces every triangulation to, and the start
//!   point for random flip walks.
//! * [`gen_sierpinski`] — a recursively subdivided triangle whose separating
//!   triangles are pairwise edge-disjoint, which makes the number of flips
//!   needed to remove them exactly `(3n − 10) / 5`. The optional `partial`
//!   parameter interpolates between consecutive subdivision depths.
//! * [`gen_stacked`] — repeated stacking of a degree-3 vertex into a random
//!   face; produces triangulations saturated with separating triangles.
//! * [`gen_random`] — a seeded random walk in the flip graph starting from
//!   the double wheel.
//!
//! All generators are deterministic for a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::embedding::{Triangulation, VertexId};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("TooSmall: generator needs at least {min} vertices, got {got}")]
    TooSmall { got: usize, min: usize },
    #[error("BadDepth: subdivision depth must be at least 1")]
    BadDepth,
    #[error("PartialOutOfRange: partial count {partial} exceeds the {max} deepest triangles")]
    PartialOutOfRange { partial: usize, max: usize },
}

/// Builds a triangulation from a list of oriented faces.
///
/// Every orbit `(x → y → z)` must wind the same way, each undirected edge
/// must appear in exactly two orbits (once per direction), and `outer` must
/// be one of the orbits. Panics if the face list is not a closed oriented
/// triangulated sphere; callers construct face lists that are correct by
/// construction and the final [`Triangulation::build`] re-validates.
pub(crate) fn triangulation_from_faces(
    n: usize,
    faces: &[[usize; 3]],
    outer: [usize; 3],
) -> Triangulation {
    // succ[v][u] = w  <=>  at v, w comes immediately clockwise after u,
    // read off the directed edge (u -> v) of the orbit (u -> v -> w).
    let mut succ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &[x, y, z] in faces {
        for (u, v, w) in [(x, y, z), (y, z, x), (z, x, y)] {
            debug_assert!(
                succ[v].iter().all(|&(a, _)| a != u),
                "directed edge ({u} -> {v}) on two faces"
            );
            succ[v].push((u, w));
        }
    }
    let mut rots = Vec::with_capacity(n);
    for (v, pairs) in succ.iter().enumerate() {
        let lookup = |x: usize| -> usize {
            pairs
                .iter()
                .find(|&&(a, _)| a == x)
                .unwrap_or_else(|| panic!("open fan at vertex {v}"))
                .1
        };
        let start = pairs.iter().map(|&(a, _)| a).min().unwrap_or_else(|| {
            panic!("vertex {v} lies on no face")
        });
        let mut rot = Vec::with_capacity(pairs.len());
        let mut cur = start;
        loop {
            rot.push(VertexId(cur));
            cur = lookup(cur);
            if cur == start {
                break;
            }
            assert!(rot.len() <= pairs.len(), "rotation at {v} does not close");
        }
        assert_eq!(rot.len(), pairs.len(), "disconnected fan at vertex {v}");
        rots.push(rot);
    }
    Triangulation::build(rots, outer.map(VertexId)).expect("face list forms a triangulation")
}

/// The double wheel `W_n`: hubs `0` and `1` adjacent to every rim vertex,
/// rim path `2 − 3 − ⋯ − (n−1)`.
///
/// Every triple `{0, 1, r}` with `3 ≤ r ≤ n − 2` is a separating triangle
/// (`n − 4` of them, all sharing the edge `(0, 1)`), the rim ends have
/// degree 3, and the outer face is `{0, 1, 2}`. Defined for `n ≥ 4`;
/// `W_4` is the tetrahedron and `W_5` the double pyramid.
pub fn gen_canonical(n: usize) -> Result<Triangulation, GenError> {
    if n < 4 {
        return Err(GenError::TooSmall { got: n, min: 4 });
    }
    let mut rots: Vec<Vec<VertexId>> = Vec::with_capacity(n);
    rots.push((2..n).chain([1]).map(VertexId).collect());
    rots.push([0].into_iter().chain((2..n).rev()).map(VertexId).collect());
    for v in 2..n {
        let rot = if v == 2 {
            vec![1, 3, 0]
        } else if v == n - 1 {
            vec![v - 1, 1, 0]
        } else {
            vec![v - 1, 1, v + 1, 0]
        };
        rots.push(rot.into_iter().map(VertexId).collect());
    }
    let t = Triangulation::build(rots, [VertexId(0), VertexId(2), VertexId(1)])
        .expect("double wheel is valid for n >= 4");
    Ok(t)
}

/// Recursive triangle subdivision with edge-disjoint separating triangles.
///
/// Start from a triangle `(0, 1, 2)` seen from an exterior apex (which gets
/// the largest id). Subdividing a face plants a rotated inner triangle,
/// turning the face into 7 smaller ones; the three *corner* faces are
/// subdivided again, `depth` levels in all, and each deepest corner receives
/// a stacked vertex. Every subdivided face and every stacked corner becomes
/// a separating triangle, they are pairwise edge-disjoint, and there are
/// `(3n − 10) / 5` of them.
///
/// `partial = p` upgrades the first `p` deepest corners (in depth-first
/// order) from "stacked vertex" to "subdivide once more, then stack", which
/// interpolates towards `depth + 1`: `gen_sierpinski(k, 3^k)` equals
/// `gen_sierpinski(k + 1, 0)`.
pub fn gen_sierpinski(depth: usize, partial: usize) -> Result<Triangulation, GenError> {
    if depth == 0 {
        return Err(GenError::BadDepth);
    }
    let max = 3usize.pow(depth as u32);
    if partial > max {
        return Err(GenError::PartialOutOfRange { partial, max });
    }
    let mut faces = Vec::new();
    let mut next = 3usize;
    let mut budget = partial;
    expand(&mut faces, &mut next, &mut budget, [0, 1, 2], depth);
    let x = next;
    faces.push([1, 0, x]);
    faces.push([2, 1, x]);
    faces.push([0, 2, x]);
    // outer face: the lexicographically smallest face at the exterior apex
    Ok(triangulation_from_faces(x + 1, &faces, [1, 0, x]))
}

fn expand(
    faces: &mut Vec<[usize; 3]>,
    next: &mut usize,
    budget: &mut usize,
    f: [usize; 3],
    depth: usize,
) {
    if depth == 0 {
        if *budget > 0 {
            *budget -= 1;
            for corner in subdivide(faces, next, f) {
                stack(faces, next, corner);
            }
        } else {
            stack(faces, next, f);
        }
        return;
    }
    for corner in subdivide(faces, next, f) {
        expand(faces, next, budget, corner, depth - 1);
    }
}

/// Replaces the oriented face `(P → Q → R)` by 7 faces around a new inner
/// triangle `(p, q, r)` (`p` across from `P`, and so on); returns the three
/// corner faces, which are the only ones eligible for further subdivision.
fn subdivide(faces: &mut Vec<[usize; 3]>, next: &mut usize, f: [usize; 3]) -> [[usize; 3]; 3] {
    let [pp, qq, rr] = f;
    let (p, q, r) = (*next, *next + 1, *next + 2);
    *next += 3;
    faces.push([pp, qq, r]);
    faces.push([qq, rr, p]);
    faces.push([rr, pp, q]);
    faces.push([p, q, r]);
    [[pp, r, q], [qq, p, r], [rr, q, p]]
}

/// Places one new vertex inside the oriented face `(X → Y → Z)`.
fn stack(faces: &mut Vec<[usize; 3]>, next: &mut usize, f: [usize; 3]) {
    let [x, y, z] = f;
    let s = *next;
    *next += 1;
    faces.push([x, y, s]);
    faces.push([y, z, s]);
    faces.push([z, x, s]);
}

/// Random stacked triangulation: starting from the tetrahedron, repeatedly
/// stacks a new vertex into a uniformly random face until `n` vertices.
pub fn gen_stacked(n: usize, seed: u64) -> Result<Triangulation, GenError> {
    if n < 4 {
        return Err(GenError::TooSmall { got: n, min: 4 });
    }
    let mut t = triangulation_from_faces(
        4,
        &[[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]],
        [0, 1, 2],
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while t.n() < n {
        let faces = t.faces();
        let f = faces[rng.gen_range(0..faces.len())];
        t.insert_vertex_in_face(f);
    }
    Ok(t)
}

/// Seeded random walk in the flip graph: starts from [`gen_canonical`] and
/// performs `steps` flips, each chosen uniformly among the currently legal
/// edges. (The tetrahedron has no legal flips; the walk stops early there.)
pub fn gen_random(n: usize, steps: usize, seed: u64) -> Result<Triangulation, GenError> {
    let mut t = gen_canonical(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..steps {
        let legal: Vec<_> = t
            .edges()
            .into_iter()
            .filter(|&e| t.is_flippable(e) == Ok(true))
            .collect();
        if legal.is_empty() {
            break;
        }
        let e = legal[rng.gen_range(0..legal.len())];
        t.flip(e).expect("edge drawn from the legal set");
    }
    Ok(t)
}
