//! Transformation to the canonical triangulation and flip distance by
//! composition.
//!
//! The canonical triangulation on `n` vertices has two dominant vertices
//! (each adjacent to every other vertex). Any 4-connected triangulation
//! reaches it within `2n − Δ₀ − 8` flips, where `Δ₀` is the starting
//! maximum degree — and within `2n − 15` when `Δ₀ = 6` and `n ≥ 19` — via
//! a three-stage pipeline:
//!
//! 1. [`pick_apex_pair`]: choose adjacent vertices `x` (maximum degree,
//!    possibly +1 after one preparatory flip) and `y` (degree ≥ 6);
//! 2. [`hamiltonian_cycle_through`] `(x, y)`: a Hamiltonian cycle with
//!    `x`'s chords inside and `y`'s outside;
//! 3. [`make_dominant_in_side`] twice: fan `x` out to degree `n − 1`
//!    flipping only inside edges, then `y` flipping only outside edges.
//!    The sides never interact, so the two counts simply add.
//!
//! [`flip_distance_via_canonical`] runs both inputs to the canonical form
//! and splices the second sequence in reverse, giving a flip path of
//! length at most `5.2n − 33.6` between any two triangulations of the
//! same size (their 4-connected repair included).
//!
//! Sizes below the pipeline's reach (`n ≤ 12`) are solved exactly by the
//! breadth-first oracle instead.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::embedding::{Edge, FlipRecord, FlipSequence, Triangulation, VertexId};
use crate::four_connect::make_4_connected;
use crate::generators::gen_canonical;
use crate::hamiltonian::{
    hamiltonian_cycle_through, pick_apex_pair, CycleDecomposition, HamiltonianError, Side,
};
use crate::oracle::shortest_flip_path;
use crate::septri::enumerate_separating_triangles;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CanonError {
    /// The input has a separating triangle.
    #[error("the triangulation is not 4-connected")]
    NotFourConnected,
    /// Below the size threshold for the requested operation.
    #[error("needs at least {min} vertices, got {n}")]
    TooSmall { n: usize, min: usize },
    /// Every candidate preparatory flip destroyed 4-connectivity.
    #[error("no preparatory flip preserves 4-connectivity")]
    NoValidPair,
    /// The decomposition passed to fanning does not support it.
    #[error("fanning precondition violated: {0}")]
    PreconditionViolated(String),
    /// A produced sequence exceeds its stated bound; indicates an
    /// implementation bug, reported as an error so callers can surface it.
    #[error("{flips} flips exceed the bound {bound}")]
    BudgetExceeded { flips: usize, bound: usize },
    /// Flip distance is only defined between triangulations of equal size.
    #[error("size mismatch: {n1} vs {n2} vertices")]
    SizeMismatch { n1: usize, n2: usize },
}

impl From<HamiltonianError> for CanonError {
    fn from(e: HamiltonianError) -> CanonError {
        match e {
            HamiltonianError::NotFourConnected => CanonError::NotFourConnected,
            HamiltonianError::TooSmall { n, min } => CanonError::TooSmall { n, min },
            HamiltonianError::NoValidPair => CanonError::NoValidPair,
            HamiltonianError::HypothesisViolated { .. } | HamiltonianError::NotFound => {
                CanonError::PreconditionViolated(e.to_string())
            }
        }
    }
}

/// Does the triangulation have two dominant vertices? Since the canonical
/// triangulation is the only one of its size with two vertices of degree
/// `n − 1`, this is equivalent to canonical-code equality with it.
pub fn is_canonical(t: &Triangulation) -> bool {
    t.vertices().filter(|&v| t.degree(v) == t.n() - 1).count() >= 2
}

/// The flip budget [`to_canonical`] enforces for a pipeline run (`n ≥ 13`)
/// starting from maximum degree `delta0`: `2n − 15` when `delta0 = 6` and
/// `n ≥ 19`, else `2n − delta0 − 8`.
pub fn canonical_flip_bound(n: usize, delta0: usize) -> usize {
    if delta0 == 6 && n >= 19 {
        2 * n - 15
    } else {
        (2 * n).saturating_sub(delta0 + 8)
    }
}

/// Fans `v` out to a dominant vertex (degree `n − 1`) by flips confined to
/// one side of the decomposition's cycle, mutating `t` and returning the
/// flips performed — exactly `n − 1 − deg(v)` of them.
///
/// Repeatedly scans `v`'s current rotation clockwise from its cycle
/// successor for a pair of consecutive neighbours `a, b` whose edge lies
/// on `side`; its far face `(a, b, c)` then has `c` not adjacent to `v`
/// (any `v`-chord to `c` would cross `(a, b)`), so flipping `(a, b)` to
/// `(v, c)` gains `v` a neighbour. Cycle edges are never flipped and the
/// opposite side is never touched.
///
/// Requires `v` on the cycle with all its non-cycle edges on `side`; the
/// side's edge set is taken from `decomp` and maintained across flips, so
/// a decomposition that has gone stale on the *other* side (as after
/// fanning the opposite vertex there) is fine.
pub fn make_dominant_in_side(
    t: &mut Triangulation,
    decomp: &CycleDecomposition,
    v: VertexId,
    side: Side,
) -> Result<Vec<FlipRecord>, CanonError> {
    let n = t.n();
    if t.degree(v) == n - 1 {
        return Ok(Vec::new());
    }
    let precondition = |msg: String| CanonError::PreconditionViolated(msg);
    let len = decomp.cycle.len();
    let pv = decomp
        .cycle
        .iter()
        .position(|&w| w == v)
        .ok_or_else(|| precondition(format!("{v} is not on the cycle")))?;
    let succ = decomp.cycle[(pv + 1) % len];
    let pred = decomp.cycle[(pv + len - 1) % len];
    let mut side_edges: BTreeSet<Edge> = match side {
        Side::Inside => decomp.inside_edges.clone(),
        Side::Outside => decomp.outside_edges.clone(),
    };
    let cycle_edges: BTreeSet<Edge> = (0..len)
        .map(|i| Edge::new(decomp.cycle[i], decomp.cycle[(i + 1) % len]))
        .collect();
    for &z in t.neighbors(v) {
        if z != succ && z != pred && !side_edges.contains(&Edge::new(v, z)) {
            return Err(precondition(format!("edge {} is not on {side:?}", Edge::new(v, z))));
        }
    }

    let mut out = Vec::new();
    while t.degree(v) < n - 1 {
        let rot = t.neighbors(v).to_vec();
        let d = rot.len();
        let p = rot.iter().position(|&z| z == succ).expect("cycle edges survive fanning");
        let mut eligible = None;
        for i in 0..d {
            let (a, b) = (rot[(p + i) % d], rot[(p + i + 1) % d]);
            let e = Edge::new(a, b);
            if !side_edges.contains(&e) || cycle_edges.contains(&e) {
                continue;
            }
            // a, b consecutive in v's rotation make (v, a, b) a face, so v
            // is one apex of (a, b); c is the far one
            let (c1, c2) = t.apexes(e);
            debug_assert!(c1 == v || c2 == v);
            let c = if c1 == v { c2 } else { c1 };
            if t.is_edge(v, c) {
                continue;
            }
            eligible = Some((e, c));
            break;
        }
        let Some((e, c)) = eligible else {
            return Err(precondition(format!(
                "no eligible edge on {side:?} although {v} has degree {} < {}",
                t.degree(v),
                n - 1
            )));
        };
        let rec = t.flip(e).expect("an eligible fanning flip is legal");
        debug_assert_eq!(rec.inserted, Edge::new(v, c));
        side_edges.remove(&e);
        side_edges.insert(rec.inserted);
        out.push(rec);
    }
    Ok(out)
}

/// Transforms a 4-connected triangulation into the canonical one in place,
/// returning the flip sequence, of length at most
/// [`canonical_flip_bound`]`(n, Δ₀)` for `n ≥ 13`.
///
/// `n ≥ 13` runs the pipeline (apex pair, Hamiltonian cycle, two
/// fannings); `n ≤ 12` is solved exactly by breadth-first search instead,
/// and `n = 4` is already canonical. On any error `t` is left unchanged.
pub fn to_canonical(t: &mut Triangulation) -> Result<FlipSequence, CanonError> {
    let n = t.n();
    if !enumerate_separating_triangles(t).is_empty() {
        return Err(CanonError::NotFourConnected);
    }
    if n == 4 {
        debug_assert!(is_canonical(t), "the tetrahedron is canonical");
        return Ok(FlipSequence::new(t));
    }
    // n = 5 cannot reach here: both 5-vertex triangulations have a
    // separating triangle
    if n <= 12 {
        let target = gen_canonical(n).expect("canonical form exists for n ≥ 4");
        let seq = shortest_flip_path(t, &target)
            .expect("the flip graph on a fixed vertex count is connected");
        seq.replay(t).expect("a freshly searched path replays");
        return Ok(seq);
    }

    let delta0 = t.max_degree();
    let (x, y, prep) = pick_apex_pair(t)?;
    let mut cur = t.clone();
    let mut seq = FlipSequence::new(t);
    if let Some(p) = prep {
        let rec = cur.flip(p.removed).expect("the preparatory flip was validated");
        debug_assert_eq!(rec, p);
        seq.records.push(rec);
    }
    let decomp = hamiltonian_cycle_through(&cur, x, y)?;
    seq.records.extend(make_dominant_in_side(&mut cur, &decomp, x, Side::Inside)?);
    seq.records.extend(make_dominant_in_side(&mut cur, &decomp, y, Side::Outside)?);
    debug_assert!(is_canonical(&cur));
    debug_assert!(cur.is_edge(x, y), "the shared cycle edge survives both fannings");
    let bound = canonical_flip_bound(n, delta0);
    if seq.len() > bound {
        return Err(CanonError::BudgetExceeded { flips: seq.len(), bound });
    }
    *t = cur;
    Ok(seq)
}

/// A flip sequence from `t1` to the isomorphism class of `t2` (same `n`):
/// replaying it on `t1` produces a triangulation with `t2`'s canonical
/// code.
///
/// For `n ≤ 9` the breadth-first oracle returns a shortest such sequence.
/// Otherwise both inputs are made 4-connected and canonical, and the
/// second sequence is replayed backwards — each flip inverted and carried
/// through the label matching of the two canonical forms — on top of the
/// first. The composed length is at most `⌊5.2n − 33.6⌋` for `n ≥ 19`
/// (enforced); no optimality is claimed.
pub fn flip_distance_via_canonical(
    t1: &Triangulation,
    t2: &Triangulation,
) -> Result<FlipSequence, CanonError> {
    let n = t1.n();
    if n != t2.n() {
        return Err(CanonError::SizeMismatch { n1: n, n2: t2.n() });
    }
    if n <= 9 {
        return Ok(shortest_flip_path(t1, t2)
            .expect("the flip graph on a fixed vertex count is connected"));
    }

    let canonize = |t: &Triangulation| -> Result<(Triangulation, FlipSequence), CanonError> {
        let mut cur = t.clone();
        let mut seq = FlipSequence::new(t);
        let (repair, _) = make_4_connected(&cur, false)
            .expect("4-connected repair succeeds on valid input");
        repair.replay(&mut cur).expect("a fresh repair sequence replays");
        let tail = to_canonical(&mut cur)?;
        seq.records.extend(repair.records);
        seq.records.extend(tail.records);
        Ok((cur, seq))
    };
    let (c1, alpha) = canonize(t1)?;
    let (c2, beta) = canonize(t2)?;

    // both canonical forms are the same triangulation up to labels (and
    // possibly reflection, which flips cannot tell apart); vertices with
    // equal canonical labels correspond
    let (code1, lab1) = c1.canonical_code_with_labeling();
    let (code2, lab2) = c2.canonical_code_with_labeling();
    debug_assert_eq!(code1, code2, "the canonical form is unique per size");
    let mut inv1 = vec![0usize; n];
    for w in 0..n {
        inv1[lab1[w]] = w;
    }
    let pi = |w: VertexId| VertexId(inv1[lab2[w.idx()]]);

    let mut cur = c1;
    let mut seq = alpha;
    for r in beta.records.iter().rev() {
        let (a, b) = r.inserted.endpoints();
        let rec = cur
            .flip(Edge::new(pi(a), pi(b)))
            .expect("the reverse of a legal flip is legal");
        let (c, d) = r.removed.endpoints();
        debug_assert_eq!(rec.inserted, Edge::new(pi(c), pi(d)), "reversal restores the edge");
        seq.records.push(rec);
    }
    assert_eq!(
        cur.canonical_code(),
        t2.canonical_code(),
        "the composed sequence lands on the target class"
    );
    if n >= 19 {
        let bound = (5.2 * n as f64 - 33.6).floor() as usize;
        if seq.len() > bound {
            return Err(CanonError::BudgetExceeded { flips: seq.len(), bound });
        }
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_random, gen_sierpinski, gen_stacked};
    use crate::oracle::exact_flip_distance;

    fn v(i: usize) -> VertexId {
        VertexId(i)
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

    fn random_4connected(n: usize, seed: u64) -> Triangulation {
        let mut t = gen_random(n, 10 * n, seed).unwrap();
        let (seq, _) = make_4_connected(&t, false).unwrap();
        seq.replay(&mut t).unwrap();
        assert!(enumerate_separating_triangles(&t).is_empty());
        t
    }

    #[test]
    fn canonical_recognition() {
        for n in 4..=12 {
            assert!(is_canonical(&gen_canonical(n).unwrap()), "n = {n}");
        }
        assert!(!is_canonical(&octahedron()));
        assert!(!is_canonical(&gen_sierpinski(1, 0).unwrap()));
        assert!(!is_canonical(&random_4connected(20, 7)));
    }

    #[test]
    fn octahedron_fanning_is_one_flip_per_vertex() {
        let mut t = octahedron();
        let decomp = hamiltonian_cycle_through(&t, v(0), v(1)).unwrap();
        let fx = make_dominant_in_side(&mut t, &decomp, v(0), Side::Inside).unwrap();
        assert_eq!(fx.len(), 1, "6 − 1 − 4 flips");
        assert_eq!(fx[0].removed, Edge::new(v(3), v(4)));
        assert_eq!(fx[0].inserted, Edge::new(v(0), v(5)));
        assert_eq!(t.degree(v(0)), 5);
        // rerunning on the now-dominant vertex is a no-op
        assert!(make_dominant_in_side(&mut t, &decomp, v(0), Side::Inside).unwrap().is_empty());
        let fy = make_dominant_in_side(&mut t, &decomp, v(1), Side::Outside).unwrap();
        assert_eq!(fy.len(), 1);
        assert!(is_canonical(&t));
    }

    #[test]
    fn fanning_rejects_the_wrong_side() {
        let mut t = octahedron();
        let decomp = hamiltonian_cycle_through(&t, v(0), v(1)).unwrap();
        // 0's chords are inside, so fanning it outside must refuse
        let err = make_dominant_in_side(&mut t, &decomp, v(0), Side::Outside).unwrap_err();
        assert!(matches!(err, CanonError::PreconditionViolated(_)));
        let err = make_dominant_in_side(&mut t, &decomp, v(5), Side::Inside).unwrap_err();
        assert!(matches!(err, CanonError::PreconditionViolated(_)), "5 is not on the cycle edge pair's sides correctly");
    }

    #[test]
    fn fanning_count_matches_the_degree_deficit() {
        for seed in [31u64, 32] {
            let t0 = random_4connected(30, seed);
            let mut edges = t0.edges();
            edges.sort();
            let (u, w) = edges[0].endpoints();
            let mut t = t0.clone();
            let decomp = hamiltonian_cycle_through(&t, u, w).unwrap();
            let d = t.degree(u);
            let flips = make_dominant_in_side(&mut t, &decomp, u, Side::Inside).unwrap();
            assert_eq!(flips.len(), 30 - 1 - d);
            assert_eq!(t.degree(u), 29);
            for rec in &flips {
                let (a, b) = rec.inserted.endpoints();
                assert!(a == u || b == u, "every fanning flip lands on {u}");
            }
        }
    }

    #[test]
    fn canonical_inputs_with_separating_triangles_are_refused() {
        let mut t = gen_canonical(25).unwrap();
        assert_eq!(to_canonical(&mut t).unwrap_err(), CanonError::NotFourConnected);
        let mut s = gen_stacked(20, 3).unwrap();
        let before = s.clone();
        assert_eq!(to_canonical(&mut s).unwrap_err(), CanonError::NotFourConnected);
        assert!(s.same_embedding(&before), "errors leave the input unchanged");
    }

    #[test]
    fn tetrahedron_is_already_canonical() {
        let mut t = gen_canonical(4).unwrap();
        assert!(to_canonical(&mut t).unwrap().is_empty());
    }

    #[test]
    fn small_sizes_take_the_exact_route() {
        let mut t = octahedron();
        let seq = to_canonical(&mut t).unwrap();
        assert_eq!(seq.len(), 1, "one flip reaches two dominant vertices");
        assert!(is_canonical(&t));
        for (n, seed) in [(8, 4u64), (9, 5), (10, 6), (11, 8)] {
            let mut t = random_4connected(n, seed);
            let seq = to_canonical(&mut t).unwrap();
            assert!(is_canonical(&t), "n = {n}");
            assert!(seq.len() <= 2 * n - 11, "exact distance fits the small-size bound");
        }
    }

    /// A tower of antiprisms (see hamiltonian's fixture): `k + 1` rings of
    /// `s` vertices between two apexes of degree `s`.
    fn tower(s: usize, k: usize) -> Triangulation {
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
                let (lo, hi) = if i % 2 == 0 { (j + s - 1, j) } else { (j, j + 1) };
                connect(ring(i, j), ring(i + 1, lo));
                connect(ring(i, j), ring(i + 1, hi));
            }
        }
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

    #[test]
    fn pipeline_budget_is_tight_on_towers() {
        // Δ = 6 without the 6-6 branch (n < 19): both fannings start at
        // degree 6, so the budget 2n − Δ − 8 = 22 is met with equality
        let mut t = tower(4, 3);
        let seq = to_canonical(&mut t).unwrap();
        assert_eq!(seq.len(), 22);
        assert!(is_canonical(&t));

        // degree-8 apexes with only degree-5 neighbours: one preparatory
        // flip, then 8 + 11 fanning flips, meeting 2n − Δ − 8 = 20 exactly
        let mut t = tower(8, 1);
        let seq = to_canonical(&mut t).unwrap();
        assert_eq!(seq.len(), 20);
        assert!(is_canonical(&t));

        // Δ = 6 with n ≥ 19: the 6-6 branch leaves both chosen vertices at
        // degree 7, meeting 2n − 15 = 25 exactly
        let mut t = tower(6, 2);
        let seq = to_canonical(&mut t).unwrap();
        assert_eq!(seq.len(), 25);
        assert!(is_canonical(&t));
    }

    #[test]
    fn pipeline_respects_budgets_on_random_instances() {
        for (n, seed) in [(13, 41u64), (19, 42), (24, 43), (30, 44)] {
            let t0 = random_4connected(n, seed);
            let delta0 = t0.max_degree();
            let mut t = t0.clone();
            let seq = to_canonical(&mut t).unwrap();
            assert!(is_canonical(&t), "n = {n}");
            assert!(
                seq.len() <= canonical_flip_bound(n, delta0),
                "n = {n}: {} flips > bound {}",
                seq.len(),
                canonical_flip_bound(n, delta0)
            );
            // the sequence replays from the untouched original
            let mut replayed = t0.clone();
            seq.replay(&mut replayed).unwrap();
            assert!(replayed.same_embedding(&t));
            // the apex pair's shared edge survives the whole run
            let (x, y, _) = pick_apex_pair(&t0).unwrap();
            assert!(t.is_edge(x, y));
        }
    }

    #[test]
    fn distance_at_tiny_sizes_is_exact() {
        let t1 = gen_stacked(7, 3).unwrap();
        let t2 = gen_random(7, 60, 11).unwrap();
        let seq = flip_distance_via_canonical(&t1, &t2).unwrap();
        assert_eq!(seq.len(), exact_flip_distance(&t1, &t2).unwrap());
        let mut r = t1.clone();
        seq.replay(&mut r).unwrap();
        assert_eq!(r.canonical_code(), t2.canonical_code());
    }

    #[test]
    fn distance_between_relabeled_copies_lands_home() {
        let t1 = gen_random(10, 80, 21).unwrap();
        let perm: Vec<usize> = (0..10).map(|i| (i + 7) % 10).collect();
        let t2 = t1.relabel(&perm);
        let seq = flip_distance_via_canonical(&t1, &t2).unwrap();
        let mut r = t1.clone();
        seq.replay(&mut r).unwrap();
        assert_eq!(r.canonical_code(), t2.canonical_code());
    }

    #[test]
    fn distance_at_n20_meets_the_diameter_bound() {
        for seed in [51u64, 52] {
            let t1 = gen_random(20, 200, seed).unwrap();
            let t2 = gen_stacked(20, seed + 100).unwrap();
            let seq = flip_distance_via_canonical(&t1, &t2).unwrap();
            assert!(seq.len() <= 70, "5.2 · 20 − 33.6 rounds down to 70");
            let mut r = t1.clone();
            seq.replay(&mut r).unwrap();
            assert_eq!(r.canonical_code(), t2.canonical_code());
        }
    }

    #[test]
    fn distance_requires_equal_sizes() {
        let t1 = octahedron();
        let t2 = gen_stacked(8, 1).unwrap();
        assert_eq!(
            flip_distance_via_canonical(&t1, &t2).unwrap_err(),
            CanonError::SizeMismatch { n1: 6, n2: 8 }
        );
    }
}
