//! Removing every separating triangle in at most ⌊(3n − 9)/5⌋ flips.
//!
//! The driver repeatedly picks a deepest separating triangle, classifies how
//! its edges are shared with other separating triangles (five cases), flips
//! one edge chosen so that the flip removes the triangle without creating a
//! new one, and repeats until none remain.
//!
//! The flip-count bound is certified by a coin-charging argument: place a
//! coin on every edge, pay five coins per flip, and never touch the coins on
//! the outer face. [`ChargeLedger`] makes that argument executable — in
//! audit mode every coin movement is performed concretely and the two
//! supporting invariants are re-verified after every flip:
//!
//! - **A**: every edge of a separating triangle holds a coin;
//! - **B**: every vertex of a separating triangle has an incident free edge
//!   inside that triangle holding a coin.
//!
//! A violation aborts the run with a diagnostic dump; it would falsify the
//! implementation, not the theorem.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::embedding::{Edge, FlipSequence, Triangulation, VertexId};
use crate::septri::{
    enumerate_separating_triangles, free_edges_at, shared_edge_profile, ContainmentIndex,
    EdgeProfile, SeparatingTriangle,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FourConnectError {
    /// The unique 5-vertex triangulation keeps a separating triangle under
    /// every flip; no sequence can succeed.
    #[error("Unremovable: the 5-vertex triangulation cannot lose its separating triangle")]
    Unremovable,
    /// An audited coin invariant failed; the message contains a full dump.
    #[error("AuditFailed: {0}")]
    AuditFailed(String),
    /// A structural guarantee the algorithm relies on did not hold. This
    /// indicates a bug, not a property of the input.
    #[error("InternalInconsistency: {0}")]
    InternalInconsistency(String),
}

/// Why a particular coin is spent. The numeric tags (1–4) are used in the
/// ledger log.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChargeKind {
    /// The flipped edge itself; its coin travelled to the inserted diagonal.
    FlippedEdge,
    /// A non-flipped edge of the removed triangle that no other separating
    /// triangle uses.
    UnsharedEdge,
    /// A free edge at a triangle vertex that no surviving containing
    /// triangle touches.
    FreeAtVertex,
    /// A free edge inside the removed triangle at an endpoint of the
    /// flipped edge, justified by the flipped edge being shared with a
    /// non-containing triangle.
    FreeAtFlipEndpoint,
}

impl ChargeKind {
    pub fn tag(self) -> u8 {
        match self {
            ChargeKind::FlippedEdge => 1,
            ChargeKind::UnsharedEdge => 2,
            ChargeKind::FreeAtVertex => 3,
            ChargeKind::FreeAtFlipEndpoint => 4,
        }
    }
}

impl fmt::Display for ChargeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type{}", self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Charge {
    pub edge: Edge,
    pub kind: ChargeKind,
}

/// The full accounting for one flip: which case applied, the five coins
/// spent, and — only when the flip rotated an outer-face edge — the coin
/// moved onto the edge that just joined the outer face.
#[derive(Clone, Debug)]
pub struct FlipCharges {
    pub case_id: u8,
    /// Pre-flip identity of the flipped edge.
    pub flipped: Edge,
    pub charges: Vec<Charge>,
    /// `(donor, receiver)`: a coin moved from a free edge of the deepest
    /// container onto the previously-interior edge of the new outer face.
    pub recoin: Option<(Edge, Edge)>,
}

/// Coin bookkeeping for the flip-count bound: one coin per edge initially,
/// five spent per flip, outer-face coins untouched.
#[derive(Clone, Debug)]
pub struct ChargeLedger {
    coins: BTreeSet<Edge>,
    pub flips: Vec<FlipCharges>,
}

impl ChargeLedger {
    pub fn new(t: &Triangulation) -> ChargeLedger {
        ChargeLedger { coins: t.edges().into_iter().collect(), flips: Vec::new() }
    }

    pub fn has_coin(&self, e: Edge) -> bool {
        self.coins.contains(&e)
    }

    pub fn coins_left(&self) -> usize {
        self.coins.len()
    }

    pub fn spent(&self) -> usize {
        5 * self.flips.len()
    }

    fn transfer(&mut self, removed: Edge, inserted: Edge) -> Result<(), String> {
        if !self.coins.remove(&removed) {
            return Err(format!("flipped edge {removed} held no coin"));
        }
        if !self.coins.insert(inserted) {
            return Err(format!("inserted edge {inserted} already held a coin"));
        }
        Ok(())
    }

    fn take(&mut self, c: Charge) -> Result<(), String> {
        if !self.coins.remove(&c.edge) {
            return Err(format!("{} charge on {}: no coin to take", c.kind, c.edge));
        }
        Ok(())
    }

    fn move_coin(&mut self, from: Edge, to: Edge) -> Result<(), String> {
        if !self.coins.remove(&from) {
            return Err(format!("recoin donor {from} held no coin"));
        }
        if !self.coins.insert(to) {
            return Err(format!("recoin receiver {to} already held a coin"));
        }
        Ok(())
    }

    /// One line per charge: `charge <case> <u> <v> type<k>`, plus
    /// `recoin <u> <v> -> <x> <y>` lines for coin moves.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        for fc in &self.flips {
            for c in &fc.charges {
                out.push_str(&format!("charge {} {} {}\n", fc.case_id, c.edge, c.kind));
            }
            if let Some((from, to)) = fc.recoin {
                out.push_str(&format!("recoin {from} -> {to}\n"));
            }
        }
        out
    }
}

/// Is the triangulation free of separating triangles?
///
/// This is the working definition of 4-connectedness throughout the crate.
/// It deliberately diverges from vertex connectivity at n = 4: the complete
/// graph on four vertices has connectivity 3 but no separating triangle,
/// so it counts as 4-connected here.
pub fn is_4connected(t: &Triangulation) -> bool {
    enumerate_separating_triangles(t).is_empty()
}

/// Chooses the edge of deepest triangle `d` to flip, and the case (1–5) the
/// surrounding structure falls into:
///
/// 1. no edge of `d` is shared → flip its smallest non-outer edge;
/// 2. edges are shared but none with a containing triangle → flip the
///    smallest shared edge;
/// 3. the only shared edge is shared with a containing triangle → flip it;
/// 4. one containing-shared edge plus one other shared edge → flip the
///    other one;
/// 5. one containing-shared edge plus two other shared edges → flip the
///    smaller of the other two.
///
/// Every choice satisfies the safety condition for flips of separating-
/// triangle edges (the chosen edge lies on several separating triangles, or
/// no edge of `d` does), so the flip removes `d` and creates nothing new.
pub fn select_flip_edge(
    t: &Triangulation,
    d: &SeparatingTriangle,
    profile: &EdgeProfile,
) -> Result<(Edge, u8), FourConnectError> {
    let err = |msg: String| FourConnectError::InternalInconsistency(msg);
    let shared = profile.shared_edges();
    match (shared.len(), profile.containing_edge()) {
        (0, None) => {
            let outer = t.outer_edges();
            let e = d
                .edges()
                .into_iter()
                .find(|e| !outer.contains(e))
                .ok_or_else(|| err("all three edges of a triangle lie on the outer face".into()))?;
            Ok((e, 1))
        }
        (k, None) if k >= 1 => Ok((shared[0], 2)),
        (1, Some(ce)) => {
            if shared != [ce] {
                return Err(err(format!(
                    "single shared edge {} is not the containing-shared edge {ce}",
                    shared[0]
                )));
            }
            Ok((ce, 3))
        }
        (2, Some(ce)) => Ok((shared.into_iter().find(|&e| e != ce).unwrap(), 4)),
        (3, Some(ce)) => Ok((shared.into_iter().find(|&e| e != ce).unwrap(), 5)),
        (k, c) => Err(err(format!("impossible sharing profile: {k} shared edges, containing {c:?}"))),
    }
}

/// The charges for one flip, planned against the pre-flip triangulation.
/// The flipped edge's own charge can only be taken after the flip (the coin
/// sits on the inserted diagonal by then), hence the flag.
struct ChargePlan {
    charge_flipped: bool,
    concrete: Vec<Charge>,
    /// Case 3 with the flipped edge on the outer face: coin donors for the
    /// edge about to join the outer face, in preference order.
    recoin_donors: Vec<Edge>,
}

fn plan_charges(
    t: &Triangulation,
    index: &ContainmentIndex,
    d_pos: usize,
    profile: &EdgeProfile,
    e_flip: Edge,
    case_id: u8,
    ledger: &ChargeLedger,
) -> Result<ChargePlan, FourConnectError> {
    let err = |msg: String| FourConnectError::InternalInconsistency(msg);
    let d = index.triangle(d_pos);
    let free_d = free_edges_at(t, d);
    let containers = index.containers(d_pos);
    let on_container =
        |v: VertexId| containers.iter().any(|&a| index.triangle(a).has_vertex(v));
    let entry = |e: Edge| profile.edges.iter().find(|s| s.edge == e).unwrap();
    let outer = t.outer_edges();

    let mut plan = ChargePlan { charge_flipped: true, concrete: Vec::new(), recoin_donors: Vec::new() };
    // Free edges may already have spent their coins in earlier flips; the
    // invariant only promises that one coined free edge remains per
    // (triangle, vertex), so the charges must pick among those.
    let coined = |edges: &std::collections::BTreeMap<VertexId, Vec<Edge>>,
                  v: VertexId,
                  kind: ChargeKind| {
        edges[&v]
            .iter()
            .copied()
            .find(|&f| ledger.has_coin(f))
            .map(|edge| Charge { edge, kind })
            .ok_or_else(|| {
                FourConnectError::AuditFailed(format!(
                    "no coined free edge at vertex {v} for a {kind} charge"
                ))
            })
    };
    let free = |edges: &std::collections::BTreeMap<VertexId, Vec<Edge>>, v: VertexId| {
        coined(edges, v, ChargeKind::FreeAtVertex)
    };

    match case_id {
        1 => {
            let others: Vec<Edge> = d.edges().into_iter().filter(|&e| e != e_flip).collect();
            if let Some(outer_edge) = d.edges().into_iter().find(|e| outer.contains(e)) {
                // The triangle borders the outer face, so nothing contains
                // it except through that very edge — and nothing shares an
                // edge with it at all. No container exists, all three
                // vertices take a free-edge charge, and the outer edge
                // keeps its coin.
                if !containers.is_empty() {
                    return Err(err(format!(
                        "unshared triangle {:?} on the outer face must have no containers",
                        d.vertices
                    )));
                }
                for e in others.into_iter().filter(|&e| e != outer_edge) {
                    plan.concrete.push(Charge { edge: e, kind: ChargeKind::UnsharedEdge });
                }
                for &v in &d.vertices {
                    plan.concrete.push(free(&free_d, v)?);
                }
            } else {
                for e in others {
                    plan.concrete.push(Charge { edge: e, kind: ChargeKind::UnsharedEdge });
                }
                let eligible: Vec<VertexId> =
                    d.vertices.iter().copied().filter(|&v| !on_container(v)).collect();
                if eligible.len() < 2 {
                    return Err(err(format!(
                        "triangle {:?} shares more than one vertex with containers",
                        d.vertices
                    )));
                }
                for &v in &eligible[..2] {
                    plan.concrete.push(free(&free_d, v)?);
                }
            }
        }
        2 => {
            let se = entry(e_flip);
            if !se.containing.is_empty() {
                return Err(err("case 2 must flip an edge with no containing sharer".into()));
            }
            let b_pos = se.non_containing[0];
            let b = index.triangle(b_pos);
            if index.containers(b_pos) != containers {
                return Err(err(format!(
                    "triangles {:?} and {:?} across the flipped edge must have identical containers",
                    d.vertices, b.vertices
                )));
            }
            let free_b = free_edges_at(t, b);
            let (p, q) = e_flip.endpoints();
            plan.concrete.push(coined(&free_d, p, ChargeKind::FreeAtFlipEndpoint)?);
            plan.concrete.push(coined(&free_d, q, ChargeKind::FreeAtFlipEndpoint)?);
            let d_v = d.vertex_off_edge(e_flip);
            let b_v = b.vertex_off_edge(e_flip);
            let mut quad = [p, q, d_v, b_v];
            quad.sort();
            let eligible: Vec<VertexId> =
                quad.iter().copied().filter(|&v| !on_container(v)).collect();
            if eligible.len() < 2 {
                return Err(err(format!(
                    "at most two of the four vertices around {e_flip} may touch containers"
                )));
            }
            for &v in &eligible[..2] {
                // the coin comes from inside whichever of the two triangles
                // owns this corner of the quadrilateral
                let source = if v == d_v { &free_d } else { &free_b };
                plan.concrete.push(free(source, v)?);
            }
        }
        3 => {
            let (p, q) = e_flip.endpoints();
            let d_v = d.vertex_off_edge(e_flip);
            if on_container(d_v) {
                return Err(err(format!(
                    "vertex {d_v} opposite the container-shared edge must avoid all containers"
                )));
            }
            for e in d.edges().into_iter().filter(|&e| e != e_flip) {
                plan.concrete.push(Charge { edge: e, kind: ChargeKind::UnsharedEdge });
            }
            plan.concrete.push(free(&free_d, d_v)?);
            let survivors: Vec<usize> = containers
                .iter()
                .copied()
                .filter(|&a| !index.triangle(a).has_edge(e_flip))
                .collect();
            if outer.contains(&e_flip) {
                // Flipping an outer edge: its coin stays put (it lands on
                // the inserted diagonal, which joins the new outer face);
                // both endpoints take free-edge charges instead, and the
                // deepest container donates a coin for the interior edge
                // that the new outer face absorbs.
                if !survivors.is_empty() {
                    return Err(err(
                        "every container of an outer-edge triangle must use that edge".into(),
                    ));
                }
                plan.charge_flipped = false;
                plan.concrete.push(free(&free_d, p)?);
                plan.concrete.push(free(&free_d, q)?);
                let a_star = containers
                    .iter()
                    .copied()
                    .min_by_key(|&a| (std::cmp::Reverse(index.depth(a)), a))
                    .ok_or_else(|| err("case 3 requires a containing triangle".into()))?;
                let at = index.triangle(a_star);
                for other in 0..index.len() {
                    if index.contains(a_star, other) && other != d_pos {
                        return Err(err(format!(
                            "deepest container {:?} may contain only the flipped triangle",
                            at.vertices
                        )));
                    }
                }
                let a_v = at.vertex_off_edge(e_flip);
                plan.recoin_donors = free_edges_at(t, at)[&a_v].clone();
            } else {
                let w = [p, q]
                    .into_iter()
                    .find(|&v| survivors.iter().all(|&a| !index.triangle(a).has_vertex(v)))
                    .ok_or_else(|| {
                        err(format!(
                            "an endpoint of {e_flip} must avoid every container surviving the flip"
                        ))
                    })?;
                plan.concrete.push(free(&free_d, w)?);
            }
        }
        4 => {
            let ce = profile.containing_edge().unwrap();
            let e_u = d
                .edges()
                .into_iter()
                .find(|&e| e != e_flip && e != ce)
                .expect("three distinct edges");
            if entry(e_u).is_shared() {
                return Err(err(format!("case 4 requires the third edge {e_u} to be unshared")));
            }
            let v = d.vertex_off_edge(ce);
            if !e_flip.has_endpoint(v) || on_container(v) {
                return Err(err(format!(
                    "vertex {v} opposite the container-shared edge must sit on {e_flip}, off all containers"
                )));
            }
            let se = entry(e_flip);
            let b = index.triangle(se.non_containing[0]);
            let free_b = free_edges_at(t, b);
            let (r, s) = e_flip.endpoints();
            plan.concrete.push(Charge { edge: e_u, kind: ChargeKind::UnsharedEdge });
            plan.concrete.push(coined(&free_d, r, ChargeKind::FreeAtFlipEndpoint)?);
            plan.concrete.push(coined(&free_d, s, ChargeKind::FreeAtFlipEndpoint)?);
            plan.concrete.push(free(&free_b, v)?);
        }
        5 => {
            let ce = profile.containing_edge().unwrap();
            let e_other = d
                .edges()
                .into_iter()
                .find(|&e| e != e_flip && e != ce)
                .expect("three distinct edges");
            if entry(e_other).non_containing.is_empty() {
                return Err(err(format!("case 5 requires {e_other} to have a non-containing sharer")));
            }
            let w = d.vertex_off_edge(ce);
            if on_container(w) {
                return Err(err(format!("vertex {w} off the container-shared edge touches a container")));
            }
            // `v` sits on the containing triangle, on `d`, and on the
            // triangle sharing the non-flipped edge; that sharer's intact
            // free edge at `v` keeps invariant B alive for anything that
            // still contains this corner, so `d`'s own free edge at `v` is
            // the fifth coin.
            let v = e_other.other(w);
            let b_prime = index.triangle(entry(e_flip).non_containing[0]);
            let free_bp = free_edges_at(t, b_prime);
            let (r, s) = e_flip.endpoints();
            plan.concrete.push(coined(&free_d, r, ChargeKind::FreeAtFlipEndpoint)?);
            plan.concrete.push(coined(&free_d, s, ChargeKind::FreeAtFlipEndpoint)?);
            plan.concrete.push(free(&free_bp, w)?);
            plan.concrete.push(free(&free_d, v)?);
        }
        other => return Err(err(format!("no such case: {other}"))),
    }

    let expected = 5 - usize::from(plan.charge_flipped);
    if plan.concrete.len() != expected {
        return Err(err(format!(
            "case {case_id} planned {} concrete charges, expected {expected}",
            plan.concrete.len()
        )));
    }
    let distinct: BTreeSet<Edge> = plan.concrete.iter().map(|c| c.edge).collect();
    if distinct.len() != plan.concrete.len() {
        return Err(err(format!("case {case_id} charged the same edge twice")));
    }
    Ok(plan)
}

/// Audit: re-verify the two coin invariants plus the outer-face guarantee
/// on the current triangulation.
fn verify_ledger(t: &Triangulation, ledger: &ChargeLedger) -> Result<(), String> {
    for tri in enumerate_separating_triangles(t) {
        for e in tri.edges() {
            if !ledger.has_coin(e) {
                return Err(format!(
                    "invariant A violated: edge {e} of separating triangle {:?} has no coin",
                    tri.vertices
                ));
            }
        }
        for (v, edges) in free_edges_at(t, &tri) {
            if !edges.iter().any(|&e| ledger.has_coin(e)) {
                return Err(format!(
                    "invariant B violated: no coined free edge inside {:?} at vertex {v}",
                    tri.vertices
                ));
            }
        }
    }
    for e in t.outer_edges() {
        if !ledger.has_coin(e) {
            return Err(format!("outer-face edge {e} lost its coin"));
        }
    }
    Ok(())
}

/// Flips until no separating triangle remains, in at most ⌊(3n − 9)/5⌋
/// flips. With `audit` on, the returned [`ChargeLedger`] contains the
/// verified coin accounting for every flip.
///
/// n = 4 succeeds with an empty sequence (no separating triangles exist);
/// n = 5 fails with [`FourConnectError::Unremovable`].
pub fn make_4_connected(
    t: &Triangulation,
    audit: bool,
) -> Result<(FlipSequence, Option<ChargeLedger>), FourConnectError> {
    if t.n() == 5 {
        return Err(FourConnectError::Unremovable);
    }
    let bound = (3 * t.n() - 9) / 5;
    let mut cur = t.clone();
    let mut seq = FlipSequence::new(t);
    let mut ledger = audit.then(|| ChargeLedger::new(t));
    if let Some(ledger) = &ledger {
        verify_ledger(&cur, ledger).map_err(FourConnectError::AuditFailed)?;
    }
    let mut index = ContainmentIndex::from_triangulation(&cur);
    loop {
        if index.is_empty() {
            break;
        }
        let d_pos = index.deepest(&cur).expect("nonempty index");
        let d = index.triangle(d_pos).clone();
        let profile = shared_edge_profile(&cur, &index, d_pos);
        let (e, case_id) = select_flip_edge(&cur, &d, &profile)?;

        let edge_shared = index.using_edge(e).len() >= 2;
        let none_shared = d.edges().iter().all(|&f| index.using_edge(f).len() == 1);
        if !(edge_shared || none_shared) {
            return Err(FourConnectError::InternalInconsistency(format!(
                "selected edge {e} does not satisfy the flip safety condition"
            )));
        }

        let plan = match &ledger {
            Some(l) => Some(plan_charges(&cur, &index, d_pos, &profile, e, case_id, l)?),
            None => None,
        };
        let doomed: Vec<[VertexId; 3]> =
            index.using_edge(e).iter().map(|&i| index.triangle(i).vertices).collect();

        let rec = cur.flip(e).map_err(|fe| {
            FourConnectError::InternalInconsistency(format!(
                "edge {e} of separating triangle {:?} must be flippable: {fe}",
                d.vertices
            ))
        })?;
        seq.records.push(rec);
        if seq.len() > bound {
            return Err(FourConnectError::InternalInconsistency(format!(
                "exceeded the flip bound {bound}"
            )));
        }

        // the flip must remove every triangle on the flipped edge and
        // introduce none; the rebuilt index doubles as the next iteration's
        let next = ContainmentIndex::from_triangulation(&cur);
        for tri in &next.triangles {
            if doomed.contains(&tri.vertices) {
                return Err(FourConnectError::InternalInconsistency(format!(
                    "triangle {:?} on the flipped edge survived",
                    tri.vertices
                )));
            }
            let old = index.triangles.iter().find(|s| s.vertices == tri.vertices);
            match old {
                None => {
                    return Err(FourConnectError::InternalInconsistency(format!(
                        "flip created a new separating triangle {:?}",
                        tri.vertices
                    )))
                }
                Some(old) => {
                    if audit && old.interior != tri.interior {
                        return Err(FourConnectError::AuditFailed(format!(
                            "surviving triangle {:?} changed interior\n{}",
                            tri.vertices,
                            cur.serialize()
                        )));
                    }
                }
            }
        }

        if let (Some(ledger), Some(plan)) = (&mut ledger, plan) {
            let fail = |ledger: &ChargeLedger, msg: String| {
                FourConnectError::AuditFailed(format!(
                    "{msg}\nafter flip {} (case {case_id}, edge {e})\n{}\nledger:\n{}",
                    seq.len(),
                    cur.serialize(),
                    ledger.to_log()
                ))
            };
            let mut fc =
                FlipCharges { case_id, flipped: e, charges: Vec::new(), recoin: None };
            ledger
                .transfer(rec.removed, rec.inserted)
                .map_err(|m| fail(ledger, m))?;
            if plan.charge_flipped {
                fc.charges.push(Charge { edge: rec.inserted, kind: ChargeKind::FlippedEdge });
            }
            fc.charges.extend(plan.concrete.iter().copied());
            for &c in &fc.charges {
                ledger.take(c).map_err(|m| fail(ledger, m))?;
            }
            if !plan.recoin_donors.is_empty() {
                // flipping an outer edge rotated the outer face; an edge
                // that used to be interior is now outer and may need a coin
                if let Some(receiver) =
                    cur.outer_edges().into_iter().find(|&oe| !ledger.has_coin(oe))
                {
                    let donor = plan
                        .recoin_donors
                        .iter()
                        .copied()
                        .find(|&f| ledger.has_coin(f))
                        .ok_or_else(|| {
                            fail(ledger, "no coined donor edge for the new outer edge".into())
                        })?;
                    ledger.move_coin(donor, receiver).map_err(|m| fail(ledger, m))?;
                    fc.recoin = Some((donor, receiver));
                }
            }
            ledger.flips.push(fc);
            verify_ledger(&cur, ledger).map_err(|m| fail(ledger, m))?;
        }
        index = next;
    }
    if let Some(ledger) = &ledger {
        debug_assert!(ledger.spent() <= 3 * t.n() - 9);
    }
    Ok((seq, ledger))
}

/// The blunt 3-approximation: grab the smallest separating triangle; flip
/// all of its edges that other separating triangles use (skipping any that
/// stopped being used by the time their turn comes), or its smallest edge
/// if none are shared; repeat.
pub fn min_flips_approx(t: &Triangulation) -> Result<FlipSequence, FourConnectError> {
    if t.n() == 5 {
        return Err(FourConnectError::Unremovable);
    }
    let mut cur = t.clone();
    let mut seq = FlipSequence::new(t);
    let cap = 3 * t.n();
    loop {
        let index = ContainmentIndex::from_triangulation(&cur);
        if index.is_empty() {
            break;
        }
        let tri = index.triangle(0).clone();
        let shared: Vec<Edge> =
            tri.edges().into_iter().filter(|&e| index.using_edge(e).len() >= 2).collect();
        let batch = if shared.is_empty() { vec![tri.edges()[0]] } else { shared };
        for e in batch {
            let still_used =
                enumerate_separating_triangles(&cur).iter().any(|s| s.has_edge(e));
            if !still_used {
                continue;
            }
            let rec = cur.flip(e).map_err(|fe| {
                FourConnectError::InternalInconsistency(format!(
                    "edge {e} of a separating triangle must be flippable: {fe}"
                ))
            })?;
            seq.records.push(rec);
            if seq.len() > cap {
                return Err(FourConnectError::InternalInconsistency(format!(
                    "approximation exceeded {cap} flips without converging"
                )));
            }
        }
    }
    Ok(seq)
}
