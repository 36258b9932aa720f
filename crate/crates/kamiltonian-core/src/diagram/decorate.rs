//! Decorated plane diagrams: trees with a cyclic edge order at every mixer,
//! labelled external excitations and directed internal excitations.
//!
//! Two decorations are the same diagram when an orientation-preserving
//! isomorphism of plane trees (an overall rotation of the drawing) maps one to
//! the other. Uniqueness is decided by a canonical string: the minimum, over
//! every mixer and every starting edge, of a traversal that reads edges in
//! cyclic order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::freq::FrequencyVector;
use crate::symbol::Sym;
use crate::system::FramedSystem;

use super::tree::UnrootedTree;

/// Kind of an external excitation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtKind {
    /// Resonant excitation of a mode.
    Resonant(u8),
    /// Drive excitation of a tone.
    Drive(u8),
}

/// Travelling direction of an edge relative to the mixer it touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    /// Travelling into the mixer.
    In,
    /// Travelling away from the mixer.
    Out,
}

/// External edge label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExtLeg {
    /// Excitation kind.
    pub kind: ExtKind,
    /// Direction relative to the adjacent mixer.
    pub dir: Dir,
}

impl ExtLeg {
    /// Incoming drive excitation of tone `l`.
    pub fn drive_in(l: u8) -> Self {
        ExtLeg { kind: ExtKind::Drive(l), dir: Dir::In }
    }
    /// Outgoing drive excitation of tone `l`.
    pub fn drive_out(l: u8) -> Self {
        ExtLeg { kind: ExtKind::Drive(l), dir: Dir::Out }
    }
    /// Incoming resonant excitation of mode `k`.
    pub fn resonant_in(k: u8) -> Self {
        ExtLeg { kind: ExtKind::Resonant(k), dir: Dir::In }
    }
    /// Outgoing resonant excitation of mode `k`.
    pub fn resonant_out(k: u8) -> Self {
        ExtLeg { kind: ExtKind::Resonant(k), dir: Dir::Out }
    }

    /// Phase `e^{iφt}` this excitation carries in the drawing: an incoming
    /// `A e^{−iω′t}` has `φ = −ω′`, an outgoing one (`A* e^{iω′t}`) `φ = +ω′`.
    pub fn phase(&self, sys: &FramedSystem) -> FrequencyVector {
        let w = match self.kind {
            ExtKind::Resonant(k) => sys.modes[k as usize].frame,
            ExtKind::Drive(l) => FrequencyVector::unit(Sym::Wd(l)),
        };
        match self.dir {
            Dir::In => -w,
            Dir::Out => w,
        }
    }

    /// Same excitation travelling the other way.
    pub fn reversed(&self) -> Self {
        ExtLeg { kind: self.kind, dir: if self.dir == Dir::In { Dir::Out } else { Dir::In } }
    }

    fn code(&self) -> String {
        let k = match self.kind {
            ExtKind::Resonant(k) => format!("A{k}"),
            ExtKind::Drive(l) => format!("X{l}"),
        };
        let d = if self.dir == Dir::In { "i" } else { "o" };
        format!("{k}{d}")
    }
}

/// A decorated plane diagram.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    /// Underlying tree.
    pub tree: UnrootedTree,
    /// Cyclic (counter-clockwise) neighbour order at every vertex.
    pub rotation: Vec<Vec<usize>>,
    /// External label of every leaf (`None` for mixers).
    pub labels: Vec<Option<ExtLeg>>,
    /// Internal edges as directed pairs `(from, to)` (travelling direction).
    pub arrows: Vec<(usize, usize)>,
    /// Frequency `ω_out` carried by every internal edge along its arrow.
    pub edge_freq: Vec<FrequencyVector>,
    /// Net frequency (sum of external phases); zero for retained diagrams.
    pub net: FrequencyVector,
    /// Perturbative order `Σ (rank − 2)`.
    pub order: usize,
    /// Number of labelled raw decorations represented by this diagram.
    pub multiplicity: usize,
    /// Canonical encoding (diagram identity).
    pub canon: String,
}

impl Diagram {
    /// Whether the internal edge `u — v` travels from `u` to `v`.
    pub fn travels(&self, u: usize, v: usize) -> bool {
        self.arrows.contains(&(u, v))
    }

    /// Diagram with every arrow inverted (the complex-conjugate diagram).
    pub fn conjugate(&self, sys: &FramedSystem) -> Diagram {
        let labels: Vec<_> = self.labels.iter().map(|l| l.map(|x| x.reversed())).collect();
        let arrows: Vec<_> = self.arrows.iter().map(|&(a, b)| (b, a)).collect();
        // Reflection reverses the cyclic order at every vertex.
        let rotation: Vec<Vec<usize>> = self.rotation.iter().map(|r| r.iter().rev().copied().collect()).collect();
        build(&self.tree, rotation, labels, arrows, sys, self.multiplicity)
    }
}

fn side_phase(
    tree: &UnrootedTree,
    labels: &[Option<ExtLeg>],
    phases: &[FrequencyVector],
    v: usize,
    from: usize,
) -> FrequencyVector {
    if let Some(_l) = labels[v] {
        return phases[v];
    }
    let mut s = FrequencyVector::zero();
    for &w in &tree.adj[v] {
        if w != from {
            s = s + side_phase(tree, labels, phases, w, v);
        }
    }
    s
}

fn encode(d_rot: &[Vec<usize>], labels: &[Option<ExtLeg>], arrows: &[(usize, usize)], from: usize, v: usize) -> String {
    if let Some(l) = labels[v] {
        return l.code();
    }
    let rot = &d_rot[v];
    let start = rot.iter().position(|&w| w == from).unwrap_or(0);
    let mut s = String::from("(");
    for i in 1..rot.len() {
        let w = rot[(start + i) % rot.len()];
        if labels[w].is_none() {
            s.push(if arrows.contains(&(v, w)) { '>' } else { '<' });
        }
        s.push_str(&encode(d_rot, labels, arrows, v, w));
    }
    s.push(')');
    s
}

fn canonical(tree: &UnrootedTree, rot: &[Vec<usize>], labels: &[Option<ExtLeg>], arrows: &[(usize, usize)]) -> String {
    let mut best: Option<String> = None;
    for v in tree.internal() {
        let r = &rot[v];
        for start in 0..r.len() {
            let mut s = String::from("[");
            for i in 0..r.len() {
                let w = r[(start + i) % r.len()];
                if labels[w].is_none() {
                    s.push(if arrows.contains(&(v, w)) { '>' } else { '<' });
                }
                s.push_str(&encode(rot, labels, arrows, v, w));
            }
            s.push(']');
            if best.as_ref().map_or(true, |b| s < *b) {
                best = Some(s);
            }
        }
    }
    best.unwrap_or_default()
}

fn build(
    tree: &UnrootedTree,
    rotation: Vec<Vec<usize>>,
    labels: Vec<Option<ExtLeg>>,
    arrows: Vec<(usize, usize)>,
    sys: &FramedSystem,
    multiplicity: usize,
) -> Diagram {
    let phases: Vec<FrequencyVector> =
        labels.iter().map(|l| l.map(|x| x.phase(sys)).unwrap_or_else(FrequencyVector::zero)).collect();
    let net = labels.iter().flatten().fold(FrequencyVector::zero(), |a, l| a + l.phase(sys));
    // An excitation travelling x → y has ω_out = −(phase collected on x's side).
    let edge_freq = arrows.iter().map(|&(x, y)| -side_phase(tree, &labels, &phases, x, y)).collect();
    let canon = canonical(tree, &rotation, &labels, &arrows);
    Diagram { tree: tree.clone(), rotation, labels, arrows, edge_freq, net, order: tree.order(), multiplicity, canon }
}

/// All cyclic orders of `items` (first element fixed).
fn cyclic_orders(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return alloc::vec![items.to_vec()];
    }
    let mut out = Vec::new();
    let rest: Vec<usize> = items[1..].to_vec();
    for p in permutations(&rest) {
        let mut v = alloc::vec![items[0]];
        v.extend(p);
        out.push(v);
    }
    out
}

/// All permutations (distinct positions) of a slice.
pub(crate) fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

/// Distinct permutations of a multiset given as a sorted slice.
pub(crate) fn multiset_permutations<T: Clone + Ord>(items: &[T]) -> Vec<Vec<T>> {
    let mut sorted = items.to_vec();
    sorted.sort();
    let mut out = Vec::new();
    let mut used = alloc::vec![false; sorted.len()];
    let mut cur = Vec::with_capacity(sorted.len());
    fn rec<T: Clone + Ord>(s: &[T], used: &mut [bool], cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == s.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..s.len() {
            if used[i] || (i > 0 && s[i] == s[i - 1] && !used[i - 1]) {
                continue;
            }
            used[i] = true;
            cur.push(s[i].clone());
            rec(s, used, cur, out);
            cur.pop();
            used[i] = false;
        }
    }
    rec(&sorted, &mut used, &mut cur, &mut out);
    out
}

/// Whether an excitation at `ω_out` would be resonant with some mode frame.
fn is_resonant(sys: &FramedSystem, w: &FrequencyVector) -> bool {
    sys.modes.iter().any(|m| m.frame == *w)
}

/// Enumerates all unique decorations of `tree` with the external multiset `spec`.
///
/// Diagrams with non-zero net frequency are dropped, as are diagrams with an
/// internal excitation resonant with a mode frame. The result is sorted by
/// canonical encoding.
pub fn decorate(tree: &UnrootedTree, spec: &[ExtLeg], sys: &FramedSystem) -> Vec<Diagram> {
    let leaves = tree.leaves();
    if leaves.len() != spec.len() {
        return Vec::new();
    }
    let net = spec.iter().fold(FrequencyVector::zero(), |a, l| a + l.phase(sys));
    if !net.is_zero() {
        return Vec::new();
    }
    let internal = tree.internal();
    let iedges = tree.internal_edges();
    // Rotation systems: product of cyclic orders at every mixer.
    let mut rotations: Vec<Vec<Vec<usize>>> = alloc::vec![tree.adj.clone()];
    for &v in &internal {
        let mut next = Vec::new();
        for r in &rotations {
            for c in cyclic_orders(&tree.adj[v]) {
                let mut r2 = r.clone();
                r2[v] = c;
                next.push(r2);
            }
        }
        rotations = next;
    }
    let labelings = multiset_permutations(spec);
    let mut classes: BTreeMap<String, Diagram> = BTreeMap::new();
    for rot in &rotations {
        for lab in &labelings {
            let mut labels = alloc::vec![None; tree.len()];
            for (i, &v) in leaves.iter().enumerate() {
                labels[v] = Some(lab[i]);
            }
            for mask in 0..(1usize << iedges.len()) {
                let arrows: Vec<(usize, usize)> = iedges
                    .iter()
                    .enumerate()
                    .map(|(i, &(u, v))| if mask >> i & 1 == 1 { (v, u) } else { (u, v) })
                    .collect();
                let d = build(tree, rot.clone(), labels.clone(), arrows, sys, 1);
                if d.edge_freq.iter().any(|w| is_resonant(sys, w)) {
                    continue;
                }
                classes
                    .entry(d.canon.clone())
                    .and_modify(|e| e.multiplicity += 1)
                    .or_insert(d);
            }
        }
    }
    classes.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::super::tree::enumerate_unrooted_trees;
    use super::*;

    fn three_leg_spec() -> Vec<ExtLeg> {
        alloc::vec![
            ExtLeg::drive_in(0),
            ExtLeg::drive_in(0),
            ExtLeg::resonant_out(0),
            ExtLeg::resonant_out(0),
            ExtLeg::resonant_out(0)
        ]
    }

    #[test]
    fn star_has_two_necklaces() {
        let sys = FramedSystem::single(3, 2, &[3, 4, 5], true);
        let trees = enumerate_unrooted_trees(5);
        let d = decorate(&trees[0], &three_leg_spec(), &sys);
        assert_eq!(d.len(), 2);
        assert_eq!(d.iter().map(|x| x.multiplicity).sum::<usize>(), 4 * 3 * 2 * 10);
    }

    #[test]
    fn unbalanced_spec_is_empty() {
        let sys = FramedSystem::single(3, 2, &[3, 4, 5], true);
        let trees = enumerate_unrooted_trees(5);
        let mut spec = three_leg_spec();
        spec[0] = ExtLeg::drive_out(0);
        assert!(decorate(&trees[0], &spec, &sys).is_empty());
    }

    #[test]
    fn conjugation_is_an_involution() {
        let sys = FramedSystem::single(3, 2, &[3, 4, 5], true);
        let trees = enumerate_unrooted_trees(5);
        for d in decorate(&trees[2], &three_leg_spec(), &sys) {
            let c = d.conjugate(&sys);
            assert_eq!(c.net, FrequencyVector::zero());
            assert_eq!(c.conjugate(&sys).canon, d.canon);
        }
    }
}
