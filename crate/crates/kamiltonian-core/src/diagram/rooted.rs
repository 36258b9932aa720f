//! Rooted diagrams and their evaluation.
//!
//! A rooted diagram is read from its output: the root mixer produces a term of
//! the right-hand side of the equation of motion (Γ level when static). Each
//! child is either an external excitation or the output of another mixer,
//! which enters through its propagator `−1/f` (`f` = phase of the child
//! mixer's output). A child drawn with its arrows inverted ("inverted" flag)
//! is the complex conjugate of the mixer fed by the conjugated inputs.
//!
//! Children are combined with the star product in the stored (counter-
//! clockwise) order. The unordered representative of a diagram stands for all
//! its distinct input orderings; [`evaluate_class`] computes that sum as
//! symmetry factor × symmetrised product, with the symmetrised product taken
//! through the polarisation identity (star powers of partial sums), so the
//! identity "Σ ordered = factor × unordered" is a genuine check.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::freq::FrequencyVector;
use crate::poly::{MonoKey, PhasePolynomial};
use crate::rational::{factorial, GQ};
use crate::scalar::{Ctx, Scalar};
use crate::symbol::Sym;
use crate::system::FramedSystem;

use super::decorate::{permutations, Diagram, Dir, ExtKind};

/// External excitation as drawn in a rooted diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Leg {
    /// `λ_k A_k e^{−iω_k′t}`.
    A(u8),
    /// `λ_k A_k* e^{iω_k′t}`.
    Ac(u8),
    /// `ξ_l e^{−iω_l t}`.
    Xi(u8),
    /// `ξ_l* e^{iω_l t}`.
    XiC(u8),
}

impl Leg {
    /// Conjugate excitation.
    pub fn conj(self) -> Leg {
        match self {
            Leg::A(k) => Leg::Ac(k),
            Leg::Ac(k) => Leg::A(k),
            Leg::Xi(l) => Leg::XiC(l),
            Leg::XiC(l) => Leg::Xi(l),
        }
    }

    fn code(&self) -> String {
        match self {
            Leg::A(k) => format!("a{k}"),
            Leg::Ac(k) => format!("c{k}"),
            Leg::Xi(l) => format!("x{l}"),
            Leg::XiC(l) => format!("y{l}"),
        }
    }

    /// Phase of the excitation.
    pub fn phase(&self, sys: &FramedSystem) -> FrequencyVector {
        match self {
            Leg::A(k) => -sys.modes[*k as usize].frame,
            Leg::Ac(k) => sys.modes[*k as usize].frame,
            Leg::Xi(l) => -FrequencyVector::unit(Sym::Wd(*l)),
            Leg::XiC(l) => FrequencyVector::unit(Sym::Wd(*l)),
        }
    }

    /// Value of the excitation (`with_lambda` adds the participation factor).
    pub fn value<S: Scalar, C: Ctx<S>>(&self, sys: &FramedSystem, ctx: &C, with_lambda: bool) -> PhasePolynomial<S> {
        let modes = sys.n_modes();
        match *self {
            Leg::A(k) | Leg::Ac(k) => {
                let mut v = PhasePolynomial::<S>::var(modes, k as usize).shift_phase(&-sys.modes[k as usize].frame);
                if with_lambda && sys.participation {
                    v = v.scale(&ctx.sym(Sym::Lambda(k)));
                }
                if matches!(self, Leg::Ac(_)) {
                    v = v.conj();
                }
                v
            }
            Leg::Xi(l) => PhasePolynomial::monomial(
                modes,
                MonoKey::one().with_phase(-FrequencyVector::unit(Sym::Wd(l))),
                ctx.sym(Sym::Xi(l)),
            ),
            Leg::XiC(l) => PhasePolynomial::monomial(
                modes,
                MonoKey::one().with_phase(FrequencyVector::unit(Sym::Wd(l))),
                ctx.sym(Sym::XiC(l)),
            ),
        }
    }
}

/// Vertex of a rooted diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    /// External excitation.
    Leaf(Leg),
    /// `g_m` mixer of rank `children.len() + 1` feeding mode `mode`.
    Mixer {
        /// Mode receiving the output.
        mode: u8,
        /// Output drawn with inverted arrows (conjugate excitation).
        inverted: bool,
        /// Inputs in counter-clockwise order.
        children: Vec<Node>,
    },
    /// Two-wave detuning mixer `δ_k` acting on a resonant or off-resonant input.
    Delta {
        /// Mode.
        mode: u8,
        /// Output drawn with inverted arrows.
        inverted: bool,
        /// The single input.
        child: alloc::boxed::Box<Node>,
    },
}

impl Node {
    /// Mixer node helper.
    pub fn mixer(mode: u8, children: Vec<Node>) -> Node {
        Node::Mixer { mode, inverted: false, children }
    }

    /// Same node drawn inverted.
    pub fn inverted(self) -> Node {
        match self {
            Node::Mixer { mode, inverted, children } => Node::Mixer { mode, inverted: !inverted, children },
            Node::Delta { mode, inverted, child } => Node::Delta { mode, inverted: !inverted, child },
            leaf => leaf,
        }
    }

    /// Perturbative order of the subtree.
    pub fn order(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Mixer { children, .. } => children.len() - 1 + children.iter().map(|c| c.order()).sum::<usize>(),
            Node::Delta { child, .. } => 1 + child.order(),
        }
    }

    /// Phase carried by this node as an input (sum of the drawn leaf phases).
    pub fn leg_phase(&self, sys: &FramedSystem) -> FrequencyVector {
        match self {
            Node::Leaf(l) => l.phase(sys),
            Node::Mixer { children, .. } => {
                children.iter().fold(FrequencyVector::zero(), |a, c| a + c.leg_phase(sys))
            }
            Node::Delta { child, .. } => child.leg_phase(sys),
        }
    }

    /// Encoding of the ordered subtree.
    pub fn code(&self, ordered: bool) -> String {
        match self {
            Node::Leaf(l) => l.code(),
            Node::Mixer { mode, inverted, children } => {
                let mut cs: Vec<String> = children.iter().map(|c| c.code(ordered)).collect();
                if !ordered {
                    cs.sort();
                }
                format!("M{}{}{}({})", children.len() + 1, mode, if *inverted { "~" } else { "" }, cs.join(","))
            }
            Node::Delta { mode, inverted, child } => {
                format!("D{}{}({})", mode, if *inverted { "~" } else { "" }, child.code(ordered))
            }
        }
    }

    /// Arrow-inverted subtree: conjugated leaves, toggled inversion flags and
    /// reflected input order.
    pub fn conjugate(&self) -> Node {
        match self {
            Node::Leaf(l) => Node::Leaf(l.conj()),
            Node::Mixer { mode, inverted, children } => Node::Mixer {
                mode: *mode,
                inverted: !inverted,
                children: children.iter().rev().map(|c| c.conjugate()).collect(),
            },
            Node::Delta { mode, inverted, child } => {
                Node::Delta { mode: *mode, inverted: !inverted, child: alloc::boxed::Box::new(child.conjugate()) }
            }
        }
    }

    /// Number of distinct input orderings represented by this unordered node.
    pub fn symmetry_factor(&self) -> u128 {
        match self {
            Node::Leaf(_) => 1,
            Node::Mixer { children, .. } => {
                let mut codes: Vec<String> = children.iter().map(|c| c.code(false)).collect();
                codes.sort();
                let mut f = factorial(children.len() as u32) as u128;
                let mut i = 0;
                while i < codes.len() {
                    let mut j = i;
                    while j < codes.len() && codes[j] == codes[i] {
                        j += 1;
                    }
                    f /= factorial((j - i) as u32) as u128;
                    i = j;
                }
                children.iter().fold(f, |a, c| a * c.symmetry_factor())
            }
            Node::Delta { child, .. } => child.symmetry_factor(),
        }
    }

    /// All distinct orderings of the inputs (recursively).
    pub fn orderings(&self) -> Vec<Node> {
        match self {
            Node::Leaf(_) => alloc::vec![self.clone()],
            Node::Delta { mode, inverted, child } => child
                .orderings()
                .into_iter()
                .map(|c| Node::Delta { mode: *mode, inverted: *inverted, child: alloc::boxed::Box::new(c) })
                .collect(),
            Node::Mixer { mode, inverted, children } => {
                let mut out: Vec<Node> = Vec::new();
                let mut seen = alloc::collections::BTreeSet::new();
                for perm in permutations(children) {
                    let mut combos: Vec<Vec<Node>> = alloc::vec![Vec::new()];
                    for c in &perm {
                        let mut next = Vec::new();
                        for prefix in &combos {
                            for o in c.orderings() {
                                let mut p = prefix.clone();
                                p.push(o);
                                next.push(p);
                            }
                        }
                        combos = next;
                    }
                    for cs in combos {
                        let n = Node::Mixer { mode: *mode, inverted: *inverted, children: cs };
                        if seen.insert(n.code(true)) {
                            out.push(n);
                        }
                    }
                }
                out
            }
        }
    }
}

/// A diagram read from its output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedDiagram {
    /// The output mixer.
    pub root: Node,
}

impl RootedDiagram {
    /// Perturbative order.
    pub fn order(&self) -> usize {
        self.root.order()
    }

    /// Net phase of the output (zero for Γ-level diagrams).
    pub fn net_phase(&self, sys: &FramedSystem) -> FrequencyVector {
        let (mode, inv) = match &self.root {
            Node::Mixer { mode, inverted, .. } | Node::Delta { mode, inverted, .. } => (*mode, *inverted),
            Node::Leaf(l) => return l.phase(sys),
        };
        let w = sys.modes[mode as usize].frame;
        let p = self.root.leg_phase(sys);
        if inv {
            p - w
        } else {
            p + w
        }
    }

    /// Arrow-inverted diagram; evaluates to the complex conjugate.
    pub fn conjugate(&self) -> RootedDiagram {
        RootedDiagram { root: self.root.conjugate() }
    }

    /// Symmetry factor (number of ordered diagrams sharing this unordered one).
    pub fn symmetry_factor(&self) -> u128 {
        self.root.symmetry_factor()
    }

    /// Every distinct ordered diagram represented by this one.
    pub fn orderings(&self) -> Vec<RootedDiagram> {
        self.root.orderings().into_iter().map(|root| RootedDiagram { root }).collect()
    }

    /// Encoding (ordered or unordered).
    pub fn code(&self, ordered: bool) -> String {
        self.root.code(ordered)
    }
}

fn leaf_of(l: super::decorate::ExtLeg) -> Leg {
    match (l.kind, l.dir) {
        (ExtKind::Resonant(k), Dir::In) => Leg::A(k),
        (ExtKind::Resonant(k), Dir::Out) => Leg::Ac(k),
        (ExtKind::Drive(t), Dir::In) => Leg::Xi(t),
        (ExtKind::Drive(t), Dir::Out) => Leg::XiC(t),
    }
}

fn node_of(d: &Diagram, v: usize, parent: usize, root_mode: u8) -> Node {
    if let Some(l) = d.labels[v] {
        return Node::Leaf(leaf_of(l));
    }
    let rot = &d.rotation[v];
    let start = rot.iter().position(|&w| w == parent).unwrap_or(0);
    let children: Vec<Node> =
        (1..rot.len()).map(|i| node_of(d, rot[(start + i) % rot.len()], v, root_mode)).collect();
    let inverted = d.labels[parent].is_none() && !d.travels(v, parent);
    Node::Mixer { mode: root_mode, inverted, children }
}

/// Converts an outgoing resonant leaf of `d` into the diagram output.
///
/// Returns `None` when `leaf` is not an outgoing resonant excitation.
pub fn root_at(d: &Diagram, leaf: usize) -> Option<RootedDiagram> {
    let l = d.labels.get(leaf).copied().flatten()?;
    let ExtKind::Resonant(k) = l.kind else { return None };
    if l.dir != Dir::Out {
        return None;
    }
    let r = d.tree.adj[leaf][0];
    let rot = &d.rotation[r];
    let start = rot.iter().position(|&w| w == leaf).unwrap_or(0);
    let children = (1..rot.len()).map(|i| node_of(d, rot[(start + i) % rot.len()], r, k)).collect();
    Some(RootedDiagram { root: Node::Mixer { mode: k, inverted: false, children } })
}

/// All distinct rooted diagrams obtained from `d` (one per outgoing resonant
/// leaf, up to the diagram's own symmetries).
pub fn rootings(d: &Diagram) -> Vec<RootedDiagram> {
    let mut seen = alloc::collections::BTreeSet::new();
    let mut out = Vec::new();
    for v in d.tree.leaves() {
        if let Some(r) = root_at(d, v) {
            if seen.insert(r.code(true)) {
                out.push(r);
            }
        }
    }
    out
}

fn lambda<S: Scalar, C: Ctx<S>>(sys: &FramedSystem, ctx: &C, k: u8) -> S {
    if sys.participation {
        ctx.sym(Sym::Lambda(k))
    } else {
        S::one()
    }
}

/// `−Σ_f R_f / f`: the off-resonant excitation produced by a mixer output.
pub fn propagate<S: Scalar, C: Ctx<S>>(raw: &PhasePolynomial<S>, sys: &FramedSystem, ctx: &C) -> Result<PhasePolynomial<S>> {
    let mut eta = PhasePolynomial::zero(raw.modes());
    for f in raw.phases() {
        if sys.is_static(&f) {
            return Err(CoreError::VanishingDenominator(f));
        }
        let inv = ctx.inv_freq(&f)?;
        eta.add_assign(&raw.filter(|k| k.phase == f).scale(&inv.neg()));
    }
    Ok(eta)
}

/// How the inputs of one mixer are combined.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Combine {
    Ordered,
    Symmetrised,
}

/// Symmetrised star product `(1/n!) Σ_σ v_σ1 ⋆ … ⋆ v_σn` via polarisation:
/// `(1/n!) Σ_{T ⊆ [n]} (−1)^{n−|T|} (Σ_{i∈T} v_i)^n_⋆`.
pub fn symmetrised_product<S: Scalar>(vals: &[PhasePolynomial<S>], modes: usize, classical: bool) -> PhasePolynomial<S> {
    let n = vals.len();
    if n == 0 {
        return PhasePolynomial::constant(modes, S::one());
    }
    let mut acc = PhasePolynomial::zero(modes);
    for mask in 1usize..(1 << n) {
        let mut sum = PhasePolynomial::zero(modes);
        for (i, v) in vals.iter().enumerate() {
            if mask >> i & 1 == 1 {
                sum.add_assign(v);
            }
        }
        let mut pw = sum.clone();
        for _ in 1..n {
            pw = pw.star(&sum, classical);
        }
        if (n - mask.count_ones() as usize) % 2 == 1 {
            acc.sub_assign(&pw);
        } else {
            acc.add_assign(&pw);
        }
    }
    acc.scale_gq(&GQ::real(crate::rational::q(1, factorial(n as u32))))
}

fn combine<S: Scalar>(vals: &[PhasePolynomial<S>], modes: usize, classical: bool, how: Combine) -> PhasePolynomial<S> {
    match how {
        Combine::Ordered => {
            let mut acc = PhasePolynomial::constant(modes, S::one());
            for v in vals {
                acc = acc.star(v, classical);
            }
            acc
        }
        Combine::Symmetrised => symmetrised_product(vals, modes, classical),
    }
}

/// Raw mixer output (before any propagator) of a non-inverted node, with the
/// given input values.
fn mixer_raw<S: Scalar, C: Ctx<S>>(
    node: &Node,
    inputs: &[PhasePolynomial<S>],
    sys: &FramedSystem,
    ctx: &C,
    how: Combine,
) -> PhasePolynomial<S> {
    let modes = sys.n_modes();
    match node {
        Node::Mixer { mode, .. } => {
            let m = inputs.len() as u8 + 1;
            let g = ctx.sym(Sym::G(m)).mul(&lambda(sys, ctx, *mode));
            combine(inputs, modes, ctx.classical(), how).shift_phase(&sys.modes[*mode as usize].frame).scale(&g)
        }
        Node::Delta { mode, .. } => {
            inputs[0].shift_phase(&sys.modes[*mode as usize].frame).scale(&ctx.sym(Sym::Delta(*mode)))
        }
        Node::Leaf(_) => PhasePolynomial::zero(modes),
    }
}

/// Value of `node` used as an input (`with_lambda` false for δ-mixer inputs).
fn input_value<S: Scalar, C: Ctx<S>>(
    node: &Node,
    sys: &FramedSystem,
    ctx: &C,
    with_lambda: bool,
    how: Combine,
) -> Result<PhasePolynomial<S>> {
    match node {
        Node::Leaf(l) => Ok(l.value(sys, ctx, with_lambda)),
        Node::Mixer { mode, inverted, .. } | Node::Delta { mode, inverted, .. } => {
            let raw = output(node, sys, ctx, how, *inverted)?;
            let eta = propagate(&raw, sys, ctx)?;
            let mut v = eta.shift_phase(&-sys.modes[*mode as usize].frame);
            if with_lambda {
                v = v.scale(&lambda(sys, ctx, *mode));
            }
            Ok(if *inverted { v.conj() } else { v })
        }
    }
}

/// Raw output of a mixer node; for an inverted node, the raw output of the
/// mixer fed by the conjugated inputs (so that the drawn value is its conjugate).
fn output<S: Scalar, C: Ctx<S>>(
    node: &Node,
    sys: &FramedSystem,
    ctx: &C,
    how: Combine,
    conj_inputs: bool,
) -> Result<PhasePolynomial<S>> {
    let inputs: Vec<PhasePolynomial<S>> = match node {
        Node::Mixer { children, .. } => {
            children.iter().map(|c| input_value(c, sys, ctx, true, how)).collect::<Result<_>>()?
        }
        Node::Delta { child, .. } => alloc::vec![input_value(child, sys, ctx, false, how)?],
        Node::Leaf(_) => Vec::new(),
    };
    let inputs: Vec<_> = if conj_inputs {
        // conj(a ⋆ b) = conj(b) ⋆ conj(a): keep the drawn order by reversing.
        inputs.iter().rev().map(|v| v.conj()).collect()
    } else {
        inputs
    };
    Ok(mixer_raw(node, &inputs, sys, ctx, how))
}

fn evaluate_root<S: Scalar, C: Ctx<S>>(
    d: &RootedDiagram,
    sys: &FramedSystem,
    ctx: &C,
    how: Combine,
) -> Result<PhasePolynomial<S>> {
    match &d.root {
        Node::Leaf(_) => Err(CoreError::InvalidInput("a rooted diagram needs a mixer at its root".into())),
        Node::Mixer { inverted, .. } | Node::Delta { inverted, .. } => {
            let raw = output(&d.root, sys, ctx, how, *inverted)?;
            Ok(if *inverted { raw.conj() } else { raw })
        }
    }
}

/// Evaluates an ordered bare diagram: the root's raw output (Γ level when
/// its net phase is static), with bare propagators on every internal edge.
pub fn evaluate_bare<S: Scalar, C: Ctx<S>>(d: &RootedDiagram, sys: &FramedSystem, ctx: &C) -> Result<PhasePolynomial<S>> {
    evaluate_root(d, sys, ctx, Combine::Ordered)
}

/// Evaluates the unordered class of `d`: symmetry factor × symmetrised value,
/// i.e. the sum over all distinct input orderings.
pub fn evaluate_class<S: Scalar, C: Ctx<S>>(d: &RootedDiagram, sys: &FramedSystem, ctx: &C) -> Result<PhasePolynomial<S>> {
    let v = evaluate_root(d, sys, ctx, Combine::Symmetrised)?;
    let f = d.symmetry_factor();
    Ok(v.scale_gq(&GQ::real(crate::rational::qi(f as i128))))
}

/// The `ħ⁰` part of an evaluated diagram.
pub fn classical_part<S: Scalar>(p: &PhasePolynomial<S>) -> PhasePolynomial<S> {
    p.classical_limit()
}

/// The `ħ`-carrying remainder (quantum bonds).
pub fn quantum_part<S: Scalar>(p: &PhasePolynomial<S>) -> PhasePolynomial<S> {
    p.sub(&p.classical_limit())
}
