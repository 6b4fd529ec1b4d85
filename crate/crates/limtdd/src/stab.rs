//! Stabilizer groups of nodes and stabilizer-aware weight minimization.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use smallvec::SmallVec;

use crate::dd::{DdError, Edge, Factor, LimTdd, Manager, NodeId, StabMode, Var, Weight};
use crate::xp::{phase_mod, LimWeight, XPOperator, EPS};

pub const DEFAULT_CAP: usize = 512;

/// Enumerated group of XP operators fixing a node's tensor.
#[derive(Clone, Debug)]
pub struct StabGroup {
    n: u32,
    vars: Vec<Var>,
    elems: Vec<Weight>,
    degraded: bool,
}

fn op_weight(p: u32, f: SmallVec<[Factor; 2]>) -> Weight {
    let mut w = Weight::from_factor(0, false, 0);
    w.p = p;
    w.f = f;
    w
}

impl StabGroup {
    pub(crate) fn trivial(n: u32, vars: Vec<Var>) -> Self {
        StabGroup { n, vars, elems: vec![Weight::one()], degraded: false }
    }

    pub fn precision(&self) -> u32 {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.vars.len()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// True when enumeration overflowed the cap and the group was replaced by `{I}`.
    pub fn is_degraded(&self) -> bool {
        self.degraded
    }

    pub(crate) fn weights(&self) -> &[Weight] {
        &self.elems
    }

    /// All elements as operators over the node's indices (in order).
    pub fn elements(&self) -> Vec<XPOperator> {
        self.elems.iter().map(|w| w.to_lim(&self.vars, self.n).op().clone()).collect()
    }

    pub fn contains(&self, op: &XPOperator) -> bool {
        let w = Weight::from_lim(&LimWeight::from_op(op.clone()), &self.vars);
        self.elems.iter().any(|e| e.p == w.p && e.f == w.f)
    }

    /// A generating set, picked greedily from the enumeration.
    pub fn generators(&self) -> Vec<XPOperator> {
        let n = self.n;
        let mut span: HashSet<Weight> = HashSet::from([Weight::one()]);
        let mut gens = Vec::new();
        for e in &self.elems {
            if span.contains(e) {
                continue;
            }
            gens.push(e.clone());
            let mut frontier: Vec<Weight> = span.iter().cloned().collect();
            while let Some(a) = frontier.pop() {
                for g in &gens {
                    let b = a.mul(g, n);
                    if span.insert(b.clone()) {
                        frontier.push(b);
                    }
                }
            }
        }
        gens.iter().map(|w| w.to_lim(&self.vars, n).op().clone()).collect()
    }
}

impl fmt::Display for StabGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators().iter().map(|g| g.to_string()).collect();
        write!(f, "<{}>", gens.join(", "))?;
        if self.degraded {
            write!(f, " (degraded)")?;
        }
        Ok(())
    }
}

/// Group of a normalized rank-1 tensor `[w_low, w_high]`.
pub fn stab_rank1(w_low: &LimWeight, w_high: &LimWeight) -> StabGroup {
    let n = w_low.precision();
    let pm = phase_mod(n) as u32;
    let zn = n.max(1);
    let one_factor = |p: u32, x: bool, z: u32| {
        let mut f = SmallVec::new();
        if x || z != 0 {
            f.push(Factor { var: 0, x, z });
        }
        op_weight(p % pm, f)
    };
    let mut elems = vec![Weight::one()];
    if w_low.is_zero() || w_high.is_zero() {
        // [0, c]: ω^{-2z}P^z; [c, 0]: P^z
        let lowzero = w_low.is_zero() && !w_high.is_zero();
        for z in 1..zn {
            let p = if lowzero { (pm - (2 * z) % pm) % pm } else { 0 };
            elems.push(one_factor(p, false, z));
        }
    } else {
        let c = w_high.coefficient() / w_low.coefficient();
        if (c.norm() - 1.0).abs() < EPS && n > 0 {
            let turns = c.arg() / (2.0 * std::f64::consts::PI) * pm as f64;
            let p = turns.round();
            if (turns - p).abs() < EPS * pm as f64 {
                let p = (p as i64).rem_euclid(pm as i64) as u32;
                let z = ((zn as i64 - p as i64).rem_euclid(zn as i64)) as u32;
                elems.push(one_factor(p, true, z));
            }
        }
    }
    StabGroup { n, vars: vec![0], elems, degraded: false }
}

pub(crate) struct MinResult {
    pub wt: Weight,
    pub g0: Weight,
    pub g1: Weight,
    pub swapped: bool,
}

impl Manager {
    /// Stabilizer group of a node, memoized.
    pub fn stab_node(&mut self, v: NodeId) -> Rc<StabGroup> {
        if let Some(g) = self.stab_cache.get(&v) {
            return g.clone();
        }
        let g = Rc::new(self.compute_stab(v));
        if g.degraded {
            self.stats.stab_degraded += 1;
        }
        self.stab_cache.insert(v, g.clone());
        g
    }

    /// Stabilizer group of a diagram's root node.
    pub fn stab_root(&mut self, f: &LimTdd) -> Result<Rc<StabGroup>, DdError> {
        self.check(f)?;
        Ok(self.stab_node(f.edge.v))
    }

    fn compute_stab(&mut self, v: NodeId) -> StabGroup {
        let n = self.precision();
        let vars = self.node_vars(v).to_vec();
        if v == NodeId::TERMINAL {
            return StabGroup::trivial(n, vars);
        }
        let cap = self.stab_cap();
        let node = self.node(v).clone();
        let x = node.var;
        let pm = phase_mod(n) as u32;
        let zn = n.max(1);
        let mut out: Vec<Weight> = Vec::new();
        let mut seen: HashSet<Weight> = HashSet::new();
        let mut push = |w: Weight, out: &mut Vec<Weight>| {
            if seen.insert(w.clone()) {
                out.push(w);
            }
        };
        if node.low.is_zero() {
            let s1 = self.stab_node(node.high.v);
            if s1.elems.len() * zn as usize > cap {
                return self.degraded(n, vars);
            }
            for z in 0..zn {
                for s in &s1.elems {
                    let mut g = Weight::from_factor(x, false, z).mul(s, n);
                    g.p = (g.p + pm - (2 * z) % pm) % pm;
                    push(g, &mut out);
                }
            }
        } else {
            let s0 = self.stab_node(node.low.v);
            let s1 = self.stab_node(node.high.v);
            let h = op_weight(node.high.w.p, node.high.w.f.clone());
            let hinv = h.inv(n);
            let index1: HashMap<SmallVec<[Factor; 2]>, u32> = s1.elems.iter().map(|s| (s.f.clone(), s.p)).collect();
            let solve = |u: &Weight, table: &HashMap<SmallVec<[Factor; 2]>, u32>| -> Option<u32> {
                let target = *table.get(&u.f)?;
                let d = (target + pm - u.p) % pm;
                (d % 2 == 0).then_some((d / 2) % zn)
            };
            for g in &s0.elems {
                let u = hinv.mul(g, n).mul(&h, n);
                if let Some(z) = solve(&u, &index1) {
                    push(Weight::from_factor(x, false, z).mul(g, n), &mut out);
                }
            }
            let root_of_unity = (node.high.w.r - 1.0).abs() < EPS && node.high.w.theta.abs() < EPS;
            if node.low.v == node.high.v && root_of_unity && n > 0 {
                let index0: HashMap<SmallVec<[Factor; 2]>, u32> = s0.elems.iter().map(|s| (s.f.clone(), s.p)).collect();
                for s in &s0.elems {
                    let g = h.mul(s, n);
                    let u = g.mul(&h, n);
                    if let Some(z) = solve(&u, &index0) {
                        push(Weight::from_factor(x, true, z).mul(&g, n), &mut out);
                    }
                }
            }
            if out.len() > cap {
                return self.degraded(n, vars);
            }
        }
        StabGroup { n, vars, elems: out, degraded: false }
    }

    fn degraded(&self, n: u32, vars: Vec<Var>) -> StabGroup {
        StabGroup { n, vars, elems: vec![Weight::one()], degraded: true }
    }

    /// Minimizes `g0⁻¹·w0⁻¹·w1·g1` over both children's groups (and the reversed product when `v0 == v1`).
    pub(crate) fn min_pair(&mut self, e0: &Edge, e1: &Edge, allow_swap: bool) -> MinResult {
        let n = self.precision();
        let full = self.stab_mode() == StabMode::Full;
        let s0 = if full { self.stab_node(e0.v) } else { Rc::new(StabGroup::trivial(n, vec![])) };
        let s1 = if full { self.stab_node(e1.v) } else { Rc::new(StabGroup::trivial(n, vec![])) };
        let mut best: Option<MinResult> = None;
        let consider = |a: &Weight, b: &Weight, swapped: bool, best: &mut Option<MinResult>| {
            let core = a.inv(n).mul(b, n);
            for g0 in s0.weights() {
                let left = g0.inv(n).mul(&core, n);
                for g1 in s1.weights() {
                    let wt = left.mul(g1, n);
                    let better = match best {
                        None => true,
                        Some(cur) => wt.cmp_residual(&cur.wt) == Ordering::Less,
                    };
                    if better {
                        *best = Some(MinResult { wt, g0: g0.clone(), g1: g1.clone(), swapped });
                    }
                }
            }
        };
        consider(&e0.w, &e1.w, false, &mut best);
        if allow_swap && e0.v == e1.v {
            consider(&e1.w, &e0.w, true, &mut best);
        }
        best.expect("groups contain the identity")
    }

    /// Full-mode choice used by normalization: `(wt, incoming base, swapped)`.
    pub(crate) fn min_weight_edges(&mut self, e0: &Edge, e1: &Edge) -> (Weight, Weight, bool) {
        let n = self.precision();
        let m = self.min_pair(e0, e1, true);
        let base = if m.swapped { e1.w.mul(&m.g0, n) } else { e0.w.mul(&m.g0, n) };
        (m.wt, base, m.swapped)
    }

    /// Minimal high weight for children `w0→F0` and `w1→F1` (both over the same indices).
    ///
    /// Returns the weight, the chosen group elements and whether the reversed product won.
    pub fn min_weight(
        &mut self,
        w0: &LimWeight,
        f0: &LimTdd,
        w1: &LimWeight,
        f1: &LimTdd,
        allow_swap: bool,
    ) -> Result<(LimWeight, XPOperator, XPOperator, bool), DdError> {
        self.check(f0)?;
        self.check(f1)?;
        let n = self.precision();
        let vars = f0.vars().to_vec();
        let e0 = Edge { w: Weight::from_lim(w0, &vars).mul(&f0.edge().w, n), v: f0.root() };
        let e1 = Edge { w: Weight::from_lim(w1, &vars).mul(&f1.edge().w, n), v: f1.root() };
        let m = self.min_pair(&e0, &e1, allow_swap);
        let g0 = m.g0.to_lim(&vars, n).op().clone();
        let g1 = m.g1.to_lim(&vars, n).op().clone();
        Ok((m.wt.to_lim(&vars, n), g0, g1, m.swapped))
    }
}
