//! Local normalization and index-set completion.

use std::cmp::Ordering;

use super::{DdError, Edge, LimTdd, Manager, NodeId, SetId, StabMode, Var, Weight};
use crate::xp::{LimWeight, EPS};

impl Manager {
    /// Normalized diagram of `x̄·F0 + x·F1`.
    pub fn loc_norm(&mut self, x: &str, f0: &LimTdd, f1: &LimTdd) -> Result<LimTdd, DdError> {
        self.check(f0)?;
        self.check(f1)?;
        let xv = self.order.var(x)?;
        for f in [f0, f1] {
            if f.vars.first().is_some_and(|&v| v <= xv) {
                return Err(DdError::Order(x.to_string()));
            }
        }
        let e = self.norm_edges(xv, f0.edge.clone(), f1.edge.clone());
        let mut vars = f0.vars.clone();
        vars.extend_from_slice(&f1.vars);
        vars.push(xv);
        vars.sort_unstable();
        vars.dedup();
        let e = self.finish(e, &vars);
        Ok(self.handle(e, vars))
    }

    /// Normalizes a top-level result and completes it to `vars`.
    pub(crate) fn finish(&mut self, e: Edge, vars: &[Var]) -> Edge {
        if self.is_tdd() || e.is_zero() {
            return e;
        }
        let e = self.tighten(e);
        let s = self.sets.intern(vars.to_vec());
        self.extend(e, s)
    }

    pub(crate) fn norm_edges(&mut self, x: Var, e0: Edge, e1: Edge) -> Edge {
        if e0.is_zero() && e1.is_zero() {
            return Edge::zero();
        }
        if self.is_tdd() {
            return self.norm_tdd(x, e0, e1);
        }
        let e0 = self.tighten(e0);
        let e1 = self.tighten(e1);
        let (e0, e1) = if e0.is_zero() || e1.is_zero() {
            (e0, e1)
        } else {
            let s = self.sets.union(self.node(e0.v).set, self.node(e1.v).set);
            (self.extend(e0, s), self.extend(e1, s))
        };
        if e0.is_zero() || e1.is_zero() {
            let s = e1.is_zero();
            let e = if s { e0 } else { e1 };
            let v = self.make_node(x, Edge::zero(), Edge::scalar(Weight::one()).with_target(e.v));
            let w = Weight::from_factor(x, s, 0).mul(&e.w, self.n);
            return Edge { w: self.snap(w), v };
        }
        let (mut e0, mut e1, mut b) = (e0, e1, false);
        self.reduce_fixed(&mut e0.w, e0.v);
        self.reduce_fixed(&mut e1.w, e1.v);
        if self.serial(e0.v) > self.serial(e1.v) {
            std::mem::swap(&mut e0, &mut e1);
            b = true;
        }
        let (mut wt, base, swapped) = match self.stab_mode() {
            StabMode::Fast => {
                let mut wt = e0.w.inv(self.n).mul(&e1.w, self.n);
                self.reduce_fixed(&mut wt, e1.v);
                if e0.v == e1.v {
                    let mut wt2 = e1.w.inv(self.n).mul(&e0.w, self.n);
                    self.reduce_fixed(&mut wt2, e0.v);
                    if wt2.cmp_residual(&wt) == Ordering::Less {
                        (wt2, e1.w.clone(), true)
                    } else {
                        (wt, e0.w.clone(), false)
                    }
                } else {
                    (wt, e0.w.clone(), false)
                }
            }
            StabMode::Full => self.min_weight_edges(&e0, &e1),
        };
        if swapped {
            b = !b;
        }
        let k = wt.p / 2;
        wt.p %= 2;
        let (v0, v1) = (e0.v, e1.v);
        let wt = self.snap(wt);
        let v = self.make_node(x, Edge { w: Weight::one(), v: v0 }, Edge { w: wt, v: v1 });
        let zk = if self.n == 0 { 0 } else { k % self.n };
        let w = Weight::from_factor(x, b, zk).mul(&base, self.n);
        Edge { w: self.snap(w), v }
    }

    fn norm_tdd(&mut self, x: Var, e0: Edge, e1: Edge) -> Edge {
        let (lead, low, high) = if !e0.is_zero() {
            let inv = e0.w.inv(0);
            let high = if e1.is_zero() { e1 } else { Edge { w: inv.mul(&e1.w, 0), v: e1.v } };
            (e0.w.clone(), Edge { w: Weight::one(), v: e0.v }, high)
        } else {
            (e1.w.clone(), e0, Edge { w: Weight::one(), v: e1.v })
        };
        if low.v == high.v && !low.is_zero() && !high.is_zero() && ratio_is_one(&high.w) {
            return Edge { w: self.snap(lead), v: low.v };
        }
        let high = Edge { w: self.snap(high.w), v: high.v };
        let v = self.make_node(x, low, high);
        Edge { w: self.snap(lead), v }
    }

    /// Materializes factors on indices outside the target's index set.
    pub(crate) fn tighten(&mut self, e: Edge) -> Edge {
        if e.is_zero() || self.is_tdd() {
            return e;
        }
        let set = self.node(e.v).set;
        let loose: Vec<Var> = e.w.factors().iter().map(|f| f.var).filter(|&v| !self.sets.contains(set, v)).collect();
        if loose.is_empty() {
            return e;
        }
        let extra = self.sets.intern(loose);
        let s = self.sets.union(set, extra);
        let ext = self.ext_node(e.v, s);
        Edge { w: e.w.mul(&ext.w, self.n), v: ext.v }
    }

    /// `e` as a diagram over the superset `s` of its index set.
    pub(crate) fn extend(&mut self, e: Edge, s: SetId) -> Edge {
        if e.is_zero() || self.node(e.v).set == s {
            return e;
        }
        let ext = self.ext_node(e.v, s);
        Edge { w: e.w.mul(&ext.w, self.n), v: ext.v }
    }

    /// `Φ(v)` broadcast over the superset `s` of `set(v)`.
    pub(crate) fn ext_node(&mut self, v: NodeId, s: SetId) -> Edge {
        if self.node(v).set == s {
            return Edge { w: Weight::one(), v };
        }
        if let Some(e) = self.ext_cache.get(&(v, s)) {
            return e.clone();
        }
        let vars = self.sets.get(s);
        let y = vars[0];
        let rest = self.sets.intern(vars[1..].to_vec());
        let node = self.node(v).clone();
        let e = if y == node.var {
            let lo = self.extend(node.low, rest);
            let hi = self.extend(node.high, rest);
            self.norm_edges(y, lo, hi)
        } else {
            let c = self.ext_node(v, rest);
            self.norm_edges(y, c.clone(), c)
        };
        self.ext_cache.insert((v, s), e.clone());
        e
    }
}

fn ratio_is_one(w: &Weight) -> bool {
    (w.r - 1.0).abs() < EPS && (w.theta.abs() < EPS || (w.theta - 1.0).abs() < EPS)
}

impl Edge {
    pub(crate) fn with_target(mut self, v: NodeId) -> Edge {
        self.v = v;
        self
    }
}

impl Manager {
    /// Builds `w · node(x, low, high)` from dense weights, through the unique table.
    pub fn make_dd_lim(
        &mut self,
        w: &LimWeight,
        x: &str,
        w0: &LimWeight,
        f0: &LimTdd,
        w1: &LimWeight,
        f1: &LimTdd,
    ) -> Result<LimTdd, DdError> {
        self.check(f0)?;
        self.check(f1)?;
        let xv = self.order.var(x)?;
        let mut vars = f0.vars.clone();
        vars.extend_from_slice(&f1.vars);
        vars.push(xv);
        vars.sort_unstable();
        vars.dedup();
        let lw0 = Weight::from_lim(w0, &f0.vars).mul(&f0.edge.w, self.n);
        let lw1 = Weight::from_lim(w1, &f1.vars).mul(&f1.edge.w, self.n);
        let low = if lw0.is_zero() { Edge::zero() } else { Edge { w: lw0, v: f0.edge.v } };
        let high = if lw1.is_zero() { Edge::zero() } else { Edge { w: lw1, v: f1.edge.v } };
        let top = Weight::from_lim(w, &vars);
        let e = self.make_dd(top, xv, low, high)?;
        Ok(self.handle(e, vars))
    }
}
