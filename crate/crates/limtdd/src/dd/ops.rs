//! Generation, slicing, addition, contraction and evaluation.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_complex::Complex64;
use smallvec::SmallVec;

use super::{ContKey, DdError, Edge, LimTdd, Manager, NodeId, Var, Weight};
use crate::dense::DenseTensor;
use crate::xp::omega_pow;

impl Manager {
    /// Builds the diagram of a dense tensor; its indices must be registered.
    pub fn generate(&mut self, t: &DenseTensor) -> Result<LimTdd, DdError> {
        let mut keyed = Vec::with_capacity(t.rank());
        for name in t.indices() {
            keyed.push((self.order.var(name)?, name.clone()));
        }
        keyed.sort_unstable();
        let names: Vec<String> = keyed.iter().map(|(_, n)| n.clone()).collect();
        let vars: Vec<Var> = keyed.iter().map(|(v, _)| *v).collect();
        let t = t.permuted(&names)?;
        let e = self.gen_rec(t.data(), &vars);
        let e = self.finish(e, &vars);
        Ok(self.handle(e, vars))
    }

    /// Registers any unknown indices of `t` (appended below existing ones), then generates.
    pub fn generate_registering(&mut self, t: &DenseTensor) -> Result<LimTdd, DdError> {
        for name in t.indices() {
            self.order.register(name);
        }
        self.generate(t)
    }

    fn gen_rec(&mut self, data: &[Complex64], vars: &[Var]) -> Edge {
        if vars.is_empty() {
            let w = Weight::scalar(data[0], self.n);
            return if w.is_zero() { Edge::zero() } else { Edge::scalar(self.snap(w)) };
        }
        let half = data.len() / 2;
        let e0 = self.gen_rec(&data[..half], &vars[1..]);
        let e1 = self.gen_rec(&data[half..], &vars[1..]);
        self.norm_edges(vars[0], e0, e1)
    }

    /// The constant-`c` tensor over the named indices.
    pub fn constant_over(&mut self, c: Complex64, names: &[&str]) -> Result<LimTdd, DdError> {
        let mut vars = names.iter().map(|n| self.order.var(n)).collect::<Result<Vec<_>, _>>()?;
        vars.sort_unstable();
        vars.dedup();
        let w = self.snap(Weight::scalar(c, self.n));
        let e = if w.is_zero() { Edge::zero() } else { Edge::scalar(w) };
        let e = self.finish(e, &vars);
        Ok(self.handle(e, vars))
    }

    /// Fixes index `x` to `c`.
    pub fn slicing(&mut self, f: &LimTdd, x: &str, c: u8) -> Result<LimTdd, DdError> {
        self.check(f)?;
        let xv = match self.order.var(x) {
            Ok(v) if f.vars.contains(&v) => v,
            _ => return Ok(f.clone()),
        };
        let e = self.slice_edge(&f.edge, xv, c & 1 == 1);
        let vars: Vec<Var> = f.vars.iter().copied().filter(|&v| v != xv).collect();
        let e = self.finish(e, &vars);
        Ok(self.handle(e, vars))
    }

    pub(crate) fn slice_edge(&mut self, e: &Edge, x: Var, c: bool) -> Edge {
        if e.is_zero() {
            return Edge::zero();
        }
        if self.top(e) > x && !self.sets.contains(self.node(e.v).set, x) {
            return e.clone();
        }
        let mut w = e.w.clone();
        let mut c = c;
        if let Some(fa) = w.take(x) {
            c ^= fa.x;
            if c {
                w.add_phase(2 * fa.z as u64, self.n);
            }
        }
        let r = self.slice_node(e.v, x, c);
        if r.is_zero() {
            return Edge::zero();
        }
        Edge { w: w.mul(&r.w, self.n), v: r.v }
    }

    fn slice_node(&mut self, v: NodeId, x: Var, c: bool) -> Edge {
        let node = self.node(v);
        if v == NodeId::TERMINAL || node.var > x || !self.sets.contains(node.set, x) {
            return Edge { w: Weight::one(), v };
        }
        if node.var == x {
            return if c { node.high.clone() } else { node.low.clone() };
        }
        if let Some(e) = self.slice_cache.get(&(v, x, c)) {
            return e.clone();
        }
        let (var, low, high) = (node.var, node.low.clone(), node.high.clone());
        let l = self.slice_edge(&low, x, c);
        let h = self.slice_edge(&high, x, c);
        let e = self.norm_edges(var, l, h);
        self.slice_cache.insert((v, x, c), e.clone());
        e
    }

    /// Elementwise sum; indices missing from one operand broadcast.
    pub fn add(&mut self, f: &LimTdd, g: &LimTdd) -> Result<LimTdd, DdError> {
        self.check(f)?;
        self.check(g)?;
        let e = self.add_edges(&f.edge, &g.edge);
        let vars = union(&f.vars, &g.vars);
        let e = self.finish(e, &vars);
        Ok(self.handle(e, vars))
    }

    pub(crate) fn add_edges(&mut self, a: &Edge, b: &Edge) -> Edge {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        self.stats.add_calls += 1;
        if a.v == b.v && a.w.factors() == b.w.factors() {
            let c = a.w.coefficient(self.n) + b.w.coefficient(self.n);
            let s = Weight::scalar(c, self.n);
            if s.is_zero() {
                return Edge::zero();
            }
            let w = s.mul(&a.w.op_part(), self.n);
            return Edge { w: self.snap(w), v: a.v };
        }
        let ord = self.serial(a.v).cmp(&self.serial(b.v)).then_with(|| a.w.cmp_full(&b.w));
        let (l, h) = if ord != Ordering::Greater { (a, b) } else { (b, a) };
        let lw = h.w.inv(self.n).mul(&l.w, self.n);
        let ll = Edge { w: self.snap(lw), v: l.v };
        let key = (ll.clone(), h.v);
        let r = if let Some(r) = self.add_cache.get(&key) {
            self.stats.add_hits += 1;
            r.clone()
        } else {
            let hh = Edge { w: Weight::one(), v: h.v };
            let x = self.top(&ll).min(self.top(&hh));
            let l0 = self.slice_edge(&ll, x, false);
            let h0 = self.slice_edge(&hh, x, false);
            let r0 = self.add_edges(&l0, &h0);
            let l1 = self.slice_edge(&ll, x, true);
            let h1 = self.slice_edge(&hh, x, true);
            let r1 = self.add_edges(&l1, &h1);
            let r = self.norm_edges(x, r0, r1);
            self.add_cache.insert(key, r.clone());
            r
        };
        if r.is_zero() {
            return r;
        }
        Edge { w: h.w.mul(&r.w, self.n), v: r.v }
    }

    /// Sums `F·G` over the shared indices `var`.
    pub fn contract(&mut self, f: &LimTdd, g: &LimTdd, var: &[&str]) -> Result<LimTdd, DdError> {
        self.check(f)?;
        self.check(g)?;
        let mut cv: SmallVec<[Var; 4]> = SmallVec::new();
        for name in var {
            let v = self.order.var(name)?;
            if !f.vars.contains(&v) || !g.vars.contains(&v) {
                return Err(DdError::NotShared(name.to_string()));
            }
            cv.push(v);
        }
        cv.sort_unstable();
        cv.dedup();
        let e = self.cont_edges(&f.edge, &g.edge, &cv);
        let vars: Vec<Var> = union(&f.vars, &g.vars).into_iter().filter(|v| !cv.contains(v)).collect();
        let e = self.finish(e, &vars);
        Ok(self.handle(e, vars))
    }

    pub(crate) fn cont_edges(&mut self, f: &Edge, g: &Edge, var: &[Var]) -> Edge {
        if f.is_zero() || g.is_zero() {
            return Edge::zero();
        }
        let n = self.n;
        if n == 0 {
            let pre = f.w.mul(&g.w, 0);
            let ff = Edge { w: Weight::one(), v: f.v };
            let gg = Edge { w: Weight::one(), v: g.v };
            return self.cont_nodes(pre, ff, gg, var);
        }
        let in_var = |v: Var| var.binary_search(&v).is_ok();
        let mut cf = Weight::one();
        let mut sf = Weight::one();
        let mut pre = f.w.scalar_part().mul(&g.w.scalar_part(), n);
        let mut open = Weight::one();
        for fa in f.w.factors() {
            let w = Weight::from_factor(fa.var, fa.x, fa.z);
            if in_var(fa.var) {
                cf = cf.mul(&w, n);
            } else if self.edge_has_var(g, fa.var) {
                sf = sf.mul(&w, n);
            } else {
                open = open.mul(&w, n);
            }
        }
        let mut cg = Weight::one();
        let mut sg = Weight::one();
        for fa in g.w.factors() {
            let w = Weight::from_factor(fa.var, fa.x, fa.z);
            if in_var(fa.var) {
                cg = cg.mul(&w, n);
            } else if self.edge_has_var(f, fa.var) {
                sg = sg.mul(&w, n);
            } else {
                open = open.mul(&w, n);
            }
        }
        let fw = cg.transpose(n).mul(&cf, n).mul(&sf, n);
        pre = pre.mul(&fw.scalar_part(), n).mul(&open, n);
        let ff = Edge { w: fw.op_part(), v: f.v };
        let gg = Edge { w: sg, v: g.v };
        self.cont_nodes(pre, ff, gg, var)
    }

    /// Contraction of factor-split edges, scaled by `pre`.
    fn cont_nodes(&mut self, mut pre: Weight, ff: Edge, gg: Edge, var: &[Var]) -> Edge {
        let n = self.n;
        let x = self.top(&ff).min(self.top(&gg));
        let d = var.iter().take_while(|&&v| v < x).count();
        let var = &var[d..];
        if d > 0 {
            pre = pre.scale(Complex64::new((1u64 << d.min(63)) as f64, 0.0), n);
        }
        let r = if ff.is_trivial() && gg.is_trivial() {
            let s = Complex64::new(2f64.powi(var.len() as i32), 0.0);
            Edge::scalar(Weight::scalar(s, n))
        } else if var.is_empty() && gg.is_trivial() {
            ff
        } else if var.is_empty() && ff.is_trivial() {
            gg
        } else {
            self.stats.cont_calls += 1;
            let key = ContKey { f: ff.clone(), g: gg.clone(), var: var.into() };
            if let Some(r) = self.cont_cache.get(&key) {
                self.stats.cont_hits += 1;
                r.clone()
            } else {
                let f0 = self.slice_edge(&ff, x, false);
                let g0 = self.slice_edge(&gg, x, false);
                let f1 = self.slice_edge(&ff, x, true);
                let g1 = self.slice_edge(&gg, x, true);
                let r = if var.first() == Some(&x) {
                    let r0 = self.cont_edges(&f0, &g0, &var[1..]);
                    let r1 = self.cont_edges(&f1, &g1, &var[1..]);
                    self.add_edges(&r0, &r1)
                } else {
                    let r0 = self.cont_edges(&f0, &g0, var);
                    let r1 = self.cont_edges(&f1, &g1, var);
                    self.norm_edges(x, r0, r1)
                };
                self.cont_cache.insert(key, r.clone());
                r
            }
        };
        if r.is_zero() {
            return r;
        }
        let w = self.snap(pre.mul(&r.w, n));
        Edge { w, v: r.v }
    }

    /// Dense reconstruction over the declared indices (in order).
    pub fn to_tensor(&self, f: &LimTdd) -> Result<DenseTensor, DdError> {
        self.check(f)?;
        let names: Vec<String> = f.vars.iter().map(|&v| self.order.name(v).to_string()).collect();
        if f.vars.len() > crate::xp::DENSE_RANK_CAP {
            return Err(crate::dense::DenseError::RankCap(f.vars.len()).into());
        }
        let mut memo = HashMap::new();
        let data = self.edge_vec(&f.edge, &f.vars, &mut memo)?;
        Ok(DenseTensor::new(names, data)?)
    }

    fn node_vec(&self, v: NodeId, memo: &mut HashMap<NodeId, Vec<Complex64>>) -> Result<Vec<Complex64>, DdError> {
        if v == NodeId::TERMINAL {
            return Ok(vec![Complex64::new(1.0, 0.0)]);
        }
        if let Some(d) = memo.get(&v) {
            return Ok(d.clone());
        }
        let node = self.node(v);
        let rest = &self.sets.get(node.set)[1..];
        let mut data = self.edge_vec(&node.low, rest, memo)?;
        data.extend(self.edge_vec(&node.high, rest, memo)?);
        memo.insert(v, data.clone());
        Ok(data)
    }

    /// `Φ(e)` broadcast over `vars`, a sorted superset of the edge's indices.
    fn edge_vec(
        &self,
        e: &Edge,
        vars: &[Var],
        memo: &mut HashMap<NodeId, Vec<Complex64>>,
    ) -> Result<Vec<Complex64>, DdError> {
        let r = vars.len();
        if e.is_zero() {
            return Ok(vec![Complex64::new(0.0, 0.0); 1 << r]);
        }
        let base = self.node_vec(e.v, memo)?;
        let sv = self.sets.get(self.node(e.v).set);
        let pos: Vec<usize> = sv.iter().map(|v| vars.binary_search(v).expect("index outside declared set")).collect();
        let names: Vec<String> = vars.iter().map(|v| format!("#{v}")).collect();
        let data = (0..1usize << r)
            .map(|k| {
                let idx = pos.iter().fold(0usize, |acc, &p| (acc << 1) | ((k >> (r - 1 - p)) & 1));
                base[idx]
            })
            .collect();
        let t = DenseTensor::new(names, data)?;
        let w = e.w.to_lim(vars, self.n);
        Ok(t.apply_lim(&w)?.data().to_vec())
    }

    /// Single entry of the tensor; every declared index must be assigned.
    pub fn amplitude(&self, f: &LimTdd, assignment: &[(&str, u8)]) -> Result<Complex64, DdError> {
        self.check(f)?;
        let mut bits: HashMap<Var, bool> = HashMap::new();
        for &v in &f.vars {
            let name = self.order.name(v);
            let b = assignment
                .iter()
                .find(|(n, _)| *n == name)
                .ok_or_else(|| DdError::MissingIndex(name.to_string()))?
                .1;
            bits.insert(v, b & 1 == 1);
        }
        Ok(self.walk(&f.edge, &mut bits))
    }

    /// Same as [`Manager::amplitude`] with bits given in declared-index order.
    pub fn amplitude_bits(&self, f: &LimTdd, bits: &[u8]) -> Result<Complex64, DdError> {
        self.check(f)?;
        if bits.len() != f.vars.len() {
            let missing = f.vars.get(bits.len()).map_or("?", |&v| self.order.name(v));
            return Err(DdError::MissingIndex(missing.to_string()));
        }
        let mut map: HashMap<Var, bool> = f.vars.iter().zip(bits).map(|(&v, &b)| (v, b & 1 == 1)).collect();
        Ok(self.walk(&f.edge, &mut map))
    }

    fn walk(&self, e: &Edge, bits: &mut HashMap<Var, bool>) -> Complex64 {
        let mut value = Complex64::new(1.0, 0.0);
        let mut e = e.clone();
        loop {
            if e.is_zero() {
                return Complex64::new(0.0, 0.0);
            }
            value *= e.w.coefficient(self.n);
            for fa in e.w.factors() {
                let c = bits.get_mut(&fa.var).expect("factor on undeclared index");
                *c ^= fa.x;
                if *c {
                    value *= omega_pow(self.n, 2 * fa.z as i64);
                }
            }
            if e.v == NodeId::TERMINAL {
                return value;
            }
            let node = self.node(e.v);
            e = if bits[&node.var] { node.high.clone() } else { node.low.clone() };
        }
    }
}

pub(crate) fn union(a: &[Var], b: &[Var]) -> Vec<Var> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v.sort_unstable();
    v.dedup();
    v
}
