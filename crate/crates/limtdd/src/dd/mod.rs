//! The diagram engine: hash-consed nodes with XP-operator edge weights.

mod norm;
mod ops;
mod dot;
pub mod weight;

use std::collections::BTreeMap;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::dense::DenseError;
use crate::stab::StabGroup;
use crate::xp::{LimWeight, EPS, MAX_PRECISION};

pub use weight::{Factor, Weight};

/// Global order key of an index; smaller keys sit nearer the root.
pub type Var = u32;

/// Sentinel "index" of the terminal node, below every real index.
pub const TERMINAL_VAR: Var = Var::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub const TERMINAL: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub w: Weight,
    pub v: NodeId,
}

impl Edge {
    pub fn zero() -> Self {
        Edge { w: Weight::zero(), v: NodeId::TERMINAL }
    }

    pub fn scalar(w: Weight) -> Self {
        Edge { w, v: NodeId::TERMINAL }
    }

    pub fn is_zero(&self) -> bool {
        self.w.is_zero()
    }

    /// Terminal target and no operator factors.
    pub fn is_trivial(&self) -> bool {
        self.v == NodeId::TERMINAL && !self.w.has_factors()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub var: Var,
    pub low: Edge,
    pub high: Edge,
    pub serial: u64,
    pub set: SetId,
    /// Indices on which the tensor's support is a single value.
    pub fixed: Rc<[(Var, bool)]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct SetId(u32);

impl SetId {
    pub const EMPTY: SetId = SetId(0);
}

/// Interned sorted index sets.
#[derive(Default)]
pub(crate) struct SetTable {
    sets: Vec<Rc<[Var]>>,
    map: HashMap<Rc<[Var]>, SetId>,
    unions: HashMap<(SetId, SetId), SetId>,
    tops: HashMap<(Var, SetId), SetId>,
}

impl SetTable {
    fn new() -> Self {
        let mut t = SetTable::default();
        t.intern(Vec::new());
        t
    }

    pub fn intern(&mut self, vars: Vec<Var>) -> SetId {
        let key: Rc<[Var]> = vars.into();
        if let Some(&id) = self.map.get(&key) {
            return id;
        }
        let id = SetId(self.sets.len() as u32);
        self.sets.push(key.clone());
        self.map.insert(key, id);
        id
    }

    pub fn get(&self, id: SetId) -> &[Var] {
        &self.sets[id.0 as usize]
    }

    pub fn contains(&self, id: SetId, var: Var) -> bool {
        self.get(id).binary_search(&var).is_ok()
    }

    pub fn union(&mut self, a: SetId, b: SetId) -> SetId {
        if a == b || b == SetId::EMPTY {
            return a;
        }
        if a == SetId::EMPTY {
            return b;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&id) = self.unions.get(&key) {
            return id;
        }
        let (sa, sb) = (self.get(a), self.get(b));
        let mut out = Vec::with_capacity(sa.len() + sb.len());
        let (mut i, mut j) = (0, 0);
        while i < sa.len() || j < sb.len() {
            if j == sb.len() || (i < sa.len() && sa[i] < sb[j]) {
                out.push(sa[i]);
                i += 1;
            } else if i == sa.len() || sb[j] < sa[i] {
                out.push(sb[j]);
                j += 1;
            } else {
                out.push(sa[i]);
                i += 1;
                j += 1;
            }
        }
        let id = self.intern(out);
        self.unions.insert(key, id);
        id
    }

    pub fn with_var(&mut self, var: Var, s: SetId) -> SetId {
        if let Some(&id) = self.tops.get(&(var, s)) {
            return id;
        }
        let mut v = self.get(s).to_vec();
        if let Err(pos) = v.binary_search(&var) {
            v.insert(pos, var);
        }
        let id = self.intern(v);
        self.tops.insert((var, s), id);
        id
    }
}

/// Snaps reals to previously seen representatives within a tolerance.
pub(crate) struct RealTable {
    tol: f64,
    buckets: HashMap<i64, SmallVec<[f64; 1]>>,
}

impl RealTable {
    fn new(tol: f64, seeds: &[f64]) -> Self {
        let mut t = RealTable { tol, buckets: HashMap::default() };
        for &s in seeds {
            t.snap(s);
        }
        t
    }

    pub fn snap(&mut self, v: f64) -> f64 {
        let b = (v / self.tol).round() as i64;
        for k in [b, b - 1, b + 1] {
            if let Some(reps) = self.buckets.get(&k) {
                for &r in reps {
                    if (r - v).abs() <= self.tol {
                        return r;
                    }
                }
            }
        }
        let v = if v == 0.0 { 0.0 } else { v };
        self.buckets.entry(b).or_default().push(v);
        v
    }

    fn clear(&mut self, seeds: &[f64]) {
        self.buckets.clear();
        for &s in seeds {
            self.snap(s);
        }
    }
}

const SEED_REALS: [f64; 5] = [0.0, 1.0, 0.5, std::f64::consts::FRAC_1_SQRT_2, 2.0];

/// Stabilizer handling during normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StabMode {
    /// Stabilizer groups taken as `{I}`.
    #[default]
    Fast,
    /// Groups enumerated up to the cap.
    Full,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DdError {
    #[error("precision must be 0 or a power of two up to 2^20, got {0}")]
    InvalidPrecision(u32),
    #[error("unknown index `{0}`")]
    UnknownIndex(String),
    #[error("index `{0}` already registered")]
    DuplicateIndex(String),
    #[error("order key {0} already in use")]
    DuplicateKey(Var),
    #[error("index `{0}` must precede the indices of both children")]
    Order(String),
    #[error("handle belongs to a different manager")]
    ForeignHandle,
    #[error("contracted index `{0}` is not shared by both operands")]
    NotShared(String),
    #[error("assignment is missing index `{0}`")]
    MissingIndex(String),
    #[error(transparent)]
    Dense(#[from] DenseError),
}

/// Names and order keys of all indices known to a manager.
#[derive(Clone, Debug, Default)]
pub struct IndexOrder {
    by_name: HashMap<String, Var>,
    names: BTreeMap<Var, String>,
}

impl IndexOrder {
    /// Appends `name` below every registered index (or returns its existing key).
    pub fn register(&mut self, name: &str) -> Var {
        if let Some(&v) = self.by_name.get(name) {
            return v;
        }
        let key = self.names.keys().next_back().map_or(0, |k| k + 1);
        self.insert(name, key);
        key
    }

    /// Registers `name` at an explicit order key.
    pub fn register_at(&mut self, name: &str, key: Var) -> Result<Var, DdError> {
        if self.by_name.contains_key(name) {
            return Err(DdError::DuplicateIndex(name.into()));
        }
        if key == TERMINAL_VAR || self.names.contains_key(&key) {
            return Err(DdError::DuplicateKey(key));
        }
        self.insert(name, key);
        Ok(key)
    }

    fn insert(&mut self, name: &str, key: Var) {
        self.by_name.insert(name.to_string(), key);
        self.names.insert(key, name.to_string());
    }

    /// First key below every registered index.
    pub fn next_key(&self) -> Var {
        self.names.keys().next_back().map_or(0, |k| k + 1)
    }

    pub fn var(&self, name: &str) -> Result<Var, DdError> {
        self.by_name.get(name).copied().ok_or_else(|| DdError::UnknownIndex(name.into()))
    }

    pub fn name(&self, var: Var) -> &str {
        self.names.get(&var).map(String::as_str).unwrap_or("?")
    }

    /// Gives `var` a new, unused name.
    pub fn rename(&mut self, var: Var, name: &str) -> Result<(), DdError> {
        if self.by_name.contains_key(name) {
            return Err(DdError::DuplicateIndex(name.into()));
        }
        let old = self.names.get(&var).cloned().ok_or_else(|| DdError::UnknownIndex(format!("#{var}")))?;
        self.by_name.remove(&old);
        self.insert(name, var);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct Stats {
    pub nodes_created: u64,
    pub unique_hits: u64,
    pub add_calls: u64,
    pub add_hits: u64,
    pub cont_calls: u64,
    pub cont_hits: u64,
    pub stab_degraded: u64,
    pub collections: u64,
}

/// A diagram: incoming edge plus its declared (sorted) index set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimTdd {
    mgr: u64,
    pub(crate) edge: Edge,
    pub(crate) vars: Vec<Var>,
}

impl LimTdd {
    pub fn edge(&self) -> &Edge {
        &self.edge
    }

    pub fn root(&self) -> NodeId {
        self.edge.v
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.edge.is_zero()
    }
}

static NEXT_MANAGER: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Debug, Hash, PartialEq, Eq)]
pub(crate) struct ContKey {
    pub f: Edge,
    pub g: Edge,
    pub var: SmallVec<[Var; 4]>,
}

/// Owns nodes, tables and configuration; single-threaded.
pub struct Manager {
    id: u64,
    n: u32,
    stab_mode: StabMode,
    stab_cap: usize,
    pub(crate) order: IndexOrder,
    pub(crate) nodes: Vec<Node>,
    free: Vec<u32>,
    unique: HashMap<(Var, Edge, Edge), NodeId>,
    pub(crate) sets: SetTable,
    reals: RealTable,
    angles: RealTable,
    next_serial: u64,
    pub(crate) add_cache: HashMap<(Edge, NodeId), Edge>,
    pub(crate) cont_cache: HashMap<ContKey, Edge>,
    pub(crate) slice_cache: HashMap<(NodeId, Var, bool), Edge>,
    pub(crate) ext_cache: HashMap<(NodeId, SetId), Edge>,
    pub(crate) stab_cache: HashMap<NodeId, Rc<StabGroup>>,
    pub(crate) stats: Stats,
}

impl Manager {
    /// `precision` 0 selects tdd mode (scalar weights only).
    pub fn new(precision: u32, stab_mode: StabMode) -> Result<Self, DdError> {
        if precision > MAX_PRECISION || (precision != 0 && !precision.is_power_of_two()) {
            return Err(DdError::InvalidPrecision(precision));
        }
        let terminal = Node {
            var: TERMINAL_VAR,
            low: Edge::zero(),
            high: Edge::zero(),
            serial: 0,
            set: SetId::EMPTY,
            fixed: Rc::from(Vec::new()),
        };
        Ok(Manager {
            id: NEXT_MANAGER.fetch_add(1, AtomicOrdering::Relaxed),
            n: precision,
            stab_mode,
            stab_cap: crate::stab::DEFAULT_CAP,
            order: IndexOrder::default(),
            nodes: vec![terminal],
            free: Vec::new(),
            unique: HashMap::default(),
            sets: SetTable::new(),
            reals: RealTable::new(EPS, &SEED_REALS),
            angles: RealTable::new(EPS, &[0.0]),
            next_serial: 1,
            add_cache: HashMap::default(),
            cont_cache: HashMap::default(),
            slice_cache: HashMap::default(),
            ext_cache: HashMap::default(),
            stab_cache: HashMap::default(),
            stats: Stats::default(),
        })
    }

    pub fn precision(&self) -> u32 {
        self.n
    }

    pub fn is_tdd(&self) -> bool {
        self.n == 0
    }

    pub fn stab_mode(&self) -> StabMode {
        self.stab_mode
    }

    pub fn stab_cap(&self) -> usize {
        self.stab_cap
    }

    pub fn set_stab_cap(&mut self, cap: usize) {
        self.stab_cap = cap.max(1);
        self.stab_cache.clear();
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn order(&self) -> &IndexOrder {
        &self.order
    }

    pub fn register_index(&mut self, name: &str) -> Var {
        self.order.register(name)
    }

    pub fn register_index_at(&mut self, name: &str, key: Var) -> Result<Var, DdError> {
        self.order.register_at(name, key)
    }

    pub fn rename_index(&mut self, var: Var, name: &str) -> Result<(), DdError> {
        self.order.rename(var, name)
    }

    pub fn var(&self, name: &str) -> Result<Var, DdError> {
        self.order.var(name)
    }

    pub fn index_name(&self, var: Var) -> &str {
        self.order.name(var)
    }

    /// Names of a diagram's declared indices, in order.
    pub fn index_names(&self, f: &LimTdd) -> Vec<String> {
        f.vars.iter().map(|&v| self.order.name(v).to_string()).collect()
    }

    /// Number of node slots currently holding a node (terminal included).
    pub fn live_nodes(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    pub(crate) fn check(&self, f: &LimTdd) -> Result<(), DdError> {
        if f.mgr != self.id {
            return Err(DdError::ForeignHandle);
        }
        Ok(())
    }

    pub(crate) fn handle(&self, edge: Edge, vars: Vec<Var>) -> LimTdd {
        LimTdd { mgr: self.id, edge, vars }
    }

    #[inline]
    pub(crate) fn node(&self, v: NodeId) -> &Node {
        &self.nodes[v.0 as usize]
    }

    #[inline]
    pub(crate) fn serial(&self, v: NodeId) -> u64 {
        self.nodes[v.0 as usize].serial
    }

    /// Index of a node (the terminal reports `TERMINAL_VAR`).
    pub fn node_var(&self, v: NodeId) -> Var {
        self.node(v).var
    }

    /// Creation-ordered id used for child ordering (terminal is 0).
    pub fn node_serial(&self, v: NodeId) -> u64 {
        self.serial(v)
    }

    pub fn node_children(&self, v: NodeId) -> Option<(Edge, Edge)> {
        if v == NodeId::TERMINAL {
            return None;
        }
        let n = self.node(v);
        Some((n.low.clone(), n.high.clone()))
    }

    /// Sorted indices appearing below and at `v`.
    pub fn node_vars(&self, v: NodeId) -> &[Var] {
        self.sets.get(self.node(v).set)
    }

    /// Smallest index an edge touches (its root index or a loose factor above it).
    #[inline]
    pub(crate) fn top(&self, e: &Edge) -> Var {
        let nv = self.node(e.v).var;
        match e.w.first_var() {
            Some(f) if f < nv => f,
            _ => nv,
        }
    }

    pub(crate) fn edge_has_var(&self, e: &Edge, var: Var) -> bool {
        e.w.factor_at(var).is_some() || self.sets.contains(self.node(e.v).set, var)
    }

    pub(crate) fn snap(&mut self, mut w: Weight) -> Weight {
        if w.is_zero() {
            return Weight::zero();
        }
        w.r = self.reals.snap(w.r);
        w.theta = self.angles.snap(w.theta);
        w
    }

    /// Conses a node; edges must already be normalized.
    pub(crate) fn make_node(&mut self, var: Var, low: Edge, high: Edge) -> NodeId {
        let key = (var, low, high);
        if let Some(&id) = self.unique.get(&key) {
            self.stats.unique_hits += 1;
            return id;
        }
        let (var, low, high) = key;
        let child_set = self.sets.union(self.node(low.v).set, self.node(high.v).set);
        let set = self.sets.with_var(var, child_set);
        let fixed = if self.is_tdd() { Rc::from(Vec::new()) } else { self.fixed_of(var, &low, &high) };
        let node = Node { var, low: low.clone(), high: high.clone(), serial: self.next_serial, set, fixed };
        self.next_serial += 1;
        self.stats.nodes_created += 1;
        let id = if let Some(slot) = self.free.pop() {
            self.nodes[slot as usize] = node;
            NodeId(slot)
        } else {
            self.nodes.push(node);
            NodeId(self.nodes.len() as u32 - 1)
        };
        self.unique.insert((var, low, high), id);
        id
    }

    fn edge_fixed(&self, e: &Edge) -> Vec<(Var, bool)> {
        self.node(e.v)
            .fixed
            .iter()
            .map(|&(y, c)| (y, c ^ e.w.factor_at(y).is_some_and(|f| f.x)))
            .collect()
    }

    fn fixed_of(&self, var: Var, low: &Edge, high: &Edge) -> Rc<[(Var, bool)]> {
        let mut out = Vec::new();
        match (low.is_zero(), high.is_zero()) {
            (true, _) => {
                out.push((var, true));
                out.extend(self.edge_fixed(high));
            }
            (_, true) => {
                out.push((var, false));
                out.extend(self.edge_fixed(low));
            }
            _ => {
                let h = self.edge_fixed(high);
                out.extend(self.edge_fixed(low).into_iter().filter(|p| h.contains(p)));
            }
        }
        Rc::from(out)
    }

    /// Folds `P^z` factors on fixed-support indices of the target into the scalar.
    pub(crate) fn reduce_fixed(&self, w: &mut Weight, v: NodeId) {
        let fixed = &self.node(v).fixed;
        if fixed.is_empty() || !w.has_factors() {
            return;
        }
        let mut phase = 0u64;
        w.f.retain(|fa| {
            if fa.z != 0 {
                if let Ok(i) = fixed.binary_search_by(|p| p.0.cmp(&fa.var)) {
                    if fixed[i].1 {
                        phase += 2 * fa.z as u64;
                    }
                    fa.z = 0;
                }
            }
            fa.x || fa.z != 0
        });
        w.add_phase(phase, self.n);
    }

    /// Conses `w · node(x, low, high)` with the zero and redundancy rules.
    pub fn make_dd(&mut self, w: Weight, x: Var, low: Edge, high: Edge) -> Result<Edge, DdError> {
        for e in [&low, &high] {
            if !e.is_zero() && self.top(e) <= x {
                return Err(DdError::Order(self.order.name(x).to_string()));
            }
        }
        if w.is_zero() || (low.is_zero() && high.is_zero()) {
            return Ok(Edge::zero());
        }
        let low = Edge { w: self.snap(low.w), v: low.v };
        let high = Edge { w: self.snap(high.w), v: high.v };
        if self.is_tdd() && low.v == high.v && low.w == high.w && w.factor_at(x).is_none() {
            return Ok(Edge { w: low.w.mul(&w, 0), v: low.v });
        }
        let v = self.make_node(x, low, high);
        Ok(Edge { w: self.snap(w), v })
    }

    /// Reachable node count, terminal included.
    pub fn size(&self, f: &LimTdd) -> usize {
        self.edge_size(&f.edge)
    }

    pub(crate) fn edge_size(&self, e: &Edge) -> usize {
        let mut seen: HashSet<NodeId> = HashSet::from_iter([NodeId::TERMINAL]);
        let mut stack = vec![e.v];
        let mut count = 1;
        while let Some(v) = stack.pop() {
            if !seen.insert(v) {
                continue;
            }
            count += 1;
            let n = self.node(v);
            stack.push(n.low.v);
            stack.push(n.high.v);
        }
        count
    }

    /// Incoming weight of `f` as a dense weight over its declared indices.
    pub fn weight(&self, f: &LimTdd) -> LimWeight {
        f.edge.w.to_lim(&f.vars, self.n)
    }

    /// The complex coefficient of the incoming weight.
    pub fn coefficient(&self, f: &LimTdd) -> Complex64 {
        f.edge.w.coefficient(self.n)
    }

    pub fn zero(&self, vars: &[Var]) -> LimTdd {
        let mut vars = vars.to_vec();
        vars.sort_unstable();
        vars.dedup();
        self.handle(Edge::zero(), vars)
    }

    pub fn constant(&mut self, c: Complex64) -> LimTdd {
        let w = self.snap(Weight::scalar(c, self.n));
        self.handle(Edge::scalar(w), Vec::new())
    }

    /// Drops all memo tables (results stay valid; only reuse is lost).
    pub fn clear_caches(&mut self) {
        self.add_cache.clear();
        self.cont_cache.clear();
        self.slice_cache.clear();
        self.ext_cache.clear();
    }

    /// Frees every node not reachable from `roots` and clears memo tables.
    /// Handles not listed become invalid.
    pub fn collect_garbage(&mut self, roots: &[&LimTdd]) {
        let mut keep = vec![false; self.nodes.len()];
        keep[0] = true;
        let mut stack: Vec<NodeId> = roots.iter().map(|f| f.edge.v).collect();
        while let Some(v) = stack.pop() {
            if keep[v.index()] {
                continue;
            }
            keep[v.index()] = true;
            let n = self.node(v);
            stack.push(n.low.v);
            stack.push(n.high.v);
        }
        let was_free: HashSet<u32> = self.free.iter().copied().collect();
        self.unique.retain(|_, id| keep[id.index()]);
        for (i, k) in keep.iter().enumerate() {
            if !k && !was_free.contains(&(i as u32)) {
                self.free.push(i as u32);
                let n = &mut self.nodes[i];
                n.low = Edge::zero();
                n.high = Edge::zero();
            }
        }
        self.stab_cache.retain(|id, _| keep[id.index()]);
        self.clear_caches();
        self.reals.clear(&SEED_REALS);
        self.angles.clear(&[0.0]);
        let nodes = &self.nodes;
        let reals = &mut self.reals;
        let angles = &mut self.angles;
        for (i, k) in keep.iter().enumerate() {
            if *k {
                for e in [&nodes[i].high, &nodes[i].low] {
                    if !e.w.is_zero() {
                        reals.snap(e.w.r);
                        angles.snap(e.w.theta);
                    }
                }
            }
        }
        self.stats.collections += 1;
    }

    /// Number of entries across memo tables.
    pub fn cache_entries(&self) -> usize {
        self.add_cache.len() + self.cont_cache.len() + self.slice_cache.len() + self.ext_cache.len()
    }

    /// Node count held by the unique table.
    pub fn unique_entries(&self) -> usize {
        self.unique.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_validation() {
        assert!(Manager::new(0, StabMode::Fast).is_ok());
        assert!(Manager::new(1 << 20, StabMode::Fast).is_ok());
        assert_eq!(Manager::new(3, StabMode::Fast).err(), Some(DdError::InvalidPrecision(3)));
        assert!(Manager::new(1 << 21, StabMode::Fast).is_err());
    }

    #[test]
    fn index_order_registration() {
        let mut o = IndexOrder::default();
        assert_eq!(o.register("a"), 0);
        assert_eq!(o.register("b"), 1);
        assert_eq!(o.register("a"), 0);
        assert_eq!(o.register_at("c", 10), Ok(10));
        assert_eq!(o.register("d"), 11);
        assert!(o.register_at("e", 10).is_err());
        o.rename(10, "cc").unwrap();
        assert_eq!(o.var("cc"), Ok(10));
        assert!(o.var("c").is_err());
    }

    #[test]
    fn real_table_snaps_neighbours() {
        let mut t = RealTable::new(EPS, &[]);
        let a = t.snap(0.3);
        assert_eq!(t.snap(0.3 + 4e-11), a);
        assert_ne!(t.snap(0.3 + 1e-9), a);
    }

    #[test]
    fn set_union_is_sorted() {
        let mut s = SetTable::new();
        let a = s.intern(vec![1, 5]);
        let b = s.intern(vec![2, 5, 9]);
        let u = s.union(a, b);
        assert_eq!(s.get(u), &[1, 2, 5, 9]);
        let t = s.with_var(0, u);
        assert_eq!(s.get(t), &[0, 1, 2, 5, 9]);
    }
}
