//! Circuit simulation and functionality construction by contraction.

use num_complex::Complex64;

use super::{Circuit, CircuitError, Gate, GateKind};
use crate::dd::{Edge, LimTdd, Manager, Var, Weight};
use crate::dense::{DenseTensor, Matrix};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const I1: Complex64 = Complex64::new(0.0, 1.0);

/// Unitary of a gate; rows are output bits, columns input bits, first operand most significant.
pub fn gate_matrix(kind: GateKind) -> Matrix {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let diag2 = |p: Complex64| Matrix::from_rows(&[vec![C1, C0], vec![C0, p]]);
    let controlled = |u: Matrix| {
        let mut m = Matrix::identity(4);
        for i in 0..2 {
            for j in 0..2 {
                m.set(2 + i, 2 + j, u.get(i, j));
            }
        }
        m
    };
    let t = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
    match kind {
        GateKind::X => Matrix::from_rows(&[vec![C0, C1], vec![C1, C0]]),
        GateKind::Y => Matrix::from_rows(&[vec![C0, -I1], vec![I1, C0]]),
        GateKind::Z => diag2(-C1),
        GateKind::H => Matrix::from_rows(&[vec![h, h], vec![h, -h]]),
        GateKind::S => diag2(I1),
        GateKind::Sdg => diag2(-I1),
        GateKind::T => diag2(t),
        GateKind::Tdg => diag2(t.conj()),
        GateKind::P(a) => diag2(a.phase()),
        GateKind::CX => controlled(gate_matrix(GateKind::X)),
        GateKind::CY => controlled(gate_matrix(GateKind::Y)),
        GateKind::CZ => controlled(gate_matrix(GateKind::Z)),
        GateKind::CP(a) => controlled(diag2(a.phase())),
        GateKind::Swap => {
            let mut m = Matrix::zeros(4);
            for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                m.set(r, c, C1);
            }
            m
        }
    }
}

/// Gate as a tensor over `(out_0, in_0, out_1, in_1, …)`.
pub fn gate_tensor(kind: GateKind, outs: &[String], ins: &[String]) -> Result<DenseTensor, CircuitError> {
    let k = kind.arity();
    if outs.len() != k || ins.len() != k {
        return Err(CircuitError::Arity { gate: kind.name(), expected: k, got: outs.len().min(ins.len()) });
    }
    let m = gate_matrix(kind);
    let mut names = Vec::with_capacity(2 * k);
    for i in 0..k {
        names.push(outs[i].clone());
        names.push(ins[i].clone());
    }
    Ok(DenseTensor::from_fn(names, |bits| {
        let (mut row, mut col) = (0, 0);
        for i in 0..k {
            row = (row << 1) | bits[2 * i] as usize;
            col = (col << 1) | bits[2 * i + 1] as usize;
        }
        m.get(row, col)
    })?)
}

#[derive(Clone, Debug, Default)]
pub struct SimOptions {
    /// Reclaim unreachable nodes whenever the live count exceeds this many.
    pub gc_threshold: Option<usize>,
}

/// A finished run: the diagram plus node counts.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub diagram: LimTdd,
    pub final_nodes: usize,
    pub peak_nodes: usize,
}

/// Per-qubit live wire indices laid out qubit-major, later segments nearer the root.
struct WireMap {
    n: usize,
    base: Var,
    segs: Var,
    live: Vec<Var>,
    seg: Vec<Var>,
}

impl WireMap {
    fn new(mgr: &mut Manager, c: &Circuit) -> Self {
        let n = c.n_qubits();
        let mut uses = vec![0 as Var; n];
        for g in c.gates() {
            for &q in &g.qubits {
                uses[q] += 1;
            }
        }
        let segs = uses.iter().copied().max().unwrap_or(0) + 2;
        let base = mgr.order().next_key();
        let mut w = WireMap { n, base, segs, live: vec![0; n], seg: vec![0; n] };
        for q in 0..n {
            w.live[q] = w.register(mgr, q, 0);
        }
        w
    }

    fn register(&self, mgr: &mut Manager, q: usize, s: Var) -> Var {
        let key = self.base + (self.n - 1 - q) as Var * self.segs + (self.segs - 1 - s);
        mgr.register_index_at(&format!("q{q}#{key}"), key).expect("fresh wire key")
    }

    fn advance(&mut self, mgr: &mut Manager, q: usize) -> Var {
        self.seg[q] += 1;
        let v = self.register(mgr, q, self.seg[q]);
        self.live[q] = v;
        v
    }
}

fn claim_name(mgr: &mut Manager, var: Var, name: &str) {
    if let Ok(old) = mgr.var(name) {
        if old == var {
            return;
        }
        let moved = format!("{name}@{old}");
        mgr.rename_index(old, &moved).expect("unique stale name");
    }
    mgr.rename_index(var, name).expect("name freed");
}

fn apply_gate(
    mgr: &mut Manager,
    wires: &mut WireMap,
    state: &LimTdd,
    g: &Gate,
) -> Result<LimTdd, CircuitError> {
    let ins: Vec<Var> = g.qubits.iter().map(|&q| wires.live[q]).collect();
    let outs: Vec<Var> = g.qubits.iter().map(|&q| wires.advance(mgr, q)).collect();
    let name = |v: &Var| mgr.index_name(*v).to_string();
    let in_names: Vec<String> = ins.iter().map(name).collect();
    let out_names: Vec<String> = outs.iter().map(name).collect();
    let t = gate_tensor(g.kind, &out_names, &in_names)?;
    let gd = mgr.generate(&t)?;
    let shared: Vec<&str> =
        in_names.iter().zip(&ins).filter(|(_, v)| state.vars().contains(v)).map(|(s, _)| s.as_str()).collect();
    Ok(mgr.contract(state, &gd, &shared)?)
}

fn run(
    mgr: &mut Manager,
    c: &Circuit,
    wires: &mut WireMap,
    mut state: LimTdd,
    opts: &SimOptions,
) -> Result<(LimTdd, usize), CircuitError> {
    let mut peak = mgr.size(&state);
    for g in c.gates() {
        state = apply_gate(mgr, wires, &state, g)?;
        mgr.clear_caches();
        peak = peak.max(mgr.size(&state));
        if let Some(t) = opts.gc_threshold {
            if mgr.live_nodes() > t {
                mgr.collect_garbage(&[&state]);
            }
        }
    }
    Ok((state, peak))
}

/// Output state for the basis input `input`, written `q[n-1] … q[0]`.
pub fn simulate(c: &Circuit, input: &str, mgr: &mut Manager) -> Result<Outcome, CircuitError> {
    simulate_with(c, input, mgr, &SimOptions::default())
}

pub fn simulate_with(c: &Circuit, input: &str, mgr: &mut Manager, opts: &SimOptions) -> Result<Outcome, CircuitError> {
    let n = c.n_qubits();
    let bits: Vec<bool> = input.chars().rev().map(|ch| ch == '1').collect();
    if bits.len() != n || input.chars().any(|ch| ch != '0' && ch != '1') {
        return Err(CircuitError::Input { got: input.chars().count(), n });
    }
    let mut wires = WireMap::new(mgr, c);
    let mut e = Edge::scalar(Weight::one());
    for q in 0..n {
        let (e0, e1) = if bits[q] { (Edge::zero(), e) } else { (e, Edge::zero()) };
        e = mgr.norm_edges(wires.live[q], e0, e1);
    }
    let mut vars: Vec<Var> = wires.live.clone();
    vars.sort_unstable();
    let e = mgr.finish(e, &vars);
    let init = mgr.handle(e, vars);
    let (state, peak) = run(mgr, c, &mut wires, init, opts)?;
    for q in 0..n {
        claim_name(mgr, wires.live[q], &format!("q{q}"));
    }
    let final_nodes = mgr.size(&state);
    Ok(Outcome { diagram: state, final_nodes, peak_nodes: peak.max(final_nodes) })
}

/// The circuit unitary over `(out_{n-1}, in_{n-1}, …, out_0, in_0)`.
pub fn functionality(c: &Circuit, mgr: &mut Manager) -> Result<Outcome, CircuitError> {
    functionality_with(c, mgr, &SimOptions::default())
}

pub fn functionality_with(c: &Circuit, mgr: &mut Manager, opts: &SimOptions) -> Result<Outcome, CircuitError> {
    let n = c.n_qubits();
    let mut wires = WireMap::new(mgr, c);
    let inputs = wires.live.clone();
    let one = mgr.constant(C1);
    let (mut state, mut peak) = run(mgr, c, &mut wires, one, opts)?;
    for q in 0..n {
        if wires.live[q] == inputs[q] {
            let out = wires.advance(mgr, q);
            let names = [mgr.index_name(out).to_string(), mgr.index_name(inputs[q]).to_string()];
            let id = DenseTensor::from_fn(names.to_vec(), |b| if b[0] == b[1] { C1 } else { C0 })?;
            let idd = mgr.generate(&id)?;
            state = mgr.contract(&state, &idd, &[])?;
            peak = peak.max(mgr.size(&state));
        }
    }
    for q in 0..n {
        claim_name(mgr, wires.live[q], &format!("out{q}"));
        claim_name(mgr, inputs[q], &format!("in{q}"));
    }
    let final_nodes = mgr.size(&state);
    Ok(Outcome { diagram: state, final_nodes, peak_nodes: peak.max(final_nodes) })
}

fn apply_dense(state: &mut [Complex64], n: usize, g: &Gate) {
    let m = gate_matrix(g.kind);
    match g.qubits.as_slice() {
        &[q] => {
            let bit = 1usize << q;
            for i in 0..1usize << n {
                if i & bit == 0 {
                    let (a, b) = (state[i], state[i | bit]);
                    state[i] = m.get(0, 0) * a + m.get(0, 1) * b;
                    state[i | bit] = m.get(1, 0) * a + m.get(1, 1) * b;
                }
            }
        }
        &[qa, qb] => {
            let (ba, bb) = (1usize << qa, 1usize << qb);
            for i in 0..1usize << n {
                if i & ba == 0 && i & bb == 0 {
                    let idx = [i, i | bb, i | ba, i | ba | bb];
                    let v: Vec<Complex64> = idx.iter().map(|&k| state[k]).collect();
                    for (r, &k) in idx.iter().enumerate() {
                        state[k] = (0..4).map(|c| m.get(r, c) * v[c]).sum();
                    }
                }
            }
        }
        _ => unreachable!("gates act on one or two qubits"),
    }
}

/// Gate-by-gate statevector simulation; amplitude index has qubit `q` at bit `q`.
pub fn dense_simulate(c: &Circuit, input: &str) -> Result<Vec<Complex64>, CircuitError> {
    let n = c.n_qubits();
    if n > 20 {
        return Err(CircuitError::TooLarge(n));
    }
    if input.len() != n || input.chars().any(|ch| ch != '0' && ch != '1') {
        return Err(CircuitError::Input { got: input.chars().count(), n });
    }
    let start = usize::from_str_radix(input, 2).unwrap_or(0);
    let mut state = vec![C0; 1 << n];
    state[start] = C1;
    for g in c.gates() {
        apply_dense(&mut state, n, g);
    }
    Ok(state)
}

/// Dense unitary; row and column indices have qubit `q` at bit `q`.
pub fn dense_unitary(c: &Circuit) -> Result<Matrix, CircuitError> {
    let n = c.n_qubits();
    if n > 10 {
        return Err(CircuitError::TooLarge(n));
    }
    let dim = 1usize << n;
    let mut u = Matrix::zeros(dim);
    for col in 0..dim {
        let mut state = vec![C0; dim];
        state[col] = C1;
        for g in c.gates() {
            apply_dense(&mut state, n, g);
        }
        for (row, v) in state.into_iter().enumerate() {
            u.set(row, col, v);
        }
    }
    Ok(u)
}
