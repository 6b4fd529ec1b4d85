#![allow(dead_code)]

use std::f64::consts::PI;

use limtdd::circuit::{Circuit, GateKind};
use limtdd::dense::DenseTensor;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

/// `e^{πik/N}` straight from the exponential.
pub fn omega(n: u32, k: i64) -> Complex64 {
    if n == 0 {
        return C1;
    }
    Complex64::from_polar(1.0, PI * k as f64 / n as f64)
}

/// Plain XP operator data: `ω^p ⊗ X^x P^z`, position 0 most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Xp {
    pub n: u32,
    pub p: i64,
    pub x: Vec<u8>,
    pub z: Vec<i64>,
}

impl Xp {
    pub fn random(r: &mut ChaCha8Rng, n: u32, k: usize) -> Xp {
        Xp {
            n,
            p: r.gen_range(0..2 * n as i64),
            x: (0..k).map(|_| r.gen_range(0..2u8)).collect(),
            z: (0..k).map(|_| r.gen_range(0..n as i64)).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.x.len()
    }

    /// Column `c` maps to row `c ⊕ x` with amplitude `ω^{p + 2 Σ z_i c_i}`.
    pub fn image(&self, c: usize) -> (usize, Complex64) {
        let k = self.rank();
        let mut row = 0;
        let mut e = self.p;
        for i in 0..k {
            let bit = (c >> (k - 1 - i)) & 1;
            e += 2 * self.z[i] * bit as i64;
            row |= ((bit as u8 ^ self.x[i]) as usize) << (k - 1 - i);
        }
        (row, omega(self.n, e))
    }

    pub fn matrix(&self) -> Vec<Vec<Complex64>> {
        let d = 1 << self.rank();
        let mut m = vec![vec![C0; d]; d];
        for c in 0..d {
            let (r, v) = self.image(c);
            m[r][c] = v;
        }
        m
    }

    pub fn apply(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![C0; data.len()];
        for (c, &v) in data.iter().enumerate() {
            let (r, a) = self.image(c);
            out[r] += a * v;
        }
        out
    }
}

pub fn mat_mul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let d = a.len();
    let mut m = vec![vec![C0; d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == C0 {
                continue;
            }
            for j in 0..d {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

pub fn mat_diff(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn identity(d: usize) -> Vec<Vec<Complex64>> {
    (0..d).map(|i| (0..d).map(|j| if i == j { C1 } else { C0 }).collect()).collect()
}

pub fn transpose(a: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[j][i]).collect()).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Entries drawn from `{0} ∪ {ω^j}`, so nodes tend to have nontrivial stabilizers.
pub fn structured(r: &mut ChaCha8Rng, idx: Vec<String>, n: u32) -> DenseTensor {
    let m = if n == 0 { 4 } else { 2 * n };
    let zero_p = r.gen_range(0.0..0.5);
    let data = (0..1usize << idx.len())
        .map(|_| if r.gen::<f64>() < zero_p { C0 } else { omega(m / 2, r.gen_range(0..m as i64)) })
        .collect();
    DenseTensor::new(idx, data).unwrap()
}

pub fn generic(r: &mut ChaCha8Rng, idx: Vec<String>) -> DenseTensor {
    let data = (0..1usize << idx.len()).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    DenseTensor::new(idx, data).unwrap()
}

/// A mix of generic, structured and product tensors.
pub fn mixed(r: &mut ChaCha8Rng, idx: Vec<String>, n: u32) -> DenseTensor {
    match r.gen_range(0..3) {
        0 => generic(r, idx),
        1 => structured(r, idx, n),
        _ => {
            let k = idx.len();
            let vs: Vec<[Complex64; 2]> = (0..k)
                .map(|_| [Complex64::new(r.gen_range(-1.0..1.0), r.gen()), Complex64::new(r.gen(), r.gen_range(-1.0..1.0))])
                .collect();
            DenseTensor::from_fn(idx, |b| b.iter().enumerate().map(|(i, &bit)| vs[i][bit as usize]).product()).unwrap()
        }
    }
}

/// Every XP operator (precision `n`, rank `k`) fixing `data`.
pub fn brute_stabilizers(n: u32, data: &[Complex64], tol: f64) -> Vec<Xp> {
    let k = data.len().trailing_zeros() as usize;
    let mut out = Vec::new();
    let total_z = (n as usize).pow(k as u32);
    for p in 0..2 * n as i64 {
        for xs in 0..1usize << k {
            for zs in 0..total_z {
                let x: Vec<u8> = (0..k).map(|i| ((xs >> (k - 1 - i)) & 1) as u8).collect();
                let mut zz = zs;
                let mut z = vec![0i64; k];
                for i in (0..k).rev() {
                    z[i] = (zz % n as usize) as i64;
                    zz /= n as usize;
                }
                let op = Xp { n, p, x, z };
                if max_diff(&op.apply(data), data) < tol {
                    out.push(op);
                }
            }
        }
    }
    out
}

pub fn gate_2x2(kind: GateKind) -> [[Complex64; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::new(0.0, 1.0);
    let diag = |ph: Complex64| [[C1, C0], [C0, ph]];
    match kind {
        GateKind::X | GateKind::CX => [[C0, C1], [C1, C0]],
        GateKind::Y | GateKind::CY => [[C0, -i], [i, C0]],
        GateKind::Z | GateKind::CZ => diag(-C1),
        GateKind::H => [[C1 * s, C1 * s], [C1 * s, -C1 * s]],
        GateKind::S => diag(i),
        GateKind::Sdg => diag(-i),
        GateKind::T => diag(Complex64::from_polar(1.0, PI / 4.0)),
        GateKind::Tdg => diag(Complex64::from_polar(1.0, -PI / 4.0)),
        GateKind::P(a) | GateKind::CP(a) => diag(Complex64::from_polar(1.0, a.radians())),
        GateKind::Swap => unreachable!(),
    }
}

/// Statevector with qubit `q` at bit `q`.
pub fn statevector(c: &Circuit, input: usize) -> Vec<Complex64> {
    let n = c.n_qubits();
    let mut s = vec![C0; 1 << n];
    s[input] = C1;
    for g in c.gates() {
        let mut t = vec![C0; 1 << n];
        for (idx, &amp) in s.iter().enumerate() {
            if amp == C0 {
                continue;
            }
            match (g.kind, g.qubits.as_slice()) {
                (GateKind::Swap, &[a, b]) => {
                    let (ba, bb) = ((idx >> a) & 1, (idx >> b) & 1);
                    let j = idx & !(1 << a) & !(1 << b) | (bb << a) | (ba << b);
                    t[j] += amp;
                }
                (_, &[q]) | (_, &[_, q]) => {
                    let ctrl = g.qubits.len() == 1 || (idx >> g.qubits[0]) & 1 == 1;
                    if !ctrl {
                        t[idx] += amp;
                        continue;
                    }
                    let m = gate_2x2(g.kind);
                    let b = (idx >> q) & 1;
                    for out in 0..2 {
                        let j = (idx & !(1 << q)) | (out << q);
                        t[j] += m[out][b] * amp;
                    }
                }
                _ => unreachable!(),
            }
        }
        s = t;
    }
    s
}

/// Diagram state as a vector with qubit `q` at bit `q`.
pub fn state_of(t: &DenseTensor, n: usize) -> Vec<Complex64> {
    let order: Vec<String> = (0..n).rev().map(|q| format!("q{q}")).collect();
    t.permuted(&order).unwrap().data().to_vec()
}

/// Functionality tensor as `u[row][col]`, qubit `q` at bit `q`.
pub fn unitary_of(t: &DenseTensor, n: usize) -> Vec<Vec<Complex64>> {
    let mut order = Vec::new();
    for q in (0..n).rev() {
        order.push(format!("out{q}"));
        order.push(format!("in{q}"));
    }
    let t = t.permuted(&order).unwrap();
    let d = 1 << n;
    let mut u = vec![vec![C0; d]; d];
    for (k, v) in t.data().iter().enumerate() {
        let (mut row, mut col) = (0, 0);
        for q in 0..n {
            let shift = 2 * q;
            col |= ((k >> shift) & 1) << q;
            row |= ((k >> (shift + 1)) & 1) << q;
        }
        u[row][col] = *v;
    }
    u
}

pub fn unitary(c: &Circuit) -> Vec<Vec<Complex64>> {
    let d = 1 << c.n_qubits();
    let cols: Vec<Vec<Complex64>> = (0..d).map(|j| statevector(c, j)).collect();
    (0..d).map(|i| (0..d).map(|j| cols[j][i]).collect()).collect()
}

/// Elementwise reference contraction over `shared` names.
pub fn contract_ref(a: &DenseTensor, b: &DenseTensor, shared: &[String]) -> DenseTensor {
    let mut out: Vec<String> = a.indices().iter().filter(|s| !shared.contains(s)).cloned().collect();
    for s in b.indices() {
        if !shared.contains(s) && !out.contains(s) {
            out.push(s.clone());
        }
    }
    let k = shared.len();
    DenseTensor::from_fn(out.clone(), |bits| {
        let mut acc = C0;
        for m in 0..1usize << k {
            let val = |name: &String| -> u8 {
                if let Some(p) = out.iter().position(|o| o == name) {
                    bits[p]
                } else {
                    let j = shared.iter().position(|s| s == name).unwrap();
                    ((m >> j) & 1) as u8
                }
            };
            let ba: Vec<u8> = a.indices().iter().map(val).collect();
            let bb: Vec<u8> = b.indices().iter().map(val).collect();
            acc += a.get(&ba) * b.get(&bb);
        }
        acc
    })
    .unwrap()
}
