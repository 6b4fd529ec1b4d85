//! Quantum circuits: representation, QASM subset, generators and simulation.

mod gen;
mod qasm;
mod sim;

use std::fmt;

use num_complex::Complex64;

pub use gen::{
    gen_fig9, gen_ghz, gen_qft, gen_random, gen_random_cliffordt, gen_remark2, gen_sample, generator, GENERATORS,
};
pub use qasm::{parse_qasm, QasmError};
pub use sim::{
    dense_simulate, dense_unitary, functionality, functionality_with, gate_matrix, gate_tensor, simulate, simulate_with, Outcome,
    SimOptions,
};

use crate::dd::DdError;
use crate::xp::omega_pow;

/// A rational multiple of π, kept reduced with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Angle {
    num: i64,
    den: u32,
}

impl Angle {
    pub fn new(num: i64, den: u32) -> Option<Angle> {
        if den == 0 {
            return None;
        }
        let g = gcd(num.unsigned_abs(), den as u64).max(1);
        Some(Angle { num: num / g as i64, den: (den as u64 / g) as u32 })
    }

    /// `π / 2^k`.
    pub fn pi_over_pow2(k: u32) -> Angle {
        Angle::new(1, 1u32 << k).expect("nonzero denominator")
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn radians(&self) -> f64 {
        std::f64::consts::PI * self.num as f64 / self.den as f64
    }

    /// `e^{iθ}`, exact on the axes.
    pub fn phase(&self) -> Complex64 {
        omega_pow(self.den, self.num)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (0, _) => write!(f, "0"),
            (1, 1) => write!(f, "pi"),
            (-1, 1) => write!(f, "-pi"),
            (1, d) => write!(f, "pi/{d}"),
            (-1, d) => write!(f, "-pi/{d}"),
            (k, 1) => write!(f, "{k}*pi"),
            (k, d) => write!(f, "{k}*pi/{d}"),
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    P(Angle),
    CX,
    CY,
    CZ,
    CP(Angle),
    Swap,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::CX | GateKind::CY | GateKind::CZ | GateKind::CP(_) | GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::P(_) => "p",
            GateKind::CX => "cx",
            GateKind::CY => "cy",
            GateKind::CZ => "cz",
            GateKind::CP(_) => "cp",
            GateKind::Swap => "swap",
        }
    }

    pub fn angle(&self) -> Option<Angle> {
        match self {
            GateKind::P(a) | GateKind::CP(a) => Some(*a),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    /// Control first for two-qubit gates.
    pub qubits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("gate `{gate}` expects {expected} qubit(s), got {got}")]
    Arity { gate: &'static str, expected: usize, got: usize },
    #[error("qubit {qubit} out of range for {n} qubits")]
    Qubit { qubit: usize, n: usize },
    #[error("gate `{0}` uses the same qubit twice")]
    Repeated(&'static str),
    #[error("input has {got} bits, circuit has {n} qubits")]
    Input { got: usize, n: usize },
    #[error("{0} qubits exceed the dense simulator limit")]
    TooLarge(usize),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error(transparent)]
    Qasm(#[from] QasmError),
    #[error(transparent)]
    Dd(#[from] DdError),
    #[error(transparent)]
    Dense(#[from] crate::dense::DenseError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, kind: GateKind, qubits: &[usize]) -> Result<(), CircuitError> {
        if qubits.len() != kind.arity() {
            return Err(CircuitError::Arity { gate: kind.name(), expected: kind.arity(), got: qubits.len() });
        }
        for &q in qubits {
            if q >= self.n {
                return Err(CircuitError::Qubit { qubit: q, n: self.n });
            }
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(CircuitError::Repeated(kind.name()));
        }
        self.gates.push(Gate { kind, qubits: qubits.to_vec() });
        Ok(())
    }

    /// Panicking variant of [`Circuit::push`] for generators with known-good operands.
    pub(crate) fn add(&mut self, kind: GateKind, qubits: &[usize]) {
        self.push(kind, qubits).expect("valid gate");
    }

    /// QASM 2.0 text of the circuit.
    pub fn to_qasm(&self) -> String {
        let mut s = format!("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[{}];\n", self.n);
        for g in &self.gates {
            let ops: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
            match g.kind.angle() {
                Some(a) => s.push_str(&format!("{}({}) {};\n", g.kind.name(), a, ops.join(","))),
                None => s.push_str(&format!("{} {};\n", g.kind.name(), ops.join(","))),
            }
        }
        s
    }
}
