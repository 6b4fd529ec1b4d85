//! Built-in circuit families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Angle, Circuit, CircuitError, GateKind};

/// GHZ preparation: `H` on the top qubit, then a CX ladder downwards.
pub fn gen_ghz(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    if n == 0 {
        return c;
    }
    c.add(GateKind::H, &[n - 1]);
    for i in (1..n).rev() {
        c.add(GateKind::CX, &[i, i - 1]);
    }
    c
}

fn qft_body(c: &mut Circuit, n: usize) {
    for j in (0..n).rev() {
        c.add(GateKind::H, &[j]);
        for k in (0..j).rev() {
            c.add(GateKind::CP(Angle::pi_over_pow2((j - k) as u32)), &[k, j]);
        }
    }
}

/// Quantum Fourier transform with the final qubit reversal.
pub fn gen_qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    qft_body(&mut c, n);
    for i in 0..n / 2 {
        c.add(GateKind::Swap, &[i, n - 1 - i]);
    }
    c
}

/// `2n` qubits: Bell pairs between `q[2n-1-i]` and `q[n-1-i]`, then a swap-free QFT on `q[0..n]`.
pub fn gen_fig9(n: usize) -> Circuit {
    let mut c = Circuit::new(2 * n);
    for i in 0..n {
        let (a, b) = (2 * n - 1 - i, n - 1 - i);
        c.add(GateKind::H, &[a]);
        c.add(GateKind::CX, &[a, b]);
    }
    qft_body(&mut c, n);
    c
}

/// `H` on every qubit, then `CP(π/2^{k-2})` between `q[k-1]` and `q[0]` for `k = 2..=n`.
pub fn gen_remark2(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.add(GateKind::H, &[q]);
    }
    for k in 2..=n {
        c.add(GateKind::CP(Angle::pi_over_pow2((k - 2) as u32)), &[k - 1, 0]);
    }
    c
}

/// Three qubits: `H` on each, CZ, controlled-S and controlled-Y.
pub fn gen_sample() -> Circuit {
    let mut c = Circuit::new(3);
    for q in (0..3).rev() {
        c.add(GateKind::H, &[q]);
    }
    c.add(GateKind::CZ, &[1, 0]);
    c.add(GateKind::CP(Angle::new(1, 2).expect("nonzero denominator")), &[2, 1]);
    c.add(GateKind::CY, &[2, 0]);
    c
}

fn random_qubits(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let a = rng.gen_range(0..n);
    if k == 1 {
        return vec![a];
    }
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    vec![a, b]
}

/// Random circuit over `kinds` (two-qubit kinds are skipped when `n < 2`).
pub fn gen_random(n: usize, gates: usize, kinds: &[GateKind], seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds: Vec<GateKind> = kinds.iter().copied().filter(|k| k.arity() <= n).collect();
    let mut c = Circuit::new(n);
    if kinds.is_empty() {
        return c;
    }
    for _ in 0..gates {
        let kind = kinds[rng.gen_range(0..kinds.len())];
        let qs = random_qubits(&mut rng, n, kind.arity());
        c.add(kind, &qs);
    }
    c
}

/// Clifford+T: `T` with probability `t_prob`, otherwise uniform over X, Y, Z, S, H, CX.
pub fn gen_random_cliffordt(n: usize, gates: usize, t_prob: f64, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clifford: Vec<GateKind> = [GateKind::X, GateKind::Y, GateKind::Z, GateKind::S, GateKind::H, GateKind::CX]
        .into_iter()
        .filter(|k| k.arity() <= n)
        .collect();
    let mut c = Circuit::new(n);
    if n == 0 {
        return c;
    }
    for _ in 0..gates {
        let kind = if rng.gen::<f64>() < t_prob { GateKind::T } else { clifford[rng.gen_range(0..clifford.len())] };
        let qs = random_qubits(&mut rng, n, kind.arity());
        c.add(kind, &qs);
    }
    c
}

/// Names accepted by [`generator`].
pub const GENERATORS: [&str; 6] = ["ghz", "qft", "fig9", "remark2", "sample", "cliffordt"];

/// Builds a named family; `cliffordt` uses `gates`, `t_prob` and `seed`.
pub fn generator(name: &str, n: usize, gates: usize, t_prob: f64, seed: u64) -> Result<Circuit, CircuitError> {
    Ok(match name {
        "ghz" => gen_ghz(n),
        "qft" => gen_qft(n),
        "fig9" => gen_fig9(n),
        "remark2" => gen_remark2(n),
        "sample" => gen_sample(),
        "cliffordt" | "random" => gen_random_cliffordt(n, gates, t_prob, seed),
        _ => return Err(CircuitError::UnknownGenerator(name.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz3_layout() {
        let c = gen_ghz(3);
        let ops: Vec<(GateKind, Vec<usize>)> = c.gates().iter().map(|g| (g.kind, g.qubits.clone())).collect();
        assert_eq!(ops, vec![(GateKind::H, vec![2]), (GateKind::CX, vec![2, 1]), (GateKind::CX, vec![1, 0])]);
    }

    #[test]
    fn remark2_angles() {
        let c = gen_remark2(4);
        let cps: Vec<Angle> = c.gates().iter().filter_map(|g| g.kind.angle()).collect();
        assert_eq!(c.len(), 7);
        assert_eq!(cps, vec![Angle::new(1, 1).unwrap(), Angle::new(1, 2).unwrap(), Angle::new(1, 4).unwrap()]);
        assert!(c.gates()[4..].iter().all(|g| g.qubits[1] == 0));
    }

    #[test]
    fn random_is_seeded() {
        assert_eq!(gen_random_cliffordt(10, 400, 0.02, 7), gen_random_cliffordt(10, 400, 0.02, 7));
        assert_ne!(gen_random_cliffordt(10, 400, 0.02, 7), gen_random_cliffordt(10, 400, 0.02, 8));
    }
}
