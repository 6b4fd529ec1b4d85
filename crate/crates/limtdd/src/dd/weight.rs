//! Edge weights with factors keyed by global index position.
//!
//! Only non-identity factors are stored, sorted by index order, so weights on
//! different index sets multiply without alignment.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::xp::{canon_angle, cmp_real, omega_pow, phase_mod, z_mod, LimWeight, XPOperator, EPS};

use super::Var;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub var: Var,
    pub x: bool,
    pub z: u32,
}

/// `r · e^{2πiθ} · ω^p · ⊗ X^x P^z`.
#[derive(Clone, Debug)]
pub struct Weight {
    pub(crate) r: f64,
    pub(crate) theta: f64,
    pub(crate) p: u32,
    pub(crate) f: SmallVec<[Factor; 2]>,
}

impl PartialEq for Weight {
    fn eq(&self, o: &Self) -> bool {
        self.r.to_bits() == o.r.to_bits()
            && self.theta.to_bits() == o.theta.to_bits()
            && self.p == o.p
            && self.f == o.f
    }
}

impl Eq for Weight {}

impl Hash for Weight {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.r.to_bits().hash(h);
        self.theta.to_bits().hash(h);
        self.p.hash(h);
        self.f.hash(h);
    }
}

impl Weight {
    pub fn one() -> Self {
        Weight { r: 1.0, theta: 0.0, p: 0, f: SmallVec::new() }
    }

    pub fn zero() -> Self {
        Weight { r: 0.0, theta: 0.0, p: 0, f: SmallVec::new() }
    }

    pub fn scalar(c: Complex64, n: u32) -> Self {
        let r = c.norm();
        if r < EPS {
            return Weight::zero();
        }
        let (theta, p) = canon_angle(c.arg() / (2.0 * PI), n);
        Weight { r, theta, p: p as u32, f: SmallVec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.r < EPS
    }

    pub fn is_one(&self) -> bool {
        self.f.is_empty() && self.p == 0 && (self.r - 1.0).abs() < EPS && self.theta.abs() < EPS
    }

    fn is_unit(&self) -> bool {
        self.r == 1.0 && self.theta == 0.0 && self.p == 0 && self.f.is_empty()
    }

    pub fn has_factors(&self) -> bool {
        !self.f.is_empty()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.f
    }

    pub fn first_var(&self) -> Option<Var> {
        self.f.first().map(|f| f.var)
    }

    pub fn factor_at(&self, var: Var) -> Option<Factor> {
        self.f.binary_search_by(|f| f.var.cmp(&var)).ok().map(|i| self.f[i])
    }

    /// The complex coefficient `r·e^{2πiθ}·ω^p`.
    pub fn coefficient(&self, n: u32) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.r, 2.0 * PI * self.theta) * omega_pow(n, self.p as i64)
    }

    /// Same factors, unit scalar.
    pub fn op_part(&self) -> Weight {
        Weight { r: 1.0, theta: 0.0, p: 0, f: self.f.clone() }
    }

    /// Same scalar, no factors.
    pub fn scalar_part(&self) -> Weight {
        Weight { r: self.r, theta: self.theta, p: self.p, f: SmallVec::new() }
    }

    pub fn from_factor(var: Var, x: bool, z: u32) -> Weight {
        let mut w = Weight::one();
        if x || z != 0 {
            w.f.push(Factor { var, x, z });
        }
        w
    }

    /// Removes the factor at `var`, returning it.
    pub fn take(&mut self, var: Var) -> Option<Factor> {
        match self.f.binary_search_by(|f| f.var.cmp(&var)) {
            Ok(i) => Some(self.f.remove(i)),
            Err(_) => None,
        }
    }

    /// Multiplies by `ω^k`.
    pub fn add_phase(&mut self, k: u64, n: u32) {
        if self.is_zero() {
            return;
        }
        self.p = ((self.p as u64 + k) % phase_mod(n)) as u32;
    }

    pub fn scale(&self, c: Complex64, n: u32) -> Weight {
        self.mul(&Weight::scalar(c, n), n)
    }

    pub fn mul(&self, o: &Weight, n: u32) -> Weight {
        if self.is_zero() || o.is_zero() {
            return Weight::zero();
        }
        if o.is_unit() {
            return self.clone();
        }
        if self.is_unit() {
            return o.clone();
        }
        let zm = z_mod(n);
        let mut extra = 0u64;
        let mut f: SmallVec<[Factor; 2]> = SmallVec::with_capacity(self.f.len().max(o.f.len()));
        let (mut i, mut j) = (0, 0);
        while i < self.f.len() || j < o.f.len() {
            let a = self.f.get(i);
            let b = o.f.get(j);
            match (a, b) {
                (Some(a), Some(b)) if a.var == b.var => {
                    let (z1, z2) = (a.z as u64, b.z as u64);
                    let z = if b.x {
                        extra += 2 * z1;
                        (z2 + zm - z1) % zm
                    } else {
                        (z1 + z2) % zm
                    };
                    let x = a.x ^ b.x;
                    if x || z != 0 {
                        f.push(Factor { var: a.var, x, z: z as u32 });
                    }
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a.var < b.var => {
                    f.push(*a);
                    i += 1;
                }
                (Some(a), None) => {
                    f.push(*a);
                    i += 1;
                }
                (_, Some(b)) => {
                    f.push(*b);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        let (theta, carry) = canon_angle(self.theta + o.theta, n);
        let p = (self.p as u64 + o.p as u64 + carry + extra) % phase_mod(n);
        Weight { r: self.r * o.r, theta, p: p as u32, f }
    }

    pub fn inv(&self, n: u32) -> Weight {
        assert!(!self.is_zero(), "inverse of a zero weight");
        let pm = phase_mod(n);
        let zm = z_mod(n);
        let mut extra = 0u64;
        let f = self
            .f
            .iter()
            .map(|fa| {
                if fa.x {
                    extra += 2 * fa.z as u64;
                    *fa
                } else {
                    Factor { var: fa.var, x: false, z: ((zm - fa.z as u64) % zm) as u32 }
                }
            })
            .collect();
        let (theta, carry) = canon_angle(-self.theta, n);
        let p = (carry + 2 * pm - self.p as u64 - extra % pm) % pm;
        Weight { r: 1.0 / self.r, theta, p: p as u32, f }
    }

    pub fn transpose(&self, n: u32) -> Weight {
        let zm = z_mod(n);
        let mut w = self.clone();
        let mut extra = 0u64;
        for fa in w.f.iter_mut() {
            if fa.x {
                extra += 2 * fa.z as u64;
                fa.z = ((zm - fa.z as u64) % zm) as u32;
            }
        }
        w.add_phase(extra, n);
        w
    }

    /// Partitions factors by `pred`; the scalar stays with the first part.
    pub fn split_by<F: Fn(Var) -> bool>(&self, pred: F) -> (Weight, Weight) {
        let mut on = self.scalar_part();
        let mut off = Weight::one();
        for fa in &self.f {
            if pred(fa.var) {
                on.f.push(*fa);
            } else {
                off.f.push(*fa);
            }
        }
        (on, off)
    }

    fn cmp_ops(&self, o: &Weight) -> Ordering {
        // dense x-vectors first, then z-vectors, both in index order
        let walk = |key: &dyn Fn(Option<&Factor>) -> u32| -> Ordering {
            let (mut i, mut j) = (0, 0);
            while i < self.f.len() || j < o.f.len() {
                let (a, b) = (self.f.get(i), o.f.get(j));
                let (va, vb) = match (a, b) {
                    (Some(a), Some(b)) if a.var == b.var => {
                        i += 1;
                        j += 1;
                        (key(Some(a)), key(Some(b)))
                    }
                    (Some(a), Some(b)) if a.var < b.var => {
                        i += 1;
                        (key(Some(a)), key(None))
                    }
                    (Some(a), None) => {
                        i += 1;
                        (key(Some(a)), key(None))
                    }
                    (_, Some(b)) => {
                        j += 1;
                        (key(None), key(Some(b)))
                    }
                    (None, None) => unreachable!(),
                };
                if va != vb {
                    return va.cmp(&vb);
                }
            }
            Ordering::Equal
        };
        walk(&|f| f.map_or(0, |f| f.x as u32)).then_with(|| walk(&|f| f.map_or(0, |f| f.z)))
    }

    /// Order on `(x | z | r | θ | p)`.
    pub fn cmp_full(&self, o: &Weight) -> Ordering {
        self.cmp_ops(o)
            .then_with(|| cmp_real(self.r, o.r))
            .then_with(|| cmp_real(self.theta, o.theta))
            .then_with(|| self.p.cmp(&o.p))
    }

    /// Order on the residual left after extracting `ω^{2k}` (phase taken mod 2).
    pub fn cmp_residual(&self, o: &Weight) -> Ordering {
        self.cmp_ops(o)
            .then_with(|| cmp_real(self.r, o.r))
            .then_with(|| cmp_real(self.theta, o.theta))
            .then_with(|| (self.p % 2).cmp(&(o.p % 2)))
    }

    /// Converts to a dense weight over `vars` (sorted); factors outside `vars` are dropped.
    pub fn to_lim(&self, vars: &[Var], n: u32) -> LimWeight {
        let r = vars.len();
        let mut x = vec![0u8; r];
        let mut z = vec![0i64; r];
        for fa in &self.f {
            if let Ok(i) = vars.binary_search(&fa.var) {
                x[i] = fa.x as u8;
                z[i] = fa.z as i64;
            }
        }
        let op = XPOperator::new(n, self.p as i64, &x, &z).expect("weight components");
        if self.is_zero() {
            return LimWeight::zero(n, r);
        }
        LimWeight::from_polar(self.r, self.theta, op)
    }

    pub fn from_lim(w: &LimWeight, vars: &[Var]) -> Weight {
        if w.is_zero() {
            return Weight::zero();
        }
        let op = w.op();
        let f = vars
            .iter()
            .enumerate()
            .filter(|(i, _)| op.x()[*i] == 1 || op.z()[*i] != 0)
            .map(|(i, &var)| Factor { var, x: op.x()[i] == 1, z: op.z()[i] })
            .collect();
        Weight { r: w.magnitude(), theta: w.angle(), p: op.phase(), f }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(p: u32, f: &[(Var, bool, u32)]) -> Weight {
        Weight { r: 1.0, theta: 0.0, p, f: f.iter().map(|&(var, x, z)| Factor { var, x, z }).collect() }
    }

    #[test]
    fn sparse_matches_dense_product() {
        let n = 8;
        let vars = [1, 4, 9];
        let a = w(3, &[(1, true, 5), (9, false, 2)]);
        let b = w(6, &[(1, true, 1), (4, true, 7)]);
        let dense = a.to_lim(&vars, n).mul(&b.to_lim(&vars, n)).unwrap();
        assert_eq!(a.mul(&b, n).to_lim(&vars, n), dense);
        let inv = a.inv(n);
        assert!(a.mul(&inv, n).is_one());
    }

    #[test]
    fn transpose_matches_dense() {
        let n = 4;
        let vars = [2, 3];
        let a = w(1, &[(2, true, 3), (3, false, 1)]);
        let t = a.transpose(n).to_lim(&vars, n).to_dense().unwrap();
        let d = a.to_lim(&vars, n).to_dense().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((t.get(i, j) - d.get(j, i)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn order_reads_x_before_z() {
        let a = w(0, &[(5, true, 0)]);
        let b = w(0, &[(2, false, 3)]);
        assert_eq!(a.cmp_full(&b), Ordering::Greater);
        let c = w(0, &[(2, true, 0)]);
        assert_eq!(a.cmp_full(&c), Ordering::Less);
    }

    #[test]
    fn residual_ignores_even_phase() {
        let a = w(4, &[(1, false, 1)]);
        let b = w(0, &[(1, false, 1)]);
        assert_eq!(a.cmp_residual(&b), Ordering::Equal);
        assert_eq!(a.cmp_full(&b), Ordering::Greater);
    }
}
