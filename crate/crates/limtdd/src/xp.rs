//! XP operators `ω^p ⊗ X^{x[i]} P^{z[i]}` and LIM weights (complex scalar times an XP operator).
//!
//! Position 0 of a component vector is the most significant tensor factor.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::dense::Matrix;

/// Absolute tolerance for every real comparison.
pub const EPS: f64 = 1e-10;
/// Largest supported precision.
pub const MAX_PRECISION: u32 = 1 << 20;
/// Largest rank converted to dense matrices.
pub const DENSE_RANK_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum XpError {
    #[error("precision mismatch ({0} vs {1})")]
    PrecisionMismatch(u32, u32),
    #[error("rank mismatch ({0} vs {1})")]
    RankMismatch(usize, usize),
    #[error("invalid precision {0}")]
    InvalidPrecision(u32),
    #[error("precision 0 admits only the identity operator")]
    ScalarOnly,
    #[error("inverse of a zero weight")]
    ZeroWeight,
    #[error("rank {0} exceeds the dense cap of {DENSE_RANK_CAP}")]
    RankCap(usize),
    #[error("index position {0} out of range")]
    Position(usize),
}

/// Modulus of the phase component: 2N, or 1 when N = 0.
#[inline]
pub(crate) fn phase_mod(n: u32) -> u64 {
    if n == 0 {
        1
    } else {
        2 * n as u64
    }
}

#[inline]
pub(crate) fn z_mod(n: u32) -> u64 {
    (n as u64).max(1)
}

/// `ω^k` with `ω = e^{πi/N}`.
pub fn omega_pow(n: u32, k: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let m = 2 * n as i64;
    let k = k.rem_euclid(m);
    // exact values on the axes keep dense comparisons tight
    if 4 * k % m == 0 {
        return match 4 * k / m {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, PI * k as f64 / n as f64)
}

/// Splits an angle (in turns) into a residual in `[0, 1/(2N))` turns and a
/// multiple of `1/(2N)`; near-multiples are snapped.
pub(crate) fn canon_angle(turns: f64, n: u32) -> (f64, u64) {
    let m = phase_mod(n);
    let mf = m as f64;
    let t = (turns * mf).rem_euclid(mf);
    let mut k = t.floor();
    let mut frac = t - k;
    let tol = EPS * mf;
    if frac > 1.0 - tol {
        k += 1.0;
        frac = 0.0;
    } else if frac < tol {
        frac = 0.0;
    }
    ((frac / mf), (k as u64) % m)
}

/// `XP_N(p|x|z)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct XPOperator {
    n: u32,
    p: u32,
    x: Vec<u8>,
    z: Vec<u32>,
}

impl XPOperator {
    /// Builds an operator, reducing every component modulo its modulus.
    pub fn new(n: u32, p: i64, x: &[u8], z: &[i64]) -> Result<Self, XpError> {
        if n > MAX_PRECISION {
            return Err(XpError::InvalidPrecision(n));
        }
        if x.len() != z.len() {
            return Err(XpError::RankMismatch(x.len(), z.len()));
        }
        let pm = phase_mod(n) as i64;
        let zm = z_mod(n) as i64;
        let x: Vec<u8> = x.iter().map(|b| b & 1).collect();
        if n == 0 && x.iter().any(|&b| b != 0) {
            return Err(XpError::ScalarOnly);
        }
        Ok(XPOperator {
            n,
            p: p.rem_euclid(pm) as u32,
            x,
            z: z.iter().map(|v| v.rem_euclid(zm) as u32).collect(),
        })
    }

    pub fn identity(n: u32, rank: usize) -> Self {
        XPOperator { n, p: 0, x: vec![0; rank], z: vec![0; rank] }
    }

    /// `D_N(z) = XP_N(Σ z[i] | 0 | −z)`.
    pub fn antisym(n: u32, z: &[i64]) -> Self {
        let sum: i64 = z.iter().sum();
        let neg: Vec<i64> = z.iter().map(|v| -v).collect();
        XPOperator::new(n, sum, &vec![0; z.len()], &neg).expect("antisym components")
    }

    pub fn precision(&self) -> u32 {
        self.n
    }

    pub fn phase(&self) -> u32 {
        self.p
    }

    pub fn x(&self) -> &[u8] {
        &self.x
    }

    pub fn z(&self) -> &[u32] {
        &self.z
    }

    pub fn rank(&self) -> usize {
        self.x.len()
    }

    pub fn is_identity(&self) -> bool {
        self.p == 0 && self.x.iter().all(|&b| b == 0) && self.z.iter().all(|&v| v == 0)
    }

    fn check(&self, o: &Self) -> Result<(), XpError> {
        if self.n != o.n {
            return Err(XpError::PrecisionMismatch(self.n, o.n));
        }
        if self.rank() != o.rank() {
            return Err(XpError::RankMismatch(self.rank(), o.rank()));
        }
        Ok(())
    }

    /// Product `self · o`.
    pub fn mul(&self, o: &Self) -> Result<Self, XpError> {
        self.check(o)?;
        let pm = phase_mod(self.n);
        let zm = z_mod(self.n);
        let mut phase = self.p as u64 + o.p as u64;
        let mut x = Vec::with_capacity(self.rank());
        let mut z = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            let (z1, z2) = (self.z[i] as u64, o.z[i] as u64);
            if o.x[i] == 1 {
                // P^{z1} X = ω^{2 z1} X P^{-z1}
                phase += 2 * z1;
                z.push(((z2 + zm - z1 % zm) % zm) as u32);
            } else {
                z.push(((z1 + z2) % zm) as u32);
            }
            x.push(self.x[i] ^ o.x[i]);
        }
        Ok(XPOperator { n: self.n, p: (phase % pm) as u32, x, z })
    }

    pub fn inverse(&self) -> Self {
        let pm = phase_mod(self.n);
        let zm = z_mod(self.n);
        let mut phase = pm - self.p as u64 % pm;
        let mut z = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            let zi = self.z[i] as u64;
            if self.x[i] == 1 {
                // (X P^z)^{-1} = P^{-z} X = ω^{-2z} X P^{z}
                phase += pm - (2 * zi) % pm;
                z.push(zi as u32);
            } else {
                z.push(((zm - zi) % zm) as u32);
            }
        }
        XPOperator { n: self.n, p: (phase % pm) as u32, x: self.x.clone(), z }
    }

    /// Matrix transpose, renormalized to XP form: `(X P^z)^T = P^z X = ω^{2z} X P^{-z}`.
    pub fn transpose(&self) -> Self {
        let pm = phase_mod(self.n);
        let zm = z_mod(self.n);
        let mut phase = self.p as u64;
        let mut z = self.z.clone();
        for i in 0..self.rank() {
            if self.x[i] == 1 {
                phase += 2 * self.z[i] as u64;
                z[i] = ((zm - self.z[i] as u64 % zm) % zm) as u32;
            }
        }
        XPOperator { n: self.n, p: (phase % pm) as u32, x: self.x.clone(), z }
    }

    /// Lexicographic order on `(x | z | p)`.
    pub fn cmp_components(&self, o: &Self) -> Ordering {
        self.x.cmp(&o.x).then_with(|| self.z.cmp(&o.z)).then_with(|| self.p.cmp(&o.p))
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn to_dense(&self) -> Result<Matrix, XpError> {
        let r = self.rank();
        if r > DENSE_RANK_CAP {
            return Err(XpError::RankCap(r));
        }
        let dim = 1usize << r;
        let mut m = Matrix::zeros(dim);
        let xmask = bits_to_index(&self.x);
        for col in 0..dim {
            let row = col ^ xmask;
            // P^z acts first on the column basis state, then X permutes
            let mut k = self.p as i64;
            for i in 0..r {
                if (col >> (r - 1 - i)) & 1 == 1 {
                    k += 2 * self.z[i] as i64;
                }
            }
            m.set(row, col, omega_pow(self.n, k));
        }
        Ok(m)
    }

}

fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

impl fmt::Display for XPOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x: String = self.x.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
        let z: Vec<String> = self.z.iter().map(|v| v.to_string()).collect();
        write!(f, "XP_{}({}|{}|{})", self.n, self.p, x, z.join(","))
    }
}

/// A local invertible map `r·e^{2πiθ}·op` in canonical polar form.
#[derive(Clone, Debug)]
pub struct LimWeight {
    r: f64,
    theta: f64,
    op: XPOperator,
}

impl LimWeight {
    /// Canonical weight for `c · op`.
    pub fn new(c: Complex64, op: XPOperator) -> Self {
        let r = c.norm();
        let turns = if r < EPS { 0.0 } else { c.arg() / (2.0 * PI) };
        Self::from_polar(r, turns, op)
    }

    /// Canonical weight for `r·e^{2πi·turns}·op`.
    pub fn from_polar(r: f64, turns: f64, mut op: XPOperator) -> Self {
        let n = op.n;
        if r < EPS {
            return LimWeight::zero(n, op.rank());
        }
        let (theta, k) = canon_angle(turns, n);
        let pm = phase_mod(n);
        op.p = ((op.p as u64 + k) % pm) as u32;
        LimWeight { r, theta, op }
    }

    pub fn zero(n: u32, rank: usize) -> Self {
        LimWeight { r: 0.0, theta: 0.0, op: XPOperator::identity(n, rank) }
    }

    pub fn one(n: u32, rank: usize) -> Self {
        LimWeight { r: 1.0, theta: 0.0, op: XPOperator::identity(n, rank) }
    }

    pub fn from_op(op: XPOperator) -> Self {
        LimWeight { r: 1.0, theta: 0.0, op }
    }

    pub fn magnitude(&self) -> f64 {
        self.r
    }

    /// Residual angle in turns, in `[0, 1/(2N))`.
    pub fn angle(&self) -> f64 {
        self.theta
    }

    pub fn op(&self) -> &XPOperator {
        &self.op
    }

    pub fn precision(&self) -> u32 {
        self.op.n
    }

    pub fn rank(&self) -> usize {
        self.op.rank()
    }

    pub fn is_zero(&self) -> bool {
        self.r < EPS
    }

    pub fn is_one(&self) -> bool {
        (self.r - 1.0).abs() < EPS && self.theta.abs() < EPS && self.op.is_identity()
    }

    /// The complex coefficient `r·e^{2πiθ}·ω^p`.
    pub fn coefficient(&self) -> Complex64 {
        Complex64::from_polar(self.r, 2.0 * PI * self.theta) * omega_pow(self.op.n, self.op.p as i64)
    }

    /// Combined scalar angle `θ + p/(2N)` in turns.
    pub fn combined_angle(&self) -> f64 {
        self.theta + self.op.p as f64 / phase_mod(self.op.n) as f64
    }

    pub fn mul(&self, o: &Self) -> Result<Self, XpError> {
        let op = self.op.mul(&o.op)?;
        if self.is_zero() || o.is_zero() {
            return Ok(LimWeight::zero(op.n, op.rank()));
        }
        Ok(Self::from_polar(self.r * o.r, self.theta + o.theta, op))
    }

    /// Full multiplicative inverse (scalar and operator).
    pub fn inverse(&self) -> Result<Self, XpError> {
        if self.is_zero() {
            return Err(XpError::ZeroWeight);
        }
        Ok(Self::from_polar(1.0 / self.r, -self.theta, self.op.inverse()))
    }

    /// `w = ω^{2k} · residual` with the residual's combined angle in `[0, 1/N)`.
    pub fn phase_extract(&self) -> Result<(u32, LimWeight), XpError> {
        if self.is_zero() {
            return Err(XpError::ZeroWeight);
        }
        if self.op.n == 0 {
            return Ok((0, self.clone()));
        }
        let mut res = self.clone();
        res.op.p = self.op.p % 2;
        Ok((self.op.p / 2, res))
    }

    /// Splits into the factors at `part` (carrying the whole scalar) and the rest.
    pub fn split(&self, part: &[usize]) -> Result<(LimWeight, LimWeight), XpError> {
        let r = self.rank();
        let mut on = LimWeight { r: self.r, theta: self.theta, op: XPOperator::identity(self.op.n, r) };
        on.op.p = self.op.p;
        let mut off = LimWeight::one(self.op.n, r);
        for i in 0..r {
            if part.contains(&i) {
                on.op.x[i] = self.op.x[i];
                on.op.z[i] = self.op.z[i];
            } else {
                off.op.x[i] = self.op.x[i];
                off.op.z[i] = self.op.z[i];
            }
        }
        if let Some(&bad) = part.iter().find(|&&i| i >= r) {
            return Err(XpError::Position(bad));
        }
        if self.is_zero() {
            on = LimWeight::zero(self.op.n, r);
        }
        Ok((on, off))
    }

    pub fn to_dense(&self) -> Result<Matrix, XpError> {
        let mut m = self.op.to_dense()?;
        m.scale(Complex64::from_polar(self.r, 2.0 * PI * self.theta));
        Ok(m)
    }
}

/// Lexicographic order on `(x | z | r | θ | p)`; reals tie within `EPS`.
pub fn lim_compare(a: &LimWeight, b: &LimWeight) -> Ordering {
    a.op
        .x
        .cmp(&b.op.x)
        .then_with(|| a.op.z.cmp(&b.op.z))
        .then_with(|| cmp_real(a.r, b.r))
        .then_with(|| cmp_real(a.theta, b.theta))
        .then_with(|| a.op.p.cmp(&b.op.p))
}

#[inline]
pub(crate) fn cmp_real(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= EPS {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl PartialEq for LimWeight {
    fn eq(&self, o: &Self) -> bool {
        self.op.n == o.op.n && self.rank() == o.rank() && lim_compare(self, o) == Ordering::Equal
    }
}

impl fmt::Display for LimWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}∠{} · {}", fmt_real(self.r), fmt_real(self.theta), self.op)
    }
}

pub(crate) fn fmt_real(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn xp_identity(n: u32, rank: usize) -> XPOperator {
    XPOperator::identity(n, rank)
}

pub fn xp_mul(a: &XPOperator, b: &XPOperator) -> Result<XPOperator, XpError> {
    a.mul(b)
}

pub fn xp_inverse(a: &XPOperator) -> XPOperator {
    a.inverse()
}

pub fn xp_antisym(n: u32, z: &[i64]) -> XPOperator {
    XPOperator::antisym(n, z)
}
