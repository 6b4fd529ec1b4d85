//! Dense tensors over named binary indices, used as ground truth.
//!
//! Vectorization order: the first index is the most significant bit.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::xp::{LimWeight, DENSE_RANK_CAP};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DenseError {
    #[error("rank {0} exceeds the dense cap of {DENSE_RANK_CAP}")]
    RankCap(usize),
    #[error("data length {got} does not match rank {rank}")]
    Length { got: usize, rank: usize },
    #[error("duplicate index `{0}`")]
    Duplicate(String),
    #[error("index `{0}` is not shared by both operands")]
    NotShared(String),
    #[error("index `{0}` is open in both operands; list it in var")]
    OpenShared(String),
    #[error("weight rank {0} does not match tensor rank {1}")]
    RankMismatch(usize, usize),
    #[error("malformed tensor JSON: {0}")]
    Json(String),
}

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "matrix must be square");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.dim, o.dim);
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * o.get(k, j);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, o: &Matrix) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, o: &Matrix, tol: f64) -> bool {
        self.dim == o.dim && self.max_abs_diff(o) <= tol
    }
}

/// A rank-n tensor with `2^n` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    indices: Vec<String>,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    indices: Vec<String>,
    data: Vec<[f64; 2]>,
}

impl DenseTensor {
    pub fn new(indices: Vec<String>, data: Vec<Complex64>) -> Result<Self, DenseError> {
        if indices.len() > DENSE_RANK_CAP {
            return Err(DenseError::RankCap(indices.len()));
        }
        if data.len() != 1 << indices.len() {
            return Err(DenseError::Length { got: data.len(), rank: indices.len() });
        }
        for (i, name) in indices.iter().enumerate() {
            if indices[..i].contains(name) {
                return Err(DenseError::Duplicate(name.clone()));
            }
        }
        Ok(DenseTensor { indices, data })
    }

    pub fn scalar(c: Complex64) -> Self {
        DenseTensor { indices: vec![], data: vec![c] }
    }

    /// Builds a tensor from a closure over assignments (bit i = value of index i).
    pub fn from_fn<F: FnMut(&[u8]) -> Complex64>(indices: Vec<String>, mut f: F) -> Result<Self, DenseError> {
        let r = indices.len();
        if r > DENSE_RANK_CAP {
            return Err(DenseError::RankCap(r));
        }
        let mut bits = vec![0u8; r];
        let data = (0..1usize << r)
            .map(|k| {
                for (i, b) in bits.iter_mut().enumerate() {
                    *b = ((k >> (r - 1 - i)) & 1) as u8;
                }
                f(&bits)
            })
            .collect();
        DenseTensor::new(indices, data)
    }

    pub fn indices(&self) -> &[String] {
        &self.indices
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rank(&self) -> usize {
        self.indices.len()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.indices.iter().position(|n| n == name)
    }

    fn offset(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    /// Value at an assignment given in this tensor's index order.
    pub fn get(&self, bits: &[u8]) -> Complex64 {
        self.data[self.offset(bits)]
    }

    /// Value at an assignment given by name; missing names are an error.
    pub fn get_named(&self, assignment: &[(&str, u8)]) -> Option<Complex64> {
        let mut bits = vec![0u8; self.rank()];
        for (i, name) in self.indices.iter().enumerate() {
            bits[i] = assignment.iter().find(|(n, _)| n == name)?.1;
        }
        Some(self.get(&bits))
    }

    /// Reorders the indices; `order` must be a permutation of the current names.
    pub fn permuted(&self, order: &[String]) -> Result<Self, DenseError> {
        let pos: Vec<usize> = order
            .iter()
            .map(|n| self.position(n).ok_or_else(|| DenseError::NotShared(n.clone())))
            .collect::<Result<_, _>>()?;
        if pos.len() != self.rank() {
            return Err(DenseError::Length { got: pos.len(), rank: self.rank() });
        }
        let r = self.rank();
        let mut src = vec![0u8; r];
        DenseTensor::from_fn(order.to_vec(), |bits| {
            for (k, &p) in pos.iter().enumerate() {
                src[p] = bits[k];
            }
            self.get(&src)
        })
    }

    /// Fixes `x = c`; absent indices leave the tensor unchanged.
    pub fn slice(&self, x: &str, c: u8) -> Self {
        let Some(p) = self.position(x) else { return self.clone() };
        let r = self.rank();
        let mut idx = self.indices.clone();
        idx.remove(p);
        let mut src = vec![0u8; r];
        DenseTensor::from_fn(idx, |bits| {
            src[..p].copy_from_slice(&bits[..p]);
            src[p] = c;
            src[p + 1..].copy_from_slice(&bits[p..]);
            self.get(&src)
        })
        .expect("slice shrinks rank")
    }

    /// Sums over `var`; result indices are this tensor's open indices followed by `o`'s.
    pub fn contract(&self, o: &DenseTensor, var: &[String]) -> Result<Self, DenseError> {
        for v in var {
            if self.position(v).is_none() || o.position(v).is_none() {
                return Err(DenseError::NotShared(v.clone()));
            }
        }
        for n in &self.indices {
            if !var.contains(n) && o.position(n).is_some() {
                return Err(DenseError::OpenShared(n.clone()));
            }
        }
        let open_a: Vec<String> = self.indices.iter().filter(|n| !var.contains(n)).cloned().collect();
        let open_b: Vec<String> = o.indices.iter().filter(|n| !var.contains(n)).cloned().collect();
        let mut out_idx = open_a.clone();
        out_idx.extend(open_b.iter().cloned());
        if out_idx.len() > DENSE_RANK_CAP {
            return Err(DenseError::RankCap(out_idx.len()));
        }
        let pa: Vec<usize> = open_a.iter().map(|n| self.position(n).unwrap()).collect();
        let pb: Vec<usize> = open_b.iter().map(|n| o.position(n).unwrap()).collect();
        let va: Vec<usize> = var.iter().map(|n| self.position(n).unwrap()).collect();
        let vb: Vec<usize> = var.iter().map(|n| o.position(n).unwrap()).collect();
        let mut ba = vec![0u8; self.rank()];
        let mut bb = vec![0u8; o.rank()];
        DenseTensor::from_fn(out_idx, |bits| {
            for (k, &p) in pa.iter().enumerate() {
                ba[p] = bits[k];
            }
            for (k, &p) in pb.iter().enumerate() {
                bb[p] = bits[pa.len() + k];
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..1usize << var.len() {
                for j in 0..var.len() {
                    let b = ((s >> j) & 1) as u8;
                    ba[va[j]] = b;
                    bb[vb[j]] = b;
                }
                acc += self.get(&ba) * o.get(&bb);
            }
            acc
        })
    }

    /// Applies a weight whose rank equals this tensor's rank.
    pub fn apply_lim(&self, w: &LimWeight) -> Result<Self, DenseError> {
        if w.rank() != self.rank() {
            return Err(DenseError::RankMismatch(w.rank(), self.rank()));
        }
        let m = w.to_dense().map_err(|_| DenseError::RankCap(w.rank()))?;
        Ok(DenseTensor { indices: self.indices.clone(), data: m.apply(&self.data) })
    }

    /// Elementwise sum over the index union; absent indices broadcast.
    pub fn add(&self, o: &DenseTensor) -> Result<Self, DenseError> {
        let mut idx = self.indices.clone();
        for n in &o.indices {
            if !idx.contains(n) {
                idx.push(n.clone());
            }
        }
        let pa: Vec<usize> = self.indices.iter().map(|n| idx.iter().position(|m| m == n).unwrap()).collect();
        let pb: Vec<usize> = o.indices.iter().map(|n| idx.iter().position(|m| m == n).unwrap()).collect();
        let mut ba = vec![0u8; self.rank()];
        let mut bb = vec![0u8; o.rank()];
        DenseTensor::from_fn(idx, |bits| {
            for (k, &p) in pa.iter().enumerate() {
                ba[k] = bits[p];
            }
            for (k, &p) in pb.iter().enumerate() {
                bb[k] = bits[p];
            }
            self.get(&ba) + o.get(&bb)
        })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        DenseTensor { indices: self.indices.clone(), data: self.data.iter().map(|v| v * c).collect() }
    }

    /// Seeded tensor with real and imaginary parts uniform in `[0, 1)`.
    pub fn random(indices: Vec<String>, seed: u64) -> Result<Self, DenseError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1usize << indices.len().min(DENSE_RANK_CAP + 1);
        let data = (0..n).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
        DenseTensor::new(indices, data)
    }

    /// Max-abs difference after aligning `o` to this index order.
    pub fn max_abs_diff(&self, o: &DenseTensor) -> Option<f64> {
        let o = if o.indices == self.indices { o.clone() } else { o.permuted(&self.indices).ok()? };
        Some(self.data.iter().zip(&o.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn equal(&self, o: &DenseTensor, tol: f64) -> bool {
        self.max_abs_diff(o).is_some_and(|d| d <= tol)
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> String {
        let j = TensorJson {
            indices: self.indices.clone(),
            data: self.data.iter().map(|c| [c.re, c.im]).collect(),
        };
        serde_json::to_string(&j).expect("tensor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DenseError> {
        let j: TensorJson = serde_json::from_str(text).map_err(|e| DenseError::Json(e.to_string()))?;
        DenseTensor::new(j.indices, j.data.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

pub fn dense_slice(t: &DenseTensor, x: &str, c: u8) -> DenseTensor {
    t.slice(x, c)
}

pub fn dense_contract(a: &DenseTensor, b: &DenseTensor, var: &[String]) -> Result<DenseTensor, DenseError> {
    a.contract(b, var)
}

pub fn dense_apply_lim(w: &LimWeight, t: &DenseTensor) -> Result<DenseTensor, DenseError> {
    t.apply_lim(w)
}

pub fn dense_add(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor, DenseError> {
    a.add(b)
}

pub fn random_tensor(indices: Vec<String>, seed: u64) -> Result<DenseTensor, DenseError> {
    DenseTensor::random(indices, seed)
}

pub fn dense_equal(a: &DenseTensor, b: &DenseTensor, tol: f64) -> bool {
    a.equal(b, tol)
}
