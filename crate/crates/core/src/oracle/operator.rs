use num_complex::Complex64;

use crate::config::Outcome;

/// Dense operator on `k` qubits. Row and column indices put the first qubit
/// in the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOp {
    k: usize,
    m: Vec<Complex64>,
}

/// Single-qubit ket.
pub type Ket1 = [Complex64; 2];

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The two eigenvectors `(+1, -1)` of the Pauli matrix along `a`.
pub fn eigenbasis(a: Outcome) -> (Ket1, Ket1) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match a {
        Outcome::Z => ([c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]),
        Outcome::X => ([c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]),
        Outcome::Y => ([c(h, 0.0), c(0.0, h)], [c(h, 0.0), c(0.0, -h)]),
    }
}

impl LocalOp {
    pub fn zeros(k: usize) -> Self {
        let d = 1 << k;
        Self {
            k,
            m: vec![c(0.0, 0.0); d * d],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut op = Self::zeros(k);
        let d = op.dim();
        for i in 0..d {
            op.m[i * d + i] = c(1.0, 0.0);
        }
        op
    }

    /// Row-major matrix of size `2^k x 2^k`.
    pub fn from_rows(k: usize, m: Vec<Complex64>) -> Self {
        assert_eq!(m.len(), 1 << (2 * k));
        Self { k, m }
    }

    /// `|v><v|` for a vector of length `2^k`.
    pub fn outer(v: &[Complex64]) -> Self {
        let d = v.len();
        assert!(d.is_power_of_two());
        let mut op = Self::zeros(d.trailing_zeros() as usize);
        for i in 0..d {
            for j in 0..d {
                op.m[i * d + j] = v[i] * v[j].conj();
            }
        }
        op
    }

    pub fn n_qubits(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        1 << self.k
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[i * self.dim() + j]
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.m[i * d + j] * v[j]).sum()).collect()
    }

    pub fn matmul(&self, other: &LocalOp) -> LocalOp {
        assert_eq!(self.k, other.k);
        let d = self.dim();
        let mut out = Self::zeros(self.k);
        for i in 0..d {
            for l in 0..d {
                let a = self.m[i * d + l];
                if a == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.m[i * d + j] += a * other.m[l * d + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> LocalOp {
        let d = self.dim();
        let mut out = Self::zeros(self.k);
        for i in 0..d {
            for j in 0..d {
                out.m[j * d + i] = self.m[i * d + j].conj();
            }
        }
        out
    }

    pub fn add(&self, other: &LocalOp) -> LocalOp {
        assert_eq!(self.k, other.k);
        LocalOp {
            k: self.k,
            m: self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> LocalOp {
        LocalOp {
            k: self.k,
            m: self.m.iter().map(|a| a * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm of `self - other`, an upper bound on the operator norm.
    pub fn distance(&self, other: &LocalOp) -> f64 {
        self.m
            .iter()
            .zip(&other.m)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Traces out the qubits not listed in `keep` (local positions, ascending).
    pub fn partial_trace(&self, keep: &[usize]) -> LocalOp {
        let k = self.k;
        let traced: Vec<usize> = (0..k).filter(|q| !keep.contains(q)).collect();
        let bit = |q: usize| 1usize << (k - 1 - q);
        let embed = |kept: usize, tr: usize| {
            let mut idx = 0;
            for (pos, &q) in keep.iter().enumerate() {
                if kept & (1 << (keep.len() - 1 - pos)) != 0 {
                    idx |= bit(q);
                }
            }
            for (pos, &q) in traced.iter().enumerate() {
                if tr & (1 << (traced.len() - 1 - pos)) != 0 {
                    idx |= bit(q);
                }
            }
            idx
        };
        let mut out = Self::zeros(keep.len());
        let dk = out.dim();
        for i in 0..dk {
            for j in 0..dk {
                out.m[i * dk + j] = (0..1usize << traced.len())
                    .map(|t| self.get(embed(i, t), embed(j, t)))
                    .sum();
            }
        }
        out
    }
}

fn triple(v: &Ket1) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(8);
    for i in 0..8 {
        out.push(v[(i >> 2) & 1] * v[(i >> 1) & 1] * v[i & 1]);
    }
    out
}

/// Projector onto the symmetric (spin-3/2) subspace of three qubits.
pub fn symmetric_projector() -> LocalOp {
    let s3 = 1.0 / 3f64.sqrt();
    let basis = |i: usize| {
        let mut v = vec![c(0.0, 0.0); 8];
        v[i] = c(1.0, 0.0);
        v
    };
    let mut w = vec![c(0.0, 0.0); 8];
    for i in [1, 2, 4] {
        w[i] = c(s3, 0.0);
    }
    let mut wbar = vec![c(0.0, 0.0); 8];
    for i in [3, 5, 6] {
        wbar[i] = c(s3, 0.0);
    }
    LocalOp::outer(&basis(0))
        .add(&LocalOp::outer(&w))
        .add(&LocalOp::outer(&wbar))
        .add(&LocalOp::outer(&basis(7)))
}

/// `scale * (|aaa><aaa| + |bbb><bbb|)` for the eigenvectors `a, b` along `axis`.
pub fn povm_element_scaled(axis: Outcome, scale: f64) -> LocalOp {
    let (up, down) = eigenbasis(axis);
    LocalOp::outer(&triple(&up))
        .add(&LocalOp::outer(&triple(&down)))
        .scale(scale)
}

/// POVM element selecting the `S_a = +-3/2` subspace.
pub fn povm_element(axis: Outcome) -> LocalOp {
    povm_element_scaled(axis, (2.0f64 / 3.0).sqrt())
}

/// Projector onto three qubits aligned along `axis`, all `+1` or all `-1`.
pub fn aligned_projector(axis: Outcome, positive: bool) -> LocalOp {
    let (up, down) = eigenbasis(axis);
    LocalOp::outer(&triple(if positive { &up } else { &down }))
}

/// `sum_a F_a^dag F_a` with elements scaled by `scale`.
pub fn povm_sum(scale: f64) -> LocalOp {
    Outcome::ALL
        .iter()
        .map(|&a| {
            let f = povm_element_scaled(a, scale);
            f.adjoint().matmul(&f)
        })
        .fold(LocalOp::zeros(3), |acc, x| acc.add(&x))
}
