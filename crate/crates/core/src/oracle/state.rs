use num_complex::Complex64;

use super::operator::LocalOp;
use super::pauli::PauliString;
use crate::error::{Error, Result};

/// Dense amplitudes over `n` qubits. Qubit 0 is the most significant bit of
/// the basis index; fragment qubits are ordered site-major, slot-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            amps: vec![Complex64::new(0.0, 0.0); 1 << n],
        }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut s = Self::zero(n);
        s.amps[index] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two());
        Self {
            n: amps.len().trailing_zeros() as usize,
            amps,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, s: Complex64) -> StateVector {
        Self {
            n: self.n,
            amps: self.amps.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &StateVector) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += b;
        }
    }

    /// Applies `op` to the listed qubits; `qubits[0]` is the operator's most
    /// significant local qubit.
    pub fn apply_local(&mut self, op: &LocalOp, qubits: &[usize]) {
        assert_eq!(op.n_qubits(), qubits.len());
        let k = qubits.len();
        let d = 1 << k;
        let masks: Vec<usize> = qubits.iter().map(|&q| 1 << (self.n - 1 - q)).collect();
        let all: usize = masks.iter().sum();
        let offset = |local: usize| -> usize {
            (0..k)
                .filter(|&p| local & (1 << (k - 1 - p)) != 0)
                .map(|p| masks[p])
                .sum()
        };
        let offsets: Vec<usize> = (0..d).map(offset).collect();
        let mut buf = vec![Complex64::new(0.0, 0.0); d];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (l, &o) in offsets.iter().enumerate() {
                buf[l] = self.amps[base + o];
            }
            for (i, &o) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, b) in buf.iter().enumerate() {
                    acc += op.get(i, j) * b;
                }
                self.amps[base + o] = acc;
            }
        }
    }

    pub fn apply_pauli(&self, p: &PauliString) -> StateVector {
        assert_eq!(p.n_qubits(), self.n);
        let (x, z, ny) = p.masks();
        let global = Complex64::i().powu(u32::from(p.phase()) + ny);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let sign = if (b & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[b ^ x] = a * global * sign;
        }
        Self { n: self.n, amps: out }
    }

    /// Eigenvalue `+1` or `-1` of `p` on this state, if it is an eigenstate
    /// within `tol` relative to the norm.
    pub fn pauli_eigenvalue(&self, p: &PauliString, tol: f64) -> Result<Option<i8>> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroState);
        }
        let image = self.apply_pauli(p);
        if image.distance(self) <= tol * norm {
            return Ok(Some(1));
        }
        if image.scaled(Complex64::new(-1.0, 0.0)).distance(self) <= tol * norm {
            return Ok(Some(-1));
        }
        Ok(None)
    }
}

/// True iff `||p v - v|| <= tol ||v||`.
pub fn is_stabilized(sv: &StateVector, p: &PauliString, tol: f64) -> Result<bool> {
    Ok(sv.pauli_eigenvalue(p, tol)? == Some(1))
}
