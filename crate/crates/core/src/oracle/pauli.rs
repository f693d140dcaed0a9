use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn axis(a: Outcome) -> Pauli {
        match a {
            Outcome::X => Pauli::X,
            Outcome::Y => Pauli::Y,
            Outcome::Z => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Single-qubit product `self * other = i^k r`.
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `i^phase` times a tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    phase: u8,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            phase: 0,
            letters: vec![Pauli::I; n],
        }
    }

    /// `sign * prod_k letter_k` on the listed qubits.
    pub fn from_terms(n: usize, sign: i8, terms: &[(usize, Pauli)]) -> Self {
        let mut p = Self::identity(n);
        if sign < 0 {
            p.phase = 2;
        }
        for &(q, l) in terms {
            p = p.mul(&Self::single(n, q, l));
        }
        p
    }

    pub fn single(n: usize, q: usize, l: Pauli) -> Self {
        let mut p = Self::identity(n);
        p.letters[q] = l;
        p
    }

    /// Parses e.g. `"-XIZ"` or `"+iYY"`.
    pub fn parse(s: &str) -> Option<Self> {
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i").or_else(|| s.strip_prefix('i')) {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s.strip_prefix('+').unwrap_or(s))
        };
        let letters = rest
            .chars()
            .map(|c| match c {
                'I' => Some(Pauli::I),
                'X' => Some(Pauli::X),
                'Y' => Some(Pauli::Y),
                'Z' => Some(Pauli::Z),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Self { phase, letters })
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, q: usize) -> Pauli {
        self.letters[q]
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != Pauli::I).count()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// `+1` or `-1` for Hermitian strings.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn negate(&self) -> Self {
        self.times_i(2)
    }

    /// Multiplies by `i^k`.
    pub fn times_i(&self, k: u8) -> Self {
        Self {
            phase: (self.phase + k) % 4,
            letters: self.letters.clone(),
        }
    }

    /// Drops a factor `i` from anti-Hermitian strings so the result is Hermitian.
    pub fn hermitian_part(&self) -> Self {
        if self.is_hermitian() {
            self.clone()
        } else {
            self.times_i(3)
        }
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n_qubits(), other.n_qubits(), "Pauli strings of different length");
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, r) = a.mul(b);
                phase += k;
                r
            })
            .collect();
        PauliString {
            phase: phase % 4,
            letters,
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Bit masks (qubit 0 is the most significant bit) of X-type and Z-type
    /// support, plus the number of Y letters.
    pub(crate) fn masks(&self) -> (usize, usize, u32) {
        let n = self.n_qubits();
        let mut x = 0;
        let mut z = 0;
        let mut ny = 0;
        for (q, l) in self.letters.iter().enumerate() {
            let (bx, bz) = l.bits();
            let bit = 1 << (n - 1 - q);
            if bx {
                x |= bit;
            }
            if bz {
                z |= bit;
            }
            if *l == Pauli::Y {
                ny += 1;
            }
        }
        (x, z, ny)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+", "+i", "-", "-i"][self.phase as usize])?;
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_qubit_table() {
        assert_eq!(Pauli::X.mul(Pauli::Y), (1, Pauli::Z));
        assert_eq!(Pauli::Y.mul(Pauli::X), (3, Pauli::Z));
        assert_eq!(Pauli::Z.mul(Pauli::Z), (0, Pauli::I));
        let xz = PauliString::parse("XZ").unwrap();
        assert_eq!(xz.mul(&xz), PauliString::identity(2));
        let x = PauliString::parse("X").unwrap();
        let z = PauliString::parse("Z").unwrap();
        let xz1 = x.mul(&z);
        assert_eq!(xz1.to_string(), "-iY");
        assert_eq!(xz1.mul(&xz1).to_string(), "-I");
    }

    #[test]
    fn parsing_and_display() {
        for s in ["+XIZ", "-YY", "+iZ", "-iXYZ"] {
            assert_eq!(PauliString::parse(s).unwrap().to_string(), s);
        }
        assert!(PauliString::parse("XQ").is_none());
        let p = PauliString::from_terms(4, -1, &[(2, Pauli::Z), (3, Pauli::Z)]);
        assert_eq!(p.to_string(), "-IIZZ");
        assert_eq!(p.weight(), 2);
    }

    fn letter() -> impl Strategy<Value = Pauli> {
        prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
    }

    fn string(n: usize) -> impl Strategy<Value = PauliString> {
        (0u8..4, proptest::collection::vec(letter(), n)).prop_map(|(phase, letters)| PauliString { phase, letters })
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(a in string(5), b in string(5), c in string(5)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn commutation_matches_products(a in string(5), b in string(5)) {
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            if a.commutes_with(&b) {
                prop_assert_eq!(ab, ba);
            } else {
                prop_assert_eq!(ab, ba.negate());
            }
        }

        #[test]
        fn hermitian_strings_square_to_identity(a in string(4)) {
            let h = a.hermitian_part();
            prop_assert_eq!(h.mul(&h), PauliString::identity(4));
        }
    }
}
