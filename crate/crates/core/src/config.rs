//! POVM outcome labels and per-site outcome configurations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantization axis selected by the local POVM at one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    X,
    Y,
    Z,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::X, Outcome::Y, Outcome::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Outcome {
        Self::ALL[i]
    }

    /// The two labels different from `self`, in fixed order.
    pub fn others(self) -> [Outcome; 2] {
        match self {
            Outcome::X => [Outcome::Y, Outcome::Z],
            Outcome::Y => [Outcome::X, Outcome::Z],
            Outcome::Z => [Outcome::X, Outcome::Y],
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Outcome::X => 'x',
            Outcome::Y => 'y',
            Outcome::Z => 'z',
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl TryFrom<char> for Outcome {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'x' | 'X' => Ok(Outcome::X),
            'y' | 'Y' => Ok(Outcome::Y),
            'z' | 'Z' => Ok(Outcome::Z),
            other => Err(Error::Fragment(format!("unknown outcome label '{other}'"))),
        }
    }
}

/// One outcome per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PovmConfig {
    outcomes: Vec<Outcome>,
}

impl PovmConfig {
    pub fn new(outcomes: Vec<Outcome>) -> Self {
        Self { outcomes }
    }

    pub fn uniform(n: usize, outcome: Outcome) -> Self {
        Self {
            outcomes: vec![outcome; n],
        }
    }

    /// Parses a label string such as `"xzzzzz"`.
    pub fn parse(labels: &str) -> Result<Self> {
        labels
            .chars()
            .map(Outcome::try_from)
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Decodes `code` as a base-3 number with site 0 as the most significant digit.
    pub fn from_code(n: usize, mut code: usize) -> Self {
        let mut outcomes = vec![Outcome::X; n];
        for slot in outcomes.iter_mut().rev() {
            *slot = Outcome::from_index(code % 3);
            code /= 3;
        }
        Self { outcomes }
    }

    pub fn code(&self) -> usize {
        self.outcomes.iter().fold(0, |acc, o| acc * 3 + o.index())
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn get(&self, site: usize) -> Outcome {
        self.outcomes[site]
    }

    pub fn set(&mut self, site: usize, outcome: Outcome) {
        self.outcomes[site] = outcome;
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// Applies a global relabelling of `{x, y, z}`.
    pub fn permuted(&self, perm: [Outcome; 3]) -> Self {
        Self {
            outcomes: self.outcomes.iter().map(|o| perm[o.index()]).collect(),
        }
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::ConfigSize {
                expected,
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for PovmConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for o in &self.outcomes {
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

/// Independent uniform labels, used to initialise a chain.
pub fn uniform_random_config<R: Rng + ?Sized>(n_sites: usize, rng: &mut R) -> PovmConfig {
    PovmConfig::new(
        (0..n_sites)
            .map(|_| Outcome::from_index(rng.random_range(0..3)))
            .collect(),
    )
}
