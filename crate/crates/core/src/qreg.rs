//! Real-amplitude qubit register with rotation-gate updates.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;
use std::ops::{Div, Neg};

use rand::Rng;

use crate::error::{Error, Result};

/// A single qubit `alpha|0> + beta|1>` on the real unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qubit {
    pub alpha: f64,
    pub beta: f64,
}

impl Qubit {
    pub const UNIFORM: Qubit = Qubit {
        alpha: FRAC_1_SQRT_2,
        beta: FRAC_1_SQRT_2,
    };

    pub fn new(alpha: f64, beta: f64) -> Self {
        Qubit { alpha, beta }
    }

    /// Probability of measuring `1`.
    #[inline]
    pub fn prob_one(&self) -> f64 {
        self.beta * self.beta
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.alpha * self.alpha + self.beta * self.beta
    }
}

/// Signed rotation angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct AngleDelta(pub f64);

impl AngleDelta {
    pub const ZERO: AngleDelta = AngleDelta(0.0);

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl Neg for AngleDelta {
    type Output = AngleDelta;

    fn neg(self) -> AngleDelta {
        AngleDelta(-self.0)
    }
}

/// Pair scaling: the rotation for the `i`-th ranked pair is `delta / (i + 1)`.
impl Div<u32> for AngleDelta {
    type Output = AngleDelta;

    fn div(self, rhs: u32) -> AngleDelta {
        AngleDelta(self.0 / f64::from(rhs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrant {
    /// `alpha * beta >= 0`, including the axes.
    FirstThird,
    SecondFourth,
}

/// Applies the 2x2 rotation matrix
/// `[[cos d, -sin d], [sin d, cos d]]` to `(alpha, beta)`.
#[inline]
pub fn rotate(q: Qubit, delta: AngleDelta) -> Qubit {
    let (s, c) = delta.0.sin_cos();
    Qubit {
        alpha: c * q.alpha - s * q.beta,
        beta: s * q.alpha + c * q.beta,
    }
}

#[inline]
pub fn quadrant(q: Qubit) -> Quadrant {
    if q.alpha * q.beta >= 0.0 {
        Quadrant::FirstThird
    } else {
        Quadrant::SecondFourth
    }
}

/// Rotation lookup for one qubit given the bits of the better and the worse
/// solution of a pair.
///
/// | best | worst | first/third | second/fourth |
/// |------|-------|-------------|---------------|
/// | 0    | 0     | 0           | 0             |
/// | 0    | 1     | -theta      | +theta        |
/// | 1    | 0     | +theta      | -theta        |
/// | 1    | 1     | 0           | 0             |
///
/// Equal bits mean the qubit is tabooed for this pair.
#[inline]
pub fn lookup_delta(best_bit: bool, worst_bit: bool, quad: Quadrant, theta: f64) -> AngleDelta {
    match (best_bit, worst_bit, quad) {
        (b, w, _) if b == w => AngleDelta::ZERO,
        (true, false, Quadrant::FirstThird) | (false, true, Quadrant::SecondFourth) => {
            AngleDelta(theta)
        }
        _ => AngleDelta(-theta),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitRegister {
    qubits: Vec<Qubit>,
}

impl QubitRegister {
    /// `k` qubits in the uniform superposition.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("register needs at least one qubit"));
        }
        Ok(QubitRegister {
            qubits: vec![Qubit::UNIFORM; k],
        })
    }

    pub fn from_qubits(qubits: Vec<Qubit>) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::invalid("register needs at least one qubit"));
        }
        Ok(QubitRegister { qubits })
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn qubits(&self) -> &[Qubit] {
        &self.qubits
    }

    pub fn qubits_mut(&mut self) -> &mut [Qubit] {
        &mut self.qubits
    }

    /// Observes every qubit once. Draws exactly `len()` uniforms, in index
    /// order; bit `j` is set when the draw falls below `beta_j^2`.
    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        self.qubits
            .iter()
            .map(|q| rng.gen::<f64>() < q.prob_one())
            .collect()
    }

    /// Dumps the register as CSV rows `qubit_index,alpha,beta`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "qubit_index,alpha,beta")?;
        for (j, q) in self.qubits.iter().enumerate() {
            writeln!(out, "{j},{},{}", q.alpha, q.beta)?;
        }
        Ok(())
    }
}

/// Convenience wrapper matching the free-function naming of the other
/// operations.
pub fn init_register(k: usize) -> Result<QubitRegister> {
    QubitRegister::uniform(k)
}
