//! Dense state-vector simulator.
//!
//! Qubit 0 is the most significant bit of the basis-state index, so a ket
//! printed from this module reads left to right in the usual order:
//! for a 2-qubit state, index 1 is |01>.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gates::SingleQubitUnitary;

/// Hard cap on register width: a 2^24 complex vector is about 256 MB.
pub const MAX_QUBITS: usize = 24;

/// Tolerance for norms and unitarity checks.
pub const NORM_TOL: f64 = 1e-10;

/// Tolerance for algebraic identities on amplitudes.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Below this probability a measurement branch is treated as empty.
pub const POSTSELECT_EPS: f64 = 1e-12;

/// A set of (qubit, required bit) controls plus a target qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlSpec {
    pub controls: Vec<(usize, u8)>,
    pub target: usize,
}

impl ControlSpec {
    pub fn new(controls: Vec<(usize, u8)>, target: usize) -> Self {
        Self { controls, target }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let mut seen = vec![false; num_qubits];
        for &(q, b) in &self.controls {
            if q >= num_qubits {
                return Err(Error::QubitIndex { index: q, num_qubits });
            }
            if b > 1 {
                return Err(Error::Shape(format!("control bit value {b} not 0/1")));
            }
            if seen[q] {
                return Err(Error::DuplicateIndex(q));
            }
            seen[q] = true;
        }
        if self.target >= num_qubits {
            return Err(Error::QubitIndex { index: self.target, num_qubits });
        }
        if seen[self.target] {
            return Err(Error::DuplicateIndex(self.target));
        }
        Ok(())
    }
}

/// One measurement outcome together with its pre-measurement probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub qubit: usize,
    pub outcome: u8,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on `num_qubits` qubits.
    pub fn new_zero_state(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Capacity { requested: num_qubits, max: MAX_QUBITS });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// Builds a state from raw amplitudes, normalizing them.
    pub fn set_amplitudes(values: Vec<Complex64>) -> Result<Self> {
        let len = values.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::Capacity { requested: num_qubits, max: MAX_QUBITS });
        }
        let norm_sq: f64 = values.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / norm_sq.sqrt();
        let amps = values.into_iter().map(|a| a * inv).collect();
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, basis: usize) -> Complex64 {
        self.amps[basis]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Bit of `qubit` within basis index `idx` (qubit 0 = most significant).
    #[inline]
    pub fn bit(&self, idx: usize, qubit: usize) -> u8 {
        ((idx >> (self.num_qubits - 1 - qubit)) & 1) as u8
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitIndex { index: qubit, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    /// Applies a single-qubit gate.
    pub fn apply_single(&mut self, gate: &SingleQubitUnitary, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let dev = gate.unitarity_deviation();
        if dev > crate::gates::UNITARITY_TOL {
            return Err(Error::NonUnitary { deviation: dev });
        }
        let mask = self.mask(qubit);
        for idx in 0..self.amps.len() {
            if idx & mask == 0 {
                let partner = idx | mask;
                let a0 = self.amps[idx];
                let a1 = self.amps[partner];
                self.amps[idx] = gate.m[0][0] * a0 + gate.m[0][1] * a1;
                self.amps[partner] = gate.m[1][0] * a0 + gate.m[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Applies `gate` to the target qubit on basis states matching every
    /// (qubit, bit) control; all other amplitudes are untouched.
    pub fn apply_controlled(&mut self, spec: &ControlSpec, gate: &SingleQubitUnitary) -> Result<()> {
        spec.validate(self.num_qubits)?;
        let dev = gate.unitarity_deviation();
        if dev > crate::gates::UNITARITY_TOL {
            return Err(Error::NonUnitary { deviation: dev });
        }
        let tmask = self.mask(spec.target);
        let mut ctrl_mask = 0usize;
        let mut ctrl_value = 0usize;
        for &(q, b) in &spec.controls {
            let m = self.mask(q);
            ctrl_mask |= m;
            if b == 1 {
                ctrl_value |= m;
            }
        }
        // controls never include the target, so the pattern check is
        // independent of the target bit
        for idx in 0..self.amps.len() {
            if idx & tmask == 0 && idx & ctrl_mask == ctrl_value {
                let partner = idx | tmask;
                let a0 = self.amps[idx];
                let a1 = self.amps[partner];
                self.amps[idx] = gate.m[0][0] * a0 + gate.m[0][1] * a1;
                self.amps[partner] = gate.m[1][0] * a0 + gate.m[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Flips the amplitude sign on basis states where every qubit of
    /// `subregister` is 0 and all controls are satisfied.
    pub fn apply_zero_phase(&mut self, controls: &[(usize, u8)], subregister: &[usize]) -> Result<()> {
        if subregister.is_empty() {
            return Err(Error::Shape("empty subregister for zero-phase".into()));
        }
        let mut seen = vec![false; self.num_qubits];
        let mut sub_mask = 0usize;
        for &q in subregister {
            self.check_qubit(q)?;
            if seen[q] {
                return Err(Error::DuplicateIndex(q));
            }
            seen[q] = true;
            sub_mask |= self.mask(q);
        }
        let mut ctrl_mask = 0usize;
        let mut ctrl_value = 0usize;
        for &(q, b) in controls {
            self.check_qubit(q)?;
            if seen[q] {
                return Err(Error::DuplicateIndex(q));
            }
            seen[q] = true;
            let m = self.mask(q);
            ctrl_mask |= m;
            if b == 1 {
                ctrl_value |= m;
            }
        }
        for idx in 0..self.amps.len() {
            if idx & sub_mask == 0 && idx & ctrl_mask == ctrl_value {
                self.amps[idx] = -self.amps[idx];
            }
        }
        Ok(())
    }

    /// Probability that `qubit` measures 1.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Samples a measurement of one qubit and collapses the state.
    pub fn measure_qubit<R: Rng>(&mut self, qubit: usize, rng: &mut R) -> Result<MeasurementRecord> {
        let p1 = self.prob_one(qubit)?;
        let outcome: u8 = if rng.gen::<f64>() < p1 { 1 } else { 0 };
        let probability = if outcome == 1 { p1 } else { 1.0 - p1 };
        self.collapse(qubit, outcome, probability);
        Ok(MeasurementRecord { qubit, outcome, probability })
    }

    /// Projects onto `qubit` = `outcome`, returning the branch probability
    /// and leaving the renormalized projection behind.
    pub fn postselect(&mut self, qubit: usize, outcome: u8) -> Result<f64> {
        let p1 = self.prob_one(qubit)?;
        let probability = if outcome == 1 { p1 } else { 1.0 - p1 };
        if probability < POSTSELECT_EPS {
            return Err(Error::ImpossibleOutcome { qubit, outcome, probability });
        }
        self.collapse(qubit, outcome, probability);
        Ok(probability)
    }

    fn collapse(&mut self, qubit: usize, outcome: u8, probability: f64) {
        let mask = self.mask(qubit);
        let want = if outcome == 1 { mask } else { 0 };
        let inv = 1.0 / probability.sqrt();
        for (idx, a) in self.amps.iter_mut().enumerate() {
            if idx & mask == want {
                *a *= inv;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Marginal probability of each bitstring over the listed qubits, in the
    /// given qubit order. Entry `b` of the result is the probability of the
    /// bit pattern whose bit `i` (most significant first) is the value of
    /// `qubits[i]`.
    pub fn marginal_distribution(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        let mut seen = vec![false; self.num_qubits];
        for &q in qubits {
            self.check_qubit(q)?;
            if seen[q] {
                return Err(Error::DuplicateIndex(q));
            }
            seen[q] = true;
        }
        let k = qubits.len();
        let mut probs = vec![0.0_f64; 1 << k];
        for (idx, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut b = 0usize;
            for &q in qubits {
                b = (b << 1) | self.bit(idx, q) as usize;
            }
            probs[b] += p;
        }
        Ok(probs)
    }

    /// One line per populated basis state: `|bitstring> re imag`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (idx, a) in self.amps.iter().enumerate() {
            if a.norm() > 1e-12 {
                let bits: String = (0..self.num_qubits)
                    .map(|q| if self.bit(idx, q) == 1 { '1' } else { '0' })
                    .collect();
                out.push_str(&format!("|{bits}> {:+.12} {:+.12}\n", a.re, a.im));
            }
        }
        out
    }
}

/// Renders a basis index as a bitstring of the given width.
pub fn bitstring(value: usize, width: usize) -> String {
    (0..width)
        .map(|i| if (value >> (width - 1 - i)) & 1 == 1 { '1' } else { '0' })
        .collect()
}
