//! 2x2 unitaries and the named gates the protocol uses.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deviation from U†U = I above which a matrix is rejected as a gate.
pub const UNITARITY_TOL: f64 = 1e-8;

/// A single-qubit gate as an explicit 2x2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitUnitary {
    pub m: [[Complex64; 2]; 2],
}

impl SingleQubitUnitary {
    /// Validates unitarity before accepting the matrix.
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let u = Self { m };
        let dev = u.unitarity_deviation();
        if dev > UNITARITY_TOL {
            return Err(Error::NonUnitary { deviation: dev });
        }
        Ok(u)
    }

    /// Max-entry deviation of U†U from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dagger();
        let p = d.mul(self);
        let mut dev: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let expect = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                dev = dev.max((p.m[r][c] - expect).norm());
            }
        }
        dev
    }

    pub fn dagger(&self) -> Self {
        Self {
            m: [
                [self.m[0][0].conj(), self.m[1][0].conj()],
                [self.m[0][1].conj(), self.m[1][1].conj()],
            ],
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                for k in 0..2 {
                    out[r][c] += self.m[r][k] * rhs.m[k][c];
                }
            }
        }
        Self { m: out }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.m;
        for row in &mut out {
            for e in row {
                *e *= s;
            }
        }
        Self { m: out }
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Max-entry distance to another matrix.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        d
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance(other) <= tol
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity() -> SingleQubitUnitary {
    SingleQubitUnitary {
        m: [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
    }
}

pub fn pauli_x() -> SingleQubitUnitary {
    SingleQubitUnitary {
        m: [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
    }
}

pub fn pauli_z() -> SingleQubitUnitary {
    SingleQubitUnitary {
        m: [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
    }
}

pub fn hadamard() -> SingleQubitUnitary {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    SingleQubitUnitary {
        m: [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
    }
}

/// diag(1, e^{i theta})
pub fn phase(theta: f64) -> SingleQubitUnitary {
    SingleQubitUnitary {
        m: [
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), Complex64::from_polar(1.0, theta)],
        ],
    }
}

/// diag(1, s) for a unit-modulus scalar s.
pub fn phase_scalar(s: Complex64) -> SingleQubitUnitary {
    SingleQubitUnitary {
        m: [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), s]],
    }
}

pub fn rz(theta: f64) -> SingleQubitUnitary {
    SingleQubitUnitary {
        m: [
            [Complex64::from_polar(1.0, -theta / 2.0), c(0.0, 0.0)],
            [c(0.0, 0.0), Complex64::from_polar(1.0, theta / 2.0)],
        ],
    }
}

pub fn ry(theta: f64) -> SingleQubitUnitary {
    let (s, co) = (theta / 2.0).sin_cos();
    SingleQubitUnitary {
        m: [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_gates_are_unitary() {
        for g in [identity(), pauli_x(), pauli_z(), hadamard(), rz(0.7), ry(1.3), phase(2.1)] {
            assert!(g.unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let bad = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]];
        assert!(matches!(SingleQubitUnitary::new(bad), Err(Error::NonUnitary { .. })));
    }

    #[test]
    fn hadamard_self_inverse() {
        let h = hadamard();
        assert!(h.mul(&h).approx_eq(&identity(), 1e-12));
    }
}
