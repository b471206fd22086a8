//! Decomposition of multi-controlled phase flips into one- and two-control
//! primitives, plus gate accounting for the linear-scaling checks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{self, SingleQubitUnitary};
use crate::state::{ControlSpec, StateVector};

/// One circuit operation: a single-qubit gate with zero or more controls.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub gate: SingleQubitUnitary,
    pub controls: Vec<(usize, u8)>,
    pub target: usize,
    pub label: String,
}

impl GateOp {
    pub fn single(gate: SingleQubitUnitary, target: usize, label: impl Into<String>) -> Self {
        Self { gate, controls: Vec::new(), target, label: label.into() }
    }

    pub fn controlled(
        gate: SingleQubitUnitary,
        controls: Vec<(usize, u8)>,
        target: usize,
        label: impl Into<String>,
    ) -> Self {
        Self { gate, controls, target, label: label.into() }
    }

    /// Total qubits touched (controls + target).
    pub fn arity(&self) -> usize {
        self.controls.len() + 1
    }

    fn is_gate(&self, g: &SingleQubitUnitary, num_controls: usize) -> bool {
        self.controls.len() == num_controls && self.gate.approx_eq(g, 1e-12)
    }
}

/// Gate tallies grouped by arity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub three_qubit: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.one_qubit + self.two_qubit + self.three_qubit
    }
}

/// An ordered list of gate operations over a fixed-width register.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    pub ops: Vec<GateOp>,
    pub num_qubits: usize,
}

impl GateSequence {
    pub fn new(num_qubits: usize) -> Self {
        Self { ops: Vec::new(), num_qubits }
    }

    pub fn push(&mut self, op: GateOp) {
        debug_assert!(op.target < self.num_qubits);
        self.ops.push(op);
    }

    pub fn extend(&mut self, other: GateSequence) {
        debug_assert!(other.num_qubits <= self.num_qubits);
        self.ops.extend(other.ops);
    }

    /// Exact tallies by arity: 1-qubit, 2-qubit, 3-qubit-and-up logical gates.
    pub fn gate_count_report(&self) -> GateCounts {
        let mut counts = GateCounts::default();
        for op in &self.ops {
            match op.arity() {
                1 => counts.one_qubit += 1,
                2 => counts.two_qubit += 1,
                _ => counts.three_qubit += 1,
            }
        }
        counts
    }

    /// Evolves a state through every op in order.
    pub fn apply_to(&self, state: &mut StateVector) -> Result<()> {
        for op in &self.ops {
            if op.controls.is_empty() {
                state.apply_single(&op.gate, op.target)?;
            } else {
                state.apply_controlled(
                    &ControlSpec::new(op.controls.clone(), op.target),
                    &op.gate,
                )?;
            }
        }
        Ok(())
    }

    /// Composes the sequence into a dense matrix. Only sensible for small
    /// registers; callers above 8 qubits should compare by state evolution.
    pub fn compose_matrix(&self) -> Result<Vec<Vec<Complex64>>> {
        let dim = 1usize << self.num_qubits;
        let mut cols = Vec::with_capacity(dim);
        for b in 0..dim {
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            amps[b] = Complex64::new(1.0, 0.0);
            let mut state = StateVector::set_amplitudes(amps)?;
            self.apply_to(&mut state)?;
            cols.push(state.amplitudes().to_vec());
        }
        // transpose columns into rows
        let mut mat = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                mat[r][c] = *v;
            }
        }
        Ok(mat)
    }

    /// Rewrites the doubly-controlled X at `position` into H . CCZ . H on the
    /// target, then cancels any Hadamard pair the rewrite makes adjacent.
    pub fn ccx_to_ccz(&mut self, position: usize) -> Result<()> {
        self.rewrite(position, &gates::pauli_x(), &gates::pauli_z(), "CCZ")
    }

    /// Inverse rewrite: CCZ at `position` becomes H . CCX . H.
    pub fn ccz_to_ccx(&mut self, position: usize) -> Result<()> {
        self.rewrite(position, &gates::pauli_z(), &gates::pauli_x(), "CCX")
    }

    fn rewrite(
        &mut self,
        position: usize,
        from: &SingleQubitUnitary,
        to: &SingleQubitUnitary,
        to_label: &str,
    ) -> Result<()> {
        let op = self.ops.get(position).ok_or_else(|| Error::Rewrite {
            position,
            expected: "position within sequence".into(),
        })?;
        if !op.is_gate(from, 2) {
            return Err(Error::Rewrite {
                position,
                expected: format!("doubly-controlled gate convertible to {to_label}"),
            });
        }
        let target = op.target;
        let controls = op.controls.clone();
        let replacement = vec![
            GateOp::single(gates::hadamard(), target, "H"),
            GateOp::controlled(*to, controls, target, to_label),
            GateOp::single(gates::hadamard(), target, "H"),
        ];
        self.ops.splice(position..=position, replacement);
        self.cancel_adjacent_hadamards(position);
        Ok(())
    }

    /// Drops directly adjacent H-H pairs on the same target near `around`,
    /// so a rewrite followed by its inverse restores the original sequence.
    fn cancel_adjacent_hadamards(&mut self, around: usize) {
        let h = gates::hadamard();
        let mut i = around.saturating_sub(1);
        while i + 1 < self.ops.len() {
            let a = &self.ops[i];
            let b = &self.ops[i + 1];
            if a.is_gate(&h, 0) && b.is_gate(&h, 0) && a.target == b.target {
                self.ops.drain(i..=i + 1);
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
            if i > around + 3 {
                break;
            }
        }
    }

    /// Text dump, one op per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for op in &self.ops {
            let controls = op
                .controls
                .iter()
                .map(|(q, b)| format!("({q},{b})"))
                .collect::<Vec<_>>()
                .join(",");
            let m = &op.gate.m;
            out.push_str(&format!(
                "{} target={} controls={} matrix={:+.6}{:+.6}i {:+.6}{:+.6}i {:+.6}{:+.6}i {:+.6}{:+.6}i\n",
                op.label, op.target, controls,
                m[0][0].re, m[0][0].im, m[0][1].re, m[0][1].im,
                m[1][0].re, m[1][0].im, m[1][1].re, m[1][1].im,
            ));
        }
        out
    }
}

/// The A, B, C single-qubit factors of a doubly-controlled U, with the
/// leftover global phase tracked explicitly.
#[derive(Debug, Clone, Copy)]
pub struct AbcFactors {
    pub a: SingleQubitUnitary,
    pub b: SingleQubitUnitary,
    pub c: SingleQubitUnitary,
    /// Unit scalar p with A† X B X C = p . U; 1 when U is special unitary.
    pub residual_phase: Complex64,
}

/// Factors u so that A† B C = I and A† X B X C = residual_phase . u.
///
/// Derived from a Z-Y Euler factorization u = e^{i alpha} Rz(beta) Ry(gamma)
/// Rz(delta); conjugation by X negates the rotation angles, which is what
/// lets the same factors collapse to the identity when the controls are off.
pub fn abc_decompose(u: &SingleQubitUnitary) -> Result<AbcFactors> {
    let dev = u.unitarity_deviation();
    if dev > gates::UNITARITY_TOL {
        return Err(Error::NonUnitary { deviation: dev });
    }
    let det = u.det();
    let alpha = det.arg() / 2.0;
    let v = u.scale(Complex64::from_polar(1.0, -alpha));
    // v = Rz(beta) Ry(gamma) Rz(delta)
    let gamma = 2.0 * v.m[1][0].norm().atan2(v.m[0][0].norm());
    let (beta, delta) = if v.m[1][0].norm() < 1e-9 {
        // diagonal: split the phase evenly
        let s = 2.0 * v.m[1][1].arg();
        (s / 2.0, s / 2.0)
    } else if v.m[0][0].norm() < 1e-9 {
        // anti-diagonal
        let d = 2.0 * v.m[1][0].arg();
        (d / 2.0, -d / 2.0)
    } else {
        let s = 2.0 * v.m[1][1].arg();
        let d = 2.0 * v.m[1][0].arg();
        ((s + d) / 2.0, (s - d) / 2.0)
    };
    // Standard construction: with a_nc = Rz(beta) Ry(gamma/2),
    // b_nc = Ry(-gamma/2) Rz(-(delta+beta)/2), c_nc = Rz((delta-beta)/2)
    // we get a_nc b_nc c_nc = I and a_nc X b_nc X c_nc = v.
    let a_nc = gates::rz(beta).mul(&gates::ry(gamma / 2.0));
    let b_nc = gates::ry(-gamma / 2.0).mul(&gates::rz(-(delta + beta) / 2.0));
    let c_nc = gates::rz((delta - beta) / 2.0);
    // The exposed convention uses A† on the left, so A is the adjoint of a_nc.
    let factors = AbcFactors {
        a: a_nc.dagger(),
        b: b_nc,
        c: c_nc,
        residual_phase: Complex64::from_polar(1.0, -alpha),
    };
    debug_assert!(verify_abc(&factors, u) <= 1e-8);
    Ok(factors)
}

/// Max of the two defect norms of the factor identities against `u`.
pub fn verify_abc(f: &AbcFactors, u: &SingleQubitUnitary) -> f64 {
    let adag = f.a.dagger();
    let x = gates::pauli_x();
    let closed = adag.mul(&f.b).mul(&f.c);
    let open = adag.mul(&x).mul(&f.b).mul(&x).mul(&f.c);
    let d1 = closed.distance(&gates::identity());
    let d2 = open.distance(&u.scale(f.residual_phase));
    d1.max(d2)
}

/// Expands a doubly-controlled U into two CCX gates and single-qubit factors,
/// with a controlled-phase fixup on the control pair when the residual phase
/// is not 1.
pub fn expand_ccu(
    u: &SingleQubitUnitary,
    control1: usize,
    control2: usize,
    target: usize,
) -> Result<GateSequence> {
    if control1 == control2 || control1 == target || control2 == target {
        return Err(Error::DuplicateIndex(if control1 == control2 {
            control1
        } else {
            target
        }));
    }
    let f = abc_decompose(u)?;
    let num_qubits = control1.max(control2).max(target) + 1;
    let mut seq = GateSequence::new(num_qubits);
    let id = gates::identity();
    let ccx_controls = vec![(control1, 1), (control2, 1)];
    if !f.c.approx_eq(&id, 1e-12) {
        seq.push(GateOp::single(f.c, target, "C"));
    }
    seq.push(GateOp::controlled(gates::pauli_x(), ccx_controls.clone(), target, "CCX"));
    if !f.b.approx_eq(&id, 1e-12) {
        seq.push(GateOp::single(f.b, target, "B"));
    }
    seq.push(GateOp::controlled(gates::pauli_x(), ccx_controls, target, "CCX"));
    let adag = f.a.dagger();
    if !adag.approx_eq(&id, 1e-12) {
        seq.push(GateOp::single(adag, target, "Adag"));
    }
    if (f.residual_phase - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
        // composed circuit realizes residual_phase . U on the 11-control
        // subspace; cancel it with a controlled phase on the control pair
        let fix = gates::phase_scalar(f.residual_phase.conj());
        seq.push(GateOp::controlled(fix, vec![(control1, 1)], control2, "CPHASE"));
    }
    Ok(seq)
}

/// Expands a phase flip controlled on an arbitrary bit pattern into CCX
/// cascades over clean ancillas plus a central CZ. Zero-valued controls are
/// X-conjugated. Emits exactly 2c-1 multi-qubit gates for c all-ones
/// controls, so counts sit on a line in c.
pub fn expand_multi_controlled_z(
    controls: &[(usize, u8)],
    target: usize,
    ancillas: &[usize],
) -> Result<GateSequence> {
    let c = controls.len();
    if c == 0 {
        return Err(Error::Shape("multi-controlled Z needs at least one control".into()));
    }
    let needed = c - 1;
    if ancillas.len() < needed {
        return Err(Error::InsufficientAncillas {
            controls: c,
            needed,
            available: ancillas.len(),
        });
    }
    let max_index = controls
        .iter()
        .map(|&(q, _)| q)
        .chain(ancillas[..needed].iter().copied())
        .chain(std::iter::once(target))
        .max()
        .unwrap();
    let mut seq = GateSequence::new(max_index + 1);
    let x = gates::pauli_x();

    let flips: Vec<usize> = controls.iter().filter(|&&(_, b)| b == 0).map(|&(q, _)| q).collect();
    for &q in &flips {
        seq.push(GateOp::single(x, q, "X"));
    }

    // compute the running conjunction into fresh ancillas
    let mut compute = Vec::new();
    let mut conj = controls[0].0;
    for (i, &(q, _)) in controls.iter().enumerate().skip(1) {
        let anc = ancillas[i - 1];
        let op = GateOp::controlled(x, vec![(conj, 1), (q, 1)], anc, "CCX");
        compute.push(op.clone());
        seq.push(op);
        conj = anc;
    }

    seq.push(GateOp::controlled(gates::pauli_z(), vec![(conj, 1)], target, "CZ"));

    for op in compute.into_iter().rev() {
        seq.push(op);
    }
    for &q in flips.iter().rev() {
        seq.push(GateOp::single(x, q, "X"));
    }
    Ok(seq)
}
