//! Gate-level circuits for the grid QFT and the range-register phase rotation.
//!
//! Qubit `k` is bit `k` of the basis index (qubit 0 least significant).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_GATE_QFT_BITS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Hadamard {
        target: usize,
    },
    /// `diag(1, 1, 1, e^{iθ})` on (control, target).
    ControlledPhase {
        control: usize,
        target: usize,
        angle: f64,
    },
    Swap {
        a: usize,
        b: usize,
    },
    /// `diag(1, e^{iθ})` on one qubit.
    PhaseOnBit {
        target: usize,
        angle: f64,
    },
}

impl Gate {
    fn qubits(&self) -> [usize; 2] {
        match *self {
            Gate::Hadamard { target } | Gate::PhaseOnBit { target, .. } => [target, target],
            Gate::ControlledPhase {
                control, target, ..
            } => [control, target],
            Gate::Swap { a, b } => [a, b],
        }
    }

    fn is_diagonal(&self) -> bool {
        matches!(self, Gate::ControlledPhase { .. } | Gate::PhaseOnBit { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GateList {
    width: usize,
    gates: Vec<Gate>,
}

impl GateList {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for q in gate.qubits() {
            if q >= self.width {
                return Err(Error::QubitIndex {
                    qubit: q,
                    width: self.width,
                });
            }
        }
        if let Gate::ControlledPhase {
            control, target, ..
        }
        | Gate::Swap {
            a: control,
            b: target,
        } = gate
        {
            if control == target {
                return Err(Error::InvalidArgument(
                    "two-qubit gate on a single qubit".into(),
                ));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn hadamard_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Hadamard { .. }))
            .count()
    }

    pub fn controlled_phase_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::ControlledPhase { .. }))
            .count()
    }

    pub fn swap_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Swap { .. }))
            .count()
    }

    /// Applies the circuit to a dense register of `2^width` amplitudes.
    pub fn apply(&self, state: &mut [Complex64]) -> Result<()> {
        if state.len() != 1usize << self.width {
            return Err(Error::Dimension {
                expected: 1usize << self.width,
                got: state.len(),
            });
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for gate in &self.gates {
            match *gate {
                Gate::Hadamard { target } => {
                    let bit = 1usize << target;
                    for i in 0..state.len() {
                        if i & bit == 0 {
                            let (a, b) = (state[i], state[i | bit]);
                            state[i] = (a + b) * h;
                            state[i | bit] = (a - b) * h;
                        }
                    }
                }
                Gate::ControlledPhase {
                    control,
                    target,
                    angle,
                } => {
                    let mask = (1usize << control) | (1usize << target);
                    let phase = Complex64::from_polar(1.0, angle);
                    for (i, amp) in state.iter_mut().enumerate() {
                        if i & mask == mask {
                            *amp *= phase;
                        }
                    }
                }
                Gate::Swap { a, b } => {
                    let (ba, bb) = (1usize << a, 1usize << b);
                    for i in 0..state.len() {
                        if i & ba != 0 && i & bb == 0 {
                            state.swap(i, (i & !ba) | bb);
                        }
                    }
                }
                Gate::PhaseOnBit { target, angle } => {
                    let bit = 1usize << target;
                    let phase = Complex64::from_polar(1.0, angle);
                    for (i, amp) in state.iter_mut().enumerate() {
                        if i & bit != 0 {
                            *amp *= phase;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Phase picked up by the basis state `value` under a purely diagonal circuit.
    pub fn basis_phase(&self, value: u64) -> Result<Complex64> {
        let mut phase = Complex64::new(1.0, 0.0);
        for gate in &self.gates {
            let set = |q: usize| value >> q & 1 == 1;
            match *gate {
                Gate::PhaseOnBit { target, angle } if set(target) => {
                    phase *= Complex64::from_polar(1.0, angle)
                }
                Gate::ControlledPhase {
                    control,
                    target,
                    angle,
                } if set(control) && set(target) => phase *= Complex64::from_polar(1.0, angle),
                g if !g.is_diagonal() => {
                    return Err(Error::InvalidArgument(
                        "basis_phase needs a diagonal circuit".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(phase)
    }
}

/// Textbook QFT on `n` qubits: `n` Hadamards, `n(n−1)/2` controlled phases
/// and `⌊n/2⌋` swaps restoring the bit order, so the circuit's matrix is
/// `2^{-n/2} e^{+2πi xy/2ⁿ}`.
pub fn qft_gate_circuit(n: u32) -> Result<GateList> {
    if n == 0 || n > MAX_GATE_QFT_BITS {
        return Err(Error::GateWidth { n });
    }
    let width = n as usize;
    let mut circuit = GateList::new(width);
    for target in (0..width).rev() {
        circuit.push(Gate::Hadamard { target })?;
        for control in (0..target).rev() {
            let k = target - control + 1;
            circuit.push(Gate::ControlledPhase {
                control,
                target,
                angle: 2.0 * PI / (1u64 << k) as f64,
            })?;
        }
    }
    for a in 0..width / 2 {
        circuit.push(Gate::Swap {
            a,
            b: width - 1 - a,
        })?;
    }
    Ok(circuit)
}

/// Per-bit phase rotations `diag(1, e^{2πiλa₁2^k})` realizing the
/// fixed-point phase rotation up to the global phase `e^{2πiλa₀}`.
pub fn phase_rotation_gates(bits: u32, lambda: f64, step: f64) -> Result<GateList> {
    let mut circuit = GateList::new(bits as usize);
    let (hi, lo) = two_product(lambda, step);
    for k in 0..bits {
        let scale = (k as f64).exp2();
        // hi·2^k and lo·2^k are exact
        let turns = fract(hi * scale) + lo * scale;
        circuit.push(Gate::PhaseOnBit {
            target: k as usize,
            angle: 2.0 * PI * fract(turns),
        })?;
    }
    Ok(circuit)
}

/// `a·b = hi + lo` exactly.
pub(crate) fn two_product(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    (hi, a.mul_add(b, -hi))
}

pub(crate) fn fract(x: f64) -> f64 {
    x - x.floor()
}

/// Fractional part of `λ(a₀ + a₁·w)` without first rounding `a₀ + a₁·w`.
pub(crate) fn rotation_turns(lambda: f64, offset: f64, step: f64, word: u64) -> f64 {
    let (h0, l0) = two_product(lambda, offset);
    let (h1, l1) = two_product(lambda, step);
    let w = word as f64;
    let (h2, l2) = two_product(h1, w);
    fract(fract(h0) + l0 + fract(h2) + l2 + l1 * w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Direction, GridShape, GridState};

    fn dft_matrix_column(n: u32, x: usize) -> Vec<Complex64> {
        let side = 1usize << n;
        let norm = 1.0 / (side as f64).sqrt();
        (0..side)
            .map(|y| Complex64::from_polar(norm, 2.0 * PI * ((x * y) % side) as f64 / side as f64))
            .collect()
    }

    #[test]
    fn gate_counts() {
        let one = qft_gate_circuit(1).unwrap();
        assert_eq!(one.gates(), &[Gate::Hadamard { target: 0 }]);
        for n in 1..=MAX_GATE_QFT_BITS {
            let c = qft_gate_circuit(n).unwrap();
            assert_eq!(c.hadamard_count(), n as usize);
            assert_eq!(c.controlled_phase_count(), (n * (n - 1) / 2) as usize);
            assert_eq!(c.swap_count(), (n / 2) as usize);
        }
        assert!(qft_gate_circuit(0).is_err());
        assert!(qft_gate_circuit(13).is_err());
    }

    #[test]
    fn basis_states_match_dft_matrix() {
        for n in 1..=5 {
            let c = qft_gate_circuit(n).unwrap();
            for x in 0..1usize << n {
                let mut state = vec![Complex64::new(0.0, 0.0); 1 << n];
                state[x] = Complex64::new(1.0, 0.0);
                c.apply(&mut state).unwrap();
                for (a, b) in state.iter().zip(dft_matrix_column(n, x)) {
                    assert!((a - b).norm() < 1e-12, "n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn matches_dense_transform_on_superpositions() {
        let n = 4;
        let shape = GridShape::new(n, 1).unwrap();
        let c = qft_gate_circuit(n).unwrap();
        let amps: Vec<Complex64> = (0..16)
            .map(|k| Complex64::new((0.3 * k as f64).cos(), (0.7 * k as f64).sin()))
            .collect();
        let dense = GridState::from_amplitudes(shape, amps.clone())
            .unwrap()
            .qft(Direction::Forward);
        let mut gate = amps;
        c.apply(&mut gate).unwrap();
        for (a, b) in gate.iter().zip(dense.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_range_qubits() {
        let mut c = GateList::new(2);
        assert!(c.push(Gate::Hadamard { target: 2 }).is_err());
        assert!(c.push(Gate::Swap { a: 1, b: 1 }).is_err());
        let mut s = vec![Complex64::new(1.0, 0.0); 8];
        assert!(c.apply(&mut s).is_err());
    }

    #[test]
    fn basis_phase_rejects_non_diagonal() {
        let c = qft_gate_circuit(2).unwrap();
        assert!(c.basis_phase(1).is_err());
        let p = phase_rotation_gates(3, 0.25, 1.0).unwrap();
        // bits 0 and 1 set: e^{2πi·0.25·(1+2)}
        let expected = Complex64::from_polar(1.0, 2.0 * PI * 0.75);
        assert!((p.basis_phase(3).unwrap() - expected).norm() < 1e-15);
    }
}
