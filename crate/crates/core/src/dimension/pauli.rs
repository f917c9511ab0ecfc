//! Exact Pauli strings and their conjugation through Clifford generators.
//!
//! A string is stored as `i^kappa X^x Z^z` with bit masks `x`, `z` and the
//! phase exponent `kappa` mod 4 (qubit `q` maps to bit `q-1`). In this
//! canonical order CNOT and SWAP conjugations are phase-free; only H and
//! S-type gates touch `kappa`.

use nalgebra::Matrix2;
use num_complex::Complex64;

pub type CliffordUnitary2 = Matrix2<Complex64>;

/// Two-qubit and single-qubit Clifford generators on 1-based qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Swap(usize, usize),
    /// Explicit identity two-qubit slot (used as a perturbation anchor).
    Id2(usize, usize),
}

impl CliffordGate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            CliffordGate::H(q)
            | CliffordGate::S(q)
            | CliffordGate::Sdg(q)
            | CliffordGate::X(q)
            | CliffordGate::Y(q)
            | CliffordGate::Z(q) => (q, None),
            CliffordGate::Cnot(a, b) | CliffordGate::Swap(a, b) | CliffordGate::Id2(a, b) => {
                (a, Some(b))
            }
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits().1.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub n: usize,
    pub x: u64,
    pub z: u64,
    /// Phase exponent: the string equals `i^kappa X^x Z^z`.
    pub kappa: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: 0, z: 0, kappa: 0 }
    }

    pub fn single_z(n: usize, q: usize) -> Self {
        PauliString { n, x: 0, z: 1 << (q - 1), kappa: 0 }
    }

    pub fn single_x(n: usize, q: usize) -> Self {
        PauliString { n, x: 1 << (q - 1), z: 0, kappa: 0 }
    }

    /// `Y_q = i X_q Z_q`.
    pub fn single_y(n: usize, q: usize) -> Self {
        PauliString { n, x: 1 << (q - 1), z: 1 << (q - 1), kappa: 1 }
    }

    fn bit(mask: u64, q: usize) -> bool {
        mask >> (q - 1) & 1 == 1
    }

    fn add_phase(&mut self, k: u8) {
        self.kappa = (self.kappa + k) % 4;
    }

    /// Hermitian iff `kappa` matches the Y-count parity.
    pub fn is_hermitian(&self) -> bool {
        let ys = (self.x & self.z).count_ones() as u8;
        self.kappa % 2 == ys % 2
    }

    /// Applied to `|0^n>` the string gives `i^kappa |x>`: Z factors act
    /// trivially on `|0>`.
    pub fn apply_to_zero_state(&self) -> (u64, u8) {
        (self.x, self.kappa)
    }

    /// Forward conjugation `P -> G P G^dag`.
    pub fn conjugate(&self, gate: CliffordGate) -> PauliString {
        let mut p = *self;
        match gate {
            CliffordGate::H(q) => {
                let bx = Self::bit(p.x, q);
                let bz = Self::bit(p.z, q);
                if bx && bz {
                    p.add_phase(2);
                }
                let bit = 1u64 << (q - 1);
                let xq = p.x & bit;
                let zq = p.z & bit;
                p.x = (p.x & !bit) | zq;
                p.z = (p.z & !bit) | xq;
            }
            CliffordGate::S(q) => {
                if Self::bit(p.x, q) {
                    p.add_phase(1);
                    p.z ^= 1 << (q - 1);
                }
            }
            CliffordGate::Sdg(q) => {
                if Self::bit(p.x, q) {
                    p.add_phase(3);
                    p.z ^= 1 << (q - 1);
                }
            }
            CliffordGate::X(q) => {
                if Self::bit(p.z, q) {
                    p.add_phase(2);
                }
            }
            CliffordGate::Y(q) => {
                if Self::bit(p.x, q) != Self::bit(p.z, q) {
                    p.add_phase(2);
                }
            }
            CliffordGate::Z(q) => {
                if Self::bit(p.x, q) {
                    p.add_phase(2);
                }
            }
            CliffordGate::Cnot(c, t) => {
                if Self::bit(p.x, c) {
                    p.x ^= 1 << (t - 1);
                }
                if Self::bit(p.z, t) {
                    p.z ^= 1 << (c - 1);
                }
            }
            CliffordGate::Swap(a, b) => {
                let (ba, bb) = (1u64 << (a - 1), 1u64 << (b - 1));
                let swap_bits = |m: u64| -> u64 {
                    let va = m & ba != 0;
                    let vb = m & bb != 0;
                    let mut m = m & !(ba | bb);
                    if va {
                        m |= bb;
                    }
                    if vb {
                        m |= ba;
                    }
                    m
                };
                p.x = swap_bits(p.x);
                p.z = swap_bits(p.z);
            }
            CliffordGate::Id2(_, _) => {}
        }
        p
    }

    /// Backward conjugation `P -> G^dag P G`.
    pub fn conjugate_back(&self, gate: CliffordGate) -> PauliString {
        match gate {
            CliffordGate::S(q) => self.conjugate(CliffordGate::Sdg(q)),
            CliffordGate::Sdg(q) => self.conjugate(CliffordGate::S(q)),
            other => self.conjugate(other), // self-inverse generators
        }
    }

    /// Dense matrix, for small-n oracle checks.
    pub fn dense(&self) -> nalgebra::DMatrix<Complex64> {
        let dim = 1usize << self.n;
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        let phase = Complex64::i().powu(self.kappa as u32);
        for col in 0..dim {
            let row = col ^ self.x as usize;
            // Z^z sign on the input basis state.
            let sign = if ((col as u64 & self.z).count_ones()) % 2 == 1 { -1.0 } else { 1.0 };
            m[(row, col)] = phase * sign;
        }
        m
    }
}

/// Dense single-qubit matrices for the generators (oracle support).
pub fn single_qubit_unitary(gate: CliffordGate) -> Option<CliffordUnitary2> {
    let s = |re: f64, im: f64| Complex64::new(re, im);
    let inv_sqrt2 = 1.0 / f64::sqrt(2.0);
    match gate {
        CliffordGate::H(_) => Some(Matrix2::new(
            s(inv_sqrt2, 0.0), s(inv_sqrt2, 0.0),
            s(inv_sqrt2, 0.0), s(-inv_sqrt2, 0.0),
        )),
        CliffordGate::S(_) => Some(Matrix2::new(s(1.0, 0.0), s(0.0, 0.0), s(0.0, 0.0), s(0.0, 1.0))),
        CliffordGate::Sdg(_) => {
            Some(Matrix2::new(s(1.0, 0.0), s(0.0, 0.0), s(0.0, 0.0), s(0.0, -1.0)))
        }
        CliffordGate::X(_) => Some(Matrix2::new(s(0.0, 0.0), s(1.0, 0.0), s(1.0, 0.0), s(0.0, 0.0))),
        CliffordGate::Y(_) => Some(Matrix2::new(s(0.0, 0.0), s(0.0, -1.0), s(0.0, 1.0), s(0.0, 0.0))),
        CliffordGate::Z(_) => Some(Matrix2::new(s(1.0, 0.0), s(0.0, 0.0), s(0.0, 0.0), s(-1.0, 0.0))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnot_spreads_x_and_z() {
        let n = 2;
        let x1 = PauliString::single_x(n, 1);
        let spread = x1.conjugate(CliffordGate::Cnot(1, 2));
        assert_eq!(spread, PauliString { n, x: 0b11, z: 0, kappa: 0 });

        let z2 = PauliString::single_z(n, 2);
        let spread = z2.conjugate(CliffordGate::Cnot(1, 2));
        assert_eq!(spread, PauliString { n, x: 0, z: 0b11, kappa: 0 });
    }

    #[test]
    fn hadamard_swaps_x_z() {
        let n = 1;
        let z = PauliString::single_z(n, 1);
        assert_eq!(z.conjugate(CliffordGate::H(1)), PauliString::single_x(n, 1));
        let y = PauliString::single_y(n, 1);
        let hy = y.conjugate(CliffordGate::H(1));
        // H Y H = -Y.
        assert_eq!(hy, PauliString { n, x: 1, z: 1, kappa: 3 });
    }

    #[test]
    fn s_rotates_x_to_y() {
        let n = 1;
        let x = PauliString::single_x(n, 1);
        assert_eq!(x.conjugate(CliffordGate::S(1)), PauliString::single_y(n, 1));
        // And back.
        let y = PauliString::single_y(n, 1);
        assert_eq!(y.conjugate_back(CliffordGate::S(1)), x);
    }

    #[test]
    fn hermiticity_preserved() {
        let n = 3;
        let mut p = PauliString::single_z(n, 1);
        let gates = [
            CliffordGate::H(1),
            CliffordGate::Cnot(1, 2),
            CliffordGate::S(2),
            CliffordGate::Swap(2, 3),
            CliffordGate::Cnot(3, 2),
            CliffordGate::Sdg(1),
            CliffordGate::H(3),
        ];
        for g in gates {
            p = p.conjugate(g);
            assert!(p.is_hermitian(), "not hermitian after {g:?}: {p:?}");
        }
    }

    #[test]
    fn dense_matches_definition() {
        // Y_1 on two qubits applied to |01> (qubit1 = 1).
        let y = PauliString::single_y(2, 1);
        let m = y.dense();
        // Y|1> = -i|0>, so column index 1 should carry -i at row 0.
        assert_eq!(m[(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(m[(3, 2)], Complex64::new(0.0, 1.0)); // Y|0> = i|1> on qubit 1
    }

    #[test]
    fn conjugate_then_back_is_identity() {
        let n = 4;
        let p = PauliString { n, x: 0b1011, z: 0b0110, kappa: 1 };
        for g in [
            CliffordGate::H(2),
            CliffordGate::S(3),
            CliffordGate::Cnot(2, 3),
            CliffordGate::Swap(1, 4),
        ] {
            assert_eq!(p.conjugate(g).conjugate_back(g), p);
        }
    }
}
