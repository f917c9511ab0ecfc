//! Small fixed matrices used across the crate. Two-qubit matrices act on
//! the local basis `|q_a q_b>` with the first pair qubit as the high bit.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::circuit::CMat4;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity2() -> Matrix2<Complex64> {
    Matrix2::identity()
}

pub fn hadamard() -> Matrix2<Complex64> {
    let h = 1.0 / f64::sqrt(2.0);
    Matrix2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0))
}

pub fn pauli_x2() -> Matrix2<Complex64> {
    Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn pauli_y2() -> Matrix2<Complex64> {
    Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

pub fn pauli_z2() -> Matrix2<Complex64> {
    Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

pub fn single_pauli(which: u8) -> Matrix2<Complex64> {
    match which {
        0 => identity2(),
        1 => pauli_x2(),
        2 => pauli_y2(),
        _ => pauli_z2(),
    }
}

/// `m_hi (x) m_lo` on the pair basis.
pub fn kron(hi: &Matrix2<Complex64>, lo: &Matrix2<Complex64>) -> CMat4 {
    hi.kronecker(lo)
}

/// CNOT with the control on `slot` (0 = first pair qubit, 1 = second).
pub fn cnot4(control_slot: usize) -> CMat4 {
    let mut m = CMat4::zeros();
    for input in 0..4usize {
        let (hi, lo) = (input >> 1, input & 1);
        let (hi_out, lo_out) = if control_slot == 0 {
            (hi, lo ^ hi)
        } else {
            (hi ^ lo, lo)
        };
        m[((hi_out << 1) | lo_out, input)] = Complex64::ONE;
    }
    m
}

pub fn swap4() -> CMat4 {
    let mut m = CMat4::zeros();
    for input in 0..4usize {
        let (hi, lo) = (input >> 1, input & 1);
        m[((lo << 1) | hi, input)] = Complex64::ONE;
    }
    m
}
