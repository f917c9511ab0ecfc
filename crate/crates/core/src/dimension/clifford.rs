//! Clifford block circuits certifying linear growth of the unitary
//! accessible dimension.
//!
//! The circuit is a sequence of blocks `C_1 .. C_T`. Each block ends with a
//! two-qubit gate on the pair (1, 2) (the perturbation slot). The blocks
//! are chosen so that the back-conjugated Paulis
//! `C_1^dag .. C_j^dag (Z (x) I) C_j .. C_1` applied to `|0^n>` enumerate
//! vectors `i^kappa |x>` with pairwise distinct `(x, kappa mod 2)`: the
//! X-masks follow a Gray-code order, first with even phase, then with one
//! Y inserted for odd phase. Distinct images are exactly real-linearly
//! independent, so a circuit with `T` blocks certifies rank at least `T`.

use crate::circuit::{BrickwallLayout, CircuitInstance, CMat4, GateMatrix, MeasurementConfiguration};
use crate::error::Error;
use crate::gates;
use crate::Result;

use super::pauli::{single_qubit_unitary, CliffordGate, PauliString};

#[derive(Debug, Clone)]
pub struct CliffordBlock {
    /// Gate sequence; the last two-qubit gate acts on (1, 2) and anchors
    /// the block's perturbation.
    pub gates: Vec<CliffordGate>,
}

#[derive(Debug, Clone)]
pub struct CliffordCircuit {
    pub n: usize,
    pub blocks: Vec<CliffordBlock>,
}

/// Maximum number of pairwise independent `i^kappa |x>` images, by
/// pigeonhole over `(x, kappa mod 2)` with the all-zero-mask odd-phase form
/// unreachable: `2^(n+1) - 1`.
pub fn max_blocks(n: usize) -> usize {
    (1usize << (n + 1)) - 1
}

fn gray(i: usize) -> u64 {
    (i ^ (i >> 1)) as u64
}

/// Target for block `j` (0-based): Hermitian Paulis with distinct
/// `(x-mask, phase parity)`.
fn block_target(n: usize, j: usize) -> PauliString {
    let count = 1usize << n;
    if j == 0 {
        PauliString::single_z(n, 1)
    } else if j < count {
        PauliString { n, x: gray(j), z: 0, kappa: 0 }
    } else {
        let g = gray(j - count + 1);
        let low = g.trailing_zeros() as u64;
        PauliString { n, x: g, z: 1 << low, kappa: 1 }
    }
}

/// Builds a block `C` with `C R C^dag = Z_1`, i.e. `C^dag Z_1 C = R`, from
/// single-qubit basis changes followed by a descending nearest-neighbor
/// CNOT/SWAP chain. `R` must be a non-identity Hermitian Pauli.
fn build_block(r: &PauliString) -> Vec<CliffordGate> {
    assert!(r.is_hermitian() && (r.x | r.z) != 0);
    let n = r.n;
    let plan = |sign_fix: Option<CliffordGate>| -> (Vec<CliffordGate>, PauliString) {
        let mut gates: Vec<CliffordGate> = Vec::new();
        let mut p = *r;
        if let Some(g) = sign_fix {
            gates.push(g);
            p = p.conjugate(g);
        }
        // Local basis changes: X -> Z via H, Y -> Z via Sdg then H.
        for q in 1..=n {
            let bx = p.x >> (q - 1) & 1 == 1;
            let bz = p.z >> (q - 1) & 1 == 1;
            match (bx, bz) {
                (true, false) => gates.push(CliffordGate::H(q)),
                (true, true) => {
                    gates.push(CliffordGate::Sdg(q));
                    gates.push(CliffordGate::H(q));
                }
                _ => {}
            }
        }
        for g in gates.iter().skip(usize::from(sign_fix.is_some())) {
            p = p.conjugate(*g);
        }
        debug_assert_eq!(p.x, 0);
        // Gather the Z-string down to qubit 1.
        while p.z != 1 {
            let m = 64 - p.z.leading_zeros() as usize; // max supported qubit
            let below = p.z >> (m - 2) & 1 == 1;
            let g = if below { CliffordGate::Cnot(m, m - 1) } else { CliffordGate::Swap(m - 1, m) };
            gates.push(g);
            p = p.conjugate(g);
        }
        (gates, p)
    };

    let (gates, p) = plan(None);
    if p.kappa == 0 {
        return finish_block(gates);
    }
    // Flip the overall sign by prepending a Pauli that anticommutes with R.
    let q = (1..=n)
        .find(|&q| (r.x | r.z) >> (q - 1) & 1 == 1)
        .expect("non-identity Pauli");
    let fix = if r.x >> (q - 1) & 1 == 1 { CliffordGate::Z(q) } else { CliffordGate::X(q) };
    let (gates, p) = plan(Some(fix));
    debug_assert_eq!(p.kappa, 0);
    finish_block(gates)
}

fn finish_block(mut gates: Vec<CliffordGate>) -> Vec<CliffordGate> {
    let ends_on_pair = gates
        .iter()
        .rev()
        .find(|g| g.is_two_qubit())
        .is_some_and(|g| matches!(g.qubits(), (1, Some(2)) | (2, Some(1))));
    let trailing_single = gates.last().is_some_and(|g| !g.is_two_qubit());
    if !ends_on_pair || trailing_single {
        gates.push(CliffordGate::Id2(1, 2));
    }
    gates
}

/// The Gray-code block circuit with `T` blocks.
pub fn build_lower_bound_clifford(n: usize, t_blocks: usize) -> Result<CliffordCircuit> {
    let max = max_blocks(n);
    if t_blocks == 0 || t_blocks > max {
        return Err(Error::TooManyBlocks { count: t_blocks, max, n });
    }
    let mut blocks = Vec::with_capacity(t_blocks);
    let mut history: Vec<CliffordGate> = Vec::new();
    for j in 0..t_blocks {
        let target = block_target(n, j);
        // Required block action: R = Gamma target Gamma^dag.
        let mut r = target;
        for g in &history {
            r = r.conjugate(*g);
        }
        let gates = build_block(&r);
        history.extend(gates.iter().copied());
        blocks.push(CliffordBlock { gates });
    }
    Ok(CliffordCircuit { n, blocks })
}

/// `C_1^dag .. C_j^dag P C_j .. C_1`: exact conjugation through the first
/// `up_to_block` blocks.
pub fn pauli_propagate(circuit: &CliffordCircuit, p: &PauliString, up_to_block: usize) -> PauliString {
    let mut p = *p;
    for block in circuit.blocks[..up_to_block].iter().rev() {
        for g in block.gates.iter().rev() {
            p = p.conjugate_back(*g);
        }
    }
    p
}

/// The `i^kappa |x>` images of `Z_1` after each block.
pub fn block_images(circuit: &CliffordCircuit) -> Vec<(u64, u8)> {
    (1..=circuit.blocks.len())
        .map(|j| {
            pauli_propagate(circuit, &PauliString::single_z(circuit.n, 1), j).apply_to_zero_state()
        })
        .collect()
}

/// Vectors `i^kappa |x>` are pairwise real-linearly independent iff their
/// `(x, kappa mod 2)` pairs are distinct; no floating point involved.
pub fn images_independent(images: &[(u64, u8)]) -> bool {
    let mut seen = std::collections::HashSet::new();
    images.iter().all(|&(x, k)| seen.insert((x, k % 2)))
}

fn gate_matrix(gate: CliffordGate, pair: (usize, usize)) -> CMat4 {
    match gate {
        CliffordGate::Cnot(c, _) => gates::cnot4(usize::from(c != pair.0)),
        CliffordGate::Swap(_, _) => gates::swap4(),
        CliffordGate::Id2(_, _) => CMat4::identity(),
        single => {
            let m = single_qubit_unitary(single).expect("single-qubit gate");
            let (q, _) = single.qubits();
            if q == pair.0 {
                gates::kron(&m, &gates::identity2())
            } else {
                gates::kron(&gates::identity2(), &m)
            }
        }
    }
}

/// A Clifford circuit packed into a measurement-free brick-wall instance.
/// Single-qubit gates merge into the next two-qubit gate on their qubit;
/// remaining slots are identity. Returns the instance and the placement id
/// of each block's perturbation slot.
pub fn embed_as_instance(circuit: &CliffordCircuit, t: usize) -> Result<(CircuitInstance, Vec<usize>)> {
    let n = circuit.n;
    let layout = BrickwallLayout::new(n, t)?;
    let mut gate_mats: Vec<CMat4> = vec![CMat4::identity(); layout.gate_count()];
    let mut avail = vec![1usize; n + 1];
    let mut pending: Vec<nalgebra::Matrix2<num_complex::Complex64>> =
        vec![gates::identity2(); n + 1];
    let mut slots = Vec::with_capacity(circuit.blocks.len());

    let place_two_qubit = |g: CliffordGate,
                               avail: &mut Vec<usize>,
                               pending: &mut Vec<nalgebra::Matrix2<num_complex::Complex64>>,
                               gate_mats: &mut Vec<CMat4>|
     -> Result<usize> {
        let (a, b) = match g.qubits() {
            (a, Some(b)) => (a.min(b), a.max(b)),
            _ => unreachable!(),
        };
        debug_assert_eq!(b, a + 1, "gates must be nearest-neighbor");
        // Odd pairs live in odd layers, even pairs in even layers.
        let want_odd = a % 2 == 1;
        let mut layer = avail[a].max(avail[b]);
        if (layer % 2 == 1) != want_odd {
            layer += 1;
        }
        if layer > t {
            return Err(Error::DepthExceeded { need: layer, have: t });
        }
        let id = layout.gate_at(layer, a).expect("pair exists in parity layer");
        let base = gate_matrix(g, (a, b));
        gate_mats[id] = base * gates::kron(&pending[a], &pending[b]);
        pending[a] = gates::identity2();
        pending[b] = gates::identity2();
        avail[a] = layer + 1;
        avail[b] = layer + 1;
        Ok(id)
    };

    for block in &circuit.blocks {
        let mut last_slot = None;
        for &g in &block.gates {
            if g.is_two_qubit() {
                let id = place_two_qubit(g, &mut avail, &mut pending, &mut gate_mats)?;
                last_slot = Some(id);
            } else {
                let (q, _) = g.qubits();
                let m = single_qubit_unitary(g).expect("single-qubit gate");
                pending[q] = m * pending[q];
            }
        }
        slots.push(last_slot.expect("blocks end with a two-qubit slot"));
    }
    // Flush any leftover single-qubit factors through identity carriers.
    for q in 1..=n {
        if pending[q] != gates::identity2() {
            let neighbor = if q < n { q + 1 } else { q - 1 };
            let a = q.min(neighbor);
            let g = CliffordGate::Id2(a, a + 1);
            place_two_qubit(g, &mut avail, &mut pending, &mut gate_mats)?;
        }
    }

    let gates_vec: Vec<GateMatrix> = layout
        .placements()
        .iter()
        .enumerate()
        .map(|(id, pl)| GateMatrix::new(gate_mats[id], pl.pair))
        .collect();
    let config = MeasurementConfiguration::all_unmeasured(n, t);
    let instance = CircuitInstance::new(layout, gates_vec, config, 0.0)?;
    Ok((instance, slots))
}
