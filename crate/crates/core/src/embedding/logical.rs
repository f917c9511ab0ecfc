//! Brick-wall logical circuits of gates `(u1 (x) v1) W (u2 (x) v2)` with
//! `W` either the identity or a CNOT, plus standalone single-qubit gates
//! on wires a layer leaves unpaired.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dimension::clifford::CliffordCircuit;
use crate::dimension::pauli::{single_qubit_unitary, CliffordGate};
use crate::engine::{self, StateVector};
use crate::error::Error;
use crate::gates;
use crate::stream::StreamKey;
use crate::Result;

pub type M2 = Matrix2<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WKind {
    Identity,
    Cnot,
}

/// One two-wire gate on neighboring wires `(w, w+1)`: the state first sees
/// `u2 (x) v2`, then `W` (control on wire `w`), then `u1 (x) v1`.
#[derive(Debug, Clone)]
pub struct Eq12Gate {
    pub wires: (usize, usize),
    pub u1: M2,
    pub v1: M2,
    pub w: WKind,
    pub u2: M2,
    pub v2: M2,
}

impl Eq12Gate {
    pub fn identity(wires: (usize, usize)) -> Self {
        let i = gates::identity2();
        Eq12Gate { wires, u1: i, v1: i, w: WKind::Identity, u2: i, v2: i }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LogicalLayer {
    pub gates: Vec<Eq12Gate>,
    /// Standalone singles on wires the layer leaves unpaired.
    pub singles: Vec<(usize, M2)>,
}

/// `k` wires, layered brick-wall: odd layers pair `(1,2), (3,4), ...`,
/// even layers `(2,3), (4,5), ...`.
#[derive(Debug, Clone)]
pub struct LogicalCircuit {
    pub k: usize,
    pub layers: Vec<LogicalLayer>,
}

/// Wire pairs of a brick-wall layer (1-based `layer`).
pub fn layer_pairs(k: usize, layer: usize) -> Vec<(usize, usize)> {
    let start = if layer % 2 == 1 { 1 } else { 2 };
    (start..k).step_by(2).map(|w| (w, w + 1)).collect()
}

impl LogicalCircuit {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, layer) in self.layers.iter().enumerate() {
            let pairs = layer_pairs(self.k, i + 1);
            for g in &layer.gates {
                if !pairs.contains(&g.wires) {
                    return Err(Error::UnplaceableLogicalLayer {
                        layer: i + 1,
                        reason: format!("pair {:?} not in layer parity", g.wires),
                    });
                }
            }
            for &(w, _) in &layer.singles {
                if pairs.iter().any(|&(a, b)| a == w || b == w) && layer
                    .gates
                    .iter()
                    .any(|g| g.wires.0 == w || g.wires.1 == w)
                {
                    return Err(Error::UnplaceableLogicalLayer {
                        layer: i + 1,
                        reason: format!("wire {w} is both paired and single"),
                    });
                }
            }
        }
        Ok(())
    }

    /// All-identity circuit of the given depth.
    pub fn identity(k: usize, depth: usize) -> Self {
        let layers = (1..=depth)
            .map(|_| LogicalLayer::default())
            .collect();
        LogicalCircuit { k, layers }
    }

    /// Single layer preparing a Bell pair on two wires: `CNOT (H (x) I)`.
    pub fn bell_pair() -> Self {
        let mut layer = LogicalLayer::default();
        let mut g = Eq12Gate::identity((1, 2));
        g.w = WKind::Cnot;
        g.u2 = gates::hadamard();
        layer.gates.push(g);
        LogicalCircuit { k: 2, layers: vec![layer] }
    }

    /// Haar-random singles with `W` drawn uniformly from `{I, CNOT}` on
    /// every brick-wall slot.
    pub fn random(k: usize, depth: usize, stream: &StreamKey) -> Self {
        let mut rng = stream.rng();
        let layers = (1..=depth)
            .map(|layer| {
                let mut l = LogicalLayer::default();
                for wires in layer_pairs(k, layer) {
                    let w = if rng.random::<f64>() < 0.5 { WKind::Identity } else { WKind::Cnot };
                    l.gates.push(Eq12Gate {
                        wires,
                        u1: haar_su2(&mut rng),
                        v1: haar_su2(&mut rng),
                        w,
                        u2: haar_su2(&mut rng),
                        v2: haar_su2(&mut rng),
                    });
                }
                let paired: Vec<usize> =
                    l.gates.iter().flat_map(|g| [g.wires.0, g.wires.1]).collect();
                for wire in 1..=k {
                    if !paired.contains(&wire) {
                        l.singles.push((wire, haar_su2(&mut rng)));
                    }
                }
                l
            })
            .collect();
        LogicalCircuit { k, layers }
    }

    /// Dense reference: the circuit applied to `|0^k>`.
    pub fn simulate(&self) -> Result<StateVector> {
        let mut state = StateVector::zero_state(self.k)?;
        for layer in &self.layers {
            for g in &layer.gates {
                let (a, b) = g.wires;
                let w4 = match g.w {
                    WKind::Identity => crate::circuit::CMat4::identity(),
                    WKind::Cnot => gates::cnot4(0),
                };
                let u = gates::kron(&g.u1, &g.v1) * w4 * gates::kron(&g.u2, &g.v2);
                let gm = crate::circuit::GateMatrix::new(u, (a, b));
                state = engine::apply_two_qubit_gate(&state, &gm, a, b)?;
            }
            for &(w, m) in &layer.singles {
                state = engine::apply_single_qubit_gate(&state, &m, w);
            }
        }
        Ok(state)
    }
}

/// Haar measure on U(2) via Ginibre QR (the global phase is irrelevant to
/// the embedding checks).
pub fn haar_su2<R: Rng>(rng: &mut R) -> M2 {
    let mut g = M2::zeros();
    for r in 0..2 {
        for c in 0..2 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(r, c)] = Complex64::new(re, im) / f64::sqrt(2.0);
        }
    }
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..2 {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::ONE };
        for row in 0..2 {
            q[(row, k)] *= phase;
        }
    }
    q
}

/// Compiles a nearest-neighbor Clifford block circuit into the Eq-12
/// logical form: CNOTs map directly, SWAPs become three CNOTs, and singles
/// fold into the `u2/v2` factors of the next two-qubit slot on their wire.
/// Returns the logical circuit and the depth it uses.
pub fn clifford_to_logical(
    circuit: &CliffordCircuit,
    max_depth: usize,
) -> Result<(LogicalCircuit, usize)> {
    let k = circuit.n;
    let mut layers: Vec<LogicalLayer> = Vec::new();
    let mut avail = vec![1usize; k + 1];
    let mut pending: Vec<M2> = vec![gates::identity2(); k + 1];

    let mut place =
        |a: usize, w: WKind, control_low: bool, layers: &mut Vec<LogicalLayer>, avail: &mut Vec<usize>, pending: &mut Vec<M2>| -> Result<()> {
            let b = a + 1;
            let want_odd = a % 2 == 1;
            let mut layer = avail[a].max(avail[b]);
            if (layer % 2 == 1) != want_odd {
                layer += 1;
            }
            if layer > max_depth {
                return Err(Error::DepthExceeded { need: layer, have: max_depth });
            }
            while layers.len() < layer {
                layers.push(LogicalLayer::default());
            }
            let mut g = Eq12Gate::identity((a, b));
            g.w = w;
            g.u2 = pending[a];
            g.v2 = pending[b];
            if control_low {
                // CNOT with control on wire b: conjugate by H on both wires.
                g.u2 = gates::hadamard() * g.u2;
                g.v2 = gates::hadamard() * g.v2;
                g.u1 = gates::hadamard();
                g.v1 = gates::hadamard();
            }
            pending[a] = gates::identity2();
            pending[b] = gates::identity2();
            layers[layer - 1].gates.push(g);
            avail[a] = layer + 1;
            avail[b] = layer + 1;
            Ok(())
        };

    for block in &circuit.blocks {
        for &g in &block.gates {
            match g {
                CliffordGate::Cnot(c, t) => {
                    let a = c.min(t);
                    place(a, WKind::Cnot, c != a, &mut layers, &mut avail, &mut pending)?;
                }
                CliffordGate::Swap(a, _) => {
                    place(a, WKind::Cnot, false, &mut layers, &mut avail, &mut pending)?;
                    place(a, WKind::Cnot, true, &mut layers, &mut avail, &mut pending)?;
                    place(a, WKind::Cnot, false, &mut layers, &mut avail, &mut pending)?;
                }
                CliffordGate::Id2(a, _) => {
                    place(a, WKind::Identity, false, &mut layers, &mut avail, &mut pending)?;
                }
                single => {
                    let (q, _) = single.qubits();
                    let m = single_qubit_unitary(single).expect("single-qubit gate");
                    pending[q] = m * pending[q];
                }
            }
        }
    }
    for q in 1..=k {
        if pending[q] != gates::identity2() {
            let a = if q < k { q } else { q - 1 };
            place(a, WKind::Identity, false, &mut layers, &mut avail, &mut pending)?;
        }
    }
    let used = layers.len();
    let circuit = LogicalCircuit { k, layers };
    circuit.validate()?;
    Ok((circuit, used))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_pair_simulates_to_bell() {
        let c = LogicalCircuit::bell_pair();
        let s = c.simulate().unwrap();
        let r = 1.0 / f64::sqrt(2.0);
        assert!((s.amp(0b00).norm() - r).abs() < 1e-12);
        assert!((s.amp(0b11).norm() - r).abs() < 1e-12);
        assert!(s.amp(0b01).norm() < 1e-12);
    }

    #[test]
    fn random_circuit_is_unit_norm() {
        let c = LogicalCircuit::random(3, 4, &StreamKey::new(3));
        c.validate().unwrap();
        let s = c.simulate().unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn clifford_payload_compiles() {
        let clifford = crate::dimension::build_lower_bound_clifford(2, 2).unwrap();
        let (logical, used) = clifford_to_logical(&clifford, 6).unwrap();
        assert!(used <= 6);
        logical.validate().unwrap();
    }

    #[test]
    fn swap_expansion_acts_as_swap() {
        // A single SWAP compiled through Eq-12 gates must swap the wires.
        let circuit = CliffordCircuit {
            n: 2,
            blocks: vec![crate::dimension::CliffordBlock {
                gates: vec![CliffordGate::Swap(1, 2)],
            }],
        };
        let (logical, _) = clifford_to_logical(&circuit, 8).unwrap();
        // Prepare |10> by prepending an X on wire 1, then compare.
        let mut state = StateVector::zero_state(2).unwrap();
        state = engine::apply_single_qubit_gate(&state, &gates::pauli_x2(), 1);
        for layer in &logical.layers {
            for g in &layer.gates {
                let w4 = match g.w {
                    WKind::Identity => crate::circuit::CMat4::identity(),
                    WKind::Cnot => gates::cnot4(0),
                };
                let u = gates::kron(&g.u1, &g.v1) * w4 * gates::kron(&g.u2, &g.v2);
                let gm = crate::circuit::GateMatrix::new(u, g.wires);
                state = engine::apply_two_qubit_gate(&state, &gm, g.wires.0, g.wires.1).unwrap();
            }
        }
        // |10> (qubit1=1) -> |01> (qubit2=1): engine index 2.
        assert!((state.amp(0b10).norm() - 1.0).abs() < 1e-12, "{state:?}");
    }
}
