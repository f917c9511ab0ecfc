//! Exact dense simulation of monitored circuits.
//!
//! Amplitude indexing is little-endian: qubit 1 is the least significant
//! bit, so the basis label `|q1 q2 ... qn>` maps to the index
//! `sum_i bit(q_i) << (i-1)`. Per-site scalar factors (`sqrt(p)` for
//! measured sites, `sqrt(1-p)` for unmeasured ones) are accumulated in log
//! space during a run and folded into the returned state and weight, so the
//! working amplitudes stay O(1) regardless of `n*t`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{
    BrickwallLayout, CircuitInstance, CMat4, GateMatrix, MeasurementConfiguration,
    MeasurementStatus, Outcome,
};
use crate::error::Error;
use crate::stream::StreamKey;
use crate::Result;

const DEFAULT_MAX_QUBITS: usize = 14;

/// Dense-engine qubit cap; override with the `MCL_MAX_QUBITS` env var.
pub fn max_qubits() -> usize {
    std::env::var("MCL_MAX_QUBITS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

/// Squared norm of an unnormalized circuit output: the probability of
/// observing its measurement configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BornWeight(pub f64);

/// Complex amplitude vector over `n` qubits, possibly sub-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0^n>`.
    pub fn zero_state(n: usize) -> Result<Self> {
        let cap = max_qubits();
        if n > cap {
            return Err(Error::QubitCapExceeded { n, cap });
        }
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[0] = Complex64::ONE;
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Self {
        assert_eq!(amps.len(), 1 << n);
        StateVector { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2` for unit vectors.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let w = self.norm_sqr();
        if w <= 0.0 {
            return Err(Error::ZeroWeight);
        }
        let s = 1.0 / w.sqrt();
        let amps = self.amps.iter().map(|z| z * s).collect();
        Ok(StateVector { n: self.n, amps })
    }

    pub fn scaled(&self, factor: f64) -> StateVector {
        StateVector {
            n: self.n,
            amps: self.amps.iter().map(|z| z * factor).collect(),
        }
    }

    /// X on one qubit (used to undo recorded output flips).
    pub fn with_x(&self, qubit: usize) -> StateVector {
        let bit = 1usize << (qubit - 1);
        let mut amps = self.amps.clone();
        for idx in 0..amps.len() {
            if idx & bit == 0 {
                amps.swap(idx, idx | bit);
            }
        }
        StateVector { n: self.n, amps }
    }

    /// CSV dump of (index, re, im) with the endianness convention in the
    /// header line.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# amplitude index is little-endian: qubit 1 = least significant bit")?;
        writeln!(w, "index,re,im")?;
        for (i, z) in self.amps.iter().enumerate() {
            writeln!(w, "{i},{:.17e},{:.17e}", z.re, z.im)?;
        }
        Ok(())
    }
}

fn local_index_bits(a: usize, b: usize) -> (usize, usize) {
    (1usize << (a - 1), 1usize << (b - 1))
}

fn apply_gate_in_place(amps: &mut [Complex64], u: &CMat4, a: usize, b: usize) {
    let (ba, bb) = local_index_bits(a, b);
    for idx in 0..amps.len() {
        if idx & ba != 0 || idx & bb != 0 {
            continue;
        }
        // Local basis |q_a q_b> with q_a as the high bit.
        let ix = [idx, idx | bb, idx | ba, idx | ba | bb];
        let v = [amps[ix[0]], amps[ix[1]], amps[ix[2]], amps[ix[3]]];
        for r in 0..4 {
            let mut acc = Complex64::ZERO;
            for (c, vc) in v.iter().enumerate() {
                acc += u[(r, c)] * vc;
            }
            amps[ix[r]] = acc;
        }
    }
}

/// Applies a 2x2 unitary to one qubit.
pub fn apply_single_qubit_gate(
    state: &StateVector,
    m: &nalgebra::Matrix2<Complex64>,
    qubit: usize,
) -> StateVector {
    let bit = 1usize << (qubit - 1);
    let mut amps = state.amps.clone();
    for idx in 0..amps.len() {
        if idx & bit != 0 {
            continue;
        }
        let (a0, a1) = (amps[idx], amps[idx | bit]);
        amps[idx] = m[(0, 0)] * a0 + m[(0, 1)] * a1;
        amps[idx | bit] = m[(1, 0)] * a0 + m[(1, 1)] * a1;
    }
    StateVector { n: state.n, amps }
}

/// Applies a two-qubit gate to the `(a, b)` tensor factor.
pub fn apply_two_qubit_gate(state: &StateVector, gate: &GateMatrix, a: usize, b: usize) -> Result<StateVector> {
    let n = state.n;
    if a == b || a < 1 || a > n || b < 1 || b > n {
        return Err(Error::QubitOutOfRange { q: a.max(b), n });
    }
    let mut amps = state.amps.clone();
    apply_gate_in_place(&mut amps, &gate.u, a, b);
    Ok(StateVector { n, amps })
}

fn project_in_place(amps: &mut [Complex64], qubit: usize, outcome: Outcome) {
    let bit = 1usize << (qubit - 1);
    let keep = match outcome {
        Outcome::Zero => 0,
        Outcome::One => bit,
    };
    for (idx, amp) in amps.iter_mut().enumerate() {
        if idx & bit != keep {
            *amp = Complex64::ZERO;
        }
    }
}

/// Measured-site Kraus operator `sqrt(p) |b><b|` on one qubit. A resulting
/// zero vector is legal and signals an incompatible outcome downstream.
pub fn apply_measurement_kraus(state: &StateVector, qubit: usize, outcome: Outcome, p: f64) -> StateVector {
    let mut amps = state.amps.clone();
    project_in_place(&mut amps, qubit, outcome);
    let s = p.sqrt();
    for amp in &mut amps {
        *amp *= s;
    }
    StateVector { n: state.n, amps }
}

/// Core sweep in the layer order of the circuit composition: for each
/// timestep, the gate layer then the measurement layer. Site scalars are
/// returned separately as `log_amp` (natural log of the accumulated
/// amplitude factor). An optional Pauli insertion multiplies `pauli` on the
/// left of gate `gate_id` (that is, immediately after it).
pub(crate) fn run_stripped(
    instance: &CircuitInstance,
    insertion: Option<(usize, &CMat4)>,
) -> Result<(Vec<Complex64>, f64)> {
    let n = instance.n();
    let t = instance.t();
    let state = StateVector::zero_state(n)?;
    let mut amps = state.amps;
    let mut log_amp = 0.0f64;
    let p = instance.p;

    for tau in 1..=t {
        for id in instance.layout.layer_placements(tau) {
            let g = &instance.gates[id];
            apply_gate_in_place(&mut amps, &g.u, g.pair.0, g.pair.1);
            if let Some((target, pauli)) = insertion {
                if target == id {
                    apply_gate_in_place(&mut amps, pauli, g.pair.0, g.pair.1);
                }
            }
        }
        for q in 1..=n {
            match instance.config.status(q, tau) {
                MeasurementStatus::Unmeasured => {
                    log_amp += 0.5 * (1.0 - p).ln();
                }
                MeasurementStatus::Measured(b) => {
                    project_in_place(&mut amps, q, b);
                    log_amp += 0.5 * p.ln();
                }
            }
        }
    }
    Ok((amps, log_amp))
}

/// Unnormalized output `V^M(t)|0^n>` and its Born weight.
pub fn run(instance: &CircuitInstance) -> Result<(StateVector, BornWeight)> {
    let (amps, log_amp) = run_stripped(instance, None)?;
    let scale = log_amp.exp();
    let raw: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let weight = raw * (2.0 * log_amp).exp();
    let folded = amps.into_iter().map(|z| z * scale).collect();
    Ok((StateVector { n: instance.n(), amps: folded }, BornWeight(weight)))
}

/// Unit-norm conditional output; errors when the outcome set is impossible.
pub fn normalized_output(instance: &CircuitInstance) -> Result<StateVector> {
    let (amps, _) = run_stripped(instance, None)?;
    let state = StateVector { n: instance.n(), amps };
    state.normalized()
}

/// Born-rule trajectory: at each site a measurement fires with probability
/// `p` and its outcome is drawn from the conditional distribution of the
/// current state. Returns the sampled configuration (weight > 0 by
/// construction) and the normalized final state.
pub fn sample_trajectory(
    layout: &BrickwallLayout,
    p: f64,
    gates: &[GateMatrix],
    stream: &StreamKey,
) -> Result<(MeasurementConfiguration, StateVector)> {
    let n = layout.n();
    let t = layout.t();
    if gates.len() != layout.gate_count() {
        return Err(Error::GateCountMismatch { got: gates.len(), want: layout.gate_count() });
    }
    let mut rng = stream.rng();
    let state = StateVector::zero_state(n)?;
    let mut amps = state.amps;
    let mut config = MeasurementConfiguration::all_unmeasured(n, t);

    for tau in 1..=t {
        for id in layout.layer_placements(tau) {
            let g = &gates[id];
            apply_gate_in_place(&mut amps, &g.u, g.pair.0, g.pair.1);
        }
        for q in 1..=n {
            if rng.random::<f64>() >= p {
                continue;
            }
            let bit = 1usize << (q - 1);
            let total: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
            let w0: f64 = amps
                .iter()
                .enumerate()
                .filter(|(i, _)| i & bit == 0)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            let prob0 = (w0 / total).clamp(0.0, 1.0);
            let outcome = if rng.random::<f64>() < prob0 { Outcome::Zero } else { Outcome::One };
            project_in_place(&mut amps, q, outcome);
            let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
            let s = 1.0 / norm.sqrt();
            for a in &mut amps {
                *a *= s;
            }
            config.set_status(q, tau, MeasurementStatus::Measured(outcome));
        }
    }
    let out = StateVector { n, amps };
    Ok((config, out.normalized()?))
}

/// Schmidt rank across the cut `{1..=cut} | {cut+1..=n}`: singular values
/// of the reshaped amplitude matrix above `tol * sigma_max`.
pub fn schmidt_rank(state: &StateVector, cut: usize, tol: f64) -> usize {
    assert!(cut >= 1 && cut < state.n, "cut position out of range");
    let rows = 1usize << cut;
    let cols = 1usize << (state.n - cut);
    let m = DMatrix::from_fn(rows, cols, |r, c| state.amps[r + (c << cut)]);
    let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top = sv[0];
    if top <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{
        normalize_outcomes_to_zero, sample_gates, sample_haar_su4, BrickwallLayout,
        CircuitInstance, SamplingMode,
    };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn swap_gate() -> CMat4 {
        CMat4::from_row_slice(&[
            c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0),
        ])
    }

    fn cnot_gate() -> CMat4 {
        // Control = first pair qubit (high bit of the local basis).
        CMat4::from_row_slice(&[
            c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
        ])
    }

    fn basis(n: usize, bits: &[u8]) -> StateVector {
        // bits[i] is the state of qubit i+1.
        let mut idx = 0usize;
        for (i, &b) in bits.iter().enumerate() {
            idx |= (b as usize) << i;
        }
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[idx] = Complex64::ONE;
        StateVector::from_amplitudes(n, amps)
    }

    #[test]
    fn identity_gate_is_noop() {
        let s = basis(2, &[1, 0]);
        let g = GateMatrix::identity((1, 2));
        let out = apply_two_qubit_gate(&s, &g, 1, 2).unwrap();
        assert_eq!(out.amplitudes(), s.amplitudes());
    }

    #[test]
    fn swap_maps_01_to_10() {
        // |01> means qubit1=0, qubit2=1.
        let s = basis(2, &[0, 1]);
        let g = GateMatrix::new(swap_gate(), (1, 2));
        let out = apply_two_qubit_gate(&s, &g, 1, 2).unwrap();
        assert_eq!(out.amp(0b01), Complex64::ONE); // qubit1=1, qubit2=0
        assert_eq!(out.amp(0b10), Complex64::ZERO);
    }

    #[test]
    fn cnot_control_a_on_10() {
        // |q_a q_b> = |10>: control set, so target flips: |11>.
        let s = basis(2, &[1, 0]);
        let g = GateMatrix::new(cnot_gate(), (1, 2));
        let out = apply_two_qubit_gate(&s, &g, 1, 2).unwrap();
        assert_eq!(out.amp(0b11), Complex64::ONE);
    }

    #[test]
    fn gate_preserves_norm() {
        let g = sample_haar_su4(&StreamKey::new(4));
        let mut s = basis(3, &[0, 0, 0]);
        for (a, b) in [(1, 2), (2, 3), (1, 3)] {
            s = apply_two_qubit_gate(&s, &g, a, b).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kraus_on_plus_state() {
        let amps = vec![c(1.0 / f64::sqrt(2.0), 0.0); 2];
        let s = StateVector::from_amplitudes(1, amps);
        let out = apply_measurement_kraus(&s, 1, Outcome::Zero, 0.5);
        assert!((out.amp(0) - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(out.amp(1), Complex64::ZERO);
    }

    #[test]
    fn kraus_orthogonal_outcome_gives_zero_vector() {
        let s = basis(1, &[0]);
        let out = apply_measurement_kraus(&s, 1, Outcome::One, 0.7);
        assert_eq!(out.norm_sqr(), 0.0);
    }

    #[test]
    fn kraus_projects_bell_component() {
        let mut amps = vec![Complex64::ZERO; 4];
        amps[0b00] = Complex64::ONE;
        amps[0b11] = Complex64::ONE;
        let s = StateVector::from_amplitudes(2, amps);
        let out = apply_measurement_kraus(&s, 1, Outcome::Zero, 1.0);
        assert_eq!(out.amp(0b00), Complex64::ONE);
        assert_eq!(out.amp(0b11), Complex64::ZERO);
    }

    #[test]
    fn run_identity_no_measurements() {
        let layout = BrickwallLayout::new(4, 4).unwrap();
        let config = MeasurementConfiguration::all_unmeasured(4, 4);
        let inst = CircuitInstance::identity_gates(layout, config, 0.0).unwrap();
        let (state, w) = run(&inst).unwrap();
        assert!((w.0 - 1.0).abs() < 1e-12);
        assert!((state.amp(0) - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn run_hand_weight_n2_t2() {
        // Identity gates, qubit 1 measured 0 at tau=1, rest unmeasured:
        // weight p(1-p)^3 and the output points along |00>.
        let p = 0.3;
        let layout = BrickwallLayout::new(2, 2).unwrap();
        let mut config = MeasurementConfiguration::all_unmeasured(2, 2);
        config.set_status(1, 1, MeasurementStatus::Measured(Outcome::Zero));
        let inst = CircuitInstance::identity_gates(layout, config, p).unwrap();
        let (state, w) = run(&inst).unwrap();
        let expect = p * (1.0 - p).powi(3);
        assert!((w.0 - expect).abs() < 1e-12, "weight {} vs {}", w.0, expect);
        let normed = state.normalized().unwrap();
        assert!((normed.amp(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_weights_sum_to_one() {
        // n=2, t=2, fixed Haar gates: all 3^4 site assignments.
        let layout = BrickwallLayout::new(2, 2).unwrap();
        let gates = sample_gates(&layout, &StreamKey::new(99));
        let p = 0.37;
        let statuses = [
            MeasurementStatus::Unmeasured,
            MeasurementStatus::Measured(Outcome::Zero),
            MeasurementStatus::Measured(Outcome::One),
        ];
        let mut total = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    for d in 0..3 {
                        let mut config = MeasurementConfiguration::all_unmeasured(2, 2);
                        config.set_status(1, 1, statuses[a]);
                        config.set_status(2, 1, statuses[b]);
                        config.set_status(1, 2, statuses[cc]);
                        config.set_status(2, 2, statuses[d]);
                        let inst = CircuitInstance::new(
                            layout.clone(),
                            gates.clone(),
                            config,
                            p,
                        )
                        .unwrap();
                        let (_, w) = run(&inst).unwrap();
                        total += w.0;
                    }
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-10, "sum {total}");
    }

    #[test]
    fn run_invariant_under_same_layer_reordering() {
        let inst =
            CircuitInstance::sample(6, 4, 0.2, SamplingMode::StructuralZero, &StreamKey::new(17))
                .unwrap();
        let (s1, w1) = run(&inst).unwrap();
        // Reverse the gate order within each layer (disjoint supports).
        let mut rev = inst.clone();
        let layout = rev.layout.clone();
        for tau in 1..=rev.t() {
            let ids: Vec<usize> = layout.layer_placements(tau).collect();
            let mut gs: Vec<GateMatrix> = ids.iter().map(|&i| rev.gates[i].clone()).collect();
            gs.reverse();
            for (&i, g) in ids.iter().zip(gs) {
                rev.gates[i] = g;
            }
        }
        let (s2, w2) = run(&rev).unwrap();
        assert!((w1.0 - w2.0).abs() < 1e-12);
        for (a, b) in s1.amplitudes().iter().zip(s2.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn trajectory_p0_all_unmeasured() {
        let layout = BrickwallLayout::new(4, 4).unwrap();
        let gates = sample_gates(&layout, &StreamKey::new(1));
        let (config, _) = sample_trajectory(&layout, 0.0, &gates, &StreamKey::new(2)).unwrap();
        assert_eq!(config.measured_count(), 0);
    }

    #[test]
    fn trajectory_p1_identity_gates_all_zero() {
        let layout = BrickwallLayout::new(4, 4).unwrap();
        let gates: Vec<GateMatrix> = layout
            .placements()
            .iter()
            .map(|pl| GateMatrix::identity(pl.pair))
            .collect();
        let (config, state) = sample_trajectory(&layout, 1.0, &gates, &StreamKey::new(2)).unwrap();
        assert_eq!(config.measured_count(), 16);
        for tau in 1..=4 {
            for q in 1..=4 {
                assert_eq!(config.status(q, tau), MeasurementStatus::Measured(Outcome::Zero));
            }
        }
        assert!((state.amp(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trajectory_outcome_marginal_matches_gate_column() {
        // Single Haar gate on (1,2) at n=2, then measure qubit 1 at p=1 in
        // layer 1: outcome-0 frequency must match the analytic marginal.
        let layout = BrickwallLayout::new(2, 2).unwrap();
        let g = sample_haar_su4(&StreamKey::new(31)).on((1, 2));
        // After U|00>, amplitudes are the first column of U in the local
        // basis |q1 q2> with q1 the high bit; qubit1 = 0 selects rows 0, 1.
        let p0 = g.u[(0, 0)].norm_sqr() + g.u[(1, 0)].norm_sqr();
        let gates = vec![g];
        let trials = 10_000;
        let root = StreamKey::new(55);
        let mut zeros = 0usize;
        for k in 0..trials {
            let (config, _) =
                sample_trajectory(&layout, 1.0, &gates, &root.derive(k as u64)).unwrap();
            if config.status(1, 1) == MeasurementStatus::Measured(Outcome::Zero) {
                zeros += 1;
            }
        }
        let freq = zeros as f64 / trials as f64;
        let sigma = (p0 * (1.0 - p0) / trials as f64).sqrt();
        assert!(
            (freq - p0).abs() < 3.0 * sigma + 1e-9,
            "freq {freq} vs p0 {p0} (sigma {sigma})"
        );
    }

    #[test]
    fn schmidt_rank_examples() {
        let product = basis(2, &[0, 1]);
        assert_eq!(schmidt_rank(&product, 1, 1e-9), 1);

        let mut amps = vec![Complex64::ZERO; 4];
        amps[0b00] = c(1.0 / f64::sqrt(2.0), 0.0);
        amps[0b11] = c(1.0 / f64::sqrt(2.0), 0.0);
        let bell = StateVector::from_amplitudes(2, amps);
        assert_eq!(schmidt_rank(&bell, 1, 1e-9), 2);

        // GHZ on n=4, cut 2.
        let mut amps = vec![Complex64::ZERO; 16];
        amps[0b0000] = c(1.0 / f64::sqrt(2.0), 0.0);
        amps[0b1111] = c(1.0 / f64::sqrt(2.0), 0.0);
        let ghz = StateVector::from_amplitudes(4, amps);
        assert_eq!(schmidt_rank(&ghz, 2, 1e-9), 2);
    }

    #[test]
    fn normalized_output_zero_weight_errors() {
        let layout = BrickwallLayout::new(2, 2).unwrap();
        let mut config = MeasurementConfiguration::all_unmeasured(2, 2);
        config.set_status(1, 1, MeasurementStatus::Measured(Outcome::One));
        let inst = CircuitInstance::identity_gates(layout, config, 0.4).unwrap();
        assert!(matches!(normalized_output(&inst), Err(Error::ZeroWeight)));
    }

    #[test]
    fn outcome_normalization_reproduces_output() {
        // Born-sampled outcomes (weight > 0), then rewrite outcomes to zero
        // and check the outputs agree after applying the recorded flips.
        let layout = BrickwallLayout::new(4, 6).unwrap();
        let gates = sample_gates(&layout, &StreamKey::new(7));
        let p = 0.45;
        for trial in 0..10 {
            let (config, _) =
                sample_trajectory(&layout, p, &gates, &StreamKey::new(100 + trial)).unwrap();
            let inst = CircuitInstance::new(layout.clone(), gates.clone(), config, p).unwrap();
            let norm = normalize_outcomes_to_zero(&inst);
            assert_eq!(norm.degenerate_conflicts, 0);
            let (orig, w_orig) = run(&inst).unwrap();
            let (rewritten, w_new) = run(&norm.instance).unwrap();
            assert!((w_orig.0 - w_new.0).abs() <= 1e-12 * w_orig.0.max(1e-300));
            let mut fixed = rewritten;
            for (q0, flip) in norm.output_flips.iter().enumerate() {
                if *flip {
                    fixed = fixed.with_x(q0 + 1);
                }
            }
            let f = orig.normalized().unwrap().fidelity(&fixed.normalized().unwrap());
            assert!(f > 1.0 - 1e-10, "trial {trial}: fidelity {f}");
        }
    }

    #[test]
    fn qubit_cap_enforced() {
        assert!(matches!(
            StateVector::zero_state(max_qubits() + 1),
            Err(Error::QubitCapExceeded { .. })
        ));
    }
}
