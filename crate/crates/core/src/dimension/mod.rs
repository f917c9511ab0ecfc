//! Accessible-dimension estimation: the real-span rank of Pauli-perturbed
//! circuit outputs, the complexity-bound formulas derived from it, the
//! projector monotonicity check, and the Clifford lower-bound circuits.

pub mod clifford;
pub mod pauli;

pub use clifford::{
    build_lower_bound_clifford, embed_as_instance, max_blocks, pauli_propagate, CliffordBlock,
    CliffordCircuit,
};
pub use pauli::{CliffordGate, PauliString};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{CircuitInstance, CMat4, MeasurementConfiguration, MeasurementStatus, Outcome};
use crate::engine;
use crate::gates;
use crate::stream::StreamKey;
use crate::Result;

/// Default relative SVD tolerance; genuine rank gaps in small instances
/// exceed 10^6, so this sits comfortably inside the gap.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Which Pauli insertions parametrize the perturbation columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PauliFamily {
    /// All 15 non-identity pairs per gate.
    Full15,
    /// Single-qubit insertions only: (I, s) and (s, I) for s in {X, Y, Z}.
    SingleQubit6,
}

impl PauliFamily {
    pub fn pairs(self) -> Vec<(u8, u8)> {
        match self {
            PauliFamily::Full15 => (0u8..4)
                .flat_map(|a| (0u8..4).map(move |b| (a, b)))
                .filter(|&(a, b)| (a, b) != (0, 0))
                .collect(),
            PauliFamily::SingleQubit6 => {
                vec![(0, 1), (0, 2), (0, 3), (1, 0), (2, 0), (3, 0)]
            }
        }
    }

    pub fn columns_per_gate(self) -> usize {
        match self {
            PauliFamily::Full15 => 15,
            PauliFamily::SingleQubit6 => 6,
        }
    }
}

/// One perturbation: insert `alpha (x) beta` immediately after gate `gate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerturbationIndex {
    pub gate: usize,
    pub alpha: u8,
    pub beta: u8,
    pub family: PauliFamily,
}

pub fn enumerate_perturbations(gate_count: usize, family: PauliFamily) -> Vec<PerturbationIndex> {
    let pairs = family.pairs();
    (0..gate_count)
        .flat_map(|gate| pairs.iter().map(move |&(alpha, beta)| PerturbationIndex { gate, alpha, beta, family }))
        .collect()
}

fn pauli_pair_matrix(alpha: u8, beta: u8) -> CMat4 {
    gates::kron(&gates::single_pauli(alpha), &gates::single_pauli(beta))
}

/// The perturbed outputs as complex columns. Columns share the instance's
/// scalar site factors, which are dropped: a common positive factor does
/// not change the real span.
pub fn perturbed_output_columns(
    instance: &CircuitInstance,
    family: PauliFamily,
) -> Result<Vec<Vec<Complex64>>> {
    let perturbations = enumerate_perturbations(instance.layout.gate_count(), family);
    perturbations
        .par_iter()
        .map(|pert| {
            let pauli = pauli_pair_matrix(pert.alpha, pert.beta);
            let (amps, _) = engine::run_stripped(instance, Some((pert.gate, &pauli)))?;
            Ok(amps)
        })
        .collect()
}

/// Real matrix with `2^(n+1)` rows (real parts stacked over imaginary
/// parts) and one column per perturbation.
#[derive(Debug, Clone)]
pub struct RealifiedMatrix {
    pub matrix: DMatrix<f64>,
    pub family: PauliFamily,
    pub n: usize,
    pub gate_count: usize,
}

pub fn realify(n: usize, columns: &[Vec<Complex64>]) -> DMatrix<f64> {
    let dim = 1usize << n;
    DMatrix::from_fn(2 * dim, columns.len(), |r, c| {
        if r < dim {
            columns[c][r].re
        } else {
            columns[c][r - dim].im
        }
    })
}

pub fn perturbed_outputs(instance: &CircuitInstance, family: PauliFamily) -> Result<RealifiedMatrix> {
    let columns = perturbed_output_columns(instance, family)?;
    Ok(RealifiedMatrix {
        matrix: realify(instance.n(), &columns),
        family,
        n: instance.n(),
        gate_count: instance.layout.gate_count(),
    })
}

/// Numerical rank via singular-value thresholding.
#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub tol: f64,
    /// False when no factor-10^3 spectral gap brackets the threshold:
    /// the rank is then poorly conditioned and should be treated as a
    /// diagnostic warning.
    pub gap_ok: bool,
    pub singular_values: Vec<f64>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub t: Option<usize>,
    pub gate_count: Option<usize>,
    pub family: Option<PauliFamily>,
}

impl RankReport {
    /// JSON with the spectrum truncated to the leading `k` values.
    pub fn to_json(&self, k: usize) -> Result<String> {
        let mut trimmed = self.clone();
        trimmed.singular_values.truncate(k);
        Ok(serde_json::to_string(&trimmed)?)
    }
}

pub fn numerical_rank(matrix: &DMatrix<f64>, tol: f64) -> RankReport {
    assert!(tol > 0.0 && tol < 1.0);
    let mut sv: Vec<f64> = matrix
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = if top <= 0.0 { 0 } else { sv.iter().filter(|&&s| s > tol * top).count() };
    let gap_ok = if rank == 0 || rank == sv.len() {
        true
    } else {
        sv[rank] <= 0.0 || sv[rank - 1] / sv[rank] >= 1e3
    };
    RankReport {
        rank,
        tol,
        gap_ok,
        singular_values: sv,
        seed: None,
        n: None,
        t: None,
        gate_count: None,
        family: None,
    }
}

/// Rank of the perturbation span at one gate tuple.
pub fn rank_at(instance: &CircuitInstance, family: PauliFamily, tol: f64) -> Result<RankReport> {
    let realified = perturbed_outputs(instance, family)?;
    let mut report = numerical_rank(&realified.matrix, tol);
    report.n = Some(instance.n());
    report.t = Some(instance.t());
    report.gate_count = Some(instance.layout.gate_count());
    report.family = Some(family);
    Ok(report)
}

/// Estimate of the accessible dimension `d_M`: the maximum numerical rank
/// over `samples` independent Haar gate tuples. Generic gate tuples attain
/// the maximal rank, so every sample is a certified lower bound on `d_M`
/// and the estimate is monotone in `samples`.
pub fn estimate_accessible_dimension(
    config: &MeasurementConfiguration,
    samples: usize,
    stream: &StreamKey,
) -> Result<RankReport> {
    estimate_with(config, PauliFamily::Full15, samples, DEFAULT_TOL, stream)
}

pub fn estimate_with(
    config: &MeasurementConfiguration,
    family: PauliFamily,
    samples: usize,
    tol: f64,
    stream: &StreamKey,
) -> Result<RankReport> {
    assert!(samples >= 1);
    let layout = crate::circuit::BrickwallLayout::new(config.n(), config.t())?;
    let mut best: Option<RankReport> = None;
    for s in 0..samples {
        let key = stream.derive(s as u64);
        let gates = crate::circuit::sample_gates(&layout, &key);
        // The measurement rate only scales the dropped site factors; 0.5 is
        // a placeholder.
        let instance = CircuitInstance::new(layout.clone(), gates, config.clone(), 0.5)?;
        let mut report = rank_at(&instance, family, tol)?;
        report.seed = Some(key.master());
        if best.as_ref().is_none_or(|b| report.rank > b.rank) {
            best = Some(report);
        }
    }
    Ok(best.expect("samples >= 1"))
}

/// Lemma-style complexity lower bounds from a dimension estimate, both
/// printed constants, clamped at zero.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CmLowerBound {
    /// `(d - 3n - 2) / 13`.
    pub by13: f64,
    /// `(d - 3n - 2) / 11`.
    pub by11: f64,
}

pub fn cm_lower_bound(d: usize, n: usize) -> CmLowerBound {
    let numerator = d as f64 - 3.0 * n as f64 - 2.0;
    CmLowerBound { by13: (numerator / 13.0).max(0.0), by11: (numerator / 11.0).max(0.0) }
}

/// Dimension bound for a post-selected circuit with `r_prime` gates and
/// `m` measurements: the exact count `9R' + m + 3n` and the relaxation
/// `11R' + 3n`.
pub fn short_circuit_dim_bound(r_prime: usize, m: usize, n: usize) -> Result<(usize, usize)> {
    if m > 2 * r_prime {
        return Err(crate::error::Error::InvalidConfig(format!(
            "measurement count {m} exceeds 2R' = {}",
            2 * r_prime
        )));
    }
    Ok((9 * r_prime + m + 3 * n, 11 * r_prime + 3 * n))
}

#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub base: RankReport,
    pub augmented: RankReport,
    pub pass: bool,
}

/// Adds a projector (outcome 0) at an unmeasured site and checks that the
/// dimension estimate does not increase, with gate samples matched by seed.
pub fn projector_monotonicity_test(
    config: &MeasurementConfiguration,
    site: (usize, usize),
    samples: usize,
    stream: &StreamKey,
) -> Result<MonotonicityReport> {
    let (q, tau) = site;
    assert!(
        !config.status(q, tau).is_measured(),
        "extra site must be unmeasured in the base configuration"
    );
    let mut augmented_config = config.clone();
    augmented_config.set_status(q, tau, MeasurementStatus::Measured(Outcome::Zero));
    let base = estimate_accessible_dimension(config, samples, stream)?;
    let augmented = estimate_accessible_dimension(&augmented_config, samples, stream)?;
    let pass = augmented.rank <= base.rank;
    Ok(MonotonicityReport { base, augmented, pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct D0Report {
    /// Measured rank of the embedded construction.
    pub rank: usize,
    /// Growth bound `floor(2t / 3n)`.
    pub bound: usize,
    /// Saturation cap `2 * 2^n - 1`.
    pub cap: usize,
    /// Blocks actually built.
    pub blocks: usize,
    pub pass: bool,
}

/// Builds the Gray-code Clifford circuit sized for depth `t`, embeds it as
/// a measurement-free instance, and checks the single-qubit-perturbation
/// rank against `floor(2t/3n)` capped at the saturation value `2*2^n - 1`.
pub fn verify_d0_growth(n: usize, t: usize) -> Result<D0Report> {
    let bound = 2 * t / (3 * n);
    let cap = max_blocks(n);
    let mut blocks = bound.clamp(1, cap);
    let (instance, _slots) = loop {
        let circuit = build_lower_bound_clifford(n, blocks)?;
        match embed_as_instance(&circuit, t) {
            Ok(pair) => break pair,
            Err(crate::error::Error::DepthExceeded { .. }) if blocks > 1 => {
                blocks -= 1;
            }
            Err(e) => return Err(e),
        }
    };
    let report = rank_at(&instance, PauliFamily::SingleQubit6, DEFAULT_TOL)?;
    let rank = report.rank;
    let pass = rank >= bound.min(cap) && rank <= cap;
    Ok(D0Report { rank, bound, cap, blocks, pass })
}

/// Convenience: an everywhere-unmeasured configuration.
pub fn unmeasured_config(n: usize, t: usize) -> MeasurementConfiguration {
    MeasurementConfiguration::all_unmeasured(n, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{sample_measurement_configuration, BrickwallLayout, SamplingMode};

    #[test]
    fn perturbation_counts() {
        assert_eq!(enumerate_perturbations(1, PauliFamily::Full15).len(), 15);
        assert_eq!(enumerate_perturbations(3, PauliFamily::SingleQubit6).len(), 18);
    }

    #[test]
    fn identity_gate_z_perturbation_is_unperturbed_output() {
        // Z (x) I after an identity gate on |00> leaves |00>.
        let layout = BrickwallLayout::new(2, 2).unwrap();
        let config = MeasurementConfiguration::all_unmeasured(2, 2);
        let instance = CircuitInstance::identity_gates(layout, config, 0.0).unwrap();
        let cols = perturbed_output_columns(&instance, PauliFamily::Full15).unwrap();
        // Pair order: (0,1)=IX, (0,2)=IY, (0,3)=IZ, (1,0)=XI, ...
        let iz = &cols[2]; // (I, Z): Z on the second pair qubit
        assert!((iz[0] - Complex64::ONE).norm() < 1e-14);
        let xi = &cols[3 + 0]; // (X, I): X on qubit 1 -> |10> = index 1
        assert!((xi[1] - Complex64::ONE).norm() < 1e-14);
        assert!(xi[0].norm() < 1e-14);
    }

    #[test]
    fn zero_matrix_rank() {
        let m = DMatrix::<f64>::zeros(8, 5);
        assert_eq!(numerical_rank(&m, 1e-9).rank, 0);
    }

    #[test]
    fn duplicated_column_does_not_change_rank() {
        let config = MeasurementConfiguration::all_unmeasured(2, 2);
        let layout = BrickwallLayout::new(2, 2).unwrap();
        let gates = crate::circuit::sample_gates(&layout, &StreamKey::new(3));
        let instance = CircuitInstance::new(layout, gates, config, 0.0).unwrap();
        let cols = perturbed_output_columns(&instance, PauliFamily::Full15).unwrap();
        let base = numerical_rank(&realify(2, &cols), 1e-9).rank;
        let mut doubled = cols.clone();
        doubled.push(cols[0].clone());
        let with_dup = numerical_rank(&realify(2, &doubled), 1e-9).rank;
        assert_eq!(base, with_dup);
    }

    #[test]
    fn single_haar_gate_rank_is_seven() {
        // Analytic cross-check: the span is {v : Im <psi|v> = 0}, of real
        // dimension 2*4 - 1 = 7.
        let layout = BrickwallLayout::new(2, 2).unwrap();
        let config = MeasurementConfiguration::all_unmeasured(2, 2);
        let gates = crate::circuit::sample_gates(&layout, &StreamKey::new(12));
        let instance = CircuitInstance::new(layout, gates, config, 0.0).unwrap();
        let (psi, _) = engine::run(&instance).unwrap();
        let cols = perturbed_output_columns(&instance, PauliFamily::Full15).unwrap();
        for col in &cols {
            let overlap: Complex64 = psi
                .amplitudes()
                .iter()
                .zip(col)
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!(overlap.im.abs() < 1e-10, "Im overlap {}", overlap.im);
        }
        let report = numerical_rank(&realify(2, &cols), 1e-9);
        assert_eq!(report.rank, 7);
        assert!(report.gap_ok);
    }

    #[test]
    fn rank_invariant_under_global_phase() {
        let layout = BrickwallLayout::new(4, 4).unwrap();
        let config = sample_measurement_configuration(
            4,
            4,
            0.3,
            SamplingMode::StructuralZero,
            &StreamKey::new(5),
        );
        let gates = crate::circuit::sample_gates(&layout, &StreamKey::new(6));
        let instance = CircuitInstance::new(layout, gates, config, 0.3).unwrap();
        let cols = perturbed_output_columns(&instance, PauliFamily::Full15).unwrap();
        let base = numerical_rank(&realify(4, &cols), 1e-9).rank;
        let phase = Complex64::from_polar(1.0, 0.7342);
        let rotated: Vec<Vec<Complex64>> = cols
            .iter()
            .map(|col| col.iter().map(|z| z * phase).collect())
            .collect();
        let rot = numerical_rank(&realify(4, &rotated), 1e-9).rank;
        assert_eq!(base, rot);
    }

    #[test]
    fn estimate_saturates_unmeasured_n2() {
        let config = MeasurementConfiguration::all_unmeasured(2, 2);
        let report = estimate_accessible_dimension(&config, 1, &StreamKey::new(9)).unwrap();
        assert_eq!(report.rank, 7);
    }

    #[test]
    fn estimate_monotone_in_samples() {
        let config = sample_measurement_configuration(
            4,
            4,
            0.4,
            SamplingMode::StructuralZero,
            &StreamKey::new(10),
        );
        let one = estimate_accessible_dimension(&config, 1, &StreamKey::new(11)).unwrap();
        let two = estimate_accessible_dimension(&config, 2, &StreamKey::new(11)).unwrap();
        assert!(two.rank >= one.rank);
    }

    #[test]
    fn everywhere_measured_estimate_is_a_complex_ray() {
        // The output is a fixed basis ray; its real span has dimension at
        // most 2 (the ray and i times it).
        let config = sample_measurement_configuration(
            4,
            4,
            1.0,
            SamplingMode::StructuralZero,
            &StreamKey::new(2),
        );
        let report = estimate_accessible_dimension(&config, 2, &StreamKey::new(3)).unwrap();
        assert!(report.rank <= 2, "rank {}", report.rank);
    }

    #[test]
    fn rank_bounded_by_rows_and_columns() {
        let config = sample_measurement_configuration(
            4,
            6,
            0.2,
            SamplingMode::StructuralZero,
            &StreamKey::new(31),
        );
        let report = estimate_accessible_dimension(&config, 1, &StreamKey::new(32)).unwrap();
        let r = report.gate_count.unwrap();
        assert!(report.rank <= (2usize << 4).min(15 * r));
    }

    #[test]
    fn cm_lower_bound_values() {
        let b = cm_lower_bound(3 * 2 + 2, 2);
        assert_eq!(b.by13, 0.0);
        assert_eq!(b.by11, 0.0);
        let b = cm_lower_bound(28, 2);
        assert!((b.by13 - 20.0 / 13.0).abs() < 1e-12);
        assert!((b.by11 - 20.0 / 11.0).abs() < 1e-12);
        let b = cm_lower_bound(0, 4);
        assert_eq!(b.by13, 0.0);
    }

    #[test]
    fn short_circuit_bound_values() {
        assert_eq!(short_circuit_dim_bound(1, 0, 2).unwrap(), (15, 17));
        assert_eq!(short_circuit_dim_bound(2, 4, 4).unwrap(), (34, 34));
        assert_eq!(short_circuit_dim_bound(0, 0, 2).unwrap(), (6, 6));
        assert!(short_circuit_dim_bound(1, 3, 2).is_err());
    }

    #[test]
    fn monotonicity_on_fully_measured() {
        let mut config = sample_measurement_configuration(
            2,
            2,
            1.0,
            SamplingMode::StructuralZero,
            &StreamKey::new(4),
        );
        config.set_status(1, 1, MeasurementStatus::Unmeasured);
        let report =
            projector_monotonicity_test(&config, (1, 1), 1, &StreamKey::new(5)).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn d0_growth_small_cases() {
        // (n=2, t=6): bound floor(12/6) = 2.
        let r = verify_d0_growth(2, 6).unwrap();
        assert_eq!(r.bound, 2);
        assert!(r.pass, "{r:?}");
        // (n=4, t=12): bound floor(24/12) = 2.
        let r = verify_d0_growth(4, 12).unwrap();
        assert_eq!(r.bound, 2);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn d0_saturates_at_cap_for_n2() {
        // n=2, t=24: bound 8 exceeds the cap 7; the construction saturates.
        let r = verify_d0_growth(2, 24).unwrap();
        assert_eq!(r.cap, 7);
        assert!(r.rank <= r.cap);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn rank_report_json_truncates() {
        let m = DMatrix::<f64>::identity(4, 4);
        let report = numerical_rank(&m, 1e-9);
        let s = report.to_json(2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["singular_values"].as_array().unwrap().len(), 2);
        assert_eq!(v["rank"], 4);
    }
}
