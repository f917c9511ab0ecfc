//! The monitored-circuit model: brick-wall layout, SU(4) gates, and
//! measurement configurations.
//!
//! Conventions: qubits `1..=n` and timesteps `1..=t` are 1-based in the API.
//! Serialized forms are 0-based (see [`MeasurementConfiguration::to_json`]).
//! Odd layers pair `(2i-1, 2i)`, even layers pair `(2i, 2i+1)`; boundary
//! qubits 1 and n carry no gate in even layers but still have measurement
//! sites there.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::stream::StreamKey;
use crate::Result;

pub type CMat4 = Matrix4<Complex64>;

/// One two-qubit gate slot: layer index and the (lower, upper) qubit pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub layer: usize,
    pub pair: (usize, usize),
}

/// Brick-wall gate layout for an `n`-qubit, depth-`t` circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrickwallLayout {
    n: usize,
    t: usize,
    placements: Vec<Placement>,
    // [layer][qubit] -> placement id, both 1-based (index 0 unused).
    by_site: Vec<Vec<Option<usize>>>,
}

/// `build_layout` in operation form.
pub fn build_layout(n: usize, t: usize) -> Result<BrickwallLayout> {
    BrickwallLayout::new(n, t)
}

impl BrickwallLayout {
    pub fn new(n: usize, t: usize) -> Result<Self> {
        if n < 2 || t < 2 || n % 2 != 0 || t % 2 != 0 {
            return Err(Error::InvalidLayout { n, t });
        }
        let mut placements = Vec::new();
        let mut by_site = vec![vec![None; n + 1]; t + 1];
        for layer in 1..=t {
            if layer % 2 == 1 {
                for i in 1..=n / 2 {
                    let pair = (2 * i - 1, 2 * i);
                    by_site[layer][pair.0] = Some(placements.len());
                    by_site[layer][pair.1] = Some(placements.len());
                    placements.push(Placement { layer, pair });
                }
            } else {
                for i in 1..n / 2 {
                    let pair = (2 * i, 2 * i + 1);
                    by_site[layer][pair.0] = Some(placements.len());
                    by_site[layer][pair.1] = Some(placements.len());
                    placements.push(Placement { layer, pair });
                }
            }
        }
        debug_assert_eq!(placements.len(), (t / 2) * (n - 1));
        Ok(BrickwallLayout { n, t, placements, by_site })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Total gate count `R = (t/2)(n-1)`.
    pub fn gate_count(&self) -> usize {
        self.placements.len()
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn placement(&self, id: usize) -> Placement {
        self.placements[id]
    }

    /// Placement id of the gate acting on `qubit` in `layer`, if any.
    pub fn gate_at(&self, layer: usize, qubit: usize) -> Option<usize> {
        self.by_site[layer][qubit]
    }

    /// Placement ids of one layer, in pair order.
    pub fn layer_placements(&self, layer: usize) -> impl Iterator<Item = usize> + '_ {
        let lo = self
            .placements
            .partition_point(|p| p.layer < layer);
        let hi = self.placements.partition_point(|p| p.layer <= layer);
        lo..hi
    }
}

/// Measurement outcome bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Zero,
    One,
}

impl Outcome {
    pub fn bit(self) -> u8 {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
        }
    }

    pub fn from_bit(b: u8) -> Self {
        if b == 0 {
            Outcome::Zero
        } else {
            Outcome::One
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Zero => Outcome::One,
            Outcome::One => Outcome::Zero,
        }
    }
}

/// Per-site status: unmeasured, or measured with a recorded outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurementStatus {
    Unmeasured,
    Measured(Outcome),
}

impl MeasurementStatus {
    pub fn is_measured(self) -> bool {
        matches!(self, MeasurementStatus::Measured(_))
    }
}

/// How `sample_measurement_configuration` fills in outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Every measured site gets outcome 0 (the structural convention used
    /// by percolation and rank analyses).
    StructuralZero,
    /// Only the measured/unmeasured pattern is drawn here; outcomes are
    /// placeholders (0) to be overwritten by Born-rule trajectory sampling.
    OutcomeDeferred,
}

/// The full record of which sites are measured and with what outcomes:
/// a grid over (qubit `1..=n`, timestep `1..=t`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementConfiguration {
    n: usize,
    t: usize,
    grid: Vec<MeasurementStatus>,
}

const CONFIG_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SiteRecord {
    q: usize,
    tau: usize,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    outcome: Option<u8>,
}

#[derive(Serialize, Deserialize)]
struct ConfigFile {
    version: u32,
    n: usize,
    t: usize,
    sites: Vec<SiteRecord>,
}

impl MeasurementConfiguration {
    pub fn all_unmeasured(n: usize, t: usize) -> Self {
        MeasurementConfiguration { n, t, grid: vec![MeasurementStatus::Unmeasured; n * t] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    fn idx(&self, q: usize, tau: usize) -> usize {
        debug_assert!(q >= 1 && q <= self.n && tau >= 1 && tau <= self.t);
        (tau - 1) * self.n + (q - 1)
    }

    pub fn status(&self, q: usize, tau: usize) -> MeasurementStatus {
        self.grid[self.idx(q, tau)]
    }

    pub fn set_status(&mut self, q: usize, tau: usize, s: MeasurementStatus) {
        let i = self.idx(q, tau);
        self.grid[i] = s;
    }

    /// Number of measured sites, the paper's `|M|`.
    pub fn measured_count(&self) -> usize {
        self.grid.iter().filter(|s| s.is_measured()).count()
    }

    pub fn site_count(&self) -> usize {
        self.grid.len()
    }

    /// Copy with every measured site's outcome set to 0, statuses unchanged.
    #[must_use]
    pub fn with_outcomes_zeroed(&self) -> Self {
        let mut c = self.clone();
        for s in &mut c.grid {
            if let MeasurementStatus::Measured(_) = s {
                *s = MeasurementStatus::Measured(Outcome::Zero);
            }
        }
        c
    }

    /// Versioned JSON with 0-based `q` and `tau`, sites in (tau, q) order.
    pub fn to_json(&self) -> Result<String> {
        let sites = (1..=self.t)
            .flat_map(|tau| (1..=self.n).map(move |q| (q, tau)))
            .map(|(q, tau)| match self.status(q, tau) {
                MeasurementStatus::Unmeasured => SiteRecord {
                    q: q - 1,
                    tau: tau - 1,
                    status: "unmeasured".into(),
                    outcome: None,
                },
                MeasurementStatus::Measured(o) => SiteRecord {
                    q: q - 1,
                    tau: tau - 1,
                    status: "measured".into(),
                    outcome: Some(o.bit()),
                },
            })
            .collect();
        let file = ConfigFile { version: CONFIG_FORMAT_VERSION, n: self.n, t: self.t, sites };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(s)?;
        if file.version != CONFIG_FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported configuration format version {}",
                file.version
            )));
        }
        if file.sites.len() != file.n * file.t {
            return Err(Error::InvalidConfig(format!(
                "expected {} sites, got {}",
                file.n * file.t,
                file.sites.len()
            )));
        }
        let mut cfg = MeasurementConfiguration::all_unmeasured(file.n, file.t);
        for rec in &file.sites {
            if rec.q >= file.n || rec.tau >= file.t {
                return Err(Error::InvalidConfig(format!(
                    "site ({}, {}) out of range",
                    rec.q, rec.tau
                )));
            }
            let status = match rec.status.as_str() {
                "unmeasured" => MeasurementStatus::Unmeasured,
                "measured" => {
                    let bit = rec.outcome.ok_or_else(|| {
                        Error::InvalidConfig("measured site without outcome".into())
                    })?;
                    if bit > 1 {
                        return Err(Error::InvalidConfig(format!("bad outcome {bit}")));
                    }
                    MeasurementStatus::Measured(Outcome::from_bit(bit))
                }
                other => {
                    return Err(Error::InvalidConfig(format!("bad status {other:?}")));
                }
            };
            cfg.set_status(rec.q + 1, rec.tau + 1, status);
        }
        Ok(cfg)
    }
}

/// Independent Bernoulli(`p`) measurement pattern over all `n*t` sites.
pub fn sample_measurement_configuration(
    n: usize,
    t: usize,
    p: f64,
    mode: SamplingMode,
    stream: &StreamKey,
) -> MeasurementConfiguration {
    let _ = mode; // both modes record outcome 0 at measured sites
    let mut rng = stream.rng();
    let mut cfg = MeasurementConfiguration::all_unmeasured(n, t);
    for tau in 1..=t {
        for q in 1..=n {
            if rng.random::<f64>() < p {
                cfg.set_status(q, tau, MeasurementStatus::Measured(Outcome::Zero));
            }
        }
    }
    cfg
}

/// A 4x4 unitary assigned to a qubit pair. The matrix acts on the local
/// basis `|q_a q_b>` with the first pair qubit as the high bit.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    pub u: CMat4,
    pub pair: (usize, usize),
}

impl GateMatrix {
    pub fn new(u: CMat4, pair: (usize, usize)) -> Self {
        GateMatrix { u, pair }
    }

    pub fn identity(pair: (usize, usize)) -> Self {
        GateMatrix { u: CMat4::identity(), pair }
    }

    #[must_use]
    pub fn on(mut self, pair: (usize, usize)) -> Self {
        self.pair = pair;
        self
    }

    /// `max_ij |(U^dag U - I)_ij|`.
    pub fn unitarity_residual(&self) -> f64 {
        let m = self.u.adjoint() * self.u - CMat4::identity();
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> Complex64 {
        self.u.determinant()
    }
}

/// Exact-Haar SU(4) sample: QR of a complex Ginibre matrix with the R
/// diagonal phases divided out, then the determinant's principal fourth
/// root divided out.
pub fn sample_haar_su4(stream: &StreamKey) -> GateMatrix {
    let mut rng = stream.rng();
    let mut g = CMat4::zeros();
    for r in 0..4 {
        for c in 0..4 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(r, c)] = Complex64::new(re, im) / f64::sqrt(2.0);
        }
    }
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..4 {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..4 {
            q[(row, k)] *= phase;
        }
    }
    let det = q.determinant();
    let root = det.powf(0.25);
    q /= root;
    GateMatrix::new(q, (1, 2))
}

/// A fully specified monitored circuit: layout, one gate per placement,
/// the measurement configuration, and the measurement rate.
#[derive(Debug, Clone)]
pub struct CircuitInstance {
    pub layout: BrickwallLayout,
    pub gates: Vec<GateMatrix>,
    pub config: MeasurementConfiguration,
    pub p: f64,
}

impl CircuitInstance {
    pub fn new(
        layout: BrickwallLayout,
        gates: Vec<GateMatrix>,
        config: MeasurementConfiguration,
        p: f64,
    ) -> Result<Self> {
        if gates.len() != layout.gate_count() {
            return Err(Error::GateCountMismatch { got: gates.len(), want: layout.gate_count() });
        }
        if config.n() != layout.n() || config.t() != layout.t() {
            return Err(Error::ConfigDimsMismatch {
                n: config.n(),
                t: config.t(),
                ln: layout.n(),
                lt: layout.t(),
            });
        }
        Ok(CircuitInstance { layout, gates, config, p })
    }

    /// All-identity gates over a given configuration.
    pub fn identity_gates(
        layout: BrickwallLayout,
        config: MeasurementConfiguration,
        p: f64,
    ) -> Result<Self> {
        let gates = layout
            .placements()
            .iter()
            .map(|pl| GateMatrix::identity(pl.pair))
            .collect();
        CircuitInstance::new(layout, gates, config, p)
    }

    /// Haar gates from `stream/GATES/j` and a sampled configuration from
    /// `stream/SITES`.
    pub fn sample(
        n: usize,
        t: usize,
        p: f64,
        mode: SamplingMode,
        stream: &StreamKey,
    ) -> Result<Self> {
        let layout = BrickwallLayout::new(n, t)?;
        let gates = sample_gates(&layout, &stream.derive(crate::stream::purpose::GATES));
        let config = sample_measurement_configuration(
            n,
            t,
            p,
            mode,
            &stream.derive(crate::stream::purpose::SITES),
        );
        CircuitInstance::new(layout, gates, config, p)
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn t(&self) -> usize {
        self.layout.t()
    }
}

/// One Haar SU(4) gate per placement, each from its own derived stream.
pub fn sample_gates(layout: &BrickwallLayout, stream: &StreamKey) -> Vec<GateMatrix> {
    layout
        .placements()
        .iter()
        .enumerate()
        .map(|(j, pl)| sample_haar_su4(&stream.derive(j as u64)).on(pl.pair))
        .collect()
}

fn pauli_x() -> nalgebra::Matrix2<Complex64> {
    nalgebra::Matrix2::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
    )
}

/// X on one factor of the local pair basis: `slot` 0 is the first pair
/// qubit (high bit), 1 the second (low bit).
pub(crate) fn x_on_slot(slot: usize) -> CMat4 {
    let x = pauli_x();
    let i2 = nalgebra::Matrix2::identity();
    if slot == 0 {
        x.kronecker(&i2)
    } else {
        i2.kronecker(&x)
    }
}

/// Result of rewriting all outcome-1 measurements to outcome 0.
#[derive(Debug, Clone)]
pub struct OutcomeNormalization {
    pub instance: CircuitInstance,
    /// Residual X frame on the output, one flag per qubit (index 0 = qubit 1).
    /// Applying X to the flagged output qubits recovers the original
    /// unnormalized output exactly.
    pub output_flips: Vec<bool>,
    /// Count of adjacent-projector conflicts encountered. Nonzero only for
    /// inputs whose Born weight is structurally zero; for those the exact
    /// output equivalence degenerates (both outputs need not match).
    pub degenerate_conflicts: usize,
}

/// Rewrites the instance so that every measured site records outcome 0,
/// absorbing the `|1><1| = X|0><0|X` conjugations into the neighboring
/// gates. X factors that reach the final time are reported as output flips.
pub fn normalize_outcomes_to_zero(instance: &CircuitInstance) -> OutcomeNormalization {
    let n = instance.n();
    let t = instance.t();
    let layout = &instance.layout;
    let mut gates = instance.gates.clone();
    let mut config = instance.config.clone();
    let mut frame = vec![false; n + 1]; // pending X after the current position
    let mut degenerate = 0;

    for tau in 1..=t {
        // Gate layer: absorb pending X frames on the input side.
        for id in layout.layer_placements(tau) {
            let (a, b) = layout.placement(id).pair;
            if frame[a] {
                gates[id].u *= x_on_slot(0);
                frame[a] = false;
            }
            if frame[b] {
                gates[id].u *= x_on_slot(1);
                frame[b] = false;
            }
        }
        // Measurement layer.
        for q in 1..=n {
            let MeasurementStatus::Measured(outcome) = config.status(q, tau) else {
                continue;
            };
            let effective = outcome.bit() ^ u8::from(frame[q]);
            if effective == 1 {
                // Zero the site; the trailing X is absorbed by the nearest
                // earlier gate on this qubit.
                match layout.gate_at(tau, q) {
                    Some(id) => {
                        let (a, _) = layout.placement(id).pair;
                        let slot = if a == q { 0 } else { 1 };
                        gates[id].u = x_on_slot(slot) * gates[id].u;
                    }
                    None => {
                        // Boundary qubit in an even layer: the previous
                        // element on this wire is the site (q, tau-1).
                        if config.status(q, tau - 1).is_measured() {
                            // Adjacent conflicting projectors; input weight 0.
                            degenerate += 1;
                        } else {
                            let id = layout
                                .gate_at(tau - 1, q)
                                .expect("odd layers cover every qubit");
                            let (a, _) = layout.placement(id).pair;
                            let slot = if a == q { 0 } else { 1 };
                            gates[id].u = x_on_slot(slot) * gates[id].u;
                        }
                    }
                }
            }
            // Pending X after the projector is X^{original outcome}.
            frame[q] = outcome.bit() == 1;
            config.set_status(q, tau, MeasurementStatus::Measured(Outcome::Zero));
        }
    }

    let output_flips = (1..=n).map(|q| frame[q]).collect();
    OutcomeNormalization {
        instance: CircuitInstance {
            layout: layout.clone(),
            gates,
            config,
            p: instance.p,
        },
        output_flips,
        degenerate_conflicts: degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_rejects_bad_dims() {
        assert!(BrickwallLayout::new(3, 4).is_err());
        assert!(BrickwallLayout::new(4, 5).is_err());
        assert!(BrickwallLayout::new(0, 2).is_err());
        assert!(BrickwallLayout::new(2, 0).is_err());
    }

    #[test]
    fn layout_n2_t2_single_gate() {
        let l = BrickwallLayout::new(2, 2).unwrap();
        assert_eq!(l.gate_count(), 1);
        assert_eq!(l.placement(0), Placement { layer: 1, pair: (1, 2) });
        assert_eq!(l.layer_placements(2).count(), 0);
    }

    #[test]
    fn layout_n4_t4_gate_count() {
        let l = BrickwallLayout::new(4, 4).unwrap();
        assert_eq!(l.gate_count(), 6);
    }

    #[test]
    fn layout_n6_t2_pairs() {
        let l = BrickwallLayout::new(6, 2).unwrap();
        let pairs: Vec<_> = l.placements().iter().map(|p| (p.layer, p.pair)).collect();
        assert_eq!(
            pairs,
            vec![
                (1, (1, 2)),
                (1, (3, 4)),
                (1, (5, 6)),
                (2, (2, 3)),
                (2, (4, 5)),
            ]
        );
    }

    #[test]
    fn gate_count_formula_holds() {
        for n in [2usize, 4, 6, 8, 10] {
            for t in [2usize, 4, 6, 12] {
                let l = BrickwallLayout::new(n, t).unwrap();
                assert_eq!(l.gate_count(), (t / 2) * (n - 1));
            }
        }
    }

    #[test]
    fn sample_config_extremes() {
        let key = StreamKey::new(11);
        let c0 = sample_measurement_configuration(4, 4, 0.0, SamplingMode::StructuralZero, &key);
        assert_eq!(c0.measured_count(), 0);
        let c1 = sample_measurement_configuration(4, 4, 1.0, SamplingMode::StructuralZero, &key);
        assert_eq!(c1.measured_count(), 16);
    }

    #[test]
    fn sample_config_rate_concentrates() {
        // 10^4 sites at p = 0.5: fraction within 0.5 +- 0.02 (3 sigma ~ 0.015).
        let key = StreamKey::new(5);
        let c = sample_measurement_configuration(100, 100, 0.5, SamplingMode::StructuralZero, &key);
        let frac = c.measured_count() as f64 / 1e4;
        assert!((frac - 0.5).abs() < 0.02, "fraction {frac}");
    }

    #[test]
    fn haar_su4_is_special_unitary() {
        for seed in 0..20 {
            let g = sample_haar_su4(&StreamKey::new(seed));
            assert!(g.unitarity_residual() <= 1e-12, "residual {}", g.unitarity_residual());
            let det = g.determinant();
            assert!((det - Complex64::new(1.0, 0.0)).norm() <= 1e-10, "det {det}");
        }
    }

    #[test]
    fn haar_su4_deterministic() {
        let key = StreamKey::new(3).derive(9);
        let a = sample_haar_su4(&key);
        let b = sample_haar_su4(&key);
        assert_eq!(a.u, b.u);
    }

    #[test]
    fn haar_su4_entry_moment() {
        // Haar second moment: E |u_ij|^2 = 1/4 per entry; 10^4 samples.
        let root = StreamKey::new(77);
        let mut acc = [[0.0f64; 4]; 4];
        let samples = 10_000;
        for k in 0..samples {
            let g = sample_haar_su4(&root.derive(k));
            for r in 0..4 {
                for c in 0..4 {
                    acc[r][c] += g.u[(r, c)].norm_sqr();
                }
            }
        }
        for row in &acc {
            for &v in row {
                let mean = v / samples as f64;
                assert!((mean - 0.25).abs() < 0.01, "mean {mean}");
            }
        }
    }

    #[test]
    fn config_json_round_trip() {
        let key = StreamKey::new(21);
        let mut cfg = sample_measurement_configuration(4, 6, 0.4, SamplingMode::StructuralZero, &key);
        cfg.set_status(2, 3, MeasurementStatus::Measured(Outcome::One));
        let s = cfg.to_json().unwrap();
        let back = MeasurementConfiguration::from_json(&s).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn config_json_rejects_bad_version() {
        let s = r#"{"version":9,"n":2,"t":2,"sites":[]}"#;
        assert!(MeasurementConfiguration::from_json(s).is_err());
    }

    #[test]
    fn normalize_no_ones_is_identity() {
        let inst = CircuitInstance::sample(4, 4, 0.3, SamplingMode::StructuralZero, &StreamKey::new(8))
            .unwrap();
        let norm = normalize_outcomes_to_zero(&inst);
        assert_eq!(norm.degenerate_conflicts, 0);
        assert!(norm.output_flips.iter().all(|f| !f));
        assert_eq!(norm.instance.config, inst.config);
        for (a, b) in norm.instance.gates.iter().zip(&inst.gates) {
            assert_eq!(a.u, b.u);
        }
    }
}
