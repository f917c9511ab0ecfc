//! Embedding logical circuits into a fixed measurement configuration.
//!
//! Each logical wire rides one measurement-free path of the circuit's bond
//! lattice. Gates along a path carry the wire's state with identity or
//! SWAP kernels; steps that wrap against the circuit's time direction use
//! one-bit teleportation keyed to post-selected outcome-0 measurements;
//! CNOTs between neighboring wires run over vertical bridges with a
//! basis-copy gadget at the top endpoint and an erasing CNOT at the bottom
//! endpoint. All gates off the paths and bridges stay identity, so every
//! off-plan wire carries `|0>` exactly and the construction is verified
//! end to end by the dense engine.

mod logical;
mod plan;

pub use logical::{Eq12Gate, LogicalCircuit, LogicalLayer, WKind};
pub use plan::{
    assign_gates, plan_embedding, verify_embedding, Bridge, ChannelRef, EmbeddingPlan,
    GateAssignment, JunctionKind, MeasurementFreePath, PathStep, StepCase, VerifyReport,
};

use crate::circuit::MeasurementConfiguration;
use crate::dimension::{self, PauliFamily};
use crate::stream::StreamKey;
use crate::Result;

/// Report for the embedded-dimension lower bound.
#[derive(Debug, Clone)]
pub struct EmbeddedDimensionReport {
    pub rank: usize,
    /// Certified block count of the embedded Clifford payload.
    pub blocks: usize,
    /// Logical depth consumed by the payload.
    pub logical_depth: usize,
    pub report: dimension::RankReport,
}

/// Lower-bounds the accessible dimension of `M` by embedding the Gray-code
/// Clifford payload on `k` wires at logical depth `m` and measuring the
/// single-qubit-perturbation rank of the plan's gates. Added measurements
/// cannot raise the dimension, so the rank bounds `d_M` of the original
/// configuration from below.
pub fn embedded_dimension_bound(
    config: &MeasurementConfiguration,
    k: usize,
    m: usize,
    stream: &StreamKey,
) -> Result<EmbeddedDimensionReport> {
    let _ = stream; // the payload and rank computation are deterministic
    let cap = dimension::max_blocks(k);
    let mut blocks = (2 * m / (3 * k)).clamp(1, cap);
    let (logical, used_depth) = loop {
        let clifford = dimension::build_lower_bound_clifford(k, blocks)?;
        match logical::clifford_to_logical(&clifford, m) {
            Ok(pair) => break pair,
            Err(crate::error::Error::DepthExceeded { .. }) if blocks > 1 => blocks -= 1,
            Err(e) => return Err(e),
        }
    };
    let plan = plan_embedding(config, k, logical.depth())?;
    let assignment = assign_gates(&plan, &logical)?;
    let instance = plan.instance(&assignment)?;
    let placements: Vec<usize> = {
        let mut v: Vec<usize> = assignment.matrices.keys().copied().collect();
        v.sort_unstable();
        v
    };
    let columns = plan::perturbed_plan_columns(&instance, &placements)?;
    let matrix = dimension::realify(config.n(), &columns);
    let mut report = dimension::numerical_rank(&matrix, dimension::DEFAULT_TOL);
    report.n = Some(config.n());
    report.t = Some(config.t());
    report.gate_count = Some(placements.len());
    report.family = Some(PauliFamily::SingleQubit6);
    Ok(EmbeddedDimensionReport { rank: report.rank, blocks, logical_depth: used_depth, report })
}
