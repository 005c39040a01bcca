//! Fixtures shared by the criterion benches in `benches/`.

use hsflow_core::g2::g2_grid;
use hsflow_core::init::{build, InitSpec};
use hsflow_core::{FlowState, GridSpec, Structure, StructureKind};

/// Torus with `n` points on each varying axis for the given kind.
pub fn grid(kind: StructureKind, n: usize) -> GridSpec {
    match kind {
        StructureKind::Parallelism => GridSpec::torus(3, 3, n, 1.0),
        StructureKind::Acs => GridSpec::torus(4, 4, n, 1.0),
        StructureKind::Acts => GridSpec::torus(5, 3, n, 1.0),
        StructureKind::G2 => g2_grid(3, n, 1.0),
    }
    .expect("valid bench grid")
}

/// Seeded smooth structure of moderate amplitude.
pub fn smooth(kind: StructureKind, n: usize) -> Structure {
    build(kind, &grid(kind, n), &InitSpec::RandomSmooth { amplitude: 0.5, cutoff: 2, seed: 1 }).expect("valid init")
}

pub fn state(kind: StructureKind, n: usize) -> FlowState {
    FlowState::new(0.0, smooth(kind, n)).expect("feasible state")
}
