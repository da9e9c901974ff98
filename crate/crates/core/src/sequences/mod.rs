//! Recovery sequences, comparison sequences and the probes that check them.

mod concentrate;
mod decompose;
mod field;
mod interp;
mod mollify;
mod pair;
mod probe;
mod recovery;

pub use concentrate::{concentrate_measure_1d, concentrate_measure_nd};
pub use decompose::{decompose_osc_conc, splitting_defect, OscConc, LEVELS};
pub use field::{
    ball_radius, cutoff_phi, cutoff_phi_s, cutoff_phi_s_prime, dyadic_s, inner_ratio, outer_ratio,
    unit_ball_volume, Disk, ModifiedField, Spike, SpikedDensity,
};
pub use interp::{interpolate_ij_1d, interpolate_ij_nd};
pub use mollify::{mollify_1d, mollify_nd, Kernel};
pub use pair::{integrate_mesh, line_pair_u, Densities, Params, SeqU, SeqV, SequencePair};
pub use probe::{
    concentration_detector, gamma_probe, mass_above, ConcentrationReport, DetectorThresholds,
    ProbeOptions, ProbeReport, ProbeRow, Target, TestBattery,
};
pub use recovery::{build_recovery_1d, build_recovery_1d_jump, build_recovery_nd, RecoveryInfo};
