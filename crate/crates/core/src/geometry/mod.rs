//! Influence geometry: rectangles, regions and atoms.

pub mod atom;
pub mod rect;
pub mod region;

pub use atom::{ball_volume, make_atom, AtomProfile, BiRadialAtom, HardyAtom};
pub use rect::InfluenceRectangle;
pub use region::{
    ell_offset, region_measure, region_measure_dense, sample_box, InfluenceRegion, MeasureEstimate,
    Membership, RegionKind,
};
