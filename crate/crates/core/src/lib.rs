pub mod analytic;
pub mod bounds;
pub mod lattice;
pub mod report;
pub mod sequence;
pub mod smooth;

mod serde_num;
