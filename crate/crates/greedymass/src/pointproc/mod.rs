//! Marked point processes: windows, mark distributions, samplers
//! (Poisson, lattice, columnar, determinantal), truncation layers, set
//! masses and factorial-moment estimation.

mod dist;
mod dpp;
mod moments;
mod realization;
mod sample;
mod window;

pub use dist::MarkDistribution;
pub use dpp::{kernel_from_spectrum, projection_kernel, DppKernelSpec, DppSampler};
pub use moments::{estimate_factorial_moment, ordered_distinct_pairs, BoxRegion};
pub use realization::{Atom, MarkedRealization};
pub use sample::{
    iid_marking, sample_lattice_columnar, sample_lattice_iid, sample_poisson_marked, LatticeBox,
};
pub use window::Window;
