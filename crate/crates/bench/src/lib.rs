//! Shared fixtures for the benchmarks.

use wgmodes::medium::MediumSpec;
use wgmodes::mesh::{generate_annulus, generate_rectangle, Mesh};

pub fn rectangle(n: usize) -> Mesh {
    generate_rectangle(1.2e-3, 1.0e-3, n, n).expect("valid rectangle")
}

pub fn coax(n_r: usize, n_theta: usize) -> Mesh {
    generate_annulus(1.0e-3, 2.0e-3, n_r, n_theta).expect("valid annulus")
}

pub fn medium() -> MediumSpec {
    MediumSpec::reference()
}
