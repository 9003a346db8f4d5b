//! Scalar wave-optics simulation of vortex beams diffracting through binary
//! forked gratings and spiral zone plates, with an OAM analyzer built from a
//! forked grating and a pinhole.
//!
//! The crate is organized around a small set of value types: [`GridSpec`]
//! describes a sampled plane, [`ComplexField`] holds a wavefunction on it,
//! masks rasterize parametric screens onto grids, propagation moves fields
//! between planes, and analysis extracts observables (order powers, OAM
//! spectra, winding numbers, ring radii). Everything is pure: inputs are
//! never mutated and outputs are fresh values, so fields and plans can be
//! shared freely across threads.

pub mod analysis;
pub mod beam;
pub mod constants;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod mask;
pub mod propagation;
pub mod sorter;

pub use analysis::{
    analyze_orders, azimuthal_mode_spectrum, count_azimuthal_peaks, integrate_box, locate_orders,
    order_asymmetry, phase_winding, ring_radius, DiffractionReport, OamSpectrum, OrderAnalysisParams,
    OrderAsymmetry, OrderLocation, OrderReport, RingMeasure, Winding,
};
pub use beam::{make_beam, BeamProfile, BeamSpec};
pub use constants::electron_wavelength;
pub use error::{Error, Result};
pub use field::ComplexField;
pub use grid::GridSpec;
pub use mask::{
    complement, grating_order_amplitude, render_forked_grating, render_spiral_zone_plate,
    BinaryMask, ForkedGratingSpec, SpiralZonePlateSpec,
};
pub use propagation::{
    angular_spectrum_propagate, fresnel_transfer_propagate, intensity_map, lens_fourier_transform,
    propagate, relative_l2_distance, sampling_guard, GuardReport, GuardStatus, PropagationMethod,
    PropagationPlan,
};
pub use sorter::{pinhole_transmission, sort_oam, SortResult, SorterConfig};
