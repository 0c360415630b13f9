//! Shared fixtures for the criterion benchmarks.

use parametric_core::{DriveProfile, Window};

/// Resonant harmonic drive, `eps0 = 0.1`, `omega0 = 1`, window length 40.
pub fn resonant() -> DriveProfile {
    DriveProfile::harmonic(1.0, Window::symmetric(40.0), 0.1, 2.0, 0.0).expect("valid profile")
}

/// Enveloped drive with a smooth spectrum, small enough for the EOM regime.
pub fn enveloped() -> DriveProfile {
    DriveProfile::enveloped_harmonic(1.0, Window::symmetric(60.0), 0.05, 2.0, 4.0).expect("valid profile")
}
