// SPDX-License-Identifier: Apache-2.0

//! Float helpers routed through `libm` so results do not depend on whether
//! `std` happens to be linked.

use num_complex::Complex64;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// `e^{i angle}`
#[inline]
pub fn cis(angle: f64) -> Complex64 {
    Complex64::new(cos(angle), sin(angle))
}

#[inline]
pub fn cabs(z: Complex64) -> f64 {
    hypot(z.re, z.im)
}
