//! Physical constants (CODATA, 6 significant figures) and reference values
//! for the ⁸⁷Rb D2 line.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.99792e8;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.05457e-34;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.85419e-12;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.38065e-23;

/// ⁸⁷Rb atomic mass, kg.
pub const RB87_MASS: f64 = 1.44316e-25;
/// ⁸⁷Rb D2 cycling-transition dipole matrix element, C·m.
pub const RB87_D2_DIPOLE: f64 = 3.58424e-29;
/// ⁸⁷Rb D2 half-linewidth γ/2π, MHz.
pub const RB87_D2_GAMMA_HALF_MHZ: f64 = 3.0;
/// ⁸⁷Rb D2 wavelength, nm.
pub const RB87_D2_WAVELENGTH_NM: f64 = 780.241;
