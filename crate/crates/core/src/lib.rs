//! Design and analysis toolkit for a monolithic gapped ridge-waveguide
//! Fabry-Perot microcavity used for single-atom detection.
//!
//! Modules follow the physical chain: [`waveguide`] solves the guided mode,
//! [`propagation`] diffracts it across free space, [`gap`] turns that into
//! reflection, transmission and loss of the atom gap, [`cavity`] handles
//! finesse, mirror stacks and loss fits, [`cqed`] combines everything into the
//! atom-cavity cooperativity, and [`trap`] checks that atoms can be held in
//! the gap at all.

pub mod cavity;
pub mod constants;
pub mod cqed;
pub mod error;
pub mod field;
pub mod format;
pub mod gap;
pub mod propagation;
pub mod trap;
pub mod waveguide;

pub use error::{Error, Result};
pub use field::{GridSpec, SampledField};
