//! Local harmonic analysis over `Q_p`: exact Mellin transforms, Tate gamma factors,
//! multiplicative Fourier convolutions, Kuznetsov and stable test measures, transfer
//! operators between them, and brute-force finite-group oracles that check every
//! closed form.

pub mod arith;
pub mod chars;
pub mod consistency;
pub mod conv;
pub mod error;
pub mod field;
pub mod kuznetsov;
pub mod measures;
pub mod mellin;
pub mod oracle;
pub mod plane;
pub mod scattering;
pub mod stable;
pub mod verify;

pub use error::{PtwError, Result};
