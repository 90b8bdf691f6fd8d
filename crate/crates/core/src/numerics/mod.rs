//! Special functions, quadrature and random streams.

pub mod airy;
pub mod gauss_hermite;
pub mod hermite;
pub mod quadrature;
pub mod rng;

pub use airy::{airy, AiryValues};
pub use gauss_hermite::GaussHermite;
pub use hermite::{hermite, hermite_function};
pub use quadrature::{integrate, integrate_sqrt_endpoint, Quadrature};
pub use rng::{normal_deviate, RandomStream};
