//! Charge automorphisms of the free massless scalar field and the braided
//! tensor category they generate.
//!
//! The crate is organized bottom-up:
//!
//! - [`quadrature`]: momentum-space grids (Gauss–Legendre radial rule times an
//!   inversion-symmetric spherical rule) and radial Fourier transforms.
//! - [`field`]: the symplectic spaces of test and charge functions, with the
//!   scalar product, the extended symplectic form and spacetime translations.
//! - [`weyl`]: Weyl operators, their products and the vacuum state.
//! - [`category`]: charge automorphisms, intertwiners, tensor structure and the
//!   braiding, both in closed form and as a limit along spacelike cones.
//! - [`seqalg`]: bounded sequences modulo null sequences over a normed
//!   *-algebra, with subsequence stability probes and polar unitarization.
//!
//! Weyl convention used throughout: `W(x)W(y) = exp(iσ(x,y)/2) W(x+y)`, and a
//! charge `γ` acts by `γ(W(f)) = exp(iσ(γ,f)) W(f)`.

pub mod category;
pub mod error;
pub mod field;
pub mod quadrature;
pub mod seqalg;
pub mod weyl;

pub use error::{Error, Result};
