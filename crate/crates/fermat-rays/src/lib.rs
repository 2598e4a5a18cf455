//! Finsler metrics of Randers type and light rays in standard stationary
//! spacetimes.
//!
//! The crate implements the three equivalent presentations of this metric
//! family — Fermat data `(g0, beta, delta)`, Randers data `(h, omega)` and
//! Zermelo navigation data `(g, W)` — together with the conversions between
//! them, geodesic integration on both the Finsler and the Lorentzian side,
//! closed-geodesic search (including the Katok examples on the 2-sphere),
//! reversibility and period-bound evaluation.
//!
//! Modules follow the natural layering:
//!
//! * [`geometry`] — chart atlases, smooth fields, Riemannian metrics and
//!   their exact derivatives (forward-mode), Christoffel symbols, flows.
//! * [`finsler`] — the metric triad, conversions, fundamental tensor,
//!   length/energy functionals, comparability, reversibility, L-duality.
//! * [`geodesics`] — sprays, adaptive integration, closed-geodesic search,
//!   the Robles flow composition and the Katok experiment.
//! * [`spacetime`] — the Lorentzian metric, null geodesics, the Fermat
//!   correspondence and t-periodic rays.
//! * [`io`] — JSON metric documents, reports and CSV dumps.

pub mod bundled;
pub mod expr;
pub mod finsler;
pub mod geodesics;
pub mod geometry;
pub mod io;
pub mod num;
pub mod optim;
pub mod sampling;
pub mod spacetime;
pub mod verify;

mod error;

pub use error::{Error, Result};
