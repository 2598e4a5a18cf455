//! Chart-based manifolds, smooth fields and Riemannian metrics with exact
//! derivatives, plus integration primitives that are aware of chart
//! transitions.

mod charted;
mod fields;
mod flow;
mod manifold;
mod ode;

pub use charted::{integrate_charted, ChartedOptions, StateLayout, Trajectory, TrajectorySample};
pub use fields::{MetricCoeffs, RiemannMetric, ScalarCoeffs, ScalarField, VectorCoeffs, VectorField};
pub use flow::{flow, flow_with_jacobian};
pub use manifold::{ChartManifold, ManifoldKind, Point};
pub use ode::OdeOptions;
