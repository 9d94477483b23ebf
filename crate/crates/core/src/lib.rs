//! Relativistic charged-particle dynamics in spacetime-dependent
//! electromagnetic backgrounds: fields, Poincaré symmetry scans, Noether
//! charges, instant- and front-form Hamiltonian flows, closed-form
//! conserved quantities and analytic orbits.

pub mod closedform;
pub mod dynamics;
pub mod error;
pub mod expm;
pub mod fields;
pub mod integrator;
pub mod invariants;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod spacetime;
pub mod symmetry;

pub use error::{Error, Result};
pub use fields::{FieldSpec, Profile};
pub use spacetime::{
    AntisymTensor, BasisElement, Covector, Form, FrontFormState, InstantFormState,
    LightFrontPoint, PhasePoint, PoincareGenerator, SpacetimePoint,
};
