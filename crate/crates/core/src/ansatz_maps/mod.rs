//! Changes of variables linking the Kuznetsov solution to the KZK, NPE and Westervelt
//! models, and builders for the matched initial and boundary data.

mod builders;
mod bump;
mod coords;
mod interp;
mod westervelt;

pub use builders::{
    build_ubar_from_kzk, build_ubar_from_npe, kzk_boundary_g, kzk_initial_data, npe_initial_data,
    physical_transverse_axes, KzkAnsatz, NpeAnsatz,
};
pub use bump::{delta_bump, delta_bump_at, initial_energy};
pub use coords::{
    map_coordinates, unmap_coordinates, ChainFactors, ParaxialKind, ParaxialMap, PhysicalPoint,
    SlowPoint,
};
pub use westervelt::{
    westervelt_forward, westervelt_initial_data, westervelt_inverse, CONTRACTION_GATE, MIN_FACTOR,
    STAGNATION_FLOOR,
};

use crate::error::Result;
use crate::full_models::BoundaryData;
use crate::numerics::field::Field;

/// Which builder produced an [`AnsatzFieldSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Provenance {
    Kzk,
    Npe,
    Westervelt,
    Direct,
}

/// Kuznetsov data `u(0) = u0`, `u_t(0) = u1` and, on half-space grids, the boundary trace.
#[derive(Clone, Debug)]
pub struct AnsatzFieldSet {
    pub u0: Field,
    pub u1: Field,
    pub g: Option<BoundaryData>,
    pub provenance: Provenance,
}

impl AnsatzFieldSet {
    pub fn new(
        u0: Field,
        u1: Field,
        g: Option<BoundaryData>,
        provenance: Provenance,
    ) -> Result<Self> {
        u0.check_same_grid(&u1)?;
        Ok(AnsatzFieldSet {
            u0,
            u1,
            g,
            provenance,
        })
    }

    /// Adds `delta` to the displacement, leaving the velocity and trace alone.
    pub fn perturbed(mut self, delta: &Field) -> Result<Self> {
        self.u0 = self.u0.add(delta)?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests;
