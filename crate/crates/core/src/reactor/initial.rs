use rand::Rng;

use super::model::adiabatic_temperature;
use super::params::{InitialRanges, ModelParameters};
use super::state::PhysicalState;
use crate::bounds::Interval;

fn draw<R: Rng + ?Sized>(rng: &mut R, iv: Interval) -> f64 {
    // lo + w*U keeps zero-width boxes exact
    iv.clamp(iv.lo + iv.width() * rng.gen::<f64>())
}

/// Uniform draw from the initial-condition boxes; product and accumulated
/// feed start empty and `T_ad` is set from its algebraic definition.
pub fn sample_initial_state<R: Rng + ?Sized>(
    rng: &mut R,
    ranges: &InitialRanges,
    p: &ModelParameters,
) -> PhysicalState {
    let mut x = PhysicalState {
        m_water: draw(rng, ranges.water),
        m_monomer: draw(rng, ranges.monomer),
        m_product: 0.0,
        t_reactor: draw(rng, ranges.reactor_temp),
        t_wall: draw(rng, ranges.wall_temp),
        t_jacket: draw(rng, ranges.jacket_temp),
        t_ehe: draw(rng, ranges.ehe_temp),
        t_ehe_coolant: draw(rng, ranges.ehe_coolant_temp),
        m_accumulated: 0.0,
        t_adiabatic: 0.0,
    };
    x.t_adiabatic = adiabatic_temperature(&x, p);
    x
}
