//! Color vision screening with generated pseudoisochromatic plates, and
//! palette adaptation for the deficiency that the screening finds.
//!
//! * [`color`]: color spaces, CIE76 difference, deficiency simulation.
//! * [`plates`]: plate generation, rendering and validation.
//! * [`engine`]: plate batteries, test sessions and classification.
//! * [`adapt`]: palette scoring, scheme selection and recoloring.

pub mod adapt;
pub mod color;
pub mod engine;
pub mod plates;
pub mod ppm;
pub mod rng;
