//! Network model: geometry, large-scale fading, pilots, channel-estimate
//! statistics and achievable uplink rates.

mod geometry;
pub mod montecarlo;
mod pilots;
mod realization;
mod sinr;

pub use geometry::{
    draw_positions, draw_shadowing, hata_cost231_constant_db, large_scale_coefficients,
    path_loss_db, wrap_distance, Point,
};
pub use montecarlo::{monte_carlo_validate, McEstimates};
pub use pilots::{generate_pilots, gram_sq, m_sequence};
pub use realization::{gamma_from_alpha, lmmse_alpha, NetworkRealization, RealizationDoc};
pub use sinr::{sinr_direct, uplink_rate, SinrCoefficients};
