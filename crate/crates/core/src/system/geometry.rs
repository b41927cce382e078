use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::SystemConfig;
use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Distance on the wrapped (toroidal) square, with the AP/user height gap as a
/// vertical leg.
pub fn wrap_distance(p1: Point, p2: Point, config: &SystemConfig) -> f64 {
    let side = config.area_side_m;
    let leg = |a: f64, b: f64| {
        let d = (a - b).abs();
        d.min(side - d)
    };
    let dx = leg(p1[0], p2[0]);
    let dy = leg(p1[1], p2[1]);
    let dh = config.height_gap_m();
    (dx * dx + dy * dy + dh * dh).sqrt()
}

/// Hata-COST231 constant for the configured carrier and antenna heights.
pub fn hata_cost231_constant_db(config: &SystemConfig) -> f64 {
    let f_mhz = config.carrier_hz / 1e6;
    let lf = f_mhz.log10();
    46.3 + 33.9 * lf - 13.82 * config.ap_height_m.log10()
        - (1.1 * lf - 0.7) * config.user_height_m
        + (1.56 * lf - 0.8)
}

const D1_KM: f64 = 0.05;
const D0_KM: f64 = 0.01;

/// Three-slope path loss in dB (a negative number: gain, not attenuation).
///
/// Slope 35 dB/decade beyond 50 m, 20 dB/decade between 10 and 50 m, flat below 10 m.
pub fn path_loss_db(distance_m: f64, config: &SystemConfig) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::NonPositiveDistance(distance_m));
    }
    let l = hata_cost231_constant_db(config);
    let d = distance_m / 1000.0;
    let pl = if d > D1_KM {
        -l - 35.0 * d.log10()
    } else if d > D0_KM {
        -l - 15.0 * D1_KM.log10() - 20.0 * d.log10()
    } else {
        -l - 15.0 * D1_KM.log10() - 20.0 * D0_KM.log10()
    };
    Ok(pl)
}

/// Linear-scale `beta[k][m] = 10^(PL/10) * 10^(sigma_sh * z / 10)`.
pub fn large_scale_coefficients(
    ap_positions: &[Point],
    user_positions: &[Point],
    shadow_draws: &Array2<f64>,
    config: &SystemConfig,
) -> Result<Array2<f64>> {
    let (k, m) = (user_positions.len(), ap_positions.len());
    if shadow_draws.dim() != (k, m) {
        return Err(Error::dim("shadow draws", k * m, shadow_draws.len()));
    }
    let mut beta = Array2::zeros((k, m));
    for (ki, user) in user_positions.iter().enumerate() {
        for (mi, ap) in ap_positions.iter().enumerate() {
            let pl = path_loss_db(wrap_distance(*user, *ap, config), config)?;
            let shadow = config.shadow_std_db * shadow_draws[[ki, mi]];
            beta[[ki, mi]] = 10f64.powf(pl / 10.0) * 10f64.powf(shadow / 10.0);
        }
    }
    Ok(beta)
}

/// Points drawn uniformly on `[0, D)^2`.
pub fn draw_positions<R: Rng + ?Sized>(n: usize, config: &SystemConfig, rng: &mut R) -> Vec<Point> {
    let side = config.area_side_m;
    (0..n)
        .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
        .collect()
}

/// i.i.d. standard-normal shadowing draws, `K x M`.
pub fn draw_shadowing<R: Rng + ?Sized>(k: usize, m: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((k, m), || rng.sample(StandardNormal))
}
