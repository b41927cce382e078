use ndarray::Array2;

use crate::config::Scenario;
use crate::error::{Error, Result};

/// Feedback taps (exponents below the leading term, including 0) of a
/// primitive polynomial for each register length.
const PRIMITIVE_TAPS: [&[usize]; 10] = [
    &[0],          // x + 1
    &[1, 0],       // x^2 + x + 1
    &[1, 0],       // x^3 + x + 1
    &[1, 0],       // x^4 + x + 1
    &[2, 0],       // x^5 + x^2 + 1
    &[1, 0],       // x^6 + x + 1
    &[1, 0],       // x^7 + x + 1
    &[4, 3, 2, 0], // x^8 + x^4 + x^3 + x^2 + 1
    &[4, 0],       // x^9 + x^4 + 1
    &[3, 0],       // x^10 + x^3 + 1
];

/// Binary maximum-length sequence of period `2^degree - 1`, register seeded with `1, 0, ..., 0`.
pub fn m_sequence(degree: usize) -> Vec<u8> {
    assert!((1..=PRIMITIVE_TAPS.len()).contains(&degree), "unsupported register length {degree}");
    let taps = PRIMITIVE_TAPS[degree - 1];
    let period = (1usize << degree) - 1;
    let mut s = vec![0u8; period.max(degree)];
    s[0] = 1;
    for t in 0..period.saturating_sub(degree) {
        s[t + degree] = taps.iter().fold(0, |acc, &i| acc ^ s[t + i]);
    }
    s.truncate(period);
    s
}

/// Pilot book `Phi` (`tau_p x K`, real, unit-norm columns).
///
/// Orthogonal scenarios use the first `K` columns of the identity. The
/// contaminated scenario uses cyclic shifts of the longest m-sequence that
/// fits in `tau_p`, cyclically extended to `tau_p` chips and mapped
/// `0 -> +1`, `1 -> -1`. For `tau_p = 8` this is the period-7 sequence of
/// `x^3 + x + 1` with its first chip appended.
pub fn generate_pilots(scenario: Scenario, tau_p: usize, num_users: usize) -> Result<Array2<f64>> {
    if num_users > tau_p {
        return Err(Error::PilotLength { num_users, tau_p });
    }
    if scenario.orthogonal_pilots() {
        return Ok(Array2::from_shape_fn((tau_p, num_users), |(i, k)| f64::from(u8::from(i == k))));
    }
    let degree = (1..=PRIMITIVE_TAPS.len())
        .take_while(|&n| (1usize << n) - 1 <= tau_p)
        .last()
        .unwrap_or(1);
    let base = m_sequence(degree);
    let period = base.len();
    let scale = 1.0 / (tau_p as f64).sqrt();
    Ok(Array2::from_shape_fn((tau_p, num_users), |(i, k)| {
        let chip = base[(i % period + k) % period];
        if chip == 0 {
            scale
        } else {
            -scale
        }
    }))
}

/// `|phi_i^H phi_k|^2` for all user pairs.
pub fn gram_sq(pilots: &Array2<f64>) -> Array2<f64> {
    let g = pilots.t().dot(pilots);
    g.mapv(|v| v * v)
}
