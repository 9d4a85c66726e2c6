use super::AngularDistribution;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Full width at half maximum along the meridian of the grid that passes
/// through the brightest node.
///
/// The profile is taken at azimuths `φ_p` and `φ_p + π` with signed polar
/// angles, so a lobe on the grid pole is measured across the pole.
pub fn beam_width<T: Real>(dist: &AngularDistribution<T>) -> Result<T> {
    let grid = &dist.grid;
    let values = &dist.values;
    let (peak, &max) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp_real(b.1))
        .ok_or(Error::NoUniquePeak)?;
    let min = values.iter().copied().fold(max, |m, v| m.min(v));
    if !(max > T::zero()) || max - min <= max * T::lit(1e-9) {
        return Err(Error::NoUniquePeak);
    }
    let n_phi = grid.n_phi();
    let k_peak = peak % n_phi;
    // opposite azimuth, when the grid has one
    let k_back = n_phi
        .is_multiple_of(2)
        .then_some((k_peak + n_phi / 2) % n_phi);

    let nodes = grid.nodes();
    let mut profile: Vec<(T, T)> = Vec::with_capacity(2 * grid.n_theta());
    for ring in 0..grid.n_theta() {
        let i = grid.index(ring, k_peak);
        profile.push((nodes[i].theta, values[i]));
        if let Some(k) = k_back {
            let i = grid.index(ring, k);
            profile.push((-nodes[i].theta, values[i]));
        }
    }
    profile.sort_by(|a, b| a.0.total_cmp_real(&b.0));
    let top = profile
        .iter()
        .position(|p| p.1 == max)
        .ok_or(Error::NoUniquePeak)?;
    let half = max * T::lit(0.5);
    let cross = |a: (T, T), b: (T, T)| a.0 + (half - a.1) * (b.0 - a.0) / (b.1 - a.1);
    let right = (top..profile.len() - 1)
        .find(|&i| profile[i + 1].1 < half)
        .map(|i| cross(profile[i], profile[i + 1]));
    let left = (1..=top)
        .rev()
        .find(|&i| profile[i - 1].1 < half)
        .map(|i| cross(profile[i - 1], profile[i]));
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::NoUniquePeak),
    }
}
