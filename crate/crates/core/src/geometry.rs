//! Waveguide/user geometry and effective line-of-sight channel gains.
//!
//! The antenna radiates from `(x, 0, d)` for `x` along the waveguide; a user
//! sits at `(x_u, y_u, 0)` inside the service rectangle. The effective power
//! gain is the free-space magnitude model `eta / dist^2`; phase terms are not
//! modeled.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Speed of light used throughout, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// A point in the 3-D service volume, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3<F> {
    pub x: F,
    pub y: F,
    pub z: F,
}

impl<F: Real> Point3<F> {
    pub fn new(x: F, y: F, z: F) -> Self {
        debug_assert!(x.is_finite() && y.is_finite() && z.is_finite());
        Self { x, y, z }
    }

    pub fn dist_sq(&self, other: &Point3<F>) -> F {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }
}

/// Service-area and waveguide dimensions, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry<F> {
    /// Service-area length along the waveguide axis.
    pub dx: F,
    /// Service-area width.
    pub dy: F,
    /// Height of the waveguide above the user plane.
    pub antenna_height: F,
    /// Length of the dielectric waveguide.
    pub waveguide_length: F,
}

impl<F: Real> Geometry<F> {
    pub fn new(dx: F, dy: F, antenna_height: F, waveguide_length: F) -> Self {
        assert!(dx > F::zero() && dy > F::zero());
        assert!(antenna_height > F::zero() && waveguide_length > F::zero());
        Self { dx, dy, antenna_height, waveguide_length }
    }

    /// Antenna location for a waveguide coordinate `x`.
    pub fn antenna_at(&self, x: F) -> Point3<F> {
        Point3::new(x, F::zero(), self.antenna_height)
    }
}

/// Carrier-level constants of the radio link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConstants<F> {
    /// Carrier frequency, Hz.
    pub carrier_freq: F,
    /// Carrier wavelength `c / f_c`, meters.
    pub wavelength: F,
    /// Reference power gain at 1 m: `wavelength^2 / (16 pi^2)`, linear.
    pub ref_gain: F,
    /// System bandwidth, Hz.
    pub bandwidth: F,
    /// AWGN power, watts.
    pub noise_power: F,
}

impl<F: Real> RadioConstants<F> {
    pub fn new(carrier_freq: F, bandwidth: F, noise_power: F) -> Self {
        assert!(carrier_freq > F::zero() && bandwidth > F::zero() && noise_power > F::zero());
        let wavelength = lit::<F>(SPEED_OF_LIGHT) / carrier_freq;
        let pi = F::from_f64(std::f64::consts::PI).unwrap();
        let ref_gain = wavelength * wavelength / (lit::<F>(16.0) * pi * pi);
        Self { carrier_freq, wavelength, ref_gain, bandwidth, noise_power }
    }
}

/// Per-user effective gains for one candidate antenna position.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState<F> {
    /// Linear power gain of each user, same order as the user list.
    pub gains: Vec<F>,
    /// Minimum of `gains`.
    pub worst_gain: F,
    /// Index attaining the minimum (smallest index on ties).
    pub worst_user: usize,
}

/// Effective channel gain `eta / dist^2` between the antenna at waveguide
/// coordinate `antenna_x` and a user on the ground plane.
pub fn channel_gain<F: Real>(
    antenna_x: F,
    user: &Point3<F>,
    geom: &Geometry<F>,
    radio: &RadioConstants<F>,
) -> Result<F> {
    if antenna_x < F::zero() || antenna_x > geom.waveguide_length {
        return Err(Error::AntennaOutOfRange {
            x: antenna_x.to_f64().unwrap_or(f64::NAN),
            len: geom.waveguide_length.to_f64().unwrap_or(f64::NAN),
        });
    }
    let antenna = geom.antenna_at(antenna_x);
    // dist >= antenna height > 0, so the gain is finite and positive.
    Ok(radio.ref_gain / antenna.dist_sq(user))
}

/// Gains of all users plus the worst-case entry.
pub fn channel_state<F: Real>(
    antenna_x: F,
    users: &[Point3<F>],
    geom: &Geometry<F>,
    radio: &RadioConstants<F>,
) -> Result<ChannelState<F>> {
    assert!(!users.is_empty(), "channel_state needs at least one user");
    let mut gains = Vec::with_capacity(users.len());
    for u in users {
        gains.push(channel_gain(antenna_x, u, geom, radio)?);
    }
    let (worst_user, worst_gain) = gains
        .iter()
        .copied()
        .enumerate()
        .fold(None::<(usize, F)>, |best, (i, g)| match best {
            Some((_, bg)) if bg <= g => best,
            _ => Some((i, g)),
        })
        .unwrap();
    Ok(ChannelState { gains, worst_gain, worst_user })
}

/// Draws `num_users` positions uniformly over the service rectangle.
pub fn place_users<F: Real, R: Rng>(
    rng: &mut R,
    geom: &Geometry<F>,
    num_users: usize,
) -> Vec<Point3<F>> {
    assert!(num_users >= 1);
    let dx = geom.dx.to_f64().unwrap();
    let dy = geom.dy.to_f64().unwrap();
    (0..num_users)
        .map(|_| {
            let x = rng.gen_range(0.0..=dx);
            let y = rng.gen_range(-dy / 2.0..=dy / 2.0);
            Point3::new(lit(x), lit(y), F::zero())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geom() -> Geometry<f64> {
        Geometry::new(120.0, 40.0, 3.0, 120.0)
    }

    fn radio() -> RadioConstants<f64> {
        RadioConstants::new(28.0e9, 1.0e6, 1.0e-12)
    }

    #[test]
    fn radio_constants_consistent() {
        let r = radio();
        assert_relative_eq!(r.wavelength, SPEED_OF_LIGHT / 28.0e9, max_relative = 1e-12);
        assert_relative_eq!(
            r.ref_gain,
            r.wavelength * r.wavelength / (16.0 * std::f64::consts::PI.powi(2)),
            max_relative = 1e-12
        );
    }

    #[test]
    fn gain_directly_below_antenna_is_eta_over_height_sq() {
        let user = Point3::new(10.0, 0.0, 0.0);
        let g = channel_gain(10.0, &user, &geom(), &radio()).unwrap();
        assert_relative_eq!(g, radio().ref_gain / 9.0, max_relative = 1e-12);
        // 28 GHz reference numbers: eta ~ 7.27e-7, h ~ 8.08e-8.
        assert_relative_eq!(radio().ref_gain, 7.2696e-7, max_relative = 1e-4);
        assert_relative_eq!(g, 8.077e-8, max_relative = 1e-3);
    }

    #[test]
    fn gain_symmetric_in_user_y() {
        let g = geom();
        let r = radio();
        let a = channel_gain(40.0, &Point3::new(55.0, 13.0, 0.0), &g, &r).unwrap();
        let b = channel_gain(40.0, &Point3::new(55.0, -13.0, 0.0), &g, &r).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn symmetric_users_about_antenna_share_gain() {
        let g = geom();
        let r = radio();
        let a = channel_gain(50.0, &Point3::new(45.0, 7.0, 0.0), &g, &r).unwrap();
        let b = channel_gain(50.0, &Point3::new(55.0, 7.0, 0.0), &g, &r).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn out_of_range_antenna_rejected() {
        let user = Point3::new(10.0, 0.0, 0.0);
        assert!(channel_gain(-0.1, &user, &geom(), &radio()).is_err());
        assert!(channel_gain(120.1, &user, &geom(), &radio()).is_err());
    }

    #[test]
    fn worst_user_is_farthest() {
        let g = geom();
        let r = radio();
        // Distances 3 m (right below) and 5 m (3-4-5 triangle).
        let users = [Point3::new(20.0, 0.0, 0.0), Point3::new(24.0, 0.0, 0.0)];
        let cs = channel_state(20.0, &users, &g, &r).unwrap();
        assert_eq!(cs.worst_user, 1);
        assert_relative_eq!(cs.worst_gain, r.ref_gain / 25.0, max_relative = 1e-12);
    }

    #[test]
    fn single_user_is_worst() {
        let users = [Point3::new(1.0, 2.0, 0.0)];
        let cs = channel_state(5.0, &users, &geom(), &radio()).unwrap();
        assert_eq!(cs.worst_user, 0);
        assert_eq!(cs.worst_gain, cs.gains[0]);
    }

    #[test]
    fn worst_gain_bounds_all_gains() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = geom();
        let r = radio();
        let users = place_users::<f64, _>(&mut rng, &g, 4);
        let cs = channel_state(33.0, &users, &g, &r).unwrap();
        for gain in &cs.gains {
            assert!(cs.worst_gain <= *gain);
        }
    }

    #[test]
    fn placement_in_range_and_deterministic() {
        let g = geom();
        let a = place_users::<f64, _>(&mut ChaCha8Rng::seed_from_u64(42), &g, 50);
        let b = place_users::<f64, _>(&mut ChaCha8Rng::seed_from_u64(42), &g, 50);
        assert_eq!(a, b);
        for p in &a {
            assert!((0.0..=g.dx).contains(&p.x));
            assert!((-g.dy / 2.0..=g.dy / 2.0).contains(&p.y));
            assert_eq!(p.z, 0.0);
        }
    }

    #[test]
    fn placement_mean_matches_uniform_law() {
        let g = geom();
        let users = place_users::<f64, _>(&mut ChaCha8Rng::seed_from_u64(3), &g, 100_000);
        let mean_x: f64 = users.iter().map(|p| p.x).sum::<f64>() / users.len() as f64;
        assert!((mean_x - g.dx / 2.0).abs() < 0.01 * g.dx);
    }

    #[test]
    fn gain_unimodal_in_antenna_x_with_peak_at_user_x() {
        let g = geom();
        let r = radio();
        let user = Point3::new(70.0, 11.0, 0.0);
        let gain = |x: f64| channel_gain(x, &user, &g, &r).unwrap();
        let mut best_x = 0.0;
        let mut best = 0.0;
        let mut prev = gain(0.0);
        let mut rising = true;
        for i in 1..=1200 {
            let x = i as f64 * 0.1;
            let cur = gain(x);
            if cur > best {
                best = cur;
                best_x = x;
            }
            if cur < prev {
                rising = false;
            } else {
                // Once descent starts it must not resume rising.
                assert!(rising, "gain not unimodal at x = {x}");
            }
            prev = cur;
        }
        assert!((best_x - user.x).abs() <= 0.1 + 1e-9);
    }

    #[test]
    fn worst_gain_continuous_along_waveguide() {
        let g = geom();
        let r = radio();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let users = place_users::<f64, _>(&mut rng, &g, 5);
        // |d gain / d x| <= 2 eta / d^3; min of such functions inherits the bound.
        let lipschitz = 2.0 * r.ref_gain / g.antenna_height.powi(3);
        let step = 0.01;
        let mut prev = channel_state(0.0, &users, &g, &r).unwrap().worst_gain;
        for i in 1..=12_000 {
            let x = i as f64 * step;
            let cur = channel_state(x, &users, &g, &r).unwrap().worst_gain;
            assert!((cur - prev).abs() <= lipschitz * step * 1.01);
            prev = cur;
        }
    }
}
