//! Sensory, visibility and effective interaction domains in the plane.
//!
//! A particle at `x` moving with velocity `v` senses others inside a circular
//! sector with vertex `x`, axis along `v`, semi-amplitude `theta` and radius
//! `R`. In metric mode `R` is fixed; in topological mode `R` is the smallest
//! radius whose sector holds the critical number of neighbours at the local
//! density. The effective domain is the intersection of the sensory and
//! visibility sectors.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use crate::{Error, Result};

/// Relative slack applied to boundary comparisons so that points exactly on
/// the sector edge are counted as inside.
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Unit vector in the same direction, or zero for (near) zero input.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 1e-300 {
            Vec2::new(self.x / n, self.y / n)
        } else {
            Vec2::ZERO
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainMode {
    Metric,
    Topological,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensoryConfig {
    /// Semi-amplitude of the sensing sector, in `(0, pi]`.
    pub theta: f64,
    pub r_visibility: f64,
    /// Number of neighbours a topological domain must contain.
    pub critical_count: f64,
    pub mode: DomainMode,
}

impl SensoryConfig {
    pub fn new(
        theta: f64,
        r_visibility: f64,
        critical_count: f64,
        mode: DomainMode,
    ) -> Result<Self> {
        if !(theta > 0.0 && theta <= PI) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in (0, pi], got {theta}"
            )));
        }
        if !(r_visibility > 0.0 && r_visibility.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "r_visibility must be positive and finite, got {r_visibility}"
            )));
        }
        if !(critical_count > 0.0 && critical_count.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "critical_count must be positive, got {critical_count}"
            )));
        }
        Ok(Self {
            theta,
            r_visibility,
            critical_count,
            mode,
        })
    }

    /// Radius of the effective interaction domain at local density `rho`.
    pub fn interaction_radius(&self, rho: f64) -> f64 {
        let r_sensory = match self.mode {
            DomainMode::Metric => self.r_visibility,
            DomainMode::Topological => {
                sensory_radius(rho, self).expect("topological mode always yields a radius")
            }
        };
        effective_radius(DomainPair {
            r_sensory,
            r_visibility: self.r_visibility,
            theta: self.theta,
        })
    }
}

/// Sensory and visibility radii of two co-axial sectors with equal amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainPair {
    pub r_sensory: f64,
    pub r_visibility: f64,
    pub theta: f64,
}

/// Topological sensory radius: the `R` at which a sector of semi-amplitude
/// `theta` (area `theta R^2`) holds `critical_count` particles at density
/// `rho`. Returns `f64::INFINITY` when `rho == 0`.
pub fn sensory_radius(rho: f64, cfg: &SensoryConfig) -> Result<f64> {
    if cfg.mode == DomainMode::Metric {
        return Err(Error::Misuse(
            "sensory radius is fixed in metric mode; use r_visibility".into(),
        ));
    }
    if !(rho >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "density must be >= 0, got {rho}"
        )));
    }
    if rho == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((cfg.critical_count / (rho * cfg.theta)).sqrt())
}

/// Radius of `Omega_s ∩ Omega_v` for co-axial sectors of equal amplitude.
pub fn effective_radius(pair: DomainPair) -> f64 {
    pair.r_sensory.min(pair.r_visibility)
}

/// Whether `x_other` lies in the sector with vertex `x_self`, axis `v_self`,
/// the given radius and semi-amplitude. A zero velocity gives the full disk.
/// The vertex itself is never inside.
pub fn in_domain(x_self: Vec2, v_self: Vec2, x_other: Vec2, radius: f64, theta: f64) -> bool {
    let d = x_other - x_self;
    let dist = d.norm();
    if dist == 0.0 || dist > radius * (1.0 + BOUNDARY_TOL) {
        return false;
    }
    if v_self.norm() == 0.0 || theta >= PI {
        return true;
    }
    let angle = v_self.cross(d).abs().atan2(v_self.dot(d));
    angle <= theta * (1.0 + BOUNDARY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn topo(theta: f64, nc: f64) -> SensoryConfig {
        SensoryConfig::new(theta, 10.0, nc, DomainMode::Topological).unwrap()
    }

    #[test]
    fn zero_density_is_unbounded() {
        assert_eq!(sensory_radius(0.0, &topo(1.0, 7.0)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn unit_radius_identity() {
        let cfg = topo(0.7, 6.0);
        assert_relative_eq!(
            sensory_radius(6.0 / 0.7, &cfg).unwrap(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn seven_neighbours_quarter_plane() {
        let r = sensory_radius(10.0, &topo(FRAC_PI_2, 7.0)).unwrap();
        assert_relative_eq!(r, (7.0 / (10.0 * FRAC_PI_2)).sqrt(), max_relative = 1e-15);
        assert!((r - 0.6676).abs() < 1e-4);
    }

    #[test]
    fn metric_mode_is_misuse() {
        let cfg = SensoryConfig::new(1.0, 2.0, 7.0, DomainMode::Metric).unwrap();
        assert!(matches!(sensory_radius(1.0, &cfg), Err(Error::Misuse(_))));
        assert_eq!(cfg.interaction_radius(100.0), 2.0);
    }

    #[test]
    fn quadrupled_density_halves_radius() {
        let cfg = topo(1.3, 6.5);
        let r1 = sensory_radius(2.0, &cfg).unwrap();
        let r4 = sensory_radius(8.0, &cfg).unwrap();
        assert_relative_eq!(r1, 2.0 * r4, max_relative = 1e-15);
    }

    #[test]
    fn effective_radius_cases() {
        let pair = |r_sensory, r_visibility| DomainPair {
            r_sensory,
            r_visibility,
            theta: 1.0,
        };
        assert_eq!(effective_radius(pair(1.0, 2.0)), 1.0);
        assert_eq!(effective_radius(pair(3.0, 2.0)), 2.0);
        assert_eq!(effective_radius(pair(2.0, 2.0)), 2.0);
    }

    #[test]
    fn topological_radius_capped_by_visibility() {
        let cfg = SensoryConfig::new(1.0, 1.5, 7.0, DomainMode::Topological).unwrap();
        assert_eq!(cfg.interaction_radius(0.0), 1.5);
        assert_relative_eq!(
            cfg.interaction_radius(70.0),
            (0.1f64).sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn cone_membership() {
        let o = Vec2::ZERO;
        let v = Vec2::new(1.0, 0.0);
        assert!(in_domain(o, v, Vec2::new(0.5, 0.0), 1.0, 0.1));
        assert!(!in_domain(o, v, Vec2::new(-0.5, 0.0), 1.0, FRAC_PI_2));
        let diag = Vec2::from_angle(FRAC_PI_4);
        assert!(in_domain(o, v, diag, 1.0, FRAC_PI_4));
        assert!(!in_domain(o, v, o, 1.0, PI));
    }

    #[test]
    fn stationary_particle_senses_full_disk() {
        let o = Vec2::new(1.0, 1.0);
        assert!(in_domain(o, Vec2::ZERO, Vec2::new(0.5, 1.0), 1.0, 0.2));
        assert!(!in_domain(o, Vec2::ZERO, Vec2::new(3.0, 1.0), 1.0, 0.2));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(SensoryConfig::new(0.0, 1.0, 7.0, DomainMode::Metric).is_err());
        assert!(SensoryConfig::new(4.0, 1.0, 7.0, DomainMode::Metric).is_err());
        assert!(SensoryConfig::new(1.0, f64::INFINITY, 7.0, DomainMode::Metric).is_err());
        assert!(SensoryConfig::new(1.0, 1.0, 0.0, DomainMode::Metric).is_err());
    }
}
