//! Disc domains, their Möbius uniformizers and pullback balls.

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::sampler::Loop;

/// A point of the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlanePoint {
    pub re: f64,
    pub im: f64,
}

impl PlanePoint {
    pub const ORIGIN: PlanePoint = PlanePoint { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn norm(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn dist(self, other: PlanePoint) -> f64 {
        (self.re - other.re).hypot(self.im - other.im)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Rotation about the origin by `theta` radians.
    pub fn rotated(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.re - s * self.im, s * self.re + c * self.im)
    }
}

impl From<PlanePoint> for Complex64 {
    fn from(p: PlanePoint) -> Self {
        Complex64::new(p.re, p.im)
    }
}

impl From<Complex64> for PlanePoint {
    fn from(z: Complex64) -> Self {
        PlanePoint::new(z.re, z.im)
    }
}

/// The disc of the given radius centred at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscDomain {
    radius: f64,
}

impl DiscDomain {
    pub const UNIT: DiscDomain = DiscDomain { radius: 1.0 };

    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(domain(format!("disc radius must be positive, got {radius}")));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    /// Strict interior test.
    pub fn contains(&self, z: PlanePoint) -> bool {
        z.norm_sqr() < self.radius * self.radius
    }
}

/// The Möbius map of a disc onto the unit disc sending a chosen point to 0.
///
/// `w ↦ (w − a)/(1 − ā w)` applied after rescaling the domain to unit radius.
#[derive(Clone, Copy, Debug)]
pub struct Uniformizer {
    inv_radius: f64,
    a: Complex64,
}

impl Uniformizer {
    pub fn new(domain: &DiscDomain, x: PlanePoint) -> Result<Self> {
        if !x.is_finite() || !domain.contains(x) {
            return Err(domain_error_for(x, domain));
        }
        let inv_radius = 1.0 / domain.radius;
        Ok(Self {
            inv_radius,
            a: Complex64::from(x) * inv_radius,
        })
    }

    /// Image of `z`; no range check, `z` is expected in the closed domain.
    #[inline]
    pub fn map(&self, z: PlanePoint) -> Complex64 {
        let w = Complex64::from(z) * self.inv_radius;
        (w - self.a) / (Complex64::new(1.0, 0.0) - self.a.conj() * w)
    }

    /// `|map(z)|`, computed without the complex division.
    #[inline]
    pub fn modulus(&self, z: PlanePoint) -> f64 {
        let wr = z.re * self.inv_radius;
        let wi = z.im * self.inv_radius;
        let nr = wr - self.a.re;
        let ni = wi - self.a.im;
        // 1 - conj(a) w
        let dr = 1.0 - (self.a.re * wr + self.a.im * wi);
        let di = -(self.a.re * wi - self.a.im * wr);
        ((nr * nr + ni * ni) / (dr * dr + di * di)).sqrt()
    }

    /// `|j'(z)| = (1 - |a|²) / (R |1 - ā w|²)`, the local stretch of the map.
    #[inline]
    pub fn stretch(&self, z: PlanePoint) -> f64 {
        let wr = z.re * self.inv_radius;
        let wi = z.im * self.inv_radius;
        let dr = 1.0 - (self.a.re * wr + self.a.im * wi);
        let di = -(self.a.re * wi - self.a.im * wr);
        (1.0 - self.a.norm_sqr()) * self.inv_radius / (dr * dr + di * di)
    }
}

fn domain_error_for(x: PlanePoint, d: &DiscDomain) -> crate::Error {
    domain(format!(
        "point ({}, {}) is not inside the open disc of radius {}",
        x.re,
        x.im,
        d.radius()
    ))
}

/// Image of `z` under the uniformizer of `domain` centred at `x`.
pub fn uniformizer(domain: &DiscDomain, x: PlanePoint, z: PlanePoint) -> Result<PlanePoint> {
    let u = Uniformizer::new(domain, x)?;
    if !z.is_finite() || z.norm() > domain.radius() * (1.0 + 1e-12) {
        return Err(crate::error::domain(format!(
            "point ({}, {}) lies outside the closed disc of radius {}",
            z.re,
            z.im,
            domain.radius()
        )));
    }
    Ok(u.map(z).into())
}

/// `B(x, δ)`: the preimage of the disc of radius `δ` under the uniformizer at `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PullbackBall {
    pub center: PlanePoint,
    pub scale: f64,
}

impl PullbackBall {
    pub fn new(domain: &DiscDomain, center: PlanePoint, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale < 1.0) {
            return Err(crate::error::domain(format!(
                "pullback ball scale must lie in (0, 1), got {scale}"
            )));
        }
        if !center.is_finite() || !domain.contains(center) {
            return Err(domain_error_for(center, domain));
        }
        Ok(Self { center, scale })
    }
}

pub fn in_pullback_ball(ball: &PullbackBall, domain: &DiscDomain, z: PlanePoint) -> Result<bool> {
    Ok(uniformizer(domain, ball.center, z)?.norm() < ball.scale)
}

/// Largest `|j_x(v)|` over the vertices of a loop.
pub fn max_pullback_modulus(vertices: &[PlanePoint], u: &Uniformizer) -> f64 {
    vertices.iter().map(|&v| u.modulus(v)).fold(0.0, f64::max)
}

/// Vertex-based containment with the ball shrunk by `1 - margin`.
///
/// Segments of a discretized Brownian loop can leave the hull of their
/// endpoints, so the shrunken ball errs toward "not contained".
pub fn loop_contained_in_ball(
    lp: &Loop,
    ball: &PullbackBall,
    domain: &DiscDomain,
    margin: f64,
) -> Result<bool> {
    if lp.vertices().len() < 2 {
        return Err(crate::error::domain("loop needs at least two vertices"));
    }
    if !(0.0..1.0).contains(&margin) {
        return Err(crate::error::domain(format!("margin must lie in [0, 1), got {margin}")));
    }
    let u = Uniformizer::new(domain, ball.center)?;
    let threshold = ball.scale * (1.0 - margin);
    Ok(lp.vertices().iter().all(|&v| u.modulus(v) < threshold))
}
