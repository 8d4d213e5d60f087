//! Special-relativity algebra between the preferred frame and the laboratory frame.
//!
//! Units are chosen so that `c = 1`: every speed is a multiple of the speed of
//! light and times and lengths share a unit. The laboratory frame moves with
//! velocity `v` relative to the preferred frame; the axes of both frames are
//! parallel, so the same components describe `v` in either frame.
//!
//! The boost of an event is
//!
//! ```text
//! r' = r + (γ-1)/v² (r·v) v - γ v t
//! t' = γ (t - r·v)
//! ```
//!
//! and velocities compose as
//!
//! ```text
//! u' = [u + (γ-1)/v² (u·v) v - γ v] / (γ (1 - u·v))
//! ```
//!
//! with the inverse maps obtained by `v -> -v`. The factor `(γ-1)/v²` is
//! evaluated as `γ²/(1+γ)`, which has no removable singularity at `v = 0`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Cartesian 3-vector: positions, directions and velocities (in units of `c`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

/// Velocity in units of `c`. Frame velocities are sub-luminal; signal
/// velocities may be superluminal.
pub type Velocity<T> = Vec3<T>;

impl<T: Scalar> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn along_x(s: T) -> Self {
        Self::new(s, T::zero(), T::zero())
    }

    pub fn along_y(s: T) -> Self {
        Self::new(T::zero(), s, T::zero())
    }

    /// Vector of magnitude `r` in the xy-plane at angle `phi` from the x-axis.
    pub fn planar(r: T, phi: T) -> Self {
        Self::new(r * phi.cos(), r * phi.sin(), T::zero())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    /// Euclidean magnitude; for a velocity this is its speed.
    pub fn norm(self) -> T {
        self.x.hypot(self.y).hypot(self.z)
    }

    pub fn speed(self) -> T {
        self.norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Angle of the xy-projection, in `(-π, π]`.
    pub fn planar_angle(self) -> T {
        self.y.atan2(self.x)
    }

    pub fn max_abs_diff(self, o: Self) -> T {
        (self.x - o.x).abs().max((self.y - o.y).abs()).max((self.z - o.z).abs())
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Scalar> Div<T> for Vec3<T> {
    type Output = Self;
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Inertial frame an event is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    /// The privileged frame `S`, where the superluminal interaction is isotropic.
    Preferred,
    /// The laboratory frame `S'`.
    Lab,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Preferred => f.write_str("preferred"),
            Frame::Lab => f.write_str("lab"),
        }
    }
}

/// A spacetime point tagged with the frame its coordinates refer to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event<T> {
    pub t: T,
    pub x: T,
    pub y: T,
    pub z: T,
    pub frame: Frame,
}

impl<T: Scalar> Event<T> {
    pub fn new(t: T, position: Vec3<T>, frame: Frame) -> Self {
        Self {
            t,
            x: position.x,
            y: position.y,
            z: position.z,
            frame,
        }
    }

    pub fn preferred(t: T, x: T, y: T, z: T) -> Self {
        Self { t, x, y, z, frame: Frame::Preferred }
    }

    pub fn lab(t: T, x: T, y: T, z: T) -> Self {
        Self { t, x, y, z, frame: Frame::Lab }
    }

    pub fn position(&self) -> Vec3<T> {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.position().is_finite()
    }

    /// `(other.t - self.t, other.r - self.r)`; both events must share a frame.
    pub fn separation_to(&self, other: &Self) -> Result<(T, Vec3<T>)> {
        if self.frame != other.frame {
            return Err(Error::FrameMismatch { expected: self.frame, found: other.frame });
        }
        Ok((other.t - self.t, other.position() - self.position()))
    }

    pub(crate) fn require_frame(&self, frame: Frame) -> Result<()> {
        if self.frame != frame {
            return Err(Error::FrameMismatch { expected: frame, found: self.frame });
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("event coordinates"));
        }
        Ok(())
    }

    /// Largest coordinate difference; `None` if the frames differ.
    pub fn max_abs_diff(&self, other: &Self) -> Option<T> {
        let (dt, dr) = self.separation_to(other).ok()?;
        Some(dt.abs().max(dr.x.abs()).max(dr.y.abs()).max(dr.z.abs()))
    }
}

/// Lorentz boost from the preferred frame to a laboratory frame moving at `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Boost<T> {
    v: Velocity<T>,
    gamma: T,
    /// `(γ-1)/v²`, computed as `γ²/(1+γ)`.
    k: T,
}

impl<T: Scalar> Boost<T> {
    pub fn new(v: Velocity<T>) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite("frame velocity"));
        }
        let v2 = v.norm_sq();
        if v2 >= T::one() {
            return Err(Error::SuperluminalFrame { speed: v.norm().as_f64() });
        }
        let gamma = T::one() / (T::one() - v2).sqrt();
        let k = gamma * gamma / (T::one() + gamma);
        Ok(Self { v, gamma, k })
    }

    /// Standard configuration: motion along the shared x-axis.
    pub fn along_x(v: T) -> Result<Self> {
        Self::new(Vec3::along_x(v))
    }

    pub fn identity() -> Self {
        Self { v: Vec3::zero(), gamma: T::one(), k: T::half() }
    }

    pub fn velocity(&self) -> Velocity<T> {
        self.v
    }

    pub fn speed(&self) -> T {
        self.v.norm()
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn inverse(&self) -> Self {
        Self { v: -self.v, gamma: self.gamma, k: self.k }
    }

    /// Raw transform with this boost's velocity, ignoring frame tags.
    fn apply(&self, t: T, r: Vec3<T>) -> (T, Vec3<T>) {
        let rv = r.dot(self.v);
        let r_out = r + self.v * (self.k * rv) - self.v * (self.gamma * t);
        let t_out = self.gamma * (t - rv);
        (t_out, r_out)
    }

    fn compose(&self, u: Velocity<T>) -> Result<Velocity<T>> {
        if !u.is_finite() {
            return Err(Error::NonFinite("signal velocity"));
        }
        let uv = u.dot(self.v);
        let den = T::one() - uv;
        let scale = T::one().max(u.norm() * self.v.norm());
        if den.abs() <= T::algebraic_tol() * scale {
            return Err(Error::Divergent);
        }
        let num = u + self.v * (self.k * uv) - self.v * self.gamma;
        Ok(num / (self.gamma * den))
    }
}

/// Re-expresses a preferred-frame event in laboratory coordinates.
pub fn boost_event<T: Scalar>(e: &Event<T>, b: &Boost<T>) -> Result<Event<T>> {
    e.require_frame(Frame::Preferred)?;
    let (t, r) = b.apply(e.t, e.position());
    Ok(Event::new(t, r, Frame::Lab))
}

/// Re-expresses a laboratory event in preferred-frame coordinates.
pub fn inverse_boost_event<T: Scalar>(e: &Event<T>, b: &Boost<T>) -> Result<Event<T>> {
    e.require_frame(Frame::Lab)?;
    let (t, r) = b.inverse().apply(e.t, e.position());
    Ok(Event::new(t, r, Frame::Preferred))
}

/// Converts an event to the requested frame (no-op if it is already there).
pub fn to_frame<T: Scalar>(e: &Event<T>, b: &Boost<T>, frame: Frame) -> Result<Event<T>> {
    match (e.frame, frame) {
        (Frame::Preferred, Frame::Lab) => boost_event(e, b),
        (Frame::Lab, Frame::Preferred) => inverse_boost_event(e, b),
        _ => Ok(*e),
    }
}

/// Velocity measured in the preferred frame, seen from the laboratory frame.
///
/// Fails with [`Error::Divergent`] on the pole `u·v = 1`.
pub fn compose_velocity_to_lab<T: Scalar>(u: Velocity<T>, b: &Boost<T>) -> Result<Velocity<T>> {
    b.compose(u)
}

/// Velocity measured in the laboratory frame, seen from the preferred frame.
///
/// Fails with [`Error::Divergent`] on the pole `u'·v = -1`.
pub fn compose_velocity_to_preferred<T: Scalar>(
    u_lab: Velocity<T>,
    b: &Boost<T>,
) -> Result<Velocity<T>> {
    b.inverse().compose(u_lab)
}

/// Causal character of the separation between two events.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Separation {
    TimeLike,
    SpaceLike,
    LightLike,
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Separation::TimeLike => "timelike",
            Separation::SpaceLike => "spacelike",
            Separation::LightLike => "lightlike",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalClass<T> {
    /// `Δt² - |Δr|²`.
    pub s2: T,
    pub class: Separation,
}

/// Classifies the separation of two events expressed in the same frame.
pub fn interval<T: Scalar>(e1: &Event<T>, e2: &Event<T>) -> Result<IntervalClass<T>> {
    interval_with_tol(e1, e2, T::algebraic_tol())
}

/// As [`interval`], with `tol` applied to `s2` normalized by `Δt² + |Δr|²`.
pub fn interval_with_tol<T: Scalar>(e1: &Event<T>, e2: &Event<T>, tol: T) -> Result<IntervalClass<T>> {
    let (dt, dr) = e1.separation_to(e2)?;
    let dr2 = dr.norm_sq();
    let s2 = dt * dt - dr2;
    let scale = dt * dt + dr2;
    let class = if s2.abs() <= tol * scale {
        Separation::LightLike
    } else if s2 > T::zero() {
        Separation::TimeLike
    } else {
        Separation::SpaceLike
    };
    Ok(IntervalClass { s2, class })
}
