//! The superluminal interaction.
//!
//! The interaction propagates isotropically in the preferred frame with a
//! constant speed `ū > 1`, or instantaneously. Its front is therefore a sphere
//! expanding from the trigger event in preferred-frame coordinates; seen from
//! the laboratory the same front is anisotropic, and along some directions it
//! appears to run backwards in lab time.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{boost_event, compose_velocity_to_lab, Boost, Event, Frame, Vec3};
use crate::scalar::Scalar;
use crate::worldline::Worldline;

/// Speed of the interaction in the preferred frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FtlSpeed<T> {
    /// Strictly superluminal, `ū > 1`.
    Finite(T),
    /// The `ū -> ∞` limit, kept symbolic.
    Instantaneous,
}

impl<T: Scalar> FtlSpeed<T> {
    pub fn finite(ubar: T) -> Result<Self> {
        if ubar.is_finite() && ubar > T::one() {
            Ok(FtlSpeed::Finite(ubar))
        } else {
            Err(Error::InvalidFtlSpeed(ubar.as_f64()))
        }
    }

    pub fn is_instantaneous(&self) -> bool {
        matches!(self, FtlSpeed::Instantaneous)
    }

    pub fn value(&self) -> Option<T> {
        match *self {
            FtlSpeed::Finite(u) => Some(u),
            FtlSpeed::Instantaneous => None,
        }
    }
}

impl<T: Scalar> fmt::Display for FtlSpeed<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FtlSpeed::Finite(u) => write!(f, "{u}"),
            FtlSpeed::Instantaneous => f.write_str("inf"),
        }
    }
}

/// An interaction launched from a preferred-frame event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FtlSignal<T> {
    origin: Event<T>,
    speed: FtlSpeed<T>,
}

impl<T: Scalar> FtlSignal<T> {
    pub fn new(origin: Event<T>, speed: FtlSpeed<T>) -> Result<Self> {
        origin.require_frame(Frame::Preferred)?;
        if let FtlSpeed::Finite(u) = speed {
            FtlSpeed::finite(u)?;
        }
        Ok(Self { origin, speed })
    }

    pub fn origin(&self) -> Event<T> {
        self.origin
    }

    pub fn speed(&self) -> FtlSpeed<T> {
        self.speed
    }

    /// `ū(t - t0) - |r - r0|`; non-negative once the front has passed `(t, r)`.
    /// `None` for the instantaneous variant.
    fn front_margin(&self, t: T, r: Vec3<T>) -> Option<T> {
        let u = self.speed.value()?;
        Some(u * (t - self.origin.t) - (r - self.origin.position()).norm())
    }

    /// Whether the preferred-frame event lies on or inside the front (inclusive within `tol` relative).
    pub fn reaches(&self, e: &Event<T>, tol: T) -> Result<bool> {
        let (dt, dr) = self.origin.separation_to(e)?;
        let dist = dr.norm();
        Ok(match self.speed {
            FtlSpeed::Instantaneous => dt >= -tol * T::one().max(dt.abs()).max(dist),
            FtlSpeed::Finite(u) => {
                let scale = T::one().max(u * dt.abs()).max(dist);
                u * dt - dist >= -tol * scale && dt >= -tol * scale
            }
        })
    }
}

/// Speed of a signal along a direction at angle `theta` from the frame velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionalSpeed<T> {
    pub theta: T,
    pub speed: T,
    pub frame: Frame,
}

/// Lab-frame appearance of a signal launched in a given preferred-frame direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LabSpeed<T> {
    Finite(DirectionalSpeed<T>),
    /// The signal is instantaneous in the lab frame.
    Divergent,
}

/// Orthonormal pair `(n, e)` spanning the plane in which angles are measured:
/// `n` along the frame velocity (x̂ when at rest), `e` perpendicular to it.
pub(crate) fn angle_basis<T: Scalar>(b: &Boost<T>) -> (Vec3<T>, Vec3<T>) {
    let n = b.velocity().normalized().unwrap_or_else(|| Vec3::along_x(T::one()));
    let e = Vec3::new(T::zero(), T::zero(), T::one())
        .cross(n)
        .normalized()
        .unwrap_or_else(|| Vec3::along_x(T::one()).cross(n).normalized().expect("n is a unit vector"));
    (n, e)
}

/// Lab-frame velocity of a preferred-frame signal travelling along unit direction `d`.
///
/// For the instantaneous variant this is the `ū -> ∞` limit of the velocity
/// composition, `(d + (γ-1)/v² (d·v) v) / (-γ d·v)`.
pub fn lab_velocity<T: Scalar>(speed: FtlSpeed<T>, b: &Boost<T>, d: Vec3<T>) -> Result<Vec3<T>> {
    match speed {
        FtlSpeed::Finite(u) => compose_velocity_to_lab(d * u, b),
        FtlSpeed::Instantaneous => {
            let v = b.velocity();
            let dv = d.dot(v);
            if dv.abs() <= T::algebraic_tol() {
                return Err(Error::Divergent);
            }
            let g = b.gamma();
            let k = g * g / (T::one() + g);
            Ok((d + v * (k * dv)) / (-g * dv))
        }
    }
}

/// Lab-frame speed of a signal launched at angle `theta` (in the preferred
/// frame, measured from the frame velocity).
///
/// The returned `theta` is the direction of the signal's lab velocity,
/// measured from the same axis.
pub fn lab_speed<T: Scalar>(speed: FtlSpeed<T>, b: &Boost<T>, theta: T) -> LabSpeed<T> {
    let (n, e) = angle_basis(b);
    let d = n * theta.cos() + e * theta.sin();
    match lab_velocity(speed, b, d) {
        Ok(u) => LabSpeed::Finite(DirectionalSpeed {
            theta: u.dot(e).atan2(u.dot(n)),
            speed: u.norm(),
            frame: Frame::Lab,
        }),
        Err(_) => LabSpeed::Divergent,
    }
}

/// Signed lab-frame slowness `Δt'/ρ` at which the front launched from a lab
/// event crosses distance `ρ` along the lab unit direction `n`.
///
/// Negative values mean the far point is reached earlier in lab time than the
/// trigger; zero means the front is instantaneous in the lab along `n`.
///
/// Closed form: the front condition `ū Δt = |Δr|`, rewritten in lab
/// coordinates with `Δt' = σρ`, is the quadratic
/// `γ²(ū²-v²)σ² + 2γ²c(ū²-1)σ + γ²c²(ū²-1) - 1 = 0` with `c = v·n`; the front
/// is the larger root. In the instantaneous limit `σ = -c`.
pub fn lab_front_slowness<T: Scalar>(speed: FtlSpeed<T>, b: &Boost<T>, n: Vec3<T>) -> T {
    let c = b.velocity().dot(n);
    let u = match speed {
        FtlSpeed::Instantaneous => return -c,
        FtlSpeed::Finite(u) => u,
    };
    let g2 = b.gamma() * b.gamma();
    let v2 = b.velocity().norm_sq();
    let u2m1 = u * u - T::one();
    let a = g2 * (u * u - v2);
    let bh = g2 * c * u2m1;
    let cc = g2 * c * c * u2m1 - T::one();
    let root = (bh * bh - a * cc).max(T::zero()).sqrt();
    if bh >= T::zero() {
        if bh + root == T::zero() {
            T::zero()
        } else {
            -cc / (bh + root)
        }
    } else {
        (-bh + root) / a
    }
}

/// Lab-frame reachability test: does the front triggered at lab event
/// `trigger` pass `target` (inclusive within `tol` relative)?
///
/// Works entirely from lab coordinates and the lab-frame front slowness, so it
/// is an independent route to [`FtlSignal::reaches`].
pub fn reaches_in_lab<T: Scalar>(
    speed: FtlSpeed<T>,
    b: &Boost<T>,
    trigger: &Event<T>,
    target: &Event<T>,
    tol: T,
) -> Result<bool> {
    trigger.require_frame(Frame::Lab)?;
    let (dt, dr) = trigger.separation_to(target)?;
    let rho = dr.norm();
    let scale = T::one().max(dt.abs()).max(rho);
    let needed = match dr.normalized() {
        Some(n) => lab_front_slowness(speed, b, n) * rho,
        None => T::zero(),
    };
    Ok(dt - needed >= -tol * scale)
}

/// Result of propagating a front to a photon worldline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Arrival<T> {
    At(Event<T>),
    /// The photon was detected before the front reached it.
    NoArrival,
}

impl<T: Scalar> Arrival<T> {
    pub fn event(&self) -> Option<Event<T>> {
        match self {
            Arrival::At(e) => Some(*e),
            Arrival::NoArrival => None,
        }
    }
}

/// Earliest event at which the front reaches the photon on `target`, both in
/// preferred-frame coordinates.
///
/// The front gains on a light-speed photon at rate at least `ū - 1 > 0`, so
/// the margin `ū(t - t0) - |p(t) - r0|` is increasing along the worldline and
/// the crossing is unique. A crossing within `tol` (relative) of the detection
/// counts as an arrival.
pub fn arrival_event<T: Scalar>(signal: &FtlSignal<T>, target: &Worldline<T>, tol: T) -> Result<Arrival<T>> {
    if target.frame() != Frame::Preferred {
        return Err(Error::FrameMismatch { expected: Frame::Preferred, found: target.frame() });
    }
    let origin = signal.origin();
    let emission = target.emission();
    let detection = target.detection();
    let start_t = origin.t.max(emission.t);
    let at = |t: T| -> Event<T> {
        let p = target.position_at(t).expect("time within worldline span");
        Event::new(t, p, Frame::Preferred)
    };

    let ubar = match signal.speed() {
        FtlSpeed::Instantaneous => {
            let scale = T::one().max(start_t.abs()).max(detection.t.abs());
            return Ok(if start_t <= detection.t {
                Arrival::At(at(start_t))
            } else if start_t - detection.t <= tol * scale {
                Arrival::At(detection)
            } else {
                Arrival::NoArrival
            });
        }
        FtlSpeed::Finite(u) => u,
    };

    if start_t <= detection.t {
        let margin_start = signal
            .front_margin(start_t, target.position_at(start_t).expect("start within span"))
            .expect("finite speed");
        if margin_start >= T::zero() {
            return Ok(Arrival::At(at(start_t)));
        }
        let mut seg_start = emission;
        for seg in target.segments() {
            let seg_end_t = seg_start.t + seg.duration;
            let seg_end = Event::new(seg_end_t, seg_start.position() + seg.direction * seg.duration, Frame::Preferred);
            if seg_end_t >= start_t {
                let end_margin = signal.front_margin(seg_end_t, seg_end.position()).expect("finite speed");
                if end_margin >= T::zero() {
                    let t0 = seg_start.t.max(start_t);
                    let p0 = target.position_at(t0).expect("segment start within span");
                    let tau = crossing_time(ubar, t0 - origin.t, p0 - origin.position(), seg.direction)
                        .max(T::zero())
                        .min(seg_end_t - t0);
                    return Ok(Arrival::At(Event::new(t0 + tau, p0 + seg.direction * tau, Frame::Preferred)));
                }
            }
            seg_start = seg_end;
        }
    }

    // Inclusive boundary: a front landing on the detection within tolerance counts.
    if signal.reaches(&detection, tol)? {
        Ok(Arrival::At(detection))
    } else {
        Ok(Arrival::NoArrival)
    }
}

/// Positive root τ of `ū²(σ+τ)² = |w + dτ|²`, given that the front has not yet
/// reached the start point (`ūσ < |w|`).
fn crossing_time<T: Scalar>(ubar: T, sigma: T, w: Vec3<T>, d: Vec3<T>) -> T {
    let u2 = ubar * ubar;
    let a = u2 - T::one();
    let bh = u2 * sigma - w.dot(d);
    let c = u2 * sigma * sigma - w.norm_sq();
    let root = (bh * bh - a * c).max(T::zero()).sqrt();
    if bh >= T::zero() {
        -c / (bh + root)
    } else {
        (-bh + root) / a
    }
}

/// How the laboratory describes a trigger/arrival pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NarrativeKind {
    /// Trigger precedes arrival in the lab: an ordinary forward signal.
    ForwardSignal,
    /// Arrival precedes trigger in the lab: the partner acquires its state
    /// "spontaneously", then a signal runs back to the trigger point.
    SpontaneousForcing,
    /// Trigger and arrival are simultaneous in the lab.
    InstantaneousInLab,
}

/// Roles of the two events in a lab narrative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NarrativeRole {
    Trigger,
    Arrival,
}

/// Lab-frame account of one preferred-frame trigger/arrival pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabNarrative<T> {
    pub trigger: Event<T>,
    pub arrival: Event<T>,
    pub kind: NarrativeKind,
    /// Lab distance between the two events.
    pub distance: T,
    /// Lab time between the two events (non-negative).
    pub duration: T,
    /// Apparent lab speed `distance / duration`; `None` when instantaneous in the lab.
    pub apparent_speed: Option<T>,
}

impl<T: Scalar> LabNarrative<T> {
    /// Both events ordered by lab time.
    pub fn ordered(&self) -> [(NarrativeRole, Event<T>); 2] {
        if self.kind == NarrativeKind::SpontaneousForcing {
            [(NarrativeRole::Arrival, self.arrival), (NarrativeRole::Trigger, self.trigger)]
        } else {
            [(NarrativeRole::Trigger, self.trigger), (NarrativeRole::Arrival, self.arrival)]
        }
    }
}

/// Describes the front's arrival at `target` from the laboratory.
/// `Ok(None)` when the front never reaches the photon.
pub fn induced_lab_narrative<T: Scalar>(
    signal: &FtlSignal<T>,
    b: &Boost<T>,
    target: &Worldline<T>,
    tol: T,
) -> Result<Option<LabNarrative<T>>> {
    let Arrival::At(arrival) = arrival_event(signal, target, tol)? else {
        return Ok(None);
    };
    Ok(Some(narrate(&signal.origin(), &arrival, b, tol)?))
}

pub(crate) fn narrate<T: Scalar>(
    trigger_s: &Event<T>,
    arrival_s: &Event<T>,
    b: &Boost<T>,
    tol: T,
) -> Result<LabNarrative<T>> {
    let trigger = boost_event(trigger_s, b)?;
    let arrival = boost_event(arrival_s, b)?;
    let (dt, dr) = trigger.separation_to(&arrival)?;
    let distance = dr.norm();
    let scale = T::one().max(trigger.t.abs()).max(arrival.t.abs());
    let kind = if dt.abs() <= tol * scale {
        NarrativeKind::InstantaneousInLab
    } else if dt > T::zero() {
        NarrativeKind::ForwardSignal
    } else {
        NarrativeKind::SpontaneousForcing
    };
    let duration = dt.abs();
    let apparent_speed = (kind != NarrativeKind::InstantaneousInLab).then(|| distance / duration);
    Ok(LabNarrative { trigger, arrival, kind, distance, duration, apparent_speed })
}
