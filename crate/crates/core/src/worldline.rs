//! Piecewise-linear photon worldlines.

use crate::error::{Error, Result};
use crate::kinematics::{to_frame, Boost, Event, Frame, Vec3};
use crate::scalar::Scalar;

/// Straight run of a photon: unit direction, traversed at light speed for `duration`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<T> {
    pub direction: Vec3<T>,
    pub duration: T,
}

impl<T: Scalar> Segment<T> {
    pub fn new(direction: Vec3<T>, duration: T) -> Self {
        Self { direction, duration }
    }
}

/// Photon path from emission to detection. Detection terminates the worldline.
#[derive(Clone, Debug, PartialEq)]
pub struct Worldline<T> {
    emission: Event<T>,
    segments: Vec<Segment<T>>,
}

impl<T: Scalar> Worldline<T> {
    /// Builds a worldline, rejecting segments that are not traversed at light speed.
    pub fn new(emission: Event<T>, segments: Vec<Segment<T>>) -> Result<Self> {
        if !emission.is_finite() {
            return Err(Error::NonFinite("worldline emission"));
        }
        for (i, s) in segments.iter().enumerate() {
            if !s.duration.is_finite() || s.duration < T::zero() {
                return Err(Error::MalformedWorldline(format!(
                    "segment {i} has invalid duration {}",
                    s.duration
                )));
            }
            let n = s.direction.norm();
            if !n.is_finite() || (n - T::one()).abs() > T::derived_tol() {
                return Err(Error::MalformedWorldline(format!(
                    "segment {i} is not lightlike (|direction| = {n})"
                )));
            }
        }
        Ok(Self { emission, segments })
    }

    /// Builds a worldline through consecutive events, each pair lightlike-separated.
    pub fn from_vertices(vertices: &[Event<T>]) -> Result<Self> {
        let (first, rest) = vertices
            .split_first()
            .ok_or_else(|| Error::MalformedWorldline("no vertices".into()))?;
        let mut segments = Vec::with_capacity(rest.len());
        let mut prev = first;
        for (i, v) in rest.iter().enumerate() {
            let (dt, dr) = prev.separation_to(v)?;
            let len = dr.norm();
            if dt < T::zero() {
                return Err(Error::MalformedWorldline(format!("vertex {} runs backwards in time", i + 1)));
            }
            let scale = T::one().max(dt).max(len);
            if (len - dt).abs() > T::derived_tol() * scale {
                return Err(Error::MalformedWorldline(format!(
                    "segment {i} is not lightlike (length {len}, duration {dt})"
                )));
            }
            // Zero-length segments carry no direction.
            if let Some(direction) = dr.normalized() {
                segments.push(Segment::new(direction, dt));
            }
            prev = v;
        }
        Self::new(*first, segments)
    }

    pub fn frame(&self) -> Frame {
        self.emission.frame
    }

    pub fn emission(&self) -> Event<T> {
        self.emission
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn path_length(&self) -> T {
        self.segments.iter().fold(T::zero(), |acc, s| acc + s.duration)
    }

    /// All corner events, emission first and detection last.
    pub fn vertices(&self) -> Vec<Event<T>> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut cur = self.emission;
        out.push(cur);
        for s in &self.segments {
            cur = Event::new(cur.t + s.duration, cur.position() + s.direction * s.duration, cur.frame);
            out.push(cur);
        }
        out
    }

    pub fn detection(&self) -> Event<T> {
        *self.vertices().last().expect("at least the emission vertex")
    }

    /// Photon position at time `t`, or `None` outside `[emission.t, detection.t]`.
    pub fn position_at(&self, t: T) -> Option<Vec3<T>> {
        if t < self.emission.t {
            return None;
        }
        let mut start = self.emission;
        for s in &self.segments {
            let end_t = start.t + s.duration;
            if t <= end_t {
                return Some(start.position() + s.direction * (t - start.t));
            }
            start = Event::new(end_t, start.position() + s.direction * s.duration, start.frame);
        }
        (t <= start.t).then(|| start.position())
    }

    /// Same worldline described in another frame.
    pub fn to_frame(&self, b: &Boost<T>, frame: Frame) -> Result<Self> {
        let vs = self
            .vertices()
            .iter()
            .map(|e| to_frame(e, b, frame))
            .collect::<Result<Vec<_>>>()?;
        Self::from_vertices(&vs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_detection() {
        let w = Worldline::new(
            Event::lab(0.0, 0.0, 0.0, 0.0),
            vec![Segment::new(Vec3::along_x(-1.0), 2.0)],
        )
        .unwrap();
        let d = w.detection();
        assert_eq!((d.t, d.x), (2.0, -2.0));
        assert_eq!(w.position_at(1.0).unwrap().x, -1.0);
        assert!(w.position_at(2.5).is_none());
        assert!(w.position_at(-0.1).is_none());
    }

    #[test]
    fn rejects_non_lightlike_segments() {
        let err = Worldline::new(
            Event::lab(0.0, 0.0, 0.0, 0.0),
            vec![Segment::new(Vec3::along_x(0.5), 1.0)],
        );
        assert!(matches!(err, Err(Error::MalformedWorldline(_))));
        let err = Worldline::from_vertices(&[Event::lab(0.0, 0.0, 0.0, 0.0), Event::lab(1.0, 2.0, 0.0, 0.0)]);
        assert!(matches!(err, Err(Error::MalformedWorldline(_))));
        let err = Worldline::new(
            Event::lab(0.0, 0.0, 0.0, 0.0),
            vec![Segment::new(Vec3::along_x(1.0), -1.0)],
        );
        assert!(err.is_err());
    }

    #[test]
    fn boosted_detour_stays_lightlike() {
        let w = Worldline::new(
            Event::lab(0.0, 0.0, 0.0, 0.0),
            vec![
                Segment::new(Vec3::along_y(1.0), 0.5),
                Segment::new(Vec3::along_x(1.0), 2.0),
                Segment::new(Vec3::along_y(-1.0), 0.5),
            ],
        )
        .unwrap();
        assert_eq!(w.path_length(), 3.0);
        let b = Boost::along_x(0.6).unwrap();
        let s = w.to_frame(&b, Frame::Preferred).unwrap();
        assert_eq!(s.frame(), Frame::Preferred);
        let back = s.to_frame(&b, Frame::Lab).unwrap();
        let d: Event<f64> = back.detection();
        assert!((d.t - 3.0).abs() < 1e-12 && (d.x - 2.0).abs() < 1e-12 && d.y.abs() < 1e-12);
    }
}
