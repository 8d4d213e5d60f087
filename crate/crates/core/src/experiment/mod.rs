//! Entangled-pair experiments run in the laboratory and adjudicated in the preferred frame.
//!
//! A source at rest at the lab origin emits two photons at `t' = 0`. Photon 1
//! travels toward `-x` (or `-y`), photon 2 toward `+x` (or `+y`); detector
//! distances and detour lengths are laboratory quantities. The first detection
//! in the preferred frame triggers the superluminal interaction, and the pair
//! is correlated when the front reaches the partner no later than its
//! detection.

mod sweep;

pub use sweep::{detour_added_length, detour_sweep, OrderTransition, SweepRow, SweepTable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ftl::{arrival_event, narrate, reaches_in_lab, Arrival, FtlSignal, FtlSpeed, LabNarrative};
use crate::kinematics::{interval_with_tol, Boost, Event, IntervalClass, Separation, Vec3, Velocity};
use crate::scalar::{approx_eq_rel, Scalar, Tolerances};
use crate::worldline::{Segment, Worldline};

/// Detector layout, in laboratory lengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Geometry<T> {
    /// Detectors at `x' = -l1` and `x' = +l2`.
    Collinear { l1: T, l2: T },
    /// Detectors at `y' = -l1` and `y' = +l2`.
    Transverse { l1: T, l2: T },
    /// Collinear layout with extra path length inserted in each arm.
    Detoured { l1: T, l2: T, left_extra: T, right_extra: T },
}

impl<T: Scalar> Geometry<T> {
    pub fn arms(&self) -> (T, T) {
        match *self {
            Geometry::Collinear { l1, l2 } | Geometry::Transverse { l1, l2 } | Geometry::Detoured { l1, l2, .. } => {
                (l1, l2)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (l1, l2) = self.arms();
        for l in [l1, l2] {
            if !(l.is_finite() && l > T::zero()) {
                return Err(Error::InvalidLength(l.as_f64()));
            }
        }
        if let Geometry::Detoured { left_extra, right_extra, .. } = *self {
            for d in [left_extra, right_extra] {
                if !(d.is_finite() && d >= T::zero()) {
                    return Err(Error::InvalidLength(d.as_f64()));
                }
            }
        }
        Ok(())
    }

    /// Lab worldlines of photon 1 and photon 2.
    pub fn worldlines(&self) -> Result<(Worldline<T>, Worldline<T>)> {
        self.validate()?;
        let one = T::one();
        let emission = Event::lab(T::zero(), T::zero(), T::zero(), T::zero());
        let straight = |dir: Vec3<T>, l: T| vec![Segment::new(dir, l)];
        let detoured = |dir: Vec3<T>, l: T, extra: T| {
            if extra > T::zero() {
                let h = extra * T::half();
                vec![
                    Segment::new(Vec3::along_y(one), h),
                    Segment::new(dir, l),
                    Segment::new(Vec3::along_y(-one), h),
                ]
            } else {
                vec![Segment::new(dir, l)]
            }
        };
        let (s1, s2) = match *self {
            Geometry::Collinear { l1, l2 } => (straight(Vec3::along_x(-one), l1), straight(Vec3::along_x(one), l2)),
            Geometry::Transverse { l1, l2 } => (straight(Vec3::along_y(-one), l1), straight(Vec3::along_y(one), l2)),
            Geometry::Detoured { l1, l2, left_extra, right_extra } => (
                detoured(Vec3::along_x(-one), l1, left_extra),
                detoured(Vec3::along_x(one), l2, right_extra),
            ),
        };
        Ok((Worldline::new(emission, s1)?, Worldline::new(emission, s2)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig<T> {
    /// Velocity of the laboratory relative to the preferred frame.
    pub v: Velocity<T>,
    pub ftl: FtlSpeed<T>,
    pub geometry: Geometry<T>,
    pub tolerances: Tolerances<T>,
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn new(v: Velocity<T>, ftl: FtlSpeed<T>, geometry: Geometry<T>) -> Self {
        Self { v, ftl, geometry, tolerances: Tolerances::default() }
    }

    /// Standard configuration, lab moving along `+x` at speed `v`.
    pub fn collinear(v: T, ftl: FtlSpeed<T>, l1: T, l2: T) -> Self {
        Self::new(Vec3::along_x(v), ftl, Geometry::Collinear { l1, l2 })
    }

    pub fn validate(&self) -> Result<Boost<T>> {
        self.geometry.validate()?;
        if let FtlSpeed::Finite(u) = self.ftl {
            FtlSpeed::finite(u)?;
        }
        Boost::new(self.v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Photon {
    Nu1,
    Nu2,
}

impl Photon {
    pub fn partner(self) -> Self {
        match self {
            Photon::Nu1 => Photon::Nu2,
            Photon::Nu2 => Photon::Nu1,
        }
    }
}

/// Which photon is detected first in the preferred frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FirstInS {
    Nu1,
    Nu2,
    /// Equal preferred-frame times within tolerance; photon 1 triggers.
    Simultaneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderClass {
    Nu1FirstAllFrames,
    Nu2FirstAllFrames,
    /// Space-like detections: the order depends on the frame.
    FrameDependent,
}

impl OrderClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrderClass::Nu1FirstAllFrames => "nu1_first_all_frames",
            OrderClass::Nu2FirstAllFrames => "nu2_first_all_frames",
            OrderClass::FrameDependent => "frame_dependent",
        }
    }
}

/// A detection described in both frames.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection<T> {
    pub preferred: Event<T>,
    pub lab: Event<T>,
}

/// Full event record of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome<T> {
    pub boost: Boost<T>,
    pub ftl: FtlSpeed<T>,
    pub detection1: Detection<T>,
    pub detection2: Detection<T>,
    pub first_in_s: FirstInS,
    pub trigger_photon: Photon,
    /// Trigger event, preferred frame.
    pub ftl_trigger: Event<T>,
    /// Arrival at the partner photon, preferred frame.
    pub ftl_arrival: Arrival<T>,
    pub correlated: bool,
    pub pair_interval: IntervalClass<T>,
    pub order_class: OrderClass,
    /// Lab description of the trigger/arrival pair, when the front arrives.
    pub narrative: Option<LabNarrative<T>>,
    pub tolerances: Tolerances<T>,
}

impl<T: Scalar> Outcome<T> {
    pub fn detection(&self, p: Photon) -> &Detection<T> {
        match p {
            Photon::Nu1 => &self.detection1,
            Photon::Nu2 => &self.detection2,
        }
    }

    pub fn partner_detection(&self) -> &Detection<T> {
        self.detection(self.trigger_photon.partner())
    }

    /// Whether the front arrived exactly at the partner's detection (within tolerance).
    pub fn arrival_on_boundary(&self) -> bool {
        match self.ftl_arrival {
            Arrival::At(a) => approx_eq_rel(a.t, self.partner_detection().preferred.t, self.tolerances.derived),
            Arrival::NoArrival => false,
        }
    }

    /// Photon detected first in the lab (photon 1 on a tie).
    pub fn lab_first(&self) -> Photon {
        if self.detection2.lab.t < self.detection1.lab.t {
            Photon::Nu2
        } else {
            Photon::Nu1
        }
    }
}

/// True iff the front reached the partner no later than its preferred-frame detection.
pub fn correlation_predicate<T: Scalar>(o: &Outcome<T>) -> bool {
    match o.ftl_arrival {
        Arrival::At(a) => {
            let td = o.partner_detection().preferred.t;
            a.t <= td || approx_eq_rel(a.t, td, o.tolerances.derived)
        }
        Arrival::NoArrival => false,
    }
}

/// Correlation flag recomputed from the laboratory record alone: the lab
/// trigger and partner detection, judged against the lab-frame front.
pub fn correlated_from_lab_record<T: Scalar>(o: &Outcome<T>) -> Result<bool> {
    reaches_in_lab(
        o.ftl,
        &o.boost,
        &o.detection(o.trigger_photon).lab,
        &o.partner_detection().lab,
        o.tolerances.derived,
    )
}

fn order_class<T: Scalar>(d1: &Event<T>, d2: &Event<T>, iv: &IntervalClass<T>) -> OrderClass {
    match iv.class {
        Separation::SpaceLike => OrderClass::FrameDependent,
        _ if d2.t < d1.t => OrderClass::Nu2FirstAllFrames,
        _ => OrderClass::Nu1FirstAllFrames,
    }
}

/// Runs an experiment of any geometry.
pub fn run<T: Scalar>(cfg: &ExperimentConfig<T>) -> Result<Outcome<T>> {
    let boost = cfg.validate()?;
    let tol = cfg.tolerances;
    let (w1_lab, w2_lab) = cfg.geometry.worldlines()?;
    let w1 = w1_lab.to_frame(&boost, crate::kinematics::Frame::Preferred)?;
    let w2 = w2_lab.to_frame(&boost, crate::kinematics::Frame::Preferred)?;

    let detection1 = Detection { preferred: w1.detection(), lab: w1_lab.detection() };
    let detection2 = Detection { preferred: w2.detection(), lab: w2_lab.detection() };

    let (t1, t2) = (detection1.preferred.t, detection2.preferred.t);
    let first_in_s = if approx_eq_rel(t1, t2, tol.derived) {
        FirstInS::Simultaneous
    } else if t1 < t2 {
        FirstInS::Nu1
    } else {
        FirstInS::Nu2
    };
    let (trigger_photon, partner) = match first_in_s {
        FirstInS::Nu2 => (Photon::Nu2, &w1),
        _ => (Photon::Nu1, &w2),
    };
    let ftl_trigger = match trigger_photon {
        Photon::Nu1 => detection1.preferred,
        Photon::Nu2 => detection2.preferred,
    };
    let signal = FtlSignal::new(ftl_trigger, cfg.ftl)?;
    let ftl_arrival = arrival_event(&signal, partner, tol.derived)?;

    let pair_interval = interval_with_tol(&detection1.lab, &detection2.lab, tol.algebraic)?;
    let order_class = order_class(&detection1.lab, &detection2.lab, &pair_interval);
    let narrative = match ftl_arrival {
        Arrival::At(a) => Some(narrate(&ftl_trigger, &a, &boost, tol.derived)?),
        Arrival::NoArrival => None,
    };

    let mut outcome = Outcome {
        boost,
        ftl: cfg.ftl,
        detection1,
        detection2,
        first_in_s,
        trigger_photon,
        ftl_trigger,
        ftl_arrival,
        correlated: false,
        pair_interval,
        order_class,
        narrative,
        tolerances: tol,
    };
    outcome.correlated = correlation_predicate(&outcome);
    Ok(outcome)
}

/// Collinear run (detectors on the lab x-axis).
pub fn run_collinear<T: Scalar>(cfg: &ExperimentConfig<T>) -> Result<Outcome<T>> {
    match cfg.geometry {
        Geometry::Collinear { .. } => run(cfg),
        _ => Err(Error::Unsupported("run_collinear needs a collinear geometry".into())),
    }
}

/// Lab distance `l1 = (1+v)/(1-v) · l2` that puts both detections equidistant
/// from the source in the preferred frame.
pub fn equidistant_l1<T: Scalar>(l2: T, v: T) -> Result<T> {
    if !(l2.is_finite() && l2 > T::zero()) {
        return Err(Error::InvalidLength(l2.as_f64()));
    }
    if !(v.is_finite() && v >= T::zero()) {
        return Err(Error::NonFinite("frame speed"));
    }
    if v >= T::one() {
        return Err(Error::SuperluminalFrame { speed: v.as_f64() });
    }
    Ok((T::one() + v) / (T::one() - v) * l2)
}

/// Outcome of the equidistant-in-S test together with both lab narratives.
#[derive(Clone, Debug, PartialEq)]
pub struct EquidistantReport<T> {
    pub l1: T,
    pub outcome: Outcome<T>,
    /// Photon detected first in the lab.
    pub lab_first: Photon,
    /// Lab route: front from photon 2's detection reaches photon 1 before it is detected.
    pub lab_nu2_reaches_nu1: bool,
    /// Lab route: front from photon 1's detection reaches photon 2 before it is detected.
    pub lab_nu1_reaches_nu2: bool,
}

impl<T> EquidistantReport<T> {
    pub fn lab_correlated(&self) -> bool {
        self.lab_nu1_reaches_nu2 || self.lab_nu2_reaches_nu1
    }

    pub fn narratives_agree(&self) -> bool {
        self.lab_correlated() == self.outcome.correlated
    }
}

/// Collinear run with `l1` chosen by [`equidistant_l1`].
pub fn run_equidistant_test<T: Scalar>(l2: T, v: T, ftl: FtlSpeed<T>) -> Result<EquidistantReport<T>> {
    let l1 = equidistant_l1(l2, v)?;
    let cfg = ExperimentConfig::collinear(v, ftl, l1, l2);
    let outcome = run_collinear(&cfg)?;
    let (d1, d2) = (outcome.detection1.lab, outcome.detection2.lab);
    let tol = outcome.tolerances.derived;
    let lab_nu2_reaches_nu1 = d2.t <= d1.t && reaches_in_lab(ftl, &outcome.boost, &d2, &d1, tol)?;
    let lab_nu1_reaches_nu2 = d1.t <= d2.t && reaches_in_lab(ftl, &outcome.boost, &d1, &d2, tol)?;
    Ok(EquidistantReport { l1, lab_first: outcome.lab_first(), outcome, lab_nu2_reaches_nu1, lab_nu1_reaches_nu2 })
}

/// Preferred-frame interaction velocity recovered from its transverse lab speed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransverseReading<T> {
    /// Lab speed along `+y`.
    pub lab_speed_y: T,
    pub ubar_x: T,
    pub ubar_y: T,
    /// `sqrt(v² + ū'_y² (1 - v²))`.
    pub ubar: T,
}

/// Preferred-frame interaction velocity from the lab speed `uy_prime` of a
/// signal crossing the lab along `y`, with the lab moving along `x` at `v`.
pub fn transverse_from_lab_speed<T: Scalar>(v: T, uy_prime: T) -> Result<TransverseReading<T>> {
    let b = Boost::along_x(v)?;
    if !uy_prime.is_finite() {
        return Err(Error::NonFinite("transverse lab speed"));
    }
    let ubar = (v * v + uy_prime * uy_prime * (T::one() - v * v)).sqrt();
    Ok(TransverseReading { lab_speed_y: uy_prime, ubar_x: v, ubar_y: uy_prime / b.gamma(), ubar })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransverseOutcome<T> {
    pub outcome: Outcome<T>,
    /// `None` when the interaction is instantaneous across the lab y-axis.
    pub reading: Option<TransverseReading<T>>,
}

/// Transverse run: detectors on the lab y-axis, lab moving along x.
pub fn run_transverse<T: Scalar>(cfg: &ExperimentConfig<T>) -> Result<TransverseOutcome<T>> {
    if !matches!(cfg.geometry, Geometry::Transverse { .. }) {
        return Err(Error::Unsupported("run_transverse needs a transverse geometry".into()));
    }
    if cfg.v.y != T::zero() || cfg.v.z != T::zero() {
        return Err(Error::Unsupported("transverse reading assumes motion along x".into()));
    }
    let outcome = run(cfg)?;
    let slowness = crate::ftl::lab_front_slowness(cfg.ftl, &outcome.boost, Vec3::along_y(T::one()));
    let reading = if slowness > T::zero() {
        Some(transverse_from_lab_speed(cfg.v.x, T::one() / slowness)?)
    } else {
        None
    };
    Ok(TransverseOutcome { outcome, reading })
}
