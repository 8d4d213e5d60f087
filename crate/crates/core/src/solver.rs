//! Recovery of the laboratory's velocity relative to the preferred frame from
//! lab-frame measurements of the interaction speed along several directions.
//!
//! Each measurement is a signed speed `u'` along a lab direction `phi`: the
//! front crosses the apparatus with lab velocity `u' (cos phi, sin phi)`, a
//! negative value meaning that the far end is reached first in lab time.
//! Transforming every measured velocity to the preferred frame with the trial
//! frame velocity must give the same speed `ū` in every direction; the solver
//! finds the planar frame velocity that makes the transformed speeds isotropic.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{compose_velocity_to_preferred, Boost, Vec3, Velocity};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalMeasurement<T> {
    /// Apparatus angle in the lab plane, radians.
    pub phi: T,
    /// Signed lab speed of the front along `phi`.
    pub u_prime: T,
    /// Relative (multiplicative) standard deviation of `u_prime`, if known.
    pub sigma: Option<T>,
}

impl<T: Scalar> DirectionalMeasurement<T> {
    pub fn new(phi: T, u_prime: T) -> Self {
        Self { phi, u_prime, sigma: None }
    }

    pub fn lab_velocity(&self) -> Velocity<T> {
        Vec3::planar(self.u_prime, self.phi)
    }

    /// Finite and superluminal: a subluminal reading cannot be the front.
    fn usable(&self) -> bool {
        self.phi.is_finite() && self.u_prime.is_finite() && self.u_prime.abs() > T::one()
    }
}

/// Forward-model output for one apparatus angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForwardMeasurement<T> {
    Measured(DirectionalMeasurement<T>),
    /// The front is instantaneous in the lab along this direction.
    Divergent { phi: T },
}

impl<T: Scalar> ForwardMeasurement<T> {
    pub fn measured(&self) -> Option<DirectionalMeasurement<T>> {
        match self {
            ForwardMeasurement::Measured(m) => Some(*m),
            ForwardMeasurement::Divergent { .. } => None,
        }
    }
}

fn wrap_pi<T: Scalar>(a: T) -> T {
    let two_pi = T::TAU();
    let mut r = a % two_pi;
    if r > T::PI() {
        r = r - two_pi;
    } else if r <= -T::PI() {
        r = r + two_pi;
    }
    r
}

fn wrap_two_pi<T: Scalar>(a: T) -> T {
    let two_pi = T::TAU();
    let r = a % two_pi;
    let r = if r < T::zero() { r + two_pi } else { r };
    if r >= two_pi {
        T::zero()
    } else {
        r
    }
}

/// Lab speeds of the interaction front along each lab direction in `phis`,
/// for a lab moving at planar velocity `v` and an interaction speed `ubar` in
/// the preferred frame.
///
/// Per direction, the preferred-frame launch angle whose lab image points
/// along `phi` is found by bisection: the lab displacement per unit
/// preferred-frame time, `N(α) = ū(α̂ + (γ-1)/v² (α̂·v) v) - γv`, traces an
/// ellipse enclosing the origin, so its polar angle is monotone in `α` and
/// the match is unique.
pub fn forward_measurements<T: Scalar>(v: Velocity<T>, ubar: T, phis: &[T]) -> Result<Vec<ForwardMeasurement<T>>> {
    if v.z != T::zero() {
        return Err(Error::Unsupported("frame velocity must lie in the lab plane".into()));
    }
    let b = Boost::new(v)?;
    if !(ubar.is_finite() && ubar > T::one()) {
        return Err(Error::InvalidFtlSpeed(ubar.as_f64()));
    }
    let g = b.gamma();
    let k = g * g / (T::one() + g);
    let image = |alpha: T| -> (Vec3<T>, T) {
        let d = Vec3::planar(T::one(), alpha);
        let dv = d.dot(v);
        let n = (d + v * (k * dv)) * ubar - v * g;
        (n, g * (T::one() - ubar * dv))
    };

    phis.iter()
        .map(|&phi| {
            if !phi.is_finite() {
                return Err(Error::NonFinite("measurement angle"));
            }
            let mismatch = |alpha: T| wrap_pi(image(alpha).0.planar_angle() - phi);

            const SCAN: usize = 64;
            let step = T::TAU() / T::lit(SCAN as f64);
            let mut bracket = None;
            let mut prev_a = T::zero();
            let mut prev_h = mismatch(prev_a);
            for j in 1..=SCAN {
                let a = step * T::lit(j as f64);
                let h = mismatch(a);
                if prev_h <= T::zero() && h >= T::zero() && h - prev_h < T::PI() {
                    bracket = Some((prev_a, a));
                    break;
                }
                prev_a = a;
                prev_h = h;
            }
            let (mut lo, mut hi) = bracket.expect("polar angle of the front image covers every direction");
            for _ in 0..200 {
                let mid = (lo + hi) * T::half();
                if mid <= lo || mid >= hi {
                    break;
                }
                if mismatch(mid) <= T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let alpha = (lo + hi) * T::half();
            let (n, den) = image(alpha);
            let scale = T::one().max(ubar * v.norm());
            if den.abs() <= T::algebraic_tol() * scale {
                return Ok(ForwardMeasurement::Divergent { phi });
            }
            let dir = Vec3::planar(T::one(), phi);
            Ok(ForwardMeasurement::Measured(DirectionalMeasurement::new(phi, n.dot(dir) / den)))
        })
        .collect()
}

/// Applies i.i.d. multiplicative Gaussian noise `u' (1 + sigma ε)`.
pub fn perturb_multiplicative<T, R>(ms: &[DirectionalMeasurement<T>], sigma: T, rng: &mut R) -> Vec<DirectionalMeasurement<T>>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let normal = Normal::new(T::zero(), sigma).expect("finite non-negative sigma");
    ms.iter()
        .map(|m| DirectionalMeasurement {
            phi: m.phi,
            u_prime: m.u_prime * (T::one() + normal.sample(rng)),
            sigma: Some(sigma),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions<T> {
    /// Coarse multi-start grid over frame speed.
    pub speed_starts: usize,
    /// Coarse multi-start grid over orientation.
    pub orientation_starts: usize,
    /// Number of best grid points refined by local descent.
    pub refined_starts: usize,
    pub max_iterations: usize,
    /// Central finite-difference step for the Jacobian.
    pub fd_step: T,
    /// Largest acceptable RMS isotropy violation. `None` picks `1e-6` plus ten times
    /// the measurement noise propagated into the residuals.
    pub residual_threshold: Option<T>,
    /// `ubar` above which the interaction is reported as instantaneous within resolution.
    pub instantaneous_threshold: T,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            speed_starts: 20,
            orientation_starts: 36,
            refined_starts: 8,
            max_iterations: 200,
            fd_step: T::lit(1e-7),
            residual_threshold: None,
            instantaneous_threshold: T::lit(1e6),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult<T> {
    /// Recovered frame speed, in `[0, 1)`.
    pub speed: T,
    /// Direction of the frame velocity in the lab plane, in `[0, 2π)`.
    pub orientation: T,
    /// Interaction speed in the preferred frame.
    pub ubar: T,
    /// RMS relative spread of `|u_i|² - 1` over the transformed measurements.
    pub residual: T,
    /// False when the measurements are isotropic: orientation is then meaningless.
    pub identifiable: bool,
    pub instantaneous_within_resolution: bool,
}

impl<T: Scalar> RecoveryResult<T> {
    pub fn velocity(&self) -> Velocity<T> {
        Vec3::planar(self.speed, self.orientation)
    }
}

/// Isotropy residuals for the frame velocity `tanh(a) (cos ψ, sin ψ)`.
struct Objective<T> {
    lab: Vec<Velocity<T>>,
}

impl<T: Scalar> Objective<T> {
    fn new(ms: &[DirectionalMeasurement<T>]) -> Self {
        Self { lab: ms.iter().map(|m| m.lab_velocity()).collect() }
    }

    fn frame_velocity(p: [T; 2]) -> Velocity<T> {
        Vec3::planar(p[0].tanh(), p[1])
    }

    /// Squared preferred-frame speeds; `None` if a composition hits its pole.
    fn speeds_sq(&self, v: Velocity<T>) -> Option<Vec<T>> {
        let b = Boost::new(v).ok()?;
        self.lab
            .iter()
            .map(|&u| compose_velocity_to_preferred(u, &b).ok().map(|w| w.norm_sq()))
            .collect()
    }

    /// Relative spread of `|u_i|² - 1` about its mean. The excess over light
    /// speed transforms as `(|u'|² - 1) / (γ² (1 + u'·v)²)`, so normalizing
    /// by its mean keeps the objective from vanishing as `|v| -> 1`, where every
    /// transformed speed collapses toward 1.
    fn residuals(&self, p: [T; 2]) -> Option<Vec<T>> {
        let excess: Vec<T> = self
            .speeds_sq(Self::frame_velocity(p))?
            .into_iter()
            .map(|q| q - T::one())
            .collect();
        let mean = excess.iter().fold(T::zero(), |a, &x| a + x) / T::lit(excess.len() as f64);
        if !(mean.is_finite() && mean > T::zero()) {
            return None;
        }
        Some(excess.into_iter().map(|x| x / mean - T::one()).collect())
    }

    fn cost(&self, p: [T; 2]) -> T {
        self.residuals(p)
            .map(|r| r.iter().fold(T::zero(), |a, &x| a + x * x))
            .unwrap_or_else(T::infinity)
    }
}

/// Levenberg-Marquardt on the two frame parameters with a central-difference Jacobian.
fn refine<T: Scalar>(obj: &Objective<T>, start: [T; 2], opts: &SolverOptions<T>) -> ([T; 2], T) {
    let mut p = start;
    let Some(mut r) = obj.residuals(p) else {
        return (p, T::infinity());
    };
    let mut cost = r.iter().fold(T::zero(), |a, &x| a + x * x);
    let mut lambda = T::lit(1e-3);
    let h = opts.fd_step;

    for _ in 0..opts.max_iterations {
        if cost <= T::lit(1e-30) {
            break;
        }
        let mut jac = [vec![T::zero(); r.len()], vec![T::zero(); r.len()]];
        let mut ok = true;
        for (col, out) in jac.iter_mut().enumerate() {
            let mut hi = p;
            let mut lo = p;
            hi[col] = hi[col] + h;
            lo[col] = lo[col] - h;
            match (obj.residuals(hi), obj.residuals(lo)) {
                (Some(rh), Some(rl)) => {
                    for (o, (a, b)) in out.iter_mut().zip(rh.iter().zip(&rl)) {
                        *o = (*a - *b) / (T::two() * h);
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            break;
        }
        let dot = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y);
        let (a00, a01, a11) = (dot(&jac[0], &jac[0]), dot(&jac[0], &jac[1]), dot(&jac[1], &jac[1]));
        let (g0, g1) = (dot(&jac[0], &r), dot(&jac[1], &r));

        let mut improved = false;
        for _ in 0..30 {
            let m00 = a00 + lambda * a00.max(T::lit(1e-12));
            let m11 = a11 + lambda * a11.max(T::lit(1e-12));
            let det = m00 * m11 - a01 * a01;
            if det == T::zero() || !det.is_finite() {
                lambda = lambda * T::lit(10.0);
                continue;
            }
            let d0 = -(m11 * g0 - a01 * g1) / det;
            let d1 = -(m00 * g1 - a01 * g0) / det;
            let cand = [p[0] + d0, p[1] + d1];
            if let Some(rc) = obj.residuals(cand) {
                let c = rc.iter().fold(T::zero(), |a, &x| a + x * x);
                if c < cost {
                    let tiny = d0.abs() <= T::epsilon() * (T::one() + p[0].abs())
                        && d1.abs() <= T::epsilon() * (T::one() + p[1].abs());
                    p = cand;
                    r = rc;
                    cost = c;
                    lambda = (lambda / T::lit(3.0)).max(T::lit(1e-15));
                    improved = !tiny;
                    break;
                }
            }
            lambda = lambda * T::lit(4.0);
        }
        if !improved {
            break;
        }
    }
    (p, cost)
}

/// Candidate frame velocities from the linearized isotropy condition.
///
/// Isotropy requires `sqrt(|u'_i|² - 1) = |α + β·u'_i|` with `α = γ sqrt(ū² - 1)`
/// and `β = α v`. For a fixed sign pattern of `1 + u'_i·v` this is linear in
/// `(α, β)`. 
fn linearized_starts<T: Scalar>(ms: &[DirectionalMeasurement<T>], samples: usize) -> Vec<[T; 2]> {
    let lab: Vec<Velocity<T>> = ms.iter().map(|m| m.lab_velocity()).collect();
    let q: Vec<T> = lab.iter().map(|u| (u.norm_sq() - T::one()).sqrt()).collect();

    // Each measurement splits the disk along the line `1 + u'_i·v = 0`. Every
    // cell of that arrangement touches a line crossing or a chord end, so
    // probing around those points (plus a coarse polar grid) finds them all.
    let mut probes = vec![Vec3::zero()];
    let rings = samples.max(1);
    for i in 0..rings {
        let r = (T::lit(i as f64) + T::half()) / T::lit(rings as f64);
        let spokes = 4 * rings;
        for j in 0..spokes {
            probes.push(Vec3::planar(r, T::TAU() * T::lit(j as f64) / T::lit(spokes as f64)));
        }
    }
    let mut corners = Vec::new();
    for (i, a) in lab.iter().enumerate() {
        // Chord ends: foot of the line plus/minus half the chord along it.
        let n2 = a.x * a.x + a.y * a.y;
        if n2 > T::one() {
            let foot = Vec3::new(-a.x / n2, -a.y / n2, T::zero());
            let half = (T::one() - T::one() / n2).sqrt();
            let along = Vec3::new(-a.y, a.x, T::zero()) / n2.sqrt();
            corners.push(foot + along * half);
            corners.push(foot - along * half);
        }
        for b in &lab[i + 1..] {
            let det = a.x * b.y - a.y * b.x;
            if det.abs() > T::epsilon() {
                corners.push(Vec3::new((a.y - b.y) / det, (b.x - a.x) / det, T::zero()));
            }
        }
    }
    let eps = T::lit(1e-6);
    for c in corners {
        for k in 0..16 {
            probes.push(c + Vec3::planar(eps, T::TAU() * T::lit(k as f64) / T::lit(16.0)));
        }
    }

    let mut patterns = std::collections::BTreeSet::new();
    for v in probes {
        if v.norm() < T::one() {
            patterns.insert(lab.iter().map(|u| T::one() + u.dot(v) >= T::zero()).collect::<Vec<bool>>());
        }
    }

    let mut out = Vec::with_capacity(patterns.len());
    for pattern in patterns {
        // Normal equations for rows s_i (1, u_x, u_y) against q_i.
        let mut a = [[T::zero(); 3]; 3];
        let mut b = [T::zero(); 3];
        for ((u, &qi), &pos) in lab.iter().zip(&q).zip(&pattern) {
            let s = if pos { T::one() } else { -T::one() };
            let row = [s, s * u.x, s * u.y];
            for r in 0..3 {
                for c in 0..3 {
                    a[r][c] = a[r][c] + row[r] * row[c];
                }
                b[r] = b[r] + row[r] * qi;
            }
        }
        let Some([alpha, bx, by]) = solve3(a, b) else { continue };
        if alpha.is_nan() || alpha <= T::zero() {
            continue;
        }
        let v = Vec3::new(bx / alpha, by / alpha, T::zero());
        let speed = v.norm();
        if speed.is_nan() || speed >= T::one() {
            continue;
        }
        out.push([speed.atanh(), v.planar_angle()]);
    }
    out
}

/// Gaussian elimination with partial pivoting.
fn solve3<T: Scalar>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(Ordering::Equal))?;
        if a[piv][col].is_nan() || a[piv][col].abs() <= T::epsilon() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let pivot_row = a[col];
        for r in col + 1..3 {
            let f = a[r][col] / pivot_row[col];
            for (x, &p) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                *x = *x - f * p;
            }
            b[r] = b[r] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for r in (0..3).rev() {
        let mut acc = b[r];
        for c in r + 1..3 {
            acc = acc - a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn distinct_angles<T: Scalar>(ms: &[DirectionalMeasurement<T>]) -> usize {
    let mut angles: Vec<T> = ms.iter().map(|m| wrap_two_pi(m.phi)).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let tol = T::lit(1e-12);
    let mut n = 0;
    for (i, &a) in angles.iter().enumerate() {
        if i == 0 || a - angles[i - 1] > tol {
            n += 1;
        }
    }
    // 0 and 2π - ε are the same direction.
    if n > 1 && T::TAU() - angles[angles.len() - 1] + angles[0] <= tol {
        n -= 1;
    }
    n
}

/// Recovers the lab frame's planar velocity and the interaction speed from
/// directional lab measurements.
pub fn recover_frame<T: Scalar>(ms: &[DirectionalMeasurement<T>]) -> Result<RecoveryResult<T>> {
    recover_frame_with(ms, &SolverOptions::default())
}

pub fn recover_frame_with<T: Scalar>(ms: &[DirectionalMeasurement<T>], opts: &SolverOptions<T>) -> Result<RecoveryResult<T>> {
    let usable: Vec<_> = ms.iter().copied().filter(|m| m.usable()).collect();
    if usable.len() < 3 || distinct_angles(&usable) < 3 {
        return Err(Error::InsufficientData { usable: usable.len() });
    }
    let n = T::lit(usable.len() as f64);
    let sigma = usable
        .iter()
        .filter_map(|m| m.sigma)
        .fold(T::zero(), |a, s| a.max(s.abs()));

    let obj = Objective::new(&usable);
    let rms = |cost: T| (cost / n).sqrt();
    let mean_speed = |v: Velocity<T>| -> Option<T> {
        let q = obj.speeds_sq(v)?;
        Some(q.iter().fold(T::zero(), |a, &x| a + x.sqrt()) / n)
    };

    let speeds: Vec<T> = usable.iter().map(|m| m.u_prime.abs()).collect();
    let mean = speeds.iter().fold(T::zero(), |a, &x| a + x) / n;
    let var = speeds.iter().fold(T::zero(), |a, &x| a + (x - mean) * (x - mean)) / n;
    let cv = var.sqrt() / mean;
    let iso_threshold = if sigma > T::zero() { T::lit(10.0) * sigma } else { T::lit(1e-9) };
    if cv < iso_threshold {
        let ubar = mean_speed(Vec3::zero()).unwrap_or(mean);
        return Ok(RecoveryResult {
            speed: T::zero(),
            orientation: T::zero(),
            ubar,
            residual: rms(obj.cost([T::zero(), T::zero()])),
            identifiable: false,
            instantaneous_within_resolution: ubar > opts.instantaneous_threshold,
        });
    }

    // Coarse grid, ranked by cost; ties go to the lower speed, then orientation.
    let mut starts = Vec::with_capacity(opts.speed_starts * opts.orientation_starts);
    for i in 0..opts.speed_starts {
        let s = (T::lit(i as f64) + T::half()) / T::lit(opts.speed_starts as f64);
        let a = s.atanh();
        for j in 0..opts.orientation_starts {
            let psi = T::TAU() * T::lit(j as f64) / T::lit(opts.orientation_starts as f64);
            starts.push((obj.cost([a, psi]), [a, psi]));
        }
    }
    starts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));

    let candidates = starts
        .iter()
        .take(opts.refined_starts.max(1))
        .map(|&(_, p)| p)
        .chain(linearized_starts(&usable, opts.speed_starts));

    let mut best: Option<(T, T, T, [T; 2])> = None;
    for start in candidates {
        let (p, cost) = refine(&obj, start, opts);
        if !cost.is_finite() {
            continue;
        }
        let raw = p[0].tanh();
        let speed = raw.abs();
        let orientation = wrap_two_pi(if raw < T::zero() { p[1] + T::PI() } else { p[1] });
        let better = match best {
            None => true,
            Some((bc, bs, bo, _)) => match cost.partial_cmp(&bc) {
                Some(Ordering::Less) => true,
                Some(Ordering::Equal) => (speed, orientation) < (bs, bo),
                _ => false,
            },
        };
        if better {
            best = Some((cost, speed, orientation, p));
        }
    }

    let (cost, speed, orientation, _) = best.ok_or(Error::NoConvergence { residual: f64::INFINITY })?;
    let residual = rms(cost);
    let threshold = opts
        .residual_threshold
        .unwrap_or_else(|| {
            // A relative error σ in |u'| moves |u'|² - 1 by 2σ|u'|² / (|u'|² - 1).
            let gain = usable.iter().fold(T::zero(), |a, m| {
                let q = m.u_prime * m.u_prime;
                let g = T::two() * q / (q - T::one());
                a + g * g
            });
            T::lit(1e-6) + T::lit(10.0) * sigma * (gain / n).sqrt()
        });
    if residual.is_nan() || residual > threshold {
        return Err(Error::NoConvergence { residual: residual.as_f64() });
    }
    let ubar = mean_speed(Vec3::planar(speed, orientation)).ok_or(Error::NoConvergence { residual: residual.as_f64() })?;
    Ok(RecoveryResult {
        speed,
        orientation,
        ubar,
        residual,
        identifiable: true,
        instantaneous_within_resolution: ubar > opts.instantaneous_threshold,
    })
}

/// Frame speed from the interaction speed `ubar` and its transverse lab speed
/// `u_prime_y`: `v = sqrt((ū² - ū'²) / (1 - ū'²))`.
pub fn solve_v_from_transverse<T: Scalar>(ubar: T, u_prime_y: T) -> Result<T> {
    for s in [ubar, u_prime_y] {
        if !(s.is_finite() && s > T::one()) {
            return Err(Error::InvalidFtlSpeed(s.as_f64()));
        }
    }
    let ratio = (ubar * ubar - u_prime_y * u_prime_y) / (T::one() - u_prime_y * u_prime_y);
    if ratio < T::zero() {
        return if ratio >= -T::algebraic_tol() { Ok(T::zero()) } else { Err(Error::OutOfRange) };
    }
    if ratio >= T::one() {
        return Err(Error::OutOfRange);
    }
    Ok(ratio.sqrt())
}
