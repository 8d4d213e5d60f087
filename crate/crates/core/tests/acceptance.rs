//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tachy::experiment::{correlated_from_lab_record, detour_sweep, transverse_from_lab_speed, SweepTable};
use tachy::ftl::NarrativeKind;
use tachy::kinematics::{boost_event, inverse_boost_event};
use tachy::solver::{forward_measurements, perturb_multiplicative, recover_frame};
use tachy::{
    compose_velocity_to_lab, compose_velocity_to_preferred, equidistant_l1, run, run_collinear,
    run_equidistant_test, Boost, Event, ExperimentConfig, FtlSpeed, Geometry, OrderClass, Vec3,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gamma(v: f64) -> f64 {
    1.0 / (1.0 - v * v).sqrt()
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3<f64> {
    loop {
        let p = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = p.norm();
        if n > 1e-3 && n <= 1.0 {
            return p / n;
        }
    }
}

fn scenario_a_closure() -> Check {
    let cfg = ExperimentConfig::collinear(0.6, FtlSpeed::Instantaneous, 1.0, 1.0);
    let start = Instant::now();
    let o = run_collinear(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let n = o.narrative.ok_or("front did not arrive")?;
    ensure(n.kind == NarrativeKind::SpontaneousForcing, || format!("narrative {:?}", n.kind))?;
    let speed = n.apparent_speed.ok_or("no apparent speed")?;
    let checks: [(&str, f64, f64); 5] = [
        ("x'_F", n.arrival.x, 0.25),
        ("t'_F", n.arrival.t, 0.25),
        ("distance", n.distance, 1.25),
        ("duration", n.duration, 0.75),
        ("speed", speed, 1.0 / 0.6),
    ];
    for (name, got, want) in checks {
        ensure((got - want).abs() <= 1e-12, || format!("{name} = {got:e}, expected {want:e}"))?;
    }
    ensure(elapsed < Duration::from_millis(1), || format!("runtime {elapsed:?}"))?;
    Ok(format!("x'_F=0.25 distance=1.25 time=0.75 speed=1/0.6 within 1e-12, runtime {elapsed:?}"))
}

fn boundary_arrival() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..50 {
        let v = 0.05 + 0.9 * i as f64 / 49.0;
        let o = run_collinear(&ExperimentConfig::collinear(v, FtlSpeed::Finite(1.0 / v), 1.0, 1.0))
            .map_err(|e| e.to_string())?;
        let tf = o.ftl_arrival.event().ok_or_else(|| format!("no arrival at v={v}"))?.t;
        let t2 = o.detection2.preferred.t;
        let t2_closed = gamma(v) * (1.0 + v);
        worst = worst.max((tf - t2).abs()).max((tf - t2_closed).abs());
        ensure(o.correlated, || format!("not correlated at v={v}"))?;
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-12, || format!("max |t_F - t2| = {worst:e}"))?;
    ensure(elapsed < Duration::from_millis(10), || format!("runtime {elapsed:?}"))?;
    Ok(format!("50 speeds, max |t_F - t2| = {worst:e}, runtime {elapsed:?}"))
}

fn equidistance() -> Check {
    let mut worst = 0.0f64;
    for i in 0..50 {
        let v = 0.95 * i as f64 / 49.0;
        let l2 = 1.0 + 0.1 * i as f64;
        let l1 = equidistant_l1(l2, v).map_err(|e| e.to_string())?;
        let o = run_collinear(&ExperimentConfig::collinear(v, FtlSpeed::Instantaneous, l1, l2))
            .map_err(|e| e.to_string())?;
        let (x1, x2) = (o.detection1.preferred.x, o.detection2.preferred.x);
        // Closed-form detection positions in the preferred frame.
        let (x1_closed, x2_closed) = (-gamma(v) * (1.0 - v) * l1, gamma(v) * (1.0 + v) * l2);
        worst = worst
            .max((x1.abs() - x2).abs())
            .max((x1_closed.abs() - x2_closed).abs())
            .max((x1 - x1_closed).abs());
    }
    ensure(worst <= 1e-12, || format!("max ||x1| - x2| = {worst:e}"))?;
    Ok(format!("50 speeds, max ||x1| - x2| = {worst:e}"))
}

fn no_correlation_when_equidistant() -> Check {
    let mut n = 0;
    for v in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for ubar in [1.5, 2.0, 10.0, 100.0] {
            let r = run_equidistant_test(1.0, v, FtlSpeed::Finite(ubar)).map_err(|e| e.to_string())?;
            ensure(!r.outcome.correlated, || format!("correlated at v={v}, ubar={ubar}"))?;
            ensure(!r.lab_correlated(), || format!("lab narrative correlated at v={v}, ubar={ubar}"))?;
            ensure(r.narratives_agree(), || format!("narratives disagree at v={v}, ubar={ubar}"))?;
            n += 1;
        }
    }
    Ok(format!("{n} (v, ubar) pairs uncorrelated in both frames"))
}

fn frame_consistency() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut disagreements = 0;
    let mut correlated = 0;
    for _ in 0..1000 {
        let speed = rng.random_range(0.0..=0.95);
        let v = Vec3::planar(speed, rng.random_range(0.0..TAU));
        let ftl = if rng.random_bool(0.1) {
            FtlSpeed::Instantaneous
        } else {
            FtlSpeed::Finite(rng.random_range(1.0..=100.0f64).max(1.0 + 1e-9))
        };
        let (l1, l2) = (rng.random_range(0.1..=10.0), rng.random_range(0.1..=10.0));
        let geometry = if rng.random_bool(0.5) {
            Geometry::Collinear { l1, l2 }
        } else {
            Geometry::Transverse { l1, l2 }
        };
        let o = run(&ExperimentConfig::new(v, ftl, geometry)).map_err(|e| e.to_string())?;
        let lab = correlated_from_lab_record(&o).map_err(|e| e.to_string())?;
        if lab != o.correlated {
            disagreements += 1;
        }
        correlated += o.correlated as usize;
    }
    ensure(disagreements == 0, || format!("{disagreements} disagreements"))?;
    Ok(format!("1000 configs ({correlated} correlated), 0 disagreements"))
}

fn light_speed_and_round_trips() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let (mut light, mut vel_rt, mut ev_rt) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let b = Boost::new(random_unit(&mut rng) * rng.random_range(0.0..=0.99)).unwrap();
        let c = compose_velocity_to_lab(random_unit(&mut rng), &b).map_err(|e| e.to_string())?;
        light = light.max((c.norm() - 1.0).abs());

        let u = random_unit(&mut rng) * rng.random_range(0.0..=1.0);
        let back = compose_velocity_to_preferred(compose_velocity_to_lab(u, &b).unwrap(), &b).unwrap();
        vel_rt = vel_rt.max(back.max_abs_diff(u));

        let p = random_unit(&mut rng) * rng.random_range(0.0..=10.0);
        let e = Event::new(rng.random_range(-10.0..=10.0), p, tachy::Frame::Preferred);
        let e2 = inverse_boost_event(&boost_event(&e, &b).unwrap(), &b).unwrap();
        ev_rt = ev_rt.max(e2.max_abs_diff(&e).unwrap() / 10.0);
    }
    ensure(light <= 1e-12, || format!("light speed drift {light:e}"))?;
    ensure(vel_rt <= 1e-12, || format!("velocity round trip {vel_rt:e}"))?;
    ensure(ev_rt <= 1e-12, || format!("event round trip {ev_rt:e}"))?;
    Ok(format!("10^4 pairs: ||u|-1| <= {light:e}, velocity rt {vel_rt:e}, event rt {ev_rt:e}"))
}

fn transverse_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v = rng.random_range(0.0..0.95);
        let uy = rng.random_range(1.0..=100.0f64).max(1.0 + 1e-9);
        let reading = transverse_from_lab_speed(v, uy).map_err(|e| e.to_string())?;
        let b = Boost::along_x(v).unwrap();
        let u = compose_velocity_to_preferred(Vec3::along_y(uy), &b).map_err(|e| e.to_string())?;
        worst = worst.max((reading.ubar - u.norm()).abs() / reading.ubar.max(1.0));
    }
    ensure(worst <= 1e-12, || format!("max relative mismatch {worst:e}"))?;
    Ok(format!("100 cases, max relative mismatch {worst:e}"))
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn solver_recovery() -> Check {
    let start = Instant::now();
    let phis: Vec<f64> = (0..8).map(|i| TAU * i as f64 / 8.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let speed = rng.random_range(0.1..=0.9);
        let orientation = rng.random_range(0.0..TAU);
        let ubar = rng.random_range(1.5..=50.0);
        let ms: Vec<_> = forward_measurements(Vec3::planar(speed, orientation), ubar, &phis)
            .map_err(|e| e.to_string())?
            .iter()
            .filter_map(|m| m.measured())
            .collect();
        let r = recover_frame(&ms).map_err(|e| format!("v={speed} psi={orientation} ubar={ubar}: {e}"))?;
        worst.0 = worst.0.max((r.speed - speed).abs());
        worst.1 = worst.1.max(angle_diff(r.orientation, orientation));
        worst.2 = worst.2.max((r.ubar - ubar).abs());
    }
    ensure(worst.0 <= 1e-6 && worst.1 <= 1e-6 && worst.2 <= 1e-6, || {
        format!("noiseless errors speed {:e} orientation {:e} ubar {:e}", worst.0, worst.1, worst.2)
    })?;

    let clean: Vec<_> = forward_measurements(Vec3::planar(0.6, 0.7), 10.0, &phis)
        .map_err(|e| e.to_string())?
        .iter()
        .filter_map(|m| m.measured())
        .collect();
    let mut errors = Vec::with_capacity(100);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy = perturb_multiplicative(&clean, 1e-4, &mut rng);
        let r = recover_frame(&noisy).map_err(|e| format!("seed {seed}: {e}"))?;
        errors.push((r.speed - 0.6).abs());
    }
    errors.sort_by(|a, b| a.total_cmp(b));
    let p95 = errors[94];
    let elapsed = start.elapsed();
    ensure(p95 <= 1e-2, || format!("95th percentile speed error {p95:e}"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("runtime {elapsed:?}"))?;
    Ok(format!(
        "noiseless max errors ({:.1e}, {:.1e}, {:.1e}); noisy p95 speed error {p95:.2e}; runtime {elapsed:.2?}",
        worst.0, worst.1, worst.2
    ))
}

fn detour_boundary() -> Check {
    let (l1, l2) = (1.0, 1.5);
    let base = ExperimentConfig::collinear(0.5, FtlSpeed::Finite(3.0), l1, l2);
    let step = 0.1;
    let grid: Vec<f64> = (0..100).map(|i| i as f64 * step).collect();
    let table: SweepTable<f64> = detour_sweep(&base, &grid, &grid).map_err(|e| e.to_string())?;

    // Light-cone crossings from the lab detection events: |Δt'| = |Δx'|, with
    // t'_1 = l1 + Δ_left, t'_2 = l2 + Δ_right and Δx' = l1 + l2.
    let crossings = |dr: f64| [dr + l2 - l1 - (l1 + l2), dr + l2 - l1 + (l1 + l2)];
    let mut checked = 0;
    for (j, &dr) in grid.iter().enumerate() {
        let found: Vec<_> = table.transitions.iter().filter(|t| t.delta_right == dr).collect();
        // Every transition brackets a crossing, and every crossing strictly
        // between grid nodes produces one. Crossings on a node may go either way.
        for t in &found {
            ensure(t.left_after - t.left_before <= step + 1e-12, || "transition wider than one cell".into())?;
            ensure(crossings(dr).iter().any(|&c| t.left_before - 1e-9 <= c && c <= t.left_after + 1e-9), || {
                format!("Δ_right={dr}: transition [{}, {}] is off the light cone", t.left_before, t.left_after)
            })?;
            checked += 1;
        }
        for c in crossings(dr) {
            let interior = c > grid[0] && c < grid[grid.len() - 1];
            let on_node = grid.iter().any(|&g| (g - c).abs() < 1e-9);
            if interior && !on_node {
                ensure(found.iter().any(|t| t.left_before < c && c < t.left_after), || {
                    format!("Δ_right={dr}: no transition at crossing {c}")
                })?;
            }
        }
        // Independent per-cell check of the class against the light-cone condition.
        for (i, &dl) in grid.iter().enumerate() {
            let dt = (l2 + dr) - (l1 + dl);
            let dx = l1 + l2;
            let want = if dt.abs() < dx {
                OrderClass::FrameDependent
            } else if dt >= dx {
                OrderClass::Nu1FirstAllFrames
            } else {
                OrderClass::Nu2FirstAllFrames
            };
            let got = table.row(i, j).order_class;
            let on_cone = ((dt.abs() - dx) / dx).abs() < 1e-9;
            ensure(got == want || on_cone, || format!("cell ({dl}, {dr}): {got:?} vs {want:?}"))?;
        }
    }
    Ok(format!("100x100 grid, {checked} transitions each within one cell of the light cone"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("instantaneous front: lab back-signal closure", scenario_a_closure),
        ("front lands exactly on partner detection when ubar = 1/v", boundary_arrival),
        ("equidistant placement in the preferred frame", equidistance),
        ("no correlation for equidistant detectors and finite ubar", no_correlation_when_equidistant),
        ("correlation flag identical in both frames", frame_consistency),
        ("light-speed invariance and composition round trips", light_speed_and_round_trips),
        ("transverse speed identity", transverse_identity),
        ("frame recovery from directional speeds", solver_recovery),
        ("detour sweep order boundary on the light cone", detour_boundary),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
