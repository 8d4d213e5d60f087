use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tachy::experiment::{correlated_from_lab_record, detour_sweep};
use tachy::{
    run, run_collinear, run_transverse, Arrival, ExperimentConfig, ExperimentConfig32, FtlSpeed, Geometry,
    OrderClass, Photon, Vec3,
};

#[test]
fn detoured_runs_agree_across_frames() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let v = Vec3::planar(rng.random_range(0.0..0.9), rng.random_range(0.0..std::f64::consts::TAU));
        let ftl = FtlSpeed::Finite(rng.random_range(1.01..30.0));
        let geometry = Geometry::Detoured {
            l1: rng.random_range(0.5..3.0),
            l2: rng.random_range(0.5..3.0),
            left_extra: rng.random_range(0.0..4.0),
            right_extra: rng.random_range(0.0..4.0),
        };
        let o = run(&ExperimentConfig::new(v, ftl, geometry)).unwrap();
        assert_eq!(correlated_from_lab_record(&o).unwrap(), o.correlated, "{geometry:?} v={v:?}");
    }
}

#[test]
fn right_detour_delays_only_photon_two() {
    let base = ExperimentConfig::collinear(0.5, FtlSpeed::Finite(4.0), 1.0, 2.0);
    let grid: Vec<f64> = (0..30).map(|i| 0.2 * i as f64).collect();
    let table = detour_sweep(&base, &[0.0], &grid).unwrap();
    for w in table.rows.windows(2) {
        assert!(w[1].t2_s > w[0].t2_s);
        assert_eq!(w[1].t1_s, w[0].t1_s);
    }
    // Once photon 1 is first in every frame, more right detour keeps it there.
    let first = table.rows.iter().position(|r| r.order_class == OrderClass::Nu1FirstAllFrames).unwrap();
    assert!(table.rows[first..].iter().all(|r| r.order_class == OrderClass::Nu1FirstAllFrames));
}

#[test]
fn detoured_zero_extra_matches_collinear() {
    let c = run_collinear(&ExperimentConfig::collinear(0.3, FtlSpeed::Finite(2.0), 1.5, 0.7)).unwrap();
    let d = run(&ExperimentConfig::new(
        Vec3::along_x(0.3),
        FtlSpeed::Finite(2.0),
        Geometry::Detoured { l1: 1.5, l2: 0.7, left_extra: 0.0, right_extra: 0.0 },
    ))
    .unwrap();
    assert!(c.detection1.preferred.max_abs_diff(&d.detection1.preferred).unwrap() < 1e-12);
    assert!(c.detection2.preferred.max_abs_diff(&d.detection2.preferred).unwrap() < 1e-12);
    assert_eq!(c.correlated, d.correlated);
}

#[test]
fn lab_ordering_of_equal_arms() {
    // Equal lab arms: simultaneous in the lab, photon 1 first in S.
    let o = run_collinear(&ExperimentConfig::collinear(0.4f64, FtlSpeed::Instantaneous, 1.0, 1.0)).unwrap();
    assert!((o.detection1.lab.t - o.detection2.lab.t).abs() < 1e-15);
    assert_eq!(o.trigger_photon, Photon::Nu1);
    assert!(o.correlated);
    assert!(matches!(o.ftl_arrival, Arrival::At(_)));
}

#[test]
fn transverse_run_reports_preferred_speed() {
    let cfg = ExperimentConfig::new(Vec3::along_x(0.6f64), FtlSpeed::Finite(5.0), Geometry::Transverse { l1: 1.0, l2: 1.0 });
    let t = run_transverse(&cfg).unwrap();
    let r = t.reading.unwrap();
    assert!((r.ubar - 5.0).abs() < 1e-12);
    let inst = ExperimentConfig { ftl: FtlSpeed::Instantaneous, ..cfg };
    assert!(run_transverse(&inst).unwrap().reading.is_none());
}

#[test]
fn single_precision_runs() {
    let cfg: ExperimentConfig32 = ExperimentConfig::collinear(0.6f32, FtlSpeed::Instantaneous, 1.0, 1.0);
    let o = run_collinear(&cfg).unwrap();
    let n = o.narrative.unwrap();
    assert!((n.arrival.x - 0.25).abs() < 1e-5);
    assert!((n.duration - 0.75).abs() < 1e-5);
    assert!(o.correlated);
}
