use proptest::prelude::*;

use tachy::kinematics::{boost_event, interval, inverse_boost_event};
use tachy::{
    compose_velocity_to_lab, compose_velocity_to_preferred, run_collinear, Arrival, Boost, Event, ExperimentConfig,
    FtlSpeed, Vec3,
};

fn velocity(max: f64) -> impl Strategy<Value = Vec3<f64>> {
    (0.0..max, 0.0..std::f64::consts::TAU, -1.0f64..1.0).prop_map(|(s, phi, cz)| {
        let sz = (1.0 - cz * cz).sqrt();
        Vec3::new(s * sz * phi.cos(), s * sz * phi.sin(), s * cz)
    })
}

fn point(scale: f64) -> impl Strategy<Value = Vec3<f64>> {
    (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3<f64>> {
    velocity(1.0).prop_filter_map("non-zero", |v| v.normalized())
}

proptest! {
    #[test]
    fn event_round_trip(v in velocity(0.99), r in point(10.0), t in -10.0f64..10.0) {
        let b = Boost::new(v).unwrap();
        let e = Event::new(t, r, tachy::Frame::Preferred);
        let back = inverse_boost_event(&boost_event(&e, &b).unwrap(), &b).unwrap();
        prop_assert!(back.max_abs_diff(&e).unwrap() <= 1e-12 * 10.0);
    }

    #[test]
    fn light_speed_is_invariant(v in velocity(0.99), d in unit()) {
        let b = Boost::new(v).unwrap();
        let lab = compose_velocity_to_lab(d, &b).unwrap();
        prop_assert!((lab.norm() - 1.0).abs() <= 1e-12);
        let back = compose_velocity_to_preferred(d, &b).unwrap();
        prop_assert!((back.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn interval_is_invariant(v in velocity(0.9), r1 in point(5.0), r2 in point(5.0), t1 in -5.0f64..5.0, t2 in -5.0f64..5.0) {
        let b = Boost::new(v).unwrap();
        let (e1, e2) = (Event::new(t1, r1, tachy::Frame::Preferred), Event::new(t2, r2, tachy::Frame::Preferred));
        let s = interval(&e1, &e2).unwrap();
        let s_lab = interval(&boost_event(&e1, &b).unwrap(), &boost_event(&e2, &b).unwrap()).unwrap();
        let scale = (t2 - t1).powi(2) + (r2 - r1).norm_sq();
        prop_assert!((s.s2 - s_lab.s2).abs() <= 1e-12 * scale.max(1.0));
        if (s.s2 / scale.max(1e-300)).abs() > 1e-9 {
            prop_assert_eq!(s.class, s_lab.class);
        }
    }

    #[test]
    fn collinear_boost_reduces_to_one_dimension(v in -0.9f64..0.9, x in -1.0f64..1.0, t in -1.0f64..1.0) {
        let b = Boost::along_x(v).unwrap();
        let e = boost_event(&Event::preferred(t, x, 0.0, 0.0), &b).unwrap();
        let g = 1.0 / (1.0 - v * v).sqrt();
        let (x1, t1) = (g * (x - v * t), g * (t - v * x));
        prop_assert!((e.x - x1).abs() <= 1e-14 * x1.abs().max(1.0) * 4.0);
        prop_assert!((e.t - t1).abs() <= 1e-14 * t1.abs().max(1.0) * 4.0);
        prop_assert_eq!((e.y, e.z), (0.0, 0.0));
    }

    #[test]
    fn faster_fronts_arrive_no_later(
        v in 0.0f64..0.95,
        l1 in 0.1f64..10.0,
        l2 in 0.1f64..10.0,
        slow in 1.0001f64..50.0,
        factor in 1.0f64..20.0,
    ) {
        let run = |ftl| run_collinear(&ExperimentConfig::collinear(v, ftl, l1, l2)).unwrap();
        let (a, b) = (run(FtlSpeed::Finite(slow)), run(FtlSpeed::Finite(slow * factor)));
        let inst = run(FtlSpeed::Instantaneous);
        match (a.ftl_arrival, b.ftl_arrival) {
            (Arrival::At(ea), Arrival::At(eb)) => prop_assert!(eb.t <= ea.t + 1e-12 * ea.t.abs().max(1.0)),
            (Arrival::At(_), Arrival::NoArrival) => prop_assert!(false, "faster front missed the partner"),
            _ => {}
        }
        if let Arrival::At(eb) = b.ftl_arrival {
            let ei = inst.ftl_arrival.event().expect("instantaneous front always arrives");
            prop_assert!(ei.t <= eb.t + 1e-12 * eb.t.abs().max(1.0));
        }
        prop_assert!(!a.correlated || b.correlated);
    }
}
