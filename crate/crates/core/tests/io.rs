use tachy::experiment::detour_sweep;
use tachy::io::{num, read_measurements_csv, recovery_json, write_measurements_csv, write_sweep_csv, IoError};
use tachy::{recover_frame, DirectionalMeasurement, ExperimentConfig, FtlSpeed};

#[test]
fn number_formatting() {
    assert_eq!(num(1.0 / 0.6), "1.66666666666667");
    assert_eq!(num(0.25), "0.25");
    assert_eq!(num(1e-7), "1e-07");
    assert_eq!(num(3.0), "3");
    assert_eq!(num(-2.5e20), "-2.5e+20");
}

#[test]
fn sweep_csv_layout() {
    let base = ExperimentConfig::collinear(0.2, FtlSpeed::Finite(1.5), 1.0, 1.0);
    let table = detour_sweep(&base, &[0.0, 0.5], &[0.0, 3.0]).unwrap();
    let mut out = Vec::new();
    write_sweep_csv(&table, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "delta_left,delta_right,order_class,correlated,s2,t1_S,t2_S,tF_S");
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("0,0,"));
    assert!(rows[3].starts_with("0.5,3,nu1_first_all_frames,"));
}

#[test]
fn measurements_round_trip() {
    let ms = vec![
        DirectionalMeasurement { phi: 0.0, u_prime: 2.5, sigma: Some(1e-4) },
        DirectionalMeasurement { phi: 1.0, u_prime: -7.25, sigma: None },
    ];
    let mut buf = Vec::new();
    write_measurements_csv(&ms, &mut buf).unwrap();
    assert_eq!(read_measurements_csv(buf.as_slice()).unwrap(), ms);
}

#[test]
fn measurements_without_sigma_column() {
    let ms = read_measurements_csv("phi, u_prime\n0, 2\n 1.5 ,3\n".as_bytes()).unwrap();
    assert_eq!(ms.len(), 2);
    assert_eq!(ms[1].u_prime, 3.0);
    assert!(ms.iter().all(|m| m.sigma.is_none()));
}

#[test]
fn malformed_measurements_are_rejected() {
    assert!(read_measurements_csv("phi,u_prime\n0,fast\n".as_bytes()).is_err());
    assert!(matches!(read_measurements_csv("phi,u_prime\n0,inf\n".as_bytes()), Err(IoError::Invalid { .. })));
}

#[test]
fn recovery_json_fields() {
    let phis: Vec<f64> = (0..6).map(|i| i as f64).collect();
    let ms: Vec<_> = tachy::forward_measurements(tachy::Vec3::planar(0.5, 0.0), 3.0, &phis)
        .unwrap()
        .iter()
        .filter_map(|m| m.measured())
        .collect();
    let json = recovery_json(&recover_frame(&ms).unwrap());
    for key in ["\"speed\":", "\"orientation\":", "\"ubar\":", "\"residual\":", "\"identifiable\":true"] {
        assert!(json.contains(key), "{json}");
    }
}
