use cramer_model::calibration::{frozen, measure, verify, CALIBRATION_VERSION};

#[test]
fn frozen_constants_are_reproducible() {
    let m = measure().unwrap();
    assert_eq!(m.version, CALIBRATION_VERSION);
    verify(&m, 1e-12).unwrap();
    for ((name, a), (_, b)) in m.entries().into_iter().zip(frozen().entries()) {
        assert_eq!(a.grid, b.grid, "{name}");
        assert!(a.value > 0.0 && a.value.is_finite(), "{name}");
    }
}

#[test]
fn file_round_trips() {
    let c = frozen();
    let again: cramer_model::calibration::Calibration = serde_json::from_str(&c.to_json()).unwrap();
    assert_eq!(&again, c);
}
