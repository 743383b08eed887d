use ttdesign::scan::{
    detect_jump, detect_special, exceptional_check, first_zero, scan_n_range, ScanOptions,
    DEFAULT_SCAN_ZERO_TOLERANCE as TOL,
};
use ttdesign::NormMode;

#[test]
fn equiangular_lines_in_r3_are_exceptional() {
    let table = scan_n_range(2, 3, NormMode::EqualNorm, 5, 7, &ScanOptions::default()).unwrap();
    assert_eq!(first_zero(&table, TOL), Some(6));
    assert!(exceptional_check(&table, 6).unwrap());
    assert_eq!(detect_special(&table, TOL), [6]);
    assert_eq!(detect_jump(&table, TOL), None);
}

#[test]
fn twenty_four_points_in_r4_for_strength_three() {
    let opts = ScanOptions {
        restarts: 10,
        ..ScanOptions::default()
    };
    let table = scan_n_range(3, 4, NormMode::EqualNorm, 23, 25, &opts).unwrap();
    let zeros: Vec<bool> = table.records.iter().map(|r| r.is_zero).collect();
    assert_eq!(zeros, [false, true, false]);
    assert_eq!(detect_special(&table, TOL), [24]);
    let d23 = &table.metadata.diagnostics[0];
    assert_eq!(d23.n, 23);
    assert!(d23.stagnation, "{d23:?}");
}
