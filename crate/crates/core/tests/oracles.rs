mod common;

use std::f64::consts::LN_2;

#[test]
fn logistic_oracle_is_ln2() {
    let lambda = common::logistic_derivative_average(4.0, 0.2, 1_000_000, 100);
    assert!((lambda - LN_2).abs() < 0.01, "{lambda}");
}

#[test]
fn benettin_matches_the_known_lorenz_exponent() {
    let lambda = common::lorenz_benettin(0.01, 50.0, 1000.0);
    assert!((lambda - 0.906).abs() < 0.02, "{lambda}");
    // step size does not matter at this accuracy
    let fine = common::lorenz_benettin(0.005, 50.0, 1000.0);
    assert!((lambda - fine).abs() < 0.02, "{lambda} vs {fine}");
}
