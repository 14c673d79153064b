//! Random-start sweeps against the predicted behaviour.

use parrondo::numerics::parse_rational;
use parrondo::oracle::sweep;
use parrondo::rug::Rational;
use parrondo::PrecisionConfig;

fn point(phi: &str) -> (Rational, Rational) {
    (Rational::from((1, 3)), parse_rational(phi).unwrap())
}

#[test]
fn both_cycles_of_a_two_cycle_band_are_reached() {
    let grid = [
        point("0.6880664"),
        point("0.68802689"),
        point("0.67721856365"),
        point("0.67721795339"),
    ];
    let s = sweep(&grid, 1000, 10_000, 11, &PrecisionConfig::default()).unwrap();
    for p in &s.points {
        let predicted: Vec<&str> = p.predicted.split(';').collect();
        assert_eq!(predicted.len(), 2, "phi={}", p.phi);
        let observed: Vec<&str> = p.observed.keys().map(String::as_str).collect();
        assert_eq!(observed.len(), 2, "phi={} observed {:?}", p.phi, p.observed);
        for form in predicted {
            assert!(
                p.observed.get(form).is_some_and(|&n| n >= 1),
                "phi={} missing {form}",
                p.phi
            );
        }
        assert_eq!(p.agreements, 1000);
    }
}

#[test]
fn equilibrium_sweep_agrees_from_128_bits() {
    let grid = [point("1/2")];
    for bits in [128, 192] {
        let s = sweep(&grid, 200, 10_000, 4, &PrecisionConfig::new(bits).unwrap()).unwrap();
        assert_eq!(s.points[0].observed.get("B-forever"), Some(&200), "{bits} bits");
    }
}

#[test]
fn double_precision_sweep_is_allowed_to_disagree() {
    let s = sweep(&[point("1/2")], 50, 10_000, 4, &PrecisionConfig::legacy_double()).unwrap();
    let p = &s.points[0];
    assert_eq!(p.predicted, "B-forever");
    assert_eq!(p.agreements + p.findings.len(), 50);
    assert_eq!(s.findings().count(), p.findings.len());
}
