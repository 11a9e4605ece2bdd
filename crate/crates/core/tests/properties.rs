use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use sptmqc::linalg::{self, max_abs};
use sptmqc::sweep;
use sptmqc::toymodel::{self, ToyModelParams};
use sptmqc::{mps, mqc, renorm, symmetry, BufferAxis, FactorizedTensor, Length};

fn toy(theta: f64, phi: f64) -> FactorizedTensor {
    toymodel::toy_tensor(ToyModelParams::new(theta, phi)).unwrap()
}

/// Points well away from the poles and the cos φ = 0 lines.
fn generic() -> impl Strategy<Value = (f64, f64)> {
    (0.2..PI - 0.2, 0.0..2.0 * PI).prop_filter("away from cos φ = 0", |(_, p)| p.cos().abs() > 0.15)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn canonical_form_fixes_identity_and_lambda(theta in 0.0..PI, phi in 0.0..2.0 * PI) {
        let c = mps::canonicalize_with(&toy(theta, phi).tensor(), true).unwrap();
        let d = c.tensor.bond_dim();
        let id = linalg::identity(d);
        prop_assert!(max_abs(&(c.tensor.apply_identity_channel(&id) - &id)) < 1e-9);
        prop_assert!(max_abs(&(c.tensor.apply_dual_channel(&c.left_fixed_point) - &c.left_fixed_point)) < 1e-9);
        prop_assert!((linalg::trace(&c.left_fixed_point).re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn toy_states_keep_the_octahedral_symmetry(theta in 0.0..PI, phi in 0.0..2.0 * PI) {
        prop_assert!(symmetry::verify_s4_invariance(&toy(theta, phi).tensor()).accepted);
    }

    #[test]
    fn junk_moduli_follow_closed_form(theta in 0.0..PI, phi in 0.0..2.0 * PI) {
        let f = toy(theta, phi);
        let js = renorm::junk_spectrum(f.junk(2), f.junk_symmetry(BufferAxis::Z).unwrap()).unwrap();
        let x = (theta.sin() * phi.cos()).abs();
        let mut got: Vec<f64> = js.eigenvalues.iter().map(|z| z.norm_sqr()).collect();
        got.sort_by(|a, b| b.total_cmp(a));
        prop_assert!((got[0] - (1.0 + x) / 3.0).abs() < 1e-12);
        prop_assert!((got[1] - (1.0 - x) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_a_probability(theta in 0.0..PI, phi in 0.0..2.0 * PI, m in 0i64..10, gate in 0.0..2.0 * PI) {
        let r = renorm::buffer(&toy(theta, phi), BufferAxis::Z, m).unwrap();
        match mqc::gate_fidelity(&r, gate, None, None) {
            Ok(rep) => prop_assert!((-1e-12..=1.0 + 1e-12).contains(&rep.fidelity), "{}", rep.fidelity),
            Err(e) => prop_assert!(matches!(e, sptmqc::Error::NullOutcome(_)), "{e}"),
        }
    }

    #[test]
    fn limit_gate_is_exact_at_generic_points((theta, phi) in generic(), gate in 0.0..2.0 * PI) {
        let f = toy(theta, phi);
        for axis in BufferAxis::ALL {
            let r = renorm::fixed_point(&f, axis).unwrap();
            prop_assert!(r.xi_tilde.is_finite());
            let fid = mqc::gate_fidelity(&r, gate, None, None).unwrap().fidelity;
            prop_assert!((fid - 1.0).abs() < 1e-8, "axis {}: F = {fid}", axis.name());
        }
    }

    #[test]
    fn postselection_decays_monotonically(theta in 0.0..PI, phi in 0.0..2.0 * PI) {
        let f = toy(theta, phi);
        let p: Vec<f64> = (0..6).map(|m| mqc::postselect_probability(&f, BufferAxis::Z, m).unwrap()).collect();
        prop_assert!((p[0] - 1.0).abs() < 1e-12);
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) && w[1] > 0.0), "{p:?}");
    }

    #[test]
    fn zero_depth_keeps_bare_correlation_length(theta in 0.0..PI, phi in 0.0..2.0 * PI) {
        let f = toy(theta, phi);
        let r0 = renorm::buffer(&f, BufferAxis::Z, 0).unwrap();
        let xi = mps::fixed_points(&f.tensor()).unwrap().xi;
        match (r0.xi_tilde, xi) {
            (Length::Finite(a), Length::Finite(b)) => prop_assert!((a - b).abs() <= 1e-6 * b.max(1.0), "{a} vs {b}"),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn float_text_round_trips(x in any::<f64>()) {
        let text = sweep::fmt_float(x);
        let back: f64 = match text.as_str() {
            "nan" => f64::NAN,
            "inf" => f64::INFINITY,
            "-inf" => f64::NEG_INFINITY,
            s => s.parse().unwrap(),
        };
        prop_assert!(back.to_bits() == x.to_bits() || (x.is_nan() && back.is_nan()));
    }
}

#[test]
fn quarter_turn_fidelity_at_equator() {
    let r = renorm::fixed_point(&toy(FRAC_PI_2, 0.3), BufferAxis::X).unwrap();
    assert!((mqc::gate_fidelity(&r, FRAC_PI_2, None, None).unwrap().fidelity - 1.0).abs() < 1e-9);
}
