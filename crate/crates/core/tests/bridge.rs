//! Moment values from the scenario files fed into the appendix checks, the
//! way the non-unitary step of the classification proof uses them.
//!
//! With `x_k = phi_k((a_{k;j} a_{k;j}*)^2)`, `y_k` the same at `i` and
//! `t_k = |phi_k(a_{k;j})|^2`, freeness of `D` forces the equality
//! hypotheses, so the conclusions must vanish; a failed hypothesis must come
//! with a freeness witness.

use std::path::PathBuf;

use num_traits::Zero;
use tensorfree::error::Error;
use tensorfree::freeness::{singleton_grouping, test_freeness, FreenessOptions};
use tensorfree::identities::{prop_a3_conclusion, prop_a5_conclusion};
use tensorfree::scalar::Rational;
use tensorfree::scenario::Scenario;
use tensorfree::starwords::{Letter, VarId};
use tensorfree::tensor::TensorScenario;

fn real(s: &TensorScenario, k: usize, letters: &[Letter]) -> Rational {
    let z = s.factor_moment(k, letters).unwrap();
    assert!(z.im.is_zero());
    z.re
}

fn quartic(s: &TensorScenario, k: usize, v: VarId) -> Rational {
    let (a, b) = (Letter::plain(v), Letter::starred(v));
    real(s, k, &[a, b, a, b])
}

fn mean_sq(s: &TensorScenario, k: usize, v: VarId) -> Rational {
    let z = s.factor_moment(k, &[Letter::plain(v)]).unwrap();
    z.norm_sqr()
}

#[test]
fn golden_moments_satisfy_the_proof_steps() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut exercised = 0;
    let mut refuted = 0;
    for name in [
        "semicircle_dominated",
        "unitary_dominated",
        "two_non_unitary",
        "haar_dominated",
    ] {
        let s = Scenario::load(&dir.join(format!("{name}.json"))).unwrap();
        let t = &s.tensor;
        let free = test_freeness(t, &singleton_grouping(t), FreenessOptions::new(8)).unwrap();
        for (i, j) in [(1, 2), (2, 1)] {
            let kk = 0..t.num_factors();
            let x: Vec<Rational> = kk.clone().map(|k| quartic(t, k, t.bindings()[&j][k])).collect();
            let y: Vec<Rational> = kk.clone().map(|k| quartic(t, k, t.bindings()[&i][k])).collect();
            let tt: Vec<Rational> = kk.map(|k| mean_sq(t, k, t.bindings()[&j][k])).collect();
            for outcome in [prop_a5_conclusion(&x, &y), prop_a3_conclusion(&tt, &y)] {
                match outcome {
                    Ok(c) => {
                        exercised += 1;
                        assert!(c.all_zero, "{name} ({i}, {j}): {c:?}");
                    }
                    Err(Error::HypothesisNotMet(_)) => {
                        refuted += 1;
                        assert!(!free.free, "{name}: hypothesis fails but D tests free");
                    }
                    Err(e) => panic!("{name}: {e}"),
                }
            }
        }
    }
    assert!(exercised >= 12);
    assert!(refuted >= 1);
}
