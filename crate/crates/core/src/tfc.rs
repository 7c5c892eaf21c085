//! Tensor freeness conditions, dominating collections and the instance
//! checks of the unitary classification theorem.
//!
//! Every quantifier over `*`-words is truncated at a length bound, and each
//! report records the bound it was computed at.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freeness::{singleton_grouping, test_freeness, FreenessOptions, Verdict};
use crate::scalar::{format, rational_text, Scalar};
use crate::spaces::{check_axioms, variance, GramMode, MomentOracle, DEFAULT_GRAM_CAP};
use crate::starwords::{Letter, VarId};
use crate::tensor::{instantiate, normalize, one_variable_words, pattern_text, Rescaling, TensorScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TfcOptions {
    /// Bound on `M` and on the factor freeness precondition.
    pub max_len: usize,
    /// Word bound of the Gram checks in the theorem instance check.
    pub gram_len: usize,
}

impl TfcOptions {
    pub fn new(max_len: usize) -> Self {
        Self { max_len, gram_len: 2 }
    }

    pub fn with_gram_len(mut self, gram_len: usize) -> Self {
        self.gram_len = gram_len;
        self
    }
}

/// How the freeness of factor `k` was established.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorFreeness {
    pub factor: usize,
    /// Free by construction, no test run.
    pub declared: bool,
    pub verdict: Option<Verdict>,
}

impl FactorFreeness {
    pub fn free(&self) -> bool {
        self.declared || self.verdict.as_ref().is_some_and(|v| v.free)
    }

    pub fn witness(&self) -> Option<&str> {
        self.verdict.as_ref().and_then(|v| v.witness.as_deref())
    }
}

pub fn factor_freeness(scenario: &TensorScenario, k: usize, max_len: usize) -> Result<FactorFreeness> {
    if scenario.factor_declared_free(k) {
        return Ok(FactorFreeness {
            factor: k + 1,
            declared: true,
            verdict: None,
        });
    }
    let view = scenario.factor_view(k);
    let verdict = test_freeness(&view, &singleton_grouping(&view), FreenessOptions::new(max_len))?;
    Ok(FactorFreeness {
        factor: k + 1,
        declared: false,
        verdict: Some(verdict),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TfcViolation {
    /// 1: `phi(M(D_i)) = 0` but `phi_k(M(a_{k;i})) != 0`.
    /// 2: `phi(M(D_i)) != 0` but `M(a_{l;i})` has nonzero variance.
    pub condition: u8,
    pub word: String,
    pub index: VarId,
    pub factor: usize,
    #[serde(with = "crate::scalar::text")]
    pub tensor_value: Scalar,
    #[serde(with = "crate::scalar::text")]
    pub factor_value: Scalar,
    pub variance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TfcReport {
    pub factor: usize,
    pub max_len: usize,
    pub satisfied: bool,
    pub dominating: Option<usize>,
    /// First violation of each condition, condition 1 first.
    pub violations: Vec<TfcViolation>,
    pub total_violations: usize,
    pub checks: usize,
    pub precondition: FactorFreeness,
}

impl std::fmt::Display for TfcReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.satisfied {
            write!(f, "TFC hold with factor {} at length {}", self.factor, self.max_len)
        } else {
            let v = &self.violations[0];
            write!(
                f,
                "TFC fail with factor {} at length {}: condition {} at M = {} (i = {}, factor {})",
                self.factor, self.max_len, v.condition, v.word, v.index, v.factor
            )
        }
    }
}

fn violations_at(scenario: &TensorScenario, k: usize, pattern: &[bool], i: VarId) -> Result<Vec<TfcViolation>> {
    let word = instantiate(pattern, i);
    let tensor_value = scenario.moment_letters(&word)?;
    let mut out = Vec::new();
    if tensor_value.is_zero() {
        let fv = scenario.factor_moment(k, &word)?;
        if !fv.is_zero() {
            out.push(TfcViolation {
                condition: 1,
                word: pattern_text(pattern),
                index: i,
                factor: k + 1,
                tensor_value,
                factor_value: fv,
                variance: None,
            });
        }
        return Ok(out);
    }
    for l in (0..scenario.num_factors()).filter(|&l| l != k) {
        let local = scenario.relabel(&word, l)?;
        let var = variance(scenario.factor(l).as_ref(), &local)?;
        if !var.is_zero() {
            out.push(TfcViolation {
                condition: 2,
                word: pattern_text(pattern),
                index: i,
                factor: l + 1,
                tensor_value: tensor_value.clone(),
                factor_value: scenario.factor_moment(l, &word)?,
                variance: Some(rational_text(&var)),
            });
        }
    }
    Ok(out)
}

/// Checks both conditions for every one-variable `M` with `|M| <= max_len`
/// and every index, taking factor `k` (0-based) as the candidate.
pub fn check_tfc(scenario: &TensorScenario, k: usize, opts: TfcOptions) -> Result<TfcReport> {
    if k >= scenario.num_factors() {
        return Err(Error::Precondition(format!("no factor {}", k + 1)));
    }
    let precondition = factor_freeness(scenario, k, opts.max_len)?;
    if !precondition.free() {
        return Err(Error::FactorNotFree {
            factor: k + 1,
            witness: precondition.witness().unwrap_or("?").to_string(),
        });
    }
    let cases: Vec<(Vec<bool>, VarId)> = one_variable_words(opts.max_len)
        .into_iter()
        .flat_map(|p| scenario.indices().into_iter().map(move |i| (p.clone(), i)))
        .collect();
    let found: Vec<Vec<TfcViolation>> = cases
        .par_iter()
        .map(|(p, i)| violations_at(scenario, k, p, *i))
        .collect::<Result<_>>()?;
    let all: Vec<TfcViolation> = found.into_iter().flatten().collect();
    let mut violations = Vec::new();
    for c in [1, 2] {
        if let Some(v) = all.iter().find(|v| v.condition == c) {
            violations.push(v.clone());
        }
    }
    let satisfied = violations.is_empty();
    Ok(TfcReport {
        factor: k + 1,
        max_len: opts.max_len,
        satisfied,
        dominating: satisfied.then_some(k + 1),
        total_violations: all.len(),
        checks: cases.len(),
        violations,
        precondition,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TfcAttempt {
    pub factor: usize,
    pub report: Option<TfcReport>,
    /// Witness that factor `k` itself is not free.
    pub not_free_witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominatingReport {
    pub dominating: Option<usize>,
    pub max_len: usize,
    pub attempts: Vec<TfcAttempt>,
}

/// Smallest factor whose TFC hold; all attempts are kept when none does.
pub fn find_dominating(scenario: &TensorScenario, opts: TfcOptions) -> Result<DominatingReport> {
    let mut attempts = Vec::new();
    for k in 0..scenario.num_factors() {
        match check_tfc(scenario, k, opts) {
            Ok(report) => {
                let ok = report.satisfied;
                attempts.push(TfcAttempt {
                    factor: k + 1,
                    report: Some(report),
                    not_free_witness: None,
                });
                if ok {
                    return Ok(DominatingReport {
                        dominating: Some(k + 1),
                        max_len: opts.max_len,
                        attempts,
                    });
                }
            }
            Err(Error::FactorNotFree { witness, .. }) => attempts.push(TfcAttempt {
                factor: k + 1,
                report: None,
                not_free_witness: Some(witness),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(DominatingReport {
        dominating: None,
        max_len: opts.max_len,
        attempts,
    })
}

/// Where a scenario falls in the theorem's case split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum TheoremCase {
    /// Some factor family is not free, tracial or faithful at the bound.
    HypothesisNotMet { reason: String },
    /// `D` is not free up to the bound, so there is nothing to assert.
    TensorNotFree,
    /// Exactly one factor carries a non-unitary variable.
    NonUnitaryFactor { factor: usize },
    /// All unitary, with `phi(D_i^m) != 0` and `a_{k;i}^m` not deterministic.
    UnitaryWithWitness { factor: usize, index: VarId, power: i64 },
    /// All unitary and no such triple: the unresolved case.
    MissingCase,
    /// More than one non-unitary factor while `D` tests free.
    SeveralNonUnitary { factors: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub claim: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub max_len: usize,
    pub normalization: Vec<Rescaling>,
    pub factor_freeness: Vec<FactorFreeness>,
    /// Factors with a variable failing `phi_k((a a*)^2) = 1`.
    pub non_unitary_factors: Vec<usize>,
    pub tensor_verdict: Option<Verdict>,
    pub case: TheoremCase,
    pub claims: Vec<Claim>,
    /// False when an asserted claim fails, which points at an implementation bug.
    pub consistent: bool,
    pub tfc: Option<TfcReport>,
}

impl TheoremReport {
    pub fn hypothesis_met(&self) -> bool {
        !matches!(
            self.case,
            TheoremCase::HypothesisNotMet { .. } | TheoremCase::MissingCase
        )
    }
}

fn quartic_is_one(o: &dyn MomentOracle, v: VarId) -> Result<bool> {
    let a = Letter::plain(v);
    let s = Letter::starred(v);
    Ok(o.moment_letters(&[a, s, a, s])?.is_one())
}

pub fn theorem_1_8_instance_check(scenario: &TensorScenario, opts: TfcOptions) -> Result<TheoremReport> {
    let (scenario, normalization) = normalize(scenario)?;
    let mut report = TheoremReport {
        max_len: opts.max_len,
        normalization,
        factor_freeness: Vec::new(),
        non_unitary_factors: Vec::new(),
        tensor_verdict: None,
        case: TheoremCase::MissingCase,
        claims: Vec::new(),
        consistent: true,
        tfc: None,
    };

    for k in 0..scenario.num_factors() {
        let ff = factor_freeness(&scenario, k, opts.max_len)?;
        let free = ff.free();
        report.factor_freeness.push(ff);
        if !free {
            report.case = TheoremCase::HypothesisNotMet {
                reason: format!("factor family {} is not *-free", k + 1),
            };
            return Ok(report);
        }
        let view = scenario.factor_view(k);
        let axioms = check_axioms(
            &view,
            &scenario.indices(),
            opts.gram_len,
            GramMode::Exact,
            DEFAULT_GRAM_CAP,
        )?;
        if !(axioms.tracial && axioms.positive_definite) {
            report.case = TheoremCase::HypothesisNotMet {
                reason: format!(
                    "factor {} is not a faithful trace at length {}: {axioms}",
                    k + 1,
                    opts.gram_len
                ),
            };
            return Ok(report);
        }
        let mut unitary = true;
        for i in scenario.indices() {
            unitary &= quartic_is_one(&view, i)?;
        }
        if !unitary {
            report.non_unitary_factors.push(k + 1);
        }
    }

    let verdict = test_freeness(
        &scenario,
        &singleton_grouping(&scenario),
        FreenessOptions::new(opts.max_len),
    )?;
    let tensor_free = verdict.free;
    report.tensor_verdict = Some(verdict);
    let several = report.non_unitary_factors.len() > 1;

    if !tensor_free {
        report.case = TheoremCase::TensorNotFree;
        report.claims.push(Claim {
            claim: "(1') at most one non-unitary factor".into(),
            holds: true,
            detail: if several {
                "several non-unitary factors and D is not free, as required".into()
            } else {
                "vacuous: D is not free".into()
            },
        });
        return Ok(report);
    }

    if several {
        report.case = TheoremCase::SeveralNonUnitary {
            factors: report.non_unitary_factors.clone(),
        };
        report.claims.push(Claim {
            claim: "(1') at most one non-unitary factor".into(),
            holds: false,
            detail: format!(
                "factors {:?} are non-unitary yet D tests free",
                report.non_unitary_factors
            ),
        });
        report.consistent = false;
        return Ok(report);
    }
    report.claims.push(Claim {
        claim: "(1') at most one non-unitary factor".into(),
        holds: true,
        detail: format!("non-unitary factors: {:?}", report.non_unitary_factors),
    });

    let candidate = if let Some(&k) = report.non_unitary_factors.first() {
        report.case = TheoremCase::NonUnitaryFactor { factor: k };
        Some(("(2') the non-unitary factor dominates", k - 1))
    } else {
        match unitary_witness(&scenario, opts.max_len)? {
            Some((k, i, m)) => {
                report.case = TheoremCase::UnitaryWithWitness {
                    factor: k + 1,
                    index: i,
                    power: m,
                };
                Some(("(3') the factor with a non-deterministic power dominates", k))
            }
            None => {
                report.case = TheoremCase::MissingCase;
                None
            }
        }
    };

    if let Some((claim, k)) = candidate {
        let tfc = check_tfc(&scenario, k, opts)?;
        report.claims.push(Claim {
            claim: claim.into(),
            holds: tfc.satisfied,
            detail: tfc.to_string(),
        });
        report.consistent = tfc.satisfied;
        report.tfc = Some(tfc);
    }
    Ok(report)
}

/// First `(k, i, m)` with `phi(D_i^m) != 0` and `a_{k;i}^m` not deterministic.
fn unitary_witness(scenario: &TensorScenario, max_power: usize) -> Result<Option<(usize, VarId, i64)>> {
    for m in 1..=max_power as i64 {
        for i in scenario.indices() {
            let word = vec![Letter::plain(i); m as usize];
            if scenario.moment_letters(&word)?.is_zero() {
                continue;
            }
            for k in 0..scenario.num_factors() {
                let local = scenario.relabel(&word, k)?;
                if !variance(scenario.factor(k).as_ref(), &local)?.is_zero() {
                    return Ok(Some((k, i, m)));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma63Violation {
    pub factor: usize,
    pub i: VarId,
    pub p: i64,
    pub j: VarId,
    pub n: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma63Report {
    /// D tests free and every variable is unitary.
    pub applicable: bool,
    pub max_power: usize,
    pub instances: usize,
    pub violations: Vec<Lemma63Violation>,
}

/// For `phi(D_i^p) = 0` with `phi_k(a_{k;i}^p) != 0` and `phi(D_j^n) = 0`,
/// looks for `l != k` with `phi_l(a_{l;i}^p) = phi_l(a_{l;j}^n) = 0`.
pub fn lemma_6_3_instance(scenario: &TensorScenario, max_power: usize, max_len: usize) -> Result<Lemma63Report> {
    let unitary = scenario.indices().iter().all(|&i| scenario.is_unitary(i));
    let free = unitary && test_freeness(scenario, &singleton_grouping(scenario), FreenessOptions::new(max_len))?.free;
    let mut report = Lemma63Report {
        applicable: free,
        max_power,
        instances: 0,
        violations: Vec::new(),
    };
    if !free {
        return Ok(report);
    }
    let power = |v: VarId, p: i64| -> Vec<Letter> { vec![Letter::new(v, p < 0); p.unsigned_abs() as usize] };
    let powers: Vec<i64> = (1..=max_power as i64).flat_map(|p| [p, -p]).collect();
    let kk = scenario.num_factors();
    for i in scenario.indices() {
        for &p in &powers {
            let wi = power(i, p);
            if !scenario.moment_letters(&wi)?.is_zero() {
                continue;
            }
            for k in 0..kk {
                if scenario.factor_moment(k, &wi)?.is_zero() {
                    continue;
                }
                for j in scenario.indices().into_iter().filter(|&j| j != i) {
                    for &n in &powers {
                        let wj = power(j, n);
                        if !scenario.moment_letters(&wj)?.is_zero() {
                            continue;
                        }
                        report.instances += 1;
                        let mut ok = false;
                        for l in (0..kk).filter(|&l| l != k) {
                            if scenario.factor_moment(l, &wi)?.is_zero() && scenario.factor_moment(l, &wj)?.is_zero() {
                                ok = true;
                                break;
                            }
                        }
                        if !ok {
                            report.violations.push(Lemma63Violation {
                                factor: k + 1,
                                i,
                                p,
                                j,
                                n,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Short summary line for a theorem report.
pub fn theorem_summary(r: &TheoremReport) -> String {
    let case = match &r.case {
        TheoremCase::HypothesisNotMet { reason } => format!("hypothesis not met: {reason}"),
        TheoremCase::TensorNotFree => "D is not free; claims are vacuous".into(),
        TheoremCase::NonUnitaryFactor { factor } => format!("non-unitary factor {factor}"),
        TheoremCase::UnitaryWithWitness { factor, index, power } => {
            format!("all unitary, phi(D_{index}^{power}) != 0 with factor {factor} non-deterministic")
        }
        TheoremCase::MissingCase => "hypothesis not met: missing case".into(),
        TheoremCase::SeveralNonUnitary { factors } => format!("several non-unitary factors {factors:?}"),
    };
    let values: Vec<String> = r
        .tensor_verdict
        .iter()
        .filter_map(|v| v.lhs.as_ref().map(format))
        .collect();
    if values.is_empty() {
        case
    } else {
        format!("{case} (witness value {})", values.join(", "))
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use crate::groups::GroupPresentation;
    use crate::ncpartitions::{MarginalMoments, Marginals};
    use crate::scalar::{real, Scalar};
    use crate::spaces::{GroupModel, MomentFunctional, SelfAdjointMarginal, SpectralModel, UnitaryMarginal};
    use crate::tensor::TensorScenario;

    pub fn spectral(pairs: Vec<(u32, Arc<dyn MarginalMoments>)>) -> Arc<MomentFunctional> {
        let m: Marginals = pairs.into_iter().collect();
        Arc::new(MomentFunctional::Spectral(SpectralModel::new(m, true).unwrap()))
    }

    pub fn unitary(pairs: &[(i64, Scalar)]) -> Arc<dyn MarginalMoments> {
        Arc::new(UnitaryMarginal::new(pairs.iter().cloned().collect(), None).unwrap())
    }

    pub fn haar() -> Arc<dyn MarginalMoments> {
        Arc::new(UnitaryMarginal::haar())
    }

    pub fn semicircle() -> Arc<dyn MarginalMoments> {
        Arc::new(SelfAdjointMarginal::semicircle(16))
    }

    fn pair() -> BTreeMap<u32, Vec<u32>> {
        BTreeMap::from([(1, vec![1, 1]), (2, vec![2, 2])])
    }

    /// `(s ⊗ 1, v ⊗ g)`: semicircle free from a Haar unitary, then `(e, g)`.
    pub fn semicircle_dominated() -> TensorScenario {
        let f1 = spectral(vec![(1, semicircle()), (2, haar())]);
        let z = GroupPresentation::free_group(1);
        let gens = BTreeMap::from([(1, z.identity()), (2, z.parse("g1.1").unwrap())]);
        let f2 = Arc::new(MomentFunctional::Group(GroupModel::canonical_trace(z, gens).unwrap()));
        TensorScenario::new(vec![f1, f2], pair()).unwrap()
    }

    /// `(u ⊗ 1, v ⊗ w)` with `phi(u) = 1/2`.
    pub fn unitary_dominated() -> TensorScenario {
        let f1 = spectral(vec![(1, unitary(&[(1, real(1, 2))])), (2, haar())]);
        let unit: Arc<dyn MarginalMoments> = Arc::new(UnitaryMarginal::new(BTreeMap::new(), Some(1)).unwrap());
        let f2 = spectral(vec![(1, unit), (2, haar())]);
        TensorScenario::new(vec![f1, f2], pair()).unwrap()
    }

    /// Semicircles in both factors, next to unitaries with `phi(u) = 1/2`.
    pub fn two_non_unitary() -> TensorScenario {
        let f1 = spectral(vec![(1, semicircle()), (2, unitary(&[(1, real(1, 2))]))]);
        let f2 = spectral(vec![(1, semicircle()), (2, unitary(&[(1, real(1, 2))]))]);
        TensorScenario::new(vec![f1, f2], pair()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::scalar::{rat, real, zero};
    use crate::tensor::fixtures::{perturbed_functional, free_haar_pair, haar_dominated};
    use std::collections::BTreeMap;
    use std::sync::Arc;

    #[test]
    fn haar_dominated_passes_with_first_factor() {
        let s = haar_dominated();
        let r = check_tfc(&s, 0, TfcOptions::new(6)).unwrap();
        assert!(r.satisfied, "{r}");
        assert_eq!(r.dominating, Some(1));
        let d = find_dominating(&s, TfcOptions::new(6)).unwrap();
        assert_eq!(d.dominating, Some(1));
    }

    #[test]
    fn perturbed_functional_has_no_dominating_factor() {
        let s = perturbed_functional(rat(1, 10));
        let e = check_tfc(&s, 0, TfcOptions::new(4)).unwrap_err();
        assert_eq!(
            e,
            Error::FactorNotFree {
                factor: 1,
                witness: "x1 x2".into()
            }
        );
        let d = find_dominating(&s, TfcOptions::new(4)).unwrap();
        assert_eq!(d.dominating, None);
        assert_eq!(d.attempts.len(), 2);
        assert!(d.attempts.iter().all(|a| a.not_free_witness.is_some()));
    }

    #[test]
    fn single_factor_is_trivially_dominating() {
        let s = TensorScenario::new(
            vec![Arc::new(free_haar_pair())],
            BTreeMap::from([(1, vec![1]), (2, vec![2])]),
        )
        .unwrap();
        let r = check_tfc(&s, 0, TfcOptions::new(4)).unwrap();
        assert!(r.satisfied);
    }

    #[test]
    fn symmetric_tie_goes_to_first_factor() {
        let s = TensorScenario::new(
            vec![Arc::new(free_haar_pair()), Arc::new(free_haar_pair())],
            BTreeMap::from([(1, vec![1, 1]), (2, vec![2, 2])]),
        )
        .unwrap();
        assert_eq!(find_dominating(&s, TfcOptions::new(4)).unwrap().dominating, Some(1));
        assert!(check_tfc(&s, 1, TfcOptions::new(4)).unwrap().satisfied);
    }

    #[test]
    fn violations_reproduce_their_condition() {
        let s = unitary_dominated();
        let r = check_tfc(&s, 1, TfcOptions::new(3)).unwrap();
        assert!(!r.satisfied);
        for v in &r.violations {
            let w = instantiate(&v.word.split(' ').map(|t| t == "x*").collect::<Vec<_>>(), v.index);
            assert_eq!(s.moment_letters(&w).unwrap(), v.tensor_value);
            assert_eq!(s.factor_moment(v.factor - 1, &w).unwrap(), v.factor_value);
            match v.condition {
                1 => {
                    assert_eq!(v.tensor_value, zero());
                    assert_ne!(v.factor_value, zero());
                }
                _ => assert_ne!(v.tensor_value, zero()),
            }
        }
        assert_eq!(r.violations[0].condition, 1);
        assert_eq!(r.violations[0].word, "x x");
        assert_eq!(r.violations[0].factor_value, real(1, 1));
        assert_eq!(r.violations[1].word, "x");
        assert_eq!(r.violations[1].variance.as_deref(), Some("3/4"));
    }

    #[test]
    fn theorem_paths() {
        let opts = TfcOptions::new(6);
        let r = theorem_1_8_instance_check(&semicircle_dominated(), opts).unwrap();
        assert_eq!(r.case, TheoremCase::NonUnitaryFactor { factor: 1 });
        assert!(r.consistent && r.claims.iter().all(|c| c.holds), "{r:?}");

        let r = theorem_1_8_instance_check(&unitary_dominated(), opts).unwrap();
        assert_eq!(
            r.case,
            TheoremCase::UnitaryWithWitness {
                factor: 1,
                index: 1,
                power: 1
            }
        );
        assert!(r.consistent);

        let r = theorem_1_8_instance_check(&two_non_unitary(), opts).unwrap();
        assert_eq!(r.case, TheoremCase::TensorNotFree);
        assert_eq!(r.non_unitary_factors, vec![1, 2]);

        let r = theorem_1_8_instance_check(&perturbed_functional(rat(1, 10)), opts).unwrap();
        assert!(matches!(r.case, TheoremCase::HypothesisNotMet { .. }));
    }

    #[test]
    fn sufficiency_on_fixtures() {
        for s in [haar_dominated(), semicircle_dominated(), unitary_dominated()] {
            let d = find_dominating(&s, TfcOptions::new(5)).unwrap();
            assert!(d.dominating.is_some());
            let v = test_freeness(&s, &singleton_grouping(&s), FreenessOptions::new(5)).unwrap();
            assert!(v.free, "{v}");
        }
    }
}
