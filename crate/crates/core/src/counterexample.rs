//! The `K`-factor unitary example with `phi_k(a_{k;i}^{±k}) = alpha` and
//! Haar `a_{k;j}`, and the partition filtering that explains why short
//! words cannot separate `(D_i, D_j)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freeness::{
    alternating_power_words, centered_value, singleton_grouping, test_freeness, FreenessOptions, Verdict,
};
use crate::ncpartitions::{filter_parity_singletons, nc_cached, MarginalMoments, Marginals, SingletonFilter};
use crate::scalar::{format, from_real, zero, Rational, Scalar};
use crate::spaces::{
    check_axioms, AxiomReport, GramMode, MomentFunctional, SpectralModel, UnitaryMarginal, DEFAULT_GRAM_CAP,
};
use crate::starwords::{alternating_blocks, expand_powers, letters_text, VarId};
use crate::tensor::TensorScenario;

/// Index of the prescribed unitaries `D_i`.
pub const INDEX_I: VarId = 1;
/// Index of the Haar unitaries `D_j`.
pub const INDEX_J: VarId = 2;

/// Largest `K` accepted; the filter counts grow like `(K+1)^t`.
pub const MAX_K: usize = 6;

/// Filter counts stop at `t = 6`, i.e. `NC(12)`.
pub const FILTER_T_CAP: usize = 6;

/// Factor `k` holds a free pair `(a_{k;i}, a_{k;j})`: `phi_k(a_{k;i}^n)` is
/// `alpha` at `n = k`, its conjugate at `n = -k` and zero at other nonzero
/// powers; `a_{k;j}` is Haar.
pub fn table1_scenario(k_factors: usize, alpha: &Scalar) -> Result<TensorScenario> {
    if !(2..=MAX_K).contains(&k_factors) {
        return Err(Error::Precondition(format!(
            "the example needs 2 <= K <= {MAX_K}, got {k_factors}"
        )));
    }
    let mut factors = Vec::new();
    for k in 1..=k_factors as i64 {
        let ui = UnitaryMarginal::new(BTreeMap::from([(k, alpha.clone())]), None)?;
        let marginals: Marginals = BTreeMap::from([
            (INDEX_I, Arc::new(ui) as Arc<dyn MarginalMoments>),
            (INDEX_J, Arc::new(UnitaryMarginal::haar()) as Arc<dyn MarginalMoments>),
        ]);
        factors.push(Arc::new(MomentFunctional::Spectral(SpectralModel::new(
            marginals, true,
        )?)));
    }
    let bindings = BTreeMap::from([(INDEX_I, vec![INDEX_I; k_factors]), (INDEX_J, vec![INDEX_J; k_factors])]);
    TensorScenario::new(factors, bindings)
}

/// Filter sizes at one `t`, with exponent tuples classed by which
/// `N_o^(k)` they leave nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterCounts {
    pub t: usize,
    pub nc: usize,
    pub nc_eo: usize,
    pub n_o: usize,
    /// Odd-position exponent classes: `|n_p|` in `1..=K`, or "other".
    pub tuples: usize,
    /// Entry `k-1`: tuples with `N_o^(k)` nonempty.
    pub nonempty_per_factor: Vec<usize>,
    /// Tuples with every `N_o^(k)` nonempty.
    pub all_nonempty: usize,
}

/// Counts for `t` blocks of `x_i` against `K` factors.
pub fn filter_counts(t: usize, k_factors: usize) -> Result<FilterCounts> {
    let all = nc_cached(2 * t)?;
    let eo = filter_parity_singletons(&all, t, &SingletonFilter::ParityPure)?;
    let no = filter_parity_singletons(&eo, t, &SingletonFilter::OddSingletons)?;
    let classes = k_factors as i64 + 1;
    let tuples = (classes as usize).pow(t as u32);
    let mut per = vec![0usize; k_factors];
    let mut all_nonempty = 0;
    for code in 0..tuples {
        let mut c = code;
        let mut exponents = vec![1i64; 2 * t];
        for p in 0..t {
            // 1..=K, or K+1 standing for any exponent outside the table
            exponents[2 * p] = (c % classes as usize) as i64 + 1;
            c /= classes as usize;
        }
        let mut every = true;
        for k in 1..=k_factors as i64 {
            let nok = filter_parity_singletons(
                &no,
                t,
                &SingletonFilter::OddSingletonsWithExponent {
                    k,
                    exponents: exponents.clone(),
                },
            )?;
            if nok.is_empty() {
                every = false;
            } else {
                per[k as usize - 1] += 1;
            }
        }
        all_nonempty += every as usize;
    }
    Ok(FilterCounts {
        t,
        nc: all.len(),
        nc_eo: eo.len(),
        n_o: no.len(),
        tuples,
        nonempty_per_factor: per,
        all_nonempty,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictedSearch {
    /// Words with at most this many `x_i` blocks.
    pub max_i_blocks: usize,
    pub max_len: usize,
    pub words_checked: u64,
    pub free: bool,
    pub witness: Option<String>,
    #[serde(with = "crate::scalar::text::option")]
    pub value: Option<Scalar>,
}

/// Alternating words in `D_i, D_j` up to `max_len` letters with at most
/// `max_i_blocks` blocks of `D_i`, shortest then text order.
pub fn restricted_search(scenario: &TensorScenario, max_len: usize, max_i_blocks: usize) -> Result<RestrictedSearch> {
    let mut out = RestrictedSearch {
        max_i_blocks,
        max_len,
        words_checked: 0,
        free: true,
        witness: None,
        value: None,
    };
    for len in 2..=max_len {
        let mut words: Vec<(String, Vec<_>)> =
            alternating_power_words(&[INDEX_I, INDEX_J], len, Some(2 * max_i_blocks + 1))
                .into_iter()
                .filter(|w| w.iter().filter(|(v, _)| *v == INDEX_I).count() <= max_i_blocks)
                .map(|w| {
                    let l = expand_powers(&w);
                    (letters_text(&l), l)
                })
                .collect();
        words.sort();
        out.words_checked += words.len() as u64;
        let found = words
            .par_iter()
            .find_map_first(|(text, w)| {
                let blocks: Vec<_> = alternating_blocks(w).into_iter().map(|(_, b)| b).collect();
                match centered_value(scenario, &blocks) {
                    Ok(v) if v == zero() => None,
                    Ok(v) => Some(Ok((text.clone(), v))),
                    Err(e) => Some(Err(e)),
                }
            })
            .transpose()?;
        if let Some((text, v)) = found {
            out.free = false;
            out.witness = Some(text);
            out.value = Some(v);
            break;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub k: usize,
    pub alpha: String,
    pub max_len: usize,
    /// Faithful-trace check of each factor at Gram length 2.
    pub factor_axioms: Vec<AxiomReport>,
    /// Words with fewer than `K` blocks of `D_i`.
    pub restricted: RestrictedSearch,
    /// Unrestricted bounded test of `(D_i, D_j)`.
    pub full: Verdict,
    pub filter_counts: Vec<FilterCounts>,
    /// Least `t` where some exponent tuple leaves every `N_o^(k)` nonempty,
    /// searched up to [`FILTER_T_CAP`].
    pub minimal_t: Option<usize>,
    pub t_searched: usize,
    /// The cumulant argument's lower bound `t >= K`.
    pub bound: usize,
    /// No violation below the bound, and the counts agree with it.
    pub consistent: bool,
}

pub fn counterexample_analysis(k_factors: usize, alpha: &Scalar, max_len: usize) -> Result<CounterexampleReport> {
    let scenario = table1_scenario(k_factors, alpha)?;
    let factor_axioms = (0..k_factors)
        .map(|k| {
            check_axioms(
                &scenario.factor_view(k),
                &[INDEX_I, INDEX_J],
                2,
                GramMode::Exact,
                DEFAULT_GRAM_CAP,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let restricted = restricted_search(&scenario, max_len, k_factors - 1)?;
    let full = test_freeness(&scenario, &singleton_grouping(&scenario), FreenessOptions::new(max_len))?;
    let mut counts = Vec::new();
    for t in 1..=FILTER_T_CAP {
        let c = filter_counts(t, k_factors)?;
        let hit = c.all_nonempty > 0;
        counts.push(c);
        if hit {
            break;
        }
    }
    let minimal_t = counts.iter().find(|c| c.all_nonempty > 0).map(|c| c.t);
    let t_searched = counts.len();
    let filter_counts = counts;
    let consistent = restricted.free && minimal_t.is_none_or(|t| t >= k_factors);
    Ok(CounterexampleReport {
        k: k_factors,
        alpha: format(alpha),
        max_len,
        factor_axioms,
        restricted,
        full,
        filter_counts,
        minimal_t,
        t_searched,
        bound: k_factors,
        consistent,
    })
}

/// Default `alpha = 1/10`.
pub fn default_alpha() -> Scalar {
    from_real(Rational::new(1.into(), 10.into()))
}

/// Human summary of a report.
pub fn summary(r: &CounterexampleReport) -> String {
    let counts: Vec<String> = r
        .filter_counts
        .iter()
        .map(|c| {
            format!(
                "t={}: |NC|={} |NC_eo|={} |N_o|={} all-nonempty={}",
                c.t, c.nc, c.nc_eo, c.n_o, c.all_nonempty
            )
        })
        .collect();
    format!(
        "K={} alpha={}: {} below t={} ({} words); full test to length {}: {}; minimal t={} (searched to {}); {}",
        r.k,
        r.alpha,
        if r.restricted.free { "no violation" } else { "VIOLATION" },
        r.bound,
        r.restricted.words_checked,
        r.max_len,
        r.full,
        r.minimal_t.map_or("none".into(), |t| t.to_string()),
        r.t_searched,
        counts.join("; ")
    )
}
