//! Noncrossing partitions, free cumulants and the parity/singleton filters
//! used when expanding moments of alternating words.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{one, zero, Scalar};
use crate::starwords::VarId;

/// Largest ground set [`enumerate_nc`] accepts without an explicit limit.
pub const DEFAULT_NC_LIMIT: usize = 14;

/// A noncrossing partition of `{1, ..., n}` in canonical form: every block
/// sorted, blocks sorted by their minimum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NCPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl NCPartition {
    /// Validates and canonicalizes `blocks`. Fails on overlap, gaps or crossings.
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        if !is_noncrossing(&blocks)? {
            return Err(Error::MalformedPartition(format!("{blocks:?} has a crossing")));
        }
        Ok(Self::canonical(blocks))
    }

    fn canonical(mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let n = blocks.iter().map(Vec::len).sum();
        Self { n, blocks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn singletons(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().filter(|b| b.len() == 1).map(|b| b[0])
    }

    pub fn is_one_block(&self) -> bool {
        self.blocks.len() == 1
    }
}

impl fmt::Display for NCPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, b) in self.blocks.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (m, e) in b.iter().enumerate() {
                if m > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

/// True iff no `a < b < c < d` has `a, c` in one block and `b, d` in another.
///
/// `blocks` must form a set partition of `{1, ..., n}`, `n` being the total
/// number of elements.
pub fn is_noncrossing(blocks: &[Vec<usize>]) -> Result<bool> {
    let n: usize = blocks.iter().map(Vec::len).sum();
    if n == 0 || blocks.iter().any(Vec::is_empty) {
        return Err(Error::MalformedPartition("empty block or ground set".into()));
    }
    let mut label = vec![usize::MAX; n + 1];
    for (b, block) in blocks.iter().enumerate() {
        for &e in block {
            if e == 0 || e > n {
                return Err(Error::MalformedPartition(format!("element {e} outside 1..={n}")));
            }
            if label[e] != usize::MAX {
                return Err(Error::MalformedPartition(format!("element {e} appears twice")));
            }
            label[e] = b;
        }
    }
    // Blocks cross iff some pair interleaves; checking consecutive elements of
    // each block against the others suffices.
    for (b, block) in blocks.iter().enumerate() {
        let mut sorted = block.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            for &other in &label[lo + 1..hi] {
                if other == b {
                    continue;
                }
                if blocks[other].iter().any(|&f| f < lo || f > hi) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub fn catalan(n: usize) -> u128 {
    let mut c: u128 = 1;
    for k in 0..n as u128 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

/// All noncrossing partitions of `{1, ..., n}` (default limit).
pub fn enumerate_nc(n: usize) -> Result<Vec<NCPartition>> {
    enumerate_nc_with_limit(n, DEFAULT_NC_LIMIT)
}

/// Generated by recursive placement of the block containing the smallest
/// element; the order is deterministic.
pub fn enumerate_nc_with_limit(n: usize, limit: usize) -> Result<Vec<NCPartition>> {
    if n == 0 {
        return Err(Error::MalformedPartition("ground set must be nonempty".into()));
    }
    if n > limit {
        return Err(Error::limit("noncrossing enumeration size", n, limit));
    }
    let mut memo: HashMap<usize, Arc<Vec<Vec<Vec<usize>>>>> = HashMap::new();
    let raw = raw_partitions(n, &mut memo);
    Ok(raw
        .iter()
        .map(|blocks| NCPartition::canonical(blocks.iter().map(|b| b.iter().map(|e| e + 1).collect()).collect()))
        .collect())
}

/// Partitions of the interval `{0, ..., n-1}`.
fn raw_partitions(n: usize, memo: &mut HashMap<usize, Arc<Vec<Vec<Vec<usize>>>>>) -> Arc<Vec<Vec<Vec<usize>>>> {
    if let Some(hit) = memo.get(&n) {
        return hit.clone();
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
    } else {
        for mask in 0u64..(1u64 << (n - 1)) {
            let mut first = vec![0];
            first.extend((1..n).filter(|e| mask & (1 << (e - 1)) != 0));
            // intervals strictly between consecutive members, then the tail
            let mut segments = Vec::new();
            for w in first.windows(2) {
                segments.push((w[0] + 1, w[1] - w[0] - 1));
            }
            let last = *first.last().unwrap();
            segments.push((last + 1, n - last - 1));

            let mut partial: Vec<Vec<Vec<usize>>> = vec![vec![first.clone()]];
            for (start, len) in segments {
                if len == 0 {
                    continue;
                }
                let subs = raw_partitions(len, memo);
                let mut next = Vec::with_capacity(partial.len() * subs.len());
                for p in &partial {
                    for s in subs.iter() {
                        let mut q = p.clone();
                        q.extend(s.iter().map(|b| b.iter().map(|e| e + start).collect()));
                        next.push(q);
                    }
                }
                partial = next;
            }
            out.extend(partial);
        }
    }
    let out = Arc::new(out);
    memo.insert(n, out.clone());
    out
}

/// Shared, lazily built copy of `NC(n)` for the cumulant machinery.
pub fn nc_cached(n: usize) -> Result<Arc<Vec<NCPartition>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<NCPartition>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return Ok(hit.clone());
    }
    let built = Arc::new(enumerate_nc(n)?);
    cache.lock().unwrap().insert(n, built.clone());
    Ok(built)
}

/// Moments of one variable on sequences of "atoms".
///
/// An atom `n > 0` stands for `x^n`, `n < 0` for `(x*)^|n|`; a sequence of
/// atoms is the product in order. For a unitary variable only the sum of the
/// atoms matters.
pub trait MarginalMoments: Send + Sync + fmt::Debug {
    fn moment(&self, atoms: &[i64]) -> Result<Scalar>;

    fn is_unitary(&self) -> bool {
        false
    }

    /// Canonical representative of an atom sequence: equal representatives
    /// denote equal algebra elements. The empty sequence is the unit.
    fn canonical(&self, atoms: Vec<i64>) -> Vec<i64> {
        if self.is_unitary() {
            let n: i64 = atoms.iter().sum();
            if n == 0 {
                Vec::new()
            } else {
                vec![n]
            }
        } else {
            atoms
        }
    }
}

pub type Marginals = BTreeMap<VarId, Arc<dyn MarginalMoments>>;

/// Moment data keyed by atom sequence.
///
/// When `unitary` is set, keys are single powers `[n]` and `value(-n)` must
/// be the conjugate of `value(n)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MomentSequence {
    pub values: BTreeMap<Vec<i64>, Scalar>,
    pub unitary: bool,
}

impl MomentSequence {
    pub fn new(values: BTreeMap<Vec<i64>, Scalar>) -> Self {
        Self { values, unitary: false }
    }

    /// Unitary powers; negative powers are filled in by conjugation.
    pub fn unitary(powers: BTreeMap<i64, Scalar>) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (&n, v) in &powers {
            if n == 0 && *v != one() {
                return Err(Error::Precondition("a unitary has moment 1 at power 0".into()));
            }
            if let Some(w) = powers.get(&-n) {
                if *w != v.conj() {
                    return Err(Error::Precondition(format!(
                        "moments at powers {n} and {} are not conjugate",
                        -n
                    )));
                }
            }
            values.insert(vec![n], v.clone());
            values.insert(vec![-n], v.conj());
        }
        Ok(Self { values, unitary: true })
    }

    /// Moments `m_1, ..., m_n` of a single self-adjoint letter: key `[1; k]`.
    pub fn from_powers(moments: &[Scalar]) -> Self {
        let values = moments
            .iter()
            .enumerate()
            .map(|(k, v)| (vec![1; k + 1], v.clone()))
            .collect();
        Self::new(values)
    }
}

impl MarginalMoments for MomentSequence {
    fn moment(&self, atoms: &[i64]) -> Result<Scalar> {
        if atoms.is_empty() {
            return Ok(one());
        }
        if self.unitary {
            let n: i64 = atoms.iter().sum();
            if n == 0 {
                return Ok(one());
            }
            return Ok(self.values.get(&vec![n]).cloned().unwrap_or_else(zero));
        }
        self.values
            .get(atoms)
            .cloned()
            .ok_or_else(|| Error::InsufficientData(format!("no moment for atoms {atoms:?}")))
    }

    fn is_unitary(&self) -> bool {
        self.unitary
    }
}

/// Memoized free cumulants of a single variable.
#[derive(Debug)]
pub struct CumulantCache<'a> {
    marginal: &'a dyn MarginalMoments,
    values: HashMap<Vec<i64>, Scalar>,
}

impl<'a> CumulantCache<'a> {
    pub fn new(marginal: &'a dyn MarginalMoments) -> Self {
        Self {
            marginal,
            values: HashMap::new(),
        }
    }

    /// `kappa_n[x^{a_1}, ..., x^{a_n}]` from
    /// `m(a) = sum over pi in NC(n) of kappa_pi[a]`.
    pub fn kappa(&mut self, atoms: &[i64]) -> Result<Scalar> {
        if let Some(hit) = self.values.get(atoms) {
            return Ok(hit.clone());
        }
        let moment = self.marginal.moment(atoms)?;
        let mut rest = zero();
        for pi in nc_cached(atoms.len())?.iter() {
            if pi.is_one_block() {
                continue;
            }
            let mut term = one();
            for block in pi.blocks() {
                let sub: Vec<i64> = block.iter().map(|&p| atoms[p - 1]).collect();
                term *= self.kappa(&sub)?;
                if term == zero() {
                    break;
                }
            }
            rest += term;
        }
        let value = moment - rest;
        self.values.insert(atoms.to_vec(), value.clone());
        Ok(value)
    }
}

/// Free cumulants for every key of `moments`; every sub-sequence obtained by
/// restricting a key to a block must also be present.
pub fn cumulants_from_moments(moments: &MomentSequence) -> Result<BTreeMap<Vec<i64>, Scalar>> {
    let mut cache = CumulantCache::new(moments);
    let mut out = BTreeMap::new();
    for key in moments.values.keys() {
        out.insert(key.clone(), cache.kappa(key)?);
    }
    Ok(out)
}

/// The moment-cumulant formula, summing `kappa_pi` over `NC(n)` for each key.
pub fn moments_from_cumulants(cumulants: &BTreeMap<Vec<i64>, Scalar>) -> Result<BTreeMap<Vec<i64>, Scalar>> {
    let mut out = BTreeMap::new();
    for key in cumulants.keys() {
        let mut total = zero();
        for pi in nc_cached(key.len())?.iter() {
            let mut term = one();
            for block in pi.blocks() {
                let sub: Vec<i64> = block.iter().map(|&p| key[p - 1]).collect();
                let k = cumulants
                    .get(&sub)
                    .ok_or_else(|| Error::InsufficientData(format!("no cumulant for atoms {sub:?}")))?;
                term *= k;
            }
            total += term;
        }
        out.insert(key.clone(), total);
    }
    Ok(out)
}

/// Per-variable cumulant caches for evaluating `kappa_pi` on mixed words.
#[derive(Debug)]
pub struct CumulantEngine<'a> {
    caches: BTreeMap<VarId, CumulantCache<'a>>,
}

impl<'a> CumulantEngine<'a> {
    pub fn new(marginals: &'a Marginals) -> Self {
        Self {
            caches: marginals
                .iter()
                .map(|(&v, m)| (v, CumulantCache::new(m.as_ref())))
                .collect(),
        }
    }

    /// Product over the blocks of `partition` of the cumulant restricted to
    /// that block; zero as soon as a block mixes two variables.
    pub fn term(&mut self, partition: &NCPartition, word: &[(VarId, i64)]) -> Result<Scalar> {
        if partition.n() != word.len() {
            return Err(Error::LengthMismatch {
                expected: partition.n(),
                got: word.len(),
            });
        }
        let mut value = one();
        for block in partition.blocks() {
            let var = word[block[0] - 1].0;
            if block.iter().any(|&p| word[p - 1].0 != var) {
                return Ok(zero());
            }
            let cache = self.caches.get_mut(&var).ok_or(Error::MissingMarginal(var))?;
            let atoms: Vec<i64> = block.iter().map(|&p| word[p - 1].1).collect();
            value *= cache.kappa(&atoms)?;
            if value == zero() {
                return Ok(value);
            }
        }
        Ok(value)
    }

    /// `sum over pi in NC(n) of kappa_pi[word]`: the moment of a free family.
    pub fn moment(&mut self, word: &[(VarId, i64)]) -> Result<Scalar> {
        if word.is_empty() {
            return Ok(one());
        }
        let mut total = zero();
        for pi in nc_cached(word.len())?.iter() {
            total += self.term(pi, word)?;
        }
        Ok(total)
    }
}

/// One-shot form of [`CumulantEngine::term`].
pub fn cumulant_term(partition: &NCPartition, word: &[(VarId, i64)], marginals: &Marginals) -> Result<Scalar> {
    CumulantEngine::new(marginals).term(partition, word)
}

/// Which subset of `NC(2t)` to keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SingletonFilter {
    /// `NC_{e,o}(2t)`: every block holds only even or only odd positions.
    ParityPure,
    /// `N_o`: parity-pure with no even singleton.
    OddSingletons,
    /// `N_o^(k)`: additionally every singleton `{p}` has `exponents[p-1] = ±k`.
    OddSingletonsWithExponent { k: i64, exponents: Vec<i64> },
}

pub fn filter_parity_singletons(
    partitions: &[NCPartition],
    t: usize,
    filter: &SingletonFilter,
) -> Result<Vec<NCPartition>> {
    if let SingletonFilter::OddSingletonsWithExponent { exponents, .. } = filter {
        if exponents.len() != 2 * t {
            return Err(Error::LengthMismatch {
                expected: 2 * t,
                got: exponents.len(),
            });
        }
    }
    let mut out = Vec::new();
    for pi in partitions {
        if pi.n() != 2 * t {
            return Err(Error::LengthMismatch {
                expected: 2 * t,
                got: pi.n(),
            });
        }
        let pure = pi.blocks().iter().all(|b| b.iter().all(|e| e % 2 == b[0] % 2));
        let keep = pure
            && match filter {
                SingletonFilter::ParityPure => true,
                SingletonFilter::OddSingletons => pi.singletons().all(|p| p % 2 == 1),
                SingletonFilter::OddSingletonsWithExponent { k, exponents } => {
                    pi.singletons().all(|p| p % 2 == 1 && exponents[p - 1].abs() == k.abs())
                }
            };
        if keep {
            out.push(pi.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, real, Rational};
    use num_traits::Zero;
    use proptest::prelude::*;

    /// Independent oracle: every set partition of `{1..n}` (restricted growth
    /// strings), filtered by the naive quadruple crossing test.
    fn brute_force_nc(n: usize) -> Vec<Vec<Vec<usize>>> {
        fn rec(pos: usize, n: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if pos == n {
                out.push(labels.clone());
                return;
            }
            let max = labels.iter().copied().max().map_or(0, |m| m + 1);
            for l in 0..=max {
                labels.push(l);
                rec(pos + 1, n, labels, out);
                labels.pop();
            }
        }
        let mut all = Vec::new();
        rec(0, n, &mut Vec::new(), &mut all);
        all.into_iter()
            .filter(|lab| {
                for a in 0..n {
                    for b in a + 1..n {
                        for c in b + 1..n {
                            for d in c + 1..n {
                                if lab[a] == lab[c] && lab[b] == lab[d] && lab[a] != lab[b] {
                                    return false;
                                }
                            }
                        }
                    }
                }
                true
            })
            .map(|lab| {
                let k = lab.iter().max().unwrap() + 1;
                let mut blocks = vec![Vec::new(); k];
                for (p, l) in lab.iter().enumerate() {
                    blocks[*l].push(p + 1);
                }
                blocks
            })
            .collect()
    }

    #[test]
    fn enumeration_examples() {
        let one = enumerate_nc(1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].blocks(), &[vec![1]]);
        let two = enumerate_nc(2).unwrap();
        let mut texts: Vec<String> = two.iter().map(|p| p.to_string()).collect();
        texts.sort();
        assert_eq!(texts, vec!["{{1,2}}", "{{1},{2}}"]);
        assert_eq!(enumerate_nc(4).unwrap().len(), 14);
        assert_eq!(brute_force_nc(4).len(), 14);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for n in 1..=8 {
            let mut ours: Vec<NCPartition> = enumerate_nc(n).unwrap();
            let mut oracle: Vec<NCPartition> = brute_force_nc(n)
                .into_iter()
                .map(|b| NCPartition::new(b).unwrap())
                .collect();
            ours.sort();
            oracle.sort();
            assert_eq!(ours, oracle, "n = {n}");
        }
    }

    #[test]
    fn counts_are_catalan_and_order_is_deterministic() {
        for n in 1..=12 {
            let parts = enumerate_nc(n).unwrap();
            assert_eq!(parts.len() as u128, catalan(n), "n = {n}");
            if n <= 9 {
                let mut dedup = parts.clone();
                dedup.sort();
                dedup.dedup();
                assert_eq!(dedup.len(), parts.len());
                assert_eq!(parts, enumerate_nc(n).unwrap());
            }
        }
        assert_eq!(catalan(14), 2_674_440);
    }

    #[test]
    fn enumeration_limit() {
        assert!(matches!(
            enumerate_nc(15),
            Err(Error::LimitExceeded {
                value: 15,
                limit: 14,
                ..
            })
        ));
        assert!(enumerate_nc(0).is_err());
    }

    #[test]
    fn noncrossing_examples() {
        assert!(!is_noncrossing(&[vec![1, 3], vec![2, 4]]).unwrap());
        assert!(is_noncrossing(&[vec![1, 4], vec![2, 3]]).unwrap());
        assert!(is_noncrossing(&[vec![1, 2, 3]]).unwrap());
        assert!(matches!(
            is_noncrossing(&[vec![1, 2], vec![2, 3]]),
            Err(Error::MalformedPartition(_))
        ));
        assert!(matches!(
            is_noncrossing(&[vec![1], vec![3]]),
            Err(Error::MalformedPartition(_))
        ));
    }

    #[test]
    fn cumulant_examples() {
        // the unit: all moments 1
        let unit = MomentSequence::from_powers(&vec![real(1, 1); 6]);
        let k = cumulants_from_moments(&unit).unwrap();
        assert_eq!(k[&vec![1]], real(1, 1));
        for n in 2..=6 {
            assert_eq!(k[&vec![1; n]], zero(), "kappa_{n}");
        }

        let mu = real(3, 7);
        let k = cumulants_from_moments(&MomentSequence::from_powers(std::slice::from_ref(&mu))).unwrap();
        assert_eq!(k[&vec![1]], mu);

        let seq = MomentSequence::from_powers(&[real(0, 1), real(1, 1)]);
        let k = cumulants_from_moments(&seq).unwrap();
        assert_eq!(k[&vec![1, 1]], real(1, 1));
    }

    #[test]
    fn missing_lower_moment_is_reported() {
        let mut values = BTreeMap::new();
        values.insert(vec![1, 1], real(1, 1));
        let err = cumulants_from_moments(&MomentSequence::new(values)).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    fn semicircle() -> Arc<dyn MarginalMoments> {
        Arc::new(MomentSequence::from_powers(&[
            real(0, 1),
            real(1, 1),
            real(0, 1),
            real(2, 1),
            real(0, 1),
            real(5, 1),
        ]))
    }

    #[test]
    fn cumulant_term_examples() {
        let mut marginals: Marginals = BTreeMap::new();
        marginals.insert(1, semicircle());
        marginals.insert(2, semicircle());
        let singles = NCPartition::new(vec![vec![1], vec![2]]).unwrap();
        let pair = NCPartition::new(vec![vec![1, 2]]).unwrap();
        assert_eq!(cumulant_term(&singles, &[(1, 1), (2, 1)], &marginals).unwrap(), zero());
        assert_eq!(cumulant_term(&pair, &[(1, 1), (2, 1)], &marginals).unwrap(), zero());
        assert_eq!(cumulant_term(&pair, &[(1, 1), (1, 1)], &marginals).unwrap(), real(1, 1));
        assert!(matches!(
            cumulant_term(&pair, &[(1, 1)], &marginals),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn semicircle_cumulants_are_free_gaussian() {
        let s = semicircle();
        let mut cache = CumulantCache::new(s.as_ref());
        assert_eq!(cache.kappa(&[1, 1]).unwrap(), real(1, 1));
        assert_eq!(cache.kappa(&[1, 1, 1, 1]).unwrap(), zero());
        assert_eq!(cache.kappa(&[1; 6]).unwrap(), zero());
    }

    #[test]
    fn parity_filter_examples() {
        let nc2 = enumerate_nc(2).unwrap();
        let eo = filter_parity_singletons(&nc2, 1, &SingletonFilter::ParityPure).unwrap();
        assert_eq!(eo, vec![NCPartition::new(vec![vec![1], vec![2]]).unwrap()]);
        let no = filter_parity_singletons(&nc2, 1, &SingletonFilter::OddSingletons).unwrap();
        assert!(no.is_empty());

        // frozen from the brute-force oracle: {1,3} and {2,4} blocks, minus the crossing
        let nc4: Vec<NCPartition> = brute_force_nc(4)
            .into_iter()
            .map(|b| NCPartition::new(b).unwrap())
            .collect();
        let eo4 = filter_parity_singletons(&nc4, 2, &SingletonFilter::ParityPure).unwrap();
        assert_eq!(eo4.len(), 3);
        let no4 = filter_parity_singletons(&nc4, 2, &SingletonFilter::OddSingletons).unwrap();
        assert_eq!(no4.len(), 1);
        assert_eq!(no4[0].to_string(), "{{1},{2,4},{3}}");
    }

    #[test]
    fn filters_are_nested() {
        for t in 1..=4 {
            let all = enumerate_nc(2 * t).unwrap();
            let eo = filter_parity_singletons(&all, t, &SingletonFilter::ParityPure).unwrap();
            let no = filter_parity_singletons(&eo, t, &SingletonFilter::OddSingletons).unwrap();
            for k in 1..=3 {
                let exponents: Vec<i64> = (0..2 * t as i64).map(|p| (p % 3) + 1).collect();
                let nok =
                    filter_parity_singletons(&no, t, &SingletonFilter::OddSingletonsWithExponent { k, exponents })
                        .unwrap();
                assert!(nok.iter().all(|p| no.contains(p)));
            }
            assert!(no.iter().all(|p| eo.contains(p)));
            assert!(eo.iter().all(|p| all.contains(p)));
        }
    }

    #[test]
    fn mixed_blocks_vanish() {
        let mut marginals: Marginals = BTreeMap::new();
        marginals.insert(1, semicircle());
        marginals.insert(2, semicircle());
        let word = [(1, 1), (2, 1), (1, 1), (1, 1), (2, 1), (2, 1)];
        for n in 1..=6 {
            for pi in enumerate_nc(n).unwrap() {
                let w = &word[..n];
                let mixed = pi
                    .blocks()
                    .iter()
                    .any(|b| b.iter().any(|&p| w[p - 1].0 != w[b[0] - 1].0));
                if mixed {
                    assert_eq!(cumulant_term(&pi, w, &marginals).unwrap(), zero());
                }
            }
        }
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-9i64..=9, 1i64..=5).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn moment_cumulant_roundtrip(ms in prop::collection::vec(small_rational(), 1..=8)) {
            let seq = MomentSequence::from_powers(
                &ms.iter().map(|r| Scalar::new(r.clone(), Rational::zero())).collect::<Vec<_>>(),
            );
            let k = cumulants_from_moments(&seq).unwrap();
            prop_assert_eq!(moments_from_cumulants(&k).unwrap(), seq.values);
        }
    }

    #[test]
    fn star_indexed_roundtrip() {
        // every word over {x, x*} up to length 5, arbitrary complex values
        let mut values = BTreeMap::new();
        let mut seed = 7i64;
        for len in 1..=5usize {
            for mask in 0..(1u32 << len) {
                let key: Vec<i64> = (0..len).map(|b| if mask >> b & 1 == 1 { -1 } else { 1 }).collect();
                seed = (seed * 48271) % 2147483647;
                let re = rat(seed % 11 - 5, 1 + seed % 4);
                let im = rat(seed % 7 - 3, 1 + seed % 3);
                values.insert(key, Scalar::new(re, im));
            }
        }
        let seq = MomentSequence::new(values);
        let k = cumulants_from_moments(&seq).unwrap();
        assert_eq!(moments_from_cumulants(&k).unwrap(), seq.values);
    }

    #[test]
    fn unitary_sequence_checks_conjugate_symmetry() {
        let mut p = BTreeMap::new();
        p.insert(1, Scalar::new(rat(1, 2), rat(1, 3)));
        p.insert(-1, Scalar::new(rat(1, 2), rat(1, 3)));
        assert!(MomentSequence::unitary(p).is_err());
        let mut p = BTreeMap::new();
        p.insert(2, Scalar::new(rat(1, 2), rat(1, 3)));
        let seq = MomentSequence::unitary(p).unwrap();
        assert_eq!(seq.moment(&[-1, -1]).unwrap(), Scalar::new(rat(1, 2), rat(-1, 3)));
        assert_eq!(seq.moment(&[1, -1]).unwrap(), real(1, 1));
        assert!(seq.moment(&[3]).unwrap().is_zero());
    }
}
