//! JSON scenario files: factor spaces, tensor bindings, bounds and inputs.
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "haar",
//!   "spaces": [
//!     {"kind": "group", "group": {"factors": [{"cyclic_orders": ["inf", "inf"]}]},
//!      "variables": {"x1": "g1.1", "x2": "g1.2"}}
//!   ],
//!   "bounds": {"max_len": 6}
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::freeness::DEFAULT_WORD_CAP;
use crate::groups::{GroupElement, GroupPresentation, SearchBounds};
use crate::identities::{
    lemma_a1_check, lemma_a2_check, lemma_a4_check, lemma_a6_check, prop_a3_conclusion, prop_a5_conclusion,
    prop_a8_conclusion, IdentityOutcome,
};
use crate::ncpartitions::{MarginalMoments, Marginals};
use crate::scalar::{from_parts, int, parse, rat, Rational, Scalar};
use crate::spaces::{GroupModel, MomentFunctional, SelfAdjointMarginal, SpectralModel, UnitaryMarginal};
use crate::starwords::{parse_word, StarWord, VarId};
use crate::tensor::TensorScenario;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_MAX_LEN: usize = 8;
pub const DEFAULT_MAX_BLOCKS: usize = 4;
pub const DEFAULT_MAX_EXP: u32 = 3;
pub const DEFAULT_GRAM_LEN: usize = 3;

/// A scalar as `[re_num, re_den, im_num, im_den]` or text such as `"1/3+2i"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Parts([i64; 4]),
    Text(String),
}

impl ScalarSpec {
    pub fn value(&self) -> Result<Scalar> {
        match self {
            ScalarSpec::Parts(p) => from_parts(*p),
            ScalarSpec::Text(t) => parse(t),
        }
    }
}

/// A rational as `[num, den]`, an integer, or text such as `"3/4"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RationalSpec {
    Pair([i64; 2]),
    Int(i64),
    Text(String),
}

impl RationalSpec {
    pub fn value(&self) -> Result<Rational> {
        match self {
            RationalSpec::Pair([_, 0]) => Err(Error::InvalidScenario("zero denominator".into())),
            RationalSpec::Pair([n, d]) => Ok(rat(*n, *d)),
            RationalSpec::Int(n) => Ok(int(*n)),
            RationalSpec::Text(t) => {
                let z = parse(t)?;
                if z.im != Rational::from_integer(0.into()) {
                    return Err(Error::InvalidScenario(format!("{t} is not real")));
                }
                Ok(z.re)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalSpec {
    /// `phi(u^n)` for listed powers; unlisted nonzero powers are 0.
    Unitary {
        #[serde(default)]
        moments: BTreeMap<String, ScalarSpec>,
        #[serde(default)]
        period: Option<u64>,
    },
    Haar,
    /// `phi(b^n)` for `n = 1, 2, ...`.
    SelfAdjoint {
        moments: Vec<ScalarSpec>,
    },
    /// Standard semicircle, moments up to `order`.
    Semicircle {
        #[serde(default = "default_semicircle_order")]
        order: usize,
    },
}

fn default_semicircle_order() -> usize {
    16
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    /// Group algebra with the canonical trace.
    Group {
        #[serde(default)]
        name: Option<String>,
        group: GroupPresentation,
        variables: BTreeMap<String, String>,
    },
    /// Group algebra with a finitely supported functional given on words.
    Table {
        #[serde(default)]
        name: Option<String>,
        group: GroupPresentation,
        variables: BTreeMap<String, String>,
        table: BTreeMap<String, ScalarSpec>,
    },
    /// Variables given by their distributions, free when `free` is set.
    Spectral {
        #[serde(default)]
        name: Option<String>,
        #[serde(default = "default_true")]
        free: bool,
        variables: BTreeMap<String, MarginalSpec>,
    },
}

impl SpaceSpec {
    fn name(&self) -> Option<&str> {
        match self {
            SpaceSpec::Group { name, .. } | SpaceSpec::Table { name, .. } | SpaceSpec::Spectral { name, .. } => {
                name.as_deref()
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorSpec {
    /// Index `i` to the variable bound in each factor.
    pub variables: BTreeMap<String, Vec<VarId>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub max_len: Option<usize>,
    pub max_blocks: Option<usize>,
    pub max_exp: Option<u32>,
    pub gram_len: Option<usize>,
    pub word_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametersSpec {
    /// Table example parameter.
    pub alpha: Option<ScalarSpec>,
    /// Table functional parameter, recorded for reports.
    pub beta: Option<ScalarSpec>,
    /// Number of factors for the table example.
    pub k: Option<usize>,
    /// Commutator exponents and indices.
    pub m: Option<i64>,
    pub n: Option<i64>,
    pub i: Option<VarId>,
    pub j: Option<VarId>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityInput {
    pub alpha: Option<RationalSpec>,
    pub t: Option<Vec<RationalSpec>>,
    pub x: Option<Vec<RationalSpec>>,
    pub y: Option<Vec<RationalSpec>>,
}

fn rationals(v: &Option<Vec<RationalSpec>>, what: &str) -> Result<Vec<Rational>> {
    v.as_ref()
        .ok_or_else(|| Error::InvalidScenario(format!("identity input needs `{what}`")))?
        .iter()
        .map(RationalSpec::value)
        .collect()
}

impl IdentityInput {
    pub fn alpha(&self) -> Result<Rational> {
        self.alpha
            .as_ref()
            .ok_or_else(|| Error::InvalidScenario("identity input needs `alpha`".into()))?
            .value()
    }

    pub fn t(&self) -> Result<Vec<Rational>> {
        rationals(&self.t, "t")
    }

    pub fn x(&self) -> Result<Vec<Rational>> {
        rationals(&self.x, "x")
    }

    pub fn y(&self) -> Result<Vec<Rational>> {
        rationals(&self.y, "y")
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub spaces: Vec<SpaceSpec>,
    #[serde(default)]
    pub tensor: Option<TensorSpec>,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub parameters: ParametersSpec,
    #[serde(default)]
    pub identities: BTreeMap<String, Vec<IdentityInput>>,
    /// Recorded outcomes, compared by the test suites.
    #[serde(default)]
    pub expected: BTreeMap<String, serde_json::Value>,
}

/// Bounds after scenario values and overrides are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Bounds {
    pub max_len: usize,
    pub max_blocks: usize,
    pub max_exp: u32,
    pub gram_len: usize,
    pub word_cap: usize,
}

impl Bounds {
    /// `overrides` wins over `file`, which wins over the defaults.
    pub fn resolve(file: &BoundsSpec, overrides: &BoundsSpec) -> Self {
        Self {
            max_len: overrides.max_len.or(file.max_len).unwrap_or(DEFAULT_MAX_LEN),
            max_blocks: overrides.max_blocks.or(file.max_blocks).unwrap_or(DEFAULT_MAX_BLOCKS),
            max_exp: overrides.max_exp.or(file.max_exp).unwrap_or(DEFAULT_MAX_EXP),
            gram_len: overrides.gram_len.or(file.gram_len).unwrap_or(DEFAULT_GRAM_LEN),
            word_cap: overrides.word_cap.or(file.word_cap).unwrap_or(DEFAULT_WORD_CAP),
        }
    }

    pub fn search(&self) -> SearchBounds {
        SearchBounds::new(self.max_blocks, self.max_exp)
    }
}

/// Group data behind a scenario whose spaces are all group algebras.
#[derive(Debug, Clone)]
pub struct GroupCollection {
    /// Direct product of every space's group.
    pub presentation: GroupPresentation,
    /// `D_i` for `i = 1, 2, ...`, componentwise over spaces.
    pub elements: Vec<GroupElement>,
    /// One presentation per space.
    pub space_groups: Vec<GroupPresentation>,
}

/// A loaded scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub tensor: TensorScenario,
    pub group: Option<GroupCollection>,
    /// All spaces carry canonical traces.
    pub canonical: bool,
}

fn var_id(key: &str) -> Result<VarId> {
    let digits = key.strip_prefix('x').unwrap_or(key);
    match digits.parse::<VarId>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(Error::InvalidScenario(format!("bad variable name `{key}`"))),
    }
}

fn group_generators(
    group: &GroupPresentation,
    variables: &BTreeMap<String, String>,
) -> Result<BTreeMap<VarId, GroupElement>> {
    variables
        .iter()
        .map(|(k, w)| Ok((var_id(k)?, group.parse(w)?)))
        .collect()
}

fn marginal(spec: &MarginalSpec) -> Result<Arc<dyn MarginalMoments>> {
    Ok(match spec {
        MarginalSpec::Unitary { moments, period } => {
            let mut powers = BTreeMap::new();
            for (n, v) in moments {
                let n: i64 = n
                    .parse()
                    .map_err(|_| Error::InvalidScenario(format!("bad power `{n}`")))?;
                powers.insert(n, v.value()?);
            }
            Arc::new(UnitaryMarginal::new(powers, *period)?)
        }
        MarginalSpec::Haar => Arc::new(UnitaryMarginal::haar()),
        MarginalSpec::SelfAdjoint { moments } => Arc::new(SelfAdjointMarginal::new(
            moments.iter().map(ScalarSpec::value).collect::<Result<_>>()?,
        )?),
        MarginalSpec::Semicircle { order } => Arc::new(SelfAdjointMarginal::semicircle(*order)),
    })
}

fn build_space(spec: &SpaceSpec) -> Result<MomentFunctional> {
    Ok(match spec {
        SpaceSpec::Group { group, variables, .. } => {
            let g = GroupPresentation::new(group.factors.clone())?;
            let gens = group_generators(&g, variables)?;
            MomentFunctional::Group(GroupModel::canonical_trace(g, gens)?)
        }
        SpaceSpec::Table {
            group,
            variables,
            table,
            ..
        } => {
            let g = GroupPresentation::new(group.factors.clone())?;
            let gens = group_generators(&g, variables)?;
            let entries: Vec<(StarWord, Scalar)> = table
                .iter()
                .map(|(w, v)| Ok((parse_word(w)?, v.value()?)))
                .collect::<Result<_>>()?;
            MomentFunctional::Group(GroupModel::with_table(g, gens, &entries)?)
        }
        SpaceSpec::Spectral { free, variables, .. } => {
            let m: Marginals = variables
                .iter()
                .map(|(k, s)| Ok((var_id(k)?, marginal(s)?)))
                .collect::<Result<_>>()?;
            MomentFunctional::Spectral(SpectralModel::new(m, *free)?)
        }
    })
}

fn invalid(e: Error) -> Error {
    match e {
        Error::InvalidScenario(_) => e,
        other => Error::InvalidScenario(other.to_string()),
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::InvalidScenario(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        if file.version != SCHEMA_VERSION {
            return Err(Error::InvalidScenario(format!(
                "unsupported version {} (expected {SCHEMA_VERSION})",
                file.version
            )));
        }
        if file.spaces.is_empty() {
            return Err(Error::InvalidScenario("no spaces declared".into()));
        }
        let functionals: Vec<MomentFunctional> = file
            .spaces
            .iter()
            .map(build_space)
            .collect::<Result<_>>()
            .map_err(invalid)?;
        let k = functionals.len();
        let bindings: BTreeMap<VarId, Vec<VarId>> = match &file.tensor {
            Some(t) => t
                .variables
                .iter()
                .map(|(i, vs)| Ok((var_id(i)?, vs.clone())))
                .collect::<Result<_>>()?,
            None => {
                use crate::spaces::MomentOracle;
                functionals[0]
                    .variables()
                    .into_iter()
                    .map(|v| (v, vec![v; k]))
                    .collect()
            }
        };
        let names = file
            .spaces
            .iter()
            .enumerate()
            .map(|(n, s)| s.name().map_or_else(|| format!("factor {}", n + 1), str::to_string))
            .collect();
        let canonical = functionals
            .iter()
            .all(|f| matches!(f, MomentFunctional::Group(g) if g.is_canonical_trace()));
        let group = group_collection(&functionals, &bindings)?;
        let tensor = TensorScenario::with_names(functionals.into_iter().map(Arc::new).collect(), names, bindings)
            .map_err(invalid)?;
        Ok(Self {
            file,
            tensor,
            group,
            canonical,
        })
    }

    pub fn bounds(&self, overrides: &BoundsSpec) -> Bounds {
        Bounds::resolve(&self.file.bounds, overrides)
    }

    pub fn group(&self) -> Result<&GroupCollection> {
        self.group.as_ref().ok_or_else(|| {
            Error::InvalidScenario("group checks need every space to be a group algebra with indices x1..xn".into())
        })
    }

    /// The same tensor with every group space carrying its canonical trace.
    pub fn canonical_trace_model(&self) -> Result<TensorScenario> {
        let g = self.group()?;
        let mut factors = Vec::new();
        for (k, pres) in g.space_groups.iter().enumerate() {
            let MomentFunctional::Group(model) = self.tensor.factor(k).as_ref() else {
                unreachable!("group collections only exist over group spaces");
            };
            factors.push(Arc::new(MomentFunctional::Group(GroupModel::canonical_trace(
                pres.clone(),
                model.generators().clone(),
            )?)));
        }
        TensorScenario::new(factors, self.tensor.bindings().clone())
    }

    pub fn alpha(&self) -> Result<Option<Scalar>> {
        self.file.parameters.alpha.as_ref().map(ScalarSpec::value).transpose()
    }
}

fn group_collection(
    functionals: &[MomentFunctional],
    bindings: &BTreeMap<VarId, Vec<VarId>>,
) -> Result<Option<GroupCollection>> {
    let contiguous = bindings.keys().copied().eq(1..=bindings.len() as VarId);
    if !contiguous {
        return Ok(None);
    }
    let mut models = Vec::new();
    for f in functionals {
        match f {
            MomentFunctional::Group(g) => models.push(g),
            MomentFunctional::Spectral(_) => return Ok(None),
        }
    }
    let space_groups: Vec<GroupPresentation> = models.iter().map(|m| m.presentation().clone()).collect();
    let presentation = GroupPresentation::direct_product(&space_groups)?;
    let mut elements = Vec::new();
    for vars in bindings.values() {
        let comps: Vec<GroupElement> = vars
            .iter()
            .zip(&models)
            .map(|(v, m)| {
                m.generators()
                    .get(v)
                    .cloned()
                    .ok_or(Error::InvalidScenario(format!("no generator bound to x{v}")))
            })
            .collect::<Result<_>>()?;
        elements.push(GroupElement::direct(&comps));
    }
    Ok(Some(GroupCollection {
        presentation,
        elements,
        space_groups,
    }))
}

/// Names accepted by [`run_identity`].
pub const IDENTITY_NAMES: [&str; 7] = ["a1", "a2", "a3", "a4", "a5", "a6", "a8"];

/// Runs one identity, inequality or conclusion check on `input`.
pub fn run_identity(name: &str, input: &IdentityInput) -> Result<IdentityOutcome> {
    use IdentityOutcome::*;
    Ok(match name {
        "a1" => Identity(lemma_a1_check(&input.alpha()?, &input.x()?)?),
        "a2" => Identity(lemma_a2_check(&input.t()?, &input.x()?)?),
        "a3" => Conclusion(prop_a3_conclusion(&input.t()?, &input.x()?)?),
        "a4" => Inequality(lemma_a4_check(&input.x()?, &input.y()?)?),
        "a5" => Conclusion(prop_a5_conclusion(&input.x()?, &input.y()?)?),
        "a6" => Inequality(lemma_a6_check(&input.x()?, &input.y()?)?),
        "a8" => Conclusion(prop_a8_conclusion(&input.x()?, &input.y()?)?),
        other => {
            return Err(Error::InvalidScenario(format!(
                "unknown identity `{other}` (expected one of {})",
                IDENTITY_NAMES.join(", ")
            )))
        }
    })
}
