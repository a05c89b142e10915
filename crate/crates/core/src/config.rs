//! TOML presets for groups and amalgams.
//!
//! The shipped file is compiled in; callers may load their own with the same
//! schema. Unknown keys are rejected.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::actions::{ActionSpec, CosetKind, PointSpace};
use crate::groups::{Element, FiniteSubgroup, GroupError, GroupSpec, SubgroupIso};

pub const DEFAULT_PRESETS: &str = include_str!("../presets/default.toml");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse presets: {0}")]
    Toml(String),
    #[error("unknown group preset {0:?}")]
    UnknownGroup(String),
    #[error("unknown amalgam preset {0:?}")]
    UnknownAmalgam(String),
    #[error("group preset {name:?}: {reason}")]
    BadGroup { name: String, reason: String },
    #[error("amalgam preset {name:?}: {reason}")]
    BadAmalgam { name: String, reason: String },
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKindName {
    FreeAbelian,
    Cyclic,
    Symmetric,
    Product,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupPreset {
    pub kind: GroupKindName,
    pub rank: Option<usize>,
    pub order: Option<usize>,
    pub degree: Option<usize>,
    pub factors: Option<Vec<String>>,
    /// Finite subgroups of interest, each listed by all of its elements.
    #[serde(default)]
    pub subgroups: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmalgamPreset {
    #[serde(default)]
    pub description: String,
    pub g: String,
    pub h: String,
    /// Generator pairs `(a in G, φ(a) in H)`; empty for a free product.
    pub phi: Vec<(String, String)>,
    /// `"regular"` or `"cosets"`.
    pub y: String,
    /// Subgroup of `H` whose cosets form `Y` when `y = "cosets"`.
    pub y_subgroup: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Presets {
    #[serde(default)]
    pub groups: BTreeMap<String, GroupPreset>,
    #[serde(default)]
    pub amalgams: BTreeMap<String, AmalgamPreset>,
}

/// A resolved amalgam preset: groups, the identification and the `H`-set `Y`.
#[derive(Debug, Clone)]
pub struct AmalgamData {
    pub name: String,
    pub g: GroupSpec,
    pub h: GroupSpec,
    pub phi: SubgroupIso,
    pub y: ActionSpec,
}

impl Presets {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Toml(e.to_string()))
    }

    pub fn builtin() -> Self {
        Self::parse(DEFAULT_PRESETS).expect("shipped presets parse")
    }

    pub fn group(&self, name: &str) -> Result<GroupSpec, ConfigError> {
        self.group_depth(name, 0)
    }

    fn group_depth(&self, name: &str, depth: usize) -> Result<GroupSpec, ConfigError> {
        let p = self
            .groups
            .get(name)
            .ok_or_else(|| ConfigError::UnknownGroup(name.to_string()))?;
        let bad = |reason: &str| ConfigError::BadGroup {
            name: name.to_string(),
            reason: reason.to_string(),
        };
        if depth > 8 {
            return Err(bad("product nesting too deep"));
        }
        let need = |v: Option<usize>, key: &str| v.ok_or_else(|| bad(&format!("missing key `{key}`")));
        Ok(match p.kind {
            GroupKindName::FreeAbelian => GroupSpec::free_abelian(need(p.rank, "rank")?),
            GroupKindName::Cyclic => {
                let n = need(p.order, "order")?;
                if n == 0 {
                    return Err(bad("`order` must be positive"));
                }
                GroupSpec::cyclic(n)
            }
            GroupKindName::Symmetric => {
                let n = need(p.degree, "degree")?;
                if !(1..=9).contains(&n) {
                    return Err(bad("`degree` must be in 1..=9"));
                }
                GroupSpec::symmetric(n)
            }
            GroupKindName::Product => {
                let fs = p.factors.as_ref().ok_or_else(|| bad("missing key `factors`"))?;
                let cs = fs
                    .iter()
                    .map(|f| self.group_depth(f, depth + 1))
                    .collect::<Result<Vec<_>, _>>()?;
                GroupSpec::direct_product(cs)?
            }
        })
    }

    /// The listed subgroups of a group preset.
    pub fn subgroups(&self, name: &str) -> Result<Vec<FiniteSubgroup>, ConfigError> {
        let g = self.group(name)?;
        self.groups[name]
            .subgroups
            .iter()
            .map(|els| {
                let els = els.iter().map(|s| g.parse_element(s)).collect::<Result<Vec<_>, _>>()?;
                Ok(FiniteSubgroup::new(&g, els)?)
            })
            .collect()
    }

    pub fn amalgam(&self, name: &str) -> Result<AmalgamData, ConfigError> {
        let p = self
            .amalgams
            .get(name)
            .ok_or_else(|| ConfigError::UnknownAmalgam(name.to_string()))?;
        let bad = |reason: String| ConfigError::BadAmalgam {
            name: name.to_string(),
            reason,
        };
        let g = self.group(&p.g)?;
        let h = self.group(&p.h)?;
        let mut pairs = Vec::new();
        for (x, y) in &p.phi {
            pairs.push((g.parse_element(x)?, h.parse_element(y)?));
        }
        let phi = extend_to_iso(&g, &h, &pairs).map_err(|e| bad(format!("key `phi`: {e}")))?;
        let y = match p.y.as_str() {
            "regular" => ActionSpec::regular(&h),
            "cosets" => {
                let els = p.y_subgroup.as_ref().ok_or_else(|| bad("missing key `y_subgroup`".into()))?;
                let els = els.iter().map(|s| h.parse_element(s)).collect::<Result<Vec<_>, _>>()?;
                let sub = FiniteSubgroup::new(&h, els).map_err(|e| bad(format!("key `y_subgroup`: {e}")))?;
                ActionSpec::new(&h, PointSpace::Cosets(CosetKind::Subgroup(sub))).map_err(|e| bad(format!("key `y`: {e}")))?
            }
            other => return Err(bad(format!("key `y`: unknown value {other:?}"))),
        };
        Ok(AmalgamData {
            name: name.to_string(),
            g,
            h,
            phi,
            y,
        })
    }
}

/// Closes generator pairs under multiplication and checks the result is an
/// isomorphism between the generated finite subgroups.
pub fn extend_to_iso(g: &GroupSpec, h: &GroupSpec, pairs: &[(Element, Element)]) -> Result<SubgroupIso, String> {
    let mut map: BTreeMap<Element, Element> = BTreeMap::from([(g.identity(), h.identity())]);
    let mut frontier = vec![(g.identity(), h.identity())];
    const LIMIT: usize = 100_000;
    while let Some((x, y)) = frontier.pop() {
        for (a, b) in pairs {
            let (xa, yb) = (g.mul(&x, a), h.mul(&y, b));
            match map.get(&xa) {
                Some(prev) if *prev != yb => {
                    return Err(format!("{} has two images", g.format_element(&xa)));
                }
                Some(_) => {}
                None => {
                    if map.len() >= LIMIT {
                        return Err("generated subgroup is not finite".into());
                    }
                    map.insert(xa.clone(), yb.clone());
                    frontier.push((xa, yb));
                }
            }
        }
    }
    let src = FiniteSubgroup::new(g, map.keys().cloned().collect()).map_err(|e| e.to_string())?;
    let tgt = FiniteSubgroup::new(h, map.values().cloned().collect()).map_err(|e| e.to_string())?;
    let pairs: Vec<_> = map.into_iter().collect();
    SubgroupIso::new(&src, &tgt, &pairs).map_err(|e| e.to_string())
}
