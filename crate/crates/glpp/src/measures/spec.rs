//! Family specifications: the JSON document form and the command-line
//! shorthand ("geometric:0.5", "edge_lpp(poisson:1)", "table@masses.json").

use serde::{Deserialize, Serialize};

use crate::error::{GlppError, Result};

use super::density::{make_integrable_density_family, DensityFamily, DensityLaw};
use super::discrete::{DiscreteMeasure, Law};
use super::family::MeasureFamily;

/// A family description. A bare base law means the integrable family built
/// from it; `constant` and `edge_lpp` wrap a base law explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Geometric {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<u64>,
    },
    Poisson {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<u64>,
    },
    ShiftedPoisson {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<u64>,
    },
    Zeta {
        s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<u64>,
    },
    /// Explicit (i, mass) pairs; unlisted indices up to the largest one get 0.
    Table { masses: Vec<(u64, f64)> },
    Exponential { lambda: f64 },
    HalfNormal { sigma: f64 },
    Integrable { mu0: Box<FamilySpec> },
    EdgeLpp { mu: Box<FamilySpec> },
    Constant { mu: Box<FamilySpec> },
}

/// A built family, discrete or continuous.
#[derive(Debug, Clone)]
pub enum AnyFamily {
    Discrete(MeasureFamily),
    Density(DensityFamily),
}

impl AnyFamily {
    pub fn discrete(self) -> Result<MeasureFamily> {
        match self {
            AnyFamily::Discrete(f) => Ok(f),
            AnyFamily::Density(f) => Err(GlppError::Parse(format!("{} is a continuous family", f.label()))),
        }
    }

    pub fn density(self) -> Result<DensityFamily> {
        match self {
            AnyFamily::Density(f) => Ok(f),
            AnyFamily::Discrete(f) => Err(GlppError::Parse(format!("{} is a discrete family", f.label()))),
        }
    }
}

enum Leaf {
    Discrete(Law, Option<u64>),
    Density(DensityLaw),
}

impl FamilySpec {
    fn leaf(&self) -> Result<Leaf> {
        Ok(match self {
            FamilySpec::Geometric { p, cap } => Leaf::Discrete(Law::Geometric { p: *p }, *cap),
            FamilySpec::Poisson { lambda, cap } => Leaf::Discrete(Law::Poisson { lambda: *lambda }, *cap),
            FamilySpec::ShiftedPoisson { lambda, cap } => Leaf::Discrete(Law::ShiftedPoisson { lambda: *lambda }, *cap),
            FamilySpec::Zeta { s, cap } => Leaf::Discrete(Law::Zeta { s: *s }, *cap),
            FamilySpec::Table { masses } => Leaf::Discrete(table_law(masses)?, None),
            FamilySpec::Exponential { lambda } => Leaf::Density(DensityLaw::Exponential { lambda: *lambda }),
            FamilySpec::HalfNormal { sigma } => Leaf::Density(DensityLaw::HalfNormal { sigma: *sigma }),
            _ => return Err(GlppError::Parse("nested family wrappers are not allowed".into())),
        })
    }

    /// The discrete base law of a leaf spec.
    pub fn base_law(&self) -> Result<(Law, Option<u64>)> {
        let inner = match self {
            FamilySpec::Integrable { mu0 } => mu0.as_ref(),
            FamilySpec::EdgeLpp { mu } | FamilySpec::Constant { mu } => mu.as_ref(),
            other => other,
        };
        match inner.leaf()? {
            Leaf::Discrete(law, cap) => Ok((law, cap)),
            Leaf::Density(d) => Err(GlppError::Parse(format!("{} is not a discrete law", d.label()))),
        }
    }

    pub fn build(&self) -> Result<AnyFamily> {
        let discrete = |law: &Law, cap: Option<u64>| DiscreteMeasure::from_law_with_cap(law, cap);
        match self {
            FamilySpec::EdgeLpp { mu } => match mu.leaf()? {
                Leaf::Discrete(law, cap) => Ok(AnyFamily::Discrete(MeasureFamily::edge_lpp(discrete(&law, cap)?))),
                Leaf::Density(_) => Err(GlppError::Parse("edge_lpp needs a discrete law".into())),
            },
            FamilySpec::Constant { mu } => match mu.leaf()? {
                Leaf::Discrete(law, cap) => Ok(AnyFamily::Discrete(MeasureFamily::constant(discrete(&law, cap)?))),
                Leaf::Density(d) => Ok(AnyFamily::Density(DensityFamily::constant(d)?)),
            },
            FamilySpec::Integrable { mu0 } => mu0.build_integrable(),
            leaf => leaf.build_integrable(),
        }
    }

    fn build_integrable(&self) -> Result<AnyFamily> {
        match self.leaf()? {
            Leaf::Discrete(law, cap) => Ok(AnyFamily::Discrete(MeasureFamily::integrable(
                DiscreteMeasure::from_law_with_cap(&law, cap)?,
            )?)),
            Leaf::Density(d) => Ok(AnyFamily::Density(make_integrable_density_family(d)?)),
        }
    }
}

fn table_law(masses: &[(u64, f64)]) -> Result<Law> {
    let n = masses.iter().map(|(i, _)| *i).max().unwrap_or(0);
    if n == 0 || masses.iter().any(|(i, _)| *i == 0) {
        return Err(GlppError::Parse("table indices must be positive integers".into()));
    }
    let mut pmf = vec![0.0; n as usize];
    for &(i, m) in masses {
        pmf[i as usize - 1] += m;
    }
    Ok(Law::Table { pmf })
}

fn number(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| GlppError::Parse(format!("not a number: {s:?}")))
}

/// Parses a shorthand leaf such as "geometric:0.5" or "exp:1.0".
fn parse_leaf(s: &str) -> Result<FamilySpec> {
    if let Some(path) = s.strip_prefix("table@") {
        let text = std::fs::read_to_string(path).map_err(|e| GlppError::Parse(format!("{path}: {e}")))?;
        return parse_table_document(&text);
    }
    let (name, arg) = s
        .split_once(':')
        .ok_or_else(|| GlppError::Parse(format!("expected name:parameter, got {s:?}")))?;
    let x = number(arg)?;
    Ok(match name.trim() {
        "geometric" | "geom" => FamilySpec::Geometric { p: x, cap: None },
        "poisson" => FamilySpec::Poisson { lambda: x, cap: None },
        "shifted_poisson" => FamilySpec::ShiftedPoisson { lambda: x, cap: None },
        "zeta" => FamilySpec::Zeta { s: x, cap: None },
        "exp" | "exponential" => FamilySpec::Exponential { lambda: x },
        "half_normal" => FamilySpec::HalfNormal { sigma: x },
        other => return Err(GlppError::Parse(format!("unknown law {other:?}"))),
    })
}

/// A table file holds either a full spec object, {"masses": [[i, m], ...]},
/// or the bare pair list.
fn parse_table_document(text: &str) -> Result<FamilySpec> {
    #[derive(Deserialize)]
    struct Masses {
        masses: Vec<(u64, f64)>,
    }
    if let Ok(spec) = serde_json::from_str::<FamilySpec>(text) {
        return Ok(spec);
    }
    if let Ok(m) = serde_json::from_str::<Masses>(text) {
        return Ok(FamilySpec::Table { masses: m.masses });
    }
    serde_json::from_str::<Vec<(u64, f64)>>(text)
        .map(|masses| FamilySpec::Table { masses })
        .map_err(|e| GlppError::Parse(format!("table document: {e}")))
}

/// Parses a family given as JSON, as a path to a JSON file, or in shorthand.
pub fn parse_family(s: &str) -> Result<FamilySpec> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| GlppError::Parse(e.to_string()));
    }
    if s.ends_with(".json") && !s.contains('@') {
        let text = std::fs::read_to_string(s).map_err(|e| GlppError::Parse(format!("{s}: {e}")))?;
        return serde_json::from_str(&text).map_err(|e| GlppError::Parse(format!("{s}: {e}")));
    }
    for (prefix, wrap) in [("edge_lpp(", 0), ("constant(", 1), ("integrable(", 2)] {
        if let Some(rest) = s.strip_prefix(prefix) {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| GlppError::Parse(format!("unbalanced parentheses in {s:?}")))?;
            let leaf = Box::new(parse_leaf(inner)?);
            return Ok(match wrap {
                0 => FamilySpec::EdgeLpp { mu: leaf },
                1 => FamilySpec::Constant { mu: leaf },
                _ => FamilySpec::Integrable { mu0: leaf },
            });
        }
    }
    parse_leaf(s)
}

/// Parses a discrete base law in any accepted family syntax.
pub fn parse_law(s: &str) -> Result<Law> {
    Ok(parse_family(s)?.base_law()?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::FamilyKind;

    #[test]
    fn shorthand_forms() {
        assert_eq!(parse_family("geometric:0.5").unwrap(), FamilySpec::Geometric { p: 0.5, cap: None });
        assert_eq!(parse_family("exp:1.0").unwrap(), FamilySpec::Exponential { lambda: 1.0 });
        let edge = parse_family("edge_lpp(geometric:0.5)").unwrap();
        let fam = edge.build().unwrap().discrete().unwrap();
        assert_eq!(fam.kind(), FamilyKind::EdgeLpp);
        let c = parse_family("constant(poisson:1)").unwrap().build().unwrap().discrete().unwrap();
        assert_eq!(c.kind(), FamilyKind::Constant);
        assert!(parse_family("nope:1").is_err());
        assert!(parse_family("geometric").is_err());
    }

    #[test]
    fn json_forms() {
        let spec = parse_family(r#"{"kind": "zeta", "s": 6, "cap": 500}"#).unwrap();
        let fam = spec.build().unwrap().discrete().unwrap();
        assert_eq!(fam.kind(), FamilyKind::Integrable);
        assert_eq!(fam.base().cap(), 500);
        let t = parse_family(r#"{"kind": "table", "masses": [[1, 0.5], [2, 0.5]]}"#).unwrap();
        let (law, _) = t.base_law().unwrap();
        assert_eq!(law, Law::Table { pmf: vec![0.5, 0.5] });
        let round = serde_json::to_string(&spec).unwrap();
        assert_eq!(parse_family(&round).unwrap(), spec);
        let nested = parse_family(r#"{"kind": "edge_lpp", "mu": {"kind": "geometric", "p": 0.25}}"#).unwrap();
        assert!(matches!(nested.build().unwrap(), AnyFamily::Discrete(_)));
    }

    #[test]
    fn divergent_zeta_is_rejected() {
        let err = parse_family("zeta:1.5").unwrap().build().unwrap_err();
        assert!(matches!(err, GlppError::DivergentSqrtSum(_)));
    }

    #[test]
    fn continuous_leaves_build_density_families() {
        let f = parse_family("exp:2").unwrap().build().unwrap().density().unwrap();
        assert!((f.density(3.0, 0.5) - 2.0 * (-1.0f64).exp()).abs() < 1e-14);
        assert!(parse_family("edge_lpp(exp:1)").unwrap().build().is_err());
    }
}
