//! JSON forms of operators and spectral series, and parsing of complex
//! numbers written as `2+0i`, `-i`, `0.5+1.2i`.

use crate::baker_akhiezer::SpectralSeries;
use crate::elliptic::{EllipticConstants, LatticeParam};
use crate::error::{Error, Result};
use crate::lame::lame_operator;
use crate::operator::{DifferentialOperator, PoleSet};
use crate::scalar::Scalar;
use crate::series::TruncatedSeries;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub fn parse_complex(s: &str) -> Result<Scalar> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Usage(format!("cannot parse complex number '{s}'"));
    if t.is_empty() {
        return Err(bad());
    }
    if !t.ends_with(['i', 'j']) {
        return t.parse::<f64>().map(|re| Scalar::new(re, 0.0)).map_err(|_| bad());
    }
    let body = &t[..t.len() - 1];
    // split at the last sign that is not an exponent sign or the leading one
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let (re_str, im_str) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re_str.parse::<f64>().map_err(|_| bad())?;
    Ok(Scalar::new(re, im))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoleSetJson {
    None,
    Lattice { omega: [f64; 2] },
    Points { points: Vec<[f64; 2]> },
}

impl PoleSetJson {
    fn from_pole_set(p: &PoleSet) -> Self {
        match p {
            PoleSet::None => PoleSetJson::None,
            PoleSet::Lattice(l) => PoleSetJson::Lattice {
                omega: [l.omega.re, l.omega.im],
            },
            PoleSet::Points(v) => PoleSetJson::Points {
                points: v.iter().map(|z| [z.re, z.im]).collect(),
            },
        }
    }

    fn to_pole_set(&self) -> Result<PoleSet> {
        Ok(match self {
            PoleSetJson::None => PoleSet::None,
            PoleSetJson::Lattice { omega } => PoleSet::Lattice(LatticeParam::new(Scalar::new(omega[0], omega[1]))?),
            PoleSetJson::Points { points } => PoleSet::Points(points.iter().map(|p| Scalar::new(p[0], p[1])).collect()),
        })
    }
}

/// A named family the file was generated from; lets a reader rebuild the
/// operator at another basepoint and evaluate it pointwise.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyJson {
    Lame { b: [f64; 2], omega: [f64; 2] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorJson {
    pub order: usize,
    pub weight: Option<i32>,
    pub center: [f64; 2],
    /// Leading coefficient first.
    pub coeffs: Vec<TruncatedSeries>,
    pub pole_set: PoleSetJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyJson>,
}

impl OperatorJson {
    pub fn from_operator(op: &DifferentialOperator, family: Option<FamilyJson>) -> Self {
        let c = op.center();
        Self {
            order: op.order,
            weight: op.weight,
            center: [c.re, c.im],
            coeffs: op.coeffs.clone(),
            pole_set: PoleSetJson::from_pole_set(&op.pole_set),
            family,
        }
    }

    pub fn to_operator(&self) -> Result<DifferentialOperator> {
        if self.coeffs.len() != self.order + 1 {
            return Err(Error::Usage(format!(
                "operator of order {} needs {} coefficients, got {}",
                self.order,
                self.order + 1,
                self.coeffs.len()
            )));
        }
        let mut op = DifferentialOperator::new(self.coeffs.clone())?.with_poles(self.pole_set.to_pole_set()?);
        op.weight = self.weight;
        Ok(op)
    }
}

/// Where an operator comes from: a built-in family or a fixed expansion.
#[derive(Debug, Clone)]
pub enum OperatorSource {
    Lame { b: Scalar, omega: Scalar },
    Explicit(DifferentialOperator),
}

impl OperatorSource {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let raw: OperatorJson = serde_json::from_str(&text)?;
        Ok(match raw.family {
            Some(FamilyJson::Lame { b, omega }) => OperatorSource::Lame {
                b: Scalar::new(b[0], b[1]),
                omega: Scalar::new(omega[0], omega[1]),
            },
            None => OperatorSource::Explicit(raw.to_operator()?),
        })
    }

    /// The operator expanded at `w` through order `z_order`.
    pub fn at(&self, w: Scalar, z_order: i64) -> Result<DifferentialOperator> {
        match self {
            OperatorSource::Lame { b, omega } => lame_operator(&EllipticConstants::new(*omega)?, *b, w, z_order),
            OperatorSource::Explicit(op) => {
                if (op.center() - w).norm() > 1e-12 * (1.0 + w.norm()) {
                    return Err(Error::Usage(format!(
                        "operator file is expanded at {}; it cannot be re-expanded at {w}",
                        op.center()
                    )));
                }
                Ok(op.clone())
            }
        }
    }

    pub fn family(&self) -> Option<FamilyJson> {
        match self {
            OperatorSource::Lame { b, omega } => Some(FamilyJson::Lame {
                b: [b.re, b.im],
                omega: [omega.re, omega.im],
            }),
            OperatorSource::Explicit(_) => None,
        }
    }

    pub fn omega(&self) -> Option<Scalar> {
        match self {
            OperatorSource::Lame { omega, .. } => Some(*omega),
            OperatorSource::Explicit(_) => None,
        }
    }

    /// Basepoint to use when none is given.
    pub fn default_basepoint(&self) -> Scalar {
        match self {
            OperatorSource::Lame { .. } => Scalar::new(0.5, 0.0),
            OperatorSource::Explicit(op) => op.center(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSeriesJson {
    pub m: usize,
    pub weight: Option<i32>,
    pub z_dependence: f64,
    pub coeffs: TruncatedSeries,
}

impl From<&SpectralSeries> for SpectralSeriesJson {
    fn from(a: &SpectralSeries) -> Self {
        Self {
            m: a.m,
            weight: a.weight,
            z_dependence: a.z_dependence,
            coeffs: a.coeffs.clone(),
        }
    }
}

/// Principal part entries written as a JSON array of numbers, `[re, im]`
/// pairs or complex strings.
pub fn parse_principal(s: &str) -> Result<Vec<Scalar>> {
    let v: serde_json::Value = serde_json::from_str(s)
        .map_err(|e| Error::Usage(format!("principal part is not valid JSON: {e}")))?;
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Usage("principal part must be a JSON array".into()))?;
    arr.iter()
        .map(|x| match x {
            serde_json::Value::Number(n) => Ok(Scalar::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
            serde_json::Value::String(s) => parse_complex(s),
            serde_json::Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
                (Some(re), Some(im)) => Ok(Scalar::new(re, im)),
                _ => Err(Error::Usage(format!("bad principal entry {x}"))),
            },
            _ => Err(Error::Usage(format!("bad principal entry {x}"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let cases = [
            ("2+0i", Scalar::new(2.0, 0.0)),
            ("i", Scalar::new(0.0, 1.0)),
            ("-i", Scalar::new(0.0, -1.0)),
            ("0.5+i", Scalar::new(0.5, 1.0)),
            ("0.5-1.25i", Scalar::new(0.5, -1.25)),
            ("3", Scalar::new(3.0, 0.0)),
            ("2i", Scalar::new(0.0, 2.0)),
            ("1e-3+2e+1i", Scalar::new(1e-3, 20.0)),
        ];
        for (s, v) in cases {
            assert_eq!(parse_complex(s).unwrap(), v, "{s}");
        }
        assert!(parse_complex("x+1i").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn principal_forms() {
        let p = parse_principal(r#"[1, 0, [0, 2], "1-i"]"#).unwrap();
        assert_eq!(p[2], Scalar::new(0.0, 2.0));
        assert_eq!(p[3], Scalar::new(1.0, -1.0));
        assert!(parse_principal("{}").is_err());
    }

    #[test]
    fn operator_roundtrip() {
        let k = EllipticConstants::new(Scalar::new(0.0, 1.0)).unwrap();
        let op = lame_operator(&k, Scalar::new(2.0, 0.0), Scalar::new(0.5, 0.0), 6).unwrap();
        let j = OperatorJson::from_operator(&op, None);
        let text = serde_json::to_string(&j).unwrap();
        let back: OperatorJson = serde_json::from_str(&text).unwrap();
        let op2 = back.to_operator().unwrap();
        assert_eq!(op2.order, 2);
        assert_eq!(op2.weight, Some(2));
        assert_eq!(op2.pole_set, op.pole_set);
        assert!(op2.coeffs[2].approx_eq(&op.coeffs[2], 1e-15));
    }
}
