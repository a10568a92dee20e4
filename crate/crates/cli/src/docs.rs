//! JSON documents written by the commands. Every document carries
//! `schema_version`; non-finite numbers are written as the strings `"inf"`,
//! `"-inf"` and `"nan"`.

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use stepwise::models::{ExtReal, Family, ModelSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// An `f64` that survives JSON even when infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                match v {
                    "inf" => Ok(Num(f64::INFINITY)),
                    "-inf" => Ok(Num(f64::NEG_INFINITY)),
                    "nan" => Ok(Num(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

impl From<ExtReal<f64>> for Num {
    fn from(t: ExtReal<f64>) -> Self {
        Num(t.to_float())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub family: String,
    pub rho: f64,
    pub k: usize,
}

impl From<&ModelSpec<f64>> for ModelDoc {
    fn from(m: &ModelSpec<f64>) -> Self {
        let rho = match m.family() {
            Family::EquicorrNormal { rho } => rho,
            _ => 0.0,
        };
        Self { family: m.family().name().into(), rho, k: m.k() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMetadata {
    pub method: String,
    pub xtol: f64,
    pub residual_tol: f64,
    pub quadrature_tol: f64,
    pub max_abs_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsDoc {
    pub schema_version: u32,
    pub kind: String,
    pub alpha: f64,
    pub model: ModelDoc,
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub solver_metadata: SolverMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub id: String,
    pub verdict: String,
    /// Step at which the hypothesis was examined; absent if it never was.
    pub step: Option<usize>,
    pub threshold: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub step: usize,
    pub id: String,
    pub statistic: Num,
    pub threshold: Num,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionMetadata {
    pub procedure: String,
    pub input_kind: String,
    /// How p-values were mapped to statistics, when they were.
    pub transform: Option<String>,
    /// Scale on which statistics and thresholds are reported.
    pub scale: String,
    pub model: ModelDoc,
    pub alpha: f64,
    /// Ladder used, indexed by the number of hypotheses in play.
    pub constants: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionDoc {
    pub schema_version: u32,
    pub verdicts: Vec<VerdictDoc>,
    pub trace: Vec<TraceDoc>,
    pub metadata: DecisionMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDoc {
    pub metric: String,
    pub j: Option<usize>,
    pub false_only: bool,
    pub procedure: String,
    pub theta: Vec<Num>,
    pub model: ModelDoc,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub schema_version: u32,
    pub estimate: f64,
    pub half_width: f64,
    pub reps: usize,
    pub seed: u64,
    pub target: TargetDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDoc {
    pub id: usize,
    pub name: String,
    pub status: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDoc {
    pub schema_version: u32,
    pub level: String,
    pub passed: bool,
    pub checks: Vec<CheckDoc>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinities_round_trip() {
        let v = vec![Num(1.5), Num(f64::INFINITY), Num(f64::NEG_INFINITY)];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[1.5,"inf","-inf"]"#);
        let back: Vec<Num> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<Num>("\"big\"").is_err());
        assert_eq!(serde_json::from_str::<Num>("3").unwrap(), Num(3.0));
    }
}
