//! JSON description of measures, as read from `--nu` / `--mu` files.
//!
//! ```json
//! {"type": "density", "kind": "power", "coefficient": 1, "exponent": -2, "support": [1, "inf"]}
//! ```
//!
//! Variants are `zero`, `atoms`, `density`, `cantor`, `weighted` and `transform`.
//! Infinite endpoints are written `"inf"` / `"-inf"`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::cantor::CantorQuadrature;
use crate::error::{Error, Result};
use crate::extended::parse_word;
use crate::measure::{
    DensityKind, DensityPiece, Measure, NamedFn, TailRule, TailWeight, Transform, Weight,
};

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    Zero,
    Atoms {
        points: Vec<f64>,
        weights: Vec<f64>,
        tail: Option<TailSpec>,
    },
    Density {
        pieces: Vec<PieceSpec>,
    },
    Cantor {
        translates: Option<u64>,
        quadrature: CantorQuadrature,
    },
    Weighted {
        base: Box<MeasureSpec>,
        weight: WeightSpec,
    },
    Transform {
        base: Box<MeasureSpec>,
        map: Transform,
    },
}

/// Integer atoms `n >= start` with weight `coefficient * n^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSpec {
    pub start: i64,
    pub coefficient: f64,
    pub exponent: f64,
    pub truncation: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PieceSpec {
    pub lo: f64,
    pub hi: f64,
    pub density: DensityPreset,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityPreset {
    Power {
        coefficient: f64,
        exponent: f64,
        origin: f64,
    },
    Lebesgue,
    Exponential {
        rate: f64,
    },
    Gaussian {
        mean: f64,
        sd: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    CdfPower { exponent: f64 },
    XPower { exponent: f64 },
}

pub const DEFAULT_TRUNCATION: i64 = 10_000;

/// Parses and validates a spec document into a [`Measure`].
pub fn parse_measure_spec(text: &str) -> Result<Measure> {
    MeasureSpec::from_json(text)?.build()
}

fn spec_err(path: &str, message: impl Into<String>) -> Error {
    Error::Spec {
        path: path.to_string(),
        message: message.into(),
    }
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

/// Field reader that remembers which keys were consumed.
struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: String,
    used: Vec<&'static str>,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, path: &str) -> Result<Self> {
        let map = v
            .as_object()
            .ok_or_else(|| spec_err(path, "expected an object"))?;
        Ok(Self {
            map,
            path: path.to_string(),
            used: Vec::new(),
        })
    }

    fn at(&self, key: &str) -> String {
        format!("{}.{key}", self.path)
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.push(key);
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn req(&mut self, key: &'static str) -> Result<&'a Value> {
        let path = self.at(key);
        self.get(key)
            .ok_or_else(|| spec_err(&path, "missing field"))
    }

    fn str(&mut self, key: &'static str) -> Result<&'a str> {
        let path = self.at(key);
        self.req(key)?
            .as_str()
            .ok_or_else(|| spec_err(&path, "expected a string"))
    }

    fn real(&mut self, key: &'static str) -> Result<f64> {
        let path = self.at(key);
        real(self.req(key)?, &path)
    }

    fn real_or(&mut self, key: &'static str, default: f64) -> Result<f64> {
        let path = self.at(key);
        self.get(key).map_or(Ok(default), |v| real(v, &path))
    }

    fn int_or(&mut self, key: &'static str, default: i64) -> Result<i64> {
        let path = self.at(key);
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_i64()
                .ok_or_else(|| spec_err(&path, "expected an integer")),
        }
    }

    fn reals(&mut self, key: &'static str) -> Result<Vec<f64>> {
        let path = self.at(key);
        let arr = self
            .req(key)?
            .as_array()
            .ok_or_else(|| spec_err(&path, "expected an array"))?;
        arr.iter()
            .enumerate()
            .map(|(i, v)| real(v, &format!("{path}[{i}]")))
            .collect()
    }

    fn finish(self) -> Result<()> {
        for key in self.map.keys() {
            if !self.used.contains(&key.as_str()) {
                return Err(spec_err(&self.at(key), "unknown field"));
            }
        }
        Ok(())
    }
}

fn real(v: &Value, path: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| spec_err(path, "number out of range")),
        Value::String(s) => parse_word(s)
            .filter(|x| !x.is_nan())
            .ok_or_else(|| spec_err(path, format!("expected a number or \"inf\", got \"{s}\""))),
        _ => Err(spec_err(path, "expected a number")),
    }
}

fn support(o: &mut Obj) -> Result<(f64, f64)> {
    let path = o.at("support");
    let ends = o.reals("support")?;
    match ends[..] {
        [lo, hi] if lo < hi => Ok((lo, hi)),
        [_, _] => Err(spec_err(&path, "support must satisfy lo < hi")),
        _ => Err(spec_err(&path, "support must be [lo, hi]")),
    }
}

fn finite(x: f64, path: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(spec_err(path, "must be finite"))
    }
}

impl MeasureSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| {
            spec_err(
                &format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        Self::from_value(&v, "$")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("spec values serialize")
    }

    pub fn from_value(v: &Value, path: &str) -> Result<Self> {
        let mut o = Obj::new(v, path)?;
        let tag_path = o.at("type");
        let spec = match o.str("type")? {
            "zero" => MeasureSpec::Zero,
            "atoms" => Self::atoms(&mut o)?,
            "density" => {
                let pieces = if o.map.contains_key("pieces") {
                    let pp = o.at("pieces");
                    let arr = o.req("pieces")?.as_array().ok_or_else(|| spec_err(&pp, "expected an array"))?;
                    if arr.is_empty() {
                        return Err(spec_err(&pp, "needs at least one piece"));
                    }
                    let pieces = arr
                        .iter()
                        .enumerate()
                        .map(|(i, p)| {
                            let mut po = Obj::new(p, &format!("{pp}[{i}]"))?;
                            let piece = Self::piece(&mut po)?;
                            po.finish()?;
                            Ok(piece)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    for (i, w) in pieces.windows(2).enumerate() {
                        if w[1].lo < w[0].hi {
                            return Err(spec_err(&format!("{pp}[{}].support", i + 1), "pieces overlap or are unordered"));
                        }
                    }
                    pieces
                } else {
                    vec![Self::piece(&mut o)?]
                };
                MeasureSpec::Density { pieces }
            }
            "cantor" => {
                let tp = o.at("translates");
                let translates = match o.get("translates") {
                    None => None,
                    Some(v) => Some(v.as_u64().filter(|&n| n > 0).ok_or_else(|| spec_err(&tp, "expected a positive integer"))?),
                };
                let qp = o.at("quadrature");
                let quadrature = match o.get("quadrature") {
                    None => CantorQuadrature::Adaptive,
                    Some(Value::String(s)) if s == "adaptive" => CantorQuadrature::Adaptive,
                    Some(v) => {
                        let mut qo = Obj::new(v, &qp).map_err(|_| spec_err(&qp, "expected \"adaptive\" or {\"level\": m}"))?;
                        let lp = qo.at("level");
                        let m = qo.req("level")?.as_u64().filter(|&m| m <= 40).ok_or_else(|| spec_err(&lp, "expected an integer in 0..=40"))?;
                        qo.finish()?;
                        CantorQuadrature::Level(m as u32)
                    }
                };
                MeasureSpec::Cantor { translates, quadrature }
            }
            "weighted" => {
                let base = Self::from_value(o.req("base")?, &o.at("base"))?;
                let wp = o.at("weight");
                let mut wo = Obj::new(o.req("weight")?, &wp)?;
                let kp = wo.at("kind");
                let exponent = finite(wo.real("exponent")?, &wo.at("exponent"))?;
                let weight = match wo.str("kind")? {
                    "cdf_power" => WeightSpec::CdfPower { exponent },
                    "x_power" => WeightSpec::XPower { exponent },
                    other => return Err(spec_err(&kp, format!("unknown weight \"{other}\" (expected cdf_power or x_power)"))),
                };
                wo.finish()?;
                MeasureSpec::Weighted { base: Box::new(base), weight }
            }
            "transform" => {
                let base = Self::from_value(o.req("base")?, &o.at("base"))?;
                let kp = o.at("kind");
                let pp = o.at("parameter");
                let map = match o.str("kind")? {
                    "shift" => Transform::Shift(finite(o.real("parameter")?, &pp)?),
                    "scale" => {
                        let s = o.real("parameter")?;
                        if !(s > 0.0 && s.is_finite()) {
                            return Err(spec_err(&pp, "scale factor must be positive and finite"));
                        }
                        Transform::Scale(s)
                    }
                    "reflect" => Transform::Reflect,
                    other => return Err(spec_err(&kp, format!("unknown transform \"{other}\" (expected shift, scale or reflect)"))),
                };
                MeasureSpec::Transform { base: Box::new(base), map }
            }
            other => {
                return Err(spec_err(
                    &tag_path,
                    format!("unknown measure type \"{other}\" (expected zero, atoms, density, cantor, weighted or transform)"),
                ))
            }
        };
        o.finish()?;
        Ok(spec)
    }

    fn atoms(o: &mut Obj) -> Result<Self> {
        let points = o.reals("points")?;
        let weights = o.reals("weights")?;
        if points.len() != weights.len() {
            return Err(spec_err(
                &o.at("weights"),
                format!(
                    "has {} entries but points has {}",
                    weights.len(),
                    points.len()
                ),
            ));
        }
        for (i, x) in points.iter().enumerate() {
            finite(*x, &format!("{}[{i}]", o.at("points")))?;
            if i > 0 && points[i - 1] >= *x {
                return Err(spec_err(
                    &format!("{}[{i}]", o.at("points")),
                    "points not increasing",
                ));
            }
        }
        for (i, w) in weights.iter().enumerate() {
            if !(*w >= 0.0 && w.is_finite()) {
                return Err(spec_err(
                    &format!("{}[{i}]", o.at("weights")),
                    format!("weight {w} must be finite and nonnegative"),
                ));
            }
        }
        let tp = o.at("tail");
        let tail = match o.get("tail") {
            None => None,
            Some(v) => {
                let mut to = Obj::new(v, &tp)?;
                let tail = TailSpec {
                    start: to.int_or("start", 1)?,
                    coefficient: to.real_or("coefficient", 1.0)?,
                    exponent: to.real_or("exponent", 0.0)?,
                    truncation: to.int_or("truncation", DEFAULT_TRUNCATION)?,
                };
                to.finish()?;
                if let Some(&last) = points.last() {
                    if last >= tail.start as f64 {
                        return Err(spec_err(
                            &format!("{tp}.start"),
                            "explicit points must lie left of the tail",
                        ));
                    }
                }
                Some(tail)
            }
        };
        Ok(MeasureSpec::Atoms {
            points,
            weights,
            tail,
        })
    }

    fn piece(o: &mut Obj) -> Result<PieceSpec> {
        let (lo, hi) = support(o)?;
        let kp = o.at("kind");
        let density = match o.str("kind")? {
            "power" => DensityPreset::Power {
                coefficient: finite(o.real("coefficient")?, &o.at("coefficient"))?,
                exponent: finite(o.real("exponent")?, &o.at("exponent"))?,
                origin: finite(o.real_or("origin", 0.0)?, &o.at("origin"))?,
            },
            "lebesgue" => DensityPreset::Lebesgue,
            "exponential" => {
                let rate = o.real_or("rate", 1.0)?;
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(spec_err(&o.at("rate"), "rate must be positive"));
                }
                DensityPreset::Exponential { rate }
            }
            "gaussian" => {
                let mean = finite(o.real_or("mean", 0.0)?, &o.at("mean"))?;
                let sd = o.real_or("sd", 1.0)?;
                if !(sd > 0.0 && sd.is_finite()) {
                    return Err(spec_err(&o.at("sd"), "sd must be positive"));
                }
                DensityPreset::Gaussian { mean, sd }
            }
            other => {
                return Err(spec_err(&kp, format!("unknown density \"{other}\" (expected power, lebesgue, exponential or gaussian)")))
            }
        };
        Ok(PieceSpec { lo, hi, density })
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        let tag = |m: &mut Map<String, Value>, t: &str| m.insert("type".into(), Value::from(t));
        match self {
            MeasureSpec::Zero => {
                tag(&mut m, "zero");
            }
            MeasureSpec::Atoms {
                points,
                weights,
                tail,
            } => {
                tag(&mut m, "atoms");
                m.insert("points".into(), points.iter().map(|&x| num(x)).collect());
                m.insert("weights".into(), weights.iter().map(|&x| num(x)).collect());
                if let Some(t) = tail {
                    let mut tm = Map::new();
                    tm.insert("start".into(), Value::from(t.start));
                    tm.insert("coefficient".into(), num(t.coefficient));
                    tm.insert("exponent".into(), num(t.exponent));
                    tm.insert("truncation".into(), Value::from(t.truncation));
                    m.insert("tail".into(), Value::Object(tm));
                }
            }
            MeasureSpec::Density { pieces } => {
                tag(&mut m, "density");
                if let [one] = &pieces[..] {
                    one.write(&mut m);
                } else {
                    let list = pieces
                        .iter()
                        .map(|p| {
                            let mut pm = Map::new();
                            p.write(&mut pm);
                            Value::Object(pm)
                        })
                        .collect();
                    m.insert("pieces".into(), list);
                }
            }
            MeasureSpec::Cantor {
                translates,
                quadrature,
            } => {
                tag(&mut m, "cantor");
                if let Some(n) = translates {
                    m.insert("translates".into(), Value::from(*n));
                }
                let q = match quadrature {
                    CantorQuadrature::Adaptive => Value::from("adaptive"),
                    CantorQuadrature::Level(l) => serde_json::json!({ "level": l }),
                };
                m.insert("quadrature".into(), q);
            }
            MeasureSpec::Weighted { base, weight } => {
                tag(&mut m, "weighted");
                m.insert("base".into(), base.to_value());
                let (kind, exponent) = match weight {
                    WeightSpec::CdfPower { exponent } => ("cdf_power", *exponent),
                    WeightSpec::XPower { exponent } => ("x_power", *exponent),
                };
                m.insert(
                    "weight".into(),
                    serde_json::json!({ "kind": kind, "exponent": num(exponent) }),
                );
            }
            MeasureSpec::Transform { base, map } => {
                tag(&mut m, "transform");
                let (kind, parameter) = match map {
                    Transform::Shift(c) => ("shift", Some(*c)),
                    Transform::Scale(s) => ("scale", Some(*s)),
                    Transform::Reflect => ("reflect", None),
                };
                m.insert("kind".into(), Value::from(kind));
                if let Some(v) = parameter {
                    m.insert("parameter".into(), num(v));
                }
                m.insert("base".into(), base.to_value());
            }
        }
        Value::Object(m)
    }

    /// Builds the measure. Constructor errors are reported at the spec node that caused them.
    pub fn build(&self) -> Result<Measure> {
        self.build_at("$")
    }

    fn build_at(&self, path: &str) -> Result<Measure> {
        let at = |e: Error| match e {
            Error::Spec { .. } => e,
            other => spec_err(path, other.to_string()),
        };
        match self {
            MeasureSpec::Zero => Ok(Measure::zero()),
            MeasureSpec::Atoms {
                points,
                weights,
                tail: None,
            } => Measure::atoms(points.clone(), weights.clone()).map_err(at),
            MeasureSpec::Atoms {
                points,
                weights,
                tail: Some(t),
            } => {
                let rule = TailRule::new(
                    t.start,
                    TailWeight::Power {
                        coefficient: t.coefficient,
                        exponent: t.exponent,
                    },
                    t.truncation,
                )
                .map_err(|e| spec_err(&format!("{path}.tail"), e.to_string()))?;
                Measure::atoms_with_tail(points.clone(), weights.clone(), rule).map_err(at)
            }
            MeasureSpec::Density { pieces } => {
                let built = pieces
                    .iter()
                    .map(|p| DensityPiece::new(p.lo, p.hi, p.density.kind()))
                    .collect::<Result<Vec<_>>>();
                Measure::density(built.map_err(at)?).map_err(at)
            }
            MeasureSpec::Cantor {
                translates,
                quadrature,
            } => Ok(Measure::cantor_with(*translates, *quadrature)),
            MeasureSpec::Weighted { base, weight } => {
                let b = base.build_at(&format!("{path}.base"))?;
                let w = match *weight {
                    WeightSpec::CdfPower { exponent } => Weight::CdfPower { exponent },
                    WeightSpec::XPower { exponent } => Weight::XPower { exponent },
                };
                Measure::weighted(b, w)
                    .map_err(|e| spec_err(&format!("{path}.weight"), e.to_string()))
            }
            MeasureSpec::Transform { base, map } => {
                Measure::transformed(base.build_at(&format!("{path}.base"))?, *map).map_err(at)
            }
        }
    }
}

impl PieceSpec {
    fn write(&self, m: &mut Map<String, Value>) {
        match self.density {
            DensityPreset::Power {
                coefficient,
                exponent,
                origin,
            } => {
                m.insert("kind".into(), Value::from("power"));
                m.insert("coefficient".into(), num(coefficient));
                m.insert("exponent".into(), num(exponent));
                if origin != 0.0 {
                    m.insert("origin".into(), num(origin));
                }
            }
            DensityPreset::Lebesgue => {
                m.insert("kind".into(), Value::from("lebesgue"));
            }
            DensityPreset::Exponential { rate } => {
                m.insert("kind".into(), Value::from("exponential"));
                m.insert("rate".into(), num(rate));
            }
            DensityPreset::Gaussian { mean, sd } => {
                m.insert("kind".into(), Value::from("gaussian"));
                m.insert("mean".into(), num(mean));
                m.insert("sd".into(), num(sd));
            }
        }
        m.insert(
            "support".into(),
            Value::Array(vec![num(self.lo), num(self.hi)]),
        );
    }
}

impl DensityPreset {
    fn kind(&self) -> DensityKind {
        match *self {
            DensityPreset::Power {
                coefficient,
                exponent,
                origin,
            } => DensityKind::PowerLaw {
                coefficient,
                exponent,
                origin,
            },
            DensityPreset::Lebesgue => DensityKind::lebesgue(),
            DensityPreset::Exponential { rate } => DensityKind::Generic(NamedFn::new(
                format!("exponential(rate={rate:?})"),
                move |t| rate * (-rate * t).exp(),
            )),
            DensityPreset::Gaussian { mean, sd } => {
                let c = 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt());
                DensityKind::Generic(NamedFn::new(
                    format!("gaussian(mean={mean:?},sd={sd:?})"),
                    move |t| {
                        let z = (t - mean) / sd;
                        c * (-0.5 * z * z).exp()
                    },
                ))
            }
        }
    }
}

impl Serialize for MeasureSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasureSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        MeasureSpec::from_value(&v, "$").map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_of(text: &str) -> String {
        match parse_measure_spec(text) {
            Err(Error::Spec { path, .. }) => path,
            other => panic!("expected a spec error, got {other:?}"),
        }
    }

    #[test]
    fn parses_examples() {
        let m = parse_measure_spec(r#"{"type":"atoms","points":[1,2],"weights":[1,1]}"#).unwrap();
        assert_eq!(m.total_mass().unwrap(), 2.0);
        let d = parse_measure_spec(r#"{"type":"density","kind":"power","coefficient":1,"exponent":-2,"support":[1,"inf"]}"#).unwrap();
        assert_eq!(
            d,
            Measure::power_density(1.0, -2.0, 0.0, 1.0, f64::INFINITY)
                .unwrap()
                .with_label("density")
        );
        assert!((d.upper_tail_closed(2.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_name_the_field() {
        assert_eq!(
            path_of(r#"{"type":"atoms","points":[2,1],"weights":[1,1]}"#),
            "$.points[1]"
        );
        assert_eq!(
            path_of(r#"{"type":"atoms","points":[1,2],"weights":[1,-1]}"#),
            "$.weights[1]"
        );
        assert_eq!(path_of(r#"{"type":"blob"}"#), "$.type");
        assert_eq!(
            path_of(
                r#"{"type":"weighted","base":{"type":"cantor","extra":1},"weight":{"kind":"cdf_power","exponent":-2}}"#
            ),
            "$.base.extra"
        );
        assert_eq!(
            path_of(
                r#"{"type":"weighted","base":{"type":"atoms","points":[1],"weights":[1]},"weight":{"kind":"cdf_power","exponent":-2}}"#
            ),
            "$.weight"
        );
        assert_eq!(path_of("{\n  \"type\": \"zero\",\n}"), "line 3, column 1");
        assert_eq!(
            path_of(
                r#"{"type":"density","kind":"power","coefficient":1,"exponent":-2,"support":[1,"wide"]}"#
            ),
            "$.support[1]"
        );
    }

    #[test]
    fn round_trips() {
        let specs = [
            r#"{"type":"zero"}"#,
            r#"{"type":"atoms","points":[0.1,0.30000000000000004],"weights":[1e-300,2.5]}"#,
            r#"{"type":"atoms","points":[],"weights":[],"tail":{"start":1,"coefficient":1,"exponent":-2,"truncation":500}}"#,
            r#"{"type":"density","pieces":[{"kind":"lebesgue","support":[0,1]},{"kind":"exponential","rate":2,"support":[1,"inf"]}]}"#,
            r#"{"type":"density","kind":"gaussian","support":["-inf","inf"]}"#,
            r#"{"type":"cantor","translates":3,"quadrature":{"level":6}}"#,
            r#"{"type":"weighted","base":{"type":"cantor"},"weight":{"kind":"cdf_power","exponent":-2}}"#,
            r#"{"type":"transform","kind":"scale","parameter":3,"base":{"type":"transform","kind":"reflect","base":{"type":"zero"}}}"#,
        ];
        for text in specs {
            let spec = MeasureSpec::from_json(text).unwrap();
            let again = MeasureSpec::from_json(&spec.to_json()).unwrap();
            assert_eq!(again, spec, "{text}");
            assert_eq!(
                parse_measure_spec(&spec.to_json()).unwrap(),
                spec.build().unwrap(),
                "{text}"
            );
        }
    }
}
