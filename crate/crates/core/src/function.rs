//! Functions on the sample: closed-form presets and tabulated values.

use std::f64::consts::TAU;

use serde_json::{json, Value};
use thiserror::Error;

use crate::metric_space::MetricSpace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionError {
    #[error("{preset} needs coordinates, point {index} has none")]
    MissingCoordinates { preset: &'static str, index: usize },
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("tabulated function has {found} values, cloud has {expected} points")]
    TabulatedLength { expected: usize, found: usize },
    #[error("function is not finite at point {index}")]
    NotEvaluable { index: usize },
    #[error("parameter {name} must be finite")]
    NonFiniteParameter { name: &'static str },
    #[error("cone anchor: {0}")]
    Anchor(String),
    #[error("invalid function spec: {0}")]
    Spec(String),
}

/// Cone apex: either coordinates (coordinate metrics) or a sample point (any metric).
#[derive(Debug, Clone, PartialEq)]
pub enum Anchor {
    Coords(Vec<f64>),
    Point(usize),
}

/// `coef · Π_a x_a^powers[a]`
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionOnM {
    Constant(f64),
    /// `x ↦ x[axis]`
    Projection { axis: usize },
    /// `x ↦ L · d(x, anchor)`, Lipschitz with constant `L`.
    Cone { lipschitz: f64, anchor: Anchor },
    Polynomial(Vec<Monomial>),
    /// `x ↦ sin(2πν · x[axis])`
    Sine { frequency: f64, axis: usize },
    /// One value per cloud index.
    Tabulated(Vec<f64>),
}

impl FunctionOnM {
    pub fn label(&self) -> String {
        match self {
            FunctionOnM::Constant(c) => format!("constant(c={c})"),
            FunctionOnM::Projection { axis } => format!("projection(axis={axis})"),
            FunctionOnM::Cone { lipschitz, anchor: Anchor::Coords(x0) } => format!("cone(L={lipschitz},x0={x0:?})"),
            FunctionOnM::Cone { lipschitz, anchor: Anchor::Point(i) } => format!("cone(L={lipschitz},x0=#{i})"),
            FunctionOnM::Polynomial(terms) => format!("polynomial({} terms)", terms.len()),
            FunctionOnM::Sine { frequency, axis } => format!("sin(nu={frequency},axis={axis})"),
            FunctionOnM::Tabulated(v) => format!("tabulated({} values)", v.len()),
        }
    }

    fn coords<'s>(space: &'s MetricSpace, preset: &'static str, index: usize) -> Result<&'s [f64], FunctionError> {
        space.cloud().coords(index).ok_or(FunctionError::MissingCoordinates { preset, index })
    }

    fn axis_value(space: &MetricSpace, preset: &'static str, index: usize, axis: usize) -> Result<f64, FunctionError> {
        let c = Self::coords(space, preset, index)?;
        c.get(axis).copied().ok_or(FunctionError::AxisOutOfRange { axis, dim: c.len() })
    }

    /// f at cloud index `i`.
    pub fn eval(&self, space: &MetricSpace, i: usize) -> Result<f64, FunctionError> {
        let value = match self {
            FunctionOnM::Constant(c) => *c,
            FunctionOnM::Projection { axis } => Self::axis_value(space, "projection", i, *axis)?,
            FunctionOnM::Cone { lipschitz, anchor } => {
                let d = match anchor {
                    Anchor::Coords(x0) => space
                        .distance_to_coords(i, x0)
                        .map_err(|e| FunctionError::Anchor(e.to_string()))?,
                    Anchor::Point(p) => space.distance(i, *p).map_err(|e| FunctionError::Anchor(e.to_string()))?,
                };
                lipschitz * d
            }
            FunctionOnM::Polynomial(terms) => {
                let c = Self::coords(space, "polynomial", i)?;
                let mut sum = 0.0;
                for term in terms {
                    if term.powers.len() > c.len() {
                        return Err(FunctionError::AxisOutOfRange { axis: term.powers.len() - 1, dim: c.len() });
                    }
                    let mono: f64 = term.powers.iter().zip(c).map(|(&p, &x)| x.powi(p as i32)).product();
                    sum += term.coef * mono;
                }
                sum
            }
            FunctionOnM::Sine { frequency, axis } => (TAU * frequency * Self::axis_value(space, "sin", i, *axis)?).sin(),
            FunctionOnM::Tabulated(values) => {
                if values.len() != space.len() {
                    return Err(FunctionError::TabulatedLength { expected: space.len(), found: values.len() });
                }
                values[i]
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(FunctionError::NotEvaluable { index: i })
        }
    }

    /// Values at every cloud index.
    pub fn sample(&self, space: &MetricSpace) -> Result<Vec<f64>, FunctionError> {
        if let FunctionOnM::Tabulated(values) = self {
            if values.len() != space.len() {
                return Err(FunctionError::TabulatedLength { expected: space.len(), found: values.len() });
            }
        }
        (0..space.len()).map(|i| self.eval(space, i)).collect()
    }

    fn check_parameters(&self) -> Result<(), FunctionError> {
        let finite = |name, v: f64| if v.is_finite() { Ok(()) } else { Err(FunctionError::NonFiniteParameter { name }) };
        match self {
            FunctionOnM::Constant(c) => finite("c", *c),
            FunctionOnM::Cone { lipschitz, anchor } => {
                finite("L", *lipschitz)?;
                if let Anchor::Coords(x0) = anchor {
                    x0.iter().try_for_each(|&v| finite("x0", v))?;
                }
                Ok(())
            }
            FunctionOnM::Polynomial(terms) => terms.iter().try_for_each(|t| finite("coef", t.coef)),
            FunctionOnM::Sine { frequency, .. } => finite("nu", *frequency),
            FunctionOnM::Projection { .. } | FunctionOnM::Tabulated(_) => Ok(()),
        }
    }

    /// Parse the JSON form, e.g. `{"preset":"cone","L":2.0,"x0":[0.5]}` or
    /// `{"values":[...]}`. An optional `"name"` labels the member.
    pub fn from_json(value: &Value) -> Result<FamilyMember, FunctionError> {
        let spec = |msg: String| FunctionError::Spec(msg);
        let obj = value.as_object().ok_or_else(|| spec(format!("expected an object, got {value}")))?;
        let real = |key: &str| -> Result<f64, FunctionError> {
            obj.get(key).and_then(Value::as_f64).ok_or_else(|| spec(format!("missing real field {key:?}")))
        };
        let index = |key: &str, default: Option<usize>| -> Result<usize, FunctionError> {
            match obj.get(key) {
                Some(v) => v.as_u64().map(|v| v as usize).ok_or_else(|| spec(format!("{key:?} must be an index"))),
                None => default.ok_or_else(|| spec(format!("missing index field {key:?}"))),
            }
        };
        let reals = |v: &Value, what: &str| -> Result<Vec<f64>, FunctionError> {
            v.as_array()
                .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
                .ok_or_else(|| spec(format!("{what} must be an array of reals")))
        };

        let function = if let Some(values) = obj.get("values") {
            FunctionOnM::Tabulated(reals(values, "values")?)
        } else {
            let preset = obj
                .get("preset")
                .and_then(Value::as_str)
                .ok_or_else(|| spec(String::from("expected \"preset\" or \"values\"")))?;
            match preset {
                "constant" => FunctionOnM::Constant(real("c")?),
                "projection" => FunctionOnM::Projection { axis: index("axis", Some(0))? },
                "cone" => {
                    let anchor = match (obj.get("x0"), obj.get("x0_index")) {
                        (Some(x0), None) => Anchor::Coords(reals(x0, "x0")?),
                        (None, Some(_)) => Anchor::Point(index("x0_index", None)?),
                        (None, None) => Anchor::Point(0),
                        (Some(_), Some(_)) => return Err(spec(String::from("give x0 or x0_index, not both"))),
                    };
                    FunctionOnM::Cone { lipschitz: real("L")?, anchor }
                }
                "sin" | "sine" => FunctionOnM::Sine { frequency: real("nu")?, axis: index("axis", Some(0))? },
                "polynomial" => {
                    let terms = obj
                        .get("terms")
                        .and_then(Value::as_array)
                        .ok_or_else(|| spec(String::from("polynomial needs \"terms\"")))?;
                    let terms = terms
                        .iter()
                        .map(|t| {
                            let coef = t.get("coef").and_then(Value::as_f64);
                            let powers = t.get("powers").and_then(Value::as_array).and_then(|p| {
                                p.iter().map(|v| v.as_u64().map(|v| v as u32)).collect::<Option<Vec<_>>>()
                            });
                            match (coef, powers) {
                                (Some(coef), Some(powers)) => Ok(Monomial { coef, powers }),
                                _ => Err(spec(format!("bad polynomial term {t}"))),
                            }
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    FunctionOnM::Polynomial(terms)
                }
                other => return Err(spec(format!("unknown preset {other:?}"))),
            }
        };
        function.check_parameters()?;
        let name = obj.get("name").and_then(Value::as_str).map(str::to_owned).unwrap_or_else(|| function.label());
        Ok(FamilyMember { name, function })
    }

    /// Short form used by `--preset`: `constant:C`, `projection:AXIS`,
    /// `sin:NU`, `cone:L` or `cone:L@INDEX`.
    pub fn parse_short(s: &str) -> Result<FamilyMember, FunctionError> {
        Self::from_json(&Self::short_spec(s)?)
    }

    /// JSON spec for a short form; see [`FunctionOnM::parse_short`].
    pub fn short_spec(s: &str) -> Result<Value, FunctionError> {
        let bad = || FunctionError::Spec(format!("cannot parse preset {s:?}"));
        let (name, arg) = s.split_once(':').ok_or_else(bad)?;
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let idx = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
        let spec = match name {
            "constant" => json!({"preset": "constant", "c": num(arg)?}),
            "projection" => json!({"preset": "projection", "axis": idx(arg)?}),
            "sin" | "sine" => json!({"preset": "sin", "nu": num(arg)?}),
            "cone" => match arg.split_once('@') {
                Some((l, i)) => json!({"preset": "cone", "L": num(l)?, "x0_index": idx(i)?}),
                None => json!({"preset": "cone", "L": num(arg)?}),
            },
            _ => return Err(bad()),
        };
        Ok(spec)
    }
}

/// A labelled family member.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub name: String,
    pub function: FunctionOnM,
}

impl FamilyMember {
    pub fn new(function: FunctionOnM) -> Self {
        Self { name: function.label(), function }
    }
}

/// Complex-valued function, handled as two real parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFunction {
    pub re: FunctionOnM,
    pub im: FunctionOnM,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::{MetricKind, PointCloud};

    fn plane() -> MetricSpace {
        MetricSpace::euclidean(vec![vec![0.0, 0.0], vec![3.0, 4.0], vec![1.0, 2.0]]).unwrap()
    }

    #[test]
    fn presets_evaluate() {
        let s = plane();
        assert_eq!(FunctionOnM::Constant(3.0).eval(&s, 1).unwrap(), 3.0);
        assert_eq!(FunctionOnM::Projection { axis: 1 }.eval(&s, 1).unwrap(), 4.0);
        let cone = FunctionOnM::Cone { lipschitz: 2.0, anchor: Anchor::Coords(vec![0.0, 0.0]) };
        assert_eq!(cone.eval(&s, 1).unwrap(), 10.0);
        let cone = FunctionOnM::Cone { lipschitz: 1.0, anchor: Anchor::Point(0) };
        assert_eq!(cone.eval(&s, 1).unwrap(), 5.0);
        let poly = FunctionOnM::Polynomial(vec![
            Monomial { coef: 1.0, powers: vec![2, 1] },
            Monomial { coef: -2.0, powers: vec![] },
        ]);
        assert_eq!(poly.eval(&s, 1).unwrap(), 9.0 * 4.0 - 2.0);
        let sine = FunctionOnM::Sine { frequency: 0.25, axis: 0 };
        assert!((sine.eval(&s, 2).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let s = plane();
        assert_eq!(
            FunctionOnM::Projection { axis: 2 }.eval(&s, 0),
            Err(FunctionError::AxisOutOfRange { axis: 2, dim: 2 })
        );
        assert_eq!(
            FunctionOnM::Tabulated(vec![1.0]).sample(&s),
            Err(FunctionError::TabulatedLength { expected: 3, found: 1 })
        );
        assert_eq!(
            FunctionOnM::Tabulated(vec![1.0, f64::NAN, 0.0]).eval(&s, 1),
            Err(FunctionError::NotEvaluable { index: 1 })
        );
        let discrete = MetricSpace::new(PointCloud::anonymous(2).unwrap(), MetricKind::Discrete).unwrap();
        assert!(matches!(
            FunctionOnM::Sine { frequency: 1.0, axis: 0 }.eval(&discrete, 0),
            Err(FunctionError::MissingCoordinates { .. })
        ));
        let cone = FunctionOnM::Cone { lipschitz: 1.0, anchor: Anchor::Coords(vec![0.0]) };
        assert!(matches!(cone.eval(&discrete, 0), Err(FunctionError::Anchor(_))));
    }

    #[test]
    fn json_forms() {
        let m = FunctionOnM::from_json(&json!({"preset":"cone","L":2.0,"x0":[0.5]})).unwrap();
        assert_eq!(m.function, FunctionOnM::Cone { lipschitz: 2.0, anchor: Anchor::Coords(vec![0.5]) });
        let m = FunctionOnM::from_json(&json!({"values":[1, 2.5], "name":"t"})).unwrap();
        assert_eq!((m.name.as_str(), m.function), ("t", FunctionOnM::Tabulated(vec![1.0, 2.5])));
        let m = FunctionOnM::from_json(&json!({"preset":"polynomial","terms":[{"coef":1,"powers":[3]}]})).unwrap();
        assert!(matches!(m.function, FunctionOnM::Polynomial(_)));
        assert!(FunctionOnM::from_json(&json!({"preset":"gauss"})).is_err());
        assert!(FunctionOnM::from_json(&json!({"preset":"constant"})).is_err());
    }

    #[test]
    fn short_forms() {
        assert_eq!(FunctionOnM::parse_short("constant:3").unwrap().function, FunctionOnM::Constant(3.0));
        assert_eq!(
            FunctionOnM::parse_short("cone:1.5@4").unwrap().function,
            FunctionOnM::Cone { lipschitz: 1.5, anchor: Anchor::Point(4) }
        );
        assert_eq!(
            FunctionOnM::parse_short("sin:8").unwrap().function,
            FunctionOnM::Sine { frequency: 8.0, axis: 0 }
        );
        assert!(FunctionOnM::parse_short("cone").is_err());
    }
}
