//! JSON encodings with exact rational strings.
//!
//! Quaternions are `["w", "x", "y", "z"]`, matrices nested row arrays of quaternions, and
//! `h`-factor indices are one-based on the wire.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::budget::{HFactor, HFactors};
use crate::certify::BasedInstance;
use crate::error::{Error, Result};
use crate::matrices::Matrix;
use crate::normalform::UvuForm;
use crate::scalar::Scalar;
use crate::skewfield::{AlgebraParams, Quaternion};
use crate::wordcalc::{CommutatorCert, Group};

fn parse_err(what: &str) -> Error {
    Error::Parse(format!("expected {what}"))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field \"{key}\"")))
}

pub fn scalar_from_json<F: Scalar>(v: &Value) -> Result<F> {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_i64() => n.to_string(),
        _ => return Err(parse_err("a rational string")),
    };
    F::from_str(s.trim()).map_err(|_| Error::Parse(format!("bad rational {s:?}")))
}

pub fn algebra_to_json<F: Scalar>(alg: &AlgebraParams<F>) -> Value {
    json!({ "a": alg.a().to_string(), "b": alg.b().to_string() })
}

pub fn algebra_from_json<F: Scalar>(v: &Value) -> Result<Arc<AlgebraParams<F>>> {
    AlgebraParams::new(
        scalar_from_json(field(v, "a")?)?,
        scalar_from_json(field(v, "b")?)?,
    )
}

/// Parses `"a,b"` as algebra parameters.
pub fn algebra_from_arg<F: Scalar>(s: &str) -> Result<Arc<AlgebraParams<F>>> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| parse_err("algebra parameters \"a,b\""))?;
    let p =
        |t: &str| F::from_str(t.trim()).map_err(|_| Error::Parse(format!("bad rational {t:?}")));
    AlgebraParams::new(p(a)?, p(b)?)
}

/// Group elements with a JSON encoding relative to a fixed algebra.
pub trait JsonElem: Group + Sized {
    type Scalar: Scalar;
    fn to_json(&self) -> Value;
    fn from_json(alg: &Arc<AlgebraParams<Self::Scalar>>, v: &Value) -> Result<Self>;
}

impl<F: Scalar> JsonElem for Quaternion<F> {
    type Scalar = F;

    fn to_json(&self) -> Value {
        Value::Array(
            self.coords()
                .iter()
                .map(|c| Value::String(c.to_string()))
                .collect(),
        )
    }

    fn from_json(alg: &Arc<AlgebraParams<F>>, v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| parse_err("a quaternion [w, x, y, z]"))?;
        let c: Vec<F> = arr.iter().map(scalar_from_json).collect::<Result<_>>()?;
        let [w, x, y, z]: [F; 4] = c.try_into().map_err(|_| parse_err("four coordinates"))?;
        Ok(Quaternion::new(alg, w, x, y, z))
    }
}

impl<F: Scalar> JsonElem for Matrix<F> {
    type Scalar = F;

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows()
                .iter()
                .map(|r| Value::Array(r.iter().map(|q| q.to_json()).collect()))
                .collect(),
        )
    }

    fn from_json(alg: &Arc<AlgebraParams<F>>, v: &Value) -> Result<Self> {
        let rows = v
            .as_array()
            .ok_or_else(|| parse_err("a matrix as an array of rows"))?;
        let rows = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| parse_err("a matrix row"))?
                    .iter()
                    .map(|q| Quaternion::from_json(alg, q))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(alg, rows)
    }
}

pub fn cert_to_json<G: JsonElem>(cert: &CommutatorCert<G>) -> Value {
    json!({
        "pairs": cert.pairs.iter().map(|(g, h)| json!([g.to_json(), h.to_json()])).collect::<Vec<_>>(),
        "target": cert.target.to_json(),
    })
}

pub fn pairs_from_json<G: JsonElem>(
    alg: &Arc<AlgebraParams<G::Scalar>>,
    v: &Value,
) -> Result<Vec<(G, G)>> {
    v.as_array()
        .ok_or_else(|| parse_err("\"pairs\" as an array"))?
        .iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([g, h]) => Ok((G::from_json(alg, g)?, G::from_json(alg, h)?)),
            _ => Err(parse_err("a pair [g, h]")),
        })
        .collect()
}

pub fn cert_from_json<G: JsonElem>(
    alg: &Arc<AlgebraParams<G::Scalar>>,
    v: &Value,
) -> Result<CommutatorCert<G>> {
    let pairs = pairs_from_json(alg, field(v, "pairs")?)?;
    Ok(CommutatorCert::new(
        pairs,
        G::from_json(alg, field(v, "target")?)?,
    ))
}

pub fn hfactors_to_json<F: Scalar>(hf: &HFactors<F>) -> Value {
    Value::Array(
        hf.factors()
            .iter()
            .map(|f| json!({ "i": f.index + 1, "eps": f.eps.to_json() }))
            .collect(),
    )
}

pub fn hfactors_from_json<F: Scalar>(
    alg: &Arc<AlgebraParams<F>>,
    n: usize,
    v: &Value,
) -> Result<HFactors<F>> {
    let arr = v.as_array().ok_or_else(|| parse_err("an h factor list"))?;
    let factors = arr
        .iter()
        .map(|f| {
            let i = field(f, "i")?
                .as_u64()
                .filter(|&i| i >= 1)
                .ok_or_else(|| parse_err("a one-based index \"i\""))?;
            Ok(HFactor {
                index: i as usize - 1,
                eps: Quaternion::from_json(alg, field(f, "eps")?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    HFactors::from_factors(n, factors)
}

pub fn form_to_json<F: Scalar>(form: &UvuForm<F>) -> Value {
    json!({
        "h": hfactors_to_json(&form.h),
        "u1": form.u1.to_json(),
        "v": form.v.to_json(),
        "u2": form.u2.to_json(),
    })
}

pub fn form_from_json<F: Scalar>(alg: &Arc<AlgebraParams<F>>, v: &Value) -> Result<UvuForm<F>> {
    let u1 = Matrix::from_json(alg, field(v, "u1")?)?;
    let form = UvuForm {
        h: hfactors_from_json(alg, u1.n(), field(v, "h")?)?,
        u1,
        v: Matrix::from_json(alg, field(v, "v")?)?,
        u2: Matrix::from_json(alg, field(v, "u2")?)?,
    };
    form.check_shape()?;
    Ok(form)
}

pub fn instance_to_json<F: Scalar>(inst: &BasedInstance<F>) -> Value {
    json!({
        "algebra": algebra_to_json(inst.algebra()),
        "n": inst.n,
        "v": inst.v.to_json(),
        "u": inst.u.to_json(),
        "delta": inst.delta.to_json(),
        "delta_cert": cert_to_json(&inst.delta_cert),
        "gamma": inst.gamma.to_json(),
    })
}

pub fn instance_from_json<F: Scalar>(v: &Value) -> Result<BasedInstance<F>> {
    let alg = algebra_from_json(field(v, "algebra")?)?;
    let mat = |k: &str| Matrix::from_json(&alg, field(v, k)?);
    let cert = cert_from_json::<Quaternion<F>>(&alg, field(v, "delta_cert")?)?;
    let gamma = match v.get("gamma") {
        Some(g) if !g.is_null() => Matrix::from_json(&alg, g)?,
        _ => Matrix::identity(&alg, mat("v")?.n()),
    };
    let inst = BasedInstance::new(mat("v")?, mat("u")?, cert, gamma)?;
    if let Some(n) = v.get("n") {
        if n.as_u64() != Some(inst.n as u64) {
            return Err(Error::Parse("\"n\" does not match the matrix size".into()));
        }
    }
    if let Some(d) = v.get("delta") {
        if Quaternion::from_json(&alg, d)? != inst.delta {
            return Err(Error::Verification(
                "\"delta\" differs from the certificate target".into(),
            ));
        }
    }
    Ok(inst)
}

/// Appends `{"verified": true, "bound": .., "achieved": ..}` to an object.
pub fn with_report(mut v: Value, bound: u64, achieved: u64) -> Value {
    if let Value::Object(ref mut m) = v {
        m.insert("verified".into(), Value::Bool(true));
        m.insert("bound".into(), json!(bound));
        m.insert("achieved".into(), json!(achieved));
    }
    v
}

pub fn object(entries: Vec<(&str, Value)>) -> Value {
    Value::Object(
        entries
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::make_instance;
    use crate::{Algebra, MatD, Quat, Rat};

    #[test]
    fn quaternion_round_trip() {
        let alg = Algebra::hamilton();
        let q = Quaternion::new(
            &alg,
            Rat::new(1.into(), 2.into()),
            Rat::from_integer((-3).into()),
            Rat::from_integer(0.into()),
            Rat::new(7.into(), 5.into()),
        );
        let v = q.to_json();
        assert_eq!(v, json!(["1/2", "-3", "0", "7/5"]));
        assert_eq!(Quat::from_json(&alg, &v).unwrap(), q);
        assert!(Quat::from_json(&alg, &json!(["1", "2"])).is_err());
        assert!(Quat::from_json(&alg, &json!(["1", "x", "0", "0"])).is_err());
    }

    #[test]
    fn algebra_encodings() {
        let alg = algebra_from_arg::<Rat>("-1, -3").unwrap();
        assert_eq!(algebra_to_json(&alg), json!({ "a": "-1", "b": "-3" }));
        assert_eq!(
            *algebra_from_json::<Rat>(&algebra_to_json(&alg)).unwrap(),
            *alg
        );
        assert!(algebra_from_arg::<Rat>("-1").is_err());
    }

    #[test]
    fn instance_round_trip() {
        let (_, inst) = make_instance(&Algebra::hamilton(), 4, 3, 2).unwrap();
        let back: crate::BasedInstance = instance_from_json(&instance_to_json(&inst)).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn hfactor_indices_are_one_based() {
        let alg = Algebra::hamilton();
        let mut hf = HFactors::new(3);
        hf.push(1, Quat::from_i64(&alg, 1, 1, 0, 0)).unwrap();
        let v = hfactors_to_json(&hf);
        assert_eq!(v[0]["i"], json!(2));
        assert_eq!(hfactors_from_json(&alg, 3, &v).unwrap(), hf);
        assert!(
            hfactors_from_json(&alg, 3, &json!([{ "i": 0, "eps": ["1", "0", "0", "0"] }])).is_err()
        );
    }

    #[test]
    fn matrix_cert_round_trip() {
        let alg = Algebra::hamilton();
        let x = MatD::transvection(2, 0, 1, &Quat::from_i64(&alg, 0, 1, 0, 0)).unwrap();
        let y = MatD::diag(
            &alg,
            &[
                Quat::from_i64(&alg, 0, 0, 1, 0),
                Quat::from_i64(&alg, 1, 0, 0, 0),
            ],
        );
        let cert = CommutatorCert::new(vec![(x.clone(), y.clone())], x.commutator(&y).unwrap());
        let back = cert_from_json::<MatD>(&alg, &cert_to_json(&cert)).unwrap();
        assert_eq!(back, cert);
        assert!(back.verify());
    }
}
