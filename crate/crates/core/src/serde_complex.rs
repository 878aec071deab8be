//! JSON encoding of complex numbers as [re, im].

use serde::de::Deserializer;
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::scalar::C64;

pub fn one<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn vec<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

pub fn matrix<S: Serializer>(m: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = m.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect();
    rows.serialize(s)
}

pub fn de_one<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
    let [re, im] = <[f64; 2]>::deserialize(d)?;
    Ok(C64::new(re, im))
}

pub fn de_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
    let v = Vec::<[f64; 2]>::deserialize(d)?;
    Ok(v.into_iter().map(|[re, im]| C64::new(re, im)).collect())
}

pub fn de_matrix<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C64>>, D::Error> {
    let v = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
    Ok(v.into_iter().map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect()).collect())
}
