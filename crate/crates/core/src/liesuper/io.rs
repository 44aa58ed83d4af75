//! Structure-constant files.
//!
//! ```text
//! # comment
//! ring even=t:3 odd=tau1,tau2
//! basis E11 even deg=0 wt=1,-1
//! basis E12 odd
//! E11 E12 E12 1
//! 0 3 2 -1/2*tau1
//! ```
//! A bracket line `i j k c` means c is the coefficient of e_k in [e_i, e_j];
//! indices may be labels or 0-based positions. Pairs with i > j are filled
//! by super-antisymmetry unless both orders are listed.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde_json::{json, Value};

use super::{BasisElement, Entry, LieError, SuperLieAlgebra};
use crate::coeff::{ParameterRing, Parity, Scalar};

pub fn to_text(g: &SuperLieAlgebra) -> String {
    let mut s = format!("# {}\n", g.name);
    let r = g.ring();
    if !r.is_rationals() {
        let mut line = String::from("ring");
        if !r.even_params().is_empty() {
            let ev: Vec<String> = r.even_params().iter().map(|(n, k)| format!("{n}:{k}")).collect();
            line.push_str(&format!(" even={}", ev.join(",")));
        }
        if !r.odd_params().is_empty() {
            line.push_str(&format!(" odd={}", r.odd_params().join(",")));
        }
        s.push_str(&line);
        s.push('\n');
    }
    for b in g.basis() {
        s.push_str(&format!("basis {} {}", b.label, b.parity));
        if let Some(d) = b.degree {
            s.push_str(&format!(" deg={d}"));
        }
        if let Some(w) = &b.weight {
            s.push_str(&format!(" wt={}", w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")));
        }
        s.push('\n');
    }
    for i in 0..g.dim() {
        for j in i..g.dim() {
            for (k, c) in g.entry(i, j) {
                s.push_str(&format!("{i} {j} {k} {c}\n"));
            }
        }
    }
    s
}

pub fn from_text(name: &str, text: &str) -> Result<SuperLieAlgebra, LieError> {
    let mut ring = ParameterRing::rationals();
    let mut basis: Vec<BasisElement> = vec![];
    let mut lines: Vec<(usize, String)> = vec![];
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next().unwrap() {
            "ring" => {
                let mut even = vec![];
                let mut odd = vec![];
                for p in parts {
                    if let Some(v) = p.strip_prefix("even=") {
                        for e in v.split(',') {
                            let (n, k) = e.split_once(':').ok_or_else(|| fmt_err(ln, "even parameter needs name:order"))?;
                            even.push((n.to_string(), k.parse().map_err(|_| fmt_err(ln, "bad truncation order"))?));
                        }
                    } else if let Some(v) = p.strip_prefix("odd=") {
                        odd.extend(v.split(',').map(|x| x.to_string()));
                    } else {
                        return Err(fmt_err(ln, "unknown ring field"));
                    }
                }
                ring = ParameterRing::new(even, odd)?;
            }
            "basis" => {
                let label = parts.next().ok_or_else(|| fmt_err(ln, "missing label"))?;
                let parity = match parts.next() {
                    Some("even") | Some("e") | Some("0") => Parity::Even,
                    Some("odd") | Some("o") | Some("1") => Parity::Odd,
                    _ => return Err(fmt_err(ln, "parity must be even or odd")),
                };
                let mut b = BasisElement::new(label, parity);
                for p in parts {
                    if let Some(d) = p.strip_prefix("deg=") {
                        b.degree = Some(d.parse().map_err(|_| fmt_err(ln, "bad degree"))?);
                    } else if let Some(w) = p.strip_prefix("wt=") {
                        let w: Result<Vec<i64>, _> = w.split(',').map(|x| x.parse()).collect();
                        b.weight = Some(w.map_err(|_| fmt_err(ln, "bad weight"))?);
                    } else {
                        return Err(fmt_err(ln, "unknown basis field"));
                    }
                }
                basis.push(b);
            }
            _ => lines.push((ln, line.to_string())),
        }
    }
    let idx: HashMap<String, usize> = basis.iter().enumerate().map(|(i, b)| (b.label.clone(), i)).collect();
    let resolve = |ln: usize, s: &str| -> Result<usize, LieError> {
        if let Some(i) = idx.get(s) {
            return Ok(*i);
        }
        match s.parse::<usize>() {
            Ok(i) if i < basis.len() => Ok(i),
            _ => Err(fmt_err(ln, &format!("unknown basis element `{s}`"))),
        }
    };
    let mut given: BTreeMap<(usize, usize), Entry> = BTreeMap::new();
    for (ln, line) in lines {
        let mut parts = line.splitn(4, char::is_whitespace);
        let i = resolve(ln, parts.next().unwrap_or(""))?;
        let j = resolve(ln, parts.next().unwrap_or("").trim())?;
        let k = resolve(ln, parts.next().unwrap_or("").trim())?;
        let c = Scalar::parse(&ring, parts.next().unwrap_or("").trim())?;
        given.entry((i, j)).or_default().push((k, c));
    }
    Ok(assemble(name, &ring, basis, given))
}

fn assemble(name: &str, ring: &Arc<ParameterRing>, basis: Vec<BasisElement>, given: BTreeMap<(usize, usize), Entry>) -> SuperLieAlgebra {
    let n = basis.len();
    let mut table = vec![vec![Entry::new(); n]; n];
    for ((i, j), e) in &given {
        table[*i][*j] = e.clone();
        if i != j && !given.contains_key(&(*j, *i)) {
            let s = basis[*i].parity.sign_with(basis[*j].parity);
            table[*j][*i] = e.iter().map(|(k, c)| (*k, c.scale(&crate::coeff::q(-s)))).collect();
        }
    }
    SuperLieAlgebra::from_full_table(name, ring, basis, table)
}

fn fmt_err(ln: usize, msg: &str) -> LieError {
    LieError::Format(format!("line {}: {msg}", ln + 1))
}

pub fn to_json(g: &SuperLieAlgebra) -> Value {
    let r = g.ring();
    let mut brackets = vec![];
    for i in 0..g.dim() {
        for j in i..g.dim() {
            for (k, c) in g.entry(i, j) {
                brackets.push(json!([i, j, k, c.to_string()]));
            }
        }
    }
    json!({
        "name": g.name,
        "ring": {
            "even": r.even_params().iter().map(|(n, k)| json!([n, k])).collect::<Vec<_>>(),
            "odd": r.odd_params(),
        },
        "basis": g.basis(),
        "brackets": brackets,
        "notes": g.notes,
    })
}

pub fn from_json(v: &Value) -> Result<SuperLieAlgebra, LieError> {
    let err = |m: &str| LieError::Format(m.to_string());
    let name = v["name"].as_str().unwrap_or("algebra");
    let mut even = vec![];
    if let Some(arr) = v["ring"]["even"].as_array() {
        for e in arr {
            let n = e[0].as_str().ok_or_else(|| err("ring.even name"))?;
            let k = e[1].as_u64().ok_or_else(|| err("ring.even order"))?;
            even.push((n.to_string(), k as u32));
        }
    }
    let odd: Vec<String> = v["ring"]["odd"]
        .as_array()
        .map(|a| a.iter().filter_map(|x| x.as_str().map(String::from)).collect())
        .unwrap_or_default();
    let ring = ParameterRing::new(even, odd)?;
    let basis: Vec<BasisElement> = serde_json::from_value(v["basis"].clone()).map_err(|e| err(&e.to_string()))?;
    let mut given: BTreeMap<(usize, usize), Entry> = BTreeMap::new();
    for b in v["brackets"].as_array().ok_or_else(|| err("brackets"))? {
        let i = b[0].as_u64().ok_or_else(|| err("bracket index"))? as usize;
        let j = b[1].as_u64().ok_or_else(|| err("bracket index"))? as usize;
        let k = b[2].as_u64().ok_or_else(|| err("bracket index"))? as usize;
        if i >= basis.len() || j >= basis.len() || k >= basis.len() {
            return Err(err("bracket index out of range"));
        }
        let c = Scalar::parse(&ring, b[3].as_str().ok_or_else(|| err("bracket coefficient"))?)?;
        given.entry((i, j)).or_default().push((k, c));
    }
    let mut g = assemble(name, &ring, basis, given);
    if let Some(notes) = v["notes"].as_array() {
        g.notes = notes.iter().filter_map(|x| x.as_str().map(String::from)).collect();
    }
    Ok(g)
}
