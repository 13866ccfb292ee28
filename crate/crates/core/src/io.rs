//! JSON form of atom structures.
//!
//! Cylindric structures list, for each index, the classes of the
//! cylindrifier relation. Relation structures list their consistent
//! triples. Atoms are referred to by name throughout.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::atomset::AtomSet;
use crate::error::{structural, Error, Result};
use crate::structures::{AtomId, CaAtomStructure, RaAtomStructure};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagJson {
    pub i: usize,
    pub j: usize,
    pub atoms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StructureJson {
    Ca {
        n: usize,
        atoms: Vec<String>,
        /// Off-diagonal entries only; `d_ii` is everything.
        diag: Vec<DiagJson>,
        /// `cyl[i]` lists the classes of the `i`-th cylindrifier relation.
        cyl: Vec<Vec<Vec<String>>>,
    },
    Ra {
        atoms: Vec<String>,
        identity: Vec<String>,
        converse: BTreeMap<String, String>,
        consistent: Vec<[String; 3]>,
    },
}

#[derive(Debug, Clone)]
pub enum Structure {
    Ca(CaAtomStructure),
    Ra(RaAtomStructure),
}

fn name_index(names: &[String]) -> Result<HashMap<&str, AtomId>> {
    let mut idx = HashMap::with_capacity(names.len());
    for (k, n) in names.iter().enumerate() {
        if idx.insert(n.as_str(), k).is_some() {
            return structural(format!("duplicate atom name {n:?}"));
        }
    }
    Ok(idx)
}

fn lookup(idx: &HashMap<&str, AtomId>, name: &str) -> Result<AtomId> {
    idx.get(name)
        .copied()
        .ok_or_else(|| Error::Structural(format!("unknown atom {name:?}")))
}

fn names_of(s: &CaAtomStructure, x: &AtomSet) -> Vec<String> {
    x.iter().map(|a| s.name(a).to_string()).collect()
}

pub fn ca_to_json(s: &CaAtomStructure) -> StructureJson {
    let n = s.dim();
    let mut diag = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                diag.push(DiagJson {
                    i,
                    j,
                    atoms: names_of(s, s.diag(i, j)),
                });
            }
        }
    }
    let cyl = (0..n)
        .map(|i| {
            let mut rows: Vec<&AtomSet> = (0..s.len()).map(|a| s.cyl_row(i, a)).collect();
            rows.sort();
            rows.dedup();
            rows.into_iter().map(|r| names_of(s, r)).collect()
        })
        .collect();
    StructureJson::Ca {
        n,
        atoms: s.names().to_vec(),
        diag,
        cyl,
    }
}

pub fn ra_to_json(r: &RaAtomStructure) -> StructureJson {
    StructureJson::Ra {
        atoms: r.names().to_vec(),
        identity: r.identity().iter().map(|a| r.name(a).to_string()).collect(),
        converse: (0..r.len())
            .map(|a| (r.name(a).to_string(), r.name(r.converse(a)).to_string()))
            .collect(),
        consistent: r
            .triples()
            .map(|(a, b, c)| [r.name(a).to_string(), r.name(b).to_string(), r.name(c).to_string()])
            .collect(),
    }
}

impl StructureJson {
    pub fn into_structure(self) -> Result<Structure> {
        match self {
            StructureJson::Ca { n, atoms, diag, cyl } => {
                let k = atoms.len();
                let idx = name_index(&atoms)?;
                let mut d = vec![AtomSet::empty(k); n * n];
                for i in 0..n {
                    d[i * n + i] = AtomSet::full(k);
                }
                for e in diag {
                    if e.i >= n || e.j >= n {
                        return Err(Error::Index {
                            index: e.i.max(e.j),
                            bound: n,
                        });
                    }
                    if e.i == e.j {
                        continue;
                    }
                    for a in &e.atoms {
                        d[e.i * n + e.j].insert(lookup(&idx, a)?);
                    }
                }
                if cyl.len() != n {
                    return structural(format!("{} cylindrifier tables for dimension {n}", cyl.len()));
                }
                let mut rows = vec![vec![AtomSet::empty(k); k]; n];
                for (i, classes) in cyl.iter().enumerate() {
                    for class in classes {
                        let set = AtomSet::from_iter(
                            k,
                            class.iter().map(|a| lookup(&idx, a)).collect::<Result<Vec<_>>>()?,
                        );
                        for a in set.iter() {
                            rows[i][a].union_with(&set);
                        }
                    }
                }
                Ok(Structure::Ca(CaAtomStructure::new(n, atoms, d, rows)?))
            }
            StructureJson::Ra {
                atoms,
                identity,
                converse,
                consistent,
            } => {
                let k = atoms.len();
                let idx = name_index(&atoms)?;
                let id = AtomSet::from_iter(
                    k,
                    identity.iter().map(|a| lookup(&idx, a)).collect::<Result<Vec<_>>>()?,
                );
                let mut conv = Vec::with_capacity(k);
                for a in &atoms {
                    let c = converse
                        .get(a)
                        .ok_or_else(|| Error::Structural(format!("no converse for {a:?}")))?;
                    conv.push(lookup(&idx, c)?);
                }
                let ts = consistent
                    .iter()
                    .map(|[a, b, c]| Ok((lookup(&idx, a)?, lookup(&idx, b)?, lookup(&idx, c)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Structure::Ra(RaAtomStructure::new(atoms, id, conv, ts)?))
            }
        }
    }
}

pub fn parse_structure(text: &str) -> Result<Structure> {
    let j: StructureJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    j.into_structure()
}

pub fn structure_to_json(s: &Structure) -> StructureJson {
    match s {
        Structure::Ca(c) => ca_to_json(c),
        Structure::Ra(r) => ra_to_json(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::maddux_ek23;

    #[test]
    fn one_atom_round_trip() {
        let s = CaAtomStructure::one_atom(3);
        let text = serde_json::to_string(&ca_to_json(&s)).unwrap();
        let Structure::Ca(back) = parse_structure(&text).unwrap() else {
            panic!("kind changed")
        };
        assert_eq!(ca_to_json(&back), ca_to_json(&s));
    }

    #[test]
    fn maddux_round_trip() {
        let r = maddux_ek23(3).unwrap();
        let text = serde_json::to_string(&ra_to_json(&r)).unwrap();
        let Structure::Ra(back) = parse_structure(&text).unwrap() else {
            panic!("kind changed")
        };
        assert_eq!(back, r);
    }

    #[test]
    fn unknown_atom_is_structural() {
        let text = r#"{"kind":"ca","n":3,"atoms":["a"],"diag":[{"i":0,"j":1,"atoms":["b"]}],"cyl":[[["a"]],[["a"]],[["a"]]]}"#;
        assert!(matches!(parse_structure(text), Err(Error::Structural(_))));
    }

    #[test]
    fn garbage_is_parse_error() {
        assert!(matches!(parse_structure("{"), Err(Error::Parse(_))));
    }
}
