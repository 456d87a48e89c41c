//! Exact count tables tagged with where the numbers came from.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Labeling {
    Vertex,
    Leaf,
}

/// Which networks are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    All,
    NoMult,
    Mult,
    TreeChild,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Series,
    ClosedForm,
    Oracle,
}

impl fmt::Display for Labeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Labeling::Vertex => "vertex",
            Labeling::Leaf => "leaf",
        })
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selection::All => "all",
            Selection::NoMult => "no-mult",
            Selection::Mult => "mult",
            Selection::TreeChild => "tree-child",
        })
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Series => "series",
            Provenance::ClosedForm => "closed-form",
            Provenance::Oracle => "oracle",
        })
    }
}

/// `size` is `n` for vertex-labelled rows and `l` for leaf-labelled rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountKey {
    pub k: u32,
    pub labeling: Labeling,
    pub selection: Selection,
    pub size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountRow {
    pub k: u32,
    pub labeling: Labeling,
    pub stratum: Selection,
    pub size: usize,
    pub count: String,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CountTable {
    entries: BTreeMap<CountKey, (BigInt, Provenance)>,
}

/// A value that should be a count was not an integer.
#[derive(Debug, thiserror::Error)]
#[error("{key:?}: {value} is not an integer")]
pub struct NotACount {
    pub key: CountKey,
    pub value: BigRational,
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: CountKey, count: BigInt, provenance: Provenance) {
        self.entries.insert(key, (count, provenance));
    }

    /// Inserts a rational that must be integral.
    pub fn insert_rational(&mut self, key: CountKey, value: &BigRational, provenance: Provenance) -> Result<(), NotACount> {
        if !value.is_integer() {
            return Err(NotACount { key, value: value.clone() });
        }
        self.insert(key, value.to_integer(), provenance);
        Ok(())
    }

    pub fn get(&self, key: &CountKey) -> Option<&BigInt> {
        self.entries.get(key).map(|(c, _)| c)
    }

    pub fn provenance(&self, key: &CountKey) -> Option<Provenance> {
        self.entries.get(key).map(|(_, p)| *p)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CountKey, &BigInt, Provenance)> {
        self.entries.iter().map(|(k, (c, p))| (k, c, *p))
    }

    pub fn extend(&mut self, other: CountTable) {
        self.entries.extend(other.entries);
    }

    pub fn rows(&self) -> Vec<CountRow> {
        self.iter()
            .map(|(key, c, p)| CountRow {
                k: key.k,
                labeling: key.labeling,
                stratum: key.selection,
                size: key.size,
                count: c.to_string(),
                provenance: p,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows()).expect("rows serialise")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in self.rows() {
            w.serialize(r).expect("rows serialise");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(size: usize) -> CountKey {
        CountKey { k: 1, labeling: Labeling::Vertex, selection: Selection::All, size }
    }

    #[test]
    fn csv_has_header_and_decimal_counts() {
        let mut t = CountTable::new();
        t.insert(key(5), BigInt::from(300), Provenance::Series);
        t.insert(key(3), BigInt::from(6), Provenance::Oracle);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,labeling,stratum,size,count,provenance");
        assert_eq!(lines[1], "1,vertex,all,3,6,oracle");
        assert_eq!(lines[2], "1,vertex,all,5,300,series");
    }

    #[test]
    fn fractions_are_refused() {
        let mut t = CountTable::new();
        let half = BigRational::new(1.into(), 2.into());
        assert!(t.insert_rational(key(3), &half, Provenance::Series).is_err());
        assert!(t.is_empty());
    }
}
