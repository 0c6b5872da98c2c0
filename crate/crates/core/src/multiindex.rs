//! Finitely supported multi-indices and the index sets built from them.
//!
//! Dimensions are 1-based. A [`MultiIndex`] only stores its nonzero entries,
//! so the zero index is the empty vector. Sets are kept in graded
//! lexicographic order: first by total degree, then by comparing
//! coordinates `1, 2, ...` with the larger entry first, which gives
//! `0 < e1 < e2 < ... < 2e1 < e1+e2 < ...`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MultiIndex {
    entries: Vec<(usize, u32)>,
}

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Unit vector `e_j`.
    pub fn unit(j: usize) -> Self {
        assert!(j >= 1, "dimensions are 1-based");
        Self {
            entries: vec![(j, 1)],
        }
    }

    /// Builds from `(dimension, value)` pairs; zero values are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u32)>) -> Result<Self> {
        let mut entries: Vec<(usize, u32)> = pairs.into_iter().filter(|&(_, v)| v > 0).collect();
        entries.sort_unstable_by_key(|&(j, _)| j);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return invalid(format!("dimension {} listed twice", w[0].0));
            }
        }
        if entries.first().is_some_and(|&(j, _)| j == 0) {
            return invalid("dimensions are 1-based");
        }
        Ok(Self { entries })
    }

    /// Builds from a dense vector `(ν_1, ν_2, ...)`.
    pub fn from_dense(dense: &[u32]) -> Self {
        Self {
            entries: dense
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .map(|(i, &v)| (i + 1, v))
                .collect(),
        }
    }

    pub fn get(&self, j: usize) -> u32 {
        self.entries
            .binary_search_by_key(&j, |&(d, _)| d)
            .map(|k| self.entries[k].1)
            .unwrap_or(0)
    }

    /// Nonzero `(dimension, value)` pairs in increasing dimension.
    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(j, _)| j)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn l0(&self) -> usize {
        self.entries.len()
    }

    pub fn l1(&self) -> u64 {
        self.entries.iter().map(|&(_, v)| v as u64).sum()
    }

    /// Largest dimension in the support, 0 for the zero index.
    pub fn max_dim(&self) -> usize {
        self.entries.last().map_or(0, |&(j, _)| j)
    }

    /// `∏_{k ∈ supp ν} (ν_k + 1)`.
    pub fn hc_product(&self) -> u64 {
        self.entries.iter().map(|&(_, v)| v as u64 + 1).product()
    }

    pub fn to_dense(&self, n: usize) -> Vec<u32> {
        let mut out = vec![0; n];
        for &(j, v) in &self.entries {
            if j <= n {
                out[j - 1] = v;
            }
        }
        out
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.entries.iter().all(|&(j, v)| other.get(j) >= v)
    }

    pub fn add_unit(&self, j: usize) -> Self {
        self.with_value(j, self.get(j) + 1)
    }

    /// `self - e_j`, or `None` when `ν_j = 0`.
    pub fn sub_unit(&self, j: usize) -> Option<Self> {
        match self.get(j) {
            0 => None,
            v => Some(self.with_value(j, v - 1)),
        }
    }

    fn with_value(&self, j: usize, v: u32) -> Self {
        let mut entries = self.entries.clone();
        match entries.binary_search_by_key(&j, |&(d, _)| d) {
            Ok(k) if v == 0 => {
                entries.remove(k);
            }
            Ok(k) => entries[k].1 = v,
            Err(_) if v == 0 => {}
            Err(k) => entries.insert(k, (j, v)),
        }
        Self { entries }
    }

    /// All `μ ≤ ν` componentwise, including `ν` itself.
    pub fn lower_neighbours_closure(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero()];
        for &(j, v) in &self.entries {
            let mut next = Vec::with_capacity(out.len() * (v as usize + 1));
            for mu in &out {
                for w in 0..=v {
                    next.push(mu.with_value(j, w));
                }
            }
            out = next;
        }
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.l1().cmp(&other.l1()).then_with(|| {
            // walk both supports in increasing dimension; the first
            // dimension where they differ decides, larger entry first
            let (a, b) = (&self.entries, &other.entries);
            let (mut i, mut k) = (0, 0);
            loop {
                match (a.get(i), b.get(k)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Less,
                    (None, Some(_)) => return Ordering::Greater,
                    (Some(&(ja, va)), Some(&(jb, vb))) => {
                        if ja < jb {
                            return Ordering::Less;
                        }
                        if jb < ja {
                            return Ordering::Greater;
                        }
                        if va != vb {
                            return vb.cmp(&va);
                        }
                        i += 1;
                        k += 1;
                    }
                }
            }
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &(j, v) in &self.entries {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{j}:{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for tok in s.split_whitespace() {
            let (j, v) = tok
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected j:v, got {tok:?}")))?;
            let j: usize = j.parse().map_err(|_| Error::Parse(format!("bad dimension {j:?}")))?;
            let v: u32 = v.parse().map_err(|_| Error::Parse(format!("bad value {v:?}")))?;
            if v == 0 {
                return Err(Error::Parse(format!("zero entry stored in {tok:?}")));
            }
            pairs.push((j, v));
        }
        Self::from_pairs(pairs)
    }
}

impl TryFrom<String> for MultiIndex {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MultiIndex> for String {
    fn from(nu: MultiIndex) -> String {
        nu.to_string()
    }
}

/// Ordered set of distinct multi-indices with O(1) position lookup.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(from = "Vec<MultiIndex>", into = "Vec<MultiIndex>")]
pub struct IndexSet {
    members: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl IndexSet {
    pub fn new(members: impl IntoIterator<Item = MultiIndex>) -> Self {
        let sorted: BTreeSet<MultiIndex> = members.into_iter().collect();
        let members: Vec<MultiIndex> = sorted.into_iter().collect();
        let position = members.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Self { members, position }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[MultiIndex] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.members.iter()
    }

    pub fn contains(&self, nu: &MultiIndex) -> bool {
        self.position.contains_key(nu)
    }

    pub fn position(&self, nu: &MultiIndex) -> Option<usize> {
        self.position.get(nu).copied()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.members.iter().all(|nu| other.contains(nu))
    }

    /// Largest dimension touched by any member.
    pub fn max_dim(&self) -> usize {
        self.members.iter().map(MultiIndex::max_dim).max().unwrap_or(0)
    }

    /// One multi-index per line, `j1:v1 j2:v2 ...`; the zero index is an empty line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for nu in &self.members {
            s.push_str(&nu.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut members = Vec::new();
        let mut seen = HashSet::new();
        for line in text.lines() {
            let nu: MultiIndex = line.parse()?;
            if !seen.insert(nu.clone()) {
                return Err(Error::Parse(format!("duplicate multi-index {nu:?}")));
            }
            members.push(nu);
        }
        Ok(Self::new(members))
    }
}

impl PartialEq for IndexSet {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

impl Eq for IndexSet {}

impl From<Vec<MultiIndex>> for IndexSet {
    fn from(v: Vec<MultiIndex>) -> Self {
        Self::new(v)
    }
}

impl From<IndexSet> for Vec<MultiIndex> {
    fn from(s: IndexSet) -> Self {
        s.members
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;
    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// Hyperbolic cross `{ν : ∏(ν_k+1) ≤ n, supp ν ⊆ [n]}`.
pub fn hci_index_set(n: usize) -> Result<IndexSet> {
    hci_index_set_with_dim(n, n)
}

/// Hyperbolic cross with product budget `n` truncated to dimensions `1..=d`.
///
/// `d = n` is the standard set; any other `d` is an experimental variant
/// whose approximation guarantees are not known.
pub fn hci_index_set_with_dim(n: usize, d: usize) -> Result<IndexSet> {
    if n == 0 {
        return invalid("hyperbolic cross budget n must be at least 1");
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    descend(n as u64, d, 1, 1, &mut current, &mut out);
    Ok(IndexSet::new(out))
}

fn descend(
    budget: u64,
    d: usize,
    start: usize,
    prod: u64,
    current: &mut Vec<(usize, u32)>,
    out: &mut Vec<MultiIndex>,
) {
    out.push(MultiIndex {
        entries: current.clone(),
    });
    for j in start..=d {
        // a new nonzero coordinate costs at least a factor 2
        if prod * 2 > budget {
            break;
        }
        let mut v = 1u32;
        while prod * (v as u64 + 1) <= budget {
            current.push((j, v));
            descend(budget, d, j + 1, prod * (v as u64 + 1), current, out);
            current.pop();
            v += 1;
        }
    }
}

/// Upper bound `e·n^{2 + ln n / ln 2}` on `|hci_index_set(n)|`.
pub fn hci_size_bound(n: usize) -> f64 {
    let n = n as f64;
    std::f64::consts::E * n.powf(2.0 + n.ln() / std::f64::consts::LN_2)
}

pub fn is_lower(set: &IndexSet) -> bool {
    set.iter()
        .all(|nu| nu.lower_neighbours_closure().iter().all(|mu| set.contains(mu)))
}

pub fn is_anchored(set: &IndexSet) -> bool {
    if !is_lower(set) {
        return false;
    }
    let top_unit = set
        .iter()
        .filter(|nu| nu.l1() == 1)
        .map(MultiIndex::max_dim)
        .max()
        .unwrap_or(0);
    (1..=top_unit).all(|j| set.contains(&MultiIndex::unit(j)))
}

/// Smallest anchored set containing `set`.
pub fn anchored_closure(set: &IndexSet) -> IndexSet {
    let mut members: HashSet<MultiIndex> = HashSet::new();
    for nu in set {
        members.extend(nu.lower_neighbours_closure());
    }
    members.insert(MultiIndex::zero());
    let top = members
        .iter()
        .filter(|nu| nu.l1() == 1)
        .map(MultiIndex::max_dim)
        .max()
        .unwrap_or(0);
    members.extend((1..=top).map(MultiIndex::unit));
    IndexSet::new(members)
}

pub const ANCHORED_SIZE_LIMIT: usize = 8;
pub const ANCHORED_DIM_LIMIT: usize = 6;

/// Every anchored set of cardinality at most `size_limit` supported in
/// `[dim_limit]`, in a deterministic order (by size, then members).
pub fn enumerate_anchored_sets(size_limit: usize, dim_limit: usize) -> Result<Vec<IndexSet>> {
    if size_limit > ANCHORED_SIZE_LIMIT {
        return Err(Error::OracleScaleExceeded {
            size: size_limit,
            limit: ANCHORED_SIZE_LIMIT,
        });
    }
    if dim_limit > ANCHORED_DIM_LIMIT {
        return Err(Error::OracleScaleExceeded {
            size: dim_limit,
            limit: ANCHORED_DIM_LIMIT,
        });
    }
    if size_limit == 0 {
        return Ok(Vec::new());
    }
    // every anchored set can be peeled down to {0} through anchored sets,
    // so growing by one addable element at a time reaches all of them
    let mut found: BTreeSet<Vec<MultiIndex>> = BTreeSet::new();
    let mut frontier: Vec<Vec<MultiIndex>> = vec![vec![MultiIndex::zero()]];
    found.insert(frontier[0].clone());
    for _ in 1..size_limit {
        let mut next = Vec::new();
        for members in &frontier {
            let set = IndexSet::new(members.iter().cloned());
            for cand in addable(&set, dim_limit) {
                let mut grown = members.clone();
                grown.push(cand);
                grown.sort();
                if found.insert(grown.clone()) {
                    next.push(grown);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<IndexSet> = found.into_iter().map(IndexSet::new).collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.members().cmp(b.members())));
    debug_assert!(out.iter().all(is_anchored));
    Ok(out)
}

/// Multi-indices whose insertion keeps `set` anchored, restricted to `[dim_limit]`.
pub fn addable(set: &IndexSet, dim_limit: usize) -> Vec<MultiIndex> {
    let top_unit = set
        .iter()
        .filter(|nu| nu.l1() == 1)
        .map(MultiIndex::max_dim)
        .max()
        .unwrap_or(0);
    let mut cands: BTreeSet<MultiIndex> = BTreeSet::new();
    for nu in set {
        for j in 1..=dim_limit {
            let mu = nu.add_unit(j);
            if set.contains(&mu) {
                continue;
            }
            if mu.l1() == 1 && j != top_unit + 1 {
                continue;
            }
            let lower_ok = mu
                .support()
                .all(|k| mu.sub_unit(k).is_some_and(|low| set.contains(&low)));
            if lower_ok {
                cands.insert(mu);
            }
        }
    }
    cands.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(dense: &[&[u32]]) -> IndexSet {
        IndexSet::new(dense.iter().map(|d| MultiIndex::from_dense(d)))
    }

    #[test]
    fn hci_small_cases() {
        assert_eq!(hci_index_set(1).unwrap().len(), 1);
        let s2 = hci_index_set(2).unwrap();
        assert_eq!(s2, set(&[&[0, 0], &[1, 0], &[0, 1]]));
        assert_eq!(hci_index_set(4).unwrap().len(), 19);
        assert!(hci_index_set(0).is_err());
    }

    #[test]
    fn canonical_order() {
        let s = hci_index_set(3).unwrap();
        let text: Vec<String> = s.iter().map(|m| m.to_string()).collect();
        assert_eq!(text, ["", "1:1", "2:1", "3:1", "1:2", "2:2", "3:2"]);
        let a = MultiIndex::from_dense(&[1, 1]);
        let b = MultiIndex::from_dense(&[2, 0]);
        let c = MultiIndex::from_dense(&[0, 2]);
        assert!(b < a && a < c);
    }

    #[test]
    fn lower_and_anchored_examples() {
        assert!(is_lower(&set(&[&[0], &[1]])));
        assert!(!is_lower(&set(&[&[0, 1]])));
        assert!(is_lower(&hci_index_set(4).unwrap()));
        assert!(is_anchored(&set(&[&[0], &[1]])));
        assert!(!is_anchored(&set(&[&[0, 0], &[0, 1]])));
        assert!(is_anchored(&hci_index_set(3).unwrap()));
    }

    #[test]
    fn anchored_enumeration_examples() {
        let one = enumerate_anchored_sets(1, 2).unwrap();
        assert_eq!(one, vec![set(&[&[0]])]);
        let two = enumerate_anchored_sets(2, 1).unwrap();
        assert_eq!(two, vec![set(&[&[0]]), set(&[&[0], &[1]])]);
        assert!(matches!(
            enumerate_anchored_sets(9, 2),
            Err(Error::OracleScaleExceeded { .. })
        ));
    }

    #[test]
    fn text_roundtrip() {
        let s = hci_index_set(5).unwrap();
        let back = IndexSet::from_text(&s.to_text()).unwrap();
        assert_eq!(s, back);
        assert!("1:0".parse::<MultiIndex>().is_err());
        assert!(IndexSet::from_text("1:1\n1:1\n").is_err());
    }

    #[test]
    fn closure_is_anchored() {
        let s = set(&[&[0, 0, 1], &[2, 1, 0]]);
        let c = anchored_closure(&s);
        assert!(is_anchored(&c));
        assert!(s.is_subset(&c));
    }
}
