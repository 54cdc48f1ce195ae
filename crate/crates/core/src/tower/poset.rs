//! Finite directed posets of pointed sets and their limits.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::smash::{Label, PointedMap, PointedSet};

/// Nodes `0..n`, a generating relation `lower ≤ upper`, and a diagram with
/// one map `X(upper) → X(lower)` per generating pair.
#[derive(Clone, Debug)]
pub struct FiniteDirectedPoset {
    names: Vec<String>,
    sets: Vec<Arc<PointedSet>>,
    /// `leq[a][b]` iff `a ≤ b`.
    leq: Vec<Vec<bool>>,
    /// Structure map `X(b) → X(a)` for every `a ≤ b`, composed along paths.
    maps: BTreeMap<(usize, usize), PointedMap>,
}

/// `(lower, upper, assignment of X(upper) → X(lower))`.
pub type PosetEdge = (usize, usize, Vec<(Label, Label)>);

impl FiniteDirectedPoset {
    pub fn new(
        nodes: Vec<(String, PointedSet)>,
        edges: Vec<PosetEdge>,
    ) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::InvalidPoset("no nodes".into()));
        }
        let (names, sets): (Vec<String>, Vec<Arc<PointedSet>>) =
            nodes.into_iter().map(|(name, s)| (name, Arc::new(s))).unzip();
        let mut leq = vec![vec![false; n]; n];
        let mut generating: BTreeMap<(usize, usize), PointedMap> = BTreeMap::new();
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (lo, hi, assignment) in edges {
            if lo >= n || hi >= n {
                return Err(Error::InvalidPoset(format!("edge {lo} ≤ {hi} names a missing node")));
            }
            if lo == hi {
                return Err(Error::InvalidPoset(format!("self-edge on {}", names[lo])));
            }
            let map = PointedMap::new(&sets[hi], &sets[lo], assignment)?;
            if generating.insert((lo, hi), map).is_some() {
                return Err(Error::InvalidPoset(format!("edge {lo} ≤ {hi} listed twice")));
            }
            leq[lo][hi] = true;
        }
        // Transitive closure.
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    let above = leq[k].clone();
                    for (cell, up) in leq[i].iter_mut().zip(above) {
                        *cell |= up;
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if leq[i][j] && leq[j][i] {
                    return Err(Error::InvalidPoset(format!(
                        "{} and {} are distinct but each below the other",
                        names[i], names[j]
                    )));
                }
                if !(0..n).any(|u| leq[i][u] && leq[j][u]) {
                    return Err(Error::InvalidPoset(format!(
                        "{} and {} have no upper bound",
                        names[i], names[j]
                    )));
                }
            }
        }
        let mut poset = FiniteDirectedPoset {
            names,
            sets,
            leq,
            maps: BTreeMap::new(),
        };
        poset.compose_maps(&generating)?;
        Ok(poset)
    }

    /// Fills in `X(b) → X(a)` for every `a ≤ b`, requiring every path to agree.
    fn compose_maps(&mut self, generating: &BTreeMap<(usize, usize), PointedMap>) -> Result<()> {
        let n = self.sets.len();
        // Process pairs by increasing number of elements strictly between.
        let mut pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.leq[a][b])
            .collect();
        let between = |a: usize, b: usize, leq: &Vec<Vec<bool>>| (0..n).filter(|&c| leq[a][c] && leq[c][b]).count();
        pairs.sort_by_key(|&(a, b)| between(a, b, &self.leq));
        for (a, b) in pairs {
            if a == b {
                self.maps.insert((a, a), PointedMap::identity(&self.sets[a]));
                continue;
            }
            let mut found: Option<PointedMap> = None;
            for ((lo, hi), edge) in generating {
                // Paths X(b) → X(c) → X(a) whose first step is a generating edge.
                if *hi != b || !self.leq[a][*lo] {
                    continue;
                }
                let rest = self.maps.get(&(a, *lo)).expect("shorter pairs are processed first");
                let candidate = edge.then(rest)?;
                match &found {
                    None => found = Some(candidate),
                    Some(prev) if *prev != candidate => {
                        return Err(Error::InvalidPoset(format!(
                            "diagram is not functorial: two paths {} → {} disagree",
                            self.names[b], self.names[a]
                        )));
                    }
                    Some(_) => {}
                }
            }
            let map = found.ok_or_else(|| {
                Error::InvalidPoset(format!("no path from {} down to {}", self.names[b], self.names[a]))
            })?;
            self.maps.insert((a, b), map);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn set(&self, i: usize) -> &Arc<PointedSet> {
        &self.sets[i]
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    /// The structure map `X(b) → X(a)` for `a ≤ b`.
    pub fn structure_map(&self, a: usize, b: usize) -> Option<&PointedMap> {
        self.maps.get(&(a, b))
    }

    /// The maximum, which every finite directed poset has.
    pub fn maximum(&self) -> usize {
        (0..self.len())
            .find(|&m| (0..self.len()).all(|a| self.leq[a][m]))
            .expect("finite directed posets have a maximum")
    }
}

#[derive(Clone, Debug)]
pub struct PosetLimit {
    /// Labels are those of `X(max)`; each stands for the family it determines.
    pub limit: Arc<PointedSet>,
    pub maximum: usize,
    pub projections: Vec<PointedMap>,
    /// Number of compatible families found by direct enumeration.
    pub families: usize,
}

const FAMILY_CAP: usize = 100_000;

/// `lim D` as compatible families, checked to coincide with `X(max)`.
pub fn finite_poset_limit(d: &FiniteDirectedPoset) -> Result<PosetLimit> {
    let n = d.len();
    let max = d.maximum();
    let mut families: BTreeSet<Vec<Label>> = BTreeSet::new();
    let mut current: Vec<Label> = Vec::with_capacity(n);
    enumerate(d, &mut current, &mut families)?;
    let projections: Vec<PointedMap> = (0..n)
        .map(|a| d.structure_map(a, max).expect("max is above everything").clone())
        .collect();
    let expected: BTreeSet<Vec<Label>> = d
        .set(max)
        .labels()
        .map(|l| projections.iter().map(|p| p.apply(l)).collect())
        .collect();
    if families != expected {
        return Err(Error::InvalidPoset(format!(
            "compatible families ({}) do not match X({}) ({})",
            families.len(),
            d.name(max),
            expected.len()
        )));
    }
    Ok(PosetLimit {
        limit: d.set(max).clone(),
        maximum: max,
        projections,
        families: families.len(),
    })
}

fn enumerate(d: &FiniteDirectedPoset, current: &mut Vec<Label>, out: &mut BTreeSet<Vec<Label>>) -> Result<()> {
    let i = current.len();
    if i == d.len() {
        if out.len() >= FAMILY_CAP {
            return Err(Error::Precondition(format!("more than {FAMILY_CAP} compatible families")));
        }
        out.insert(current.clone());
        return Ok(());
    }
    for l in d.set(i).labels() {
        let consistent = (0..i).all(|j| {
            if d.leq(j, i) {
                d.structure_map(j, i).unwrap().apply(l) == current[j]
            } else if d.leq(i, j) {
                d.structure_map(i, j).unwrap().apply(&current[j]) == *l
            } else {
                true
            }
        });
        if consistent {
            current.push(l.clone());
            enumerate(d, current, out)?;
            current.pop();
        }
    }
    Ok(())
}
