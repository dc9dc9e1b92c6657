use serde::{Deserialize, Serialize};

use super::BitSet;
use crate::error::{Error, Result};

/// A finite partial order given by its labelled elements and cover pairs.
///
/// The order is the reflexive-transitive closure of the covers. Construction
/// rejects cyclic cover relations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PosetRepr", into = "PosetRepr")]
pub struct FinitePoset {
    elements: Vec<String>,
    covers: Vec<(usize, usize)>,
    /// `down[i]` is the principal downset of `i`, including `i`.
    down: Vec<BitSet>,
    /// Elements in an order compatible with the partial order.
    linear: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PosetRepr {
    elements: Vec<String>,
    #[serde(default)]
    covers: Vec<(String, String)>,
}

impl TryFrom<PosetRepr> for FinitePoset {
    type Error = Error;

    fn try_from(repr: PosetRepr) -> Result<Self> {
        let index = |label: &str| {
            repr.elements
                .iter()
                .position(|e| e == label)
                .ok_or_else(|| Error::InvalidDescriptor(format!("unknown poset element `{label}`")))
        };
        let covers = repr
            .covers
            .iter()
            .map(|(lo, hi)| Ok((index(lo)?, index(hi)?)))
            .collect::<Result<Vec<_>>>()?;
        FinitePoset::new(repr.elements, covers)
    }
}

impl From<FinitePoset> for PosetRepr {
    fn from(p: FinitePoset) -> Self {
        let covers = p
            .covers
            .iter()
            .map(|&(lo, hi)| (p.elements[lo].clone(), p.elements[hi].clone()))
            .collect();
        PosetRepr {
            elements: p.elements,
            covers,
        }
    }
}

impl FinitePoset {
    pub fn new(elements: Vec<String>, covers: Vec<(usize, usize)>) -> Result<Self> {
        let n = elements.len();
        for (i, e) in elements.iter().enumerate() {
            if elements[..i].contains(e) {
                return Err(Error::InvalidDescriptor(format!("duplicate poset element `{e}`")));
            }
        }
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(lo, hi) in &covers {
            if lo >= n || hi >= n {
                return Err(Error::InvalidDescriptor(format!(
                    "cover ({lo}, {hi}) out of range for {n} elements"
                )));
            }
            if lo == hi {
                return Err(Error::InvalidDescriptor(format!("reflexive cover on element {lo}")));
            }
            preds[hi].push(lo);
        }

        // Kahn's algorithm; leftover elements mean a cycle.
        let mut indegree: Vec<usize> = preds.iter().map(Vec::len).collect();
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(lo, hi) in &covers {
            succs[lo].push(hi);
        }
        let mut ready: Vec<usize> = (0..n).rev().filter(|&i| indegree[i] == 0).collect();
        let mut linear = Vec::with_capacity(n);
        while let Some(i) = ready.pop() {
            linear.push(i);
            for &j in &succs[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(j);
                }
            }
        }
        if linear.len() != n {
            return Err(Error::InvalidDescriptor("cover relation contains a cycle".into()));
        }

        let mut down = vec![BitSet::new(); n];
        for &i in &linear {
            let mut d = BitSet::from_indices([i]);
            for &p in &preds[i] {
                d = d.union(&down[p]);
            }
            down[i] = d;
        }
        Ok(FinitePoset {
            elements,
            covers,
            down,
            linear,
        })
    }

    /// A poset with no order relations between its elements.
    pub fn antichain<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(labels.into_iter().map(Into::into).collect(), Vec::new())
    }

    /// A totally ordered poset `labels[0] < labels[1] < ...`.
    pub fn chain<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let elements: Vec<String> = labels.into_iter().map(Into::into).collect();
        let covers = (1..elements.len()).map(|i| (i - 1, i)).collect();
        Self::new(elements, covers)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == label)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.down[b].contains(a)
    }

    pub fn principal_downset(&self, i: usize) -> &BitSet {
        &self.down[i]
    }

    pub fn is_downset(&self, s: &BitSet) -> bool {
        s.bound() <= self.len() && s.iter().all(|i| self.down[i].is_subset(s))
    }

    pub fn downclosure(&self, s: &BitSet) -> BitSet {
        s.iter()
            .filter(|&i| i < self.len())
            .fold(BitSet::new(), |acc, i| acc.union(&self.down[i]))
    }

    /// Maximal elements of a downset.
    pub fn maximal_in(&self, s: &BitSet) -> BitSet {
        s.iter()
            .filter(|&i| !s.iter().any(|j| j != i && self.leq(i, j)))
            .collect()
    }

    /// Minimal elements of the complement of a downset.
    pub fn minimal_outside(&self, s: &BitSet) -> BitSet {
        (0..self.len())
            .filter(|&i| !s.contains(i))
            .filter(|&i| self.down[i].iter().all(|j| j == i || s.contains(j)))
            .collect()
    }

    /// All downsets, in no particular order.
    pub fn downsets(&self) -> Vec<BitSet> {
        let mut out = Vec::new();
        self.extend_downsets(0, BitSet::new(), &mut out);
        out
    }

    fn extend_downsets(&self, pos: usize, current: BitSet, out: &mut Vec<BitSet>) {
        if pos == self.linear.len() {
            out.push(current);
            return;
        }
        let i = self.linear[pos];
        // `i` may join only if everything strictly below it is already in.
        let below_ok = self.down[i].iter().all(|j| j == i || current.contains(j));
        if below_ok {
            let mut with = current.clone();
            with.insert(i);
            self.extend_downsets(pos + 1, with, out);
        }
        self.extend_downsets(pos + 1, current, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_cycles() {
        let err = FinitePoset::new(vec!["a".into(), "b".into()], vec![(0, 1), (1, 0)]);
        assert!(err.is_err());
    }

    #[test]
    fn transitive_order() {
        let p = FinitePoset::chain(["a", "b", "c"]).unwrap();
        assert!(p.leq(0, 2));
        assert!(!p.leq(2, 0));
        assert_eq!(p.downclosure(&BitSet::from_indices([1])), BitSet::from_indices([0, 1]));
    }

    #[test]
    fn downset_counts() {
        assert_eq!(FinitePoset::antichain(["p", "q"]).unwrap().downsets().len(), 4);
        assert_eq!(FinitePoset::chain(["a", "b", "c"]).unwrap().downsets().len(), 4);
        assert_eq!(
            FinitePoset::antichain(Vec::<String>::new()).unwrap().downsets(),
            vec![BitSet::new()]
        );
        // Diamond: bottom < l, r < top has 6 downsets.
        let diamond = FinitePoset::new(
            vec!["b".into(), "l".into(), "r".into(), "t".into()],
            vec![(0, 1), (0, 2), (1, 3), (2, 3)],
        )
        .unwrap();
        assert_eq!(diamond.downsets().len(), 6);
    }

    #[test]
    fn boundary_helpers() {
        let p = FinitePoset::chain(["a", "b", "c"]).unwrap();
        let s = BitSet::from_indices([0, 1]);
        assert_eq!(p.maximal_in(&s), BitSet::from_indices([1]));
        assert_eq!(p.minimal_outside(&s), BitSet::from_indices([2]));
    }

    #[test]
    fn serde_uses_labels() {
        let p = FinitePoset::chain(["lo", "hi"]).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"elements":["lo","hi"],"covers":[["lo","hi"]]}"#);
        let back: FinitePoset = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
