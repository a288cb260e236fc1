//! Union-find with deterministic representatives (the smallest index of a
//! class), used by every quotient in the crate.

use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn push(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Returns true when two distinct classes were merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub fn classes(&mut self) -> usize {
        (0..self.parent.len()).filter(|&i| self.find(i) == i).count()
    }
}

/// Union-find keyed by arbitrary ordered values; keys are interned on first
/// use, so representatives follow insertion order.
#[derive(Clone, Debug)]
pub struct Partition<K: Ord + Clone> {
    index: BTreeMap<K, usize>,
    keys: Vec<K>,
    uf: UnionFind,
}

impl<K: Ord + Clone> Default for Partition<K> {
    fn default() -> Self {
        Partition { index: BTreeMap::new(), keys: Vec::new(), uf: UnionFind::new(0) }
    }
}

impl<K: Ord + Clone> Partition<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_keys<I: IntoIterator<Item = K>>(keys: I) -> Self {
        let mut p = Self::new();
        for k in keys {
            p.add(k);
        }
        p
    }

    pub fn add(&mut self, k: K) -> usize {
        if let Some(&i) = self.index.get(&k) {
            return i;
        }
        let i = self.uf.push();
        self.index.insert(k.clone(), i);
        self.keys.push(k);
        i
    }

    pub fn contains(&self, k: &K) -> bool {
        self.index.contains_key(k)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    /// Merges the classes of two keys that are already present; returns
    /// None when either key is unknown.
    pub fn union(&mut self, a: &K, b: &K) -> Option<bool> {
        let (ia, ib) = (*self.index.get(a)?, *self.index.get(b)?);
        Some(self.uf.union(ia, ib))
    }

    /// Class id (index of the class representative) of a known key.
    pub fn class(&mut self, k: &K) -> Option<usize> {
        let i = *self.index.get(k)?;
        Some(self.uf.find(i))
    }

    pub fn rep(&mut self, k: &K) -> Option<K> {
        let c = self.class(k)?;
        Some(self.keys[c].clone())
    }

    pub fn same(&mut self, a: &K, b: &K) -> bool {
        matches!((self.class(a), self.class(b)), (Some(x), Some(y)) if x == y)
    }

    pub fn num_classes(&mut self) -> usize {
        self.uf.classes()
    }

    /// Classes as sorted lists of keys, ordered by their first key.
    pub fn blocks(&mut self) -> Vec<Vec<K>> {
        let mut m: BTreeMap<usize, Vec<K>> = BTreeMap::new();
        for i in 0..self.keys.len() {
            let r = self.uf.find(i);
            m.entry(r).or_default().push(self.keys[i].clone());
        }
        let mut out: Vec<Vec<K>> = m
            .into_values()
            .map(|mut v| {
                v.sort();
                v
            })
            .collect();
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn representatives_are_first_inserted() {
        let mut p = Partition::from_keys(["c", "a", "b"]);
        p.union(&"b", &"a");
        assert_eq!(p.rep(&"b"), Some("a"));
        p.union(&"a", &"c");
        assert_eq!(p.rep(&"a"), Some("c"));
        assert_eq!(p.num_classes(), 1);
    }

    proptest! {
        #[test]
        fn union_is_an_equivalence(pairs in proptest::collection::vec((0usize..8, 0usize..8), 0..12)) {
            let mut uf = UnionFind::new(8);
            for (a, b) in &pairs {
                uf.union(*a, *b);
            }
            for (a, b) in &pairs {
                prop_assert_eq!(uf.find(*a), uf.find(*b));
            }
            for i in 0..8 {
                let r = uf.find(i);
                prop_assert!(r <= i);
            }
        }
    }
}
