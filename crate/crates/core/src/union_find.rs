/// Disjoint-set forest with union by size and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Overwrites `self` with `other` (same length) without reallocating.
    pub fn copy_from(&mut self, other: &UnionFind) {
        self.parent.copy_from_slice(&other.parent);
        self.size.copy_from_slice(&other.size);
    }

    /// Returns every element to its own singleton set without reallocating.
    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    /// Size of the set containing `x`.
    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }

    /// Dense component labels `0..c` in order of first appearance, plus sizes.
    pub fn labels(&mut self) -> (Vec<u32>, Vec<u32>) {
        let n = self.len();
        let mut root_label = vec![u32::MAX; n];
        let mut labels = Vec::with_capacity(n);
        let mut sizes = Vec::new();
        for x in 0..n {
            let r = self.find(x);
            if root_label[r] == u32::MAX {
                root_label[r] = sizes.len() as u32;
                sizes.push(0);
            }
            let l = root_label[r];
            sizes[l as usize] += 1;
            labels.push(l);
        }
        (labels, sizes)
    }

    /// Number of distinct elements reachable from `seeds`: the sum of the
    /// sizes of the distinct sets they touch. `mark` is scratch space of
    /// length `len()` that must be all-false on entry and is left all-false.
    pub fn covered(&mut self, seeds: &[usize], mark: &mut [bool]) -> usize {
        let mut total = 0;
        for &s in seeds {
            let r = self.find(s);
            if !mark[r] {
                mark[r] = true;
                total += self.size[r] as usize;
            }
        }
        for &s in seeds {
            let r = self.find(s);
            mark[r] = false;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unions_and_labels() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert_eq!(uf.set_size(0), 2);
        let (labels, sizes) = uf.labels();
        assert_eq!(labels, vec![0, 0, 1, 2, 2]);
        assert_eq!(sizes, vec![2, 1, 2]);
    }

    #[test]
    fn covered_counts_shared_components_once() {
        let mut uf = UnionFind::new(4);
        uf.union(0, 1);
        uf.union(1, 2);
        let mut mark = vec![false; 4];
        assert_eq!(uf.covered(&[0, 2], &mut mark), 3);
        assert_eq!(uf.covered(&[0, 3], &mut mark), 4);
        assert!(mark.iter().all(|m| !m));
        uf.reset();
        assert_eq!(uf.covered(&[0], &mut mark), 1);
    }
}
