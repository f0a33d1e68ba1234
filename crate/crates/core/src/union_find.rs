/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Back to all singletons without reallocating.
    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
        self.components = self.parent.len();
    }

    #[inline]
    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Returns true when `a` and `b` were in different sets.
    #[inline]
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
        self.components -= 1;
        true
    }

    #[inline]
    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Size of the set containing `x`.
    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }

    /// Root of every element, fully compressed.
    pub fn roots(&mut self) -> Vec<usize> {
        (0..self.len()).map(|i| self.find(i)).collect()
    }
}

/// Union-find that also tracks the unwrapped displacement of every site
/// relative to its root, so that a cluster closing a loop around a periodic
/// axis is detected at the union that closes it.
#[derive(Debug, Clone)]
pub struct WrappingUnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    /// `offset[i*dim + a]`: position(i) - position(parent(i)) along axis a.
    offset: Vec<i32>,
    /// Per root bitmask of axes the cluster wraps around.
    wraps: Vec<u32>,
    dim: usize,
    scratch: Vec<i32>,
    path: Vec<u32>,
}

impl WrappingUnionFind {
    pub fn new(n: usize, dim: usize) -> Self {
        assert!(dim <= 32, "at most 32 axes supported");
        WrappingUnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            offset: vec![0; n * dim],
            wraps: vec![0; n],
            dim,
            scratch: vec![0; 3 * dim],
            path: Vec::new(),
        }
    }

    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
        self.offset.fill(0);
        self.wraps.fill(0);
    }

    /// Root of `x`; on return `scratch[base..base+dim]` holds position(x) - position(root).
    fn find_with_offset(&mut self, x: usize, base: usize) -> usize {
        let d = self.dim;
        let mut r = x;
        while self.parent[r] as usize != r {
            r = self.parent[r] as usize;
        }
        self.path.clear();
        let mut cur = x;
        while cur != r {
            self.path.push(cur as u32);
            cur = self.parent[cur] as usize;
        }
        // Walk from the node nearest the root outward, so each node ends up
        // holding its total offset to the root.
        let acc = 2 * d;
        self.scratch[acc..acc + d].fill(0);
        for k in (0..self.path.len()).rev() {
            let node = self.path[k] as usize;
            for a in 0..d {
                self.scratch[acc + a] += self.offset[node * d + a];
                self.offset[node * d + a] = self.scratch[acc + a];
            }
            self.parent[node] = r as u32;
        }
        for a in 0..d {
            self.scratch[base + a] = if x == r { 0 } else { self.offset[x * d + a] };
        }
        r
    }

    pub fn find(&mut self, x: usize) -> usize {
        self.find_with_offset(x, 0)
    }

    /// Joins `u` and `v` where `v = u + step` in unwrapped coordinates.
    pub fn union_step(&mut self, u: usize, v: usize, axis: usize, step: i32) {
        let d = self.dim;
        let ru = self.find_with_offset(u, 0);
        let rv = self.find_with_offset(v, d);
        if ru == rv {
            // position(u) + step should equal position(v); any mismatch is a winding.
            for a in 0..d {
                let s = if a == axis { step } else { 0 };
                if self.scratch[a] + s - self.scratch[d + a] != 0 {
                    self.wraps[ru] |= 1 << a;
                }
            }
            return;
        }
        // position(ru) - position(rv) = dv - step - du
        let (child, root, sign) = if self.size[ru] < self.size[rv] {
            (ru, rv, 1)
        } else {
            (rv, ru, -1)
        };
        for a in 0..d {
            let s = if a == axis { step } else { 0 };
            let rel = self.scratch[d + a] - s - self.scratch[a];
            self.offset[child * d + a] = sign * rel;
        }
        self.parent[child] = root as u32;
        self.size[root] += self.size[child];
        self.wraps[root] |= self.wraps[child];
    }

    /// Bitmask of axes around which the cluster of `x` wraps.
    pub fn wrap_mask(&mut self, x: usize) -> u32 {
        let r = self.find(x);
        self.wraps[r]
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }

    /// OR of the wrap masks of every cluster.
    pub fn any_wrap_mask(&self) -> u32 {
        self.wraps
            .iter()
            .enumerate()
            .filter(|(i, _)| self.parent[*i] as usize == *i)
            .fold(0, |acc, (_, w)| acc | w)
    }
}
