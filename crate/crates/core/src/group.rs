//! Dense finite abelian groups ⊕ Z_{n_i} and bitset subset-sum closures.

/// Elements are mixed-radix indices with the first component most
/// significant, so index order is lexicographic order on coordinate tuples.
#[derive(Debug, Clone)]
pub(crate) struct DenseGroup {
    radices: Vec<u32>,
    order: usize,
    /// Row-major `order × rank` table of coordinates.
    digits: Vec<u32>,
    strides: Vec<usize>,
}

impl DenseGroup {
    pub(crate) fn new(radices: &[u32]) -> Self {
        let order = radices.iter().map(|&r| r as usize).product::<usize>();
        let rank = radices.len();
        let mut strides = vec![1usize; rank];
        for i in (0..rank.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * radices[i + 1] as usize;
        }
        let mut digits = vec![0u32; order * rank];
        for g in 0..order {
            for i in 0..rank {
                digits[g * rank + i] = ((g / strides[i]) % radices[i] as usize) as u32;
            }
        }
        Self {
            radices: radices.to_vec(),
            order,
            digits,
            strides,
        }
    }

    pub(crate) fn order(&self) -> usize {
        self.order
    }

    pub(crate) fn rank(&self) -> usize {
        self.radices.len()
    }

    pub(crate) fn encode(&self, coords: &[u32]) -> usize {
        coords
            .iter()
            .zip(&self.radices)
            .zip(&self.strides)
            .map(|((&c, &r), &s)| (c % r) as usize * s)
            .sum()
    }

    pub(crate) fn coords(&self, g: usize) -> &[u32] {
        let rank = self.rank();
        &self.digits[g * rank..(g + 1) * rank]
    }

    pub(crate) fn add(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        let mut out = 0;
        for i in 0..self.rank() {
            out += ((ca[i] + cb[i]) % self.radices[i]) as usize * self.strides[i];
        }
        out
    }

    pub(crate) fn neg(&self, a: usize) -> usize {
        self.coords(a)
            .iter()
            .zip(self.radices.iter().zip(&self.strides))
            .map(|(&c, (&r, &s))| ((r - c) % r) as usize * s)
            .sum()
    }

    pub(crate) fn element_order(&self, a: usize) -> usize {
        self.coords(a)
            .iter()
            .zip(&self.radices)
            .map(|(&c, &r)| (r / num_integer::gcd(r, c)) as usize)
            .fold(1, num_integer::lcm)
    }
}

/// Set of reachable non-empty subset sums, as a bitset over group indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Closure {
    words: Vec<u64>,
    len: usize,
}

impl Closure {
    pub(crate) fn empty(order: usize) -> Self {
        Self {
            words: vec![0; order.div_ceil(64)],
            len: 0,
        }
    }

    pub(crate) fn contains(&self, g: usize) -> bool {
        self.words[g / 64] >> (g % 64) & 1 == 1
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    fn insert(&mut self, g: usize) {
        let (w, b) = (g / 64, g % 64);
        if self.words[w] >> b & 1 == 0 {
            self.words[w] |= 1 << b;
            self.len += 1;
        }
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
        })
    }

    /// Writes `self ∪ {g} ∪ (self + g)` into `out`.
    pub(crate) fn extend_into(&self, group: &DenseGroup, g: usize, out: &mut Closure) {
        out.words.copy_from_slice(&self.words);
        out.len = self.len;
        for s in self.iter() {
            out.insert(group.add(s, g));
        }
        out.insert(g);
    }

    pub(crate) fn extended(&self, group: &DenseGroup, g: usize) -> Closure {
        let mut out = Closure::empty(group.order());
        self.extend_into(group, g, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_radix_arithmetic() {
        let g = DenseGroup::new(&[2, 4]);
        assert_eq!(g.order(), 8);
        let a = g.encode(&[1, 3]);
        let b = g.encode(&[1, 2]);
        assert_eq!(g.coords(g.add(a, b)), &[0, 1]);
        assert_eq!(g.add(a, g.neg(a)), 0);
        assert_eq!(g.element_order(a), 4);
        assert_eq!(g.element_order(g.encode(&[1, 0])), 2);
        assert_eq!(g.element_order(0), 1);
        // Lexicographic index order.
        assert!(g.encode(&[0, 3]) < g.encode(&[1, 0]));
    }

    #[test]
    fn closure_growth() {
        let g = DenseGroup::new(&[3]);
        let c = Closure::empty(3).extended(&g, 1).extended(&g, 1);
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![1, 2]);
        let c = c.extended(&g, 1);
        assert!(c.contains(0));
        assert_eq!(c.len(), 3);
    }
}
