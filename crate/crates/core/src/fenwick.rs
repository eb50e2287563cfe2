//! Binary indexed tree over 1..=n, used for inversion counting and
//! order-statistic selection during Lehmer decoding.

pub(crate) struct Fenwick {
    tree: Vec<u32>,
    n: usize,
    /// Largest power of two <= n; the starting step of `select`.
    top: usize,
}

impl Fenwick {
    pub fn zeros(n: usize) -> Self {
        let top = if n == 0 { 0 } else { usize::pow(2, n.ilog2()) };
        Fenwick {
            tree: vec![0; n + 1],
            n,
            top,
        }
    }

    /// Tree over n slots that all start at count 1. With unit weights the
    /// node covering [i − lowbit(i) + 1, i] holds exactly lowbit(i).
    pub fn ones(n: usize) -> Self {
        let mut f = Fenwick::zeros(n);
        for i in 1..=n {
            f.tree[i] = (i & i.wrapping_neg()) as u32;
        }
        f
    }

    pub fn add(&mut self, mut i: usize, delta: i32) {
        debug_assert!(1 <= i && i <= self.n);
        while i <= self.n {
            self.tree[i] = self.tree[i].wrapping_add_signed(delta);
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of slots 1..=i.
    pub fn prefix(&self, mut i: usize) -> u32 {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Smallest index i with prefix(i) >= k, for 1 <= k <= prefix(n).
    pub fn select(&self, k: u32) -> usize {
        debug_assert!(k >= 1);
        let mut pos = 0;
        let mut rem = k;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next <= self.n && self.tree[next] < rem {
                rem -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_and_add_agree_with_naive() {
        let mut f = Fenwick::zeros(10);
        let mut naive = [0i32; 11];
        let updates = [(3, 2), (7, 1), (3, -1), (10, 5), (1, 4)];
        for &(i, d) in &updates {
            f.add(i, d);
            naive[i] += d;
        }
        for i in 1..=10 {
            let want: i32 = naive[1..=i].iter().sum();
            assert_eq!(f.prefix(i) as i32, want);
        }
    }

    #[test]
    fn ones_selects_kth_remaining() {
        let mut f = Fenwick::ones(5);
        assert_eq!(f.select(3), 3);
        f.add(3, -1);
        // Remaining {1,2,4,5}: third smallest is 4.
        assert_eq!(f.select(3), 4);
        f.add(1, -1);
        assert_eq!(f.select(1), 2);
        assert_eq!(f.select(3), 5);
    }

    #[test]
    fn select_on_non_power_of_two_sizes() {
        for n in 1..=33 {
            let f = Fenwick::ones(n);
            for k in 1..=n {
                assert_eq!(f.select(k as u32), k);
            }
        }
    }
}
