//! Incremental maintenance of the OCUCB-n confidence denominator
//! `D_i = sum_j min(T_i, T_j^rho * T_i^(1-rho))`.
//!
//! The sum factors as `T_i^(1-rho) * sum_j min(T_i^rho, T_j^rho)`. Keeping
//! the arms sorted by pull count makes the inner sum a prefix query: arms
//! with `T_j < T_i` contribute `T_j^rho`, the rest contribute `T_i^rho`.
//! A Fenwick tree over the sorted positions stores `T_j^rho`, so both a
//! count increment and a query cost O(log K) instead of the naive O(K).

/// Fenwick tree over f64 point values with prefix sums.
#[derive(Debug, Clone)]
struct Fenwick {
    tree: Vec<f64>, // 1-based
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0.0; n + 1] }
    }

    fn add(&mut self, index: usize, delta: f64) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of the first `len` values.
    fn prefix(&self, len: usize) -> f64 {
        let mut i = len;
        let mut sum = 0.0;
        while i > 0 {
            sum += self.tree[i];
            i &= i - 1;
        }
        sum
    }
}

/// Sorted-by-count arm bookkeeping plus prefix sums of `T_j^rho`.
///
/// `increment` moves the touched arm to the end of its equal-count block
/// before bumping its count, which preserves sortedness with a single swap.
/// Per-arm powers `T_i^rho` and `T_i^(1-rho)` are cached and refreshed once
/// per increment, so queries perform no fractional powers at all.
#[derive(Debug, Clone)]
pub struct DenominatorAccumulator {
    rho: f64,
    counts: Vec<u64>,
    order: Vec<usize>,  // arm ids, counts nondecreasing along positions
    pos_of: Vec<usize>, // inverse of order
    pow_rho: Vec<f64>,  // per arm: counts[i]^rho
    pow_comp: Vec<f64>, // per arm: counts[i]^(1-rho)
    tree: Fenwick,      // value at position p is pow_rho[order[p]]
}

impl DenominatorAccumulator {
    /// All counts start at zero. `rho` must lie in [0, 1].
    pub fn new(num_arms: usize, rho: f64) -> Self {
        assert!(num_arms >= 1, "accumulator needs at least one arm");
        assert!((0.0..=1.0).contains(&rho), "rho must lie in [0, 1]");
        let p0 = 0f64.powf(rho); // 1 when rho = 0, else 0
        let c0 = 0f64.powf(1.0 - rho); // 1 when rho = 1, else 0
        let mut tree = Fenwick::new(num_arms);
        for i in 0..num_arms {
            tree.add(i, p0);
        }
        DenominatorAccumulator {
            rho,
            counts: vec![0; num_arms],
            order: (0..num_arms).collect(),
            pos_of: (0..num_arms).collect(),
            pow_rho: vec![p0; num_arms],
            pow_comp: vec![c0; num_arms],
            tree,
        }
    }

    pub fn num_arms(&self) -> usize {
        self.counts.len()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// First sorted position whose count is at least `c`.
    fn first_pos_at_least(&self, c: u64) -> usize {
        self.order.partition_point(|&arm| self.counts[arm] < c)
    }

    /// Last sorted position whose count equals `c` (assumes one exists).
    fn last_pos_with(&self, c: u64) -> usize {
        self.order.partition_point(|&arm| self.counts[arm] <= c) - 1
    }

    /// Bump one arm's count by one. O(log K).
    pub fn increment(&mut self, arm: usize) {
        let c = self.counts[arm];
        let p = self.pos_of[arm];
        let e = self.last_pos_with(c);
        debug_assert!(p <= e);
        // The arm moving to position p keeps count c, so the tree value
        // there is unchanged; only position e needs a point update.
        let displaced = self.order[e];
        self.order[e] = arm;
        self.order[p] = displaced;
        self.pos_of[arm] = e;
        self.pos_of[displaced] = p;

        let next = (c + 1) as f64;
        let new_pow = next.powf(self.rho);
        self.counts[arm] = c + 1;
        self.tree.add(e, new_pow - self.pow_rho[arm]);
        self.pow_rho[arm] = new_pow;
        self.pow_comp[arm] = next.powf(1.0 - self.rho);
    }

    /// `sum_j min(T_arm, T_j^rho * T_arm^(1-rho))`, via the factorization
    /// `T_arm^(1-rho) * (sum_{T_j < T_arm} T_j^rho + #{T_j >= T_arm} * T_arm^rho)`.
    /// O(log K).
    pub fn query(&self, arm: usize) -> f64 {
        let c = self.counts[arm];
        let start = self.first_pos_at_least(c);
        let below = self.tree.prefix(start);
        let n_ge = (self.counts.len() - start) as f64;
        self.pow_comp[arm] * (below + n_ge * self.pow_rho[arm])
    }
}
