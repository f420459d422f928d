//! Sparse-table range-minimum queries: O(n log n) build, O(1) query.

/// Immutable sparse table answering `min` over any inclusive index range.
///
/// Stores minima rather than argmins; level `k` holds minima of windows of
/// length `2^k` in a level-major flat vector.
#[derive(Debug, Clone)]
pub struct SparseTable<T> {
    len: usize,
    table: Vec<T>,
}

impl<T: Copy + PartialOrd> SparseTable<T> {
    pub fn new(data: &[T]) -> Self {
        assert!(!data.is_empty());
        let len = data.len();
        let levels = usize::BITS as usize - (len.leading_zeros() as usize);
        let mut table = Vec::with_capacity(levels * len);
        table.extend_from_slice(data);
        for k in 1..levels {
            let prev = (k - 1) * len;
            let half = 1usize << (k - 1);
            for i in 0..len {
                let a = table[prev + i];
                let m = if i + half < len {
                    let b = table[prev + i + half];
                    if b < a {
                        b
                    } else {
                        a
                    }
                } else {
                    a
                };
                table.push(m);
            }
        }
        SparseTable { len, table }
    }

    /// Minimum of the inclusive range `[i, j]`. Panics if `i > j` or `j` is
    /// out of bounds (debug builds).
    #[inline]
    pub fn min(&self, i: usize, j: usize) -> T {
        debug_assert!(i <= j && j < self.len);
        if i == j {
            return self.table[i];
        }
        let k = usize::BITS as usize - 1 - ((j - i + 1).leading_zeros() as usize);
        let base = k * self.len;
        let a = self.table[base + i];
        let b = self.table[base + j + 1 - (1usize << k)];
        if b < a {
            b
        } else {
            a
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}
