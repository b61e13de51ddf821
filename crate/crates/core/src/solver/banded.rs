//! Banded storage and LU factorization for the implicit linear solves.
//!
//! The shifted Laplacian `c₀ I - c₁ Δ_h` is tridiagonal in 1D and has
//! bandwidth `N` (points per axis) in 2D. It is strictly diagonally dominant
//! for `c₀, c₁ > 0`, and stays so after adding the nonnegative Newton
//! diagonal, so LU without pivoting is stable and fill never leaves the band.

use crate::error::{Error, Result};

/// Square banded matrix; row `i` stores columns `i - bw ..= i + bw`.
#[derive(Clone, Debug)]
pub struct BandedMatrix {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        BandedMatrix {
            n,
            bandwidth,
            data: vec![0.0; n * (2 * bandwidth + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (2 * self.bandwidth + 1) + (j + self.bandwidth - i)
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j < self.n && i < self.n && i.abs_diff(j) <= self.bandwidth
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_band(i, j));
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_band(i, j));
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    // Index arithmetic mirrors the banded slot layout.
    #[allow(clippy::needless_range_loop)]
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let bw = self.bandwidth;
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let hi = (i + bw).min(self.n - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += self.data[self.slot(i, j)] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// In-place LU without pivoting. Fails on a vanishing pivot.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let bw = self.bandwidth;
        for k in 0..n {
            let pivot = self.data[self.slot(k, k)];
            if pivot.abs() < 1e-300 || !pivot.is_finite() {
                return Err(Error::SingularMatrix { row: k });
            }
            let i_hi = (k + bw).min(n - 1);
            for i in (k + 1)..=i_hi {
                let slot_ik = self.slot(i, k);
                let m = self.data[slot_ik] / pivot;
                self.data[slot_ik] = m;
                if m != 0.0 {
                    let j_hi = (k + bw).min(n - 1);
                    for j in (k + 1)..=j_hi {
                        let upper = self.data[self.slot(k, j)];
                        if upper != 0.0 {
                            let s = self.slot(i, j);
                            self.data[s] -= m * upper;
                        }
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            bandwidth: bw,
            data: self.data,
        })
    }
}

/// LU factors in banded storage: unit lower factor below the diagonal, upper
/// factor on and above it.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandedLu {
    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (2 * self.bandwidth + 1) + (j + self.bandwidth - i)
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let bw = self.bandwidth;
        // Forward substitution with the unit lower factor.
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut acc = b[i];
            for j in lo..i {
                acc -= self.data[self.slot(i, j)] * b[j];
            }
            b[i] = acc;
        }
        // Back substitution with the upper factor.
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut acc = b[i];
            for j in (i + 1)..=hi {
                acc -= self.data[self.slot(i, j)] * b[j];
            }
            b[i] = acc / self.data[self.slot(i, i)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
