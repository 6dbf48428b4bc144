use crate::error::{Error, Result};

/// Pairwise core interaction frequencies, row-major `f[src][dst]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficMatrix {
    n: usize,
    f: Vec<f64>,
}

impl TrafficMatrix {
    pub fn zeros(n: usize) -> Self {
        TrafficMatrix {
            n,
            f: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from rows, checking that the diagonal is zero and
    /// every entry is finite and non-negative.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut m = TrafficMatrix::zeros(n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParam(format!(
                    "traffic row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, w) in row.into_iter().enumerate() {
                m.set(i, j, w)?;
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, src: usize, dst: usize) -> f64 {
        self.f[src * self.n + dst]
    }

    pub fn set(&mut self, src: usize, dst: usize, w: f64) -> Result<()> {
        if src >= self.n || dst >= self.n {
            return Err(Error::InvalidParam(format!(
                "traffic index ({src}, {dst}) out of range for n = {}",
                self.n
            )));
        }
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "traffic weight must be finite and non-negative, got {w}"
            )));
        }
        if src == dst && w != 0.0 {
            return Err(Error::InvalidParam(format!("self-traffic on core {src}")));
        }
        self.f[src * self.n + dst] = w;
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.f.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.f.iter().all(|&w| w == 0.0)
    }

    /// Errors unless at least one entry is positive.
    pub fn require_nonzero(&self) -> Result<()> {
        if self.is_zero() {
            Err(Error::InvalidParam("traffic matrix has no positive entry".into()))
        } else {
            Ok(())
        }
    }

    /// Nonzero entries as `(src, dst, weight)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.f
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(move |(k, &w)| (k / self.n, k % self.n, w))
    }

    pub fn scaled(&self, c: f64) -> Self {
        TrafficMatrix {
            n: self.n,
            f: self.f.iter().map(|w| w * c).collect(),
        }
    }
}
