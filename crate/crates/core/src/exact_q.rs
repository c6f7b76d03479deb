//! Exact values of q(n), the number of partitions of n into distinct parts,
//! together with exact scans of classical inequalities on the table.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

/// Largest argument accepted by [`q_enumerate`].
pub const ENUMERATE_MAX: u64 = 60;

/// Default table size; covers every verification window with its offsets.
pub const DEFAULT_N_MAX: usize = 20_000;

pub const CACHE_FILE: &str = "qtable-v1.txt";

#[derive(Debug, thiserror::Error)]
pub enum QError {
    #[error("enumeration oracle supports 0 <= n <= {ENUMERATE_MAX}, got {0}")]
    EnumerateRange(u64),
    #[error("range {lo}..={hi} (plus {offset} lookahead) exceeds table n_max {n_max}")]
    OutOfTable {
        lo: usize,
        hi: usize,
        offset: usize,
        n_max: usize,
    },
    #[error("corrupt q-table cache {path}: {reason}")]
    CorruptCache { path: PathBuf, reason: String },
    #[error("cache i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Exact table `q(0), ..., q(n_max)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QTable {
    values: Vec<BigUint>,
}

/// Bits sufficient to hold q(n), from q(n) < exp(pi * sqrt(n/3)).
/// An overflow would be caught by the carry assertion in [`QTable::compute`].
fn bit_bound(n: usize) -> usize {
    let b = std::f64::consts::PI * (n as f64 / 3.0).sqrt() / std::f64::consts::LN_2;
    b.ceil() as usize + 2
}

impl QTable {
    /// 0/1-knapsack over parts k = 1..n_max, updating n from the top down so
    /// that each part is used at most once.
    pub fn compute(n_max: usize) -> Self {
        // Fixed-width limbs per entry; entry n only ever needs limbs(n).
        let limbs_of = |n: usize| bit_bound(n).div_ceil(64).max(1);
        let stride = limbs_of(n_max);
        let mut flat = vec![0u64; (n_max + 1) * stride];
        flat[0] = 1;
        for k in 1..=n_max {
            for n in (k..=n_max).rev() {
                let width = limbs_of(n);
                let (head, tail) = flat.split_at_mut(n * stride);
                let src = &head[(n - k) * stride..(n - k) * stride + width];
                let dst = &mut tail[..width];
                let mut carry = false;
                for (d, s) in dst.iter_mut().zip(src) {
                    let (v, c1) = d.overflowing_add(*s);
                    let (v, c2) = v.overflowing_add(carry as u64);
                    *d = v;
                    carry = c1 || c2;
                }
                assert!(!carry, "limb bound exceeded at n={n}");
            }
        }
        let values = flat
            .chunks(stride)
            .map(|limbs| {
                let digits: Vec<u32> = limbs.iter().flat_map(|&w| [w as u32, (w >> 32) as u32]).collect();
                BigUint::from_slice(&digits)
            })
            .collect();
        Self { values }
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn q(&self, n: usize) -> &BigUint {
        &self.values[n]
    }

    pub fn get(&self, n: usize) -> Option<&BigUint> {
        self.values.get(n)
    }

    /// Signed copy, convenient for inequality arithmetic.
    pub fn qi(&self, n: usize) -> BigInt {
        BigInt::from(self.values[n].clone())
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// Table restricted to `0..=n_max`.
    pub fn truncated(&self, n_max: usize) -> Self {
        Self {
            values: self.values[..=n_max.min(self.n_max())].to_vec(),
        }
    }

    pub fn ensure_range(&self, lo: usize, hi: usize, offset: usize) -> Result<(), QError> {
        if hi + offset > self.n_max() || lo > hi.max(lo) {
            return Err(QError::OutOfTable {
                lo,
                hi,
                offset,
                n_max: self.n_max(),
            });
        }
        Ok(())
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "qtable v1 {}", self.n_max())?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead, path: &Path) -> Result<Self, QError> {
        let corrupt = |reason: String| QError::CorruptCache {
            path: path.to_path_buf(),
            reason,
        };
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| corrupt("empty file".into()))?
            .map_err(|e| corrupt(e.to_string()))?;
        let n_max: usize = header
            .strip_prefix("qtable v1 ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| corrupt(format!("bad header {header:?}")))?;
        let mut values = Vec::with_capacity(n_max + 1);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| corrupt(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let v: BigUint = line
                .trim()
                .parse()
                .map_err(|_| corrupt(format!("line {} is not a decimal integer", i + 2)))?;
            values.push(v);
        }
        if values.len() != n_max + 1 {
            return Err(corrupt(format!(
                "expected {} values, found {}",
                n_max + 1,
                values.len()
            )));
        }
        let table = Self { values };
        table.spot_check().map_err(corrupt)?;
        Ok(table)
    }

    fn spot_check(&self) -> Result<(), String> {
        let known: [u32; 10] = [1, 1, 1, 2, 2, 3, 4, 5, 6, 8];
        for (n, &k) in known.iter().enumerate().take(self.n_max() + 1) {
            if self.values[n] != BigUint::from(k) {
                return Err(format!("q({n}) should be {k}"));
            }
        }
        // q(3) = q(4) = 2; strict growth starts at n = 4.
        for n in 4..self.n_max() {
            if self.values[n + 1] <= self.values[n] {
                return Err(format!("values not increasing at n={n}"));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), QError> {
        let io = |source| QError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io)?;
        }
        let tmp = path.with_extension("tmp");
        let mut w = BufWriter::new(fs::File::create(&tmp).map_err(io)?);
        self.write_to(&mut w).map_err(io)?;
        w.flush().map_err(io)?;
        drop(w);
        fs::rename(&tmp, path).map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self, QError> {
        let f = fs::File::open(path).map_err(|source| QError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_from(BufReader::new(f), path)
    }

    /// Load `dir/qtable-v1.txt` if it covers `n_max`, else compute and store it.
    pub fn load_or_compute(dir: &Path, n_max: usize) -> Result<Self, QError> {
        let path = dir.join(CACHE_FILE);
        if path.exists() {
            let t = Self::load(&path)?;
            if t.n_max() >= n_max {
                return Ok(t.truncated(n_max));
            }
        }
        let t = Self::compute(n_max);
        t.save(&path)?;
        Ok(t)
    }
}

/// Counts strictly decreasing sequences of positive integers summing to `n`.
pub fn q_enumerate(n: u64) -> Result<BigUint, QError> {
    fn count(rest: u64, max_part: u64) -> u64 {
        if rest == 0 {
            return 1;
        }
        (1..=max_part.min(rest)).map(|p| count(rest - p, p - 1)).sum()
    }
    if n > ENUMERATE_MAX {
        return Err(QError::EnumerateRange(n));
    }
    Ok(BigUint::from(count(n, n)))
}

/// All `n` in `lo..=hi` with `q(n)^2 <= q(n-1) q(n+1)`.
pub fn check_log_concavity(t: &QTable, lo: usize, hi: usize) -> Result<Vec<usize>, QError> {
    if lo == 0 {
        return Err(QError::OutOfTable {
            lo,
            hi,
            offset: 1,
            n_max: t.n_max(),
        });
    }
    t.ensure_range(lo, hi, 1)?;
    Ok((lo..=hi)
        .filter(|&n| t.q(n) * t.q(n) <= t.q(n - 1) * t.q(n + 1))
        .collect())
}

/// All `n` in `lo..=hi` failing the strict third-order Turán inequality
/// `4 (q_n^2 - q_{n-1} q_{n+1}) (q_{n+1}^2 - q_n q_{n+2}) > (q_n q_{n+1} - q_{n-1} q_{n+2})^2`.
pub fn check_turan3(t: &QTable, lo: usize, hi: usize) -> Result<Vec<usize>, QError> {
    if lo == 0 {
        return Err(QError::OutOfTable {
            lo,
            hi,
            offset: 2,
            n_max: t.n_max(),
        });
    }
    t.ensure_range(lo, hi, 2)?;
    Ok((lo..=hi)
        .filter(|&n| {
            let (a, b, c, d) = (t.qi(n - 1), t.qi(n), t.qi(n + 1), t.qi(n + 2));
            let lhs = BigInt::from(4) * (&b * &b - &a * &c) * (&c * &c - &b * &d);
            let m = &b * &c - &a * &d;
            lhs <= &m * &m
        })
        .collect())
}

/// Partitions of each `n <= n_max` into odd parts, by an unbounded-knapsack
/// DP over odd part sizes. Equal to q(n) by Euler's theorem.
pub fn odd_part_counts(n_max: usize) -> Vec<BigUint> {
    let mut v = vec![BigUint::zero(); n_max + 1];
    v[0] = BigUint::one();
    for k in (1..=n_max).step_by(2) {
        for n in k..=n_max {
            let add = v[n - k].clone();
            v[n] += add;
        }
    }
    v
}
