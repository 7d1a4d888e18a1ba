use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// `count` equispaced values on `[lo, hi]`, written `lo:hi:count` or as a
/// single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Range {
    pub fn single(v: f64) -> Self {
        Self { lo: v, hi: v, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        let scale = self.lo.abs().max(self.hi.abs());
        // Trim accumulated round-off so grid values print as typed.
        (0..self.count)
            .map(|k| self.lo + step * k as f64)
            .map(|v| if v.abs() < 1e-12 * scale { 0.0 } else { format!("{v:.12e}").parse().unwrap() })
            .collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
        match parts.as_slice() {
            [v] => Ok(Self::single(num(v)?)),
            [lo, hi, count] => {
                let count: usize = count.trim().parse().map_err(|e| format!("`{count}`: {e}"))?;
                if count == 0 {
                    return Err("range count must be at least 1".into());
                }
                let (lo, hi) = (num(lo)?, num(hi)?);
                if !lo.is_finite() || !hi.is_finite() {
                    return Err("range bounds must be finite".into());
                }
                Ok(Self { lo, hi, count })
            }
            _ => Err(format!("expected `lo:hi:count` or a single value, got `{s}`")),
        }
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.count == 1 {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_triples_and_singletons() {
        let r: Range = "0:0.5:6".parse().unwrap();
        assert_eq!(r.values(), vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
        let z: Range = "-0.1:0.1:5".parse().unwrap();
        assert_eq!(z.values(), vec![-0.1, -0.05, 0.0, 0.05, 0.1]);
        let s: Range = "5.4".parse().unwrap();
        assert_eq!(s.values(), vec![5.4]);
        assert!("1:2".parse::<Range>().is_err());
        assert!("1:2:0".parse::<Range>().is_err());
    }
}
