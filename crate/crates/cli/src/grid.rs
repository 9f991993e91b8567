//! Parameter grids on the command line.
//!
//! A grid is either a comma list (`0.2,0.5,0.8`, `1e4,1e10`) or a range
//! `lo:hi:count` with evenly spaced points, or `lo:hi:count:log` with
//! geometrically spaced points.

use std::str::FromStr;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let (lo, hi, count, log) = match parts.as_slice() {
                [lo, hi, count] => (lo, hi, count, false),
                [lo, hi, count, "log"] => (lo, hi, count, true),
                _ => return Err(format!("expected lo:hi:count or lo:hi:count:log, got {s:?}")),
            };
            let lo: f64 = lo.parse().map_err(|_| format!("bad range start {lo:?}"))?;
            let hi: f64 = hi.parse().map_err(|_| format!("bad range end {hi:?}"))?;
            let count: usize = count.parse().map_err(|_| format!("bad point count {count:?}"))?;
            if count == 0 {
                return Err("a range needs at least one point".into());
            }
            if log && !(lo > 0.0 && hi > 0.0) {
                return Err("a log range needs positive ends".into());
            }
            let at = |k: usize| {
                if count == 1 {
                    return lo;
                }
                let t = k as f64 / (count - 1) as f64;
                if log {
                    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + t * (hi - lo)
                }
            };
            return Ok(Grid((0..count).map(at).collect()));
        }
        let values: Result<Vec<f64>, _> = s.split(',').map(|v| v.trim().parse::<f64>()).collect();
        match values {
            Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(Grid(v)),
            _ => Err(format!("expected a comma list of numbers, got {s:?}")),
        }
    }
}

impl Grid {
    /// The grid as non-negative integers, rounding log-spaced points.
    pub fn integers(&self, field: &str) -> Result<Vec<u64>, String> {
        self.0
            .iter()
            .map(|&v| {
                let r = v.round();
                if r >= 0.0 && r < u64::MAX as f64 {
                    Ok(r as u64)
                } else {
                    Err(format!("{field}: {v} is not a non-negative integer"))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!("0.2, 0.5,0.8".parse::<Grid>().unwrap().0, vec![0.2, 0.5, 0.8]);
        assert_eq!("0:1:5".parse::<Grid>().unwrap().0, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = "1e2:1e6:5:log".parse::<Grid>().unwrap();
        assert_eq!(g.integers("p").unwrap(), vec![100, 1000, 10_000, 100_000, 1_000_000]);
        assert!("".parse::<Grid>().is_err());
        assert!("1:2".parse::<Grid>().is_err());
        assert!("0:1:3:log".parse::<Grid>().is_err());
    }
}
