//! Parameter grids for `sweep`.

use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Error, Result};

/// Grid values are rounded to this many decimals so that `0.1 + 0.2` prints
/// as `0.3` and rows are reproducible.
const SNAP_DIGITS: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

fn snap(v: f64) -> f64 {
    let s: f64 = format!("{:.*}", SNAP_DIGITS, v)
        .parse()
        .expect("formatted float");
    if s == 0.0 {
        0.0
    } else {
        s
    }
}

fn number(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .with_context(|| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        bail!("grid values must be finite, got `{}`", s.trim());
    }
    Ok(v)
}

impl FromStr for GridAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, spec) = s.split_once('=').ok_or_else(|| {
            anyhow!("grid `{s}` should look like name=start:stop:step or name=v1,v2")
        })?;
        let name = name.trim().to_string();
        if name.is_empty() {
            bail!("grid `{s}` has no parameter name");
        }
        let spec = spec.trim();
        let values = if spec.contains(':') {
            let parts: Vec<&str> = spec.split(':').collect();
            let [start, stop, step] = parts.as_slice() else {
                bail!("range `{spec}` should be start:stop:step");
            };
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if step <= 0.0 {
                bail!("grid step must be positive, got {step}");
            }
            if stop < start {
                Vec::new()
            } else {
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|i| snap(start + i as f64 * step)).collect()
            }
        } else if spec.is_empty() {
            Vec::new()
        } else {
            spec.split(',')
                .map(|v| number(v).map(snap))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(GridAxis { name, values })
    }
}

/// Cartesian product in lexicographic order, first axis slowest.
pub fn product(axes: &[GridAxis]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut row = prefix.clone();
                    row.push(v);
                    row
                })
            })
            .collect();
    }
    if axes.is_empty() {
        Vec::new()
    } else {
        out
    }
}

/// Shortest representation that round-trips.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

/// `a,b` as a pair of numbers.
pub fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("expected `l_n,r_n`, got `{s}`"))?;
    Ok((number(a)?, number(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_snapped_and_inclusive() {
        let a: GridAxis = "alpha=-2:2:0.2".parse().unwrap();
        assert_eq!(a.values.len(), 21);
        assert_eq!(a.values[0], -2.0);
        assert_eq!(a.values[10], 0.0);
        assert_eq!(a.values[20], 2.0);
        assert_eq!(format_value(a.values[3]), "-1.4");
    }

    #[test]
    fn lists_and_errors() {
        let a: GridAxis = "alpha=-0.5, 0, 3.5".parse().unwrap();
        assert_eq!(a.values, vec![-0.5, 0.0, 3.5]);
        assert!("alpha".parse::<GridAxis>().is_err());
        assert!("alpha=1:2:0".parse::<GridAxis>().is_err());
        assert!("alpha=1:x:1".parse::<GridAxis>().is_err());
        assert!("alpha=2:1:1".parse::<GridAxis>().unwrap().values.is_empty());
    }

    #[test]
    fn product_order() {
        let axes = ["a=0,1".parse().unwrap(), "b=5,6,7".parse().unwrap()];
        let p = product(&axes);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0.0, 5.0]);
        assert_eq!(p[1], vec![0.0, 6.0]);
        assert_eq!(p[3], vec![1.0, 5.0]);
    }
}
