//! Parsers for the list-valued flags.

use anyhow::{bail, Context, Result};
use spheredec::experiments::AlgorithmPair;

/// Dimension lists: `start:step:end`, `a..b` (inclusive) or `a,b,c`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    let dims: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            bail!("empty range {s:?}");
        }
        (a..=b).collect()
    } else if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, step, b] = parts[..] else {
            bail!("expected start:step:end, got {s:?}");
        };
        let (a, step, b) = (num(a)?, num(step)?, num(b)?);
        if step == 0 || a > b {
            bail!("empty range {s:?}");
        }
        (a..=b).step_by(step).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    if dims.contains(&0) {
        bail!("dimension 0 in {s:?}");
    }
    Ok(dims)
}

/// Pairs `old:new` separated by commas, e.g. `1:5,3:7`.
pub fn parse_pairs(s: &str) -> Result<Vec<AlgorithmPair>> {
    s.split(',')
        .map(|p| {
            let (a, b) = p
                .split_once(':')
                .with_context(|| format!("pair {p:?} is not old:new"))?;
            Ok(AlgorithmPair::new(label(a)?, label(b)?))
        })
        .collect()
}

fn num(s: &str) -> Result<usize> {
    s.trim().parse().with_context(|| format!("not a count: {s:?}"))
}

fn label(s: &str) -> Result<u8> {
    let v: u8 = s.trim().parse().with_context(|| format!("not an algorithm: {s:?}"))?;
    if !(1..=8).contains(&v) {
        bail!("algorithm {v} outside 1..8");
    }
    Ok(v)
}
