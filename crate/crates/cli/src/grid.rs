//! Grid specifications: a comma list `a,b,c` or an inclusive range `a:b:n`
//! of `n` evenly spaced values. An empty specification is an empty grid.

use crate::error::{CliError, Result};

pub fn parse_grid(name: &str, spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let bad = |why: String| CliError::Usage(format!("--{name} {spec:?}: {why}"));
    let number = |s: &str| -> Result<f64> {
        let v: f64 = s.trim().parse().map_err(|_| bad(format!("{:?} is not a number", s.trim())))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad(format!("{v} is not finite")))
        }
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [_] => spec.split(',').map(number).collect(),
        [a, b, n] => {
            let (a, b) = (number(a)?, number(b)?);
            let n: usize = n.trim().parse().map_err(|_| bad(format!("{:?} is not a point count", n.trim())))?;
            Ok(match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n)
                    .map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
                    .collect(),
            })
        }
        _ => Err(bad("expected a comma list or start:stop:count".into())),
    }
}
