use crate::error::{CliError, CliResult};

/// Parses a list of values: `a,b,c`, `start:stop:count` (inclusive, linear)
/// or `log:start:stop:count` (inclusive, geometric). Forms may be mixed with
/// commas, e.g. `0.1,1:2:11`.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        let bad = || CliError::input(format!("invalid grid `{part}` in `{spec}`"));
        let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let count = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
        match fields.as_slice() {
            [x] => out.push(number(x)?),
            [a, b, n] => out.extend(linear(number(a)?, number(b)?, count(n)?).ok_or_else(bad)?),
            ["log", a, b, n] => {
                let (a, b) = (number(a)?, number(b)?);
                if !(a > 0.0 && b > 0.0) {
                    return Err(bad());
                }
                let pts = linear(a.ln(), b.ln(), count(n)?).ok_or_else(bad)?;
                out.extend(pts.into_iter().map(f64::exp));
            }
            _ => return Err(bad()),
        }
    }
    if out.is_empty() {
        return Err(CliError::input(format!("grid `{spec}` is empty")));
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err(CliError::input(format!("grid `{spec}` contains non-finite values")));
    }
    Ok(out)
}

fn linear(a: f64, b: f64, n: usize) -> Option<Vec<f64>> {
    match n {
        0 => None,
        1 => Some(vec![a]),
        _ => Some((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
    }
}

/// Sorted, strictly increasing copy of a grid.
pub fn ascending(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}
