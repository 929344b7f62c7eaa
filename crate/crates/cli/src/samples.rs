//! CSV sample files and rate grids for `fit`.

use std::path::Path;

use rpcircle::numcore::CMatrix;

use crate::{CliError, CliResult};

/// Samples `(tⱼ, φⱼ)` read from CSV.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub times: Vec<f64>,
    pub values: Vec<CMatrix>,
}

impl SampleSet {
    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.nrows())
    }
}

enum Column {
    Re(usize, usize),
    Im(usize, usize),
}

fn parse_column(name: &str) -> Option<Column> {
    let mut parts = name.trim().split('_');
    let kind = parts.next()?;
    let i = parts.next()?.parse().ok()?;
    let j = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    match kind {
        "re" => Some(Column::Re(i, j)),
        "im" => Some(Column::Im(i, j)),
        _ => None,
    }
}

/// Header `t,value` for scalars, or `t` followed by `re_i_j` / `im_i_j`
/// columns covering a square matrix.
pub fn parse_samples<R: std::io::Read>(reader: R, path: &Path) -> CliResult<SampleSet> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.get(0) != Some("t") {
        return Err(CliError::Schema("first CSV column must be `t`".into()));
    }
    let rest: Vec<&str> = headers.iter().skip(1).collect();
    let (dim, columns) = if rest == ["value"] {
        (1, vec![Column::Re(0, 0)])
    } else {
        let cols = rest
            .iter()
            .map(|h| parse_column(h).ok_or_else(|| CliError::Schema(format!("unknown CSV column `{h}`"))))
            .collect::<CliResult<Vec<_>>>()?;
        let dim = cols
            .iter()
            .map(|c| match c {
                Column::Re(i, j) | Column::Im(i, j) => i.max(j) + 1,
            })
            .max()
            .ok_or_else(|| CliError::Schema("no value columns".into()))?;
        let mut seen = vec![false; dim * dim];
        for c in &cols {
            if let Column::Re(i, j) = c {
                seen[i * dim + j] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(CliError::Schema(format!("missing re_i_j columns for a {dim}x{dim} matrix")));
        }
        (dim, cols)
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let nums = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::Schema(format!("bad number `{f}` in CSV")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        if nums.len() != columns.len() + 1 {
            return Err(CliError::Schema("CSV row has the wrong number of fields".into()));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for (c, &x) in columns.iter().zip(&nums[1..]) {
            match *c {
                Column::Re(i, j) => m[(i, j)].re = x,
                Column::Im(i, j) => m[(i, j)].im = x,
            }
        }
        times.push(nums[0]);
        values.push(m);
    }
    if times.is_empty() {
        return Err(CliError::Schema("CSV has no samples".into()));
    }
    Ok(SampleSet { times, values })
}

pub fn load_samples(path: &Path) -> CliResult<SampleSet> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_samples(file, path)
}

/// `start:stop:step` (inclusive of `stop` up to rounding) or `a,b,c`.
pub fn parse_lambda_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Schema(format!("bad lambda grid `{spec}`"));
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, h] = parts[..] else {
            return Err(bad());
        };
        let (a, b, h) = (num(a)?, num(b)?, num(h)?);
        if h.is_nan() || h <= 0.0 || b < a {
            return Err(bad());
        }
        let steps = ((b - a) / h + 1e-9).floor() as usize;
        (0..=steps).map(|k| a + k as f64 * h).collect()
    } else {
        spec.split(',').map(num).collect::<CliResult<Vec<_>>>()?
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn lambda_grids() {
        assert_eq!(parse_lambda_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_lambda_grid("0, 1.5,3").unwrap(), vec![0.0, 1.5, 3.0]);
        assert_eq!(parse_lambda_grid("0:0.3:0.1").unwrap().len(), 4);
        for bad in ["", "0:1", "1:0:0.1", "0:1:0", "a,b", "0:1:-1"] {
            assert!(parse_lambda_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn scalar_and_matrix_csv() {
        let p = Path::new("s.csv");
        let s = parse_samples("t,value\n0,2\n0.5,1.5\n".as_bytes(), p).unwrap();
        assert_eq!(s.times, vec![0.0, 0.5]);
        assert_eq!(s.values[1][(0, 0)], Complex64::new(1.5, 0.0));
        let text = "t,re_0_0,re_0_1,im_0_1,re_1_0,im_1_0,re_1_1\n0,1,0,2,0,-2,3\n";
        let m = parse_samples(text.as_bytes(), p).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.values[0][(0, 1)], Complex64::new(0.0, 2.0));
        assert_eq!(m.values[0][(1, 1)], Complex64::new(3.0, 0.0));
    }

    #[test]
    fn csv_errors() {
        let p = Path::new("s.csv");
        assert!(parse_samples("x,value\n0,1\n".as_bytes(), p).is_err());
        assert!(parse_samples("t,value\n".as_bytes(), p).is_err());
        assert!(parse_samples("t,value\n0,abc\n".as_bytes(), p).is_err());
        assert!(parse_samples("t,re_0_0,re_1_1\n0,1,1\n".as_bytes(), p).is_err());
        assert!(parse_samples("t,foo\n0,1\n".as_bytes(), p).is_err());
    }
}
