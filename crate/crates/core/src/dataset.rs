use crate::error::{Error, Result};

/// Observations `Z_i = (Y_i, X_i1, ..., X_id)`, stored row-major.
///
/// Column 0 is the response, columns `1..=d` the covariates.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    width: usize,
}

/// Smallest sample size any inference operation accepts.
pub const MIN_SAMPLES: usize = 3;

impl Dataset {
    /// Validates and wraps row-major data of `width = d + 1` columns.
    pub fn from_row_major(values: Vec<f64>, width: usize) -> Result<Self> {
        if width < 2 {
            return Err(Error::NoCovariates);
        }
        if values.len() % width != 0 {
            return Err(Error::Ragged {
                row: values.len() / width,
                found: values.len() % width,
                expected: width,
            });
        }
        let data = Dataset {
            n: values.len() / width,
            width,
            values,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * width);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != width {
                return Err(Error::Ragged {
                    row: i,
                    found: r.len(),
                    expected: width,
                });
            }
            values.extend_from_slice(r);
        }
        Dataset::from_row_major(values, width)
    }

    /// Builds a dataset from a response vector and covariate columns.
    pub fn from_columns(response: &[f64], covariates: &[Vec<f64>]) -> Result<Self> {
        let n = response.len();
        let width = covariates.len() + 1;
        let mut values = Vec::with_capacity(n * width);
        for i in 0..n {
            values.push(response[i]);
            for (j, col) in covariates.iter().enumerate() {
                let v = *col.get(i).ok_or(Error::Ragged {
                    row: i,
                    found: j + 1,
                    expected: width,
                })?;
                values.push(v);
            }
        }
        if let Some(long) = covariates.iter().find(|c| c.len() != n) {
            return Err(Error::Ragged {
                row: n,
                found: long.len(),
                expected: n,
            });
        }
        Dataset::from_row_major(values, width)
    }

    fn validate(&self) -> Result<()> {
        if self.n < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                n: self.n,
                min: MIN_SAMPLES,
            });
        }
        for (idx, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / self.width,
                    column: idx % self.width,
                });
            }
        }
        for column in 0..self.width {
            let first = self.values[column];
            if self.column(column).all(|v| v == first) {
                return Err(Error::ZeroVariance { column });
            }
        }
        Ok(())
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of covariates.
    pub fn d(&self) -> usize {
        self.width - 1
    }

    /// Number of columns, `d + 1`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.width)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(j).step_by(self.width).copied()
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_inputs() {
        assert_eq!(
            Dataset::from_rows(&[[1.0, 2.0], [2.0, 1.0]]),
            Err(Error::TooFewSamples { n: 2, min: 3 })
        );
        assert_eq!(
            Dataset::from_rows(&[[1.0, 2.0], [2.0, f64::NAN], [3.0, 3.0]]),
            Err(Error::NonFinite { row: 1, column: 1 })
        );
        assert_eq!(
            Dataset::from_rows(&[[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]),
            Err(Error::ZeroVariance { column: 1 })
        );
        assert_eq!(
            Dataset::from_rows(&[[1.0], [2.0], [3.0]]),
            Err(Error::NoCovariates)
        );
    }

    #[test]
    fn columns_layout() {
        let data =
            Dataset::from_columns(&[1.0, 2.0, 3.0], &[vec![2.0, 1.0, 3.0], vec![0.0, 1.0, 5.0]])
                .unwrap();
        assert_eq!(data.n(), 3);
        assert_eq!(data.d(), 2);
        assert_eq!(data.row(1), &[2.0, 1.0, 1.0]);
        assert_eq!(data.column(2).collect::<Vec<_>>(), vec![0.0, 1.0, 5.0]);
    }
}
