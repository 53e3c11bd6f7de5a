//! Sampled complex data on a strictly increasing axis (time or frequency).

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Trace<T> {
    /// s or Hz.
    pub axis: Vec<T>,
    pub values: Vec<Complex<T>>,
    /// Scenario id, parameters and anything else worth echoing.
    pub metadata: BTreeMap<String, String>,
}

impl<T: Real> Trace<T> {
    pub fn new(axis: Vec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if axis.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "axis has {} samples but values have {}",
                axis.len(),
                values.len()
            )));
        }
        if let Some(k) = axis.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!(
                "axis is not strictly increasing at sample {}",
                k + 1
            )));
        }
        Ok(Self {
            axis,
            values,
            metadata: BTreeMap::new(),
        })
    }

    /// Real-valued samples stored with zero imaginary part.
    pub fn from_real(axis: Vec<T>, values: &[T]) -> Result<Self> {
        Self::new(axis, values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm_sqr().sqrt()).collect()
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.values.iter().map(|z| z.re).collect()
    }

    /// Writes `axis,real,imag,abs` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["axis", "real", "imag", "abs"])?;
        for (x, z) in self.axis.iter().zip(&self.values) {
            w.write_record([
                fmt_num(x.to_f64_lossy()),
                fmt_num(z.re.to_f64_lossy()),
                fmt_num(z.im.to_f64_lossy()),
                fmt_num(z.norm_sqr().sqrt().to_f64_lossy()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads `(axis, real, imag)` or `(axis, magnitude)` columns. A
/// four-column file written by [`Trace::write_csv`] is read through its
/// real and imaginary parts. A non-numeric first row is taken as a header.
pub fn read_trace_csv<R: Read>(input: R) -> Result<Trace<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(input);
    let mut axis = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let nums = match parsed {
            Ok(v) => v,
            Err(_) if row == 0 => continue,
            Err(e) => {
                return Err(Error::InvalidArgument(format!(
                    "row {}: non-numeric field ({e})",
                    row + 1
                )))
            }
        };
        if *width.get_or_insert(nums.len()) != nums.len() {
            return Err(Error::InvalidArgument(format!(
                "row {} has {} columns, expected {}",
                row + 1,
                nums.len(),
                width.unwrap_or(0)
            )));
        }
        let z = match nums.len() {
            2 => Complex::new(nums[1], 0.0),
            3 | 4 => Complex::new(nums[1], nums[2]),
            n => {
                return Err(Error::InvalidArgument(format!(
                    "trace CSV needs 2, 3 or 4 columns, found {n}"
                )))
            }
        };
        axis.push(nums[0]);
        values.push(z);
    }
    if axis.is_empty() {
        return Err(Error::InvalidArgument("trace CSV has no data rows".into()));
    }
    Trace::new(axis, values)
}
