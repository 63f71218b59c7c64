//! Price curves over a grid of underlying prices, with CSV input and output.
//!
//! Values are written with 12 significant digits in the `%.12g` style of C,
//! one row per `S`, comma separated, LF line endings, with a header row.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::black_scholes::OptionKind;
use crate::error::{Error, Result};

/// Number of significant digits in CSV output.
pub const CSV_DIGITS: usize = 12;

/// Column-oriented table of prices. `S` and the payoff are always present.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceCurve {
    kind: OptionKind,
    spots: Vec<f64>,
    spectral: Option<Vec<f64>>,
    closed_form: Option<Vec<f64>>,
    fd: Option<Vec<f64>>,
    payoff: Vec<f64>,
}

impl PriceCurve {
    pub fn new(kind: OptionKind, spots: Vec<f64>, payoff: Vec<f64>) -> Result<Self> {
        if spots.is_empty() {
            return Err(Error::Usage("price curve needs at least one point".into()));
        }
        if spots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Usage("S values must be strictly increasing".into()));
        }
        let curve = Self {
            kind,
            spots,
            spectral: None,
            closed_form: None,
            fd: None,
            payoff,
        };
        curve.check_len(&curve.payoff)?;
        Ok(curve)
    }

    fn check_len(&self, column: &[f64]) -> Result<()> {
        if column.len() != self.spots.len() {
            return Err(Error::Usage(format!(
                "column has {} values for {} S points",
                column.len(),
                self.spots.len()
            )));
        }
        Ok(())
    }

    pub fn with_spectral(mut self, values: Vec<f64>) -> Result<Self> {
        self.check_len(&values)?;
        self.spectral = Some(values);
        Ok(self)
    }

    pub fn with_closed_form(mut self, values: Vec<f64>) -> Result<Self> {
        self.check_len(&values)?;
        self.closed_form = Some(values);
        Ok(self)
    }

    pub fn with_fd(mut self, values: Vec<f64>) -> Result<Self> {
        self.check_len(&values)?;
        self.fd = Some(values);
        Ok(self)
    }

    pub fn kind(&self) -> OptionKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.spots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spots.is_empty()
    }

    pub fn spots(&self) -> &[f64] {
        &self.spots
    }

    pub fn spectral(&self) -> Option<&[f64]> {
        self.spectral.as_deref()
    }

    pub fn closed_form(&self) -> Option<&[f64]> {
        self.closed_form.as_deref()
    }

    pub fn fd(&self) -> Option<&[f64]> {
        self.fd.as_deref()
    }

    pub fn payoff(&self) -> &[f64] {
        &self.payoff
    }

    fn columns(&self) -> Vec<(&'static str, &[f64])> {
        let mut cols: Vec<(&'static str, &[f64])> = vec![("S", &self.spots)];
        if let Some(v) = &self.spectral {
            cols.push(("C_a", v));
        }
        if let Some(v) = &self.closed_form {
            let name = match self.kind {
                OptionKind::Call => "C_call",
                OptionKind::Put => "C_put",
            };
            cols.push((name, v));
        }
        if let Some(v) = &self.fd {
            cols.push(("C_fd", v));
        }
        cols.push(("payoff", &self.payoff));
        cols
    }

    pub fn header(&self) -> Vec<&'static str> {
        self.columns().into_iter().map(|(name, _)| name).collect()
    }

    pub fn to_csv(&self) -> String {
        let cols = self.columns();
        let mut out = cols.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(",");
        out.push('\n');
        for i in 0..self.len() {
            for (j, (_, col)) in cols.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format_significant(col[i], CSV_DIGITS));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Parses the output of [`to_csv`](Self::to_csv). Put curves are
    /// recognized by a `C_put` column; anything else reads as a call.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Usage("CSV is empty".into()))?
            .split(',')
            .collect();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(Error::Usage(format!(
                    "CSV row {} has {} fields, expected {}",
                    row + 1,
                    fields.len(),
                    header.len()
                )));
            }
            for (col, field) in columns.iter_mut().zip(fields) {
                col.push(field.trim().parse().map_err(|_| {
                    Error::Usage(format!("CSV row {}: cannot parse {field:?}", row + 1))
                })?);
            }
        }

        let mut kind = OptionKind::Call;
        let (mut spots, mut payoff) = (None, None);
        let (mut spectral, mut closed, mut fd) = (None, None, None);
        for (name, col) in header.iter().zip(columns) {
            let slot = match name.trim() {
                "S" => &mut spots,
                "payoff" => &mut payoff,
                "C_a" => &mut spectral,
                "C_call" => &mut closed,
                "C_put" => {
                    kind = OptionKind::Put;
                    &mut closed
                }
                "C_fd" => &mut fd,
                other => return Err(Error::Usage(format!("unknown CSV column {other:?}"))),
            };
            if slot.replace(col).is_some() {
                return Err(Error::Usage(format!("duplicate CSV column {name:?}")));
            }
        }
        let spots = spots.ok_or_else(|| Error::Usage("CSV lacks an S column".into()))?;
        let payoff = payoff.ok_or_else(|| Error::Usage("CSV lacks a payoff column".into()))?;
        let mut curve = Self::new(kind, spots, payoff)?;
        if let Some(v) = spectral {
            curve = curve.with_spectral(v)?;
        }
        if let Some(v) = closed {
            curve = curve.with_closed_form(v)?;
        }
        if let Some(v) = fd {
            curve = curve.with_fd(v)?;
        }
        Ok(curve)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv(&text)
    }

    /// Every value rounded to what the CSV format keeps.
    pub fn rounded(&self) -> Self {
        let round = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .map(|x| format_significant(*x, CSV_DIGITS).parse().unwrap_or(*x))
                .collect()
        };
        Self {
            kind: self.kind,
            spots: round(&self.spots),
            spectral: self.spectral.as_deref().map(round),
            closed_form: self.closed_form.as_deref().map(round),
            fd: self.fd.as_deref().map(round),
            payoff: round(&self.payoff),
        }
    }
}

/// `printf("%.{digits}g", value)`: shortest of fixed or exponent notation
/// with trailing zeros removed.
pub fn format_significant(value: f64, digits: usize) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf" } else { "-inf" }.into();
    }
    let digits = digits.max(1);
    if value == 0.0 {
        return if value.is_sign_negative() { "-0" } else { "0" }.into();
    }
    // Rounding to `digits` first fixes the exponent, as C does.
    let sci = format!("{:.*e}", digits - 1, value);
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let mut out = String::new();
    if exp < -4 || exp >= digits as i32 {
        out.push_str(strip_zeros(mantissa));
        let _ = write!(out, "e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        out.push_str(strip_zeros(&format!("{value:.decimals$}")));
    }
    out
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
