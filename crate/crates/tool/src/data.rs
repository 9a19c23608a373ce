//! CSV ingestion and export of observations.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use smcmc_core::gp::GpObs;

use crate::config::Schema;
use crate::report::fmt_f64;

/// Observations of either model.
#[derive(Debug, Clone, PartialEq)]
pub enum Observations {
    Mixture(Vec<f64>),
    Gp(Vec<GpObs>),
}

impl Observations {
    pub fn len(&self) -> usize {
        match self {
            Observations::Mixture(y) => y.len(),
            Observations::Gp(o) => o.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Systolic pressure above which a subject counts as hypertensive.
pub const SBP_THRESHOLD: f64 = 139.0;

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| anyhow!("{}: missing column `{name}`", path.display()))
}

fn parse_cell(rec: &csv::StringRecord, idx: usize, name: &str, path: &Path) -> Result<f64> {
    let line = rec.position().map_or(0, |p| p.line());
    let cell = rec.get(idx).unwrap_or("");
    let v: f64 = cell.parse().map_err(|_| {
        anyhow!(
            "{} line {line}: column `{name}` is not numeric: {cell:?}",
            path.display()
        )
    })?;
    if !v.is_finite() {
        bail!("{} line {line}: column `{name}` is not finite", path.display());
    }
    Ok(v)
}

fn records(path: &Path) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut rdr = reader(path)?;
    let headers = rdr
        .headers()
        .with_context(|| format!("{}: reading header", path.display()))?
        .clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            anyhow!("{} line {line}: {e}", path.display())
        })?;
        out.push(rec);
    }
    Ok((headers, out))
}

/// Load observations according to `schema`.
pub fn load_csv(path: &Path, schema: Schema) -> Result<Observations> {
    let (headers, recs) = records(path)?;
    match schema {
        Schema::Mixture => {
            let y = column(&headers, "y", path)?;
            let vals = recs
                .iter()
                .map(|r| parse_cell(r, y, "y", path))
                .collect::<Result<_>>()?;
            Ok(Observations::Mixture(vals))
        }
        Schema::Gp => {
            let mut xs = Vec::new();
            for d in 1.. {
                let name = format!("x{d}");
                match headers.iter().position(|h| h == name) {
                    Some(i) => xs.push((i, name)),
                    None => break,
                }
            }
            if xs.is_empty() {
                bail!("{}: missing column `x1`", path.display());
            }
            let y = column(&headers, "y", path)?;
            let mut out = Vec::with_capacity(recs.len());
            for r in &recs {
                let x = xs
                    .iter()
                    .map(|(i, name)| parse_cell(r, *i, name, path))
                    .collect::<Result<Vec<_>>>()?;
                let label = parse_cell(r, y, "y", path)?;
                let y = match label {
                    0.0 => false,
                    1.0 => true,
                    v => bail!(
                        "{} line {}: column `y` must be 0 or 1, got {v}",
                        path.display(),
                        r.position().map_or(0, |p| p.line())
                    ),
                };
                out.push(GpObs { x, y });
            }
            Ok(Observations::Gp(out))
        }
        Schema::Heart => {
            let sbp = column(&headers, "sbp", path)?;
            let obesity = column(&headers, "obesity", path)?;
            let age = column(&headers, "age", path)?;
            let out = recs
                .iter()
                .map(|r| {
                    let s = parse_cell(r, sbp, "sbp", path)?;
                    Ok(GpObs {
                        x: vec![
                            parse_cell(r, obesity, "obesity", path)?,
                            parse_cell(r, age, "age", path)?,
                        ],
                        y: s > SBP_THRESHOLD,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(Observations::Gp(out))
        }
    }
}

/// Write observations in the `mixture` or `gp` schema.
pub fn write_csv(path: &Path, obs: &Observations) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    match obs {
        Observations::Mixture(y) => {
            w.write_record(["y"])?;
            for v in y {
                w.write_record([fmt_f64(*v)])?;
            }
        }
        Observations::Gp(o) => {
            let d = o.first().map_or(0, |p| p.x.len());
            let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
            header.push("y".into());
            w.write_record(&header)?;
            for p in o {
                let mut row: Vec<String> = p.x.iter().map(|v| fmt_f64(*v)).collect();
                row.push(if p.y { "1" } else { "0" }.into());
                w.write_record(&row)?;
            }
        }
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn heart_threshold_is_strict() {
        let f = file("row.names,sbp,tobacco,famhist,obesity,age,chd\n1,139,0,Present,25.3,52,1\n2,140,1,Absent,28.9,63,0\n");
        let Observations::Gp(o) = load_csv(f.path(), Schema::Heart).unwrap() else {
            panic!()
        };
        assert!(!o[0].y);
        assert!(o[1].y);
        assert_eq!(o[1].x, vec![28.9, 63.0]);
    }

    #[test]
    fn bad_cell_reports_line() {
        let f = file("y\n1.0\n2.0\nabc\n");
        let msg = load_csv(f.path(), Schema::Mixture).unwrap_err().to_string();
        assert!(msg.contains("line 4"), "{msg}");
    }

    #[test]
    fn ragged_row_reports_line() {
        let f = file("x1,x2,y\n0.1,0.2,1\n0.3,0\n");
        let msg = load_csv(f.path(), Schema::Gp).unwrap_err().to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn header_only_gives_no_observations() {
        let f = file("y\n");
        assert!(load_csv(f.path(), Schema::Mixture).unwrap().is_empty());
    }

    #[test]
    fn round_trip() {
        let obs = Observations::Gp(vec![
            GpObs {
                x: vec![0.1, -2.5],
                y: true,
            },
            GpObs {
                x: vec![1.0 / 3.0, 7.0],
                y: false,
            },
        ]);
        let f = tempfile::NamedTempFile::new().unwrap();
        write_csv(f.path(), &obs).unwrap();
        assert_eq!(load_csv(f.path(), Schema::Gp).unwrap(), obs);
        let obs = Observations::Mixture(vec![std::f64::consts::PI, -1e-300, 12.5]);
        write_csv(f.path(), &obs).unwrap();
        assert_eq!(load_csv(f.path(), Schema::Mixture).unwrap(), obs);
    }
}
