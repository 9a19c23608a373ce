//! `smcmc summarize`: merge per-run table rows into one comparison table.
//!
//! Rows that share algorithm, label, batch size and chain count are treated
//! as replicates: their sorted means are averaged coordinate-wise and the
//! reported sd is that of the averaged vector.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use smcmc_core::stats::mean_sd;

use crate::report::{fmt_f64, Table};

const KEY_COLUMNS: usize = 4;

/// Iteration counts and sorted means, one entry per replicate.
type Group = (Vec<f64>, Vec<Vec<f64>>);

/// Accepts `table.csv` files or run directories containing one.
pub fn summarize(inputs: &[PathBuf]) -> Result<Table> {
    let mut groups: BTreeMap<Vec<String>, Group> = BTreeMap::new();
    let mut k = None;
    for input in inputs {
        let path = if input.is_dir() {
            input.join("table.csv")
        } else {
            input.clone()
        };
        for (key, iters, means) in read_rows(&path)? {
            if *k.get_or_insert(means.len()) != means.len() {
                bail!(
                    "{}: rows have {} means, expected {}",
                    path.display(),
                    means.len(),
                    k.unwrap()
                );
            }
            let g = groups.entry(key).or_default();
            g.0.push(iters);
            g.1.push(means);
        }
    }
    let k = k.ok_or_else(|| anyhow!("no table rows found"))?;
    let mut header: Vec<String> = [
        "algorithm",
        "label",
        "batch_size",
        "chains",
        "replicates",
        "iterations",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=k).map(|j| format!("mean_{j}")));
    header.push("sd".into());
    let mut out = Table::new(header);
    for (key, (iters, reps)) in groups {
        let avg: Vec<f64> = (0..k)
            .map(|j| reps.iter().map(|r| r[j]).sum::<f64>() / reps.len() as f64)
            .collect();
        let (_, sd) = mean_sd(&avg);
        let mut row = key;
        row.push(reps.len().to_string());
        row.push(fmt_f64(iters.iter().sum::<f64>() / iters.len() as f64));
        row.extend(avg.iter().map(|m| fmt_f64(*m)));
        row.push(fmt_f64(sd));
        out.push(row);
    }
    Ok(out)
}

type Row = (Vec<String>, f64, Vec<f64>);

fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    if headers.len() < KEY_COLUMNS + 3 || headers.get(KEY_COLUMNS) != Some("iterations") {
        bail!("{}: not a run table", path.display());
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| anyhow!("{} line {line}: bad number {:?}", path.display(), &rec[i]))
        };
        let key = (0..KEY_COLUMNS).map(|i| rec[i].to_string()).collect();
        let iters = num(KEY_COLUMNS)?;
        let means = (KEY_COLUMNS + 1..rec.len() - 1).map(num).collect::<Result<_>>()?;
        rows.push((key, iters, means));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replicates_are_averaged() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, m: [f64; 2]| {
            let p = dir.path().join(name);
            std::fs::write(
                &p,
                format!("algorithm,label,batch_size,chains,iterations,mean_1,mean_2,sd\nsmcmc,a,1,10,100,{},{},0\n", m[0], m[1]),
            )
            .unwrap();
            p
        };
        let a = write("a.csv", [1.0, 3.0]);
        let b = write("b.csv", [2.0, 2.0]);
        let t = summarize(&[a, b]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0][4], "2");
        assert_eq!(t.rows[0][6].parse::<f64>().unwrap(), 1.5);
        assert_eq!(t.rows[0][7].parse::<f64>().unwrap(), 2.5);
        assert!((t.rows[0][8].parse::<f64>().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
