//! Spearman rank correlation between visual and audio feature columns.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Written in place of a correlation that cannot be computed.
pub const UNDEFINED_SENTINEL: &str = "NA";

const MISSING_MARKERS: &[&str] = &["", "na", "nan", "null", "none"];

/// Per-scene table: a `scene_id` key column plus named numeric columns with
/// explicit missing cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureTable {
    scene_ids: Vec<String>,
    names: Vec<String>,
    columns: Vec<Vec<Option<f64>>>,
}

impl FeatureTable {
    pub fn new(scene_ids: Vec<String>) -> Self {
        Self {
            scene_ids,
            ..Self::default()
        }
    }

    pub fn add_column(&mut self, name: impl Into<String>, values: Vec<Option<f64>>) -> Result<()> {
        let name = name.into();
        if values.len() != self.scene_ids.len() {
            return Err(Error::LengthMismatch(values.len(), self.scene_ids.len()));
        }
        if self.names.contains(&name) || name == "scene_id" {
            return Err(Error::schema("feature table", format!("duplicate column `{name}`")));
        }
        if let Some(pos) = values.iter().position(|v| v.is_some_and(|x| !x.is_finite())) {
            return Err(Error::NonFinite(pos));
        }
        self.names.push(name);
        self.columns.push(values);
        Ok(())
    }

    pub fn row_count(&self) -> usize {
        self.scene_ids.len()
    }

    pub fn scene_ids(&self) -> &[String] {
        &self.scene_ids
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Result<&[Option<f64>]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Parse a CSV whose first column is `scene_id`. Empty, `NA`, `NaN`,
    /// `null` and `none` cells (any case) are missing.
    pub fn from_csv<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if header.first().map(String::as_str) != Some("scene_id") {
            return Err(Error::schema(source, "first column must be `scene_id`"));
        }
        let mut scene_ids = Vec::new();
        let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); header.len() - 1];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let location = format!("{source} row {}", row + 2);
            scene_ids.push(rec[0].to_string());
            for (j, col) in cols.iter_mut().enumerate() {
                let cell = rec[j + 1].trim();
                if MISSING_MARKERS.contains(&cell.to_ascii_lowercase().as_str()) {
                    col.push(None);
                    continue;
                }
                let value: f64 = cell.parse().map_err(|_| {
                    Error::schema(
                        &location,
                        format!("column `{}`: `{cell}` is not numeric", header[j + 1]),
                    )
                })?;
                if !value.is_finite() {
                    return Err(Error::schema(
                        &location,
                        format!("column `{}`: non-finite value", header[j + 1]),
                    ));
                }
                col.push(Some(value));
            }
        }
        let mut table = FeatureTable::new(scene_ids);
        for (name, col) in header.into_iter().skip(1).zip(cols) {
            table.add_column(name, col)?;
        }
        Ok(table)
    }

    pub fn from_csv_file(path: &Path) -> Result<Self> {
        Self::from_csv(File::open(path)?, &path.display().to_string())
    }

    /// Inner join on `scene_id`, keeping this table's row order.
    pub fn join(&self, other: &FeatureTable) -> Result<FeatureTable> {
        let index: HashMap<&str, usize> = other
            .scene_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let pairs: Vec<(usize, usize)> = self
            .scene_ids
            .iter()
            .enumerate()
            .filter_map(|(i, s)| index.get(s.as_str()).map(|&j| (i, j)))
            .collect();
        let mut joined = FeatureTable::new(pairs.iter().map(|&(i, _)| self.scene_ids[i].clone()).collect());
        for (name, col) in self.names.iter().zip(&self.columns) {
            joined.add_column(name.clone(), pairs.iter().map(|&(i, _)| col[i]).collect())?;
        }
        for (name, col) in other.names.iter().zip(&other.columns) {
            joined.add_column(name.clone(), pairs.iter().map(|&(_, j)| col[j]).collect())?;
        }
        Ok(joined)
    }
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn rank_with_ties(values: &[f64]) -> Result<Vec<f64>> {
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(pos));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = shared;
        }
        start = end;
    }
    Ok(ranks)
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateColumn);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation of tie-averaged ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(x.len()));
    }
    pearson(&rank_with_ties(x)?, &rank_with_ties(y)?)
}

/// Spearman over the rows where both values are present. Returns the
/// coefficient and the number of rows used.
pub fn spearman_pairwise(x: &[Option<f64>], y: &[Option<f64>]) -> Result<(f64, usize)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = x.iter().zip(y).filter_map(|(a, b)| Some(((*a)?, (*b)?))).unzip();
    let n = xs.len();
    spearman(&xs, &ys).map(|rho| (rho, n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `None` marks a cell that could not be computed.
    pub values: Vec<Vec<Option<f64>>>,
    pub pair_counts: Vec<Vec<usize>>,
}

impl CorrelationMatrix {
    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let i = self.row_labels.iter().position(|r| r == row)?;
        let j = self.col_labels.iter().position(|c| c == col)?;
        self.values[i][j]
    }

    fn write_grid<W: Write, T>(&self, writer: W, cell: impl Fn(&T) -> String, grid: &[Vec<T>]) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        let mut header = vec!["feature".to_string()];
        header.extend(self.col_labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.row_labels.iter().zip(grid) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(&cell));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Coefficients at 6 decimals; undefined cells as `NA`.
    pub fn write_values_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_grid(
            writer,
            |v: &Option<f64>| v.map_or_else(|| UNDEFINED_SENTINEL.to_string(), |x| format!("{x:.6}")),
            &self.values,
        )
    }

    pub fn write_counts_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_grid(writer, |c: &usize| c.to_string(), &self.pair_counts)
    }

    /// Writes the matrix to `path` and the pair counts next to it as
    /// `<stem>.counts.csv`, returning the counts path.
    pub fn write_files(&self, path: &Path) -> Result<std::path::PathBuf> {
        let counts_path = counts_path_for(path);
        self.write_values_csv(BufWriter::new(File::create(path)?))?;
        self.write_counts_csv(BufWriter::new(File::create(&counts_path)?))?;
        Ok(counts_path)
    }
}

pub fn counts_path_for(path: &Path) -> std::path::PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("matrix");
    path.with_file_name(format!("{stem}.counts.csv"))
}

pub fn correlation_matrix(
    table: &FeatureTable,
    visual_cols: &[String],
    audio_cols: &[String],
) -> Result<CorrelationMatrix> {
    let rows: Vec<&[Option<f64>]> = visual_cols.iter().map(|c| table.column(c)).collect::<Result<_>>()?;
    let cols: Vec<&[Option<f64>]> = audio_cols.iter().map(|c| table.column(c)).collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(rows.len());
    let mut pair_counts = Vec::with_capacity(rows.len());
    for x in &rows {
        let mut vrow = Vec::with_capacity(cols.len());
        let mut crow = Vec::with_capacity(cols.len());
        for y in &cols {
            let used = x
                .iter()
                .zip(y.iter())
                .filter(|(a, b)| a.is_some() && b.is_some())
                .count();
            let rho = match spearman_pairwise(x, y) {
                Ok((rho, _)) => Some(rho),
                Err(Error::InsufficientData(_) | Error::DegenerateColumn) => None,
                Err(e) => return Err(e),
            };
            vrow.push(rho);
            crow.push(used);
        }
        values.push(vrow);
        pair_counts.push(crow);
    }
    Ok(CorrelationMatrix {
        row_labels: visual_cols.to_vec(),
        col_labels: audio_cols.to_vec(),
        values,
        pair_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ranks() {
        assert_eq!(rank_with_ties(&[10.0, 20.0, 30.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(rank_with_ties(&[5.0, 5.0]).unwrap(), vec![1.5, 1.5]);
        assert_eq!(rank_with_ties(&[3.0, 1.0, 3.0, 2.0]).unwrap(), vec![3.5, 1.0, 3.5, 2.0]);
        assert!(matches!(rank_with_ties(&[1.0, f64::NAN]), Err(Error::NonFinite(1))));
        assert!(rank_with_ties(&[]).unwrap().is_empty());
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&x, &[10.0, 20.0, 30.0, 40.0]).unwrap(), 1.0);
        assert_eq!(spearman(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        // d = (-1, 1, -1, 1): 1 - 6·4 / (4·15) = 0.6
        assert!((spearman(&x, &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn spearman_errors() {
        assert!(matches!(spearman(&[1.0], &[2.0]), Err(Error::InsufficientData(1))));
        assert!(matches!(
            spearman(&[1.0, 2.0], &[3.0, 3.0]),
            Err(Error::DegenerateColumn)
        ));
        assert!(matches!(
            spearman(&[1.0, 2.0], &[3.0]),
            Err(Error::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn pairwise_deletion() {
        let x = [Some(1.0), None, Some(2.0), Some(3.0)];
        let y = [Some(1.0), Some(9.0), None, Some(2.0)];
        let (rho, n) = spearman_pairwise(&x, &y).unwrap();
        assert_eq!((rho, n), (1.0, 2));
    }

    fn table(cols: &[(&str, Vec<Option<f64>>)]) -> FeatureTable {
        let n = cols[0].1.len();
        let mut t = FeatureTable::new((0..n).map(|i| format!("s{i}")).collect());
        for (name, col) in cols {
            t.add_column(*name, col.clone()).unwrap();
        }
        t
    }

    #[test]
    fn matrix_monotone_transform() {
        let loud: Vec<Option<f64>> = (0..20).map(|i| Some(-30.0 + i as f64 * 0.7)).collect();
        let tvi: Vec<Option<f64>> = loud.iter().map(|v| v.map(|x| (x / 10.0).exp())).collect();
        let t = table(&[("tvi", tvi), ("loudness", loud)]);
        let m = correlation_matrix(&t, &["tvi".into()], &["loudness".into()]).unwrap();
        assert_eq!(m.get("tvi", "loudness"), Some(1.0));
        assert_eq!(m.pair_counts, vec![vec![20]]);
    }

    #[test]
    fn matrix_independent_columns_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a: Vec<Option<f64>> = (0..1000).map(|_| Some(rng.gen::<f64>())).collect();
        let b: Vec<Option<f64>> = (0..1000).map(|_| Some(rng.gen::<f64>())).collect();
        let t = table(&[("motion", a), ("arousal", b)]);
        let m = correlation_matrix(&t, &["motion".into()], &["arousal".into()]).unwrap();
        assert!(m.get("motion", "arousal").unwrap().abs() < 0.1);
    }

    #[test]
    fn matrix_undefined_and_unknown() {
        let t = table(&[
            ("motion", vec![Some(1.0), Some(2.0), Some(3.0)]),
            ("flat", vec![Some(1.0), Some(1.0), Some(1.0)]),
            ("sparse", vec![Some(1.0), None, None]),
        ]);
        let m = correlation_matrix(&t, &["motion".into()], &["flat".into(), "sparse".into()]).unwrap();
        assert_eq!(m.values, vec![vec![None, None]]);
        assert_eq!(m.pair_counts, vec![vec![3, 1]]);
        let mut out = Vec::new();
        m.write_values_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "feature,flat,sparse\nmotion,NA,NA\n");
        assert!(matches!(
            correlation_matrix(&t, &["nope".into()], &["flat".into()]),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn csv_parsing_and_join() {
        let visual = "scene_id,motion,tvi\na,0.1,0.2\nb,NA,0.3\nc,0.5,\n";
        let audio = "scene_id,loudness\nc,-8\na,-10\nz,-1\n";
        let v = FeatureTable::from_csv(visual.as_bytes(), "visual").unwrap();
        assert_eq!(v.column("motion").unwrap(), &[Some(0.1), None, Some(0.5)]);
        assert_eq!(v.column("tvi").unwrap(), &[Some(0.2), Some(0.3), None]);
        let a = FeatureTable::from_csv(audio.as_bytes(), "audio").unwrap();
        let j = v.join(&a).unwrap();
        assert_eq!(j.scene_ids(), &["a".to_string(), "c".to_string()]);
        assert_eq!(j.column("loudness").unwrap(), &[Some(-10.0), Some(-8.0)]);
        assert!(FeatureTable::from_csv("id,x\n".as_bytes(), "bad").is_err());
        assert!(FeatureTable::from_csv("scene_id,x\na,abc\n".as_bytes(), "bad").is_err());
        assert!(FeatureTable::from_csv("scene_id,x,x\na,1,2\n".as_bytes(), "dup").is_err());
    }

    #[test]
    fn counts_path() {
        assert_eq!(
            counts_path_for(Path::new("/tmp/matrix.csv")),
            Path::new("/tmp/matrix.counts.csv")
        );
    }
}
