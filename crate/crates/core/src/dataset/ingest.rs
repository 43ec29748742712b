use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use super::{Dataset, FeatureKind, TaskKind};
use crate::error::{Error, Result};

/// Loads a headed CSV file. See [`read_csv`].
pub fn load_csv(
    path: impl AsRef<Path>,
    target_name: &str,
    task: TaskKind,
    kind_overrides: &HashMap<String, FeatureKind>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, target_name, task, kind_overrides)
}

/// Parses a headed CSV document into a [`Dataset`].
///
/// Columns whose cells all parse as numbers are continuous; anything else is
/// categorical, coded by order of first appearance. Classification targets
/// are coded the same way. Empty cells are rejected.
/// A categorical override with `cardinality: 0` takes the observed level count.
pub fn read_csv<R: Read>(
    reader: R,
    target_name: &str,
    task: TaskKind,
    kind_overrides: &HashMap<String, FeatureKind>,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let target_col = header
        .iter()
        .position(|h| h == target_name)
        .ok_or_else(|| Error::data(format!("target column `{target_name}` not found")))?;
    for name in kind_overrides.keys() {
        if !header.contains(name) || name == target_name {
            return Err(Error::data(format!("kind override names unknown feature `{name}`")));
        }
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        for (c, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::data(format!("missing value in column `{}` at data row {}", header[c], r + 1)));
            }
            raw[c].push(cell.to_string());
        }
    }
    let n = raw[target_col].len();
    if n == 0 {
        return Err(Error::data("csv has no data rows"));
    }

    let target_raw = raw.remove(target_col);
    let mut names = header;
    names.remove(target_col);

    let (target, class_labels) = match task {
        TaskKind::Regression => {
            let values = parse_numeric(&target_raw)
                .ok_or_else(|| Error::data(format!("regression target `{target_name}` is not numeric")))?;
            (values, None)
        }
        TaskKind::Classification => {
            let (codes, labels) = encode_first_appearance(&target_raw);
            if labels.len() < 2 {
                return Err(Error::data(format!("classification target `{target_name}` has a single class")));
            }
            (codes, Some(labels))
        }
    };

    let mut kinds = Vec::with_capacity(names.len());
    let mut columns = Vec::with_capacity(names.len());
    let mut categories = Vec::with_capacity(names.len());
    for (name, cells) in names.iter().zip(&raw) {
        let numeric = parse_numeric(cells);
        match (kind_overrides.get(name), numeric) {
            (Some(FeatureKind::Continuous), None) => {
                return Err(Error::data(format!("column `{name}` is declared continuous but holds text")));
            }
            (None | Some(FeatureKind::Continuous), Some(values)) => {
                kinds.push(FeatureKind::Continuous);
                columns.push(values);
                categories.push(None);
            }
            (declared, _) => {
                let (codes, levels) = encode_first_appearance(cells);
                let cardinality = match declared {
                    Some(FeatureKind::Categorical { cardinality: 0 }) => levels.len(),
                    Some(FeatureKind::Categorical { cardinality }) if *cardinality < levels.len() => {
                        return Err(Error::data(format!(
                            "column `{name}` declares {cardinality} levels but has {}",
                            levels.len()
                        )));
                    }
                    Some(FeatureKind::Categorical { cardinality }) => *cardinality,
                    _ => levels.len(),
                };
                if cardinality < 2 {
                    return Err(Error::data(format!("categorical column `{name}` has a single level")));
                }
                kinds.push(FeatureKind::Categorical { cardinality });
                columns.push(codes);
                categories.push(Some(levels));
            }
        }
    }

    let mut ds = Dataset::new(names, kinds, columns, target, task)?;
    ds.set_encodings(categories, class_labels);
    Ok(ds)
}

fn parse_numeric(cells: &[String]) -> Option<Vec<f64>> {
    cells
        .iter()
        .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect()
}

fn encode_first_appearance(cells: &[String]) -> (Vec<f64>, Vec<String>) {
    let mut table: HashMap<&str, usize> = HashMap::new();
    let mut levels = Vec::new();
    let codes = cells
        .iter()
        .map(|c| {
            let next = levels.len();
            let code = *table.entry(c.as_str()).or_insert_with(|| {
                levels.push(c.clone());
                next
            });
            code as f64
        })
        .collect();
    (codes, levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, target: &str, task: TaskKind) -> Result<Dataset> {
        read_csv(text.as_bytes(), target, task, &HashMap::new())
    }

    #[test]
    fn encodes_target_by_first_appearance() {
        let ds = parse("a,b,y\n1,2,yes\n3,4,no\n5,6,no\n7,8,yes\n", "y", TaskKind::Classification).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_classes(), 2);
        assert_eq!(ds.target(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(ds.class_labels().unwrap(), &["yes".to_string(), "no".to_string()]);
    }

    #[test]
    fn unknown_target_is_an_error() {
        let err = parse("a,b,y\n1,2,yes\n3,4,no\n", "z", TaskKind::Classification).unwrap_err();
        assert!(err.to_string().contains("`z`"));
    }

    #[test]
    fn text_columns_become_categorical() {
        let ds = parse("color,y\nred,1\nblue,2\nred,3\n", "y", TaskKind::Regression).unwrap();
        assert_eq!(ds.kinds()[0], FeatureKind::Categorical { cardinality: 2 });
        assert_eq!(ds.column(0), &[0.0, 1.0, 0.0]);
        let table = ds.categories(0).unwrap();
        let decoded: Vec<&str> = ds.column(0).iter().map(|&c| table[c as usize].as_str()).collect();
        assert_eq!(decoded, ["red", "blue", "red"]);
    }

    #[test]
    fn rejects_missing_cells_and_bad_targets() {
        assert!(parse("a,y\n1,2\n,3\n", "y", TaskKind::Regression).is_err());
        assert!(parse("a,y\n1,x\n2,y\n", "y", TaskKind::Regression).is_err());
        assert!(parse("a,y\n1,k\n2,k\n", "y", TaskKind::Classification).is_err());
        assert!(matches!(
            load_csv("/nonexistent/file.csv", "y", TaskKind::Regression, &HashMap::new()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn overrides_force_categorical_codes() {
        let mut overrides = HashMap::new();
        overrides.insert("a".to_string(), FeatureKind::Categorical { cardinality: 3 });
        let ds = read_csv("a,y\n10,1\n20,2\n10,3\n".as_bytes(), "y", TaskKind::Regression, &overrides).unwrap();
        assert_eq!(ds.kinds()[0], FeatureKind::Categorical { cardinality: 3 });
        assert_eq!(ds.column(0), &[0.0, 1.0, 0.0]);

        let mut bad = HashMap::new();
        bad.insert("a".to_string(), FeatureKind::Continuous);
        assert!(read_csv("a,y\nx,1\ny,2\n".as_bytes(), "y", TaskKind::Regression, &bad).is_err());
    }
}
