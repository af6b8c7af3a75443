//! Dataset ingestion and synthetic data.
//!
//! CSV datasets come with a sidecar schema (`column=kind` lines) naming each
//! column boolean, categorical, continuous, the class column, a multilabel
//! membership column, or ignored. Categorical columns are one-hot encoded and
//! continuous columns are cut by recursive entropy splits with an MDL stop,
//! then turned into threshold indicators. The XD6 generator draws ten uniform
//! bits per example, labels them by a fixed 3-term DNF over the first nine,
//! and optionally flips labels (class noise) or attribute bits (attribute
//! noise).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::Bits;
use crate::committee::{Example, Sample};
use crate::error::{Error, Result};

/// Default cap on thresholds learned per continuous column.
pub const DEFAULT_MAX_THRESHOLDS: usize = 8;

/// How a CSV column is interpreted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Boolean,
    Categorical,
    Continuous,
    /// The single class column; its distinct values become the classes.
    Class,
    /// One multilabel membership column (0/1) per class.
    Label,
    Ignore,
}

impl ColumnKind {
    fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "boolean" | "bool" => Ok(Self::Boolean),
            "categorical" | "cat" => Ok(Self::Categorical),
            "continuous" | "cont" => Ok(Self::Continuous),
            "class" => Ok(Self::Class),
            "label" => Ok(Self::Label),
            "ignore" => Ok(Self::Ignore),
            other => Err(Error::data(format!("unknown column kind '{other}'"))),
        }
    }
}

/// Per-column kinds plus the class specification.
#[derive(Clone, Debug)]
pub struct DatasetSchema {
    columns: Vec<(String, ColumnKind)>,
}

impl DatasetSchema {
    pub fn new(columns: Vec<(String, ColumnKind)>) -> Result<Self> {
        let class_cols = columns
            .iter()
            .filter(|(_, k)| *k == ColumnKind::Class)
            .count();
        let label_cols = columns
            .iter()
            .filter(|(_, k)| *k == ColumnKind::Label)
            .count();
        match (class_cols, label_cols) {
            (1, 0) => {}
            (0, n) if n >= 2 => {}
            _ => {
                return Err(Error::data(
                    "schema needs exactly one class column or at least two label columns",
                ))
            }
        }
        Ok(Self { columns })
    }

    /// Parses the sidecar format: one `column=kind` line per column, with
    /// blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, kind) = line.split_once('=').ok_or_else(|| Error::DataAt {
                line: lineno + 1,
                message: format!("expected column=kind, got '{line}'"),
            })?;
            columns.push((name.trim().to_string(), ColumnKind::parse(kind)?));
        }
        Self::new(columns)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn columns(&self) -> &[(String, ColumnKind)] {
        &self.columns
    }

    fn kind_of(&self, name: &str) -> Option<&ColumnKind> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, k)| k)
    }
}

/// How one derived boolean variable is computed from its source column.
#[derive(Clone, Debug, PartialEq)]
pub enum VarRule {
    /// Boolean column passed through.
    Direct,
    /// Categorical indicator: value equals the stored category.
    OneHot(String),
    /// Continuous indicator: value strictly greater than the threshold
    /// (thresholds are in original units).
    GreaterThan(f64),
}

/// One derived boolean variable.
#[derive(Clone, Debug)]
pub struct DerivedVar {
    pub name: String,
    pub source_column: usize,
    pub rule: VarRule,
}

/// Mapping from original columns to derived boolean variables; applying it to
/// the raw rows regenerates the boolean observations exactly.
#[derive(Clone, Debug, Default)]
pub struct BinarizationMap {
    vars: Vec<DerivedVar>,
}

impl BinarizationMap {
    pub fn vars(&self) -> &[DerivedVar] {
        &self.vars
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    /// Booleanizes one raw CSV row.
    pub fn apply_row(&self, row: &[String]) -> Result<Bits> {
        let mut bits = Bits::zeros(self.vars.len());
        for (i, var) in self.vars.iter().enumerate() {
            let cell = row.get(var.source_column).ok_or_else(|| {
                Error::data(format!("row too short for column {}", var.source_column))
            })?;
            let value = match &var.rule {
                VarRule::Direct => parse_bool(cell)?,
                VarRule::OneHot(category) => cell == category,
                VarRule::GreaterThan(t) => parse_number(cell)? > *t,
            };
            bits.set(i, value);
        }
        Ok(bits)
    }
}

fn parse_bool(cell: &str) -> Result<bool> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" | "y" => Ok(true),
        "0" | "false" | "f" | "no" | "n" => Ok(false),
        other => Err(Error::data(format!("unparseable boolean '{other}'"))),
    }
}

fn parse_number(cell: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| Error::data(format!("unparseable number '{cell}'")))
}

/// A loaded dataset: the booleanized sample, the column mapping that produced
/// it, how many rows were dropped for missing values, and non-fatal warnings
/// (e.g. constant continuous columns that produced no thresholds).
#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub sample: Sample,
    pub map: BinarizationMap,
    pub dropped_rows: usize,
    pub warnings: Vec<String>,
}

/// Loads a CSV (first row header, `?` meaning missing) under a schema.
/// Boolean columns pass through, categorical columns are one-hot encoded,
/// continuous columns are discretized into threshold indicators, and rows
/// with missing values in used columns are dropped. Weights are uniform.
pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<LoadedDataset> {
    let (header, rows) = read_csv(path)?;
    load_rows(&header, rows, schema)
}

/// Raw CSV rows, each tagged with its 1-based source line.
type CsvRows = Vec<(usize, Vec<String>)>;

fn read_csv(path: &Path) -> Result<(Vec<String>, CsvRows)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::data(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::DataAt {
            line: i + 2,
            message: e.to_string(),
        })?;
        rows.push((i + 2, record.iter().map(|c| c.trim().to_string()).collect()));
    }
    Ok((header, rows))
}

/// Core of `load_csv`, operating on already-parsed rows. Each row carries its
/// source line number for error reporting.
pub fn load_rows(header: &[String], rows: CsvRows, schema: &DatasetSchema) -> Result<LoadedDataset> {
    // every header column must be covered by the schema
    let mut kinds = Vec::with_capacity(header.len());
    for name in header {
        let kind = schema
            .kind_of(name)
            .ok_or_else(|| Error::data(format!("column '{name}' missing from schema")))?;
        kinds.push(kind.clone());
    }

    // drop rows with a missing value in any used column
    let used: Vec<usize> = (0..header.len())
        .filter(|&i| kinds[i] != ColumnKind::Ignore)
        .collect();
    let mut kept: Vec<(usize, Vec<String>)> = Vec::new();
    let mut dropped = 0usize;
    for (line, row) in rows {
        if row.len() != header.len() {
            return Err(Error::DataAt {
                line,
                message: format!("expected {} cells, got {}", header.len(), row.len()),
            });
        }
        if used.iter().any(|&i| row[i] == "?") {
            dropped += 1;
        } else {
            kept.push((line, row));
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptySample);
    }

    // class structure
    let class_col = kinds.iter().position(|k| *k == ColumnKind::Class);
    let label_cols: Vec<usize> = (0..header.len())
        .filter(|&i| kinds[i] == ColumnKind::Label)
        .collect();
    let class_names: Vec<String> = if let Some(cc) = class_col {
        let mut values: Vec<String> = kept.iter().map(|(_, row)| row[cc].clone()).collect();
        values.sort();
        values.dedup();
        values
    } else {
        label_cols.iter().map(|&i| header[i].clone()).collect()
    };
    let c = class_names.len();
    if c < 2 {
        return Err(Error::data(format!("need at least 2 classes, found {c}")));
    }

    // labels per row (needed before discretization)
    let mut class_bits: Vec<Bits> = Vec::with_capacity(kept.len());
    for (line, row) in &kept {
        let mut bits = Bits::zeros(c);
        if let Some(cc) = class_col {
            let idx = class_names
                .iter()
                .position(|v| *v == row[cc])
                .ok_or_else(|| Error::DataAt {
                    line: *line,
                    message: format!("unknown class label '{}'", row[cc]),
                })?;
            bits.set(idx, true);
        } else {
            for (ci, &col) in label_cols.iter().enumerate() {
                if parse_bool(&row[col]).map_err(|e| Error::DataAt {
                    line: *line,
                    message: e.to_string(),
                })? {
                    bits.set(ci, true);
                }
            }
            if !bits.any() {
                return Err(Error::DataAt {
                    line: *line,
                    message: "row belongs to no class".into(),
                });
            }
        }
        class_bits.push(bits);
    }
    // single primary class per row, used to supervise discretization
    let primary: Vec<usize> = class_bits
        .iter()
        .map(|b| b.ones().next().expect("at least one class bit"))
        .collect();

    // build derived variables
    let mut vars: Vec<DerivedVar> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    for (col, name) in header.iter().enumerate() {
        match &kinds[col] {
            ColumnKind::Boolean => vars.push(DerivedVar {
                name: name.clone(),
                source_column: col,
                rule: VarRule::Direct,
            }),
            ColumnKind::Categorical => {
                let mut values: Vec<String> =
                    kept.iter().map(|(_, row)| row[col].clone()).collect();
                values.sort();
                values.dedup();
                for v in values {
                    vars.push(DerivedVar {
                        name: format!("{name}={v}"),
                        source_column: col,
                        rule: VarRule::OneHot(v),
                    });
                }
            }
            ColumnKind::Continuous => {
                let mut values = Vec::with_capacity(kept.len());
                for (line, row) in &kept {
                    values.push(parse_number(&row[col]).map_err(|e| Error::DataAt {
                        line: *line,
                        message: e.to_string(),
                    })?);
                }
                let thresholds = discretize(&values, &primary, DEFAULT_MAX_THRESHOLDS)?;
                if thresholds.is_empty() {
                    warnings.push(format!(
                        "continuous column '{name}' produced no thresholds and is dropped"
                    ));
                }
                for t in thresholds {
                    vars.push(DerivedVar {
                        name: format!("{name}>{t}"),
                        source_column: col,
                        rule: VarRule::GreaterThan(t),
                    });
                }
            }
            ColumnKind::Class | ColumnKind::Label | ColumnKind::Ignore => {}
        }
    }
    let map = BinarizationMap { vars };

    let mut examples = Vec::with_capacity(kept.len());
    let w = 1.0 / kept.len() as f64;
    for ((line, row), classes) in kept.iter().zip(class_bits) {
        let obs = map.apply_row(row).map_err(|e| Error::DataAt {
            line: *line,
            message: e.to_string(),
        })?;
        examples.push(Example::new(obs, classes, w).map_err(|e| Error::DataAt {
            line: *line,
            message: e.to_string(),
        })?);
    }
    let sample = Sample::new(examples, map.n(), c, class_names)?;
    Ok(LoadedDataset {
        sample,
        map,
        dropped_rows: dropped,
        warnings,
    })
}

/// Observations loaded for prediction, plus raw class labels when the data
/// still carries the class column.
#[derive(Clone, Debug)]
pub struct PredictionData {
    pub observations: Vec<Bits>,
    pub labels: Option<Vec<String>>,
}

/// Loads observations for prediction. Every non-class, non-ignored column in
/// the schema must be boolean (continuous and categorical encodings are fit
/// on training data and are not reconstructible here; predict on the
/// booleanized dump instead). The class column may be absent from the data.
pub fn load_for_prediction(path: &Path, schema: &DatasetSchema) -> Result<PredictionData> {
    let (header, rows) = read_csv(path)?;
    let mut var_cols: Vec<usize> = Vec::new();
    let mut class_col: Option<usize> = None;
    for (i, name) in header.iter().enumerate() {
        match schema.kind_of(name) {
            Some(ColumnKind::Boolean) => var_cols.push(i),
            Some(ColumnKind::Class) => class_col = Some(i),
            Some(ColumnKind::Ignore) | Some(ColumnKind::Label) => {}
            Some(kind) => {
                return Err(Error::data(format!(
                    "column '{name}' is {kind:?}; prediction input must be booleanized"
                )))
            }
            None => {
                return Err(Error::data(format!("column '{name}' missing from schema")))
            }
        }
    }
    let mut observations = Vec::with_capacity(rows.len());
    let mut labels = class_col.map(|_| Vec::with_capacity(rows.len()));
    for (line, row) in rows {
        let mut obs = Bits::zeros(var_cols.len());
        for (vi, &col) in var_cols.iter().enumerate() {
            let value = parse_bool(&row[col]).map_err(|e| Error::DataAt {
                line,
                message: e.to_string(),
            })?;
            obs.set(vi, value);
        }
        observations.push(obs);
        if let (Some(labels), Some(cc)) = (labels.as_mut(), class_col) {
            labels.push(row[cc].clone());
        }
    }
    Ok(PredictionData {
        observations,
        labels,
    })
}

/// Entropy in bits of a class-count histogram.
fn entropy(counts: &BTreeMap<usize, usize>, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &n in counts.values() {
        if n > 0 {
            let p = n as f64 / total as f64;
            h -= p * p.log2();
        }
    }
    h
}

#[derive(Clone)]
struct ValueGroup {
    value: f64,
    counts: BTreeMap<usize, usize>,
    total: usize,
}

struct SplitChoice {
    gain: f64,
    threshold: f64,
    cut: usize, // groups [lo..cut) go left
    accepted: bool,
}

/// Best boundary-midpoint split of groups[lo..hi] and its MDL verdict.
fn best_split(groups: &[ValueGroup], lo: usize, hi: usize) -> Option<SplitChoice> {
    let total: usize = groups[lo..hi].iter().map(|g| g.total).sum();
    let mut whole = BTreeMap::new();
    for g in &groups[lo..hi] {
        for (&cls, &n) in &g.counts {
            *whole.entry(cls).or_insert(0) += n;
        }
    }
    let h_all = entropy(&whole, total);

    let mut best: Option<SplitChoice> = None;
    let mut left: BTreeMap<usize, usize> = BTreeMap::new();
    let mut left_total = 0usize;
    for cut in (lo + 1)..hi {
        let prev = &groups[cut - 1];
        for (&cls, &n) in &prev.counts {
            *left.entry(cls).or_insert(0) += n;
        }
        left_total += prev.total;
        // boundary rule: skip cuts between two pure groups of the same class
        let next = &groups[cut];
        let prev_pure = prev.counts.len() == 1;
        let next_pure = next.counts.len() == 1;
        if prev_pure && next_pure && prev.counts.keys().next() == next.counts.keys().next() {
            continue;
        }
        let mut right = whole.clone();
        for (&cls, &n) in &left {
            let slot = right.get_mut(&cls).expect("left is a sub-histogram");
            *slot -= n;
        }
        right.retain(|_, &mut n| n > 0);
        let right_total = total - left_total;
        let h_left = entropy(&left, left_total);
        let h_right = entropy(&right, right_total);
        let gain = h_all
            - (left_total as f64 / total as f64) * h_left
            - (right_total as f64 / total as f64) * h_right;
        let better = match &best {
            None => true,
            Some(b) => gain > b.gain + 1e-12,
        };
        if better {
            // MDL acceptance test for this split
            let k = whole.len() as f64;
            let k1 = left.iter().filter(|(_, &n)| n > 0).count() as f64;
            let k2 = right.len() as f64;
            let delta = (3f64.powf(k) - 2.0).log2() - (k * h_all - k1 * h_left - k2 * h_right);
            let bound = ((total as f64 - 1.0).log2() + delta) / total as f64;
            best = Some(SplitChoice {
                gain,
                threshold: (prev.value + next.value) / 2.0,
                cut,
                accepted: gain > bound,
            });
        }
    }
    best
}

/// Learns thresholds for a continuous column by recursive entropy-minimizing
/// binary splits at boundary midpoints, stopped by the MDL criterion or the
/// threshold cap. A constant column yields no thresholds.
pub fn discretize(values: &[f64], labels: &[usize], max_thresholds: usize) -> Result<Vec<f64>> {
    if values.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: labels.len(),
        });
    }
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut groups: Vec<ValueGroup> = Vec::new();
    for &i in &order {
        if groups.last().map(|g| g.value) == Some(values[i]) {
            let g = groups.last_mut().expect("non-empty");
            *g.counts.entry(labels[i]).or_insert(0) += 1;
            g.total += 1;
        } else {
            let mut counts = BTreeMap::new();
            counts.insert(labels[i], 1);
            groups.push(ValueGroup {
                value: values[i],
                counts,
                total: 1,
            });
        }
    }
    if groups.len() < 2 {
        // constant column
        return Ok(Vec::new());
    }

    // best-first expansion so the cap keeps the highest-gain splits
    let mut thresholds = Vec::new();
    let mut frontier: Vec<(usize, usize)> = vec![(0, groups.len())];
    while thresholds.len() < max_thresholds {
        let mut best: Option<(f64, usize, SplitChoice)> = None; // (gain, frontier idx)
        for (fi, &(lo, hi)) in frontier.iter().enumerate() {
            if hi - lo < 2 {
                continue;
            }
            if let Some(choice) = best_split(&groups, lo, hi) {
                if !choice.accepted {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((g, _, _)) => choice.gain > *g + 1e-12,
                };
                if better {
                    best = Some((choice.gain, fi, choice));
                }
            }
        }
        match best {
            Some((_, fi, choice)) => {
                let (lo, hi) = frontier.remove(fi);
                thresholds.push(choice.threshold);
                frontier.push((lo, choice.cut));
                frontier.push((choice.cut, hi));
            }
            None => break,
        }
    }
    thresholds.sort_by(f64::total_cmp);
    Ok(thresholds)
}

/// The XD6 target concept over ten boolean variables: a 3-term DNF on the
/// first nine, with the tenth fully irrelevant.
pub fn xd6_target(observation: &Bits) -> bool {
    (observation.get(0) && observation.get(1) && observation.get(2))
        || (observation.get(3) && observation.get(4) && observation.get(5))
        || (observation.get(6) && observation.get(7) && observation.get(8))
}

/// Generates an XD6 sample: ten uniform bits per example, label from the
/// target DNF, then the label is flipped with probability `class_noise` and
/// each attribute bit with probability `attr_noise` (label computed before
/// attribute flips). Weights are uniform; classes are named "0" and "1".
pub fn gen_xd6(
    n_examples: usize,
    class_noise: f64,
    attr_noise: f64,
    seed: u64,
) -> Result<Sample> {
    if n_examples == 0 {
        return Err(Error::EmptySample);
    }
    for rate in [class_noise, attr_noise] {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::precondition(format!("noise rate {rate} outside [0,1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(n_examples);
    let w = 1.0 / n_examples as f64;
    for _ in 0..n_examples {
        let mut obs = Bits::zeros(10);
        for i in 0..10 {
            obs.set(i, rng.random_bool(0.5));
        }
        let mut positive = xd6_target(&obs);
        if rng.random::<f64>() < class_noise {
            positive = !positive;
        }
        for i in 0..10 {
            if rng.random::<f64>() < attr_noise {
                obs.set(i, !obs.get(i));
            }
        }
        let mut classes = Bits::zeros(2);
        classes.set(positive as usize, true);
        examples.push(Example::new(obs, classes, w)?);
    }
    Sample::new(examples, 10, 2, vec!["0".into(), "1".into()])
}

/// Stratified k-fold split: per-class counts across folds differ by at most
/// one, folds are disjoint and cover the sample. Multilabel examples are
/// stratified by their first class. Returns (train, test) index pairs.
pub fn stratified_folds(
    sample: &Sample,
    k: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::precondition("need at least 2 folds"));
    }
    if k > sample.len() {
        return Err(Error::precondition(format!(
            "{k} folds exceed sample size {}",
            sample.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; sample.len()];
    let mut next_fold = 0usize;
    for cls in 0..sample.c() {
        let mut idxs: Vec<usize> = sample
            .examples()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.classes().ones().next() == Some(cls))
            .map(|(i, _)| i)
            .collect();
        use rand::seq::SliceRandom;
        idxs.shuffle(&mut rng);
        for i in idxs {
            fold_of[i] = next_fold;
            next_fold = (next_fold + 1) % k;
        }
    }
    let mut folds = Vec::with_capacity(k);
    for f in 0..k {
        let test: Vec<usize> = (0..sample.len()).filter(|&i| fold_of[i] == f).collect();
        let train: Vec<usize> = (0..sample.len()).filter(|&i| fold_of[i] != f).collect();
        if test.is_empty() {
            return Err(Error::Inconsistency(format!("fold {f} is empty")));
        }
        folds.push((train, test));
    }
    Ok(folds)
}

/// Booleanized dump of a sample as CSV: one 0/1 column per variable plus the
/// class (the class name for single-label rows, `|`-joined names otherwise).
pub fn dump_sample_csv(sample: &Sample) -> String {
    let mut out = String::new();
    for i in 0..sample.n() {
        out.push_str(&format!("x{i},"));
    }
    out.push_str("class\n");
    for e in sample.examples() {
        for i in 0..sample.n() {
            out.push_str(if e.observation().get(i) { "1," } else { "0," });
        }
        let names: Vec<&str> = e
            .classes()
            .ones()
            .map(|cls| sample.class_names()[cls].as_str())
            .collect();
        out.push_str(&names.join("|"));
        out.push('\n');
    }
    out
}

/// Writes the sidecar schema matching `dump_sample_csv` output.
pub fn dump_schema(sample: &Sample) -> String {
    let mut out = String::new();
    for i in 0..sample.n() {
        out.push_str(&format!("x{i}=boolean\n"));
    }
    out.push_str("class=class\n");
    out
}

impl fmt::Display for BinarizationMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vars {
            writeln!(f, "{} <- column {} ({:?})", v.name, v.source_column, v.rule)?;
        }
        Ok(())
    }
}
