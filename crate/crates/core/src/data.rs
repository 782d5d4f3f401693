//! Dataset ingestion (LIBSVM text format), synthetic separable instances and
//! the warmup-then-filter separabilization procedure.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gradient::{solve_gd, StepPolicy};
use crate::matrix::RowMatrix;
use crate::model::{ClassificationInstance, SolverConfig};

/// Parameters of a synthetic linearly separable instance. The generated
/// data is separable with margin at least `margin` along the planted
/// direction, and generation is bit-deterministic in `seed`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SyntheticSpec {
    pub examples: usize,
    pub features: usize,
    pub margin: f64,
    pub planted_sparsity: Option<usize>,
    pub seed: u64,
    pub box_bound: f64,
}

impl SyntheticSpec {
    pub fn new(examples: usize, features: usize, margin: f64, seed: u64) -> Self {
        Self {
            examples,
            features,
            margin,
            planted_sparsity: None,
            seed,
            box_bound: 1.0,
        }
    }

    pub fn with_sparsity(mut self, s: usize) -> Self {
        self.planted_sparsity = Some(s);
        self
    }

    pub fn with_box(mut self, b: f64) -> Self {
        self.box_bound = b;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.examples == 0 || self.features == 0 {
            return Err(Error::InvalidConfig("m and n must be >= 1".into()));
        }
        if !(self.margin.is_finite() && self.margin > 0.0) {
            return Err(Error::InvalidConfig("margin must be > 0".into()));
        }
        if !(self.box_bound.is_finite() && self.box_bound > 0.0) {
            return Err(Error::InvalidConfig("box must be > 0".into()));
        }
        if let Some(s) = self.planted_sparsity {
            if s == 0 || s > self.features {
                return Err(Error::InvalidConfig(
                    "planted_sparsity must lie in [1, n]".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Loads a LIBSVM-format text file: `<label> <idx>:<val> ...` per line,
/// 1-based feature indices, labels in {+1, -1}, {1, 0} or {1, 2}
/// (0 and 2 map to -1). The largest feature index defines n.
pub fn load_libsvm<P: AsRef<Path>>(path: P) -> Result<ClassificationInstance> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut labels: Vec<f64> = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_index = 0usize;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let mut tokens = line.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue; // blank line
        };
        let raw: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad label token '{label_tok}'")))?;
        let label = if raw == 1.0 {
            1.0
        } else if raw == -1.0 || raw == 0.0 || raw == 2.0 {
            -1.0
        } else {
            return Err(parse_err(lineno, format!("unknown label value {raw}")));
        };
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected idx:val, got '{tok}'")))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature index '{idx_s}'")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based".into()));
            }
            let val: f64 = val_s
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad feature value '{val_s}'")))?;
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("non-finite feature value {val}")));
            }
            entries.push((idx - 1, val));
        }
        entries.sort_by_key(|(j, _)| *j);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(parse_err(lineno, "duplicate feature index".into()));
        }
        if let Some(&(j, _)) = entries.last() {
            max_index = max_index.max(j + 1);
        }
        labels.push(label);
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let matrix = RowMatrix::csr(max_index, rows);
    ClassificationInstance::new(matrix, &labels)
}

/// Writes an instance back out in LIBSVM format (all labels +1, since the
/// stored rows are already folded). Test helper for round-trip checks.
pub fn write_libsvm<P: AsRef<Path>>(instance: &ClassificationInstance, path: P) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for i in 0..instance.examples() {
        write!(out, "1")?;
        for (j, v) in instance.matrix().row_nonzeros(i) {
            write!(out, " {}:{}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Rescales every feature column into [-1, 1] by its own max-abs value.
/// Columns that are entirely zero are left alone.
pub fn scale_features(instance: &ClassificationInstance) -> Result<ClassificationInstance> {
    let mut matrix = instance.matrix().clone();
    for j in 0..instance.features() {
        let mut col_max = 0.0f64;
        for i in 0..instance.examples() {
            col_max = col_max.max(matrix.get(i, j).abs());
        }
        if col_max > 0.0 {
            matrix.scale_col(j, 1.0 / col_max);
        }
    }
    ClassificationInstance::from_folded(matrix)
}

/// Generates a separable instance: draws a unit planted direction (with
/// `planted_sparsity` nonzeros if given), samples rows uniformly in
/// `[-box, box]^n`, labels by the sign of the inner product with the planted
/// direction, and resamples rows whose margin magnitude is below `margin`.
///
/// Every folded row satisfies `(A p)_i >= margin` for the returned planted
/// direction `p`. Two calls with the same spec are bit-identical.
pub fn generate_separable(spec: &SyntheticSpec) -> Result<(ClassificationInstance, Vec<f64>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.features;
    let mut planted = vec![0.0; n];
    match spec.planted_sparsity {
        Some(s) => {
            for i in sample(&mut rng, n, s) {
                planted[i] = nonzero_uniform(&mut rng);
            }
        }
        None => {
            for v in &mut planted {
                *v = nonzero_uniform(&mut rng);
            }
        }
    }
    let norm = planted.iter().map(|v| v * v).sum::<f64>().sqrt();
    planted.iter_mut().for_each(|v| *v /= norm);

    let max_attempts = 10_000 * spec.examples;
    let mut attempts = 0usize;
    let mut rows = Vec::with_capacity(spec.examples);
    let mut labels = Vec::with_capacity(spec.examples);
    while rows.len() < spec.examples {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::GenerationInfeasible {
                margin: spec.margin,
                attempts,
            });
        }
        let row: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-spec.box_bound..=spec.box_bound))
            .collect();
        let z: f64 = row.iter().zip(&planted).map(|(a, b)| a * b).sum();
        if z.abs() < spec.margin {
            continue;
        }
        labels.push(if z > 0.0 { 1.0 } else { -1.0 });
        rows.push(row);
    }
    let instance = ClassificationInstance::from_dense(rows, &labels)?;
    Ok((instance, planted))
}

fn nonzero_uniform(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.random_range(-1.0..=1.0);
        if v.abs() > 1e-3 {
            return v;
        }
    }
}

/// Drops every row misclassified by `x` (folded margin <= 0; ties count as
/// misclassified so the kept rows are strictly separated) and rebuilds the
/// instance with recomputed m and M.
pub fn drop_misclassified(
    instance: &ClassificationInstance,
    x: &[f64],
) -> Result<ClassificationInstance> {
    let margins = instance.margins(x);
    let keep: Vec<bool> = margins.iter().map(|&z| z > 0.0).collect();
    if keep.iter().all(|k| !k) {
        return Err(Error::NoSeparableSubset);
    }
    if keep.iter().all(|k| *k) {
        return Ok(instance.clone());
    }
    ClassificationInstance::from_folded(instance.matrix().filter_rows(&keep))
}

/// The separabilization procedure: run gradient descent for `warmup_iters`,
/// then discard the data points the final iterate misclassifies.
pub fn make_separable(
    instance: &ClassificationInstance,
    warmup_iters: usize,
    policy: &StepPolicy,
) -> Result<ClassificationInstance> {
    let config = SolverConfig::new(1.0, warmup_iters);
    let warmup = solve_gd(instance, &vec![0.0; instance.features()], policy, &config)?;
    drop_misclassified(instance, &warmup.solution)
}
