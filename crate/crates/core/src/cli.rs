//! Command implementations behind the `loglin` binary: dataset resolution,
//! solver dispatch, CSV trace emission and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coordinate::{fully_corrective_cd, greedy_cd};
use crate::data::{
    drop_misclassified, generate_separable, load_libsvm, scale_features, SyntheticSpec,
};
use crate::diagnostics::{estimator_error, max_ratio_experiment, RatioReport};
use crate::error::{Error, Result};
use crate::gradient::{default_constants, run_gd, solve_gd, StepPolicy};
use crate::model::{
    ClassificationInstance, ConstantsMode, IterateRecord, SmoothnessConstants, SolveResult,
    SolverConfig,
};

/// Which solver `loglin solve` dispatches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    GreedyCd,
    FcCd,
    GdVariable,
    GdFixed,
    GdHeuristic,
}

impl AlgorithmKind {
    fn is_gd(self) -> bool {
        matches!(
            self,
            AlgorithmKind::GdVariable | AlgorithmKind::GdFixed | AlgorithmKind::GdHeuristic
        )
    }
}

/// Where the data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DatasetSpec {
    Path(PathBuf),
    Synthetic(SyntheticSpec),
}

impl DatasetSpec {
    pub fn name(&self) -> String {
        match self {
            DatasetSpec::Path(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            DatasetSpec::Synthetic(s) => format!(
                "synthetic({},{},{},{})",
                s.examples, s.features, s.margin, s.seed
            ),
        }
    }
}

/// Everything that determines a run; serialized alongside the outputs so a
/// run can be reproduced from the file alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub dataset: DatasetSpec,
    pub algorithm: Option<AlgorithmKind>,
    pub config: SolverConfig,
    pub mode: ConstantsMode,
    /// Resolved β/μ/γ; filled in on the first run and reused verbatim when
    /// re-running from the saved manifest.
    pub constants: Option<SmoothnessConstants>,
    pub seed: u64,
    pub scale_features: bool,
    pub separabilize: Option<usize>,
    pub output_path: PathBuf,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("manifest serialization: {e}")))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("manifest parse: {e}")))
    }

    /// The manifest sidecar path for an output file: `trace.csv` ->
    /// `trace.manifest.json`.
    pub fn sidecar_path(output: &Path) -> PathBuf {
        output.with_extension("manifest.json")
    }
}

fn resolve_instance(manifest: &RunManifest) -> Result<(ClassificationInstance, Option<Vec<f64>>)> {
    let (instance, planted) = match &manifest.dataset {
        DatasetSpec::Path(p) => (load_libsvm(p)?, None),
        DatasetSpec::Synthetic(spec) => {
            let (inst, planted) = generate_separable(spec)?;
            (inst, Some(planted))
        }
    };
    let instance = if manifest.scale_features {
        scale_features(&instance)?
    } else {
        instance
    };
    Ok((instance, planted))
}

fn write_trace_csv(path: &Path, trace: &[IterateRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "iter,loss,grad_inf,grad_l2,step_size,nnz,chosen_coord,wall_ns"
    )?;
    for r in trace {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e},{},{},{}",
            r.iter,
            r.loss,
            r.grad_inf,
            r.grad_l2,
            r.step_size,
            r.nnz,
            r.chosen_coord.map_or(String::new(), |c| c.to_string()),
            r.wall_ns
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Runs a single solver and writes the trace CSV plus the manifest sidecar.
/// Returns the solve result for callers that want to inspect it.
pub fn cmd_solve(manifest: &mut RunManifest) -> Result<SolveResult> {
    let algo = manifest
        .algorithm
        .ok_or_else(|| Error::InvalidConfig("solve needs an algorithm".into()))?;
    let (instance, _) = resolve_instance(manifest)?;
    if manifest.config.tol_grad == 0.0 {
        manifest.config.tol_grad = 1e-10 * instance.examples() as f64;
    }
    if algo.is_gd() && manifest.constants.is_none() {
        manifest.constants = Some(default_constants(&instance, manifest.mode));
    }
    let x0 = vec![0.0; instance.features()];
    let result = match algo {
        AlgorithmKind::GreedyCd => greedy_cd(&instance, &x0, &manifest.config)?,
        AlgorithmKind::FcCd => fully_corrective_cd(
            &instance,
            &x0,
            manifest.config.max_iters,
            manifest.config.tol_grad,
        )?,
        AlgorithmKind::GdVariable => solve_gd(
            &instance,
            &x0,
            &StepPolicy::Variable(manifest.constants.unwrap()),
            &manifest.config,
        )?,
        AlgorithmKind::GdFixed => solve_gd(
            &instance,
            &x0,
            &StepPolicy::Fixed(1.0 / manifest.constants.unwrap().beta),
            &manifest.config,
        )?,
        AlgorithmKind::GdHeuristic => solve_gd(
            &instance,
            &x0,
            &StepPolicy::Heuristic(manifest.constants.unwrap().beta),
            &manifest.config,
        )?,
    };
    write_trace_csv(&manifest.output_path, &result.trace)?;
    manifest.save(&RunManifest::sidecar_path(&manifest.output_path))?;
    let final_loss = crate::loss::evaluate(&instance, &result.solution)?.loss();
    println!(
        "final loss = {:e}, nnz = {}, termination = {}",
        final_loss,
        result.nnz(),
        result.termination
    );
    Ok(result)
}

fn write_ratio_csv(path: &Path, report: &RatioReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "iter,ratio")?;
    for (i, r) in report.ratio_trace.iter().enumerate() {
        writeln!(w, "{i},{r:e}")?;
    }
    writeln!(w, "max,{:e}", report.max_ratio)?;
    w.flush()?;
    Ok(())
}

/// Runs the smoothness-ratio experiment and writes its report CSV.
pub fn cmd_diagnose(manifest: &mut RunManifest) -> Result<RatioReport> {
    let (instance, _) = resolve_instance(manifest)?;
    if manifest.constants.is_none() {
        manifest.constants = Some(default_constants(&instance, manifest.mode));
    }
    let report = max_ratio_experiment(
        &instance,
        &manifest.dataset.name(),
        manifest.config.max_iters,
        &StepPolicy::Variable(manifest.constants.unwrap()),
    )?;
    write_ratio_csv(&manifest.output_path, &report)?;
    manifest.save(&RunManifest::sidecar_path(&manifest.output_path))?;
    println!("max ratio = {}", report.max_ratio);
    println!(
        "sampled {} iterates, skipped {} degenerate",
        report.ratio_trace.len(),
        report.skipped
    );
    Ok(report)
}

/// One policy's output inside a comparison run.
pub struct PolicyRun {
    pub label: &'static str,
    pub result: SolveResult,
    pub estimator_errors: Vec<Option<f64>>,
}

/// Outputs of [`cmd_compare`].
pub struct CompareOutputs {
    pub runs: Vec<PolicyRun>,
    pub examples_used: usize,
}

fn run_policy(
    instance: &ClassificationInstance,
    policy: &StepPolicy,
    config: &SolverConfig,
    reference: Option<&[f64]>,
) -> Result<(SolveResult, Vec<Option<f64>>)> {
    let x0 = vec![0.0; instance.features()];
    let mut errors = Vec::new();
    let result = run_gd(instance, &x0, policy, config, None, None, |_, x, _, _| {
        if let Some(reference) = reference {
            errors.push(estimator_error(x, reference));
        }
    })?;
    Ok((result, errors))
}

/// Runs the fixed 1/β, heuristic and variable policies from x⁰ = 0 on the
/// (optionally separabilized) dataset, writing one CSV per policy plus a
/// joined comparison file. These CSVs omit timing so re-runs from the same
/// manifest are byte-identical.
pub fn cmd_compare(manifest: &mut RunManifest) -> Result<CompareOutputs> {
    let (mut instance, planted) = resolve_instance(manifest)?;
    let mut reference = planted;
    if let Some(warmup_iters) = manifest.separabilize {
        let warm_constants = default_constants(&instance, manifest.mode);
        let warm_config = SolverConfig::new(1.0, warmup_iters);
        let warmup = solve_gd(
            &instance,
            &vec![0.0; instance.features()],
            &StepPolicy::Variable(warm_constants),
            &warm_config,
        )?;
        let before = instance.examples();
        instance = drop_misclassified(&instance, &warmup.solution)?;
        println!(
            "separabilize: kept {} of {} rows",
            instance.examples(),
            before
        );
        if reference.is_none() {
            reference = Some(warmup.solution);
        }
    }
    if manifest.constants.is_none() {
        manifest.constants = Some(default_constants(&instance, manifest.mode));
    }
    let constants = manifest.constants.unwrap();
    let config = &manifest.config;
    let policies: [(&'static str, StepPolicy); 3] = [
        ("fixed", StepPolicy::Fixed(1.0 / constants.beta)),
        ("heuristic", StepPolicy::Heuristic(constants.beta)),
        ("variable", StepPolicy::Variable(constants)),
    ];
    let reference_slice = reference.as_deref();
    // independent runs over a shared immutable instance
    let results: Vec<Result<(SolveResult, Vec<Option<f64>>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = policies
            .iter()
            .map(|(_, policy)| {
                let inst = &instance;
                scope.spawn(move || run_policy(inst, policy, config, reference_slice))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut runs = Vec::new();
    for ((label, _), outcome) in policies.iter().zip(results) {
        let (result, estimator_errors) = outcome?;
        runs.push(PolicyRun {
            label,
            result,
            estimator_errors,
        });
    }

    let with_reference = reference_slice.is_some();
    for run in &runs {
        let path = policy_csv_path(&manifest.output_path, run.label);
        let mut w = BufWriter::new(File::create(&path)?);
        if with_reference {
            writeln!(w, "iter,loss,grad_inf,grad_l2,step_size,nnz,est_err")?;
        } else {
            writeln!(w, "iter,loss,grad_inf,grad_l2,step_size,nnz")?;
        }
        for (i, r) in run.result.trace.iter().enumerate() {
            write!(
                w,
                "{},{:e},{:e},{:e},{:e},{}",
                r.iter, r.loss, r.grad_inf, r.grad_l2, r.step_size, r.nnz
            )?;
            if with_reference {
                let err = run
                    .estimator_errors
                    .get(i)
                    .copied()
                    .flatten()
                    .map_or(String::new(), |e| format!("{e:e}"));
                write!(w, ",{err}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
    }

    // joined file: one row per iteration, empty cells once a policy stops
    let rows = runs.iter().map(|r| r.result.trace.len()).max().unwrap_or(0);
    let mut w = BufWriter::new(File::create(&manifest.output_path)?);
    let mut header = String::from("iter");
    for run in &runs {
        header.push_str(&format!(",loss_{}", run.label));
    }
    if with_reference {
        for run in &runs {
            header.push_str(&format!(",est_err_{}", run.label));
        }
    }
    writeln!(w, "{header}")?;
    for i in 0..rows {
        write!(w, "{i}")?;
        for run in &runs {
            match run.result.trace.get(i) {
                Some(r) => write!(w, ",{:e}", r.loss)?,
                None => write!(w, ",")?,
            }
        }
        if with_reference {
            for run in &runs {
                let cell = run
                    .estimator_errors
                    .get(i)
                    .copied()
                    .flatten()
                    .map_or(String::new(), |e| format!("{e:e}"));
                write!(w, ",{cell}")?;
            }
        }
        writeln!(w)?;
    }
    w.flush()?;
    manifest.save(&RunManifest::sidecar_path(&manifest.output_path))?;

    for run in &runs {
        let last = run.result.trace.last().map_or(f64::NAN, |r| r.loss);
        println!("{}: final loss = {last:e}", run.label);
    }
    Ok(CompareOutputs {
        runs,
        examples_used: instance.examples(),
    })
}

/// `comparison.csv` -> `comparison.fixed.csv` and friends.
pub fn policy_csv_path(base: &Path, label: &str) -> PathBuf {
    base.with_extension(format!("{label}.csv"))
}

/// Re-executes a saved manifest; outputs land at the paths it records.
pub fn run_manifest(manifest: &RunManifest) -> Result<()> {
    let mut manifest = manifest.clone();
    match manifest.command.as_str() {
        "solve" => cmd_solve(&mut manifest).map(|_| ()),
        "diagnose" => cmd_diagnose(&mut manifest).map(|_| ()),
        "compare" => cmd_compare(&mut manifest).map(|_| ()),
        other => Err(Error::InvalidConfig(format!("unknown command '{other}'"))),
    }
}
