//! One function per subcommand, plus the shared fit executor that
//! sweep cells and reruns reuse.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use ppfit::continuity::enforce_ck_mode;
use ppfit::dataset::{generate, read_csv, write_csv, DatasetId, DatasetSpec};
use ppfit::loss::{l2_loss, LossConfig};
use ppfit::lsq::baselines;
use ppfit::optim::{train, Hyperparams, InitStrategy, OptimizerKind, TrainConfig};
use ppfit::piecewise::{uniform_knots, DomainTransform};
use ppfit::{Basis, Error, Result};

use crate::artifacts::{
    sha256_file, tool_version, write_json, write_loss_csv, ArtifactPaths, InputRecord, Manifest,
    Profile, RunMetrics,
};
use crate::config::{
    default_lr, load_file_config, BaselineArgs, CompareArgs, FitArgs, GenDataArgs, RerunArgs,
    ResolvedFit, SweepArgs,
};

#[derive(Serialize)]
struct GenMeta {
    dataset: String,
    spec: DatasetSpec,
    transform: DomainTransform,
    rows: usize,
}

pub fn run_gen_data(args: &GenDataArgs) -> Result<()> {
    let id: DatasetId = args.dataset.parse()?;
    let spec = DatasetSpec::preset(id, args.noise, args.seed);
    let data = generate(&spec)?;
    write_csv(&data, &args.out)?;
    let meta_path = args.out.with_extension("meta.json");
    let meta = GenMeta {
        dataset: id.to_string(),
        spec,
        transform: *data.transform(),
        rows: data.len(),
    };
    write_json(&meta_path, &meta)?;
    println!("rows={}", data.len());
    println!("csv={}", args.out.display());
    println!("meta={}", meta_path.display());
    Ok(())
}

pub fn run_baseline(args: &BaselineArgs) -> Result<()> {
    let basis: Basis = args.basis.parse()?;
    let data = read_csv(&args.input)?.rescaled(args.segments)?;
    let report = baselines(&data, &uniform_knots(args.segments), args.degree, basis, args.k)?;
    let fitted_path = args.out_dir.join("fitted.json");
    let corrected_path = args.out_dir.join("corrected.json");
    write_json(&fitted_path, &Profile::from_model(&report.fitted, &data))?;
    write_json(&corrected_path, &Profile::from_model(&report.corrected, &data))?;
    println!("l2_star={:.16e}", report.l2_star);
    println!("l2_star_tilde={:.16e}", report.l2_star_tilde);
    println!("fitted={}", fitted_path.display());
    println!("corrected={}", corrected_path.display());
    Ok(())
}

/// Where one fit's three artifacts land.
pub struct FitPaths {
    pub loss_csv: PathBuf,
    pub profile: PathBuf,
    pub manifest: PathBuf,
}

impl FitPaths {
    pub fn in_dir(dir: &Path) -> FitPaths {
        FitPaths {
            loss_csv: dir.join("loss.csv"),
            profile: dir.join("profile.json"),
            manifest: dir.join("manifest.json"),
        }
    }
}

/// Train per the resolved config and write the three artifacts. The
/// profile holds the end-of-pipeline model: the continuity-corrected
/// one when `ckmin` is set, the raw trained one otherwise.
pub fn execute_fit(resolved: &ResolvedFit, paths: &FitPaths) -> Result<Manifest> {
    let started = Instant::now();
    let sha256 = sha256_file(&resolved.input)?;
    let data = read_csv(&resolved.input)?.rescaled(resolved.segments)?;
    let knots = uniform_knots(resolved.segments);

    let outcome = train(&data, &knots, resolved.degree, resolved.basis, &resolved.train)?;
    let k = resolved.train.loss.k;
    let boundary = resolved.train.loss.boundary;
    let (export_model, post_ckmin_l2) = if resolved.ckmin {
        let corrected = enforce_ck_mode(&outcome.model, k, boundary)?;
        let l2 = l2_loss(&corrected, &data)?;
        (corrected, Some(l2))
    } else {
        (outcome.model.clone(), None)
    };

    write_loss_csv(&paths.loss_csv, &outcome.trace)?;
    write_json(&paths.profile, &Profile::from_model(&export_model, &data))?;

    // Reference bracket for context; not all configs admit one (e.g.
    // degree below 2k+1), so failures leave the fields empty.
    let (l2_star, l2_star_tilde) =
        match baselines(&data, &knots, resolved.degree, resolved.basis, k) {
            Ok(r) => (Some(r.l2_star), Some(r.l2_star_tilde)),
            Err(_) => (None, None),
        };

    let best = *outcome.trace.best();
    let manifest = Manifest {
        tool: tool_version(),
        command: "fit".into(),
        input: InputRecord { path: resolved.input.display().to_string(), sha256 },
        config: resolved.clone(),
        artifacts: ArtifactPaths {
            loss_csv: paths.loss_csv.display().to_string(),
            profile: paths.profile.display().to_string(),
        },
        metrics: RunMetrics {
            best_epoch: best.epoch,
            final_total: best.total,
            final_l2: best.l2,
            final_lck: best.ck,
            post_ckmin_l2,
            l2_star,
            l2_star_tilde,
        },
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    write_json(&paths.manifest, &manifest)?;
    Ok(manifest)
}

fn print_fit_result(manifest: &Manifest, paths: &FitPaths) {
    let m = &manifest.metrics;
    println!("best_epoch={}", m.best_epoch);
    println!("final_total={:.16e}", m.final_total);
    println!("final_l2={:.16e}", m.final_l2);
    println!("final_lck={:.16e}", m.final_lck);
    if let Some(v) = m.post_ckmin_l2 {
        println!("post_ckmin_l2={:.16e}", v);
    }
    if let (Some(a), Some(b)) = (m.l2_star, m.l2_star_tilde) {
        println!("l2_star={:.16e}", a);
        println!("l2_star_tilde={:.16e}", b);
    }
    println!("loss_csv={}", paths.loss_csv.display());
    println!("profile={}", paths.profile.display());
    println!("manifest={}", paths.manifest.display());
}

pub fn run_fit(args: &FitArgs) -> Result<()> {
    let resolved = args.resolve()?;
    let mut paths = FitPaths::in_dir(&args.out_dir);
    if let Some(export) = &args.export {
        paths.profile = export.clone();
    }
    let manifest = execute_fit(&resolved, &paths)?;
    print_fit_result(&manifest, &paths);
    Ok(())
}

pub fn run_rerun(args: &RerunArgs) -> Result<()> {
    let manifest: Manifest = crate::artifacts::read_json(&args.manifest)?;
    let resolved = manifest.config.clone();
    let current = sha256_file(&resolved.input)?;
    if current != manifest.input.sha256 {
        return Err(Error::invalid(format!(
            "input {} no longer matches the recorded run \
             (sha256 {} now, {} in the manifest)",
            resolved.input.display(),
            current,
            manifest.input.sha256
        )));
    }
    let paths = match &args.out_dir {
        Some(dir) => FitPaths::in_dir(dir),
        None => FitPaths {
            loss_csv: PathBuf::from(&manifest.artifacts.loss_csv),
            profile: PathBuf::from(&manifest.artifacts.profile),
            manifest: args.manifest.clone(),
        },
    };
    let new_manifest = execute_fit(&resolved, &paths)?;
    print_fit_result(&new_manifest, &paths);
    Ok(())
}

/// One row of a sweep/compare summary.
struct CellOutcome {
    label: String,
    basis: Basis,
    status: &'static str,
    metrics: Option<RunMetrics>,
}

fn run_cells(cells: &[(String, ResolvedFit)], out_dir: &Path) -> Result<Vec<CellOutcome>> {
    cells
        .par_iter()
        .map(|(label, rf)| {
            let dir = out_dir.join("cells").join(format!("{label}-{}", rf.basis));
            match execute_fit(rf, &FitPaths::in_dir(&dir)) {
                Ok(man) => Ok(CellOutcome {
                    label: label.clone(),
                    basis: rf.basis,
                    status: "ok",
                    metrics: Some(man.metrics),
                }),
                Err(Error::Diverged { epoch }) => {
                    log::warn!("{label}-{} diverged at epoch {epoch}", rf.basis);
                    Ok(CellOutcome {
                        label: label.clone(),
                        basis: rf.basis,
                        status: "diverged",
                        metrics: None,
                    })
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => "nan".into(),
    }
}

fn write_summary(path: &Path, label_header: &str, rows: &[CellOutcome]) -> Result<()> {
    use std::io::Write;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "{label_header},basis,status,best_epoch,final_total,final_l2,final_lck,\
         post_ckmin_l2,l2_star,l2_star_tilde"
    )?;
    for row in rows {
        let m = row.metrics.as_ref();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            row.label,
            row.basis,
            row.status,
            m.map(|m| m.best_epoch.to_string()).unwrap_or_else(|| "nan".into()),
            fmt_opt(m.map(|m| m.final_total)),
            fmt_opt(m.map(|m| m.final_l2)),
            fmt_opt(m.map(|m| m.final_lck)),
            fmt_opt(m.and_then(|m| m.post_ckmin_l2)),
            fmt_opt(m.and_then(|m| m.l2_star)),
            fmt_opt(m.and_then(|m| m.l2_star_tilde)),
        )?;
    }
    out.flush()?;
    Ok(())
}

fn parse_alphas(list: Option<&String>) -> Result<Vec<f64>> {
    let Some(list) = list else {
        return Ok((0..=10).map(|i| i as f64 / 10.0).collect());
    };
    let alphas: Vec<f64> = list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("'{s}' is not a number in --alphas")))
        })
        .collect::<Result<_>>()?;
    if alphas.is_empty() {
        return Err(Error::invalid("--alphas must name at least one value"));
    }
    Ok(alphas)
}

pub fn run_sweep(args: &SweepArgs) -> Result<()> {
    let file = load_file_config(args.config.as_deref())?;
    let alphas = parse_alphas(args.alphas.as_ref())?;
    let segments = args.segments.or(file.segments).unwrap_or(2);
    let degree = args.degree.or(file.degree).unwrap_or(7);
    let k = args.k.or(file.k).unwrap_or(3);
    let boundary = parse_enum(args.boundary.as_ref().or(file.boundary.as_ref()))?
        .unwrap_or(ppfit::BoundaryMode::Open);
    let regularization = parse_enum(args.reg.as_ref().or(file.reg.as_ref()))?
        .unwrap_or(ppfit::RegMode::Factorial);
    let optimizer = parse_enum(args.optimizer.as_ref().or(file.optimizer.as_ref()))?
        .unwrap_or(OptimizerKind::Amsgrad);
    let epochs = args.epochs.or(file.epochs).unwrap_or(2000);
    let patience = args.patience.or(file.patience).unwrap_or(500.min(epochs));
    let init =
        parse_enum(args.init.as_ref().or(file.init.as_ref()))?.unwrap_or(InitStrategy::L2Optimum);
    let seed = args.seed.or(file.seed).unwrap_or(0);

    let mut cells = Vec::new();
    for &alpha in &alphas {
        for basis in [Basis::Chebyshev, Basis::Power] {
            let train = TrainConfig {
                optimizer,
                hyper: Hyperparams::default(),
                lr: args.lr.or(file.lr).unwrap_or_else(|| default_lr(alpha)),
                epochs,
                patience,
                init,
                loss: LossConfig { alpha, k, boundary, regularization },
                seed,
            };
            cells.push((
                format!("{alpha}"),
                ResolvedFit {
                    input: args.input.clone(),
                    segments,
                    degree,
                    basis,
                    train,
                    ckmin: true,
                },
            ));
        }
    }

    let rows = run_cells(&cells, &args.out_dir)?;
    let summary = args.out_dir.join("summary.csv");
    write_summary(&summary, "alpha", &rows)?;
    println!("rows={}", rows.len());
    println!("summary={}", summary.display());
    Ok(())
}

pub fn run_compare(args: &CompareArgs) -> Result<()> {
    let file = load_file_config(args.config.as_deref())?;
    let optimizers: Vec<OptimizerKind> = match &args.optimizers {
        None => OptimizerKind::ALL.to_vec(),
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_>>()?,
    };
    let segments = args.segments.or(file.segments).unwrap_or(2);
    let degree = args.degree.or(file.degree).unwrap_or(7);
    let k = args.k.or(file.k).unwrap_or(3);
    let alpha = args.alpha.or(file.alpha).unwrap_or(0.1);
    let boundary = parse_enum(args.boundary.as_ref().or(file.boundary.as_ref()))?
        .unwrap_or(ppfit::BoundaryMode::Open);
    let regularization = parse_enum(args.reg.as_ref().or(file.reg.as_ref()))?
        .unwrap_or(ppfit::RegMode::Factorial);
    // The long-horizon comparison protocol: flat step, no early
    // stopping, everyone starting from the same zero vector.
    let lr = args.lr.or(file.lr).unwrap_or(0.1);
    let epochs = args.epochs.or(file.epochs).unwrap_or(5000);
    let patience = args.patience.or(file.patience).unwrap_or(0);
    let init =
        parse_enum(args.init.as_ref().or(file.init.as_ref()))?.unwrap_or(InitStrategy::Zero);
    let seed = args.seed.or(file.seed).unwrap_or(0);

    let mut cells = Vec::new();
    for &optimizer in &optimizers {
        for basis in [Basis::Chebyshev, Basis::Power] {
            let train = TrainConfig {
                optimizer,
                hyper: Hyperparams::default(),
                lr,
                epochs,
                patience,
                init,
                loss: LossConfig { alpha, k, boundary, regularization },
                seed,
            };
            cells.push((
                optimizer.to_string(),
                ResolvedFit {
                    input: args.input.clone(),
                    segments,
                    degree,
                    basis,
                    train,
                    ckmin: true,
                },
            ));
        }
    }

    let rows = run_cells(&cells, &args.out_dir)?;
    let summary = args.out_dir.join("summary.csv");
    write_summary(&summary, "optimizer", &rows)?;
    println!("rows={}", rows.len());
    println!("summary={}", summary.display());
    Ok(())
}

fn parse_enum<T>(value: Option<&String>) -> Result<Option<T>>
where
    T: std::str::FromStr<Err = Error>,
{
    value.map(|v| v.parse()).transpose()
}
