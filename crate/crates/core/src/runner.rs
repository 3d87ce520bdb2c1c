//! Runs experiments from a [`RunConfig`] and writes their reports.
//!
//! Every experiment runs before anything is written, so a configuration error
//! found mid-run leaves the output directory untouched. Files are written to a
//! temporary name and renamed into place.

use crate::config::{Experiment, RunConfig};
use crate::engine::io::write_raster;
use crate::engine::KernelField;
use crate::error::{Error, Result};
use crate::estimate::*;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Reports and rasters of one experiment.
#[derive(Debug)]
pub struct ExperimentOutput {
    pub experiment: Experiment,
    pub reports: Vec<EstimateReport>,
    pub rasters: Vec<(String, KernelField)>,
    pub seconds: f64,
    /// Set when the experiment failed at run time or was skipped.
    pub error: Option<String>,
}

impl ExperimentOutput {
    pub fn pass(&self) -> bool {
        self.error.is_none() && self.reports.iter().all(EstimateReport::pass)
    }
}

/// Runs one experiment.
pub fn run_experiment(config: &RunConfig, experiment: Experiment, seed: u64) -> Result<(Vec<EstimateReport>, Vec<(String, KernelField)>)> {
    let problem = config.problem()?;
    let p = &config.params;
    let mut rasters = Vec::new();
    let reports = match experiment {
        Experiment::PartitionCheck => partition_check(&problem, &p.partition_check, seed)?,
        Experiment::SymbolCheck => symbol_check(&problem, &p.symbol_check, seed)?,
        Experiment::KernelDecay => {
            let (oracle, field) = oracle_equivalence(&problem, &p.kernel_decay.oracle)?;
            rasters.push((oracle.experiment.clone(), field));
            vec![
                oracle,
                kernel_l1_decay(&problem, &p.kernel_decay.per_nu)?,
                kernel_l1_decay(&problem, &p.kernel_decay.summed)?,
            ]
        }
        Experiment::KernelLipschitz => vec![kernel_lipschitz_ratio(&problem, &p.kernel_lipschitz)?],
        Experiment::KernelTail => vec![
            kernel_tail_outside(&problem, &p.kernel_tail.q)?,
            kernel_tail_outside(&problem, &p.kernel_tail.q_ell)?,
        ],
        Experiment::Opnorm => vec![l2_opnorm(&problem, &p.opnorm, seed)?],
        Experiment::AtomBound => atom_image_l1(&problem, &p.atom_bound)?,
        Experiment::SstarS => vec![sstar_s_decay(&problem, &p.sstar_s)?],
        Experiment::Orthogonality => vec![orthogonality(&problem, &p.orthogonality, seed)?],
        Experiment::Sharpness => vec![sharpness_growth(&problem, &p.sharpness)?],
        Experiment::AdjointTail => vec![adjoint_tail(&problem, &p.adjoint_tail)?],
    };
    Ok((reports, rasters))
}

/// Errors that mean the configuration asked for something invalid, as
/// opposed to a computation going wrong.
fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config { .. }
            | Error::Layout(_)
            | Error::Index(_)
            | Error::Domain(_)
            | Error::Resolution(_)
            | Error::Unsupported(_)
            | Error::Budget { .. }
            | Error::GridMismatch(_)
    )
}

/// One line per report: verdict, name, the gated quantity and runtime.
pub fn summary_line(report: &EstimateReport, seconds: f64) -> String {
    let verdict = if report.pass() { "PASS" } else { "FAIL" };
    let detail = match (report.fit, report.target) {
        (Some(f), Some(t)) => format!(
            "slope {:.3} (target {:.3} ± {:.2}, residual {:.3})",
            f.slope,
            t,
            report.tolerance.unwrap_or(f64::NAN),
            f.residual
        ),
        _ => {
            let failed = report.checks.iter().filter(|c| !c.pass).count();
            format!("{}/{} checks pass", report.checks.len() - failed, report.checks.len())
        }
    };
    format!("{verdict} {:<22} {detail}  [{seconds:.1}s]", report.experiment)
}

/// Runs `experiments` in order. Returns a configuration error as soon as one
/// appears; run-time failures are recorded on the experiment instead.
pub fn execute(config: &RunConfig, experiments: &[Experiment], mut log: impl FnMut(&str)) -> Result<Vec<ExperimentOutput>> {
    config.validate(experiments)?;
    let start = Instant::now();
    let mut out = Vec::new();
    for &e in experiments {
        if let Some(cap) = config.budget.wall_clock_s {
            if start.elapsed().as_secs_f64() > cap {
                log(&format!("SKIP {e:<22} wall-clock cap of {cap} s reached"));
                out.push(ExperimentOutput {
                    experiment: e,
                    reports: Vec::new(),
                    rasters: Vec::new(),
                    seconds: 0.0,
                    error: Some(format!("skipped: wall-clock cap of {cap} s reached")),
                });
                continue;
            }
        }
        let t = Instant::now();
        let result = run_experiment(config, e, config.seed);
        let seconds = t.elapsed().as_secs_f64();
        match result {
            Ok((reports, rasters)) => {
                for r in &reports {
                    log(&summary_line(r, seconds));
                }
                out.push(ExperimentOutput { experiment: e, reports, rasters, seconds, error: None });
            }
            Err(err) if is_config_error(&err) => {
                return Err(Error::config(format!("{e}: {err}")));
            }
            Err(err) => {
                log(&format!("FAIL {e:<22} {err}"));
                out.push(ExperimentOutput {
                    experiment: e,
                    reports: Vec::new(),
                    rasters: Vec::new(),
                    seconds,
                    error: Some(err.to_string()),
                });
            }
        }
    }
    Ok(out)
}

fn atomic_write(path: &Path, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        write(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn write_pairs(w: &mut dyn Write, header: &str, pts: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "{header}")?;
    for (x, y) in pts {
        writeln!(w, "{x:e} {y:e}")?;
    }
    Ok(())
}

/// Two-column plot data: `<name>.points.dat` with the fitted `(x, log2 y)`
/// pairs and `<name>.fit.dat` with the fit line over the same range. Reports
/// without a fit get header-only files.
pub fn emit_plotdata(report: &EstimateReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let (x, y) = match report.fit_columns {
        Some((ix, iy)) => (report.columns[ix].as_str(), report.columns[iy].as_str()),
        None => ("x", "y"),
    };
    let points = dir.join(format!("{}.points.dat", report.experiment));
    let fit = dir.join(format!("{}.fit.dat", report.experiment));
    atomic_write(&points, |w| write_pairs(w, &format!("# {x} log2({y})"), &report.plot_points()))?;
    atomic_write(&fit, |w| write_pairs(w, &format!("# {x} fitted log2({y})"), &report.plot_fit()))?;
    Ok(vec![points, fit])
}

#[derive(Debug, Serialize)]
struct SummaryEntry<'a> {
    experiment: &'a str,
    report: &'a str,
    params: &'a serde_json::Value,
    seed: u64,
    slope: Option<f64>,
    residual: Option<f64>,
    target: Option<f64>,
    tolerance: Option<f64>,
    pass: bool,
    checks: &'a [Check],
    flags: &'a [String],
    seconds: f64,
    error: Option<&'a str>,
}

/// Writes CSV, plot data, rasters and `summary.json` into `dir`.
pub fn write_outputs(dir: &Path, config: &RunConfig, outputs: &[ExperimentOutput]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for o in outputs {
        for r in &o.reports {
            atomic_write(&dir.join(format!("{}.csv", r.experiment)), |w| r.write_csv(w))?;
            emit_plotdata(r, dir)?;
            entries.push(SummaryEntry {
                experiment: o.experiment.name(),
                report: &r.experiment,
                params: &r.params,
                seed: r.seed,
                slope: r.fit.map(|f| f.slope),
                residual: r.fit.map(|f| f.residual),
                target: r.target,
                tolerance: r.tolerance,
                pass: r.pass(),
                checks: &r.checks,
                flags: &r.flags,
                seconds: o.seconds,
                error: None,
            });
        }
        for (name, field) in &o.rasters {
            atomic_write(&dir.join(format!("{name}.mpf")), |w| write_raster(&field.field, w))?;
        }
        if let Some(err) = &o.error {
            entries.push(SummaryEntry {
                experiment: o.experiment.name(),
                report: o.experiment.name(),
                params: &serde_json::Value::Null,
                seed: config.seed,
                slope: None,
                residual: None,
                target: None,
                tolerance: None,
                pass: false,
                checks: &[],
                flags: &[],
                seconds: o.seconds,
                error: Some(err),
            });
        }
    }
    let summary = serde_json::json!({
        "seed": config.seed,
        "pass": outputs.iter().all(ExperimentOutput::pass),
        "config": config,
        "reports": entries,
    });
    atomic_write(&dir.join("summary.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &summary)?;
        writeln!(w)?;
        Ok(())
    })
}

/// Output directory: the explicit override, then `MPFIO_OUT_DIR`, then the
/// config, then `out`.
pub fn output_dir(explicit: Option<&Path>, config: &RunConfig) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os("MPFIO_OUT_DIR").map(PathBuf::from))
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Exit code 0 when everything passes, 1 on a failed check or run-time error,
/// 2 on a configuration error.
pub fn run(config: &RunConfig, experiments: &[Experiment], out: &Path) -> i32 {
    let outputs = match execute(config, experiments, |l| println!("{l}")) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = write_outputs(out, config, &outputs) {
        eprintln!("error: {e}");
        return 1;
    }
    if outputs.iter().all(ExperimentOutput::pass) {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::io::read_raster;

    fn quick() -> RunConfig {
        RunConfig::parse(
            "[partition-check]\nsamples = 200\nangular_samples = 50\n\
             [kernel-decay.oracle]\nj = 2\n\
             [kernel-decay.per-nu]\nj = [2, 3, 4, 5]\n\
             [kernel-decay.summed]\nell1 = [0, 1, 2, 3]\n",
        )
        .unwrap()
    }

    #[test]
    fn empty_list_writes_an_empty_summary() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::parse("experiments = []").unwrap();
        assert_eq!(run(&cfg, &cfg.selected(), dir.path()), 0);
        let s: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(s["reports"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn partition_check_writes_rows_and_passes() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(run(&quick(), &[Experiment::PartitionCheck], dir.path()), 0);
        let csv = std::fs::read_to_string(dir.path().join("partition.csv")).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(dir.path().join("angular.csv").exists());
        // no fit: header-only plot files
        let pts = std::fs::read_to_string(dir.path().join("partition.points.dat")).unwrap();
        assert_eq!(pts.lines().count(), 1);
    }

    #[test]
    fn configuration_errors_write_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::parse("[orthogonality]\npairs = [[3, 3]]\n").unwrap();
        let out = dir.path().join("o");
        assert_eq!(run(&cfg, &[Experiment::PartitionCheck, Experiment::Orthogonality], &out), 2);
        assert!(!out.exists());
    }

    #[test]
    fn plot_files_and_raster_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quick();
        let outputs = execute(&cfg, &[Experiment::KernelDecay], |_| {}).unwrap();
        write_outputs(dir.path(), &cfg, &outputs).unwrap();
        let rep = &outputs[0].reports[1];
        let text = std::fs::read_to_string(dir.path().join(format!("{}.points.dat", rep.experiment))).unwrap();
        let back: Vec<(f64, f64)> = text
            .lines()
            .skip(1)
            .map(|l| {
                let mut it = l.split_whitespace().map(|v| v.parse::<f64>().unwrap());
                (it.next().unwrap(), it.next().unwrap())
            })
            .collect();
        assert_eq!(back, rep.plot_points());
        let fit = std::fs::read_to_string(dir.path().join(format!("{}.fit.dat", rep.experiment))).unwrap();
        assert_eq!(fit.lines().count(), 3);

        let (name, field) = &outputs[0].rasters[0];
        let f = std::fs::File::open(dir.path().join(format!("{name}.mpf"))).unwrap();
        let read = read_raster(std::io::BufReader::new(f)).unwrap();
        assert_eq!(read.values, field.field.values);
    }

    #[test]
    fn wall_clock_cap_skips_the_rest() {
        let mut cfg = quick();
        cfg.budget.wall_clock_s = Some(0.0);
        let outputs = execute(&cfg, &[Experiment::PartitionCheck, Experiment::SymbolCheck], |_| {}).unwrap();
        assert_eq!(outputs.len(), 2);
        assert!(outputs.iter().all(|o| !o.pass() && o.reports.is_empty()));
    }
}
