//! On-disk artifact formats: drive-ready profile JSON, plot-ready loss
//! CSV, and the run manifest that makes every result reproducible.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ppfit::loss::SampleSet;
use ppfit::optim::TrainingTrace;
use ppfit::piecewise::PiecewisePolynomial;
use ppfit::{Error, Result};

use crate::config::ResolvedFit;

/// Exported model: absolute power-basis coefficients over the original
/// data domain, one segment per knot interval. This is the shape a
/// motion controller ingests — evaluate segment i as
/// `sum_l powers_ascending[l] * x^l` for x in [knots[i], knots[i+1]].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profile {
    pub domain: [f64; 2],
    pub knots: Vec<f64>,
    pub degree: usize,
    pub segments: Vec<ProfileSegment>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSegment {
    pub powers_ascending: Vec<f64>,
}

impl Profile {
    /// Convert a (scaled-domain) model into export form. The sample
    /// set's transform supplies the original-domain mapping.
    pub fn from_model(pp: &PiecewisePolynomial, data: &SampleSet) -> Profile {
        let out = pp.to_export_form(data.transform());
        let knots = out.knots().to_vec();
        Profile {
            domain: [knots[0], *knots.last().unwrap()],
            degree: out.degree(),
            segments: out
                .segments()
                .iter()
                .map(|s| ProfileSegment { powers_ascending: s.coeffs.clone() })
                .collect(),
            knots,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)
        .map_err(|e| Error::invalid(format!("cannot serialize {}: {e}", path.display())))?;
    writeln!(file)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: format!("{}: {e}", path.display()),
    })
}

/// Loss curve as `epoch,total,l2,lck`, full precision — the file the
/// determinism guarantee is stated over.
pub fn write_loss_csv(path: &Path, trace: &TrainingTrace) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "epoch,total,l2,lck")?;
    for r in &trace.records {
        writeln!(out, "{},{:.16e},{:.16e},{:.16e}", r.epoch, r.total, r.l2, r.ck)?;
    }
    out.flush()?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Everything needed to audit or repeat one training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    /// Tool name and version that produced the run.
    pub tool: String,
    pub command: String,
    pub input: InputRecord,
    pub config: ResolvedFit,
    pub artifacts: ArtifactPaths,
    pub metrics: RunMetrics,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactPaths {
    pub loss_csv: String,
    pub profile: String,
}

/// Headline numbers of the run. `final_*` are the values at the best
/// epoch (the state the returned model carries), not the last epoch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetrics {
    pub best_epoch: usize,
    pub final_total: f64,
    pub final_l2: f64,
    pub final_lck: f64,
    /// Residual after exact continuity enforcement (when it ran).
    pub post_ckmin_l2: Option<f64>,
    /// Unconstrained segment-wise optimum on this data, if computable.
    pub l2_star: Option<f64>,
    /// The optimum's residual after continuity enforcement.
    pub l2_star_tilde: Option<f64>,
}

pub fn tool_version() -> String {
    format!("ppfit {}", env!("CARGO_PKG_VERSION"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ppfit::optim::EpochRecord;

    #[test]
    fn sha256_matches_a_known_vector() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("abc.txt");
        std::fs::write(&path, "abc").unwrap();
        assert_eq!(
            sha256_file(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn loss_csv_has_header_and_full_precision_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("loss.csv");
        let trace = TrainingTrace {
            records: vec![
                EpochRecord { epoch: 0, total: 1.0, l2: 1.0, ck: 0.0 },
                EpochRecord { epoch: 1, total: 0.5, l2: 0.25, ck: 2.75 },
            ],
            best_epoch: 1,
            stopped_early: false,
        };
        write_loss_csv(&path, &trace).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("epoch,total,l2,lck"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "0");
        assert_eq!(row[1].parse::<f64>().unwrap(), 1.0);
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn profile_json_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        let p = Profile {
            domain: [0.0, 1.0],
            knots: vec![0.0, 0.5, 1.0],
            degree: 1,
            segments: vec![
                ProfileSegment { powers_ascending: vec![0.1, 0.2] },
                ProfileSegment { powers_ascending: vec![0.3, 0.4] },
            ],
        };
        write_json(&path, &p).unwrap();
        let back: Profile = read_json(&path).unwrap();
        assert_eq!(back.knots, p.knots);
        assert_eq!(back.segments[1].powers_ascending, p.segments[1].powers_ascending);
    }
}
