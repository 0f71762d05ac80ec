//! Benchmark dataset generation and CSV ingestion.
//!
//! Three built-in sample sets exercise increasingly hard fits:
//!   A — sin(x) on [0, π/2], 50 points, 2 segments (a gentle arc)
//!   B — sin(x) on [0, 2π], 100 points, 2 segments (a full period)
//!   C — sin(4π·x²) on [0, 1], 100 points, 3 segments (a chirp whose
//!       frequency grows with x)
//!
//! Generation samples the target on an equally spaced, endpoint-
//! inclusive grid, optionally adds seeded Gaussian noise, and rescales
//! x so each of the m segments spans 2. CSV files always hold
//! ORIGINAL-domain coordinates at full precision; whoever loads one
//! picks their own segment count and rescales accordingly.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::SampleSet;
use crate::piecewise::DomainTransform;

/// Built-in benchmark datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetId {
    A,
    B,
    C,
}

impl std::str::FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(DatasetId::A),
            "B" => Ok(DatasetId::B),
            "C" => Ok(DatasetId::C),
            other => Err(Error::invalid(format!(
                "unknown dataset '{other}' (expected A, B or C)"
            ))),
        }
    }
}

impl std::fmt::Display for DatasetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DatasetId::A => "A",
            DatasetId::B => "B",
            DatasetId::C => "C",
        })
    }
}

/// Target functions the generator can sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// sin(x)
    Sin,
    /// sin(4π·x²) — a quadratic chirp.
    QuadraticChirp,
}

impl Generator {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Generator::Sin => x.sin(),
            Generator::QuadraticChirp => (4.0 * std::f64::consts::PI * x * x).sin(),
        }
    }
}

/// Everything needed to produce one sample set deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub generator: Generator,
    pub interval: (f64, f64),
    pub n: usize,
    /// Segment count the x-axis is rescaled for.
    pub m: usize,
    pub noise_scale: f64,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn preset(id: DatasetId, noise_scale: f64, seed: u64) -> Self {
        let (generator, interval, n, m) = match id {
            DatasetId::A => (Generator::Sin, (0.0, std::f64::consts::FRAC_PI_2), 50, 2),
            DatasetId::B => (Generator::Sin, (0.0, 2.0 * std::f64::consts::PI), 100, 2),
            DatasetId::C => (Generator::QuadraticChirp, (0.0, 1.0), 100, 3),
        };
        DatasetSpec {
            generator,
            interval,
            n,
            m,
            noise_scale,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.interval;
        if !(a < b) {
            return Err(Error::invalid(format!("bad interval [{a}, {b}]")));
        }
        if self.n < 2 {
            return Err(Error::invalid("need at least 2 samples"));
        }
        if self.m == 0 {
            return Err(Error::invalid("segment count must be at least 1"));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(Error::invalid("noise scale must be non-negative"));
        }
        Ok(())
    }
}

/// Sample the target on an even grid, add seeded Gaussian noise and
/// rescale the x-axis. With noise scale 0 the y values equal the target
/// bit-exactly.
pub fn generate(spec: &DatasetSpec) -> Result<SampleSet> {
    spec.validate()?;
    let (a, b) = spec.interval;
    let transform = DomainTransform::new(a, b, spec.m)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = rand_distr::StandardNormal;
    let mut xs = Vec::with_capacity(spec.n);
    let mut ys = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let x = a + (b - a) * i as f64 / (spec.n - 1) as f64;
        let z: f64 = normal.sample(&mut rng);
        xs.push(transform.to_scaled(x));
        ys.push(spec.generator.eval(x) + spec.noise_scale * z);
    }
    SampleSet::new(xs, ys, transform)
}

/// Write samples as `x,y` CSV in ORIGINAL-domain coordinates, with
/// enough digits (17 significant) to round-trip every f64 bit-exactly.
pub fn write_csv(data: &SampleSet, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "x,y")?;
    let t = data.transform();
    for (&x, &y) in data.xs().iter().zip(data.ys()) {
        writeln!(out, "{:.16e},{:.16e}", t.to_original(x), y)?;
    }
    out.flush()?;
    Ok(())
}

/// Read an `x,y` CSV. The returned samples carry the identity
/// transform — they are in whatever units the file used; callers
/// rescale for their own segment count.
pub fn read_csv(path: &Path) -> Result<SampleSet> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line_no == 1 {
            if line.trim() != "x,y" {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header 'x,y', found '{line}'"),
                });
            }
            continue;
        }
        let mut fields = line.split(',');
        let (Some(xf), Some(yf), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: line_no,
                message: "expected exactly two comma-separated values".into(),
            });
        };
        let x: f64 = xf.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("'{xf}' is not a number"),
        })?;
        let y: f64 = yf.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("'{yf}' is not a number"),
        })?;
        xs.push(x);
        ys.push(y);
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("sample x values must be strictly increasing"));
    }
    SampleSet::new(xs, ys, DomainTransform::identity())
}
