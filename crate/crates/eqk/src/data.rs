//! Seeded generators for the four synthetic 2-D benchmark datasets and
//! train/test splitting.
//!
//! All coordinates live in [-1, 1]^2 and labels are +1/-1. Each generator is
//! a pure function of `(m, seed)`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::qnn::DataPoint;

/// Spiral shape constants: radius grows to `SPIRAL_GROWTH` over the angle
/// range `[0, SPIRAL_ANGLE_RANGE]`, and points are jittered by an isotropic
/// Gaussian of width `SPIRAL_NOISE_SIGMA` before clipping to the domain.
pub const SPIRAL_GROWTH: f64 = 0.9;
pub const SPIRAL_ANGLE_RANGE: f64 = 3.0 * PI;
pub const SPIRAL_NOISE_SIGMA: f64 = 0.05;

/// Radius of the quarter-circle corner regions.
pub const CORNERS_RADIUS: f64 = 0.75;

/// One of the four benchmark datasets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetName {
    Sinus,
    Corners,
    Spiral,
    Circles,
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DatasetName::Sinus => "sinus",
            DatasetName::Corners => "corners",
            DatasetName::Spiral => "spiral",
            DatasetName::Circles => "circles",
        };
        f.write_str(s)
    }
}

impl FromStr for DatasetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<DatasetName> {
        match s {
            "sinus" => Ok(DatasetName::Sinus),
            "corners" => Ok(DatasetName::Corners),
            "spiral" => Ok(DatasetName::Spiral),
            "circles" => Ok(DatasetName::Circles),
            other => Err(Error::InvalidArgument(format!(
                "unknown dataset name {other:?} (expected sinus|corners|spiral|circles)"
            ))),
        }
    }
}

/// A generated collection of labeled points plus its provenance.
#[derive(Clone, Debug)]
pub struct Dataset {
    name: DatasetName,
    seed: u64,
    points: Vec<DataPoint>,
}

impl Dataset {
    pub fn name(&self) -> DatasetName {
        self.name
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn labels(&self) -> Vec<i8> {
        self.points.iter().map(|p| p.y).collect()
    }

    pub fn features(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| p.x).collect()
    }
}

/// Generate a named dataset.
pub fn generate(name: DatasetName, m: usize, seed: u64) -> Result<Dataset> {
    match name {
        DatasetName::Sinus => gen_sinus(m, seed),
        DatasetName::Corners => gen_corners(m, seed),
        DatasetName::Spiral => gen_spiral(m, seed),
        DatasetName::Circles => gen_circles(m, seed),
    }
}

fn check_count(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "dataset size must be at least 1".into(),
        ));
    }
    Ok(())
}

fn uniform_square(rng: &mut ChaCha8Rng) -> [f64; 2] {
    [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)]
}

/// Label rule of the sinus dataset: -1 above the curve `-0.8 sin(pi x1)`,
/// +1 on or below it.
pub fn sinus_label(x: [f64; 2]) -> i8 {
    if x[1] > -0.8 * (PI * x[0]).sin() {
        -1
    } else {
        1
    }
}

/// Uniform points on the square, split by the sinusoidal boundary.
pub fn gen_sinus(m: usize, seed: u64) -> Result<Dataset> {
    check_count(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..m)
        .map(|_| {
            let x = uniform_square(&mut rng);
            DataPoint {
                x,
                y: sinus_label(x),
            }
        })
        .collect();
    Ok(Dataset {
        name: DatasetName::Sinus,
        seed,
        points,
    })
}

/// Label rule of the corners dataset: -1 strictly inside any of the four
/// quarter circles of radius 0.75 centered at the square's corners.
pub fn corners_label(x: [f64; 2]) -> i8 {
    let inside = [-1.0, 1.0].iter().any(|&cx| {
        [-1.0, 1.0]
            .iter()
            .any(|&cy| (x[0] - cx).hypot(x[1] - cy) < CORNERS_RADIUS)
    });
    if inside {
        -1
    } else {
        1
    }
}

/// Uniform points on the square, split by the corner quarter circles.
pub fn gen_corners(m: usize, seed: u64) -> Result<Dataset> {
    check_count(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..m)
        .map(|_| {
            let x = uniform_square(&mut rng);
            DataPoint {
                x,
                y: corners_label(x),
            }
        })
        .collect();
    Ok(Dataset {
        name: DatasetName::Corners,
        seed,
        points,
    })
}

/// Noise-free position of the +1 spiral arm at angle `t`; the -1 arm is the
/// pointwise negation.
pub fn spiral_arm(t: f64) -> [f64; 2] {
    let r = SPIRAL_GROWTH * t / SPIRAL_ANGLE_RANGE;
    [r * t.cos(), r * t.sin()]
}

/// Two interleaved spiral arms with Gaussian jitter, balanced to within one
/// point (the +1 arm gets the extra point when `m` is odd).
pub fn gen_spiral(m: usize, seed: u64) -> Result<Dataset> {
    check_count(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, SPIRAL_NOISE_SIGMA).expect("valid sigma");
    let n_plus = m.div_ceil(2);
    let mut points = Vec::with_capacity(m);
    for i in 0..m {
        let y: i8 = if i < n_plus { 1 } else { -1 };
        let t = rng.random_range(0.0..SPIRAL_ANGLE_RANGE);
        let arm = spiral_arm(t);
        let base = if y > 0 { arm } else { [-arm[0], -arm[1]] };
        let x = [
            (base[0] + noise.sample(&mut rng)).clamp(-1.0, 1.0),
            (base[1] + noise.sample(&mut rng)).clamp(-1.0, 1.0),
        ];
        points.push(DataPoint { x, y });
    }
    Ok(Dataset {
        name: DatasetName::Spiral,
        seed,
        points,
    })
}

/// Label rule of the circles dataset: -1 inside the annulus between radii
/// `0.5*sqrt(2/pi)` and `sqrt(2/pi)` (inclusive), +1 elsewhere.
pub fn circles_label(x: [f64; 2]) -> i8 {
    let outer = (2.0 / PI).sqrt();
    let inner = 0.5 * outer;
    let r = x[0].hypot(x[1]);
    if (inner..=outer).contains(&r) {
        -1
    } else {
        1
    }
}

/// Uniform points on the square, split by the annular region.
pub fn gen_circles(m: usize, seed: u64) -> Result<Dataset> {
    check_count(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..m)
        .map(|_| {
            let x = uniform_square(&mut rng);
            DataPoint {
                x,
                y: circles_label(x),
            }
        })
        .collect();
    Ok(Dataset {
        name: DatasetName::Circles,
        seed,
        points,
    })
}

/// Disjoint seeded random split into `n_train` + `n_test` points.
pub fn split(dataset: &Dataset, n_train: usize, n_test: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if n_train + n_test > dataset.len() {
        return Err(Error::Precondition(format!(
            "split needs {} points but the dataset has {}",
            n_train + n_test,
            dataset.len()
        )));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let take = |range: std::ops::Range<usize>| Dataset {
        name: dataset.name,
        seed: dataset.seed,
        points: order[range].iter().map(|&i| dataset.points[i]).collect(),
    };
    Ok((take(0..n_train), take(n_train..n_train + n_test)))
}

/// Write points as CSV with header `x1,x2,y` and full-precision decimals.
pub fn write_csv<W: Write>(points: &[DataPoint], mut w: W) -> std::io::Result<()> {
    writeln!(w, "x1,x2,y")?;
    for p in points {
        writeln!(w, "{:.16e},{:.16e},{}", p.x[0], p.x[1], p.y)?;
    }
    Ok(())
}

/// Parse points from the CSV produced by [`write_csv`].
pub fn read_csv<R: BufRead>(r: R, origin: &str) -> Result<Vec<DataPoint>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(origin, e))?
        .ok_or_else(|| Error::parse(origin, "empty file"))?;
    if header.trim() != "x1,x2,y" {
        return Err(Error::parse(
            origin,
            format!("expected header 'x1,x2,y', got {header:?}"),
        ));
    }
    let mut points = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                origin,
                format!("row {}: expected 3 fields, got {}", idx + 2, fields.len()),
            ));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(origin, format!("row {}: {e}", idx + 2)))
        };
        let y = fields[2]
            .trim()
            .parse::<i8>()
            .map_err(|e| Error::parse(origin, format!("row {}: {e}", idx + 2)))?;
        points.push(DataPoint::new([parse_f(fields[0])?, parse_f(fields[1])?], y)?);
    }
    Ok(points)
}

/// Write a dataset's points to a file.
pub fn save_csv(points: &[DataPoint], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    write_csv(points, std::io::BufWriter::new(file))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Read points from a CSV file.
pub fn load_csv(path: &Path) -> Result<Vec<DataPoint>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_csv(std::io::BufReader::new(file), &path.display().to_string())
}
