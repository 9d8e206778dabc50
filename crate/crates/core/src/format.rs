//! File formats.
//!
//! Instances are JSON:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "dim": 2,
//!   "points": [{"w": 1.0, "coords": [0.0, 0.0]}, {"w": 2.0, "coords": {"idx": [1], "val": [3.0]}}],
//!   "prescribed_centers": [0],
//!   "k": 1,
//!   "metadata": {"generator": "file", "params": null, "ground_truth_cost": null}
//! }
//! ```
//!
//! `coords` is either a dense array of length `dim` or a sparse `{idx, val}`
//! pair. `prescribed_centers` holds point indices. `ground_truth`,
//! `rule_hint` and `bad_event` are optional.
//!
//! Point sets alone may also be CSV with header `w,x0,x1,…,x{d−1}`. Numbers
//! always use `.` as decimal separator and are written in shortest
//! round-trip form, so a write/read cycle is lossless.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{WeightedPoint, WeightedPointSet};
use crate::instances::{BadEvent, GroundTruth, Instance, Metadata, RuleHint};

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    #[serde(default = "default_version")]
    format_version: u32,
    dim: usize,
    points: Vec<WeightedPoint>,
    #[serde(default)]
    prescribed_centers: Vec<usize>,
    k: usize,
    metadata: Metadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ground_truth: Option<GroundTruth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rule_hint: Option<RuleHint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bad_event: Option<BadEvent>,
}

fn default_version() -> u32 {
    INSTANCE_FORMAT_VERSION
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    let file = InstanceFile {
        format_version: INSTANCE_FORMAT_VERSION,
        dim: inst.x.dim(),
        points: inst.x.points().to_vec(),
        prescribed_centers: inst.prescribed.clone(),
        k: inst.k,
        metadata: inst.metadata.clone(),
        ground_truth: inst.ground_truth.clone(),
        rule_hint: inst.rule_hint.clone(),
        bad_event: inst.bad_event.clone(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn instance_from_json(s: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(s)?;
    if file.format_version != INSTANCE_FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported instance format version {}",
            file.format_version
        )));
    }
    let inst = Instance {
        x: WeightedPointSet::new(file.dim, file.points)?,
        k: file.k,
        prescribed: file.prescribed_centers,
        ground_truth: file.ground_truth,
        rule_hint: file.rule_hint,
        bad_event: file.bad_event,
        metadata: file.metadata,
    };
    inst.validate()?;
    Ok(inst)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(instance_to_json(inst)?.as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let mut s = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut s)?;
    instance_from_json(&s)
}

/// Writes `w,x0,…` rows; sparse points are written densely.
pub fn write_points_csv<W: Write>(out: W, x: &WeightedPointSet) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["w".to_string()];
    header.extend((0..x.dim()).map(|j| format!("x{j}")));
    wtr.write_record(&header)?;
    for p in x.points() {
        let mut row = vec![p.weight.to_string()];
        row.extend(p.coords.to_dense(x.dim()).iter().map(f64::to_string));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_points_csv<R: Read>(input: R) -> Result<WeightedPointSet> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("w") {
        return Err(Error::Parse("CSV header must start with `w`".into()));
    }
    for (j, name) in header.iter().skip(1).enumerate() {
        if name != format!("x{j}") {
            return Err(Error::Parse(format!(
                "CSV column {} is `{name}`, expected `x{j}`",
                j + 1
            )));
        }
    }
    let dim = header.len() - 1;
    let mut points = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let nums = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: `{f}` is not a number", row + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if nums.len() != dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: dim + 1,
                got: nums.len(),
            });
        }
        points.push(WeightedPoint::new(nums[1..].to_vec(), nums[0]));
    }
    WeightedPointSet::new(dim, points)
}
