//! On-disk formats: skeleton JSON, motion CSV, regressor CSV.
//!
//! Numbers are written in Rust's shortest round-trip decimal form, so
//! every finite `f64` reads back bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use hmp_core::retarget::JointRegressor;
use hmp_core::{Motion, MotionMeta, Skeleton, Source, Vec3};
use serde::{Deserialize, Serialize};

use crate::FormatError;

type Result<T> = std::result::Result<T, FormatError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointEntry {
    name: String,
    /// `-1` marks the root.
    parent: i64,
    offset_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SkeletonFile {
    joints: Vec<JointEntry>,
    eval_subset: Vec<usize>,
}

pub fn parse_skeleton(text: &str) -> Result<Skeleton> {
    let file: SkeletonFile = serde_json::from_str(text)?;
    let mut names = Vec::with_capacity(file.joints.len());
    let mut parents = Vec::with_capacity(file.joints.len());
    let mut offsets = Vec::with_capacity(file.joints.len());
    for (joint, j) in file.joints.into_iter().enumerate() {
        parents.push(match j.parent {
            -1 => None,
            p if p >= 0 => Some(p as usize),
            p => {
                return Err(hmp_core::Error::InvalidParent {
                    joint,
                    parent: p as isize,
                }
                .into())
            }
        });
        names.push(j.name);
        offsets.push(j.offset_mm);
    }
    Ok(Skeleton::new(names, parents, offsets, file.eval_subset)?)
}

pub fn skeleton_to_json(skeleton: &Skeleton) -> String {
    let joints = (0..skeleton.joint_count())
        .map(|j| JointEntry {
            name: skeleton.names()[j].clone(),
            parent: skeleton.parent(j).map_or(-1, |p| p as i64),
            offset_mm: skeleton.offsets()[j],
        })
        .collect();
    let file = SkeletonFile {
        joints,
        eval_subset: skeleton.eval_subset().to_vec(),
    };
    serde_json::to_string_pretty(&file).expect("skeleton serializes")
}

pub fn read_skeleton(path: &Path) -> Result<Skeleton> {
    parse_skeleton(&fs::read_to_string(path)?)
}

pub fn write_skeleton(skeleton: &Skeleton, path: &Path) -> Result<()> {
    Ok(fs::write(path, skeleton_to_json(skeleton) + "\n")?)
}

fn check_meta_field(name: &'static str, value: &str) -> Result<()> {
    if value.contains([',', '=', '\n', '\r']) {
        return Err(FormatError::InvalidMeta(name));
    }
    Ok(())
}

fn header_line(motion: &Motion) -> Result<String> {
    let meta = &motion.meta;
    check_meta_field("action", &meta.action)?;
    check_meta_field("subject", &meta.subject)?;
    Ok(format!(
        "#fps={},action={},subject={},source={},recording={}",
        motion.fps(),
        meta.action,
        meta.subject,
        meta.source,
        meta.recording
    ))
}

/// Writes the motion CSV: metadata line, column header, one row per frame.
pub fn write_motion_to<W: Write>(motion: &Motion, mut out: W) -> Result<()> {
    let mut text = header_line(motion)?;
    text.push('\n');
    let joints = motion.joint_count();
    for j in 0..joints {
        if j > 0 {
            text.push(',');
        }
        let _ = write!(text, "j{j}_x,j{j}_y,j{j}_z");
    }
    text.push('\n');
    for frame in motion.frames() {
        for (j, p) in frame.iter().enumerate() {
            if j > 0 {
                text.push(',');
            }
            let _ = write!(text, "{},{},{}", p[0], p[1], p[2]);
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_motion(motion: &Motion, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    write_motion_to(motion, &mut out)?;
    out.flush()?;
    Ok(())
}

fn malformed(reason: impl Into<String>) -> FormatError {
    FormatError::MalformedHeader(reason.into())
}

fn parse_header(line: &str) -> Result<(u32, MotionMeta)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| malformed("first line must start with '#'"))?;
    let mut fps = None;
    let mut meta = MotionMeta::default();
    let mut seen = [false; 5];
    for field in body.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| malformed(format!("field '{field}' is not key=value")))?;
        let slot = match key {
            "fps" => {
                fps = Some(
                    value
                        .parse::<u32>()
                        .ok()
                        .filter(|&f| f > 0)
                        .ok_or_else(|| malformed(format!("bad fps '{value}'")))?,
                );
                0
            }
            "action" => {
                meta.action = value.to_string();
                1
            }
            "subject" => {
                meta.subject = value.to_string();
                2
            }
            "source" => {
                meta.source = value
                    .parse::<Source>()
                    .map_err(|_| malformed(format!("unknown source '{value}'")))?;
                3
            }
            "recording" => {
                meta.recording = value
                    .parse()
                    .map_err(|_| malformed(format!("bad recording '{value}'")))?;
                4
            }
            _ => return Err(malformed(format!("unknown key '{key}'"))),
        };
        if std::mem::replace(&mut seen[slot], true) {
            return Err(malformed(format!("duplicate key '{key}'")));
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(malformed("missing one of fps, action, subject, source, recording"));
    }
    Ok((fps.unwrap_or_default(), meta))
}

fn check_column_header(line: &str, joints: usize) -> Result<()> {
    let cols: Vec<&str> = line.split(',').collect();
    if cols.len() % 3 != 0 || cols.len() / 3 != joints {
        return Err(FormatError::JointCountMismatch {
            expected: joints,
            columns: cols.len(),
        });
    }
    for (i, c) in cols.iter().enumerate() {
        let want = format!("j{}_{}", i / 3, ["x", "y", "z"][i % 3]);
        if *c != want {
            return Err(malformed(format!("column {i} is '{c}', expected '{want}'")));
        }
    }
    Ok(())
}

/// Reads a motion CSV. With `joints = None` the joint count is taken from
/// the column header (used for mesh vertices before regression).
pub fn read_motion_from<R: BufRead>(input: R, joints: Option<usize>) -> Result<Motion> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.ok_or_else(|| malformed("empty file"))?;
    let (fps, meta) = parse_header(header.trim_end())?;
    let columns = lines.next().transpose()?.ok_or(FormatError::EmptySequence)?;
    let columns = columns.trim_end();
    let joints = joints.unwrap_or_else(|| columns.split(',').count() / 3);
    check_column_header(columns, joints)?;
    let mut data: Vec<Vec3> = Vec::new();
    let mut frame = 0;
    for line in lines {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let values: Vec<&str> = line.split(',').collect();
        if values.len() != 3 * joints {
            return Err(FormatError::JointCountMismatch {
                expected: joints,
                columns: values.len(),
            });
        }
        for (j, xyz) in values.chunks(3).enumerate() {
            let mut p = [0.0; 3];
            for (k, text) in xyz.iter().enumerate() {
                let v: f64 = text.trim().parse().map_err(|_| FormatError::BadNumber {
                    frame,
                    text: text.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(FormatError::NonFiniteValue { frame, joint: j });
                }
                p[k] = v;
            }
            data.push(p);
        }
        frame += 1;
    }
    if frame == 0 {
        return Err(FormatError::EmptySequence);
    }
    Ok(Motion::new(joints, data, fps, meta)?)
}

/// Reads a motion CSV bound to `skeleton`.
pub fn read_motion(path: &Path, skeleton: &Skeleton) -> Result<Motion> {
    read_motion_from(BufReader::new(fs::File::open(path)?), Some(skeleton.joint_count()))
}

/// Reads a motion CSV of any joint (or vertex) count.
pub fn read_motion_unbound(path: &Path) -> Result<Motion> {
    read_motion_from(BufReader::new(fs::File::open(path)?), None)
}

/// Every `*.csv` motion in `dir`, in file-name order.
pub fn read_motion_dir(dir: &Path, skeleton: &Skeleton) -> Result<Vec<Motion>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "csv"));
    paths.sort();
    paths.iter().map(|p| read_motion(p, skeleton)).collect()
}

/// Regressor CSV: one row of comma-separated vertex weights per joint.
pub fn parse_regressor(text: &str) -> Result<JointRegressor> {
    let mut rows = Vec::new();
    for (frame, line) in text.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
        let row = line
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| FormatError::BadNumber {
                    frame,
                    text: t.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(JointRegressor::new(rows)?)
}

pub fn read_regressor(path: &Path) -> Result<JointRegressor> {
    parse_regressor(&fs::read_to_string(path)?)
}

pub fn write_regressor(regressor: &JointRegressor, path: &Path) -> Result<()> {
    let mut text = String::new();
    for j in 0..regressor.joint_count() {
        let row: Vec<String> = regressor.row(j).iter().map(|w| w.to_string()).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    Ok(fs::write(path, text)?)
}
