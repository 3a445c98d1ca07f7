//! File formats: curve JSON, sampled-field JSON, line-field JSON, CSV and OBJ
//! export, and the run report wrapper.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;
use tpknot::curve::{Curve, Interval};
use tpknot::gluing::LineField;
use tpknot::variation::VariationField;
use tpknot::vec3::Vec3;

#[derive(Serialize, Deserialize)]
struct CurveFile {
    n: usize,
    points: Vec<[f64; 3]>,
}

pub fn load_curve(path: &Path) -> Result<Curve> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading curve file {}", path.display()))?;
    let file: CurveFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing curve JSON {}", path.display()))?;
    if file.points.len() != file.n {
        bail!("curve file declares n = {} but holds {} points", file.n, file.points.len());
    }
    let points = file.points.into_iter().map(Vec3::from).collect();
    Ok(Curve::new(points)?)
}

pub fn save_curve(path: &Path, curve: &Curve) -> Result<()> {
    let file = CurveFile {
        n: curve.n(),
        points: curve.points().iter().map(|&p| p.into()).collect(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct FieldFile {
    n: usize,
    vectors: Vec<[f64; 3]>,
}

pub fn load_field(path: &Path) -> Result<Vec<Vec3>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading field file {}", path.display()))?;
    let file: FieldFile = serde_json::from_str(&text)?;
    if file.vectors.len() != file.n {
        bail!("field file declares n = {} but holds {} vectors", file.n, file.vectors.len());
    }
    Ok(file.vectors.into_iter().map(Vec3::from).collect())
}

#[derive(Serialize, Deserialize)]
struct PhiFile {
    n: usize,
    vectors: Vec<[f64; 3]>,
    support_center: f64,
    support_radius: f64,
}

pub fn load_phi(path: &Path) -> Result<VariationField> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading test-field file {}", path.display()))?;
    let file: PhiFile = serde_json::from_str(&text)?;
    if file.vectors.len() != file.n {
        bail!("test-field file declares n = {} but holds {} vectors", file.n, file.vectors.len());
    }
    let support = Interval::new(file.support_center, file.support_radius)?;
    Ok(VariationField::new(
        file.vectors.into_iter().map(Vec3::from).collect(),
        support,
    )?)
}

#[derive(Serialize, Deserialize)]
struct LineFile {
    a: f64,
    b: f64,
    values: Vec<[f64; 3]>,
}

pub fn load_line_field(path: &Path) -> Result<LineField> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading line-field file {}", path.display()))?;
    let file: LineFile = serde_json::from_str(&text)?;
    Ok(LineField::new(
        file.a,
        file.b,
        file.values.into_iter().map(Vec3::from).collect(),
    )?)
}

/// CSV export: one row per sample, `t,x,y,z`.
pub fn save_curve_csv(path: &Path, curve: &Curve) -> Result<()> {
    let mut out = String::from("t,x,y,z\n");
    for i in 0..curve.n() {
        let p = curve.point(i);
        out.push_str(&format!("{},{},{},{}\n", curve.param(i), p.x, p.y, p.z));
    }
    fs::write(path, out)?;
    Ok(())
}

/// OBJ export: vertices plus one closed polyline element.
pub fn save_curve_obj(path: &Path, curve: &Curve) -> Result<()> {
    let mut out = String::new();
    for i in 0..curve.n() {
        let p = curve.point(i);
        out.push_str(&format!("v {} {} {}\n", p.x, p.y, p.z));
    }
    out.push('l');
    for i in 1..=curve.n() {
        out.push_str(&format!(" {i}"));
    }
    out.push_str(" 1\n");
    fs::write(path, out)?;
    Ok(())
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

/// Envelope for every command's JSON output.
#[derive(Serialize)]
pub struct RunReport<T: Serialize> {
    pub command: String,
    pub inputs_sha256: Vec<String>,
    pub outputs: T,
    pub passed: Option<bool>,
    pub wall_time_s: f64,
}

pub fn emit<T: Serialize>(report: &RunReport<T>, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}
