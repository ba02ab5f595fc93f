//! Run manifests, command dispatch, deterministic JSON output and 2D ball renders.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;

use crate::complex::{complex_structures, complexify_norm};
use crate::error::{Error, Result};
use crate::isometry::{enumerate_tip_candidates, falsify_search, group_closure, FalsifyConfig, FiniteMatrixGroup, KnownSet};
use crate::jarosz::{self, C2NormSpec, ExtensionW};
use crate::linalg::{self, serde_rows_vec, serde_vec, Matrix, Vector};
use crate::norm::{check_norm_axioms, NormKind, NormObject};
use crate::orbit::build_point_family;
use crate::pimple::{self, schedule_parameters, PimpleSpec, PolygonOracle, ScheduleConfig};
use crate::pipeline::{represent, BaseChoice, RepresentConfig};
use crate::rep::GroupTable;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    /// One of the subcommand names, e.g. "norm-eval" or "represent".
    pub command: String,
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Command parameters and overrides.
    #[serde(default)]
    pub config: BTreeMap<String, Value>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl RunManifest {
    /// Reads a manifest; relative input paths are taken from its directory.
    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path)?;
        let mut m: RunManifest = parse_json(&text, &path.display().to_string())?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in &mut m.inputs {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(m)
    }
}

/// Files produced by a run, keyed by file name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub files: BTreeMap<String, String>,
    /// Human-readable one-line result.
    pub summary: String,
}

/// Formatter writing every float with 17 significant digits.
struct Digits17;

fn fmt17(v: f64) -> String {
    if !v.is_finite() {
        return "null".into();
    }
    if v == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci.split('e').nth(1).and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(1) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt17(v).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }
}

/// Serializes with 17-digit floats, two-space indentation and sorted-key maps
/// (struct fields keep declaration order).
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Pretty17::default());
    v.serialize(&mut ser).map_err(|e| Error::Schema(e.to_string()))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("utf8 json"))
}

/// Pretty printing with 17-digit floats.
#[derive(Default)]
struct Pretty17 {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $t:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $t)*) -> io::Result<()> {
            self.inner.$name(w $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for Pretty17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        Digits17.write_f64(w, v)
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    );
}

pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
}

fn read_input<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    parse_json(&text, &path.display().to_string())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RenderPoint {
    pub theta: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallRender {
    pub points: Vec<RenderPoint>,
    #[serde(with = "crate::linalg::serde_vecs")]
    pub tips: Vec<Vector>,
    pub csv: String,
    pub svg: String,
}

/// Boundary of the unit ball of a norm on R² sampled at `resolution` angles.
pub fn render_ball_2d(norm: &NormObject, resolution: usize) -> Result<BallRender> {
    if norm.dim != 2 {
        return Err(Error::arg("render needs a norm on R²"));
    }
    if resolution < 64 {
        return Err(Error::arg("resolution must be at least 64"));
    }
    let mut points = Vec::with_capacity(resolution);
    for i in 0..resolution {
        let theta = std::f64::consts::TAU * i as f64 / resolution as f64;
        let u = linalg::vector(&[theta.cos(), theta.sin()]);
        points.push(RenderPoint { theta, radius: 1.0 / norm.eval(&u)? });
    }
    let tips = match &norm.kind {
        NormKind::PimpleHull { spec } => spec.tips(),
        _ => Vec::new(),
    };
    let mut csv = String::from("theta,radius\n");
    for p in &points {
        let _ = writeln!(csv, "{},{}", fmt17(p.theta), fmt17(p.radius));
    }
    let rmax = points.iter().map(|p| p.radius).fold(0.0, f64::max).max(1.0) * 1.1;
    let scale = 200.0 / rmax;
    let xy = |x: f64, y: f64| (250.0 + scale * x, 250.0 - scale * y);
    let mut path = String::new();
    for (i, p) in points.iter().enumerate() {
        let (x, y) = xy(p.radius * p.theta.cos(), p.radius * p.theta.sin());
        let _ = write!(path, "{}{x:.4},{y:.4} ", if i == 0 { "M" } else { "L" });
    }
    path.push('Z');
    let mut svg = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"500\" height=\"500\" viewBox=\"0 0 500 500\">\n",
    );
    let _ = writeln!(svg, "  <line x1=\"0\" y1=\"250\" x2=\"500\" y2=\"250\" stroke=\"#ccc\"/>");
    let _ = writeln!(svg, "  <line x1=\"250\" y1=\"0\" x2=\"250\" y2=\"500\" stroke=\"#ccc\"/>");
    let _ = writeln!(svg, "  <path d=\"{path}\" fill=\"#dde8f4\" stroke=\"#1f4e79\" stroke-width=\"1.5\"/>");
    for t in &tips {
        let (x, y) = xy(t[0], t[1]);
        let _ = writeln!(svg, "  <path d=\"M{:.4},{:.4} l5,8 h-10 z\" fill=\"#b22222\"/>", x, y - 5.0);
    }
    svg.push_str("</svg>\n");
    Ok(BallRender { points, tips, csv, svg })
}

fn cfg_get<T: DeserializeOwned>(m: &RunManifest, key: &str) -> Result<Option<T>> {
    match m.config.get(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| Error::Schema(format!("config.{key}: {e}"))),
    }
}

fn cfg_req<T: DeserializeOwned>(m: &RunManifest, key: &str) -> Result<T> {
    cfg_get(m, key)?.ok_or_else(|| Error::Schema(format!("config.{key} is required")))
}

fn input(m: &RunManifest, i: usize) -> Result<&Path> {
    m.inputs.get(i).map(PathBuf::as_path).ok_or_else(|| Error::Schema(format!("{} needs input file #{}", m.command, i + 1)))
}

fn vector_arg(m: &RunManifest, key: &str) -> Result<Vector> {
    let xs: Vec<f64> = cfg_req(m, key)?;
    Ok(Vector::from_vec(xs))
}

fn falsify_cfg(m: &RunManifest) -> Result<FalsifyConfig> {
    let d = FalsifyConfig::default();
    Ok(FalsifyConfig {
        starts: cfg_get(m, "starts")?.unwrap_or(d.starts),
        steps: cfg_get(m, "steps")?.unwrap_or(d.steps),
        samples: cfg_get(m, "samples")?.unwrap_or(d.samples),
        seed: m.seed,
    })
}

/// Group input: explicit generators closed under multiplication.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupInput {
    #[serde(with = "serde_rows_vec")]
    pub generators: Vec<Matrix>,
}

impl GroupInput {
    pub fn build(&self) -> Result<FiniteMatrixGroup> {
        group_closure(&self.generators, 4096)
    }
}

/// Input to `pimple-build` and `orbit-build`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstructionInput {
    pub base: NormObject,
    pub group: GroupInput,
    #[serde(default, with = "crate::linalg::serde_vecs")]
    pub points: Vec<Vector>,
    #[serde(default, with = "serde_vec::option")]
    pub x0: Option<Vector>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    /// Explicit λ_k; bypasses the schedule when present.
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
}

impl ConstructionInput {
    /// Builds the pimple spec: explicit points (or the orbit family of `x0`),
    /// then explicit λ or the schedule.
    pub fn build_spec(&self) -> Result<PimpleSpec> {
        self.base.validate()?;
        let group = self.group.build()?;
        let points = if !self.points.is_empty() {
            self.points.clone()
        } else if let Some(x0) = &self.x0 {
            build_point_family(&group, &self.base, x0)?.vectors()
        } else {
            return Err(Error::Schema("either points or x0 is required".into()));
        };
        match &self.lambdas {
            Some(l) => {
                if l.len() != points.len() || l.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                    return Err(Error::Schema("lambdas must match the points and lie in (0,1)".into()));
                }
                pimple::check_invariance(&self.base, &group, 200, 1)?;
                Ok(PimpleSpec::new(self.base.clone(), group, points, l.clone()))
            }
            None => schedule_parameters(&self.base, &group, &points, &self.schedule),
        }
    }
}

fn load_spec(path: &Path) -> Result<PimpleSpec> {
    let spec: PimpleSpec = read_input(path)?;
    // re-derive the table so a tampered file cannot smuggle in a non-group
    let group = FiniteMatrixGroup::from_elements(spec.group.elements.clone())?;
    let mut s = PimpleSpec::new(spec.base.clone(), group, spec.points.clone(), spec.lambdas.clone());
    s.widths = spec.widths;
    s.deltas = spec.deltas;
    s.epsilons = spec.epsilons;
    s.tol = spec.tol;
    s.base.validate()?;
    Ok(s)
}

#[derive(Serialize)]
struct EvalReport<'a> {
    norm: &'a str,
    #[serde(with = "serde_vec")]
    x: Vector,
    value: f64,
}

/// Executes a manifest. Writes into `output_dir` when set and returns the files.
pub fn run_command(m: &RunManifest) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let name = m.command.as_str();
    let report: Value = match name {
        "norm-eval" => {
            let norm: NormObject = read_input(input(m, 0)?)?;
            norm.validate()?;
            let x = vector_arg(m, "x")?;
            let value = norm.eval(&x)?;
            out.summary = fmt17(value);
            json_value(&EvalReport { norm: norm.kind_name(), x, value })?
        }
        "norm-check" => {
            let norm: NormObject = read_input(input(m, 0)?)?;
            norm.validate()?;
            let rep = check_norm_axioms(&norm, cfg_get(m, "samples")?.unwrap_or(1000), m.seed);
            out.summary = format!("max violation {}", fmt17(rep.max_violation()));
            json_value(&rep)?
        }
        "pimple-build" => {
            let inp: ConstructionInput = read_input(input(m, 0)?)?;
            let spec = inp.build_spec()?;
            out.summary = format!("lambdas {:?}", spec.lambdas);
            json_value(&spec)?
        }
        "pimple-eval" => {
            let spec = load_spec(input(m, 0)?)?;
            let x = vector_arg(m, "x")?;
            let ev = spec.evaluate(&x)?;
            out.summary = fmt17(ev.value);
            json_value(&ev)?
        }
        "pimple-check" => {
            let spec = load_spec(input(m, 0)?)?;
            let rep = pimple::validate_spec(&spec)?;
            let isolation = pimple::tip_isolation(&spec)?;
            out.summary = format!("pass {}", rep.pass);
            let mut v = json_value(&rep)?;
            v["tip_protrusion"] = json_value(&isolation)?;
            if spec.dim() == 2 {
                let oracle = PolygonOracle::new(&spec, 16384)?;
                let mut worst = 0.0f64;
                let mut r = linalg::rng(m.seed);
                for _ in 0..200 {
                    let y = linalg::gaussian(&mut r, 2);
                    worst = worst.max((spec.eval(&y)? - oracle.gauge(&y)?).abs());
                }
                v["polygon_oracle_max_diff"] = Value::from(worst);
            }
            v
        }
        "orbit-build" => {
            let inp: ConstructionInput = read_input(input(m, 0)?)?;
            let x0 = inp.x0.ok_or_else(|| Error::Schema("x0 is required".into()))?;
            let fam = build_point_family(&inp.group.build()?, &inp.base, &x0)?;
            out.summary = format!("{} points, alpha {}", fam.points.len(), fmt17(fam.alpha));
            json_value(&fam)?
        }
        "isometries-enumerate" => {
            let spec = load_spec(input(m, 0)?)?;
            let c = enumerate_tip_candidates(&spec, m.seed)?;
            out.summary = format!("{} candidate isometries", c.maps.len());
            json_value(&c)?
        }
        "isometries-falsify" => {
            let spec = load_spec(input(m, 0)?)?;
            let known = KnownSet::Finite(spec.group.clone());
            let rep = falsify_search(&NormObject::pimple(spec), &known, &falsify_cfg(m)?)?;
            out.summary = format!("best intruder residual {:?}", rep.best_intruder_residual);
            json_value(&rep)?
        }
        "represent" => {
            let group = GroupTable::preset(&cfg_req::<String>(m, "group")?)?;
            let rc = RepresentConfig {
                dim: cfg_req(m, "dim")?,
                base: cfg_get(m, "base")?.unwrap_or(BaseChoice::L4),
                schedule: cfg_get(m, "schedule")?.unwrap_or_default(),
                falsify: falsify_cfg(m)?,
            };
            let rep = represent(&group, &rc)?;
            out.summary = format!(
                "isometry group order {} {} {}",
                rep.isometries.order,
                if rep.isometries.isomorphic_to_target { "≅" } else { "≇" },
                rep.group.name
            );
            json_value(&rep)?
        }
        "complex-structures" => {
            let g: GroupInput = read_input(input(m, 0)?)?;
            let rep = complex_structures(&g.build()?)?;
            out.summary = format!("{} roots in {} classes", rep.roots.len(), rep.classes.len());
            json_value(&rep)?
        }
        "complexify" => {
            let base: NormObject = read_input(input(m, 0)?)?;
            let (norm, j, c) = complexify_norm(&base);
            let g = group_closure(&[j, c], 64)?;
            let rep = complex_structures(&g)?;
            out.summary = format!("{} roots in {} classes", rep.roots.len(), rep.classes.len());
            serde_json::json!({ "norm": json_value(&norm)?, "group": json_value(&g)?, "structures": json_value(&rep)? })
        }
        "jarosz-c2" => {
            let spec: C2NormSpec = cfg_get(m, "spec")?.unwrap_or_default();
            let norm = jarosz::c2_norm_build(&spec)?;
            let rejections = jarosz::reject_candidate_forms(&spec)?;
            let fals = jarosz::c2_falsify(&spec, &falsify_cfg(m)?)?;
            out.summary = format!(
                "forms rejected {}, best intruder residual {:?}",
                rejections.iter().all(|r| r.rejected),
                fals.best_intruder_residual
            );
            serde_json::json!({ "spec": json_value(&spec)?, "norm": json_value(&norm)?, "rejections": json_value(&rejections)?, "falsifier": json_value(&fals)? })
        }
        "jarosz-double" => {
            let n: usize = cfg_get(m, "gamma_count")?.unwrap_or(2);
            let variant: u8 = cfg_get(m, "variant")?.unwrap_or(2);
            let norm = jarosz::double_norm_build(n, variant)?;
            if let Some(x) = cfg_get::<Vec<f64>>(m, "x")? {
                let value = norm.eval(&Vector::from_vec(x))?;
                out.summary = fmt17(value);
                serde_json::json!({ "norm": json_value(&norm)?, "value": value })
            } else {
                out.summary = format!("double norm variant {variant} on {n} coordinates");
                json_value(&norm)?
            }
        }
        "jarosz-extend" => {
            let inner: NormObject = cfg_get(m, "inner")?.unwrap_or_else(|| NormObject::euclidean(2));
            let p: NormObject = cfg_get(m, "p")?.unwrap_or_else(|| inner.clone());
            let x0 = cfg_get::<Vec<f64>>(m, "x0")?.map(Vector::from_vec).unwrap_or_else(|| linalg::basis(inner.dim, 0) * 0.1);
            let w = ExtensionW::new(inner, p, x0)?;
            let norm = NormObject { dim: w.dim(), kind: NormKind::ExtensionW { spec: Box::new(w) } };
            if let Some(x) = cfg_get::<Vec<f64>>(m, "x")? {
                let value = norm.eval(&Vector::from_vec(x))?;
                out.summary = fmt17(value);
                serde_json::json!({ "norm": json_value(&norm)?, "value": value })
            } else {
                out.summary = "extension norm built".into();
                json_value(&norm)?
            }
        }
        "render" => {
            let norm: NormObject = read_input(input(m, 0)?)?;
            norm.validate()?;
            let r = render_ball_2d(&norm, cfg_get(m, "resolution")?.unwrap_or(360))?;
            out.files.insert("render.csv".into(), r.csv.clone());
            out.files.insert("render.svg".into(), r.svg.clone());
            out.summary = format!("{} boundary points", r.points.len());
            json_value(&r.points)?
        }
        other => return Err(Error::Schema(format!("unknown command {other:?}"))),
    };
    out.files.insert(format!("{name}.json"), to_json(&report)?);
    if let Some(dir) = &m.output_dir {
        std::fs::create_dir_all(dir)?;
        for (f, text) in &out.files {
            std::fs::write(dir.join(f), text)?;
        }
    }
    Ok(out)
}

fn json_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Schema(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.1), "0.10000000000000001");
        assert_eq!(fmt17(5.0), "5.0000000000000000");
        assert_eq!(fmt17(1e-9), "1.0000000000000001e-9");
        let x: f64 = fmt17(std::f64::consts::PI).parse().unwrap();
        assert_eq!(x, std::f64::consts::PI);
    }

    #[test]
    fn render_disk() {
        let r = render_ball_2d(&NormObject::euclidean(2), 360).unwrap();
        assert!(r.points.iter().all(|p| (p.radius - 1.0).abs() < 1e-9));
        assert!(r.csv.starts_with("theta,radius\n"));
        assert!(render_ball_2d(&NormObject::euclidean(3), 360).is_err());
        assert!(render_ball_2d(&NormObject::euclidean(2), 10).is_err());
    }
}
