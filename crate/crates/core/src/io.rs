//! JSON net files with canonical number rendering, and Wavefront OBJ export
//! through a chart of the space form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::conserved::ConservedQuantity;
use crate::error::{Error, Result};
use crate::grid::{EdgeFunction, GridDomain, Vertex, VertexField};
use crate::isothermic::IsothermicNet;
use crate::minkowski::{curvature, orthonormal_complement, MVector};
use crate::poly::MPoly;
use crate::scalar::{Real, Tol};

pub const FORMAT_VERSION: &str = "cmcnet-net/1";

/// A conserved quantity as stored: ascending coefficients per vertex, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityRecord {
    pub degree: usize,
    pub coeffs: Vec<Vec<[f64; 5]>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub construction: BTreeMap<String, serde_json::Value>,
}

/// On-disk net. Lifts are the source of truth; points in R^3 are derived on export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetFile {
    pub version: String,
    pub rows: usize,
    pub cols: usize,
    /// Grid index `(m, n)` of the first vertex.
    #[serde(default)]
    pub origin: [i32; 2],
    /// `rows` rows of `cols` lifts each.
    pub lifts: Vec<Vec<[f64; 5]>>,
    /// Factorizer on `m`-edges (`rows - 1` values) and `n`-edges (`cols - 1` values).
    pub a_u: Vec<f64>,
    pub a_v: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quantities: Vec<QuantityRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl NetFile {
    pub fn from_net<T: Real>(net: &IsothermicNet<T>, quantities: &[ConservedQuantity<T>], meta: Option<Metadata>) -> Self {
        let d = net.domain();
        let lifts = (d.m1..=d.m2)
            .map(|m| (d.n1..=d.n2).map(|n| net.lift(Vertex::new(m, n)).to_f64()).collect())
            .collect();
        let quantities = quantities
            .iter()
            .map(|q| QuantityRecord {
                // stored length, not the numerical degree: trailing near-zero coefficients are kept
                degree: q.values.values().iter().map(|p| p.coeffs.len().saturating_sub(1)).max().unwrap_or(0),
                coeffs: q.values.values().iter().map(|p| p.coeffs.iter().map(|c| c.to_f64()).collect()).collect(),
            })
            .collect();
        NetFile {
            version: FORMAT_VERSION.into(),
            rows: d.rows(),
            cols: d.cols(),
            origin: [d.m1, d.n1],
            lifts,
            a_u: (d.m1..d.m2).map(|m| net.a.horizontal(m).as_f64()).collect(),
            a_v: (d.n1..d.n2).map(|n| net.a.vertical(n).as_f64()).collect(),
            quantities,
            metadata: meta,
        }
    }

    pub fn domain(&self) -> Result<GridDomain> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::DimensionMismatch("rows and cols must be positive".into()));
        }
        GridDomain::new(
            self.origin[0],
            self.origin[0] + self.rows as i32 - 1,
            self.origin[1],
            self.origin[1] + self.cols as i32 - 1,
        )
    }

    /// Checks array lengths and finiteness; reports the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Parse(format!("field `version`: expected {FORMAT_VERSION}, got {}", self.version)));
        }
        let d = self.domain()?;
        if self.lifts.len() != self.rows {
            return Err(Error::DimensionMismatch(format!("field `lifts`: {} rows, expected {}", self.lifts.len(), self.rows)));
        }
        for (m, row) in self.lifts.iter().enumerate() {
            if row.len() != self.cols {
                return Err(Error::DimensionMismatch(format!("field `lifts[{m}]`: {} entries, expected {}", row.len(), self.cols)));
            }
        }
        if self.a_u.len() + 1 != self.rows || self.a_v.len() + 1 != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "fields `a_u`/`a_v`: lengths {}/{}, expected {}/{}",
                self.a_u.len(),
                self.a_v.len(),
                self.rows - 1,
                self.cols - 1
            )));
        }
        for (k, q) in self.quantities.iter().enumerate() {
            if q.coeffs.len() != d.len() {
                return Err(Error::DimensionMismatch(format!("field `quantities[{k}].coeffs`: {} vertices, expected {}", q.coeffs.len(), d.len())));
            }
            if q.coeffs.iter().any(|c| c.len() > q.degree + 1) {
                return Err(Error::DimensionMismatch(format!("field `quantities[{k}]`: more coefficients than degree + 1")));
            }
        }
        let finite = self.lifts.iter().flatten().flatten().chain(&self.a_u).chain(&self.a_v).all(|x| x.is_finite())
            && self.quantities.iter().flat_map(|q| q.coeffs.iter().flatten().flatten()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::Parse("non-finite number".into()));
        }
        Ok(())
    }

    pub fn lifts<T: Real>(&self) -> Result<VertexField<MVector<T>>> {
        self.validate()?;
        let vals = self.lifts.iter().flatten().map(|c| MVector::from_f64(*c)).collect();
        VertexField::from_vec(self.domain()?, vals)
    }

    pub fn factorizer<T: Real>(&self) -> Result<EdgeFunction<T>> {
        let lit = |v: &[f64]| v.iter().map(|x| T::lit(*x)).collect();
        EdgeFunction::new(self.domain()?, lit(&self.a_u), lit(&self.a_v))
    }

    /// The stored net, checked to be isothermic with the stored factorizer.
    pub fn to_net<T: Real>(&self, tol: Tol<T>) -> Result<IsothermicNet<T>> {
        IsothermicNet::new(self.lifts()?, self.factorizer()?, tol)
    }

    /// Lifts and factorizer without the isothermic check.
    pub fn to_net_unchecked<T: Real>(&self) -> Result<IsothermicNet<T>> {
        Ok(IsothermicNet { lifts: self.lifts()?, a: self.factorizer()? })
    }

    pub fn quantities<T: Real>(&self) -> Result<Vec<ConservedQuantity<T>>> {
        self.validate()?;
        let d = self.domain()?;
        self.quantities
            .iter()
            .map(|q| {
                let vals = q.coeffs.iter().map(|c| MPoly::new(c.iter().map(|x| MVector::from_f64(*x)).collect())).collect();
                Ok(ConservedQuantity::new(VertexField::from_vec(d, vals)?))
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: NetFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
        f.validate()?;
        Ok(f)
    }

    /// Canonical rendering: two-space indentation, every float with 17 significant digits.
    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter::default());
        self.serialize(&mut ser).map_err(|e| Error::Io(e.to_string()))?;
        buf.push(b'\n');
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// Pretty JSON with floats rendered as `{:.16e}`, so that parsing and
/// re-rendering is byte-stable.
#[derive(Default)]
pub struct CanonicalFormatter {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

/// Chart used to draw a space form in R^3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `kappa = 0`: the Euclidean space itself.
    Euclidean,
    /// `kappa < 0`: Poincaré ball, scaled to the unit ball.
    Poincare,
    /// `kappa > 0`: stereographic projection of the sphere of radius `1/sqrt(kappa)`.
    Stereographic,
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Model::Euclidean),
            "poincare" => Ok(Model::Poincare),
            "stereographic" => Ok(Model::Stereographic),
            _ => Err(Error::Parse(format!("unknown model `{s}`"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Euclidean => "euclidean",
            Model::Poincare => "poincare",
            Model::Stereographic => "stereographic",
        })
    }
}

/// Why a vertex was clamped on export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    /// `<F, Q> = 0`: the point lies on the infinity boundary of the space form.
    Infinity,
    /// The stereographic pole.
    Pole,
}

/// Maps lifts into R^3 for one of the three models.
#[derive(Debug, Clone)]
pub struct Chart<T> {
    pub model: Model,
    q: MVector<T>,
    kappa: T,
    /// Timelike member of the basis of `Q^perp`, Poincaré only.
    time: MVector<T>,
    /// Spacelike coordinate vectors.
    axes: Vec<MVector<T>>,
    /// Coordinate norm beyond which a point is clamped.
    pub clamp: T,
}

impl<T: Real> Chart<T> {
    pub fn new(q: MVector<T>, model: Model, clamp: T, tol: Tol<T>) -> Result<Self> {
        let kappa = curvature(&q);
        let e = q.euclid_norm();
        let flat = tol.small(kappa, e * e);
        let want = if flat {
            Model::Euclidean
        } else if kappa < T::zero() {
            Model::Poincare
        } else {
            Model::Stereographic
        };
        if want != model {
            return Err(Error::ModelMismatch(format!("kappa = {kappa} calls for the {want} model, not {model}")));
        }
        let mut chart =
            Chart { model, q, kappa, time: MVector::zero(), axes: Vec::new(), clamp };
        match model {
            Model::Euclidean => {
                // O is lightlike with <O, Q> = -1; coordinates live on span(O, Q)^perp.
                let jq = q.flip_time();
                let o = -jq / jq.inner(&q);
                let project = |x: MVector<T>| x + o * x.inner(&q) + q * x.inner(&o);
                for k in [1, 2, 3, 4, 0] {
                    let mut x = project(MVector::basis(k));
                    for a in &chart.axes {
                        x = x - *a * x.inner(a);
                    }
                    let n = x.norm_sq();
                    if n > T::lit(1e-6) && chart.axes.len() < 3 {
                        chart.axes.push(x / n.sqrt());
                    }
                }
            }
            Model::Stereographic => chart.axes = orthonormal_complement(&q),
            Model::Poincare => {
                let b = orthonormal_complement(&q);
                chart.time = b[0];
                chart.axes = b[1..].to_vec();
            }
        }
        Ok(chart)
    }

    /// Coordinates of the point with lift `f`, and a flag when clamped.
    pub fn project(&self, f: &MVector<T>, tol: Tol<T>) -> ([T; 3], Option<Flag>) {
        let fq = f.inner(&self.q);
        let at_infinity = tol.scaled(T::lit(10.0)).small(fq, f.euclid_norm() * self.q.euclid_norm());
        let denom = if at_infinity { -T::epsilon() * f.euclid_norm() } else { -fq };
        let y = *f / denom;
        let (x, mut flag) = match self.model {
            Model::Euclidean => ([y.inner(&self.axes[0]), y.inner(&self.axes[1]), y.inner(&self.axes[2])], None),
            Model::Stereographic => {
                let r = T::one() / self.kappa.sqrt();
                let yp = y - self.q / self.kappa;
                let s: Vec<T> = self.axes.iter().map(|a| yp.inner(a)).collect();
                let d = r - s[3];
                let pole = tol.scaled(T::lit(10.0)).small(d, r);
                let d = if pole { T::epsilon() * r } else { d };
                ([r * s[0] / d, r * s[1] / d, r * s[2] / d], pole.then_some(Flag::Pole))
            }
            Model::Poincare => {
                let r = T::one() / (-self.kappa).sqrt();
                let yp = y - self.q / self.kappa;
                let y0 = -yp.inner(&self.time);
                let d = r * (r + y0.abs());
                ([yp.inner(&self.axes[0]) / d, yp.inner(&self.axes[1]) / d, yp.inner(&self.axes[2]) / d], None)
            }
        };
        if at_infinity {
            flag = Some(Flag::Infinity);
        }
        let mut x = x;
        let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if flag.is_some() && (!n.is_finite() || n > self.clamp) {
            let s = if n.is_finite() && n > T::zero() { self.clamp / n } else { T::zero() };
            x = [x[0] * s, x[1] * s, x[2] * s];
        }
        (x, flag)
    }
}

/// Counts of an OBJ export and the vertices that were clamped.
#[derive(Debug, Clone)]
pub struct ExportReport {
    pub model: Model,
    pub vertices: usize,
    pub faces: usize,
    pub flagged: Vec<(Vertex, Flag)>,
}

impl ExportReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model {}", self.model);
        let _ = writeln!(s, "vertices {}", self.vertices);
        let _ = writeln!(s, "faces {}", self.faces);
        let _ = writeln!(s, "flagged {}", self.flagged.len());
        for (v, f) in &self.flagged {
            let why = match f {
                Flag::Infinity => "infinity-boundary",
                Flag::Pole => "projection-pole",
            };
            let _ = writeln!(s, "flag {} {} {why}", v.m, v.n);
        }
        s
    }
}

/// Renders the net as OBJ text: vertices row-major, quads in grid order.
pub fn render_obj<T: Real>(net: &IsothermicNet<T>, chart: &Chart<T>, tol: Tol<T>) -> (String, ExportReport) {
    let d = net.domain();
    let mut out = String::new();
    let mut flagged = Vec::new();
    for v in d.vertices() {
        let (x, flag) = chart.project(net.lift(v), tol);
        if let Some(f) = flag {
            flagged.push((v, f));
        }
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", x[0].as_f64(), x[1].as_f64(), x[2].as_f64());
    }
    for face in d.faces() {
        let idx: Vec<usize> = face.vertices().iter().map(|v| d.index(*v).unwrap() + 1).collect();
        let _ = writeln!(out, "f {} {} {} {}", idx[0], idx[1], idx[2], idx[3]);
    }
    let report = ExportReport { model: chart.model, vertices: d.len(), faces: d.face_count(), flagged };
    (out, report)
}

/// Writes `path` and the sidecar report `path.report.txt`.
pub fn export_obj<T: Real>(
    net: &IsothermicNet<T>,
    q: MVector<T>,
    model: Model,
    clamp: T,
    path: &Path,
    tol: Tol<T>,
) -> Result<ExportReport> {
    let chart = Chart::new(q, model, clamp, tol)?;
    let (text, report) = render_obj(net, &chart, tol);
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut side = path.as_os_str().to_owned();
    side.push(".report.txt");
    std::fs::write(&side, report.render()).map_err(|e| Error::Io(e.to_string()))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmc::cylinder;
    use crate::minkowski::euclidean_lift;

    fn sample() -> (IsothermicNet<f64>, NetFile) {
        let net = cylinder(GridDomain::sized(3, 4), 0.3f64, 0.7).isothermic(Tol::default()).unwrap();
        let q = ConservedQuantity::linear(&net.lifts.map(|_, f| *f * 0.5), MVector::q_euclid());
        let file = NetFile::from_net(&net, &[q], None);
        (net, file)
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let (net, file) = sample();
        let text = file.to_json().unwrap();
        let back = NetFile::from_json(&text).unwrap();
        assert_eq!(back.to_json().unwrap(), text);
        let net2 = back.to_net::<f64>(Tol::default()).unwrap();
        for v in net.domain().vertices() {
            assert_eq!(net.lift(v), net2.lift(v));
        }
        assert_eq!(back.quantities::<f64>().unwrap().len(), 1);
    }

    #[test]
    fn malformed_input_names_the_problem() {
        let (_, mut file) = sample();
        file.a_u.pop();
        assert!(matches!(file.validate(), Err(Error::DimensionMismatch(m)) if m.contains("a_u")));
        match NetFile::from_json("{\n  \"version\": 3\n}") {
            Err(Error::Parse(m)) => assert!(m.contains("line 2"), "{m}"),
            other => panic!("{other:?}"),
        }
        let (_, mut file) = sample();
        file.version = "other/9".into();
        assert!(matches!(file.validate(), Err(Error::Parse(_))));
    }

    #[test]
    fn euclidean_chart_recovers_points() {
        let chart = Chart::<f64>::new(MVector::q_euclid(), Model::Euclidean, 1e6, Tol::default()).unwrap();
        let p = [0.4f64, -1.5, 2.0];
        let (x, flag) = chart.project(&(euclidean_lift(p) * -2.0), Tol::default());
        assert!(flag.is_none());
        // The chart is an isometry of R^3: compare distances.
        let (y, _) = chart.project(&euclidean_lift([0.0, 0.0, 0.0]), Tol::default());
        let d: f64 = (0..3).map(|k| (x[k] - y[k]).powi(2)).sum::<f64>().sqrt();
        assert!((d - (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()).abs() < 1e-12);
        assert!(matches!(Chart::new(MVector::q_euclid(), Model::Poincare, 1e6, Tol::default()), Err(Error::ModelMismatch(_))));
    }

    #[test]
    fn poincare_chart_lands_in_unit_ball() {
        let q = MVector::<f64>::basis(1);
        let chart = Chart::<f64>::new(q, Model::Poincare, 1e6, Tol::default()).unwrap();
        for p in [[0.1f64, 0.2, 0.3], [3.0, -1.0, 0.5], [-0.2, 5.0, 1.0]] {
            let f = euclidean_lift(p);
            let (x, flag) = chart.project(&f, Tol::default());
            let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            assert!(flag.is_some() || n < 1.0, "{n}");
        }
        // <F, e1> = 0: the infinity boundary.
        let (_, flag) = chart.project(&MVector::new([1.0, 0.0, 1.0, 0.0, 0.0]), Tol::default());
        assert_eq!(flag, Some(Flag::Infinity));
    }

    #[test]
    fn stereographic_chart_flags_the_pole() {
        let q = MVector::<f64>::basis(0);
        let chart = Chart::<f64>::new(q, Model::Stereographic, 1e3, Tol::default()).unwrap();
        let mut flagged = 0;
        for k in 1..5 {
            let mut f = MVector::basis(0);
            f[k] = 1.0;
            let (x, flag) = chart.project(&f, Tol::default());
            if flag == Some(Flag::Pole) {
                flagged += 1;
                assert!((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() <= 1e3 * (1.0 + 1e-12));
            }
        }
        assert_eq!(flagged, 1);
    }

    #[test]
    fn obj_has_one_line_per_vertex_and_face() {
        let (net, _) = sample();
        let chart = Chart::<f64>::new(MVector::q_euclid(), Model::Euclidean, 1e6, Tol::default()).unwrap();
        let (text, rep) = render_obj(&net, &chart, Tol::default());
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 12);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 6);
        assert_eq!((rep.vertices, rep.faces), (12, 6));
        assert!(rep.render().contains("flagged 0"));
        assert_eq!("poincare".parse::<Model>().unwrap(), Model::Poincare);
        assert!("klein".parse::<Model>().is_err());
    }
}
