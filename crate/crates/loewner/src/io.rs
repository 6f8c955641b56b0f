//! JSON formats for sampled functions, realizations, measures and reports.
//!
//! Output is canonical: object keys sorted, floats printed with 17
//! significant digits, so `write(load(write(x)))` reproduces `write(x)`
//! byte for byte. Schema errors carry the JSON pointer of the offending
//! value.

use std::fmt::Write as _;
use std::path::Path;

use loewner_core::cert::{Node, SampledFunction};
use loewner_core::linalg::{GradedSpace, Hermitian};
use loewner_core::realization::cauchy::CauchyRealization;
use loewner_core::realization::measure::{Atom, DiscreteMeasure, Support};
use loewner_core::realization::selfadjoint::SelfAdjointRealization;
use loewner_core::realization::transfer::TransferRealization;
use loewner_core::{c64, CMatrix, C64};
use serde_json::{json, Map, Value};

/// Tolerance for the unitarity and contraction checks on loaded transfer
/// realizations.
pub const LOAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("schema error at '{pointer}': {message}")]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Core(#[from] loewner_core::Error),
}

pub type Result<T> = std::result::Result<T, IoError>;

/// Canonical text of a JSON value, newline terminated.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

/// Arrays of scalars, and arrays of such arrays, stay on one line.
fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| is_scalar(x) || matches!(x, Value::Array(b) if b.iter().all(is_scalar))),
        _ => true,
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) if !n.is_f64() => write!(out, "{u}").unwrap(),
            (_, Some(i)) if !n.is_f64() => write!(out, "{i}").unwrap(),
            _ => out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) if is_flat(v) => {
            out.push('[');
            for (k, x) in a.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(out, x, indent);
            }
            out.push(']');
        }
        Value::Array(a) => {
            out.push_str("[\n");
            for (k, x) in a.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if k + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(out, &m[*key], indent + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        // Keeps the sign of negative zero out of the output.
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

/// A float as JSON; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn complex_json(z: C64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn complex_vec_json(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

pub fn matrix_json(m: &CMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| complex_vec_json(m.row(i))).collect())
}

pub fn real_vec_json(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn write_file(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, to_canonical_string(v)).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn parse(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

/// A JSON value together with its pointer from the document root.
#[derive(Clone)]
pub struct Cursor<'a> {
    value: &'a Value,
    pointer: String,
}

impl<'a> Cursor<'a> {
    pub fn root(value: &'a Value) -> Self {
        Cursor { value, pointer: String::new() }
    }

    pub fn value(&self) -> &'a Value {
        self.value
    }

    pub fn pointer(&self) -> &str {
        &self.pointer
    }

    pub fn error(&self, message: impl Into<String>) -> IoError {
        IoError::Schema(SchemaError { pointer: self.pointer.clone(), message: message.into() })
    }

    fn child_pointer(&self, key: &str) -> String {
        format!("{}/{}", self.pointer, key.replace('~', "~0").replace('/', "~1"))
    }

    fn object(&self) -> Result<&'a Map<String, Value>> {
        self.value.as_object().ok_or_else(|| self.error("expected an object"))
    }

    pub fn field(&self, key: &str) -> Result<Cursor<'a>> {
        let pointer = self.child_pointer(key);
        match self.object()?.get(key) {
            Some(value) => Ok(Cursor { value, pointer }),
            None => Err(IoError::Schema(SchemaError { pointer, message: "missing field".into() })),
        }
    }

    pub fn opt_field(&self, key: &str) -> Result<Option<Cursor<'a>>> {
        let pointer = self.child_pointer(key);
        Ok(self.object()?.get(key).map(|value| Cursor { value, pointer }))
    }

    /// Maps every element of an array.
    pub fn items<T>(&self, mut f: impl FnMut(Cursor<'a>) -> Result<T>) -> Result<Vec<T>> {
        let arr = self.value.as_array().ok_or_else(|| self.error("expected an array"))?;
        arr.iter()
            .enumerate()
            .map(|(i, value)| f(Cursor { value, pointer: format!("{}/{}", self.pointer, i) }))
            .collect()
    }

    pub fn f64(&self) -> Result<f64> {
        self.value.as_f64().ok_or_else(|| self.error("expected a number"))
    }

    pub fn usize(&self) -> Result<usize> {
        self.value
            .as_u64()
            .and_then(|u| usize::try_from(u).ok())
            .ok_or_else(|| self.error("expected a non-negative integer"))
    }

    pub fn bool(&self) -> Result<bool> {
        self.value.as_bool().ok_or_else(|| self.error("expected a boolean"))
    }

    pub fn str(&self) -> Result<&'a str> {
        self.value.as_str().ok_or_else(|| self.error("expected a string"))
    }

    /// `[re, im]`.
    pub fn complex(&self) -> Result<C64> {
        let parts = self.items(|n| n.f64())?;
        match parts.as_slice() {
            [re, im] => Ok(c64(*re, *im)),
            _ => Err(self.error(format!("expected [re, im], got {} entries", parts.len()))),
        }
    }

    pub fn complex_vec(&self) -> Result<Vec<C64>> {
        self.items(|n| n.complex())
    }

    pub fn real_vec(&self) -> Result<Vec<f64>> {
        self.items(|n| n.f64())
    }

    /// Rows of `[re, im]` entries.
    pub fn complex_matrix(&self) -> Result<CMatrix> {
        let rows = self.items(|n| n.complex_vec())?;
        let cols = rows.first().map_or(0, |r| r.len());
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(self.error(format!("row {i} has a different length")));
        }
        Ok(CMatrix::from_vec(rows.len(), cols, rows.concat())?)
    }

    pub fn hermitian(&self) -> Result<Hermitian> {
        let m = self.complex_matrix()?;
        if m.rows() != m.cols() {
            return Err(self.error("expected a square matrix"));
        }
        Hermitian::new(m).map_err(|e| self.error(e.to_string()))
    }

    pub fn grading(&self) -> Result<GradedSpace> {
        let dims = self.items(|n| n.usize())?;
        GradedSpace::new(dims).map_err(|e| self.error(e.to_string()))
    }
}

pub fn load_sampled_function(v: &Value) -> Result<SampledFunction> {
    let root = Cursor::root(v);
    let d = root.field("d")?.usize()?;
    let nodes = root.field("nodes")?.items(|node| {
        let x = node.field("x")?.real_vec()?;
        let f = node.field("f")?.f64()?;
        let grad = node.field("grad")?.real_vec()?;
        if x.len() != d {
            return Err(node.error(format!("x has {} coordinates, expected {d}", x.len())));
        }
        if grad.len() != d {
            return Err(node.error(format!("grad has {} entries, expected {d}", grad.len())));
        }
        Ok(Node { x, f, grad })
    })?;
    SampledFunction::new(d, nodes).map_err(|e| root.error(e.to_string()))
}

pub fn sampled_function_json(sf: &SampledFunction) -> Value {
    json!({
        "d": sf.d(),
        "nodes": sf.nodes().iter().map(|n| json!({
            "x": real_vec_json(&n.x),
            "f": num(n.f),
            "grad": real_vec_json(&n.grad),
        })).collect::<Vec<_>>(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Realization {
    Transfer(TransferRealization),
    SelfAdjoint(SelfAdjointRealization),
    Cauchy(CauchyRealization),
}

impl Realization {
    pub fn kind(&self) -> &'static str {
        match self {
            Realization::Transfer(_) => "transfer",
            Realization::SelfAdjoint(_) => "selfadjoint",
            Realization::Cauchy(_) => "cauchy",
        }
    }

    pub fn grading(&self) -> &GradedSpace {
        match self {
            Realization::Transfer(t) => t.grading(),
            Realization::SelfAdjoint(s) => &s.grading,
            Realization::Cauchy(c) => &c.grading,
        }
    }
}

pub fn load_realization(v: &Value) -> Result<Realization> {
    let root = Cursor::root(v);
    let kind_node = root.field("kind")?;
    let kind = kind_node.str()?;
    let grading = root.field("grading")?.grading()?;
    let m = grading.total();
    let sized = |n: Cursor<'_>, want: usize| -> Result<Vec<C64>> {
        let v = n.complex_vec()?;
        if v.len() != want {
            return Err(n.error(format!("expected {want} entries, got {}", v.len())));
        }
        Ok(v)
    };
    let square = |n: &Cursor<'_>| -> Result<CMatrix> {
        let a = n.complex_matrix()?;
        if a.rows() != m || a.cols() != m {
            return Err(n.error(format!("expected a {m}x{m} matrix, got {}x{}", a.rows(), a.cols())));
        }
        Ok(a)
    };
    let herm = |n: Cursor<'_>| -> Result<Hermitian> {
        square(&n)?;
        n.hermitian()
    };
    match kind {
        "transfer" => {
            let a = root.field("a")?.complex()?;
            let beta = sized(root.field("beta")?, m)?;
            let gamma = sized(root.field("gamma")?, m)?;
            let d = square(&root.field("D")?)?;
            let unitary = root.opt_field("unitary_flag")?.map(|n| n.bool()).transpose()?.unwrap_or(false);
            TransferRealization::new(a, beta, gamma, d, grading, unitary, LOAD_TOL)
                .map(Realization::Transfer)
                .map_err(|e| root.error(e.to_string()))
        }
        "selfadjoint" => {
            let c = root.field("c")?.f64()?;
            let x = herm(root.field("X")?)?;
            let v = sized(root.field("v")?, m)?;
            let z0 = sized(root.field("z0")?, grading.d())?;
            let t = root.field("t")?.f64()?;
            SelfAdjointRealization::new(c, x, v, z0, grading, t)
                .map(Realization::SelfAdjoint)
                .map_err(|e| root.error(e.to_string()))
        }
        "cauchy" => {
            let c = root.field("C")?.f64()?;
            let x = herm(root.field("X")?)?;
            let v1 = sized(root.field("v1")?, m)?;
            CauchyRealization::new(c, x, v1, grading).map(Realization::Cauchy).map_err(|e| root.error(e.to_string()))
        }
        other => Err(kind_node.error(format!("unknown kind '{other}'"))),
    }
}

pub fn realization_json(r: &Realization) -> Value {
    let grading = json!(r.grading().dims());
    match r {
        Realization::Transfer(t) => json!({
            "kind": "transfer",
            "grading": grading,
            "a": complex_json(t.a()),
            "beta": complex_vec_json(t.beta()),
            "gamma": complex_vec_json(t.gamma()),
            "D": matrix_json(t.d_matrix()),
            "unitary_flag": t.unitary_flag(),
        }),
        Realization::SelfAdjoint(s) => json!({
            "kind": "selfadjoint",
            "grading": grading,
            "c": num(s.c),
            "X": matrix_json(s.x.matrix()),
            "v": complex_vec_json(&s.v),
            "z0": complex_vec_json(&s.z0),
            "t": num(s.t),
        }),
        Realization::Cauchy(c) => json!({
            "kind": "cauchy",
            "grading": grading,
            "C": num(c.c),
            "X": matrix_json(c.x.matrix()),
            "v1": complex_vec_json(&c.v1),
        }),
    }
}

pub fn load_measure(v: &Value) -> Result<DiscreteMeasure> {
    let root = Cursor::root(v);
    let support_node = root.field("support")?;
    let support = match support_node.str()? {
        "line" => Support::Line,
        "circle" => Support::Circle,
        other => return Err(support_node.error(format!("unknown support '{other}'"))),
    };
    let key = match support {
        Support::Line => "loc",
        Support::Circle => "theta",
    };
    let atoms = root.field("atoms")?.items(|a| {
        let location = a.field(key)?.f64()?;
        let mass_node = a.field("mass")?;
        let mass = mass_node.f64()?;
        if !(mass > 0.0) {
            return Err(mass_node.error("mass must be positive"));
        }
        Ok(Atom { location, mass })
    })?;
    DiscreteMeasure::new(support, atoms).map_err(|e| root.error(e.to_string()))
}

pub fn measure_json(mu: &DiscreteMeasure) -> Value {
    let (support, key) = match mu.support() {
        Support::Line => ("line", "loc"),
        Support::Circle => ("circle", "theta"),
    };
    let atoms: Vec<Value> = mu
        .atoms()
        .iter()
        .map(|a| {
            let mut m = Map::new();
            m.insert(key.into(), num(a.location));
            m.insert("mass".into(), num(a.mass));
            Value::Object(m)
        })
        .collect();
    json!({ "support": support, "atoms": atoms })
}
