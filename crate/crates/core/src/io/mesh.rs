//! OBJ and PLY geometry.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, ParseLocation, Result};
use crate::geom::Vec3;
use crate::pointcloud::{PointCloud, TriMesh};

/// Contents of a geometry file: a mesh when it declares faces, else a cloud.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Mesh(TriMesh),
    Cloud(PointCloud),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Obj,
    Ply,
}

fn format_of(path: &Path) -> Result<Format> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("obj") => Ok(Format::Obj),
        Some("ply") => Ok(Format::Ply),
        _ => Err(Error::UnsupportedFormat(path.to_path_buf())),
    }
}

struct Raw {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    has_faces: bool,
}

fn read_raw(path: &Path) -> Result<Raw> {
    let format = format_of(path)?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        Format::Obj => {
            let text = String::from_utf8_lossy(&bytes);
            parse_obj(&text, path)
        }
        Format::Ply => parse_ply(&bytes, path),
    }
}

/// Loads a triangle mesh; polygons are fan-triangulated and normals and
/// texture coordinates are ignored.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let raw = read_raw(path.as_ref())?;
    TriMesh::new(raw.vertices, raw.faces)
}

/// Loads only the vertex positions of an OBJ or PLY file.
pub fn load_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    PointCloud::new(read_raw(path.as_ref())?.vertices)
}

pub fn load_geometry(path: impl AsRef<Path>) -> Result<Geometry> {
    let raw = read_raw(path.as_ref())?;
    if raw.has_faces {
        Ok(Geometry::Mesh(TriMesh::new(raw.vertices, raw.faces)?))
    } else {
        Ok(Geometry::Cloud(PointCloud::new(raw.vertices)?))
    }
}

/// Writes an ASCII PLY holding only vertex positions. Coordinates are printed
/// in shortest round-trip form, so reading the file back is exact.
pub fn save_cloud_ply(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.len());
    out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in cloud.points() {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    write_file(path.as_ref(), out.as_bytes())
}

pub fn save_mesh_obj(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<()> {
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    write_file(path.as_ref(), out.as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn parse_error(path: &Path, location: ParseLocation, message: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        location,
        message: message.into(),
    }
}

fn fan(polygon: &[usize], faces: &mut Vec<[usize; 3]>) {
    for k in 1..polygon.len() - 1 {
        faces.push([polygon[0], polygon[k], polygon[k + 1]]);
    }
}

fn parse_obj(text: &str, path: &Path) -> Result<Raw> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut has_faces = false;
    for (i, line) in text.lines().enumerate() {
        let at = ParseLocation::Line(i + 1);
        let line = line.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| parse_error(path, at, "vertex needs 3 coordinates"))?;
                    *slot = tok
                        .parse()
                        .map_err(|_| parse_error(path, at, format!("bad coordinate {tok:?}")))?;
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                has_faces = true;
                let polygon = tokens
                    .map(|tok| {
                        let head = tok.split('/').next().unwrap_or("");
                        let k: i64 = head
                            .parse()
                            .map_err(|_| parse_error(path, at, format!("bad face index {tok:?}")))?;
                        let n = vertices.len() as i64;
                        let resolved = match k {
                            0 => None,
                            k if k > 0 => Some(k - 1),
                            k => Some(n + k).filter(|&r| r >= 0),
                        };
                        resolved
                            .map(|r| r as usize)
                            .ok_or_else(|| parse_error(path, at, format!("face index {k} out of range")))
                    })
                    .collect::<Result<Vec<usize>>>()?;
                if polygon.len() < 3 {
                    return Err(parse_error(path, at, "face needs at least 3 vertices"));
                }
                fan(&polygon, &mut faces);
            }
            _ => {}
        }
    }
    Ok(Raw {
        vertices,
        faces,
        has_faces,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn decode_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(Scalar, String),
    List(Scalar, Scalar, String),
}

impl Property {
    fn name(&self) -> &str {
        match self {
            Property::Scalar(_, n) | Property::List(_, _, n) => n,
        }
    }
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLittleEndian,
}

struct Header {
    encoding: Encoding,
    elements: Vec<Element>,
    /// Byte offset of the body.
    body: usize,
    /// Line number of the first body line.
    body_line: usize,
}

fn parse_ply_header(bytes: &[u8], path: &Path) -> Result<Header> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        line_no += 1;
        let at = ParseLocation::Line(line_no);
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| parse_error(path, at, "header ends before end_header"))?;
        let line = String::from_utf8_lossy(&bytes[pos..pos + end]);
        let line = line.trim_end_matches('\r').trim();
        pos += end + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if line_no == 1 {
            if line != "ply" {
                return Err(parse_error(path, at, "missing ply magic"));
            }
            continue;
        }
        match tokens.as_slice() {
            ["format", "ascii", _] => encoding = Some(Encoding::Ascii),
            ["format", "binary_little_endian", _] => encoding = Some(Encoding::BinaryLittleEndian),
            ["format", ..] => return Err(Error::UnsupportedFormat(path.to_path_buf())),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| parse_error(path, at, format!("bad element count {count:?}")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count_type, item_type, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_error(path, at, "property before any element"))?;
                let (Some(c), Some(i)) = (Scalar::parse(count_type), Scalar::parse(item_type)) else {
                    return Err(parse_error(path, at, "unknown list property type"));
                };
                el.properties.push(Property::List(c, i, name.to_string()));
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_error(path, at, "property before any element"))?;
                let ty = Scalar::parse(ty)
                    .ok_or_else(|| parse_error(path, at, format!("unknown property type {ty:?}")))?;
                el.properties.push(Property::Scalar(ty, name.to_string()));
            }
            ["end_header"] => break,
            _ => return Err(parse_error(path, at, format!("unrecognized header line {line:?}"))),
        }
    }
    let encoding = encoding.ok_or_else(|| parse_error(path, ParseLocation::Line(2), "missing format line"))?;
    Ok(Header {
        encoding,
        elements,
        body: pos,
        body_line: line_no + 1,
    })
}

/// Reads values of one element instance, whether ASCII or binary.
trait Body {
    fn scalar(&mut self, ty: Scalar) -> Result<f64>;
    /// Called after each element instance.
    fn end_record(&mut self) -> Result<()>;
    fn location(&self) -> ParseLocation;
}

struct AsciiBody<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    first_line: usize,
    current: Vec<&'a str>,
    cursor: usize,
    line: usize,
    path: &'a Path,
}

impl Body for AsciiBody<'_> {
    fn scalar(&mut self, _ty: Scalar) -> Result<f64> {
        while self.cursor >= self.current.len() {
            if !self.current.is_empty() {
                return Err(parse_error(self.path, self.location(), "too few values on line"));
            }
            let (i, line) = self
                .lines
                .next()
                .ok_or_else(|| parse_error(self.path, ParseLocation::Line(self.line + 1), "unexpected end of data"))?;
            self.line = self.first_line + i;
            self.current = line.split_whitespace().collect();
            self.cursor = 0;
        }
        let tok = self.current[self.cursor];
        self.cursor += 1;
        tok.parse()
            .map_err(|_| parse_error(self.path, self.location(), format!("bad value {tok:?}")))
    }

    fn end_record(&mut self) -> Result<()> {
        if self.cursor < self.current.len() {
            return Err(parse_error(self.path, self.location(), "too many values on line"));
        }
        self.current.clear();
        self.cursor = 0;
        Ok(())
    }

    fn location(&self) -> ParseLocation {
        ParseLocation::Line(self.line)
    }
}

struct BinaryBody<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl Body for BinaryBody<'_> {
    fn scalar(&mut self, ty: Scalar) -> Result<f64> {
        let n = ty.size();
        if self.pos + n > self.bytes.len() {
            return Err(parse_error(
                self.path,
                ParseLocation::Byte(self.pos),
                format!("truncated data: need {n} bytes, {} left", self.bytes.len() - self.pos),
            ));
        }
        let v = ty.decode_le(&self.bytes[self.pos..self.pos + n]);
        self.pos += n;
        Ok(v)
    }

    fn end_record(&mut self) -> Result<()> {
        Ok(())
    }

    fn location(&self) -> ParseLocation {
        ParseLocation::Byte(self.pos)
    }
}

fn parse_ply(bytes: &[u8], path: &Path) -> Result<Raw> {
    let header = parse_ply_header(bytes, path)?;
    match header.encoding {
        Encoding::Ascii => {
            let text = std::str::from_utf8(&bytes[header.body..])
                .map_err(|e| parse_error(path, ParseLocation::Byte(header.body + e.valid_up_to()), "invalid UTF-8"))?;
            let mut body = AsciiBody {
                lines: text.lines().enumerate(),
                first_line: header.body_line,
                current: Vec::new(),
                cursor: 0,
                line: header.body_line,
                path,
            };
            read_elements(&header.elements, &mut body, path)
        }
        Encoding::BinaryLittleEndian => {
            let mut body = BinaryBody {
                bytes,
                pos: header.body,
                path,
            };
            read_elements(&header.elements, &mut body, path)
        }
    }
}

fn read_elements(elements: &[Element], body: &mut dyn Body, path: &Path) -> Result<Raw> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut has_faces = false;
    for el in elements {
        let is_vertex = el.name == "vertex";
        let is_face = el.name == "face";
        let xyz: Vec<Option<usize>> = ["x", "y", "z"]
            .iter()
            .map(|n| el.properties.iter().position(|p| p.name() == *n))
            .collect();
        if is_vertex && xyz.iter().any(Option::is_none) {
            return Err(parse_error(path, body.location(), "vertex element lacks x, y or z"));
        }
        if is_face && el.count > 0 {
            has_faces = true;
        }
        for _ in 0..el.count {
            let mut values = [0.0; 3];
            for (pi, prop) in el.properties.iter().enumerate() {
                match prop {
                    Property::Scalar(ty, _) => {
                        let v = body.scalar(*ty)?;
                        if is_vertex {
                            if let Some(axis) = xyz.iter().position(|&k| k == Some(pi)) {
                                values[axis] = v;
                            }
                        }
                    }
                    Property::List(count_ty, item_ty, name) => {
                        let count = body.scalar(*count_ty)?;
                        if !(count >= 0.0 && count.fract() == 0.0) {
                            return Err(parse_error(path, body.location(), "bad list length"));
                        }
                        let mut items = Vec::with_capacity(count as usize);
                        for _ in 0..count as usize {
                            items.push(body.scalar(*item_ty)?);
                        }
                        if is_face && (name == "vertex_indices" || name == "vertex_index") {
                            if items.len() < 3 {
                                return Err(parse_error(path, body.location(), "face needs at least 3 vertices"));
                            }
                            if let Some(bad) = items.iter().find(|v| !(**v >= 0.0 && v.fract() == 0.0)) {
                                return Err(parse_error(path, body.location(), format!("bad vertex index {bad}")));
                            }
                            let polygon: Vec<usize> = items.iter().map(|v| *v as usize).collect();
                            fan(&polygon, &mut faces);
                        }
                    }
                }
            }
            body.end_record()?;
            if is_vertex {
                vertices.push(Vec3::new(values[0], values[1], values[2]));
            }
        }
    }
    Ok(Raw {
        vertices,
        faces,
        has_faces,
    })
}
