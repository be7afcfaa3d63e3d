//! Binary containers: one ASCII header line of `key=value` pairs, then
//! little-endian payload. Readers reject short or trailing bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qdiff_core::reference::TriMesh;
use qdiff_core::{CMatrix, GridField, HarmonicCoefficients, LaplacianEigenbasis, SpinBasis, UnitVector3};

use crate::error::{CliError, CliResult};

pub const QMAT: &str = "qmat-v1";
pub const QCOEF: &str = "qcoef-v1";
pub const QGRID: &str = "qgrid-v1";
pub const QMESH: &str = "qmesh-v1";
pub const QEIG: &str = "qeig-v1";

fn format_error(message: impl Into<String>) -> CliError {
    CliError::runtime("format", message)
}

/// Parsed header plus the payload that follows it.
#[derive(Debug)]
pub struct Container {
    pub header: BTreeMap<String, String>,
    pub payload: Vec<u8>,
}

impl Container {
    pub fn format(&self) -> &str {
        self.header.get("format").map(String::as_str).unwrap_or("")
    }

    pub fn field(&self, key: &str) -> CliResult<&str> {
        self.header.get(key).map(String::as_str).ok_or_else(|| format_error(format!("header lacks `{key}`")))
    }

    pub fn usize_field(&self, key: &str) -> CliResult<usize> {
        let v = self.field(key)?;
        v.parse().map_err(|_| format_error(format!("header `{key}={v}` is not a count")))
    }

    fn expect(&self, key: &str, value: &str) -> CliResult<()> {
        let v = self.field(key)?;
        if v != value {
            return Err(format_error(format!("header `{key}={v}`, expected `{value}`")));
        }
        Ok(())
    }

    fn expect_format(&self, format: &str) -> CliResult<()> {
        self.expect("format", format)
    }

    fn expect_len(&self, bytes: usize) -> CliResult<()> {
        if self.payload.len() != bytes {
            return Err(format_error(format!(
                "{} payload has {} bytes, expected {bytes}",
                self.format(),
                self.payload.len()
            )));
        }
        Ok(())
    }
}

pub fn parse(bytes: &[u8]) -> CliResult<Container> {
    let end = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| format_error("missing header line"))?;
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| format_error("header is not text"))?;
    let mut header = BTreeMap::new();
    for pair in text.split_whitespace() {
        let (k, v) =
            pair.split_once('=').ok_or_else(|| format_error(format!("header token `{pair}` is not key=value")))?;
        header.insert(k.to_string(), v.to_string());
    }
    if !header.contains_key("format") {
        return Err(format_error("header lacks `format`"));
    }
    Ok(Container { header, payload: bytes[end + 1..].to_vec() })
}

pub fn read(path: &Path) -> CliResult<Container> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse(&bytes).map_err(|e| CliError::runtime(&e.code, format!("{}: {}", path.display(), e.message)))
}

pub fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn f64s(bytes: &[u8]) -> impl Iterator<Item = f64> + '_ {
    bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
}

fn complexes(bytes: &[u8]) -> Vec<Complex64> {
    let v: Vec<f64> = f64s(bytes).collect();
    v.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

pub fn encode_matrix(m: &CMatrix) -> CliResult<Vec<u8>> {
    if m.nrows() != m.ncols() {
        return Err(format_error(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    let mut out = format!("format={QMAT} n={n} layout=row-major precision=binary64\n").into_bytes();
    for i in 0..n {
        for j in 0..n {
            put_f64(&mut out, m[(i, j)].re);
            put_f64(&mut out, m[(i, j)].im);
        }
    }
    Ok(out)
}

pub fn decode_matrix(c: &Container) -> CliResult<CMatrix> {
    c.expect_format(QMAT)?;
    c.expect("layout", "row-major")?;
    c.expect("precision", "binary64")?;
    let n = c.usize_field("n")?;
    c.expect_len(n * n * 16)?;
    let values = complexes(&c.payload);
    Ok(CMatrix::from_row_slice(n, n, &values))
}

pub fn encode_coefficients(a: &HarmonicCoefficients) -> Vec<u8> {
    let mut out = format!("format={QCOEF} lmax={} order=l-major-m-fastest precision=binary64\n", a.lmax()).into_bytes();
    for z in a.packed() {
        put_f64(&mut out, z.re);
        put_f64(&mut out, z.im);
    }
    out
}

pub fn decode_coefficients(c: &Container) -> CliResult<HarmonicCoefficients> {
    c.expect_format(QCOEF)?;
    c.expect("order", "l-major-m-fastest")?;
    c.expect("precision", "binary64")?;
    let lmax = c.usize_field("lmax")?;
    c.expect_len((lmax + 1) * (lmax + 1) * 16)?;
    Ok(HarmonicCoefficients::from_packed(lmax, complexes(&c.payload))?)
}

pub fn encode_grid(g: &GridField) -> Vec<u8> {
    let mut out = format!("format={QGRID} nlat={} nlon={} precision=binary64\n", g.nlat(), g.nlon()).into_bytes();
    for &t in g.colatitudes() {
        put_f64(&mut out, t);
    }
    for p in g.longitudes() {
        put_f64(&mut out, p);
    }
    for z in g.values() {
        put_f64(&mut out, z.re);
        put_f64(&mut out, z.im);
    }
    out
}

/// Only the Gauss–Legendre node layout produced by [`encode_grid`] is accepted.
pub fn decode_grid(c: &Container) -> CliResult<GridField> {
    c.expect_format(QGRID)?;
    c.expect("precision", "binary64")?;
    let nlat = c.usize_field("nlat")?;
    let nlon = c.usize_field("nlon")?;
    c.expect_len((nlat + nlon) * 8 + nlat * nlon * 16)?;
    let grid = GridField::zeros(nlat, nlon)?;
    let nodes: Vec<f64> = f64s(&c.payload[..(nlat + nlon) * 8]).collect();
    let expected = grid.colatitudes().iter().copied().chain(grid.longitudes());
    for (got, want) in nodes.iter().zip(expected) {
        if (got - want).abs() > 1e-12 {
            return Err(format_error(format!("grid node {got} does not match the quadrature node {want}")));
        }
    }
    Ok(grid.with_values(complexes(&c.payload[(nlat + nlon) * 8..]))?)
}

pub fn encode_mesh(mesh: &TriMesh) -> CliResult<Vec<u8>> {
    mesh.validate()?;
    let scalars = mesh.face_scalars.as_ref();
    let mut out = format!(
        "format={QMESH} vertices={} faces={} scalars={} precision=binary64 index=u32\n",
        mesh.vertices.len(),
        mesh.faces.len(),
        u8::from(scalars.is_some())
    )
    .into_bytes();
    for v in &mesh.vertices {
        for x in v.to_array() {
            put_f64(&mut out, x);
        }
    }
    for f in &mesh.faces {
        for &i in f {
            let i = u32::try_from(i).map_err(|_| format_error(format!("vertex index {i} exceeds u32")))?;
            out.extend_from_slice(&i.to_le_bytes());
        }
    }
    for &s in scalars.into_iter().flatten() {
        put_f64(&mut out, s);
    }
    Ok(out)
}

pub fn decode_mesh(c: &Container) -> CliResult<TriMesh> {
    c.expect_format(QMESH)?;
    c.expect("precision", "binary64")?;
    c.expect("index", "u32")?;
    let nv = c.usize_field("vertices")?;
    let nf = c.usize_field("faces")?;
    let has_scalars = match c.field("scalars")? {
        "0" => false,
        "1" => true,
        other => return Err(format_error(format!("header `scalars={other}` must be 0 or 1"))),
    };
    let vbytes = nv * 24;
    let fbytes = nf * 12;
    c.expect_len(vbytes + fbytes + if has_scalars { nf * 8 } else { 0 })?;
    let coords: Vec<f64> = f64s(&c.payload[..vbytes]).collect();
    // Stored bits are kept; `validate` checks they lie on the sphere.
    let vertices = coords.chunks_exact(3).map(|p| UnitVector3 { x: p[0], y: p[1], z: p[2] }).collect();
    let idx: Vec<usize> = c.payload[vbytes..vbytes + fbytes]
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes(b.try_into().expect("chunk of 4")) as usize)
        .collect();
    let faces = idx.chunks_exact(3).map(|f| [f[0], f[1], f[2]]).collect();
    let face_scalars = has_scalars.then(|| f64s(&c.payload[vbytes + fbytes..]).collect());
    let mesh = TriMesh { vertices, faces, face_scalars };
    mesh.validate()?;
    Ok(mesh)
}

/// Band eigenvector matrices, each `(N−m)²` values column-major.
pub fn encode_eigenbasis(eig: &LaplacianEigenbasis) -> Vec<u8> {
    let n = eig.n();
    let mut out = format!("format={QEIG} n={n} layout=band-column-major precision=binary64\n").into_bytes();
    for m in 0..n {
        for &v in eig.band(m).as_slice() {
            put_f64(&mut out, v);
        }
    }
    out
}

/// Rebuilds and revalidates a cached eigenbasis for `basis`.
pub fn decode_eigenbasis(c: &Container, basis: &SpinBasis) -> CliResult<LaplacianEigenbasis> {
    c.expect_format(QEIG)?;
    c.expect("layout", "band-column-major")?;
    c.expect("precision", "binary64")?;
    let n = c.usize_field("n")?;
    if n != basis.n() {
        return Err(CliError::runtime("cache", format!("eigenbasis cache is for N={n}, run uses N={}", basis.n())));
    }
    let total: usize = (1..=n).map(|k| k * k).sum();
    c.expect_len(total * 8)?;
    let values: Vec<f64> = f64s(&c.payload).collect();
    let mut bands = Vec::with_capacity(n);
    let mut at = 0;
    for m in 0..n {
        let len = n - m;
        bands.push(DMatrix::from_column_slice(len, len, &values[at..at + len * len]));
        at += len * len;
    }
    Ok(LaplacianEigenbasis::from_bands(basis, bands)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qdiff_core::reference::icosasphere;
    use qdiff_core::{build_eigenbasis, build_spin_basis};

    fn sample(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| Complex64::new(i as f64 - 0.25 * j as f64, (i * j) as f64 / 7.0))
    }

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let m = sample(5);
        let bytes = encode_matrix(&m).unwrap();
        assert!(bytes.starts_with(b"format=qmat-v1 n=5 layout=row-major precision=binary64\n"));
        assert_eq!(decode_matrix(&parse(&bytes).unwrap()).unwrap(), m);
    }

    #[test]
    fn matrix_payload_is_row_major_interleaved() {
        let m = sample(3);
        let bytes = encode_matrix(&m).unwrap();
        let c = parse(&bytes).unwrap();
        let v: Vec<f64> = f64s(&c.payload).collect();
        assert_eq!((v[2], v[3]), (m[(0, 1)].re, m[(0, 1)].im));
    }

    #[test]
    fn truncated_and_foreign_payloads_are_rejected() {
        let mut bytes = encode_matrix(&sample(3)).unwrap();
        bytes.pop();
        assert_eq!(decode_matrix(&parse(&bytes).unwrap()).unwrap_err().code, "format");
        let coef = encode_coefficients(&HarmonicCoefficients::zeros(2));
        assert!(decode_matrix(&parse(&coef).unwrap()).is_err());
        assert!(parse(b"no newline").is_err());
        assert!(parse(b"garbage\n").is_err());
    }

    #[test]
    fn coefficient_and_grid_round_trips() {
        let mut a = HarmonicCoefficients::zeros(3);
        a.set(2, -1, Complex64::new(0.5, -1.5)).unwrap();
        a.set(3, 3, Complex64::new(2.0, 0.0)).unwrap();
        let back = decode_coefficients(&parse(&encode_coefficients(&a)).unwrap()).unwrap();
        assert_eq!(back, a);

        let g = GridField::from_fn(4, 8, |p| Complex64::new(p.z, p.x)).unwrap();
        let back = decode_grid(&parse(&encode_grid(&g)).unwrap()).unwrap();
        assert_eq!(back.values(), g.values());
    }

    #[test]
    fn mesh_round_trip_keeps_scalars() {
        let mut mesh = icosasphere(1).unwrap();
        mesh.face_scalars = Some((0..mesh.faces.len()).map(|i| i as f64 * 0.5).collect());
        let back = decode_mesh(&parse(&encode_mesh(&mesh).unwrap()).unwrap()).unwrap();
        assert_eq!(back, mesh);
        mesh.face_scalars = None;
        let back = decode_mesh(&parse(&encode_mesh(&mesh).unwrap()).unwrap()).unwrap();
        assert_eq!(back.face_scalars, None);
    }

    #[test]
    fn eigenbasis_cache_round_trip_and_mismatch() {
        let basis = build_spin_basis(6).unwrap();
        let eig = build_eigenbasis(&basis).unwrap();
        let bytes = encode_eigenbasis(&eig);
        let back = decode_eigenbasis(&parse(&bytes).unwrap(), &basis).unwrap();
        for m in 0..6 {
            assert_eq!(back.band(m), eig.band(m));
        }
        let other = build_spin_basis(5).unwrap();
        assert_eq!(decode_eigenbasis(&parse(&bytes).unwrap(), &other).unwrap_err().code, "cache");
    }
}
