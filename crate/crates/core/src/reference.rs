//! The analytic example `v(x, y, z) = (y − xz, −x − yz, 1 − z²)`, its exact
//! flow, an RK4 oracle, and icosahedral meshes transported by the flow.
//!
//! `v = X_{−z} + ∇z`: a clockwise rotation about `ẑ` plus a gradient flow from
//! the south pole (a repeller) to the north pole (an attractor).

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::harmonics::HarmonicCoefficients;
use crate::linalg::I;
use crate::spin::{cross, UnitVector3};

/// `α = √(4π/3)`, so that `α Y_{1,0} = z`.
pub fn alpha() -> f64 {
    (4.0 * PI / 3.0).sqrt()
}

/// `v(p) = (y − xz, −x − yz, 1 − z²)`.
pub fn example_field(p: UnitVector3) -> [f64; 3] {
    [p.y - p.x * p.z, -p.x - p.y * p.z, 1.0 - p.z * p.z]
}

/// Classical field of a complex generator: `X_{Re ψ} + ∇ Im ψ`, where
/// `X_f = ∇f × n` generates positive rotation about `ẑ` for `f = z`.
pub fn generator_field(psi: &HarmonicCoefficients, p: UnitVector3) -> [f64; 3] {
    // u_ψ = r × ∇ψ = i L ψ; real and imaginary parts belong to Re ψ and Im ψ.
    let l = psi.angular_momentum();
    let u: Vec<Complex64> = l.iter().map(|lk| lk.evaluate(p) * I).collect();
    let ure = [u[0].re, u[1].re, u[2].re];
    let uim = [u[0].im, u[1].im, u[2].im];
    let grad_im = cross(uim, p.to_array());
    [grad_im[0] - ure[0], grad_im[1] - ure[1], grad_im[2] - ure[2]]
}

fn y10_generator(re: f64, im: f64) -> HarmonicCoefficients {
    HarmonicCoefficients::single(1, 1, 0, Complex64::new(re * alpha(), im * alpha())).expect("valid index")
}

/// `ψ = −αY_{1,0} + iαY_{1,0}`, whose field is exactly [`example_field`].
pub fn example_generator() -> HarmonicCoefficients {
    y10_generator(-1.0, 1.0)
}

/// `ψ = −αY_{1,0} − iαY_{1,0}`. Its gradient part points toward the south pole,
/// opposite to [`example_field`].
pub fn conjugate_generator() -> HarmonicCoefficients {
    y10_generator(-1.0, -1.0)
}

/// Integration constants of the closed-form flow through `y0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `C = (1 − z0)/(1 + z0)`, `A = x0(1 + C)`, `B = y0(1 + C)`.
pub fn flow_constants(y0: UnitVector3) -> Result<FlowConstants> {
    let rho2 = y0.x * y0.x + y0.y * y0.y;
    // 1 + z0 = ρ²/(1 − z0) avoids cancellation near the south pole.
    let one_plus_z = if y0.z < 0.0 { rho2 / (1.0 - y0.z) } else { 1.0 + y0.z };
    if one_plus_z <= 0.0 {
        return Err(Error::FixedPoint);
    }
    let c = (1.0 - y0.z) / one_plus_z;
    Ok(FlowConstants { a: y0.x * (1.0 + c), b: y0.y * (1.0 + c), c })
}

/// Closed-form flow `Φ_{y0}(t)` of [`example_field`].
pub fn exact_flow(y0: UnitVector3, t: f64) -> Result<UnitVector3> {
    let k = flow_constants(y0)?;
    let (s, co) = t.sin_cos();
    let rx = k.a * co + k.b * s;
    let ry = -k.a * s + k.b * co;
    // Divide through by e^{2t} or 1 so that nothing overflows for large |t|.
    let (x, y, z) = if t >= 0.0 {
        let em = (-t).exp();
        let d = k.c * em * em + 1.0;
        (rx * em / d, ry * em / d, (1.0 - k.c * em * em) / d)
    } else {
        let ep = t.exp();
        let d = k.c + ep * ep;
        (rx * ep / d, ry * ep / d, (ep * ep - k.c) / d)
    };
    Ok(UnitVector3 { x, y, z })
}

/// RK4 on `ẏ = v(y)`, projected back to the sphere after every step.
pub fn rk4_flow(y0: UnitVector3, t: f64, h: f64) -> Result<UnitVector3> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    let steps = (t.abs() / h - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(y0);
    }
    let dt = t / steps as f64;
    let f = |p: [f64; 3]| example_field(UnitVector3 { x: p[0], y: p[1], z: p[2] });
    let add = |p: [f64; 3], k: [f64; 3], s: f64| [p[0] + s * k[0], p[1] + s * k[1], p[2] + s * k[2]];
    let mut p = y0.to_array();
    for _ in 0..steps {
        let k1 = f(p);
        let k2 = f(add(p, k1, dt / 2.0));
        let k3 = f(add(p, k2, dt / 2.0));
        let k4 = f(add(p, k3, dt));
        for i in 0..3 {
            p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        p = UnitVector3::from_array(p)?.to_array();
    }
    UnitVector3::from_array(p)
}

/// Triangulated sphere with optional per-face scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<UnitVector3>,
    pub faces: Vec<[usize; 3]>,
    pub face_scalars: Option<Vec<f64>>,
}

impl TriMesh {
    pub fn edge_count(&self) -> usize {
        let mut edges = std::collections::HashSet::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.faces.len() as i64
    }

    /// Normalized mean of the face's vertices.
    pub fn face_centroid(&self, face: usize) -> UnitVector3 {
        let f = self.faces[face];
        let mut s = [0.0; 3];
        for &v in &f {
            let p = self.vertices[v].to_array();
            for k in 0..3 {
                s[k] += p[k];
            }
        }
        UnitVector3::from_array(s).unwrap_or(self.vertices[f[0]])
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let f = self.faces[face];
        spherical_triangle_area(self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Checks unit vertices and valid face indices.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if (v.dot(*v) - 1.0).abs() > 1e-12 {
                return Err(Error::Format(format!("vertex {i} is not on the unit sphere")));
            }
        }
        for (i, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&k| k >= self.vertices.len()) {
                return Err(Error::Format(format!("face {i} references a missing vertex")));
            }
        }
        if let Some(s) = &self.face_scalars {
            if s.len() != self.faces.len() {
                return Err(Error::Format("face scalar count differs from face count".into()));
            }
        }
        Ok(())
    }
}

/// Area of a spherical triangle by l'Huilier's formula.
pub fn spherical_triangle_area(a: UnitVector3, b: UnitVector3, c: UnitVector3) -> f64 {
    let ea = b.angle_to(c);
    let eb = a.angle_to(c);
    let ec = a.angle_to(b);
    let s = 0.5 * (ea + eb + ec);
    let prod = (s / 2.0).tan() * ((s - ea) / 2.0).tan() * ((s - eb) / 2.0).tan() * ((s - ec) / 2.0).tan();
    4.0 * prod.max(0.0).sqrt().atan()
}

/// Icosahedron refined `refinements` times by edge midpoints projected to the sphere.
pub fn icosasphere(refinements: u32) -> Result<TriMesh> {
    if refinements > 8 {
        return Err(Error::InvalidArgument(format!("refinements {refinements} exceeds the limit of 8")));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut vertices: Vec<UnitVector3> = raw.iter().map(|p| UnitVector3::from_array(*p).expect("nonzero")).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..refinements {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<UnitVector3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(UnitVector3::new(p.x + q.x, p.y + q.y, p.z + q.z).expect("distinct vertices"));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let ab = midpoint(f[0], f[1], &mut vertices);
            let bc = midpoint(f[1], f[2], &mut vertices);
            let ca = midpoint(f[2], f[0], &mut vertices);
            next.push([f[0], ab, ca]);
            next.push([f[1], bc, ab]);
            next.push([f[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    Ok(TriMesh { vertices, faces, face_scalars: None })
}

/// Moves a vertex off the exact south pole (a fixed point of the flow).
fn off_south_pole(p: UnitVector3) -> UnitVector3 {
    if p.x == 0.0 && p.y == 0.0 && p.z < 0.0 {
        UnitVector3 { x: 1e-12, y: 0.0, z: -(1.0 - 1e-24f64).sqrt() }
    } else {
        p
    }
}

/// Replaces every vertex by its image under the exact flow at time `t`.
pub fn transport_mesh(mesh: &TriMesh, t: f64) -> Result<TriMesh> {
    let vertices = mesh.vertices.par_iter().map(|&p| exact_flow(off_south_pole(p), t)).collect::<Result<Vec<_>>>()?;
    Ok(TriMesh { vertices, faces: mesh.faces.clone(), face_scalars: None })
}

/// Per-face ratio of spherical areas, after over before.
pub fn face_area_ratios(before: &TriMesh, after: &TriMesh) -> Result<Vec<f64>> {
    if before.faces != after.faces {
        return Err(Error::InvalidArgument("meshes have different connectivity".into()));
    }
    (0..before.faces.len())
        .map(|f| {
            let (a0, a1) = (before.face_area(f), after.face_area(f));
            if !(a0 > 0.0) || !(a1 > 0.0) {
                return Err(Error::Degenerate(format!("face {f} is collapsed")));
            }
            Ok(a1 / a0)
        })
        .collect()
}
