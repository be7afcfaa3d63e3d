use serde::Serialize;

use qdiff_core::dynamics::flow_of_stream;
use qdiff_core::quantization::dequantize_density;
use qdiff_core::reference::{face_area_ratios, icosasphere, transport_mesh};
use qdiff_core::{quantize_generator, UnitVector3};

use super::{check_n, check_time, check_width, eigenbasis, say, Session};
use crate::args::{DeformArgs, GeneratorArg};
use crate::error::{CliError, CliResult};
use crate::formats;
use crate::render::render_coefficients;

#[derive(Debug, Serialize)]
struct Config {
    refinements: u32,
    t_final: f64,
    n: usize,
    generator: GeneratorArg,
    width: usize,
    out: String,
    cache_eigenbasis: Option<String>,
}

pub fn run(args: &DeformArgs) -> CliResult<()> {
    if !(0..=8).contains(&args.refinements) {
        return Err(CliError::usage(format!("--refinements must be in 0..=8, got {}", args.refinements)));
    }
    let refinements = args.refinements as u32;
    let t = check_time("--t-final", args.t_final)?;
    let n = check_n(args.n)?;
    let width = check_width(args.width)?;
    let mut session = Session::open(&args.output)?;

    let mesh = icosasphere(refinements)?;
    let mut moved = transport_mesh(&mesh, t)?;
    let ratios = face_area_ratios(&mesh, &moved)?;
    let (mut south_min, mut north_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (f, r) in ratios.iter().enumerate() {
        let z = mesh.face_centroid(f).z;
        if z < -0.5 {
            south_min = south_min.min(*r);
        }
        if z > 0.5 {
            north_max = north_max.max(*r);
        }
    }
    let area_error = (moved.total_area() - 4.0 * std::f64::consts::PI).abs();
    moved.face_scalars = Some(ratios);
    session.write("mesh.qmesh", &formats::encode_mesh(&moved)?)?;

    let (_, eig) = eigenbasis(n, args.output.cache_eigenbasis.as_deref())?;
    let p = quantize_generator(&args.generator.coefficients(), &eig);
    let f = flow_of_stream(&p, t)?;
    let ff = &f.f * f.f.adjoint();
    session.write("ffstar.qmat", &formats::encode_matrix(&ff)?)?;
    let density = dequantize_density(&ff, &eig)?;
    session.write("ffstar.qcoef", &formats::encode_coefficients(&density))?;
    session.write_raster("ffstar", &render_coefficients(&density, width)?)?;
    let south = density.evaluate(UnitVector3::SOUTH).re;
    let north = density.evaluate(UnitVector3::NORTH).re;

    session.note("faces", mesh.faces.len())?;
    session.note("south_min_area_ratio", south_min)?;
    session.note("north_max_area_ratio", north_max)?;
    session.note("total_area_error", area_error)?;
    session.note("ffstar_south", south)?;
    session.note("ffstar_north", north)?;
    let config = Config {
        refinements,
        t_final: t,
        n,
        generator: args.generator,
        width,
        out: args.output.out.display().to_string(),
        cache_eigenbasis: args.output.cache_eigenbasis.as_ref().map(|p| p.display().to_string()),
    };
    let manifest = session.finish("deform", &config, "ok")?;
    say(&format!(
        "deform: {} faces, south min ratio {south_min:.4}, north max ratio {north_max:.4}, FF* south {south:.4e} north {north:.4e}; manifest {}",
        mesh.faces.len(),
        manifest.display()
    ));
    Ok(())
}
