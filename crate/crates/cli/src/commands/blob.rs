use serde::Serialize;

use qdiff_core::blob::transport_blob;
use qdiff_core::dynamics::{act_density, flow_of_stream};
use qdiff_core::linalg::max_abs_entry;
use qdiff_core::quantization::dequantize_density;
use qdiff_core::reference::exact_flow;
use qdiff_core::{blob_at, blob_center, quantize_generator, CMatrix, UnitVector3};

use super::{check_n, check_step, check_time, check_width, eigenbasis, say, Session};
use crate::args::{parse_point, BlobArgs, BlobMode, GeneratorArg};
use crate::error::{CliError, CliResult};
use crate::formats;
use crate::render::render_coefficients;

#[derive(Debug, Serialize)]
struct Config {
    n: usize,
    point: [f64; 3],
    mode: BlobMode,
    generator: GeneratorArg,
    t_final: f64,
    steps: usize,
    h: Option<f64>,
    width: usize,
    out: String,
    cache_eigenbasis: Option<String>,
}

/// One sample of the blob track. Reference columns are filled only for the
/// example generator, whose classical flow is known in closed form.
#[derive(Debug, Serialize)]
struct Row {
    step: usize,
    time: f64,
    x: f64,
    y: f64,
    z: f64,
    max_entry: f64,
    reference_x: Option<f64>,
    reference_y: Option<f64>,
    reference_z: Option<f64>,
    angle_error: Option<f64>,
}

struct Plan {
    t_final: f64,
    steps: usize,
    h: Option<f64>,
}

fn plan(args: &BlobArgs) -> CliResult<Plan> {
    match args.mode {
        BlobMode::Density => {
            if args.h.is_some() {
                return Err(CliError::usage("--h applies to --mode center only"));
            }
            let t_final = check_time("--t-final", args.t_final.unwrap_or(0.5))?;
            let steps = args.steps.unwrap_or(50) as usize;
            if steps == 0 {
                return Err(CliError::usage("--steps must be positive"));
            }
            Ok(Plan { t_final, steps, h: None })
        }
        BlobMode::Center => {
            if args.t_final.is_some() {
                return Err(CliError::usage("--t-final applies to --mode density only; use --steps and --h"));
            }
            let h = check_step("--h", args.h.unwrap_or(1.0))?;
            let steps = args.steps.unwrap_or(200) as usize;
            if steps == 0 {
                return Err(CliError::usage("--steps must be positive"));
            }
            Ok(Plan { t_final: steps as f64 * h, steps, h: Some(h) })
        }
    }
}

fn sample(
    step: usize,
    time: f64,
    b: &CMatrix,
    basis: &qdiff_core::SpinBasis,
    y0: UnitVector3,
    generator: GeneratorArg,
) -> CliResult<Row> {
    let c = blob_center(basis, b)?;
    let reference = match generator {
        GeneratorArg::Example => Some(exact_flow(y0, time)?),
        GeneratorArg::Conjugate => None,
    };
    Ok(Row {
        step,
        time,
        x: c.x,
        y: c.y,
        z: c.z,
        max_entry: max_abs_entry(b),
        reference_x: reference.map(|r| r.x),
        reference_y: reference.map(|r| r.y),
        reference_z: reference.map(|r| r.z),
        angle_error: reference.map(|r| r.angle_to(c)),
    })
}

pub fn run(args: &BlobArgs) -> CliResult<()> {
    let n = check_n(args.n)?;
    let width = check_width(args.width)?;
    let point = parse_point(&args.point).map_err(CliError::usage)?;
    let y0 = UnitVector3::from_array(point)?;
    let plan = plan(args)?;
    let mut session = Session::open(&args.output)?;
    let (basis, eig) = eigenbasis(n, args.output.cache_eigenbasis.as_deref())?;
    let p = quantize_generator(&args.generator.coefficients(), &eig);
    let b0 = blob_at(&basis, y0)?;

    let mut rows = Vec::with_capacity(plan.steps + 1);
    let last = match args.mode {
        BlobMode::Density => {
            let samples = if plan.t_final == 0.0 { 0 } else { plan.steps };
            let mut b = b0.clone();
            rows.push(sample(0, 0.0, &b, &basis, y0, args.generator)?);
            for k in 1..=samples {
                let t = plan.t_final * k as f64 / samples as f64;
                b = act_density(&flow_of_stream(&p, t)?, &b0)?;
                rows.push(sample(k, t, &b, &basis, y0, args.generator)?);
            }
            b
        }
        BlobMode::Center => {
            let h = plan.h.expect("center mode has a step");
            let tr = transport_blob(&basis, &p, &b0, plan.steps, h)?;
            for (k, b) in tr.steps.iter().enumerate() {
                rows.push(sample(k, k as f64 * h, b, &basis, y0, args.generator)?);
            }
            tr.last().clone()
        }
    };

    session.write_csv("track.csv", &rows)?;
    session.write("final.qmat", &formats::encode_matrix(&last)?)?;
    let density = dequantize_density(&last, &eig)?;
    session.write("final_density.qcoef", &formats::encode_coefficients(&density))?;
    session.write_raster("final_density", &render_coefficients(&density, width)?)?;

    let (first, end) = (&rows[0], rows.last().expect("nonempty track"));
    session.note("initial_center", [first.x, first.y, first.z])?;
    session.note("final_center", [end.x, end.y, end.z])?;
    session.note("initial_max_entry", first.max_entry)?;
    session.note("final_max_entry", end.max_entry)?;
    session.note("final_angle_error", end.angle_error)?;
    let config = Config {
        n,
        point,
        mode: args.mode,
        generator: args.generator,
        t_final: plan.t_final,
        steps: plan.steps,
        h: plan.h,
        width,
        out: args.output.out.display().to_string(),
        cache_eigenbasis: args.output.cache_eigenbasis.as_ref().map(|p| p.display().to_string()),
    };
    let manifest = session.finish("blob", &config, "ok")?;
    say(&format!(
        "blob: final center ({:.6}, {:.6}, {:.6}), max entry {:.4e}; manifest {}",
        end.x,
        end.y,
        end.z,
        end.max_entry,
        manifest.display()
    ));
    Ok(())
}
