use num_complex::Complex64;
use serde::Serialize;

use qdiff_core::dynamics::{evolve_vorticity, VorticityState};
use qdiff_core::quantization::{dequantize_vorticity, quantize_vorticity};
use qdiff_core::{CMatrix, HarmonicCoefficients, LaplacianEigenbasis};

use super::{check_n, check_step, check_time, check_width, eigenbasis, say, Session};
use crate::args::{IntegratorArg, ModelArg, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::formats;
use crate::render::render_coefficients;

#[derive(Debug, Serialize)]
struct Config {
    n: usize,
    model: ModelArg,
    integrator: IntegratorArg,
    t_final: f64,
    dt: f64,
    steps: usize,
    init: Option<String>,
    save_states: bool,
    width: usize,
    out: String,
    cache_eigenbasis: Option<String>,
}

#[derive(Debug, Serialize)]
struct Row {
    step: usize,
    time: f64,
    trace_re: f64,
    trace_im: f64,
    trace_w2_re: f64,
    trace_w2_im: f64,
    trace_w2_drift: f64,
    spectral_drift: f64,
}

/// Real vorticity with a few low-degree modes; used when no --init is given.
pub fn default_vorticity() -> HarmonicCoefficients {
    let mut a = HarmonicCoefficients::zeros(4);
    let modes = [(2, 0, Complex64::new(1.0, 0.0)), (3, 2, Complex64::new(0.5, 0.3)), (4, 1, Complex64::new(0.4, -0.2))];
    for (l, m, z) in modes {
        a.set(l, m, z).expect("valid mode");
        if m > 0 {
            let s = if m % 2 == 1 { -1.0 } else { 1.0 };
            a.set(l, -m, z.conj() * s).expect("valid mode");
        }
    }
    a
}

fn initial_matrix(args: &SimulateArgs, eig: &LaplacianEigenbasis) -> CliResult<CMatrix> {
    let Some(path) = &args.init else {
        return Ok(quantize_vorticity(&default_vorticity(), eig));
    };
    let c = formats::read(path)?;
    let in_file = |e: CliError| CliError::runtime(&e.code, format!("{}: {}", path.display(), e.message));
    match c.format() {
        formats::QMAT => {
            let w = formats::decode_matrix(&c).map_err(in_file)?;
            if w.nrows() != eig.n() {
                return Err(in_file(CliError::runtime(
                    "size_mismatch",
                    format!("matrix has N={}, run uses N={}", w.nrows(), eig.n()),
                )));
            }
            Ok(w)
        }
        formats::QCOEF => Ok(quantize_vorticity(&formats::decode_coefficients(&c).map_err(in_file)?, eig)),
        other => Err(in_file(CliError::runtime("format", format!("unsupported initial format `{other}`")))),
    }
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let n = check_n(args.n)?;
    let t_final = check_time("--t-final", args.t_final)?;
    let width = check_width(args.width)?;
    let (steps, dt) = match (args.steps, args.dt) {
        (Some(0), _) if t_final > 0.0 => return Err(CliError::usage("--steps must be positive")),
        (Some(s), _) => (s as usize, if s == 0 { 0.0 } else { t_final / s as f64 }),
        (None, dt) => {
            let dt = check_step("--dt", dt.unwrap_or(0.01))?;
            let steps = if t_final == 0.0 { 0 } else { (t_final / dt - 1e-9).ceil().max(1.0) as usize };
            (steps, dt)
        }
    };
    let mut session = Session::open(&args.output)?;
    let (_, eig) = eigenbasis(n, args.output.cache_eigenbasis.as_deref())?;
    let w0 = initial_matrix(args, &eig)?;
    let state = VorticityState::new(w0, args.model.into())?;
    let h = if steps == 0 { 1.0 } else { dt };
    let traj = evolve_vorticity(&eig, &state, t_final, h, args.integrator.into())?;

    let rows: Vec<Row> = traj
        .diagnostics
        .iter()
        .map(|d| Row {
            step: d.step,
            time: d.time,
            trace_re: d.trace.re,
            trace_im: d.trace.im,
            trace_w2_re: d.trace_w2.re,
            trace_w2_im: d.trace_w2.im,
            trace_w2_drift: d.trace_w2_drift,
            spectral_drift: d.spectral_drift,
        })
        .collect();
    session.write_csv("diagnostics.csv", &rows)?;
    session.write("initial.qmat", &formats::encode_matrix(&traj.states[0].w)?)?;
    session.write("final.qmat", &formats::encode_matrix(&traj.last().w)?)?;
    if args.save_states {
        for (k, s) in traj.states.iter().enumerate() {
            session.write(&format!("states/step_{k:06}.qmat"), &formats::encode_matrix(&s.w)?)?;
        }
    }
    let omega = dequantize_vorticity(&traj.last().w, &eig)?;
    session.write("final_vorticity.qcoef", &formats::encode_coefficients(&omega))?;
    session.write_raster("final_vorticity", &render_coefficients(&omega, width)?)?;

    session.note("states", traj.states.len())?;
    session.note("max_trace_w2_drift", traj.max_trace_w2_drift())?;
    session.note("max_spectral_drift", traj.max_spectral_drift())?;
    let config = Config {
        n,
        model: args.model,
        integrator: args.integrator,
        t_final,
        dt,
        steps,
        init: args.init.as_ref().map(|p| p.display().to_string()),
        save_states: args.save_states,
        width,
        out: args.output.out.display().to_string(),
        cache_eigenbasis: args.output.cache_eigenbasis.as_ref().map(|p| p.display().to_string()),
    };
    let manifest = session.finish("simulate", &config, "ok")?;
    say(&format!(
        "simulate: {} states, max Tr W^2 drift {:.3e}, max spectral drift {:.3e}; manifest {}",
        traj.states.len(),
        traj.max_trace_w2_drift(),
        traj.max_spectral_drift(),
        manifest.display()
    ));
    Ok(())
}
