use serde::Serialize;

use qdiff_core::quantization::{dequantize_density, dequantize_vorticity};
use qdiff_core::{analyze, dequantize_function};

use super::{check_width, eigenbasis, say, Session};
use crate::args::{ReadAs, RenderArgs};
use crate::error::{CliError, CliResult};
use crate::formats;
use crate::render::render_coefficients;

#[derive(Debug, Serialize)]
struct Config {
    input: String,
    read_as: ReadAs,
    width: usize,
    out: String,
    cache_eigenbasis: Option<String>,
}

pub fn run(args: &RenderArgs) -> CliResult<()> {
    let width = check_width(args.width)?;
    let c = formats::read(&args.input)?;
    let in_file = |e: CliError| CliError::runtime(&e.code, format!("{}: {}", args.input.display(), e.message));
    let coeffs = match c.format() {
        formats::QCOEF => formats::decode_coefficients(&c).map_err(in_file)?,
        formats::QGRID => {
            let g = formats::decode_grid(&c).map_err(in_file)?;
            analyze(&g, g.max_lmax())?
        }
        formats::QMAT => {
            let m = formats::decode_matrix(&c).map_err(in_file)?;
            if m.nrows() < 2 || m.nrows() > super::MAX_N as usize {
                return Err(in_file(CliError::runtime("invalid_size", format!("matrix size {}", m.nrows()))));
            }
            let (_, eig) = eigenbasis(m.nrows(), args.output.cache_eigenbasis.as_deref())?;
            match args.read_as {
                ReadAs::Density => dequantize_density(&m, &eig)?,
                ReadAs::Function => dequantize_function(&m, &eig)?,
                ReadAs::Vorticity => dequantize_vorticity(&m, &eig)?,
            }
        }
        other => return Err(in_file(CliError::runtime("format", format!("cannot render `{other}`")))),
    };
    let stem = args.input.file_stem().and_then(|s| s.to_str()).filter(|s| !s.is_empty()).unwrap_or("field").to_string();
    let mut session = Session::open(&args.output)?;
    let rendered = render_coefficients(&coeffs, width)?;
    session.write_raster(&stem, &rendered)?;
    session.note("min", rendered.min)?;
    session.note("max", rendered.max)?;
    let config = Config {
        input: args.input.display().to_string(),
        read_as: args.read_as,
        width,
        out: args.output.out.display().to_string(),
        cache_eigenbasis: args.output.cache_eigenbasis.as_ref().map(|p| p.display().to_string()),
    };
    let manifest = session.finish("render", &config, "ok")?;
    say(&format!("render: {stem}.ppm range [{:e}, {:e}]; manifest {}", rendered.min, rendered.max, manifest.display()));
    Ok(())
}
