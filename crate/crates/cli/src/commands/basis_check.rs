use serde::Serialize;

use qdiff_core::linalg::{c, commutator, frobenius, identity};
use qdiff_core::{apply_laplacian, LaplacianEigenbasis, SpinBasis};

use super::{check_n, eigenbasis, say, Session};
use crate::args::BasisCheckArgs;
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
struct Config {
    n: usize,
    out: String,
    cache_eigenbasis: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub l: usize,
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub expected_multiplicity: usize,
    pub max_error: f64,
}

fn row(check: &str, value: f64, tolerance: f64) -> CheckRow {
    CheckRow { check: check.into(), value, tolerance, pass: value <= tolerance }
}

pub fn algebra_checks(basis: &SpinBasis) -> Vec<CheckRow> {
    let n = basis.n();
    let nf = n as f64;
    let mut rows = Vec::new();
    for k in 0..3 {
        let (i, j, l) = (k, (k + 1) % 3, (k + 2) % 3);
        let r = commutator(basis.x(i), basis.x(j)) - basis.x(l) * c(1.0 / nf);
        rows.push(row(&format!("commutator_x{}x{}", i + 1, j + 1), frobenius(&r), 1e-13 * nf));
    }
    let casimir =
        (0..3).fold(identity(n) * c((nf * nf - 1.0) / (4.0 * nf * nf)), |acc, k| acc + basis.x(k) * basis.x(k));
    rows.push(row("casimir", frobenius(&casimir), 1e-13 * nf));
    rows
}

/// Per-degree eigenvalue multiplicities of the computed spectrum.
pub fn spectrum_table(eig: &LaplacianEigenbasis) -> Vec<SpectrumRow> {
    let n = eig.n();
    let mut rows: Vec<SpectrumRow> = (0..n)
        .map(|l| SpectrumRow {
            l,
            eigenvalue: -((l * (l + 1)) as f64),
            multiplicity: 0,
            expected_multiplicity: 2 * l + 1,
            max_error: 0.0,
        })
        .collect();
    for (_, _, lam) in eig.spectrum() {
        // Assign to the nearest −l(l+1), independently of the stored label.
        let l = ((-lam).max(0.0) + 0.25).sqrt() - 0.5;
        let l = (l.round() as usize).min(n - 1);
        let r = &mut rows[l];
        r.multiplicity += 1;
        r.max_error = r.max_error.max((lam - r.eigenvalue).abs());
    }
    rows
}

fn eigen_residuals(basis: &SpinBasis, eig: &LaplacianEigenbasis) -> CliResult<f64> {
    let n = basis.n();
    let mut worst: f64 = 0.0;
    for l in [0, 1, n / 2, n - 1] {
        for m in [0, l as i64 / 2, -(l as i64)] {
            let t = eig.matrix(l, m)?;
            let r = apply_laplacian(basis, &t)? + &t * c((l * (l + 1)) as f64);
            worst = worst.max(frobenius(&r) / (1.0 + (l * (l + 1)) as f64));
        }
    }
    Ok(worst)
}

pub fn run(args: &BasisCheckArgs) -> CliResult<()> {
    let n = check_n(args.n)?;
    let mut session = Session::open(&args.output)?;
    let (basis, eig) = eigenbasis(n, args.output.cache_eigenbasis.as_deref())?;

    let mut checks = algebra_checks(&basis);
    let spectrum = spectrum_table(&eig);
    let spectral_error = spectrum.iter().map(|r| r.max_error).fold(0.0, f64::max);
    checks.push(row("spectrum_max_error", spectral_error, 1e-9));
    let wrong = spectrum.iter().filter(|r| r.multiplicity != r.expected_multiplicity).count();
    checks.push(row("spectrum_multiplicity_mismatches", wrong as f64, 0.0));
    checks.push(row("eigenmatrix_residual", eigen_residuals(&basis, &eig)?, 1e-9));

    say(&format!("{:<36} {:>12} {:>12}  status", "check", "value", "tolerance"));
    for r in &checks {
        let status = if r.pass { "PASS" } else { "FAIL" };
        say(&format!("{:<36} {:>12.3e} {:>12.3e}  {status}", r.check, r.value, r.tolerance));
    }
    say("l  eigenvalue  multiplicity (expected 2l+1)");
    for r in &spectrum {
        say(&format!("{} {} {} ({})", r.l, r.eigenvalue, r.multiplicity, r.expected_multiplicity));
    }

    session.write_csv("checks.csv", &checks)?;
    session.write_csv("spectrum.csv", &spectrum)?;
    let failed: Vec<&str> = checks.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
    session.note("failed_checks", &failed)?;
    let config = Config {
        n,
        out: args.output.out.display().to_string(),
        cache_eigenbasis: args.output.cache_eigenbasis.as_ref().map(|p| p.display().to_string()),
    };
    let status = if failed.is_empty() { "ok" } else { "failed" };
    session.finish("basis-check", &config, status)?;
    if !failed.is_empty() {
        return Err(CliError::runtime("check_failed", failed.join(",")));
    }
    Ok(())
}
