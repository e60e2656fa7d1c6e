use crate::io::{self, ImFile};
use crate::{BuildMethod, CliError, Command, FamilyArg, ModelArgs, SaddleArg, SectorArg};
use nalgebra::Matrix2;
use num_bigint::BigUint;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use xxz_im::basis::{self, BasisFamily, FitReport, TailModel};
use xxz_im::bethe::{default_ladder, im_bethe_limit, DEFAULT_LADDER_LEN, EXTRAPOLATION_TOL};
use xxz_im::circuit::{build_im_circuit, correlator_one_point};
use xxz_im::combinatorics;
use xxz_im::fermion::{self, Sector, Side};
use xxz_im::transfer::{self, eigen_residual, sigma_y_odd, JordanProbeConfig, TransferSpec, TransferVariant};
use xxz_im::{xxz, ModelParams};

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| CliError::Io(e.to_string()))?
    };
}

/// Prints `name: measured (≤ threshold) PASS|FAIL` and returns whether it passed.
fn check(out: &mut dyn Write, name: &str, measured: f64, threshold: f64) -> Result<bool, CliError> {
    let ok = measured <= threshold;
    say!(out, "{name}: {measured:.3e} (threshold {threshold:.1e}) {}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn all_passed(results: &[bool], what: &str) -> Result<(), CliError> {
    let failed = results.iter().filter(|&&ok| !ok).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!("{failed} of {} {what} checks outside tolerance", results.len())))
    }
}

fn model(m: &ModelArgs) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(m.eta, m.u, m.q, m.n)?)
}

pub fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::VerifyIdentities { eta, u, trials, seed, tol } => verify_identities(out, eta, u, trials, seed, tol),
        Command::BuildIm { method, model: m, eps_ladder, digits, out: path } => {
            build_im(out, method, &m, eps_ladder.as_deref(), digits, &path)
        }
        Command::CompareIm { a, b, tol } => compare_im(out, &a, &b, tol),
        Command::FixedPoint { model: m, v, tol } => fixed_point(out, &m, v, tol),
        Command::Correlator { left, right, obs, rho0 } => correlator(out, &left, &right, &obs, &rho0),
        Command::JordanMult { n, occupations, exact, saddle, out: path } => {
            jordan_mult(out, n, &occupations, exact, saddle, &path)
        }
        Command::JordanProbe { model: m, v, epsilon, cluster_tol, rank_tol } => {
            jordan_probe(out, &m, v, epsilon, JordanProbeConfig { cluster_rel_tol: cluster_tol, rank_rel_tol: rank_tol })
        }
        Command::Basis { family, n, s, sector, out: path, fit, fit_out, window, digits } => {
            let window = window.as_deref().map(io::parse_window).transpose().map_err(CliError::Usage)?;
            let fit_path = fit.then(|| fit_out.unwrap_or_else(|| path.with_extension("fit.json")));
            basis_cmd(out, family, n, s, sector, &path, fit_path.as_deref(), window, digits)
        }
        Command::FfCheck { n, u, v, q, tol } => ff_check(out, n, u, v, q, tol),
    }
}

fn verify_identities(out: &mut dyn Write, eta: C64, u: C64, trials: usize, seed: u64, tol: f64) -> Result<(), CliError> {
    let p = ModelParams::new(eta, u, 1.0, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let mut worst = [0.0f64; 4];
    for _ in 0..trials {
        let (v1, v2, v3) = (draw(), draw(), draw());
        worst[0] = worst[0].max(xxz::yang_baxter_residual(&p, v1, v2, v3)?);
        worst[1] = worst[1].max(xxz::crossing_residual(&p, v1)?);
        worst[2] = worst[2].max(xxz::unitarity_residual(&p, v1 - v2)?);
        worst[3] = worst[3].max(xxz::degeneracy_projector_check(&p, v3)?);
    }
    say!(out, "{trials} random spectral parameters, seed {seed}");
    let names = ["yang-baxter", "crossing", "unitarity", "fusion projector"];
    let mut results = Vec::new();
    for (name, w) in names.iter().zip(worst) {
        results.push(check(out, name, w, tol)?);
    }
    all_passed(&results, "identity")
}

fn build_im(
    out: &mut dyn Write,
    method: BuildMethod,
    m: &ModelArgs,
    ladder: Option<&str>,
    digits: Option<u32>,
    path: &Path,
) -> Result<(), CliError> {
    let mut p = model(m)?;
    if let Some(d) = digits {
        p = p.with_digits(d);
    }
    let im = match method {
        BuildMethod::Circuit => build_im_circuit(&p)?,
        BuildMethod::Fermion => fermion::build_im_fermionic(&p)?,
        BuildMethod::Bethe => {
            let ladder = match ladder {
                Some(s) => io::parse_complex_list(s).map_err(CliError::Usage)?,
                None => default_ladder(&p, DEFAULT_LADDER_LEN),
            };
            if ladder.len() < 2 {
                return Err(CliError::Usage("the ε ladder needs at least two values".into()));
            }
            let im = im_bethe_limit(&p, &ladder)?;
            check(out, "extrapolation error", im.error_estimate.unwrap_or(f64::NAN), EXTRAPOLATION_TOL)?;
            im
        }
    };
    io::write_json(path, &ImFile::from_im(&im))?;
    say!(out, "{} IM, N = {}, {} legs, written to {}", im.method.tag(), im.n_half, im.legs(), path.display());
    Ok(())
}

fn compare_im(out: &mut dyn Write, a: &Path, b: &Path, tol: f64) -> Result<(), CliError> {
    let ia = io::read_im(a)?;
    let ib = io::read_im(b)?;
    let d = ia.normalized_distance(&ib)?;
    let ok = check(out, "normalized distance", d, tol)?;
    all_passed(&[ok], "comparison")
}

fn fixed_point(out: &mut dyn Write, m: &ModelArgs, v: C64, tol: f64) -> Result<(), CliError> {
    let p = model(m)?;
    let im = build_im_circuit(&p)?;
    let x = im.state();
    let r1 = eigen_residual(&TransferSpec::new(TransferVariant::Original, v, &p), &x)?;
    let mut y = x.clone();
    y.amps = sigma_y_odd(&x.amps, p.legs());
    let r2 = eigen_residual(&TransferSpec::new(TransferVariant::Tilde, v, &p), &y)?;
    let results = [check(out, "T(v) I = I", r1, tol)?, check(out, "T~(v) S I = S I", r2, tol)?];
    all_passed(&results, "fixed-point")
}

fn correlator(out: &mut dyn Write, left: &Path, right: &Path, obs: &str, rho0: &Path) -> Result<(), CliError> {
    let l = io::read_im(left)?;
    let r = io::read_im(right)?;
    let o: Matrix2<C64> = match obs {
        "sx" => xxz::sigma_x(),
        "sy" => xxz::sigma_y(),
        "sz" => xxz::sigma_z(),
        path => io::read_matrix2(Path::new(path))?,
    };
    let rho = io::read_matrix2(rho0)?;
    let c = correlator_one_point(&l, &r, &rho, &o)?;
    say!(out, "<O> = {:.15e} {:+.15e}i", c.re, c.im);
    Ok(())
}

fn csv_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn jordan_mult(
    out: &mut dyn Write,
    n: usize,
    occ: &str,
    exact: bool,
    saddle: Option<SaddleArg>,
    path: &Path,
) -> Result<(), CliError> {
    let occ = io::parse_occupations(occ).map_err(CliError::Usage)?;
    if !exact && saddle.is_none() {
        return Err(CliError::Usage("nothing to compute: pass --exact and/or --saddle".into()));
    }
    let leading = saddle == Some(SaddleArg::Leading);
    let numeric = saddle == Some(SaddleArg::Numeric);
    let rows = combinatorics::multiplicity_rows(n, &occ, leading, numeric)?;
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["N", "n1", "n2", "n3", "n4", "D", "exact", "saddle_leading", "saddle_numeric", "rel_err"])
        .map_err(csv_err)?;
    for r in &rows {
        let mut rec = vec![n.to_string()];
        rec.extend(occ.iter().map(|x| x.to_string()));
        rec.push(r.d.to_string());
        rec.push(if exact { r.exact.to_string() } else { String::new() });
        rec.push(fmt_opt(r.saddle_leading));
        rec.push(fmt_opt(r.saddle_numeric));
        rec.push(if exact { fmt_opt(r.rel_err()) } else { String::new() });
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)?;
    say!(out, "{} rows written to {}", rows.len(), path.display());
    if exact {
        let sum: BigUint = rows.iter().map(|r| &r.exact * BigUint::from(r.d)).sum();
        let want = combinatorics::binomial_product(n, &occ);
        let ok = sum == want;
        say!(out, "dimension sum: {sum} vs product of binomials {want} (exact equality) {}", if ok { "PASS" } else { "FAIL" });
        all_passed(&[ok], "sum-rule")?;
    }
    Ok(())
}

fn jordan_probe(out: &mut dyn Write, m: &ModelArgs, v: C64, eps: Option<C64>, cfg: JordanProbeConfig) -> Result<(), CliError> {
    let mut p = model(m)?;
    if let Some(e) = eps {
        p = p.with_epsilon(e);
    }
    let rep = transfer::jordan_probe(&p, v, eps.is_some(), cfg)?;
    say!(out, "dim {}, cluster tolerance {:.1e} (relative), rank tolerance {:.1e}", rep.dim, cfg.cluster_rel_tol, cfg.rank_rel_tol);
    for c in rep.clusters.iter().filter(|c| c.algebraic != c.geometric) {
        say!(
            out,
            "sector {} lambda {:+.9e} {:+.9e}i algebraic {} geometric {} blocks {:?}",
            c.sector.unwrap_or(0),
            c.lambda.re,
            c.lambda.im,
            c.algebraic,
            c.geometric,
            c.blocks
        );
    }
    say!(out, "clusters {}, largest block {}, diagonalizable {}", rep.clusters.len(), rep.largest_block(), rep.is_diagonalizable());
    if eps.is_some() {
        return Ok(());
    }
    let one = rep.cluster_near(C64::new(1.0, 0.0));
    let (dist, geo) = one.map(|c| ((c.lambda - 1.0).norm(), c.geometric)).unwrap_or((f64::INFINITY, 0));
    let ok_dist = check(out, "distance of nearest eigenvalue to 1", dist, 1e-8)?;
    let ok_geo = geo == 1;
    say!(out, "eigenvalue-1 geometric multiplicity: {geo} (required 1) {}", if ok_geo { "PASS" } else { "FAIL" });
    all_passed(&[ok_dist, ok_geo], "probe")
}

#[derive(Serialize)]
struct ComponentOut {
    amplitude: f64,
    phase: f64,
    edge_amplitude: f64,
    edge_phase: f64,
    rel_residual: f64,
}

#[derive(Serialize)]
struct CheckOut {
    name: String,
    measured: f64,
    target: f64,
    tol: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SectorFit {
    family: &'static str,
    sector: &'static str,
    n: usize,
    s: f64,
    model: &'static str,
    phase_convention: &'static str,
    omega: f64,
    window: [usize; 2],
    components: Vec<ComponentOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay_exponent: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_free: Option<[f64; 2]>,
    checks: Vec<CheckOut>,
}

#[derive(Serialize)]
struct FitFile {
    reports: Vec<SectorFit>,
}

fn sector_name(s: Sector) -> &'static str {
    match s {
        Sector::Cl => "cl",
        Sector::Q => "q",
    }
}

fn build_family(family: FamilyArg, n: usize, s: f64, sector: Sector, digits: u32) -> Result<BasisFamily, CliError> {
    Ok(match family {
        FamilyArg::Adjugate => basis::adjugate_vectors(n, s, sector)?,
        FamilyArg::Jacobi => basis::jacobi_vectors(n, s, sector, digits)?,
        FamilyArg::Orth => basis::gram_schmidt_causal(&basis::jacobi_vectors(n, s, sector, digits)?)?,
    })
}

fn components(f: &FitReport) -> Vec<ComponentOut> {
    f.components
        .iter()
        .map(|c| ComponentOut {
            amplitude: c.amplitude,
            phase: c.phase,
            edge_amplitude: c.edge_amplitude,
            edge_phase: c.edge_phase,
            rel_residual: c.rel_residual,
        })
        .collect()
}

fn to_check(name: &str, measured: f64, target: f64, tol: f64, pass: bool) -> CheckOut {
    CheckOut { name: name.into(), measured, target, tol, pass }
}

/// Fits the highest vector's tail: half-power amplitudes against the leading
/// asymptote for jacobi and adjugate rows; for the orthogonal rows the edge model,
/// decay exponent and free frequency, plus the reference table at N = 50, s = 1/2.
fn fit_sector(b: &BasisFamily, family: FamilyArg, window: Option<(usize, usize)>) -> Result<SectorFit, CliError> {
    let n = b.n_half();
    let (model, default_window) = match family {
        FamilyArg::Orth => (TailModel::ThreeHalfPowerWithEdge, (8, n.saturating_sub(8))),
        _ => (TailModel::HalfPower, (20.min(n), n)),
    };
    let window = window.unwrap_or(default_window);
    let fit = basis::tail_fit(b, model, window)?;
    let mut checks = Vec::new();
    let (mut decay, mut omega_free) = (None, None);
    match family {
        FamilyArg::Orth => {
            if b.sector == Sector::Cl {
                let p = [basis::fit_decay_exponent(b, 0, window)?, basis::fit_decay_exponent(b, 1, window)?];
                for (i, e) in p.iter().enumerate() {
                    let dev = (e - 1.5).abs();
                    checks.push(to_check(&format!("decay exponent {}", i + 1), *e, 1.5, 0.1, dev <= 0.1));
                }
                let w = [
                    basis::fit_frequency(b, model, 0, window, 0.2)?,
                    basis::fit_frequency(b, model, 1, window, 0.2)?,
                ];
                for (i, x) in w.iter().enumerate() {
                    let dev = (x - fit.omega).abs();
                    checks.push(to_check(&format!("free omega {}", i + 1), *x, fit.omega, 1e-3, dev <= 1e-3));
                }
                if n == 50 && (b.s - 0.5).abs() < 1e-12 {
                    for c in basis::orth_reference_checks(&fit) {
                        checks.push(to_check(&c.name, c.measured, c.target, c.tol, c.passed()));
                    }
                }
                decay = Some(p);
                omega_free = Some(w);
            }
        }
        _ => {
            let target = basis::jacobi_asymptote_amplitude(b.sector, b.s);
            for (i, c) in fit.components.iter().enumerate() {
                let rel = (c.amplitude / target - 1.0).abs();
                checks.push(to_check(&format!("amplitude {} (relative)", i + 1), c.amplitude, target, 0.05, rel <= 0.05));
            }
        }
    }
    Ok(SectorFit {
        family: match family {
            FamilyArg::Adjugate => "adjugate",
            FamilyArg::Jacobi => "jacobi",
            FamilyArg::Orth => "orth",
        },
        sector: sector_name(b.sector),
        n,
        s: b.s,
        model: match model {
            TailModel::HalfPower => "half_power",
            TailModel::ThreeHalfPowerWithEdge => "three_half_power_with_edge",
        },
        phase_convention: "sin(omega*k - phase)",
        omega: fit.omega,
        window: [fit.window.0, fit.window.1],
        components: components(&fit),
        decay_exponent: decay,
        omega_free,
        checks,
    })
}

#[allow(clippy::too_many_arguments)]
fn basis_cmd(
    out: &mut dyn Write,
    family: FamilyArg,
    n: usize,
    s: f64,
    sector: SectorArg,
    path: &Path,
    fit_path: Option<&Path>,
    window: Option<(usize, usize)>,
    digits: u32,
) -> Result<(), CliError> {
    let sectors = match sector {
        SectorArg::Cl => vec![Sector::Cl],
        SectorArg::Q => vec![Sector::Q],
        SectorArg::Both => vec![Sector::Cl, Sector::Q],
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["sector", "m", "site", "re", "im"]).map_err(csv_err)?;
    let mut results = Vec::new();
    let mut fits = Vec::new();
    for sec in sectors {
        let b = build_family(family, n, s, sec, digits)?;
        for m in 0..n {
            for site in 0..2 * n {
                let rec = [
                    sector_name(sec).to_string(),
                    (m + 1).to_string(),
                    (site + 1).to_string(),
                    format!("{:e}", b.vectors[(m, site)]),
                    "0e0".to_string(),
                ];
                w.write_record(&rec).map_err(csv_err)?;
            }
        }
        let support_tol = if family == FamilyArg::Orth { 1e-12 } else { 0.0 };
        results.push(check(out, &format!("{} support violation", sector_name(sec)), basis::support_violation(&b), support_tol)?);
        if family == FamilyArg::Orth {
            results.push(check(out, &format!("{} orthogonality defect", sector_name(sec)), basis::orthogonality_defect(&b), 1e-10)?);
        }
        if fit_path.is_some() {
            let f = fit_sector(&b, family, window)?;
            for c in &f.checks {
                let dev = if c.name.contains("relative") { (c.measured / c.target - 1.0).abs() } else { (c.measured - c.target).abs() };
                say!(
                    out,
                    "{} {}: {:.4} target {:.4}, deviation {:.3e} (tolerance {:.1e}) {}",
                    f.sector,
                    c.name,
                    c.measured,
                    c.target,
                    dev,
                    c.tol,
                    if c.pass { "PASS" } else { "FAIL" }
                );
                results.push(c.pass);
            }
            fits.push(f);
        }
    }
    w.flush().map_err(csv_err)?;
    say!(out, "basis rows written to {}", path.display());
    if let Some(fp) = fit_path {
        io::write_json(fp, &FitFile { reports: fits })?;
        say!(out, "fit report written to {}", fp.display());
    }
    all_passed(&results, "basis")
}

fn ff_check(out: &mut dyn Write, n: usize, u: f64, v: C64, q: f64, tol: f64) -> Result<(), CliError> {
    let p = ModelParams::free_fermion(u, q, n)?;
    let mut results = Vec::new();
    for sector in [Sector::Cl, Sector::Q] {
        let m = fermion::build_m(&p, v, sector)?.entries;
        for side in [Side::L, Side::R] {
            let h = fermion::build_h(&p, side, sector)?.entries;
            let name = format!("[M_{0}, h_{1}_{0}] relative", sector_name(sector), if side == Side::L { "l" } else { "r" });
            results.push(check(out, &name, fermion::commutator_norm(&m, &h), tol)?);
        }
        // M_cl is lower and M_q upper triangular.
        let (lower, side_name) = if sector == Sector::Cl { (true, "above") } else { (false, "below") };
        let stray = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .filter(|&(i, j)| if lower { j > i } else { j < i })
            .map(|(i, j)| m[(i, j)].norm())
            .fold(0.0, f64::max);
        results.push(check(out, &format!("M_{} {side_name} the diagonal", sector_name(sector)), stray, 0.0)?);
    }
    if p.legs() <= 12 {
        let rep = fermion::gaussian_form_check(&p, v)?;
        results.push(check(out, "gaussian form deviation", rep.max_deviation(), 1e-8)?);
    } else {
        say!(out, "gaussian form: skipped, needs 4N <= 12");
    }
    all_passed(&results, "free-fermion")
}
