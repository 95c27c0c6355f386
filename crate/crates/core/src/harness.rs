//! Command runner behind the `pencilbeam` binary: builds the operators from a
//! [`RunConfig`], runs the requested analysis and writes its artifacts.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Format, InitialData, RunConfig};
use crate::counts::{accumulation_report, bargmann_check, count_report, AccumulationReport, BargmannCheck, CountReport};
use crate::error::{Error, Result};
use crate::evolution::{self, attach_residuals, evolve, laplace_solution, StateDump, Trajectory};
use crate::operators::{assemble_operators, class_k_diagnostic, ClassKReport, Constants, OperatorSet};
use crate::pencil::{build_shifted, compute_spectrum, PencilSpectrum, ShiftedSystem};
use crate::regions::{localization_report, RegionSpec};
use crate::resolvent::{xi_grid, ScanResult};
use crate::surrogate::index_equality_suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Regions,
    Count,
    Evolve,
    LaplaceCheck,
    ResolventCheck,
    VerifyAll,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Spectrum,
        Command::Regions,
        Command::Count,
        Command::Evolve,
        Command::LaplaceCheck,
        Command::ResolventCheck,
        Command::VerifyAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Regions => "regions",
            Command::Count => "count",
            Command::Evolve => "evolve",
            Command::LaplaceCheck => "laplace-check",
            Command::ResolventCheck => "resolvent-check",
            Command::VerifyAll => "verify-all",
        }
    }

    pub fn parse(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub paper_ref: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub skipped: Vec<Skipped>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub out_dir: PathBuf,
    pub written: Vec<PathBuf>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Input(_) | Error::Hypothesis { .. } | Error::Domain(_) => EXIT_CONFIG,
        Error::Numerical(_) | Error::Subordination(_) | Error::Format(_) | Error::Io(_) => EXIT_NUMERICAL,
    }
}

/// Load, run and report in one go; returns the process exit code and a
/// one-line summary.
pub fn run_from_path(command: Command, config: &Path, opts: &RunOptions) -> (i32, String) {
    let result = RunConfig::load(config).and_then(|cfg| run(command, &cfg, opts));
    match result {
        Ok(outcome) => {
            let failed: Vec<String> = outcome.report.failures().map(|c| format!("{} ({})", c.name, c.paper_ref)).collect();
            let msg = if failed.is_empty() {
                format!("{}: {} checks passed, output in {}", command.name(), outcome.report.checks.len(), outcome.out_dir.display())
            } else {
                format!("{}: failed checks: {}", command.name(), failed.join(", "))
            };
            (outcome.exit_code(), msg)
        }
        Err(e) => (exit_code_for_error(&e), format!("error: {e}")),
    }
}

/// Stiffness and damping data shared by the commands.
struct Setup {
    ops: OperatorSet,
    spectrum: PencilSpectrum,
    shifted: ShiftedSystem,
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    let grid = cfg.grid()?;
    let ops = assemble_operators(cfg.alpha, grid, &cfg.tension, &cfg.damping)?;
    let spectrum = compute_spectrum(&ops, cfg.spectrum.real_tolerance)?;
    let shifted = build_shifted(&ops, &spectrum)?;
    Ok(Setup { ops, spectrum, shifted })
}

struct Session<'a> {
    cfg: &'a RunConfig,
    seed: u64,
    out_dir: PathBuf,
    checks: Vec<Check>,
    skipped: Vec<Skipped>,
    written: Vec<PathBuf>,
}

impl Session<'_> {
    fn check(&mut self, name: &str, paper_ref: &'static str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            paper_ref,
            passed,
            detail,
        });
    }

    fn skip(&mut self, name: &str, reason: impl Into<String>) {
        self.skipped.push(Skipped {
            name: name.to_string(),
            reason: reason.into(),
        });
    }

    fn write_with(&mut self, format: Format, file: &str, body: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
        if !self.cfg.output.wants(format) {
            return Ok(());
        }
        let path = self.out_dir.join(file);
        let mut w = BufWriter::new(fs::File::create(&path)?);
        body(&mut w)?;
        std::io::Write::flush(&mut w)?;
        self.written.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<()> {
        self.write_with(Format::Json, file, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Format(e.to_string()))?;
            std::io::Write::write_all(w, b"\n")?;
            Ok(())
        })
    }

    fn write_bin(&mut self, file: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out_dir.join(file);
        fs::write(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }
}

pub fn run(command: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome> {
    cfg.validate()?;
    let out_dir = opts.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    fs::create_dir_all(&out_dir)?;
    let mut s = Session {
        cfg,
        seed: opts.seed.unwrap_or(cfg.seed),
        out_dir,
        checks: Vec::new(),
        skipped: Vec::new(),
        written: Vec::new(),
    };
    let setup = setup(cfg)?;
    let all = command == Command::VerifyAll;

    if matches!(command, Command::Spectrum | Command::Regions) || all {
        spectrum_stage(&mut s, &setup, command != Command::Spectrum)?;
    }
    if command == Command::Count || all {
        count_stage(&mut s, &setup)?;
    }
    if command == Command::Evolve || all {
        evolve_stage(&mut s, &setup)?;
    }
    if command == Command::LaplaceCheck || all {
        if all && setup.ops.dim() > cfg.verify.laplace_max_n {
            s.skip("laplace_agreement", format!("n = {} exceeds verify.laplace_max_n", setup.ops.dim()));
        } else {
            laplace_stage(&mut s, &setup)?;
        }
    }
    if command == Command::ResolventCheck || all {
        if all && setup.ops.dim() > cfg.verify.resolvent_max_n {
            s.skip("resolvent_scan", format!("n = {} exceeds verify.resolvent_max_n", setup.ops.dim()));
        } else {
            resolvent_stage(&mut s, &setup)?;
        }
    }
    if all {
        surrogate_stage(&mut s)?;
    }

    let report = Report {
        command: command.name(),
        seed: s.seed,
        passed: s.checks.iter().all(|c| c.passed),
        checks: std::mem::take(&mut s.checks),
        skipped: std::mem::take(&mut s.skipped),
    };
    s.write_json("report.json", &report)?;
    Ok(Outcome {
        report,
        out_dir: s.out_dir,
        written: s.written,
    })
}

/// Largest `||λ + 1/α| − 1/α|` over nonreal eigenvalues.
pub fn circle_deviation(spectrum: &PencilSpectrum, alpha: f64) -> f64 {
    spectrum
        .nonreal()
        .map(|z| ((z + 1.0 / alpha).norm() - 1.0 / alpha).abs())
        .fold(0.0, f64::max)
}

fn spectrum_stage(s: &mut Session, st: &Setup, region_checks: bool) -> Result<()> {
    let ops = &st.ops;
    let spec = RegionSpec::from_operators(ops, s.cfg.regions.ring_convention).with_boundary_tol(s.cfg.regions.boundary_tol);
    let report = localization_report(&st.spectrum, &spec);
    s.write_with(Format::Csv, "spectrum.csv", |w| report.write_csv(w))?;

    let tol = st.spectrum.real_tolerance;
    let worst = st.spectrum.nonreal().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    s.check(
        "nonreal_spectrum_in_left_half_plane",
        "Lemma 3",
        st.spectrum.nonreal().all(|z| z.re <= tol),
        format!("max Re over {} nonreal eigenvalues = {worst:.6e}", report.nonreal_count),
    );

    if ops.tension_positive_part_vanishes() && ops.tension_negative_part_vanishes() && ops.constants.b_plus == 0.0 {
        let dev = circle_deviation(&st.spectrum, ops.alpha);
        let max_real = st.spectrum.real().fold(f64::NEG_INFINITY, f64::max);
        let bound = 1e-8 / ops.alpha;
        s.check(
            "circle_law",
            "Theorem 1",
            dev <= bound && max_real <= tol,
            format!("max circle deviation {dev:.6e} (bound {bound:.1e}), max real eigenvalue {max_real:.6e}"),
        );
    } else {
        s.skip("circle_law", "needs g = 0 and beta = 0");
    }

    if !region_checks {
        return Ok(());
    }
    let bad = report.violations();
    s.check(
        "nonreal_in_pi_minus_m_r",
        "Lemma 2",
        report.all_nonreal_in_pi_minus_m_r,
        format!("{} of {} nonreal eigenvalues outside; first indices {:?}", bad.len(), report.nonreal_count, &bad[..bad.len().min(5)]),
    );
    match report.all_nonreal_in_d {
        Some(ok) => {
            let out = report.rows.iter().filter(|r| !r.is_real && !r.in_d).count();
            s.check("nonreal_in_disc_d", "Lemma 10(a)", ok, format!("{out} nonreal eigenvalues outside D"));
        }
        None => s.skip("nonreal_in_disc_d", "needs g_minus = 0"),
    }
    match report.no_nonreal_in_d_prime {
        Some(ok) => {
            let inside = report.rows.iter().filter(|r| !r.is_real && r.in_d_prime == Some(true)).count();
            s.check("no_nonreal_in_disc_d_prime", "Lemma 10(b)", ok, format!("{inside} nonreal eigenvalues inside D'"));
        }
        None => s.skip("no_nonreal_in_disc_d_prime", "needs g_plus = 0 and alpha * b_plus <= 1"),
    }
    Ok(())
}

#[derive(Serialize)]
struct CountJson<'a> {
    counts: &'a CountReport,
    accumulation: &'a AccumulationReport,
    bargmann: Option<BargmannCheck>,
    class_k: Option<ClassKReport>,
    constants: Constants,
}

fn count_stage(s: &mut Session, st: &Setup) -> Result<()> {
    let ops = &st.ops;
    let counts = count_report(ops, &st.spectrum)?;
    let accumulation = accumulation_report(ops, &st.spectrum);
    let bargmann = ops.tension.as_ref().map(bargmann_check);
    let class_k = match (&ops.tension, &ops.grid) {
        (Some(g), Some(grid)) => Some(class_k_diagnostic(g, 1.0, grid.length())),
        _ => None,
    };
    s.write_json(
        "count.json",
        &CountJson {
            counts: &counts,
            accumulation: &accumulation,
            bargmann,
            class_k,
            constants: ops.constants,
        },
    )?;
    s.write_with(Format::Csv, "nu_scan.csv", |w| {
        std::io::Write::write_all(w, b"k,nu\n")?;
        for (k, nu) in &counts.nu_at_samples {
            std::io::Write::write_fmt(w, format_args!("{k:.16e},{nu}\n"))?;
        }
        Ok(())
    })?;

    s.check(
        "index_equality",
        "Lemma 3",
        counts.index_equality_holds(),
        format!(
            "kappa1 = {}, nu(A+G) = {}, nonreal right half-plane eigenvalues: {}",
            counts.kappa1,
            counts.nu_t,
            counts.kappa1_nonreal_violations.len()
        ),
    );
    match (counts.bracketing_holds(), counts.nu_s) {
        (Some(ok), Some(nu_s)) => s.check(
            "schrodinger_bracketing",
            "Lemma 11",
            ok,
            format!("nu(T) = {}, nu(S) = {nu_s}", counts.nu_t),
        ),
        _ => s.skip("schrodinger_bracketing", "needs a beam tension profile"),
    }
    match (counts.bargmann_bound_holds(), counts.bargmann) {
        (Some(ok), Some(bound)) => s.check(
            "bargmann_bound",
            "Corollary 12(b)",
            ok,
            format!("nu(T) = {}, bound = {bound:.6e}", counts.nu_t),
        ),
        _ => s.skip("bargmann_bound", "premise max x int_x g_plus <= 1/4 fails or no profile"),
    }
    s.check(
        "nu_nonincreasing_for_k_nonnegative",
        "Section 2.4",
        counts.nu_monotone_on_nonnegative_k(),
        format!(
            "nu(k) on k >= 0: {:?}",
            counts.nu_at_samples.iter().filter(|(k, _)| *k >= 0.0).map(|(_, v)| *v).collect::<Vec<_>>()
        ),
    );
    Ok(())
}

fn initial_vector(data: &InitialData, ops: &OperatorSet) -> Result<Vec<f64>> {
    match data {
        InitialData::Zero {} => Ok(vec![0.0; ops.dim()]),
        InitialData::Bump { amplitude } => {
            let grid = ops.grid.clone().ok_or_else(|| Error::Config("bump initial data needs a grid".into()))?;
            Ok(evolution::bump(&grid, *amplitude))
        }
        InitialData::Mode { index, amplitude } => {
            Ok(evolution::stiffness_mode(ops, *index)?.into_iter().map(|x| amplitude * x).collect())
        }
    }
}

fn initial_data(s: &Session, ops: &OperatorSet) -> Result<(Vec<f64>, Vec<f64>)> {
    let init = &s.cfg.evolve.initial;
    Ok((initial_vector(&init.psi0, ops)?, initial_vector(&init.psi1, ops)?))
}

fn trajectory(s: &Session, st: &Setup) -> Result<Trajectory> {
    let (psi0, psi1) = initial_data(s, &st.ops)?;
    evolve(&st.shifted, &psi0, &psi1, s.cfg.evolve.t_end, s.cfg.evolve.dt)
}

pub const CONTRACTION_REL_TOL: f64 = 1e-12;
pub const ENERGY_BOUND_REL_TOL: f64 = 1e-10;

fn evolve_stage(s: &mut Session, st: &Setup) -> Result<()> {
    let mut traj = trajectory(s, st)?;
    attach_residuals(&mut traj, &st.ops);
    s.write_with(Format::Csv, "trajectory.csv", |w| evolution::write_trajectory_csv(&traj, w))?;
    if s.cfg.evolve.dump_state {
        s.write_bin("state.bin", &StateDump::from(&traj).encode())?;
    }
    s.check(
        "shifted_energy_contraction",
        "Theorem 6",
        traj.shifted_energy_nonincreasing(CONTRACTION_REL_TOL),
        format!("{} steps, max relative step growth {:.6e}", traj.len() - 1, traj.max_shifted_energy_growth()),
    );
    s.check(
        "energy_bound",
        "Theorem 8",
        traj.energy_bound_holds(ENERGY_BOUND_REL_TOL),
        format!("max E_k / (exp(k0 t_k) E_0) = {:.12e}, k0 = {:.6e}", traj.max_energy_bound_ratio(), traj.k0),
    );
    Ok(())
}

fn laplace_stage(s: &mut Session, st: &Setup) -> Result<()> {
    let (psi0, psi1) = initial_data(s, &st.ops)?;
    let traj = evolve(&st.shifted, &psi0, &psi1, s.cfg.evolve.t_end, s.cfg.evolve.dt)?;
    let quad = s.cfg.laplace.quadrature();
    let mut rows = Vec::new();
    for &t in &s.cfg.laplace.times {
        let k = traj.index_of(t);
        let stepped = traj.shifted_state(k);
        let q = laplace_solution(&st.shifted, &psi0, &psi1, traj.times[k], quad)?;
        let diff: Vec<f64> = stepped.iter().zip(q.state()).map(|(a, b)| a - b).collect();
        rows.push((traj.times[k], st.shifted.energy_norm(&diff), q.error_estimate, st.shifted.energy_norm(&stepped)));
    }
    s.write_with(Format::Csv, "laplace.csv", |w| {
        std::io::Write::write_all(w, b"t,h_norm_difference,quadrature_error_estimate,h_norm_state\n")?;
        for (t, d, e, m) in &rows {
            std::io::Write::write_fmt(w, format_args!("{t:.16e},{d:.16e},{e:.16e},{m:.16e}\n"))?;
        }
        Ok(())
    })?;
    let tol = s.cfg.laplace.tolerance;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    s.check(
        "laplace_agreement",
        "Eq. (14)",
        worst <= tol,
        format!(
            "max H-norm difference {worst:.6e} (tolerance {tol:.1e}) at t = {:?}",
            rows.iter().map(|r| r.0).collect::<Vec<_>>()
        ),
    );
    Ok(())
}

pub const BLOCK_REL_TOL: f64 = 1e-10;
pub const DISSIPATIVITY_REL_TOL: f64 = 1e-10;

/// Largest `|Re⟨T̃V,V⟩_H + (B̃v₂,v₂)| / (‖T̃V‖_H ‖V‖_H)` over seeded random `V`.
pub fn dissipativity_defect(shifted: &ShiftedSystem, seed: u64, samples: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shifted.dim();
    (0..samples)
        .map(|_| {
            let v: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let (lhs, rhs) = shifted.dissipation(&v);
            let scale = shifted.energy_norm(&shifted.apply_generator(&v)) * shifted.energy_norm(&v);
            if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale }
        })
        .fold(0.0, f64::max)
}

fn resolvent_stage(s: &mut Session, st: &Setup) -> Result<()> {
    let xis = xi_grid(s.cfg.scan.xi_decades, s.cfg.scan.per_decade)?;
    let scan = ScanResult::run(&st.shifted, &xis)?;
    s.write_with(Format::Csv, "scan.csv", |w| scan.write_csv(w))?;
    let dev = scan.max_block_deviation();
    s.check(
        "block_resolvent_formula",
        "Eq. (13)",
        dev <= BLOCK_REL_TOL,
        format!(
            "max relative deviation {dev:.6e} in energy coordinates ({:.6e} in original coordinates) over {} samples",
            scan.max_raw_block_deviation(),
            xis.len()
        ),
    );
    for p in scan.plateaus() {
        let paper_ref = match p.name {
            "q_a" => "Lemma 7(a)",
            "q_b" => "Lemma 7(b)",
            "q_c" => "Lemma 7(c)",
            "q_d" => "Lemma 7(d)",
            _ => "Eq. (12)",
        };
        s.check(
            &format!("plateau_{}", p.name),
            paper_ref,
            p.passed,
            format!(
                "sup {:.6e}; top decade max {:.6e} vs previous decade max {:.6e}",
                p.sup, p.upper_decade_max, p.lower_decade_max
            ),
        );
    }
    let defect = dissipativity_defect(&st.shifted, s.seed, s.cfg.verify.dissipativity_samples);
    s.check(
        "dissipativity_identity",
        "Theorem 6",
        defect <= DISSIPATIVITY_REL_TOL,
        format!("max relative defect {defect:.6e} over {} random states", s.cfg.verify.dissipativity_samples),
    );
    Ok(())
}

fn surrogate_stage(s: &mut Session) -> Result<()> {
    let suite = index_equality_suite(s.seed, s.cfg.verify.surrogates, s.cfg.verify.surrogate_max_n)?;
    s.check(
        "index_equality_random_surrogates",
        "Lemma 3",
        suite.mismatches.is_empty(),
        format!(
            "{} surrogates with n <= {}, {} mismatches {:?}",
            suite.trials,
            s.cfg.verify.surrogate_max_n,
            suite.mismatches.len(),
            &suite.mismatches[..suite.mismatches.len().min(5)]
        ),
    );
    Ok(())
}
