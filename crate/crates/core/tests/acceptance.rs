//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use faer::Mat;
use num_complex::Complex64;
use pencilbeam::counts::{accumulation_report, bargmann_check, kappa1, nu_t, schrodinger_matrix, schrodinger_nu};
use pencilbeam::evolution::{bump, evolve, laplace_solution, QuadratureParams};
use pencilbeam::harness::circle_deviation;
use pencilbeam::inertia::inertia_by_eigenvalues;
use pencilbeam::pencil::{build_shifted, compute_spectrum, ShiftedSystem, DEFAULT_REAL_TOLERANCE};
use pencilbeam::regions::{localization_report, RegionSpec, RingConvention};
use pencilbeam::resolvent::{default_xi_grid, resolvent_12_scan, ScanResult};
use pencilbeam::surrogate::{index_equality_suite, SurrogateGenerator};
use pencilbeam::{assemble_operators, Grid, OperatorSet, Profile, Result};

const CIRCLE_TOL: f64 = 1e-8;
const CONTRACTION_TOL: f64 = 1e-12;
const ENERGY_BOUND_TOL: f64 = 1e-10;
const LAPLACE_BEAM_TOL: f64 = 1e-3;
const LAPLACE_SCALAR_TOL: f64 = 1e-4;
const BLOCK_TOL: f64 = 1e-10;
const PLATEAU_GROWTH: f64 = 1.05;

struct Outcome {
    passed: bool,
    detail: String,
}

fn beam(alpha: f64, length: f64, n: usize, g: &Profile, beta: &Profile) -> Result<OperatorSet> {
    assemble_operators(alpha, Grid::new(length, n)?, g, beta)
}

fn shifted(ops: &OperatorSet) -> Result<ShiftedSystem> {
    build_shifted(ops, &compute_spectrum(ops, DEFAULT_REAL_TOLERANCE)?)
}

fn within(start: Instant, limit: Duration) -> (bool, Duration) {
    let e = start.elapsed();
    (e < limit, e)
}

fn circle_law() -> Result<Outcome> {
    let start = Instant::now();
    let mut passed = true;
    let mut parts = Vec::new();
    for alpha in [0.5, 1.0, 2.0] {
        let ops = beam(alpha, 10.0, 300, &Profile::Zero, &Profile::Zero)?;
        let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE)?;
        let dev = circle_deviation(&s, alpha);
        let max_real = s.real().fold(f64::NEG_INFINITY, f64::max);
        let ok = dev <= CIRCLE_TOL / alpha && max_real <= 0.0 && s.nonreal().count() > 0;
        passed &= ok;
        parts.push(format!("alpha={alpha}: circle dev {dev:.2e}, max real {max_real:.3e}"));
    }
    let (fast, took) = within(start, Duration::from_secs(30));
    parts.push(format!("{took:.1?}"));
    Ok(Outcome {
        passed: passed && fast,
        detail: parts.join("; "),
    })
}

fn enclosures() -> Result<Outcome> {
    let pos = beam(1.0, 10.0, 300, &Profile::square_well(1.0, 0.0, 1.0), &Profile::Zero)?;
    let sp = compute_spectrum(&pos, DEFAULT_REAL_TOLERANCE)?;
    let rp = localization_report(&sp, &RegionSpec::from_operators(&pos, RingConvention::default()));
    let outside = rp.violations().len();
    let outside_d = rp.rows.iter().filter(|r| !r.is_real && !r.in_d).count();

    let neg = beam(1.0, 10.0, 300, &Profile::square_well(-1.0, 0.0, 1.0), &Profile::constant(0.3, 0.0, 10.0))?;
    assert_eq!(neg.constants.b_plus, 0.3);
    let sn = compute_spectrum(&neg, DEFAULT_REAL_TOLERANCE)?;
    let rn = localization_report(&sn, &RegionSpec::from_operators(&neg, RingConvention::default()));
    let in_dp = rn.rows.iter().filter(|r| !r.is_real && r.in_d_prime == Some(true)).count();

    let passed = outside == 0
        && rp.all_nonreal_in_d == Some(true)
        && rn.no_nonreal_in_d_prime == Some(true)
        && rp.nonreal_count > 0
        && rn.nonreal_count > 0;
    Ok(Outcome {
        passed,
        detail: format!(
            "+well: {outside}/{} outside Pi-∩M∩R, {outside_d} outside D; -well with b+=0.3: {in_dp}/{} inside D'",
            rp.nonreal_count, rn.nonreal_count
        ),
    })
}

fn index_equality() -> Result<Outcome> {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut family = Vec::new();
    for height in [1.0, 5.0, 10.0, 30.0, 100.0, -1.0, -5.0] {
        let ops = beam(1.0, 8.0, 200, &Profile::square_well(height, 0.0, 1.0), &Profile::Zero)?;
        let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE)?;
        let k = kappa1(&s);
        let nu = nu_t(&ops)?;
        let dense = inertia_by_eigenvalues(&ops.stiffness_operator())?.negative;
        if k.count != nu || nu != dense || !k.nonreal_violations.is_empty() {
            mismatches.push(height);
        }
        family.push(format!("{height}:{}", k.count));
    }
    let suite = index_equality_suite(20240601, 200, 30)?;
    let unstable = suite.nu_values.iter().filter(|&&v| v > 0).count();
    let (fast, took) = within(start, Duration::from_secs(60));
    Ok(Outcome {
        passed: mismatches.is_empty() && suite.mismatches.is_empty() && fast,
        detail: format!(
            "beam kappa1 by height [{}], mismatches {mismatches:?}; surrogates 200 (nu>0 in {unstable}), mismatches {}; {took:.1?}",
            family.join(", "),
            suite.mismatches.len()
        ),
    })
}

/// Bound states of a half-line well of height `c` and width 1: `#{m ≥ 1 : (m − ½)π < √c}`.
fn well_threshold(c: f64) -> usize {
    (1..100).filter(|&m| (m as f64 - 0.5) * PI < c.sqrt()).count()
}

fn schrodinger_bracketing() -> Result<Outcome> {
    let grid = Grid::new(8.0, 400)?;
    let mut passed = true;
    let mut parts = Vec::new();
    for height in [1.0, 5.0, 10.0, 30.0, 100.0] {
        let g = Profile::square_well(height, 0.0, 1.0);
        let ops = assemble_operators(1.0, grid, &g, &Profile::Zero)?;
        let t = nu_t(&ops)?;
        let s = schrodinger_nu(&g, &grid)?;
        let dense = inertia_by_eigenvalues(&schrodinger_matrix(&g, &grid))?.negative;
        passed &= t <= s && s <= t + 1 && s == dense;
        if height == 10.0 || height == 30.0 {
            let expected = if height == 10.0 { 1 } else { 2 };
            passed &= s == expected && well_threshold(height) == expected;
        }
        parts.push(format!("h={height}: nu(T)={t} nu(S)={s}"));
    }
    Ok(Outcome {
        passed,
        detail: parts.join(", "),
    })
}

fn bargmann() -> Result<Outcome> {
    let g = Profile::square_well(1.0, 0.0, 1.0);
    let b = bargmann_check(&g);
    let ops = beam(1.0, 8.0, 400, &g, &Profile::Zero)?;
    let nu = nu_t(&ops)?;
    Ok(Outcome {
        passed: b.premise_max == 0.25 && b.premise_holds && b.bound == 0.5 && nu == 0,
        detail: format!("premise max {}, bound {}, nu(T) = {nu}", b.premise_max, b.bound),
    })
}

fn energy_contraction() -> Result<Outcome> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, height) in [("-well(1)", -1.0), ("+well(10)", 10.0)] {
        let ops = beam(1.0, 10.0, 100, &Profile::square_well(height, 0.0, 1.0), &Profile::constant(0.3, 0.0, 10.0))?;
        let sh = shifted(&ops)?;
        let grid = ops.grid.unwrap();
        let psi0 = bump(&grid, 1.0);
        let psi1: Vec<f64> = bump(&grid, 0.5).iter().map(|x| -x).collect();
        let traj = evolve(&sh, &psi0, &psi1, 10.0, 1e-3)?;
        let ok = traj.len() == 10_001
            && traj.shifted_energies[0] > 0.0
            && traj.shifted_energy_nonincreasing(CONTRACTION_TOL)
            && traj.energy_bound_holds(ENERGY_BOUND_TOL);
        passed &= ok;
        parts.push(format!(
            "{label}: k0={:.3}, max step growth {:.2e}, max E/bound {:.6}",
            sh.k0,
            traj.max_shifted_energy_growth(),
            traj.max_energy_bound_ratio()
        ));
    }
    Ok(Outcome {
        passed,
        detail: parts.join("; "),
    })
}

/// Outside the criterion: the printed energy bound against a strongly unstable beam.
fn energy_bound_strong_instability() -> Result<String> {
    let ops = beam(1.0, 10.0, 100, &Profile::square_well(100.0, 0.0, 1.0), &Profile::constant(0.3, 0.0, 10.0))?;
    let sh = shifted(&ops)?;
    let grid = ops.grid.unwrap();
    let traj = evolve(&sh, &bump(&grid, 1.0), &vec![0.0; 100], 10.0, 1e-3)?;
    Ok(format!(
        "g = square_well(100): max Re lambda = {:.3}, max E/(exp(k0 t) E0) = {:.3e}, contraction growth {:.2e}",
        sh.k0 - 1.0,
        traj.max_energy_bound_ratio(),
        traj.max_shifted_energy_growth()
    ))
}

fn scalar_closed_form(t: f64) -> f64 {
    let w = 3f64.sqrt() / 2.0;
    (-t / 2.0).exp() * ((w * t).cos() + (w * t).sin() / 3f64.sqrt())
}

fn laplace_oracle() -> Result<Outcome> {
    let start = Instant::now();
    let one = |v: f64| Mat::from_fn(1, 1, |_, _| v);
    let scalar = OperatorSet::from_matrices(1.0, one(1.0), one(0.0), one(0.0))?;
    let ss = shifted(&scalar)?;
    let q = laplace_solution(&ss, &[1.0], &[0.0], 1.0, QuadratureParams::default())?;
    let scalar_laplace = (q.v1[0] - scalar_closed_form(1.0) * (-ss.k0).exp()).abs();
    let traj = evolve(&ss, &[1.0], &[0.0], 5.0, 1e-3)?;
    let scalar_step = traj
        .times
        .iter()
        .zip(&traj.u)
        .map(|(t, u)| (u[0] - scalar_closed_form(*t)).abs())
        .fold(0.0, f64::max);

    let ops = beam(1.0, 10.0, 50, &Profile::square_well(1.0, 0.0, 1.0), &Profile::constant(0.3, 0.0, 10.0))?;
    let sh = shifted(&ops)?;
    let grid = ops.grid.unwrap();
    let psi0 = bump(&grid, 1.0);
    let psi1 = vec![0.0; 50];
    let traj = evolve(&sh, &psi0, &psi1, 1.0, 1e-3)?;
    let mut diffs = Vec::new();
    for t in [0.5, 1.0] {
        let k = traj.index_of(t);
        let stepped = traj.shifted_state(k);
        let lap = laplace_solution(&sh, &psi0, &psi1, traj.times[k], QuadratureParams::default())?;
        let d: Vec<f64> = stepped.iter().zip(lap.state()).map(|(a, b)| a - b).collect();
        diffs.push(sh.energy_norm(&d));
    }
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    let (fast, took) = within(start, Duration::from_secs(120));
    Ok(Outcome {
        passed: worst <= LAPLACE_BEAM_TOL && scalar_laplace <= LAPLACE_SCALAR_TOL && scalar_step <= LAPLACE_SCALAR_TOL && fast,
        detail: format!(
            "beam n=50 H-norm diff at t=0.5,1.0: {:.2e}, {:.2e}; scalar Laplace err {scalar_laplace:.2e}, stepper err {scalar_step:.2e}; {took:.1?}",
            diffs[0], diffs[1]
        ),
    })
}

fn resolvent_decay() -> Result<Outcome> {
    let ops = beam(1.0, 10.0, 100, &Profile::square_well(10.0, 0.0, 1.0), &Profile::constant(0.3, 0.0, 10.0))?;
    let sh = shifted(&ops)?;
    let scan = ScanResult::run(&sh, &default_xi_grid())?;
    let surrogate = SurrogateGenerator::new(5).sample(12, 1.0)?;
    let ssur = shifted(&surrogate)?;
    let sur_dev = resolvent_12_scan(&ssur, &[Complex64::new(1.0, 1.0), Complex64::new(0.01, 0.0)])?
        .iter()
        .map(|s| s.block_deviation)
        .fold(0.0, f64::max);
    let plateaus = scan.plateaus();
    let failing: Vec<&str> = plateaus.iter().filter(|p| p.upper_decade_max > PLATEAU_GROWTH * p.lower_decade_max).map(|p| p.name).collect();
    let dev = scan.max_block_deviation();
    Ok(Outcome {
        passed: dev <= BLOCK_TOL && sur_dev <= BLOCK_TOL && failing.is_empty(),
        detail: format!(
            "block deviation {dev:.2e} over {} samples (original coordinates {:.2e}), surrogate {sur_dev:.2e}; plateau ratios [{}], failing {failing:?}",
            scan.resolvent.len(),
            scan.max_raw_block_deviation(),
            plateaus
                .iter()
                .map(|p| format!("{} {:.3}", p.name, p.upper_decade_max / p.lower_decade_max))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    })
}

fn refinement() -> Result<Outcome> {
    let alpha = 1.0;
    let floor = CIRCLE_TOL / alpha;
    let mut dists = Vec::new();
    for (l, n) in [(5.0, 50), (10.0, 100), (20.0, 200), (40.0, 400)] {
        let ops = beam(alpha, l, n, &Profile::Zero, &Profile::Zero)?;
        let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE)?;
        let r = localization_report(&s, &RegionSpec::from_operators(&ops, RingConvention::default()));
        dists.push(r.max_dist_oj_near_circle);
    }
    let dist_ok = dists.windows(2).all(|w| w[1] <= w[0].max(floor));

    let g = Profile::square_well(10.0, 0.0, 1.0);
    let mut counts = Vec::new();
    for n in [50, 100, 200, 400] {
        let ops = beam(alpha, 10.0, n, &g, &Profile::Zero)?;
        let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE)?;
        let acc = accumulation_report(&ops, &s);
        assert!(acc.accumulation_expected);
        counts.push(acc.right_of_pole);
    }
    let counts_ok = counts.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b >= a));
    Ok(Outcome {
        passed: dist_ok && counts_ok,
        detail: format!(
            "g=0 near-circle dist to O∪J {:?} (floor {floor:.0e}); square_well(10) right-of-pole counts under n-doubling {counts:?}",
            dists.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()
        ),
    })
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 9] = [
        ("circle law", circle_law),
        ("enclosures", enclosures),
        ("index equality", index_equality),
        ("Schrodinger bracketing", schrodinger_bracketing),
        ("Bargmann bound", bargmann),
        ("energy contraction", energy_contraction),
        ("Laplace oracle", laplace_oracle),
        ("resolvent decay", resolvent_decay),
        ("refinement consistency", refinement),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = f().unwrap_or_else(|e| Outcome {
            passed: false,
            detail: format!("error: {e}"),
        });
        if !outcome.passed {
            failures += 1;
        }
        println!(
            "criterion {} ({name}): {} | {}",
            i + 1,
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    match energy_bound_strong_instability() {
        Ok(note) => println!("note (not a criterion): {note}"),
        Err(e) => println!("note (not a criterion): error {e}"),
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
