use faer::Mat;
use proptest::prelude::*;

use pencilbeam::counts::{kappa1, nu_t};
use pencilbeam::evolution::{evolve, StateDump};
use pencilbeam::harness::dissipativity_defect;
use pencilbeam::inertia::{inertia, inertia_by_eigenvalues};
use pencilbeam::pencil::{build_shifted, compute_spectrum, DEFAULT_REAL_TOLERANCE};
use pencilbeam::surrogate::SurrogateGenerator;
use pencilbeam::{OperatorSet, Profile};

fn surrogate(seed: u64, max_n: usize) -> OperatorSet {
    SurrogateGenerator::new(seed).sample_any(max_n).unwrap()
}

fn table_profile() -> impl Strategy<Value = Profile> {
    (1usize..6).prop_flat_map(|k| {
        (
            prop::collection::vec(0.01f64..2.0, k),
            prop::collection::vec(-20.0f64..20.0, k),
            0.0f64..1.0,
        )
            .prop_map(|(widths, values, start)| {
                let mut breakpoints = vec![start];
                for w in widths {
                    breakpoints.push(breakpoints.last().unwrap() + w);
                }
                Profile::Table { breakpoints, values }
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectrum_is_conjugate_symmetric(seed in any::<u64>()) {
        let ops = surrogate(seed, 12);
        let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE).unwrap();
        prop_assert_eq!(s.len(), 2 * ops.dim());
        let scale = s.eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for z in &s.eigenvalues {
            let partner = s.eigenvalues.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(partner <= 1e-8 * scale, "no conjugate for {z}");
        }
    }

    #[test]
    fn kappa1_equals_nu_on_surrogates(seed in any::<u64>()) {
        let ops = surrogate(seed, 20);
        let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE).unwrap();
        let k = kappa1(&s);
        prop_assert!(k.nonreal_violations.is_empty());
        prop_assert_eq!(k.count, nu_t(&ops).unwrap());
    }

    #[test]
    fn dissipativity_identity_holds(seed in any::<u64>()) {
        let ops = surrogate(seed, 15);
        let sh = build_shifted(&ops, &compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE).unwrap()).unwrap();
        prop_assert!(dissipativity_defect(&sh, seed, 10) <= 1e-10);
    }

    #[test]
    fn cayley_steps_contract_shifted_energy(seed in any::<u64>(), dt in 1e-3f64..0.5) {
        let ops = surrogate(seed, 10);
        let sh = build_shifted(&ops, &compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE).unwrap()).unwrap();
        let n = ops.dim();
        let psi0: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).sin()).collect();
        let psi1: Vec<f64> = (0..n).map(|i| ((i + 2) as f64).cos()).collect();
        let traj = evolve(&sh, &psi0, &psi1, 50.0 * dt, dt).unwrap();
        prop_assert!(traj.shifted_energy_nonincreasing(1e-12), "growth {}", traj.max_shifted_energy_growth());
    }

    #[test]
    fn ldlt_inertia_matches_eigenvalue_counts(seed in any::<u64>(), shift in -3.0f64..3.0) {
        let ops = surrogate(seed, 25);
        let mut m = ops.stiffness_operator();
        for i in 0..ops.dim() {
            m[(i, i)] -= shift;
        }
        let a = inertia(&m).unwrap();
        let b = inertia_by_eigenvalues(&m).unwrap();
        prop_assert_eq!((a.negative, a.near_zero, a.positive), (b.negative, b.near_zero, b.positive));
    }
}

proptest! {
    #[test]
    fn sign_split_recombines(g in table_profile(), x in 0.0f64..12.0) {
        let (p, m) = (g.positive_part(), g.negative_part());
        prop_assert_eq!(p.value(x) - m.value(x), g.value(x));
        prop_assert_eq!(p.value(x) + m.value(x), g.abs().value(x));
        prop_assert!(p.value(x) >= 0.0 && m.value(x) >= 0.0);
    }

    #[test]
    fn integral_is_additive(g in table_profile(), a in 0.0f64..5.0, b in 0.0f64..5.0, c in 0.0f64..5.0) {
        let mut v = [a, b, c];
        v.sort_by(f64::total_cmp);
        let whole = g.integral(v[0], v[2]);
        let split = g.integral(v[0], v[1]) + g.integral(v[1], v[2]);
        prop_assert!((whole - split).abs() <= 1e-12 * (1.0 + whole.abs()));
        let total = g.integral(0.0, f64::INFINITY);
        prop_assert!((total - g.pieces().iter().map(|p| p.value * (p.end - p.start)).sum::<f64>()).abs() <= 1e-12 * (1.0 + total.abs()));
    }

    #[test]
    fn tail_moment_sup_dominates_samples(g in table_profile()) {
        let g = g.abs();
        let sup = g.tail_moment_sup(0.0);
        let end = g.support_end();
        let sampled = (0..=2000)
            .map(|i| end * i as f64 / 2000.0)
            .map(|x| x * g.integral(x, f64::INFINITY))
            .fold(0.0, f64::max);
        prop_assert!(sup >= sampled - 1e-12 * (1.0 + sampled));
        prop_assert!(sup <= sampled + 1e-3 * (1.0 + sampled));
    }

    #[test]
    fn state_dump_round_trips(n in 0usize..6, rows in prop::collection::vec(prop::collection::vec(any::<f64>(), 13), 0..5)) {
        let dump = StateDump {
            n,
            times: rows.iter().map(|r| r[0]).collect(),
            u: rows.iter().map(|r| r[1..=n].to_vec()).collect(),
            udot: rows.iter().map(|r| r[7..7 + n].to_vec()).collect(),
        };
        let bytes = dump.encode();
        let back = StateDump::decode(&bytes).unwrap();
        prop_assert_eq!(back.encode(), bytes.clone());
        if !bytes.is_empty() {
            prop_assert!(StateDump::decode(&bytes[..bytes.len() - 1]).is_err());
        }
    }

    #[test]
    fn state_dump_decoder_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..128)) {
        let _ = StateDump::decode(&bytes);
    }
}

#[test]
fn scalar_oscillator_matches_frozen_spectrum() {
    // λ² + λ + 1 = 0
    let one = |v: f64| Mat::from_fn(1, 1, |_, _| v);
    let ops = OperatorSet::from_matrices(1.0, one(1.0), one(0.0), one(0.0)).unwrap();
    let s = compute_spectrum(&ops, DEFAULT_REAL_TOLERANCE).unwrap();
    let mut ims: Vec<f64> = s.eigenvalues.iter().map(|z| z.im).collect();
    ims.sort_by(f64::total_cmp);
    for z in &s.eigenvalues {
        assert!((z.re + 0.5).abs() < 1e-14);
    }
    assert!((ims[1] - 0.866_025_403_784_438_6).abs() < 1e-14);
    assert!((ims[0] + ims[1]).abs() < 1e-14);
}
