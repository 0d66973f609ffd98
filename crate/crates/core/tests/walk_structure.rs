use q2ma_core::hamiltonian::{build_ising, build_random_hermitian, build_transverse_ising, Hamiltonian};
use q2ma_core::metropolis::{build_chain, classical_gap, gibbs_distribution, ChainOptions, MetropolisChain};
use q2ma_core::numerics::{matrix_exponential_hermitian, reduced_density_matrix, trace_distance};
use q2ma_core::spectral::{build_kick, EigenSystem, KickKind, KickModel};
use q2ma_core::walk::{decomposition_residual, similarity_check, verify_gap_inequality, WalkOperator, WalkOptions};
use q2ma_core::{ComplexMatrix, Tolerances, C64};

fn tol() -> Tolerances {
    Tolerances::default()
}

struct Case {
    h: Hamiltonian,
    system: EigenSystem,
    kick: KickModel,
    chain: MetropolisChain,
    walk: WalkOperator,
}

fn case(h: Hamiltonian, kind: KickKind, beta: f64) -> Case {
    let system = EigenSystem::new(&h, &tol()).unwrap();
    let kick = build_kick(&system, kind, &tol()).unwrap();
    let chain = build_chain(&system, &kick, beta, ChainOptions::default(), &tol()).unwrap();
    let walk = WalkOperator::new(&system, &kick, &chain, WalkOptions::default(), &tol()).unwrap();
    Case {
        h,
        system,
        kick,
        chain,
        walk,
    }
}

fn cases() -> Vec<Case> {
    vec![
        case(build_ising(2, 1.0, false).unwrap(), KickKind::UniformSpinFlips, 0.5),
        case(build_ising(3, 1.0, true).unwrap(), KickKind::UniformSpinFlips, 1.0),
        case(build_transverse_ising(2, 1.0, 0.7, false).unwrap(), KickKind::UniformFlipsXZ, 1.0),
        case(build_transverse_ising(3, 1.0, 0.4, true).unwrap(), KickKind::UniformFlipsXZ, 2.0),
        case(build_random_hermitian(2, 4, true, 1.0).unwrap(), KickKind::UniformSpinFlips, 0.8),
        case(build_random_hermitian(3, 11, true, 1.0).unwrap(), KickKind::UniformSpinFlips, 1.5),
    ]
}

#[test]
fn reflection_squares_to_identity() {
    for c in cases() {
        let l1 = c.walk.lambda1();
        let d = l1.rows();
        let r = l1.scale_real(2.0).sub(&ComplexMatrix::identity(d));
        assert!(r.matmul(&r).max_abs_diff(&ComplexMatrix::identity(d)) < 1e-9);
    }
}

#[test]
fn restricted_operator_is_symmetric_under_exchange() {
    for c in cases() {
        let b = c.walk.paired_basis();
        let xy = b.adjoint().matmul(&c.walk.u_x().adjoint().matmul(&c.walk.u_y().matmul(b)));
        let yx = b.adjoint().matmul(&c.walk.u_y().adjoint().matmul(&c.walk.u_x().matmul(b)));
        assert!(xy.max_abs_diff(&yx) < 1e-9);
        assert!(xy.max_abs_diff(c.walk.restricted()) < 1e-9);
    }
}

#[test]
fn decomposition_and_similarity_hold() {
    for c in cases() {
        assert!(decomposition_residual(&c.walk, &c.chain) < 1e-9);
        assert!(similarity_check(&c.walk, &c.chain) < 1e-8);
    }
}

#[test]
fn walk_is_unitary_and_fixes_the_cets() {
    for c in cases() {
        assert!(c.walk.w().unitarity_deviation() < 1e-9);
        assert!(c.walk.fixed_point_residual() < 1e-8);
    }
}

#[test]
fn cets_marginal_is_thermal() {
    for c in cases() {
        let beta = c.chain.beta();
        let e = matrix_exponential_hermitian(c.h.matrix(), -beta, &tol()).unwrap();
        let z = e.trace().re;
        let thermal = e.scale_real(1.0 / z);
        let dims = c.walk.space().dims();
        let rho = reduced_density_matrix(c.walk.cets().amplitudes(), &[0], &dims).unwrap();
        assert!(trace_distance(&rho, &thermal, &tol()).unwrap() < 1e-8);
    }
}

#[test]
fn eigenphases_pair_up_and_match_the_chain() {
    for c in cases() {
        let phases = c.walk.eigenphases();
        for &p in phases {
            if p.abs() < 1e-7 || (p.abs() - core::f64::consts::PI).abs() < 1e-7 {
                continue;
            }
            assert!(phases.iter().any(|&q| (q + p).abs() < 1e-9), "unpaired phase {p}");
        }
        for &l in c.chain.eigenvalues() {
            if l > 0.0 && l < 1.0 - 1e-9 {
                let target = 2.0 * l.acos();
                assert!(phases.iter().any(|&q| (q - target).abs() < 1e-7));
                assert!(phases.iter().any(|&q| (q + target).abs() < 1e-7));
            }
        }
    }
}

#[test]
fn phase_gap_bounds_the_classical_gap() {
    for c in cases() {
        let report = verify_gap_inequality(&c.walk, &c.chain, &tol()).unwrap();
        let delta = classical_gap(&c.chain, &tol()).unwrap();
        // Δ_min = 2 arccos(1 − δ) and arccos(1 − δ) ≥ √(2δ).
        assert!((report.delta_min - 2.0 * (1.0 - delta).acos()).abs() < 1e-9);
        if report.all_nonnegative {
            assert!(report.pass);
            assert!(report.ratio >= 1.0 - 1e-9);
        }
    }
}

#[test]
fn coordinates_follow_gibbs_weights() {
    for c in cases() {
        let p = gibbs_distribution(c.system.energies(), c.chain.beta());
        let coords = c.walk.coordinates(c.walk.cets());
        for (z, pi) in coords.iter().zip(&p) {
            assert!((*z - C64::new(pi.sqrt(), 0.0)).norm() < 1e-10);
        }
        assert_eq!(c.kick.labels(), c.walk.space().label_count());
    }
}

#[test]
fn five_qubits_need_the_large_flag() {
    let h = build_ising(5, 1.0, false).unwrap();
    let system = EigenSystem::new(&h, &tol()).unwrap();
    let kick = build_kick(&system, KickKind::SpinFlip { site: 0 }, &tol()).unwrap();
    let chain = build_chain(&system, &kick, 0.0, ChainOptions::default(), &tol()).unwrap();
    let err = WalkOperator::new(&system, &kick, &chain, WalkOptions::default(), &tol()).unwrap_err();
    assert!(matches!(err, q2ma_core::Error::SizeOutOfRange { n: 5, max: 4 }));
}
