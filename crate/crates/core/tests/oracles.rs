//! Numerical results checked against independent references: classical rate
//! equations, the matrix exponential, the open-chain band and Boltzmann weights.

use approx::assert_relative_eq;
use nalgebra::{DMatrix, Matrix2, SVD};
use num_complex::Complex64;

use qthermo_core::chain::{chain_system, gibbs_state, solve_chain, ChainSpec};
use qthermo_core::davies::{bose_occupation, evolve, DaviesModel, DEFAULT_FREQUENCY_TOL};
use qthermo_core::operator::{eigh, vectorize, DensityMatrix};
use qthermo_core::three_level::{
    delta_ss, diagnostics, lambda_system, overdamped_check, thermophoretic_force, vee_system,
    Configuration, LevelPopulations, OverdampedReport, OverdampedWindow, ThreeLevelParams,
};

const EPS: f64 = DEFAULT_FREQUENCY_TOL;

/// Classical master-equation generator for populations `(P_1, P_2, P_shared)`.
fn rate_matrix(config: Configuration, gamma: [f64; 2], n: [f64; 2]) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(3, 3);
    for k in 0..2 {
        // (outer level k -> shared level, shared level -> outer level k)
        let (up, down) = match config {
            Configuration::Lambda => (gamma[k] * n[k], gamma[k] * (n[k] + 1.0)),
            Configuration::Vee => (gamma[k] * (n[k] + 1.0), gamma[k] * n[k]),
        };
        w[(2, k)] += up;
        w[(k, k)] -= up;
        w[(k, 2)] += down;
        w[(2, 2)] -= down;
    }
    w
}

fn rate_null_vector(w: &DMatrix<f64>) -> [f64; 3] {
    let svd = SVD::new(w.clone(), false, true);
    let v_t = svd.v_t.unwrap();
    let idx = (0..3)
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .unwrap();
    let row: Vec<f64> = v_t.row(idx).iter().copied().collect();
    let s: f64 = row.iter().sum();
    [row[0] / s, row[1] / s, row[2] / s]
}

#[test]
fn three_level_steady_states_match_rate_equations() {
    for config in [Configuration::Lambda, Configuration::Vee] {
        for (omega, gamma, temps) in [
            ([1.0, 1.0], [1.0, 1.0], [2.0, 0.7]),
            ([1.0, 1.7], [0.3, 1.1], [0.4, 3.0]),
            ([2.5, 0.8], [1.0, 0.2], [1.5, 1.5]),
        ] {
            let p = ThreeLevelParams::new(config, omega, gamma, temps, 1.0).unwrap();
            let system = match config {
                Configuration::Lambda => lambda_system(&p).unwrap(),
                Configuration::Vee => vee_system(&p).unwrap(),
            };
            let rho = DaviesModel::new(system, EPS)
                .unwrap()
                .steady_state()
                .unwrap();
            let got = LevelPopulations::from_state(&rho, config).unwrap();
            let n = p.occupations().unwrap();
            let want = rate_null_vector(&rate_matrix(config, gamma, n));
            assert_relative_eq!(got.p1, want[0], epsilon = 1e-10);
            assert_relative_eq!(got.p2, want[1], epsilon = 1e-10);
            assert_relative_eq!(got.pe, want[2], epsilon = 1e-10);
        }
    }
}

#[test]
fn lambda_reference_point() {
    // n1 = 2, n2 = 1, Gamma = d = 1: nbar = 3/2, dn = -1, m* = 1/8
    let p =
        ThreeLevelParams::from_occupations(Configuration::Lambda, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
    let diag = diagnostics(&p).unwrap();
    assert_relative_eq!(diag.delta_ss.unwrap(), 1.0 / 9.0, epsilon = 1e-12);
    assert_relative_eq!(diag.force, 0.0625, epsilon = 1e-12);
    assert_relative_eq!(diag.omega_sq, 9.0, epsilon = 1e-12);
    assert_relative_eq!(diag.effective_mass, 0.125, epsilon = 1e-15);
    let vee = p.with_configuration(Configuration::Vee);
    assert_relative_eq!(
        thermophoretic_force(&vee).unwrap(),
        -0.0625,
        epsilon = 1e-12
    );
    // (3 nbar + 1)(nbar + 1) - 3/4 = 13
    assert_relative_eq!(delta_ss(&vee).unwrap(), -1.0 / 13.0, epsilon = 1e-12);
}

#[test]
fn evolution_matches_matrix_exponential() {
    let p = ThreeLevelParams::new(
        Configuration::Lambda,
        [1.0, 1.3],
        [1.0, 0.6],
        [1.2, 0.3],
        1.0,
    )
    .unwrap();
    let model = DaviesModel::new(lambda_system(&p).unwrap(), EPS).unwrap();
    let rho0 = DensityMatrix::pure(3, 0).unwrap();
    let times = [0.5, 1.0, 3.0];
    let traj = evolve(model.liouvillian(), &rho0, &times).unwrap();
    for (t, rho) in times.iter().zip(&traj.states) {
        let propagator = (model.liouvillian().matrix() * Complex64::new(*t, 0.0)).exp();
        let exact = propagator * vectorize(rho0.matrix());
        let diff = (vectorize(rho.matrix()) - exact).camax();
        assert!(diff < 1e-9, "t = {t}: {diff:e}");
    }
}

#[test]
fn chain_spectrum_is_open_band_plus_grounds() {
    let (n, h, g) = (7, 1.0, 0.45);
    let spec = ChainSpec::linear(n, h, g, 0.5, 0.5).unwrap();
    let eig = eigh(&spec.hamiltonian());
    let mut want: Vec<f64> = (1..=n)
        .map(|m| h + 2.0 * g * (m as f64 * std::f64::consts::PI / (n + 1) as f64).cos())
        .chain(std::iter::repeat_n(0.0, n))
        .collect();
    want.sort_by(f64::total_cmp);
    for (a, b) in eig.eigenvalues.iter().zip(&want) {
        assert_relative_eq!(*a, *b, epsilon = 1e-12);
    }
}

#[test]
fn uniform_temperature_relaxes_to_boltzmann_weights() {
    let p = ThreeLevelParams::new(
        Configuration::Lambda,
        [1.0, 1.6],
        [1.0, 0.4],
        [0.7, 0.7],
        1.0,
    )
    .unwrap();
    let rho = DaviesModel::new(lambda_system(&p).unwrap(), EPS)
        .unwrap()
        .steady_state()
        .unwrap();
    let e = p.energies();
    let z: f64 = e.iter().map(|x| (-x / 0.7).exp()).sum();
    for (i, energy) in e.iter().enumerate() {
        assert_relative_eq!(
            rho.population(i),
            (-energy / 0.7).exp() / z,
            epsilon = 1e-12
        );
    }
}

#[test]
fn uniform_chain_matches_independent_gibbs_state() {
    let spec = ChainSpec::linear(4, 1.0, 0.6, 0.35, 0.35).unwrap();
    let sol = solve_chain(&spec, EPS).unwrap();
    // exp(-H/T) from the matrix exponential rather than the eigenbasis
    let h = spec.hamiltonian().into_matrix();
    let w = (h * Complex64::new(-1.0 / 0.35, 0.0)).exp();
    let reference = DensityMatrix::new(&w / w.trace()).unwrap();
    assert!(sol.state.trace_distance(&reference).unwrap() < 1e-10);
    let via_module = gibbs_state(&spec.hamiltonian(), 0.35).unwrap();
    assert!(via_module.trace_distance(&reference).unwrap() < 1e-12);
}

#[test]
fn two_site_chain_eigenstates() {
    // single-excitation block: (|e1> +- |e2>)/sqrt 2 at h +- g
    let spec = ChainSpec::linear(2, 1.0, 0.3, 0.5, 0.2).unwrap();
    let eig = eigh(&spec.hamiltonian());
    assert_relative_eq!(eig.eigenvalues[2], 0.7, epsilon = 1e-14);
    assert_relative_eq!(eig.eigenvalues[3], 1.3, epsilon = 1e-14);
    let top = eig.eigenvectors.column(3);
    assert_relative_eq!(
        top[1].norm(),
        std::f64::consts::FRAC_1_SQRT_2,
        epsilon = 1e-12
    );
    assert_relative_eq!(
        top[3].norm(),
        std::f64::consts::FRAC_1_SQRT_2,
        epsilon = 1e-12
    );
    assert!(chain_system(&spec).is_ok());
}

#[test]
fn overdamped_slow_rate_matches_reduced_rate_matrix() {
    let p = ThreeLevelParams::from_occupations(Configuration::Lambda, 1.0, 1.0, 12.0, 10.0, 1.0)
        .unwrap();
    let model = DaviesModel::new(lambda_system(&p).unwrap(), EPS).unwrap();
    let dt = 1e-3;
    let times: Vec<f64> = (0..=2000).map(|i| i as f64 * dt).collect();
    let traj = evolve(
        model.liouvillian(),
        &DensityMatrix::pure(3, 0).unwrap(),
        &times,
    )
    .unwrap();
    let report = overdamped_check(&p, &traj, OverdampedWindow::Full).unwrap();

    // eliminate P_e = 1 - P_1 - P_2 from the rate equations
    let n = p.occupations().unwrap();
    let w = rate_matrix(Configuration::Lambda, [1.0, 1.0], n);
    let reduced = Matrix2::new(
        w[(0, 0)] - w[(0, 2)],
        w[(0, 1)] - w[(0, 2)],
        w[(1, 0)] - w[(1, 2)],
        w[(1, 1)] - w[(1, 2)],
    );
    let eig = reduced.complex_eigenvalues();
    let slow = eig.iter().map(|z| -z.re).fold(f64::INFINITY, f64::min);
    assert_relative_eq!(report.slow_rate, slow, max_relative = 1e-10);
    assert!(report.high_temperature);
}

#[test]
fn bose_occupation_reference_values() {
    // 1 / (e - 1) and 1 / (e^{1/2} - 1)
    assert_relative_eq!(
        bose_occupation(1.0, 1.0).unwrap(),
        0.581_976_706_869_326_4,
        epsilon = 1e-15
    );
    assert_relative_eq!(
        bose_occupation(0.5, 1.0).unwrap(),
        1.541_494_082_536_798,
        epsilon = 1e-14
    );
    assert_eq!(bose_occupation(1.0, 0.0).unwrap(), 0.0);
}

fn overdamped_report(
    n1: f64,
    n2: f64,
    t_max: f64,
    samples: usize,
    window: OverdampedWindow,
) -> qthermo_core::Result<OverdampedReport> {
    let p =
        ThreeLevelParams::from_occupations(Configuration::Lambda, 1.0, 1.0, n1, n2, 1.0).unwrap();
    let model = DaviesModel::new(lambda_system(&p).unwrap(), EPS).unwrap();
    let times: Vec<f64> = (0..samples)
        .map(|i| i as f64 * t_max / (samples - 1) as f64)
        .collect();
    let traj = evolve(
        model.liouvillian(),
        &DensityMatrix::pure(3, 0).unwrap(),
        &times,
    )
    .unwrap();
    overdamped_check(&p, &traj, window)
}

#[test]
fn overdamped_ratio_at_high_temperature() {
    let late = overdamped_report(99.5, 100.5, 0.12, 4001, OverdampedWindow::LateTime).unwrap();
    let full = overdamped_report(99.5, 100.5, 0.12, 4001, OverdampedWindow::Full).unwrap();
    assert!(late.high_temperature);
    assert!((0.9..=1.1).contains(&late.mean_ratio), "{late:?}");
    assert!(late.spread < full.spread);
    // single slow mode: X''/X' -> -slow_rate at late times
    assert_relative_eq!(late.mean_ratio, late.slow_rate / 100.0, max_relative = 1e-4);
}

#[test]
fn overdamped_ratio_at_low_temperature() {
    // late times still follow the slow mode; the transient is where the reduction fails
    let full = overdamped_report(0.05, 0.15, 120.0, 4001, OverdampedWindow::Full).unwrap();
    let late = overdamped_report(0.05, 0.15, 120.0, 4001, OverdampedWindow::LateTime).unwrap();
    assert!(!full.high_temperature);
    assert!(full.spread > 1.0, "{full:?}");
    assert_relative_eq!(late.mean_ratio, late.slow_rate / 0.1, max_relative = 1e-4);
    assert!(matches!(
        overdamped_report(0.05, 0.15, 1.0, 101, OverdampedWindow::LateTime),
        Err(qthermo_core::Error::NotApplicable(_))
    ));
}
