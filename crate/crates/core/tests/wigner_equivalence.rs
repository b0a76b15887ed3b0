//! Equivalence of the three routes to the Wigner function: the closed forms,
//! the propagator-convolution quadrature, and Fock-basis reconstruction from
//! the master-equation-evolved density matrix.

use circlestates::oracle::{
    evolve_density, wigner_convolution, wigner_from_density, FockDensity, RefineOpts, StepControl,
};
use circlestates::phasespace::{wigner0, wigner_t, CompactTime, ReservoirParams};
use circlestates::states::{build_fock_vector, SuperpositionSpec};

fn sample_points() -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for i in 0..7 {
        for j in 0..7 {
            pts.push((-4.5 + 1.5 * i as f64, -4.5 + 1.5 * j as f64));
        }
    }
    pts.push((0.07, -0.13));
    pts
}

#[test]
fn initial_wigner_matches_fock_reconstruction() {
    for (n, nc, b, dim) in [(2usize, 8usize, 3.03, 96), (1, 4, 1.5, 48), (0, 2, 1.0, 32)] {
        let spec = SuperpositionSpec::new(n, nc, b).unwrap();
        let rho = FockDensity::from_pure(&build_fock_vector(&spec, dim).unwrap());
        let mut worst = 0.0f64;
        for &(p, q) in &sample_points() {
            worst = worst.max((wigner0(&spec, p, q) - wigner_from_density(&rho, p, q)).abs());
        }
        assert!(worst <= 1e-6, "n={n} N={nc}: max abs diff {worst:e}");
    }
}

#[test]
fn evolved_wigner_matches_kernel_convolution() {
    let spec = SuperpositionSpec::new(1, 4, 1.5).unwrap();
    let res = ReservoirParams::new(1.0, 1.0, 1.0).unwrap();
    let opts = RefineOpts { tol: 1e-8, start_nodes: 64, max_nodes: 512 };
    for &u in &[0.1, 0.5, 0.9] {
        let t = CompactTime::from_u(res.gamma, u).unwrap().time();
        let points = sample_points();
        let conv = wigner_convolution(&spec, &res, t, &points, &opts).unwrap();
        let mut worst = 0.0f64;
        for (&(p, q), &w_ref) in points.iter().zip(&conv) {
            worst = worst.max((wigner_t(&spec, &res, t, p, q) - w_ref).abs());
        }
        assert!(worst <= 1e-6, "u={u}: max abs diff {worst:e}");
    }
}

#[test]
fn evolved_wigner_matches_master_equation() {
    let spec = SuperpositionSpec::new(1, 4, 1.5).unwrap();
    let res = ReservoirParams::new(1.0, 1.0, 1.0).unwrap();
    let rho0 = FockDensity::from_pure(&build_fock_vector(&spec, 56).unwrap());
    for &u in &[0.2, 0.7] {
        let t = CompactTime::from_u(res.gamma, u).unwrap().time();
        let rho = evolve_density(&rho0, &res, t, &StepControl::default()).unwrap();
        let mut worst = 0.0f64;
        for &(p, q) in &sample_points() {
            worst =
                worst.max((wigner_t(&spec, &res, t, p, q) - wigner_from_density(&rho, p, q)).abs());
        }
        assert!(worst <= 1e-5, "u={u}: max abs diff {worst:e}");
    }
}

#[test]
fn nonzero_trap_frequency_rotates_consistently() {
    // ω₀ ≠ γ exercises the rotation bookkeeping across all three routes
    let spec = SuperpositionSpec::new(2, 4, 2.0).unwrap();
    let res = ReservoirParams::new(2.7, 0.8, 0.5).unwrap();
    let t = 0.31;
    let rho0 = FockDensity::from_pure(&build_fock_vector(&spec, 64).unwrap());
    let rho = evolve_density(&rho0, &res, t, &StepControl::default()).unwrap();
    let opts = RefineOpts { tol: 1e-8, start_nodes: 64, max_nodes: 512 };
    let points = vec![(1.9, 0.3), (-0.6, 2.2), (0.0, 0.0), (-2.5, -2.5)];
    let conv = wigner_convolution(&spec, &res, t, &points, &opts).unwrap();
    for (&(p, q), &w_conv) in points.iter().zip(&conv) {
        let w_closed = wigner_t(&spec, &res, t, p, q);
        let w_fock = wigner_from_density(&rho, p, q);
        assert!((w_closed - w_conv).abs() <= 1e-6);
        assert!((w_closed - w_fock).abs() <= 1e-5);
    }
}
