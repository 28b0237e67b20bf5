//! Independent checks of the built-in problem data: the source terms satisfy
//! the PDE, the velocity transports the level set, and the Dziuk surface
//! follows the flow of its velocity field.

use evosurf::problems::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n < 1.0 {
            return v.map(|c| c / n);
        }
    }
}

fn radius(t: f64) -> f64 {
    1.5 * (-t / 2.0).exp()
}

/// `u_dot + div_Gamma(w) u - Delta_Gamma u` by finite differences of the
/// normal extension. On a sphere the ambient Laplacian of the normal extension
/// equals the Laplace-Beltrami operator on the surface.
fn pde_residual(p: &Problem, x: &[f64; 3], t: f64) -> f64 {
    let ue = |y: &[f64; 3], s: f64| p.extended_solution(y, s).unwrap();
    let d = 1e-4;
    // material derivative along radial trajectories
    let along = |s: f64| {
        let scale = radius(s) / radius(t);
        ue(&x.map(|c| c * scale), s)
    };
    let u_dot = (along(t + d) - along(t - d)) / (2.0 * d);
    let mut lap = 0.0;
    for a in 0..3 {
        let mut xp = *x;
        let mut xm = *x;
        xp[a] += d;
        xm[a] -= d;
        lap += (ue(&xp, t) - 2.0 * ue(x, t) + ue(&xm, t)) / (d * d);
    }
    let n = x.map(|c| c / radius(t));
    let c = p.surface_coefficients(x, t, &n).unwrap();
    u_dot + c.div_gamma_w * ue(x, t) - p.nu_d * lap
}

type Problem = ProblemDefinition<f64>;

#[test]
fn shrinking_sphere_source_solves_the_pde() {
    let p: Problem = builtin_shrinking_sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let t = rng.gen_range(0.05..0.95);
        let x = unit_vector(&mut rng).map(|c| c * radius(t));
        let n = x.map(|c| c / radius(t));
        let c = p.surface_coefficients(&x, t, &n).unwrap();
        let f = p.source_value(&x, t, c.alpha);
        let r = pde_residual(&p, &x, t);
        assert!((f - r).abs() < 1e-4 * (1.0 + f.abs()), "f = {f}, residual = {r}");
    }
}

#[test]
fn exponential_variant_has_zero_residual() {
    let p: Problem = builtin_shrinking_sphere_exp();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let t = rng.gen_range(0.05..0.95);
        let x = unit_vector(&mut rng).map(|c| c * radius(t));
        assert!(pde_residual(&p, &x, t).abs() < 1e-4);
        assert!(p.has_zero_source());
    }
}

#[test]
fn shrinking_sphere_coefficients_match_closed_forms() {
    let p: Problem = builtin_shrinking_sphere();
    let t = 0.3;
    let x = [radius(t), 0.0, 0.0];
    let c = p.surface_coefficients(&x, t, &[1.0, 0.0, 0.0]).unwrap();
    assert!((c.div_gamma_w + 1.0).abs() < 1e-12);
    assert!((c.alpha + 1.0).abs() < 1e-12);
    let wn = -0.75 * (-t / 2.0).exp();
    assert!((c.beta - 1.0 / (1.0 + wn * wn).sqrt()).abs() < 1e-12);
    assert!(((p.phi)(&x, t)).abs() < 1e-12);
}

/// `phi_t + w . grad phi = 0` on the zero level.
fn transport_residual(p: &Problem, x: &[f64; 3], t: f64) -> f64 {
    let d = 1e-5;
    let phi_t = ((p.phi)(x, t + d) - (p.phi)(x, t - d)) / (2.0 * d);
    let w = (p.velocity)(x, t).unwrap();
    let mut wg = 0.0;
    let mut g2 = 0.0;
    for a in 0..3 {
        let mut xp = *x;
        let mut xm = *x;
        xp[a] += d;
        xm[a] -= d;
        let g = ((p.phi)(&xp, t) - (p.phi)(&xm, t)) / (2.0 * d);
        wg += w[a] * g;
        g2 += g * g;
    }
    (phi_t + wg) / g2.sqrt()
}

fn rk4(p: &Problem, mut x: [f64; 3], t0: f64, t1: f64, steps: usize) -> [f64; 3] {
    let h = (t1 - t0) / steps as f64;
    let f = |y: &[f64; 3], s: f64| (p.velocity)(y, s).unwrap();
    let mut t = t0;
    for _ in 0..steps {
        let k1 = f(&x, t);
        let y2: [f64; 3] = std::array::from_fn(|a| x[a] + 0.5 * h * k1[a]);
        let k2 = f(&y2, t + 0.5 * h);
        let y3: [f64; 3] = std::array::from_fn(|a| x[a] + 0.5 * h * k2[a]);
        let k3 = f(&y3, t + 0.5 * h);
        let y4: [f64; 3] = std::array::from_fn(|a| x[a] + h * k3[a]);
        let k4 = f(&y4, t + h);
        x = std::array::from_fn(|a| x[a] + h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]));
        t += h;
    }
    x
}

/// A point of `Gamma(0)` found by bisection along a ray from the origin.
fn dziuk_surface_point(dir: &[f64; 3]) -> [f64; 3] {
    let (mut lo, mut hi) = (0.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dziuk_initial_level_set(&dir.map(|c| c * mid)) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    dir.map(|c| c * 0.5 * (lo + hi))
}

#[test]
fn dziuk_surface_follows_its_velocity_field() {
    let p: Problem = builtin_dziuk_moving();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let x0 = dziuk_surface_point(&unit_vector(&mut rng));
        let x8 = rk4(&p, x0, 0.0, 8.0, 4000);
        assert!((p.phi)(&x8, 8.0).abs() < 1e-9, "phi = {}", (p.phi)(&x8, 8.0));
        let back = dziuk_inverse_flow(&x8, 8.0);
        for a in 0..3 {
            assert!((back[a] - x0[a]).abs() < 1e-9);
        }
        let t = rng.gen_range(0.0..8.0);
        let xt = rk4(&p, x0, 0.0, t, 2000);
        assert!(transport_residual(&p, &xt, t).abs() < 1e-6);
    }
}

#[test]
fn dziuk_surface_stays_in_its_box() {
    let p: Problem = builtin_dziuk_moving();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (lo, hi) = (p.default_box.lo, p.default_box.hi);
    for _ in 0..200 {
        let x0 = dziuk_surface_point(&unit_vector(&mut rng));
        let mut x = x0;
        for k in 0..80 {
            x = rk4(&p, x, 0.1 * k as f64, 0.1 * (k + 1) as f64, 20);
            for a in 0..3 {
                assert!(x[a] > lo[a] + 0.25 && x[a] < hi[a] - 0.25, "{x:?}");
            }
        }
    }
}

#[test]
fn sphere_transport_and_expanding_divergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shrink: Problem = builtin_shrinking_sphere();
    let grow: Problem = expanding_sphere();
    for _ in 0..10 {
        let dir = unit_vector(&mut rng);
        let t = rng.gen_range(0.0..0.5);
        let xs = dir.map(|c| c * radius(t));
        assert!(transport_residual(&shrink, &xs, t).abs() < 1e-6);
        let xg = dir.map(|c| c * 1.5 * (t / 2.0).exp());
        assert!(transport_residual(&grow, &xg, t).abs() < 1e-6);
        let c = grow.surface_coefficients(&xg, t, &dir).unwrap();
        assert!((c.div_gamma_w - 1.0).abs() < 1e-12);
        assert!(c.alpha - 0.5 * c.div_gamma_w > 0.0);
    }
}
