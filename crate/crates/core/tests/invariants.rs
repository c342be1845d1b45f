//! Property checks of the geometric core against independent oracles:
//! a generic high-order integrator, adaptive quadrature of the area form,
//! finite-difference horizontality, and brute-force event scanning.

use heisbill_core::geometry::{
    apply_symmetry, connect, delta_z, flow, hamiltonian, Covector, GeodesicArc, Point3, State,
    SymmetryElement,
};
use heisbill_core::tables::TableSpec;
use heisbill_core::{next_event, run, RunParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_unit_state(rng: &mut ChaCha8Rng, a_max: f64, spread: f64) -> State {
    let angle = rng.gen_range(0.0..2.0 * PI);
    State::new(
        Point3::new(
            rng.gen_range(-spread..spread),
            rng.gen_range(-spread..spread),
            rng.gen_range(-spread..spread),
        ),
        Covector::new(rng.gen_range(-a_max..a_max), angle.cos(), angle.sin()),
    )
    .unwrap()
}

/// Classic fixed-step fourth-order integration of the cogeodesic field
/// (x, y, z, b, c; a constant): ẋ = b, ẏ = c, ż = ½(xc − yb),
/// ḃ = −ac, ċ = ab.
fn rk4_flow(s: &State, t: f64, steps: usize) -> State {
    let a = s.momentum.a;
    let mut y = [
        s.point.x,
        s.point.y,
        s.point.z,
        s.momentum.b,
        s.momentum.c,
    ];
    let h = t / steps as f64;
    let deriv = |y: &[f64; 5]| {
        [
            y[3],
            y[4],
            0.5 * (y[0] * y[4] - y[1] * y[3]),
            -a * y[4],
            a * y[3],
        ]
    };
    let add = |y: &[f64; 5], k: &[f64; 5], w: f64| {
        let mut out = *y;
        for i in 0..5 {
            out[i] += w * k[i];
        }
        out
    };
    for _ in 0..steps {
        let k1 = deriv(&y);
        let k2 = deriv(&add(&y, &k1, 0.5 * h));
        let k3 = deriv(&add(&y, &k2, 0.5 * h));
        let k4 = deriv(&add(&y, &k3, h));
        for i in 0..5 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    State {
        point: Point3::new(y[0], y[1], y[2]),
        momentum: Covector::new(a, y[3], y[4]),
    }
}

fn state_dist(a: &State, b: &State) -> f64 {
    a.point
        .dist(&b.point)
        .max((a.momentum.b - b.momentum.b).abs())
        .max((a.momentum.c - b.momentum.c).abs())
}

/// Adaptive Simpson quadrature.
fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64 + Copy>(
        f: F,
        lo: f64,
        hi: f64,
        flo: f64,
        fmid: f64,
        fhi: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let mid = 0.5 * (lo + hi);
        let lm = 0.5 * (lo + mid);
        let rm = 0.5 * (mid + hi);
        let flm = f(lm);
        let frm = f(rm);
        let left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        let right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, lo, mid, flo, flm, fmid, left, tol / 2.0, depth - 1)
                + rec(f, mid, hi, fmid, frm, fhi, right, tol / 2.0, depth - 1)
        }
    }
    let mid = 0.5 * (lo + hi);
    let flo = f(lo);
    let fmid = f(mid);
    let fhi = f(hi);
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    rec(f, lo, hi, flo, fmid, fhi, whole, tol, 40)
}

#[test]
fn flow_matches_high_order_integrator() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let s = random_unit_state(&mut rng, 10.0, 2.0);
        // checkpoints across duration 10; the integrator runs fresh to each
        let mut sup: f64 = 0.0;
        for k in 1..=10 {
            let t = k as f64;
            let exact = flow(&s, t);
            let numeric = rk4_flow(&s, t, (t * 8000.0) as usize);
            sup = sup.max(state_dist(&exact, &numeric));
        }
        assert!(sup < 1e-8, "sup distance {sup:e} for {s:?}");
    }
}

#[test]
fn delta_z_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let s = random_unit_state(&mut rng, 5.0, 2.0);
        let duration = rng.gen_range(0.1..8.0);
        let arc = GeodesicArc::new(s, duration);
        let integrand = |t: f64| {
            let st = flow(&s, t);
            0.5 * (st.point.x * st.momentum.c - st.point.y * st.momentum.b)
        };
        let quad = simpson(integrand, 0.0, duration, 1e-11);
        assert!(
            (delta_z(&arc) - quad).abs() < 1e-8,
            "dz {} vs quadrature {}",
            delta_z(&arc),
            quad
        );
    }
}

#[test]
fn delta_z_matches_sector_decomposition() {
    // triangle to the origin plus circular segment, via the arc data only
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let s = random_unit_state(&mut rng, 4.0, 2.0);
        let duration = rng.gen_range(0.1..2.5);
        let arc = GeodesicArc::new(s, duration);
        let p0 = s.point;
        let p1 = arc.end().point;
        let triangle = 0.5 * (p0.x * p1.y - p0.y * p1.x);
        let a = s.momentum.a;
        let segment = if a == 0.0 {
            0.0
        } else {
            let mu = 0.5 * a * duration;
            // ρ²(μ − sin μ cos μ) with ρ = 1/|a|; odd in μ, so the sign of
            // the traversal is already built in
            (mu - mu.sin() * mu.cos()) / (a * a)
        };
        let expect = triangle + segment;
        assert!(
            (delta_z(&arc) - expect).abs() < 1e-10,
            "dz {} vs sector {}",
            delta_z(&arc),
            expect
        );
    }
}

#[test]
fn horizontality_of_the_flow() {
    // α(γ̇) from positions alone, via a fourth-order difference stencil
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    // wide enough that rounding in the stencil stays below the truncation
    let h = 1e-3;
    for _ in 0..20 {
        let s = random_unit_state(&mut rng, 2.0, 1.5);
        for _ in 0..100 {
            let t = rng.gen_range(0.1..6.0);
            let at = |dt: f64| flow(&s, t + dt).point;
            let stencil = |f: &dyn Fn(f64) -> f64| {
                (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
            };
            let vx = stencil(&|dt| at(dt).x);
            let vy = stencil(&|dt| at(dt).y);
            let vz = stencil(&|dt| at(dt).z);
            let p = at(0.0);
            let alpha = vz - 0.5 * (p.x * vy - p.y * vx);
            assert!(alpha.abs() < 1e-10, "alpha residual {alpha:e}");
        }
    }
}

#[test]
fn conservation_along_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..30 {
        let s = random_unit_state(&mut rng, 8.0, 2.0);
        for &t in &[1.0, 10.0, 100.0, 1000.0] {
            let e = flow(&s, t);
            assert!((hamiltonian(&e.momentum) - 0.5).abs() < 1e-12);
            assert_eq!(e.momentum.a, s.momentum.a);
        }
    }
}

#[test]
fn flow_group_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..60 {
        let s = random_unit_state(&mut rng, 6.0, 2.0);
        let t1 = rng.gen_range(-4.0..4.0);
        let t2 = rng.gen_range(-4.0..4.0);
        let once = flow(&s, t1 + t2);
        let twice = flow(&flow(&s, t1), t2);
        assert!(state_dist(&once, &twice) < 1e-11);
    }
}

#[test]
fn symmetries_preserve_form_and_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let g = SymmetryElement {
            v: (
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ),
            theta: rng.gen_range(-PI..PI),
        };
        // pullback of α: the action is affine, so exact differences give dg
        let apply_pt = |p: Point3| {
            apply_symmetry(
                &g,
                &State::new(p, Covector::new(0.0, 1.0, 0.0)).unwrap(),
            )
            .point
        };
        for _ in 0..20 {
            let p = Point3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let v = (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let q = apply_pt(p);
            let shifted = apply_pt(Point3::new(p.x + v.0, p.y + v.1, p.z + v.2));
            let dv = (shifted.x - q.x, shifted.y - q.y, shifted.z - q.z);
            let alpha_before = v.2 - 0.5 * (p.x * v.1 - p.y * v.0);
            let alpha_after = dv.2 - 0.5 * (q.x * dv.1 - q.y * dv.0);
            assert!((alpha_after - alpha_before).abs() < 1e-12);
        }
        // equivariance with the flow
        let s = random_unit_state(&mut rng, 5.0, 2.0);
        for k in 1..=10 {
            let t = 0.41 * k as f64;
            let lhs = apply_symmetry(&g, &flow(&s, t));
            let rhs = flow(&apply_symmetry(&g, &s), t);
            assert!(state_dist(&lhs, &rhs) < 1e-11);
            assert!((hamiltonian(&lhs.momentum) - 0.5).abs() < 1e-12);
        }
    }
}

#[test]
fn connect_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..100 {
        let p = Point3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-1.0..1.0),
        );
        let q = Point3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-1.0..1.0),
        );
        if p.planar_dist(&q) < 1e-6 {
            continue;
        }
        let arc = connect(&p, &q, 0).unwrap();
        assert!(
            arc.end().point.dist(&q) < 1e-9,
            "landing gap {:e}",
            arc.end().point.dist(&q)
        );
        assert!((hamiltonian(&arc.start.momentum) - 0.5).abs() < 1e-12);
    }
}

#[test]
fn interior_loops_always_gain_height() {
    // full projected loops strictly inside the cylinder displace z by
    // exactly the loop area π/a², so no interior trajectory closes up
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..50 {
        let a: f64 = rng.gen_range(1.2..8.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let rho = 1.0 / a.abs();
        let margin = rng.gen_range(0.01..f64::max(1.0 - 2.0 * rho, 0.011));
        let center_r = f64::max(1.0 - rho - margin, 0.0);
        let s = State::new(
            Point3::new(center_r + rho, 0.0, 0.0),
            Covector::new(a, 0.0, 1.0),
        )
        .unwrap();
        let loop_arc = GeodesicArc::new(s, 2.0 * PI * rho);
        let dz = delta_z(&loop_arc);
        let expect = PI / (a * a) * a.signum();
        assert!((dz - expect).abs() < 1e-12);
        assert!(dz.abs() > 1e-3);
    }
}

#[test]
fn first_event_minimality_by_dense_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let families: Vec<TableSpec> = vec![
        TableSpec::InfiniteCylinder {
            center: (0.0, 0.0),
            radius: 1.0,
        },
        TableSpec::HorizontalHalfSpace { z0: 0.0, side: 1 },
        TableSpec::VerticalHalfSpace { offset: 0.8 },
        TableSpec::HorizontalBand {
            z_lo: -0.5,
            z_hi: 0.7,
        },
        TableSpec::FiniteCylinder {
            center: (0.2, -0.1),
            radius: 1.1,
            z_lo: -0.6,
            z_hi: 0.9,
        },
    ];
    for table in &families {
        let mut tested = 0;
        'outer: while tested < 200 {
            // random interior start
            let p = Point3::new(
                rng.gen_range(-1.2..1.2),
                rng.gen_range(-1.2..1.2),
                rng.gen_range(-0.7..0.9),
            );
            if table.signed_distance(&p) > -0.05 {
                continue;
            }
            let angle = rng.gen_range(0.0..2.0 * PI);
            let s = State::new(
                p,
                Covector::new(rng.gen_range(-5.0..5.0), angle.cos(), angle.sin()),
            )
            .unwrap();
            let horizon = 20.0;
            let ev = next_event(table, &s, horizon).unwrap();
            let t_event = ev.as_ref().map_or(horizon, |e| e.time);
            // no boundary crossing strictly before the reported event
            let n = 10_000;
            for k in 1..n {
                let t = t_event * k as f64 / n as f64;
                let d = table.signed_distance(&flow(&s, t).point);
                if d > 1e-9 {
                    panic!(
                        "missed crossing: sd = {d:e} at t = {t} < event {t_event} on {table:?}"
                    );
                }
            }
            if let Some(e) = ev {
                // and the event point itself is on the boundary
                assert!(table.signed_distance(&e.contact.point).abs() < 1e-9);
            }
            tested += 1;
            if tested >= 200 {
                break 'outer;
            }
        }
    }
}

#[test]
fn magnetic_momentum_invariant_in_vertical_wall_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let cyl = TableSpec::InfiniteCylinder {
        center: (0.0, 0.0),
        radius: 1.0,
    };
    let vplane = TableSpec::VerticalHalfSpace { offset: 0.5 };
    for table in [&cyl, &vplane] {
        for _ in 0..25 {
            let p = Point3::new(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.4),
                rng.gen_range(-1.0..1.0),
            );
            let angle = rng.gen_range(0.0..2.0 * PI);
            let s = State::new(
                p,
                Covector::new(rng.gen_range(-3.0..3.0), angle.cos(), angle.sin()),
            )
            .unwrap();
            let traj = run(
                table,
                &s,
                &RunParams {
                    max_bounces: 8,
                    max_length: 50.0,
                    root_tol: 1e-12,
                },
            )
            .unwrap();
            for arc in &traj.arcs {
                assert_eq!(arc.start.momentum.a, s.momentum.a, "a drifted on {table:?}");
            }
        }
    }
}

#[test]
fn trajectory_bookkeeping() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let table = TableSpec::FiniteCylinder {
        center: (0.0, 0.0),
        radius: 1.0,
        z_lo: -1.0,
        z_hi: 1.0,
    };
    for _ in 0..40 {
        let p = Point3::new(
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
        );
        let angle = rng.gen_range(0.0..2.0 * PI);
        let s = State::new(
            p,
            Covector::new(rng.gen_range(-4.0..4.0), angle.cos(), angle.sin()),
        )
        .unwrap();
        let traj = run(
            &table,
            &s,
            &RunParams {
                max_bounces: 6,
                max_length: 30.0,
                root_tol: 1e-12,
            },
        )
        .unwrap();
        // alternation: either ends at an event or with a trailing arc
        assert!(
            traj.arcs.len() == traj.events.len()
                || traj.arcs.len() == traj.events.len() + 1
        );
        let sum: f64 = traj.arcs.iter().map(|a| a.duration).sum();
        assert!((traj.total_length() - sum).abs() < 1e-12);
        // each reflected arc starts where the previous event reflected
        for (k, ev) in traj.events.iter().enumerate() {
            if k + 1 < traj.arcs.len() {
                let next = &traj.arcs[k + 1];
                assert!(next.start.point.dist(&ev.contact.point) < 1e-10);
                match ev.outcome {
                    Some(heisbill_core::ReflectionOutcome::NonDegenerate { out, .. }) => {
                        assert!((next.start.momentum.a - out.a).abs() < 1e-10);
                        assert!((next.start.momentum.b - out.b).abs() < 1e-10);
                        assert!((next.start.momentum.c - out.c).abs() < 1e-10);
                    }
                    Some(heisbill_core::ReflectionOutcome::InnerTangency) => {}
                    other => panic!("mid-trajectory event with outcome {other:?}"),
                }
                // energy restored after every reflection
                assert!((hamiltonian(&next.start.momentum) - 0.5).abs() < 1e-12);
            }
        }
    }
}
