use heisbill_core::geometry::{connect_with_tol, Point3};

fn main() {
    let q1 = Point3::new(0.5, 0.0, 0.0);
    let q2 = Point3::new(-0.5, 0.0, 0.0);
    let len = |p: &Point3| {
        match (connect_with_tol(&q1, p, 0, 1e-13), connect_with_tol(p, &q2, 0, 1e-13)) {
            (Ok(a), Ok(b)) => a.duration + b.duration,
            _ => f64::NAN,
        }
    };
    // wall chart around theta = pi/2 with the foliation leaf (dz = dtheta/2)
    println!("   = leaf-aligned grid: rows dtheta, cols v (off-leaf z) =");
    for dth in [-0.4f64, -0.2, -0.05, 0.0, 0.05, 0.2, 0.4] {
        let th = std::f64::consts::FRAC_PI_2 + dth;
        let mut row = format!("dth {dth:+.2}: ");
        for v in [-0.2f64, -0.05, 0.0, 0.05, 0.2] {
            let p = Point3::new(th.cos(), th.sin(), v + 0.5 * dth);
            row += &format!("{:12.8} ", len(&p));
        }
        println!("{row}");
    }
    // and the global picture along theta at v=0
    println!("   = along the wall, on-leaf =");
    for k in 0..=16 {
        let dth = -3.0 + 6.0 * k as f64 / 16.0;
        let th = std::f64::consts::FRAC_PI_2 + dth;
        let p = Point3::new(th.cos(), th.sin(), 0.5 * dth);
        println!("dth {dth:+.3}: {:.8}", len(&p));
    }
}
