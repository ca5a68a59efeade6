use num_complex::Complex64;
use qes_core::born::{born_amplitude, IncidenceSide, IncidenceSpec};
use qes_core::potentials::{build_vr, build_w, Gamma, WSide};
use qes_core::oracle::{amplitude_from_t, dyson, make_grid, solve_t};

const ALPHA: f64 = 2.0 * std::f64::consts::PI / 0.5;

fn main() {
    let k = 1.5 * ALPHA;
    let wm = build_w(WSide::Minus, Complex64::new(0.05, 0.02), 1.0, 4, 1.0, 2).unwrap();
    let wp = build_w(WSide::Plus, Complex64::new(0.03, -0.01), 0.8, 4, 1.2, 1).unwrap();
    let v = build_vr(&wm, &wp, ALPHA, Gamma::One).unwrap();
    let domain = (-40.0, 40.0);
    let theta0 = -std::f64::consts::FRAC_PI_4;
    let inc = IncidenceSpec::new(IncidenceSide::Left, theta0, k).unwrap();
    // bright direction
    let mut best = (0.0, 0.0f64);
    for i in 0..256 {
        let th = 2.0*std::f64::consts::PI * i as f64 / 256.0;
        if th.cos().abs() < 0.05 { continue; }
        let b = born_amplitude(&v, &inc, th).unwrap().norm();
        if b > best.1 { best = (th, b); }
    }
    let theta = best.0;
    println!("theta={theta} born {:?}", born_amplitude(&v, &inc, theta).unwrap());
    for (n, nx) in [(16usize, 1600usize), (32, 3200), (64, 6400), (96, 9600)] {
        let grid = make_grid(k, n).unwrap();
        let m = dyson(&v, &grid, domain, nx, 2).unwrap();
        let t = solve_t(&m, &inc).unwrap();
        let a = amplitude_from_t(&t, k, theta).unwrap();
        println!("  N={n:3} Nx={nx:5}: amp = {a:?}");
    }
}
