use eventcast::linalg::{weighted_crossprod, PivotedQr};
use ndarray::{Array1, Array2};
use std::time::Instant;

#[test]
#[ignore]
fn probe_pirls_iteration_cost() {
    let n = 8760;
    let p = 111;
    let x = Array2::from_shape_fn((n, p), |(i, j)| ((i * 31 + j * 7) % 97) as f64 / 97.0 - 0.5);
    let w = Array1::from_shape_fn(n, |i| 0.5 + ((i % 13) as f64) / 13.0);

    let t0 = Instant::now();
    let mut a = weighted_crossprod(&x, &w);
    let t_cross = t0.elapsed();

    for i in 0..p {
        a[[i, i]] += 1.0;
    }
    let b = Array1::from_shape_fn(p, |i| i as f64 / p as f64);
    let t1 = Instant::now();
    let qr = PivotedQr::new(a.clone(), 1e-11);
    let _x = qr.solve(&b).unwrap();
    let t_qr = t1.elapsed();

    let t2 = Instant::now();
    let _f = qr.solve_matrix(&a).unwrap();
    let t_edf = t2.elapsed();

    println!("crossprod {n}x{p}: {t_cross:?}; qr+solve {p}: {t_qr:?}; edf solve: {t_edf:?}");
}
