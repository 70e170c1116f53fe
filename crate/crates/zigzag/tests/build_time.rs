use std::time::Instant;

use zigzag_core::approximator::{build_universal, random_cubic_family};
use zigzag_core::math::linear_fit;

#[test]
fn build_scales_linearly() {
    let family = random_cubic_family(8, 16, 7).unwrap();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for k in 8..=16u32 {
        let n = 1usize << k;
        let mut best = f64::INFINITY;
        for _ in 0..7 {
            let t0 = Instant::now();
            let u = build_universal(&family, n).unwrap();
            best = best.min(t0.elapsed().as_secs_f64());
            assert_eq!(u.n, n);
        }
        x.push((n as f64).ln());
        y.push(best.ln());
    }
    let (slope, _, _) = linear_fit(&x, &y);
    println!("log-log slope {slope:.3}");
    assert!((0.8..=1.3).contains(&slope), "slope {slope}");
}
