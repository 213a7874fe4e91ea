use std::time::Instant;
use verifylab::corpus::{generate, GeneratorId};
use verifylab::functionals::{modulus_curve, NormAnchor};
use verifylab::mesh::{build_grid, MeasureSpec};

fn main() {
    let g = build_grid(2, 2.0, 201).unwrap();
    let f = generate(GeneratorId::RandomFourier, &[1.4, 2.0, 1.0], 7, &g, MeasureSpec::Lebesgue).unwrap();
    for p in [1.0, 2.0, 4.0] {
        let t0 = Instant::now();
        let c = modulus_curve(&f, &NormAnchor::Lp(p)).unwrap();
        println!("p={p}: {} radii, sat {:.4}, {:?}", c.radii.len(), c.saturated(), t0.elapsed());
    }
    let t0 = Instant::now();
    let c = modulus_curve(&f, &NormAnchor::Lorentz(2.0, 1.0)).unwrap();
    println!("L(2,1): {} radii, sat {:.4}, {:?}", c.radii.len(), c.saturated(), t0.elapsed());
}
