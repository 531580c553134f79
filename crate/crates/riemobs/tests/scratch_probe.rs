//! Temporary numeric probe; deleted before the suite is finalized.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use riemobs::bench::{obsmap_metric, oscillator_model, oscillator_region};
use riemobs::conditions::check_a2;

fn random_spd(rng: &mut impl Rng, dim: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    let sym = &m * m.transpose();
    sym + DMatrix::identity(dim, dim) * 0.5
}

#[test]
#[ignore]
fn probe_obsmap_weights() {
    let model = oscillator_model();
    let region = oscillator_region(0.5);
    let id = DMatrix::identity(4, 4);
    let rep =
        check_a2(&model, &obsmap_metric(id), &region, 256, 0, 1e-12).unwrap();
    println!("identity: verdict {:?} margin {:?}", rep.verdict, rep.margin);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    for k in 0..10 {
        let psd = random_spd(&mut rng, 4);
        let rep = check_a2(&model, &obsmap_metric(psd), &region, 256, 0, 1e-12)
            .unwrap();
        println!(
            "random {k}: verdict {:?} margin {:?}",
            rep.verdict, rep.margin
        );
    }
}
