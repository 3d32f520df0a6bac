//! Long-horizon stress of the quotient stepper: several step lengths,
//! 10^5 steps per trial, checking that reduction always terminates and
//! determinant drift stays within the renormalization budget.

use shrinktarget::lattice::GroupKind;
use shrinktarget::quotient::{gamma2_center, SamplerConfig, Surface, TranslateSet};

fn main() {
    let surface = Surface::gamma2().unwrap();
    let p0 = gamma2_center();
    let ts = TranslateSet::build(surface.group(), p0, 6.0).unwrap();
    let mut max_y = 0.0f64;
    let mut max_det_drift = 0.0f64;
    for (hi, h) in [(0u64, 1.0f64), (1, 0.5), (2, 1.0471975511965976), (3, 3.7)]
        .iter()
        .enumerate()
        .map(|(i, &(_, h))| (i as u64, h))
    {
        for j in 0..6u64 {
            let sampler = SamplerConfig {
                seed: 0xBEEF ^ (hi << 8),
                kind: GroupKind::Gamma2,
            };
            let mut state = surface.sample_liouville(&mut sampler.stream(j)).unwrap();
            for t in 1..=100_000u64 {
                match surface.step(&state, h) {
                    Ok(next) => {
                        state = next;
                        let z = state.basepoint();
                        max_y = max_y.max(z.y());
                        max_det_drift =
                            max_det_drift.max((state.frame().matrix().det() - 1.0).abs());
                        let _ = ts.quotient_dist(z);
                    }
                    Err(e) => {
                        println!("h={h} trial {j} step {t}: {e}");
                        return;
                    }
                }
            }
        }
        println!("h={h}: 6 x 10^5 steps clean");
    }
    println!("max excursion y = {max_y:.3e}, max |det-1| = {max_det_drift:.3e}");
}
