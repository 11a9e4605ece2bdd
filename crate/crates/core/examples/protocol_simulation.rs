//! Monte Carlo of the postselected protocol: repeat until every buffer site
//! returns the wanted outcome and record byproducts. First attempts succeed
//! with the exact postselection probability; later ones inherit correlations
//! from the failure before them.

use std::f64::consts::FRAC_PI_2;

use sptmqc::toymodel::{self, ToyModelParams};
use sptmqc::{mqc, BufferAxis};

fn main() -> sptmqc::Result<()> {
    let aklt = toymodel::aklt_factorized();
    let trace = mqc::simulate_protocol(&aklt, BufferAxis::Z, 2, FRAC_PI_2, 11)?;
    println!("one run: {} attempts, {} sites, byproducts {:?}", trace.attempts, trace.sites_consumed, trace.byproducts);
    println!("net protected operator:\n{:.4}", trace.net_protected_operator());

    let toy = toymodel::toy_tensor(ToyModelParams::new(1.2, 0.4))?;
    for m in [1, 2, 3] {
        let s = mqc::simulate_many(&toy, BufferAxis::Z, m, FRAC_PI_2, 5_000, 1)?;
        println!(
            "m = {m}: first attempt {:.4} ± {:.4} (exact {:.4}), per attempt {:.4}, {:.1} sites per gate",
            s.first_attempt_rate, s.first_attempt_sigma, s.predicted_success, s.success_rate, s.mean_sites
        );
    }
    Ok(())
}
