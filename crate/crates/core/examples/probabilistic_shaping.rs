//! Grid search over the bit probabilities of 8-PAM. Shaping lets BRGC close
//! most of the gap to the AWGN capacity at low rate.
//!
//! cargo run --release --example probabilistic_shaping

use bicm::shaping::{shaped_ebn0_at_rate, ShapingSearch};
use bicm::{awgn_capacity, InputAlphabet, Labeling, LabelingKind};

fn main() -> bicm::Result<()> {
    let x = InputAlphabet::pam(8)?;
    let search = ShapingSearch::default();
    for kind in [LabelingKind::Brgc, LabelingKind::Nbc] {
        let l = Labeling::standard(kind, 3)?;
        println!("{kind}:  snr_db  awgn   uniform  shaped  P(c_k = 0)");
        for snr_db in [-10.0, -5.0, 0.0, 5.0, 10.0] {
            let snr = 10f64.powf(snr_db / 10.0);
            let r = search.optimize(&x, &l, snr)?;
            let bits: Vec<String> = r.bits.iter().map(|p| format!("{p:.2}")).collect();
            println!(
                "       {snr_db:>6} {:>6.3} {:>8.4} {:>7.4}  [{}]",
                awgn_capacity(snr, 1),
                r.uniform_capacity,
                r.shaped_capacity,
                bits.join(", ")
            );
        }
    }

    let l = Labeling::brgc(3)?;
    let (_, ebn0, r) = shaped_ebn0_at_rate(&x, &l, 0.05, &search, 1e-4)?;
    println!(
        "shaped BRGC at Rc = 0.05: Eb/N0 = {:.3} dB with P(c_k = 0) = {:?}",
        10.0 * ebn0.log10(),
        r.bits
    );
    Ok(())
}
