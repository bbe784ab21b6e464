//! CM and BICM capacities of 8-PAM and the rates where the best labeling
//! changes from NBC to FBC to BRGC.
//!
//! cargo run --release --example capacity_curves

use bicm::capacity::crossing_snr;
use bicm::quadrature::QuadratureSpec;
use bicm::{awgn_capacity, CapacityFunctional, CapacityKind, Constellation, InputAlphabet, Labeling, LabelingKind};

fn main() -> bicm::Result<()> {
    let x = InputAlphabet::pam(8)?;
    let quad = QuadratureSpec::default();
    let omega = |kind| -> bicm::Result<Constellation> {
        Constellation::uniform(x.clone(), Labeling::standard(kind, 3)?)
    };

    println!("snr_db    awgn      cm     brgc     nbc    bsgc     fbc");
    let cm = CapacityFunctional::new(CapacityKind::Cm, &omega(LabelingKind::Brgc)?, quad);
    for snr_db in (-10..=25).step_by(5) {
        let snr = 10f64.powf(snr_db as f64 / 10.0);
        let mut line = format!("{snr_db:>6} {:>7.4} {:>7.4}", awgn_capacity(snr, 1), cm.evaluate(snr)?);
        for kind in LabelingKind::ALL {
            let b = CapacityFunctional::new(CapacityKind::Bicm, &omega(kind)?, quad);
            line += &format!(" {:>7.4}", b.evaluate(snr)?);
        }
        println!("{line}");
    }

    let bicm = |kind| -> bicm::Result<CapacityFunctional> {
        Ok(CapacityFunctional::new(CapacityKind::Bicm, &omega(kind)?, quad))
    };
    let (nbc, fbc, brgc) = (bicm(LabelingKind::Nbc)?, bicm(LabelingKind::Fbc)?, bicm(LabelingKind::Brgc)?);
    let s1 = crossing_snr(&nbc, &fbc, 0.1, 3.0)?;
    let s2 = crossing_snr(&fbc, &brgc, 0.3, 10.0)?;
    println!("NBC -> FBC at {:.4} bit/symbol", nbc.evaluate(s1)?);
    println!("FBC -> BRGC at {:.4} bit/symbol", fbc.evaluate(s2)?);
    Ok(())
}
