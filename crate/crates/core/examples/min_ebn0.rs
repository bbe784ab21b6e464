//! Minimum Eb/N0 against rate for 8-PAM. BRGC attains its minimum at zero
//! rate; BSGC has zero slope at the origin, so f blows up there and the
//! minimum is interior.
//!
//! cargo run --release --example min_ebn0

use bicm::capacity::{f_curve, log_grid, min_ebn0};
use bicm::quadrature::QuadratureSpec;
use bicm::{f_awgn, CapacityFunctional, CapacityKind, ChannelSpec, Constellation, InputAlphabet, Labeling, LabelingKind};

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn main() -> bicm::Result<()> {
    let x = InputAlphabet::pam(8)?;
    let channel = ChannelSpec::awgn(1);
    let rates = log_grid(0.01, 2.5, 8);

    print!("  rate   awgn");
    for kind in LabelingKind::ALL {
        print!("  {kind:>6}");
    }
    println!();
    let mut curves = Vec::new();
    for kind in LabelingKind::ALL {
        let omega = Constellation::uniform(x.clone(), Labeling::standard(kind, 3)?)?;
        let f = CapacityFunctional::new(CapacityKind::Bicm, &omega, QuadratureSpec::default());
        curves.push(f_curve(&f, &rates, &channel)?);
    }
    for (n, &r) in rates.iter().enumerate() {
        print!("{r:>6.3} {:>6.2}", db(f_awgn(r, 1)?));
        for c in &curves {
            print!("  {:>6.2}", c.points[n].ebn0_db());
        }
        println!();
    }

    for kind in [LabelingKind::Brgc, LabelingKind::Bsgc] {
        let omega = Constellation::uniform(x.clone(), Labeling::standard(kind, 3)?)?;
        let f = CapacityFunctional::new(CapacityKind::Bicm, &omega, QuadratureSpec::default());
        let m = min_ebn0(&f, &channel)?;
        println!(
            "{kind}: minimum {:.3} dB at Rc = {:.4} (zero-rate limit {:.3} dB)",
            m.ebn0_db,
            m.rate,
            db(m.zero_rate_ebn0)
        );
    }
    Ok(())
}
