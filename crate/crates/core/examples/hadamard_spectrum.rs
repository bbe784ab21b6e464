//! Hadamard spectra of 8-PAM under different labelings. Energy on the
//! power-of-two rows is what the BICM low-SNR slope sees; everything else is
//! lost.
//!
//! cargo run --example hadamard_spectrum

use bicm::asymptotics::alpha_bicm_ht;
use bicm::{ht, HadamardMatrix, InputAlphabet, Labeling, LabelingKind};

fn main() -> bicm::Result<()> {
    let h = HadamardMatrix::new(8)?;
    println!("H8:");
    for row in h.to_dense() {
        println!("  {}", row.iter().map(|v| format!("{v:+}")).collect::<Vec<_>>().join(" "));
    }

    let x = InputAlphabet::pam(8)?;
    for kind in LabelingKind::ALL {
        let labeling = Labeling::standard(kind, 3)?;
        let natural = x.reorder_to_natural(&labeling)?;
        let s = ht(&natural);
        let rows: Vec<String> = (0..8).map(|j| format!("{:+.2}", s.row(j)[0])).collect();
        let alpha = alpha_bicm_ht(&natural)?;
        println!(
            "{kind:>4}: [{}]  off-cube energy {:.3}  alpha/log2e {:.5}",
            rows.join(" "),
            s.off_cube_energy(),
            alpha.normalized()
        );
    }
    Ok(())
}
