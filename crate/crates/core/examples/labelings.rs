//! The four standard labelings of order 3, their modified matrices and a
//! product labeling for 16-QAM.
//!
//! cargo run --example labelings

use bicm::{Labeling, LabelingKind};

fn main() -> bicm::Result<()> {
    for kind in LabelingKind::ALL {
        let l = Labeling::standard(kind, 3)?;
        println!("{kind}:");
        for i in 0..l.size() {
            let q: Vec<String> = l.modified_matrix().row(i).iter().map(|v| format!("{v:+}")).collect();
            println!("  x{i}  {}   q = [{}]", l.row(i).iter().map(u8::to_string).collect::<String>(), q.join(" "));
        }
    }

    // BRGC is built by reflecting and prefixing, so G3 = expand(G2)
    let g2 = Labeling::brgc(2)?;
    assert_eq!(g2.expand(), Labeling::brgc(3)?);

    let gray_qam = g2.ordered_product(&g2)?;
    println!("16-QAM product labeling, order {}:", gray_qam.order());
    print!("{gray_qam}");

    let variants = Labeling::nbc(3)?.trivial_variants()?;
    println!("trivial variants of N3: {} (m! 2^m = 48)", variants.len());
    let folded = Labeling::fbc(3)?;
    println!("F3 is a trivial variant of N3: {}", folded.is_trivial_variant_of(&Labeling::nbc(3)?));
    Ok(())
}
