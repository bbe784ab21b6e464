//! Distribution of the first-order coefficient over all 8! labelings of
//! 8-PAM and 8-PSK.
//!
//! cargo run --release --example labeling_census

use bicm::search::{distinct_value_count_of_pmf, SearchOptions};
use bicm::{enumerate_alpha_classes, InputAlphabet};

fn main() -> bicm::Result<()> {
    for (name, x) in [("8-PAM", InputAlphabet::pam(8)?), ("8-PSK", InputAlphabet::psk(8)?)] {
        let census = enumerate_alpha_classes(&x, &SearchOptions::default())?;
        println!(
            "{name}: {} labelings, {} classes, {} distinct multiplicities, {} first-order optimal",
            census.total,
            census.class_count(),
            distinct_value_count_of_pmf(&census),
            census.foo_count
        );
        if let Some(gap) = census.min_class_spacing {
            println!("  closest classes differ by {gap:.4} in alpha/log2e");
        }
        let best = census.max_class();
        let witness: Vec<String> = (0..best.witness.size())
            .map(|i| best.witness.row(i).iter().map(u8::to_string).collect())
            .collect();
        println!(
            "  best alpha/log2e {:.5} shared by {} labelings, e.g. {}",
            best.alpha / std::f64::consts::LOG2_E,
            best.count,
            witness.join(" ")
        );
    }
    Ok(())
}
