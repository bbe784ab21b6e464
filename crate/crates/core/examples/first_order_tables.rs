//! Zero-rate Eb/N0 limits and SNR gaps from the closed forms, checked
//! against the general first-order coefficient.
//!
//! cargo run --example first_order_tables

use bicm::asymptotics::{fbc_tan_sum, gap_table, limit_table, Family};
use bicm::{alpha_bicm_uniform, InputAlphabet, Labeling};

fn main() -> bicm::Result<()> {
    println!("M -> infinity:");
    for e in limit_table() {
        println!("  {}-{:<5} {:>7.2} dB", e.family, e.labeling, e.zero_rate_ebn0_db);
    }
    println!("  sum of tan^2(pi/2^k), k >= 2: {:.4}", fbc_tan_sum(64));

    println!("zero-rate gap to the AWGN capacity:");
    for e in gap_table(&[4, 8, 16], &[8]) {
        let size = e.size.expect("finite table");
        let x = match e.family {
            Family::Pam => InputAlphabet::pam(size)?,
            Family::Psk => InputAlphabet::psk(size)?,
        };
        let general = alpha_bicm_uniform(&x, &Labeling::standard(e.labeling, size.trailing_zeros() as usize)?)?;
        println!(
            "  {size:>2}-{}-{:<5} {:>6.2} dB   (general form {:.2} dB)",
            e.family,
            e.labeling,
            e.gap_db,
            general.gap_db()
        );
    }
    Ok(())
}
