//! First-order optimal constellations: projections of the hypercube, the
//! OTTO and OTOTO alphabets, hierarchical PAM and QAM labelings.
//!
//! cargo run --example foo_constellations

use bicm::asymptotics::{is_foo, otto_projection, ototo_projection, qam_foo_check, FOO_TOLERANCE};
use bicm::{alpha_bicm_uniform, InputAlphabet, Labeling, ProjectionMatrix};

fn main() -> bicm::Result<()> {
    let nbc = Labeling::nbc(3)?;
    for (name, v) in [("OTTO", otto_projection()), ("OTOTO", ototo_projection())] {
        let x = InputAlphabet::from_projection(&nbc, &v)?;
        let verdict = is_foo(&x, &nbc, FOO_TOLERANCE)?;
        let alpha = alpha_bicm_uniform(&x, &nbc)?;
        println!("{name}: foo {} residual {:.1e} alpha/log2e {:.6}", verdict.is_foo, verdict.residual, alpha.normalized());
    }

    // an arbitrary projection of the 4-cube into the plane
    let v = ProjectionMatrix::new(&[[0.3, -1.2], [0.7, 0.1], [-0.4, 0.9], [1.1, 0.5]])?;
    let l = Labeling::brgc(4)?;
    let x = InputAlphabet::from_projection(&l, &v)?;
    let verdict = is_foo(&x, &l, FOO_TOLERANCE)?;
    println!("random projection: foo {}, recovered rows:", verdict.is_foo);
    for row in verdict.projection.rows() {
        println!("  [{:+.6}, {:+.6}]", row[0], row[1]);
    }

    let h = InputAlphabet::hierarchical_pam(&[1.0, 2.5, 4.0])?;
    println!(
        "hierarchical PAM: NBC {}, BRGC {}",
        is_foo(&h, &nbc, FOO_TOLERANCE)?.is_foo,
        is_foo(&h, &Labeling::brgc(3)?, FOO_TOLERANCE)?.is_foo
    );

    let g2 = Labeling::brgc(2)?;
    println!(
        "16-QAM: NBC {}, product BRGC {}",
        qam_foo_check(4, 4, &Labeling::nbc(4)?)?,
        qam_foo_check(4, 4, &g2.ordered_product(&g2)?)?
    );
    Ok(())
}
