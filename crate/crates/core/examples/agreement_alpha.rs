// Krippendorff's alpha for nominal labels from a ratings table with
// missing cells.

use visdiv::learning::{krippendorff_alpha, AgreementTable};

// One row per item, one column per rater.
const RATINGS: &str = "r1,r2,r3
A,A,
C,C,C
A,C,A
C,C,
A,A,A
,C,C
";

pub fn run_example() -> visdiv::Result<()> {
    let table = AgreementTable::from_csv(RATINGS.as_bytes())?;
    println!("alpha = {:.3}", krippendorff_alpha(&table)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> visdiv::Result<()> {
    run_example()
}
