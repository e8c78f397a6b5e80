//! Every unitary is exp(iH) for a Hermitian H with 16 real parameters; the
//! optimizer walks this space. Also shows Haar sampling and the invariants.

use fusionlab::matrix::{unitarity_deviation, UnitaryParams};
use fusionlab::{derive_invariants, from_params, haar_sample_seeded, RngSeed};

fn main() -> fusionlab::Result<()> {
    let mut rng = RngSeed(3).rng();
    let p = UnitaryParams::random(&mut rng);
    let u = from_params(&p)?;
    println!(
        "exp(iH): max |U^dagger U - I| = {:.2e}",
        unitarity_deviation(u.entries())
    );

    let h = haar_sample_seeded(RngSeed(3))?;
    let inv = derive_invariants(&h);
    println!("Haar sample invariants");
    println!("  m = {:?}", inv.m.map(|x| (x * 1e6).round() / 1e6));
    println!("  n = {:?}", inv.n.map(|x| (x * 1e6).round() / 1e6));
    println!(
        "  sum m = {:.12}, sum n = {:.1e}",
        inv.m.iter().sum::<f64>(),
        inv.n.iter().sum::<f64>()
    );
    Ok(())
}
