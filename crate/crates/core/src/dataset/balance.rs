use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::record::{Dataset, Label};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Under-samples the majority class down to the minority count.
///
/// The minority class is kept whole and the surviving records keep their
/// original relative order.
pub fn balance_undersample<T: Scalar>(d: &Dataset<T>, seed: u64) -> Result<Dataset<T>> {
    let (fake, real): (Vec<usize>, Vec<usize>) =
        (0..d.len()).partition(|&i| d.records()[i].label == Label::Fake);
    if fake.is_empty() || real.is_empty() {
        return Err(Error::Balance(format!(
            "{} fake and {} real records; both classes must be present",
            fake.len(),
            real.len()
        )));
    }
    let (minority, majority) = if fake.len() <= real.len() {
        (fake, real)
    } else {
        (real, fake)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<usize> = index::sample(&mut rng, majority.len(), minority.len())
        .into_iter()
        .map(|i| majority[i])
        .chain(minority)
        .collect();
    keep.sort_unstable();
    Ok(d.select(&keep))
}
