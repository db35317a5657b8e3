use rand::seq::index::sample;
use rand::Rng;

use super::LearnError;

/// Uniformly downsamples every class in `0..n_classes` to the size of the
/// smallest one. Returns the kept row indices in ascending order.
pub fn balance_classes<R: Rng + ?Sized>(labels: &[usize], n_classes: usize, rng: &mut R) -> Result<Vec<usize>, LearnError> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= n_classes {
            return Err(LearnError::InvalidParams(format!("label {l} outside 0..{n_classes}")));
        }
        by_class[l].push(i);
    }
    if let Some(missing) = by_class.iter().position(|c| c.is_empty()) {
        return Err(LearnError::MissingClass(missing));
    }
    let keep = by_class.iter().map(Vec::len).min().unwrap_or(0);
    let mut out = Vec::with_capacity(keep * n_classes);
    for members in &by_class {
        if members.len() == keep {
            out.extend_from_slice(members);
        } else {
            out.extend(sample(rng, members.len(), keep).into_iter().map(|k| members[k]));
        }
    }
    out.sort_unstable();
    Ok(out)
}
