//! Two-rater label agreement.

use std::collections::BTreeMap;

use crate::error::{Result, TkgError};
use crate::taxonomy::CategoryCode;

/// Unweighted Cohen's kappa between two label vectors of the same partition.
///
/// Returns 1 when both raters use a single identical label throughout
/// (chance agreement is then 1 as well).
pub fn cohens_kappa(labels_a: &[CategoryCode], labels_b: &[CategoryCode]) -> Result<f64> {
    if labels_a.is_empty() || labels_b.is_empty() {
        return Err(TkgError::InvalidArgument("empty label vector".into()));
    }
    if labels_a.len() != labels_b.len() {
        return Err(TkgError::InvalidArgument(format!(
            "label vectors differ in length ({} vs {})",
            labels_a.len(),
            labels_b.len()
        )));
    }
    let partition = labels_a[0].partition;
    if labels_a
        .iter()
        .chain(labels_b)
        .any(|c| c.partition != partition)
    {
        return Err(TkgError::InvalidArgument(
            "labels mix codes from different partitions".into(),
        ));
    }

    let n = labels_a.len();
    let mut marg_a: BTreeMap<CategoryCode, usize> = BTreeMap::new();
    let mut marg_b: BTreeMap<CategoryCode, usize> = BTreeMap::new();
    let mut agree = 0usize;
    for (a, b) in labels_a.iter().zip(labels_b) {
        *marg_a.entry(*a).or_default() += 1;
        *marg_b.entry(*b).or_default() += 1;
        if a == b {
            agree += 1;
        }
    }
    let nf = n as f64;
    let p_o = agree as f64 / nf;
    let p_e: f64 = marg_a
        .iter()
        .map(|(code, &ca)| {
            let cb = marg_b.get(code).copied().unwrap_or(0);
            (ca as f64 / nf) * (cb as f64 / nf)
        })
        .sum();
    if p_e >= 1.0 {
        // Both raters used one and the same label everywhere.
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
