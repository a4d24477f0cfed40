//! Resolution of replace blocks and row emission.

use super::{AlignmentRow, CaseMode};
use crate::ingest::DisfluencyTag;

/// Order-preserving matches inside one replace block, as `(gt, hyp)` index
/// pairs local to the block.
///
/// Pass 1 walks the hypothesis left to right and binds each token to the
/// earliest unmatched fluent reference token after the previous binding.
/// Pass 2 gives the still-unbound hypothesis tokens a chance to bind to a
/// disfluent reference token, restricted to the gap between their matched
/// neighbours so the result stays monotone.
pub(crate) fn replace_matches<K: PartialEq>(gt: &[K], tags: &[DisfluencyTag], hyp: &[K]) -> Vec<(usize, usize)> {
    let mut bound: Vec<Option<usize>> = vec![None; hyp.len()];

    let mut next = 0;
    for (j, h) in hyp.iter().enumerate() {
        let found = (next..gt.len()).find(|&g| !tags[g].is_disfluent() && gt[g] == *h);
        if let Some(g) = found {
            bound[j] = Some(g);
            next = g + 1;
        }
    }

    let mut lo = 0;
    for j in 0..hyp.len() {
        if let Some(g) = bound[j] {
            lo = g + 1;
            continue;
        }
        let hi = bound[j + 1..].iter().flatten().next().copied().unwrap_or(gt.len());
        let found = (lo..hi).find(|&g| tags[g].is_disfluent() && gt[g] == hyp[j]);
        if let Some(g) = found {
            bound[j] = Some(g);
            lo = g + 1;
        }
    }

    bound
        .iter()
        .enumerate()
        .filter_map(|(j, g)| g.map(|g| (g, j)))
        .collect()
}

/// Lays out rows for a monotone set of `(gt, hyp)` matches.
///
/// Within each gap between consecutive matches the unmatched reference rows
/// come first, followed by the unmatched hypothesis tokens as hallucination
/// rows, so a hallucination sits directly before the next matched row.
pub(crate) fn emit_rows(gt: &[(&str, DisfluencyTag)], hyp: &[String], pairs: &[(usize, usize)]) -> Vec<AlignmentRow> {
    let mut rows = Vec::with_capacity(gt.len() + hyp.len());
    let (mut gi, mut hj) = (0, 0);
    let gt_row = |g: usize, hyp: Option<&String>| AlignmentRow::Reference {
        token: gt[g].0.to_owned(),
        tag: gt[g].1,
        hyp: hyp.cloned(),
    };
    for &(g, h) in pairs {
        debug_assert!(g >= gi && h >= hj, "matches must be monotone");
        rows.extend((gi..g).map(|k| gt_row(k, None)));
        rows.extend(
            hyp[hj..h]
                .iter()
                .map(|t| AlignmentRow::Hallucination { hyp: t.clone() }),
        );
        rows.push(gt_row(g, Some(&hyp[h])));
        gi = g + 1;
        hj = h + 1;
    }
    rows.extend((gi..gt.len()).map(|k| gt_row(k, None)));
    rows.extend(hyp[hj..].iter().map(|t| AlignmentRow::Hallucination { hyp: t.clone() }));
    rows
}

/// Aligns the two sides of a replace block.
///
/// Fluent reference tokens are preferred over disfluent ones; a disfluent
/// token that receives a match is one the model failed to remove.
/// Unmatched hypothesis tokens become hallucination rows.
pub fn resolve_replace(gt_block: &[(&str, DisfluencyTag)], hyp_block: &[String], case: CaseMode) -> Vec<AlignmentRow> {
    let gt_keys: Vec<String> = gt_block.iter().map(|(t, _)| case.key(t)).collect();
    let tags: Vec<DisfluencyTag> = gt_block.iter().map(|(_, g)| *g).collect();
    let hyp_keys: Vec<String> = hyp_block.iter().map(|t| case.key(t)).collect();
    let pairs = replace_matches(&gt_keys, &tags, &hyp_keys);
    emit_rows(gt_block, hyp_block, &pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use DisfluencyTag::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|t| t.to_string()).collect()
    }

    fn gt_row(t: &str, tag: DisfluencyTag, h: Option<&str>) -> AlignmentRow {
        AlignmentRow::Reference {
            token: t.into(),
            tag,
            hyp: h.map(Into::into),
        }
    }

    #[test]
    fn unremoved_parenthetical() {
        let rows = resolve_replace(&[("i", Prn), ("mean", Prn)], &s(&["i", "mean"]), CaseMode::Sensitive);
        assert_eq!(rows, [gt_row("i", Prn, Some("i")), gt_row("mean", Prn, Some("mean"))]);
    }

    #[test]
    fn substitution_becomes_hallucination() {
        let rows = resolve_replace(&[("she", None)], &s(&["Luna"]), CaseMode::Sensitive);
        assert_eq!(
            rows,
            [
                gt_row("she", None, Option::None),
                AlignmentRow::Hallucination { hyp: "Luna".into() }
            ]
        );
    }

    #[test]
    fn pure_deletion() {
        let rows = resolve_replace(&[("x", Edited)], &[], CaseMode::Sensitive);
        assert_eq!(rows, [gt_row("x", Edited, Option::None)]);
    }

    #[test]
    fn fluent_copy_preferred() {
        let gt = ["the", "the"];
        let tags = [Edited, None];
        assert_eq!(replace_matches(&gt, &tags, &["the"]), [(1, 0)]);
    }

    #[test]
    fn second_pass_respects_order() {
        // "b" is bound to the fluent token at 2; "a" may only use the
        // disfluent "a" at 0 or 1, never one after position 2.
        let gt = ["a", "a", "b", "a"];
        let tags = [Edited, Prn, None, Intj];
        assert_eq!(replace_matches(&gt, &tags, &["a", "b"]), [(0, 0), (2, 1)]);
        assert_eq!(replace_matches(&gt, &tags, &["b", "a"]), [(2, 0), (3, 1)]);
    }

    #[test]
    fn case_insensitive_key() {
        let rows = resolve_replace(&[("Uh", Intj)], &s(&["uh"]), CaseMode::Insensitive);
        assert_eq!(rows, [gt_row("Uh", Intj, Some("uh"))]);
        let rows = resolve_replace(&[("Uh", Intj)], &s(&["uh"]), CaseMode::Sensitive);
        assert_eq!(rows.len(), 2);
    }
}
