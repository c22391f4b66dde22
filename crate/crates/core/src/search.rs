//! Attribution-guided mask-and-fill beam search for contrasts.
//!
//! Each round takes every beam member, ranks its words by importance for the
//! input's predicted class, proposes substitutions at the top positions,
//! insertions into the gaps on either side of them and deletions, scores the
//! results against the original input and keeps the best `beam_k`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribution::{attribute, effective_method, rank_positions, AttributionMethod};
use crate::error::{CatError, Result};
use crate::eval::InstanceMetrics;
use crate::model::{AttributeScoreVector, AttributeScorer, ClassDistribution, Classifier, FillSite, MaskFiller};
use crate::objective::{attribute_deltas, cat_objective, lm_surrogate, AttributeDelta, HyperParams, ObjectiveBreakdown, Scored};
use crate::text::{apply_edit, Edit, EditKind, EditPath, TokenizedText};

/// The three models the search queries.
#[derive(Clone, Copy)]
pub struct SearchBackends<'a> {
    pub classifier: &'a dyn Classifier,
    pub attributes: &'a dyn AttributeScorer,
    pub filler: &'a dyn MaskFiller,
}

impl SearchBackends<'_> {
    fn concurrent(&self) -> bool {
        self.classifier.supports_concurrent_inference()
            && self.attributes.supports_concurrent_inference()
            && self.filler.supports_concurrent_inference()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub text: TokenizedText,
    pub path: EditPath,
    /// Filler score of each edit's new word; `None` for deletions.
    pub fill_scores: Vec<Option<f64>>,
    pub dist: ClassDistribution,
    pub attrs: AttributeScoreVector,
    pub breakdown: ObjectiveBreakdown,
    pub flipped: bool,
    pub round: usize,
}

/// Ranking used everywhere: higher total, then smaller distance, fewer
/// edits, lexicographic text and finally the edit path itself.
pub fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.breakdown
        .total
        .total_cmp(&a.breakdown.total)
        .then(a.breakdown.lev_raw.cmp(&b.breakdown.lev_raw))
        .then(a.path.len().cmp(&b.path.len()))
        .then_with(|| a.text.words().cmp(b.text.words()))
        .then_with(|| a.path.cmp(&b.path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub input: TokenizedText,
    pub input_dist: ClassDistribution,
    pub input_label: String,
    pub contrast: TokenizedText,
    pub contrast_dist: ClassDistribution,
    pub contrast_label: String,
    pub path: EditPath,
    pub attribute_changes: Vec<AttributeDelta>,
    pub breakdown: ObjectiveBreakdown,
    pub metrics: Option<InstanceMetrics>,
}

/// Everything a search materialized, for inspection and tests.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub input_dist: ClassDistribution,
    pub input_attrs: AttributeScoreVector,
    pub predicted: usize,
    pub best: Option<Candidate>,
    /// Every flipped candidate scored during the search.
    pub flipped: Vec<Candidate>,
    pub rounds_run: usize,
    pub candidates_scored: usize,
}

/// An edit proposal before scoring.
struct Proposal {
    path: EditPath,
    fill_scores: Vec<Option<f64>>,
    text: TokenizedText,
}

struct Context<'a> {
    input: &'a TokenizedText,
    input_dist: ClassDistribution,
    input_attrs: AttributeScoreVector,
    y: usize,
    backends: SearchBackends<'a>,
    params: &'a HyperParams,
}

impl Context<'_> {
    fn score(&self, p: Proposal, round: usize) -> Result<Candidate> {
        let dist = self.backends.classifier.classify(&p.text)?;
        let attrs = self.backends.attributes.score_attributes(&p.text)?;
        let lm = lm_surrogate(&p.path, &p.fill_scores)?;
        let breakdown = cat_objective(
            Scored {
                text: self.input,
                dist: &self.input_dist,
                attrs: &self.input_attrs,
            },
            Scored {
                text: &p.text,
                dist: &dist,
                attrs: &attrs,
            },
            self.y,
            lm,
            self.params,
        )?;
        Ok(Candidate {
            flipped: dist.argmax() != self.y,
            text: p.text,
            path: p.path,
            fill_scores: p.fill_scores,
            dist,
            attrs,
            breakdown,
            round,
        })
    }

    fn score_all(&self, proposals: Vec<Proposal>, round: usize) -> Result<Vec<Candidate>> {
        if self.backends.concurrent() {
            proposals.into_par_iter().map(|p| self.score(p, round)).collect()
        } else {
            proposals.into_iter().map(|p| self.score(p, round)).collect()
        }
    }
}

fn push_edit(out: &mut Vec<Proposal>, parent: &Candidate, edit: Edit, score: Option<f64>) {
    match apply_edit(&parent.text, &edit) {
        Ok(text) => {
            let mut fill_scores = parent.fill_scores.clone();
            fill_scores.push(score);
            out.push(Proposal {
                path: parent.path.extended(edit),
                fill_scores,
                text,
            });
        }
        Err(e) => log::debug!("skipping proposal {edit}: {e}"),
    }
}

/// Unscored one-edit extensions of `parent` around `positions`.
fn expansions(parent: &Candidate, positions: &[usize], filler: &dyn MaskFiller, k: usize) -> Vec<Proposal> {
    let text = &parent.text;
    let mut out = Vec::new();
    let mut gaps = BTreeSet::new();
    for &p in positions {
        let Some(current) = text.words().get(p) else {
            continue;
        };
        let forbid: BTreeSet<String> = [current.clone()].into();
        for fill in filler.propose_fills(text, FillSite::substitute(p), k, &forbid) {
            push_edit(&mut out, parent, Edit::substitute(p, current.clone(), fill.word), Some(fill.lm_score));
        }
        gaps.insert(p);
        gaps.insert(p + 1);
    }
    for &g in &gaps {
        for fill in filler.propose_fills(text, FillSite::insert(g), k, &BTreeSet::new()) {
            push_edit(&mut out, parent, Edit::insert(g, fill.word), Some(fill.lm_score));
        }
    }
    if text.len() > 1 {
        for &p in positions {
            if let Some(current) = text.words().get(p) {
                push_edit(&mut out, parent, Edit::delete(p, current.clone()), None);
            }
        }
    }
    out
}

/// Keeps the best-ranked candidate for each distinct text.
fn dedup_by_text(candidates: Vec<Candidate>) -> Vec<Candidate> {
    let mut best: HashMap<Vec<String>, Candidate> = HashMap::new();
    for c in candidates {
        match best.get(c.text.words()) {
            Some(existing) if candidate_order(existing, &c) != Ordering::Greater => {}
            _ => {
                best.insert(c.text.words().to_vec(), c);
            }
        }
    }
    let mut out: Vec<Candidate> = best.into_values().collect();
    out.sort_by(candidate_order);
    out
}

/// Expands one candidate at the given positions, scoring against the
/// original input and removing duplicate texts.
pub fn expand(
    input: &TokenizedText,
    candidate: &Candidate,
    positions: &[usize],
    backends: SearchBackends<'_>,
    k: usize,
    params: &HyperParams,
) -> Result<Vec<Candidate>> {
    let ctx = context(input, backends, params)?;
    let proposals = expansions(candidate, positions, backends.filler, k);
    Ok(dedup_by_text(ctx.score_all(proposals, candidate.round + 1)?))
}

fn context<'a>(input: &'a TokenizedText, backends: SearchBackends<'a>, params: &'a HyperParams) -> Result<Context<'a>> {
    let input_dist = backends.classifier.classify(input)?;
    let input_attrs = backends.attributes.score_attributes(input)?;
    Ok(Context {
        y: input_dist.argmax(),
        input,
        input_dist,
        input_attrs,
        backends,
        params,
    })
}

/// The candidate for the unedited input.
pub fn identity_candidate(
    input: &TokenizedText,
    backends: SearchBackends<'_>,
    params: &HyperParams,
) -> Result<Candidate> {
    let ctx = context(input, backends, params)?;
    ctx.score(
        Proposal {
            path: EditPath::default(),
            fill_scores: Vec::new(),
            text: input.clone(),
        },
        0,
    )
}

pub fn run_search(
    input: &TokenizedText,
    backends: SearchBackends<'_>,
    method: AttributionMethod,
    params: &HyperParams,
) -> Result<SearchOutcome> {
    params.validate()?;
    let ctx = context(input, backends, params)?;
    let method = effective_method(backends.classifier, method);
    let identity = ctx.score(
        Proposal {
            path: EditPath::default(),
            fill_scores: Vec::new(),
            text: input.clone(),
        },
        0,
    )?;
    let mut beam = vec![identity];
    let mut flipped = Vec::new();
    let mut rounds_run = 0;
    let mut candidates_scored = 0;
    for round in 1..=params.edit_budget {
        rounds_run = round;
        let mut proposals = Vec::new();
        for member in &beam {
            let attr = attribute(&member.text, backends.classifier, ctx.y, method, params.ig_steps)?;
            let positions = rank_positions(&attr, params.top_positions);
            proposals.extend(expansions(member, &positions, backends.filler, params.beam_k));
        }
        candidates_scored += proposals.len();
        let candidates = dedup_by_text(ctx.score_all(proposals, round)?);
        let before = flipped.len();
        flipped.extend(candidates.iter().filter(|c| c.flipped).cloned());
        beam = candidates.into_iter().take(params.beam_k).collect();
        if (params.early_exit && flipped.len() > before) || beam.is_empty() {
            break;
        }
    }
    let best = flipped.iter().min_by(|a, b| candidate_order(a, b)).cloned();
    Ok(SearchOutcome {
        input_dist: ctx.input_dist,
        input_attrs: ctx.input_attrs,
        predicted: ctx.y,
        best,
        flipped,
        rounds_run,
        candidates_scored,
    })
}

/// Searches for the best-scoring flipped edit of `input`.
pub fn generate_contrast(
    input: &TokenizedText,
    backends: SearchBackends<'_>,
    method: AttributionMethod,
    params: &HyperParams,
) -> Result<Explanation> {
    let outcome = run_search(input, backends, method, params)?;
    let best = outcome.best.ok_or(CatError::NoContrastFound {
        budget: params.edit_budget,
    })?;
    Ok(Explanation {
        input: input.clone(),
        input_label: outcome.input_dist.label().to_string(),
        attribute_changes: attribute_deltas(&outcome.input_attrs, &best.attrs)?,
        input_dist: outcome.input_dist,
        contrast_label: best.dist.label().to_string(),
        contrast: best.text,
        contrast_dist: best.dist,
        path: best.path,
        breakdown: best.breakdown,
        metrics: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderStyle {
    PlainDiff,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
enum Segment {
    Keep(String),
    Deleted(String),
    Inserted(String),
    Replaced(String, String),
}

fn diff_segments(input: &TokenizedText, path: &EditPath) -> Result<Vec<Segment>> {
    let mut segs: Vec<Segment> = input.words().iter().cloned().map(Segment::Keep).collect();
    let live = |segs: &[Segment]| -> Vec<usize> {
        segs.iter()
            .enumerate()
            .filter(|(_, s)| !matches!(s, Segment::Deleted(_)))
            .map(|(i, _)| i)
            .collect()
    };
    for edit in path.iter() {
        let idx = live(&segs);
        let oob = || CatError::InvalidEdit(format!("{edit} out of bounds while rendering"));
        match edit.kind {
            EditKind::Substitute => {
                let i = *idx.get(edit.position).ok_or_else(oob)?;
                let new = edit.new.clone().unwrap_or_default();
                segs[i] = match std::mem::replace(&mut segs[i], Segment::Keep(String::new())) {
                    Segment::Keep(w) => Segment::Replaced(w, new),
                    Segment::Inserted(_) => Segment::Inserted(new),
                    Segment::Replaced(old, _) if old == new => Segment::Keep(old),
                    Segment::Replaced(old, _) => Segment::Replaced(old, new),
                    Segment::Deleted(_) => unreachable!("live index points at a deleted segment"),
                };
            }
            EditKind::Insert => {
                let at = match idx.get(edit.position) {
                    Some(&i) => i,
                    None if edit.position == idx.len() => segs.len(),
                    None => return Err(oob()),
                };
                segs.insert(at, Segment::Inserted(edit.new.clone().unwrap_or_default()));
            }
            EditKind::Delete => {
                let i = *idx.get(edit.position).ok_or_else(oob)?;
                match std::mem::replace(&mut segs[i], Segment::Keep(String::new())) {
                    Segment::Keep(w) | Segment::Replaced(w, _) => segs[i] = Segment::Deleted(w),
                    Segment::Inserted(_) => {
                        segs.remove(i);
                    }
                    Segment::Deleted(_) => unreachable!("live index points at a deleted segment"),
                }
            }
        }
    }
    Ok(segs)
}

/// Splits a word into alternating alphanumeric and punctuation runs.
fn pieces(word: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut prev: Option<bool> = None;
    for (i, c) in word.char_indices() {
        let alnum = c.is_alphanumeric();
        if prev.is_some_and(|p| p != alnum) {
            out.push(&word[start..i]);
            start = i;
        }
        prev = Some(alnum);
    }
    out.push(&word[start..]);
    out
}

fn render_replacement(old: &str, new: &str) -> String {
    let a = pieces(old);
    let b = pieces(new);
    let max = a.len().min(b.len());
    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count().min(max);
    let suffix = a
        .iter()
        .rev()
        .zip(b.iter().rev())
        .take_while(|(x, y)| x == y)
        .count()
        .min(max - prefix);
    let mid_a = a[prefix..a.len() - suffix].concat();
    let mid_b = b[prefix..b.len() - suffix].concat();
    let mut s = a[..prefix].concat();
    if !mid_a.is_empty() {
        s.push_str(&format!("[-{mid_a}-]"));
    }
    if !mid_b.is_empty() {
        s.push_str(&format!("{{+{mid_b}+}}"));
    }
    s.push_str(&a[a.len() - suffix..].concat());
    s
}

/// Input text with `[-removed-]` / `{+added+}` markup for the edit path.
pub fn render_diff(input: &TokenizedText, path: &EditPath) -> Result<String> {
    let segs = diff_segments(input, path)?;
    Ok(segs
        .iter()
        .map(|s| match s {
            Segment::Keep(w) => w.clone(),
            Segment::Deleted(w) => format!("[-{w}-]"),
            Segment::Inserted(w) => format!("{{+{w}+}}"),
            Segment::Replaced(o, n) => render_replacement(o, n),
        })
        .collect::<Vec<_>>()
        .join(" "))
}

pub fn render_attribute_changes(changes: &[AttributeDelta]) -> String {
    if changes.is_empty() {
        return "none".into();
    }
    changes
        .iter()
        .map(|c| match c.direction {
            crate::objective::Direction::Added => format!("+{}", c.name),
            crate::objective::Direction::Removed => format!("-{}", c.name),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render_explanation(e: &Explanation, style: RenderStyle) -> Result<String> {
    match style {
        RenderStyle::Json => crate::io::json::to_string(e),
        RenderStyle::PlainDiff => Ok(format!(
            "input    [{}]: {}\ncontrast [{}]: {}\nattributes: {}",
            e.input_label,
            e.input,
            e.contrast_label,
            render_diff(&e.input, &e.path)?,
            render_attribute_changes(&e.attribute_changes)
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ConstantClassifier, EmptyAttributeBank, KeywordAttribute, KeywordAttributeScorer, KeywordClassifier,
        KeywordRule, StaticFiller,
    };
    use crate::objective::Direction;
    use crate::text::tokenize;

    fn sentiment() -> KeywordClassifier {
        KeywordClassifier::new(
            vec!["negative".into(), "positive".into()],
            vec![
                KeywordRule {
                    word: "good".into(),
                    label: "positive".into(),
                    confidence: 0.9,
                },
                KeywordRule {
                    word: "bad".into(),
                    label: "negative".into(),
                    confidence: 0.9,
                },
            ],
            None,
        )
        .unwrap()
    }

    fn filler() -> StaticFiller {
        StaticFiller::new([("bad", -1.0), ("fine", -0.5)])
    }

    #[test]
    fn finds_the_keyword_swap() {
        let clf = sentiment();
        let fill = filler();
        let b = SearchBackends {
            classifier: &clf,
            attributes: &EmptyAttributeBank,
            filler: &fill,
        };
        let params = HyperParams {
            edit_budget: 1,
            beam_k: 100,
            top_positions: 10,
            ..Default::default()
        };
        let x = tokenize("the food is good").unwrap();
        let e = generate_contrast(&x, b, AttributionMethod::Occlusion, &params).unwrap();
        assert_eq!(e.contrast.joined(), "the food is bad");
        assert_eq!(e.input_label, "positive");
        assert_eq!(e.contrast_label, "negative");
        assert_eq!(e.breakdown.lev_raw, 1);

        // Exhaustive check over every single edit the filler allows.
        let mut best: Option<(f64, String)> = None;
        let words = x.words();
        let vocab = [("bad", -1.0), ("fine", -0.5)];
        let mut texts: Vec<(Vec<String>, f64, usize)> = Vec::new();
        for p in 0..words.len() {
            for (w, s) in vocab {
                if words[p] != w {
                    let mut t = words.to_vec();
                    t[p] = w.into();
                    texts.push((t, s, 1));
                }
            }
            let mut t = words.to_vec();
            t.remove(p);
            texts.push((t, 0.0, 1));
        }
        for g in 0..=words.len() {
            for (w, s) in vocab {
                let mut t = words.to_vec();
                t.insert(g, w.into());
                texts.push((t, s, 1));
            }
        }
        for (t, lm, lev) in texts {
            let d = clf.classify(&TokenizedText::from_words(t.clone()).unwrap()).unwrap();
            if d.argmax() == 1 {
                continue;
            }
            let gain = d.probabilities()[0] - 0.9;
            let total = 5.0 * gain + lm - 2.0 * lev as f64;
            if best.as_ref().is_none_or(|(b, _)| total > *b) {
                best = Some((total, t.join(" ")));
            }
        }
        let (total, text) = best.unwrap();
        assert_eq!(text, "the food is bad");
        assert!((e.breakdown.total - total).abs() < 1e-12);
    }

    #[test]
    fn constant_classifier_never_flips() {
        let clf = ConstantClassifier::new(vec!["a".into(), "b".into()], vec![0.3, 0.7]).unwrap();
        let fill = filler();
        let b = SearchBackends {
            classifier: &clf,
            attributes: &EmptyAttributeBank,
            filler: &fill,
        };
        for budget in 1..=3 {
            let params = HyperParams {
                edit_budget: budget,
                ..Default::default()
            };
            let r = generate_contrast(&tokenize("x y z").unwrap(), b, AttributionMethod::Occlusion, &params);
            assert!(matches!(r, Err(CatError::NoContrastFound { budget: b }) if b == budget));
        }
    }

    #[test]
    fn sub_threshold_attributes_still_flip() {
        let clf = sentiment();
        let fill = filler();
        let bank = KeywordAttributeScorer::new(vec![KeywordAttribute {
            name: "critique".into(),
            keywords: (0..9).map(|i| format!("kw{i}")).chain(["bad".to_string()]).collect(),
            tau: 0.3,
        }])
        .unwrap();
        let b = SearchBackends {
            classifier: &clf,
            attributes: &bank,
            filler: &fill,
        };
        let params = HyperParams {
            edit_budget: 1,
            ..Default::default()
        };
        let e = generate_contrast(&tokenize("the food is good").unwrap(), b, AttributionMethod::Occlusion, &params).unwrap();
        assert_ne!(e.input_label, e.contrast_label);
        assert!(e.attribute_changes.is_empty());
        assert!((e.breakdown.attr_linf - 0.1).abs() < 1e-12);
    }

    #[test]
    fn expansion_counts_and_guards() {
        let clf = sentiment();
        let fill = StaticFiller::new([("p", -1.0), ("q", -2.0)]);
        let b = SearchBackends {
            classifier: &clf,
            attributes: &EmptyAttributeBank,
            filler: &fill,
        };
        let params = HyperParams::default();
        let one = tokenize("solo").unwrap();
        let id = identity_candidate(&one, b, &params).unwrap();
        let raw = expansions(&id, &[0], &fill, 2);
        assert!(raw.iter().all(|p| p.path.edits[0].kind != EditKind::Delete));
        // 2 substitutes + 2 gaps × 2 inserts
        assert_eq!(raw.len(), 6);

        let x = tokenize("a b c").unwrap();
        let id = identity_candidate(&x, b, &params).unwrap();
        let raw = expansions(&id, &[1], &fill, 2);
        let count = |k| raw.iter().filter(|p| p.path.edits[0].kind == k).count();
        assert_eq!(count(EditKind::Substitute), 2);
        assert_eq!(count(EditKind::Insert), 4);
        assert_eq!(count(EditKind::Delete), 1);

        // "a p b" arises from inserting p at gap 1 only once here, but
        // expanding positions 0 and 1 proposes gap 1 twice; dedup keeps one.
        let expanded = expand(&x, &id, &[0, 1], b, 2, &params).unwrap();
        let mut texts: Vec<_> = expanded.iter().map(|c| c.text.joined()).collect();
        let n = texts.len();
        texts.sort();
        texts.dedup();
        assert_eq!(texts.len(), n);
    }

    #[test]
    fn dedup_keeps_first_in_order() {
        let clf = sentiment();
        let fill = StaticFiller::new([("b", -0.1)]);
        let b = SearchBackends {
            classifier: &clf,
            attributes: &EmptyAttributeBank,
            filler: &fill,
        };
        let params = HyperParams::default();
        let x = tokenize("a b").unwrap();
        let id = identity_candidate(&x, b, &params).unwrap();
        // Inserting "b" at gap 1 or gap 2 both give "a b b".
        let out = expand(&x, &id, &[1], b, 5, &params).unwrap();
        let abb: Vec<_> = out.iter().filter(|c| c.text.joined() == "a b b").collect();
        assert_eq!(abb.len(), 1);
        assert_eq!(abb[0].path.edits[0], Edit::insert(1, "b"));
    }

    #[test]
    fn plain_diff_rendering() {
        let x = tokenize("Kazaa Owner Cheers File-Swapping Decision (AP)").unwrap();
        let path = EditPath::new(vec![Edit::substitute(3, "file-swapping", "salary-swapping")]);
        let diff = render_diff(&x, &path).unwrap();
        assert_eq!(diff, "kazaa owner cheers [-file-]{+salary+}-swapping decision (ap)");

        let x = tokenize("a b c").unwrap();
        let path = EditPath::new(vec![Edit::insert(1, "z"), Edit::delete(3, "c"), Edit::substitute(0, "a", "q")]);
        assert_eq!(render_diff(&x, &path).unwrap(), "[-a-]{+q+} {+z+} b [-c-]");

        let path = EditPath::new(vec![Edit::insert(0, "z"), Edit::delete(0, "z")]);
        assert_eq!(render_diff(&x, &path).unwrap(), "a b c");
    }

    #[test]
    fn attribute_line() {
        assert_eq!(render_attribute_changes(&[]), "none");
        let changes = vec![
            AttributeDelta {
                name: "forsale".into(),
                direction: Direction::Added,
                delta: 0.4,
            },
            AttributeDelta {
                name: "cryptography".into(),
                direction: Direction::Removed,
                delta: -0.2,
            },
        ];
        assert_eq!(render_attribute_changes(&changes), "+forsale -cryptography");
    }

    #[test]
    fn json_rendering_round_trips() {
        let clf = sentiment();
        let fill = filler();
        let b = SearchBackends {
            classifier: &clf,
            attributes: &EmptyAttributeBank,
            filler: &fill,
        };
        let e = generate_contrast(
            &tokenize("the food is good").unwrap(),
            b,
            AttributionMethod::Occlusion,
            &HyperParams::default(),
        )
        .unwrap();
        let json = render_explanation(&e, RenderStyle::Json).unwrap();
        let back: Explanation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        let plain = render_explanation(&e, RenderStyle::PlainDiff).unwrap();
        assert!(plain.contains("[-good-]{+bad+}"));
        assert!(plain.ends_with("attributes: none"));
    }
}
