//! The contrastive objective and the attribute add/remove rule.
//!
//! For an input `x` and candidate `x'` the score is
//!
//! ```text
//! ‖ζ(x') − ζ(x)‖∞ − β·#{i : |ζᵢ(x') − ζᵢ(x)| > τᵢ}
//!   + λ·(max_{j≠y} f(x')ⱼ − f(x)_y) + η·lm − ν·lev(x, x')
//! ```
//!
//! where `lm` is the mean filler score of inserted/substituted words and
//! `lev` the raw word-level Levenshtein distance.

use serde::{Deserialize, Serialize};

use crate::error::{CatError, Result};
use crate::model::{AttributeScoreVector, ClassDistribution};
use crate::text::{word_levenshtein, EditKind, EditPath, TokenizedText};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperParams {
    pub lambda: f64,
    pub beta: f64,
    pub eta: f64,
    pub nu: f64,
    pub beam_k: usize,
    pub edit_budget: usize,
    pub top_positions: usize,
    pub ig_steps: usize,
    pub seed: u64,
    pub early_exit: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            lambda: 5.0,
            beta: 3.0,
            eta: 1.0,
            nu: 2.0,
            beam_k: 10,
            edit_budget: 3,
            top_positions: 5,
            ig_steps: 64,
            seed: 0,
            early_exit: true,
        }
    }
}

/// Bounds used when sweeping the objective weights.
pub const LAMBDA_RANGE: (f64, f64) = (4.0, 10.0);
pub const BETA_RANGE: (f64, f64) = (1.0, 5.0);
pub const ETA_RANGE: (f64, f64) = (0.5, 2.0);
pub const NU_RANGE: (f64, f64) = (1.0, 4.0);

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("beta", self.beta), ("eta", self.eta), ("nu", self.nu)] {
            if !v.is_finite() || v < 0.0 {
                return Err(CatError::InvalidParams(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        for (name, v) in [
            ("beam_k", self.beam_k),
            ("edit_budget", self.edit_budget),
            ("top_positions", self.top_positions),
            ("ig_steps", self.ig_steps),
        ] {
            if v == 0 {
                return Err(CatError::InvalidParams(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Checks the weights against the tuning-sweep bounds.
    pub fn validate_sweep_range(&self) -> Result<()> {
        self.validate()?;
        for (name, v, (lo, hi)) in [
            ("lambda", self.lambda, LAMBDA_RANGE),
            ("beta", self.beta, BETA_RANGE),
            ("eta", self.eta, ETA_RANGE),
            ("nu", self.nu, NU_RANGE),
        ] {
            if !(lo..=hi).contains(&v) {
                return Err(CatError::InvalidParams(format!("{name}={v} outside sweep range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub attr_linf: f64,
    pub attr_changed_count: usize,
    pub contrast_gain: f64,
    pub lm_surrogate: f64,
    pub lev_raw: usize,
    pub total: f64,
}

impl ObjectiveBreakdown {
    /// Assembles the weighted total from its parts.
    pub fn from_parts(
        attr_linf: f64,
        attr_changed_count: usize,
        contrast_gain: f64,
        lm_surrogate: f64,
        lev_raw: usize,
        params: &HyperParams,
    ) -> Self {
        let mut b = Self {
            attr_linf,
            attr_changed_count,
            contrast_gain,
            lm_surrogate,
            lev_raw,
            total: 0.0,
        };
        b.total = b.recompute_total(params);
        b
    }

    pub fn recompute_total(&self, params: &HyperParams) -> f64 {
        self.attr_linf - params.beta * self.attr_changed_count as f64
            + params.lambda * self.contrast_gain
            + params.eta * self.lm_surrogate
            - params.nu * self.lev_raw as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Added,
    Removed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDelta {
    pub name: String,
    pub direction: Direction,
    pub delta: f64,
}

fn check_banks(a: &AttributeScoreVector, b: &AttributeScoreVector) -> Result<()> {
    if a.names() != b.names() || a.thresholds() != b.thresholds() {
        return Err(CatError::MismatchedBanks(format!(
            "{:?} vs {:?}",
            a.names(),
            b.names()
        )));
    }
    Ok(())
}

/// Attributes whose score moved strictly more than their threshold.
pub fn attribute_deltas(input: &AttributeScoreVector, contrast: &AttributeScoreVector) -> Result<Vec<AttributeDelta>> {
    check_banks(input, contrast)?;
    let mut out = Vec::new();
    for (((name, &tau), &before), &after) in input
        .names()
        .iter()
        .zip(input.thresholds())
        .zip(input.scores())
        .zip(contrast.scores())
    {
        let delta = after - before;
        let direction = if delta > tau {
            Direction::Added
        } else if delta < -tau {
            Direction::Removed
        } else {
            continue;
        };
        out.push(AttributeDelta {
            name: name.clone(),
            direction,
            delta,
        });
    }
    Ok(out)
}

/// `max_{j≠y} p'_j − p_y`, the contrastive score term.
pub fn contrast_gain(input: &ClassDistribution, contrast: &ClassDistribution, y: usize) -> f64 {
    let best_other = contrast
        .probabilities()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != y)
        .map(|(_, &p)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    best_other - input.prob(y)
}

/// Mean filler score over inserted and substituted words; 0 when the path
/// writes no words. `fill_scores` runs parallel to the path.
pub fn lm_surrogate(path: &EditPath, fill_scores: &[Option<f64>]) -> Result<f64> {
    if path.len() != fill_scores.len() {
        return Err(CatError::InvalidEdit(format!(
            "{} fill scores for {} edits",
            fill_scores.len(),
            path.len()
        )));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (edit, score) in path.iter().zip(fill_scores) {
        match (edit.kind, score) {
            (EditKind::Delete, _) => {}
            (_, Some(s)) => {
                sum += s;
                n += 1;
            }
            (_, None) => {
                return Err(CatError::InvalidEdit(format!("missing fill score for {edit}")));
            }
        }
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// Everything the objective needs about one side of the comparison.
#[derive(Debug, Clone, Copy)]
pub struct Scored<'a> {
    pub text: &'a TokenizedText,
    pub dist: &'a ClassDistribution,
    pub attrs: &'a AttributeScoreVector,
}

pub fn cat_objective(
    input: Scored<'_>,
    contrast: Scored<'_>,
    y: usize,
    lm: f64,
    params: &HyperParams,
) -> Result<ObjectiveBreakdown> {
    check_banks(input.attrs, contrast.attrs)?;
    let mut attr_linf: f64 = 0.0;
    let mut changed = 0;
    for ((before, after), tau) in input
        .attrs
        .scores()
        .iter()
        .zip(contrast.attrs.scores())
        .zip(input.attrs.thresholds())
    {
        let d = (after - before).abs();
        attr_linf = attr_linf.max(d);
        if d > *tau {
            changed += 1;
        }
    }
    Ok(ObjectiveBreakdown::from_parts(
        attr_linf,
        changed,
        contrast_gain(input.dist, contrast.dist, y),
        lm,
        word_levenshtein(input.text, contrast.text),
        params,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{tokenize, Edit};

    fn dist(p: &[f64]) -> ClassDistribution {
        ClassDistribution::new(p.to_vec(), (0..p.len()).map(|i| format!("c{i}")).collect()).unwrap()
    }

    fn attrs(scores: &[f64], taus: &[f64]) -> AttributeScoreVector {
        AttributeScoreVector::new(
            scores.to_vec(),
            (0..scores.len()).map(|i| format!("a{i}")).collect(),
            taus.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn defaults() {
        let p = HyperParams::default();
        assert_eq!((p.lambda, p.beta, p.eta, p.nu), (5.0, 3.0, 1.0, 2.0));
        assert_eq!((p.beam_k, p.top_positions, p.edit_budget, p.ig_steps), (10, 5, 3, 64));
        assert!(p.early_exit);
        p.validate_sweep_range().unwrap();
        let off = HyperParams { lambda: 11.0, ..p };
        assert!(off.validate().is_ok());
        assert!(off.validate_sweep_range().is_err());
    }

    #[test]
    fn deltas_follow_thresholds() {
        let d = attribute_deltas(&attrs(&[0.2], &[0.3]), &attrs(&[0.55], &[0.3])).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].direction, Direction::Added);
        assert!((d[0].delta - 0.35).abs() < 1e-12);

        let same = attrs(&[0.1, 0.9], &[0.3, 0.05]);
        assert!(attribute_deltas(&same, &same).unwrap().is_empty());

        let d = attribute_deltas(&attrs(&[0.5], &[0.05]), &attrs(&[0.44], &[0.05])).unwrap();
        assert_eq!(d[0].direction, Direction::Removed);

        let other = AttributeScoreVector::new(vec![0.1], vec!["zz".into()], vec![0.3]).unwrap();
        assert!(matches!(
            attribute_deltas(&attrs(&[0.1], &[0.3]), &other),
            Err(CatError::MismatchedBanks(_))
        ));
    }

    #[test]
    fn contrast_gain_examples() {
        assert_eq!(contrast_gain(&dist(&[1.0, 0.0]), &dist(&[1.0, 0.0]), 0), -1.0);
        assert!((contrast_gain(&dist(&[0.8, 0.2]), &dist(&[0.3, 0.7]), 0) - (-0.1)).abs() < 1e-12);
        assert_eq!(contrast_gain(&dist(&[0.5, 0.5]), &dist(&[0.5, 0.5]), 0), 0.0);
    }

    #[test]
    fn lm_surrogate_examples() {
        assert_eq!(lm_surrogate(&EditPath::default(), &[]).unwrap(), 0.0);
        let one = EditPath::new(vec![Edit::substitute(0, "a", "b")]);
        assert_eq!(lm_surrogate(&one, &[Some(0.4)]).unwrap(), 0.4);
        let three = EditPath::new(vec![Edit::substitute(0, "a", "b"), Edit::insert(0, "z"), Edit::delete(2, "c")]);
        assert!((lm_surrogate(&three, &[Some(0.4), Some(0.2), None]).unwrap() - 0.3).abs() < 1e-15);
        assert!(lm_surrogate(&three, &[Some(0.4)]).is_err());
    }

    #[test]
    fn identity_candidate() {
        let x = tokenize("a b c").unwrap();
        let fx = dist(&[0.9, 0.1]);
        let z = AttributeScoreVector::empty();
        let s = Scored {
            text: &x,
            dist: &fx,
            attrs: &z,
        };
        let b = cat_objective(s, s, 0, 0.0, &HyperParams::default()).unwrap();
        assert_eq!(b.attr_linf, 0.0);
        assert_eq!(b.attr_changed_count, 0);
        assert!((b.contrast_gain - (-0.8)).abs() < 1e-15);
        assert_eq!(b.lev_raw, 0);
        assert!((b.total - (-4.0)).abs() < 1e-12);
    }

    #[test]
    fn sub_threshold_move() {
        let x = tokenize("a b").unwrap();
        let y = tokenize("a c").unwrap();
        let fx = dist(&[0.9, 0.1]);
        let zx = attrs(&[0.1], &[0.3]);
        let zy = attrs(&[0.3], &[0.3]);
        let b = cat_objective(
            Scored { text: &x, dist: &fx, attrs: &zx },
            Scored { text: &y, dist: &fx, attrs: &zy },
            0,
            0.0,
            &HyperParams::default(),
        )
        .unwrap();
        assert!((b.attr_linf - 0.2).abs() < 1e-12);
        assert_eq!(b.attr_changed_count, 0);
    }
}
