//! Flat `key = values` model description consumed by the simulator.
//!
//! ```text
//! # two communities of 50, local outbreak at t = 30
//! n = 100
//! sizes = 50 50
//! P = 0.2 0.1 0.1 0.2
//! delta = 0.5 0.5
//! t_star = 30
//! P_star = 0.3 0.1 0.1 0.2
//! ```
//!
//! Labels come from exactly one of `labels` (one 1-based label per node),
//! `sizes` (contiguous blocks) or `pi` (drawn at random). `P` is row-major.
//! Without `t_star` there is no change. Post-change keys (`labels_star`,
//! `sizes_star`, `P_star`, `delta_star`) default to their pre-change values.
//! `k` is optional and checked when present; `T` sets a default length;
//! `redraw_theta` is `true` (default) or `false`. Values may be separated
//! by spaces or commas.

use std::collections::BTreeMap;

use rand::Rng;

use crate::dcsbm::{draw_labels, ChangeSpec, DcsbmParams, ThetaRedraw};
use crate::error::{Error, Result};
use crate::graph::CommunityAssignment;
use crate::linalg::Matrix;

const KEYS: &[&str] = &[
    "n",
    "k",
    "labels",
    "sizes",
    "pi",
    "P",
    "delta",
    "t_star",
    "labels_star",
    "sizes_star",
    "P_star",
    "delta_star",
    "redraw_theta",
    "T",
];

#[derive(Debug, Clone, PartialEq)]
pub enum LabelSource {
    Fixed(CommunityAssignment),
    Random(Vec<f64>),
}

/// A parsed model description.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub n: usize,
    pub labels: LabelSource,
    pub p: Matrix,
    pub delta: Vec<f64>,
    pub t_star: Option<usize>,
    pub labels_star: Option<CommunityAssignment>,
    pub p_star: Option<Matrix>,
    pub delta_star: Option<Vec<f64>>,
    pub redraw: ThetaRedraw,
    pub len: Option<usize>,
}

struct Entry {
    line: usize,
    values: Vec<String>,
}

fn square(values: &[f64], line: usize, what: &str) -> Result<Matrix> {
    let k = (values.len() as f64).sqrt().round() as usize;
    if k * k != values.len() || k == 0 {
        return Err(Error::parse(
            line,
            format!("{what} needs k*k values, got {}", values.len()),
        ));
    }
    Matrix::from_vec(k, k, values.to_vec())
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, rest) = body
                .split_once('=')
                .ok_or_else(|| Error::parse(line, "expected `key = values`"))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::parse(line, format!("unknown key `{key}`")));
            }
            let values: Vec<String> = rest
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect();
            if values.is_empty() {
                return Err(Error::parse(line, format!("`{key}` has no value")));
            }
            if entries
                .insert(key.to_owned(), Entry { line, values })
                .is_some()
            {
                return Err(Error::parse(line, format!("`{key}` given twice")));
            }
        }

        let floats = |key: &str| -> Result<Option<(Vec<f64>, usize)>> {
            entries
                .get(key)
                .map(|e| {
                    e.values
                        .iter()
                        .map(|v| {
                            v.parse::<f64>()
                                .map_err(|_| Error::parse(e.line, format!("`{v}` is not a number")))
                        })
                        .collect::<Result<Vec<_>>>()
                        .map(|v| (v, e.line))
                })
                .transpose()
        };
        let ints = |key: &str| -> Result<Option<(Vec<usize>, usize)>> {
            entries
                .get(key)
                .map(|e| {
                    e.values
                        .iter()
                        .map(|v| {
                            v.parse::<usize>().map_err(|_| {
                                Error::parse(e.line, format!("`{v}` is not a nonnegative integer"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                        .map(|v| (v, e.line))
                })
                .transpose()
        };
        let scalar = |key: &str| -> Result<Option<usize>> {
            match ints(key)? {
                None => Ok(None),
                Some((v, _)) if v.len() == 1 => Ok(Some(v[0])),
                Some((_, line)) => Err(Error::parse(line, format!("`{key}` takes one value"))),
            }
        };
        let missing = |key: &str| Error::InvalidParams(format!("missing required key `{key}`"));

        let n = scalar("n")?.ok_or_else(|| missing("n"))?;
        if n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        let (pv, pline) = floats("P")?.ok_or_else(|| missing("P"))?;
        let p = square(&pv, pline, "P")?;
        let k = p.rows();
        if let Some(declared) = scalar("k")? {
            if declared != k {
                return Err(Error::Dimension(format!("k = {declared} but P is {k}x{k}")));
            }
        }

        let fixed_labels =
            |labels_key: &str, sizes_key: &str, k: usize| -> Result<Option<CommunityAssignment>> {
                match (ints(labels_key)?, ints(sizes_key)?) {
                    (Some(_), Some((_, line))) => Err(Error::parse(
                        line,
                        format!("give only one of `{labels_key}` and `{sizes_key}`"),
                    )),
                    (Some((labels, line)), None) => {
                        if labels.len() != n {
                            return Err(Error::parse(
                                line,
                                format!("{} labels for n = {n}", labels.len()),
                            ));
                        }
                        Ok(Some(CommunityAssignment::from_one_based(&labels, k)?))
                    }
                    (None, Some((sizes, line))) => {
                        if sizes.iter().sum::<usize>() != n || sizes.len() != k {
                            return Err(Error::parse(
                                line,
                                format!("sizes must be {k} counts summing to {n}"),
                            ));
                        }
                        Ok(Some(CommunityAssignment::contiguous(&sizes)?))
                    }
                    (None, None) => Ok(None),
                }
            };

        let labels = match (fixed_labels("labels", "sizes", k)?, floats("pi")?) {
            (Some(_), Some((_, line))) => {
                return Err(Error::parse(line, "give labels or pi, not both"));
            }
            (Some(c), None) => LabelSource::Fixed(c),
            (None, Some((pi, line))) => {
                if pi.len() != k {
                    return Err(Error::parse(line, format!("pi needs {k} values")));
                }
                LabelSource::Random(pi)
            }
            (None, None) => return Err(missing("labels, sizes or pi")),
        };

        let (delta, _) = floats("delta")?.ok_or_else(|| missing("delta"))?;
        let p_star = floats("P_star")?
            .map(|(v, line)| square(&v, line, "P_star"))
            .transpose()?;
        let k_star = p_star.as_ref().map_or(k, Matrix::rows);
        let labels_star = fixed_labels("labels_star", "sizes_star", k_star)?;
        let delta_star = floats("delta_star")?.map(|(v, _)| v);
        let redraw = match entries.get("redraw_theta") {
            None => ThetaRedraw::EveryStep,
            Some(e) => match e.values[0].as_str() {
                "true" | "1" | "yes" => ThetaRedraw::EveryStep,
                "false" | "0" | "no" => ThetaRedraw::OncePerRegime,
                other => return Err(Error::parse(e.line, format!("`{other}` is not a boolean"))),
            },
        };
        Ok(Self {
            n,
            labels,
            p,
            delta,
            t_star: scalar("t_star")?,
            labels_star,
            p_star,
            delta_star,
            redraw,
            len: scalar("T")?,
        })
    }

    /// Resolves the description into validated parameters. Random labels
    /// are drawn from `rng`; a missing change time yields a change that never
    /// happens.
    pub fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(DcsbmParams, ChangeSpec)> {
        let labels = match &self.labels {
            LabelSource::Fixed(c) => c.clone(),
            LabelSource::Random(pi) => draw_labels(pi, self.n, rng)?,
        };
        labels.require_nonempty()?;
        let pre = DcsbmParams::with_unit_theta(labels.clone(), self.p.clone(), self.delta.clone())?;
        let t_star = self.t_star.unwrap_or(usize::MAX);
        let change = ChangeSpec::new(
            t_star,
            self.labels_star.clone().unwrap_or(labels),
            self.p_star.clone().unwrap_or_else(|| self.p.clone()),
            self.delta_star
                .clone()
                .unwrap_or_else(|| self.delta.clone()),
        )?;
        Ok((pre, change))
    }
}
