//! Rank-ordered p-value plots and a decision procedure for their shape.
//!
//! A plot is the sorted p-values against the integers 1..n. Under the null
//! the points follow the line p = rank/n; a genuine effect piles most points
//! below α; a mixture shows up as two line segments. [`classify_plot`]
//! turns those visual readings into a fixed sequence of checks whose
//! thresholds all live in [`PlotConfig`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::effects::{p_from_effect, ConversionMethod, EffectEstimate};
use crate::error::{Error, Result};
use crate::normal::Probability;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotEntry {
    pub label: String,
    pub p: Probability,
    /// Source effect pointed in the protective direction (OR < 1).
    pub negative_effect: bool,
}

impl PlotEntry {
    pub fn new(label: impl Into<String>, p: f64) -> Result<Self> {
        Ok(Self { label: label.into(), p: Probability::new(p)?, negative_effect: false })
    }

    pub fn from_effect(e: &EffectEstimate, method: ConversionMethod) -> Result<Self> {
        Ok(Self { label: e.label(), p: p_from_effect(e, method)?, negative_effect: e.is_negative() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotPoint {
    pub rank: usize,
    pub p: f64,
    pub label: String,
    pub negative_effect: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValuePlot {
    pub points: Vec<PlotPoint>,
    pub n: usize,
    pub alpha: f64,
    pub n_below_alpha: usize,
}

impl PValuePlot {
    pub fn source_labels(&self) -> Vec<&str> {
        self.points.iter().map(|pt| pt.label.as_str()).collect()
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.points.iter().map(|pt| pt.p).collect()
    }

    /// Points below α whose source effect was protective.
    pub fn n_negative_below_alpha(&self) -> usize {
        self.points.iter().filter(|pt| pt.p < self.alpha && pt.negative_effect).count()
    }
}

/// Sorts p-values ascending (label breaks ties) and assigns ranks 1..n.
pub fn build_plot(entries: &[PlotEntry], alpha: f64) -> Result<PValuePlot> {
    if entries.is_empty() {
        return Err(Error::EmptyInput("a p-value plot needs at least one p-value"));
    }
    check_alpha(alpha)?;
    let mut sorted: Vec<&PlotEntry> = entries.iter().collect();
    sorted.sort_by(|a, b| {
        a.p.value()
            .total_cmp(&b.p.value())
            .then_with(|| a.label.cmp(&b.label))
            .then_with(|| a.negative_effect.cmp(&b.negative_effect))
    });
    let points: Vec<PlotPoint> = sorted
        .into_iter()
        .enumerate()
        .map(|(i, e)| PlotPoint {
            rank: i + 1,
            p: e.p.value(),
            label: e.label.clone(),
            negative_effect: e.negative_effect,
        })
        .collect();
    let n_below_alpha = points.iter().filter(|pt| pt.p < alpha).count();
    Ok(PValuePlot { n: points.len(), points, alpha, n_below_alpha })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Uniform45,
    EffectLine,
    Bilinear,
    Ambiguous,
}

impl Verdict {
    pub const ALL: [Verdict; 4] =
        [Verdict::Uniform45, Verdict::EffectLine, Verdict::Bilinear, Verdict::Ambiguous];

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Uniform45 => "Uniform45",
            Verdict::EffectLine => "EffectLine",
            Verdict::Bilinear => "Bilinear",
            Verdict::Ambiguous => "Ambiguous",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub ks_statistic: f64,
    pub ks_p: f64,
    pub fraction_below_alpha: f64,
    /// Rank of the last point in the first segment of the best two-line fit.
    pub changepoint_index: Option<usize>,
    pub segment_slopes: Option<(f64, f64)>,
    pub rss_single: Option<f64>,
    pub rss_two_segment: Option<f64>,
    pub first_segment_mean_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotClassification {
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

/// Styling for rendered figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderStyle {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    pub title: Option<String>,
    pub point_radius: f64,
    pub font_family: String,
    pub font_size: u32,
    pub point_color: String,
    pub negative_color: String,
    pub reference_color: String,
    pub alpha_color: String,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            margin: 60,
            title: None,
            point_radius: 4.0,
            font_family: "Helvetica, Arial, sans-serif".into(),
            font_size: 12,
            point_color: "#1f4e79".into(),
            negative_color: "#c0392b".into(),
            reference_color: "#7f7f7f".into(),
            alpha_color: "#d35400".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlotConfig {
    pub alpha: f64,
    /// Minimum KS p-value for the uniform reading.
    pub uniform_ks_threshold: f64,
    /// The uniform reading also requires fraction_below_alpha ≤ factor × α.
    pub uniform_max_below_factor: f64,
    /// EffectLine when strictly more than this fraction of p-values are below α.
    pub effect_majority_fraction: f64,
    pub bilinear_min_segment: usize,
    /// Required relative drop in residual sum of squares for two segments.
    pub bilinear_min_rss_reduction: f64,
    /// Plots with fewer points are Ambiguous.
    pub min_points: usize,
    pub style: RenderStyle,
}

impl Default for PlotConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            uniform_ks_threshold: 0.05,
            uniform_max_below_factor: 3.0,
            effect_majority_fraction: 0.5,
            bilinear_min_segment: 3,
            bilinear_min_rss_reduction: 0.5,
            min_points: 5,
            style: RenderStyle::default(),
        }
    }
}

impl PlotConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(0.0..=1.0).contains(&self.uniform_ks_threshold) {
            return Err(Error::Config("uniform_ks_threshold must lie in [0, 1]".into()));
        }
        if self.uniform_max_below_factor.is_nan() || self.uniform_max_below_factor < 0.0 {
            return Err(Error::Config("uniform_max_below_factor must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.effect_majority_fraction) {
            return Err(Error::Config("effect_majority_fraction must lie in [0, 1]".into()));
        }
        if self.bilinear_min_segment < 2 {
            return Err(Error::Config("bilinear_min_segment must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.bilinear_min_rss_reduction) {
            return Err(Error::Config("bilinear_min_rss_reduction must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// One-sample KS distance of sorted values from Uniform(0, 1):
/// max over i of max(i/n − p₍ᵢ₎, p₍ᵢ₎ − (i−1)/n).
pub fn ks_statistic(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let i = i as f64;
            f64::max((i + 1.0) / n - p, p - i / n)
        })
        .fold(0.0, f64::max)
}

/// Survival function of the limiting Kolmogorov distribution, P(K > λ).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    use std::f64::consts::PI;
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K ≤ λ) = √(2π)/λ Σ exp(−(2j−1)²π²/(8λ²))
        let c = -PI * PI / (8.0 * lambda * lambda);
        let sum: f64 = (1..=20).map(|j| ((2 * j - 1) as f64).powi(2)).map(|m| (m * c).exp()).sum();
        (1.0 - (2.0 * PI).sqrt() / lambda * sum).clamp(0.0, 1.0)
    } else {
        // P(K > λ) = 2 Σ (−1)^(j−1) exp(−2j²λ²)
        let c = -2.0 * lambda * lambda;
        let sum: f64 = (1..=100)
            .map(|j| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * (c * (j * j) as f64).exp()
            })
            .sum();
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Asymptotic KS p-value for n sorted values against Uniform(0, 1).
pub fn ks_uniform_test(sorted: &[f64]) -> (f64, f64) {
    let d = ks_statistic(sorted);
    let lambda = (sorted.len() as f64).sqrt() * d;
    (d, kolmogorov_sf(lambda))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct LineFit {
    slope: f64,
    rss: f64,
}

/// Ordinary least squares of `ys` against `xs`.
fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    LineFit { slope, rss }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TwoSegmentFit {
    changepoint: usize,
    slopes: (f64, f64),
    rss_single: f64,
    rss_two: f64,
    first_mean: f64,
}

/// Best split of the sorted p-values into two independent line fits, each
/// with at least `min_segment` points. Ties keep the earliest breakpoint.
fn two_segment_fit(ps: &[f64], min_segment: usize) -> Option<TwoSegmentFit> {
    let n = ps.len();
    if n < 2 * min_segment {
        return None;
    }
    let xs: Vec<f64> = (1..=n).map(|r| r as f64).collect();
    let rss_single = fit_line(&xs, ps).rss;
    let mut best: Option<TwoSegmentFit> = None;
    for b in min_segment..=(n - min_segment) {
        let left = fit_line(&xs[..b], &ps[..b]);
        let right = fit_line(&xs[b..], &ps[b..]);
        let rss_two = left.rss + right.rss;
        if best.is_none_or(|f| rss_two < f.rss_two) {
            best = Some(TwoSegmentFit {
                changepoint: b,
                slopes: (left.slope, right.slope),
                rss_single,
                rss_two,
                first_mean: ps[..b].iter().sum::<f64>() / b as f64,
            });
        }
    }
    best
}

/// Classifies the plot shape. Checks run in order: EffectLine, Uniform45,
/// Bilinear, then Ambiguous. Plots below `config.min_points` are Ambiguous.
pub fn classify_plot(plot: &PValuePlot, config: &PlotConfig) -> Result<PlotClassification> {
    config.validate()?;
    let ps = plot.p_values();
    let n = ps.len();
    let (ks_statistic, ks_p) = ks_uniform_test(&ps);
    let below = ps.iter().filter(|&&p| p < config.alpha).count();
    let fraction_below_alpha = below as f64 / n as f64;
    let fit = two_segment_fit(&ps, config.bilinear_min_segment);

    let diagnostics = Diagnostics {
        ks_statistic,
        ks_p,
        fraction_below_alpha,
        changepoint_index: fit.map(|f| f.changepoint),
        segment_slopes: fit.map(|f| f.slopes),
        rss_single: fit.map(|f| f.rss_single),
        rss_two_segment: fit.map(|f| f.rss_two),
        first_segment_mean_p: fit.map(|f| f.first_mean),
    };

    let verdict = if n < config.min_points {
        Verdict::Ambiguous
    } else if fraction_below_alpha > config.effect_majority_fraction {
        Verdict::EffectLine
    } else if ks_p >= config.uniform_ks_threshold
        && fraction_below_alpha <= config.uniform_max_below_factor * config.alpha
    {
        Verdict::Uniform45
    } else if fit.is_some_and(|f| {
        f.rss_single > 0.0
            && (f.rss_single - f.rss_two) / f.rss_single >= config.bilinear_min_rss_reduction
            && f.first_mean < config.alpha
    }) {
        Verdict::Bilinear
    } else {
        Verdict::Ambiguous
    };

    Ok(PlotClassification { verdict, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn entries(ps: &[f64]) -> Vec<PlotEntry> {
        ps.iter().enumerate().map(|(i, &p)| PlotEntry::new(format!("s{i:02}"), p).unwrap()).collect()
    }

    #[test]
    fn sorted_grid_in_any_order() {
        let plot = build_plot(&entries(&[0.6, 0.2, 0.8, 0.4]), 0.05).unwrap();
        let pairs: Vec<(usize, f64)> = plot.points.iter().map(|pt| (pt.rank, pt.p)).collect();
        assert_eq!(pairs, vec![(1, 0.2), (2, 0.4), (3, 0.6), (4, 0.8)]);
        assert_eq!(plot.n_below_alpha, 0);
        assert_eq!(plot.n, 4);
    }

    #[test]
    fn ties_are_broken_by_label() {
        let e = vec![PlotEntry::new("b", 0.3).unwrap(), PlotEntry::new("a", 0.3).unwrap()];
        let plot = build_plot(&e, 0.05).unwrap();
        assert_eq!(plot.source_labels(), vec!["a", "b"]);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(build_plot(&[], 0.05), Err(Error::EmptyInput(_))));
        assert!(PlotEntry::new("x", 1.2).is_err());
        assert!(build_plot(&entries(&[0.5]), 0.0).is_err());
    }

    #[test]
    fn all_small_is_effect_line() {
        let ps: Vec<f64> = (1..=10).map(|i| 0.001 * i as f64).collect();
        let plot = build_plot(&entries(&ps), 0.05).unwrap();
        let c = classify_plot(&plot, &PlotConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::EffectLine);
        assert_eq!(c.diagnostics.fraction_below_alpha, 1.0);
    }

    #[test]
    fn tiny_plots_are_ambiguous_but_diagnosed() {
        let plot = build_plot(&entries(&[0.001, 0.002]), 0.05).unwrap();
        let c = classify_plot(&plot, &PlotConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Ambiguous);
        assert!(c.diagnostics.ks_statistic > 0.9);
        assert_eq!(c.diagnostics.fraction_below_alpha, 1.0);
    }

    #[test]
    fn even_grid_is_uniform() {
        let ps: Vec<f64> = (1..=20).map(|i| (i as f64 - 0.5) / 20.0).collect();
        let plot = build_plot(&entries(&ps), 0.05).unwrap();
        let c = classify_plot(&plot, &PlotConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Uniform45);
        assert_abs_diff_eq!(c.diagnostics.ks_statistic, 0.025, epsilon = 1e-15);
    }

    #[test]
    fn mixture_is_bilinear() {
        // Eight near-zero p-values followed by a uniform spread.
        let mut ps: Vec<f64> = (1..=8).map(|i| 0.0005 * i as f64).collect();
        ps.extend((1..=12).map(|i| i as f64 / 12.0 - 0.02));
        let plot = build_plot(&entries(&ps), 0.05).unwrap();
        let c = classify_plot(&plot, &PlotConfig::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Bilinear);
        assert_eq!(c.diagnostics.changepoint_index, Some(8));
        let (s1, s2) = c.diagnostics.segment_slopes.unwrap();
        assert!(s1 < s2);
    }

    #[test]
    fn kolmogorov_tail_branches_agree() {
        // Both series converge at the switch point.
        let lambda: f64 = 1.18;
        let c = -2.0 * lambda * lambda;
        let alt: f64 = 2.0
            * (1..=100)
                .map(|j: i32| if j % 2 == 1 { 1.0 } else { -1.0 } * (c * (j * j) as f64).exp())
                .sum::<f64>();
        assert_abs_diff_eq!(kolmogorov_sf(lambda - 1e-12), alt, epsilon = 1e-10);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(5.0) < 1e-20);
        // Textbook critical value: P(K > 1.3581) ≈ 0.05.
        assert_abs_diff_eq!(kolmogorov_sf(1.3581), 0.05, epsilon = 1e-4);
    }

    #[test]
    fn config_validation() {
        let mut c = PlotConfig::default();
        c.bilinear_min_segment = 1;
        assert!(c.validate().is_err());
        let mut c = PlotConfig::default();
        c.alpha = 1.0;
        assert!(c.validate().is_err());
    }
}
