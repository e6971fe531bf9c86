//! The ZDT two-objective test suite (functions 1, 2, 3 and 6) at arbitrary
//! dimension, plus reference Pareto fronts for indicator computation.
//!
//! All four functions are minimization problems on the unit box, so raw and
//! normalized coordinates coincide. Dimension is configurable; the benchmark
//! protocols use 30 and 100 variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::types::ObjectiveVector;

/// Grid density used when a reference front has to be traced numerically.
const FRONT_GRID: usize = 100_000;

/// f1 = x1, g = 1 + 9 * mean(x2..xP), f2 = g * (1 - sqrt(f1/g)).
/// The Pareto front is f2 = 1 - sqrt(f1), f1 in [0, 1] (convex).
pub fn zdt1(x: &[f64]) -> [f64; 2] {
    let f1 = x[0];
    let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64;
    [f1, g * (1.0 - (f1 / g).sqrt())]
}

/// Same g as ZDT1 with f2 = g * (1 - (f1/g)^2).
/// The Pareto front is f2 = 1 - f1^2, f1 in [0, 1] (concave).
pub fn zdt2(x: &[f64]) -> [f64; 2] {
    let f1 = x[0];
    let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64;
    [f1, g * (1.0 - (f1 / g).powi(2))]
}

/// Same g as ZDT1 with a sine term that splits the front into five disjoint
/// segments: f2 = g * (1 - sqrt(f1/g) - (f1/g) * sin(10 pi f1)).
pub fn zdt3(x: &[f64]) -> [f64; 2] {
    let f1 = x[0];
    let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64;
    [
        f1,
        g * (1.0 - (f1 / g).sqrt() - f1 / g * (10.0 * std::f64::consts::PI * f1).sin()),
    ]
}

/// f1 = 1 - exp(-4 x1) sin^6(6 pi x1), g = 1 + 9 * mean(x2..xP)^(1/4),
/// f2 = g * (1 - (f1/g)^2). Non-uniformly distributed front with
/// f1 >= 0.2808 (the objective-space image never reaches f1 = 0).
pub fn zdt6(x: &[f64]) -> [f64; 2] {
    let f1 = 1.0
        - (-4.0 * x[0]).exp() * (6.0 * std::f64::consts::PI * x[0]).sin().powi(6);
    let g = 1.0 + 9.0 * (x[1..].iter().sum::<f64>() / (x.len() - 1) as f64).powf(0.25);
    [f1, g * (1.0 - (f1 / g).powi(2))]
}

/// Which member of the suite a [`Zdt`] instance evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZdtFunction {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt6,
}

impl ZdtFunction {
    pub fn id(&self) -> &'static str {
        match self {
            ZdtFunction::Zdt1 => "zdt1",
            ZdtFunction::Zdt2 => "zdt2",
            ZdtFunction::Zdt3 => "zdt3",
            ZdtFunction::Zdt6 => "zdt6",
        }
    }
}

/// A ZDT instance at a fixed dimension.
#[derive(Clone, Debug)]
pub struct Zdt {
    function: ZdtFunction,
    dimension: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Zdt {
    /// Dimension must be at least 2 (one position variable plus at least one
    /// distance variable).
    pub fn new(function: ZdtFunction, dimension: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidParameter {
                name: "dimension",
                message: format!("ZDT problems need dimension >= 2, got {dimension}"),
            });
        }
        Ok(Self {
            function,
            dimension,
            lower: vec![0.0; dimension],
            upper: vec![1.0; dimension],
        })
    }

    pub fn function(&self) -> ZdtFunction {
        self.function
    }
}

impl Problem for Zdt {
    fn name(&self) -> &str {
        self.function.id()
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn objectives(&self) -> usize {
        2
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn evaluate(&self, x: &[f64]) -> Result<ObjectiveVector> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                context: "zdt evaluate",
                expected: self.dimension,
                got: x.len(),
            });
        }
        let f = match self.function {
            ZdtFunction::Zdt1 => zdt1(x),
            ZdtFunction::Zdt2 => zdt2(x),
            ZdtFunction::Zdt3 => zdt3(x),
            ZdtFunction::Zdt6 => zdt6(x),
        };
        Ok(ObjectiveVector(f.to_vec()))
    }
}

/// Looks a suite member up by its lowercase identifier ("zdt1", ...).
pub fn problem_by_name(id: &str, dimension: usize) -> Result<Zdt> {
    let function = match id.to_ascii_lowercase().as_str() {
        "zdt1" => ZdtFunction::Zdt1,
        "zdt2" => ZdtFunction::Zdt2,
        "zdt3" => ZdtFunction::Zdt3,
        "zdt6" => ZdtFunction::Zdt6,
        _ => return Err(Error::UnknownProblem(id.to_string())),
    };
    Zdt::new(function, dimension)
}

/// A discretized true Pareto front used as the reference set for inverted
/// generational distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFront {
    pub problem: String,
    pub resolution: usize,
    pub points: Vec<ObjectiveVector>,
}

/// Builds the reference front of a suite member at the given resolution.
///
/// ZDT1, ZDT2, and ZDT6 have closed-form fronts sampled uniformly in f1
/// (ZDT6 over its attainable f1 range, which starts above zero). ZDT3 is
/// traced on a dense f1 grid with the dominated portion removed, then
/// thinned to the requested resolution by even index selection. Uniform f1
/// spacing keeps the inverted-generational-distance weighting flat across
/// the front instead of concentrating it wherever a parameterization slows
/// down.
pub fn reference_front(problem_id: &str, resolution: usize) -> Result<ReferenceFront> {
    if resolution < 2 {
        return Err(Error::InvalidParameter {
            name: "resolution",
            message: format!("reference front needs resolution >= 2, got {resolution}"),
        });
    }
    let id = problem_id.to_ascii_lowercase();
    let points: Vec<[f64; 2]> = match id.as_str() {
        "zdt1" => uniform_f1(resolution, |f1| 1.0 - f1.sqrt()),
        "zdt2" => uniform_f1(resolution, |f1| 1.0 - f1 * f1),
        "zdt3" => {
            let curve = (0..FRONT_GRID).map(|j| {
                let x1 = j as f64 / (FRONT_GRID - 1) as f64;
                [
                    x1,
                    1.0 - x1.sqrt() - x1 * (10.0 * std::f64::consts::PI * x1).sin(),
                ]
            });
            thin(non_dominated_curve(curve), resolution)
        }
        "zdt6" => {
            // The attainable f1 minimum sits where the envelope
            // exp(-4*x1)*sin^6(6*pi*x1) is stationary: tan(6*pi*x1) = 9*pi,
            // giving x1* = atan(9*pi)/(6*pi). f1 is continuous with
            // f1(0) = 1, so the attainable range is [f1(x1*), 1] and the
            // front is f2 = 1 - f1^2 sampled uniformly across it.
            let pi = std::f64::consts::PI;
            let x_star = (9.0 * pi).atan() / (6.0 * pi);
            let f1_min = 1.0 - (-4.0 * x_star).exp() * (6.0 * pi * x_star).sin().powi(6);
            (0..resolution)
                .map(|j| {
                    let t = j as f64 / (resolution - 1) as f64;
                    let f1 = f1_min + t * (1.0 - f1_min);
                    [f1, 1.0 - f1 * f1]
                })
                .collect()
        }
        _ => return Err(Error::UnknownProblem(problem_id.to_string())),
    };
    Ok(ReferenceFront {
        problem: id,
        resolution,
        points: points
            .into_iter()
            .map(|p| ObjectiveVector(p.to_vec()))
            .collect(),
    })
}

fn uniform_f1(resolution: usize, f2: impl Fn(f64) -> f64) -> Vec<[f64; 2]> {
    (0..resolution)
        .map(|i| {
            let f1 = i as f64 / (resolution - 1) as f64;
            [f1, f2(f1)]
        })
        .collect()
}

/// Keeps the non-dominated, duplicate-free subset of a sampled curve,
/// sorted by ascending f1. For two minimized objectives a point survives
/// exactly when its f2 strictly improves on everything at smaller-or-equal
/// f1, which one sweep over the (f1, f2)-sorted samples decides.
fn non_dominated_curve(curve: impl Iterator<Item = [f64; 2]>) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = curve.collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut kept = Vec::new();
    let mut best_f2 = f64::INFINITY;
    for p in pts {
        if p[1] < best_f2 {
            best_f2 = p[1];
            kept.push(p);
        }
    }
    kept
}

fn thin(points: Vec<[f64; 2]>, resolution: usize) -> Vec<[f64; 2]> {
    if points.len() <= resolution {
        return points;
    }
    (0..resolution)
        .map(|i| points[i * (points.len() - 1) / (resolution - 1)])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const P: usize = 30;

    fn probe(function: ZdtFunction, x1: f64, rest: f64) -> [f64; 2] {
        let mut x = vec![rest; P];
        x[0] = x1;
        let f = Zdt::new(function, P)
            .unwrap()
            .evaluate(&x)
            .unwrap();
        [f[0], f[1]]
    }

    #[test]
    fn zdt1_matches_frozen_values() {
        let worst = probe(ZdtFunction::Zdt1, 1.0, 1.0);
        assert_abs_diff_eq!(worst[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(worst[1], 6.83772233983162, epsilon = 1e-12);
        assert_eq!(probe(ZdtFunction::Zdt1, 0.0, 0.0), [0.0, 1.0]);
        assert_eq!(probe(ZdtFunction::Zdt1, 1.0, 0.0), [1.0, 0.0]);
        let mid = probe(ZdtFunction::Zdt1, 0.25, 0.5);
        assert_abs_diff_eq!(mid[1], 4.327396060044142, epsilon = 1e-12);
    }

    #[test]
    fn zdt2_matches_frozen_values() {
        let worst = probe(ZdtFunction::Zdt2, 1.0, 1.0);
        assert_abs_diff_eq!(worst[1], 9.9, epsilon = 1e-12);
        let mid = probe(ZdtFunction::Zdt2, 0.5, 0.2);
        assert_abs_diff_eq!(mid[1], 2.7107142857142863, epsilon = 1e-12);
    }

    #[test]
    fn zdt3_matches_frozen_values() {
        let a = probe(ZdtFunction::Zdt3, 0.5, 0.0);
        assert_abs_diff_eq!(a[1], 0.2928932188134521, epsilon = 1e-12);
        let b = probe(ZdtFunction::Zdt3, 0.1, 0.0);
        assert_abs_diff_eq!(b[1], 0.683772233983162, epsilon = 1e-12);
        let c = probe(ZdtFunction::Zdt3, 0.33, 0.7);
        assert_abs_diff_eq!(c[1], 6.014880250248474, epsilon = 1e-12);
    }

    #[test]
    fn zdt6_matches_frozen_values() {
        assert_eq!(probe(ZdtFunction::Zdt6, 0.0, 0.0), [1.0, 0.0]);
        let peak = probe(ZdtFunction::Zdt6, 1.0 / 12.0, 0.0);
        assert_abs_diff_eq!(peak[0], 0.28346868942621073, epsilon = 1e-12);
        assert_abs_diff_eq!(peak[1], 0.9196455021149865, epsilon = 1e-12);
        let far = probe(ZdtFunction::Zdt6, 0.0, 1.0);
        assert_abs_diff_eq!(far[1], 9.9, epsilon = 1e-12);
        let mid = probe(ZdtFunction::Zdt6, 0.3, 0.5);
        assert_abs_diff_eq!(mid[0], 0.9875789378882274, epsilon = 1e-12);
        assert_abs_diff_eq!(mid[1], 8.454236685934896, epsilon = 1e-12);
    }

    #[test]
    fn dimension_below_two_is_rejected() {
        assert!(Zdt::new(ZdtFunction::Zdt1, 1).is_err());
        assert!(Zdt::new(ZdtFunction::Zdt1, 2).is_ok());
    }

    #[test]
    fn lookup_by_name_is_case_insensitive() {
        assert_eq!(
            problem_by_name("ZDT3", 30).unwrap().function(),
            ZdtFunction::Zdt3
        );
        assert!(matches!(
            problem_by_name("zdt4", 30),
            Err(Error::UnknownProblem(_))
        ));
    }

    #[test]
    fn zdt1_front_is_exact_curve() {
        let front = reference_front("zdt1", 1001).unwrap();
        assert_eq!(front.points.len(), 1001);
        assert_eq!(front.points[0].as_slice(), &[0.0, 1.0]);
        assert_eq!(front.points[1000].as_slice(), &[1.0, 0.0]);
        for p in &front.points {
            assert_abs_diff_eq!(p[1], 1.0 - p[0].sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn zdt2_front_is_exact_curve() {
        let front = reference_front("zdt2", 501).unwrap();
        assert_eq!(front.points.len(), 501);
        for p in &front.points {
            assert_abs_diff_eq!(p[1], 1.0 - p[0] * p[0], epsilon = 1e-15);
        }
    }

    #[test]
    fn zdt3_front_has_five_segments_and_frozen_extremes() {
        let front = reference_front("zdt3", 1000).unwrap();
        assert_eq!(front.points.len(), 1000);
        // Count disjoint f1 segments: a break is a gap much wider than the
        // tracing grid step.
        let gap = 3.0 / (FRONT_GRID - 1) as f64;
        let mut segments = 1;
        for w in front.points.windows(2) {
            assert!(w[0][0] < w[1][0], "front must be sorted with unique f1");
            assert!(w[0][1] > w[1][1], "front must be mutually non-dominated");
            if w[1][0] - w[0][0] > gap * (front.points.len() as f64) {
                segments += 1;
            }
        }
        assert_eq!(segments, 5, "expected the five disjoint front segments");
        let last = front.points.last().unwrap();
        assert_abs_diff_eq!(last[0], 0.8518285182851828, epsilon = 1e-3);
        assert_abs_diff_eq!(last[1], -0.7733690043587571, epsilon = 1e-3);
    }

    #[test]
    fn zdt6_front_starts_at_frozen_left_endpoint() {
        let front = reference_front("zdt6", 1000).unwrap();
        assert_eq!(front.points.len(), 1000);
        let first = front.points.first().unwrap();
        // Independently minimized: f1_min = 0.28077531881536943.
        assert_abs_diff_eq!(first[0], 0.28077531881536943, epsilon = 1e-6);
        let last = front.points.last().unwrap();
        assert_abs_diff_eq!(last[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(last[1], 0.0, epsilon = 1e-12);
        for p in &front.points {
            assert_abs_diff_eq!(p[1], 1.0 - p[0] * p[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn reference_front_rejects_bad_inputs() {
        assert!(reference_front("zdt1", 1).is_err());
        assert!(matches!(
            reference_front("dtlz2", 100),
            Err(Error::UnknownProblem(_))
        ));
    }
}
