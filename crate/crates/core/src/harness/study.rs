use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{exact_mixing_time, min_diameter, return_mixing_time_exact, EpsilonGrid};
use crate::envs::{build, EnvInstance, EnvParams, Family};
use crate::mdp::{induce_chain, PolicyTable};
use crate::{invalid, Error, Result};

/// Parameter varied along a study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Tau,
    /// Task count `|Z|`: rooms for the room families, goals for the task grid.
    Tasks,
    D,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Exact `t_ret` averaged over start states.
    TretMean,
    /// Exact `t_ret` maximised over start states.
    TretMax,
    /// `t_mix(1/4)` of the policy's chain.
    TMix,
    MinDiameter,
}

/// Policy whose chain is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyPolicy {
    Optimal,
    Uniform,
}

macro_rules! names {
    ($t:ty { $($v:ident => $s:literal),* $(,)? }) => {
        impl $t {
            pub fn name(self) -> &'static str {
                match self { $(Self::$v => $s),* }
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok(Self::$v),)*
                    _ => Err(invalid(format!("unknown {} `{s}`", stringify!($t).to_lowercase()))),
                }
            }
        }
    };
}

names!(Axis { Tau => "tau", Tasks => "tasks", D => "d", X => "x" });
names!(Quantity { TretMean => "tret_mean", TretMax => "tret_max", TMix => "t_mix", MinDiameter => "min_diameter" });
names!(StudyPolicy { Optimal => "optimal", Uniform => "uniform" });

/// Least-squares line `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<Fit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid("a fit needs at least two paired points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("a fit needs at least two distinct x values"));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(Fit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

/// Fit of `ln y` against `ln x`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<Fit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(invalid("log-log fits need positive values"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudySpec {
    pub family: Family,
    pub base: EnvParams,
    pub axis: Axis,
    pub points: Vec<f64>,
    pub quantity: Quantity,
    /// Relative tolerances `ε/ρ` for the `t_ret` quantities.
    pub relative_errors: Vec<f64>,
    pub policy: StudyPolicy,
    /// Construction seeds averaged at every point.
    pub seeds: Vec<u64>,
    /// `t_ret` horizon cap as a multiple of `τ·|Z|` (switching families).
    pub horizon_factor: usize,
    /// Fixed `t_ret` horizon cap; overrides `horizon_factor`.
    pub horizon_cap: Option<usize>,
}

impl Default for StudySpec {
    fn default() -> Self {
        Self {
            family: Family::PassiveRooms,
            base: EnvParams {
                d: Some(3),
                n_rooms: Some(2),
                tau: Some(50),
                ..EnvParams::default()
            },
            axis: Axis::Tau,
            points: vec![25.0, 50.0, 100.0, 200.0],
            quantity: Quantity::TretMax,
            relative_errors: vec![0.1],
            policy: StudyPolicy::Optimal,
            seeds: (0..10).collect(),
            horizon_factor: 400,
            horizon_cap: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyPoint {
    pub axis_value: f64,
    pub relative_error: Option<f64>,
    pub n_states: usize,
    pub tau: Option<usize>,
    pub n_tasks: usize,
    /// One value per construction seed.
    pub per_seed: Vec<f64>,
    /// Mean over seeds.
    pub value: f64,
    /// `value / (τ·|Z|)` for switching families.
    pub normalized: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyFit {
    pub relative_error: Option<f64>,
    /// `value` against the axis parameter.
    pub linear: Fit,
    /// `ln value` against `ln |S|`.
    pub loglog: Fit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingStudy {
    pub spec: StudySpec,
    pub points: Vec<StudyPoint>,
    pub fits: Vec<StudyFit>,
}

impl ScalingStudy {
    pub fn fit(&self, relative_error: Option<f64>) -> Option<&StudyFit> {
        self.fits.iter().find(|f| f.relative_error == relative_error)
    }
}

fn with_axis(base: &EnvParams, family: Family, axis: Axis, v: f64) -> Result<EnvParams> {
    let mut p = base.clone();
    let int = || {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(invalid(format!("axis {axis} needs whole values, got {v}")))
        }
    };
    match axis {
        Axis::Tau => p.tau = Some(int()?),
        Axis::D => p.d = Some(int()?),
        Axis::X => p.x = Some(v),
        Axis::Tasks if family == Family::TaskGrid => p.n_tasks = Some(int()?),
        Axis::Tasks => p.n_rooms = Some(int()?),
    }
    Ok(p)
}

fn measure(env: &EnvInstance, spec: &StudySpec) -> Result<Vec<f64>> {
    let policy = || -> Result<PolicyTable> {
        Ok(match spec.policy {
            StudyPolicy::Optimal => env.optimal_policy()?.clone(),
            StudyPolicy::Uniform => PolicyTable::uniform(env.n_states(), env.n_actions()),
        })
    };
    match spec.quantity {
        Quantity::MinDiameter => Ok(vec![min_diameter(&env.mdp)?]),
        Quantity::TMix => {
            let chain = induce_chain(&env.mdp, &policy()?)?;
            Ok(vec![exact_mixing_time(&chain, 0.25)? as f64])
        }
        Quantity::TretMean | Quantity::TretMax => {
            let cap = match (spec.horizon_cap, env.tau) {
                (Some(c), _) => c,
                (None, Some(tau)) => spec.horizon_factor * tau * env.n_tasks,
                (None, None) => {
                    let chain = induce_chain(&env.mdp, &policy()?)?;
                    100 * env.n_states() * exact_mixing_time(&chain, 0.25)?.max(1)
                }
            };
            let grid = EpsilonGrid::Relative(spec.relative_errors.clone());
            let rep = return_mixing_time_exact(&env.mdp, &policy()?, &grid, cap)?;
            Ok(if spec.quantity == Quantity::TretMean {
                rep.mean_tret
            } else {
                rep.max_tret.iter().map(|&t| t as f64).collect()
            })
        }
    }
}

/// Measure `spec.quantity` along `spec.axis` and fit the trend.
pub fn mixing_scaling_study(spec: &StudySpec) -> Result<ScalingStudy> {
    if spec.points.len() < 4 {
        return Err(invalid(format!(
            "a scaling study needs at least 4 axis points, got {}",
            spec.points.len()
        )));
    }
    if spec.seeds.is_empty() {
        return Err(invalid("a scaling study needs at least one seed"));
    }
    let uses_eps = matches!(spec.quantity, Quantity::TretMean | Quantity::TretMax);
    if uses_eps && spec.relative_errors.is_empty() {
        return Err(invalid("t_ret studies need at least one relative error"));
    }
    let jobs: Vec<(usize, u64)> = (0..spec.points.len())
        .flat_map(|i| spec.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let measured = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let params = with_axis(&spec.base, spec.family, spec.axis, spec.points[i])?;
            let env = build(spec.family, &params, seed)?;
            Ok((env.n_states(), env.tau, env.n_tasks, measure(&env, spec)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let eps_list: Vec<Option<f64>> = if uses_eps {
        spec.relative_errors.iter().map(|&e| Some(e)).collect()
    } else {
        vec![None]
    };
    let k = spec.seeds.len();
    let mut points = Vec::new();
    for (i, chunk) in measured.chunks(k).enumerate() {
        let (n_states, tau, n_tasks, _) = chunk[0];
        for (j, &eps) in eps_list.iter().enumerate() {
            let per_seed: Vec<f64> = chunk.iter().map(|m| m.3[j]).collect();
            let value = per_seed.iter().sum::<f64>() / k as f64;
            points.push(StudyPoint {
                axis_value: spec.points[i],
                relative_error: eps,
                n_states,
                tau,
                n_tasks,
                per_seed,
                value,
                normalized: tau.map(|t| value / (t * n_tasks) as f64),
            });
        }
    }
    let fits = eps_list
        .iter()
        .map(|&eps| {
            let pts: Vec<&StudyPoint> = points.iter().filter(|p| p.relative_error == eps).collect();
            let x: Vec<f64> = pts.iter().map(|p| p.axis_value).collect();
            let s: Vec<f64> = pts.iter().map(|p| p.n_states as f64).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.value).collect();
            Ok(StudyFit {
                relative_error: eps,
                linear: linear_fit(&x, &y)?,
                loglog: loglog_fit(&s, &y)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingStudy {
        spec: spec.clone(),
        points,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_lines_fit_perfectly() {
        let f = linear_fit(&[1.0, 2.0, 3.0, 4.0], &[3.0, 5.0, 7.0, 9.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let g = loglog_fit(&[1.0, 4.0, 9.0, 16.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((g.slope - 0.5).abs() < 1e-12);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn too_few_points_rejected() {
        let spec = StudySpec {
            points: vec![25.0, 50.0, 100.0],
            ..StudySpec::default()
        };
        assert!(mixing_scaling_study(&spec).is_err());
    }

    #[test]
    fn normalized_values_divide_exactly() {
        let spec = StudySpec {
            base: EnvParams {
                d: Some(2),
                n_rooms: Some(2),
                tau: Some(4),
                ..EnvParams::default()
            },
            points: vec![4.0, 6.0, 8.0, 10.0],
            seeds: vec![0, 1],
            ..StudySpec::default()
        };
        let s = mixing_scaling_study(&spec).unwrap();
        assert_eq!(s.points.len(), 4);
        for p in &s.points {
            let tau = p.tau.unwrap();
            assert_eq!(p.tau, Some(p.axis_value as usize));
            assert_eq!(p.normalized, Some(p.value / (tau * p.n_tasks) as f64));
        }
        assert!(s.fit(Some(0.1)).is_some());
    }
}
