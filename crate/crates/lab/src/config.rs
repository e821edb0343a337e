//! Run configuration: a JSON file overlaid by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xcf_core::asymptotics::FitWindow;
use xcf_core::{FlowSign, Geometry, IntegratorControls, MilnorMetric, VariableMode};

use crate::error::{io_err, LabError, Result};

/// Step budget for open-ended runs when none is given explicitly.
pub const AUTO_MAX_STEPS: usize = 200_000;

/// `t_end` as written in a config file: a number or `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TEnd {
    Number(f64),
    Text(String),
}

/// Every setting is optional so that files and flags can be merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub geometry: Option<String>,
    pub sign: Option<String>,
    pub init: Option<[f64; 3]>,
    pub t_end: Option<TEnd>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_steps: Option<usize>,
    pub variable_mode: Option<String>,
    pub out: Option<PathBuf>,
    pub grid: Option<String>,
    pub jobs: Option<usize>,
    pub fit_window: Option<[f64; 2]>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| LabError::Json { path: path.to_path_buf(), source })
    }

    /// Settings from `top` win over those in `self`.
    pub fn overlay(self, top: ConfigFile) -> ConfigFile {
        ConfigFile {
            geometry: top.geometry.or(self.geometry),
            sign: top.sign.or(self.sign),
            init: top.init.or(self.init),
            t_end: top.t_end.or(self.t_end),
            rel_tol: top.rel_tol.or(self.rel_tol),
            abs_tol: top.abs_tol.or(self.abs_tol),
            max_steps: top.max_steps.or(self.max_steps),
            variable_mode: top.variable_mode.or(self.variable_mode),
            out: top.out.or(self.out),
            grid: top.grid.or(self.grid),
            jobs: top.jobs.or(self.jobs),
            fit_window: top.fit_window.or(self.fit_window),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Until(f64),
    /// Run until blow-up, the step budget, or the component cap.
    Auto,
}

impl Horizon {
    pub fn t_end(self) -> f64 {
        match self {
            Horizon::Until(t) => t,
            Horizon::Auto => f64::INFINITY,
        }
    }
}

fn parse_horizon(t: &TEnd) -> Result<Horizon> {
    let value = match t {
        TEnd::Number(x) => *x,
        TEnd::Text(s) if s.trim().eq_ignore_ascii_case("auto") => return Ok(Horizon::Auto),
        TEnd::Text(s) => {
            s.trim().parse().map_err(|_| LabError::Config(format!("t_end: expected a number or 'auto', got '{s}'")))?
        }
    };
    if !(value > 0.0 && value.is_finite()) {
        return Err(LabError::Config(format!("t_end must be positive and finite, got {value}")));
    }
    Ok(Horizon::Until(value))
}

/// Parse `"A,B,C"`.
pub fn parse_triple(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(LabError::Config(format!("expected three comma-separated numbers, got '{s}'")));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| LabError::Config(format!("'{p}' is not a number")))?;
    }
    Ok(out)
}

pub fn parse_variable_mode(s: &str) -> Result<VariableMode> {
    match s.trim().to_ascii_lowercase().as_str() {
        "log" | "logarithmic" => Ok(VariableMode::Logarithmic),
        "linear" => Ok(VariableMode::Linear),
        other => Err(LabError::Config(format!("unknown variable mode '{other}' (use log or linear)"))),
    }
}

fn metric(m: [f64; 3]) -> Result<MilnorMetric> {
    MilnorMetric::from_array(m).map_err(|e| LabError::Config(e.to_string()))
}

/// Sweep grid: values per component, combined as a Cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: [Option<Vec<f64>>; 3],
}

impl Grid {
    /// Parse `"A=1,2,3;B=1;C=0.1:1:10"`. `lo:hi:n` is `n` evenly spaced values.
    pub fn parse(spec: &str) -> Result<Grid> {
        let mut axes: [Option<Vec<f64>>; 3] = [None, None, None];
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, values) = part
                .split_once('=')
                .ok_or_else(|| LabError::Config(format!("grid entry '{part}' is not of the form X=values")))?;
            let axis = match name.trim() {
                "A" | "a" => 0,
                "B" | "b" => 1,
                "C" | "c" => 2,
                other => return Err(LabError::Config(format!("grid axis '{other}' is not A, B or C"))),
            };
            if axes[axis].is_some() {
                return Err(LabError::Config(format!("grid axis {} given twice", name.trim())));
            }
            axes[axis] = Some(parse_axis(values.trim())?);
        }
        if axes.iter().all(Option::is_none) {
            return Err(LabError::Config("grid is empty".into()));
        }
        Ok(Grid { axes })
    }

    /// Grid points, `A` varying slowest. Axes not in the grid take their
    /// value from `base`.
    pub fn points(&self, base: Option<[f64; 3]>) -> Result<Vec<[f64; 3]>> {
        let mut axes: Vec<Vec<f64>> = Vec::with_capacity(3);
        for (i, axis) in self.axes.iter().enumerate() {
            match (axis, base) {
                (Some(v), _) => axes.push(v.clone()),
                (None, Some(b)) => axes.push(vec![b[i]]),
                (None, None) => {
                    return Err(LabError::Config(format!(
                        "grid leaves {} unset and no --init was given",
                        ["A", "B", "C"][i]
                    )))
                }
            }
        }
        let mut out = Vec::with_capacity(axes.iter().map(Vec::len).product());
        for &a in &axes[0] {
            for &b in &axes[1] {
                for &c in &axes[2] {
                    out.push([a, b, c]);
                }
            }
        }
        Ok(out)
    }
}

fn parse_axis(values: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim().parse().map_err(|_| LabError::Config(format!("'{}' is not a number", s.trim())))
    };
    let out = if values.contains(':') {
        let parts: Vec<&str> = values.split(':').collect();
        if parts.len() != 3 {
            return Err(LabError::Config(format!("range '{values}' must be lo:hi:count")));
        }
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| LabError::Config(format!("range count '{}' is not a positive integer", parts[2].trim())))?;
        match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        values.split(',').map(num).collect::<Result<Vec<f64>>>()?
    };
    if out.is_empty() {
        return Err(LabError::Config(format!("grid axis '{values}' has no values")));
    }
    if let Some(bad) = out.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(LabError::Config(format!("grid value {bad} is not a positive metric component")));
    }
    Ok(out)
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub sign: FlowSign,
    pub init: Option<MilnorMetric>,
    pub horizon: Horizon,
    pub controls: IntegratorControls,
    pub out: Option<PathBuf>,
    pub grid: Option<Grid>,
    pub jobs: Option<usize>,
    pub fit_window: FitWindow,
}

impl RunConfig {
    pub fn resolve(file: &ConfigFile) -> Result<RunConfig> {
        let geometry = file
            .geometry
            .as_deref()
            .ok_or_else(|| LabError::Config("no geometry given (use --geometry)".into()))?
            .parse::<Geometry>()
            .map_err(|e| LabError::Config(e.to_string()))?;
        let sign = match file.sign.as_deref() {
            Some(s) => s.parse::<FlowSign>().map_err(|e| LabError::Config(e.to_string()))?,
            None => FlowSign::Positive,
        };
        let init = file.init.map(metric).transpose()?;
        let horizon = file.t_end.as_ref().map(parse_horizon).transpose()?.unwrap_or(Horizon::Auto);

        let mut controls = IntegratorControls::default();
        if let Some(x) = file.rel_tol {
            controls.rel_tol = x;
        }
        if let Some(x) = file.abs_tol {
            controls.abs_tol = x;
        }
        controls.max_steps = match (file.max_steps, horizon) {
            (Some(n), _) => n,
            (None, Horizon::Auto) => AUTO_MAX_STEPS,
            (None, Horizon::Until(_)) => controls.max_steps,
        };
        if let Some(mode) = &file.variable_mode {
            controls.variable_mode = parse_variable_mode(mode)?;
        }
        controls.validate().map_err(|e| LabError::Config(e.to_string()))?;

        let grid = file.grid.as_deref().map(Grid::parse).transpose()?;
        if file.jobs == Some(0) {
            return Err(LabError::Config("jobs must be at least 1".into()));
        }
        let fit_window = match file.fit_window {
            Some([lo, hi]) => FitWindow::new(lo, hi).map_err(|e| LabError::Config(e.to_string()))?,
            None => FitWindow::default(),
        };
        Ok(RunConfig {
            geometry,
            sign,
            init,
            horizon,
            controls,
            out: file.out.clone(),
            grid,
            jobs: file.jobs,
            fit_window,
        })
    }

    pub fn initial_metric(&self) -> Result<MilnorMetric> {
        self.init.ok_or_else(|| LabError::Config("no initial metric given (use --init A,B,C)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = ConfigFile { geometry: Some("su2".into()), rel_tol: Some(1e-8), ..Default::default() };
        let flags = ConfigFile { rel_tol: Some(1e-9), init: Some([1.0, 2.0, 3.0]), ..Default::default() };
        let merged = file.overlay(flags);
        assert_eq!(merged.geometry.as_deref(), Some("su2"));
        assert_eq!(merged.rel_tol, Some(1e-9));
        assert_eq!(merged.init, Some([1.0, 2.0, 3.0]));
    }

    #[test]
    fn file_parses_number_or_auto() {
        let f: ConfigFile = serde_json::from_str(r#"{"geometry":"heisenberg","t_end":"auto","init":[1,1,1]}"#).unwrap();
        let cfg = RunConfig::resolve(&f).unwrap();
        assert_eq!(cfg.horizon, Horizon::Auto);
        assert_eq!(cfg.controls.max_steps, AUTO_MAX_STEPS);
        let f: ConfigFile = serde_json::from_str(r#"{"geometry":"su2","t_end":2.5}"#).unwrap();
        assert_eq!(RunConfig::resolve(&f).unwrap().horizon, Horizon::Until(2.5));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"geometri":"su2"}"#).is_err());
    }

    #[test]
    fn bad_values_are_config_errors() {
        let bad = [
            ConfigFile { geometry: Some("su3".into()), ..Default::default() },
            ConfigFile { geometry: Some("su2".into()), init: Some([1.0, -1.0, 1.0]), ..Default::default() },
            ConfigFile { geometry: Some("su2".into()), t_end: Some(TEnd::Text("soon".into())), ..Default::default() },
            ConfigFile { geometry: Some("su2".into()), rel_tol: Some(2.0), ..Default::default() },
            ConfigFile { geometry: Some("su2".into()), jobs: Some(0), ..Default::default() },
            ConfigFile::default(),
        ];
        for f in bad {
            assert!(matches!(RunConfig::resolve(&f), Err(LabError::Config(_))), "{f:?}");
        }
    }

    #[test]
    fn grid_product_order() {
        let g = Grid::parse("A=1,2;C=0.1:0.3:3").unwrap();
        let pts = g.points(Some([9.0, 5.0, 9.0])).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], [1.0, 5.0, 0.1]);
        assert!((pts[1][2] - 0.2).abs() < 1e-15);
        assert_eq!(pts[3][0], 2.0);
        assert!(g.points(None).is_err());
    }

    #[test]
    fn grid_errors() {
        for spec in ["", "D=1", "A=1;A=2", "A=1:2", "B=0", "C=x", "A=1:2:0"] {
            assert!(Grid::parse(spec).is_err(), "{spec}");
        }
    }

    #[test]
    fn triples() {
        assert_eq!(parse_triple("1, 2,3.5").unwrap(), [1.0, 2.0, 3.5]);
        assert!(parse_triple("1,2").is_err());
        assert!(parse_triple("1,2,x").is_err());
    }
}
