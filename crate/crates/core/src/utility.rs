//! Concave non-decreasing utilities on the half-line or the whole line.
//!
//! Specs parse from short strings such as `capped_sqrt:cap=2`, `log`,
//! `power:alpha=0.5`, `neg_exp:rate=1`, `linear_cap:slope=1,cap=1` or
//! `pl:0:0,1:1,4:2,5.5:2`, optionally followed by `;domain=real` or
//! `;domain=positive`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// `(0, ∞)`, with `U = -∞` below zero and the right limit at zero.
    Positive,
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilityKind {
    CappedSqrt { cap: f64 },
    Log,
    /// `x^alpha`, `0 < alpha < 1`.
    Power { alpha: f64 },
    /// `-exp(-rate x)`.
    NegExp { rate: f64 },
    /// `min(slope x, cap)`.
    LinearCap { slope: f64, cap: f64 },
    /// Breakpoints `(x, U(x))`, extended beyond the ends by the end slopes.
    PiecewiseLinear { points: Vec<(f64, f64)> },
}

impl UtilityKind {
    fn native_domain(&self) -> Domain {
        match self {
            UtilityKind::CappedSqrt { .. } | UtilityKind::Log | UtilityKind::Power { .. } => Domain::Positive,
            UtilityKind::NegExp { .. } | UtilityKind::LinearCap { .. } => Domain::Real,
            UtilityKind::PiecewiseLinear { points } => {
                if points[0].0 >= 0.0 {
                    Domain::Positive
                } else {
                    Domain::Real
                }
            }
        }
    }
}

/// Below this point, kinds that are native to the half-line follow their
/// tangent when used on the whole line.
const EXTENSION_POINT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilitySpec {
    pub kind: UtilityKind,
    pub domain: Domain,
    /// Additive constant.
    pub shift: f64,
}

impl UtilitySpec {
    pub fn new(kind: UtilityKind) -> Result<Self> {
        let domain = {
            validate(&kind)?;
            kind.native_domain()
        };
        Ok(Self { kind, domain, shift: 0.0 })
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn capped_sqrt(cap: f64) -> Result<Self> {
        Self::new(UtilityKind::CappedSqrt { cap })
    }

    pub fn log() -> Self {
        Self::new(UtilityKind::Log).expect("log has no parameters")
    }

    pub fn power(alpha: f64) -> Result<Self> {
        Self::new(UtilityKind::Power { alpha })
    }

    pub fn neg_exp(rate: f64) -> Result<Self> {
        Self::new(UtilityKind::NegExp { rate })
    }

    pub fn linear_cap(slope: f64, cap: f64) -> Result<Self> {
        Self::new(UtilityKind::LinearCap { slope, cap })
    }

    pub fn piecewise_linear(points: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(UtilityKind::PiecewiseLinear { points })
    }

    /// `U + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.shift += c;
        out
    }

    pub fn is_piecewise_linear(&self) -> bool {
        matches!(self.kind, UtilityKind::PiecewiseLinear { .. })
    }

    fn extended(&self) -> bool {
        self.domain == Domain::Real
            && matches!(
                self.kind,
                UtilityKind::CappedSqrt { .. } | UtilityKind::Log | UtilityKind::Power { .. }
            )
    }

    /// `U(x)`, possibly `-∞`.
    pub fn evaluate(&self, x: f64) -> f64 {
        if self.domain == Domain::Positive && x < 0.0 {
            return f64::NEG_INFINITY;
        }
        if self.extended() && x < EXTENSION_POINT {
            let (u, g) = (self.raw(EXTENSION_POINT), self.raw_slope(EXTENSION_POINT));
            return u + g * (x - EXTENSION_POINT) + self.shift;
        }
        self.raw(x) + self.shift
    }

    fn raw(&self, x: f64) -> f64 {
        match &self.kind {
            UtilityKind::CappedSqrt { cap } => x.sqrt().min(*cap),
            UtilityKind::Log => {
                if x == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    x.ln()
                }
            }
            UtilityKind::Power { alpha } => x.powf(*alpha),
            UtilityKind::NegExp { rate } => -(-rate * x).exp(),
            UtilityKind::LinearCap { slope, cap } => (slope * x).min(*cap),
            UtilityKind::PiecewiseLinear { points } => {
                let i = segment(points, x);
                points[i].1 + slope(points[i], points[i + 1]) * (x - points[i].0)
            }
        }
    }

    /// Right derivative of the unextended kind.
    fn raw_slope(&self, x: f64) -> f64 {
        match &self.kind {
            UtilityKind::CappedSqrt { cap } => {
                if x < cap * cap {
                    0.5 / x.sqrt()
                } else {
                    0.0
                }
            }
            UtilityKind::Log => 1.0 / x,
            UtilityKind::Power { alpha } => alpha * x.powf(alpha - 1.0),
            UtilityKind::NegExp { rate } => rate * (-rate * x).exp(),
            UtilityKind::LinearCap { slope, cap } => {
                if slope * x < *cap {
                    *slope
                } else {
                    0.0
                }
            }
            UtilityKind::PiecewiseLinear { points } => {
                let i = segment(points, x);
                slope(points[i], points[i + 1])
            }
        }
    }

    /// Right derivative at an interior point of the domain.
    pub fn supergradient(&self, x: f64) -> Result<f64> {
        if self.domain == Domain::Positive && !(x > 0.0) || !x.is_finite() {
            return Err(Error::OutsideDomain { x });
        }
        if self.extended() && x < EXTENSION_POINT {
            return Ok(self.raw_slope(EXTENSION_POINT));
        }
        Ok(self.raw_slope(x))
    }

    pub fn is_bounded_above(&self) -> bool {
        match &self.kind {
            UtilityKind::CappedSqrt { .. } | UtilityKind::NegExp { .. } | UtilityKind::LinearCap { .. } => true,
            UtilityKind::Log | UtilityKind::Power { .. } => false,
            UtilityKind::PiecewiseLinear { points } => slope(points[points.len() - 2], points[points.len() - 1]) == 0.0,
        }
    }

    /// `sup U`, or `+∞`.
    pub fn supremum(&self) -> f64 {
        let s = match &self.kind {
            UtilityKind::CappedSqrt { cap } => *cap,
            UtilityKind::NegExp { .. } => 0.0,
            UtilityKind::LinearCap { slope, cap } => {
                if *slope > 0.0 {
                    *cap
                } else {
                    // Constant slope * x = 0 below cap.
                    cap.min(0.0)
                }
            }
            UtilityKind::PiecewiseLinear { points } if self.is_bounded_above() => points[points.len() - 1].1,
            _ => f64::INFINITY,
        };
        s + self.shift
    }

    /// `(a_k, b_k)` with `U(x) = min_k a_k + b_k x`, collinear segments
    /// merged. `None` unless the kind is piecewise linear.
    pub fn affine_pieces(&self) -> Option<Vec<(f64, f64)>> {
        let UtilityKind::PiecewiseLinear { points } = &self.kind else {
            return None;
        };
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        for w in points.windows(2) {
            let b = slope(w[0], w[1]);
            let a = w[0].1 - b * w[0].0 + self.shift;
            match pieces.last() {
                Some(&(_, pb)) if pb == b => {}
                _ => pieces.push((a, b)),
            }
        }
        Some(pieces)
    }
}

/// Index of the segment whose half-open span `[x_i, x_{i+1})` holds `x`,
/// clamped to the end segments.
fn segment(points: &[(f64, f64)], x: f64) -> usize {
    points.partition_point(|p| p.0 <= x).saturating_sub(1).min(points.len() - 2)
}

fn slope(p: (f64, f64), q: (f64, f64)) -> f64 {
    (q.1 - p.1) / (q.0 - p.0)
}

fn validate(kind: &UtilityKind) -> Result<()> {
    let bad = |m: String| Err(Error::BadParameters(m));
    match kind {
        UtilityKind::CappedSqrt { cap } if !(*cap > 0.0 && cap.is_finite()) => bad(format!("cap must be positive, got {cap}")),
        UtilityKind::Power { alpha } if !(*alpha > 0.0 && *alpha < 1.0) => bad(format!("alpha must lie in (0, 1), got {alpha}")),
        UtilityKind::NegExp { rate } if !(*rate > 0.0 && rate.is_finite()) => bad(format!("rate must be positive, got {rate}")),
        UtilityKind::LinearCap { slope, cap } if !(*slope >= 0.0 && slope.is_finite() && cap.is_finite()) => {
            bad(format!("need finite slope >= 0 and finite cap, got {slope}, {cap}"))
        }
        UtilityKind::PiecewiseLinear { points } => {
            if points.len() < 2 {
                return bad("piecewise-linear utility needs at least two breakpoints".into());
            }
            if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
                return bad("breakpoints must be finite".into());
            }
            if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::PointsNotIncreasing);
            }
            let slopes: Vec<f64> = points.windows(2).map(|w| slope(w[0], w[1])).collect();
            if slopes.iter().any(|&s| s < 0.0) {
                return bad("piecewise-linear utility must be non-decreasing".into());
            }
            if slopes.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-15) {
                return bad("piecewise-linear utility must be concave".into());
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

impl FromStr for UtilitySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |message: &str| Error::UtilityParse {
            spec: s.to_string(),
            message: message.to_string(),
        };
        let (body, domain) = match s.split_once(';') {
            None => (s, None),
            Some((body, rest)) => {
                let d = match rest.trim() {
                    "domain=real" => Domain::Real,
                    "domain=positive" => Domain::Positive,
                    _ => return Err(err("expected `domain=real` or `domain=positive` after `;`")),
                };
                (body, Some(d))
            }
        };
        let (name, args) = match body.split_once(':') {
            None => (body.trim(), ""),
            Some((n, a)) => (n.trim(), a.trim()),
        };
        let kind = if name == "pl" {
            let points = args
                .split(',')
                .map(|pair| {
                    let (x, y) = pair.split_once(':').ok_or_else(|| err("breakpoints look like `x:y`"))?;
                    let x: f64 = x.trim().parse().map_err(|_| err("bad breakpoint abscissa"))?;
                    let y: f64 = y.trim().parse().map_err(|_| err("bad breakpoint value"))?;
                    Ok((x, y))
                })
                .collect::<Result<Vec<_>>>()?;
            UtilityKind::PiecewiseLinear { points }
        } else {
            let mut params = Vec::new();
            for kv in args.split(',').filter(|kv| !kv.trim().is_empty()) {
                let (k, v) = kv.split_once('=').ok_or_else(|| err("parameters look like `name=value`"))?;
                let v: f64 = v.trim().parse().map_err(|_| err("parameter value is not a number"))?;
                params.push((k.trim().to_string(), v));
            }
            let get = |key: &str| -> Result<f64> {
                params
                    .iter()
                    .find(|(k, _)| k == key)
                    .map(|p| p.1)
                    .ok_or_else(|| err(&format!("missing parameter `{key}`")))
            };
            let allow = |keys: &[&str]| -> Result<()> {
                match params.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
                    Some((k, _)) => Err(err(&format!("unknown parameter `{k}`"))),
                    None => Ok(()),
                }
            };
            match name {
                "capped_sqrt" => {
                    allow(&["cap"])?;
                    UtilityKind::CappedSqrt { cap: get("cap")? }
                }
                "log" => {
                    allow(&[])?;
                    UtilityKind::Log
                }
                "power" => {
                    allow(&["alpha"])?;
                    UtilityKind::Power { alpha: get("alpha")? }
                }
                "neg_exp" => {
                    allow(&["rate"])?;
                    UtilityKind::NegExp { rate: get("rate")? }
                }
                "linear_cap" => {
                    allow(&["slope", "cap"])?;
                    UtilityKind::LinearCap {
                        slope: get("slope")?,
                        cap: get("cap")?,
                    }
                }
                _ => return Err(err("unknown utility kind")),
            }
        };
        let spec = UtilitySpec::new(kind).map_err(|e| err(&e.to_string()))?;
        Ok(match domain {
            Some(d) => spec.with_domain(d),
            None => spec,
        })
    }
}

impl fmt::Display for UtilitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            UtilityKind::CappedSqrt { cap } => write!(f, "capped_sqrt:cap={cap}")?,
            UtilityKind::Log => write!(f, "log")?,
            UtilityKind::Power { alpha } => write!(f, "power:alpha={alpha}")?,
            UtilityKind::NegExp { rate } => write!(f, "neg_exp:rate={rate}")?,
            UtilityKind::LinearCap { slope, cap } => write!(f, "linear_cap:slope={slope},cap={cap}")?,
            UtilityKind::PiecewiseLinear { points } => {
                let body: Vec<String> = points.iter().map(|(x, y)| format!("{x}:{y}")).collect();
                write!(f, "pl:{}", body.join(","))?
            }
        }
        if self.domain != self.kind.native_domain() {
            let d = match self.domain {
                Domain::Real => "real",
                Domain::Positive => "positive",
            };
            write!(f, ";domain={d}")?;
        }
        if self.shift != 0.0 {
            write!(f, " (+{})", self.shift)?;
        }
        Ok(())
    }
}

/// `U(x) <= C (x^alpha + 1)` on `grid` and as `x → ∞`.
pub fn check_growth(u: &UtilitySpec, c: f64, alpha: f64, grid: &[f64]) -> bool {
    if !(c > 0.0) || !(0.0..1.0).contains(&alpha) {
        return false;
    }
    let bound = |x: f64| c * (x.powf(alpha) + 1.0);
    if grid.iter().filter(|&&x| x >= 0.0).any(|&x| u.evaluate(x) > bound(x)) {
        return false;
    }
    let sup = u.supremum();
    if sup.is_finite() {
        return alpha > 0.0 || sup <= 2.0 * c;
    }
    match &u.kind {
        UtilityKind::Log => alpha > 0.0,
        UtilityKind::Power { alpha: a } => *a < alpha || (*a == alpha && c >= 1.0 && (c > 1.0 || u.shift <= c)),
        // Unbounded piecewise-linear utilities grow linearly.
        _ => false,
    }
}

/// Chord interpolation of `u` through `points` and the largest gap
/// `U - PL` on a ten-fold refinement of the points.
pub fn pl_under_approximation(u: &UtilitySpec, points: &[f64]) -> Result<(UtilitySpec, f64)> {
    if points.len() < 2 {
        return Err(Error::BadParameters("need at least two approximation points".into()));
    }
    if points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::PointsNotIncreasing);
    }
    let mut nodes = Vec::with_capacity(points.len());
    for &x in points {
        let v = u.evaluate(x);
        if !v.is_finite() {
            return Err(Error::PointsOutsideDomain { x });
        }
        nodes.push((x, v));
    }
    let pl = UtilitySpec::new(UtilityKind::PiecewiseLinear { points: nodes })?.with_domain(u.domain);
    let mut gap = 0.0f64;
    for w in points.windows(2) {
        for k in 0..=10 {
            let x = w[0] + (w[1] - w[0]) * k as f64 / 10.0;
            gap = gap.max(u.evaluate(x) - pl.evaluate(x));
        }
    }
    Ok((pl, gap))
}
