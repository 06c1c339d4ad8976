//! Friction law and mass sources (rain minus infiltration).

/// Strengths of the water–plant (`alpha_p`) and water–soil (`alpha_s`)
/// interactions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrictionParams {
    pub alpha_p: f64,
    pub alpha_s: f64,
}

impl FrictionParams {
    pub fn new(alpha_p: f64, alpha_s: f64) -> Self {
        FrictionParams { alpha_p, alpha_s }
    }

    /// Drag coefficient `K(h, θ) = α_p h (1 − θ) + θ α_s`.
    #[inline]
    pub fn k(&self, h: f64, theta: f64) -> f64 {
        self.alpha_p * h * (1.0 - theta) + theta * self.alpha_s
    }
}

pub fn friction_k(h: f64, theta: f64, params: &FrictionParams) -> f64 {
    params.k(h, theta)
}

/// Piecewise-constant, left-continuous rain series.
///
/// Rate `rates[k]` applies on `(times[k], times[k + 1]]`; the last rate
/// extends forever and the rate is zero up to and including `times[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyetograph {
    times: Vec<f64>,
    rates: Vec<f64>,
}

impl Hyetograph {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, String> {
        if points.is_empty() {
            return Err("hyetograph has no rows".into());
        }
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err("hyetograph times must be strictly increasing".into());
        }
        if points.iter().any(|p| !(p.1 >= 0.0) || !p.0.is_finite()) {
            return Err("hyetograph rates must be finite and nonnegative".into());
        }
        let (times, rates) = points.into_iter().unzip();
        Ok(Hyetograph { times, rates })
    }

    pub fn rate(&self, t: f64) -> f64 {
        // number of breakpoints strictly before t
        let k = self.times.partition_point(|&tk| tk < t);
        if k == 0 {
            0.0
        } else {
            self.rates[k - 1]
        }
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.rates.iter().copied())
    }

    fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rain {
    Constant(f64),
    Hyetograph(Hyetograph),
}

impl Rain {
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            Rain::Constant(r) => *r,
            Rain::Hyetograph(h) => h.rate(t),
        }
    }

    pub fn max_rate(&self) -> f64 {
        match self {
            Rain::Constant(r) => *r,
            Rain::Hyetograph(h) => h.max_rate(),
        }
    }
}

impl Default for Rain {
    fn default() -> Self {
        Rain::Constant(0.0)
    }
}

/// Infiltration laws. Each optionally ramps linearly from zero at `h = 0` to
/// full strength at `h = gate_depth`, which keeps the rate continuous in `h`
/// and stops a dry cell from infiltrating.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Infiltration {
    #[default]
    None,
    Constant {
        rate: f64,
        gate_depth: Option<f64>,
    },
    /// `f_c + (f_0 − f_c) e^{−k t}`.
    Horton {
        f0: f64,
        fc: f64,
        k: f64,
        gate_depth: Option<f64>,
    },
}

impl Infiltration {
    pub fn rate(&self, t: f64, h: f64) -> f64 {
        match *self {
            Infiltration::None => 0.0,
            Infiltration::Constant { rate, gate_depth } => rate * gate(h, gate_depth),
            Infiltration::Horton {
                f0,
                fc,
                k,
                gate_depth,
            } => (fc + (f0 - fc) * (-k * t.max(0.0)).exp()) * gate(h, gate_depth),
        }
    }

    /// Upper bound `ι_m` of the rate over all `t ≥ 0`, `h ≥ 0`.
    pub fn bound(&self) -> f64 {
        match *self {
            Infiltration::None => 0.0,
            Infiltration::Constant { rate, .. } => rate.max(0.0),
            Infiltration::Horton { f0, fc, .. } => f0.max(fc).max(0.0),
        }
    }

    pub fn depends_on_depth(&self) -> bool {
        match *self {
            Infiltration::None => false,
            Infiltration::Constant { gate_depth, .. } | Infiltration::Horton { gate_depth, .. } => {
                gate_depth.is_some_and(|g| g > 0.0)
            }
        }
    }
}

#[inline]
fn gate(h: f64, gate_depth: Option<f64>) -> f64 {
    match gate_depth {
        Some(g) if g > 0.0 => (h.max(0.0) / g).min(1.0),
        _ => 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceModel {
    pub rain: Rain,
    pub infiltration: Infiltration,
}

impl SourceModel {
    pub fn none() -> Self {
        SourceModel::default()
    }

    /// True when the model can never add or remove water.
    pub fn is_inactive(&self) -> bool {
        self.rain.max_rate() == 0.0 && matches!(self.infiltration, Infiltration::None)
    }

    /// `M = r(t) − θ ι(t, h)`, in m/s.
    pub fn mass_source(&self, t: f64, h: f64, theta: f64) -> f64 {
        self.rain.rate(t) - theta * self.infiltration.rate(t, h)
    }
}
