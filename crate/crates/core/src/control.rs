//! Discrete PI(D) controllers and the reactor temperature cascade.
//!
//! The outer loop measures `T_R` and emits setpoints for the jacket and the
//! external heat exchanger; two inner loops turn those setpoints into inlet
//! water temperatures.

use serde::{Deserialize, Serialize};

use crate::bounds::Interval;
use crate::error::{Error, Result};
use crate::reactor::PhysicalState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidConfig {
    pub kp: f64,
    /// 1/s
    pub ki: f64,
    /// s
    pub kd: f64,
    pub setpoint: f64,
    pub u_ss: f64,
    pub output: Interval,
}

impl PidConfig {
    pub fn validate(&self) -> Result<()> {
        if self.output.lo >= self.output.hi {
            return Err(Error::Config("PID output box needs min < max".into()));
        }
        if ![self.kp, self.ki, self.kd, self.setpoint, self.u_ss].iter().all(|v| v.is_finite()) {
            return Err(Error::Config("PID parameters must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
    pub initialized: bool,
}

/// One controller update: `e = measurement - setpoint`,
/// `u = clamp(u_ss + kp e + ki I + kd de/dt)`.
///
/// The integral is not allowed to move further past the value that puts the
/// unsaturated output on the box boundary (conditional integration).
pub fn pid_step(cfg: &PidConfig, st: &PidState, measurement: f64, dt: f64) -> (f64, PidState) {
    debug_assert!(dt > 0.0);
    let e = measurement - cfg.setpoint;
    let de = if st.initialized { (e - st.prev_error) / dt } else { 0.0 };
    let base = cfg.u_ss + cfg.kp * e + cfg.kd * de;
    let mut integral = st.integral + e * dt;
    if cfg.ki != 0.0 {
        let a = (cfg.output.lo - base) / cfg.ki;
        let b = (cfg.output.hi - base) / cfg.ki;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        integral = integral.clamp(lo.min(st.integral), hi.max(st.integral));
    }
    let out = cfg.output.clamp(base + cfg.ki * integral);
    (
        out,
        PidState {
            integral,
            prev_error: e,
            initialized: true,
        },
    )
}

/// Affine map from the outer controller's correction `v` to one inner
/// setpoint: `clamp(u_ss + scale * v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputMap {
    pub u_ss: f64,
    pub scale: f64,
    pub output: Interval,
}

impl OutputMap {
    pub fn apply(&self, v: f64) -> f64 {
        self.output.clamp(self.u_ss + self.scale * v)
    }

    /// Range of `v` for which this map is unsaturated.
    fn admissible(&self) -> Interval {
        let a = (self.output.lo - self.u_ss) / self.scale;
        let b = (self.output.hi - self.u_ss) / self.scale;
        Interval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }
}

/// Outer reactor-temperature loop. Gains and setpoint are shared by both
/// output maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterLoop {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub setpoint: f64,
    pub jacket_map: OutputMap,
    pub ehe_map: OutputMap,
}

impl OuterLoop {
    /// Equivalent single-output PID on the correction `v`; its box is the
    /// hull of the two maps' admissible ranges so the integral keeps moving
    /// while at least one setpoint is unsaturated.
    pub fn as_pid(&self) -> PidConfig {
        let a = self.jacket_map.admissible();
        let b = self.ehe_map.admissible();
        PidConfig {
            kp: self.kp,
            ki: self.ki,
            kd: self.kd,
            setpoint: self.setpoint,
            u_ss: 0.0,
            output: Interval {
                lo: a.lo.min(b.lo),
                hi: a.hi.max(b.hi),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub outer: OuterLoop,
    /// Measures `T_J`, emits `T_J_in`. Its setpoint comes from the outer loop.
    pub jacket: PidConfig,
    /// Measures `T_EHE`, emits `T_CW_EHE_in`.
    pub ehe: PidConfig,
    /// s
    pub inner_period: f64,
    /// s
    pub outer_period: f64,
    /// Inner loops use their current setpoint as `u_ss`.
    pub inner_feedforward: bool,
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_period > 0.0 && self.outer_period >= self.inner_period) {
            return Err(Error::Config("cascade needs 0 < inner period <= outer period".into()));
        }
        let ratio = self.outer_period / self.inner_period;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::Config(
                "outer period must be an integer multiple of the inner period".into(),
            ));
        }
        for m in [self.outer.jacket_map, self.outer.ehe_map] {
            if m.output.lo >= m.output.hi || m.scale == 0.0 {
                return Err(Error::Config("outer output map needs min < max and scale != 0".into()));
            }
        }
        self.outer.as_pid().validate()?;
        self.jacket.validate()?;
        self.ehe.validate()
    }

    fn outer_every(&self) -> u64 {
        (self.outer_period / self.inner_period).round() as u64
    }

    /// Copy with new outer gains and setpoint.
    pub fn with_outer(&self, setpoint: f64, kp: f64, ki: f64) -> Self {
        let mut c = *self;
        c.outer.setpoint = setpoint;
        c.outer.kp = kp;
        c.outer.ki = ki;
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CascadeState {
    pub outer: PidState,
    pub jacket: PidState,
    pub ehe: PidState,
    pub jacket_setpoint: f64,
    pub ehe_setpoint: f64,
    pub calls: u64,
}

/// Fresh controller memory.
pub fn reset(_cfg: &CascadeConfig) -> CascadeState {
    CascadeState::default()
}

/// Inlet temperatures produced by one inner-period update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeOutput {
    pub jacket_inlet: f64,
    pub ehe_inlet: f64,
}

/// Advances the cascade by one inner period. The outer loop fires on the
/// first call and then every `outer_period / inner_period` calls.
pub fn cascade_step(
    cfg: &CascadeConfig,
    st: &CascadeState,
    x: &PhysicalState,
    dt_inner: f64,
) -> Result<(CascadeOutput, CascadeState)> {
    if (dt_inner - cfg.inner_period).abs() > 1e-9 * cfg.inner_period {
        return Err(Error::Contract(format!(
            "cascade stepped with dt {dt_inner} s, configured inner period is {} s",
            cfg.inner_period
        )));
    }
    let mut next = *st;
    if st.calls.is_multiple_of(cfg.outer_every()) {
        let (v, outer) = pid_step(&cfg.outer.as_pid(), &st.outer, x.t_reactor, cfg.outer_period);
        next.outer = outer;
        next.jacket_setpoint = cfg.outer.jacket_map.apply(v);
        next.ehe_setpoint = cfg.outer.ehe_map.apply(v);
    }
    let inner = |base: &PidConfig, sp: f64| {
        let mut c = *base;
        c.setpoint = sp;
        if cfg.inner_feedforward {
            c.u_ss = sp;
        }
        c
    };
    let (jacket_inlet, js) = pid_step(
        &inner(&cfg.jacket, next.jacket_setpoint),
        &st.jacket,
        x.t_jacket,
        dt_inner,
    );
    let (ehe_inlet, es) = pid_step(&inner(&cfg.ehe, next.ehe_setpoint), &st.ehe, x.t_ehe, dt_inner);
    next.jacket = js;
    next.ehe = es;
    next.calls += 1;
    Ok((
        CascadeOutput {
            jacket_inlet,
            ehe_inlet,
        },
        next,
    ))
}
